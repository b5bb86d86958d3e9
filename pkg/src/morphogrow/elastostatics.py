"""Elastic equilibrium between two rigid plates for a given growth field.

Between the plates the Euler-Lagrange equation makes the stress ``S`` constant,
so each cell carries the stretch ``pi0(X, S)`` and the only unknown is the
scalar ``S``. It is fixed by the plate distance::

    Phi(S) = sum_cells pi0(X_mid, S) * G * width - ell0 = 0

``Phi`` is strictly increasing with ``dPhi/dS = sum G * width / W_pp(X, pi0)``,
which drives a bracketed Newton iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .energy import Base, EnergyModel, dW0, ddW0, invert_cells
from .errors import IncompatibleGrids, InvalidArgument, InvalidGrowthField, NoConvergence, NoEquilibrium
from .fields import GrowthBounds, GrowthField

MAX_EXPANSIONS = 200
MAX_NEWTON = 100
INNER_TOL = 1e-14
BOUNDARY_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class EquilibriumState:
    """Solved elastic state for one growth field.

    ``stretch`` is the elastic part of the deformation gradient per cell, so the
    total gradient ``dy/dX`` equals ``stretch * G.values``.
    """

    G: GrowthField
    S: float
    stretch: np.ndarray
    g_nodes: np.ndarray
    y_nodes: np.ndarray
    ell0: float
    iterations: int = 0
    residual: float = 0.0

    @property
    def grid(self):
        return self.G.grid

    @property
    def interface_images(self) -> np.ndarray:
        return self.y_nodes[list(self.grid.interfaces)]


def growth_map(G: GrowthField) -> np.ndarray:
    """Node values of ``g`` with ``g(0) = 0`` and ``g' = G``."""
    if np.any(G.values <= 0):
        raise InvalidGrowthField("growth map needs a strictly positive field")
    return np.concatenate([[0.0], np.cumsum(G.values * G.grid.widths)])


def _check_grids(model: EnergyModel, G: GrowthField):
    if not model.grid.same_as(G.grid):
        raise IncompatibleGrids("energy model and growth field use different grids")


def _phi(model, G, S, ell0, tol=INNER_TOL):
    p = invert_cells(model, S, tol)
    gw = G.values * G.grid.widths
    return float(np.dot(p, gw)) - ell0, p


def residual_phi(model: EnergyModel, G: GrowthField, S: float, ell0: float) -> float:
    _check_grids(model, G)
    return _phi(model, G, S, ell0)[0]


def dphi_dS(model: EnergyModel, G: GrowthField, S: float) -> float:
    p = invert_cells(model, S, INNER_TOL)
    wpp = model.kappa * ddW0(model.base, p)
    return float(np.sum(G.values * G.grid.widths / wpp))


def _build_state(G, S, p, ell0, iterations, residual):
    stretch = np.array(p, dtype=np.float64)
    g = growth_map(G)
    y = np.concatenate([[0.0], np.cumsum(stretch * G.values * G.grid.widths)])
    for arr in (stretch, g, y):
        arr.setflags(write=False)
    return EquilibriumState(G, float(S), stretch, g, y, float(ell0), iterations, residual)


def solve_stress(
    model: EnergyModel, G: GrowthField, ell0: float | None = None, tol: float | None = None
) -> EquilibriumState:
    """Solve for the constant stress that puts the grown body between the plates.

    Parameters
    ----------
    model : EnergyModel
    G : GrowthField
    ell0 : float, optional
        Plate distance; defaults to the reference length ``L0``.
    tol : float, optional
        Absolute tolerance on ``|Phi(S)| = |y(L0) - ell0|``; defaults to
        ``1e-12 * ell0``.

    Raises
    ------
    NoEquilibrium
        No positive-stretch state fits between the plates (possible only for
        the quadratic model, whose stress is bounded below by ``-kappa``).
    NoConvergence
        Newton failed to reach ``tol``.
    """
    _check_grids(model, G)
    ell0 = G.grid.L0 if ell0 is None else float(ell0)
    if not (math.isfinite(ell0) and ell0 > 0):
        raise InvalidArgument(f"plate distance ell0 must be positive, got {ell0!r}")
    tol = 1e-12 * ell0 if tol is None else float(tol)

    phi0 = G.natural_length - ell0
    if phi0 == 0.0:
        return _build_state(G, 0.0, np.ones(G.grid.M), ell0, 0, 0.0)

    # Bracket: Phi(0) has the sign of L_G - ell0, the root lies on the other side.
    direction = -1.0 if phi0 > 0 else 1.0
    limit = -float(model.kappa.min()) if (model.base is Base.QUADRATIC and direction < 0) else -math.inf
    near, far = 0.0, 0.0
    phi_near = phi0
    step = 1.0
    for _ in range(MAX_EXPANSIONS):
        trial = direction * step
        if trial <= limit:
            trial = 0.5 * (near + limit)
            if not limit < trial < near:
                break  # bracket has collapsed onto the quadratic stress floor
        phi_trial, _ = _phi(model, G, trial, ell0)
        if abs(phi_trial) <= tol:
            p = invert_cells(model, trial, INNER_TOL)
            return _build_state(G, trial, p, ell0, 0, phi_trial)
        if math.copysign(1.0, phi_trial) != math.copysign(1.0, phi0):
            far = trial
            break
        near, phi_near = trial, phi_trial
        step *= 2.0
    if far == 0.0:
        raise NoEquilibrium(
            f"no stress bracket found (L_G={G.natural_length!r}, ell0={ell0!r}); "
            "the energy cannot compress the grown body into the gap"
        )

    lo, hi = min(near, far), max(near, far)
    # Secant guess inside the bracket as the starting point.
    S = near - phi_near * (far - near) / (_phi(model, G, far, ell0)[0] - phi_near)
    if not lo < S < hi:
        S = 0.5 * (lo + hi)
    for it in range(1, MAX_NEWTON + 1):
        phi, p = _phi(model, G, S, ell0)
        if abs(phi) <= tol:
            return _build_state(G, S, p, ell0, it, phi)
        if phi < 0:
            lo = S
        else:
            hi = S
        newton = S - phi / dphi_dS(model, G, S)
        S_next = newton if lo < newton < hi else 0.5 * (lo + hi)
        if S_next == S:
            break
        S = S_next
    raise NoConvergence(
        f"stress Newton iteration stalled at S={S!r} with |Phi|={abs(phi)!r} > tol={tol!r}"
    )


def stress_bounds(model: EnergyModel, bounds: GrowthBounds, ell0: float) -> tuple[float, float]:
    """Interval ``[Sigma0, Sigma1]`` containing ``S(G)`` for every ``G`` in the ball.

    The mean value argument gives a stretch equal to ``ell0 / L_G`` somewhere,
    and ``L_G`` ranges over ``[Gamma0 L0, Gamma1 L0]``.
    """
    L0 = bounds.center.grid.L0
    p_small = ell0 / (bounds.gamma1 * L0)
    p_large = ell0 / (bounds.gamma0 * L0)
    reps = np.unique(model.kappa)
    sigma0 = min(0.0, float(np.min(reps * dW0(model.base, p_small))))
    sigma1 = max(0.0, float(np.max(reps * dW0(model.base, p_large))))
    return sigma0, sigma1


def interface_image(state: EquilibriumState, X) -> np.ndarray | float:
    """Current position ``y(X)`` by linear interpolation of the node images."""
    nodes = state.grid.nodes
    X_arr = np.asarray(X, dtype=np.float64)
    if np.any(X_arr < 0) or np.any(X_arr > nodes[-1]) or np.any(~np.isfinite(X_arr)):
        raise InvalidArgument(f"X outside [0, {nodes[-1]!r}]")
    out = np.interp(X_arr, nodes, state.y_nodes)
    return float(out) if out.ndim == 0 else out


def inverse_deformation(state: EquilibriumState, x) -> np.ndarray | float:
    """Reference coordinate ``X`` with ``y(X) = x``."""
    y = state.y_nodes
    top = max(state.ell0, y[-1]) * (1 + BOUNDARY_RTOL)
    x_arr = np.asarray(x, dtype=np.float64)
    if np.any(x_arr < 0) or np.any(x_arr > top) or np.any(~np.isfinite(x_arr)):
        raise InvalidArgument(f"x outside [0, {state.ell0!r}]")
    out = np.interp(x_arr, y, state.grid.nodes)
    return float(out) if out.ndim == 0 else out
