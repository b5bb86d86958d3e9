"""Closed-form solution for a body made of two homogeneous segments.

With piecewise-constant moduli, growth and transport coefficients the elastic
map is piecewise affine,

    phi(z) = A0 + B0 z  on [0, zI],     A1 + B1 z  on (zI, g(L0)],

and the nutrient profile is a sum of exponentials on each image segment. Both
reduce to small algebraic systems, which makes this module an independent
check on the general grid-based solvers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .elastostatics import solve_stress
from .energy import Base, EnergyModel, dW0, invert_cells
from .errors import InvalidArgument, NoEquilibrium, SolverFailure
from .fields import GrowthField, two_segment_grid
from .nutrients import NutrientParams, solve_nutrients


@dataclass(frozen=True)
class TwoSegmentConfig:
    L0: float = 1.0
    XI: float = 0.5
    ell0: float = 1.0
    kappa: tuple[float, float] = (1.0, 1.0)
    base: Base = Base.QUADRATIC
    G: tuple[float, float] = (1.0, 1.0)
    D0: tuple[float, float] = (1.0, 1.0)
    beta0: tuple[float, float] = (1.0, 1.0)
    nL: float = 1.0
    nR: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "base", Base(self.base))
        for name in ("kappa", "G", "D0", "beta0"):
            val = tuple(float(v) for v in getattr(self, name))
            if len(val) != 2 or min(val) <= 0 or not all(map(math.isfinite, val)):
                raise InvalidArgument(f"{name} needs two positive values, got {val}")
            object.__setattr__(self, name, val)
        if not 0 < self.XI < self.L0:
            raise InvalidArgument(f"XI={self.XI!r} must lie in (0, L0={self.L0!r})")
        if not self.ell0 > 0:
            raise InvalidArgument("ell0 must be positive")
        if not (self.nL >= 0 and self.nR >= 0):
            raise InvalidArgument("boundary concentrations must be nonnegative")


@dataclass(frozen=True)
class TwoSegmentElastic:
    zI: float
    gL: float
    A: tuple[float, float]
    B: tuple[float, float]
    S: float
    xI: float
    ell0: float

    def phi(self, z):
        z = np.asarray(z, dtype=np.float64)
        return np.where(z <= self.zI, self.A[0] + self.B[0] * z, self.A[1] + self.B[1] * z)


def elastic_residuals(config: TwoSegmentConfig, el: TwoSegmentElastic) -> np.ndarray:
    """``(Phi1, Phi2, Phi3, Phi4)``: left plate, right plate, continuity, stress balance."""
    (A0, A1), (B0, B1) = el.A, el.B
    k0, k1 = config.kappa
    return np.array([
        A0 + B0 * 0.0,
        A1 + B1 * el.gL - config.ell0,
        A0 + B0 * el.zI - (A1 + B1 * el.zI),
        k0 * float(dW0(config.base, B0)) - k1 * float(dW0(config.base, B1)),
    ])


def solve_elastic(config: TwoSegmentConfig) -> TwoSegmentElastic:
    G0, G1 = config.G
    k0, k1 = config.kappa
    zI = config.XI * G0
    gL = zI + (config.L0 - config.XI) * G1
    right = gL - zI
    ell0 = config.ell0

    if config.base is Base.QUADRATIC:
        # B0 zI + B1 right = ell0 and k0 B0 - k1 B1 = k0 - k1, by Cramer's rule.
        det = -zI * k1 - right * k0
        B0 = (-ell0 * k1 - right * (k0 - k1)) / det
        B1 = (zI * (k0 - k1) - k0 * ell0) / det
        if B0 <= 0 or B1 <= 0:
            raise NoEquilibrium(
                f"quadratic two-segment model has no positive-stretch solution (B0={B0!r}, B1={B1!r})"
            )
    else:
        grid = two_segment_grid(config.L0, config.XI, 1)
        model = EnergyModel.from_segments(config.base, grid, config.kappa)

        def length_mismatch(S):
            p = invert_cells(model, S, 1e-15)
            return p[0] * zI + p[1] * right - ell0

        f0 = length_mismatch(0.0)
        if f0 == 0.0:
            S = 0.0
        else:
            step = -1.0 if f0 > 0 else 1.0
            for _ in range(200):
                if (length_mismatch(step) > 0) != (f0 > 0):
                    break
                step *= 2.0
            else:
                raise NoEquilibrium("stress bracket not found for the two-segment oracle")
            lo, hi = sorted((step / 2 if abs(step) > 1 else 0.0, step))
            S = brentq(length_mismatch, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=500)
        B0, B1 = (float(v) for v in invert_cells(model, S, 1e-15))

    A0 = 0.0
    A1 = (B0 - B1) * zI
    S = k0 * float(dW0(config.base, B0))
    return TwoSegmentElastic(zI, gL, (A0, A1), (B0, B1), S, B0 * zI, ell0)


def elastic_from_stretches(xI: float, ell0: float, B) -> TwoSegmentElastic:
    """Piecewise-affine map with prescribed stretches ``B`` and interface image ``xI``.

    For parameter sets that give the stretches directly instead of the growth
    and moduli producing them; ``S`` is left undefined.
    """
    B0, B1 = (float(b) for b in B)
    if not (B0 > 0 and B1 > 0 and 0 < xI < ell0):
        raise InvalidArgument("need positive stretches and 0 < xI < ell0")
    zI = xI / B0
    gL = zI + (ell0 - xI) / B1
    return TwoSegmentElastic(zI, gL, (0.0, (B0 - B1) * zI), (B0, B1), math.nan, float(xI), float(ell0))


@dataclass(frozen=True)
class TwoSegmentNutrients:
    """Exponential nutrient profile on ``[0, xI]`` and ``[xI, ell0]``.

    ``shifted`` holds the coefficients actually solved for, in the basis
    ``exp(lam0 (x - xI)), exp(-lam0 x)`` on the left and
    ``exp(lam1 (x - ell0)), exp(-lam1 (x - xI))`` on the right, which never
    overflows. ``c`` converts them to ``(c0+, c0-, c1+, c1-)`` in the plain
    ``exp(+-lam x)`` basis.
    """

    lambdas: tuple[float, float]
    D: tuple[float, float]
    xI: float
    ell0: float
    shifted: tuple[float, float, float, float]
    c: tuple[float, float, float, float] = field(init=False)

    def __post_init__(self):
        (l0, l1), (p0, q0, p1, q1) = self.lambdas, self.shifted
        with np.errstate(over="ignore"):
            c = (
                p0 * math.exp(-l0 * self.xI),
                q0,
                p1 * math.exp(-l1 * self.ell0),
                q1 * float(np.exp(l1 * self.xI)),
            )
        object.__setattr__(self, "c", c)

    def __call__(self, x):
        x = np.asarray(x, dtype=np.float64)
        (l0, l1), (p0, q0, p1, q1) = self.lambdas, self.shifted
        left = p0 * np.exp(l0 * (x - self.xI)) + q0 * np.exp(-l0 * x)
        right = p1 * np.exp(l1 * (x - self.ell0)) + q1 * np.exp(-l1 * (x - self.xI))
        return np.where(x <= self.xI, left, right)

    def flux(self, x):
        """``D n'`` with the one-sided coefficient of the segment holding ``x``."""
        x = np.asarray(x, dtype=np.float64)
        (l0, l1), (p0, q0, p1, q1) = self.lambdas, self.shifted
        left = self.D[0] * l0 * (p0 * np.exp(l0 * (x - self.xI)) - q0 * np.exp(-l0 * x))
        right = self.D[1] * l1 * (p1 * np.exp(l1 * (x - self.ell0)) - q1 * np.exp(-l1 * (x - self.xI)))
        return np.where(x <= self.xI, left, right)

    def one_sided(self, x, side: int):
        """Value and flux at ``x`` using the formula of segment ``side`` (0 or 1)."""
        (l0, l1), (p0, q0, p1, q1) = self.lambdas, self.shifted
        if side == 0:
            v = p0 * math.exp(l0 * (x - self.xI)) + q0 * math.exp(-l0 * x)
            f = self.D[0] * l0 * (p0 * math.exp(l0 * (x - self.xI)) - q0 * math.exp(-l0 * x))
        else:
            v = p1 * math.exp(l1 * (x - self.ell0)) + q1 * math.exp(-l1 * (x - self.xI))
            f = self.D[1] * l1 * (p1 * math.exp(l1 * (x - self.ell0)) - q1 * math.exp(-l1 * (x - self.xI)))
        return v, f


def interface_determinant(lam0: float, lam1: float, xI: float, ell0: float, A: float) -> float:
    """Closed-form determinant of the row-scaled 4x4 nutrient matrix.

    ``A = D_R p_R lam1 / (D_L p_L lam0)`` is the flux ratio across the interface.
    """
    pre = math.exp(-ell0 * lam1 - xI * (lam0 + lam1))
    return pre * (
        (1 + A) * (math.exp(2 * xI * lam0 + 2 * ell0 * lam1) - math.exp(2 * xI * lam1))
        + (A - 1) * (math.exp(2 * xI * (lam0 + lam1)) - math.exp(2 * ell0 * lam1))
    )


def interface_matrix(lam0: float, lam1: float, xI: float, ell0: float, A: float) -> np.ndarray:
    """The row-scaled 4x4 matrix in the plain exponential basis."""
    e = math.exp
    return np.array([
        [1.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, e(lam1 * ell0), e(-lam1 * ell0)],
        [e(lam0 * xI), e(-lam0 * xI), -e(lam1 * xI), -e(-lam1 * xI)],
        [e(lam0 * xI), -e(-lam0 * xI), -A * e(lam1 * xI), A * e(-lam1 * xI)],
    ])


def solve_nutrients_closed_form(config: TwoSegmentConfig, elastic: TwoSegmentElastic) -> TwoSegmentNutrients:
    B0, B1 = elastic.B
    xI, ell0 = elastic.xI, elastic.ell0
    if not 0 < xI < ell0:
        raise InvalidArgument(f"interface image xI={xI!r} must lie in (0, ell0={ell0!r})")
    D = (config.D0[0] * B0, config.D0[1] * B1)
    l0 = math.sqrt(config.beta0[0] / config.D0[0]) / B0
    l1 = math.sqrt(config.beta0[1] / config.D0[1]) / B1
    eL = math.exp(-l0 * xI)
    eR = math.exp(-l1 * (ell0 - xI))
    mat = np.array([
        [eL, 1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, eR],
        [1.0, eL, -eR, -1.0],
        [D[0] * l0, -D[0] * l0 * eL, -D[1] * l1 * eR, D[1] * l1],
    ])
    rhs = np.array([config.nL, config.nR, 0.0, 0.0])
    try:
        coeffs = np.linalg.solve(mat, rhs)
    except np.linalg.LinAlgError as exc:
        raise SolverFailure(f"singular two-segment nutrient system: {exc}") from exc
    return TwoSegmentNutrients((l0, l1), D, xI, ell0, tuple(float(v) for v in coeffs))


def nutrient_residuals(config: TwoSegmentConfig, sol: TwoSegmentNutrients) -> np.ndarray:
    """``(Psi1..Psi4)``: both plates, value continuity and flux continuity at ``xI``."""
    v0, f0 = sol.one_sided(sol.xI, 0)
    v1, f1 = sol.one_sided(sol.xI, 1)
    return np.array([
        float(sol(0.0)) - config.nL,
        float(sol(sol.ell0)) - config.nR,
        v0 - v1,
        f0 - f1,
    ])


def segment_averages(config: TwoSegmentConfig, elastic: TwoSegmentElastic, nutrients: TwoSegmentNutrients):
    """Exact means of ``n`` over ``[0, xI]`` and ``[xI, ell0]``."""
    (l0, l1), (p0, q0, p1, q1) = nutrients.lambdas, nutrients.shifted
    xI, ell0 = elastic.xI, elastic.ell0
    left = (p0 + q0) * -math.expm1(-l0 * xI) / l0
    right = (p1 + q1) * -math.expm1(-l1 * (ell0 - xI)) / l1
    return left / xI, right / (ell0 - xI)


@dataclass
class OracleTable:
    refine: list[int]
    stress_err: list[float]
    nutrient_err: list[float]
    orders: list[float]

    def rows(self):
        """Data rows followed by order rows, as written to ``oracle_errors.csv``."""
        out = [(str(r), s, n, None) for r, s, n in zip(self.refine, self.stress_err, self.nutrient_err)]
        for (a, b), o in zip(zip(self.refine[:-1], self.refine[1:]), self.orders):
            out.append((f"{a}:{b}", None, None, o))
        return out


def oracle_compare(config: TwoSegmentConfig, refine_levels=(4, 8, 16, 32)) -> OracleTable:
    """Run the grid solvers on the two-cell grid and measure them against the closed form."""
    levels = [int(r) for r in refine_levels]
    grid = two_segment_grid(config.L0, config.XI, 1)
    model = EnergyModel.from_segments(config.base, grid, config.kappa)
    G = GrowthField.from_segments(grid, config.G)
    params = NutrientParams.from_segments(grid, config.D0, config.beta0, config.nL, config.nR)

    elastic = solve_elastic(config)
    exact = solve_nutrients_closed_form(config, elastic)
    state = solve_stress(model, G, config.ell0)

    table = OracleTable([], [], [], [])
    for r in levels:
        sol = solve_nutrients(params, state, r)
        table.refine.append(r)
        table.stress_err.append(abs(state.S - elastic.S))
        table.nutrient_err.append(float(np.max(np.abs(sol.n - exact(sol.x_nodes)))))
    for i in range(1, len(levels)):
        e_prev, e = table.nutrient_err[i - 1], table.nutrient_err[i]
        if e_prev > 0 and e > 0:
            table.orders.append(math.log(e_prev / e) / math.log(levels[i] / levels[i - 1]))
        else:
            table.orders.append(float("nan"))
    return table
