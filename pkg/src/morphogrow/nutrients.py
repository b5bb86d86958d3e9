"""Steady nutrient transport on the deformed body and its pull-back.

On the current configuration ``[0, ell0]`` the concentration solves::

    -(D n')' + beta n = 0,   n(0) = nL,   n(ell0) = nR

where the coefficients inherit the reference values through the elastic
stretch ``p`` of each cell: ``D = p * D0`` and ``beta = beta0 / p``.

The discretisation is vertex-centred and conservative. The nutrient grid is
the image of the material grid with every image cell split into ``refine``
equal subcells, so coefficient jumps sit on nodes, each dual-cell face lies
inside a single material and the pull-back to the reference nodes is an exact
nodal identification.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .elastostatics import EquilibriumState
from .errors import IncompatibleState, InvalidArgument, InvalidConfiguration, SolverFailure
from .fields import MaterialGrid, cellwise

DEFAULT_REFINE = 8


@dataclass(frozen=True, eq=False)
class NutrientParams:
    """Reference diffusivity/absorption per cell and Dirichlet data."""

    grid: MaterialGrid
    D0: np.ndarray
    beta0: np.ndarray
    nL: float = 1.0
    nR: float = 1.0

    def __post_init__(self):
        D0 = np.array(self.D0, dtype=np.float64)
        beta0 = np.array(self.beta0, dtype=np.float64)
        if D0.shape != (self.grid.M,) or beta0.shape != (self.grid.M,):
            raise InvalidArgument(f"D0 and beta0 need {self.grid.M} cell values each")
        if not np.all(np.isfinite(D0)) or np.any(D0 <= 0):
            raise InvalidArgument("D0 must be strictly positive in every cell")
        if not np.all(np.isfinite(beta0)) or np.any(beta0 < 0):
            raise InvalidArgument("beta0 must be nonnegative in every cell")
        if np.any(beta0 == 0):
            warnings.warn(
                "beta0 = 0 in some cells: degenerate diagnostic input without absorption",
                RuntimeWarning,
                stacklevel=3,
            )
        if not (self.nL >= 0 and self.nR >= 0):
            raise InvalidArgument("boundary concentrations must be nonnegative")
        D0.setflags(write=False)
        beta0.setflags(write=False)
        object.__setattr__(self, "D0", D0)
        object.__setattr__(self, "beta0", beta0)
        object.__setattr__(self, "nL", float(self.nL))
        object.__setattr__(self, "nR", float(self.nR))

    @classmethod
    def from_segments(cls, grid, D0, beta0, nL=1.0, nR=1.0) -> "NutrientParams":
        return cls(grid, cellwise(grid, D0), cellwise(grid, beta0), nL, nR)

    @property
    def n_max(self) -> float:
        return max(self.nL, self.nR)


@dataclass(frozen=True, eq=False)
class NutrientSolution:
    """Nodal concentrations on the refined image grid.

    Attributes
    ----------
    x_nodes : ndarray
        Nutrient grid nodes on ``[0, ell0]``.
    n : ndarray
        Concentration at ``x_nodes``.
    N : ndarray
        Pull-back to the material grid nodes, ``N[k] = n(y(X_k))``.
    flux : ndarray
        ``-D n'`` on each subcell (one value per face of the dual mesh).
    D, beta : ndarray
        Coefficients per subcell.
    image_nodes : ndarray
        Images of the material nodes the grid was built from.
    refine : int
    """

    x_nodes: np.ndarray
    n: np.ndarray
    N: np.ndarray
    flux: np.ndarray
    D: np.ndarray
    beta: np.ndarray
    image_nodes: np.ndarray
    refine: int


def thomas(lower: np.ndarray, diag: np.ndarray, upper: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve a tridiagonal system by forward elimination and back substitution.

    ``lower[i]`` multiplies ``x[i-1]`` in row ``i`` (``lower[0]`` unused) and
    ``upper[i]`` multiplies ``x[i+1]`` (``upper[-1]`` unused).
    """
    n = diag.size
    c = np.zeros(n)
    d = np.zeros(n)
    piv = diag[0]
    if piv == 0 or not np.isfinite(piv):
        raise SolverFailure("zero pivot in tridiagonal solve (row 0)")
    c[0] = upper[0] / piv if n > 1 else 0.0
    d[0] = rhs[0] / piv
    for i in range(1, n):
        piv = diag[i] - lower[i] * c[i - 1]
        if piv == 0 or not np.isfinite(piv):
            raise SolverFailure(f"zero pivot in tridiagonal solve (row {i})")
        c[i] = upper[i] / piv if i < n - 1 else 0.0
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / piv
    x = np.empty(n)
    x[-1] = d[-1]
    for i in range(n - 2, -1, -1):
        x[i] = d[i] - c[i] * x[i + 1]
    return x


def transformed_coefficients(params: NutrientParams, state: EquilibriumState) -> tuple[np.ndarray, np.ndarray]:
    """Cellwise ``(D_G, beta_G)`` on the image cells ``[y(X_k), y(X_k+1)]``."""
    if not params.grid.same_as(state.grid):
        raise IncompatibleState("nutrient parameters and state use different grids")
    return params.D0 * state.stretch, params.beta0 / state.stretch


def solve_image_problem(x_cells, D_cells, beta_cells, nL, nR, refine: int = DEFAULT_REFINE):
    """Discrete two-point problem on a piecewise-constant coefficient partition.

    Parameters
    ----------
    x_cells : array_like
        Strictly increasing coefficient breakpoints, ``x_cells[0] = 0``.
    D_cells, beta_cells : array_like
        One value per interval of ``x_cells``.
    refine : int
        Equal subcells per interval.

    Returns
    -------
    x, n, flux, D, beta : ndarray
        Fine nodes, nodal solution, subcell fluxes and subcell coefficients.
    """
    refine = int(refine)
    if refine < 1:
        raise InvalidArgument(f"refine must be >= 1, got {refine}")
    x_cells = np.asarray(x_cells, dtype=np.float64)
    D_cells = np.asarray(D_cells, dtype=np.float64)
    beta_cells = np.asarray(beta_cells, dtype=np.float64)
    if np.any(np.diff(x_cells) <= 0):
        raise SolverFailure("image grid is not strictly increasing")

    t = np.arange(refine) / refine
    x = (x_cells[:-1, None] + np.diff(x_cells)[:, None] * t[None, :]).ravel()
    x = np.append(x, x_cells[-1])
    D = np.repeat(D_cells, refine)
    beta = np.repeat(beta_cells, refine)
    h = np.diff(x)

    # Faces of the dual mesh sit at subcell midpoints, so the face diffusivity
    # (harmonic average of D over [x_i, x_i+1]) is the subcell value.
    k = D / h
    npts = x.size
    lower = np.zeros(npts)
    upper = np.zeros(npts)
    diag = np.ones(npts)
    rhs = np.zeros(npts)
    rhs[0], rhs[-1] = nL, nR
    lower[1:-1] = -k[:-1]
    upper[1:-1] = -k[1:]
    diag[1:-1] = k[:-1] + k[1:] + 0.5 * (beta[:-1] * h[:-1] + beta[1:] * h[1:])
    if npts > 2:
        # Fold the pinned boundary values into the first and last interior rows.
        rhs[1] -= lower[1] * nL
        rhs[-2] -= upper[-2] * nR
        lower[1] = 0.0
        upper[-2] = 0.0
    interior = thomas(lower[1:-1], diag[1:-1], upper[1:-1], rhs[1:-1]) if npts > 2 else np.empty(0)
    n = np.concatenate([[nL], interior, [nR]])
    flux = -D * np.diff(n) / h
    return x, n, flux, D, beta


def solve_nutrients(params: NutrientParams, state: EquilibriumState, refine: int = DEFAULT_REFINE) -> NutrientSolution:
    D_G, beta_G = transformed_coefficients(params, state)
    x, n, flux, D, beta = solve_image_problem(state.y_nodes, D_G, beta_G, params.nL, params.nR, refine)
    N = n[:: int(refine)].copy()
    for arr in (x, n, N, flux, D, beta):
        arr.setflags(write=False)
    return NutrientSolution(x, n, N, flux, D, beta, state.y_nodes, int(refine))


def _check_pair(solution: NutrientSolution, state: EquilibriumState):
    if solution.image_nodes is not state.y_nodes and not np.array_equal(solution.image_nodes, state.y_nodes):
        raise IncompatibleState("nutrient solution was computed for a different equilibrium state")


def pull_back(solution: NutrientSolution, state: EquilibriumState) -> np.ndarray:
    """Referential concentration ``N = n o y`` at the material grid nodes."""
    _check_pair(solution, state)
    return np.array(solution.n[:: solution.refine])


def evaluate_pullback(solution: NutrientSolution, state: EquilibriumState, X) -> np.ndarray:
    """``n(y(X))`` at arbitrary reference points, linear on the nutrient grid."""
    _check_pair(solution, state)
    x = np.interp(np.asarray(X, dtype=np.float64), state.grid.nodes, state.y_nodes)
    return np.interp(x, solution.x_nodes, solution.n)


def segment_average_values(solution: NutrientSolution, state: EquilibriumState) -> np.ndarray:
    """Trapezoidal mean of ``n`` over the image of each material segment."""
    _check_pair(solution, state)
    r = solution.refine
    out = []
    for seg in state.grid.segments():
        a, b = seg.start * r, seg.stop * r
        xs, ns = solution.x_nodes[a : b + 1], solution.n[a : b + 1]
        integral = float(np.sum(0.5 * (ns[1:] + ns[:-1]) * np.diff(xs)))
        out.append(integral / (xs[-1] - xs[0]))
    return np.array(out)


def local_averages(solution: NutrientSolution, state: EquilibriumState) -> tuple[float, float]:
    """Segment means ``(left, right)`` of ``n`` over ``[0, x_I]`` and ``[x_I, ell0]``."""
    if len(state.grid.interfaces) != 1:
        raise InvalidConfiguration("local averages need a two-segment material grid")
    left, right = segment_average_values(solution, state)
    return float(left), float(right)
