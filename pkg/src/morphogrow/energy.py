"""Stored energy densities ``W(X, p) = kappa(X) * W0(p)`` and their inverses.

Two base energies are provided:

``quadratic``
    ``W0(p) = (p - 1)**2 / 2``, the small-strain local model. The constitutive
    map is affine, so ``pi0(X, S) = S / kappa(X) + 1`` in closed form, but the
    stress range is bounded below by ``-kappa(X)``.
``mooney1d``
    ``W0(p) = (p - 1/p)**2``, coercive at both ends of ``(0, inf)``; every real
    stress has a unique stretch, found by safeguarded Newton.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, InvalidStretch, NoConvergence, StressOutOfModelRange
from .fields import MaterialGrid, cellwise

DEFAULT_TOL = 1e-12
MAX_NEWTON = 100
MAX_EXPANSIONS = 200


class Base(str, enum.Enum):
    QUADRATIC = "quadratic"
    MOONEY1D = "mooney1d"


def W0(base: Base, p):
    p = np.asarray(p, dtype=np.float64)
    if base is Base.QUADRATIC:
        return 0.5 * (p - 1.0) ** 2
    return (p - 1.0 / p) ** 2


def dW0(base: Base, p):
    p = np.asarray(p, dtype=np.float64)
    if base is Base.QUADRATIC:
        return p - 1.0
    return 2.0 * (p - p**-3)


def ddW0(base: Base, p):
    p = np.asarray(p, dtype=np.float64)
    if base is Base.QUADRATIC:
        return np.ones_like(p)
    return 2.0 + 6.0 * p**-4


@dataclass(frozen=True, eq=False)
class EnergyModel:
    """Base energy plus a cellwise-positive modulus ``kappa`` on ``grid``."""

    base: Base
    grid: MaterialGrid
    kappa: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "base", Base(self.base))
        kappa = np.array(self.kappa, dtype=np.float64)
        if kappa.shape != (self.grid.M,):
            raise InvalidArgument(f"kappa needs {self.grid.M} cell values, got {kappa.size}")
        if not np.all(np.isfinite(kappa)) or np.any(kappa <= 0):
            raise InvalidArgument("kappa must be strictly positive in every cell")
        kappa.setflags(write=False)
        object.__setattr__(self, "kappa", kappa)

    @classmethod
    def from_segments(cls, base, grid: MaterialGrid, kappa_per_segment) -> "EnergyModel":
        return cls(Base(base), grid, cellwise(grid, kappa_per_segment))

    @property
    def coercive(self) -> bool:
        """True when the base energy blows up at both ends of the stretch range."""
        return self.base is Base.MOONEY1D

    def kappa_at(self, X):
        return self.kappa[self.grid.cell_of(X)]


def _check_stretch(p):
    p = np.asarray(p, dtype=np.float64)
    if np.any(~(p > 0)):
        raise InvalidStretch("stretch must be strictly positive")
    return p


def eval_W(model: EnergyModel, X, p):
    p = _check_stretch(p)
    return model.kappa_at(X) * W0(model.base, p)


def eval_Wp(model: EnergyModel, X, p):
    p = _check_stretch(p)
    return model.kappa_at(X) * dW0(model.base, p)


def eval_Wpp(model: EnergyModel, X, p):
    p = _check_stretch(p)
    return model.kappa_at(X) * ddW0(model.base, p)


def _invert_mooney(s: np.ndarray, atol: np.ndarray) -> np.ndarray:
    # Solve dW0(p) = s elementwise; atol is the allowed |dW0(p) - s|.
    s = np.asarray(s, dtype=np.float64)
    lo = np.where(s > 0, 1.0, 0.5)
    hi = np.where(s > 0, 2.0, 1.0)
    up = s > 0
    down = s < 0
    for _ in range(MAX_EXPANSIONS):
        grow = up & (dW0(Base.MOONEY1D, hi) < s)
        shrink = down & (dW0(Base.MOONEY1D, lo) > s)
        if not (grow.any() or shrink.any()):
            break
        lo = np.where(grow, hi, lo)
        hi = np.where(grow, 2.0 * hi, hi)
        hi = np.where(shrink, lo, hi)
        lo = np.where(shrink, 0.5 * lo, lo)
    else:
        raise NoConvergence(
            f"stretch bracket not found within {MAX_EXPANSIONS} expansions; "
            "the energy is not coercive enough"
        )

    p = np.where(s > 0, hi, np.where(s < 0, lo, 1.0))
    done = s == 0
    for _ in range(MAX_NEWTON):
        r = dW0(Base.MOONEY1D, p) - s
        done |= np.abs(r) <= atol
        done |= (hi - lo) <= 4 * np.finfo(float).eps * hi
        if done.all():
            break
        lo = np.where(r < 0, p, lo)
        hi = np.where(r > 0, p, hi)
        step = p - r / ddW0(Base.MOONEY1D, p)
        bad = ~((step > lo) & (step < hi))
        p = np.where(done, p, np.where(bad, 0.5 * (lo + hi), step))
    else:
        raise NoConvergence(f"Newton did not converge in {MAX_NEWTON} iterations")
    return np.where(s == 0, 1.0, p)


def invert_cells(model: EnergyModel, S: float, tol: float = DEFAULT_TOL, cells=None) -> np.ndarray:
    """``pi0(X, S)`` for every cell (or the given cell indices)."""
    kappa = model.kappa if cells is None else model.kappa[cells]
    S = float(S)
    s = S / kappa
    if model.base is Base.QUADRATIC:
        if np.any(s <= -1.0):
            raise StressOutOfModelRange(
                f"stress {S!r} is at or below -kappa = {-float(kappa.min())!r}; "
                "the quadratic model has no positive stretch there"
            )
        return s + 1.0
    atol = tol * (1.0 + abs(S)) / kappa
    return _invert_mooney(s, atol)


def inverse_stress(model: EnergyModel, X: float, S: float, tol: float = DEFAULT_TOL) -> float:
    """Stretch ``p`` with ``dW/dp(X, p) = S``, to ``tol * (1 + |S|)``."""
    cell = model.grid.cell_of(X)
    return float(invert_cells(model, S, tol, cells=np.array([cell]))[0])


@dataclass(frozen=True)
class StretchBounds:
    p0: float
    p1: float

    def __post_init__(self):
        if not (0 < self.p0 <= 1.0 <= self.p1):
            raise InvalidArgument(f"stretch bounds must satisfy 0 < p0 <= 1 <= p1, got {self}")

    def contains(self, p, rtol: float = 1e-12) -> bool:
        p = np.asarray(p)
        return bool(np.all(p >= self.p0 * (1 - rtol)) and np.all(p <= self.p1 * (1 + rtol)))


def stretch_bounds(model: EnergyModel, sigma0: float, sigma1: float, tol: float = DEFAULT_TOL) -> StretchBounds:
    """Uniform stretch bounds for every stress in ``[sigma0, sigma1]``.

    ``pi0`` is increasing in ``S``, so the extreme stretches come from the
    interval endpoints (widened to include ``S = 0``), evaluated once per
    distinct modulus.
    """
    if sigma0 > sigma1:
        raise InvalidArgument(f"need sigma0 <= sigma1, got ({sigma0!r}, {sigma1!r})")
    reps = np.unique(model.kappa, return_index=True)[1]
    low = invert_cells(model, min(sigma0, 0.0), tol, cells=reps)
    high = invert_cells(model, max(sigma1, 0.0), tol, cells=reps)
    return StretchBounds(float(low.min()), float(high.max()))
