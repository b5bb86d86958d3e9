"""Growth laws, the growth right-hand side and explicit time stepping.

The state is a cellwise-constant growth field ``G``. Every right-hand-side
evaluation re-solves the elastic equilibrium (for stress-coupled laws) and the
nutrient problem (for nutrient-coupled laws), then applies the local law::

    dG/dt = gamma(X) * mu(S) * eta(N(X)) * G

Laws with ``mu`` and ``eta`` bounded admit the exponential sub/supersolutions
``G0 exp(c0 t) < G < G0 exp(c1 t)`` with ``c0 = min(gamma mu eta) - 1`` and
``c1 = max(gamma mu eta) + 1``; :func:`integrate` monitors this band after
every step.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .elastostatics import EquilibriumState, solve_stress
from .energy import EnergyModel
from .errors import (
    EnvelopeViolation,
    InvalidArgument,
    InvalidGrowthField,
    MorphogrowError,
    PositivityLoss,
    TimeStampedError,
)
from .fields import GrowthField, MaterialGrid, cellwise
from .nutrients import DEFAULT_REFINE, NutrientParams, NutrientSolution, evaluate_pullback, segment_average_values, solve_nutrients


class LawKind(str, enum.Enum):
    PURE = "pure"
    STRESS = "stress"
    FULL = "full"
    # mu(S) G**2: finite-time blow-up demonstration, not for production runs
    SUPERLINEAR = "superlinear"


class Method(str, enum.Enum):
    RK4 = "rk4"
    EULER = "euler"


@dataclass(frozen=True)
class StressResponse:
    """``mu(S) = a * arctan(S - b) + c``; ``kind="square"`` gives the unbounded ``S**2`` probe."""

    a: float = 1.0
    b: float = 0.0
    c: float = 1.0
    kind: str = "arctan"

    def __post_init__(self):
        if self.kind not in ("arctan", "square"):
            raise InvalidArgument(f"unknown stress response {self.kind!r}")
        if self.kind == "arctan" and not self.a >= 0:
            raise InvalidArgument(f"stress response slope a must be >= 0, got {self.a!r}")

    def __call__(self, S):
        if self.kind == "square":
            return np.square(S)
        return self.a * np.arctan(np.asarray(S) - self.b) + self.c

    def bounds(self) -> tuple[float, float]:
        if self.kind == "square":
            return 0.0, math.inf
        half = 0.5 * math.pi * self.a
        return self.c - half, self.c + half


@dataclass(frozen=True)
class NutrientResponse:
    """Nutrient factor ``eta(N)`` on ``N >= 0``.

    ``identity``
        ``eta(N) = N``.
    ``clamp``
        ``max(N - n_crit, 0) + floor``; zero growth response below the
        critical level when ``floor = 0`` (necrotic core).
    ``saturating``
        Linear ramp from ``low`` at ``N = 0`` to ``high`` at ``N = n_sat``,
        constant beyond.
    """

    kind: str = "identity"
    n_crit: float = 0.0
    floor: float = 0.0
    low: float = 0.0
    high: float = 1.0
    n_sat: float = 1.0

    def __post_init__(self):
        if self.kind not in ("identity", "clamp", "saturating"):
            raise InvalidArgument(f"unknown nutrient response {self.kind!r}")
        if self.floor < 0 or self.low < 0 or self.high < self.low or self.n_sat <= 0:
            raise InvalidArgument("nutrient response must be nonnegative and nondecreasing")

    def __call__(self, N):
        N = np.maximum(np.asarray(N, dtype=np.float64), 0.0)
        if self.kind == "identity":
            return N
        if self.kind == "clamp":
            return np.maximum(N - self.n_crit, 0.0) + self.floor
        return self.low + (self.high - self.low) * np.minimum(N / self.n_sat, 1.0)

    def bounds(self, n_lo: float, n_hi: float) -> tuple[float, float]:
        lo, hi = self(np.array([max(n_lo, 0.0), max(n_hi, 0.0)]))
        return float(lo), float(hi)


@dataclass(frozen=True)
class Envelope:
    """Exponential band ``G0 exp(c0 t) < G < G0 exp(c1 t)``."""

    c0: float
    c1: float
    G0: np.ndarray | None = None

    def __post_init__(self):
        if not self.c0 < self.c1:
            raise InvalidArgument(f"envelope needs c0 < c1, got ({self.c0!r}, {self.c1!r})")

    def lower(self, t: float):
        base = 1.0 if self.G0 is None else self.G0
        return base * math.exp(self.c0 * t)

    def upper(self, t: float):
        base = 1.0 if self.G0 is None else self.G0
        with np.errstate(over="ignore"):
            return base * (math.exp(self.c1 * t) if math.isfinite(self.c1) else math.inf)

    def default_slack(self, t: float) -> float:
        up = np.max(self.upper(t))
        return 1e-8 * float(up) if math.isfinite(up) else 0.0

    def violations(self, G: GrowthField, t: float, slack: float | None = None) -> np.ndarray:
        slack = self.default_slack(t) if slack is None else slack
        v = G.values
        ok = (v > self.lower(t) - slack) & (v < self.upper(t) + slack)
        return np.flatnonzero(~ok)


def envelope_check(G: GrowthField, t: float, env: Envelope, slack: float | None = None) -> bool:
    if t < 0:
        raise InvalidArgument("envelope time must be nonnegative")
    return env.violations(G, t, slack).size == 0


@dataclass(frozen=True, eq=False)
class GrowthLaw:
    kind: LawKind
    gamma: np.ndarray
    mu: StressResponse = field(default_factory=StressResponse)
    eta: NutrientResponse = field(default_factory=NutrientResponse)
    averaging: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", LawKind(self.kind))
        gamma = np.array(self.gamma, dtype=np.float64)
        if gamma.ndim != 1 or np.any(gamma <= 0) or not np.all(np.isfinite(gamma)):
            raise InvalidArgument("gamma must be a positive value per cell")
        gamma.setflags(write=False)
        object.__setattr__(self, "gamma", gamma)

    @classmethod
    def from_segments(cls, kind, grid: MaterialGrid, gamma, **kw) -> "GrowthLaw":
        return cls(LawKind(kind), cellwise(grid, gamma), **kw)

    @property
    def uses_stress(self) -> bool:
        return self.kind is not LawKind.PURE

    @property
    def uses_nutrients(self) -> bool:
        return self.kind is LawKind.FULL

    def local(self, G, S, N, gamma):
        """The pointwise law ``G(G, S, N, X)`` with ``gamma = gamma(X)``."""
        G = np.asarray(G, dtype=np.float64)
        mu = self.mu(S) if self.uses_stress else 1.0
        eta = self.eta(N) if self.uses_nutrients else 1.0
        power = 2 if self.kind is LawKind.SUPERLINEAR else 1
        return gamma * mu * eta * G**power

    def factor_bounds(self, n_lo: float = 0.0, n_hi: float = 1.0) -> tuple[float, float]:
        """Range of ``gamma * mu * eta`` over the declared factor bounds."""
        g = (float(self.gamma.min()), float(self.gamma.max()))
        m = self.mu.bounds() if self.uses_stress else (1.0, 1.0)
        e = self.eta.bounds(n_lo, n_hi) if self.uses_nutrients else (1.0, 1.0)
        with np.errstate(invalid="ignore"):
            corners = [a * b * c for a, b, c in itertools.product(g, m, e)]
        corners = [0.0 if math.isnan(v) else v for v in corners]
        return min(corners), max(corners)

    def envelope(self, n_max: float = 1.0, G0: GrowthField | None = None) -> Envelope:
        r0, r1 = self.factor_bounds(0.0, n_max)
        return Envelope(r0 - 1.0, r1 + 1.0, None if G0 is None else np.array(G0.values))


@dataclass
class Evaluation:
    rate: np.ndarray
    state: EquilibriumState | None = None
    nutrients: NutrientSolution | None = None


def evaluate(law, model, params, G, ell0=None, refine=DEFAULT_REFINE, stress_tol=None) -> Evaluation:
    """Right-hand side plus the equilibrium/nutrient solves it needed."""
    if law.gamma.shape != (G.grid.M,):
        raise InvalidArgument("growth law and growth field have different cell counts")
    state = nut = None
    S, N = 0.0, 1.0
    if law.uses_stress:
        state = solve_stress(model, G, ell0, stress_tol)
        S = state.S
    if law.uses_nutrients:
        nut = solve_nutrients(params, state, refine)
        if law.averaging:
            seg = segment_average_values(nut, state)
            N = np.concatenate([np.full(s.stop - s.start, v) for s, v in zip(G.grid.segments(), seg)])
        else:
            N = evaluate_pullback(nut, state, G.grid.midpoints)
    return Evaluation(law.local(G.values, S, N, law.gamma), state, nut)


def rhs(law: GrowthLaw, model: EnergyModel, params: NutrientParams, G: GrowthField, ell0=None, refine=DEFAULT_REFINE) -> np.ndarray:
    """Growth rate per cell. Rates may be negative, so this is a plain array."""
    return evaluate(law, model, params, G, ell0, refine).rate


@dataclass
class Trajectory:
    times: list[float]
    states: list[GrowthField]
    stresses: list[float]
    nutrients: list[np.ndarray] | None
    envelope: Envelope
    envelope_breach: bool = False
    breaches: list[dict] = field(default_factory=list)
    diagnostics: list[dict] = field(default_factory=list)

    @property
    def final(self) -> GrowthField:
        return self.states[-1]

    def values(self) -> np.ndarray:
        return np.array([s.values for s in self.states])


def _stage_field(grid, values, t):
    try:
        return GrowthField(grid, values)
    except InvalidGrowthField as exc:
        raise PositivityLoss(
            "growth field lost positivity during a stage; reduce dt", t, exc
        ) from exc


def integrate(
    law: GrowthLaw,
    model: EnergyModel,
    params: NutrientParams,
    T: float,
    dt: float,
    method: Method | str = Method.RK4,
    *,
    ell0: float | None = None,
    G0: GrowthField | None = None,
    allow_nonunit_initial: bool = False,
    refine: int = DEFAULT_REFINE,
    output_stride: int = 1,
    slack: float | None = None,
    on_breach: str = "raise",
    inject_fault_at: float | None = None,
    stress_tol: float | None = None,
    check_dt: bool = True,
) -> Trajectory:
    """Integrate the growth ODE with fixed explicit steps.

    Parameters
    ----------
    T, dt : float
        Horizon and step; the last step is shortened to land on ``T``.
    method : {"rk4", "euler"}
    G0 : GrowthField, optional
        Initial state; anything other than ``G = 1`` requires
        ``allow_nonunit_initial``.
    output_stride : int
        Record every ``output_stride``-th step (the final time is always kept).
    on_breach : {"raise", "flag"}
        Whether leaving the envelope raises :class:`EnvelopeViolation` or only
        marks the trajectory.
    inject_fault_at : float, optional
        Test hook: after the first step reaching this time, overwrite cell 0
        with ``upper(t) + 1`` to exercise breach detection.

    Raises
    ------
    EnvelopeViolation, PositivityLoss, TimeStampedError
    """
    method = Method(method)
    if not (T > 0 and dt > 0 and dt <= T):
        raise InvalidArgument(f"need T > 0 and 0 < dt <= T, got T={T!r}, dt={dt!r}")
    if on_breach not in ("raise", "flag"):
        raise InvalidArgument(f"on_breach must be 'raise' or 'flag', got {on_breach!r}")
    grid = model.grid
    if G0 is None:
        G0 = GrowthField.constant(grid, 1.0)
    elif not allow_nonunit_initial and not np.all(G0.values == 1.0):
        raise InvalidArgument("initial growth other than G = 1 needs allow_nonunit_initial=True")

    env = law.envelope(params.n_max if params is not None else 1.0, None if np.all(G0.values == 1.0) else G0)
    if check_dt and math.isfinite(env.c1) and env.c1 != 0 and dt > 0.5 / abs(env.c1):
        raise InvalidArgument(
            f"dt={dt!r} exceeds the stability guard 0.5/|c1| = {0.5 / abs(env.c1)!r}"
        )

    def f(G, t):
        try:
            return evaluate(law, model, params, G, ell0, refine, stress_tol)
        except MorphogrowError as exc:
            raise TimeStampedError(str(exc), t, exc) from exc

    n_steps = max(1, math.ceil(T / dt - 1e-9))
    traj = Trajectory([], [], [], [] if law.uses_nutrients else None, env)

    def record(t, G):
        traj.times.append(t)
        traj.states.append(G)
        try:
            state = solve_stress(model, G, ell0, stress_tol)
            traj.stresses.append(state.S)
        except MorphogrowError:
            if law.uses_stress:
                raise
            state = None
            traj.stresses.append(math.nan)
        if traj.nutrients is not None:
            traj.nutrients.append(np.array(solve_nutrients(params, state, refine).N))

    G = G0
    t = 0.0
    record(t, G)
    for k in range(1, n_steps + 1):
        t_next = T if k == n_steps else k * dt
        h = t_next - t
        e1 = f(G, t)
        evals = [e1]
        if method is Method.EULER:
            new = G.values + h * e1.rate
        else:
            e2 = f(_stage_field(grid, G.values + 0.5 * h * e1.rate, t), t + 0.5 * h)
            e3 = f(_stage_field(grid, G.values + 0.5 * h * e2.rate, t), t + 0.5 * h)
            e4 = f(_stage_field(grid, G.values + h * e3.rate, t), t + h)
            evals += [e2, e3, e4]
            new = G.values + h / 6.0 * (e1.rate + 2 * e2.rate + 2 * e3.rate + e4.rate)
        if inject_fault_at is not None and t_next >= inject_fault_at:
            new = np.array(new)
            new[0] = float(np.max(env.upper(t_next))) + 1.0
            inject_fault_at = None
        G = _stage_field(grid, new, t_next)
        t = t_next

        solved = [e.state for e in evals if e.state is not None]
        traj.diagnostics.append({
            "step": k,
            "t": t,
            "newton_iterations": max((s.iterations for s in solved), default=0),
            "max_residual": max((abs(s.residual) for s in solved), default=0.0),
        })

        bad = env.violations(G, t, slack)
        if bad.size:
            traj.envelope_breach = True
            traj.breaches.append({"t": t, "cells": bad.tolist()})
            if on_breach == "raise":
                record(t, G)
                mids = grid.midpoints[bad]
                raise EnvelopeViolation(
                    t, bad, mids, G.values[bad],
                    (float(np.min(env.lower(t))), float(np.max(env.upper(t)))),
                    trajectory=traj,
                )
        if k % output_stride == 0 or k == n_steps:
            record(t, G)
    return traj


@dataclass
class AssumptionReport:
    box: tuple[tuple[float, float], tuple[float, float], tuple[float, float]]
    samples: int
    sup_bound: float
    lipschitz: dict[str, float]
    comparison_holds: bool
    comparison_violations: int
    first_violation: dict | None
    flags: list[str]

    @property
    def ok(self) -> bool:
        return self.comparison_holds and not self.flags

    def to_dict(self) -> dict:
        return {
            "box": {"G": list(self.box[0]), "S": list(self.box[1]), "N": list(self.box[2])},
            "samples": self.samples,
            "M_G": self.sup_bound,
            "L_G": dict(self.lipschitz),
            "G4_holds": self.comparison_holds,
            "G4_violations": self.comparison_violations,
            "first_violation": self.first_violation,
            "flags": list(self.flags),
            "ok": self.ok,
        }


def check_assumptions(law: GrowthLaw, box, samples: int = 5) -> AssumptionReport:
    """Sample the law on a lattice over ``[G] x [S] x [N]`` and test its bounds.

    Reports the largest ``|G(G,S,N,X)|``, the largest difference quotient along
    each axis, and whether the envelope rates of :meth:`GrowthLaw.envelope`
    bracket the law strictly at every lattice point. Violations are reported,
    never raised.
    """
    (g0, g1), (s0, s1), (h0, h1) = (tuple(map(float, ax)) for ax in box)
    if not (g0 <= g1 and s0 <= s1 and h0 <= h1):
        raise InvalidArgument("assumption box axes must be ordered (lo <= hi)")
    if g0 <= 0:
        raise InvalidArgument("growth axis must be strictly positive")
    if samples < 2:
        raise InvalidArgument("need at least 2 samples per axis")

    axes = [np.linspace(lo, hi, samples) for lo, hi in ((g0, g1), (s0, s1), (h0, h1))]
    Gg, Sg, Ng = np.meshgrid(*axes, indexing="ij")
    env = law.envelope(n_max=h1)
    r0, r1 = env.c0, env.c1
    flags = []
    if not all(map(math.isfinite, law.mu.bounds())) and law.uses_stress:
        flags.append("mu-unbounded")
    if law.kind is LawKind.SUPERLINEAR:
        flags.append("superlinear-in-G")

    sup_bound = 0.0
    lip = {"G": 0.0, "S": 0.0, "N": 0.0}
    violations = 0
    first = None
    for gamma in np.unique(law.gamma):
        vals = law.local(Gg, Sg, Ng, gamma)
        sup_bound = max(sup_bound, float(np.max(np.abs(vals))))
        for axis, name in enumerate("GSN"):
            step = np.diff(axes[axis])[0]
            if step > 0:
                q = np.abs(np.diff(vals, axis=axis)) / step
                lip[name] = max(lip[name], float(np.max(q)))
        with np.errstate(invalid="ignore"):
            bad = ~((r0 * Gg < vals) & (vals < r1 * Gg))
        violations += int(np.count_nonzero(bad))
        if first is None and bad.any():
            i = tuple(int(v) for v in np.argwhere(bad)[0])
            first = {"gamma": float(gamma), "G": float(Gg[i]), "S": float(Sg[i]), "N": float(Ng[i]), "value": float(vals[i])}
    return AssumptionReport(((g0, g1), (s0, s1), (h0, h1)), samples, sup_bound, lip, violations == 0, violations, first, flags)
