"""Empirical Lipschitz ratios of the stress and nutrient maps over a ball of growth fields."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .elastostatics import solve_stress, stress_bounds
from .energy import EnergyModel, stretch_bounds
from .errors import MorphogrowError
from .fields import GrowthBounds, sup_distance
from .nutrients import DEFAULT_REFINE, NutrientParams, solve_nutrients


@dataclass
class ProbeReport:
    pairs: int
    ratios_S: list[float] = field(default_factory=list)
    ratios_N: list[float] = field(default_factory=list)
    skipped: int = 0
    flags: list[str] = field(default_factory=list)
    bounds: dict = field(default_factory=dict)

    @staticmethod
    def _summary(r):
        if not r:
            return {"count": 0, "min": None, "median": None, "max": None, "max_over_median": None}
        a = np.asarray(r)
        med = float(np.median(a))
        return {
            "count": int(a.size),
            "min": float(a.min()),
            "median": med,
            "max": float(a.max()),
            "max_over_median": float(a.max() / med) if med > 0 else None,
        }

    def to_dict(self) -> dict:
        return {
            "pairs": self.pairs,
            "skipped": self.skipped,
            "flags": list(self.flags),
            "stress": {"ratios": list(self.ratios_S), "summary": self._summary(self.ratios_S)},
            "nutrient": {"ratios": list(self.ratios_N), "summary": self._summary(self.ratios_N)},
            "bounds": dict(self.bounds),
        }


def lipschitz_probe(
    model: EnergyModel,
    params: NutrientParams,
    ball: GrowthBounds,
    pairs: int,
    rng: np.random.Generator,
    ell0: float | None = None,
    refine: int = DEFAULT_REFINE,
) -> ProbeReport:
    """Sample growth pairs in ``ball`` and record ``|dS|/|dG|`` and ``|dN|/|dG|``.

    Both quotients use sup norms; ``N`` is compared at the material nodes.
    Every solved state is also checked against the a priori stress and stretch
    bounds of the ball.
    """
    ell0 = ball.center.grid.L0 if ell0 is None else float(ell0)
    report = ProbeReport(int(pairs))
    sig0, sig1 = stress_bounds(model, ball, ell0)
    try:
        pb = stretch_bounds(model, sig0, sig1)
        p_bounds = (pb.p0, pb.p1)
    except MorphogrowError:  # quadratic model: sigma0 may fall outside its stress range
        p_bounds = None
        report.flags.append("stretch-bounds-unavailable")
    checks = {"stress_outside": 0, "stretch_outside": 0}
    if ball.radius == 0:
        report.flags.append("degenerate-ball")

    def solve(G):
        st = solve_stress(model, G, ell0)
        if not (sig0 - 1e-9 * (1 + abs(sig0)) <= st.S <= sig1 + 1e-9 * (1 + abs(sig1))):
            checks["stress_outside"] += 1
        if p_bounds is not None and not (
            np.all(st.stretch >= p_bounds[0] * (1 - 1e-9)) and np.all(st.stretch <= p_bounds[1] * (1 + 1e-9))
        ):
            checks["stretch_outside"] += 1
        return st.S, solve_nutrients(params, st, refine).N

    for _ in range(report.pairs):
        G1, G2 = ball.sample(rng), ball.sample(rng)
        dG = sup_distance(G1, G2)
        if dG == 0.0:
            report.skipped += 1
            continue
        S1, N1 = solve(G1)
        S2, N2 = solve(G2)
        report.ratios_S.append(abs(S1 - S2) / dG)
        report.ratios_N.append(float(np.max(np.abs(N1 - N2))) / dG)

    report.bounds = {
        "gamma": [ball.gamma0, ball.gamma1],
        "sigma": [sig0, sig1],
        "stretch": list(p_bounds) if p_bounds is not None else None,
        **checks,
    }
    for name, r in (("stress", report.ratios_S), ("nutrient", report.ratios_N)):
        if any(not math.isfinite(v) for v in r):
            report.flags.append(f"{name}-ratio-nonfinite")
    return report
