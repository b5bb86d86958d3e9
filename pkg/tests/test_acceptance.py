"""Acceptance criteria, one test per criterion.

Each test prints a single ``PASS``/``FAIL`` line with the measured quantity and
its tolerance; the lines are repeated in the pytest summary. The module also
runs standalone: ``python tests/test_acceptance.py``.
"""

import json
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from morphogrow.cli import main as cli_main
from morphogrow.dynamics import GrowthLaw, StressResponse, integrate
from morphogrow.elastostatics import growth_map, interface_image, solve_stress
from morphogrow.energy import Base, EnergyModel, eval_Wp
from morphogrow.fields import GrowthBounds, GrowthField, two_segment_grid, uniform_grid
from morphogrow.nutrients import NutrientParams, solve_image_problem, solve_nutrients
from morphogrow.oracle import (
    TwoSegmentConfig,
    elastic_from_stretches,
    solve_elastic,
    solve_nutrients_closed_form,
)
from morphogrow.probe import lipschitz_probe

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # standalone run
    ACCEPTANCE_LINES = []

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def report(number, title, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} [{number}] {title}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    assert ok, line


def test_1_growth_map_landmarks():
    grid = two_segment_grid(1.0, 0.8, 1)
    g = growth_map(GrowthField(grid, np.array([0.9, 5.5])))
    err = max(abs(g[1] - 0.72), abs(g[2] - 1.82))
    report(1, "growth-map landmarks z_I=0.72, g(L0)=1.82", err <= 1e-12, f"max error {err:.3g} (tol 1e-12)")


def test_2_pure_growth_exactness():
    start = time.perf_counter()
    grid = two_segment_grid(1.0, 0.5, 1)
    model = EnergyModel.from_segments("mooney1d", grid, 1.0)
    params = NutrientParams.from_segments(grid, 1.0, 1.0)
    gamma = np.array([1.0, 2.0])
    traj = integrate(GrowthLaw(kind="pure", gamma=gamma), model, params, 1.0, 1e-2)
    exact = np.exp(np.outer(traj.times, gamma))
    rel = float(np.max(np.abs(traj.values() / exact - 1)))

    law2 = GrowthLaw.from_segments("pure", grid, 2.0)
    errs = [abs(integrate(law2, model, params, 0.5, dt).final.values[0] - math.e) for dt in (0.1, 0.05, 0.025)]
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
    elapsed = time.perf_counter() - start
    ok = rel < 1e-8 and all(abs(o - 4) <= 0.2 for o in orders) and elapsed < 1.0
    report(
        2, "pure growth exp(gamma t) and RK4 order", ok,
        f"max rel error {rel:.3g} (tol 1e-8), orders {orders[0]:.3f}, {orders[1]:.3f} (4 +- 0.2), {elapsed:.2f} s (< 1 s)",
    )


def test_3_stress_closed_forms():
    g1 = uniform_grid(1.0, 1)
    quad1 = EnergyModel(Base.QUADRATIC, g1, np.ones(1))
    e_half = abs(solve_stress(quad1, GrowthField.constant(g1, 2.0), 1.0).S + 0.5)
    e_zero = abs(solve_stress(quad1, GrowthField.constant(g1, 1.0), 1.0).S)

    grid = two_segment_grid(1.0, 0.8, 1)
    G = GrowthField(grid, np.array([0.9, 5.5]))
    state = solve_stress(EnergyModel.from_segments("quadratic", grid, (1.0, 2.0)), G, 1.0)
    oracle = solve_elastic(TwoSegmentConfig(XI=0.8, G=(0.9, 5.5), kappa=(1.0, 2.0)))
    xI = interface_image(state, 0.8)
    e_S = max(abs(state.S + 0.64567), abs(oracle.S + 0.64567))
    e_x = max(abs(xI - 0.25512), abs(oracle.xI - 0.25512))
    e_agree = max(abs(state.S - oracle.S), abs(xI - oracle.xI))
    ok = e_half <= 1e-10 and e_zero <= 1e-12 and e_S <= 1e-5 and e_x <= 1e-5 and e_agree <= 1e-10
    report(
        3, "stress closed forms", ok,
        f"G=2: {e_half:.2g} (1e-10); G=1: {e_zero:.2g} (1e-12); two-segment S err {e_S:.2g}, "
        f"x_I err {e_x:.2g} (1e-5); solver vs 2x2 oracle {e_agree:.2g}",
    )


def test_4_euler_lagrange_invariant():
    start = time.perf_counter()
    rng = np.random.default_rng(20240601)
    worst_stress = worst_bc = 0.0
    for i in range(500):
        M = int(rng.integers(1, 9))
        grid = uniform_grid(float(rng.uniform(0.5, 2.0)), M)
        if i % 2:
            model = EnergyModel(Base.MOONEY1D, grid, rng.uniform(0.2, 5.0, M))
        else:
            model = EnergyModel(Base.QUADRATIC, grid, np.full(M, rng.uniform(0.2, 5.0)))
        G = GrowthField(grid, rng.uniform(0.2, 6.0, M))
        ell0 = float(rng.uniform(0.3, 3.0))
        st = solve_stress(model, G, ell0)
        worst_stress = max(worst_stress, float(np.max(np.abs(eval_Wp(model, grid.midpoints, st.stretch) - st.S))))
        worst_bc = max(worst_bc, abs(st.y_nodes[-1] - ell0) / ell0)
    elapsed = time.perf_counter() - start
    ok = worst_stress <= 1e-9 and worst_bc <= 1e-10 and elapsed < 10
    report(
        4, "Euler-Lagrange invariant over 500 random fields", ok,
        f"max |W_p - S| {worst_stress:.3g} (1e-9), max |y(L0)-ell0|/ell0 {worst_bc:.3g} (1e-10), {elapsed:.2f} s (< 10 s)",
    )


def _reference_profile(x):
    left = 0.0885 * np.exp(1.3368 * x) + 0.9114 * np.exp(-1.3368 * x)
    right = 0.082 * np.exp(2.3839 * x) + 1.1884 * np.exp(-2.3839 * x)
    return np.where(x <= 0.538, left, right)


def test_5_nutrient_oracle_equivalence():
    cfg = TwoSegmentConfig(D0=(1.0, 8.0), beta0=(1.0, 8.0), nL=1.0, nR=1.0)
    el = elastic_from_stretches(0.538, 1.0, (0.72, 0.41))
    exact = solve_nutrients_closed_form(cfg, el)
    D = np.array(cfg.D0) * np.array(el.B)
    beta = np.array(cfg.beta0) / np.array(el.B)
    levels = (4, 8, 16, 32)
    errs = []
    for r in levels:
        x, n, *_ = solve_image_problem([0.0, el.xI, el.ell0], D, beta, cfg.nL, cfg.nR, r)
        errs.append(float(np.max(np.abs(n - exact(x)))))
    orders = [math.log2(errs[i] / errs[i + 1]) for i in range(len(levels) - 1)]
    identity = abs(exact.c[0] + exact.c[1] - cfg.nL)
    xs = np.linspace(0.0, 1.0, 1001)
    reference_gap = float(np.max(np.abs(exact(xs) - _reference_profile(xs)) / exact(xs)))
    ok = all(np.diff(errs) < 0) and min(orders) >= 1.9 and identity <= 1e-12 and reference_gap <= 0.05
    report(
        5, "nutrient solver vs closed form", ok,
        f"errors {', '.join(f'{e:.3g}' for e in errs)}; orders {', '.join(f'{o:.3f}' for o in orders)} (>= 1.9); "
        f"|c0+ + c0- - nL| {identity:.2g} (1e-12); reference curve gap {100 * reference_gap:.2f}% (5%)",
    )


def test_6_maximum_principle():
    rng = np.random.default_rng(5)
    worst_low = worst_high = 0.0
    for _ in range(200):
        M = int(rng.integers(1, 8))
        grid = uniform_grid(float(rng.uniform(0.5, 2.0)), M)
        model = EnergyModel(Base.MOONEY1D, grid, rng.uniform(0.2, 5.0, M))
        state = solve_stress(model, GrowthField(grid, rng.uniform(0.2, 6.0, M)), float(rng.uniform(0.5, 2.0)))
        nL, nR = rng.uniform(0.0, 2.0, 2)
        if rng.random() < 0.2:
            nL = 0.0
        params = NutrientParams(grid, rng.uniform(0.05, 20.0, M), rng.uniform(0.01, 50.0, M), nL, nR)
        n = solve_nutrients(params, state, int(rng.integers(1, 17))).n
        worst_low = max(worst_low, float(-n.min()))
        worst_high = max(worst_high, float(n.max() - max(nL, nR)))
    ok = worst_low <= 1e-12 and worst_high <= 1e-12
    report(
        6, "maximum principle over 200 random configs", ok,
        f"max undershoot {worst_low:.3g}, max overshoot {worst_high:.3g} (tol 1e-12)",
    )


def test_7_envelope_invariance(tmp_path):
    grid = two_segment_grid(1.0, 0.8, 1)
    model = EnergyModel.from_segments("mooney1d", grid, (1.0, 2.0))
    params = NutrientParams.from_segments(grid, (1.0, 8.0), (1.0, 8.0))
    law = GrowthLaw.from_segments("full", grid, (1.0, 1.5), mu=StressResponse(0.5, 0.0, 1.0))
    traj = integrate(law, model, params, 2.0, 0.05, on_breach="flag")
    env = traj.envelope
    # relative distance to the nearer envelope curve; all curves meet at t = 0
    margin = min(
        min(float(np.min(G.values / env.lower(t))) - 1, 1 - float(np.max(G.values / env.upper(t))))
        for t, G in zip(traj.times[1:], traj.states[1:])
    )
    cfg = tmp_path / "fault.cfg"
    cfg.write_text((CONFIGS / "full_fault.cfg").read_text())
    code = cli_main(["simulate", str(cfg), "--out", str(tmp_path / "fault")])
    ok = not traj.envelope_breach and traj.times[-1] == 2.0 and code == 4
    report(
        7, "envelope invariance on [0, 2]", ok,
        f"{len(traj.times) - 1} steps, no breach, smallest relative distance to band for t > 0 {margin:.3g} "
        f"(c0={env.c0:.3f}, c1={env.c1:.3f}); injected fault exit code {code} (expected 4)",
    )


def test_8_lipschitz_probes():
    start = time.perf_counter()
    grid = two_segment_grid(1.0, 0.8, 1)
    model = EnergyModel.from_segments("mooney1d", grid, (1.0, 2.0))
    params = NutrientParams.from_segments(grid, (1.0, 8.0), (1.0, 8.0))
    ball = GrowthBounds(GrowthField.constant(grid, 3.25), 2.75)
    rep = lipschitz_probe(model, params, ball, 100, np.random.default_rng(8))
    elapsed = time.perf_counter() - start
    rS, rN = np.array(rep.ratios_S), np.array(rep.ratios_N)
    qS = rS.max() / np.median(rS)
    qN = rN.max() / np.median(rN)
    finite = np.all(np.isfinite(rS)) and np.all(np.isfinite(rN)) and rS.size == rN.size == 100
    ok = bool(finite and qS <= 10 and qN <= 10 and elapsed < 60 and ball.gamma0 == 0.5 and ball.gamma1 == 6.0)
    report(
        8, "Lipschitz probes in the ball [0.5, 6]", ok,
        f"stress max/median {qS:.2f}, nutrient max/median {qN:.2f} (<= 10), "
        f"{rS.size} pairs, {elapsed:.2f} s (< 60 s)",
    )


def _snapshot(directory: Path):
    out = {}
    for p in sorted(directory.iterdir()):
        data = p.read_bytes()
        if p.name == "manifest.json":
            doc = json.loads(data)
            doc.pop("wall_clock")
            data = json.dumps(doc, sort_keys=True).encode()
        out[p.name] = data
    return out


def test_9_determinism(tmp_path):
    results = []
    for command, name in (("simulate", "full"), ("probe", "probe"), ("oracle-compare", "figures"), ("figures", "figures")):
        cfg = tmp_path / f"{name}.cfg"
        cfg.write_text((CONFIGS / f"{name}.cfg").read_text())
        snaps = []
        for rep in ("a", "b"):
            out = tmp_path / f"{name}-{command}-{rep}"
            assert cli_main([command, str(cfg), "--out", str(out), "--seed", "11"]) == 0
            snaps.append(_snapshot(out))
        results.append((command, snaps[0] == snaps[1], len(snaps[0])))
    ok = all(same for _, same, _ in results)
    report(
        9, "determinism of repeated runs", ok,
        "; ".join(f"{c}: {n} files {'identical' if s else 'DIFFER'}" for c, s, n in results)
        + " (manifest compared without its wall-clock stamp)",
    )


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-s"]))
