"""Command line entry point: ``morphogrow simulate|oracle-compare|figures|probe``."""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, RunConfig, load_config
from .dynamics import LawKind, check_assumptions, integrate
from .elastostatics import solve_stress, stress_bounds
from .errors import EnvelopeViolation, InvalidArgument, MorphogrowError
from .nutrients import solve_nutrients
from .oracle import oracle_compare
from .probe import lipschitz_probe

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_VIOLATION = 4


def fmt(x) -> str:
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def _write_csv(path: Path, header, rows):
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(v if isinstance(v, str) else fmt(v) for v in row) + "\n")


def _write_dat(path: Path, xs, ys):
    with open(path, "w", newline="\n") as fh:
        for x, y in zip(xs, ys):
            fh.write(f"{fmt(x)} {fmt(y)}\n")


class Run:
    """Output directory plus its manifest, which is always written first."""

    def __init__(self, command: str, cfg: RunConfig, out: Path, seed: int, planned: list[str]):
        self.out = out
        self.out.mkdir(parents=True, exist_ok=True)
        self.written: list[str] = []
        self.manifest = {
            "command": command,
            "version": __version__,
            "config_source": cfg.source,
            "config": cfg.echo(),
            "seed": seed,
            "wall_clock": _dt.datetime.now(_dt.timezone.utc).isoformat(),
            "status": "running",
            "files": sorted(set(planned) | {"manifest.json"}),
        }
        self._dump()

    def path(self, name: str) -> Path:
        self.written.append(name)
        return self.out / name

    def _dump(self):
        with open(self.out / "manifest.json", "w") as fh:
            json.dump(self.manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def finish(self, status: str, **extra):
        self.manifest.update(extra)
        self.manifest["status"] = status
        self.manifest["partial"] = status != "ok"
        self.manifest["files"] = sorted(set(self.written) | {"manifest.json"})
        self._dump()


def _out_dir(args, cfg_path: Path, command: str) -> Path:
    if args.out:
        return Path(args.out)
    root = Path(os.environ.get("MORPHOGROW_OUT", "morphogrow_out"))
    return root / f"{cfg_path.stem}-{command}"


def _record_indices(T, dt, stride):
    n_steps = max(1, math.ceil(T / dt - 1e-9))
    ks = [k for k in range(1, n_steps + 1) if k % stride == 0 or k == n_steps]
    return [0] + ks


def cmd_simulate(cfg: RunConfig, out: Path, seed: int) -> int:
    grid = cfg.grid()
    model, params, law = cfg.model(grid), cfg.nutrient_params(grid), cfg.law(grid)
    G0 = cfg.initial(grid)
    n_rec = len(_record_indices(cfg["integration.T"], cfg["integration.dt"], cfg["integration.stride"]))
    planned = ["trajectory.csv", "stress.csv"]
    if law.kind is LawKind.FULL:
        planned += [f"nutrients_t{i:04d}.csv" for i in range(n_rec)]
        planned += [f"referential_t{i:04d}.csv" for i in range(n_rec)]
    run = Run("simulate", cfg, out, seed, planned)

    traj, status, code, error = None, "ok", EXIT_OK, None
    try:
        traj = integrate(
            law, model, params, cfg["integration.T"], cfg["integration.dt"], cfg["integration.method"],
            ell0=cfg.ell0, G0=G0, allow_nonunit_initial=cfg["initial.allow_nonunit"],
            refine=cfg["nutrients.refine"], output_stride=cfg["integration.stride"],
            slack=cfg["tolerances.envelope_slack"], inject_fault_at=cfg["diagnostics.inject_fault_time"],
            stress_tol=cfg["tolerances.stress"],
        )
    except EnvelopeViolation as exc:
        traj, status, code, error = exc.trajectory, "envelope-violation", EXIT_VIOLATION, exc
    except InvalidArgument as exc:
        run.finish("config-error", error=str(exc))
        raise
    except MorphogrowError as exc:
        status, code, error = "solver-error", EXIT_SOLVER, exc

    extra = {}
    if traj is not None:
        _write_csv(
            run.path("trajectory.csv"),
            ["t"] + [f"G_{i}" for i in range(grid.M)],
            ([t] + list(G.values) for t, G in zip(traj.times, traj.states)),
        )
        _write_csv(run.path("stress.csv"), ["t", "S"], zip(traj.times, traj.stresses))
        if traj.nutrients is not None:
            for i, (t, G) in enumerate(zip(traj.times, traj.states)):
                state = solve_stress(model, G, cfg.ell0, cfg["tolerances.stress"])
                sol = solve_nutrients(params, state, cfg["nutrients.refine"])
                _write_csv(run.path(f"nutrients_t{i:04d}.csv"), ["x", "n"], zip(sol.x_nodes, sol.n))
                _write_csv(run.path(f"referential_t{i:04d}.csv"), ["X", "N"], zip(grid.nodes, sol.N))
        extra["diagnostics"] = traj.diagnostics
        extra["envelope"] = {
            "c0": traj.envelope.c0,
            "c1": traj.envelope.c1,
            "breach": traj.envelope_breach,
            "breaches": traj.breaches,
        }
    if error is not None:
        extra["error"] = str(error)
        print(f"morphogrow: {error}", file=sys.stderr)
    run.finish(status, **extra)
    return code


def cmd_oracle_compare(cfg: RunConfig, out: Path, seed: int) -> int:
    two = cfg.two_segment()
    run = Run("oracle-compare", cfg, out, seed, ["oracle_errors.csv"])
    try:
        table = oracle_compare(two, cfg["oracle.refine_levels"])
    except MorphogrowError as exc:
        run.finish("solver-error", error=str(exc))
        print(f"morphogrow: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    _write_csv(run.path("oracle_errors.csv"), ["refine", "stress_err", "nutrient_err", "order"], table.rows())
    run.finish("ok")
    return EXIT_OK


def cmd_figures(cfg: RunConfig, out: Path, seed: int) -> int:
    grid = cfg.grid()
    if len(grid.interfaces) != 1:
        raise cfg.error("geometry.XI", "figures need a two-segment configuration")
    files = ["fig1_growth.dat", "fig1_phi.dat", "fig2_nutrient.dat"]
    run = Run("figures", cfg, out, seed, files)
    G = cfg.initial(grid)
    try:
        state = solve_stress(cfg.model(grid), G, cfg.ell0, cfg["tolerances.stress"])
        sol = solve_nutrients(cfg.nutrient_params(grid), state, cfg["nutrients.refine"])
    except MorphogrowError as exc:
        run.finish("solver-error", error=str(exc))
        print(f"morphogrow: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    X = np.repeat(grid.nodes, 2)[1:-1]
    _write_dat(run.path("fig1_growth.dat"), X, np.repeat(G.values, 2))
    _write_dat(run.path("fig1_phi.dat"), state.g_nodes, state.y_nodes)
    _write_dat(run.path("fig2_nutrient.dat"), sol.x_nodes, sol.n)
    run.finish("ok", stress=state.S, interface_images=list(state.interface_images))
    return EXIT_OK


def cmd_probe(cfg: RunConfig, out: Path, seed: int, pairs: int | None = None) -> int:
    grid = cfg.grid()
    model, params, law = cfg.model(grid), cfg.nutrient_params(grid), cfg.law(grid)
    ball = cfg.ball(grid)
    pairs = cfg["probe.pairs"] if pairs is None else pairs
    if pairs < 0:
        raise ConfigError("pairs must be >= 0", key="probe.pairs", source=cfg.source)
    run = Run("probe", cfg, out, seed, ["probe.json"])
    try:
        report = lipschitz_probe(model, params, ball, pairs, np.random.default_rng(seed), cfg.ell0, cfg["nutrients.refine"])
        sig = stress_bounds(model, ball, cfg.ell0)
        box = ((ball.gamma0, ball.gamma1), sig, (0.0, params.n_max))
        assumptions = check_assumptions(law, box, cfg["probe.samples"])
    except MorphogrowError as exc:
        run.finish("solver-error", error=str(exc))
        print(f"morphogrow: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    doc = report.to_dict()
    doc["seed"] = seed
    doc["assumptions"] = assumptions.to_dict()
    with open(run.path("probe.json"), "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    run.finish("ok", assumptions_ok=assumptions.ok)
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "oracle-compare": cmd_oracle_compare,
    "figures": cmd_figures,
    "probe": cmd_probe,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="morphogrow", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("config", type=Path)
        p.add_argument("--out", type=Path, default=None, help="output directory")
        p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
        if name == "probe":
            p.add_argument("--pairs", type=int, default=None)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        seed = cfg["seed"] if args.seed is None else args.seed
        out = _out_dir(args, args.config, args.command)
        kwargs = {"pairs": args.pairs} if args.command == "probe" else {}
        return COMMANDS[args.command](cfg, out, seed, **kwargs)
    except (ConfigError, InvalidArgument) as exc:
        print(f"morphogrow: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EnvelopeViolation as exc:
        print(f"morphogrow: {exc}", file=sys.stderr)
        return EXIT_VIOLATION
    except MorphogrowError as exc:
        print(f"morphogrow: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
