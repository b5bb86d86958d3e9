"""Run configuration: a flat ``section.key = value`` text format.

Grammar
-------
* One assignment per line: ``section.key = value``. The top-level key
  ``seed`` has no section.
* ``#`` starts a comment; blank lines are ignored.
* Lists are comma separated: ``energy.kappa = 1, 2``.
* Booleans are ``true`` / ``false``.
* Unknown keys, duplicate keys and malformed lines are errors that carry the
  offending line number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from .dynamics import GrowthLaw, LawKind, NutrientResponse, StressResponse
from .energy import Base, EnergyModel
from .errors import InvalidArgument, MorphogrowError
from .fields import GrowthBounds, GrowthField, MaterialGrid, cellwise, two_segment_grid, uniform_grid
from .nutrients import NutrientParams
from .oracle import TwoSegmentConfig


class ConfigError(MorphogrowError, ValueError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None, source: str = "<config>"):
        self.line = line
        self.key = key
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + (f"{key}: " if key else "") + message)


def _float(s):
    v = float(s)
    if not math.isfinite(v):
        raise ValueError("not finite")
    return v


def _int(s):
    return int(s)


def _bool(s):
    low = s.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValueError("expected true or false")


def _floats(s):
    return tuple(_float(p) for p in s.split(","))


def _ints(s):
    return tuple(_int(p) for p in s.split(","))


def _choice(*options):
    def conv(s):
        low = s.lower()
        if low not in options:
            raise ValueError(f"expected one of {', '.join(options)}")
        return low

    return conv


# key -> (converter, default)
SCHEMA: dict[str, tuple] = {
    "seed": (_int, 0),
    "geometry.L0": (_float, 1.0),
    "geometry.XI": (_float, None),
    "geometry.M": (_int, None),
    "geometry.cells_per_segment": (_int, 1),
    "geometry.ell0": (_float, None),
    "energy.base": (_choice("quadratic", "mooney1d"), "quadratic"),
    "energy.kappa": (_floats, (1.0,)),
    "nutrients.D0": (_floats, (1.0,)),
    "nutrients.beta0": (_floats, (1.0,)),
    "nutrients.nL": (_float, 1.0),
    "nutrients.nR": (_float, 1.0),
    "nutrients.refine": (_int, 8),
    "law.kind": (_choice("pure", "stress", "full", "superlinear"), "pure"),
    "law.gamma": (_floats, (1.0,)),
    "law.mu_kind": (_choice("arctan", "square"), "arctan"),
    "law.mu_a": (_float, 1.0),
    "law.mu_b": (_float, 0.0),
    "law.mu_c": (_float, 1.0),
    "law.eta": (_choice("identity", "clamp", "saturating"), "identity"),
    "law.eta_n_crit": (_float, 0.0),
    "law.eta_floor": (_float, 0.0),
    "law.eta_low": (_float, 0.0),
    "law.eta_high": (_float, 1.0),
    "law.eta_n_sat": (_float, 1.0),
    "law.averaging": (_bool, False),
    "integration.T": (_float, 1.0),
    "integration.dt": (_float, 0.01),
    "integration.method": (_choice("rk4", "euler"), "rk4"),
    "integration.stride": (_int, 10),
    "tolerances.stress": (_float, None),
    "tolerances.envelope_slack": (_float, None),
    "initial.G": (_floats, None),
    "initial.allow_nonunit": (_bool, False),
    "probe.center": (_floats, None),
    "probe.radius": (_float, 0.5),
    "probe.pairs": (_int, 100),
    "probe.samples": (_int, 5),
    "oracle.refine_levels": (_ints, (4, 8, 16, 32)),
    "diagnostics.inject_fault_time": (_float, None),
}


@dataclass
class RunConfig:
    values: dict
    lines: dict = field(default_factory=dict)
    source: str = "<config>"

    def __getitem__(self, key):
        return self.values[key]

    def error(self, key: str, message: str) -> ConfigError:
        return ConfigError(message, self.lines.get(key), key, self.source)

    def echo(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in sorted(self.values.items())}

    # builders ---------------------------------------------------------
    def grid(self) -> MaterialGrid:
        v = self.values
        if v["geometry.XI"] is not None:
            return two_segment_grid(v["geometry.L0"], v["geometry.XI"], v["geometry.cells_per_segment"])
        return uniform_grid(v["geometry.L0"], v["geometry.M"])

    @property
    def ell0(self) -> float:
        e = self.values["geometry.ell0"]
        return self.values["geometry.L0"] if e is None else e

    def _cellwise(self, key, grid):
        try:
            return cellwise(grid, self.values[key])
        except InvalidArgument as exc:
            raise self.error(key, str(exc)) from exc

    def model(self, grid=None) -> EnergyModel:
        grid = grid or self.grid()
        return EnergyModel(Base(self["energy.base"]), grid, self._cellwise("energy.kappa", grid))

    def nutrient_params(self, grid=None) -> NutrientParams:
        grid = grid or self.grid()
        return NutrientParams(
            grid,
            self._cellwise("nutrients.D0", grid),
            self._cellwise("nutrients.beta0", grid),
            self["nutrients.nL"],
            self["nutrients.nR"],
        )

    def law(self, grid=None) -> GrowthLaw:
        grid = grid or self.grid()
        v = self.values
        mu = StressResponse(v["law.mu_a"], v["law.mu_b"], v["law.mu_c"], v["law.mu_kind"])
        eta = NutrientResponse(
            v["law.eta"], v["law.eta_n_crit"], v["law.eta_floor"], v["law.eta_low"], v["law.eta_high"], v["law.eta_n_sat"]
        )
        return GrowthLaw(LawKind(v["law.kind"]), self._cellwise("law.gamma", grid), mu, eta, v["law.averaging"])

    def initial(self, grid=None) -> GrowthField:
        grid = grid or self.grid()
        if self["initial.G"] is None:
            return GrowthField.constant(grid, 1.0)
        return GrowthField(grid, self._cellwise("initial.G", grid))

    def ball(self, grid=None) -> GrowthBounds:
        grid = grid or self.grid()
        center = self["probe.center"]
        G = GrowthField.constant(grid, 1.0) if center is None else GrowthField(grid, self._cellwise("probe.center", grid))
        try:
            return GrowthBounds(G, self["probe.radius"])
        except InvalidArgument as exc:
            raise self.error("probe.radius", str(exc)) from exc

    def two_segment(self) -> TwoSegmentConfig:
        v = self.values
        if v["geometry.XI"] is None or v["geometry.cells_per_segment"] != 1:
            raise self.error("geometry.XI", "the closed-form oracle needs a two-segment grid with one cell per segment")

        def pair(key):
            vals = v[key] if key in v and v[key] is not None else (1.0,)
            return tuple(vals) * 2 if len(vals) == 1 else tuple(vals)

        return TwoSegmentConfig(
            L0=v["geometry.L0"], XI=v["geometry.XI"], ell0=self.ell0, kappa=pair("energy.kappa"),
            base=Base(v["energy.base"]), G=pair("initial.G"), D0=pair("nutrients.D0"),
            beta0=pair("nutrients.beta0"), nL=v["nutrients.nL"], nR=v["nutrients.nR"],
        )


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    values = {k: d for k, (_, d) in SCHEMA.items()}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'section.key = value', got {raw.strip()!r}", lineno, source=source)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in SCHEMA:
            raise ConfigError("unknown key", lineno, key, source)
        if key in lines:
            raise ConfigError(f"duplicate key (first set on line {lines[key]})", lineno, key, source)
        if not value:
            raise ConfigError("missing value", lineno, key, source)
        try:
            values[key] = SCHEMA[key][0](value)
        except ValueError as exc:
            raise ConfigError(f"invalid value {value!r}: {exc}", lineno, key, source) from None
        lines[key] = lineno
    cfg = RunConfig(values, lines, source)
    _validate(cfg)
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", source=str(path)) from exc
    return parse_config(text, str(path))


def _validate(cfg: RunConfig):
    v = cfg.values

    def need(key, ok, msg):
        if v[key] is not None and not ok(v[key]):
            raise cfg.error(key, f"{v[key]!r} {msg}")

    need("geometry.L0", lambda x: x > 0, "must be > 0")
    if (v["geometry.XI"] is None) == (v["geometry.M"] is None):
        key = "geometry.M" if v["geometry.M"] is not None else "geometry.XI"
        raise cfg.error(key, "set exactly one of geometry.XI (two segments) or geometry.M (uniform cells)")
    L0 = v["geometry.L0"]
    need("geometry.XI", lambda x: 0 < x < L0, f"must lie strictly inside (0, L0={L0!r})")
    need("geometry.M", lambda x: x >= 1, "must be >= 1")
    need("geometry.cells_per_segment", lambda x: x >= 1, "must be >= 1")
    need("geometry.ell0", lambda x: x > 0, "must be > 0")
    for key in ("energy.kappa", "nutrients.D0", "law.gamma"):
        need(key, lambda xs: all(x > 0 for x in xs), "must be strictly positive")
    need("nutrients.beta0", lambda xs: all(x >= 0 for x in xs), "must be nonnegative")
    need("nutrients.nL", lambda x: x >= 0, "must be nonnegative")
    need("nutrients.nR", lambda x: x >= 0, "must be nonnegative")
    need("nutrients.refine", lambda x: x >= 1, "must be >= 1")
    need("law.mu_a", lambda x: x >= 0, "must be >= 0")
    need("integration.T", lambda x: x > 0, "must be > 0")
    need("integration.dt", lambda x: 0 < x <= v["integration.T"], "must satisfy 0 < dt <= T")
    need("integration.stride", lambda x: x >= 1, "must be >= 1")
    for key in ("tolerances.stress", "tolerances.envelope_slack", "probe.radius"):
        need(key, lambda x: x >= 0, "must be nonnegative")
    need("initial.G", lambda xs: all(x > 0 for x in xs), "must be strictly positive")
    need("probe.center", lambda xs: all(x > 0 for x in xs), "must be strictly positive")
    need("probe.pairs", lambda x: x >= 0, "must be >= 0")
    need("probe.samples", lambda x: x >= 2, "must be >= 2")
    need("oracle.refine_levels", lambda xs: all(x >= 1 for x in xs), "must be >= 1")
    need("diagnostics.inject_fault_time", lambda x: x >= 0, "must be >= 0")
    # Structural checks that need a grid (per-segment list lengths, etc.).
    grid = cfg.grid()
    for key in ("energy.kappa", "nutrients.D0", "nutrients.beta0", "law.gamma", "initial.G", "probe.center"):
        if v[key] is not None:
            cfg._cellwise(key, grid)
    try:
        cfg.law(grid)
    except InvalidArgument as exc:
        raise cfg.error("law.kind", str(exc)) from exc
