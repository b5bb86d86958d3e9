"""Reference grids, cellwise-constant fields and the growth ball.

Everything here is an immutable value: node and value arrays are copied on
construction and flagged read-only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IncompatibleGrids, InvalidArgument, InvalidGrowthField


def _frozen(values) -> np.ndarray:
    arr = np.array(values, dtype=np.float64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class MaterialGrid:
    """Partition of the reference interval ``[0, L0]`` into cells.

    ``interfaces`` holds the indices of interior nodes that separate material
    segments (e.g. the node at ``XI`` of a two-segment grid); it is empty for a
    uniform single-material grid.
    """

    nodes: np.ndarray
    interfaces: tuple[int, ...] = ()

    def __post_init__(self):
        nodes = _frozen(self.nodes)
        if nodes.ndim != 1 or nodes.size < 2:
            raise InvalidArgument("a grid needs at least two nodes")
        if nodes[0] != 0.0:
            raise InvalidArgument(f"first node must be exactly 0, got {nodes[0]!r}")
        if not np.all(np.isfinite(nodes)) or np.any(np.diff(nodes) <= 0.0):
            raise InvalidArgument("grid nodes must be finite and strictly increasing")
        for k in self.interfaces:
            if not 0 < k < nodes.size - 1:
                raise InvalidArgument(f"interface index {k} is not an interior node")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "interfaces", tuple(int(k) for k in self.interfaces))

    @property
    def L0(self) -> float:
        return float(self.nodes[-1])

    @property
    def M(self) -> int:
        return self.nodes.size - 1

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def midpoints(self) -> np.ndarray:
        return 0.5 * (self.nodes[:-1] + self.nodes[1:])

    def segments(self) -> list[slice]:
        """Cell slices of the material segments delimited by ``interfaces``."""
        bounds = [0, *self.interfaces, self.M]
        return [slice(a, b) for a, b in zip(bounds[:-1], bounds[1:])]

    def cell_of(self, X) -> np.ndarray | int:
        """Index of the cell containing ``X``.

        Cells are closed on the left end of the domain and half-open to the
        left elsewhere, ``[X0, X1], (X1, X2], ...``, so an interface node
        belongs to the segment on its left.
        """
        X = np.asarray(X, dtype=np.float64)
        if np.any(X < 0.0) or np.any(X > self.L0) or np.any(~np.isfinite(X)):
            raise InvalidArgument(f"coordinate outside [0, {self.L0!r}]")
        idx = np.searchsorted(self.nodes, X, side="left") - 1
        idx = np.clip(idx, 0, self.M - 1)
        return int(idx) if idx.ndim == 0 else idx

    def same_as(self, other: "MaterialGrid") -> bool:
        return self is other or (
            self.nodes.shape == other.nodes.shape and np.array_equal(self.nodes, other.nodes)
        )


def uniform_grid(L0: float, M: int) -> MaterialGrid:
    if not (np.isfinite(L0) and L0 > 0):
        raise InvalidArgument(f"L0 must be positive, got {L0!r}")
    if int(M) != M or M < 1:
        raise InvalidArgument(f"cell count must be a positive integer, got {M!r}")
    nodes = np.linspace(0.0, L0, int(M) + 1)
    nodes[-1] = L0
    return MaterialGrid(nodes)


def two_segment_grid(L0: float, XI: float, cells_per_segment: int = 1) -> MaterialGrid:
    """Grid with ``XI`` as a node and each side split into equal cells."""
    if not (np.isfinite(L0) and L0 > 0):
        raise InvalidArgument(f"L0 must be positive, got {L0!r}")
    if not 0.0 < XI < L0:
        raise InvalidArgument(f"interface XI={XI!r} must lie in (0, {L0!r})")
    k = int(cells_per_segment)
    if k != cells_per_segment or k < 1:
        raise InvalidArgument(f"cells_per_segment must be a positive integer, got {cells_per_segment!r}")
    left = np.linspace(0.0, XI, k + 1)
    right = np.linspace(XI, L0, k + 1)
    nodes = np.concatenate([left, right[1:]])
    nodes[k] = XI
    nodes[-1] = L0
    return MaterialGrid(nodes, interfaces=(k,))


def cellwise(grid: MaterialGrid, per_segment) -> np.ndarray:
    """Broadcast one value per material segment (or a scalar) to every cell."""
    vals = np.atleast_1d(np.asarray(per_segment, dtype=np.float64))
    segs = grid.segments()
    if vals.size == 1:
        return np.full(grid.M, vals[0])
    if vals.size == grid.M:
        return vals.copy()
    if vals.size == len(segs):
        out = np.empty(grid.M)
        for v, s in zip(vals, segs):
            out[s] = v
        return out
    raise InvalidArgument(
        f"expected 1, {len(segs)} or {grid.M} values for this grid, got {vals.size}"
    )


@dataclass(frozen=True, eq=False)
class GrowthField:
    """Positive, cellwise-constant growth stretch over a :class:`MaterialGrid`."""

    grid: MaterialGrid
    values: np.ndarray

    def __post_init__(self):
        vals = _frozen(self.values)
        if vals.shape != (self.grid.M,):
            raise IncompatibleGrids(
                f"growth field has {vals.size} values for a grid with {self.grid.M} cells"
            )
        if not np.all(np.isfinite(vals)) or np.any(vals <= 0.0):
            raise InvalidGrowthField("growth values must be finite and strictly positive")
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, grid: MaterialGrid, value: float = 1.0) -> "GrowthField":
        return cls(grid, np.full(grid.M, float(value)))

    @classmethod
    def from_segments(cls, grid: MaterialGrid, per_segment) -> "GrowthField":
        return cls(grid, cellwise(grid, per_segment))

    @property
    def natural_length(self) -> float:
        """Length ``L_G`` of the stress-free grown configuration."""
        return float(np.dot(self.values, self.grid.widths))


def sup_distance(G1: GrowthField, G2: GrowthField) -> float:
    if not G1.grid.same_as(G2.grid):
        raise IncompatibleGrids("growth fields live on different grids")
    return float(np.max(np.abs(G1.values - G2.values)))


@dataclass(frozen=True, eq=False)
class GrowthBounds:
    """Closed sup-norm ball ``B(center, radius)`` and its bounds ``[gamma0, gamma1]``."""

    center: GrowthField
    radius: float
    gamma0: float = field(init=False)
    gamma1: float = field(init=False)

    def __post_init__(self):
        if not (np.isfinite(self.radius) and self.radius >= 0):
            raise InvalidArgument(f"ball radius must be nonnegative, got {self.radius!r}")
        g0 = float(self.center.values.min()) - self.radius
        g1 = float(self.center.values.max()) + self.radius
        if g0 <= 0:
            raise InvalidArgument(
                f"ball reaches nonpositive growth (inf G0 - R1 = {g0!r}); shrink the radius"
            )
        object.__setattr__(self, "gamma0", g0)
        object.__setattr__(self, "gamma1", g1)

    def contains(self, G: GrowthField, tol: float = 0.0) -> bool:
        return sup_distance(G, self.center) <= self.radius + tol

    def admissible(self, G: GrowthField, tol: float = 0.0) -> bool:
        v = G.values
        return bool(np.all(v >= self.gamma0 - tol) and np.all(v <= self.gamma1 + tol))

    def sample(self, rng: np.random.Generator) -> GrowthField:
        """Uniform draw from the ball (each cell independently)."""
        u = rng.uniform(-1.0, 1.0, size=self.center.grid.M)
        vals = self.center.values + self.radius * u
        return GrowthField(self.center.grid, vals)
