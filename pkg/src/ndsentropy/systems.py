"""Piecewise-linear interval maps and non-autonomous map sequences.

A map sequence F = {f_i} acts on [0, 1] by applying a different map at each
time step.  Compositions are written F_[i,n] = f_{i+n-1} o ... o f_i, with
F_[i,0] the identity.  All maps here are continuous piecewise-linear self-maps
of [0, 1], which keeps composition, lap counting and fixed-point counting
exact: binary64 represents every dyadic rational exactly, and the fixture maps
are dyadic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import NonIsolatedFixedPointsError

SNAP = 1e-12  # tolerance for merging breakpoints and deduplicating roots


def _as_readonly(values) -> np.ndarray:
    a = np.asarray(values, dtype=np.float64).copy()
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class PiecewiseLinearMap:
    """A continuous self-map of [0, 1] given by linear interpolation.

    ``breakpoints`` must be strictly increasing with first element 0 and last
    element 1; ``values`` (same length) must all lie in [0, 1].
    """

    breakpoints: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        bp = _as_readonly(self.breakpoints)
        vv = _as_readonly(self.values)
        object.__setattr__(self, "breakpoints", bp)
        object.__setattr__(self, "values", vv)
        if bp.ndim != 1 or bp.size < 2:
            raise ValueError("need at least two breakpoints")
        if vv.shape != bp.shape:
            raise ValueError("breakpoints and values must have the same length")
        if bp[0] != 0.0 or bp[-1] != 1.0:
            raise ValueError("breakpoints must start at 0 and end at 1")
        if not np.all(np.diff(bp) > 0):
            raise ValueError("breakpoints must be strictly increasing")
        if vv.min() < 0.0 or vv.max() > 1.0:
            raise ValueError("values must lie in [0, 1]")

    def __call__(self, x: float) -> float:
        return eval_map(self, x)

    def eval_many(self, xs: np.ndarray) -> np.ndarray:
        """Vectorized evaluation; inputs are assumed to lie in [0, 1]."""
        out = np.interp(xs, self.breakpoints, self.values)
        return np.clip(out, 0.0, 1.0)

    @property
    def slopes(self) -> np.ndarray:
        return np.diff(self.values) / np.diff(self.breakpoints)

    @property
    def max_abs_slope(self) -> float:
        return float(np.max(np.abs(self.slopes)))

    @property
    def lap_number(self) -> int:
        """Number of maximal monotonicity intervals."""
        s = np.sign(self.slopes)
        s = s[s != 0]
        if s.size == 0:
            return 1
        return int(1 + np.count_nonzero(s[1:] != s[:-1]))

    def __eq__(self, other) -> bool:
        if not isinstance(other, PiecewiseLinearMap):
            return NotImplemented
        return np.array_equal(self.breakpoints, other.breakpoints) and np.array_equal(
            self.values, other.values
        )

    def __repr__(self) -> str:
        return (
            f"PiecewiseLinearMap(breakpoints={self.breakpoints.tolist()}, "
            f"values={self.values.tolist()})"
        )


def identity_map() -> PiecewiseLinearMap:
    return PiecewiseLinearMap(np.array([0.0, 1.0]), np.array([0.0, 1.0]))


PERIODIC = "periodic"
FINITE = "finite"


@dataclass(frozen=True, eq=False)
class MapSequence:
    """The sequence F = {f_i}: periodic, or truncated at a finite horizon.

    Indexing is 1-based and total for periodic sequences; finite sequences
    reject step indices beyond their horizon.
    """

    maps: tuple
    kind: str
    horizon: int | None = None

    @classmethod
    def periodic(cls, maps: Sequence[PiecewiseLinearMap]) -> "MapSequence":
        maps = tuple(maps)
        if not maps:
            raise ValueError("a map sequence needs at least one map")
        return cls(maps=maps, kind=PERIODIC, horizon=None)

    @classmethod
    def finite(cls, maps: Sequence[PiecewiseLinearMap], horizon: int | None = None) -> "MapSequence":
        maps = tuple(maps)
        if not maps:
            raise ValueError("a map sequence needs at least one map")
        if horizon is None:
            horizon = len(maps)
        if not 1 <= horizon <= len(maps):
            raise ValueError(f"horizon must be in [1, {len(maps)}], got {horizon}")
        return cls(maps=maps, kind=FINITE, horizon=horizon)

    @property
    def is_periodic(self) -> bool:
        return self.kind == PERIODIC

    @property
    def period(self) -> int:
        if not self.is_periodic:
            raise ValueError("finite map sequences have no period")
        return len(self.maps)

    def map_at(self, i: int) -> PiecewiseLinearMap:
        """The map f_i applied at step i >= 1."""
        if i < 1:
            raise IndexError(f"step index must be >= 1, got {i}")
        if self.is_periodic:
            return self.maps[(i - 1) % len(self.maps)]
        if i > self.horizon:
            raise IndexError(f"step {i} exceeds the horizon {self.horizon}")
        return self.maps[i - 1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, MapSequence):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.horizon == other.horizon
            and len(self.maps) == len(other.maps)
            and all(a == b for a, b in zip(self.maps, other.maps))
        )


@dataclass(frozen=True)
class OrbitSegment:
    """A finite stretch of a trajectory: points[k+1] = f_{start_index+k}(points[k])."""

    start_index: int
    points: tuple

    @classmethod
    def generate(cls, F: MapSequence, start_index: int, x0: float, length: int) -> "OrbitSegment":
        pts = [x0]
        x = x0
        for k in range(length):
            x = eval_map(F.map_at(start_index + k), x)
            pts.append(x)
        return cls(start_index=start_index, points=tuple(pts))


def eval_map(m: PiecewiseLinearMap, x: float) -> float:
    """Evaluate the piecewise-linear map at x in [0, 1].

    The result is clamped to [0, 1] only to absorb round-off (values are
    already in [0, 1] at the breakpoints).
    """
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"point {x!r} outside the domain [0, 1]")
    y = float(np.interp(x, m.breakpoints, m.values))
    return min(1.0, max(0.0, y))


def compose_orbit(F: MapSequence, i: int, n: int, x: float) -> float:
    """F_[i,n](x): apply f_i, then f_{i+1}, ..., then f_{i+n-1}.  n = 0 is the identity."""
    if n < 0:
        raise ValueError(f"composition length must be >= 0, got {n}")
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"point {x!r} outside the domain [0, 1]")
    if not F.is_periodic and n > 0 and i + n - 1 > F.horizon:
        raise IndexError(f"steps [{i}, {i + n - 1}] exceed the horizon {F.horizon}")
    y = x
    for k in range(n):
        y = eval_map(F.map_at(i + k), y)
    return y


def orbit_array(F: MapSequence, xs: np.ndarray, depth: int, start: int = 1) -> np.ndarray:
    """Rows j = 0..depth of F_[start,j] applied to every point of xs.

    Shape (depth + 1, len(xs)); row 0 is xs itself.
    """
    xs = np.asarray(xs, dtype=np.float64)
    out = np.empty((depth + 1, xs.size), dtype=np.float64)
    out[0] = xs
    for j in range(depth):
        out[j + 1] = F.map_at(start + j).eval_many(out[j])
    return out


def lipschitz_constant(F: MapSequence) -> float:
    """Smallest c with |f_i(x) - f_i(y)| <= c|x - y| for every map in the sequence.

    Exact for piecewise-linear maps: the max of the absolute slopes.
    """
    maps = F.maps if F.is_periodic else F.maps[: F.horizon]
    return max(m.max_abs_slope for m in maps)


def compose_pl(outer: PiecewiseLinearMap, inner: PiecewiseLinearMap) -> PiecewiseLinearMap:
    """Exact piecewise-linear representation of outer(inner(x)).

    Breakpoints of the composition are the inner breakpoints plus the
    preimages, under each linear piece of ``inner``, of the outer breakpoints.
    """
    xb = inner.breakpoints
    yv = inner.values
    fb = outer.breakpoints

    lo = np.minimum(yv[:-1], yv[1:])
    hi = np.maximum(yv[:-1], yv[1:])
    i0 = np.searchsorted(fb, lo, side="right")
    i1 = np.searchsorted(fb, hi, side="left")
    counts = np.maximum(i1 - i0, 0)
    total = int(counts.sum())

    if total:
        piece = np.repeat(np.arange(counts.size), counts)
        starts = np.concatenate(([0], np.cumsum(counts)))[:-1]
        within = np.arange(total) - np.repeat(starts, counts)
        c = fb[i0[piece] + within]
        dy = yv[piece + 1] - yv[piece]
        dx = xb[piece + 1] - xb[piece]
        x_cross = xb[piece] + (c - yv[piece]) * (dx / dy)
        xs = np.concatenate((xb, np.clip(x_cross, 0.0, 1.0)))
        xs.sort(kind="stable")
    else:
        xs = xb.copy()

    keep = np.concatenate(([True], np.diff(xs) > SNAP))
    xs = xs[keep]
    xs[0] = 0.0
    xs[-1] = 1.0
    ys = outer.eval_many(inner.eval_many(xs))
    return PiecewiseLinearMap(xs, ys)


def iter_compositions(F: MapSequence, n_max: int) -> Iterator[tuple[int, PiecewiseLinearMap]]:
    """Yield (n, F_[1,n]) as an exact piecewise-linear map for n = 1..n_max."""
    if n_max < 1:
        return
    comp = F.map_at(1)
    yield 1, comp
    for n in range(2, n_max + 1):
        comp = compose_pl(F.map_at(n), comp)
        yield n, comp


def composed_map(F: MapSequence, n: int) -> PiecewiseLinearMap:
    """Exact piecewise-linear representation of F_[1,n]."""
    if n == 0:
        return identity_map()
    comp = None
    for _, comp in iter_compositions(F, n):
        pass
    return comp


def lap_count(F: MapSequence, n: int) -> int:
    """Number of maximal monotonicity intervals of F_[1,n].

    The exponential growth rate of this count is the classical entropy oracle
    for piecewise-monotone interval maps.
    """
    if n < 1:
        raise ValueError(f"lap count needs n >= 1, got {n}")
    return composed_map(F, n).lap_number


def count_isolated_fixed_points(pl: PiecewiseLinearMap) -> int:
    """Exact count of solutions of pl(x) = x, one per coincident boundary root.

    Raises NonIsolatedFixedPointsError when a whole linear piece lies on the
    diagonal.
    """
    b = pl.breakpoints
    v = pl.values
    a = (v[1:] - v[:-1]) / (b[1:] - b[:-1])
    parallel = np.abs(a - 1.0) <= SNAP
    on_diag = parallel & (np.abs(v[:-1] - b[:-1]) <= SNAP)
    if on_diag.any():
        piece = int(np.flatnonzero(on_diag)[0])
        raise NonIsolatedFixedPointsError(
            f"piece [{b[piece]}, {b[piece + 1]}] lies on the diagonal; fixed points are not isolated"
        )
    with np.errstate(divide="ignore", invalid="ignore"):
        x_star = (v[:-1] - a * b[:-1]) / (1.0 - a)
    ok = ~parallel
    inside = ok & (x_star >= b[:-1] - SNAP) & (x_star <= b[1:] + SNAP)
    roots = np.sort(x_star[inside])
    if roots.size == 0:
        return 0
    return int(1 + np.count_nonzero(np.diff(roots) > SNAP))


def fixed_point_count(F: MapSequence, n: int) -> int:
    """Exact number of solutions of F_[1,n](x) = x."""
    if n < 1:
        raise ValueError(f"fixed-point count needs n >= 1, got {n}")
    return count_isolated_fixed_points(composed_map(F, n))
