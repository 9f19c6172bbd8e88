"""Entropy estimation from orbit data: separated/spanning counts and growth fits.

The orbit metric d_n(x, y) = max_{0<=j<n} |F_[1,j](x) - F_[1,j](y)| turns
exponential orbit divergence into growing separated-set counts; the entropy
estimate is the fitted growth rate of log count versus n.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ConfigurationError
from .grid import Grid
from .systems import MapSequence, orbit_array

# Counts this close to the number of candidate points are grid-limited, not
# dynamics-limited, and are dropped from growth fits (see fit_log_growth).
# On a quantized grid the consecutive-gap floor ceil(eps/(c^n * spacing))
# throttles trailing counts well before the raw candidate total, so the
# fraction is deliberately conservative; the spacing < eps/4 precondition
# keeps legitimate constant counts below a quarter of the ceiling, safely
# under it.
SATURATION_FRACTION = 0.4


@dataclass(frozen=True)
class BowenParams:
    """Parameters of a separated/spanning count estimate."""

    epsilon: float
    n_min: int
    n_max: int
    grid_size: int

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise ConfigurationError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if self.n_min < 1 or self.n_min >= self.n_max:
            raise ConfigurationError(f"need 1 <= n_min < n_max, got [{self.n_min}, {self.n_max}]")
        if self.n_max - self.n_min < 4:
            raise ConfigurationError("the time window needs at least 5 points for a slope fit")
        if self.grid_size < 2:
            raise ConfigurationError(f"grid_size must be >= 2, got {self.grid_size}")


@dataclass(frozen=True)
class GrowthSeries:
    """(n, count) pairs with strictly increasing n and positive counts."""

    entries: tuple

    def __post_init__(self):
        entries = tuple((int(n), int(c)) for n, c in self.entries)
        object.__setattr__(self, "entries", entries)
        ns = [n for n, _ in entries]
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise ValueError("n values must be strictly increasing")
        if any(c < 1 for _, c in entries):
            raise ValueError("counts must be >= 1")

    @property
    def ns(self) -> np.ndarray:
        return np.array([n for n, _ in self.entries], dtype=np.int64)

    @property
    def counts(self) -> list:
        return [c for _, c in self.entries]

    @property
    def log_counts(self) -> np.ndarray:
        return np.array([math.log(c) for _, c in self.entries])

    def to_csv(self) -> str:
        lines = ["n,count,log_count"]
        for n, c in self.entries:
            lines.append(f"{n},{c},{math.log(c)!r}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class EntropyEstimate:
    """A fitted exponential growth rate in nats, with diagnostics."""

    value: float
    slope_stderr: float
    series: GrowthSeries
    params: BowenParams | None
    alpha: float | None = None
    diagnostic_slope: float | None = None

    @property
    def value_bits(self) -> float:
        return self.value / math.log(2.0)

    def to_record(self) -> dict:
        rec = {
            "value_nats": self.value,
            "value_bits": self.value_bits,
            "stderr": self.slope_stderr,
        }
        if self.params is not None:
            rec.update(
                epsilon=self.params.epsilon,
                n_min=self.params.n_min,
                n_max=self.params.n_max,
                grid_size=self.params.grid_size,
            )
        if self.alpha is not None:
            rec["alpha"] = self.alpha
        if self.diagnostic_slope is not None:
            rec["diagnostic_slope"] = self.diagnostic_slope
        return rec

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)


def fit_log_growth(entries: Sequence[tuple], ceiling: int | None = None) -> tuple:
    """Least-squares slope of log count vs n, with two robustness rules.

    Trailing entries with count >= SATURATION_FRACTION * ceiling are dropped
    (the grid cannot hold more points, so they carry no growth information).
    The smallest n is dropped once if its residual exceeds 3x the fitted
    slope's standard error (finite-size transient).

    Returns (slope, slope_stderr).
    """
    entries = [(int(n), int(c)) for n, c in entries if c >= 1]
    if ceiling is not None:
        while len(entries) > 2 and entries[-1][1] >= SATURATION_FRACTION * ceiling:
            entries.pop()
    if len(entries) < 2:
        return 0.0, 0.0

    def lsq(pts):
        xs = np.array([n for n, _ in pts], dtype=np.float64)
        ys = np.array([math.log(c) for _, c in pts])
        xm = xs.mean()
        sxx = float(np.sum((xs - xm) ** 2))
        slope = float(np.sum((xs - xm) * (ys - ys.mean())) / sxx)
        resid = ys - (ys.mean() + slope * (xs - xm))
        if len(pts) > 2:
            s2 = float(np.sum(resid**2)) / (len(pts) - 2)
            stderr = math.sqrt(s2 / sxx)
            rse = math.sqrt(s2)
        else:
            stderr = 0.0
            rse = 0.0
        return slope, stderr, rse, resid

    slope, stderr, rse, resid = lsq(entries)
    if len(entries) > 3 and stderr > 0 and abs(resid[0]) > 3.0 * stderr:
        slope, stderr, _, _ = lsq(entries[1:])
    return slope, stderr


def bowen_distance(F: MapSequence, x: float, y: float, n: int) -> float:
    """max over 0 <= j < n of |F_[1,j](x) - F_[1,j](y)|."""
    if n < 1:
        raise ValueError(f"orbit metric needs n >= 1, got {n}")
    orbits = orbit_array(F, np.array([x, y]), n - 1)
    return float(np.max(np.abs(orbits[:, 0] - orbits[:, 1])))


def _candidate_points(grid: Grid, candidates) -> tuple:
    if candidates is None:
        idx = np.arange(grid.size, dtype=np.int64)
    else:
        idx = np.asarray(candidates, dtype=np.int64)
        if idx.size == 0:
            raise ConfigurationError("candidate set is empty")
        if np.any(np.diff(idx) <= 0):
            idx = np.unique(idx)
    return idx, grid.centers[idx]


def _check_spacing(grid: Grid, epsilon: float) -> None:
    if not grid.spacing < epsilon / 4.0:
        raise ConfigurationError(
            f"grid spacing {grid.spacing} must be < epsilon/4 = {epsilon / 4.0}"
        )


# candidate sets up to this size get an exact maximum separated set; greedy
# extension is used beyond it (exact search is a maximum-independent-set
# problem, infeasible at scale)
EXACT_SEPARATED_LIMIT = 20

# coordinate snap: an exact mathematical tie d == epsilon must not flip on
# float round-off, so separation requires d > epsilon + SNAP and coverage
# allows d <= epsilon + SNAP
SNAP = 1e-12


def _greedy_separated(orbits: np.ndarray, xs: np.ndarray, epsilon: float) -> list:
    """Greedy maximal (n, epsilon)-separated subset, scanned in ascending order.

    Only witnesses within epsilon in the first coordinate can conflict, since
    the orbit metric dominates |x - y|.
    """
    witness: list[int] = []
    tail = 0
    for k in range(xs.size):
        while tail < len(witness) and xs[k] - xs[witness[tail]] > epsilon:
            tail += 1
        close = witness[tail:]
        if close:
            d = np.max(np.abs(orbits[:, k : k + 1] - orbits[:, close]), axis=0)
            if not np.all(d > epsilon + SNAP):
                continue
        witness.append(k)
    return witness


def _exact_max_separated(orbits: np.ndarray, epsilon: float) -> list:
    """Exact maximum separated subset by branch and bound over conflict bitmasks.

    Deterministic: the take-branch is explored first from the lowest index, so
    the first maximum found (and kept) prefers small coordinates.
    """
    m = orbits.shape[1]
    d = np.max(np.abs(orbits[:, :, None] - orbits[:, None, :]), axis=0)
    conflict_matrix = (d <= epsilon + SNAP) & ~np.eye(m, dtype=bool)
    conflict = [int(sum(1 << j for j in np.flatnonzero(conflict_matrix[i]))) for i in range(m)]

    best_set = 0
    best_count = 0

    def search(avail: int, taken: int, count: int) -> None:
        nonlocal best_set, best_count
        if count + bin(avail).count("1") <= best_count:
            return
        if avail == 0:
            if count > best_count:
                best_count, best_set = count, taken
            return
        v = (avail & -avail).bit_length() - 1
        bit = 1 << v
        search(avail & ~bit & ~conflict[v], taken | bit, count + 1)
        search(avail & ~bit, taken, count)

    search((1 << m) - 1, 0, 0)
    return [i for i in range(m) if best_set >> i & 1]


def _separated_witness(orbits: np.ndarray, xs: np.ndarray, epsilon: float) -> list:
    if xs.size <= EXACT_SEPARATED_LIMIT:
        return _exact_max_separated(orbits, epsilon)
    return _greedy_separated(orbits, xs, epsilon)


def max_separated_count(
    F: MapSequence,
    n: int,
    epsilon: float,
    grid: Grid,
    candidates=None,
) -> tuple:
    """Size and witness of a maximal (n, epsilon)-separated set of grid points.

    Candidate sets up to EXACT_SEPARATED_LIMIT points are solved exactly
    (branch and bound); larger ones use greedy extension in ascending grid
    order.  Either way the count is a lower bound on the true maximal
    separated cardinality over [0, 1] and is the reported estimator of it.
    """
    _check_spacing(grid, epsilon)
    _, xs = _candidate_points(grid, candidates)
    orbits = orbit_array(F, xs, n - 1)
    witness = _separated_witness(orbits, xs, epsilon)
    return len(witness), [float(xs[w]) for w in witness]


def _cover_matrix(orbits: np.ndarray, epsilon: float, block: int = 256) -> np.ndarray:
    """cover[i, j] = True iff the orbit metric between points i and j is <= epsilon."""
    m = orbits.shape[1]
    cover = np.empty((m, m), dtype=bool)
    for start in range(0, m, block):
        stop = min(start + block, m)
        d = np.max(np.abs(orbits[:, start:stop, None] - orbits[:, None, :]), axis=0)
        cover[start:stop] = d <= epsilon + SNAP
    return cover


def min_spanning_count(
    F: MapSequence,
    n: int,
    epsilon: float,
    grid: Grid,
    candidates=None,
) -> tuple:
    """Greedy set-cover estimate of the minimal (n, epsilon)-spanning cardinality.

    Each round picks the candidate covering the most still-uncovered points,
    ties to the smaller coordinate.  With no candidate restriction the cover
    target is the whole grid; with one, the candidate set itself.
    """
    _check_spacing(grid, epsilon)
    _, xs = _candidate_points(grid, candidates)
    orbits = orbit_array(F, xs, n - 1)
    cover = _cover_matrix(orbits, epsilon)
    uncovered = np.ones(xs.size, dtype=bool)
    witness: list[int] = []
    while uncovered.any():
        gains = cover[:, uncovered].sum(axis=1)
        best = int(np.argmax(gains))
        witness.append(best)
        uncovered &= ~cover[best]
    return len(witness), [float(xs[w]) for w in witness]


def entropy_estimate(F: MapSequence, params: BowenParams, candidates=None) -> EntropyEstimate:
    """Growth rate of the separated counts over n in [n_min, n_max], in nats.

    The value is the least-squares slope of log count vs n, floored at zero.
    Constant counts (isometries) give value 0 with stderr 0.
    """
    grid = Grid(params.grid_size)
    _check_spacing(grid, params.epsilon)
    _, xs = _candidate_points(grid, candidates)
    orbits = orbit_array(F, xs, params.n_max - 1)
    entries = []
    for n in range(params.n_min, params.n_max + 1):
        witness = _separated_witness(orbits[:n], xs, params.epsilon)
        entries.append((n, len(witness)))
    series = GrowthSeries(tuple(entries))
    slope, stderr = fit_log_growth(entries, ceiling=xs.size)
    return EntropyEstimate(
        value=max(0.0, slope), slope_stderr=stderr, series=series, params=params
    )
