"""Transition graphs over the grid, pseudo-orbit counting, and shadowing search.

A transition graph at tolerance alpha has an edge i -> j exactly when the
step map sends the center p_i to within alpha of p_j, so directed paths are
precisely the grid-resolution alpha-pseudo-orbits.  Counting such paths (and
closed paths) gives the pseudo-entropy estimators; the spectral radius of the
step-matrix product is the exact asymptotic of the closed-path counts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import sparse

from .bowen import BowenParams, EntropyEstimate, GrowthSeries, fit_log_growth
from .errors import ConfigurationError, NumericError, UnsupportedLengthError
from .grid import Grid
from .systems import MapSequence, orbit_array

# int64 path counts whose float shadow exceeds this are redone in exact
# big-integer arithmetic
_INT64_SAFE = 2.0**52


@dataclass(frozen=True)
class TransitionGraph:
    """Thresholded adjacency for one time step: edge i -> j iff |f_k(p_i) - p_j| < alpha.

    In one dimension each adjacency row is a contiguous index window [lo, hi].
    """

    step: int
    alpha: float
    grid: Grid
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        for name in ("lo", "hi"):
            a = np.asarray(getattr(self, name), dtype=np.int64).copy()
            a.flags.writeable = False
            object.__setattr__(self, name, a)

    def targets(self, i: int) -> np.ndarray:
        return np.arange(self.lo[i], self.hi[i] + 1, dtype=np.int64)

    @property
    def out_degrees(self) -> np.ndarray:
        return self.hi - self.lo + 1

    def to_sparse(self, dtype=np.int64) -> sparse.csr_matrix:
        n = self.grid.size
        degrees = self.out_degrees
        indptr = np.concatenate(([0], np.cumsum(degrees)))
        indices = np.concatenate([self.targets(i) for i in range(n)])
        data = np.ones(indices.size, dtype=dtype)
        return sparse.csr_matrix((data, indices, indptr), shape=(n, n))

    def edge_text(self) -> str:
        """Edge-list export: a `step alpha` header, then one `src dst` line per edge."""
        lines = [f"{self.step} {self.alpha!r}"]
        for i in range(self.grid.size):
            for j in range(self.lo[i], self.hi[i] + 1):
                lines.append(f"{i} {j}")
        return "\n".join(lines) + "\n"


def build_transition_graph(F: MapSequence, k: int, alpha: float, grid: Grid) -> TransitionGraph:
    """Exact thresholded adjacency of step k at tolerance alpha.

    Requires alpha > spacing/2 so that every image has at least one target
    node (no dead ends).
    """
    if not alpha > grid.spacing / 2.0:
        raise ConfigurationError(
            f"alpha = {alpha} must exceed half the grid spacing {grid.spacing / 2.0}"
        )
    images = F.map_at(k).eval_many(grid.centers)
    lo, hi = grid.window_bounds(images, alpha)
    return TransitionGraph(step=k, alpha=alpha, grid=grid, lo=lo, hi=hi)


@dataclass(frozen=True)
class PseudoOrbit:
    """A grid-resolution alpha-pseudo-orbit: consecutive nodes joined by graph edges."""

    alpha: float
    start_step: int
    nodes: tuple
    grid: Grid

    def __post_init__(self):
        nodes = tuple(int(v) for v in self.nodes)
        object.__setattr__(self, "nodes", nodes)
        if len(nodes) < 1:
            raise ValueError("a pseudo-orbit needs at least one node")

    def decode(self) -> np.ndarray:
        return self.grid.centers[list(self.nodes)]

    def is_consistent(self, F: MapSequence) -> bool:
        pts = self.decode()
        for k in range(len(pts) - 1):
            fx = F.map_at(self.start_step + k).eval_many(pts[k : k + 1])[0]
            if not abs(fx - pts[k + 1]) < self.alpha:
                return False
        return True


def random_pseudo_orbit(
    F: MapSequence,
    alpha: float,
    grid: Grid,
    length: int,
    rng: np.random.Generator,
    start_step: int = 1,
) -> PseudoOrbit:
    """Sample a pseudo-orbit by picking a uniform in-window target at each step."""
    node = int(rng.integers(grid.size))
    nodes = [node]
    for k in range(length - 1):
        g = build_transition_graph(F, start_step + k, alpha, grid)
        node = int(rng.integers(g.lo[node], g.hi[node] + 1))
        nodes.append(node)
    return PseudoOrbit(alpha=alpha, start_step=start_step, nodes=tuple(nodes), grid=grid)


def _step_graphs(F: MapSequence, alpha: float, grid: Grid, n_steps: int) -> list:
    """Transition graphs for steps 1..n_steps (periodic sequences reuse phases)."""
    if F.is_periodic:
        q = F.period
        phase = [build_transition_graph(F, k, alpha, grid) for k in range(1, q + 1)]
        return [phase[(k - 1) % q] for k in range(1, n_steps + 1)]
    return [build_transition_graph(F, k, alpha, grid) for k in range(1, n_steps + 1)]


def _coarse_blocks(grid: Grid, epsilon: float) -> tuple:
    blocks = np.floor(grid.centers / epsilon).astype(np.int64)
    return blocks, int(blocks[-1]) + 1


def _coarse_matrix(graph: TransitionGraph, blocks: np.ndarray, n_blocks: int) -> np.ndarray:
    """Block adjacency: edge b -> b' iff some fine edge joins the blocks."""
    E = np.zeros((n_blocks, n_blocks), dtype=bool)
    cb_lo = blocks[graph.lo]
    cb_hi = blocks[graph.hi]
    for b, c0, c1 in zip(blocks, cb_lo, cb_hi):
        row = E[b]
        if not (row[c0] and row[c1]):
            row[c0 : c1 + 1] = True
    return E


def _class_count_series(
    F: MapSequence, ns: Sequence[int], epsilon: float, alpha: float, grid: Grid
) -> list:
    """Exact big-integer counts of coarse paths of length n for each n in ns."""
    if epsilon < 2.0 * grid.spacing:
        raise ConfigurationError(
            f"epsilon = {epsilon} must be >= twice the grid spacing {grid.spacing}"
        )
    ns = sorted(set(int(n) for n in ns))
    if any(n < 1 for n in ns):
        raise ConfigurationError("path lengths must be >= 1")
    n_max = ns[-1]
    blocks, n_blocks = _coarse_blocks(grid, epsilon)
    graphs = _step_graphs(F, alpha, grid, max(0, n_max - 1))

    coarse_cache: dict[int, np.ndarray] = {}

    def coarse_at(t: int) -> np.ndarray:
        g = graphs[t]
        key = g.step if F.is_periodic else t
        if key not in coarse_cache:
            coarse_cache[key] = _coarse_matrix(g, blocks, n_blocks)
        return coarse_cache[key]

    nonempty = np.bincount(blocks, minlength=n_blocks) > 0
    f = [1 if nonempty[b] else 0 for b in range(n_blocks)]
    results = {}
    if 1 in ns:
        results[1] = sum(f)
    for t in range(n_max - 1):
        E = coarse_at(t)
        new = [0] * n_blocks
        for b in range(n_blocks):
            fb = f[b]
            if fb:
                for c in np.flatnonzero(E[b]):
                    new[c] += fb
        f = new
        if (t + 2) in ns:
            results[t + 2] = sum(f)
    return [results[n] for n in ns]


def count_pseudo_orbit_classes(
    F: MapSequence, n: int, epsilon: float, alpha: float, grid: Grid
) -> int:
    """Number of distinct epsilon-coarse itineraries of length n of alpha-pseudo-orbits.

    Grid nodes are merged into blocks of width epsilon; the count is the
    number of length-n paths in the block graph (big-integer exact).  Two fine
    pseudo-orbits with distinct coarse itineraries are (n, eps')-separated for
    some eps' in [epsilon - 2*spacing, epsilon], which brackets the separated
    pseudo-orbit count between the two scales.
    """
    return _class_count_series(F, [n], epsilon, alpha, grid)[0]


def pseudo_entropy(F: MapSequence, params: BowenParams, alpha: float) -> EntropyEstimate:
    """Growth rate of separated pseudo-orbit class counts, in nats."""
    grid = Grid(params.grid_size)
    ns = list(range(params.n_min, params.n_max + 1))
    counts = _class_count_series(F, ns, params.epsilon, alpha, grid)
    entries = [(n, c) for n, c in zip(ns, counts) if c >= 1]
    series = GrowthSeries(tuple(entries))
    slope, stderr = fit_log_growth(entries)
    return EntropyEstimate(
        value=max(0.0, slope), slope_stderr=stderr, series=series, params=params, alpha=alpha
    )


@dataclass(frozen=True)
class PathCountMatrix:
    """0/1 step matrices A_1..A_q of a periodic sequence, A_k[i, j] = edge i -> j."""

    period: int
    matrices: tuple


def build_path_matrices(F: MapSequence, alpha: float, grid: Grid) -> PathCountMatrix:
    q = F.period
    mats = tuple(
        build_transition_graph(F, k, alpha, grid).to_sparse(np.int64) for k in range(1, q + 1)
    )
    return PathCountMatrix(period=q, matrices=mats)


class _BigIntRows:
    """Minimal sparse rows-of-dicts matrix over Python integers (exact fallback)."""

    def __init__(self, rows):
        self.rows = rows

    @classmethod
    def from_graph(cls, graph: TransitionGraph) -> "_BigIntRows":
        return cls(
            [
                {int(j): 1 for j in range(graph.lo[i], graph.hi[i] + 1)}
                for i in range(graph.grid.size)
            ]
        )

    def matmul(self, other: "_BigIntRows") -> "_BigIntRows":
        out = []
        for row in self.rows:
            acc: dict[int, int] = {}
            for k, a in row.items():
                for j, b in other.rows[k].items():
                    acc[j] = acc.get(j, 0) + a * b
            out.append(acc)
        return _BigIntRows(out)

    def trace(self) -> int:
        return sum(row.get(i, 0) for i, row in enumerate(self.rows))


def _period_product_exact(F: MapSequence, alpha: float, grid: Grid) -> _BigIntRows:
    q = F.period
    prod = _BigIntRows.from_graph(build_transition_graph(F, 1, alpha, grid))
    for k in range(2, q + 1):
        prod = prod.matmul(_BigIntRows.from_graph(build_transition_graph(F, k, alpha, grid)))
    return prod


def _closed_path_traces(F: MapSequence, alpha: float, grid: Grid, ms: Sequence[int]) -> dict:
    """trace((A_1...A_q)^m) for each m in ms; exact despite int64 fast path.

    The float64 shadow of every intermediate product bounds the true entries
    (all terms nonnegative), so values below 2^52 certify the int64 result;
    otherwise the computation is redone with Python integers.
    """
    ms = sorted(set(int(m) for m in ms))
    pcm = build_path_matrices(F, alpha, grid)
    M = pcm.matrices[0]
    for A in pcm.matrices[1:]:
        M = M @ A
    Mf = M.astype(np.float64)
    safe = Mf.data.size == 0 or Mf.data.max() < _INT64_SAFE

    traces = {}
    if safe:
        P, Pf = M, Mf
        m_cur = 1
        while True:
            if m_cur in ms:
                traces[m_cur] = int(P.diagonal().sum())
            if m_cur >= ms[-1]:
                break
            P = P @ M
            Pf = Pf @ Mf
            m_cur += 1
            if Pf.data.size and Pf.data.max() >= _INT64_SAFE:
                safe = False
                break
    if not safe:
        traces = {}
        big = _period_product_exact(F, alpha, grid)
        P = big
        m_cur = 1
        while True:
            if m_cur in ms:
                traces[m_cur] = P.trace()
            if m_cur >= ms[-1]:
                break
            P = P.matmul(big)
            m_cur += 1
    return traces


def count_periodic_pseudo_orbits(F: MapSequence, n: int, alpha: float, grid: Grid) -> int:
    """Exact number of closed grid pseudo-orbit cycles of length n.

    Equals trace((A_1 A_2 ... A_q)^{n/q}); n must be a multiple of the period
    (a closed pseudo-orbit of any other length would wrap against a
    phase-shifted sequence).
    """
    if not F.is_periodic:
        raise ConfigurationError("periodic pseudo-orbit counting needs a periodic sequence")
    q = F.period
    if n < 1 or n % q != 0:
        raise UnsupportedLengthError(f"length {n} is not a positive multiple of the period {q}")
    return _closed_path_traces(F, alpha, grid, [n // q])[n // q]


def _cycle_census(M: sparse.spmatrix) -> str:
    """Classify the cycle structure of a 0/1 adjacency matrix.

    "acyclic": no directed cycle (radius 0).  "simple": every strongly
    connected component is a bare cycle (radius exactly 1).  "rich": some
    component holds two distinct cycles (radius strictly above 1).
    """
    from scipy.sparse import csgraph

    _, labels = csgraph.connected_components(M, directed=True, connection="strong")
    coo = M.tocoo()
    internal = labels[coo.row] == labels[coo.col]
    sizes = np.bincount(labels, minlength=labels.max() + 1)
    edge_counts = np.bincount(labels[coo.row[internal]], minlength=sizes.size)
    has_selfloop = M.diagonal() > 0
    loop_labels = np.unique(labels[has_selfloop]) if has_selfloop.any() else np.empty(0, int)
    cyclic = (sizes > 1) | np.isin(np.arange(sizes.size), loop_labels)
    if not cyclic.any():
        return "acyclic"
    if np.any(coo.data[internal] > 1):  # parallel paths inside a component
        return "rich"
    if np.any(edge_counts[cyclic] > sizes[cyclic]):
        return "rich"
    return "simple"


def spectral_radius(M: sparse.spmatrix, tol: float = 1e-10, max_iter: int = 100_000) -> float:
    """Dominant eigenvalue of a nonnegative 0/1 sparse matrix.

    Radius 0 and 1 are decided exactly by a cycle census of the strongly
    connected components (a chain feeding a cycle makes eigenvalue 1
    defective, where power iteration converges only algebraically).  Richer
    graphs use power iteration on M + I, whose dominant eigenvalue is then
    separated from the defective-1 cluster.
    """
    census = _cycle_census(M)
    if census == "acyclic":
        return 0.0
    if census == "simple":
        return 1.0
    n = M.shape[0]
    v = np.full(n, 1.0 / math.sqrt(n))
    lam_prev = math.inf
    for it in range(1, max_iter + 1):
        w = M @ v + v
        lam = float(np.linalg.norm(w))
        if lam == 0.0:
            return 0.0
        v = w / lam
        if abs(lam - lam_prev) <= tol * max(1.0, abs(lam)):
            return lam - 1.0
        lam_prev = lam
    raise NumericError(
        f"power iteration did not converge within {max_iter} iterations", iterations=max_iter
    )


def periodic_pseudo_entropy(
    F: MapSequence, alpha: float, grid: Grid, n_window: Sequence[int] | None = None
) -> EntropyEstimate:
    """(1/q) log of the spectral radius of A_1...A_q, with a trace-growth diagnostic.

    The spectral radius is the exact asymptotic of the closed pseudo-orbit
    counts; the finite-n regression over trace counts is reported as
    ``diagnostic_slope`` and should agree with the value.
    """
    if not F.is_periodic:
        raise ConfigurationError("periodic pseudo-entropy needs a periodic sequence")
    q = F.period
    if n_window is None:
        # small multiples carry a strong transient from sub-dominant modes
        n_window = tuple(q * m for m in range(6, 15))
    ns = sorted(set(int(n) for n in n_window))
    if any(n % q != 0 or n < 1 for n in ns):
        raise UnsupportedLengthError(f"window lengths must be positive multiples of {q}")

    traces = _closed_path_traces(F, alpha, grid, [n // q for n in ns])
    entries = [(n, traces[n // q]) for n in ns if traces[n // q] >= 1]
    series = GrowthSeries(tuple(entries))
    slope, stderr = fit_log_growth(entries)

    pcm = build_path_matrices(F, alpha, grid)
    M = pcm.matrices[0].astype(np.float64)
    for A in pcm.matrices[1:]:
        M = M @ A.astype(np.float64)
    rho = spectral_radius(M)
    value = max(0.0, math.log(rho) / q) if rho > 0 else 0.0

    params = BowenParams(
        epsilon=grid.spacing, n_min=ns[0], n_max=max(ns[-1], ns[0] + 5), grid_size=grid.size
    )
    return EntropyEstimate(
        value=value,
        slope_stderr=stderr,
        series=series,
        params=params,
        alpha=alpha,
        diagnostic_slope=slope,
    )


def _max_deviation(F: MapSequence, ys: np.ndarray, targets: np.ndarray, start_step: int) -> np.ndarray:
    """Objective of the tracing search: max_k |F_[start,k](y) - targets[k]| per y."""
    orbits = orbit_array(F, ys, len(targets) - 1, start=start_step)
    return np.max(np.abs(orbits - targets[:, None]), axis=0)


def shadowing_trace(F: MapSequence, pseudo: PseudoOrbit, epsilon: float) -> float | None:
    """Search for a point whose true orbit epsilon-traces the pseudo-orbit.

    Coarse scan at resolution epsilon/10, then golden-section refinement of
    the max-deviation objective on the best bracket.  Returns the best point
    if its deviation is below epsilon, else None (absence is a value).
    """
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    targets = pseudo.decode()
    start = pseudo.start_step
    num = int(round(10.0 / epsilon)) + 1
    ys = np.linspace(0.0, 1.0, max(num, 3))
    devs = _max_deviation(F, ys, targets, start)
    k = int(np.argmin(devs))
    best_y, best_dev = float(ys[k]), float(devs[k])

    h = float(ys[1] - ys[0])
    a = max(0.0, ys[k] - h)
    b = min(1.0, ys[k] + h)
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc = float(_max_deviation(F, np.array([c]), targets, start)[0])
    fd = float(_max_deviation(F, np.array([d]), targets, start)[0])
    while b - a > 1e-12:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = float(_max_deviation(F, np.array([c]), targets, start)[0])
            if fc < best_dev:
                best_y, best_dev = c, fc
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = float(_max_deviation(F, np.array([d]), targets, start)[0])
            if fd < best_dev:
                best_y, best_dev = d, fd
    return best_y if best_dev < epsilon else None
