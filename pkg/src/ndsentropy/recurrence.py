"""Recurrence structure from transition graphs.

Chain recurrence and chain transitivity are computed on the phase-lifted
graph: grid nodes are replicated once per time phase of the periodic sequence
so directed cycles respect the time-indexed dynamics.  The chain mixing time
iterates delta-balls forward, fattening by epsilon each step, until the whole
grid is covered.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.ndimage import maximum_filter1d
from scipy.sparse import csgraph

from .errors import ConfigurationError, NotChainMixingError
from .grid import Grid
from .pseudograph import build_transition_graph
from .systems import MapSequence


@dataclass(frozen=True)
class RecurrenceReport:
    """Summary of the chain structure at one tolerance alpha.

    ``scc_count`` counts strongly connected components of the phase-lifted
    transition graph (the computational object behind the chain analysis).
    """

    alpha: float
    chain_recurrent_nodes: tuple
    scc_count: int
    transitive: bool
    mixing_time: int | None = None

    def to_record(self) -> dict:
        return {
            "alpha": self.alpha,
            "chain_recurrent_nodes": ranges_text(self.chain_recurrent_nodes),
            "chain_recurrent_count": len(self.chain_recurrent_nodes),
            "scc_count": self.scc_count,
            "transitive": self.transitive,
            "mixing_time": self.mixing_time,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)


@dataclass(frozen=True)
class MixingTimeResult:
    """Chain mixing time: max over start nodes of the first confirmed cover step."""

    value: int
    per_point_max_witness: int
    confirm_horizon: int


def ranges_text(nodes) -> str:
    """Run-length encode a sorted node list as `a-b,c,d-e` text."""
    nodes = list(nodes)
    if not nodes:
        return ""
    runs = []
    start = prev = nodes[0]
    for v in nodes[1:]:
        if v == prev + 1:
            prev = v
            continue
        runs.append((start, prev))
        start = prev = v
    runs.append((start, prev))
    return ",".join(f"{a}-{b}" if b > a else f"{a}" for a, b in runs)


def _phase_count(F: MapSequence) -> int:
    return F.period if F.is_periodic else F.horizon


def _lifted_graph(F: MapSequence, alpha: float, grid: Grid) -> sparse.csr_matrix:
    """Adjacency on node-phase pairs: (i, m) -> (j, m+1 mod q) via the step m+1 map.

    Finite sequences get a wrap-free lift on phases 0..horizon-1 (time only
    advances, so the lift is a DAG and nothing is chain recurrent).
    """
    n = grid.size
    q = _phase_count(F)
    rows, cols = [], []
    for m in range(q):
        if not F.is_periodic and m == q - 1:
            break  # no step beyond the horizon
        g = build_transition_graph(F, m + 1, alpha, grid)
        deg = g.out_degrees
        src = np.repeat(np.arange(n, dtype=np.int64), deg) + m * n
        dst = np.concatenate([g.targets(i) for i in range(n)]) + ((m + 1) % q) * n
        rows.append(src)
        cols.append(dst)
    rows = np.concatenate(rows) if rows else np.empty(0, dtype=np.int64)
    cols = np.concatenate(cols) if cols else np.empty(0, dtype=np.int64)
    data = np.ones(rows.size, dtype=np.int8)
    return sparse.csr_matrix((data, (rows, cols)), shape=(n * q, n * q))


def _strict_reach(F: MapSequence, alpha: float, grid: Grid) -> tuple:
    """Node-level strict reachability under alpha-chains with free start phase.

    reach[x, y] is True iff some chain of length >= 1, started at some phase,
    leads from node x to node y.  Computed on the phase-lifted graph through
    its condensation: covall[s] = nodes touched by any component reachable
    from component s (itself included), then every lifted copy of x pools the
    covall sets of its successors.  Also returns the lifted SCC count.
    """
    n = grid.size
    q = _phase_count(F)
    A = _lifted_graph(F, alpha, grid)
    n_comp, labels = csgraph.connected_components(A, directed=True, connection="strong")

    # condensation edges and a topological order (Kahn)
    coo = A.tocoo()
    src, dst = labels[coo.row], labels[coo.col]
    cross = src != dst
    cond = set(zip(src[cross].tolist(), dst[cross].tolist()))
    succ: list[list[int]] = [[] for _ in range(n_comp)]
    indeg = np.zeros(n_comp, dtype=np.int64)
    for a, b in cond:
        succ[a].append(b)
        indeg[b] += 1
    order = [int(s) for s in np.flatnonzero(indeg == 0)]
    topo = []
    while order:
        s = order.pop()
        topo.append(s)
        for t in succ[s]:
            indeg[t] -= 1
            if indeg[t] == 0:
                order.append(t)

    proj = np.zeros((n_comp, n), dtype=bool)
    proj[labels, np.tile(np.arange(n), q)] = True
    covall = proj.copy()
    for s in reversed(topo):
        for t in succ[s]:
            covall[s] |= covall[t]

    reach = np.zeros((n, n), dtype=bool)
    indptr, indices = A.indptr, A.indices
    for v in range(n * q):
        ws = indices[indptr[v] : indptr[v + 1]]
        if ws.size:
            reach[v % n] |= np.logical_or.reduce(covall[labels[ws]], axis=0)
    return reach, int(n_comp)


def chain_recurrent_set(F: MapSequence, alpha: float, grid: Grid) -> np.ndarray:
    """Nodes admitting an alpha-chain back to themselves (any length, any start phase).

    Approximates the chain recurrent set at resolution alpha; computed by SCC
    condensation of the phase-lifted transition graph.
    """
    reach, _ = _strict_reach(F, alpha, grid)
    return np.flatnonzero(reach.diagonal())


def is_chain_transitive(F: MapSequence, alpha: float, grid: Grid) -> bool:
    """True iff every node reaches every node by an alpha-chain (free start phase)."""
    reach, _ = _strict_reach(F, alpha, grid)
    return bool(reach.all())


def recurrence_report(
    F: MapSequence, alpha: float, grid: Grid, mixing_time: int | None = None
) -> RecurrenceReport:
    reach, n_comp = _strict_reach(F, alpha, grid)
    nodes = np.flatnonzero(reach.diagonal())
    return RecurrenceReport(
        alpha=alpha,
        chain_recurrent_nodes=tuple(int(v) for v in nodes),
        scc_count=n_comp,
        transitive=bool(reach.all()),
        mixing_time=mixing_time,
    )


def nonwandering_nodes(F: MapSequence, alpha: float, grid: Grid, horizon: int) -> np.ndarray:
    """Nodes whose alpha-ball returns to itself within the horizon from every phase.

    Finite-resolution surrogate for the non-wandering set: for each start
    phase m, the alpha-ball around the node, iterated through the transition
    graph, must meet itself again after some r in [1, horizon] steps.  The
    return is ball-to-ball, so at resolution alpha this can include a
    boundary layer of nodes whose own chain-return needs the slightly larger
    tolerance (Lipschitz + 1) * alpha.
    """
    if not F.is_periodic:
        raise ConfigurationError("non-wandering analysis needs a periodic sequence")
    q = F.period
    if horizon < q:
        raise ConfigurationError(f"horizon {horizon} must be at least the period {q}")
    n = grid.size
    mats = [
        build_transition_graph(F, k, alpha, grid).to_sparse(np.int32) for k in range(1, q + 1)
    ]
    centers = grid.centers
    ball = np.abs(centers[None, :] - centers[:, None]) < alpha

    ok = np.ones(n, dtype=bool)
    for m in range(q):
        frontier = ball.astype(np.int32)
        hit = np.zeros(n, dtype=bool)
        for r in range(1, horizon + 1):
            frontier = np.asarray(frontier @ mats[(m + r - 1) % q])
            np.minimum(frontier, 1, out=frontier)
            hit |= ((frontier > 0) & ball).any(axis=1)
            if hit.all():
                break
        ok &= hit
    return np.flatnonzero(ok)


def omega_limit_nodes(
    F: MapSequence, x: float, grid: Grid, horizon: int, tail: int, tol: float
) -> np.ndarray:
    """Grid nodes within tol of a late orbit point F_[1,k](x), k in [horizon-tail, horizon].

    A finite-time surrogate for the omega-limit set of x.
    """
    if not 0 <= tail < horizon:
        raise ConfigurationError(f"need 0 <= tail < horizon, got tail={tail}, horizon={horizon}")
    y = x
    pts = []
    for k in range(1, horizon + 1):
        y = F.map_at(k).eval_many(np.array([y]))[0]
        if k >= horizon - tail:
            pts.append(y)
    pts = np.asarray(pts)
    near = np.abs(grid.centers[:, None] - pts[None, :]) <= tol
    return np.flatnonzero(near.any(axis=1))


def _nearest_node_indices(F: MapSequence, grid: Grid, k: int) -> np.ndarray:
    images = F.map_at(k).eval_many(grid.centers)
    idx = np.floor(images * grid.size).astype(np.int64)
    return np.clip(idx, 0, grid.size - 1)


def chain_mixing_time(
    F: MapSequence,
    epsilon: float,
    delta: float,
    grid: Grid,
    confirm_horizon: int | None = None,
) -> MixingTimeResult:
    """First step at which every epsilon-fattened image of every delta-ball covers the grid.

    For each start node x: R_0 is the delta-ball of x; R_{k+1} is the image of
    R_k under the step-(k+1) map (nearest-node on the grid) dilated by
    floor(epsilon * N) cells.  m(x) is the smallest K with R_k equal to the
    whole grid for every k in [K, K + confirm_horizon] (a finite certificate
    of Def.-style coverage for all later times).  Returns the max over x.

    Raises NotChainMixingError when some start never saturates within a step
    budget of 50 * N (a repeated reachable set at the same phase proves it
    never will).
    """
    if not F.is_periodic:
        raise ConfigurationError("chain mixing analysis needs a periodic sequence")
    if not 0.0 < epsilon <= delta:
        raise ConfigurationError(f"need 0 < epsilon <= delta, got eps={epsilon}, delta={delta}")
    if not epsilon > grid.spacing:
        raise ConfigurationError(
            f"epsilon = {epsilon} must exceed the grid spacing {grid.spacing}"
        )
    n = grid.size
    q = F.period
    if confirm_horizon is None:
        confirm_horizon = 2 * q + 10
    radius = int(math.floor(epsilon * n))
    window = 2 * radius + 1

    # one-nnz-per-row image matrices, one per phase
    image_mats = []
    for m in range(q):
        idx = _nearest_node_indices(F, grid, m + 1)
        P = sparse.csr_matrix(
            (np.ones(n, dtype=np.int32), (np.arange(n), idx)), shape=(n, n)
        )
        image_mats.append(P)

    centers = grid.centers
    reach = (np.abs(centers[None, :] - centers[:, None]) < delta).astype(np.uint8)

    active = np.arange(n)
    run_len = np.zeros(n, dtype=np.int64)
    m_val = np.full(n, -1, dtype=np.int64)
    failed: list[int] = []
    prev_masks = [None] * q  # per phase: full (n, N) uint8 snapshot for stall detection

    budget = 50 * n
    k = 0
    while active.size and k < budget:
        k += 1
        phase = (k - 1) % q
        img = np.asarray(reach[active].astype(np.int32) @ image_mats[phase])
        np.minimum(img, 1, out=img)
        img = maximum_filter1d(img.astype(np.uint8), size=window, axis=1, mode="constant", cval=0)
        reach[active] = img

        full = img.sum(axis=1) == n
        run_len[active] = np.where(full, run_len[active] + 1, 0)
        confirmed = run_len[active] == confirm_horizon + 1
        m_val[active[confirmed]] = k - confirm_horizon

        # a repeated mask at the same phase loops forever without covering
        stalled = np.zeros(active.size, dtype=bool)
        if prev_masks[phase] is not None:
            same = (img == prev_masks[phase][active]).all(axis=1)
            stalled = same & ~full & (run_len[active] == 0)
        if prev_masks[phase] is None:
            prev_masks[phase] = np.zeros((n, n), dtype=np.uint8)
        prev_masks[phase][active] = img

        if stalled.any():
            failed.extend(int(v) for v in active[stalled])
        active = active[~(confirmed | stalled)]

    if failed or active.size:
        worst = min(failed) if failed else int(active[0])
        raise NotChainMixingError(
            f"reachable set from node {worst} (x = {grid.centers[worst]:.6g}) never covers the "
            f"grid at delta={delta}, epsilon={epsilon}",
            worst_node=worst,
        )
    value = int(m_val.max())
    witness = int(np.argmax(m_val))
    return MixingTimeResult(value=value, per_point_max_witness=witness, confirm_horizon=confirm_horizon)
