"""Shared fixtures and independent brute-force oracles for the test suite.

The oracles here deliberately avoid the library's own algorithms: path counts
enumerate sequences recursively, chain recurrence does breadth-first search
over explicitly thresholded edges, and separated sets are found by exhaustive
subset enumeration.
"""

import numpy as np
import pytest

import ndsentropy as nd
from ndsentropy.pseudograph import build_transition_graph
from ndsentropy.systems import orbit_array

ALL_FIXTURES = [
    "tent",
    "example-gh",
    "reflection",
    "identity",
    "two-attractor",
    "tent-uniform-limit",
]
PERIODIC_FIXTURES = [n for n in ALL_FIXTURES if n != "tent-uniform-limit"]


@pytest.fixture(scope="session")
def systems():
    return {name: nd.load_fixture(name).system for name in ALL_FIXTURES}


def direct_edges(F, k, alpha, grid):
    """Thresholded adjacency recomputed point by point (no window arithmetic)."""
    edges = []
    fk = F.map_at(k)
    for i, p in enumerate(grid.centers):
        y = fk(float(p))
        for j, q in enumerate(grid.centers):
            if abs(y - q) < alpha - 1e-12:
                edges.append((i, j))
    return edges


def brute_pseudo_orbits(F, n, alpha, grid):
    """All node sequences of length n satisfying the step inequality directly."""
    per_step = []
    for k in range(1, n):
        adj = {}
        for i, j in direct_edges(F, k, alpha, grid):
            adj.setdefault(i, []).append(j)
        per_step.append(adj)
    orbits = [[i] for i in range(grid.size)]
    for adj in per_step:
        orbits = [path + [j] for path in orbits for j in adj.get(path[-1], [])]
    return orbits


def brute_closed_paths(F, n, alpha, grid):
    """Closed pseudo-orbit cycles of length n by recursive enumeration."""
    graphs = [build_transition_graph(F, k, alpha, grid) for k in range(1, n + 1)]
    total = 0

    def extend(path, k):
        nonlocal total
        if k == n:
            g = graphs[n - 1]
            if g.lo[path[-1]] <= path[0] <= g.hi[path[-1]]:
                total += 1
            return
        g = graphs[k - 1]
        for j in range(g.lo[path[-1]], g.hi[path[-1]] + 1):
            extend(path + [j], k + 1)

    for start in range(grid.size):
        extend([start], 1)
    return total


def brute_chain_recurrent(F, alpha, grid):
    """Nodes with a return chain of some length from some start phase (BFS)."""
    q = F.period
    graphs = [build_transition_graph(F, k, alpha, grid) for k in range(1, q + 1)]
    out = []
    for x in range(grid.size):
        recurrent = False
        for m in range(q):
            seen = set()
            frontier = {(x, m)}
            while frontier and not recurrent:
                nxt = set()
                for i, ph in frontier:
                    g = graphs[ph]
                    for j in range(g.lo[i], g.hi[i] + 1):
                        if j == x:
                            recurrent = True
                        state = (j, (ph + 1) % q)
                        if state not in seen:
                            seen.add(state)
                            nxt.add(state)
                frontier = nxt
            if recurrent:
                break
        if recurrent:
            out.append(x)
    return np.array(out, dtype=np.int64)


def subsets_max_separated(F, n, eps, grid):
    """Exact maximum separated cardinality by full subset enumeration."""
    xs = grid.centers
    orbits = orbit_array(F, xs, n - 1)
    m = len(xs)
    d = np.max(np.abs(orbits[:, :, None] - orbits[:, None, :]), axis=0)
    separated = d > eps + 1e-12
    best = 0
    for mask in range(1 << m):
        idx = [i for i in range(m) if mask >> i & 1]
        if len(idx) <= best:
            continue
        if all(separated[a, b] for ai, a in enumerate(idx) for b in idx[ai + 1 :]):
            best = len(idx)
    return best


def sign_change_fixed_points(F, n, samples=1_000_000):
    """Count fixed points of the n-fold composition by a fine sign scan.

    Samples are classified +/0/- (0 within 1e-12), runs are compressed, and a
    root is either a 0-run or a direct +/- alternation.  Exact for maps whose
    roots are transversal or sit exactly on sample points, which covers the
    dyadic fixtures.
    """
    xs = np.linspace(0.0, 1.0, samples + 1)
    ys = xs.copy()
    for k in range(1, n + 1):
        ys = F.map_at(k).eval_many(ys)
    g = ys - xs
    cls = np.where(np.abs(g) <= 1e-12, 0, np.sign(g)).astype(np.int8)
    runs = [cls[0]]
    for c in cls[1:]:
        if c != runs[-1]:
            runs.append(c)
    roots = sum(1 for r in runs if r == 0)
    roots += sum(1 for a, b in zip(runs, runs[1:]) if a != 0 and b != 0)
    return roots
