"""Closed-form bounds and dimension estimates.

The Lipschitz mixing-time bound says an epsilon-fattened delta-ball can grow
by at most a factor c per step, so covering a space of diameter D takes at
least log_c((D(c-1)+2e)/(2d(c-1)+2e)) steps (or (D-2d)/(2e) when c = 1).
Combined with the lower box dimension of the space this yields an entropy
lower bound from measured mixing times.  Fixed-point growth of the composed
maps gives an independent entropy estimate for expansive transitive systems.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .bowen import EntropyEstimate, GrowthSeries, fit_log_growth
from .errors import ConfigurationError, NotChainMixingError
from .grid import Grid
from .recurrence import chain_mixing_time, is_chain_transitive
from .systems import MapSequence, count_isolated_fixed_points, iter_compositions

# mixing measured at epsilon and epsilon/2 must agree this closely, or the
# saturation is fattening-driven rather than dynamics-driven (see
# entropy_lower_bound)
_EPS_SCALING_FACTOR = 1.5
_EPS_SCALING_SLACK = 2

_DEFAULT_BOX_SCALES = tuple(0.5**k for k in range(2, 7))


@dataclass(frozen=True)
class BoundReport:
    """One computed bound with the parameters that produced it."""

    kind: str  # "MixingTimeLB" | "EntropyLB" | "FixGrowth"
    value: float
    inputs: dict

    def __post_init__(self):
        if not (math.isfinite(self.value) and self.value >= 0.0):
            raise ValueError(f"bound value must be finite and >= 0, got {self.value}")

    def to_json(self) -> str:
        return json.dumps({"kind": self.kind, "value": self.value, "inputs": self.inputs},
                          sort_keys=True)


def mixing_time_lower_bound(c: float, D: float, delta: float, epsilon: float) -> float:
    """Least possible chain mixing time of a Lipschitz-c system of diameter D.

    c > 1: log_c((D(c-1)+2e)/(2d(c-1)+2e));  c = 1: (D-2d)/(2e).
    """
    if c < 1.0:
        raise ValueError(f"the Lipschitz constant must be >= 1, got {c}")
    if not (0.0 < epsilon <= delta <= D / 2.0):
        raise ValueError(
            f"need 0 < epsilon <= delta <= D/2, got eps={epsilon}, delta={delta}, D={D}"
        )
    if c == 1.0:
        value = (D - 2.0 * delta) / (2.0 * epsilon)
    else:
        ratio = (D * (c - 1.0) + 2.0 * epsilon) / (2.0 * delta * (c - 1.0) + 2.0 * epsilon)
        value = math.log(ratio) / math.log(c)
    return max(0.0, value)


def box_dimension(points, scales: Sequence[float]) -> float:
    """Least-squares slope of log box count vs log(1/scale); boxes are [k*s, (k+1)*s)."""
    points = np.asarray(points, dtype=np.float64)
    if points.size == 0:
        raise ValueError("the point set must be nonempty")
    scales = [float(s) for s in scales]
    if len(scales) < 2 or any(not 0.0 < s < 1.0 for s in scales):
        raise ValueError("need at least two scales, each in (0, 1)")
    counts = np.array(
        [np.unique(np.floor(points / s)).size for s in scales], dtype=np.float64
    )
    if np.all(counts == counts[0]):
        return 0.0 if counts[0] == 1 else _slope(np.log(1.0 / np.asarray(scales)), np.log(counts))
    return _slope(np.log(1.0 / np.asarray(scales)), np.log(counts))


def _slope(xs: np.ndarray, ys: np.ndarray) -> float:
    xm = xs.mean()
    return float(np.sum((xs - xm) * (ys - ys.mean())) / np.sum((xs - xm) ** 2))


def entropy_lower_bound(
    F: MapSequence,
    delta_list: Sequence[float],
    epsilon: float,
    grid: Grid,
    box_scales: Sequence[float] = _DEFAULT_BOX_SCALES,
) -> float:
    """d' times the max over delta of log(1/delta) / measured mixing time.

    Applicability gates (the bound assumes genuine mixing):
      - the system must be chain transitive at grid scale, and
      - the measured mixing time must be stable under halving epsilon.
    A time that roughly doubles when epsilon halves is produced by the
    epsilon-fattening alone (isometries behave this way), not by the maps, so
    the bound does not apply and NotChainMixingError is raised.
    """
    deltas = sorted(float(d) for d in delta_list)
    if not deltas:
        raise ConfigurationError("delta_list must be nonempty")
    if any(d < epsilon for d in deltas):
        raise ConfigurationError("every delta must be >= epsilon")
    if not is_chain_transitive(F, 2.0 * grid.spacing, grid):
        raise NotChainMixingError(
            "the system is not chain transitive at grid scale; the bound does not apply"
        )
    quotients = []
    for delta in deltas:
        m1 = chain_mixing_time(F, epsilon, delta, grid)
        if epsilon / 2.0 > grid.spacing:
            m2 = chain_mixing_time(F, epsilon / 2.0, delta, grid)
            if m2.value > _EPS_SCALING_FACTOR * m1.value + _EPS_SCALING_SLACK:
                raise NotChainMixingError(
                    f"mixing time scales with 1/epsilon at delta={delta} "
                    f"({m1.value} -> {m2.value}); saturation is fattening-driven, "
                    "the system is not topologically mixing",
                    worst_node=m2.per_point_max_witness,
                )
        quotients.append(math.log(1.0 / delta) / m1.value)
    dprime = box_dimension(grid.centers, box_scales)
    return dprime * max(quotients)


def fix_growth_entropy(F: MapSequence, n_multiples: Sequence[int]) -> EntropyEstimate:
    """Regression slope of log fixed-point count of F_[1,n] vs n, in nats.

    Counts are exact (piecewise-analytic root solving on the composed map).
    The lengths must be positive multiples of the period so each composition
    closes against the same phase.
    """
    if not F.is_periodic:
        raise ConfigurationError("fixed-point growth needs a periodic sequence")
    q = F.period
    ns = sorted(set(int(n) for n in n_multiples))
    if len(ns) < 2:
        raise ConfigurationError("need at least two composition lengths")
    if any(n < 1 or n % q != 0 for n in ns):
        raise ConfigurationError(f"lengths must be positive multiples of the period {q}")
    wanted = set(ns)
    counts = {}
    for n, comp in iter_compositions(F, ns[-1]):
        if n in wanted:
            counts[n] = count_isolated_fixed_points(comp)
    entries = [(n, counts[n]) for n in ns if counts[n] >= 1]
    series = GrowthSeries(tuple(entries))
    slope, stderr = fit_log_growth(entries)
    return EntropyEstimate(
        value=max(0.0, slope), slope_stderr=stderr, series=series, params=None
    )
