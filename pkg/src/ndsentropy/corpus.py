"""Pinned fixture systems and golden expected values used across the test suite.

Fixtures are embedded as data (hermetic, no I/O); the same systems are also
shipped as definition files under ``fixtures/`` so the CLI can round-trip
them.  Golden values carry a provenance note naming the oracle or argument
that produced them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .systems import MapSequence, PiecewiseLinearMap


class Golden(NamedTuple):
    value: float
    tolerance: float
    provenance: str


@dataclass(frozen=True)
class Fixture:
    name: str
    system: MapSequence
    tags: frozenset
    goldens: dict


def _pl(breakpoints, values) -> PiecewiseLinearMap:
    return PiecewiseLinearMap(np.array(breakpoints, dtype=float), np.array(values, dtype=float))


def tent_map(slope: float = 2.0) -> PiecewiseLinearMap:
    """Symmetric tent with the given slope; peak slope/2 at x = 1/2."""
    return _pl([0.0, 0.5, 1.0], [0.0, slope / 2.0, 0.0])


LOG2 = math.log(2.0)

# alternating pair: g has slopes (2, -2, 2) over (0, 1/4, 3/4, 1);
# h has slopes (1, -4, 2) over (0, 1/2, 3/4, 1); the pair acts 2-periodically
_G = _pl([0.0, 0.25, 0.75, 1.0], [0.5, 1.0, 0.0, 0.5])
_H = _pl([0.0, 0.5, 0.75, 1.0], [0.5, 1.0, 0.0, 0.5])

_UNIFORM_LIMIT_HORIZON = 24


def _build_registry() -> dict:
    fixtures = {}

    def add(name, system, tags, goldens):
        fixtures[name] = Fixture(
            name=name, system=system, tags=frozenset(tags), goldens=goldens
        )

    add(
        "tent",
        MapSequence.periodic([tent_map()]),
        {"transitive", "mixing", "expansive", "lipschitz-c=2"},
        {
            "entropy_nats": Golden(LOG2, 0.10, "lap-count oracle: laps double each step"),
            "fix_growth_nats": Golden(LOG2, 0.02, "exact root counts 2^n per composition"),
            "periodic_pseudo_nats": Golden(LOG2, 0.05, "row-regular transition graph, radius 2"),
            "lipschitz": Golden(2.0, 0.0, "exact slope maximum"),
        },
    )
    add(
        "example-gh",
        MapSequence.periodic([_G, _H]),
        {"transitive", "lipschitz-c=4"},
        {
            "entropy_nats": Golden(LOG2, 0.15, "lap-count oracle on the period-2 composition"),
            "lipschitz": Golden(4.0, 0.0, "exact slope maximum (steepest piece of h)"),
        },
    )
    add(
        "identity",
        MapSequence.periodic([_pl([0.0, 1.0], [0.0, 1.0])]),
        {"zero-entropy", "lipschitz-c=1"},
        {
            "entropy_nats": Golden(0.0, 0.02, "isometry: orbit metric equals the base metric"),
            "lipschitz": Golden(1.0, 0.0, "exact slope maximum"),
        },
    )
    add(
        "reflection",
        MapSequence.periodic([_pl([0.0, 1.0], [1.0, 0.0])]),
        {"zero-entropy", "lipschitz-c=1"},
        {
            "entropy_nats": Golden(0.0, 0.02, "isometry: orbit metric equals the base metric"),
            "lipschitz": Golden(1.0, 0.0, "exact slope maximum"),
        },
    )
    # gentle S-curve: slope 1/2 near the endpoints, an identity plateau on
    # [1/4, 3/4]; orbits from outside drift into the plateau, nothing escapes,
    # so the chain recurrent set is a strict subset of the grid
    add(
        "two-attractor",
        MapSequence.periodic([_pl([0.0, 0.25, 0.5, 0.75, 1.0], [0.125, 0.25, 0.5, 0.75, 0.875])]),
        {"zero-entropy", "lipschitz-c=1"},
        {
            "entropy_nats": Golden(0.0, 0.05, "monotone non-expanding map: counts are constant"),
            "lipschitz": Golden(1.0, 0.0, "exact slope maximum of the pinned breakpoint data"),
        },
    )
    slopes = [2.0 - 1.0 / (k + 4) for k in range(1, _UNIFORM_LIMIT_HORIZON + 1)]
    add(
        "tent-uniform-limit",
        MapSequence.finite([tent_map(s) for s in slopes]),
        {f"lipschitz-c={max(slopes)!r}"},
        {
            "entropy_upper_nats": Golden(
                LOG2 + 0.05, 0.0, "uniform-limit comparison: at most the limit map's rate"
            ),
            "lipschitz": Golden(max(slopes), 0.0, "exact slope maximum of the last map"),
        },
    )
    return fixtures


_REGISTRY = _build_registry()


def fixture_names() -> tuple:
    return tuple(sorted(_REGISTRY))


def load_fixture(name: str) -> Fixture:
    """Return the pinned fixture; unknown names raise with the full registry listed."""
    try:
        return _REGISTRY[name]
    except KeyError:
        raise LookupError(
            f"unknown fixture {name!r}; available: {', '.join(fixture_names())}"
        ) from None
