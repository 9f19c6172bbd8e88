"""Entropy and recurrence analysis for non-autonomous sequences of interval maps."""

__version__ = "0.1.0"

from .bounds import (
    BoundReport,
    box_dimension,
    entropy_lower_bound,
    fix_growth_entropy,
    mixing_time_lower_bound,
)
from .bowen import (
    BowenParams,
    EntropyEstimate,
    GrowthSeries,
    bowen_distance,
    entropy_estimate,
    max_separated_count,
    min_spanning_count,
)
from .corpus import Fixture, fixture_names, load_fixture
from .errors import (
    ConfigurationError,
    NonIsolatedFixedPointsError,
    NotChainMixingError,
    NumericError,
    UnsupportedLengthError,
)
from .grid import Grid
from .pseudograph import (
    PathCountMatrix,
    PseudoOrbit,
    TransitionGraph,
    build_transition_graph,
    count_periodic_pseudo_orbits,
    count_pseudo_orbit_classes,
    periodic_pseudo_entropy,
    pseudo_entropy,
    shadowing_trace,
    spectral_radius,
)
from .recurrence import (
    MixingTimeResult,
    RecurrenceReport,
    chain_mixing_time,
    chain_recurrent_set,
    is_chain_transitive,
    nonwandering_nodes,
    omega_limit_nodes,
    recurrence_report,
)
from .systems import (
    MapSequence,
    OrbitSegment,
    PiecewiseLinearMap,
    compose_orbit,
    eval_map,
    fixed_point_count,
    lap_count,
    lipschitz_constant,
)
