import math

import numpy as np
import pytest

import ndsentropy as nd
from ndsentropy import BowenParams, Grid
from ndsentropy.bounds import BoundReport
from ndsentropy.errors import (
    ConfigurationError,
    NonIsolatedFixedPointsError,
    NotChainMixingError,
)

LOG2 = math.log(2.0)


class TestMixingTimeLowerBound:
    def test_c1_hand_value(self):
        assert nd.mixing_time_lower_bound(1.0, 1.0, 0.1, 0.1) == pytest.approx(4.0)

    def test_c2_hand_value(self):
        want = math.log(1.04 / 0.14) / math.log(2.0)
        assert nd.mixing_time_lower_bound(2.0, 1.0, 0.05, 0.02) == pytest.approx(want)
        assert want == pytest.approx(2.893, abs=0.01)

    def test_delta_at_half_diameter(self):
        assert nd.mixing_time_lower_bound(1.0, 1.0, 0.5, 0.1) == 0.0

    def test_monotonicities(self):
        base = nd.mixing_time_lower_bound(2.0, 1.0, 0.05, 0.02)
        assert nd.mixing_time_lower_bound(2.0, 1.0, 0.1, 0.02) <= base
        assert nd.mixing_time_lower_bound(2.0, 1.0, 0.05, 0.05) <= base
        assert nd.mixing_time_lower_bound(4.0, 1.0, 0.05, 0.02) <= base

    def test_validation(self):
        with pytest.raises(ValueError):
            nd.mixing_time_lower_bound(0.5, 1.0, 0.1, 0.05)
        with pytest.raises(ValueError):
            nd.mixing_time_lower_bound(2.0, 1.0, 0.05, 0.1)  # eps > delta


class TestBoxDimension:
    def test_uniform_grid_dimension_one(self):
        pts = (np.arange(2000) + 0.5) / 2000
        d = nd.box_dimension(pts, [0.25, 0.125, 0.0625, 0.03125])
        assert d == pytest.approx(1.0, abs=0.05)

    def test_single_point(self):
        assert nd.box_dimension([0.42], [0.5, 0.25, 0.125]) == 0.0

    def test_cantor_middle_thirds(self):
        # level-8 endpoints of the middle-thirds construction
        pts = [0.0, 1.0]
        for _ in range(8):
            pts = [p / 3 for p in pts] + [2 / 3 + p / 3 for p in pts]
        scales = [3.0**-k for k in range(1, 7)]
        d = nd.box_dimension(np.array(sorted(pts)), scales)
        assert d == pytest.approx(math.log(2) / math.log(3), abs=0.05)

    def test_validation(self):
        with pytest.raises(ValueError):
            nd.box_dimension([], [0.5, 0.25])
        with pytest.raises(ValueError):
            nd.box_dimension([0.1], [0.5])


class TestEntropyLowerBound:
    def test_tent_value_and_soundness(self, systems):
        grid = Grid(2000)
        lb = nd.entropy_lower_bound(systems["tent"], [0.05, 0.02], 0.01, grid)
        assert 0.45 <= lb <= 0.75
        h = nd.entropy_estimate(systems["tent"], BowenParams(0.05, 1, 7, 2000)).value
        assert lb <= h + 0.1

    def test_identity_raises(self, systems):
        with pytest.raises(NotChainMixingError):
            nd.entropy_lower_bound(systems["identity"], [0.05, 0.02], 0.01, Grid(2000))

    def test_two_attractor_raises(self, systems):
        with pytest.raises(NotChainMixingError):
            nd.entropy_lower_bound(systems["two-attractor"], [0.05, 0.02], 0.01, Grid(2000))

    def test_delta_validation(self, systems):
        with pytest.raises(ConfigurationError):
            nd.entropy_lower_bound(systems["tent"], [0.005], 0.01, Grid(2000))


class TestTheorem57Empirically:
    def test_measured_time_respects_bound(self, systems):
        # example-gh is excluded: it is chain transitive but not chain mixing
        # (reachable sets oscillate with the period-2 phase), so the theorem's
        # hypothesis does not hold for it
        grid = Grid(2000)
        for name, c in (("tent", 2.0), ("identity", 1.0)):
            F = systems[name]
            for delta in (0.05, 0.1):
                for eps in (0.02,):
                    measured = nd.chain_mixing_time(F, eps, delta, grid).value
                    bound = nd.mixing_time_lower_bound(c, 1.0, delta, eps)
                    assert measured >= bound, (name, delta, eps)

    def test_gh_is_not_chain_mixing(self, systems):
        # the period-2 phase makes reachable sets oscillate between halves
        with pytest.raises(NotChainMixingError):
            nd.chain_mixing_time(systems["example-gh"], 0.02, 0.05, Grid(2000))


class TestFixGrowthEntropy:
    def test_tent_exact(self, systems):
        est = nd.fix_growth_entropy(systems["tent"], list(range(1, 17)))
        assert est.series.counts == [2**n for n in range(1, 17)]
        assert est.value == pytest.approx(LOG2, abs=0.02)

    def test_reflection_non_isolated(self, systems):
        with pytest.raises(NonIsolatedFixedPointsError):
            nd.fix_growth_entropy(systems["reflection"], [2, 4, 6, 8])

    def test_gh_agrees_with_periodic_pseudo_entropy(self, systems):
        est = nd.fix_growth_entropy(systems["example-gh"], [2, 4, 6, 8, 10, 12])
        grid = Grid(2000)
        hp = nd.periodic_pseudo_entropy(systems["example-gh"], grid.spacing, grid).value
        assert abs(est.value - hp) <= 0.15

    def test_validation(self, systems):
        with pytest.raises(ConfigurationError):
            nd.fix_growth_entropy(systems["example-gh"], [2, 3, 4])
        with pytest.raises(ConfigurationError):
            nd.fix_growth_entropy(systems["tent-uniform-limit"], [2, 4])


class TestBoundReport:
    def test_validates_and_serializes(self):
        rep = BoundReport(kind="MixingTimeLB", value=4.0, inputs={"c": 1.0, "delta": 0.1})
        assert '"kind": "MixingTimeLB"' in rep.to_json()
        with pytest.raises(ValueError):
            BoundReport(kind="EntropyLB", value=float("nan"), inputs={})
        with pytest.raises(ValueError):
            BoundReport(kind="EntropyLB", value=-0.1, inputs={})
