import json
import math

import numpy as np
import pytest

import ndsentropy as nd
from ndsentropy import BowenParams, Grid
from ndsentropy.bowen import GrowthSeries, fit_log_growth
from ndsentropy.errors import ConfigurationError

LOG2 = math.log(2.0)


class TestParamsAndSeries:
    def test_params_validation(self):
        with pytest.raises(ConfigurationError):
            BowenParams(epsilon=1.2, n_min=1, n_max=7, grid_size=100)
        with pytest.raises(ConfigurationError):
            BowenParams(epsilon=0.1, n_min=5, n_max=5, grid_size=100)
        with pytest.raises(ConfigurationError):
            BowenParams(epsilon=0.1, n_min=2, n_max=5, grid_size=100)  # window too short

    def test_series_validation(self):
        with pytest.raises(ValueError):
            GrowthSeries(((2, 4), (2, 5)))
        with pytest.raises(ValueError):
            GrowthSeries(((1, 0),))

    def test_series_csv(self):
        csv = GrowthSeries(((1, 2), (2, 4))).to_csv()
        lines = csv.strip().split("\n")
        assert lines[0] == "n,count,log_count"
        assert lines[1].startswith("1,2,")
        assert float(lines[2].split(",")[2]) == pytest.approx(math.log(4))


class TestBowenDistance:
    def test_identity_of_indiscernibles(self, systems):
        assert nd.bowen_distance(systems["example-gh"], 0.42, 0.42, 5) == 0.0

    def test_n1_is_base_metric(self, systems):
        assert nd.bowen_distance(systems["tent"], 0.2, 0.5, 1) == pytest.approx(0.3)

    def test_tent_hand_value(self, systems):
        # max(|0 - 0.1|, |T(0) - T(0.1)|) = max(0.1, 0.2)
        assert nd.bowen_distance(systems["tent"], 0.0, 0.1, 2) == pytest.approx(0.2)


class TestSeparatedCounts:
    def test_identity_eps03(self, systems):
        count, witness = nd.max_separated_count(systems["identity"], 3, 0.3, Grid(1000))
        assert count == 4
        gaps = np.diff(witness)
        assert (gaps > 0.3).all()

    def test_eps_above_diameter(self, systems):
        count, _ = nd.max_separated_count(systems["tent"], 4, 1.0, Grid(200))
        assert count == 1

    def test_tent_golden_pinned(self, systems):
        # pinned from a deterministic build-time run; scale check: the first
        # three iterates expand by at most 4, so pairwise gaps need to exceed
        # 0.24/4 = 0.06, giving about 16 points
        count, _ = nd.max_separated_count(systems["tent"], 3, 0.24, Grid(4000))
        assert count == 16

    def test_spacing_precondition(self, systems):
        with pytest.raises(ConfigurationError):
            nd.max_separated_count(systems["tent"], 3, 0.02, Grid(100))

    def test_exact_matches_subset_enumeration(self, systems):
        from conftest import subsets_max_separated

        grid = Grid(14)
        for name in ("tent", "example-gh", "identity"):
            for n in (1, 3, 5):
                got, _ = nd.max_separated_count(systems[name], n, 0.35, grid)
                assert got == subsets_max_separated(systems[name], n, 0.35, grid)

    def test_monotone_in_eps_and_n(self, systems):
        grid = Grid(18)
        for name in ("tent", "example-gh", "two-attractor"):
            F = systems[name]
            counts_eps = [nd.max_separated_count(F, 3, e, grid)[0] for e in (0.25, 0.3, 0.4)]
            assert counts_eps == sorted(counts_eps, reverse=True)
            counts_n = [nd.max_separated_count(F, n, 0.3, grid)[0] for n in (1, 2, 3, 4, 5)]
            assert counts_n == sorted(counts_n)


class TestSpanningCounts:
    def test_eps_above_diameter(self, systems):
        count, _ = nd.min_spanning_count(systems["tent"], 3, 1.0, Grid(200))
        assert count == 1

    def test_identity_eps03(self, systems):
        count, _ = nd.min_spanning_count(systems["identity"], 2, 0.3, Grid(1000))
        assert count == 2

    def test_sandwich(self, systems):
        # r_n(eps) <= s_n(eps) <= r_n(eps/2) on fixtures and a random system
        rng = np.random.default_rng(9)
        vals = sorted(rng.random(2))
        random_pl = nd.MapSequence.periodic(
            [
                nd.PiecewiseLinearMap(
                    np.array([0.0, 0.4, 1.0]), np.array([vals[0], vals[1], vals[0]])
                )
            ]
        )
        cases = [systems[n] for n in ("tent", "example-gh", "identity", "two-attractor")]
        cases.append(random_pl)
        grid = Grid(400)
        for F in cases:
            for n in (2, 4):
                span, _ = nd.min_spanning_count(F, n, 0.2, grid)
                sep, _ = nd.max_separated_count(F, n, 0.2, grid)
                span_half, _ = nd.min_spanning_count(F, n, 0.1, grid)
                assert span <= sep <= span_half


class TestEntropyEstimate:
    def test_reflection_isometry(self, systems):
        est = nd.entropy_estimate(systems["reflection"], BowenParams(0.05, 1, 7, 1000))
        assert est.value <= 0.01
        assert est.slope_stderr == pytest.approx(0.0, abs=1e-12)

    def test_tent_log2(self, systems):
        est = nd.entropy_estimate(systems["tent"], BowenParams(0.02, 4, 12, 4000))
        assert est.value == pytest.approx(LOG2, abs=0.10)

    def test_gh_matches_lap_oracle(self, systems):
        # the period-2 composition has lap growth rate log 4, so the sequence
        # rate is log 2; grid quantization keeps the estimate a bit below
        laps = [nd.lap_count(systems["example-gh"], n) for n in range(2, 13, 2)]
        slope = np.polyfit(range(2, 13, 2), np.log(laps), 1)[0]
        est = nd.entropy_estimate(systems["example-gh"], BowenParams(0.02, 1, 12, 4000))
        assert est.value == pytest.approx(slope, abs=0.15)

    def test_oracle_equivalence_all_fixtures(self, systems):
        # lap-count growth is the independent entropy oracle for every
        # piecewise-linear fixture
        params = BowenParams(0.02, 1, 12, 4000)
        for name, F in systems.items():
            laps = [nd.lap_count(F, n) for n in range(1, 13)]
            if max(laps) == 1:
                oracle = 0.0
            else:
                oracle = float(np.polyfit(range(1, 13), np.log(laps), 1)[0])
            est = nd.entropy_estimate(F, params)
            assert abs(est.value - oracle) <= 0.15, name

    def test_record_fields(self, systems):
        est = nd.entropy_estimate(systems["identity"], BowenParams(0.05, 1, 7, 500))
        rec = json.loads(est.to_json())
        assert set(rec) >= {"value_nats", "value_bits", "stderr", "epsilon", "n_min", "n_max", "grid_size"}
        assert rec["value_bits"] == pytest.approx(rec["value_nats"] / LOG2)


class TestFitLogGrowth:
    def test_pure_exponential(self):
        entries = [(n, 3 * 2**n) for n in range(1, 9)]
        slope, stderr = fit_log_growth(entries)
        assert slope == pytest.approx(LOG2, abs=1e-12)
        assert stderr == pytest.approx(0.0, abs=1e-12)

    def test_constant_counts_degenerate(self):
        slope, stderr = fit_log_growth([(n, 7) for n in range(1, 8)])
        assert slope == 0.0
        assert stderr == 0.0

    def test_ceiling_trim(self):
        # growth saturating against a ceiling of 100 candidates
        entries = [(1, 10), (2, 20), (3, 40), (4, 80), (5, 95), (6, 97)]
        slope, _ = fit_log_growth(entries, ceiling=100)
        assert slope == pytest.approx(LOG2, abs=0.01)

    def test_transient_drop(self):
        entries = [(1, 50)] + [(n, 2**n) for n in range(2, 9)]
        slope, _ = fit_log_growth(entries)
        assert slope == pytest.approx(LOG2, abs=0.01)
