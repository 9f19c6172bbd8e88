import numpy as np
import pytest

import ndsentropy as nd
from ndsentropy.corpus import fixture_names


class TestRegistry:
    def test_names(self):
        assert set(fixture_names()) == {
            "example-gh",
            "identity",
            "reflection",
            "tent",
            "tent-uniform-limit",
            "two-attractor",
        }

    def test_unknown_name_lists_registry(self):
        with pytest.raises(LookupError) as err:
            nd.load_fixture("lorenz")
        msg = str(err.value)
        assert "tent" in msg and "example-gh" in msg

    def test_maps_pass_invariants_on_load(self):
        # constructing PiecewiseLinearMap validates; loading must not raise
        for name in fixture_names():
            fx = nd.load_fixture(name)
            for m in fx.system.maps:
                assert m.breakpoints[0] == 0.0 and m.breakpoints[-1] == 1.0
                assert (np.diff(m.breakpoints) > 0).all()
                assert m.values.min() >= 0.0 and m.values.max() <= 1.0


class TestExampleGH:
    def test_breakpoint_data(self):
        g, h = nd.load_fixture("example-gh").system.maps
        assert g.breakpoints.tolist() == [0.0, 0.25, 0.75, 1.0]
        assert g.values.tolist() == [0.5, 1.0, 0.0, 0.5]
        assert h.breakpoints.tolist() == [0.0, 0.5, 0.75, 1.0]
        assert h.values.tolist() == [0.5, 1.0, 0.0, 0.5]

    def test_formula_spot_values(self):
        g, h = nd.load_fixture("example-gh").system.maps
        # g: 2x + 1/2 on [0, 1/4]; -2x + 3/2 on [1/4, 3/4]; 2x - 3/2 on [3/4, 1]
        assert g(0.125) == 0.75
        assert g(0.5) == 0.5
        assert g(0.875) == 0.25
        # h: x + 1/2; -4x + 3; 2x - 3/2
        assert h(0.25) == 0.75
        assert h(0.625) == 0.5
        assert h(0.875) == 0.25

    def test_two_periodic_and_tagged_transitive(self):
        fx = nd.load_fixture("example-gh")
        assert fx.system.period == 2
        assert "transitive" in fx.tags


class TestGoldens:
    def test_every_golden_has_provenance(self):
        for name in fixture_names():
            for metric, golden in nd.load_fixture(name).goldens.items():
                assert golden.provenance, (name, metric)

    def test_lipschitz_goldens_match_computation(self):
        for name in fixture_names():
            fx = nd.load_fixture(name)
            if "lipschitz" in fx.goldens:
                assert nd.lipschitz_constant(fx.system) == fx.goldens["lipschitz"].value

    def test_fixture_data_is_shared_immutable(self):
        a = nd.load_fixture("tent")
        b = nd.load_fixture("tent")
        assert a.system is b.system
        with pytest.raises(Exception):
            a.system.maps[0].breakpoints[0] = 0.5


class TestShippedDefinitionFiles:
    def test_files_parse_to_registry_systems(self):
        from importlib import resources

        from ndsentropy.cli import parse_system_text

        for name in fixture_names():
            text = (resources.files("ndsentropy") / "fixtures" / f"{name}.toml").read_text()
            parsed = parse_system_text(text, source=f"{name}.toml")
            assert parsed == nd.load_fixture(name).system, name


class TestEntropyGoldens:
    def test_direct_estimates_meet_goldens(self):
        import ndsentropy as nd2

        params = nd2.BowenParams(0.05, 1, 7, 2000)
        for name in fixture_names():
            fx = nd2.load_fixture(name)
            golden = fx.goldens.get("entropy_nats")
            if golden is None:
                continue
            est = nd2.entropy_estimate(fx.system, params)
            assert abs(est.value - golden.value) <= golden.tolerance, name
