import numpy as np
import pytest

import rangeshift.experiments as experiments
from rangeshift import (
    DomainKind,
    Scenario,
    SteadyStateCache,
    SweepSpec,
    apply_parameter,
    corridor_exit_report,
    critical_h,
    r_minus_sensitivity,
    rho_curve,
    run_scenario,
    sweep,
)
from rangeshift.diagnostics import Outcome
from rangeshift.errors import InvalidSpecError


@pytest.fixture(scope="module")
def shared_cache():
    return SteadyStateCache()


class TestApplyParameter:
    def test_envelope_and_solver_fields(self, mini_scenario):
        s = apply_parameter(mini_scenario, "v", 2.0)
        assert s.envelope.speed == 2.0
        s = apply_parameter(mini_scenario, "L", 12.0)
        assert s.envelope.thickness == 12.0
        s = apply_parameter(mini_scenario, "D", 4.0)
        assert s.solver.D == 4.0
        s = apply_parameter(mini_scenario, "rho", 0.3)
        assert s.model.rho == 0.3

    def test_h_coerces_type3(self, mini_scenario):
        s = apply_parameter(mini_scenario, "h", 6.0)
        assert s.domain.kind is DomainKind.TYPE3
        assert s.domain.taper_height == 6.0

    def test_unknown_name(self, mini_scenario):
        with pytest.raises(InvalidSpecError):
            apply_parameter(mini_scenario, "gravity", 9.8)


class TestScenarioHelpers:
    def test_exit_region_and_center(self, mini_scenario):
        assert mini_scenario.corridor_exit_region() == (12.0, 16.0)
        assert mini_scenario.corridor_exit_center() == (4.0, 14.0)

    def test_type1_has_no_exit(self, mini_scenario):
        s = Scenario(
            domain=mini_scenario.domain.__class__(
                kind=DomainKind.TYPE1, width=8.0, north_extent=40.0),
            model=mini_scenario.model,
            envelope=mini_scenario.envelope,
            solver=mini_scenario.solver,
            dx=0.5,
        )
        assert s.corridor_exit_region() is None
        assert s.default_observers().sample_point is None


class TestRunScenario:
    def test_pipeline(self, mini_scenario, shared_cache):
        result = run_scenario(mini_scenario, cache=shared_cache)
        assert result.steady.status == "converged"
        assert result.trajectory.times[-1] == pytest.approx(8.0)
        assert result.trajectory.region_population is not None
        assert result.outcome.final_population == pytest.approx(
            result.trajectory.final_population)

    def test_cache_reuse(self, mini_scenario, shared_cache):
        g1 = shared_cache.grid(mini_scenario)
        g2 = shared_cache.grid(apply_parameter(mini_scenario, "v", 3.0))
        assert g1 is g2
        s1 = shared_cache.steady_state(mini_scenario)
        s2 = shared_cache.steady_state(apply_parameter(mini_scenario, "v", 3.0))
        assert s1 is s2
        # a different diffusivity gets its own relaxation
        s3 = shared_cache.steady_state(apply_parameter(mini_scenario, "D", 1.0))
        assert s3 is not s1

    def test_zero_steady_state_short_circuits(self, mini_scenario):
        s = apply_parameter(mini_scenario, "L", 0.01)
        result = run_scenario(s)
        assert "steady_state_zero" in result.flags
        assert result.outcome.extinct
        assert result.outcome.final_population == 0.0
        assert result.trajectory.times[-1] == s.solver.end_time


class TestSweep:
    def test_single_cell_matches_run_scenario(self, mini_scenario,
                                              shared_cache):
        spec = SweepSpec("v", (1.0,), "D", (2.0,), mini_scenario)
        res = sweep(spec, cache=shared_cache)
        direct = run_scenario(mini_scenario, cache=shared_cache)
        assert res.p_final[0, 0] == pytest.approx(
            direct.outcome.final_population)
        assert res.extinct[0, 0] == direct.outcome.extinct

    def test_validation(self, mini_scenario):
        with pytest.raises(InvalidSpecError):
            SweepSpec("v", (), "D", (1.0,), mini_scenario).validate()
        with pytest.raises(InvalidSpecError):
            SweepSpec("v", (2.0, 1.0), "D", (1.0,), mini_scenario).validate()
        with pytest.raises(InvalidSpecError):
            SweepSpec("v", (1.0,), "v", (1.0,), mini_scenario).validate()

    def test_execution_order_is_irrelevant(self, mini_scenario, shared_cache):
        spec = SweepSpec("v", (0.5, 1.5), "D", (1.0, 2.0), mini_scenario)
        forward = sweep(spec, cache=shared_cache)
        shuffled = sweep(spec, cache=shared_cache,
                         execution_order=[3, 0, 2, 1])
        assert np.array_equal(forward.p_final, shuffled.p_final)
        assert np.array_equal(forward.extinct, shuffled.extinct)

    def test_bad_execution_order(self, mini_scenario):
        spec = SweepSpec("v", (0.5, 1.5), "D", (1.0, 2.0), mini_scenario)
        with pytest.raises(InvalidSpecError):
            sweep(spec, execution_order=[0, 1, 2, 2])

    def test_failed_cell_is_flagged(self, mini_scenario, shared_cache,
                                    monkeypatch):
        original = experiments.run_scenario

        def flaky(scenario, cache=None, observers=None, early_stop=False):
            if scenario.solver.D == 2.0:
                raise RuntimeError("boom")
            return original(scenario, cache=cache, observers=observers,
                            early_stop=early_stop)

        monkeypatch.setattr(experiments, "run_scenario", flaky)
        spec = SweepSpec("D", (1.0, 2.0), "v", (1.0,), mini_scenario)
        res = sweep(spec, cache=shared_cache)
        assert res.provenance[1]["failed"]
        assert np.isnan(res.p_final[1, 0])
        assert not res.provenance[0]["failed"]

    def test_csv_format(self, mini_scenario, shared_cache, tmp_path):
        spec = SweepSpec("v", (0.5, 1.5), "D", (1.0, 2.0), mini_scenario)
        res = sweep(spec, cache=shared_cache)
        path = tmp_path / "sweep.csv"
        res.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "v,D,P30,outcome,flags"
        assert len(lines) == 5
        first = lines[1].split(",")
        assert float(first[0]) == 0.5 and float(first[1]) == 1.0
        assert first[3] in ("extinct", "persistent")

    def test_workers_match_sequential(self, mini_scenario, shared_cache):
        spec = SweepSpec("v", (0.5, 1.5), "D", (1.0, 2.0), mini_scenario)
        seq = sweep(spec, cache=shared_cache)
        par = sweep(spec, cache=shared_cache, workers=2)
        assert np.array_equal(seq.p_final, par.p_final)
        assert np.array_equal(seq.extinct, par.extinct)


class FakeOutcomes:
    """Deterministic stand-in: extinct below a critical taper height."""

    def __init__(self, threshold):
        self.threshold = threshold
        self.calls = []

    def __call__(self, scenario, cache=None, observers=None,
                 early_stop=False):
        h = scenario.domain.taper_height
        self.calls.append(h)
        extinct = h < self.threshold
        result = type("R", (), {})()
        result.outcome = Outcome(extinct, 0.0 if extinct else 50.0)
        result.flags = []
        return result


class TestCriticalH:
    def test_bisection_brackets_threshold(self, mini_scenario, monkeypatch):
        fake = FakeOutcomes(7.3)
        monkeypatch.setattr(experiments, "run_scenario", fake)
        h = critical_h(mini_scenario, h_max=16.0, resolution=0.5)
        assert h is not None
        assert 7.3 <= h <= 7.3 + 0.5

    def test_zero_when_base_persists(self, mini_scenario, monkeypatch):
        monkeypatch.setattr(experiments, "run_scenario", FakeOutcomes(-1.0))
        assert critical_h(mini_scenario, h_max=16.0) == 0.0

    def test_none_when_h_max_fails(self, mini_scenario, monkeypatch):
        monkeypatch.setattr(experiments, "run_scenario", FakeOutcomes(99.0))
        assert critical_h(mini_scenario, h_max=16.0) is None

    def test_full_scan(self, mini_scenario, monkeypatch):
        monkeypatch.setattr(experiments, "run_scenario", FakeOutcomes(7.3))
        h = critical_h(mini_scenario, h_max=16.0, resolution=0.5,
                       full_scan=True)
        assert h == 7.5

    def test_bad_arguments(self, mini_scenario):
        with pytest.raises(InvalidSpecError):
            critical_h(mini_scenario, h_max=-1.0)
        with pytest.raises(InvalidSpecError):
            critical_h(mini_scenario, resolution=0.0)


class TestParameterCurves:
    def test_rho_curve(self, mini_scenario, monkeypatch):
        monkeypatch.setattr(experiments, "run_scenario", FakeOutcomes(4.0))
        curve = rho_curve(mini_scenario, [0.1, 0.2], h_max=8.0,
                          resolution=0.5)
        assert [rho for rho, _ in curve] == [0.1, 0.2]
        for _, h in curve:
            assert 4.0 <= h <= 4.5

    def test_r_minus_sensitivity(self, mini_scenario, monkeypatch):
        monkeypatch.setattr(experiments, "run_scenario", FakeOutcomes(-1.0))
        curve = r_minus_sensitivity(mini_scenario, [1.5, 2.0], h_max=8.0)
        assert curve == [(1.5, 0.0), (2.0, 0.0)]

    def test_r_minus_must_exceed_r_plus(self, mini_scenario):
        with pytest.raises(InvalidSpecError):
            r_minus_sensitivity(mini_scenario, [0.5])


class TestCorridorExitReport:
    def test_compares_two_geometries(self, mini_scenario, shared_cache,
                                     tmp_path):
        tapered = apply_parameter(mini_scenario, "h", 5.0)
        report = corridor_exit_report(mini_scenario, tapered,
                                      cache=shared_cache)
        n = len(report.times)
        assert len(report.p1_narrow) == n
        assert len(report.density_tapered) == n
        assert report.threshold == pytest.approx(2.5)
        path = tmp_path / "exit.csv"
        report.to_csv(path)
        lines = path.read_text().splitlines()
        assert lines[0] == "t,P1_type2,P1_type3,uc_type2,uc_type3"
        assert len(lines) == 1 + n

    def test_mismatched_parameters_raise(self, mini_scenario):
        tapered = apply_parameter(
            apply_parameter(mini_scenario, "h", 5.0), "D", 3.0)
        with pytest.raises(InvalidSpecError):
            corridor_exit_report(mini_scenario, tapered)
