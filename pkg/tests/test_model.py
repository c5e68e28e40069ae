import math

import numpy as np
import pytest

from rangeshift import (
    EnvelopeMode,
    EnvelopeSpec,
    GrowthModel,
    GrowthVariant,
    analytic_spreading_speed,
    in_envelope,
    per_capita_growth,
    reaction_rate,
)
from rangeshift.errors import InvalidSpecError, NonPositiveSpeedError

LOGISTIC = GrowthModel(variant=GrowthVariant.LOGISTIC, r_plus=1.0,
                       r_minus=2.0, K=10.0)
ALLEE = GrowthModel(variant=GrowthVariant.ALLEE, r_plus=1.0, r_minus=2.0,
                    K=10.0, rho=0.25)


class TestEnvelope:
    def test_shifting_inside(self):
        env = EnvelopeSpec(thickness=30.0, speed=2.5)
        assert in_envelope(env, 4.0, 20.0)       # envelope is [10, 40]

    def test_shifting_behind(self):
        env = EnvelopeSpec(thickness=30.0, speed=2.5)
        assert not in_envelope(env, 4.0, 5.0)

    def test_expanding_keeps_tail(self):
        env = EnvelopeSpec(thickness=30.0, speed=2.5,
                           mode=EnvelopeMode.EXPANDING)
        assert in_envelope(env, 4.0, 5.0)        # envelope is [0, 40]

    def test_closed_endpoints(self):
        env = EnvelopeSpec(thickness=30.0, speed=2.5)
        assert in_envelope(env, 4.0, 10.0)
        assert in_envelope(env, 4.0, 40.0)
        assert not in_envelope(env, 4.0, 40.0001)

    def test_validation(self):
        with pytest.raises(InvalidSpecError):
            EnvelopeSpec(thickness=0.0).validate()
        with pytest.raises(InvalidSpecError):
            EnvelopeSpec(speed=-1.0).validate()


class TestGrowth:
    def test_logistic_root_at_K(self):
        assert per_capita_growth(LOGISTIC, True, 10.0) == 0.0

    def test_logistic_outside_at_zero(self):
        assert per_capita_growth(LOGISTIC, False, 0.0) == pytest.approx(-1.0)

    def test_allee_roots(self):
        assert per_capita_growth(ALLEE, True, 2.5) == pytest.approx(0.0)
        assert per_capita_growth(ALLEE, True, 10.0) == pytest.approx(0.0)

    def test_allee_maximum_is_r_plus(self):
        # independent check: scan a fine density grid for the maximum
        u = np.linspace(0.0, ALLEE.K, 200001)
        g = per_capita_growth(ALLEE, True, u)
        assert g.max() == pytest.approx(ALLEE.r_plus, rel=1e-8)
        u_star = u[np.argmax(g)]
        assert u_star == pytest.approx(ALLEE.K * (1 + ALLEE.rho) / 2, abs=1e-3)
        exact = per_capita_growth(ALLEE, True, ALLEE.K * (1 + ALLEE.rho) / 2)
        assert exact == pytest.approx(ALLEE.r_plus, rel=1e-12)

    def test_allee_sign_structure(self):
        u = np.linspace(1e-6, ALLEE.K - 1e-6, 5000)
        g = per_capita_growth(ALLEE, True, u)
        thr = ALLEE.allee_threshold
        assert (g[u < thr - 1e-9] < 0).all()
        assert (g[u > thr + 1e-9] > 0).all()

    @pytest.mark.parametrize("model", [LOGISTIC, ALLEE])
    def test_outside_is_inside_minus_r_minus(self, model):
        u = np.linspace(0.0, model.K, 101)
        inside = per_capita_growth(model, True, u)
        outside = per_capita_growth(model, False, u)
        assert np.allclose(outside, inside - model.r_minus, atol=1e-14)

    def test_logistic_above_K_declines(self):
        assert per_capita_growth(LOGISTIC, True, 15.0) < 0

    def test_validation(self):
        with pytest.raises(InvalidSpecError):
            GrowthModel(r_plus=1.0, r_minus=0.5).validate()
        with pytest.raises(InvalidSpecError):
            GrowthModel(variant=GrowthVariant.ALLEE, rho=1.0).validate()
        with pytest.raises(InvalidSpecError):
            GrowthModel(K=0.0).validate()


class TestReactionRate:
    def test_zero_density(self):
        assert reaction_rate(ALLEE, True, 0.0) == 0.0
        assert reaction_rate(LOGISTIC, False, 0.0) == 0.0

    def test_logistic_half_K(self):
        assert reaction_rate(LOGISTIC, True, 5.0) == pytest.approx(2.5)

    def test_allee_threshold_root(self):
        assert reaction_rate(ALLEE, True, 2.5) == pytest.approx(0.0)


class TestSpreadingSpeed:
    def test_logistic(self):
        c = analytic_spreading_speed(LOGISTIC, 10.0)
        assert c == pytest.approx(2.0 * math.sqrt(10.0))
        assert c == pytest.approx(6.3246, abs=1e-4)

    def test_allee(self):
        c = analytic_spreading_speed(ALLEE, 10.0)
        assert c == pytest.approx(
            2.0 * math.sqrt(10.0) * math.sqrt(2.0) * 0.25 / 0.75)
        assert c == pytest.approx(2.9814, abs=1e-4)

    def test_weak_allee_ratio(self):
        weak = GrowthModel(variant=GrowthVariant.ALLEE, rho=0.0)
        ratio = (analytic_spreading_speed(LOGISTIC, 7.0)
                 / analytic_spreading_speed(weak, 7.0))
        assert ratio == pytest.approx(math.sqrt(2.0))

    def test_strong_threshold_raises(self):
        bad = GrowthModel(variant=GrowthVariant.ALLEE, rho=0.5)
        with pytest.raises(NonPositiveSpeedError):
            analytic_spreading_speed(bad, 10.0)

    def test_monotone_decreasing_in_rho(self):
        speeds = [
            analytic_spreading_speed(
                GrowthModel(variant=GrowthVariant.ALLEE, rho=r), 10.0)
            for r in np.linspace(0.0, 0.49, 25)
        ]
        assert all(b < a for a, b in zip(speeds, speeds[1:]))
        assert all(c < analytic_spreading_speed(LOGISTIC, 10.0)
                   for c in speeds)

    def test_bad_D(self):
        with pytest.raises(InvalidSpecError):
            analytic_spreading_speed(LOGISTIC, 0.0)
