import pytest
from hypothesis import given, strategies as st

from conftest import LN25, exact_rank_auc
from opmdeploy import (
    DegenerateOutcome,
    DegenerateScenario,
    ObservedDistribution,
    Opm,
    OutcomePolarity,
    ScenarioParams,
    auc_delta,
    auc_shift_sign,
    calibration,
    discrimination,
    evaluate_scenario,
    fit_opm,
    historic_policy,
    is_self_fulfilling,
    observed_distribution,
    potential_outcomes,
)
from test_scenario import scenario_st

# Frozen from the exact four-cell enumeration (p_x=0.5, beta0=-0.5,
# beta_x=ln 2.5, historic policy: treat no one).
PRE_SENS = 0.6148078683687315
PRE_SPEC = 0.6103356145244446
PRE_AUC = 0.6125717414465881
POST_AUC_UP = 0.7129310367968095  # beta_t = ln 2.5 deployed on group 1
DELTA_UP = 0.1003592953502214
DELTA_DOWN = -0.1125717414465881  # beta_t = ln(1/2.5): post AUC exactly 0.5
CAL_GAP_UP = 0.1886720038027030  # |cate(1)| for beta_t = ln 2.5


def _example(beta_t: float):
    params = ScenarioParams(
        p_x=0.5, pi0=0, beta0=-0.5, beta_x=LN25, beta_t=beta_t, beta_xt=0.0,
        polarity=OutcomePolarity.DESIRABLE,
    )
    return evaluate_scenario(params)


class TestDiscrimination:
    def test_historic_values(self):
        r = _example(LN25)
        d = r.discrimination_pre
        assert d.sens == pytest.approx(PRE_SENS, abs=1e-12)
        assert d.spec == pytest.approx(PRE_SPEC, abs=1e-12)
        assert d.auc == pytest.approx(PRE_AUC, abs=1e-12)
        assert d.operating_threshold == max(r.opm.f)

    def test_post_deployment_value(self):
        r = _example(LN25)
        assert r.discrimination_post.auc == pytest.approx(POST_AUC_UP, abs=1e-12)

    def test_auc_is_exact_half_sum(self):
        d = _example(0.4).discrimination_post
        assert d.auc == 0.5 * (d.sens + d.spec)

    def test_post_auc_exactly_half_when_group_means_collapse(self):
        # beta_t = -ln 2.5 cancels beta_x's lift for the treated group, so
        # post-deployment X carries no information about Y.
        r = _example(-LN25)
        assert r.post.mu[1] == pytest.approx(r.post.mu[0], abs=1e-15)
        assert r.discrimination_post.auc == pytest.approx(0.5, abs=1e-12)

    def test_constant_predictor_rejected(self):
        dist = ObservedDistribution(
            mu=(0.4, 0.6), p_y1=0.5, joint=((0.3, 0.2), (0.2, 0.3)), label="t"
        )
        with pytest.raises(DegenerateScenario):
            discrimination(Opm(f=(0.4, 0.4), lam=0.4), dist, 0.5)

    def test_degenerate_outcome_rejected(self):
        dist = ObservedDistribution(
            mu=(1.0, 1.0), p_y1=1.0, joint=((0.0, 0.5), (0.0, 0.5)), label="t"
        )
        with pytest.raises(DegenerateOutcome):
            discrimination(Opm(f=(0.4, 0.6), lam=0.5), dist, 0.5)

    @given(scenario_st)
    def test_rank_oracle_equivalence(self, params):
        po = potential_outcomes(params)
        pre = observed_distribution(po, historic_policy(params.pi0), params.p_x)
        try:
            opm = fit_opm(pre)
        except DegenerateScenario:
            return
        d = discrimination(opm, pre, params.p_x)
        assert d.auc == pytest.approx(
            exact_rank_auc(params.p_x, pre.mu, opm.f), abs=1e-12
        )

    @given(scenario_st)
    def test_three_point_trapezoid_area(self, params):
        po = potential_outcomes(params)
        pre = observed_distribution(po, historic_policy(params.pi0), params.p_x)
        try:
            opm = fit_opm(pre)
        except DegenerateScenario:
            return
        d = discrimination(opm, pre, params.p_x)
        # trapezoids under (0,0) -> (1-spec, sens) -> (1,1)
        x1, y1 = 1.0 - d.spec, d.sens
        area = 0.5 * x1 * y1 + 0.5 * (1.0 - x1) * (y1 + 1.0)
        assert area == pytest.approx(d.auc, abs=1e-12)

    @given(scenario_st)
    def test_fitted_predictor_never_below_chance_on_historic(self, params):
        po = potential_outcomes(params)
        pre = observed_distribution(po, historic_policy(params.pi0), params.p_x)
        try:
            opm = fit_opm(pre)
        except DegenerateScenario:
            return
        assert discrimination(opm, pre, params.p_x).auc >= 0.5 - 1e-12


class TestAucDelta:
    def test_no_distribution_change_gives_zero(self):
        r = _example(0.0)
        assert r.auc_delta == 0.0
        assert auc_shift_sign(r.auc_delta) == 0

    def test_positive_and_negative_shifts(self):
        assert _example(LN25).auc_delta == pytest.approx(DELTA_UP, abs=1e-12)
        assert _example(-LN25).auc_delta == pytest.approx(DELTA_DOWN, abs=1e-12)

    def test_delta_is_post_minus_pre(self):
        r = _example(0.3)
        assert auc_delta(r.discrimination_pre, r.discrimination_post) == (
            r.discrimination_post.auc - r.discrimination_pre.auc
        )


class TestSelfFulfilling:
    def test_weak_inequality(self):
        assert is_self_fulfilling(DELTA_UP)
        assert is_self_fulfilling(0.0)
        assert not is_self_fulfilling(DELTA_DOWN)

    def test_sign_band_separates_no_change(self):
        assert auc_shift_sign(1e-15) == 0
        assert auc_shift_sign(1e-9) == 1
        assert auc_shift_sign(-1e-9) == -1


class TestCalibration:
    def test_fitted_opm_calibrated_on_historic(self):
        r = _example(LN25)
        assert r.calibration_pre.max_gap == 0.0
        assert r.calibration_pre.is_calibrated

    def test_zero_effect_stays_calibrated_post(self):
        r = _example(0.0)
        assert r.calibration_post.is_calibrated

    def test_effect_at_treated_group_breaks_calibration(self):
        r = _example(LN25)
        assert not r.calibration_post.is_calibrated
        assert r.calibration_post.max_gap == pytest.approx(CAL_GAP_UP, abs=1e-12)
        assert r.calibration_post.max_gap == pytest.approx(
            abs(r.po.cate[1]), abs=1e-15
        )

    def test_levels_carry_masses_and_conditional_means(self):
        r = _example(LN25)
        levels = r.calibration_post.levels
        assert [l.mass for l in levels] == [0.5, 0.5]
        assert levels[0].conditional_mean == r.post.mu[0]
        assert levels[1].conditional_mean == r.post.mu[1]

    def test_constant_predictor_single_level(self):
        dist = ObservedDistribution(
            mu=(0.3, 0.5), p_y1=0.4, joint=((0.35, 0.15), (0.25, 0.25)), label="t"
        )
        report = calibration(Opm(f=(0.4, 0.4), lam=0.4), dist, 0.5)
        assert len(report.levels) == 1
        assert report.levels[0].conditional_mean == dist.p_y1
        assert report.levels[0].mass == 1.0

    @given(scenario_st)
    def test_calibrated_iff_distribution_matches_fit(self, params):
        po = potential_outcomes(params)
        pre = observed_distribution(po, historic_policy(params.pi0), params.p_x)
        try:
            r = evaluate_scenario(params)
        except DegenerateScenario:
            return
        matches = all(
            abs(r.post.mu[x] - r.opm.f[x]) <= 1e-12 for x in (0, 1)
        )
        assert r.calibration_post.is_calibrated == matches
        assert pre.mu == r.opm.f
