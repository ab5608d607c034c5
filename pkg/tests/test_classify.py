import pytest
from hypothesis import given, strategies as st

from conftest import LN25
from opmdeploy import (
    CheckStatus,
    DegenerateScenario,
    OutcomePolarity,
    Policy,
    PolicyMismatch,
    ScenarioParams,
    Verdict,
    assess_harm,
    check_calibration_preservation,
    check_uniform_effect_rule,
    classify_shift_subcase,
    direct_verdict,
    evaluate_scenario,
    historic_policy,
    observed_distribution,
    potential_outcomes,
    verdict_from_signs,
)
from test_scenario import scenario_st

DESIRABLE = OutcomePolarity.DESIRABLE
UNDESIRABLE = OutcomePolarity.UNDESIRABLE

# Withdrawing-effective-therapy example: everyone historically treated, the
# model predicts lower survival for the fast-progressing group (X=1), which
# is exactly the group the treatment helps. Deploying "treat the
# higher-predicted group" withdraws therapy where it works.
RADIOTHERAPY = ScenarioParams(
    p_x=0.3, pi0=1, beta0=0.5, beta_x=-1.5, beta_t=0.0, beta_xt=1.0,
    polarity=DESIRABLE,
)


class TestAssessHarm:
    def test_withdrawing_effective_treatment_harms_that_group(self):
        r = evaluate_scenario(RADIOTHERAPY)
        assert r.po.cate[0] == 0.0
        assert r.po.cate[1] > 0.0
        assert r.policy_post.assign == (1, 0)
        assert r.harm.changed_group == 1
        assert r.harm.harmful_group == (False, True)
        assert r.harm.harmful_marginal

    def test_zero_effect_changes_nothing(self):
        params = ScenarioParams(
            p_x=0.5, pi0=0, beta0=-0.5, beta_x=LN25, beta_t=0.0, beta_xt=0.0,
            polarity=DESIRABLE,
        )
        r = evaluate_scenario(params)
        assert r.harm.outcome_shift == (0.0, 0.0)
        assert not r.harm.harmful_marginal
        assert r.verdict is Verdict.NO_CHANGE

    def test_granting_effective_treatment_is_beneficial(self):
        params = ScenarioParams(
            p_x=0.5, pi0=0, beta0=-0.5, beta_x=LN25, beta_t=LN25, beta_xt=0.0,
            polarity=DESIRABLE,
        )
        r = evaluate_scenario(params)
        assert r.harm.changed_group == 1
        assert r.harm.outcome_shift[1] == pytest.approx(0.1886720038027030, abs=1e-12)
        assert not r.harm.harmful_marginal
        assert r.verdict is Verdict.BENEFICIAL

    def test_polarity_reverses_the_comparison(self):
        params = ScenarioParams(
            p_x=0.5, pi0=0, beta0=-0.5, beta_x=LN25, beta_t=LN25, beta_xt=0.0,
            polarity=UNDESIRABLE,
        )
        r = evaluate_scenario(params)
        assert r.harm.harmful_marginal
        assert r.verdict is Verdict.HARMFUL

    def test_double_change_rejected(self):
        params = ScenarioParams(
            p_x=0.5, pi0=0, beta0=-0.5, beta_x=LN25, beta_t=0.2, beta_xt=0.0,
            polarity=DESIRABLE,
        )
        po = potential_outcomes(params)
        pre = observed_distribution(po, historic_policy(0), params.p_x)
        post = observed_distribution(po, historic_policy(1), params.p_x)
        with pytest.raises(PolicyMismatch):
            assess_harm(pre, post, DESIRABLE, (historic_policy(0), historic_policy(1)))

    @given(scenario_st)
    def test_unchanged_group_never_harmed_and_marginal_matches_changed(self, params):
        try:
            r = evaluate_scenario(params)
        except DegenerateScenario:
            return
        c = r.harm.changed_group
        assert c is not None  # fitted threshold policy always differs from constant
        assert not r.harm.harmful_group[1 - c]
        assert r.harm.harmful_marginal == r.harm.harmful_group[c]


def _harm_condition_oracle(report) -> bool:
    """Independent restatement of when a deployment harms some group:
    treatment was withdrawn from a group it helped, or granted to a group
    it damages — with 'helps'/'damages' flipped for undesirable outcomes."""
    sign = report.params.polarity.favorable_sign
    for x in (0, 1):
        before = report.policy_pre.assign[x]
        after = report.policy_post.assign[x]
        effect = sign * report.po.cate[x]
        if before == 1 and after == 0 and effect > 1e-12:
            return True
        if before == 0 and after == 1 and effect < -1e-12:
            return True
    return False


class TestHarmConditionEquivalence:
    def test_matches_on_the_default_grid(self):
        from opmdeploy import default_grid, expand_and_filter

        for params in expand_and_filter(default_grid()):
            r = evaluate_scenario(params)
            assert r.harm.harmful_marginal == _harm_condition_oracle(r)

    @given(scenario_st)
    def test_matches_on_random_scenarios(self, params):
        try:
            r = evaluate_scenario(params)
        except DegenerateScenario:
            return
        assert r.harm.harmful_marginal == _harm_condition_oracle(r)


class TestVerdictFromSigns:
    # The eight (polarity, historic policy, AUC sign) cells.
    CASES = [
        (UNDESIRABLE, 0, +1, Verdict.HARMFUL),
        (UNDESIRABLE, 0, -1, Verdict.BENEFICIAL),
        (UNDESIRABLE, 1, +1, Verdict.BENEFICIAL),
        (UNDESIRABLE, 1, -1, Verdict.HARMFUL),
        (DESIRABLE, 0, +1, Verdict.BENEFICIAL),
        (DESIRABLE, 0, -1, Verdict.HARMFUL),
        (DESIRABLE, 1, +1, Verdict.HARMFUL),
        (DESIRABLE, 1, -1, Verdict.BENEFICIAL),
    ]

    @pytest.mark.parametrize("polarity,pi0,sign,expected", CASES)
    def test_all_rows(self, polarity, pi0, sign, expected):
        assert verdict_from_signs(polarity, pi0, sign) is expected

    @pytest.mark.parametrize("polarity", [DESIRABLE, UNDESIRABLE])
    @pytest.mark.parametrize("pi0", [0, 1])
    def test_zero_band_is_no_change(self, polarity, pi0):
        assert verdict_from_signs(polarity, pi0, 0) is Verdict.NO_CHANGE

    @given(scenario_st)
    def test_lookup_matches_direct_assessment(self, params):
        try:
            r = evaluate_scenario(params)
        except DegenerateScenario:
            return
        assert r.sign_verdict is r.verdict
        assert direct_verdict(r.harm, params.polarity) is r.verdict


class TestUniformEffectRule:
    def test_both_effects_up_passes(self):
        params = ScenarioParams(
            p_x=0.5, pi0=0, beta0=-0.5, beta_x=LN25, beta_t=LN25, beta_xt=0.0,
            polarity=DESIRABLE,
        )
        r = evaluate_scenario(params)
        assert r.self_fulfilling
        assert check_uniform_effect_rule(r.po, r).status is CheckStatus.PASS

    def test_both_effects_down_passes(self):
        params = ScenarioParams(
            p_x=0.5, pi0=0, beta0=-0.5, beta_x=LN25, beta_t=-LN25, beta_xt=0.0,
            polarity=DESIRABLE,
        )
        r = evaluate_scenario(params)
        assert not r.self_fulfilling
        assert check_uniform_effect_rule(r.po, r).status is CheckStatus.PASS

    def test_mixed_signs_not_applicable(self):
        params = ScenarioParams(
            p_x=0.5, pi0=0, beta0=-0.5, beta_x=LN25, beta_t=-0.4, beta_xt=0.9,
            polarity=DESIRABLE,
        )
        r = evaluate_scenario(params)
        assert check_uniform_effect_rule(r.po, r).status is CheckStatus.NOT_APPLICABLE

    @given(scenario_st)
    def test_never_fails(self, params):
        try:
            r = evaluate_scenario(params)
        except DegenerateScenario:
            return
        assert check_uniform_effect_rule(r.po, r).status is not CheckStatus.FAIL


class TestShiftSubcase:
    def test_outcome_up_under_treat_no_one(self):
        params = ScenarioParams(
            p_x=0.5, pi0=0, beta0=-0.5, beta_x=LN25, beta_t=LN25, beta_xt=0.0,
            polarity=DESIRABLE,
        )
        row = classify_shift_subcase(evaluate_scenario(params))
        assert (row.pi0, row.direction) == (0, ">")
        assert row.expected_self_fulfilling and row.consistent

    def test_outcome_down_under_treat_everyone(self):
        # removing a beneficial treatment: shift down, historically treated
        row = classify_shift_subcase(evaluate_scenario(RADIOTHERAPY))
        assert (row.pi0, row.direction) == (1, "<")
        assert row.expected_self_fulfilling and row.consistent

    def test_no_outcome_change_trivially_self_fulfilling(self):
        params = ScenarioParams(
            p_x=0.5, pi0=0, beta0=-0.5, beta_x=LN25, beta_t=0.0, beta_xt=0.0,
            polarity=DESIRABLE,
        )
        row = classify_shift_subcase(evaluate_scenario(params))
        assert row.direction == "="
        assert row.expected_self_fulfilling and row.consistent

    @given(scenario_st)
    def test_every_scenario_lands_in_a_consistent_subcase(self, params):
        try:
            r = evaluate_scenario(params)
        except DegenerateScenario:
            return
        assert classify_shift_subcase(r).consistent


class TestCalibrationPreservation:
    def test_zero_effect_calibrated_and_condition_holds(self):
        params = ScenarioParams(
            p_x=0.5, pi0=0, beta0=-0.5, beta_x=LN25, beta_t=0.0, beta_xt=0.0,
            polarity=DESIRABLE,
        )
        r = evaluate_scenario(params)
        assert r.calibration_post.is_calibrated
        assert check_calibration_preservation(r).status is CheckStatus.PASS

    def test_effect_at_changed_group_breaks_calibration(self):
        params = ScenarioParams(
            p_x=0.5, pi0=0, beta0=-0.5, beta_x=LN25, beta_t=LN25, beta_xt=0.0,
            polarity=DESIRABLE,
        )
        r = evaluate_scenario(params)
        assert not r.calibration_post.is_calibrated
        assert check_calibration_preservation(r).status is CheckStatus.PASS

    def test_effect_only_at_unchanged_group_keeps_calibration(self):
        # beta_t + beta_xt = 0 cancels the treated group's effect exactly;
        # the untreated group's nonzero effect never enters the deployed
        # distribution, so the predictor stays calibrated.
        params = ScenarioParams(
            p_x=0.5, pi0=0, beta0=-0.5, beta_x=1.0, beta_t=0.7, beta_xt=-0.7,
            polarity=DESIRABLE,
        )
        r = evaluate_scenario(params)
        assert r.harm.changed_group == 1
        assert r.po.cate[1] == 0.0
        assert r.po.cate[0] != 0.0
        assert r.calibration_post.is_calibrated
        assert check_calibration_preservation(r).status is CheckStatus.PASS

    @given(scenario_st)
    def test_equivalence_never_fails(self, params):
        try:
            r = evaluate_scenario(params)
        except DegenerateScenario:
            return
        assert check_calibration_preservation(r).status is CheckStatus.PASS
