"""Harm classification, the verdict lookup, and consistency checkers.

Sign conventions live in one place: `favorable_shift` applies the outcome
polarity to a raw probability shift, so "the inequality signs reverse" for
undesirable outcomes is implemented exactly once and shared by the harm
assessment and every checker.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING

from .errors import PolicyMismatch
from .metrics import EPS_CAL
from .scenario import (
    ObservedDistribution,
    OutcomePolarity,
    Policy,
    PotentialOutcomes,
    sign_with_band,
)

if TYPE_CHECKING:  # pragma: no cover
    from .report import DeploymentReport


class Verdict(Enum):
    HARMFUL = "harmful"
    BENEFICIAL = "beneficial"
    NO_CHANGE = "no_change"


class CheckStatus(Enum):
    PASS = "pass"
    FAIL = "fail"
    NOT_APPLICABLE = "not_applicable"


@dataclass(frozen=True)
class CheckResult:
    status: CheckStatus
    detail: str = ""


@dataclass(frozen=True)
class HarmAssessment:
    """Per-group and marginal harm of a policy change.

    outcome_shift[x] = mu_post(x) - mu_pre(x). Exactly one group's
    assignment changes in this setting (or none, when the policies agree),
    so marginal harm coincides with harm for the changed group.
    """

    outcome_shift: tuple[float, float]
    changed_group: int | None
    harmful_group: tuple[bool, bool]
    harmful_marginal: bool


def favorable_shift(shift: float, polarity: OutcomePolarity) -> float:
    """Outcome shift signed so that positive always means improvement."""
    return polarity.favorable_sign * shift


def assess_harm(
    pre: ObservedDistribution,
    post: ObservedDistribution,
    polarity: OutcomePolarity,
    policies: tuple[Policy, Policy],
) -> HarmAssessment:
    """Classify a deployment's effect on each group and on average.

    A group is harmed iff its polarity-signed outcome shift is strictly
    negative. Raises PolicyMismatch when both groups' assignments changed,
    which the constant-historic-policy setting rules out.
    """
    pol_pre, pol_post = policies
    changed = [x for x in (0, 1) if pol_pre.assign[x] != pol_post.assign[x]]
    if len(changed) > 1:
        raise PolicyMismatch(
            f"assignments changed for both groups: {pol_pre.assign} -> {pol_post.assign}"
        )
    shift = (post.mu[0] - pre.mu[0], post.mu[1] - pre.mu[1])
    harmful = tuple(
        sign_with_band(favorable_shift(shift[x], polarity)) < 0 for x in (0, 1)
    )
    return HarmAssessment(
        outcome_shift=shift,
        changed_group=changed[0] if changed else None,
        harmful_group=harmful,
        harmful_marginal=any(harmful),
    )


def direct_verdict(harm: HarmAssessment, polarity: OutcomePolarity) -> Verdict:
    """Verdict read straight off the changed group's outcome shift."""
    if harm.changed_group is None:
        return Verdict.NO_CHANGE
    signed = sign_with_band(
        favorable_shift(harm.outcome_shift[harm.changed_group], polarity)
    )
    if signed == 0:
        return Verdict.NO_CHANGE
    return Verdict.HARMFUL if signed < 0 else Verdict.BENEFICIAL


# Verdict by (polarity, historic assignment, sign of the AUC change). The
# mechanism: a fitted OPM treats the higher-predicted group, so under
# "treat no one" the changed group is the one the model can see improving
# (AUC up <=> outcome up), while under "treat everyone" it is the
# lower-predicted group (AUC up <=> outcome down).
_VERDICT_BY_SIGNS = {
    (OutcomePolarity.UNDESIRABLE, 0, +1): Verdict.HARMFUL,
    (OutcomePolarity.UNDESIRABLE, 0, -1): Verdict.BENEFICIAL,
    (OutcomePolarity.UNDESIRABLE, 1, +1): Verdict.BENEFICIAL,
    (OutcomePolarity.UNDESIRABLE, 1, -1): Verdict.HARMFUL,
    (OutcomePolarity.DESIRABLE, 0, +1): Verdict.BENEFICIAL,
    (OutcomePolarity.DESIRABLE, 0, -1): Verdict.HARMFUL,
    (OutcomePolarity.DESIRABLE, 1, +1): Verdict.HARMFUL,
    (OutcomePolarity.DESIRABLE, 1, -1): Verdict.BENEFICIAL,
}


def verdict_from_signs(
    polarity: OutcomePolarity, pi0: int, auc_sign: int
) -> Verdict:
    """Deployment verdict from post-deployment observables alone: what Y=1
    means, what the historic policy was, and whether AUC rose or fell."""
    if auc_sign == 0:
        return Verdict.NO_CHANGE
    return _VERDICT_BY_SIGNS[(polarity, pi0, auc_sign)]


def check_uniform_effect_rule(
    po: PotentialOutcomes, report: "DeploymentReport"
) -> CheckResult:
    """Sufficient-condition check: treatment effects that never point down
    force a self-fulfilling deployment, effects that always point down
    (strictly) forbid one. Mixed signs are out of the rule's scope."""
    signs = [sign_with_band(c) for c in po.cate]
    if all(s >= 0 for s in signs):
        expected = True
    elif all(s < 0 for s in signs):
        expected = False
    else:
        return CheckResult(
            CheckStatus.NOT_APPLICABLE, f"mixed effect signs {signs}"
        )
    if report.self_fulfilling == expected:
        return CheckResult(
            CheckStatus.PASS,
            f"effect signs {signs} => self_fulfilling={expected}",
        )
    return CheckResult(
        CheckStatus.FAIL,
        f"effect signs {signs} expected self_fulfilling={expected}, "
        f"got {report.self_fulfilling}",
    )


@dataclass(frozen=True)
class SubcaseRow:
    """One row of the exhaustive policy-change case split: which group's
    assignment changed, the direction of its outcome shift, and whether that
    subcase is self-fulfilling."""

    changed_group: int | None
    pi0: int
    direction: str  # '=', '<', '>'
    expected_self_fulfilling: bool
    observed_self_fulfilling: bool

    @property
    def consistent(self) -> bool:
        return self.expected_self_fulfilling == self.observed_self_fulfilling


def classify_shift_subcase(report: "DeploymentReport") -> SubcaseRow:
    """Place a scenario in the case split over (changed group, shift
    direction) and compare the subcase's known self-fulfilling value with
    the computed flag.

    With the historic policy constant, "treat no one" always hands
    treatment to the higher-predicted group (shift up => AUC up) and "treat
    everyone" always withdraws it from the lower-predicted group (shift
    down => AUC up); the '=' subcases change nothing and are trivially
    self-fulfilling.
    """
    harm = report.harm
    pi0 = report.params.pi0
    if harm.changed_group is None:
        direction, expected = "=", True
    else:
        s = sign_with_band(harm.outcome_shift[harm.changed_group])
        if s == 0:
            direction, expected = "=", True
        elif s > 0:
            direction, expected = ">", pi0 == 0
        else:
            direction, expected = "<", pi0 == 1
    return SubcaseRow(
        changed_group=harm.changed_group,
        pi0=pi0,
        direction=direction,
        expected_self_fulfilling=expected,
        observed_self_fulfilling=report.self_fulfilling,
    )


def check_calibration_preservation(report: "DeploymentReport") -> CheckResult:
    """Equivalence check: a predictor fitted on historic data stays
    calibrated after deployment iff, for every group, the assignment did
    not change or the group's treatment effect is zero (within EPS_CAL) —
    i.e. iff the deployment changed nothing consequential."""
    policies = (report.policy_pre, report.policy_post)
    condition = all(
        policies[0].assign[x] == policies[1].assign[x]
        or abs(report.po.cate[x]) <= EPS_CAL
        for x in (0, 1)
    )
    calibrated_both = (
        report.calibration_pre.is_calibrated and report.calibration_post.is_calibrated
    )
    if calibrated_both == condition:
        return CheckResult(
            CheckStatus.PASS,
            f"calibrated_pre_and_post={calibrated_both} <=> inconsequential={condition}",
        )
    return CheckResult(
        CheckStatus.FAIL,
        f"calibrated_pre_and_post={calibrated_both} but inconsequential={condition}",
    )
