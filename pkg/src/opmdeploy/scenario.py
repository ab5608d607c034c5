"""Worlds, policies, and predictors for the binary-covariate setting.

A scenario is a joint distribution over a binary feature X, a binary
treatment T, and a binary outcome Y, parameterized on the log-odds scale:

    log-odds p(Y=1 | T=t, X=x) = beta0 + beta_x*x + beta_t*t + beta_xt*x*t

The historic treatment policy is constant and deterministic (treat everyone
or treat no one). An outcome prediction model (OPM) fitted on data from the
historic policy predicts f(x) = p(Y=1 | X=x) under that policy; deploying it
as a threshold rule ("treat exactly those with predicted outcome above
lambda") induces a new observable distribution. Everything downstream
(discrimination, calibration, harm) is computed from these closed forms.

All values are immutable after construction; every operation is a pure
function of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import ConfigError, DegenerateScenario, ConstantPolicy

# Equality band for structurally-zero quantities (fitted values, CATEs,
# AUC shifts). All closed-form ties in this setting are algebraic, so any
# band below 1e-9 separates true zeros from real effects; 1e-12 also
# absorbs float rounding when a tie is produced by non-associative sums.
EPS_EQ = 1e-12


def logistic(eta: float) -> float:
    """Standard logistic function, stable for large |eta|."""
    if eta >= 0:
        return 1.0 / (1.0 + math.exp(-eta))
    z = math.exp(eta)
    return z / (1.0 + z)


def sign_with_band(value: float, eps: float = EPS_EQ) -> int:
    """Three-valued sign with a +/-eps zero band."""
    if value > eps:
        return 1
    if value < -eps:
        return -1
    return 0


class OutcomePolarity(Enum):
    """Whether Y=1 is the preferable outcome (e.g. survival) or the
    undesirable one (e.g. a heart attack). Polarity flips the direction of
    every harm comparison and nothing else."""

    DESIRABLE = "desirable"
    UNDESIRABLE = "undesirable"

    @property
    def favorable_sign(self) -> float:
        """+1 if a higher p(Y=1) is good, -1 if it is bad."""
        return 1.0 if self is OutcomePolarity.DESIRABLE else -1.0


def parse_polarity(value) -> OutcomePolarity:
    if isinstance(value, OutcomePolarity):
        return value
    try:
        return OutcomePolarity(str(value).strip().lower())
    except ValueError:
        raise ConfigError(
            [f"polarity: expected 'desirable' or 'undesirable', got {value!r}"]
        ) from None


@dataclass(frozen=True)
class ScenarioParams:
    """Full parameterization of a pre/post-deployment world.

    p_x is the prevalence of X=1; pi0 the constant historic assignment
    (0 = treat no one, 1 = treat everyone); the betas are log-odds
    coefficients of the outcome model.
    """

    p_x: float
    pi0: int
    beta0: float
    beta_x: float
    beta_t: float
    beta_xt: float
    polarity: OutcomePolarity

    def __post_init__(self):
        problems = []
        for name in ("p_x", "beta0", "beta_x", "beta_t", "beta_xt"):
            v = getattr(self, name)
            if isinstance(v, (int, float)) and not isinstance(v, bool):
                object.__setattr__(self, name, float(v))
            else:
                problems.append(f"{name}: must be a real number, got {v!r}")
        if not problems and not 0.0 < self.p_x < 1.0:
            problems.append(f"p_x: must lie strictly in (0,1), got {self.p_x!r}")
        if not problems and not all(
            math.isfinite(getattr(self, n))
            for n in ("beta0", "beta_x", "beta_t", "beta_xt")
        ):
            problems.append("betas must all be finite")
        if self.pi0 in (0, 1) and not isinstance(self.pi0, bool):
            object.__setattr__(self, "pi0", int(self.pi0))
        else:
            problems.append(f"pi0: must be 0 or 1, got {self.pi0!r}")
        if not isinstance(self.polarity, OutcomePolarity):
            problems.append(f"polarity: got {self.polarity!r}")
        if problems:
            raise ConfigError(problems)


@dataclass(frozen=True)
class PotentialOutcomes:
    """The four outcome probabilities q[t][x] = p(Y_t=1 | X=x)."""

    q: tuple[tuple[float, float], tuple[float, float]]

    @property
    def cate(self) -> tuple[float, float]:
        """Per-group treatment effect q[1][x] - q[0][x] on the probability scale."""
        return (self.q[1][0] - self.q[0][0], self.q[1][1] - self.q[0][1])


@dataclass(frozen=True)
class Policy:
    """Deterministic treatment assignment per group."""

    assign: tuple[int, int]

    @property
    def is_constant(self) -> bool:
        return self.assign[0] == self.assign[1]


def historic_policy(pi0: int) -> Policy:
    return Policy(assign=(pi0, pi0))


@dataclass(frozen=True)
class Opm:
    """A fitted predictor: one predicted probability per group, plus the
    decision threshold used to derive a policy from it."""

    f: tuple[float, float]
    lam: float


@dataclass(frozen=True)
class ObservedDistribution:
    """The observable (X, Y) distribution induced by a policy.

    mu[x] = p(Y=1|X=x) under the policy, p_y1 the outcome marginal, and
    joint[x][y] the full four-cell joint.
    """

    mu: tuple[float, float]
    p_y1: float
    joint: tuple[tuple[float, float], tuple[float, float]]
    label: str


def potential_outcomes(params: ScenarioParams) -> PotentialOutcomes:
    """Evaluate the log-odds model at all four (t, x) cells."""
    q = tuple(
        tuple(
            logistic(
                params.beta0
                + params.beta_x * x
                + params.beta_t * t
                + params.beta_xt * x * t
            )
            for x in (0, 1)
        )
        for t in (0, 1)
    )
    return PotentialOutcomes(q=q)


def observed_distribution(
    po: PotentialOutcomes, policy: Policy, p_x: float, label: str = ""
) -> ObservedDistribution:
    """Distribution of (X, Y) when treatment is assigned by `policy`.

    mu[x] is the convex combination of the two potential outcomes with the
    (deterministic, 0/1) assignment weight, so it picks q[assign[x]][x]
    exactly; p_x is unchanged by deployment.
    """
    a0, a1 = policy.assign
    mu = (
        (1 - a0) * po.q[0][0] + a0 * po.q[1][0],
        (1 - a1) * po.q[0][1] + a1 * po.q[1][1],
    )
    p_y1 = (1.0 - p_x) * mu[0] + p_x * mu[1]
    joint = (
        ((1.0 - p_x) * (1.0 - mu[0]), (1.0 - p_x) * mu[0]),
        (p_x * (1.0 - mu[1]), p_x * mu[1]),
    )
    return ObservedDistribution(mu=mu, p_y1=p_y1, joint=joint, label=label)


def fit_opm(historic: ObservedDistribution, lam: float | None = None) -> Opm:
    """Fit the predictor that perfectly matches the historic conditionals.

    f(x) = mu_historic(x). The default threshold is the midpoint of the two
    fitted values, which yields a nonconstant policy whenever f(0) != f(1);
    pass `lam` to override.

    Raises DegenerateScenario when the two conditionals coincide: a constant
    predictor admits no nonconstant threshold policy.
    """
    f = (historic.mu[0], historic.mu[1])
    if abs(f[0] - f[1]) <= EPS_EQ:
        raise DegenerateScenario(
            f"historic conditionals coincide: f(0)={f[0]!r}, f(1)={f[1]!r}"
        )
    if lam is None:
        lam = 0.5 * (f[0] + f[1])
    return Opm(f=f, lam=float(lam))


def derive_policy(opm: Opm) -> Policy:
    """Threshold rule: treat group x iff f(x) > lambda.

    The rule is polarity-independent (it reads "treat high predicted risk"
    or "treat high predicted survival" depending on what Y=1 means).
    Raises ConstantPolicy when both groups land on the same side.
    """
    assign = (int(opm.f[0] > opm.lam), int(opm.f[1] > opm.lam))
    policy = Policy(assign=assign)
    if policy.is_constant:
        raise ConstantPolicy(
            f"threshold {opm.lam!r} puts both predictions {opm.f!r} on one side"
        )
    return policy
