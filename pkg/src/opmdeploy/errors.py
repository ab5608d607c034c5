"""Exception types shared across the package.

The CLI maps these onto its exit-code contract: validation problems
exit 2, degenerate scenarios exit 3, I/O failures exit 4.
"""


class OpmDeployError(Exception):
    pass


class ConfigError(OpmDeployError):
    """A parameter or config file violates its stated invariants."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class DegenerateScenario(OpmDeployError):
    """The historic conditionals coincide: f(0)=f(1), so no nonconstant
    threshold policy exists and the scenario carries no usable model."""


class ConstantPolicy(OpmDeployError):
    """The chosen threshold puts both groups on the same side, producing a
    constant policy (only reachable with an explicit threshold override)."""


class DegenerateOutcome(OpmDeployError):
    """p(Y=1) is 0 or 1, so sensitivity/specificity are undefined."""


class PolicyMismatch(OpmDeployError):
    """More than one group's assignment changed between the two policies,
    which the constant-historic-policy setting rules out."""


class InsufficientCases(OpmDeployError):
    """A Monte Carlo sample is missing one outcome class entirely; rank
    metrics are undefined. Signaled, not fatal: callers report it."""
