"""Exception hierarchy shared by the solver modules."""


class SfwocError(Exception):
    """Base class for every error raised by this package."""


class InstanceMismatchError(SfwocError, ValueError):
    """Shapes or counts disagree with the instance (agent count, block count, horizon)."""


class InfeasibleTrajectoryError(SfwocError, ValueError):
    """A trajectory violates its agent's initial set, control sets or dynamics."""

    def __init__(self, agent, t, reason):
        self.agent = agent
        self.t = t
        self.reason = reason
        super().__init__(f"agent {agent}, t={t}: {reason}")


class InfeasibleAgentError(SfwocError, ValueError):
    """An agent has an empty feasible set (no initial state or no control somewhere)."""


class EnumerationCapError(SfwocError):
    """Exhaustive enumeration would exceed the configured cap."""

    def __init__(self, size, cap):
        self.size = size
        self.cap = cap
        super().__init__(f"product space has {size} combinations, cap is {cap}")


class ConstraintViolationError(SfwocError, ValueError):
    """An indicator assignment breaks one of the MICP constraint families."""

    def __init__(self, violations):
        self.violations = list(violations)
        head = "; ".join(self.violations[:5])
        more = f" (+{len(self.violations) - 5} more)" if len(self.violations) > 5 else ""
        super().__init__(head + more)
