"""Exception types shared across the package."""


class IroplanError(Exception):
    """Base class for all errors raised by this package."""


# --- scene / simulated world ---

class DuplicateName(IroplanError):
    pass


class OverlappingObjects(IroplanError):
    pass


class PhysicallyBlocked(IroplanError):
    """Destination surface already has something on it."""


class NotGraspable(IroplanError):
    """The object is under another object and cannot be picked."""


class ScriptError(IroplanError):
    """A demonstration or scenario script is malformed."""


# --- knowledge base ---

class UnboundConstant(IroplanError):
    pass


class UnknownVariable(IroplanError):
    pass


class UnknownPredicate(IroplanError):
    pass


class UnknownType(IroplanError):
    pass


class EffectContradiction(IroplanError):
    """Same literal requested as both add and delete effect."""


class NameClash(IroplanError):
    pass


class UnknownAction(IroplanError):
    pass


# --- PDDL ---

class PddlSyntaxError(IroplanError):
    def __init__(self, message, line=None, col=None):
        super().__init__(message)
        self.line = line
        self.col = col

    def __str__(self):
        base = super().__str__()
        if self.line is not None:
            return f"{base} (line {self.line}, col {self.col})"
        return base


class UnsupportedFeature(PddlSyntaxError):
    pass


class UndeclaredConstant(IroplanError):
    pass


class InvalidModel(IroplanError):
    def __init__(self, diagnostics):
        super().__init__("; ".join(str(d) for d in diagnostics))
        self.diagnostics = list(diagnostics)


# --- planner ---

class NoPlanFound(IroplanError):
    """Search ended without a plan.  reason is one of
    'exhausted', 'budget_exceeded', 'goal_inconsistent', 'cancelled'."""

    def __init__(self, reason, detail=""):
        super().__init__(f"no plan found: {reason}" + (f" ({detail})" if detail else ""))
        self.reason = reason
        self.detail = detail


# --- executor ---

class UnknownLandmark(IroplanError):
    pass


class ExecutionFailed(IroplanError):
    def __init__(self, step, cause, trace=None):
        super().__init__(f"execution failed at step {step}: {cause}")
        self.step = step
        self.cause = cause
        self.trace = trace
