class EvpriorError(Exception):
    """Base error: carries a human readable detail and the CLI exit code."""

    exit_code = 1

    def __init__(self, detail: str):
        super().__init__(detail)
        self.detail = detail


class DomainError(EvpriorError, ValueError):
    """Argument outside the domain of an operation."""


class UsageError(EvpriorError, ValueError):
    """Wrong combination of inputs, flags or config keys."""


class MomentNotFiniteError(DomainError):
    pass


class IngestionError(EvpriorError):
    pass


class TieError(IngestionError, ValueError):
    def __init__(self, values):
        self.values = sorted(set(float(v) for v in values))
        shown = ", ".join(f"{v:g}" for v in self.values)
        super().__init__(f"Tied observations are not allowed: {shown}")


class ProprietyRefusal(EvpriorError):
    exit_code = 3

    def __init__(self, detail: str, claim: str = ""):
        super().__init__(detail)
        self.claim = claim


class BoundViolation(EvpriorError):
    exit_code = 4
