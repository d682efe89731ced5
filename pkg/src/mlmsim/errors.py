"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """Raised when an argument is outside the documented domain of an operation."""


class EstimationError(RuntimeError):
    """Raised when a Monte Carlo estimation procedure cannot produce a result.

    Carries a ``diagnostics`` dict describing the failed search (bracket
    endpoints, target probability, sample counts) to help the caller pick
    better settings.
    """

    def __init__(self, message: str, **diagnostics):
        super().__init__(message)
        self.diagnostics = dict(diagnostics)

    def __str__(self) -> str:
        base = super().__str__()
        if not self.diagnostics:
            return base
        detail = ", ".join(f"{k}={v!r}" for k, v in sorted(self.diagnostics.items()))
        return f"{base} ({detail})"
