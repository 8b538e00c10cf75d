"""Exception types shared across the library."""


class SisgfError(Exception):
    """Base class for all library-specific errors."""


class BudgetExhausted(SisgfError):
    """An oracle call would push the query counter past the session budget.

    When raised mid-run by a driver, ``partial_trace`` carries whatever
    iteration record was accumulated before the budget ran out.
    """

    def __init__(self, message, partial_trace=None):
        super().__init__(message)
        self.partial_trace = partial_trace


class DomainViolation(SisgfError):
    """A query point lies outside the l1 evaluation domain plus slack."""


class InvalidInput(SisgfError):
    """Projection input violates its hypotheses (gamma >= 2a, U > 0, ...)."""


class DimensionTooLarge(SisgfError):
    """Brute-force reference requested above its dimension cutoff."""


class InvalidVariant(SisgfError):
    """Schedule variant incompatible with the problem constants."""


class BudgetTooSmall(SisgfError):
    """No iteration count fits the requested query budget."""


class EmptySample(SisgfError):
    """A Monte Carlo estimate was requested with zero samples."""


class ConfigError(SisgfError):
    """Run configuration failed to parse or validate.

    ``field`` names the offending section/key when known, so the CLI can
    print actionable diagnostics.
    """

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field
