"""Exception hierarchy shared by all modules."""


class DomainError(ValueError):
    """An input lies outside the domain of an operation."""


class ContractError(ValueError):
    """A precondition on an input object (e.g. normalization) is violated."""


class ParseError(DomainError):
    """A dataset or configuration file does not match its schema."""

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class UndefinedCorrelationError(DomainError):
    """A correlation function has no counts to normalize by."""


class InconsistentBoundsError(DomainError):
    """A CHSH-pinned coherence exceeds its Cauchy-Schwarz bound."""

    def __init__(self, value, bound):
        super().__init__(
            f"pinned |Re rho_0011| = {abs(value):.6g} exceeds the Cauchy-Schwarz bound {bound:.6g}"
        )
        self.value = value
        self.bound = bound


class FitError(RuntimeError):
    """A fringe fit failed.

    Attributes
    ----------
    params : ndarray or None
        Last iterate (A, S_T, o, D) when available.
    diagnostic : str
        Short machine-readable reason.
    """

    def __init__(self, message, params=None, diagnostic=""):
        super().__init__(message)
        self.params = params
        self.diagnostic = diagnostic or message


class UnidentifiableFrequencyError(FitError, DomainError):
    """Data carry no fringe, so the scale factor cannot be identified."""

    def __init__(self, message="unidentifiable frequency"):
        FitError.__init__(self, message, diagnostic="unidentifiable frequency")


class ConvergenceError(FitError):
    """The optimizer exhausted its iteration budget."""
