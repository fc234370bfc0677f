"""Exception classes shared across the package."""


class CertcapError(Exception):
    """Base class for all package-specific errors."""


class ContractError(CertcapError):
    """A certified-computation contract was violated at run time.

    Raised when a value that a caller promised (a positivity witness, an
    evaluation staying inside a bracket, ...) turns out to be false for the
    data actually seen.  The message names the violated witness.
    """


class PositivityError(ContractError):
    """A required strict-positivity witness is missing or refuted."""


class ParseError(CertcapError):
    """Expression text could not be parsed.

    Attributes:
        position: character offset of the first offending token.
    """

    def __init__(self, message, position):
        super().__init__(f"{message} (offset {position})")
        self.position = position


class BudgetExceededError(CertcapError):
    """A computation would exceed the configured quadrature cell ceiling.

    The requested precision is not attainable within the resource guard;
    callers can raise the ceiling (see `certcap.rigorint.cell_ceiling`)
    or lower the precision.
    """


class DegenerateGrowthError(CertcapError):
    """Growth-rate fit requested on counters with no usable variation."""
