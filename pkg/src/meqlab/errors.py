"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: validation-type errors exit 2,
physics errors (instability, no steady state) exit 3, numerical and
internal-consistency failures exit 4.
"""


class MeqlabError(Exception):
    """Base class for all package errors."""


class ValidationError(MeqlabError, ValueError):
    """Invalid user input: parameter out of range, malformed config."""


class DomainError(MeqlabError, ValueError):
    """Function evaluated outside its mathematical domain (e.g. a pole)."""


class ContractError(MeqlabError, ValueError):
    """An operation received an operand violating its precondition."""


class StabilityError(MeqlabError):
    """Unstable system or non-Hurwitz generator: no steady state exists."""


class ConsistencyError(MeqlabError):
    """Two independent computation routes disagree beyond tolerance."""


class NumericalError(MeqlabError):
    """A numerical kernel failed to converge or produced non-finite output."""


class BracketError(MeqlabError, ValueError):
    """A search bracket does not contain the feature being refined."""
