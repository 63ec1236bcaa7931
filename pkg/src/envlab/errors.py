"""Exception hierarchy.

Input problems subclass :class:`ValidationError` (and ``ValueError``);
failures of an internal numerical guarantee subclass
:class:`NumericalContractError`.
"""


class EnvlabError(Exception):
    pass


class ValidationError(EnvlabError, ValueError):
    pass


class DimensionCapError(ValidationError):
    pass


class DegenerateProbabilityError(ValidationError):
    """Raised when a probability is 0 or 1 and needs no fine-graining."""


class NumericalContractError(EnvlabError, ArithmeticError):
    pass


class EnvarianceGateError(NumericalContractError):
    """A fine-grained branch pair failed the swap-envariance check."""
