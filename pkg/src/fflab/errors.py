"""Exception types raised across fflab."""


class FflabError(Exception):
    """Base class for all fflab errors."""


class NonPrime(FflabError, ValueError):
    pass


class EvenCharacteristic(FflabError, ValueError):
    pass


class SizeLimitExceeded(FflabError, ValueError):
    pass


class ZeroLeadingCoefficient(FflabError, ValueError):
    pass


class CaseMismatch(FflabError, ValueError):
    pass


class ImpossibleCase(FflabError, ValueError):
    pass


class HypothesisViolation(FflabError, ValueError):
    """Parameters fall outside the hypotheses of the statement being checked."""


class SupportViolation(FflabError, ValueError):
    pass


class BadExponent(FflabError, ValueError):
    pass


class BadRange(FflabError, ValueError):
    pass


class DegeneratePlane(FflabError, ValueError):
    pass


class NotRegular(FflabError, RuntimeError):
    """The R1 graph is not regular; indicates a relation classification bug."""


class EmptyShell(FflabError, ValueError):
    pass


class OmegaNotCovering(FflabError, ValueError):
    pass


class EmptySet(FflabError, ValueError):
    pass
