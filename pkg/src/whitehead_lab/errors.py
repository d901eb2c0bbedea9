"""Exception hierarchy shared by every module."""


class WhiteheadLabError(Exception):
    """Base class for all library errors."""


class InputError(WhiteheadLabError):
    """Bad user input or configuration (CLI exit code 2)."""


class NotAPGroup(InputError):
    pass


class GroupTooLarge(InputError):
    pass


class UnknownCatalogEntry(InputError):
    pass


class PreconditionViolated(WhiteheadLabError):
    pass


class NotCyclic(PreconditionViolated):
    pass


class ZeroResidue(PreconditionViolated):
    pass


class DimensionMismatch(PreconditionViolated):
    pass


class BasisMismatch(PreconditionViolated):
    pass


class ActionUndefined(PreconditionViolated):
    pass


class NotAHomomorphism(PreconditionViolated):
    pass


class NotAUnit(PreconditionViolated):
    pass


class NonIntegralInput(PreconditionViolated):
    pass


class PrecisionExhausted(WhiteheadLabError):
    """Working precision too small to certify a result at the check precision."""


class NonIntegralResult(WhiteheadLabError):
    """A map that should land in Z_p produced a genuine denominator."""


class IntegralityViolation(NonIntegralResult):
    pass


class M3Violation(WhiteheadLabError):
    pass


class InternalMismatch(WhiteheadLabError):
    pass


class GaloisDescentFailure(InternalMismatch):
    pass
