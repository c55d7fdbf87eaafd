"""Exception types raised across the package."""


class SubdynError(Exception):
    """Base class; the CLI maps subclasses to exit codes."""

    exit_code = 3


class InvalidInput(SubdynError):
    exit_code = 2


class NonCommuting(InvalidInput):
    def __init__(self, i, j):
        super().__init__(f"generators {i} and {j} do not commute")
        self.pair = (i, j)


class DegenerateDecomposition(SubdynError):
    pass


class ZeroVector(InvalidInput):
    pass


class SecondTypeSingular(SubdynError):
    pass


class NotHyperbolic(SubdynError):
    pass


class DefectTooLarge(SubdynError):
    pass


class DisconnectedWindow(SubdynError):
    pass


class CannotAdvance(SubdynError):
    def __init__(self, p, coordinate, msg=""):
        super().__init__(f"no admissible step at index {p} (blocking coordinate {coordinate}) {msg}".strip())
        self.p = p
        self.coordinate = coordinate


class RangeExceeded(InvalidInput):
    pass


class RatesFailed(SubdynError):
    pass


class WindowMismatch(InvalidInput):
    pass


class WindowExhausted(InvalidInput):
    pass


class MissingLatticePoint(InvalidInput):
    pass


class Inconsistent(SubdynError):
    pass


class JumpOffLine(InvalidInput):
    pass
