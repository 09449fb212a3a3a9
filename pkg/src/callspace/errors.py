"""Exception hierarchy.

Errors split into two groups that the command line maps onto exit codes:
input problems (``InputError``) and numerical failures (``NumericalError``).
"""


class CallspaceError(Exception):
    pass


class InputError(CallspaceError, ValueError):
    pass


class NumericalError(CallspaceError, ArithmeticError):
    pass


class InvalidCurve(InputError):
    pass


class MeanExceedsOne(InvalidCurve):
    pass


class NotConcave(InputError):
    pass


class NonConcaveInput(NotConcave):
    pass


class PriceBelowIntrinsic(InputError):
    pass


class UnknownFamily(InputError):
    pass


class NotInC1(InputError):
    pass


class NotApplicable(InputError):
    pass


class QuadratureFailure(NumericalError):
    pass
