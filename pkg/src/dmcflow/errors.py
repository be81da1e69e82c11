"""Exception hierarchy.

``InputError`` covers malformed or invalid user data (CLI exit code 1),
``SolverError`` covers numerical failures during iteration (exit code 2).
"""


class DMCFlowError(ValueError):
    pass


class InputError(DMCFlowError):
    pass


class SolverError(DMCFlowError):
    pass


class NegativeEntry(InputError):
    pass


class NotNormalized(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class RowNotStochastic(InputError):
    pass


class DeadOutputColumn(InputError):
    pass


class NegativeProbability(InputError):
    pass


class NotSymmetric(InputError):
    pass


class ChannelParseError(InputError):
    pass


class AllZero(SolverError):
    pass


class BoundarySingularity(SolverError):
    pass


class BlowUp(SolverError):
    pass
