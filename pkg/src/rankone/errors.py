"""Exception hierarchy.

Three families map onto the CLI exit codes: bad input (1), mathematical
infeasibility (2) and numerical failure (3).
"""


class RankOneError(Exception):
    exit_code = 3


class InputError(RankOneError, ValueError):
    exit_code = 1


class EmptyInput(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class BadDimension(InputError):
    pass


class PreconditionViolated(InputError):
    pass


class InfeasibleError(RankOneError):
    exit_code = 2


class Infeasible(InfeasibleError):
    """No rank-one decomposition exists; ``report`` says why."""

    def __init__(self, report, message=None):
        self.report = report
        if message is None:
            message = f"weights are infeasible for this spectrum: {report}"
        super().__init__(message)


class FFIViolated(InfeasibleError):
    pass


class NotPositive(InfeasibleError):
    pass


class NoPolygon(InfeasibleError):
    pass


class Stalled(InfeasibleError):
    """The block schedule could not be completed within the stream cap."""

    def __init__(self, prefix_length, message=None):
        self.prefix_length = prefix_length
        if message is None:
            message = f"block schedule stalled after consuming {prefix_length} stream values"
        super().__init__(message)


class NumericalError(RankOneError):
    exit_code = 3


class NonConvergence(NumericalError):
    pass


class NumericalBreakdown(NumericalError):
    pass


class BlockInfeasible(NumericalError):
    pass
