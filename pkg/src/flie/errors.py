"""Exception types raised across the simulator."""


class FlieError(Exception):
    """Base class for all simulator errors."""


class ZeroVector(FlieError, ValueError):
    pass


class FrameMismatch(FlieError, ValueError):
    pass


class ParseError(FlieError, ValueError):
    pass


class ValidationError(FlieError, ValueError):
    pass


class EmptyCloud(FlieError, ValueError):
    pass


class DegenerateView(FlieError, ValueError):
    """The point of interest lies (almost) straight above or below the agent."""


class NoDescriptors(FlieError, ValueError):
    pass


class IndexOutOfRange(FlieError, IndexError):
    pass


class StepBudgetExceeded(FlieError, RuntimeError):
    pass


class NoInspectionData(FlieError, ValueError):
    pass
