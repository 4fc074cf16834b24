class SwarmCoverError(Exception):
    pass


class PlacementInfeasible(SwarmCoverError):
    """Buffer constraints cannot be met for the requested density."""


class InvalidCount(SwarmCoverError, ValueError):
    pass


class IllegalRoute(SwarmCoverError):
    """A message does not follow the current topology (controller bug)."""


class UnknownRobot(SwarmCoverError, KeyError):
    pass


class ConfigInvalid(SwarmCoverError, ValueError):
    pass


class MissingField(SwarmCoverError, ValueError):
    pass


class ZeroSpeed(SwarmCoverError, ZeroDivisionError):
    pass


class ZeroConsumption(SwarmCoverError, ZeroDivisionError):
    pass


class BeforeCurveStart(SwarmCoverError, ValueError):
    pass
