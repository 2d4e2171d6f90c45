"""Exception types raised across the package."""


class LBFError(Exception):
    """Base class for all package errors."""


class NotSkew(LBFError, ValueError):
    pass


class DegenerateAxis(LBFError, ValueError):
    """The tilt axis b3r x f_r vanishes and the reference is not feasible."""


class DegenerateHeading(LBFError, ValueError):
    """The desired thrust axis is parallel to the reference heading b1r."""


class NegativeThrustDemand(LBFError):
    """Allocation asked for negative squared spin rates."""

    def __init__(self, rotors, w2=None):
        self.rotors = tuple(int(i) for i in rotors)
        self.w2 = w2
        super().__init__(f"negative thrust demanded on rotors {self.rotors}")


class OutOfRange(LBFError, ValueError):
    pass


class ConfigError(LBFError, ValueError):
    pass
