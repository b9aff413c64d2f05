"""Exception hierarchy shared by every module of the package."""


class BanditError(ValueError):
    """Base class for all errors raised by olsucb."""


class NotSymmetric(BanditError):
    pass


class NotPositiveSemiDefinite(BanditError):
    def __init__(self, min_eigenvalue, what="matrix"):
        self.min_eigenvalue = float(min_eigenvalue)
        super().__init__(
            f"{what} is not positive semi-definite "
            f"(most negative eigenvalue {self.min_eigenvalue!r})"
        )


class InvalidGammaMatrix(BanditError):
    pass


class DimensionMismatch(BanditError):
    pass


class InvalidActionSet(BanditError):
    pass


class InvalidGamma(BanditError):
    """Correlation parameter outside [0, 1]."""


class TooManyActions(BanditError):
    pass


class EigenFailure(BanditError):
    pass


class UnpulledArm(BanditError):
    pass


class MaskMismatch(BanditError):
    pass


class NotDivisible(BanditError):
    pass


class DegenerateInstance(BanditError):
    pass


class UndefinedGap(BanditError):
    pass


class NonPositiveLambda(BanditError):
    pass


class HorizonTooShort(BanditError):
    pass


class ConfigError(BanditError):
    pass


class UnknownKey(ConfigError):
    def __init__(self, key):
        self.key = key
        super().__init__(f"unknown key {key!r}")


class InvalidValue(ConfigError):
    def __init__(self, key, constraint):
        self.key = key
        self.constraint = constraint
        super().__init__(f"invalid value for {key!r}: {constraint}")
