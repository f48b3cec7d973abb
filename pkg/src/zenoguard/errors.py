"""Exception hierarchy shared by all zenoguard modules."""


class ZenoguardError(Exception):
    pass


class ConfigError(ZenoguardError, ValueError):
    """Invalid user input: bad parameters, malformed config, unknown names."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NumericalFailure(ZenoguardError, ArithmeticError):
    """A well-formed request that cannot be computed to the required accuracy."""


class NotHermitian(ZenoguardError, ValueError):
    pass


class UnknownLabel(ZenoguardError, KeyError):
    pass


class DimensionMismatch(ZenoguardError, ValueError):
    pass


class DimensionOverflow(ConfigError):
    pass


class NotNormalized(ZenoguardError, ValueError):
    pass


class OddQubitCount(ConfigError):
    pass


class CutoffTooSmall(NumericalFailure):
    pass


class NonIntegrable(NumericalFailure):
    pass
