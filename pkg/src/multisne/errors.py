"""Exception hierarchy. The CLI maps each class to its own exit code."""


class MultiSNEError(Exception):
    exit_code = 1


class ConfigError(MultiSNEError, ValueError):
    exit_code = 2


class DataError(MultiSNEError, ValueError):
    exit_code = 3


class NumericalError(MultiSNEError, ArithmeticError):
    exit_code = 4
