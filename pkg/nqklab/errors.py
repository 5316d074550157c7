"""
Exception hierarchy for the neural quantum kernel laboratory.

Every error carries the process exit code the CLI reports for it.
"""


class NqkError(Exception):
    """Base class for all laboratory errors."""

    exit_code = 1


class ConfigError(NqkError, ValueError):
    """Invalid configuration, preset name or inconsistent model/spec."""

    exit_code = 2


class DataError(NqkError, ValueError):
    """Dataset could not be loaded, is malformed, or violates a pipeline rule."""

    exit_code = 3


class NumericalError(NqkError, ArithmeticError):
    """Non-PSD kernel beyond tolerance, diverged solver, non-finite values."""

    exit_code = 4
