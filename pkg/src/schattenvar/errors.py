"""Exception types shared across the package.

Each class carries the process exit code the command line maps it to.
"""


class SchattenError(Exception):
    exit_code = 1


class InputError(SchattenError, ValueError):
    exit_code = 2


class NumericalError(SchattenError, ArithmeticError):
    exit_code = 2


class RangeError(SchattenError, OverflowError):
    """Requested trace power is outside the table, or overflowed."""

    exit_code = 2


class SizeGuardError(SchattenError):
    """A brute-force path refused to run because the workload is too large."""

    exit_code = 3
