"""Exception hierarchy shared across the toolkit.

The CLI maps these onto process exit codes: usage errors exit 2 (argparse),
DataError exits 3, NumericalError exits 4.
"""


class MorphkitError(Exception):
    """Base class for all toolkit errors."""


class DataError(MorphkitError):
    """Invalid, inconsistent, or malformed input data."""


class CodecError(DataError):
    """Unreadable or unsupported image file."""


class NumericalError(MorphkitError):
    """Numerical failure: non-finite values, degenerate geometry, divergence."""
