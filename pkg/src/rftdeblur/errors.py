"""Exception types shared across the library.

The CLI maps these onto exit codes: configuration problems exit 2,
unreadable inputs exit 1, solver-side failures exit 3.
"""


class DeblurError(Exception):
    """Base class for all library errors."""


class ConfigError(DeblurError):
    """Invalid configuration value or unknown configuration key."""


class InputError(DeblurError):
    """Unreadable or malformed input file."""


class DimensionError(DeblurError):
    """Array arguments with incompatible or unsupported shapes."""


class DegenerateInputError(DeblurError):
    """Input carries no usable signal (e.g. zero gradient energy)."""


class DegenerateKernelError(DeblurError):
    """Kernel estimate collapsed (no positive mass)."""


class NumericError(DeblurError):
    """Numeric integrity violated (non-finite values, bad residues)."""
