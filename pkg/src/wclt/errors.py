"""Shared exception types, mapped to CLI exit codes in :mod:`wclt.cli`."""


class PatternError(ValueError):
    """Invalid pattern description or pattern shape unsupported by an operation."""


class WeightModelError(ValueError):
    """Invalid weight-law parameters."""


class DegenerateConfigError(ValueError):
    """Configuration with zero variance or a vacuous bound (e.g. p at the boundary)."""


class UnsupportedPatternError(ValueError):
    """Pattern outside the balance class needed by the regime-split bounds."""


class AlignmentError(ValueError):
    """Grid cells do not align with the retention probability or weight atoms."""


class ResourceLimitError(RuntimeError):
    """Computation would exceed the desk-scale caps."""


class ChaosError(ValueError):
    """Kernel or kernel-family violates a structural precondition."""
