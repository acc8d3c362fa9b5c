"""Exception types shared across the package."""


class RelaxKTError(Exception):
    """Base class for all errors raised by this package."""


class ZeroRowError(RelaxKTError):
    """An operation needed 1/||a_i||^2 for a row with zero norm."""


class SizeError(RelaxKTError):
    """Input exceeds the desk-scale cap of a dense analysis oracle."""


class DimensionMismatch(RelaxKTError):
    """Operand shapes are incompatible."""


class ParamError(RelaxKTError):
    """Invalid or inconsistent generator / configuration parameters."""


class NonFiniteError(RelaxKTError):
    """NaN or Inf encountered where solver state must stay finite."""
