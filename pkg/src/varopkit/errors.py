"""Exception hierarchy shared by all varopkit modules."""


class VaropkitError(Exception):
    """Base class for every error raised by varopkit."""


class UnsupportedDescriptor(VaropkitError, ValueError):
    pass


class ArityMismatch(VaropkitError, ValueError):
    pass


# kept as a separate name: a_norm_exact rejects n != 1 specifically
class ArityError(ArityMismatch):
    pass


class IndexOutOfRange(VaropkitError, IndexError):
    pass


class GroupMismatch(VaropkitError, ValueError):
    pass


class ShapeMismatch(VaropkitError, ValueError):
    pass


class DimMismatch(ShapeMismatch):
    pass


class BadDualIndex(VaropkitError, IndexError):
    pass


class NumericalDegeneracy(VaropkitError, RuntimeError):
    pass


class Infeasible(VaropkitError, RuntimeError):
    """A representation could not be fitted below the residual tolerance."""


class SolverStall(VaropkitError, RuntimeError):
    """Certificate width stayed above tolerance after the iteration cap."""


class BondCapExceeded(VaropkitError, RuntimeError):
    pass


class ZeroFactor(VaropkitError, ValueError):
    pass


class NotInvariant(VaropkitError, ValueError):
    pass


class SchemaError(VaropkitError, ValueError):
    """Input JSON does not match the expected schema."""
