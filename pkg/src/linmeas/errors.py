"""Exception types shared across the package."""


class MeasurementModelError(Exception):
    """Base class for all errors raised by linmeas."""


class DegenerateInteraction(MeasurementModelError):
    """Coupling matrix is singular (determinant indistinguishable from zero)."""


class NegativeDeterminant(MeasurementModelError):
    """Coupling matrix has a negative determinant.

    Such a map cannot be reached continuously from the identity and is
    rejected rather than silently reinterpreted.
    """


class NonpositiveBalance(MeasurementModelError):
    """Width-balance parameter w must be strictly positive."""


class NonpositiveScale(MeasurementModelError):
    """Rescale factor k must be strictly positive."""


class MismatchedGrids(MeasurementModelError):
    """Two sampled grids cannot be brought onto a common lattice without
    losing more than the permitted tail mass."""


class GridTooNarrow(MeasurementModelError):
    """A sampling grid does not cover enough of the state's support."""
