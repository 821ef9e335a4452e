"""Exception types raised by the library."""


class GraphNotConnected(ValueError):
    """An explicit graph (or edge list) does not connect all nodes."""


class GraphGenerationFailed(RuntimeError):
    """A random graph generator exhausted its retry budget."""


class SpectralFailure(RuntimeError):
    """The symmetric eigen-solver failed to converge."""


class DimensionError(ValueError):
    """Incompatible vector/matrix dimensions."""


class NotPositiveDefinite(ValueError):
    """A matrix required to be positive definite is not."""


class RiccatiDivergence(RuntimeError):
    """The fixed-point Riccati iteration did not meet tolerance."""


class ObservabilityError(ValueError):
    """The pair (F, H) fails the observability rank test."""


class ConfigRejected(ValueError):
    """A scenario configuration failed validation (bad value or an
    unsatisfied stability bound without the override flag)."""


class WireSchemaViolation(AssertionError):
    """A payload other than a primal variable was put on the simulated
    wire. Dual variables must never be exchanged."""
