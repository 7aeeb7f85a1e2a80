"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PopulationCapExceeded(RuntimeError):
    """A simulated population grew past the configured safety cap."""


class NumericalDivergence(RuntimeError):
    """An integrated trajectory left the admissible region."""


class PrecisionLoss(RuntimeError):
    """A quantity became too small to resolve at the requested accuracy."""
