"""Exception hierarchy shared by the solvers, bounds and CLI."""


class FoliationBoundsError(Exception):
    """Base class for every error raised by this package."""


class DomainError(FoliationBoundsError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class InvalidInput(DomainError):
    """A bound input (n, K, d) violates its invariants."""


class InvalidEndpoint(DomainError):
    """A singular endpoint was declared without a positive multiplicity."""


class InvalidMultiplicity(DomainError):
    pass


class SolverError(FoliationBoundsError, RuntimeError):
    """Numerical failure of an eigensolver; the CLI maps these to exit code 3."""


class NonConvergence(SolverError):
    pass


class BracketFailure(SolverError):
    pass


class StiffIntegration(SolverError):
    pass


class QuadratureFailure(SolverError):
    pass


class SeriesOverflow(FoliationBoundsError, OverflowError):
    pass


class HierarchyViolation(FoliationBoundsError, AssertionError):
    """Computed bounds contradict the ordering the comparison argument guarantees."""
