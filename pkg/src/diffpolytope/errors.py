"""Exception hierarchy shared by every module."""


class DiffPolytopeError(Exception):
    """Base class for all errors raised by the package."""


class InvalidInput(DiffPolytopeError, ValueError):
    """Malformed matrix, signal or parameter."""


class GenerationFailed(DiffPolytopeError):
    """A random graph generator could not produce a connected sample."""


class IsolatedVertex(InvalidInput):
    """A vertex has zero degree, so the normalized operator is undefined."""


class Undefined(DiffPolytopeError, ArithmeticError):
    """A metric or formula is evaluated outside its domain."""


class Infeasible(DiffPolytopeError):
    """A linear program has an empty feasible region."""


class NumericalFailure(DiffPolytopeError):
    """An iterative solver hit its iteration cap."""


class NonConvergence(NumericalFailure):
    """Hildreth's dual ascent stalled before reaching its tolerance.

    The partial :class:`~diffpolytope.selection.ProjectionResult` is kept in
    ``result`` so callers can still inspect it.
    """

    def __init__(self, iterations, result=None):
        super().__init__(f"projection did not converge after {iterations} sweeps")
        self.iterations = iterations
        self.result = result
