"""Exception types shared across the package."""


class DeckitError(Exception):
    """Base class for all package errors."""


class InputError(DeckitError, ValueError):
    """Malformed or inconsistent user input (bad simplices, bad files)."""


class DegenerateSimplexError(InputError):
    """A simplex with (numerically) zero volume where a proper one is needed."""


class MeshError(InputError):
    """Mesh fails a structural or metric requirement (non-manifold, non-Delaunay)."""


class ConvergenceError(DeckitError, RuntimeError):
    """An iterative or factorization-based solver did not succeed."""
