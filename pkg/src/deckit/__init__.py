"""Discrete exterior calculus on simplicial, cubical, Rips and abstract complexes."""

from .abstract_complex import AbstractComplex, build_abstract
from .cube_complex import CubeComplex, bitmap_to_cubes, build_cube_complex, cube_boundary_faces, picture_to_bitmap
from .dec_fem import (
    Cochain,
    HodgeDecomposition,
    HodgeStar,
    barycentric_moment_integral,
    codifferential,
    combinatorial_laplacian,
    dec_hodge_star,
    hodge_decompose,
    laplace_derham,
    whitney_interpolate_at_barycenters,
    whitney_mass_matrix,
    whitney_stiffness,
)
from .errors import ConvergenceError, DeckitError, DegenerateSimplexError, InputError, MeshError
from .geometry import barycentric_differentials, circumcenter, dual_volumes, simplex_volume
from .rips_complex import RipsComplex, build_rips, rips_extend, rips_skeleton1
from .simplicial_complex import SimplicialComplex, boundary_faces, build_complex, canonical_format, coboundary
from .sparse_core import (
    conjugate_gradient,
    dense_determinant,
    least_squares,
    spgemm,
    symmetric_generalized_eig,
    transpose,
)

__version__ = "0.1.0"
