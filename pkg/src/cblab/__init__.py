"""Numerical laboratory for finite-time blow-up of the conformally
critical semilinear wave equation: physical and similarity-variable
solvers on the unit ball, weighted energy functionals, and numerical
verification of the identities behind the Lyapunov-functional rate
argument."""

__version__ = "0.1.0"

from .grids import BallGrid, GridConfigError, build_ball_grid
from .ops import ScalarField, VectorField, div, grad, radial_tangential_split
from .params import eps0, kappa, p_conformal
from .similarity import Frame, SimilarState, SimilarityInstability

__all__ = [
    "BallGrid", "GridConfigError", "build_ball_grid",
    "ScalarField", "VectorField", "div", "grad", "radial_tangential_split",
    "eps0", "kappa", "p_conformal",
    "Frame", "SimilarState", "SimilarityInstability",
    "__version__",
]
