"""Sign-change radii of oscillating functions: bounds and numerical checks.

Subpackages
-----------
specfun    Bessel/Gegenbauer/Gamma primitives and adaptive quadrature.
torus      Sparse real trigonometric polynomials and frequency-shell smoothing.
sphere     Zonal harmonics, Funk-Hecke eigenvalues, annihilator kernels.
eigenid    Plane-wave Laplacian eigenfunctions, the Coulomb-kernel identity,
           and wave-equation solution formulas.
signsearch Empirical largest sign-free balls and bound verification.
cli        Command-line front end emitting CSV/JSON/SVG reports.
"""

__version__ = "0.1.0"

from . import specfun  # noqa: F401
