"""Semiclassical lattice difference operators and their Finsler/Agmon geometry.

The package assembles operators H = T + V on finite boxes of the scaled
lattice (eps*Z)^d, evaluates the associated Hamilton function, constructs the
induced Finsler distance from the potential well by series expansion, geodesic
shooting and anisotropic shortest paths, and verifies exponential decay of
Dirichlet eigenfunctions in weighted norms.
"""

from .lattice import LatticeDomain
from .stencil import StencilField, PotentialSpec, symbol_t0, kinetic_matrix_B
from .operators import OperatorMatrix, assemble_operator, apply_operator, form_positivity_check
from .validation import ValidationReport, validate_hypotheses
from .hamiltonian import HamiltonianEvaluator
from .finsler import FinslerEvaluator, Curve
from .eikonal import EikonalSeries, eikonal_expand
from .distance import DistanceField, GeodesicBundle, shoot_distance, dijkstra_distance
from .markov import MarkovChain, ingest_chain, chain_to_operator, spectral_bounds_check

__version__ = "0.1.0"
