"""Kinks of 1+1D scalar field models: spectra, Darboux cascades, resonances and FGR checks."""

from .darboux import DarbouxCascade, RepulsivityReport, check_repulsivity, run_cascade
from .errors import (CapabilityError, DependencyError, InvalidInputError, KinklabError,
                     NumericalFailure)
from .grid import FULL, ODD, Grid, GridFunction
from .kink import KinkData, compute_kink
from .model import PotentialModel, from_even_coeffs, make_phi4, make_phi_family, validate
from .operator import SchrodingerOperator, SpectralData, eigen_decompose, linearized_operator
from .profile import (RefinedProfile, build_refined_profile, compute_rmin_sources,
                      fgr_coefficient, profile_orthogonality_check)
from .resonance import MultiIndex, ResonanceStructure, check_genericity, enumerate_sets
from .scattering import JostData, compute_jost, distorted_ft

__version__ = "0.1.0"

__all__ = [
    "FULL", "ODD", "Grid", "GridFunction",
    "PotentialModel", "from_even_coeffs", "make_phi4", "make_phi_family", "validate",
    "KinkData", "compute_kink",
    "SchrodingerOperator", "SpectralData", "eigen_decompose", "linearized_operator",
    "DarbouxCascade", "RepulsivityReport", "check_repulsivity", "run_cascade",
    "JostData", "compute_jost", "distorted_ft",
    "MultiIndex", "ResonanceStructure", "check_genericity", "enumerate_sets",
    "RefinedProfile", "build_refined_profile", "compute_rmin_sources", "fgr_coefficient",
    "profile_orthogonality_check",
    "KinklabError", "InvalidInputError", "CapabilityError", "NumericalFailure", "DependencyError",
]
