"""Reduced dynamics of a central spin coupled to a spin bath.

The package computes the exact dynamical map of a qubit coupled uniformly
to ``N`` bath spins, its Kraus and Choi representations, the time-local
canonical master equation and non-Markovianity diagnostics, together with
two independent numerical oracles.
"""

from .errors import NumericalError, SingularMapError
from .generator import canonical_rates, integrate_master, l_matrix
from .nonmarkov import rate_negativity_scan, rhp_indicator, sweep
from .qmap import apply_map, choi, kraus_closed_form, kraus_from_choi, transfer_matrix
from .spectrum import RESOLVED, MapCoefficients, ModelParams, ReducedDynamics

__version__ = "0.1.0"

__all__ = [
    "MapCoefficients",
    "ModelParams",
    "NumericalError",
    "RESOLVED",
    "ReducedDynamics",
    "SingularMapError",
    "apply_map",
    "canonical_rates",
    "choi",
    "integrate_master",
    "kraus_closed_form",
    "kraus_from_choi",
    "l_matrix",
    "rate_negativity_scan",
    "rhp_indicator",
    "sweep",
    "transfer_matrix",
]
