"""Polarization-entangled photon pairs in a rotating fiber Sagnac loop.

Simulation, fringe fitting, CHSH analysis and bounded two-qubit tomography.
"""

from .bell import ChshReport, ChshSettings, canonical_settings, chsh, correlation
from .errors import (
    ContractError, ConvergenceError, DomainError, FitError, InconsistentBoundsError, ParseError,
    UndefinedCorrelationError, UnidentifiableFrequencyError,
)
from .fitting import (
    FringeFitReport, FringeModel, dataset_visibility, fit_channel, fit_fringe, visibility_series,
)
from .geometry import (
    REFERENCE_GEOMETRY, SagnacGeometry, fiber_length_from_scale, sagnac_phase, scale_factor,
)
from .kernels import BACKEND
from .polarization import AnalyzerSetting, TwoPhotonState, coincidence_probability, make_phi_state
from .simulator import (
    ChshCountGrid, SimulationConfig, SweepDataset, simulate_chsh, simulate_sweep,
)
from .tomography import BoundedDensityMatrix, partial_tomography, purity_range

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "AnalyzerSetting", "BoundedDensityMatrix", "ChshCountGrid", "ChshReport",
    "ChshSettings", "ContractError", "ConvergenceError", "DomainError", "FitError",
    "FringeFitReport", "FringeModel", "InconsistentBoundsError", "ParseError",
    "REFERENCE_GEOMETRY", "SagnacGeometry", "SimulationConfig", "SweepDataset", "TwoPhotonState",
    "UndefinedCorrelationError", "UnidentifiableFrequencyError", "canonical_settings", "chsh",
    "coincidence_probability", "correlation", "dataset_visibility", "fiber_length_from_scale",
    "fit_channel", "fit_fringe", "make_phi_state", "partial_tomography", "purity_range",
    "sagnac_phase", "scale_factor", "simulate_chsh", "simulate_sweep", "visibility_series",
]
