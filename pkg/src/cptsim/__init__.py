"""Capacitive power transfer coupler simulator.

Closed-form and method-of-moments capacitance extraction for a four-plate
coupler across a dielectric medium, Pi-model reduction, and steady-state
resonant circuit evaluation, tied together by a sweep pipeline.
"""

from .analytic import EPS0, IdealPi, analytic_sweep, ideal_pi, main_capacitance
from .circuit import (
    CircuitParams,
    OperatingPoint,
    max_feasible_distance,
    operating_point,
    peak_power_frequency,
    resonance_frequency,
    solve_ac,
    total_capacitance,
)
from .errors import CPTError
from .field_solver import (
    CapMatrix,
    Network,
    PiModel,
    coupling_sweep,
    extract,
    extract_geometry,
    reduce_pi,
    to_network,
)
from .geometry import CouplerGeometry, PanelMesh, mesh, standard_geometry
from .kernels import BACKEND
from .materials import Material, MaterialRegistry, default_registry, load_materials
from .pipeline import SweepConfig, SweepRow, config_from_dict, load_config, run

__version__ = "0.1.0"
