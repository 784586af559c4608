"""swekit: a well-balanced finite-volume shallow-water simulation kit.

1D and 2D solvers on uniform Cartesian grids with HLL or Rusanov
fluxes, MUSCL (minmod) plus hydrostatic reconstruction of the
topography, semi-implicit Manning / Darcy-Weisbach friction, uniform
time-varying rain, two-layer Green-Ampt infiltration, and a set of
analytic reference solutions used by the bundled validation harness.
"""

__version__ = "0.1.0"

from .analytic import (
    extrapolated_front_position,
    lake_at_rest_profile,
    macdonald_rain_profile,
    macdonald_shock_profile,
    macdonald_topography,
    ritter_front_position,
    ritter_profile,
    thacker_planar_profile,
    ThackerParams,
    wet_front_position,
)
from .boundary import BoundaryCondition, BoundarySet
from .cases import CASE_NAMES, get_case
from .config import ConfigError, parse_parameter_file, parse_parameters
from .core import (
    G_DEFAULT,
    H_EPS,
    Grid,
    State1D,
    State2D,
    critical_depth,
    eigenvalues_1d,
    eigenvalues_2d,
    froude_number,
    froude_number_2d,
    physical_flux_1d,
    total_volume,
    velocity,
)
from .fileio import DemGrid, read_dem, read_profile, write_dem, \
    write_profile_1d, write_profile_2d
from .fluxes import hll_flux, rusanov_flux
from .reconstruction import hydrostatic_reconstruct, minmod, muscl_slopes
from .sources import (
    FrictionParams,
    GreenAmptParams,
    GreenAmptState,
    Hyetograph,
    friction_semi_implicit,
    infiltration_capacity,
    infiltration_step,
)
from .timeloop import (
    NumericalFault,
    RunResult,
    SchemeConfig,
    SimulationConfig,
    compute_dt,
    run_simulation,
)
from .validate import run_validation

__all__ = [
    "__version__",
    "BoundaryCondition",
    "BoundarySet",
    "CASE_NAMES",
    "ConfigError",
    "DemGrid",
    "FrictionParams",
    "G_DEFAULT",
    "GreenAmptParams",
    "GreenAmptState",
    "Grid",
    "H_EPS",
    "Hyetograph",
    "NumericalFault",
    "RunResult",
    "SchemeConfig",
    "SimulationConfig",
    "State1D",
    "State2D",
    "ThackerParams",
    "compute_dt",
    "critical_depth",
    "eigenvalues_1d",
    "eigenvalues_2d",
    "extrapolated_front_position",
    "friction_semi_implicit",
    "froude_number",
    "froude_number_2d",
    "get_case",
    "hll_flux",
    "hydrostatic_reconstruct",
    "infiltration_capacity",
    "infiltration_step",
    "lake_at_rest_profile",
    "macdonald_rain_profile",
    "macdonald_shock_profile",
    "macdonald_topography",
    "minmod",
    "muscl_slopes",
    "parse_parameter_file",
    "parse_parameters",
    "physical_flux_1d",
    "read_dem",
    "read_profile",
    "ritter_front_position",
    "ritter_profile",
    "run_simulation",
    "run_validation",
    "rusanov_flux",
    "thacker_planar_profile",
    "total_volume",
    "velocity",
    "wet_front_position",
    "write_dem",
    "write_profile_1d",
    "write_profile_2d",
]
