"""Near-field Talbot interference of levitated nanospheres with environmental and CSL decoherence."""

__version__ = "0.1.0"

from .analysis import AlephResult, ExclusionGrid, aleph, aleph_point, exclusion_scan
from .config import build_config, config_digest, parse_config, serialize
from .constants import CONSTANTS, Material, OpticalTable, builtin_material, load_optical_table
from .csl import CslParams, csl_f, csl_kernel, csl_rate, form_factor
from .environment import (
    EnvironmentParams,
    InternalTempTrajectory,
    TrapParams,
    c6_coefficient,
    collision_rate,
    emission_rate,
    env_kernel_ln,
    internal_temperature_trajectory,
    spectral_rates,
)
from .errors import ConfigError, NumericIntegrityError, OpticalRangeError, QuadratureError, TalbotError
from .grating import EikonalQuantities, GratingParams, classical_coefficient, eikonal_phase, eikonal_quantities, talbot_coefficient
from .optics import SphereOptics, cross_sections
from .pattern import (
    DerivedScales,
    ExperimentConfig,
    PatternResult,
    coherence_spread,
    derived_scales,
    drop_length,
    pattern_classical,
    pattern_quantum,
    t1_for_slits,
    visibility,
)
