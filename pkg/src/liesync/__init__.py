"""Extremum-seeking synchronization of blind agents on SO(3) and SE(3).

Agents evolve on a matrix Lie group and observe nothing but the scalar
synchronization cost; each one correlates that measurement against its own
sinusoidal geodesic dither, which on average drives the network down the cost
gradient toward consensus.
"""

from .cost import (Configuration, NetworkConfig, check_invariance, cost,
                   cost_se3, cost_so3, dispersion)
from .dither import (DitherSchedule, FrequencyReport, common_period,
                     dither_vector, generate_frequencies, validate_frequencies)
from .dynamics import (FieldSample, averaged_field, es_field,
                       gradient_field_so3, lie_euler_step, rk_mk2_step)
from .experiment import (ConfigError, ExperimentConfig, SimulationRecord,
                         load_config, load_config_file, read_csv, run,
                         ultimate_bound, write_csv)
from .groups import (AlgebraVector, GroupElement, GroupTag, IntegrityError,
                     exp_se3, exp_so3, group_distance, hat, inverse, multiply,
                     reproject, vee)

__version__ = "0.1.0"

__all__ = [
    "AlgebraVector", "ConfigError", "Configuration", "DitherSchedule",
    "ExperimentConfig", "FieldSample", "FrequencyReport", "GroupElement",
    "GroupTag", "IntegrityError", "NetworkConfig", "SimulationRecord",
    "averaged_field", "check_invariance", "common_period", "cost", "cost_se3",
    "cost_so3", "dispersion", "dither_vector", "es_field", "exp_se3",
    "exp_so3", "generate_frequencies", "gradient_field_so3", "group_distance",
    "hat", "inverse", "lie_euler_step", "load_config", "load_config_file",
    "multiply", "read_csv", "reproject", "rk_mk2_step", "run",
    "ultimate_bound", "validate_frequencies", "vee", "write_csv",
]
