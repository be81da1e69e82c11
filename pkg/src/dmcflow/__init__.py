"""Capacity of discrete memoryless channels via vector flows on the simplex."""
from .channel import (
    CapacityEstimate,
    Channel,
    extended_field_term,
    gradient,
    load_channel,
    mutual_information,
    output_distribution,
    read_channel,
)
from .errors import *  # noqa: F401,F403
from .flow import (
    DiagnosticsReport,
    FieldValue,
    check_kkt,
    check_stationary,
    lyapunov_rate,
    projected_gradient_direction,
    vector_field,
)
from .generators import (
    DatasetSpec,
    canonical_channels,
    generate_dataset,
    generate_symmetric_channel,
    symmetric_ground_truth,
)
from .simplex import SimplexVector, l1_distance, new_simplex, relu_l1_normalize, sample_interior
from .solvers import SolverConfig, SolverRun, baa_step, estimate_capacity, euler_step, mwu_step, run

__version__ = "0.1.0"
