"""Deterministic multi-speed traffic cellular automaton and its exact finite-time theory."""

__version__ = "0.1.0"

from .analytic import (
    STEADY,
    approx_block_prob_large_t,
    exact_block_prob,
    fixed_count_block_prob,
    exact_flow,
    flow_hypergeometric,
    fundamental_diagram,
    steady_state_block_prob,
    steady_state_flow,
)
from .lattice import (
    Configuration,
    init_bernoulli,
    init_fixed_count,
    iterate_open,
    step,
    step_local,
)
from .measure import block_frequency, flow, mean_velocity, velocity_histogram
from .preimages import (
    count_admissible,
    enumerate_preimages_bruteforce,
    is_admissible,
    path_count,
    preimage_probability,
)
