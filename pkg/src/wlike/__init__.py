"""W-like PPT multipartite states and lower bounds on their distillable key."""

from .kernels import DEFAULT_BACKEND
from .key_rates import CcqState, RateRecord, ccq_from_two_qubit, chain_multikey, dw_rate, triangle_multikey
from .operator_core import (
    MultipartiteOperator,
    Spectrum,
    hermitian_spectrum,
    operator_abs,
    partial_trace,
    partial_transpose,
    svd_factors,
    tensor,
    trace_norm,
    von_neumann_entropy,
)
from .protocols import (
    SweepRecord,
    epsilon_schedule,
    filter_rate,
    filter_state,
    find_threshold_D,
    povm_pair,
    random_branch_state,
    random_rate,
    random_success_prob,
    random_xstate_closed_form,
)
from .squeezing import TwoQubitXState, Twisting, build_twisting, privacy_squeeze, reduce_to_pair, xstate_closed_form
from .state_family import (
    KeyProjectors,
    StateFamilyParams,
    build_rho,
    build_rho_gamma_direct,
    build_w_state,
    build_X,
    build_Y,
    hadamard_unitary,
    ppt_check,
)

__version__ = "0.1.0"
