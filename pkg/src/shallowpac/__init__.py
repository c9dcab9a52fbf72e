"""Samplers, oracles, gate constructions and a shift learner for the shallow-circuit
distribution family D_{n,p,s}."""
from .compiler import NativeCircuit, compile_descriptor, compile_unitary, lower_to_native, two_level_decompose
from .estimators import HyperplaneLearner, ResidueClassEncoder
from .gates import BlockGateParams, build_A, build_C, build_U, final_rotation, gate_distance
from .learner import (
    GeneratorDescription,
    LearnerConfig,
    LearnResult,
    VoteVector,
    build_vote_vector,
    find_crossing,
    learn,
    recover_s,
    required_samples,
)
from .metrics import (
    LocalFunction,
    cosine_margin,
    local_function_pmf,
    modsum_uniformity,
    tv_empirical,
    tv_exact,
    tv_p_ideal_dp,
)
from .models import (
    DiscretePMF,
    Sample,
    analytic_conditional,
    analytic_pmf,
    analytic_sample,
    ideal_pmf,
    pmmajmod,
)
from .numtheory import ProblemParams, is_prime, majmod, parity, signed_weight
from .sampling import draw_samples
from .simulator import (
    CircuitDescriptor,
    Rank2State,
    block_partition,
    circuit_descriptor,
    q_pmf,
    q_pmf_dense,
    q_pmf_rank2,
    q_sample_rank2,
    q_state,
)
from .tree import BalancedTree, build_tree, pathsum

__version__ = "0.1.0"
