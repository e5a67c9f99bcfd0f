"""Sparse recovery with dictionaries whose atoms need not have unit norm."""

from .dictionary import (
    Dictionary,
    analyze,
    coherence,
    new_dictionary,
    orthonormal_basis,
    random_dictionary,
    simplex_dictionary,
    synthesize,
    two_ortho_dictionary,
    welch_lower_bound,
)
from .errors import *  # noqa: F401,F403
from .greedy import OmpTrace, omp_recover, select_index
from .guarantees import (
    GuaranteeReport,
    basic_lemma_check,
    cai_constant,
    delta_s_bound,
    delta_s_exact,
    error_bound,
    f_mu,
    f_mu_endpoint,
    independence_max_size,
    recovery_constants,
    sparse_representations_unique,
    uniqueness_max_sparsity,
)
from .l1solver import SolverConfig, oracle_p1w, solve_p1w, verify_recovery
from .weighted_norms import (
    hard_truncate,
    l0,
    support,
    tail_e0,
    weighted_inner,
    weighted_l1,
    weighted_l2,
    weighted_p_norm,
)

__version__ = "0.1.0"
