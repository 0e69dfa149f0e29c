"""Exact and Monte Carlo Renyi entanglement of Haar-random states, unitaries and designs."""

__version__ = "0.1.0"

from .moments import (
    BoundResult,
    ChoiPartitionSpec,
    MomentResult,
    StatePartition,
    Theorem,
    catalan,
    design_renyi_lower_bound,
    haar_choi_moment,
    haar_state_moment,
    state_moment_asymptotic,
    theorem_bound,
)
from .permgroup import (
    IntegerPartition,
    Permutation,
    cycle_count,
    enumerate_group,
    mn_character,
    sym_irrep_dim,
    unitary_irrep_dim,
    verify_cycle_lemma,
)
from .weingarten import gram_matrix, verify_wg_inverse, weingarten

__all__ = [
    "BoundResult",
    "ChoiPartitionSpec",
    "IntegerPartition",
    "MomentResult",
    "Permutation",
    "StatePartition",
    "Theorem",
    "catalan",
    "cycle_count",
    "design_renyi_lower_bound",
    "enumerate_group",
    "gram_matrix",
    "haar_choi_moment",
    "haar_state_moment",
    "mn_character",
    "state_moment_asymptotic",
    "sym_irrep_dim",
    "theorem_bound",
    "unitary_irrep_dim",
    "verify_cycle_lemma",
    "verify_wg_inverse",
    "weingarten",
]
