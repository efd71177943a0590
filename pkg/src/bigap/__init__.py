"""Random bipartite graph spectra versus closed-form second-eigenvalue bounds."""

from ._backend import NAME as BACKEND
from .bounds import ab_bipartite, fk_bound, normalized_gap_bound, regime_check, theorem_bound, weyl_check
from .graphgen import (
    BipartiteGraph,
    DegreeStats,
    Graph,
    degree_stats,
    embed_union,
    sample_bipartite,
    sample_er,
)
from .harness import ExperimentConfig, run_experiment, run_trial, verify_proof_chain
from .rng import SeedSpec, Stream, derive_stream
from .spectra import (
    SparseSymMatrix,
    SpectralSummary,
    adjacency,
    adjacency_full,
    dense_eig,
    k_residual,
    lanczos_extreme,
    normalized_adjacency,
    split_blocks,
)

__version__ = "0.1.0"
