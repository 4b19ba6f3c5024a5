"""Uniform spanning trees of dense graphs: sampling, spectral tools, decompositions and diameter experiments."""

from .cheeger import CheegerResult, cheeger_exact, cheeger_sweep
from .decomposition import (
    GoodDecomposition, find_sparse_cut, good_decomposition, primary_decomposition, verify_good, verify_primary,
)
from .errors import (
    AuditFailure, BudgetExceeded, DisconnectedError, GenerationError, GraphError, HypothesisViolation,
    InvalidPathError, ParameterError, ParseError, SizeGuardError, TailDivergence, UstlabError,
)
from .estimators import (
    bubble_sum, diameter_tail_bound, mns_c3, probe_hit_large_set, probe_stay_in_block, select_path_endpoints,
)
from .experiments import (
    ExperimentConfig, run_bubble_and_tail, run_cheeger_vs_gap, run_diameter_scaling, run_path_experiment,
)
from .generators import generate
from .graph import (
    Graph, Network, augment_rho, contract, cut_count, edge_boundary, induced_subgraph, load_graph, read_graph,
    volume,
)
from .partition import Partition, h_graph
from .rng import derive_seed, rng_stream
from .spectral import (
    decomposition_gap_bound, jsvt_lower_bound, lazy_vector_gap_bound, path_method_bound, projection_chain,
    restriction_chain, spectral_gap, spectrum,
)
from .ust import SpanningTree, loop_erase, spanning_tree_count, tree_diameter, wilson, wilson_rooted_at_rho
from .walk import mixing_time_exact, mixing_time_upper_bound, stationary, tv_distance, walk

__version__ = "0.1.0"
