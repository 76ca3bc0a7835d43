"""Edit distance, geodesics and Frechet means for merge trees."""

from .trees import (
    EQ_TOL,
    MergeTree,
    TreeStructure,
    WeightedTree,
    canonical_form,
    equal_up_to_order2,
    ghost_vertex,
    isomorphic,
    merge_tree,
    norm,
    scale,
    single_vertex_tree,
    split_edge,
    subtree,
    validate,
    weighted_tree,
)
from .filtration import (
    PersistenceDiagram,
    PLFunction,
    diagrams_equal,
    merge_tree_from_pl,
    persistence_diagram,
)
from .edits import (
    Delete,
    EditPath,
    Ghost,
    Insert,
    Mapping,
    Shrink,
    Split,
    apply_edit,
    apply_path,
    edit_cost,
    mapping_cost,
    mapping_from_coupling,
    path_cost,
    realize_path,
    validate_mapping,
)
from .distance import (
    BudgetExceeded,
    DistanceResult,
    OracleCapExceeded,
    SolverConfig,
    distance_matrix,
    edit_distance,
    edit_distance_oracle,
    merge_tree_distance,
    minimizing_mappings,
    truncate,
    untruncate,
)
from .baselines import (
    Coupling,
    bottleneck,
    coupling_cost,
    interleaving_upper,
    naive_triplet_distance,
    validate_coupling,
    wasserstein1,
)
from .geometry import (
    CanonicalRepresentation,
    FrechetResult,
    Geodesic,
    LocalConstants,
    TangentVector,
    canonical_representation,
    decompose,
    exp_map,
    frechet_mean,
    frechet_objective,
    geodesic,
    geodesic_eval,
    local_constants,
    log_map,
)

__version__ = "0.1.0"
