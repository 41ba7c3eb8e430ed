"""DeGroot-Friedkin social power dynamics under constant, periodic and arbitrary topologies."""
from .dynamics import (
    FriedkinMap,
    alpha,
    build_influence_matrix,
    degroot_consensus,
    degroot_step,
    friedkin_map,
    issue_update_via_eigenvector,
)
from .matrixcore import (
    InteractionMatrix,
    SimplexVector,
    dominant_left_eigenvector,
    has_star_topology,
    is_doubly_stochastic,
    is_irreducible,
    load_matrix,
    random_interaction_matrix,
    save_matrix,
    validate,
)
from .switching import (
    Schedule,
    Trajectory,
    composed_cycle_map,
    detect_periodic_orbit,
    find_fixed_point,
    find_periodic_orbit,
    lift,
    simulate,
    unlift,
    verify_cross_fixed_point_relation,
    verify_invariant_set,
)

__all__ = [
    "FriedkinMap",
    "alpha",
    "build_influence_matrix",
    "degroot_consensus",
    "degroot_step",
    "friedkin_map",
    "issue_update_via_eigenvector",
    "InteractionMatrix",
    "SimplexVector",
    "dominant_left_eigenvector",
    "has_star_topology",
    "is_doubly_stochastic",
    "is_irreducible",
    "load_matrix",
    "random_interaction_matrix",
    "save_matrix",
    "validate",
    "Schedule",
    "Trajectory",
    "composed_cycle_map",
    "detect_periodic_orbit",
    "find_fixed_point",
    "find_periodic_orbit",
    "lift",
    "simulate",
    "unlift",
    "verify_cross_fixed_point_relation",
    "verify_invariant_set",
]

__version__ = "0.1.0"
