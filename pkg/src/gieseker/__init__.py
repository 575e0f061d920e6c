"""Exact combinatorics of Gieseker degenerations of line bundles on nodal
curves, their stabilizer/band stratification, and the equivariant chain
characters that make the associated twisted invariants computable."""

from .errors import DomainError
from .modular_graph import (
    CanonicalGraph,
    ModularGraph,
    ValidationReport,
    canonical_form,
    graph_from_json,
    graph_to_json,
    is_stable,
    special_point_count,
    total_genus,
    validate,
)
from .degeneration import (
    DegeneracyType,
    DeformationOfBase,
    GiesekerVerdict,
    Stabilization,
    classify_gieseker,
    closure_poset,
    closure_strata,
    deform_resolve_self,
    deform_resolve_split,
    deformation_of,
    degeneracy_from_json,
    degeneracy_key,
    degeneracy_to_json,
    degenerate_self,
    degenerate_split,
    find_isomorphism,
    gieseker_bubble,
    make_deformation,
    quotient_graph,
    stabilize,
)
from .atlas import (
    FixedComponentLabel,
    IntersectionData,
    MultidegreeBounds,
    Partition,
    band_representatives,
    block_effective_genus,
    edge_count,
    fixed_label,
    in_band,
    intersection_data,
    minimal_bounds,
    nt2b,
    plus_block,
    split_edges_of,
    stabilizer_partition,
    tail_membership,
    twist,
    uniform_bounds,
)
from .character import (
    AdmissibleClassSpec,
    EvaluationInsertion,
    IndexInsertion,
    LaurentCharacter,
    char_add,
    char_mul,
    char_pow,
    char_scale,
    character_from_json,
    character_to_json,
    class_weight,
    degree_range,
    descendant_weight,
    evaluation_weight,
    format_fraction,
    index_character,
    line_bundle_weight,
    parse_fraction,
    vanishing_bounds,
    weight_zero_part,
)
from .invariants import (
    ChainFixedPoint,
    ChainLineData,
    ChainModel,
    InvariantResult,
    StabilizationReport,
    build_chain_model,
    chain_base_graph,
    chain_euler_character_cech,
    chain_euler_character_localization,
    chain_point_blocks,
    invariant_g0_n3,
    invariant_g0_n4_boundary,
    invariant_g0_n4_localization,
    stabilization_report,
)

__all__ = [name for name in dir() if not name.startswith("_")]
