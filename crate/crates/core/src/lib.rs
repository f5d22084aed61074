//! Minimal Cantor systems from Gambaudo-Martens graph-cover towers, their
//! exact nested-interval embeddings into the line, and the certified checks
//! that come with them.

pub mod dynamics;
pub mod embedding;
pub mod error;
pub mod exact;
pub mod extension;
pub mod graph;
pub mod tower;
pub mod verify;

pub use error::{Error, Result};
pub use exact::{ExactInterval, ExactScalar, ScalarRecord};
pub use graph::{
    compose, cycles_through, is_bidirectional, is_homomorphism, validate_edge_surjective, Graph,
    GraphHom, Path, VertexId,
};
pub use tower::{
    build_tower_from_words, growth_check, is_simple, odometer_tower, random_simple_tower,
    telescope, validate_gm, Condition, CoverTower, Diagnostic, GmLevel, TowerJson, TowerMeta, Word,
};
pub use dynamics::{
    enumerate_threads, metric, minimality_bruteforce, predecessor, step_backward, step_forward,
    successor, CylinderGraph, Thread,
};
pub use embedding::{
    build_atlas, index_vertices, jarnik_extend, special_return_vertices, AtlasJson, AtlasMode,
    AtlasSummary, GapPiece, IntervalAtlas, VertexIndexing,
};
pub use verify::{
    conjugacy_check, contraction_floor, disjointness_check, lrs_sample_check, per_level_quotients,
    quotient_exact, sample_pairs, separation_lower_bound, theoretical_bound, LevelQuotients,
    LrsReport, QuotientReport,
};
pub use extension::{
    build_extension, canonical_base_point, contraction_depth, find_return_times, spiral_height,
    verify_extension, ExtensionJson, ExtensionReport, ExtensionSpace, ReturnData, ZPoint,
};
