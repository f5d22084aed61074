//! The embedding of the inverse limit into the line: return vertices and
//! indexing, the interval atlas, and the gap filler.

pub mod atlas;
pub mod gapfill;
pub mod indexing;

pub use atlas::{
    build_atlas, psi_formula, AtlasJson, AtlasMode, AtlasSummary, IntervalAtlas, LevelCertificate,
};
pub use gapfill::{jarnik_extend, Cubic, GapPiece};
pub use indexing::{index_vertices, special_return_vertices, ReturnVertices, VertexIndexing};
