//! Shared fixtures for the benchmarks under `benches/`.

use std::sync::Arc;

use gmcantor::{build_atlas, odometer_tower, AtlasMode, IntervalAtlas};

/// Atlas over an odometer tower; panics on construction errors.
pub fn odometer_atlas(bases: &[usize], depth: usize, mode: AtlasMode) -> Arc<IntervalAtlas> {
    let tower = Arc::new(odometer_tower(bases).expect("valid bases"));
    Arc::new(build_atlas(tower, depth, mode).expect("atlas builds"))
}
