//! Prefix-conditioned generation, curvature statistics, Q-maps and figures.

pub mod curvature;
pub mod generate;
pub mod qmap;
pub mod render;

pub use curvature::{
    circumcurvature, curvature_at, curvature_histogram, histogram_distance, CurvatureHistogram,
    COLLINEAR_EPS, DEFAULT_BINS, DEFAULT_DELTA_MAX, DEFAULT_KAPPA_MAX,
};
pub use generate::{generate_from_prefix, generate_set};
pub use qmap::{qmap, QMap, QMapSidecar, DEFAULT_GRID};
pub use render::{render, Artifact, RenderOptions};

/// Prefix length used when generating from test samples.
pub const DEFAULT_PREFIX: usize = 20;
