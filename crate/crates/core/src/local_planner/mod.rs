//! Local planning: Bézier-blended geometry, sampling, horizon clipping and
//! comfort-limited velocity profiling.

mod bezier;
mod primitives;
mod profile;
mod trajectory;

use thiserror::Error;

pub use bezier::{bezier_curvature, bezier_point, CubicBezier};
pub use primitives::{build_geometry, subdivide_straights, SegmentPrimitive, Shape};
pub use profile::{profile_velocity, ComfortClass, ComfortLevel, SpeedProfile};
pub use trajectory::{
    clip_to_horizon, sample_trajectory, LocalTrajectory, StopAnnotation, TrajectoryPoint,
};

pub(crate) use trajectory::nearest_point_index;

/// Default sample spacing along the trajectory, meters.
pub const DEFAULT_SAMPLE_SPACING: f64 = 0.25;
/// Default corner cut-back distance for Bézier blends, meters.
pub const DEFAULT_CORNER_OFFSET: f64 = 3.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("curve parameter {t} outside [0, 1]")]
    Domain { t: f64 },
    #[error("curve tangent vanishes at t = {t}")]
    SingularDerivative { t: f64 },
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
