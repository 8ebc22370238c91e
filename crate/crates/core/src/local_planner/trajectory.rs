use serde::Serialize;

use super::bezier::ArcLengthTable;
use super::primitives::{SegmentPrimitive, Shape};
use super::profile::SpeedProfile;
use super::PlanError;
use crate::geometry::{wrap_angle, Point2};
use crate::map_model::StopId;
use crate::vehicle_sim::VehicleState;

/// Stop time attached to a trajectory point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StopAnnotation {
    pub stop_id: StopId,
    pub stop_duration: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub position: Point2,
    /// Radians in (-pi, pi].
    pub heading: f64,
    /// 1/m, left turns positive.
    pub curvature: f64,
    /// Meters from the start of the sampled plan.
    pub arc_length: f64,
    pub target_speed: f64,
    pub segment_index: usize,
    pub edge_index: usize,
    pub speed_limit: f64,
    pub stop: Option<StopAnnotation>,
}

/// Sampled, speed-annotated path.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LocalTrajectory {
    pub points: Vec<TrajectoryPoint>,
    /// Forward window the points were clipped to; infinite when unclipped.
    pub horizon: f64,
    /// Settings of the last velocity profiling pass, reused when stops are
    /// inserted.
    pub profile: Option<SpeedProfile>,
}

impl LocalTrajectory {
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn last_segment(&self) -> Option<usize> {
        self.points.last().map(|p| p.segment_index)
    }

    pub fn positions(&self) -> Vec<Point2> {
        self.points.iter().map(|p| p.position).collect()
    }

    /// Index of the point nearest to `p` within `range`, smallest index on
    /// ties.
    pub fn nearest_index_in(&self, p: Point2, range: std::ops::Range<usize>) -> Option<usize> {
        let end = range.end.min(self.points.len());
        let start = range.start.min(end);
        nearest_point_index(&self.points[start..end], p).map(|i| i + start)
    }

    /// Copy of points `start..` whose arc length lies within `horizon` of the
    /// first one.
    pub fn window_from(&self, start: usize, horizon: f64) -> LocalTrajectory {
        let points = match self.points.get(start) {
            None => Vec::new(),
            Some(first) => {
                let limit = first.arc_length + horizon;
                self.points[start..]
                    .iter()
                    .take_while(|p| p.arc_length <= limit)
                    .cloned()
                    .collect()
            }
        };
        LocalTrajectory {
            points,
            horizon,
            profile: self.profile,
        }
    }
}

pub(crate) fn nearest_point_index(points: &[TrajectoryPoint], p: Point2) -> Option<usize> {
    points
        .iter()
        .enumerate()
        .map(|(i, q)| (i, q.position.distance(p)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
}

/// Samples the primitives at arc-length steps no longer than `spacing`.
///
/// Every primitive contributes its start point; the final primitive also
/// contributes its end point. Curvature is analytic (zero on straights).
pub fn sample_trajectory(
    primitives: &[SegmentPrimitive],
    spacing: f64,
) -> Result<LocalTrajectory, PlanError> {
    if !(spacing > 0.0 && spacing.is_finite()) {
        return Err(PlanError::InvalidParameter(format!(
            "sample spacing must be positive, got {spacing}"
        )));
    }
    let mut points = Vec::new();
    let mut base = 0.0;
    for (k, prim) in primitives.iter().enumerate() {
        let last = k + 1 == primitives.len();
        let mut emit = |position: Point2, heading: f64, curvature: f64, s: f64| {
            points.push(TrajectoryPoint {
                position,
                heading: wrap_angle(heading),
                curvature,
                arc_length: base + s,
                target_speed: prim.speed_limit,
                segment_index: prim.segment_index,
                edge_index: prim.edge_index,
                speed_limit: prim.speed_limit,
                stop: None,
            });
        };
        let length = match prim.shape {
            Shape::Straight { start, end } => {
                let length = start.distance(end);
                if length == 0.0 {
                    return Err(PlanError::DegenerateGeometry(format!(
                        "segment {} has zero length",
                        prim.segment_index
                    )));
                }
                let heading = (end - start).angle();
                let n = steps(length, spacing);
                for i in 0..n + usize::from(last) {
                    let s = length * i as f64 / n as f64;
                    let pos = if i == n {
                        end
                    } else {
                        start.lerp(end, i as f64 / n as f64)
                    };
                    emit(pos, heading, 0.0, s);
                }
                length
            }
            Shape::Bezier(b) => {
                let table = ArcLengthTable::new(&b);
                let length = table.total();
                if length.is_nan() || length <= 0.0 {
                    return Err(PlanError::DegenerateGeometry(format!(
                        "segment {} has zero length",
                        prim.segment_index
                    )));
                }
                let n = steps(length, spacing);
                for i in 0..n + usize::from(last) {
                    let s = length * i as f64 / n as f64;
                    let t = if i == n { 1.0 } else { table.parameter_at(s) };
                    let k = b
                        .signed_curvature(t)
                        .ok_or(PlanError::SingularDerivative { t })?;
                    emit(b.eval(t), b.heading(t), k, s);
                }
                length
            }
        };
        base += length;
    }
    Ok(LocalTrajectory {
        points,
        horizon: f64::INFINITY,
        profile: None,
    })
}

fn steps(length: f64, spacing: f64) -> usize {
    // exact multiples of `spacing` keep their count despite rounding
    ((length / spacing - 1e-9).ceil() as usize).max(1)
}

/// Keeps the part of `traj` from the point nearest the vehicle up to
/// `horizon` meters of arc length ahead.
pub fn clip_to_horizon(
    traj: &LocalTrajectory,
    pose: &VehicleState,
    horizon: f64,
) -> Result<LocalTrajectory, PlanError> {
    if horizon.is_nan() || horizon <= 0.0 {
        return Err(PlanError::InvalidParameter(format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let start =
        nearest_point_index(&traj.points, pose.position()).ok_or(PlanError::EmptyTrajectory)?;
    Ok(traj.window_from(start, horizon))
}
