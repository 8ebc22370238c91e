//! Scheduled stop points and the release buffer between planner and
//! controller.
//!
//! A stop moves through `Pending -> Buffered -> Dispatched -> Completed`:
//!
//! * **Pending → Buffered** when the global conditions hold: the stop lies on
//!   the vehicle's current or next global segment, it is closer than the
//!   horizon, and it has never been sent before.
//! * **Buffered → Dispatched** when the local conditions hold on the clipped
//!   trajectory: the stop is within [`LOCAL_ACCEPT_DISTANCE`] of the local
//!   path and its nearest point is not on the plan's last segment. The stop
//!   is then written into the trajectory with its dwell time.
//! * **Dispatched → Completed** once the vehicle has rested at the stop for
//!   the dwell time. Until then the buffer releases nothing beyond the stop.

use std::fmt;

use log::trace;
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{point_polyline_distance, Point2};
use crate::global_planner::GlobalPath;
use crate::local_planner::{
    nearest_point_index, profile_velocity, LocalTrajectory, StopAnnotation, TrajectoryPoint,
};
use crate::map_model::{StopId, StopPointSpec};
use crate::vehicle_sim::VehicleState;

/// A stop is only inserted when the local path passes closer than this, m.
pub const LOCAL_ACCEPT_DISTANCE: f64 = 5.0;

/// Slack when comparing simulation clock values.
const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StopError {
    #[error("trajectory is empty")]
    EmptyTrajectory,
    #[error("insertion index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("stop `{id}` is {state}, expected {expected}")]
    IllegalState {
        id: StopId,
        state: StopState,
        expected: StopState,
    },
    #[error("replacement trajectory has {got} points, buffer holds {expected}")]
    TrajectoryMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum StopState {
    Pending,
    Buffered,
    Dispatched,
    Completed,
}

impl fmt::Display for StopState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StopPoint {
    pub spec: StopPointSpec,
    state: StopState,
    pub dispatched_at: Option<f64>,
    pub resume_at: Option<f64>,
}

impl StopPoint {
    pub fn new(spec: StopPointSpec) -> Self {
        Self {
            spec,
            state: StopState::Pending,
            dispatched_at: None,
            resume_at: None,
        }
    }

    pub fn state(&self) -> StopState {
        self.state
    }

    pub fn id(&self) -> &StopId {
        &self.spec.id
    }

    /// Moves to the next lifecycle state; `next` must be the immediate
    /// successor of the current one.
    pub fn advance(&mut self, next: StopState) -> Result<(), StopError> {
        let expected = match self.state {
            StopState::Pending => StopState::Buffered,
            StopState::Buffered => StopState::Dispatched,
            StopState::Dispatched => StopState::Completed,
            StopState::Completed => {
                return Err(StopError::IllegalState {
                    id: self.spec.id.clone(),
                    state: self.state,
                    expected: StopState::Dispatched,
                })
            }
        };
        if next != expected {
            return Err(StopError::IllegalState {
                id: self.spec.id.clone(),
                state: self.state,
                expected: prior(next),
            });
        }
        self.state = next;
        Ok(())
    }
}

fn prior(state: StopState) -> StopState {
    match state {
        StopState::Pending | StopState::Buffered => StopState::Pending,
        StopState::Dispatched => StopState::Buffered,
        StopState::Completed => StopState::Dispatched,
    }
}

/// First condition set, evaluated against the global path.
pub fn check_global_conditions(
    stop: &StopPoint,
    path: &GlobalPath,
    current_segment: usize,
    vehicle_pos: Point2,
    horizon: f64,
) -> bool {
    if stop.state != StopState::Pending {
        return false;
    }
    let Some(segment) = path.nearest_segment(stop.spec.position) else {
        return false;
    };
    let on_current_or_next = segment == current_segment || segment == current_segment + 1;
    on_current_or_next && vehicle_pos.distance(stop.spec.position) < horizon
}

/// Second condition set, evaluated against the clipped local trajectory.
/// Returns the index of the point the stop should be attached to.
pub fn check_local_conditions(
    stop: &StopPoint,
    traj: &LocalTrajectory,
) -> Result<Option<usize>, StopError> {
    let positions = traj.positions();
    let distance = point_polyline_distance(stop.spec.position, &positions)
        .ok_or(StopError::EmptyTrajectory)?;
    if distance >= LOCAL_ACCEPT_DISTANCE {
        trace!(
            "stop `{}` is {distance:.2} m from the local path",
            stop.spec.id
        );
        return Ok(None);
    }
    let index = nearest_point_index(&traj.points, stop.spec.position).expect("non-empty");
    if Some(traj.points[index].segment_index) == traj.last_segment() {
        trace!("stop `{}` falls on the last local segment", stop.spec.id);
        return Ok(None);
    }
    Ok(Some(index))
}

/// Writes `stop` into `traj` at `index`, re-profiles the speeds and marks the
/// stop dispatched.
pub fn insert_stop(
    traj: &LocalTrajectory,
    stop: &mut StopPoint,
    index: usize,
    now: f64,
) -> Result<LocalTrajectory, StopError> {
    if index >= traj.points.len() {
        return Err(StopError::IndexOutOfRange {
            index,
            len: traj.points.len(),
        });
    }
    if stop.state != StopState::Buffered {
        return Err(StopError::IllegalState {
            id: stop.spec.id.clone(),
            state: stop.state,
            expected: StopState::Buffered,
        });
    }
    let mut out = traj.clone();
    out.points[index].stop = Some(StopAnnotation {
        stop_id: stop.spec.id.clone(),
        stop_duration: stop.spec.stop_duration,
    });
    out.points[index].target_speed = 0.0;
    if let Some(profile) = out.profile {
        out = profile_velocity(&out, profile.comfort, profile.v_cruise);
    }
    stop.advance(StopState::Dispatched)?;
    stop.dispatched_at = Some(now);
    Ok(out)
}

/// When the vehicle counts as having arrived at a stop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArrivalTolerance {
    /// m
    pub radius: f64,
    /// m/s
    pub speed: f64,
}

impl Default for ArrivalTolerance {
    fn default() -> Self {
        Self {
            radius: 0.5,
            speed: 0.05,
        }
    }
}

impl ArrivalTolerance {
    pub fn reached(&self, vehicle: &VehicleState, target: Point2) -> bool {
        vehicle.position().distance(target) <= self.radius && vehicle.speed < self.speed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hold {
    pub stop_id: StopId,
    pub point_index: usize,
    pub arrived_at: f64,
    pub resume_at: f64,
}

/// What one call to [`StopBuffer::release`] did.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Release {
    pub points: Vec<TrajectoryPoint>,
    /// The vehicle came to rest at this stop; the hold has begun.
    pub hold_started: Option<Hold>,
    /// This stop's dwell time elapsed and release resumed.
    pub completed: Option<StopId>,
}

/// Gate between the local planner and the controller.
///
/// Points are released in order and never retracted. Release stops at the
/// next stop-annotated point until the vehicle has rested there for the
/// stop's duration, and pauses entirely during an emergency hold.
#[derive(Debug, Clone)]
pub struct StopBuffer {
    trajectory: LocalTrajectory,
    release_index: usize,
    frontier: usize,
    holding: Option<Hold>,
    emergency: bool,
    /// Stop annotations before this index have been served.
    served_until: usize,
    tolerance: ArrivalTolerance,
}

impl StopBuffer {
    pub fn new(trajectory: LocalTrajectory, tolerance: ArrivalTolerance) -> Self {
        let frontier = trajectory.points.len();
        Self {
            trajectory,
            release_index: 0,
            frontier,
            holding: None,
            emergency: false,
            served_until: 0,
            tolerance,
        }
    }

    pub fn trajectory(&self) -> &LocalTrajectory {
        &self.trajectory
    }

    /// Points released to the controller so far.
    pub fn released(&self) -> &[TrajectoryPoint] {
        &self.trajectory.points[..self.release_index]
    }

    pub fn release_index(&self) -> usize {
        self.release_index
    }

    pub fn holding(&self) -> Option<&Hold> {
        self.holding.as_ref()
    }

    pub fn emergency(&self) -> bool {
        self.emergency
    }

    pub fn set_emergency(&mut self, on: bool) {
        self.emergency = on;
    }

    /// Limits release to points before `end` (exclusive) for the coming
    /// cycles.
    pub fn set_frontier(&mut self, end: usize) {
        self.frontier = end.min(self.trajectory.points.len());
    }

    /// Swaps in a re-annotated copy of the same trajectory.
    pub fn replace_trajectory(&mut self, trajectory: LocalTrajectory) -> Result<(), StopError> {
        if trajectory.points.len() != self.trajectory.points.len() {
            return Err(StopError::TrajectoryMismatch {
                expected: self.trajectory.points.len(),
                got: trajectory.points.len(),
            });
        }
        self.trajectory = trajectory;
        Ok(())
    }

    /// Index of the first unserved stop among the released points.
    pub fn awaiting_stop(&self) -> Option<usize> {
        (self.served_until..self.release_index).find(|&i| self.trajectory.points[i].stop.is_some())
    }

    /// Index of the first unserved stop anywhere ahead.
    pub fn next_stop(&self) -> Option<usize> {
        (self.served_until..self.trajectory.points.len())
            .find(|&i| self.trajectory.points[i].stop.is_some())
    }

    pub fn release(&mut self, vehicle: &VehicleState, now: f64) -> Result<Release, StopError> {
        if self.trajectory.points.is_empty() {
            return Err(StopError::EmptyTrajectory);
        }
        let mut out = Release::default();

        if let Some(hold) = &self.holding {
            if now + TIME_EPS < hold.resume_at {
                return Ok(out);
            }
            out.completed = Some(hold.stop_id.clone());
            self.served_until = hold.point_index + 1;
            self.holding = None;
        }

        if let Some(i) = self.awaiting_stop() {
            let point = &self.trajectory.points[i];
            if self.tolerance.reached(vehicle, point.position) {
                let annotation = point.stop.as_ref().expect("awaiting stops are annotated");
                let hold = Hold {
                    stop_id: annotation.stop_id.clone(),
                    point_index: i,
                    arrived_at: now,
                    resume_at: now + annotation.stop_duration,
                };
                self.holding = Some(hold.clone());
                out.hold_started = Some(hold);
            }
            return Ok(out);
        }

        if self.emergency {
            return Ok(out);
        }

        let frontier = self.frontier.max(self.release_index);
        let end = (self.release_index..frontier)
            .find(|&i| self.trajectory.points[i].stop.is_some())
            .map_or(frontier, |i| i + 1);
        out.points = self.trajectory.points[self.release_index..end].to_vec();
        self.release_index = end;
        Ok(out)
    }
}
