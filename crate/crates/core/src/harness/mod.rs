//! Closed-loop simulation: plan, clip, schedule stops, control and step the
//! plant at a fixed period, recording one trace row per cycle.

mod metrics;
mod trace;

use log::{debug, info};
use serde::Serialize;
use thiserror::Error;

use crate::controller::{
    compute_errors, corridor_blockage, lateral_control, longitudinal_control, ControlCommand,
    ControllerGains, EmergencyLatch,
};
use crate::geometry::{point_segment_distance, Point2};
use crate::global_planner::{plan_route, GlobalPath, RouteError};
use crate::local_planner::{
    build_geometry, profile_velocity, sample_trajectory, subdivide_straights, ComfortLevel,
    LocalTrajectory, PlanError, DEFAULT_CORNER_OFFSET, DEFAULT_SAMPLE_SPACING,
};
use crate::map_model::{MapGraph, StopId};
use crate::stop_scheduler::{
    check_global_conditions, check_local_conditions, insert_stop, ArrivalTolerance, StopBuffer,
    StopError, StopPoint, StopState,
};
use crate::vehicle_sim::{step, SimError, VehicleParams, VehicleState};

pub use metrics::{compute_metrics, u_turn_extent, MetricsError, MetricsReport, StopMetrics};
pub use trace::{
    emit_trace, parse_trace_csv, render_svg, write_csv, TraceFormat, TraceRecord, CSV_HEADER,
};

/// Default forward horizon, meters (sensor range).
pub const DEFAULT_HORIZON: f64 = 50.0;
/// Default control period, seconds.
pub const DEFAULT_DT: f64 = 0.02;
/// Records with reference curvature above this count as curve driving, 1/m.
pub const CURVE_THRESHOLD: f64 = 0.01;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    NoRoute(#[from] RouteError),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Stop(#[from] StopError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

/// Geometry settings for the local planner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlannerSettings {
    pub corner_offset: f64,
    pub sample_spacing: f64,
    /// Straights are split into local segments no longer than this, so that
    /// the "not on the last local segment" stop rule can be met ahead of the
    /// vehicle on long roads.
    pub max_segment_length: f64,
}

impl Default for PlannerSettings {
    fn default() -> Self {
        Self {
            corner_offset: DEFAULT_CORNER_OFFSET,
            sample_spacing: DEFAULT_SAMPLE_SPACING,
            max_segment_length: 10.0,
        }
    }
}

/// Obstacle handling settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SafetySettings {
    /// m of path looked at ahead of the vehicle.
    pub sense_range: f64,
    /// Half width of the swept corridor, m.
    pub corridor_halfwidth: f64,
    /// Seconds the corridor must stay clear before driving resumes.
    pub resume_delay: f64,
}

impl Default for SafetySettings {
    fn default() -> Self {
        Self {
            sense_range: 50.0,
            corridor_halfwidth: 1.0,
            resume_delay: 1.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub map: MapGraph,
    pub start: Point2,
    pub goal: Point2,
    pub comfort: ComfortLevel,
    pub v_cruise: f64,
    pub gains: ControllerGains,
    pub params: VehicleParams,
    pub dt: f64,
    pub horizon: f64,
    pub max_sim_time: f64,
    pub planner: PlannerSettings,
    pub arrival: ArrivalTolerance,
    pub safety: SafetySettings,
}

impl Scenario {
    pub fn new(map: MapGraph, start: Point2, goal: Point2) -> Self {
        Self {
            map,
            start,
            goal,
            comfort: ComfortLevel::default(),
            v_cruise: 3.0,
            gains: ControllerGains::default(),
            params: VehicleParams::default(),
            dt: DEFAULT_DT,
            horizon: DEFAULT_HORIZON,
            max_sim_time: 600.0,
            planner: PlannerSettings::default(),
            arrival: ArrivalTolerance::default(),
            safety: SafetySettings::default(),
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let cfg = |m: String| Err(HarnessError::Config(m));
        if !(self.dt > 0.0 && self.dt <= 0.1) {
            return cfg(format!("dt must be in (0, 0.1], got {}", self.dt));
        }
        if !(self.horizon > 0.0 && self.horizon.is_finite()) {
            return cfg(format!("horizon must be positive, got {}", self.horizon));
        }
        if !(self.max_sim_time > 0.0 && self.max_sim_time.is_finite()) {
            return cfg(format!(
                "max sim time must be positive, got {}",
                self.max_sim_time
            ));
        }
        if !(self.v_cruise > 0.0 && self.v_cruise.is_finite()) {
            return cfg(format!(
                "cruise speed must be positive, got {}",
                self.v_cruise
            ));
        }
        if !(self.comfort.a_lat_max > 0.0 && self.comfort.a_long_max > 0.0) {
            return cfg("comfort accelerations must be positive".into());
        }
        if !self.start.is_finite() || !self.goal.is_finite() {
            return cfg("start and goal must be finite".into());
        }
        let p = &self.planner;
        if !(p.corner_offset > 0.0 && p.sample_spacing > 0.0 && p.max_segment_length > 0.0) {
            return cfg("planner settings must be positive".into());
        }
        let s = &self.safety;
        if !(s.sense_range > 0.0 && s.corridor_halfwidth >= 0.0 && s.resume_delay >= 0.0) {
            return cfg("invalid safety settings".into());
        }
        self.gains.validate().map_err(HarnessError::Config)?;
        self.params.validate().map_err(HarnessError::Config)?;
        Ok(())
    }
}

/// Everything produced by one simulation run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub trace: Vec<TraceRecord>,
    pub metrics: MetricsReport,
    pub path: GlobalPath,
    /// Planned trajectory with every dispatched stop written in.
    pub trajectory: LocalTrajectory,
    pub stops: Vec<StopPoint>,
}

/// Plans the global route and turns it into the profiled local trajectory
/// the run tracks. Fails when a corner blend is tighter than the vehicle can
/// steer.
pub fn plan_trajectory(scenario: &Scenario) -> Result<(GlobalPath, LocalTrajectory), HarnessError> {
    let path = plan_route(&scenario.map, scenario.start, scenario.goal)?;
    let planner = &scenario.planner;
    let primitives = build_geometry(&path, planner.corner_offset)?;
    let primitives = subdivide_straights(&primitives, planner.max_segment_length)?;
    let sampled = sample_trajectory(&primitives, planner.sample_spacing)?;
    let peak = sampled
        .points
        .iter()
        .map(|p| p.curvature.abs())
        .fold(0.0, f64::max);
    if peak > scenario.params.k_max {
        return Err(HarnessError::Config(format!(
            "planned curvature {peak:.3} 1/m exceeds the steering limit {} 1/m; \
             increase the corner offset",
            scenario.params.k_max
        )));
    }
    let trajectory = profile_velocity(&sampled, scenario.comfort, scenario.v_cruise);
    Ok((path, trajectory))
}

/// Forward-only nearest-point search over a trajectory.
#[derive(Debug, Clone)]
struct ProgressTracker {
    index: usize,
    window: f64,
}

impl ProgressTracker {
    fn new(window: f64) -> Self {
        Self { index: 0, window }
    }

    fn update(&mut self, traj: &LocalTrajectory, p: Point2) -> usize {
        let limit = traj.points[self.index].arc_length + self.window;
        let end = self.index
            + traj.points[self.index..]
                .iter()
                .take_while(|q| q.arc_length <= limit)
                .count();
        if let Some(i) = traj.nearest_index_in(p, self.index..end.max(self.index + 1)) {
            self.index = i;
        }
        self.index
    }
}

/// Forward-only tracking of the global segment the vehicle is on.
fn advance_segment(path: &GlobalPath, current: usize, p: Point2) -> usize {
    let seg = |i: usize| point_segment_distance(p, path.waypoints[i], path.waypoints[i + 1]);
    let mut current = current;
    while current + 1 < path.segment_count() && seg(current + 1) < seg(current) {
        current += 1;
    }
    current
}

/// Vehicle position as arc length along the trajectory, projected on the
/// tangent at the tracked point.
fn arc_position(traj: &LocalTrajectory, index: usize, p: Point2) -> f64 {
    let q = &traj.points[index];
    q.arc_length + (p - q.position).dot(Point2::from_angle(q.heading))
}

/// Runs the scenario to completion or until `max_sim_time`.
pub fn run(scenario: &Scenario) -> Result<RunOutput, HarnessError> {
    scenario.validate()?;
    let (path, trajectory) = plan_trajectory(scenario)?;
    let dt = scenario.dt;
    let params = &scenario.params;
    let gains = &scenario.gains;

    let mut stops: Vec<StopPoint> = scenario
        .map
        .stops()
        .iter()
        .cloned()
        .map(StopPoint::new)
        .collect();

    if trajectory.is_empty() {
        // start and goal snap to the same node
        let metrics = MetricsReport {
            route_completed: true,
            ..MetricsReport::default()
        };
        return Ok(RunOutput {
            trace: Vec::new(),
            metrics,
            path,
            trajectory,
            stops,
        });
    }

    let mut vehicle = VehicleState::at(scenario.start, trajectory.points[0].heading);
    let mut buffer = StopBuffer::new(trajectory, scenario.arrival);
    let mut tracker = ProgressTracker::new(5.0);
    let mut segment = 0;
    let mut latch = EmergencyLatch::new(scenario.safety.resume_delay);
    let mut trace = Vec::new();
    let mut completed = false;
    let last_index = buffer.trajectory().len() - 1;
    let final_point = buffer.trajectory().points[last_index].position;

    for cycle in 0u64.. {
        let now = cycle as f64 * dt;
        if now > scenario.max_sim_time + 1e-9 {
            break;
        }
        vehicle.time = now;

        // (1) clip to the horizon
        let progress = tracker.update(buffer.trajectory(), vehicle.position());
        let clipped = buffer.trajectory().window_from(progress, scenario.horizon);
        segment = advance_segment(&path, segment, vehicle.position());

        if buffer.release_index() > last_index
            && buffer.holding().is_none()
            && buffer.awaiting_stop().is_none()
            && scenario.arrival.reached(&vehicle, final_point)
        {
            completed = true;
            break;
        }

        // (2) global stop conditions
        for stop in stops.iter_mut() {
            if check_global_conditions(stop, &path, segment, vehicle.position(), scenario.horizon) {
                debug!("t={now:.2}: stop `{}` buffered", stop.id());
                stop.advance(StopState::Buffered)?;
            }
        }

        // (3) local stop conditions and insertion
        for stop in stops
            .iter_mut()
            .filter(|s| s.state() == StopState::Buffered)
        {
            if let Some(i) = check_local_conditions(stop, &clipped)? {
                let updated = insert_stop(buffer.trajectory(), stop, progress + i, now)?;
                buffer.replace_trajectory(updated)?;
                debug!(
                    "t={now:.2}: stop `{}` dispatched at index {}",
                    stop.id(),
                    progress + i
                );
            }
        }
        let clipped = buffer.trajectory().window_from(progress, scenario.horizon);

        // (4) buffer release, withholding the last local segment unless it
        // ends the route
        let clip_end = progress + clipped.len();
        let frontier = if clip_end > last_index {
            clip_end
        } else {
            let last_seg = clipped.last_segment();
            progress
                + clipped
                    .points
                    .iter()
                    .position(|p| Some(p.segment_index) == last_seg)
                    .unwrap_or(clipped.len())
        };
        buffer.set_frontier(frontier);
        let release = buffer.release(&vehicle, now)?;
        if let Some(hold) = &release.hold_started {
            info!(
                "t={now:.2}: holding at stop `{}` until {:.2}",
                hold.stop_id, hold.resume_at
            );
            if let Some(stop) = stops.iter_mut().find(|s| s.id() == &hold.stop_id) {
                stop.resume_at = Some(hold.resume_at);
            }
        }
        if let Some(id) = &release.completed {
            info!("t={now:.2}: stop `{id}` completed");
            if let Some(stop) = stops.iter_mut().find(|s| s.id() == id) {
                stop.advance(StopState::Completed)?;
            }
        }

        // (5) tracking errors against the released points near the vehicle
        let released = buffer.released();
        let window_start = progress.min(released.len().saturating_sub(1));
        let window_end = released.len().min(window_start + 80);
        let (errors, cmd, v_target, emergency) = if released.is_empty() {
            let cmd = ControlCommand {
                curvature_cmd: 0.0,
                accel_cmd: -params.a_brake_max,
                emergency: false,
            };
            (None, cmd, 0.0, false)
        } else {
            let errors = compute_errors(&vehicle, &released[window_start..window_end])
                .expect("window is non-empty");

            // (6) control
            let curvature_cmd = lateral_control(&errors, gains, params.k_max);
            let v_target = speed_target(scenario, &buffer, progress, &vehicle);
            let blocked = corridor_blockage(
                &vehicle,
                &released[window_start..],
                scenario.map.obstacles(),
                now,
                scenario.safety.sense_range,
                scenario.safety.corridor_halfwidth,
            )
            .is_some();
            let emergency = latch.update(blocked, now);
            buffer.set_emergency(emergency);
            let accel_cmd = if emergency {
                -params.a_brake_max
            } else {
                longitudinal_control(
                    vehicle.speed,
                    v_target,
                    gains.speed_gain,
                    params.a_long_max,
                    params.a_brake_max,
                )
            };
            let cmd = ControlCommand {
                curvature_cmd,
                accel_cmd,
                emergency,
            };
            (Some(errors), cmd, v_target, emergency)
        };

        trace.push(TraceRecord {
            time: now,
            x: vehicle.x,
            y: vehicle.y,
            heading: vehicle.heading,
            speed: vehicle.speed,
            target_speed: v_target,
            lateral_error: errors.map_or(0.0, |e| e.lateral_error),
            heading_error: errors.map_or(0.0, |e| e.heading_error),
            curvature_cmd: cmd.curvature_cmd,
            applied_curvature: vehicle.curvature,
            stop_state: buffer.holding().map(|h| h.stop_id.clone()),
            emergency,
        });

        // (7) plant
        vehicle = step(&vehicle, &cmd, params, dt)?;
    }

    let trajectory = buffer.trajectory().clone();
    let specs: Vec<_> = stops.iter().map(|s| s.spec.clone()).collect();
    let mut metrics = if trace.is_empty() {
        MetricsReport::default()
    } else {
        compute_metrics(&trace, &trajectory, &specs)?
    };
    metrics.route_completed = completed;
    Ok(RunOutput {
        trace,
        metrics,
        path,
        trajectory,
        stops,
    })
}

/// Speed reference: the profiled speed a short preview ahead of the vehicle,
/// further limited so the vehicle can come to rest at the next stop or at
/// the end of what has been released.
fn speed_target(
    scenario: &Scenario,
    buffer: &StopBuffer,
    progress: usize,
    vehicle: &VehicleState,
) -> f64 {
    let traj = buffer.trajectory();
    let s_vehicle = arc_position(traj, progress, vehicle.position());
    // looking past the arrival radius keeps a served stop's zero from
    // pinning the vehicle in place
    let preview = (vehicle.speed / scenario.gains.speed_gain).max(2.0 * scenario.arrival.radius);
    let profiled = traj.points[progress..]
        .iter()
        .find(|p| p.arc_length >= s_vehicle + preview)
        .unwrap_or(&traj.points[progress])
        .target_speed;

    let released_end = buffer.release_index().saturating_sub(1);
    let limit_index = match buffer.awaiting_stop().or_else(|| buffer.next_stop()) {
        Some(i) if i <= released_end => i,
        _ => released_end,
    };
    let remaining = traj.points[limit_index].arc_length - s_vehicle;
    // decelerating at a along v = sqrt(2 a d) under a P speed loop lags by
    // a / k; aim short by the distance that lag covers while decaying
    let a = scenario.comfort.a_long_max;
    let k = scenario.gains.speed_gain;
    let margin = a / (k * k);
    let governor = (2.0 * a * (remaining - margin).max(0.0)).sqrt();
    profiled.min(governor)
}

/// Identifier of the stop being held in a trace row, if any.
pub fn holding_stop(record: &TraceRecord) -> Option<&StopId> {
    record.stop_state.as_ref()
}
