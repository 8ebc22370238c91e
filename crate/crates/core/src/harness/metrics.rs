use std::f64::consts::PI;

use serde::Serialize;
use thiserror::Error;

use super::{ProgressTracker, TraceRecord, CURVE_THRESHOLD};
use crate::geometry::{wrap_angle, Point2};
use crate::local_planner::LocalTrajectory;
use crate::map_model::{StopId, StopPointSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MetricsError {
    #[error("trace is empty")]
    EmptyTrace,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StopMetrics {
    pub stop_id: StopId,
    /// s
    pub arrival_time: f64,
    /// s, from arrival to the first record after the hold.
    pub hold_duration: f64,
    /// m from the hold position to the stop's map position; absent when the
    /// stop is not in the given specs.
    pub position_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct MetricsReport {
    /// Mean |lateral error| over curve records, m; 0 without curves.
    pub lateral_error_mean_curves: f64,
    /// m
    pub lateral_error_max: f64,
    /// rad
    pub heading_error_min: f64,
    /// rad
    pub heading_error_max: f64,
    /// Largest |curvature| commanded or applied, 1/m.
    pub curvature_max: f64,
    /// Ordered by arrival time.
    pub stops: Vec<StopMetrics>,
    /// Set by the simulation loop; always false from [`compute_metrics`].
    pub route_completed: bool,
    pub u_turn_extent: Option<f64>,
}

/// Aggregates a trace. Each record's reference curvature is that of the
/// trajectory point nearest to it, searched forward from the previous
/// record's match.
pub fn compute_metrics(
    trace: &[TraceRecord],
    traj: &LocalTrajectory,
    stops: &[StopPointSpec],
) -> Result<MetricsReport, MetricsError> {
    if trace.is_empty() {
        return Err(MetricsError::EmptyTrace);
    }

    let mut curve_sum = 0.0;
    let mut curve_count = 0usize;
    if !traj.is_empty() {
        let mut tracker = ProgressTracker::new(5.0);
        for r in trace {
            let i = tracker.update(traj, Point2::new(r.x, r.y));
            if traj.points[i].curvature.abs() > CURVE_THRESHOLD {
                curve_sum += r.lateral_error.abs();
                curve_count += 1;
            }
        }
    }

    let fold = |f: fn(&TraceRecord) -> f64, init: f64, pick: fn(f64, f64) -> f64| {
        trace.iter().map(f).fold(init, pick)
    };

    Ok(MetricsReport {
        lateral_error_mean_curves: if curve_count == 0 {
            0.0
        } else {
            curve_sum / curve_count as f64
        },
        lateral_error_max: fold(|r| r.lateral_error.abs(), 0.0, f64::max),
        heading_error_min: fold(|r| r.heading_error, f64::INFINITY, f64::min),
        heading_error_max: fold(|r| r.heading_error, f64::NEG_INFINITY, f64::max),
        curvature_max: fold(
            |r| r.curvature_cmd.abs().max(r.applied_curvature.abs()),
            0.0,
            f64::max,
        ),
        stops: stop_metrics(trace, stops),
        route_completed: false,
        u_turn_extent: u_turn_extent(trace),
    })
}

fn stop_metrics(trace: &[TraceRecord], stops: &[StopPointSpec]) -> Vec<StopMetrics> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < trace.len() {
        let Some(id) = &trace[i].stop_state else {
            i += 1;
            continue;
        };
        let start = i;
        while i < trace.len() && trace[i].stop_state.as_ref() == Some(id) {
            i += 1;
        }
        let first = &trace[start];
        let end_time = match trace.get(i) {
            Some(next) => next.time,
            // hold still running when the trace ended
            None if i - start > 1 => {
                let last = &trace[i - 1];
                last.time + (last.time - first.time) / (i - start - 1) as f64
            }
            None => first.time,
        };
        let position = Point2::new(first.x, first.y);
        out.push(StopMetrics {
            stop_id: id.clone(),
            arrival_time: first.time,
            hold_duration: (end_time - first.time).max(0.0),
            position_error: stops
                .iter()
                .find(|s| &s.id == id)
                .map(|s| s.position.distance(position)),
        });
    }
    out
}

/// Resampling distance for the heading-reversal search, m.
const REVERSAL_STEP: f64 = 0.1;
/// Heading change that counts as a reversal, rad.
const REVERSAL_ANGLE: f64 = 0.9 * PI;
/// Reversals spread over more travel than this are not U-turns, m.
const REVERSAL_MAX_TRAVEL: f64 = 100.0;

/// Widest lateral span of any heading reversal in the trace.
///
/// From every start sample, travel is followed until the heading has turned
/// by at least 0.9π and then for as long as it keeps turning. The span of
/// that stretch across the start heading is measured; the result is the
/// largest such span. `None` when the heading never reverses.
pub fn u_turn_extent(trace: &[TraceRecord]) -> Option<f64> {
    // resample by distance so standstill does not dominate
    let mut samples: Vec<(Point2, f64, f64)> = Vec::new(); // position, unwrapped heading, travel
    for r in trace {
        let p = Point2::new(r.x, r.y);
        match samples.last() {
            None => samples.push((p, r.heading, 0.0)),
            Some(&(q, theta, s)) => {
                let d = p.distance(q);
                if d >= REVERSAL_STEP {
                    samples.push((p, theta + wrap_angle(r.heading - theta), s + d));
                }
            }
        }
    }

    let mut best: Option<f64> = None;
    for (i, &(p0, theta0, s0)) in samples.iter().enumerate() {
        let normal = Point2::from_angle(theta0 + 0.5 * PI);
        let (mut lo, mut hi) = (0.0f64, 0.0f64);
        let mut turned: Option<f64> = None;
        for &(p, theta, s) in &samples[i + 1..] {
            let change = (theta - theta0).abs();
            match turned {
                // the reversal ends once the heading stops turning further
                Some(prev) if change <= prev => break,
                None if s - s0 > REVERSAL_MAX_TRAVEL => break,
                _ => {}
            }
            let offset = (p - p0).dot(normal);
            lo = lo.min(offset);
            hi = hi.max(offset);
            if turned.is_some() || change >= REVERSAL_ANGLE {
                turned = Some(change);
            }
        }
        if turned.is_some() {
            let span = hi - lo;
            best = Some(best.map_or(span, |b| b.max(span)));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::local_planner::TrajectoryPoint;

    fn record(time: f64, x: f64, y: f64, heading: f64) -> TraceRecord {
        TraceRecord {
            time,
            x,
            y,
            heading,
            speed: 1.0,
            target_speed: 1.0,
            lateral_error: 0.0,
            heading_error: 0.0,
            curvature_cmd: 0.0,
            applied_curvature: 0.0,
            stop_state: None,
            emergency: false,
        }
    }

    fn line(n: usize, curvature: f64) -> LocalTrajectory {
        LocalTrajectory {
            points: (0..n)
                .map(|i| TrajectoryPoint {
                    position: Point2::new(i as f64, 0.0),
                    heading: 0.0,
                    curvature,
                    arc_length: i as f64,
                    target_speed: 1.0,
                    segment_index: 0,
                    edge_index: 0,
                    speed_limit: 1.0,
                    stop: None,
                })
                .collect(),
            horizon: f64::INFINITY,
            profile: None,
        }
    }

    #[test]
    fn empty_trace_is_error() {
        assert_eq!(
            compute_metrics(&[], &line(3, 0.0), &[]),
            Err(MetricsError::EmptyTrace)
        );
    }

    #[test]
    fn zero_errors_give_zero_mean() {
        let trace: Vec<_> = (0..5)
            .map(|i| record(i as f64, i as f64, 0.0, 0.0))
            .collect();
        let m = compute_metrics(&trace, &line(6, 0.1), &[]).unwrap();
        assert_eq!(m.lateral_error_mean_curves, 0.0);
        assert_eq!(m.lateral_error_max, 0.0);
        assert!(m.stops.is_empty());
        assert!(!m.route_completed);
    }

    #[test]
    fn three_record_hand_computation() {
        let mut trace: Vec<_> = (0..3)
            .map(|i| record(0.5 * i as f64, i as f64, 0.0, 0.0))
            .collect();
        trace[0].lateral_error = 0.2;
        trace[1].lateral_error = -0.4;
        trace[2].lateral_error = 0.3;
        trace[0].heading_error = -0.05;
        trace[1].heading_error = 0.1;
        trace[2].heading_error = 0.02;
        trace[1].curvature_cmd = -0.3;
        trace[2].applied_curvature = 0.25;
        let mut traj = line(3, 0.0);
        // only the first two records sit on curved points
        traj.points[0].curvature = 0.2;
        traj.points[1].curvature = -0.2;
        let m = compute_metrics(&trace, &traj, &[]).unwrap();
        // (0.2 + 0.4) / 2
        assert!((m.lateral_error_mean_curves - 0.3).abs() < 1e-15);
        assert_eq!(m.lateral_error_max, 0.4);
        assert_eq!(m.heading_error_min, -0.05);
        assert_eq!(m.heading_error_max, 0.1);
        assert_eq!(m.curvature_max, 0.3);
    }

    #[test]
    fn hold_intervals() {
        let mut trace: Vec<_> = (0..10)
            .map(|i| record(0.1 * i as f64, 1.0, 0.0, 0.0))
            .collect();
        for r in &mut trace[2..6] {
            r.stop_state = Some("s1".into());
        }
        let spec = StopPointSpec {
            id: "s1".into(),
            position: Point2::new(1.0, 0.3),
            stop_duration: 0.4,
        };
        let m = compute_metrics(&trace, &line(3, 0.0), &[spec]).unwrap();
        assert_eq!(m.stops.len(), 1);
        let s = &m.stops[0];
        assert!((s.arrival_time - 0.2).abs() < 1e-12);
        assert!((s.hold_duration - 0.4).abs() < 1e-12);
        assert!((s.position_error.unwrap() - 0.3).abs() < 1e-12);
    }

    #[test]
    fn u_turn_on_a_semicircle() {
        // straight, half circle of radius 4, straight back
        let mut trace = Vec::new();
        let mut t = 0.0;
        for i in 0..100 {
            trace.push(record(t, i as f64 * 0.1, 0.0, 0.0));
            t += 0.1;
        }
        for i in 0..=200 {
            let a = PI * i as f64 / 200.0;
            trace.push(record(t, 10.0 + 4.0 * a.sin(), 4.0 - 4.0 * a.cos(), a));
            t += 0.1;
        }
        for i in 0..100 {
            trace.push(record(t, 10.0 - i as f64 * 0.1, 8.0, PI));
            t += 0.1;
        }
        let extent = u_turn_extent(&trace).unwrap();
        assert!((extent - 8.0).abs() < 0.05, "{extent}");
        assert_eq!(u_turn_extent(&trace[..100]), None);
    }
}
