//! Lateral and longitudinal tracking control.
//!
//! The lateral law is a curvature command built from three terms:
//! `u = alpha1 * k_ref + alpha2 * lateral_error + alpha3 * heading_error`,
//! saturated at the steering limit.
//!
//! Sign conventions: lateral error is positive when the vehicle is left of
//! the path, heading error is `path heading - vehicle heading`. With these,
//! a stabilizing gain set has `alpha2 < 0` and `alpha3 > 0`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{point_polyline_distance, wrap_angle, Point2};
use crate::local_planner::{nearest_point_index, TrajectoryPoint};
use crate::map_model::ObstacleSpec;
use crate::vehicle_sim::VehicleState;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ControlError {
    #[error("no released trajectory points to track")]
    EmptyTrajectory,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerGains {
    /// Curvature feed-forward gain.
    pub alpha1: f64,
    /// Lateral error gain, (1/m)/m.
    pub alpha2: f64,
    /// Heading error gain, (1/m)/rad.
    pub alpha3: f64,
    /// Speed tracking gain, 1/s.
    pub speed_gain: f64,
}

impl Default for ControllerGains {
    fn default() -> Self {
        Self {
            alpha1: 1.0,
            alpha2: -0.35,
            alpha3: 1.2,
            speed_gain: 1.5,
        }
    }
}

impl ControllerGains {
    pub fn validate(&self) -> Result<(), String> {
        let all_finite = [self.alpha1, self.alpha2, self.alpha3, self.speed_gain]
            .iter()
            .all(|g| g.is_finite());
        if !all_finite {
            return Err("controller gains must be finite".into());
        }
        if self.alpha1 <= 0.0 {
            return Err(format!("alpha1 must be positive, got {}", self.alpha1));
        }
        if self.speed_gain <= 0.0 {
            return Err(format!(
                "speed gain must be positive, got {}",
                self.speed_gain
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlErrors {
    /// Meters, positive when the vehicle is left of the path.
    pub lateral_error: f64,
    /// Radians in (-pi, pi].
    pub heading_error: f64,
    pub reference_curvature: f64,
    /// Index into the released points that were passed in.
    pub nearest_index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct ControlCommand {
    pub curvature_cmd: f64,
    pub accel_cmd: f64,
    pub emergency: bool,
}

pub fn compute_errors(
    vehicle: &VehicleState,
    released: &[TrajectoryPoint],
) -> Result<ControlErrors, ControlError> {
    let pos = vehicle.position();
    let i = nearest_point_index(released, pos).ok_or(ControlError::EmptyTrajectory)?;
    let reference = &released[i];
    let tangent = Point2::from_angle(reference.heading);
    Ok(ControlErrors {
        lateral_error: tangent.cross(pos - reference.position),
        heading_error: wrap_angle(reference.heading - vehicle.heading),
        reference_curvature: reference.curvature,
        nearest_index: i,
    })
}

/// The three-term law before saturation.
pub fn lateral_control_unclamped(errors: &ControlErrors, gains: &ControllerGains) -> f64 {
    gains.alpha1 * errors.reference_curvature
        + gains.alpha2 * errors.lateral_error
        + gains.alpha3 * errors.heading_error
}

pub fn lateral_control(errors: &ControlErrors, gains: &ControllerGains, k_max: f64) -> f64 {
    let u = lateral_control_unclamped(errors, gains);
    if u.is_nan() {
        return 0.0;
    }
    u.clamp(-k_max, k_max)
}

pub fn longitudinal_control(
    v: f64,
    v_target: f64,
    speed_gain: f64,
    a_long_max: f64,
    a_brake_max: f64,
) -> f64 {
    (speed_gain * (v_target - v)).clamp(-a_brake_max, a_long_max)
}

/// Arc length (along `released`) of the first point whose corridor is
/// intruded by an active obstacle, looking at most `sense_range` meters
/// ahead of the vehicle.
pub fn corridor_blockage(
    vehicle: &VehicleState,
    released: &[TrajectoryPoint],
    obstacles: &[ObstacleSpec],
    now: f64,
    sense_range: f64,
    corridor_halfwidth: f64,
) -> Option<f64> {
    let start = nearest_point_index(released, vehicle.position())?;
    let s0 = released[start].arc_length;
    let ahead: Vec<&TrajectoryPoint> = released[start..]
        .iter()
        .take_while(|p| p.arc_length - s0 <= sense_range)
        .collect();
    obstacles
        .iter()
        .filter(|o| o.is_active(now))
        .filter_map(|o| {
            let reach = corridor_halfwidth + o.radius;
            if ahead.len() == 1 {
                return (ahead[0].position.distance(o.position) <= reach)
                    .then_some(ahead[0].arc_length);
            }
            ahead.windows(2).find_map(|w| {
                let d = point_polyline_distance(o.position, &[w[0].position, w[1].position])?;
                (d <= reach).then_some(w[0].arc_length)
            })
        })
        .min_by(f64::total_cmp)
}

pub fn emergency_check(
    vehicle: &VehicleState,
    released: &[TrajectoryPoint],
    obstacles: &[ObstacleSpec],
    now: f64,
    sense_range: f64,
    corridor_halfwidth: f64,
) -> bool {
    corridor_blockage(
        vehicle,
        released,
        obstacles,
        now,
        sense_range,
        corridor_halfwidth,
    )
    .is_some()
}

/// Holds the emergency state until the corridor has been clear for
/// `resume_delay` seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct EmergencyLatch {
    pub resume_delay: f64,
    active: bool,
    clear_since: Option<f64>,
}

impl EmergencyLatch {
    pub fn new(resume_delay: f64) -> Self {
        Self {
            resume_delay,
            active: false,
            clear_since: None,
        }
    }

    pub fn is_active(&self) -> bool {
        self.active
    }

    /// Feeds this cycle's blockage result; returns whether the emergency
    /// stop is in force.
    pub fn update(&mut self, blocked: bool, now: f64) -> bool {
        if blocked {
            self.active = true;
            self.clear_since = None;
        } else if self.active {
            let since = *self.clear_since.get_or_insert(now);
            if now - since >= self.resume_delay - 1e-9 {
                self.active = false;
                self.clear_since = None;
            }
        }
        self.active
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn straight_path(n: usize, ds: f64) -> Vec<TrajectoryPoint> {
        (0..n)
            .map(|i| TrajectoryPoint {
                position: Point2::new(i as f64 * ds, 0.0),
                heading: 0.0,
                curvature: 0.0,
                arc_length: i as f64 * ds,
                target_speed: 2.0,
                segment_index: 0,
                edge_index: 0,
                speed_limit: 3.0,
                stop: None,
            })
            .collect()
    }

    #[test]
    fn on_path_errors_are_zero() {
        let path = straight_path(41, 0.25);
        let v = VehicleState::at(Point2::new(5.0, 0.0), 0.0);
        let e = compute_errors(&v, &path).unwrap();
        assert_eq!(
            (e.lateral_error, e.heading_error, e.reference_curvature),
            (0.0, 0.0, 0.0)
        );
        assert_eq!(e.nearest_index, 20);
    }

    #[test]
    fn left_of_path_is_positive() {
        let path = straight_path(41, 0.25);
        let v = VehicleState::at(Point2::new(5.0, 1.0), 0.0);
        let e = compute_errors(&v, &path).unwrap();
        assert_eq!(e.lateral_error, 1.0);
        assert_eq!(e.heading_error, 0.0);
        let v = VehicleState::at(Point2::new(5.0, -1.0), 0.3);
        let e = compute_errors(&v, &path).unwrap();
        assert_eq!(e.lateral_error, -1.0);
        assert!((e.heading_error + 0.3).abs() < 1e-15);
    }

    #[test]
    fn heading_error_wraps() {
        let mut path = straight_path(3, 1.0);
        path.iter_mut().for_each(|p| p.heading = PI - 0.1);
        let v = VehicleState::at(Point2::ORIGIN, -PI + 0.1);
        let e = compute_errors(&v, &path).unwrap();
        assert!((e.heading_error + 0.2).abs() < 1e-12, "{}", e.heading_error);
    }

    #[test]
    fn empty_released_is_error() {
        assert_eq!(
            compute_errors(&VehicleState::default(), &[]),
            Err(ControlError::EmptyTrajectory)
        );
    }

    #[test]
    fn control_law_arithmetic() {
        let gains = ControllerGains {
            alpha1: 1.0,
            alpha2: 0.2,
            alpha3: 0.8,
            speed_gain: 1.0,
        };
        let zero = ControlErrors {
            lateral_error: 0.0,
            heading_error: 0.0,
            reference_curvature: 0.0,
            nearest_index: 0,
        };
        assert_eq!(lateral_control(&zero, &gains, 0.48), 0.0);
        let e = ControlErrors {
            lateral_error: 0.5,
            heading_error: 0.05,
            reference_curvature: 0.1,
            ..zero
        };
        assert!((lateral_control(&e, &gains, 0.48) - 0.24).abs() < 1e-15);
        let e = ControlErrors {
            reference_curvature: 0.6,
            ..zero
        };
        assert_eq!(lateral_control_unclamped(&e, &gains), 0.6);
        assert_eq!(lateral_control(&e, &gains, 0.48), 0.48);
    }

    #[test]
    fn longitudinal_saturation() {
        assert_eq!(longitudinal_control(2.0, 2.0, 0.8, 1.0, 3.0), 0.0);
        assert_eq!(longitudinal_control(0.0, 2.0, 1.0, 1.0, 3.0), 1.0);
        assert_eq!(longitudinal_control(3.0, 0.0, 2.0, 1.0, 3.0), -3.0);
    }

    #[test]
    fn emergency_corridor() {
        let path = straight_path(201, 0.25);
        let v = VehicleState::at(Point2::ORIGIN, 0.0);
        assert!(!emergency_check(&v, &path, &[], 0.0, 50.0, 1.0));
        let blocker = ObstacleSpec {
            position: Point2::new(10.0, 0.0),
            radius: 0.5,
            appears_at: 0.0,
            clears_at: None,
        };
        assert!(emergency_check(
            &v,
            &path,
            std::slice::from_ref(&blocker),
            0.0,
            50.0,
            1.0
        ));
        // not yet present
        let later = ObstacleSpec {
            appears_at: 5.0,
            ..blocker.clone()
        };
        assert!(!emergency_check(&v, &path, &[later], 0.0, 50.0, 1.0));
        // beyond sensing range
        assert!(!emergency_check(
            &v,
            &path,
            std::slice::from_ref(&blocker),
            0.0,
            8.0,
            1.0
        ));
        // behind the vehicle
        let v_past = VehicleState::at(Point2::new(20.0, 0.0), 0.0);
        assert!(!emergency_check(
            &v_past,
            &path,
            std::slice::from_ref(&blocker),
            0.0,
            50.0,
            1.0
        ));
    }

    #[test]
    fn latch_resumes_after_delay() {
        let mut latch = EmergencyLatch::new(1.0);
        assert!(!latch.update(false, 0.0));
        assert!(latch.update(true, 1.0));
        assert!(latch.update(false, 2.0));
        assert!(latch.update(false, 2.98));
        assert!(!latch.update(false, 3.0));
        assert!(!latch.is_active());
    }
}
