//! Kinematic plant: unicycle kinematics driven by a curvature command, with
//! steering slew, curvature and acceleration limits.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::controller::ControlCommand;
use crate::geometry::{wrap_angle, Point2};

/// Steering limit of the shuttle, 1/m.
pub const K_MAX: f64 = 0.48;

/// Below this magnitude the applied curvature is integrated as a straight
/// line.
const STRAIGHT_CURVATURE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid timestep {0} s (must be in (0, 1])")]
    InvalidTimestep(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct VehicleState {
    pub x: f64,
    pub y: f64,
    /// Radians in (-pi, pi].
    pub heading: f64,
    /// m/s, never negative.
    pub speed: f64,
    pub time: f64,
    /// Curvature currently applied by the steering actuator, 1/m.
    pub curvature: f64,
}

impl VehicleState {
    /// Vehicle at rest at `position` facing `heading`.
    pub fn at(position: Point2, heading: f64) -> Self {
        Self {
            x: position.x,
            y: position.y,
            heading: wrap_angle(heading),
            ..Self::default()
        }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleParams {
    pub k_max: f64,
    pub v_max: f64,
    pub a_long_max: f64,
    pub a_brake_max: f64,
    /// Steering actuator slew, (1/m)/s.
    pub curvature_rate_max: f64,
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            k_max: K_MAX,
            v_max: 3.0,
            a_long_max: 1.5,
            a_brake_max: 3.0,
            curvature_rate_max: 0.6,
        }
    }
}

impl VehicleParams {
    pub fn validate(&self) -> Result<(), String> {
        let fields = [
            ("k_max", self.k_max),
            ("v_max", self.v_max),
            ("a_long_max", self.a_long_max),
            ("a_brake_max", self.a_brake_max),
            ("curvature_rate_max", self.curvature_rate_max),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!(
                    "vehicle parameter {name} must be positive, got {v}"
                ));
            }
        }
        Ok(())
    }
}

/// Advances the plant by `dt` seconds under `cmd`.
pub fn step(
    state: &VehicleState,
    cmd: &ControlCommand,
    params: &VehicleParams,
    dt: f64,
) -> Result<VehicleState, SimError> {
    if !(dt > 0.0 && dt <= 1.0) {
        return Err(SimError::InvalidTimestep(dt));
    }

    let target_k = cmd.curvature_cmd.clamp(-params.k_max, params.k_max);
    let max_dk = params.curvature_rate_max * dt;
    let k = (state.curvature + (target_k - state.curvature).clamp(-max_dk, max_dk))
        .clamp(-params.k_max, params.k_max);

    let accel = cmd.accel_cmd.clamp(-params.a_brake_max, params.a_long_max);
    let v0 = state.speed.clamp(0.0, params.v_max);
    let (v1, distance) = integrate_speed(v0, accel, params.v_max, dt);

    let dtheta = k * distance;
    let (dx, dy) = if k.abs() > STRAIGHT_CURVATURE {
        let chord = 2.0 * (0.5 * dtheta).sin() / k;
        let mid = state.heading + 0.5 * dtheta;
        (chord * mid.cos(), chord * mid.sin())
    } else {
        (
            distance * state.heading.cos(),
            distance * state.heading.sin(),
        )
    };

    Ok(VehicleState {
        x: state.x + dx,
        y: state.y + dy,
        heading: wrap_angle(state.heading + dtheta),
        speed: v1,
        time: state.time + dt,
        curvature: k,
    })
}

/// Speed after `dt` under constant `accel`, saturating at 0 and `v_max`, and
/// the exact distance covered.
fn integrate_speed(v0: f64, accel: f64, v_max: f64, dt: f64) -> (f64, f64) {
    if accel < 0.0 {
        let t_stop = -v0 / accel;
        if t_stop < dt {
            return (0.0, 0.5 * v0 * t_stop);
        }
    } else if accel > 0.0 {
        let t_cap = (v_max - v0) / accel;
        if t_cap < dt {
            return (v_max, 0.5 * (v0 + v_max) * t_cap + v_max * (dt - t_cap));
        }
    }
    let v1 = v0 + accel * dt;
    (v1, 0.5 * (v0 + v1) * dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cmd(k: f64, a: f64) -> ControlCommand {
        ControlCommand {
            curvature_cmd: k,
            accel_cmd: a,
            emergency: false,
        }
    }

    fn cruising(speed: f64, curvature: f64) -> VehicleState {
        VehicleState {
            speed,
            curvature,
            ..VehicleState::default()
        }
    }

    #[test]
    fn straight_motion() {
        let s = step(
            &cruising(1.0, 0.0),
            &cmd(0.0, 0.0),
            &VehicleParams::default(),
            1.0,
        )
        .unwrap();
        assert_eq!(s.x, 1.0);
        assert_eq!(s.y, 0.0);
        assert_eq!(s.heading, 0.0);
        assert_eq!(s.time, 1.0);
    }

    #[test]
    fn full_circle_returns_home() {
        let params = VehicleParams::default();
        let period = 2.0 * PI / (0.2 * 1.0);
        let n = 1000;
        let dt = period / n as f64;
        let mut s = cruising(1.0, 0.2);
        let center = Point2::new(0.0, 5.0);
        for _ in 0..n {
            s = step(&s, &cmd(0.2, 0.0), &params, dt).unwrap();
            // oracle: analytic circle of radius 1/k about (0, 5)
            assert!((s.position().distance(center) - 5.0).abs() < 1e-9);
        }
        assert!(s.position().norm() < 1e-6, "{:?}", s.position());
    }

    #[test]
    fn braking_is_clamped() {
        let params = VehicleParams::default();
        let s = step(&cruising(2.0, 0.0), &cmd(0.0, -10.0), &params, 0.1).unwrap();
        assert!((s.speed - 1.7).abs() < 1e-12);
        // stops within the step and never reverses
        let s = step(&cruising(0.2, 0.0), &cmd(0.0, -10.0), &params, 0.5).unwrap();
        assert_eq!(s.speed, 0.0);
        assert!((s.x - 0.2 * 0.2 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn speed_capped_at_v_max() {
        let params = VehicleParams::default();
        let s = step(&cruising(2.9, 0.0), &cmd(0.0, 1.5), &params, 1.0).unwrap();
        assert_eq!(s.speed, 3.0);
    }

    #[test]
    fn curvature_slews_and_saturates() {
        let params = VehicleParams::default();
        let s = step(&cruising(1.0, 0.0), &cmd(5.0, 0.0), &params, 0.1).unwrap();
        assert!((s.curvature - 0.06).abs() < 1e-12);
        let mut s = cruising(1.0, 0.0);
        for _ in 0..100 {
            s = step(&s, &cmd(5.0, 0.0), &params, 0.1).unwrap();
            assert!(s.curvature.abs() <= K_MAX);
        }
        assert_eq!(s.curvature, K_MAX);
    }

    #[test]
    fn rejects_bad_timestep() {
        let p = VehicleParams::default();
        let s = VehicleState::default();
        for dt in [0.0, -0.1, 1.5, f64::NAN] {
            assert!(step(&s, &cmd(0.0, 0.0), &p, dt).is_err());
        }
    }
}
