use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::trajectory::LocalTrajectory;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComfortClass {
    Comfortable,
    Normal,
    Aggressive,
}

/// Passenger comfort setting: lateral and longitudinal acceleration bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComfortLevel {
    pub level: ComfortClass,
    /// m/s²
    pub a_lat_max: f64,
    /// m/s², used for both acceleration and deceleration ramps.
    pub a_long_max: f64,
}

impl ComfortLevel {
    pub const fn new(level: ComfortClass) -> Self {
        let a = match level {
            ComfortClass::Comfortable => 0.5,
            ComfortClass::Normal => 1.0,
            ComfortClass::Aggressive => 1.5,
        };
        Self {
            level,
            a_lat_max: a,
            a_long_max: a,
        }
    }
}

impl Default for ComfortLevel {
    fn default() -> Self {
        Self::new(ComfortClass::Normal)
    }
}

impl FromStr for ComfortLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let level = match s {
            "comfortable" => ComfortClass::Comfortable,
            "normal" => ComfortClass::Normal,
            "aggressive" => ComfortClass::Aggressive,
            other => return Err(format!("unknown comfort level `{other}`")),
        };
        Ok(Self::new(level))
    }
}

impl fmt::Display for ComfortLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self.level {
            ComfortClass::Comfortable => "comfortable",
            ComfortClass::Normal => "normal",
            ComfortClass::Aggressive => "aggressive",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedProfile {
    pub comfort: ComfortLevel,
    pub v_cruise: f64,
}

/// Assigns target speeds: the pointwise cap is the minimum of cruise speed,
/// edge speed limit and the lateral-acceleration curve speed; stops and the
/// final point are pinned to zero; forward and backward passes then bound
/// acceleration and deceleration by `a_long_max`.
pub fn profile_velocity(
    traj: &LocalTrajectory,
    comfort: ComfortLevel,
    v_cruise: f64,
) -> LocalTrajectory {
    let mut out = traj.clone();
    out.profile = Some(SpeedProfile { comfort, v_cruise });
    let pts = &mut out.points;
    if pts.is_empty() {
        return out;
    }

    for p in pts.iter_mut() {
        let mut cap = v_cruise.min(p.speed_limit);
        if p.curvature != 0.0 {
            cap = cap.min((comfort.a_lat_max / p.curvature.abs()).sqrt());
        }
        if p.stop.is_some() {
            cap = 0.0;
        }
        p.target_speed = cap.max(0.0);
    }
    pts.last_mut().expect("non-empty").target_speed = 0.0;

    let two_a = 2.0 * comfort.a_long_max;
    for i in 1..pts.len() {
        let ds = pts[i].arc_length - pts[i - 1].arc_length;
        let reachable = (pts[i - 1].target_speed.powi(2) + two_a * ds).sqrt();
        if pts[i].target_speed > reachable {
            pts[i].target_speed = reachable;
        }
    }
    for i in (0..pts.len() - 1).rev() {
        let ds = pts[i + 1].arc_length - pts[i].arc_length;
        let stoppable = (pts[i + 1].target_speed.powi(2) + two_a * ds).sqrt();
        if pts[i].target_speed > stoppable {
            pts[i].target_speed = stoppable;
        }
    }
    out
}
