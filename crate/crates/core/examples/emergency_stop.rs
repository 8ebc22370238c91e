//! An obstacle appears 15 m ahead of the vehicle at cruise speed: full
//! braking, hold while blocked, resume once the road has been clear for a
//! second.

use cybercar::harness::run;
use cybercar::scenarios::{self, OBSTACLE_POSITION};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenario = scenarios::emergency_stop()?;
    let obstacle = &scenario.map.obstacles()[0];
    println!(
        "obstacle at ({}, {}) from t = {:.2} s to t = {:.2} s",
        OBSTACLE_POSITION.x,
        OBSTACLE_POSITION.y,
        obstacle.appears_at,
        obstacle.clears_at.unwrap_or(f64::INFINITY)
    );

    let out = run(&scenario)?;
    let mut was = false;
    for r in &out.trace {
        if r.emergency != was {
            println!(
                "t {:6.2} s  x {:6.2} m  speed {:.3} m/s  emergency {}",
                r.time,
                r.x,
                r.speed,
                if r.emergency { "on" } else { "off" }
            );
            was = r.emergency;
        }
    }
    let closest = out
        .trace
        .iter()
        .filter(|r| r.emergency)
        .map(|r| OBSTACLE_POSITION.x - r.x)
        .fold(f64::INFINITY, f64::min);
    println!("closest approach while stopped: {closest:.2} m");
    println!("route completed: {}", out.metrics.route_completed);
    Ok(())
}
