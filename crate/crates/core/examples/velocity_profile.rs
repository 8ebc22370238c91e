//! Speed targets along the campus route for each comfort level.

use cybercar::global_planner::plan_route;
use cybercar::local_planner::{
    build_geometry, profile_velocity, sample_trajectory, ComfortClass, ComfortLevel,
};
use cybercar::map_model::parse_map;
use cybercar::scenarios::ITINERARY_MAP;
use cybercar::Point2;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let map = parse_map(ITINERARY_MAP)?;
    let route = plan_route(&map, Point2::new(0.0, 0.0), Point2::new(20.0, 18.0))?;
    let sampled = sample_trajectory(&build_geometry(&route, 4.0)?, 0.25)?;

    for class in [
        ComfortClass::Comfortable,
        ComfortClass::Normal,
        ComfortClass::Aggressive,
    ] {
        let comfort = ComfortLevel::new(class);
        let traj = profile_velocity(&sampled, comfort, 3.0);
        let min_curve_speed = traj
            .points
            .iter()
            .filter(|p| p.curvature.abs() > 0.01)
            .map(|p| p.target_speed)
            .fold(f64::INFINITY, f64::min);
        // travel time if the profile were followed exactly
        let time: f64 = traj
            .points
            .windows(2)
            .map(|w| {
                let ds = w[1].arc_length - w[0].arc_length;
                let v = 0.5 * (w[0].target_speed + w[1].target_speed);
                if v > 0.0 {
                    ds / v
                } else {
                    0.0
                }
            })
            .sum();
        println!(
            "{comfort:<12} a_lat {:.1} m/s²  slowest curve point {:.2} m/s  ideal time {:.1} s",
            comfort.a_lat_max, min_curve_speed, time
        );
    }
    Ok(())
}
