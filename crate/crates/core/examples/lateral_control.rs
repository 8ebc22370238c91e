//! Closed-loop recovery from a lateral offset on a straight road.

use cybercar::controller::{
    compute_errors, lateral_control, longitudinal_control, ControlCommand, ControllerGains,
};
use cybercar::global_planner::plan_route;
use cybercar::local_planner::{build_geometry, sample_trajectory};
use cybercar::map_model::parse_map;
use cybercar::vehicle_sim::{step, VehicleParams, VehicleState};
use cybercar::Point2;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let map = parse_map("node a 0 0 waypoint\nnode b 100 0 waypoint\nedge a b 100 3\n")?;
    let route = plan_route(&map, Point2::new(0.0, 0.0), Point2::new(100.0, 0.0))?;
    let path = sample_trajectory(&build_geometry(&route, 3.0)?, 0.25)?;

    let gains = ControllerGains::default();
    let params = VehicleParams::default();
    let dt = 0.02;
    let mut vehicle = VehicleState {
        speed: 2.0,
        ..VehicleState::at(Point2::new(0.0, 0.5), 0.0)
    };
    for cycle in 0..=1500 {
        let errors = compute_errors(&vehicle, &path.points)?;
        if cycle % 100 == 0 {
            println!(
                "t {:5.1} s  x {:6.2}  lateral {:+.4} m  heading {:+.4} rad  curvature {:+.4}",
                vehicle.time,
                vehicle.x,
                errors.lateral_error,
                errors.heading_error,
                vehicle.curvature
            );
        }
        let cmd = ControlCommand {
            curvature_cmd: lateral_control(&errors, &gains, params.k_max),
            accel_cmd: longitudinal_control(vehicle.speed, 2.0, gains.speed_gain, 1.0, 3.0),
            emergency: false,
        };
        vehicle = step(&vehicle, &cmd, &params, dt)?;
    }
    Ok(())
}
