//! Stop scheduling by hand: condition checks, insertion into the local
//! trajectory and the release buffer holding back points beyond the stop.

use cybercar::global_planner::plan_route;
use cybercar::local_planner::{
    build_geometry, profile_velocity, sample_trajectory, subdivide_straights, ComfortLevel,
};
use cybercar::map_model::parse_map;
use cybercar::scenarios::ITINERARY_MAP;
use cybercar::stop_scheduler::{
    check_global_conditions, check_local_conditions, insert_stop, ArrivalTolerance, StopBuffer,
    StopPoint, StopState,
};
use cybercar::vehicle_sim::VehicleState;
use cybercar::Point2;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let map = parse_map(ITINERARY_MAP)?;
    let route = plan_route(&map, Point2::new(0.0, 0.0), Point2::new(20.0, 18.0))?;
    let primitives = subdivide_straights(&build_geometry(&route, 4.0)?, 10.0)?;
    let traj = profile_velocity(
        &sample_trajectory(&primitives, 0.25)?,
        ComfortLevel::default(),
        3.0,
    );
    let vehicle = VehicleState::at(Point2::new(0.0, 0.0), 0.0);
    let clipped = traj.window_from(0, 50.0);

    let mut annotated = traj.clone();
    let mut stops: Vec<StopPoint> = map.stops().iter().cloned().map(StopPoint::new).collect();
    for stop in &mut stops {
        if check_global_conditions(stop, &route, 0, vehicle.position(), 50.0) {
            stop.advance(StopState::Buffered)?;
            if let Some(i) = check_local_conditions(stop, &clipped)? {
                annotated = insert_stop(&annotated, stop, i, 0.0)?;
            }
        }
        println!("{:<14} {:?}", stop.id(), stop.state());
    }

    let mut buffer = StopBuffer::new(annotated, ArrivalTolerance::default());
    let first = buffer.release(&vehicle, 0.0)?;
    let last = first.points.last().expect("released points");
    println!(
        "released {} points up to s = {:.2} m, target speed there {:.2} m/s",
        first.points.len(),
        last.arc_length,
        last.target_speed
    );

    // parked at the stop: the hold starts, nothing more is released
    let stop_at = buffer.trajectory().points[buffer.awaiting_stop().expect("awaiting")].position;
    let parked = VehicleState::at(stop_at, 0.0);
    let hold = buffer
        .release(&parked, 12.0)?
        .hold_started
        .expect("hold begins");
    println!(
        "holding at {} until t = {:.1} s",
        hold.stop_id, hold.resume_at
    );
    let during = buffer.release(&parked, 30.0)?;
    println!("t = 30 s: released {} new points", during.points.len());
    let after = buffer.release(&parked, hold.resume_at)?;
    println!(
        "t = {:.1} s: {:?} completed, released {} more points",
        hold.resume_at,
        after.completed.map(|s| s.to_string()),
        after.points.len()
    );
    Ok(())
}
