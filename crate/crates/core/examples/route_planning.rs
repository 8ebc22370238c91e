//! Shortest-route search on the campus map.

use cybercar::global_planner::{plan_route, RouteError};
use cybercar::map_model::parse_map;
use cybercar::scenarios::ITINERARY_MAP;
use cybercar::Point2;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let map = parse_map(ITINERARY_MAP)?;
    println!("{} nodes, {} edges", map.nodes().len(), map.edges().len());

    let route = plan_route(&map, Point2::new(0.0, 0.0), Point2::new(20.0, 18.0))?;
    println!("route {:.2} m:", route.total_length);
    for (id, p) in route.nodes.iter().zip(&route.waypoints) {
        println!("  {id:<10} ({:7.2}, {:7.2})", p.x, p.y);
    }

    // the roundabout is one-way: going back a quarter turn means going round
    match plan_route(&map, Point2::new(84.0, 0.0), Point2::new(63.5, -8.5)) {
        Ok(r) => println!(
            "east -> south-west: {:.2} m via {} nodes",
            r.total_length,
            r.nodes.len()
        ),
        Err(RouteError::NoRoute { from, to }) => println!("no route from {from} to {to}"),
        Err(e) => return Err(e.into()),
    }
    Ok(())
}
