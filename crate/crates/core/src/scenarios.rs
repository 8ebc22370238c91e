//! Built-in scenarios used by the examples, tests and the `demo` CLI
//! command. Map sources live in `data/`.

use crate::geometry::Point2;
use crate::harness::{self, HarnessError, Scenario};
use crate::local_planner::{ComfortClass, ComfortLevel};
use crate::map_model::{parse_map, MapGraph, ObstacleSpec};

pub const ITINERARY_MAP: &str = include_str!("../data/inria_itinerary.map");
pub const TENT_LOOP_MAP: &str = include_str!("../data/leon_tent_loop.map");
pub const U_TURN_MAP: &str = include_str!("../data/leon_u_turn.map");
pub const STRAIGHT_MAP: &str = include_str!("../data/campus_straight.map");
pub const SINGLE_EDGE_MAP: &str = include_str!("../data/single_edge.map");

/// Width and depth of the square the tent-loop and U-turn maps fit in, m.
pub const SQUARE_SIZE: (f64, f64) = (40.0, 27.0);

fn map(text: &str) -> MapGraph {
    parse_map(text).expect("built-in maps are valid")
}

/// Campus itinerary with four timed stops: on a straight 25 m from the
/// start, inside a roundabout, on a curve and at a pedestrian crossing.
pub fn itinerary() -> Scenario {
    let mut s = Scenario::new(
        map(ITINERARY_MAP),
        Point2::new(0.0, 0.0),
        Point2::new(20.0, 18.0),
    );
    s.comfort = ComfortLevel::new(ComfortClass::Normal);
    s.planner.corner_offset = 4.0;
    s.max_sim_time = 400.0;
    s
}

/// Loop around the tent in the 40 x 27 m square.
pub fn tent_loop() -> Scenario {
    let mut s = Scenario::new(
        map(TENT_LOOP_MAP),
        Point2::new(8.0, 4.0),
        Point2::new(4.0, 10.0),
    );
    s.v_cruise = 2.0;
    s.planner.corner_offset = 4.0;
    s.max_sim_time = 200.0;
    s
}

/// Out-and-back route in the 40 x 27 m square, turning around at the east
/// side.
pub fn u_turn() -> Scenario {
    let mut s = Scenario::new(
        map(U_TURN_MAP),
        Point2::new(4.0, 7.0),
        Point2::new(4.0, 16.0),
    );
    s.v_cruise = 2.0;
    s.planner.corner_offset = 4.5;
    s.max_sim_time = 200.0;
    s
}

/// Straight road without obstacles, cruising at 2 m/s.
pub fn straight() -> Scenario {
    let mut s = Scenario::new(
        map(STRAIGHT_MAP),
        Point2::new(0.0, 0.0),
        Point2::new(80.0, 0.0),
    );
    s.v_cruise = 2.0;
    s.max_sim_time = 200.0;
    s
}

/// Position of the obstacle on the straight road.
pub const OBSTACLE_POSITION: Point2 = Point2 { x: 50.0, y: 0.0 };
/// The obstacle shows up when the vehicle is this far from it, m.
pub const OBSTACLE_REVEAL_DISTANCE: f64 = 15.0;
/// How long the obstacle stays on the road, s.
pub const OBSTACLE_DWELL: f64 = 8.0;

/// [`straight`] with an obstacle that appears on the road once the vehicle
/// is [`OBSTACLE_REVEAL_DISTANCE`] short of it and clears
/// [`OBSTACLE_DWELL`] seconds later.
///
/// The appearance time is found by simulating the obstacle-free run first.
pub fn emergency_stop() -> Result<Scenario, HarnessError> {
    let base = straight();
    let probe = harness::run(&base)?;
    let reveal = probe
        .trace
        .iter()
        .find(|r| OBSTACLE_POSITION.x - r.x <= OBSTACLE_REVEAL_DISTANCE)
        .map(|r| r.time)
        .ok_or_else(|| HarnessError::Config("probe run never reached the obstacle".into()))?;
    let obstacle = ObstacleSpec {
        position: OBSTACLE_POSITION,
        radius: 0.5,
        appears_at: reveal,
        clears_at: Some(reveal + OBSTACLE_DWELL),
    };
    let map = base
        .map
        .with_obstacles(vec![obstacle])
        .map_err(|e| HarnessError::Config(e.to_string()))?;
    Ok(Scenario { map, ..base })
}

/// One straight edge, no stops.
pub fn single_edge() -> Scenario {
    let mut s = Scenario::new(
        map(SINGLE_EDGE_MAP),
        Point2::new(0.0, 0.0),
        Point2::new(20.0, 0.0),
    );
    s.max_sim_time = 60.0;
    s
}

/// Every built-in scenario except the emergency one, by name.
pub fn corpus() -> Vec<(&'static str, Scenario)> {
    vec![
        ("itinerary", itinerary()),
        ("tent_loop", tent_loop()),
        ("u_turn", u_turn()),
        ("straight", straight()),
        ("single_edge", single_edge()),
    ]
}
