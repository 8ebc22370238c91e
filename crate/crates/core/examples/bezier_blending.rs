//! Corner blending: straights cut back at each corner and joined by a cubic
//! Bézier with matching end tangents.

use cybercar::global_planner::plan_route;
use cybercar::local_planner::{bezier_curvature, build_geometry, Shape};
use cybercar::map_model::parse_map;
use cybercar::vehicle_sim::K_MAX;
use cybercar::Point2;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let map = parse_map(
        "node a 0 0 waypoint\nnode b 10 0 waypoint\nnode c 10 10 waypoint\n\
         edge a b 10 2\nedge b c 10 2\n",
    )?;
    let route = plan_route(&map, Point2::new(0.0, 0.0), Point2::new(10.0, 10.0))?;

    for offset in [1.0, 2.0, 3.0, 4.0, 5.0] {
        let primitives = build_geometry(&route, offset)?;
        for p in &primitives {
            let Shape::Bezier(curve) = &p.shape else {
                continue;
            };
            let peak = (0..=200)
                .map(|i| bezier_curvature(curve, i as f64 / 200.0).map(f64::abs))
                .collect::<Result<Vec<_>, _>>()?
                .into_iter()
                .fold(0.0, f64::max);
            let [p0, p1, p2, p3] = curve.points;
            println!(
                "offset {offset}: ({}, {}) ({}, {}) ({}, {}) ({}, {})  length {:.3} m  peak curvature {:.3} 1/m{}",
                p0.x, p0.y, p1.x, p1.y, p2.x, p2.y, p3.x, p3.y,
                curve.length(),
                peak,
                if peak > K_MAX { "  (beyond steering limit)" } else { "" }
            );
        }
    }
    Ok(())
}
