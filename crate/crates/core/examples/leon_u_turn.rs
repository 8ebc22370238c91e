//! Manoeuvres in the 40 x 27 m square: a loop around the tent and an
//! out-and-back route that has to turn around.

use cybercar::harness::run;
use cybercar::scenarios::{self, SQUARE_SIZE};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for (name, scenario) in [
        ("tent loop", scenarios::tent_loop()),
        ("u-turn", scenarios::u_turn()),
    ] {
        let out = run(&scenario)?;
        let (lo, hi) = out.trace.iter().fold(
            (
                (f64::INFINITY, f64::INFINITY),
                (f64::NEG_INFINITY, f64::NEG_INFINITY),
            ),
            |(lo, hi), r| {
                (
                    (lo.0.min(r.x), lo.1.min(r.y)),
                    (hi.0.max(r.x), hi.1.max(r.y)),
                )
            },
        );
        let m = &out.metrics;
        println!("{name}: completed {}", m.route_completed);
        println!(
            "  swept x [{:.2}, {:.2}], y [{:.2}, {:.2}] inside {} x {} m",
            lo.0, hi.0, lo.1, hi.1, SQUARE_SIZE.0, SQUARE_SIZE.1
        );
        println!(
            "  max lateral error {:.3} m, peak curvature {:.3} 1/m",
            m.lateral_error_max, m.curvature_max
        );
        if name == "u-turn" {
            println!(
                "  turned around within {:.2} m",
                m.u_turn_extent.unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}
