//! Full campus itinerary with four timed stops. Pass a directory to also
//! write `itinerary.csv`, `itinerary.svg` and `itinerary.json` there.

use std::path::PathBuf;

use cybercar::harness::{emit_trace, run, TraceFormat};
use cybercar::scenarios;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    env_logger::init();
    let out = run(&scenarios::itinerary())?;
    let m = &out.metrics;
    println!(
        "completed {} in {:.2} s over {:.1} m",
        m.route_completed,
        out.trace.last().map_or(0.0, |r| r.time),
        out.path.total_length
    );
    for s in &m.stops {
        println!(
            "  {:<14} arrived {:7.2} s  held {:5.2} s  position error {:.3} m",
            s.stop_id.to_string(),
            s.arrival_time,
            s.hold_duration,
            s.position_error.unwrap_or(f64::NAN)
        );
    }
    println!(
        "lateral error in curves: mean {:.3} m; heading error [{:+.3}, {:+.3}] rad; peak curvature {:.3} 1/m",
        m.lateral_error_mean_curves, m.heading_error_min, m.heading_error_max, m.curvature_max
    );

    if let Some(dir) = std::env::args().nth(1).map(PathBuf::from) {
        emit_trace(&out.trace, &dir.join("itinerary.csv"), TraceFormat::Csv)?;
        emit_trace(&out.trace, &dir.join("itinerary.svg"), TraceFormat::Svg)?;
        std::fs::write(dir.join("itinerary.json"), serde_json::to_string_pretty(m)?)?;
        println!("wrote trace, plot and metrics to {}", dir.display());
    }
    Ok(())
}
