use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cybercar::harness::{self, emit_trace, HarnessError, Scenario, TraceFormat};
use cybercar::local_planner::ComfortLevel;
use cybercar::map_model::parse_map;
use cybercar::Point2;

const EXIT_CONFIG: u8 = 1;
const EXIT_NO_ROUTE: u8 = 2;
const EXIT_INCOMPLETE: u8 = 3;

#[derive(Parser)]
#[command(
    version,
    about = "Plan, schedule stops and track a route in closed-loop simulation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a route from start to goal
    Run(RunArgs),
    /// Parse and check a map file
    Validate {
        #[arg(long)]
        map: PathBuf,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    map: PathBuf,
    /// Start position as `x,y`
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    start: Point2,
    /// Goal position as `x,y`
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    goal: Point2,
    /// comfortable, normal or aggressive
    #[arg(long, default_value = "normal")]
    comfort: ComfortLevel,
    /// Cruise speed, m/s
    #[arg(long, default_value_t = 3.0)]
    v_cruise: f64,
    /// Control period, s
    #[arg(long, default_value_t = harness::DEFAULT_DT)]
    dt: f64,
    /// Planning horizon, m
    #[arg(long, default_value_t = harness::DEFAULT_HORIZON)]
    horizon: f64,
    /// Simulation time limit, s
    #[arg(long, default_value_t = 600.0)]
    max_time: f64,
    /// Corner cut-back distance for curve blends, m
    #[arg(long)]
    corner_offset: Option<f64>,
    /// Write the per-cycle trace as CSV
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the trace plots as SVG
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Write the metrics as JSON
    #[arg(long)]
    metrics: Option<PathBuf>,
}

fn parse_point(s: &str) -> Result<Point2, String> {
    let (x, y) = s
        .split_once(',')
        .ok_or_else(|| format!("expected `x,y`, got `{s}`"))?;
    let coord = |v: &str| {
        v.trim()
            .parse::<f64>()
            .ok()
            .filter(|c| c.is_finite())
            .ok_or_else(|| format!("invalid coordinate `{v}`"))
    };
    Ok(Point2::new(coord(x)?, coord(y)?))
}

fn fail(code: u8, msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(code)
}

fn run(args: RunArgs) -> ExitCode {
    let text = match fs::read_to_string(&args.map) {
        Ok(t) => t,
        Err(e) => return fail(EXIT_CONFIG, format!("{}: {e}", args.map.display())),
    };
    let map = match parse_map(&text) {
        Ok(m) => m,
        Err(e) => return fail(EXIT_CONFIG, format!("{}: {e}", args.map.display())),
    };
    let mut scenario = Scenario::new(map, args.start, args.goal);
    scenario.comfort = args.comfort;
    scenario.v_cruise = args.v_cruise;
    scenario.dt = args.dt;
    scenario.horizon = args.horizon;
    scenario.max_sim_time = args.max_time;
    if let Some(d) = args.corner_offset {
        scenario.planner.corner_offset = d;
    }

    let output = match harness::run(&scenario) {
        Ok(o) => o,
        Err(e @ HarnessError::NoRoute(_)) => return fail(EXIT_NO_ROUTE, e),
        Err(e) => return fail(EXIT_CONFIG, e),
    };

    let outputs = [
        (&args.trace, TraceFormat::Csv),
        (&args.plot, TraceFormat::Svg),
    ];
    for (path, format) in outputs {
        if let Some(path) = path {
            if let Err(e) = emit_trace(&output.trace, path, format) {
                return fail(EXIT_CONFIG, format!("{}: {e}", path.display()));
            }
        }
    }
    if let Some(path) = &args.metrics {
        let json = serde_json::to_string_pretty(&output.metrics).expect("metrics serialize");
        if let Err(e) = fs::write(path, json + "\n") {
            return fail(EXIT_CONFIG, format!("{}: {e}", path.display()));
        }
    }

    let m = &output.metrics;
    println!(
        "route {:.1} m, {} cycles, completed: {}",
        output.path.total_length,
        output.trace.len(),
        m.route_completed
    );
    println!(
        "lateral error: mean in curves {:.3} m, max {:.3} m; heading error [{:.3}, {:.3}] rad; max curvature {:.3} 1/m",
        m.lateral_error_mean_curves,
        m.lateral_error_max,
        m.heading_error_min,
        m.heading_error_max,
        m.curvature_max
    );
    for s in &m.stops {
        println!(
            "stop {}: arrived {:.2} s, held {:.2} s",
            s.stop_id, s.arrival_time, s.hold_duration
        );
    }
    if m.route_completed {
        ExitCode::SUCCESS
    } else {
        fail(EXIT_INCOMPLETE, "route not completed within the time limit")
    }
}

fn validate(map: PathBuf) -> ExitCode {
    let result = fs::read_to_string(&map)
        .map_err(|e| e.to_string())
        .and_then(|text| parse_map(&text).map_err(|e| e.to_string()));
    match result {
        Ok(g) => {
            println!(
                "{}: {} nodes, {} edges, {} stops, {} obstacles",
                map.display(),
                g.nodes().len(),
                g.edges().len(),
                g.stops().len(),
                g.obstacles().len()
            );
            ExitCode::SUCCESS
        }
        Err(e) => fail(EXIT_CONFIG, format!("{}: {e}", map.display())),
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match cli.command {
        Command::Run(args) => run(args),
        Command::Validate { map } => validate(map),
    }
}
