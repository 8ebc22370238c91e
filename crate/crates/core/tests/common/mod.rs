//! Independent reference implementations the library is checked against.

#![allow(dead_code)]

use cybercar::local_planner::{CubicBezier, LocalTrajectory};
use cybercar::map_model::{MapEdge, MapGraph, MapNode, NodeId, NodeKind};
use cybercar::Point2;
use rand::Rng;

/// Random directed graph with `n` nodes in a 100 m square. Edge lengths are
/// the chord stretched by up to 50 %.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, edge_probability: f64) -> MapGraph {
    let nodes: Vec<MapNode> = (0..n)
        .map(|i| MapNode {
            id: NodeId::new(format!("n{i}")),
            position: Point2::new(rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)),
            kind: NodeKind::Waypoint,
        })
        .collect();
    let mut edges = Vec::new();
    for a in &nodes {
        for b in &nodes {
            if a.id != b.id && rng.gen_bool(edge_probability) {
                let chord = a.position.distance(b.position);
                edges.push(MapEdge {
                    from: a.id.clone(),
                    to: b.id.clone(),
                    length: chord * rng.gen_range(1.0..1.5),
                    speed_limit: 3.0,
                });
            }
        }
    }
    MapGraph::new(nodes, edges, Vec::new(), Vec::new()).expect("generated graph is valid")
}

/// Shortest simple-path length by exhaustive depth-first enumeration.
pub fn enumerate_shortest(graph: &MapGraph, from: &NodeId, to: &NodeId) -> Option<f64> {
    fn dfs(
        graph: &MapGraph,
        at: &NodeId,
        to: &NodeId,
        visited: &mut Vec<NodeId>,
        cost: f64,
        best: &mut Option<f64>,
    ) {
        if at == to {
            *best = Some(best.map_or(cost, |b: f64| b.min(cost)));
            return;
        }
        for e in graph.edges().iter().filter(|e| &e.from == at) {
            if visited.contains(&e.to) {
                continue;
            }
            visited.push(e.to.clone());
            dfs(graph, &e.to, to, visited, cost + e.length, best);
            visited.pop();
        }
    }
    let mut best = None;
    dfs(graph, from, to, &mut vec![from.clone()], 0.0, &mut best);
    best
}

/// Signed curvature of `b` at `t` by central differences of sampled points.
pub fn finite_difference_curvature(b: &CubicBezier, t: f64, h: f64) -> f64 {
    let (p0, p1, p2) = (b.eval(t - h), b.eval(t), b.eval(t + h));
    let d1 = (p2 - p0) * (0.5 / h);
    let d2 = (p2 - p1 * 2.0 + p0) * (1.0 / (h * h));
    d1.cross(d2) / d1.norm().powi(3)
}

/// Checks the curve-speed cap, the longitudinal feasibility inequalities and
/// zero speed at stops.
pub fn check_profile(traj: &LocalTrajectory, a_lat: f64, a_long: f64) -> Result<(), String> {
    const EPS: f64 = 1e-9;
    for (i, p) in traj.points.iter().enumerate() {
        let v = p.target_speed;
        if v < 0.0 {
            return Err(format!("point {i}: negative speed {v}"));
        }
        if v * v * p.curvature.abs() > a_lat + EPS {
            return Err(format!(
                "point {i}: v²|k| = {} > {a_lat}",
                v * v * p.curvature.abs()
            ));
        }
        if p.stop.is_some() && v != 0.0 {
            return Err(format!("point {i}: stop with speed {v}"));
        }
    }
    for (i, w) in traj.points.windows(2).enumerate() {
        let ds = w[1].arc_length - w[0].arc_length;
        let dv2 = w[1].target_speed.powi(2) - w[0].target_speed.powi(2);
        if dv2.abs() > 2.0 * a_long * ds + EPS {
            return Err(format!(
                "points {i}..{}: |Δv²| = {} > 2·a·Δs = {}",
                i + 1,
                dv2.abs(),
                2.0 * a_long * ds
            ));
        }
    }
    Ok(())
}

/// Smallest distance from `p` to the polyline through `points`, by dense
/// resampling of every piece.
pub fn dense_polyline_distance(p: Point2, points: &[Point2]) -> f64 {
    if points.len() == 1 {
        return p.distance(points[0]);
    }
    points
        .windows(2)
        .flat_map(|w| (0..=200).map(move |k| w[0].lerp(w[1], k as f64 / 200.0)))
        .map(|q| q.distance(p))
        .fold(f64::INFINITY, f64::min)
}
