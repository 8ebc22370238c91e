//! Node-level route search over the road graph.
//!
//! Routes minimize total edge length. Equal-length routes are ordered by edge
//! count and then by their node-id sequence, so the result is fully
//! deterministic.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{point_segment_distance, Point2};
use crate::map_model::{nearest_node, MapEdge, MapError, MapGraph, NodeId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RouteError {
    #[error("no route from `{from}` to `{to}`")]
    NoRoute { from: NodeId, to: NodeId },
    #[error("map graph has no nodes")]
    EmptyGraph,
}

impl From<MapError> for RouteError {
    fn from(_: MapError) -> Self {
        RouteError::EmptyGraph
    }
}

/// Ordered sequence of intersection points from start to destination.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GlobalPath {
    pub nodes: Vec<NodeId>,
    /// Node positions, parallel to `nodes`.
    pub waypoints: Vec<Point2>,
    pub edges: Vec<MapEdge>,
    pub total_length: f64,
}

impl GlobalPath {
    pub fn segment_count(&self) -> usize {
        self.edges.len()
    }

    /// Index of the node-to-node segment nearest to `p`; ties go to the
    /// earlier segment. `None` for a single-node path.
    pub fn nearest_segment(&self, p: Point2) -> Option<usize> {
        self.waypoints
            .windows(2)
            .enumerate()
            .map(|(i, w)| (i, point_segment_distance(p, w[0], w[1])))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .map(|(i, _)| i)
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Label {
    cost: f64,
    hops: usize,
    /// Node indices from the source, inclusive.
    path: Vec<usize>,
    ids: Vec<NodeId>,
}

impl Eq for Label {}

impl Ord for Label {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cost
            .total_cmp(&other.cost)
            .then(self.hops.cmp(&other.hops))
            .then_with(|| self.ids.cmp(&other.ids))
    }
}

impl PartialOrd for Label {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Plans the minimum-length route between the nodes nearest to `start` and
/// `goal`.
pub fn plan_route(graph: &MapGraph, start: Point2, goal: Point2) -> Result<GlobalPath, RouteError> {
    let (source, _) = nearest_node(graph, start)?;
    let (target, _) = nearest_node(graph, goal)?;
    plan_between(graph, source, target)
}

/// Plans the minimum-length route between two named nodes.
pub fn plan_between(
    graph: &MapGraph,
    source: &NodeId,
    target: &NodeId,
) -> Result<GlobalPath, RouteError> {
    let no_route = || RouteError::NoRoute {
        from: source.clone(),
        to: target.clone(),
    };
    let src = graph.node_index(source).ok_or_else(no_route)?;
    let dst = graph.node_index(target).ok_or_else(no_route)?;

    let n = graph.nodes().len();
    let mut best: Vec<Option<Label>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    let origin = Label {
        cost: 0.0,
        hops: 0,
        path: vec![src],
        ids: vec![source.clone()],
    };
    best[src] = Some(origin.clone());
    heap.push(Reverse(origin));

    while let Some(Reverse(label)) = heap.pop() {
        let u = *label.path.last().expect("labels are non-empty");
        if settled[u] {
            continue;
        }
        settled[u] = true;
        if u == dst {
            return Ok(materialize(graph, &label));
        }
        for edge in graph.outgoing(u) {
            let v = graph.node_index(&edge.to).expect("edges are validated");
            if settled[v] {
                continue;
            }
            let mut path = label.path.clone();
            path.push(v);
            let mut ids = label.ids.clone();
            ids.push(edge.to.clone());
            let candidate = Label {
                cost: label.cost + edge.length,
                hops: label.hops + 1,
                path,
                ids,
            };
            if best[v].as_ref().is_none_or(|b| candidate < *b) {
                best[v] = Some(candidate.clone());
                heap.push(Reverse(candidate));
            }
        }
    }
    Err(no_route())
}

fn materialize(graph: &MapGraph, label: &Label) -> GlobalPath {
    let nodes = label.ids.clone();
    let waypoints = label
        .path
        .iter()
        .map(|&i| graph.nodes()[i].position)
        .collect();
    let edges: Vec<MapEdge> = nodes
        .windows(2)
        .map(|w| {
            graph
                .edge(&w[0], &w[1])
                .expect("consecutive nodes share an edge")
                .clone()
        })
        .collect();
    let total_length = edges.iter().map(|e| e.length).sum();
    GlobalPath {
        nodes,
        waypoints,
        edges,
        total_length,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map_model::parse_map;

    #[test]
    fn degenerate_route() {
        let g = parse_map("node A 0 0 waypoint\nnode B 10 0 waypoint\nedge A B 10 1\n").unwrap();
        let p = plan_route(&g, Point2::new(0.1, 0.0), Point2::new(-0.2, 0.0)).unwrap();
        assert_eq!(p.nodes, vec![NodeId::new("A")]);
        assert!(p.edges.is_empty());
        assert_eq!(p.total_length, 0.0);
        assert_eq!(p.nearest_segment(Point2::ORIGIN), None);
    }

    #[test]
    fn disconnected_components() {
        let g = parse_map(
            "node A 0 0 waypoint\nnode B 10 0 waypoint\nnode C 50 0 waypoint\nnode D 60 0 waypoint\n\
             edge A B 10 1\nedge C D 10 1\n",
        )
        .unwrap();
        let err = plan_route(&g, Point2::new(0.0, 0.0), Point2::new(60.0, 0.0)).unwrap_err();
        assert!(matches!(err, RouteError::NoRoute { .. }));
        // edges are directed
        let err = plan_route(&g, Point2::new(10.0, 0.0), Point2::new(0.0, 0.0)).unwrap_err();
        assert!(matches!(err, RouteError::NoRoute { .. }));
    }

    #[test]
    fn empty_graph() {
        let g = parse_map("").unwrap();
        assert_eq!(
            plan_route(&g, Point2::ORIGIN, Point2::ORIGIN),
            Err(RouteError::EmptyGraph)
        );
    }

    #[test]
    fn prefers_shorter_then_fewer_hops_then_lexicographic() {
        // A->B->D and A->C->D are both 20 m; A->D direct is 20 m too.
        let g = parse_map(
            "node A 0 0 waypoint\nnode B 10 0 waypoint\nnode C 10 0 waypoint\nnode D 20 0 waypoint\n\
             edge A C 10 1\nedge C D 10 1\nedge A B 10 1\nedge B D 10 1\n",
        )
        .unwrap();
        let p = plan_between(&g, &"A".into(), &"D".into()).unwrap();
        let ids: Vec<_> = p.nodes.iter().map(|n| n.as_str()).collect();
        assert_eq!(ids, ["A", "B", "D"]);

        let g2 = parse_map(&format!("{}edge A D 20 1\n", g)).unwrap();
        let p = plan_between(&g2, &"A".into(), &"D".into()).unwrap();
        assert_eq!(p.nodes.len(), 2);
        assert_eq!(p.total_length, 20.0);
    }

    #[test]
    fn nearest_segment_prefers_earlier_on_tie() {
        let g = parse_map(
            "node A 0 0 waypoint\nnode B 10 0 waypoint\nnode C 10 10 waypoint\n\
             edge A B 10 1\nedge B C 10 1\n",
        )
        .unwrap();
        let p = plan_between(&g, &"A".into(), &"C".into()).unwrap();
        assert_eq!(p.nearest_segment(Point2::new(5.0, 1.0)), Some(0));
        assert_eq!(p.nearest_segment(Point2::new(11.0, 5.0)), Some(1));
        assert_eq!(p.nearest_segment(Point2::new(10.0, 0.0)), Some(0));
    }
}
