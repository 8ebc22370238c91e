//! Road-network database: nodes, directed edges, stop points and obstacles.
//!
//! Maps are stored as line-oriented UTF-8 text, one record per line:
//!
//! ```text
//! # comment
//! node <id> <x> <y> <kind>
//! edge <from> <to> <length> <speed_limit>
//! stop <id> <x> <y> <duration_s>
//! obstacle <x> <y> <radius> <appears_at_s> [<clears_at_s>]
//! ```
//!
//! `kind` is one of `waypoint`, `intersection`, `roundabout_point`, `station`.
//! Numbers must be plain decimals (no exponent, `inf` or `nan`).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Point2;

/// Slack allowed when comparing an edge length against the straight-line
/// distance between its endpoints.
pub const EDGE_LENGTH_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MapError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("semantic error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Semantic {
        line: Option<usize>,
        message: String,
    },
    #[error("map graph has no nodes")]
    EmptyGraph,
}

impl MapError {
    fn semantic(line: Option<usize>, message: impl Into<String>) -> Self {
        MapError::Semantic {
            line,
            message: message.into(),
        }
    }
}

macro_rules! string_id {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(id: impl Into<String>) -> Self {
                Self(id.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }
    };
}

string_id!(
    /// Identifier of a map node.
    NodeId
);
string_id!(
    /// Identifier of a scheduled stop point.
    StopId
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Waypoint,
    Intersection,
    RoundaboutPoint,
    Station,
}

impl NodeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Waypoint => "waypoint",
            NodeKind::Intersection => "intersection",
            NodeKind::RoundaboutPoint => "roundabout_point",
            NodeKind::Station => "station",
        }
    }
}

impl FromStr for NodeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "waypoint" => Ok(NodeKind::Waypoint),
            "intersection" => Ok(NodeKind::Intersection),
            "roundabout_point" => Ok(NodeKind::RoundaboutPoint),
            "station" => Ok(NodeKind::Station),
            other => Err(format!("unknown node kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapNode {
    pub id: NodeId,
    pub position: Point2,
    pub kind: NodeKind,
}

/// A directed drivable connection between two nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapEdge {
    pub from: NodeId,
    pub to: NodeId,
    /// Meters; never shorter than the straight line between the endpoints.
    pub length: f64,
    /// m/s, strictly positive.
    pub speed_limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StopPointSpec {
    pub id: StopId,
    pub position: Point2,
    /// Dwell time in seconds once the vehicle has come to rest at the stop.
    pub stop_duration: f64,
}

/// A static obstacle that becomes present at `appears_at` and, optionally,
/// is removed at `clears_at` (simulation seconds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSpec {
    pub position: Point2,
    pub radius: f64,
    pub appears_at: f64,
    pub clears_at: Option<f64>,
}

impl ObstacleSpec {
    pub fn is_active(&self, now: f64) -> bool {
        now >= self.appears_at && self.clears_at.is_none_or(|c| now < c)
    }
}

/// Validated road network plus the stops and obstacles declared alongside it.
///
/// Immutable once built; nodes keep their document order so that
/// serialization round-trips.
#[derive(Debug, Clone)]
pub struct MapGraph {
    nodes: Vec<MapNode>,
    edges: Vec<MapEdge>,
    stops: Vec<StopPointSpec>,
    obstacles: Vec<ObstacleSpec>,
    index: BTreeMap<NodeId, usize>,
    outgoing: Vec<Vec<usize>>,
}

impl PartialEq for MapGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes
            && self.edges == other.edges
            && self.stops == other.stops
            && self.obstacles == other.obstacles
    }
}

impl MapGraph {
    pub fn new(
        nodes: Vec<MapNode>,
        edges: Vec<MapEdge>,
        stops: Vec<StopPointSpec>,
        obstacles: Vec<ObstacleSpec>,
    ) -> Result<Self, MapError> {
        Self::build(
            nodes.into_iter().map(|n| (None, n)).collect(),
            edges.into_iter().map(|e| (None, e)).collect(),
            stops.into_iter().map(|s| (None, s)).collect(),
            obstacles.into_iter().map(|o| (None, o)).collect(),
        )
    }

    fn build(
        nodes: Vec<(Option<usize>, MapNode)>,
        edges: Vec<(Option<usize>, MapEdge)>,
        stops: Vec<(Option<usize>, StopPointSpec)>,
        obstacles: Vec<(Option<usize>, ObstacleSpec)>,
    ) -> Result<Self, MapError> {
        let mut index = BTreeMap::new();
        for (i, (line, node)) in nodes.iter().enumerate() {
            if !node.position.is_finite() {
                return Err(MapError::semantic(
                    *line,
                    format!("node `{}` has non-finite coordinates", node.id),
                ));
            }
            if index.insert(node.id.clone(), i).is_some() {
                return Err(MapError::semantic(
                    *line,
                    format!("duplicate node id `{}`", node.id),
                ));
            }
        }

        let mut outgoing = vec![Vec::new(); nodes.len()];
        let mut pairs = BTreeSet::new();
        for (e, (line, edge)) in edges.iter().enumerate() {
            let resolve = |id: &NodeId| {
                index.get(id).copied().ok_or_else(|| {
                    MapError::semantic(*line, format!("edge references undefined node `{id}`"))
                })
            };
            let from = resolve(&edge.from)?;
            let to = resolve(&edge.to)?;
            if from == to {
                return Err(MapError::semantic(
                    *line,
                    format!("edge `{}` -> `{}` is a self-loop", edge.from, edge.to),
                ));
            }
            if !pairs.insert((from, to)) {
                return Err(MapError::semantic(
                    *line,
                    format!("duplicate edge `{}` -> `{}`", edge.from, edge.to),
                ));
            }
            if !(edge.speed_limit > 0.0 && edge.speed_limit.is_finite()) {
                return Err(MapError::semantic(
                    *line,
                    format!(
                        "edge `{}` -> `{}` has non-positive speed limit {}",
                        edge.from, edge.to, edge.speed_limit
                    ),
                ));
            }
            let straight = nodes[from].1.position.distance(nodes[to].1.position);
            if !edge.length.is_finite() || edge.length < straight - EDGE_LENGTH_TOLERANCE {
                return Err(MapError::semantic(
                    *line,
                    format!(
                        "edge `{}` -> `{}` length {} is below the straight-line distance {}",
                        edge.from, edge.to, edge.length, straight
                    ),
                ));
            }
            outgoing[from].push(e);
        }

        let mut stop_ids = BTreeSet::new();
        for (line, stop) in &stops {
            if !stop_ids.insert(stop.id.clone()) {
                return Err(MapError::semantic(
                    *line,
                    format!("duplicate stop id `{}`", stop.id),
                ));
            }
            if !stop.position.is_finite() {
                return Err(MapError::semantic(
                    *line,
                    format!("stop `{}` has non-finite coordinates", stop.id),
                ));
            }
            if !(stop.stop_duration >= 0.0 && stop.stop_duration.is_finite()) {
                return Err(MapError::semantic(
                    *line,
                    format!(
                        "stop `{}` has invalid duration {}",
                        stop.id, stop.stop_duration
                    ),
                ));
            }
        }

        for (line, obstacle) in &obstacles {
            if !obstacle.position.is_finite() {
                return Err(MapError::semantic(
                    *line,
                    "obstacle has non-finite coordinates",
                ));
            }
            if !(obstacle.radius > 0.0 && obstacle.radius.is_finite()) {
                return Err(MapError::semantic(
                    *line,
                    format!("obstacle radius {} must be positive", obstacle.radius),
                ));
            }
            if !(obstacle.appears_at >= 0.0 && obstacle.appears_at.is_finite()) {
                return Err(MapError::semantic(
                    *line,
                    format!(
                        "obstacle appearance time {} must be >= 0",
                        obstacle.appears_at
                    ),
                ));
            }
            if let Some(clears) = obstacle.clears_at {
                if !(clears > obstacle.appears_at && clears.is_finite()) {
                    return Err(MapError::semantic(
                        *line,
                        format!("obstacle clear time {clears} must follow its appearance"),
                    ));
                }
            }
        }

        Ok(Self {
            nodes: nodes.into_iter().map(|(_, n)| n).collect(),
            edges: edges.into_iter().map(|(_, e)| e).collect(),
            stops: stops.into_iter().map(|(_, s)| s).collect(),
            obstacles: obstacles.into_iter().map(|(_, o)| o).collect(),
            index,
            outgoing,
        })
    }

    pub fn nodes(&self) -> &[MapNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[MapEdge] {
        &self.edges
    }

    pub fn stops(&self) -> &[StopPointSpec] {
        &self.stops
    }

    pub fn obstacles(&self) -> &[ObstacleSpec] {
        &self.obstacles
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: &NodeId) -> Option<&MapNode> {
        self.index.get(id).map(|&i| &self.nodes[i])
    }

    pub(crate) fn node_index(&self, id: &NodeId) -> Option<usize> {
        self.index.get(id).copied()
    }

    /// Edges leaving the node at `node_index`, in document order.
    pub(crate) fn outgoing(&self, node_index: usize) -> impl Iterator<Item = &MapEdge> {
        self.outgoing[node_index].iter().map(|&e| &self.edges[e])
    }

    pub fn edge(&self, from: &NodeId, to: &NodeId) -> Option<&MapEdge> {
        let i = self.node_index(from)?;
        self.outgoing(i).find(|e| &e.to == to)
    }

    /// Returns a copy of this graph with a different obstacle list.
    pub fn with_obstacles(&self, obstacles: Vec<ObstacleSpec>) -> Result<Self, MapError> {
        Self::new(
            self.nodes.clone(),
            self.edges.clone(),
            self.stops.clone(),
            obstacles,
        )
    }

    /// Returns a copy of this graph with a different stop list.
    pub fn with_stops(&self, stops: Vec<StopPointSpec>) -> Result<Self, MapError> {
        Self::new(
            self.nodes.clone(),
            self.edges.clone(),
            stops,
            self.obstacles.clone(),
        )
    }

    /// Renders the graph in the map text format accepted by [`parse_map`].
    pub fn to_map_string(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for MapGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for n in &self.nodes {
            writeln!(
                f,
                "node {} {} {} {}",
                n.id,
                n.position.x,
                n.position.y,
                n.kind.as_str()
            )?;
        }
        for e in &self.edges {
            writeln!(f, "edge {} {} {} {}", e.from, e.to, e.length, e.speed_limit)?;
        }
        for s in &self.stops {
            writeln!(
                f,
                "stop {} {} {} {}",
                s.id, s.position.x, s.position.y, s.stop_duration
            )?;
        }
        for o in &self.obstacles {
            write!(
                f,
                "obstacle {} {} {} {}",
                o.position.x, o.position.y, o.radius, o.appears_at
            )?;
            if let Some(c) = o.clears_at {
                write!(f, " {c}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

struct Token<'a> {
    text: &'a str,
    column: usize,
}

struct Record<'a> {
    line: usize,
    tokens: Vec<Token<'a>>,
}

impl<'a> Record<'a> {
    fn error(&self, column: usize, message: impl Into<String>) -> MapError {
        MapError::Syntax {
            line: self.line,
            column,
            message: message.into(),
        }
    }

    fn expect_fields(&self, allowed: &[usize]) -> Result<(), MapError> {
        let got = self.tokens.len() - 1;
        if allowed.contains(&got) {
            return Ok(());
        }
        let column = self
            .tokens
            .get(allowed[0] + 1)
            .map_or_else(|| self.end_column(), |t| t.column);
        Err(self.error(
            column,
            format!(
                "`{}` record expects {} fields, found {got}",
                self.tokens[0].text,
                allowed
                    .iter()
                    .map(|n| n.to_string())
                    .collect::<Vec<_>>()
                    .join(" or ")
            ),
        ))
    }

    fn end_column(&self) -> usize {
        self.tokens
            .last()
            .map_or(1, |t| t.column + t.text.chars().count())
    }

    fn text(&self, i: usize) -> &'a str {
        self.tokens[i].text
    }

    fn number(&self, i: usize) -> Result<f64, MapError> {
        let tok = &self.tokens[i];
        parse_decimal(tok.text).ok_or_else(|| {
            self.error(
                tok.column,
                format!("`{}` is not a decimal number", tok.text),
            )
        })
    }
}

fn parse_decimal(s: &str) -> Option<f64> {
    let digits = s.strip_prefix(['-', '+']).unwrap_or(s);
    let mut parts = digits.splitn(2, '.');
    let int = parts.next().unwrap_or("");
    let frac = parts.next();
    let all_digits = |p: &str| p.bytes().all(|b| b.is_ascii_digit());
    let well_formed = all_digits(int)
        && frac.is_none_or(all_digits)
        && (!int.is_empty() || frac.is_some_and(|f| !f.is_empty()));
    if !well_formed {
        return None;
    }
    s.parse().ok()
}

/// Parses and validates a map document.
pub fn parse_map(text: &str) -> Result<MapGraph, MapError> {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    let mut stops = Vec::new();
    let mut obstacles = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("");
        let tokens: Vec<Token> = tokenize(content);
        if tokens.is_empty() {
            continue;
        }
        let rec = Record {
            line: i + 1,
            tokens,
        };
        let line = Some(rec.line);
        match rec.text(0) {
            "node" => {
                rec.expect_fields(&[4])?;
                let kind = rec
                    .text(4)
                    .parse::<NodeKind>()
                    .map_err(|m| rec.error(rec.tokens[4].column, m))?;
                nodes.push((
                    line,
                    MapNode {
                        id: NodeId::new(rec.text(1)),
                        position: Point2::new(rec.number(2)?, rec.number(3)?),
                        kind,
                    },
                ));
            }
            "edge" => {
                rec.expect_fields(&[4])?;
                edges.push((
                    line,
                    MapEdge {
                        from: NodeId::new(rec.text(1)),
                        to: NodeId::new(rec.text(2)),
                        length: rec.number(3)?,
                        speed_limit: rec.number(4)?,
                    },
                ));
            }
            "stop" => {
                rec.expect_fields(&[4])?;
                stops.push((
                    line,
                    StopPointSpec {
                        id: StopId::new(rec.text(1)),
                        position: Point2::new(rec.number(2)?, rec.number(3)?),
                        stop_duration: rec.number(4)?,
                    },
                ));
            }
            "obstacle" => {
                rec.expect_fields(&[4, 5])?;
                let clears_at = if rec.tokens.len() == 6 {
                    Some(rec.number(5)?)
                } else {
                    None
                };
                obstacles.push((
                    line,
                    ObstacleSpec {
                        position: Point2::new(rec.number(1)?, rec.number(2)?),
                        radius: rec.number(3)?,
                        appears_at: rec.number(4)?,
                        clears_at,
                    },
                ));
            }
            other => {
                return Err(rec.error(
                    rec.tokens[0].column,
                    format!("unknown record tag `{other}`"),
                ))
            }
        }
    }

    MapGraph::build(nodes, edges, stops, obstacles)
}

fn tokenize(content: &str) -> Vec<Token<'_>> {
    let mut tokens = Vec::new();
    let mut start = None;
    for (col, (byte, ch)) in content.char_indices().enumerate() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some((byte, col + 1)),
            (true, Some((s, c))) => {
                tokens.push(Token {
                    text: &content[s..byte],
                    column: c,
                });
                start = None;
            }
            _ => {}
        }
    }
    if let Some((s, c)) = start {
        tokens.push(Token {
            text: &content[s..],
            column: c,
        });
    }
    tokens
}

/// Finds the node closest to `p`. Ties go to the lexicographically smallest id.
pub fn nearest_node(graph: &MapGraph, p: Point2) -> Result<(&NodeId, f64), MapError> {
    graph
        .nodes
        .iter()
        .map(|n| (&n.id, n.position.distance(p)))
        .min_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)))
        .ok_or(MapError::EmptyGraph)
}
