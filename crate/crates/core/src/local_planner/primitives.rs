use serde::{Deserialize, Serialize};

use super::bezier::{ArcLengthTable, CubicBezier};
use super::PlanError;
use crate::geometry::Point2;
use crate::global_planner::GlobalPath;

/// Turns smaller than this (radians) count as collinear.
const COLLINEAR_ANGLE: f64 = 1e-9;
/// Turns closer than this to a full reversal cannot be blended.
const REVERSAL_MARGIN: f64 = 1e-6;
const MIN_STRAIGHT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    Straight { start: Point2, end: Point2 },
    Bezier(CubicBezier),
}

/// One straight or curved piece of the local plan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentPrimitive {
    pub shape: Shape,
    /// Ordinal within the plan.
    pub segment_index: usize,
    /// Global path edge this piece starts on.
    pub edge_index: usize,
    /// m/s; for corner blends the lower of the two adjoining edges.
    pub speed_limit: f64,
}

impl SegmentPrimitive {
    pub fn start(&self) -> Point2 {
        match self.shape {
            Shape::Straight { start, .. } => start,
            Shape::Bezier(b) => b.start(),
        }
    }

    pub fn end(&self) -> Point2 {
        match self.shape {
            Shape::Straight { end, .. } => end,
            Shape::Bezier(b) => b.end(),
        }
    }

    pub fn length(&self) -> f64 {
        match self.shape {
            Shape::Straight { start, end } => start.distance(end),
            Shape::Bezier(b) => ArcLengthTable::new(&b).total(),
        }
    }

    pub fn is_curved(&self) -> bool {
        matches!(self.shape, Shape::Bezier(_))
    }

    fn validate(&self) -> Result<(), PlanError> {
        let ok = match self.shape {
            Shape::Straight { start, end } => start != end,
            Shape::Bezier(b) => b.points[0] != b.points[1] && b.points[2] != b.points[3],
        };
        if ok {
            Ok(())
        } else {
            Err(PlanError::DegenerateGeometry(format!(
                "segment {} has a zero-length end tangent",
                self.segment_index
            )))
        }
    }
}

/// Turns a node-level route into straights joined by cubic Bézier corner
/// blends.
///
/// At each interior node the adjoining straights are cut back by
/// `min(corner_offset, half the straight's length)`. The blend's inner
/// control points sit halfway between the cut points and the corner node,
/// so both end tangents coincide with the adjoining straights.
pub fn build_geometry(
    path: &GlobalPath,
    corner_offset: f64,
) -> Result<Vec<SegmentPrimitive>, PlanError> {
    if !(corner_offset > 0.0 && corner_offset.is_finite()) {
        return Err(PlanError::InvalidParameter(format!(
            "corner offset must be positive, got {corner_offset}"
        )));
    }
    let pts = &path.waypoints;
    if pts.len() < 2 {
        return Ok(Vec::new());
    }
    for (i, w) in pts.windows(2).enumerate() {
        if w[0] == w[1] {
            return Err(PlanError::DegenerateGeometry(format!(
                "nodes `{}` and `{}` coincide",
                path.nodes[i],
                path.nodes[i + 1]
            )));
        }
    }

    let limit = |e: usize| path.edges.get(e).map_or(f64::INFINITY, |e| e.speed_limit);
    let mut out: Vec<SegmentPrimitive> = Vec::new();
    let mut push = |shape: Shape, edge_index: usize, speed_limit: f64| {
        out.push(SegmentPrimitive {
            shape,
            segment_index: out.len(),
            edge_index,
            speed_limit,
        });
    };

    let mut cursor = pts[0];
    let mut cursor_edge = 0;
    for j in 1..pts.len() - 1 {
        let (prev, node, next) = (pts[j - 1], pts[j], pts[j + 1]);
        let len_in = prev.distance(node);
        let len_out = node.distance(next);
        let t_in = (node - prev) * (1.0 / len_in);
        let t_out = (next - node) * (1.0 / len_out);
        let turn = t_in.cross(t_out).atan2(t_in.dot(t_out));

        if turn.abs() < COLLINEAR_ANGLE {
            if limit(j - 1) != limit(j) {
                push(
                    Shape::Straight {
                        start: cursor,
                        end: node,
                    },
                    cursor_edge,
                    limit(cursor_edge),
                );
                cursor = node;
                cursor_edge = j;
            }
            continue;
        }
        if turn.abs() > std::f64::consts::PI - REVERSAL_MARGIN {
            return Err(PlanError::DegenerateGeometry(format!(
                "route reverses direction at node `{}`",
                path.nodes[j]
            )));
        }

        let offset = corner_offset.min(0.5 * len_in).min(0.5 * len_out);
        let entry = node - t_in * offset;
        let exit = node + t_out * offset;
        if cursor.distance(entry) > MIN_STRAIGHT {
            push(
                Shape::Straight {
                    start: cursor,
                    end: entry,
                },
                cursor_edge,
                limit(cursor_edge),
            );
        }
        let blend = CubicBezier::new(
            entry,
            entry + t_in * (0.5 * offset),
            exit - t_out * (0.5 * offset),
            exit,
        );
        push(Shape::Bezier(blend), j - 1, limit(j - 1).min(limit(j)));
        cursor = exit;
        cursor_edge = j;
    }
    let last = pts[pts.len() - 1];
    if cursor.distance(last) > MIN_STRAIGHT {
        push(
            Shape::Straight {
                start: cursor,
                end: last,
            },
            cursor_edge,
            limit(cursor_edge),
        );
    }

    for p in &out {
        p.validate()?;
    }
    Ok(out)
}

/// Splits every straight longer than `max_length` into equal pieces and
/// renumbers the plan.
pub fn subdivide_straights(
    primitives: &[SegmentPrimitive],
    max_length: f64,
) -> Result<Vec<SegmentPrimitive>, PlanError> {
    if max_length.is_nan() || max_length <= 0.0 {
        return Err(PlanError::InvalidParameter(format!(
            "maximum straight length must be positive, got {max_length}"
        )));
    }
    let mut out = Vec::with_capacity(primitives.len());
    for prim in primitives {
        match prim.shape {
            Shape::Straight { start, end } => {
                let pieces = (start.distance(end) / max_length).ceil().max(1.0) as usize;
                for k in 0..pieces {
                    let a = start.lerp(end, k as f64 / pieces as f64);
                    let b = if k + 1 == pieces {
                        end
                    } else {
                        start.lerp(end, (k + 1) as f64 / pieces as f64)
                    };
                    out.push(SegmentPrimitive {
                        shape: Shape::Straight { start: a, end: b },
                        segment_index: out.len(),
                        ..prim.clone()
                    });
                }
            }
            Shape::Bezier(_) => out.push(SegmentPrimitive {
                segment_index: out.len(),
                ..prim.clone()
            }),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::global_planner::plan_between;
    use crate::map_model::parse_map;

    fn path(text: &str, from: &str, to: &str) -> GlobalPath {
        let g = parse_map(text).unwrap();
        plan_between(&g, &from.into(), &to.into()).unwrap()
    }

    #[test]
    fn single_edge_is_one_straight() {
        let p = path(
            "node A 0 0 waypoint\nnode B 10 0 waypoint\nedge A B 10 1\n",
            "A",
            "B",
        );
        let prims = build_geometry(&p, 3.0).unwrap();
        assert_eq!(prims.len(), 1);
        assert_eq!(
            prims[0].shape,
            Shape::Straight {
                start: Point2::new(0.0, 0.0),
                end: Point2::new(10.0, 0.0)
            }
        );
    }

    #[test]
    fn single_node_is_empty() {
        let p = path("node A 0 0 waypoint\n", "A", "A");
        assert!(build_geometry(&p, 3.0).unwrap().is_empty());
    }

    #[test]
    fn collinear_nodes_merge() {
        let p = path(
            "node A 0 0 waypoint\nnode B 10 0 waypoint\nnode C 20 0 waypoint\nedge A B 10 1\nedge B C 10 1\n",
            "A",
            "C",
        );
        let prims = build_geometry(&p, 3.0).unwrap();
        assert_eq!(prims.len(), 1);
        assert_eq!(prims[0].end(), Point2::new(20.0, 0.0));
    }

    #[test]
    fn collinear_with_speed_change_splits_without_blend() {
        let p = path(
            "node A 0 0 waypoint\nnode B 10 0 waypoint\nnode C 20 0 waypoint\nedge A B 10 1\nedge B C 10 2\n",
            "A",
            "C",
        );
        let prims = build_geometry(&p, 3.0).unwrap();
        assert_eq!(prims.len(), 2);
        assert!(prims.iter().all(|p| !p.is_curved()));
        assert_eq!((prims[0].speed_limit, prims[1].speed_limit), (1.0, 2.0));
        assert_eq!((prims[0].edge_index, prims[1].edge_index), (0, 1));
    }

    #[test]
    fn right_angle_corner() {
        let p = path(
            "node A 0 0 waypoint\nnode B 10 0 waypoint\nnode C 10 10 waypoint\nedge A B 10 1\nedge B C 10 1\n",
            "A",
            "C",
        );
        let prims = build_geometry(&p, 2.0).unwrap();
        assert_eq!(prims.len(), 3);
        assert_eq!(prims[0].end(), Point2::new(8.0, 0.0));
        let Shape::Bezier(b) = prims[1].shape else {
            panic!("expected blend")
        };
        assert_eq!(b.points[0], Point2::new(8.0, 0.0));
        assert_eq!(b.points[1], Point2::new(9.0, 0.0));
        assert_eq!(b.points[3], Point2::new(10.0, 2.0));
        assert_eq!(prims[2].start(), Point2::new(10.0, 2.0));
        assert_eq!(prims[2].end(), Point2::new(10.0, 10.0));

        // oracle: finite-difference tangents at the blend ends
        let h = 1e-7;
        let t0 = (b.eval(h) - b.eval(0.0)).normalized().unwrap();
        let t1 = (b.eval(1.0) - b.eval(1.0 - h)).normalized().unwrap();
        assert!(t0.distance(Point2::new(1.0, 0.0)) < 1e-6);
        assert!(t1.distance(Point2::new(0.0, 1.0)) < 1e-6);
    }

    #[test]
    fn short_legs_limit_the_offset() {
        let p = path(
            "node A 0 0 waypoint\nnode B 4 0 waypoint\nnode C 4 4 waypoint\nnode D 0 4 waypoint\n\
             edge A B 4 1\nedge B C 4 1\nedge C D 4 1\n",
            "A",
            "D",
        );
        let prims = build_geometry(&p, 3.0).unwrap();
        // straight, blend, blend (they meet mid-leg), straight
        let curved: Vec<_> = prims.iter().map(|p| p.is_curved()).collect();
        assert_eq!(curved, [false, true, true, false]);
        assert_eq!(prims[1].end(), Point2::new(4.0, 2.0));
        assert_eq!(prims[2].start(), Point2::new(4.0, 2.0));
        for (i, p) in prims.iter().enumerate() {
            assert_eq!(p.segment_index, i);
        }
    }

    #[test]
    fn reversal_and_bad_offset_are_errors() {
        let p = path(
            "node A 0 0 waypoint\nnode B 10 0 waypoint\nnode C 5 0 waypoint\nedge A B 10 1\nedge B C 5 1\n",
            "A",
            "C",
        );
        assert!(matches!(
            build_geometry(&p, 3.0),
            Err(PlanError::DegenerateGeometry(_))
        ));
        assert!(matches!(
            build_geometry(&p, 0.0),
            Err(PlanError::InvalidParameter(_))
        ));
    }

    #[test]
    fn coincident_nodes_are_degenerate() {
        let p = path(
            "node A 0 0 waypoint\nnode B 0 0 waypoint\nedge A B 0 1\n",
            "A",
            "B",
        );
        assert!(matches!(
            build_geometry(&p, 3.0),
            Err(PlanError::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn subdivision_keeps_endpoints() {
        let p = path(
            "node A 0 0 waypoint\nnode B 25 0 waypoint\nnode C 25 25 waypoint\nedge A B 25 1\nedge B C 25 1\n",
            "A",
            "C",
        );
        let prims = build_geometry(&p, 3.0).unwrap();
        let split = subdivide_straights(&prims, 10.0).unwrap();
        assert_eq!(split.len(), 3 + 1 + 3);
        for w in split.windows(2) {
            assert_eq!(w[0].end(), w[1].start());
        }
        assert!(split.iter().all(|p| p.length() <= 10.0 + 1e-12));
        assert_eq!(split.last().unwrap().end(), Point2::new(25.0, 25.0));
        assert_eq!(split.last().unwrap().segment_index, 6);
    }
}
