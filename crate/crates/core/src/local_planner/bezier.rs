use serde::{Deserialize, Serialize};

use super::PlanError;
use crate::geometry::Point2;

// 5-point Gauss-Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 5] = [
    0.0,
    -0.538_469_310_105_683_1,
    0.538_469_310_105_683_1,
    -0.906_179_845_938_664,
    0.906_179_845_938_664,
];
const GL_WEIGHTS: [f64; 5] = [
    0.568_888_888_888_888_9,
    0.478_628_670_499_366_47,
    0.478_628_670_499_366_47,
    0.236_926_885_056_189_08,
    0.236_926_885_056_189_08,
];

/// Cubic Bézier curve defined by four control points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicBezier {
    pub points: [Point2; 4],
}

impl CubicBezier {
    pub fn new(p0: Point2, p1: Point2, p2: Point2, p3: Point2) -> Self {
        Self {
            points: [p0, p1, p2, p3],
        }
    }

    pub fn start(&self) -> Point2 {
        self.points[0]
    }

    pub fn end(&self) -> Point2 {
        self.points[3]
    }

    /// Bernstein-form evaluation. `t` is not range-checked.
    pub fn eval(&self, t: f64) -> Point2 {
        if t == 0.0 {
            return self.points[0];
        }
        if t == 1.0 {
            return self.points[3];
        }
        let [p0, p1, p2, p3] = self.points;
        let s = 1.0 - t;
        p0 * (s * s * s) + p1 * (3.0 * s * s * t) + p2 * (3.0 * s * t * t) + p3 * (t * t * t)
    }

    pub fn derivative(&self, t: f64) -> Point2 {
        let [p0, p1, p2, p3] = self.points;
        let s = 1.0 - t;
        (p1 - p0) * (3.0 * s * s) + (p2 - p1) * (6.0 * s * t) + (p3 - p2) * (3.0 * t * t)
    }

    pub fn second_derivative(&self, t: f64) -> Point2 {
        let [p0, p1, p2, p3] = self.points;
        (p2 - p1 * 2.0 + p0) * (6.0 * (1.0 - t)) + (p3 - p2 * 2.0 + p1) * (6.0 * t)
    }

    /// Signed curvature, left turns positive. `None` where the tangent
    /// vanishes.
    pub fn signed_curvature(&self, t: f64) -> Option<f64> {
        let d1 = self.derivative(t);
        let speed2 = d1.dot(d1);
        let scale = self.points.iter().map(|p| p.norm()).fold(1.0, f64::max);
        if speed2 <= (1e-12 * scale).powi(2) {
            return None;
        }
        let d2 = self.second_derivative(t);
        Some(d1.cross(d2) / (speed2 * speed2.sqrt()))
    }

    /// Unit tangent direction angle at `t`.
    pub fn heading(&self, t: f64) -> f64 {
        let d = self.derivative(t);
        if d.dot(d) > 0.0 {
            d.angle()
        } else {
            // cusp: fall back to the chord between neighbouring samples
            (self.eval((t + 1e-6).min(1.0)) - self.eval((t - 1e-6).max(0.0))).angle()
        }
    }

    /// Arc length between parameters `a` and `b`.
    pub fn arc_length_between(&self, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        GL_NODES
            .iter()
            .zip(GL_WEIGHTS)
            .map(|(&x, w)| w * self.derivative(mid + half * x).norm())
            .sum::<f64>()
            * half
    }

    pub fn length(&self) -> f64 {
        ArcLengthTable::new(self).total()
    }
}

/// Cumulative arc length at uniformly spaced parameters, used to map arc
/// length back to the curve parameter.
pub(crate) struct ArcLengthTable<'a> {
    curve: &'a CubicBezier,
    cumulative: Vec<f64>,
}

impl<'a> ArcLengthTable<'a> {
    const INTERVALS: usize = 64;

    pub fn new(curve: &'a CubicBezier) -> Self {
        let mut cumulative = Vec::with_capacity(Self::INTERVALS + 1);
        cumulative.push(0.0);
        let h = 1.0 / Self::INTERVALS as f64;
        let mut acc = 0.0;
        for i in 0..Self::INTERVALS {
            acc += curve.arc_length_between(i as f64 * h, (i + 1) as f64 * h);
            cumulative.push(acc);
        }
        Self { curve, cumulative }
    }

    pub fn total(&self) -> f64 {
        *self.cumulative.last().expect("table is non-empty")
    }

    /// Curve parameter at arc length `s` from the start.
    pub fn parameter_at(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= self.total() {
            return 1.0;
        }
        let h = 1.0 / Self::INTERVALS as f64;
        let i = self.cumulative.partition_point(|&c| c <= s) - 1;
        let (t0, s0) = (i as f64 * h, self.cumulative[i]);
        let seg = self.cumulative[i + 1] - s0;
        let mut t = if seg > 0.0 {
            t0 + h * (s - s0) / seg
        } else {
            t0
        };
        for _ in 0..4 {
            let err = s0 + self.curve.arc_length_between(t0, t) - s;
            let speed = self.curve.derivative(t).norm();
            if speed <= 0.0 {
                break;
            }
            t = (t - err / speed).clamp(t0, t0 + h);
            if err.abs() < 1e-12 {
                break;
            }
        }
        t
    }
}

/// Point on `b` at parameter `t` in [0, 1].
pub fn bezier_point(b: &CubicBezier, t: f64) -> Result<Point2, PlanError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(PlanError::Domain { t });
    }
    Ok(b.eval(t))
}

/// Analytic signed curvature of `b` at parameter `t` in [0, 1].
pub fn bezier_curvature(b: &CubicBezier, t: f64) -> Result<f64, PlanError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(PlanError::Domain { t });
    }
    b.signed_curvature(t)
        .ok_or(PlanError::SingularDerivative { t })
}
