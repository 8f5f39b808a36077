//! Supporting curves of thin inclusions and their arc-length quadrature.

use std::fmt;
use std::sync::Arc;

use crate::error::{domain, Result};
use crate::quadrature::gauss_legendre;
use crate::scalar::{Real, Vec2};

/// Default number of quadrature nodes per curve.
pub const DEFAULT_NODE_COUNT: usize = 256;
/// Gauss-Legendre points per panel.
pub const POINTS_PER_PANEL: usize = 8;

type CurveFn<T> = Arc<dyn Fn(T) -> Vec2<T> + Send + Sync>;

#[derive(Clone)]
enum Shape<T> {
    /// Coefficients in ascending powers of `s`.
    Polynomial { x: Vec<T>, y: Vec<T> },
    Custom { position: CurveFn<T>, derivative: CurveFn<T> },
}

/// A smooth open curve `σ(s)`, `s ∈ [s_min, s_max]`.
#[derive(Clone)]
pub struct ParametricCurve<T> {
    shape: Shape<T>,
    s_min: T,
    s_max: T,
}

impl<T: Real> fmt::Debug for ParametricCurve<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("ParametricCurve");
        match &self.shape {
            Shape::Polynomial { x, y } => d.field("x_coeffs", x).field("y_coeffs", y),
            Shape::Custom { .. } => d.field("shape", &"custom"),
        };
        d.field("s_range", &(self.s_min, self.s_max)).finish()
    }
}

/// Unit tangent and counter-clockwise unit normal at a curve point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame<T> {
    pub tangent: Vec2<T>,
    pub normal: Vec2<T>,
}

fn horner<T: Real>(coeffs: &[T], s: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * s + c)
}

fn horner_derivative<T: Real>(coeffs: &[T], s: T) -> T {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(T::zero(), |acc, (k, &c)| acc * s + c * T::from_usize(k))
}

impl<T: Real> ParametricCurve<T> {
    /// Polynomial curve `(Σ x_k s^k, Σ y_k s^k)`.
    pub fn polynomial(x_coeffs: Vec<T>, y_coeffs: Vec<T>, s_range: (T, T)) -> Result<Self> {
        if x_coeffs.is_empty() || y_coeffs.is_empty() {
            return domain("polynomial curve needs at least one coefficient per axis");
        }
        Self::validated(Shape::Polynomial { x: x_coeffs, y: y_coeffs }, s_range)
    }

    /// Curve given by closures for position and derivative.
    pub fn custom<P, D>(position: P, derivative: D, s_range: (T, T)) -> Result<Self>
    where
        P: Fn(T) -> Vec2<T> + Send + Sync + 'static,
        D: Fn(T) -> Vec2<T> + Send + Sync + 'static,
    {
        Self::validated(
            Shape::Custom { position: Arc::new(position), derivative: Arc::new(derivative) },
            s_range,
        )
    }

    /// Straight segment from `a` to `b`.
    pub fn segment(a: Vec2<T>, b: Vec2<T>) -> Result<Self> {
        let d = b - a;
        Self::polynomial(vec![a.x, d.x], vec![a.y, d.y], (T::zero(), T::one()))
    }

    fn validated(shape: Shape<T>, (s_min, s_max): (T, T)) -> Result<Self> {
        if !(s_min.is_finite() && s_max.is_finite() && s_min < s_max) {
            return domain(format!("curve parameter range [{s_min}, {s_max}] is empty or not finite"));
        }
        let curve = Self { shape, s_min, s_max };
        // Sampled check of the regularity invariant.
        let samples = 1024;
        for i in 0..=samples {
            let s = curve.lerp(T::from_usize(i) / T::from_usize(samples));
            let p = curve.position(s);
            let d = curve.derivative(s);
            if !p.is_finite() || !d.is_finite() {
                return domain(format!("curve not finite at s = {s}"));
            }
            if !(d.norm() > T::zero()) {
                return domain(format!("curve derivative vanishes at s = {s}"));
            }
        }
        Ok(curve)
    }

    fn lerp(&self, u: T) -> T {
        self.s_min + (self.s_max - self.s_min) * u
    }

    pub fn s_range(&self) -> (T, T) {
        (self.s_min, self.s_max)
    }

    pub fn position(&self, s: T) -> Vec2<T> {
        match &self.shape {
            Shape::Polynomial { x, y } => Vec2::new(horner(x, s), horner(y, s)),
            Shape::Custom { position, .. } => position(s),
        }
    }

    pub fn derivative(&self, s: T) -> Vec2<T> {
        match &self.shape {
            Shape::Polynomial { x, y } => Vec2::new(horner_derivative(x, s), horner_derivative(y, s)),
            Shape::Custom { derivative, .. } => derivative(s),
        }
    }

    /// Tangent `σ'(s)/‖σ'(s)‖` and the normal obtained by rotating it a
    /// quarter turn counter-clockwise.
    pub fn frame(&self, s: T) -> Result<Frame<T>> {
        if !(s >= self.s_min && s <= self.s_max) {
            return domain(format!("s = {s} outside [{}, {}]", self.s_min, self.s_max));
        }
        Ok(self.frame_unchecked(s))
    }

    fn frame_unchecked(&self, s: T) -> Frame<T> {
        let d = self.derivative(s);
        let tangent = d.scale(d.norm().recip());
        Frame { tangent, normal: tangent.perp() }
    }

    /// Same curve restricted to `[s_a, s_b] ⊆ s_range`.
    pub fn restricted(&self, s_a: T, s_b: T) -> Result<Self> {
        if !(s_a >= self.s_min && s_b <= self.s_max && s_a < s_b) {
            return domain(format!("[{s_a}, {s_b}] is not a subrange of [{}, {}]", self.s_min, self.s_max));
        }
        Ok(Self { shape: self.shape.clone(), s_min: s_a, s_max: s_b })
    }

    /// Rigid translation by `d`.
    pub fn translated(&self, d: Vec2<T>) -> Self {
        let shape = match &self.shape {
            Shape::Polynomial { x, y } => {
                let mut x = x.clone();
                let mut y = y.clone();
                x[0] += d.x;
                y[0] += d.y;
                Shape::Polynomial { x, y }
            }
            Shape::Custom { position, derivative } => {
                let position = Arc::clone(position);
                Shape::Custom {
                    position: Arc::new(move |s| position(s) + d),
                    derivative: Arc::clone(derivative),
                }
            }
        };
        Self { shape, s_min: self.s_min, s_max: self.s_max }
    }
}

/// One of the two built-in test curves:
/// `σ₁(s) = (s − 0.2, −0.5s² + 0.5)` and `σ₂(s) = (s + 0.2, s³ + s² − 0.6)`,
/// both on `s ∈ [−0.5, 0.5]`.
pub fn builtin_sigma<T: Real>(id: u32) -> Result<ParametricCurve<T>> {
    let l = T::lit;
    let range = (l(-0.5), l(0.5));
    match id {
        1 => ParametricCurve::polynomial(vec![l(-0.2), l(1.0)], vec![l(0.5), l(0.0), l(-0.5)], range),
        2 => ParametricCurve::polynomial(
            vec![l(0.2), l(1.0)],
            vec![l(-0.6), l(0.0), l(1.0), l(1.0)],
            range,
        ),
        _ => domain(format!("no built-in curve with id {id} (expected 1 or 2)")),
    }
}

/// A quadrature node on a curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveNode<T> {
    pub point: Vec2<T>,
    pub tangent: Vec2<T>,
    pub normal: Vec2<T>,
    /// Arc-length weight.
    pub weight: T,
}

/// Discretization of `∫_σ f dσ` as `Σ w_i f(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveQuadrature<T> {
    nodes: Vec<CurveNode<T>>,
}

impl<T: Real> CurveQuadrature<T> {
    pub fn from_nodes(nodes: Vec<CurveNode<T>>) -> Self {
        Self { nodes }
    }

    pub fn nodes(&self) -> &[CurveNode<T>] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Sum of weights, i.e. the arc length.
    pub fn length(&self) -> T {
        self.nodes.iter().map(|n| n.weight).sum()
    }

    /// `Σ w_i f(node_i)`.
    pub fn integrate<F: Fn(&CurveNode<T>) -> T>(&self, f: F) -> T {
        self.nodes.iter().map(|n| n.weight * f(n)).sum()
    }

    /// Union of several quadratures (e.g. for multi-inclusion metrics).
    pub fn concat<'a, I: IntoIterator<Item = &'a Self>>(parts: I) -> Self {
        Self { nodes: parts.into_iter().flat_map(|q| q.nodes.iter().copied()).collect() }
    }
}

/// Composite Gauss-Legendre discretization, [`POINTS_PER_PANEL`] points per
/// panel (fewer if `node_count` is smaller), panels uniform in `s`.
///
/// The node count is rounded up to a whole number of panels.
pub fn discretize<T: Real>(curve: &ParametricCurve<T>, node_count: usize) -> Result<CurveQuadrature<T>> {
    if node_count < 2 {
        return domain(format!("node_count must be at least 2 (got {node_count})"));
    }
    let per_panel = node_count.min(POINTS_PER_PANEL);
    let panels = node_count.div_ceil(per_panel);
    let (gx, gw) = gauss_legendre::<T>(per_panel);
    let (s_min, s_max) = curve.s_range();
    let width = (s_max - s_min) / T::from_usize(panels);
    let half = width * T::lit(0.5);
    let mut nodes = Vec::with_capacity(panels * per_panel);
    for p in 0..panels {
        let mid = s_min + width * T::from_usize(p) + half;
        for (&u, &w) in gx.iter().zip(&gw) {
            let s = mid + half * u;
            let d = curve.derivative(s);
            let speed = d.norm();
            let tangent = d.scale(speed.recip());
            nodes.push(CurveNode {
                point: curve.position(s),
                tangent,
                normal: tangent.perp(),
                weight: w * half * speed,
            });
        }
    }
    Ok(CurveQuadrature { nodes })
}

/// Smallest distance from `point` to a node of `quad`.
pub fn distance_to_curve<T: Real>(point: Vec2<T>, quad: &CurveQuadrature<T>) -> Result<T> {
    if quad.is_empty() {
        return domain("distance to an empty curve quadrature");
    }
    Ok(quad
        .nodes
        .iter()
        .map(|n| n.point.distance(point))
        .fold(T::infinity(), T::min))
}
