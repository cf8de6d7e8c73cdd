//! Planar primitives: points, circle intersections and direction arcs.

use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("circles do not intersect")]
    NoIntersection,
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct Point2<S> {
    pub x: S,
    pub y: S,
}

impl<S: Scalar> Point2<S> {
    pub fn new(x: S, y: S) -> Self {
        Self { x, y }
    }

    pub fn origin() -> Self {
        Self::new(S::zero(), S::zero())
    }

    pub fn from_f64(x: f64, y: f64) -> Self {
        Self::new(S::of(x), S::of(y))
    }

    pub fn to_f64(self) -> Point2<f64> {
        Point2::new(self.x.as_f64(), self.y.as_f64())
    }

    /// Unit vector at `angle` radians from the +x axis.
    pub fn from_angle(angle: S) -> Self {
        Self::new(angle.cos(), angle.sin())
    }

    pub fn dot(self, other: Self) -> S {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Self) -> S {
        self.x * other.y - self.y * other.x
    }

    pub fn norm_sq(self) -> S {
        self.dot(self)
    }

    pub fn norm(self) -> S {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Self) -> S {
        (self - other).norm()
    }

    /// Counterclockwise quarter turn.
    pub fn perp(self) -> Self {
        Self::new(-self.y, self.x)
    }

    /// Angle in (-pi, pi].
    pub fn angle(self) -> S {
        self.y.atan2(self.x)
    }

    pub fn unit(self) -> Option<Self> {
        let n = self.norm();
        if n > S::zero() && n.is_finite() {
            Some(self / n)
        } else {
            None
        }
    }

    pub fn rotate(self, angle: S) -> Self {
        let (s, c) = (angle.sin(), angle.cos());
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Largest absolute coordinate.
    pub fn max_abs(self) -> S {
        self.x.abs().max(self.y.abs())
    }

    pub fn lerp(self, other: Self, frac: S) -> Self {
        self + (other - self) * frac
    }
}

impl<S: Scalar> Add for Point2<S> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<S: Scalar> AddAssign for Point2<S> {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<S: Scalar> Sub for Point2<S> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<S: Scalar> Mul<S> for Point2<S> {
    type Output = Self;
    fn mul(self, k: S) -> Self {
        Self::new(self.x * k, self.y * k)
    }
}

impl<S: Scalar> Div<S> for Point2<S> {
    type Output = Self;
    fn div(self, k: S) -> Self {
        Self::new(self.x / k, self.y / k)
    }
}

impl<S: Scalar> Neg for Point2<S> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

/// Distance from `p` to the closed segment `ab`.
pub fn point_segment_distance<S: Scalar>(p: Point2<S>, a: Point2<S>, b: Point2<S>) -> S {
    let ab = b - a;
    let len_sq = ab.norm_sq();
    if len_sq == S::zero() {
        return p.dist(a);
    }
    let t = ((p - a).dot(ab) / len_sq).max(S::zero()).min(S::one());
    p.dist(a + ab * t)
}

/// Maps an angle into [0, 2pi).
pub fn normalize_angle<S: Scalar>(angle: S) -> S {
    let tau = S::two_pi();
    let mut a = angle - (angle / tau).floor() * tau;
    if a >= tau {
        a = a - tau;
    }
    if a < S::zero() {
        a = a + tau;
    }
    a
}

/// Shortest angular distance, in [0, pi].
pub fn angular_distance<S: Scalar>(a: S, b: S) -> S {
    let d = normalize_angle(a - b);
    d.min(S::two_pi() - d)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CircleIntersection<S> {
    Disjoint,
    Tangent(Point2<S>),
    /// Ordered by angle around the second circle's center, in (-pi, pi].
    Crossing(Point2<S>, Point2<S>),
}

impl<S: Scalar> CircleIntersection<S> {
    pub fn points(&self) -> Vec<Point2<S>> {
        match *self {
            CircleIntersection::Disjoint => vec![],
            CircleIntersection::Tangent(p) => vec![p],
            CircleIntersection::Crossing(p, q) => vec![p, q],
        }
    }
}

/// Chord of two circles expressed relative to the second center `c2`:
/// the chord midpoint sits at `c2 + a*u` and the intersections at `± h*perp(u)`.
struct Chord<S> {
    u: Point2<S>,
    a: S,
    h: Option<S>,
}

fn chord<S: Scalar>(c1: Point2<S>, r1: S, c2: Point2<S>, r2: S) -> Result<Chord<S>, GeometryError> {
    if !(r1 > S::zero() && r2 > S::zero()) {
        return Err(GeometryError::Degenerate("radii must be positive"));
    }
    let d = c1 - c2;
    let dist = d.norm();
    let u = d
        .unit()
        .ok_or(GeometryError::Degenerate("coincident centers"))?;
    let two = S::one() + S::one();
    let a = (dist * dist + (r2 - r1) * (r2 + r1)) / (two * dist);
    let h_sq = (r2 - a) * (r2 + a);
    let scale = r1.max(r2).max(dist);
    let tol = S::of(16.0) * S::one().ulp() * scale * scale;
    let h = if h_sq > tol {
        Some(h_sq.sqrt())
    } else if h_sq >= -tol {
        Some(S::zero())
    } else {
        None
    };
    Ok(Chord { u, a, h })
}

/// All intersection points of `C(c1, r1)` and `C(c2, r2)`.
pub fn circle_circle_intersection<S: Scalar>(
    c1: Point2<S>,
    r1: S,
    c2: Point2<S>,
    r2: S,
) -> Result<CircleIntersection<S>, GeometryError> {
    let ch = chord(c1, r1, c2, r2)?;
    let Some(h) = ch.h else {
        return Ok(CircleIntersection::Disjoint);
    };
    let mid = ch.u * ch.a;
    if h == S::zero() {
        return Ok(CircleIntersection::Tangent(c2 + mid));
    }
    let off = ch.u.perp() * h;
    let (p, q) = (mid + off, mid - off);
    if p.angle() <= q.angle() {
        Ok(CircleIntersection::Crossing(c2 + p, c2 + q))
    } else {
        Ok(CircleIntersection::Crossing(c2 + q, c2 + p))
    }
}

/// The intersection point `q` of `C(man, step)` and `C(lion, r)` that ends the
/// counterclockwise arc of the lion circle lying inside the man circle.
pub fn ccw_leading_intersection<S: Scalar>(
    man: Point2<S>,
    step: S,
    lion: Point2<S>,
    r: S,
) -> Result<Point2<S>, GeometryError> {
    let ch = chord(man, step, lion, r)?;
    let h = ch.h.ok_or(GeometryError::NoIntersection)?;
    Ok(lion + ch.u * ch.a + ch.u.perp() * h)
}

/// A closed set of unit directions `{angle : |angle - center_angle| <= half_width}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DirectionArc<S> {
    pub center_angle: S,
    pub half_width: S,
    pub empty: bool,
}

impl<S: Scalar> DirectionArc<S> {
    pub fn empty() -> Self {
        Self {
            center_angle: S::zero(),
            half_width: S::zero(),
            empty: true,
        }
    }

    pub fn new(center_angle: S, half_width: S) -> Self {
        Self {
            center_angle: normalize_angle(center_angle),
            half_width: half_width.max(S::zero()).min(S::pi()),
            empty: false,
        }
    }

    pub fn is_full(&self) -> bool {
        !self.empty && self.half_width >= S::pi()
    }

    pub fn contains(&self, angle: S) -> bool {
        !self.empty && angular_distance(angle, self.center_angle) <= self.half_width
    }
}

/// Unit directions `u` with `<u, a> >= c`.
pub fn direction_arc<S: Scalar>(a: Point2<S>, c: S) -> Result<DirectionArc<S>, GeometryError> {
    let norm = a.norm();
    if norm == S::zero() {
        return Err(GeometryError::Degenerate("zero constraint vector"));
    }
    if c > norm {
        return Ok(DirectionArc::empty());
    }
    let center = a.angle();
    if c <= -norm {
        return Ok(DirectionArc::new(center, S::pi()));
    }
    let ratio = (c / norm).max(-S::one()).min(S::one());
    Ok(DirectionArc::new(center, ratio.acos()))
}

/// Whether two closed arcs share a direction.
pub fn arcs_intersect<S: Scalar>(s: &DirectionArc<S>, t: &DirectionArc<S>) -> bool {
    if s.empty || t.empty {
        return false;
    }
    if s.is_full() || t.is_full() {
        return true;
    }
    angular_distance(s.center_angle, t.center_angle) <= s.half_width + t.half_width
}

/// Signed slack of [`arcs_intersect`]: positive when overlapping, negative when apart.
pub fn arcs_overlap_margin<S: Scalar>(s: &DirectionArc<S>, t: &DirectionArc<S>) -> Option<S> {
    if s.empty || t.empty {
        return None;
    }
    Some(s.half_width + t.half_width - angular_distance(s.center_angle, t.center_angle))
}
