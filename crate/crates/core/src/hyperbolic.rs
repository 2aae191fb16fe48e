//! Upper half-plane kernel: points, boundary points, Möbius maps, geodesics,
//! visual metric, shadows, horostrips and a few quadrature helpers.
//!
//! Everything is computed in the upper half-plane. The disc model is used for
//! boundary angles and rendering only, via the Cayley map w = (z - i)/(z + i).
//! Under that map the boundary point x ∈ ℝ sits at disc angle 2·atan2(1, -x),
//! and ∞ sits at angle 0; increasing x means increasing angle.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::{SQRT_2, TAU};
use core::ops::Mul;
use libm::{acosh, asinh, atan2, cos, exp, fabs, hypot, log, log1p, sin, sqrt, tan, tanh};

use crate::config::Tolerances;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KernelError {
    #[error("point ({0}, {1}) is not in the upper half-plane")]
    NotInUpperHalfPlane(f64, f64),
    #[error("matrix determinant {0} differs from 1")]
    BadDeterminant(f64),
    #[error("map is not hyperbolic (|trace| = {0})")]
    NotHyperbolic(f64),
    #[error("geodesics share an endpoint")]
    SharedEndpoint,
    #[error("boundary points coincide")]
    DegeneratePair,
    #[error("point lies on the geodesic")]
    PointOnGeodesic,
    #[error("length must be positive, got {0}")]
    NonPositiveLength(f64),
    #[error("horostrip needs 0 < y_low < y_high (got {0}, {1})")]
    InvalidStrip(f64, f64),
    #[error("epsilon {epsilon} is not admissible for delta {delta}")]
    InadmissibleEpsilon { epsilon: f64, delta: f64 },
}

pub type Result<T> = core::result::Result<T, KernelError>;

// ---------------------------------------------------------------------------
// points

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HPoint {
    x: f64,
    y: f64,
}

impl HPoint {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(y > 0.0) || !x.is_finite() || !y.is_finite() {
            return Err(KernelError::NotInUpperHalfPlane(x, y));
        }
        Ok(HPoint { x, y })
    }

    /// The base point i.
    pub const I: HPoint = HPoint { x: 0.0, y: 1.0 };

    pub fn x(&self) -> f64 {
        self.x
    }
    pub fn y(&self) -> f64 {
        self.y
    }

    /// Cayley map into the unit disc.
    pub fn to_disc(&self) -> (f64, f64) {
        let (x, y) = (self.x, self.y);
        let den = x * x + (y + 1.0) * (y + 1.0);
        ((x * x + y * y - 1.0) / den, -2.0 * x / den)
    }

    /// Inverse Cayley map; fails outside the open unit disc.
    pub fn from_disc(u: f64, v: f64) -> Result<Self> {
        let den = (1.0 - u) * (1.0 - u) + v * v;
        HPoint::new(-2.0 * v / den, (1.0 - u * u - v * v) / den)
    }
}

pub fn distance(a: &HPoint, b: &HPoint) -> f64 {
    // 2 asinh(|a-b| / 2√(ya yb)) == acosh(1 + |a-b|²/(2 ya yb)), better conditioned
    let e = hypot(a.x - b.x, a.y - b.y);
    2.0 * asinh(e / (2.0 * sqrt(a.y * b.y)))
}

// ---------------------------------------------------------------------------
// boundary

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundaryPoint {
    Finite(f64),
    Infinity,
}

impl BoundaryPoint {
    /// Disc angle in [0, 2π).
    pub fn angle(&self) -> f64 {
        match *self {
            BoundaryPoint::Infinity => 0.0,
            BoundaryPoint::Finite(x) => {
                let t = 2.0 * atan2(1.0, -x);
                if t >= TAU {
                    t - TAU
                } else {
                    t
                }
            }
        }
    }

    pub fn from_angle(theta: f64) -> Self {
        let t = wrap(theta);
        if t == 0.0 {
            BoundaryPoint::Infinity
        } else {
            BoundaryPoint::Finite(-1.0 / tan(t / 2.0))
        }
    }

    /// Point with homogeneous coordinates [u : v].
    pub fn from_projective(u: f64, v: f64) -> Self {
        if v == 0.0 {
            BoundaryPoint::Infinity
        } else {
            BoundaryPoint::Finite(u / v)
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, BoundaryPoint::Infinity)
    }
}

/// Reduce an angle into [0, 2π).
pub fn wrap(t: f64) -> f64 {
    let r = libm::fmod(t, TAU);
    let r = if r < 0.0 { r + TAU } else { r };
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Distance between two angles on the circle.
pub fn angular_gap(a: f64, b: f64) -> f64 {
    let d = wrap(a - b);
    d.min(TAU - d)
}

/// Open boundary arc running counter-clockwise from `start` for `length`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryArc {
    pub start: f64,
    pub length: f64,
}

impl BoundaryArc {
    pub fn end(&self) -> f64 {
        wrap(self.start + self.length)
    }

    pub fn contains_angle(&self, theta: f64) -> bool {
        let d = wrap(theta - self.start);
        d > 0.0 && d < self.length
    }

    pub fn contains(&self, p: &BoundaryPoint) -> bool {
        self.contains_angle(p.angle())
    }

    pub fn intersects(&self, other: &BoundaryArc) -> bool {
        if self.length <= 0.0 || other.length <= 0.0 {
            return false;
        }
        self.contains_angle(other.start)
            || other.contains_angle(self.start)
            || angular_gap(self.start, other.start) == 0.0
    }
}

// ---------------------------------------------------------------------------
// Möbius maps

/// Element of SL(2,ℝ), identified with its negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusMap {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl MobiusMap {
    pub const IDENTITY: MobiusMap = MobiusMap { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        Self::with_tolerance(a, b, c, d, Tolerances::DEFAULT.determinant)
    }

    pub fn with_tolerance(a: f64, b: f64, c: f64, d: f64, tol: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(fabs(det - 1.0) <= tol) {
            return Err(KernelError::BadDeterminant(det));
        }
        Ok(MobiusMap { a, b, c, d })
    }

    /// Rescale a matrix of positive determinant into SL(2,ℝ).
    pub fn normalized(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det > 0.0) {
            return Err(KernelError::BadDeterminant(det));
        }
        let s = 1.0 / sqrt(det);
        Ok(MobiusMap { a: a * s, b: b * s, c: c * s, d: d * s })
    }

    /// Hyperbolic translation of length `t` along the imaginary axis, towards ∞.
    pub fn translation(t: f64) -> Self {
        MobiusMap { a: exp(t / 2.0), b: 0.0, c: 0.0, d: exp(-t / 2.0) }
    }

    /// Rotation about i; moves disc angles by +phi.
    pub fn rotation(phi: f64) -> Self {
        let (s, c) = (sin(phi / 2.0), cos(phi / 2.0));
        MobiusMap { a: c, b: s, c: -s, d: c }
    }

    pub fn det(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn inverse(&self) -> Self {
        MobiusMap { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// Max entrywise distance to `other` or to `-other`, whichever is smaller.
    pub fn defect(&self, other: &MobiusMap) -> f64 {
        let plus = fabs(self.a - other.a)
            .max(fabs(self.b - other.b))
            .max(fabs(self.c - other.c))
            .max(fabs(self.d - other.d));
        let minus = fabs(self.a + other.a)
            .max(fabs(self.b + other.b))
            .max(fabs(self.c + other.c))
            .max(fabs(self.d + other.d));
        plus.min(minus)
    }

    pub fn approx_eq(&self, other: &MobiusMap, tol: f64) -> bool {
        self.defect(other) <= tol
    }

    pub fn apply<T: MobiusAction>(&self, t: &T) -> T {
        t.act(self)
    }
}

impl Mul for MobiusMap {
    type Output = MobiusMap;
    fn mul(self, r: MobiusMap) -> MobiusMap {
        MobiusMap {
            a: self.a * r.a + self.b * r.c,
            b: self.a * r.b + self.b * r.d,
            c: self.c * r.a + self.d * r.c,
            d: self.c * r.b + self.d * r.d,
        }
    }
}

pub trait MobiusAction: Sized {
    fn act(&self, m: &MobiusMap) -> Self;
}

impl MobiusAction for HPoint {
    fn act(&self, m: &MobiusMap) -> HPoint {
        let (x, y) = (self.x, self.y);
        let p = m.a * x + m.b;
        let q = m.c * x + m.d;
        let den = q * q + m.c * m.c * y * y;
        HPoint { x: (p * q + m.a * m.c * y * y) / den, y: y * m.det() / den }
    }
}

impl MobiusAction for BoundaryPoint {
    fn act(&self, m: &MobiusMap) -> BoundaryPoint {
        match *self {
            BoundaryPoint::Infinity => BoundaryPoint::from_projective(m.a, m.c),
            BoundaryPoint::Finite(x) => BoundaryPoint::from_projective(m.a * x + m.b, m.c * x + m.d),
        }
    }
}

impl MobiusAction for Geodesic {
    fn act(&self, m: &MobiusMap) -> Geodesic {
        Geodesic::from_sorted(m.apply(&self.p), m.apply(&self.q))
    }
}

/// Axis and translation length of a hyperbolic map.
pub fn axis_and_translation_length(m: &MobiusMap) -> Result<(Geodesic, f64)> {
    let (rep, att, len) = oriented_axis(m, Tolerances::DEFAULT.hyperbolic_trace)?;
    Ok((Geodesic::new(rep, att)?, len))
}

/// (repelling fixed point, attracting fixed point, translation length).
pub fn oriented_axis(m: &MobiusMap, trace_tol: f64) -> Result<(BoundaryPoint, BoundaryPoint, f64)> {
    let t = m.trace();
    if fabs(t) <= 2.0 + trace_tol {
        return Err(KernelError::NotHyperbolic(fabs(t)));
    }
    let disc = sqrt(t * t - 4.0);
    let big = (t + t.signum() * disc) / 2.0;
    let small = 1.0 / big;
    let eig = |lam: f64| {
        let (u1, v1) = (m.b, lam - m.a);
        let (u2, v2) = (lam - m.d, m.c);
        if hypot(u1, v1) >= hypot(u2, v2) {
            BoundaryPoint::from_projective(u1, v1)
        } else {
            BoundaryPoint::from_projective(u2, v2)
        }
    };
    Ok((eig(small), eig(big), 2.0 * acosh(fabs(t) / 2.0)))
}

// ---------------------------------------------------------------------------
// geodesics

/// Complete geodesic, stored with endpoints sorted by disc angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geodesic {
    p: BoundaryPoint,
    q: BoundaryPoint,
}

/// Which side of a geodesic a point lies on. `Inner` is the half-plane whose
/// boundary is the counter-clockwise arc from the first to the second endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    Outer,
    Inner,
}

impl Geodesic {
    pub fn new(a: BoundaryPoint, b: BoundaryPoint) -> Result<Self> {
        if a == b || a.angle() == b.angle() {
            return Err(KernelError::DegeneratePair);
        }
        Ok(Self::from_sorted(a, b))
    }

    fn from_sorted(a: BoundaryPoint, b: BoundaryPoint) -> Self {
        if a.angle() <= b.angle() {
            Geodesic { p: a, q: b }
        } else {
            Geodesic { p: b, q: a }
        }
    }

    pub fn finite(a: f64, b: f64) -> Result<Self> {
        Self::new(BoundaryPoint::Finite(a), BoundaryPoint::Finite(b))
    }

    pub fn endpoints(&self) -> (BoundaryPoint, BoundaryPoint) {
        (self.p, self.q)
    }

    pub fn angles(&self) -> (f64, f64) {
        (self.p.angle(), self.q.angle())
    }

    /// sinh of the signed distance; positive on the inner side.
    fn sinh_signed(&self, z: &HPoint) -> f64 {
        match (self.p, self.q) {
            (BoundaryPoint::Infinity, BoundaryPoint::Finite(x0)) => (x0 - z.x) / z.y,
            (BoundaryPoint::Finite(a), BoundaryPoint::Finite(b)) => {
                let m = (a + b) / 2.0;
                let r = fabs(b - a) / 2.0;
                // r² - |z-m|² = (r - (x-m))(r + (x-m)) - y²
                let dx = z.x - m;
                ((r - dx) * (r + dx) - z.y * z.y) / (2.0 * r * z.y)
            }
            // unreachable: ∞ always sorts first
            _ => unreachable!("infinite endpoint out of canonical position"),
        }
    }

    pub fn signed_distance(&self, z: &HPoint) -> f64 {
        asinh(self.sinh_signed(z))
    }

    pub fn distance_to(&self, z: &HPoint) -> f64 {
        fabs(self.signed_distance(z))
    }

    pub fn side(&self, z: &HPoint) -> Side {
        if self.sinh_signed(z) > 0.0 {
            Side::Inner
        } else {
            Side::Outer
        }
    }

    /// The counter-clockwise arc bounding the inner side.
    pub fn inner_arc(&self) -> BoundaryArc {
        let (a, b) = self.angles();
        BoundaryArc { start: a, length: b - a }
    }

    pub fn outer_arc(&self) -> BoundaryArc {
        let (a, b) = self.angles();
        BoundaryArc { start: b, length: TAU - (b - a) }
    }

    /// A map sending 0 to the first endpoint and ∞ to the second, so the
    /// imaginary axis parametrizes the geodesic: t ↦ M(i·eᵗ).
    pub fn frame(&self) -> MobiusMap {
        match (self.p, self.q) {
            (BoundaryPoint::Infinity, BoundaryPoint::Finite(q)) => {
                MobiusMap { a: q, b: -1.0, c: 1.0, d: 0.0 }
            }
            (BoundaryPoint::Finite(p), BoundaryPoint::Infinity) => {
                MobiusMap { a: 1.0, b: p, c: 0.0, d: 1.0 }
            }
            (BoundaryPoint::Finite(p), BoundaryPoint::Finite(q)) => {
                let s = 1.0 / sqrt(fabs(q - p));
                if q > p {
                    MobiusMap { a: q * s, b: p * s, c: s, d: s }
                } else {
                    MobiusMap { a: -q * s, b: p * s, c: -s, d: s }
                }
            }
            _ => unreachable!(),
        }
    }

    pub fn point_at(&self, t: f64) -> HPoint {
        self.frame().apply(&HPoint { x: 0.0, y: exp(t) })
    }

    /// Arclength parameter of the foot of the perpendicular from z.
    pub fn foot_parameter(&self, z: &HPoint) -> f64 {
        let w = self.frame().inverse().apply(z);
        log(hypot(w.x, w.y))
    }

    /// Arclength parameter of the crossing point with `other`, if they cross.
    /// Also returns the crossing angle in (0, π/2].
    pub fn crossing_parameter(&self, other: &Geodesic) -> Option<(f64, f64)> {
        let inv = self.frame().inverse();
        let g = inv.apply(other);
        match g.endpoints() {
            (BoundaryPoint::Finite(a), BoundaryPoint::Finite(b)) if a * b < 0.0 => {
                let m = (a + b) / 2.0;
                let r = fabs(b - a) / 2.0;
                let ang = libm::acos((fabs(m) / r).min(1.0));
                Some((0.5 * log(-a * b), ang))
            }
            _ => None,
        }
    }
}

/// Endpoint interleaving test.
pub fn crossing(g1: &Geodesic, g2: &Geodesic) -> Result<bool> {
    crossing_with(g1, g2, Tolerances::DEFAULT.endpoint)
}

pub fn crossing_with(g1: &Geodesic, g2: &Geodesic, tol: f64) -> Result<bool> {
    let (a1, b1) = g1.angles();
    let (a2, b2) = g2.angles();
    for x in [a1, b1] {
        for y in [a2, b2] {
            if angular_gap(x, y) <= tol {
                return Err(KernelError::SharedEndpoint);
            }
        }
    }
    let inside = |t: f64| t > a1 && t < b1;
    Ok(inside(a2) != inside(b2))
}

// ---------------------------------------------------------------------------
// visual metric

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VisualMetricParams {
    epsilon: f64,
    delta: f64,
    observation_point: HPoint,
}

impl VisualMetricParams {
    pub fn new(epsilon: f64, delta: f64, observation_point: HPoint) -> Result<Self> {
        let ok = epsilon > 0.0 && delta > 0.0 && exp(epsilon * delta) - 1.0 < SQRT_2 - 1.0;
        if !ok {
            return Err(KernelError::InadmissibleEpsilon { epsilon, delta });
        }
        Ok(VisualMetricParams { epsilon, delta, observation_point })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn observation_point(&self) -> HPoint {
        self.observation_point
    }

    /// exp(εδ) - 1.
    pub fn epsilon_prime(&self) -> f64 {
        exp(self.epsilon * self.delta) - 1.0
    }
}

/// Realized exactly as the distance from o to the geodesic [a, b].
pub fn gromov_product(o: &HPoint, a: &BoundaryPoint, b: &BoundaryPoint) -> Result<f64> {
    Ok(Geodesic::new(*a, *b)?.distance_to(o))
}

pub fn visual_q(params: &VisualMetricParams, a: &BoundaryPoint, b: &BoundaryPoint) -> Result<f64> {
    Ok(exp(-params.epsilon * gromov_product(&params.observation_point, a, b)?))
}

/// `n` boundary points at uniformly spaced disc angles, starting at angle 0.
pub fn uniform_boundary_sample(n: usize) -> Vec<BoundaryPoint> {
    (0..n).map(|k| BoundaryPoint::from_angle(TAU * k as f64 / n as f64)).collect()
}

/// Shortest-chain approximation of d_ε from `samples[source]` to every sample:
/// the infimum over chains through the sample set of Σ q_ε(xᵢ, xᵢ₊₁).
pub fn chain_infimum(
    params: &VisualMetricParams,
    samples: &[BoundaryPoint],
    source: usize,
) -> Result<Vec<f64>> {
    let n = samples.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[source] = 0.0;
    for _ in 0..n {
        let mut u = usize::MAX;
        let mut best = f64::INFINITY;
        for (i, &d) in dist.iter().enumerate() {
            if !done[i] && d < best {
                best = d;
                u = i;
            }
        }
        if u == usize::MAX {
            break;
        }
        done[u] = true;
        for v in 0..n {
            if done[v] {
                continue;
            }
            let w = best + visual_q(params, &samples[u], &samples[v])?;
            if w < dist[v] {
                dist[v] = w;
            }
        }
    }
    Ok(dist)
}

/// The component of ∂H² ∖ ∂g on the far side of g from o.
pub fn o_shadow(g: &Geodesic, o: &HPoint) -> Result<BoundaryArc> {
    o_shadow_with(g, o, Tolerances::DEFAULT.on_geodesic)
}

pub fn o_shadow_with(g: &Geodesic, o: &HPoint, tol: f64) -> Result<BoundaryArc> {
    let s = g.signed_distance(o);
    if fabs(s) <= tol {
        return Err(KernelError::PointOnGeodesic);
    }
    Ok(if s > 0.0 { g.outer_arc() } else { g.inner_arc() })
}

// ---------------------------------------------------------------------------
// horostrips and lengths

/// Region y_low ≤ Im z ≤ y_high.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Horostrip {
    y_low: f64,
    y_high: f64,
}

impl Horostrip {
    pub fn new(y_low: f64, y_high: f64) -> Result<Self> {
        if !(y_low > 0.0 && y_high > y_low && y_high.is_finite()) {
            return Err(KernelError::InvalidStrip(y_low, y_high));
        }
        Ok(Horostrip { y_low, y_high })
    }

    /// Strip of width `w` with lower horocycle at height 1.
    pub fn of_width(w: f64) -> Result<Self> {
        Horostrip::new(1.0, exp(w))
    }

    pub fn y_low(&self) -> f64 {
        self.y_low
    }
    pub fn y_high(&self) -> f64 {
        self.y_high
    }

    pub fn width(&self) -> f64 {
        log(self.y_high / self.y_low)
    }
}

/// Length of a vertical leaf, which equals the width.
pub fn horostrip_leaf_length(s: &Horostrip) -> f64 {
    s.width()
}

/// |ln(a/b)|, for the lengths of the two horocyclic sides cut out by leaves.
pub fn quadrilateral_relation(len_alpha: f64, len_beta: f64) -> Result<f64> {
    for l in [len_alpha, len_beta] {
        if !(l > 0.0) {
            return Err(KernelError::NonPositiveLength(l));
        }
    }
    Ok(fabs(log(len_alpha / len_beta)))
}

/// Hyperbolic length of a horizontal segment of Euclidean length `l` at height `y`.
pub fn horocyclic_length(l: f64, y: f64) -> f64 {
    l / y
}

/// Length of a sampled path, each sample pair joined by a Euclidean segment
/// along which ∫ |dz|/y is integrated in closed form.
pub fn polyline_length(points: &[HPoint]) -> f64 {
    let mut total = 0.0;
    for w in points.windows(2) {
        let (p, q) = (w[0], w[1]);
        let l = hypot(q.x - p.x, q.y - p.y);
        if l == 0.0 {
            continue;
        }
        let u = (q.y - p.y) / p.y;
        let f = if u == 0.0 { 1.0 } else { log1p(u) / u };
        total += l * f / p.y;
    }
    total
}

/// Adaptive Simpson quadrature of ∫ √(x'² + y'²)/y dt for a parametric curve
/// `t ↦ (x, y, x', y')` on [t0, t1].
pub fn path_length<F>(curve: F, t0: f64, t1: f64, tol: f64) -> f64
where
    F: Fn(f64) -> (f64, f64, f64, f64),
{
    let f = |t: f64| {
        let (_, y, dx, dy) = curve(t);
        hypot(dx, dy) / y
    };
    adaptive_simpson(&f, t0, t1, tol)
}

pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = (a + b) / 2.0;
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = (a + b) / 2.0;
    let (lm, rm) = ((a + m) / 2.0, (m + b) / 2.0);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || fabs(delta) <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

// ---------------------------------------------------------------------------
// coarse geometry

/// Diameter of {x : d(x,g1) ≤ D and d(x,g2) ≤ D} inside the ball of radius
/// `window` about i, estimated on a `resolution`×`resolution` grid in the disc
/// model. The set is convex, so only grid points on its discrete boundary are
/// compared. The empty set has diameter 0.
pub fn coarse_intersection_diameter(
    g1: &Geodesic,
    g2: &Geodesic,
    d: f64,
    window: f64,
    resolution: usize,
) -> f64 {
    let rho = tanh(window / 2.0);
    let n = resolution.max(2);
    let step = 2.0 * rho / (n - 1) as f64;
    let mut member = vec![false; n * n];
    let mut pts: Vec<Option<HPoint>> = vec![None; n * n];
    for i in 0..n {
        for j in 0..n {
            let (u, v) = (-rho + step * i as f64, -rho + step * j as f64);
            if u * u + v * v >= rho * rho {
                continue;
            }
            if let Ok(z) = HPoint::from_disc(u, v) {
                if g1.distance_to(&z) <= d && g2.distance_to(&z) <= d {
                    member[i * n + j] = true;
                    pts[i * n + j] = Some(z);
                }
            }
        }
    }
    let mut rim = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if !member[i * n + j] {
                continue;
            }
            let edge = i == 0
                || j == 0
                || i == n - 1
                || j == n - 1
                || !member[(i - 1) * n + j]
                || !member[(i + 1) * n + j]
                || !member[i * n + j - 1]
                || !member[i * n + j + 1];
            if edge {
                rim.push(pts[i * n + j].unwrap());
            }
        }
    }
    let mut best = 0.0f64;
    for a in 0..rim.len() {
        for b in a + 1..rim.len() {
            best = best.max(distance(&rim[a], &rim[b]));
        }
    }
    best
}

/// Approximate minimizer of max_γ d(o, γ) over the ball of radius `window`
/// about i. Returns the centre and the realized radius.
pub fn minimax_ball(lines: &[Geodesic], window: f64) -> (HPoint, f64) {
    let cost = |u: f64, v: f64| -> f64 {
        match HPoint::from_disc(u, v) {
            Ok(z) => lines.iter().map(|g| g.distance_to(&z)).fold(0.0, f64::max),
            Err(_) => f64::INFINITY,
        }
    };
    let rho = tanh(window / 2.0);
    let n = 61;
    let mut best = (0.0, 0.0, cost(0.0, 0.0));
    for i in 0..n {
        for j in 0..n {
            let u = -rho + 2.0 * rho * i as f64 / (n - 1) as f64;
            let v = -rho + 2.0 * rho * j as f64 / (n - 1) as f64;
            if u * u + v * v >= rho * rho {
                continue;
            }
            let c = cost(u, v);
            if c < best.2 {
                best = (u, v, c);
            }
        }
    }
    // compass search with eight directions
    let mut h = 2.0 * rho / (n - 1) as f64;
    const D: f64 = core::f64::consts::FRAC_1_SQRT_2;
    let dirs: [(f64, f64); 8] = [
        (1.0, 0.0),
        (-1.0, 0.0),
        (0.0, 1.0),
        (0.0, -1.0),
        (D, D),
        (D, -D),
        (-D, D),
        (-D, -D),
    ];
    while h > 1e-12 {
        let mut moved = false;
        for (du, dv) in dirs {
            let (u, v) = (best.0 + h * du, best.1 + h * dv);
            if u * u + v * v >= 1.0 {
                continue;
            }
            let c = cost(u, v);
            if c < best.2 {
                best = (u, v, c);
                moved = true;
            }
        }
        if !moved {
            h /= 2.0;
        }
    }
    (HPoint::from_disc(best.0, best.1).unwrap_or(HPoint::I), best.2)
}

/// Geodesic spanned by a chord of the Klein model, given the unit normal
/// direction `phi` and signed offset `s` (|s| < 1) of the chord.
pub fn klein_chord(phi: f64, s: f64) -> Result<Geodesic> {
    let h = libm::acos(s);
    let a = BoundaryPoint::from_angle(phi - h);
    let b = BoundaryPoint::from_angle(phi + h);
    Geodesic::new(a, b)
}

/// Hyperbolic radius of the Klein-model disc of Euclidean radius `r`.
pub fn klein_radius(r: f64) -> f64 {
    libm::atanh(r)
}
