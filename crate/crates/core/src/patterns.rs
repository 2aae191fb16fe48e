//! Finite windows of line patterns: Fuchsian generators for closed surfaces,
//! lifting curve words to geodesics, the chamber arrangement inside a window
//! ball, the filling test and the shadow (dual) graph.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::f64::consts::PI;
use libm::{acosh, cosh, fabs, tan};

use crate::config::Tolerances;
use crate::hyperbolic::{
    angular_gap, axis_and_translation_length, distance, crossing_with, wrap, Geodesic, HPoint,
    KernelError, MobiusMap, Side,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PatternError {
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("genus {0} is above the supported cap of 6")]
    UnsupportedGenus(usize),
    #[error("curve `{0}` is not a valid cyclically reduced word")]
    InvalidCurve(String),
    #[error("curve `{0}` does not evaluate to a hyperbolic element")]
    NonHyperbolicCurve(String),
    #[error("lines {0} and {1} cross at angle {2:e}, below the tangency guard")]
    NearTangency(usize, usize, f64),
    #[error("lines {0} and {1} share an endpoint")]
    SharedEndpoint(usize, usize),
    #[error("no chamber lies wholly inside the interior region")]
    WindowTooSmall,
    #[error("arrangement is not Euler-consistent: V={v} E={e} F={f}")]
    EulerMismatch { v: usize, e: usize, f: usize },
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

pub type Result<T> = core::result::Result<T, PatternError>;

// ---------------------------------------------------------------------------
// surfaces and curves

#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGroupPresentation {
    pub genus: usize,
    /// a1, b1, a2, b2, ...
    pub generators: Vec<MobiusMap>,
    pub relator_defect: f64,
}

pub const MAX_GENUS: usize = 6;

/// Side pairings of the regular 4g-gon centred at i with interior angles 2π/4g.
pub fn standard_generators(genus: usize) -> Result<SurfaceGroupPresentation> {
    if genus < 2 {
        return Err(PatternError::Precondition(alloc::format!("genus {genus} < 2")));
    }
    if genus > MAX_GENUS {
        return Err(PatternError::UnsupportedGenus(genus));
    }
    let n = 4 * genus;
    let nf = n as f64;
    // cosh r = cot(π/n): half the distance between opposite side midpoints
    let r = acosh(1.0 / tan(PI / nf));
    let h0 = MobiusMap::translation(2.0 * r);
    let push = |theta: f64| MobiusMap::rotation(theta) * h0 * MobiusMap::rotation(-theta);
    let pair = |j: usize| {
        let th = 2.0 * PI * (j as f64 + 2.0) / nf;
        push(th) * MobiusMap::rotation(th + PI - 2.0 * PI * j as f64 / nf)
    };
    let mut generators = Vec::with_capacity(2 * genus);
    for m in 0..genus {
        generators.push(pair(4 * m).inverse());
        generators.push(pair(4 * m + 1));
    }
    let mut rel = MobiusMap::IDENTITY;
    for m in 0..genus {
        let (a, b) = (generators[2 * m], generators[2 * m + 1]);
        rel = rel * a * b * a.inverse() * b.inverse();
    }
    let relator_defect = rel.defect(&MobiusMap::IDENTITY);
    if relator_defect > Tolerances::DEFAULT.relator_defect {
        return Err(PatternError::Precondition(alloc::format!(
            "relator defect {relator_defect:e}"
        )));
    }
    Ok(SurfaceGroupPresentation { genus, generators, relator_defect })
}

impl SurfaceGroupPresentation {
    /// Generator for a signed 1-based index: +k is the k-th generator, -k its inverse.
    pub fn letter(&self, s: i32) -> MobiusMap {
        let g = self.generators[(s.unsigned_abs() - 1) as usize];
        if s > 0 {
            g
        } else {
            g.inverse()
        }
    }

    pub fn evaluate(&self, word: &[i32]) -> MobiusMap {
        word.iter().fold(MobiusMap::IDENTITY, |acc, &s| acc * self.letter(s))
    }

    pub fn rank(&self) -> i32 {
        self.generators.len() as i32
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveSpec {
    pub word: Vec<i32>,
    pub label: String,
}

impl CurveSpec {
    pub fn new(word: Vec<i32>, label: impl Into<String>) -> Self {
        CurveSpec { word, label: label.into() }
    }

    pub fn validate(&self, rank: i32) -> Result<()> {
        let w = &self.word;
        let bad = w.is_empty()
            || w.iter().any(|&s| s == 0 || s.abs() > rank)
            || w.windows(2).any(|p| p[0] == -p[1])
            || (w.len() > 1 && w[0] == -w[w.len() - 1]);
        if bad {
            return Err(PatternError::InvalidCurve(self.label.clone()));
        }
        Ok(())
    }
}

/// Hyperbolic ball about i together with the conjugator length cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub radius: f64,
    pub word_length_cap: usize,
}

impl Window {
    pub fn new(radius: f64, word_length_cap: usize) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(PatternError::Precondition(alloc::format!("window radius {radius}")));
        }
        Ok(Window { radius, word_length_cap })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternLine {
    pub geodesic: Geodesic,
    pub orbit_label: String,
    pub conjugator: Vec<i32>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinePattern {
    pub lines: Vec<PatternLine>,
    /// Pairs of distinct curve labels whose lifts coincide (the condition the
    /// acylindrization move would repair).
    pub coincidences: Vec<(String, String)>,
    /// (label, translation length) per input curve.
    pub periods: Vec<(String, f64)>,
    /// Axis of each input curve's element, in the order of `periods`.
    pub axes: Vec<Geodesic>,
}

impl LinePattern {
    pub fn len(&self) -> usize {
        self.lines.len()
    }
    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }
    pub fn geodesics(&self) -> Vec<Geodesic> {
        self.lines.iter().map(|l| l.geodesic).collect()
    }
}

fn same_line(g: &Geodesic, h: &Geodesic, tol: f64) -> bool {
    let (a, b) = g.angles();
    let (c, d) = h.angles();
    (angular_gap(a, c) <= tol && angular_gap(b, d) <= tol)
        || (angular_gap(a, d) <= tol && angular_gap(b, c) <= tol)
}

fn word_key(w: &[i32]) -> (usize, &[i32]) {
    (w.len(), w)
}

/// All lifts w·axis(c) with |w| ≤ cap meeting the window ball, deduplicated.
pub fn generate_pattern(
    surface: &SurfaceGroupPresentation,
    curves: &[CurveSpec],
    window: &Window,
) -> Result<LinePattern> {
    generate_pattern_with(surface, curves, window, &Tolerances::DEFAULT)
}

pub fn generate_pattern_with(
    surface: &SurfaceGroupPresentation,
    curves: &[CurveSpec],
    window: &Window,
    tol: &Tolerances,
) -> Result<LinePattern> {
    let rank = surface.rank();
    let mut out = LinePattern::default();
    for c in curves {
        c.validate(rank)?;
        let m = surface.evaluate(&c.word);
        if fabs(m.trace()) <= 2.0 + tol.hyperbolic_trace {
            return Err(PatternError::NonHyperbolicCurve(c.label.clone()));
        }
        let (axis, period) = axis_and_translation_length(&m)?;
        out.periods.push((c.label.clone(), period));
        out.axes.push(axis);
        let mut word: Vec<i32> = Vec::new();
        let mut stack: Vec<MobiusMap> = vec![MobiusMap::IDENTITY];
        visit(surface, &c.word, &axis, &c.label, window, tol, &mut word, &mut stack, &mut out);
    }
    out.lines.sort_by(|x, y| cmp_lines(&x.geodesic, &y.geodesic));
    Ok(out)
}

fn cmp_lines(x: &Geodesic, y: &Geodesic) -> Ordering {
    let (a, b) = x.angles();
    let (c, d) = y.angles();
    a.total_cmp(&c).then(b.total_cmp(&d))
}

#[allow(clippy::too_many_arguments)]
fn visit(
    s: &SurfaceGroupPresentation,
    curve: &[i32],
    axis: &Geodesic,
    label: &str,
    window: &Window,
    tol: &Tolerances,
    word: &mut Vec<i32>,
    stack: &mut Vec<MobiusMap>,
    out: &mut LinePattern,
) {
    let w = *stack.last().unwrap();
    // w·c and w give the same line; the longer product only loses precision
    if !ends_with_power(word, curve) {
        let line = w.apply(axis);
        if line.distance_to(&HPoint::I) < window.radius {
            record(out, line, label, word, tol.pattern_dedupe);
        }
    }
    if word.len() >= window.word_length_cap {
        return;
    }
    let rank = s.rank();
    for k in 1..=rank {
        for sgn in [k, -k] {
            if word.last() == Some(&-sgn) {
                continue;
            }
            word.push(sgn);
            stack.push(w * s.letter(sgn));
            visit(s, curve, axis, label, window, tol, word, stack, out);
            stack.pop();
            word.pop();
        }
    }
}

fn ends_with_power(word: &[i32], curve: &[i32]) -> bool {
    let n = curve.len();
    if word.len() < n {
        return false;
    }
    let tail = &word[word.len() - n..];
    tail == curve || tail.iter().zip(curve.iter().rev()).all(|(a, b)| *a == -*b)
}

fn record(out: &mut LinePattern, line: Geodesic, label: &str, word: &[i32], tol: f64) {
    for existing in out.lines.iter_mut() {
        if same_line(&existing.geodesic, &line, tol) {
            if existing.orbit_label != label {
                let pair = if existing.orbit_label.as_str() < label {
                    (existing.orbit_label.clone(), String::from(label))
                } else {
                    (String::from(label), existing.orbit_label.clone())
                };
                if !out.coincidences.contains(&pair) {
                    out.coincidences.push(pair);
                }
            } else if word_key(word) < word_key(&existing.conjugator) {
                existing.conjugator = word.to_vec();
                existing.geodesic = line;
            }
            return;
        }
    }
    out.lines.push(PatternLine {
        geodesic: line,
        orbit_label: String::from(label),
        conjugator: word.to_vec(),
    });
}

/// True when raising the cap by one adds no line to the window.
pub fn is_saturated(
    surface: &SurfaceGroupPresentation,
    curves: &[CurveSpec],
    window: &Window,
) -> Result<bool> {
    let a = generate_pattern(surface, curves, window)?;
    let b = generate_pattern(
        surface,
        curves,
        &Window { word_length_cap: window.word_length_cap + 1, ..*window },
    )?;
    Ok(a.len() == b.len())
}

/// Saturation restricted to the lines meeting the ball of radius `inner`,
/// which is all a certificate built from that ball reads.
pub fn is_saturated_within(
    surface: &SurfaceGroupPresentation,
    curves: &[CurveSpec],
    window: &Window,
    inner: f64,
) -> Result<bool> {
    let count = |cap| -> Result<usize> {
        let p = generate_pattern(surface, curves, &Window { word_length_cap: cap, ..*window })?;
        Ok(p.lines.iter().filter(|l| l.geodesic.distance_to(&HPoint::I) < inner).count())
    };
    Ok(count(window.word_length_cap)? == count(window.word_length_cap + 1)?)
}

// ---------------------------------------------------------------------------
// arrangement

/// Bitset of sides, bit set = inner side.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignVector(pub Vec<u64>);

impl SignVector {
    pub fn zeros(n: usize) -> Self {
        SignVector(vec![0; n.div_ceil(64).max(1)])
    }
    pub fn get(&self, i: usize) -> bool {
        (self.0[i / 64] >> (i % 64)) & 1 == 1
    }
    pub fn flip(&mut self, i: usize) {
        self.0[i / 64] ^= 1 << (i % 64);
    }
    pub fn set(&mut self, i: usize, v: bool) {
        if v {
            self.0[i / 64] |= 1 << (i % 64);
        } else {
            self.0[i / 64] &= !(1 << (i % 64));
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrangementLine {
    /// Index into the pattern.
    pub pattern_index: usize,
    pub geodesic: Geodesic,
    /// Arclength parameters where the line enters and leaves the window.
    pub t_in: f64,
    pub t_out: f64,
    /// Parameter of the closest point to i, and that distance.
    pub t_foot: f64,
    pub depth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    Exit(usize),
    Vertex(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrangementVertex {
    pub point: HPoint,
    pub lines: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArrangementEdge {
    pub line: usize,
    pub from: Stop,
    pub to: Stop,
    pub t0: f64,
    pub t1: f64,
    pub inner: usize,
    pub outer: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chamber {
    pub signs: SignVector,
    pub bounded: bool,
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
    pub window_arcs: usize,
    pub sample: HPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChamberComplex {
    pub radius: f64,
    pub lines: Vec<ArrangementLine>,
    pub vertices: Vec<ArrangementVertex>,
    /// Exit points on the window circle: (point, disc angle, line).
    pub exits: Vec<(HPoint, f64, usize)>,
    pub edges: Vec<ArrangementEdge>,
    pub chambers: Vec<Chamber>,
    pub window_arcs: usize,
}

impl ChamberComplex {
    pub fn signs_at(&self, z: &HPoint) -> SignVector {
        let mut s = SignVector::zeros(self.lines.len());
        for (i, l) in self.lines.iter().enumerate() {
            s.set(i, l.geodesic.side(z) == Side::Inner);
        }
        s
    }

    pub fn chamber_of(&self, z: &HPoint) -> Option<usize> {
        let s = self.signs_at(z);
        self.chambers.iter().position(|c| c.signs == s)
    }

    pub fn bounded_count(&self) -> usize {
        self.chambers.iter().filter(|c| c.bounded).count()
    }

    /// Distance from i to the part of an edge inside the window.
    pub fn edge_depth(&self, e: &ArrangementEdge) -> f64 {
        let l = &self.lines[e.line];
        let dt = if l.t_foot < e.t0 {
            e.t0 - l.t_foot
        } else if l.t_foot > e.t1 {
            l.t_foot - e.t1
        } else {
            0.0
        };
        // right triangle: cosh(hyp) = cosh(a) cosh(b)
        acosh(cosh(l.depth) * cosh(dt))
    }
}

struct Crossing {
    a: usize,
    b: usize,
    ta: f64,
    tb: f64,
    point: HPoint,
}

/// Arrangement of the pattern lines clipped to the window ball.
pub fn arrangement(pattern: &LinePattern, window: &Window) -> Result<ChamberComplex> {
    arrangement_with(&pattern.geodesics(), window.radius, &Tolerances::DEFAULT)
}

pub fn arrangement_with(geodesics: &[Geodesic], radius: f64, tol: &Tolerances) -> Result<ChamberComplex> {
    let mut lines = Vec::new();
    for (i, g) in geodesics.iter().enumerate() {
        let depth = g.distance_to(&HPoint::I);
        if depth >= radius {
            continue;
        }
        let t_foot = g.foot_parameter(&HPoint::I);
        let s = acosh(cosh(radius) / cosh(depth));
        lines.push(ArrangementLine {
            pattern_index: i,
            geodesic: *g,
            t_in: t_foot - s,
            t_out: t_foot + s,
            t_foot,
            depth,
        });
    }
    let n = lines.len();

    // pairwise crossings inside the window
    let mut crossings = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            let (ga, gb) = (&lines[a].geodesic, &lines[b].geodesic);
            match crossing_with(ga, gb, tol.endpoint) {
                Err(_) => return Err(PatternError::SharedEndpoint(a, b)),
                Ok(false) => continue,
                Ok(true) => {}
            }
            let (ta, ang) = match ga.crossing_parameter(gb) {
                Some(x) => x,
                None => continue,
            };
            let point = ga.point_at(ta);
            if distance(&point, &HPoint::I) >= radius {
                continue;
            }
            if ang < tol.tangency_angle {
                return Err(PatternError::NearTangency(a, b, ang));
            }
            let tb = gb.foot_parameter(&point);
            crossings.push(Crossing { a, b, ta, tb, point });
        }
    }

    // merge concurrent crossings into vertices
    let mut order: Vec<usize> = (0..crossings.len()).collect();
    order.sort_by(|&i, &j| crossings[i].point.x().total_cmp(&crossings[j].point.x()));
    let mut parent: Vec<usize> = (0..crossings.len()).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for (k, &i) in order.iter().enumerate() {
        for &j in &order[k + 1..] {
            let (pi, pj) = (crossings[i].point, crossings[j].point);
            if pj.x() - pi.x() > tol.vertex_merge {
                break;
            }
            if fabs(pj.y() - pi.y()) <= tol.vertex_merge {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut vertex_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    let mut vertices: Vec<ArrangementVertex> = Vec::new();
    let mut crossing_vertex = vec![0usize; crossings.len()];
    for i in 0..crossings.len() {
        let r = find(&mut parent, i);
        let v = *vertex_of_root.entry(r).or_insert_with(|| {
            vertices.push(ArrangementVertex { point: crossings[r].point, lines: Vec::new() });
            vertices.len() - 1
        });
        crossing_vertex[i] = v;
        for l in [crossings[i].a, crossings[i].b] {
            if !vertices[v].lines.contains(&l) {
                vertices[v].lines.push(l);
            }
        }
    }
    for v in vertices.iter_mut() {
        v.lines.sort_unstable();
    }

    // stops along each line
    let mut stops: Vec<Vec<(f64, usize)>> = vec![Vec::new(); n];
    for (i, c) in crossings.iter().enumerate() {
        stops[c.a].push((c.ta, crossing_vertex[i]));
        stops[c.b].push((c.tb, crossing_vertex[i]));
    }
    let mut exits = Vec::new();
    let mut edges_raw: Vec<(usize, Stop, Stop, f64, f64)> = Vec::new();
    for (li, l) in lines.iter().enumerate() {
        let st = &mut stops[li];
        st.sort_by(|x, y| x.0.total_cmp(&y.0));
        st.dedup_by(|x, y| x.1 == y.1);
        let e_in = exits.len();
        for t in [l.t_in, l.t_out] {
            let z = l.geodesic.point_at(t);
            let (u, v) = z.to_disc();
            exits.push((z, wrap(libm::atan2(v, u)), li));
        }
        let mut prev = (l.t_in, Stop::Exit(e_in));
        for &(t, v) in st.iter() {
            edges_raw.push((li, prev.1, Stop::Vertex(v), prev.0, t));
            prev = (t, Stop::Vertex(v));
        }
        edges_raw.push((li, prev.1, Stop::Exit(e_in + 1), prev.0, l.t_out));
    }

    // chambers from edge sides and window arcs
    let mut index: BTreeMap<SignVector, usize> = BTreeMap::new();
    let mut chambers: Vec<Chamber> = Vec::new();
    let signs_at = |z: &HPoint| {
        let mut s = SignVector::zeros(n);
        for (i, l) in lines.iter().enumerate() {
            s.set(i, l.geodesic.side(z) == Side::Inner);
        }
        s
    };
    let mut intern = |s: SignVector, sample: HPoint, chambers: &mut Vec<Chamber>| -> usize {
        *index.entry(s.clone()).or_insert_with(|| {
            chambers.push(Chamber {
                signs: s,
                bounded: true,
                vertices: Vec::new(),
                edges: Vec::new(),
                window_arcs: 0,
                sample,
            });
            chambers.len() - 1
        })
    };
    let mut edges = Vec::with_capacity(edges_raw.len());
    for (ei, &(li, from, to, t0, t1)) in edges_raw.iter().enumerate() {
        let mid = lines[li].geodesic.point_at((t0 + t1) / 2.0);
        let mut s = signs_at(&mid);
        s.set(li, true);
        let inner = intern(s.clone(), mid, &mut chambers);
        s.set(li, false);
        let outer = intern(s, mid, &mut chambers);
        for c in [inner, outer] {
            chambers[c].edges.push(ei);
            for stop in [from, to] {
                if let Stop::Vertex(v) = stop {
                    if !chambers[c].vertices.contains(&v) {
                        chambers[c].vertices.push(v);
                    }
                }
            }
        }
        edges.push(ArrangementEdge { line: li, from, to, t0, t1, inner, outer });
    }
    let window_arcs;
    if exits.is_empty() {
        let c = intern(SignVector::zeros(n), HPoint::I, &mut chambers);
        chambers[c].window_arcs = 1;
        chambers[c].bounded = false;
        window_arcs = 0;
    } else {
        let mut angs: Vec<f64> = exits.iter().map(|e| e.1).collect();
        angs.sort_by(|a, b| a.total_cmp(b));
        let rho = libm::tanh(radius / 2.0);
        for k in 0..angs.len() {
            let a0 = angs[k];
            let a1 = if k + 1 < angs.len() { angs[k + 1] } else { angs[0] + 2.0 * PI };
            let th = (a0 + a1) / 2.0;
            let z = HPoint::from_disc(rho * libm::cos(th), rho * libm::sin(th))?;
            let c = intern(signs_at(&z), z, &mut chambers);
            chambers[c].window_arcs += 1;
            chambers[c].bounded = false;
        }
        window_arcs = angs.len();
    }

    let v_count = vertices.len() + exits.len();
    let e_count = edges.len() + window_arcs;
    let f = chambers.len();
    if v_count + f != e_count + 1 {
        return Err(PatternError::EulerMismatch { v: v_count, e: e_count, f });
    }

    // deterministic chamber order
    let cmp_pt = |p: &HPoint, q: &HPoint| p.x().total_cmp(&q.x()).then(p.y().total_cmp(&q.y()));
    let keys: Vec<Vec<HPoint>> = chambers
        .iter()
        .map(|c| {
            let mut pts: Vec<HPoint> = c.vertices.iter().map(|&v| vertices[v].point).collect();
            pts.sort_by(cmp_pt);
            pts
        })
        .collect();
    let mut perm: Vec<usize> = (0..f).collect();
    perm.sort_by(|&i, &j| {
        let (a, b) = (&keys[i], &keys[j]);
        let mut o = Ordering::Equal;
        for (p, q) in a.iter().zip(b.iter()) {
            o = cmp_pt(p, q);
            if o != Ordering::Equal {
                break;
            }
        }
        o.then(a.len().cmp(&b.len())).then(chambers[i].signs.cmp(&chambers[j].signs))
    });
    let mut new_id = vec![0usize; f];
    for (k, &old) in perm.iter().enumerate() {
        new_id[old] = k;
    }
    let mut sorted: Vec<Chamber> = perm.iter().map(|&i| chambers[i].clone()).collect();
    for c in sorted.iter_mut() {
        c.vertices.sort_unstable();
    }
    for e in edges.iter_mut() {
        e.inner = new_id[e.inner];
        e.outer = new_id[e.outer];
    }

    Ok(ChamberComplex { radius, lines, vertices, exits, edges, chambers: sorted, window_arcs })
}

// ---------------------------------------------------------------------------
// filling

#[derive(Debug, Clone, PartialEq)]
pub struct FillingReport {
    pub filling: bool,
    /// An unbounded chamber reaching into the interior region, when not filling.
    pub witness: Option<usize>,
    pub interior_chambers: usize,
    pub inner_bounded: usize,
    pub margin: f64,
}

/// A window is filling when every chamber reaching into the ball of radius
/// (radius - margin) is bounded inside the window.
pub fn filling_check(cc: &ChamberComplex, margin: f64) -> Result<FillingReport> {
    let inner = cc.radius - margin;
    if inner <= 0.0 {
        return Err(PatternError::WindowTooSmall);
    }
    let centre = cc.chamber_of(&HPoint::I);
    let mut interior = vec![false; cc.chambers.len()];
    if let Some(c) = centre {
        interior[c] = true;
    }
    for e in &cc.edges {
        if cc.edge_depth(e) < inner {
            interior[e.inner] = true;
            interior[e.outer] = true;
        }
    }
    let interior_chambers = interior.iter().filter(|&&b| b).count();
    let witness = (0..cc.chambers.len()).find(|&c| interior[c] && !cc.chambers[c].bounded);
    let inner_bounded = cc
        .chambers
        .iter()
        .filter(|c| {
            c.bounded
                && !c.vertices.is_empty()
                && c.vertices.iter().all(|&v| distance(&cc.vertices[v].point, &HPoint::I) < inner)
        })
        .count();
    if witness.is_none() && inner_bounded == 0 {
        return Err(PatternError::WindowTooSmall);
    }
    Ok(FillingReport { filling: witness.is_none(), witness, interior_chambers, inner_bounded, margin })
}

/// Filling decided on the surface itself. The union of the curves is a
/// graph on the surface whose vertices are crossing orbits; every orbit has
/// a representative on one period of each curve's lift nearest the base
/// point, and the rotation at it is read off in the window. Tracing face
/// boundaries gives V − E + #boundaries ≥ χ(S), with equality exactly when
/// every complementary region is a disc.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicFillingReport {
    pub filling: bool,
    /// A chamber lifting a complementary region that is not a disc (a
    /// region beside a crossing-free curve, or one unbounded in the window).
    pub witness: Option<usize>,
    pub vertices: usize,
    pub edges: usize,
    pub boundaries: usize,
    pub euler_characteristic: i64,
    pub margin: f64,
}

struct PeriodCrossing {
    tau: f64,
    vertex: usize,
}

fn reduce(t: f64, period: f64) -> f64 {
    let r = libm::fmod(t, period);
    if r < 0.0 {
        r + period
    } else {
        r
    }
}

fn circle_gap(a: f64, b: f64, period: f64) -> f64 {
    let d = reduce(a - b, period);
    d.min(period - d)
}

pub fn certify_filling(
    cc: &ChamberComplex,
    pattern: &LinePattern,
    surface: &SurfaceGroupPresentation,
    margin: f64,
) -> Result<PeriodicFillingReport> {
    const STEP: f64 = 1e-4;
    const MATCH: f64 = 1e-6;
    let inner = cc.radius - margin;
    if inner <= 0.0 {
        return Err(PatternError::WindowTooSmall);
    }
    let chi = 2 - 2 * surface.genus as i64;
    let report = |filling, witness, v, e, f| PeriodicFillingReport {
        filling,
        witness,
        vertices: v,
        edges: e,
        boundaries: f,
        euler_characteristic: chi,
        margin,
    };
    if pattern.periods.is_empty() || cc.lines.is_empty() {
        return Ok(report(false, cc.chamber_of(&HPoint::I), 0, 0, 0));
    }
    let curve_of = |line: usize| -> usize {
        let label = &pattern.lines[cc.lines[line].pattern_index].orbit_label;
        pattern.periods.iter().position(|(l, _)| l == label).unwrap()
    };
    let pull = |line: usize, z: &HPoint| -> HPoint {
        let w = &pattern.lines[cc.lines[line].pattern_index].conjugator;
        surface.evaluate(w).inverse().apply(z)
    };
    // base-axis parameter of a window point on `line`
    let tau_of = |line: usize, z: &HPoint| -> f64 {
        let c = curve_of(line);
        reduce(pattern.axes[c].foot_parameter(&pull(line, z)), pattern.periods[c].1)
    };

    let mut lists: Vec<Vec<PeriodCrossing>> = Vec::new();
    let mut reps: Vec<usize> = Vec::new();
    // does the window parameter of each representative run with the base axis?
    let mut along: Vec<bool> = Vec::new();
    for (label, period) in &pattern.periods {
        let rep = (0..cc.lines.len())
            .filter(|&i| pattern.lines[cc.lines[i].pattern_index].orbit_label == *label)
            .min_by(|&a, &b| cc.lines[a].depth.total_cmp(&cc.lines[b].depth))
            .ok_or(PatternError::WindowTooSmall)?;
        let l = &cc.lines[rep];
        let half = 0.5 * period;
        if acosh(cosh(l.depth) * cosh(half)) >= inner {
            return Err(PatternError::WindowTooSmall);
        }
        let (lo, hi) = (l.t_foot - half - 1e-6, l.t_foot + half + 1e-6);
        let mut list: Vec<PeriodCrossing> = Vec::new();
        for e in cc.edges.iter().filter(|e| e.line == rep) {
            for (stop, t) in [(e.from, e.t0), (e.to, e.t1)] {
                if let Stop::Vertex(v) = stop {
                    if t >= lo && t <= hi {
                        let tau = tau_of(rep, &cc.vertices[v].point);
                        if !list.iter().any(|x| circle_gap(x.tau, tau, *period) < MATCH) {
                            list.push(PeriodCrossing { tau, vertex: v });
                        }
                    }
                }
            }
        }
        if list.is_empty() {
            // a crossing-free curve: the chamber beside it lifts an annulus
            let e = cc
                .edges
                .iter()
                .find(|e| e.line == rep && e.t0 <= l.t_foot && l.t_foot <= e.t1)
                .ok_or(PatternError::WindowTooSmall)?;
            return Ok(report(false, Some(e.inner), 0, 0, 0));
        }
        list.sort_by(|a, b| a.tau.total_cmp(&b.tau));
        lists.push(list);
        reps.push(rep);
        let (p0, p1) = (l.geodesic.point_at(l.t_foot), l.geodesic.point_at(l.t_foot + STEP));
        along.push(reduce(tau_of(rep, &p1) - tau_of(rep, &p0) + half, *period) > half);
    }

    // half-edges at a window vertex, counter-clockwise: (line, direction)
    let rotation = |v: usize| -> Vec<(usize, bool, f64)> {
        let z = cc.vertices[v].point;
        let mut h: Vec<(usize, bool, f64)> = Vec::new();
        for &line in &cc.vertices[v].lines {
            let g = &cc.lines[line].geodesic;
            let t = g.foot_parameter(&z);
            for forward in [true, false] {
                let q = g.point_at(if forward { t + STEP } else { t - STEP });
                h.push((line, forward, libm::atan2(q.y() - z.y(), q.x() - z.x())));
            }
        }
        h.sort_by(|a, b| a.2.total_cmp(&b.2));
        h
    };
    // dart: (curve, interval, forward); interval j runs from entry j to j+1
    let index = |c: usize, j: usize, forward: bool| -> usize {
        let base: usize = lists[..c].iter().map(|l| 2 * l.len()).sum();
        base + 2 * j + forward as usize
    };
    let darts: usize = lists.iter().map(|l| 2 * l.len()).sum();
    let mut next = vec![usize::MAX; darts];
    let mut corner = vec![None; darts];
    for c in 0..lists.len() {
        let k = lists[c].len();
        for j in 0..k {
            for forward in [true, false] {
                let entry = if forward { (j + 1) % k } else { j };
                let v = lists[c][entry].vertex;
                let rot = rotation(v);
                // the half-edge pointing back along the arrival direction
                let back = rot
                    .iter()
                    .position(|&(line, f, _)| line == reps[c] && f != (forward == along[c]))
                    .ok_or(PatternError::WindowTooSmall)?;
                let out = rot[(back + 1) % rot.len()];
                // orient the outgoing half-edge on its own curve's base axis
                let (line, f, _) = out;
                let c2 = curve_of(line);
                let z = cc.vertices[v].point;
                let g = &cc.lines[line].geodesic;
                let t = g.foot_parameter(&z);
                let tau = tau_of(line, &z);
                let ahead = tau_of(line, &g.point_at(if f { t + STEP } else { t - STEP }));
                let period = pattern.periods[c2].1;
                let up = reduce(ahead - tau + 0.5 * period, period) > 0.5 * period;
                let e2 = lists[c2]
                    .iter()
                    .position(|x| circle_gap(x.tau, tau, period) < MATCH)
                    .ok_or(PatternError::WindowTooSmall)?;
                let k2 = lists[c2].len();
                let d = index(c, j, forward);
                next[d] = if up { index(c2, e2, true) } else { index(c2, (e2 + k2 - 1) % k2, false) };
                // a sample point in the angle between the two half-edges
                let (a0, a1) = (rot[back].2, out.2);
                let mid = a0 + 0.5 * wrap(a1 - a0);
                let r = 1e-6 * z.y();
                corner[d] = HPoint::new(z.x() + r * libm::cos(mid), z.y() + r * libm::sin(mid)).ok().and_then(|p| cc.chamber_of(&p));
            }
        }
    }
    let mut seen = vec![false; darts];
    let mut boundaries = 0usize;
    let mut witness = None;
    for s in 0..darts {
        if seen[s] {
            continue;
        }
        boundaries += 1;
        let mut d = s;
        let mut chambers = Vec::new();
        while !seen[d] {
            seen[d] = true;
            chambers.extend(corner[d]);
            d = next[d];
        }
        if witness.is_none() {
            witness = chambers.into_iter().find(|&ch| !cc.chambers[ch].bounded);
        }
    }
    let e = darts / 2;
    let branches: f64 =
        lists.iter().flatten().map(|x| 1.0 / cc.vertices[x.vertex].lines.len() as f64).sum();
    let v = libm::round(branches) as usize;
    let filling = v as i64 - e as i64 + boundaries as i64 == chi;
    Ok(report(filling, if filling { None } else { witness.or(cc.chamber_of(&HPoint::I)) }, v, e, boundaries))
}

// ---------------------------------------------------------------------------
// shadow graph

#[derive(Debug, Clone, PartialEq)]
pub struct ShadowGraph {
    pub vertex_count: usize,
    /// (chamber, chamber, line)
    pub edges: Vec<(usize, usize, usize)>,
    pub max_degree: usize,
}

pub fn shadow_graph(cc: &ChamberComplex) -> ShadowGraph {
    let edges: Vec<(usize, usize, usize)> = cc.edges.iter().map(|e| (e.inner, e.outer, e.line)).collect();
    let mut deg = vec![0usize; cc.chambers.len()];
    for &(a, b, _) in &edges {
        deg[a] += 1;
        deg[b] += 1;
    }
    ShadowGraph { vertex_count: cc.chambers.len(), max_degree: deg.iter().copied().max().unwrap_or(0), edges }
}

impl ShadowGraph {
    pub fn degree(&self, v: usize) -> usize {
        self.edges.iter().filter(|e| e.0 == v || e.1 == v).count()
    }

    pub fn is_connected(&self) -> bool {
        if self.vertex_count == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); self.vertex_count];
        for &(a, b, _) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; self.vertex_count];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        seen.iter().all(|&s| s)
    }
}

/// Lines of the pattern that lift the same curve more than one way — i.e. a
/// curve whose lifts cross each other (a self-intersecting curve).
pub fn self_crossings(cc: &ChamberComplex, pattern: &LinePattern) -> usize {
    cc.vertices
        .iter()
        .map(|v| {
            let labs: Vec<&str> =
                v.lines.iter().map(|&l| pattern.lines[cc.lines[l].pattern_index].orbit_label.as_str()).collect();
            let mut k = 0;
            for i in 0..labs.len() {
                for j in i + 1..labs.len() {
                    if labs[i] == labs[j] {
                        k += 1;
                    }
                }
            }
            k
        })
        .sum()
}
