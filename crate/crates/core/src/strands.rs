//! Strands of periodic hyperplanes, strand types, churros and clutching ratios.
//!
//! A point of a model is a vector of wall coordinates in [0, 1]: coordinate
//! w is 0 or 1 on the two sides of wall w and varies only inside cubes
//! crossed by w. Two points in a common cube are at Euclidean distance.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use libm::{fabs, log, sqrt};

use crate::config::Tolerances;
use crate::cubulation::{cubulate, CubeComplexModel, CubeMap, CubulationError, WallSystem};
use crate::groupings::Q;
use crate::hyperbolic::{angular_gap, HPoint, Horostrip, MobiusMap};
use crate::patterns::{ChamberComplex, SignVector};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StrandError {
    #[error("period map fixes carrier vertex {0}")]
    NotTranslating(usize),
    #[error("shortening did not converge in {0} sweeps")]
    NoConvergence(usize),
    #[error("generator {0} does not preserve the strand")]
    NotStabilizing(usize),
    #[error("window too small around the carrier of wall {0}")]
    WindowTooSmall(usize),
    #[error("unknown wall {0}")]
    UnknownWall(usize),
    #[error("flap counts {0} and {1} differ")]
    ArityMismatch(usize, usize),
    #[error("flap length {0} is not positive")]
    BadLength(f64),
    #[error("churro without flaps")]
    NoFlaps,
    #[error("cells do not form a cube complex: {0}")]
    BadCells(&'static str),
    #[error(transparent)]
    Cubulation(#[from] CubulationError),
}

pub type Result<T> = core::result::Result<T, StrandError>;

pub type Point = Vec<f64>;

fn dist(a: &[f64], b: &[f64]) -> f64 {
    sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

fn dist_l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| fabs(x - y)).sum()
}

pub fn vertex_point(model: &CubeComplexModel, v: usize) -> Point {
    let s = &model.vertices[v];
    (0..model.walls).map(|i| if s.get(i) { 1.0 } else { 0.0 }).collect()
}

/// Image of a point under a partial map; None when the point has a
/// non-integral or off-base coordinate on an unmapped wall.
pub fn map_point(map: &CubeMap, model: &CubeComplexModel, x: &[f64]) -> Option<Point> {
    let b = &model.vertices[map.base];
    let mut y = vertex_point(model, map.base_image);
    for (i, &xi) in x.iter().enumerate() {
        match map.wall_map[i] {
            Some(j) => y[j] = if map.flip[i] { 1.0 - xi } else { xi },
            None if xi != if b.get(i) { 1.0 } else { 0.0 } => return None,
            None => {}
        }
    }
    Some(y)
}

pub fn inverse_map(map: &CubeMap, walls: usize) -> CubeMap {
    let mut wall_map = vec![None; walls];
    let mut flip = vec![false; walls];
    for (i, j) in map.wall_map.iter().enumerate() {
        if let Some(j) = *j {
            wall_map[j] = Some(i);
            flip[j] = map.flip[i];
        }
    }
    CubeMap { wall_map, flip, base: map.base_image, base_image: map.base }
}

/// A cube of the carrier as its sorted vertex set and wall list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CarrierCube {
    pub vertices: Vec<usize>,
    pub walls: Vec<usize>,
}

/// The face shared by two consecutive carrier cubes, with the strand's
/// point restricted to `template` off the free walls.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub free: Vec<usize>,
    pub template: Point,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrandModel {
    pub hyperplane: usize,
    pub period_map: CubeMap,
    /// C_0 .. C_m, with C_m the image of C_0.
    pub gallery: Vec<CarrierCube>,
    pub faces: Vec<Face>,
    /// p_0 .. p_m, p_i on the face after C_i; p_m is the image of p_0.
    pub axis_polyline: Vec<Point>,
    pub tau: f64,
    pub tau_l1: f64,
    /// Period length after each sweep, starting with the initial polyline.
    pub history: Vec<f64>,
}

impl StrandModel {
    pub fn sweeps(&self) -> usize {
        self.history.len() - 1
    }
}

fn carrier_cubes(model: &CubeComplexModel, wall: usize) -> Vec<CarrierCube> {
    let all: Vec<CarrierCube> = model
        .cubes
        .iter()
        .filter(|c| c.walls.contains(&wall))
        .map(|c| {
            let mut vertices = model.cube_vertices(c);
            vertices.sort_unstable();
            let mut walls = c.walls.clone();
            walls.sort_unstable();
            CarrierCube { vertices, walls }
        })
        .collect();
    let d = all.iter().map(|c| c.walls.len()).max().unwrap_or(0);
    all.into_iter().filter(|c| c.walls.len() == d).collect()
}

fn period_length(model: &CubeComplexModel, s: &[Point], period: &CubeMap) -> (f64, f64) {
    let last = map_point(period, model, &s[0]).expect("period image");
    let mut l2 = 0.0;
    let mut l1 = 0.0;
    for i in 0..s.len() {
        let next = if i + 1 < s.len() { &s[i + 1] } else { &last };
        l2 += dist(&s[i], next);
        l1 += dist_l1(&s[i], next);
    }
    (l2, l1)
}

/// Minimises |p - a| + |p - b| over the face box, p restricted to the free
/// walls; every sub-face of the box is tried with the planar unfolding of
/// the two distances and the best admissible candidate wins.
fn minimise_on_face(face: &Face, a: &[f64], b: &[f64], current: &[f64]) -> Point {
    let k = face.free.len();
    let eval = |p: &[f64]| dist(p, a) + dist(p, b);
    let mut best = current.to_vec();
    let mut best_val = eval(current);
    let mut states = vec![0u8; k];
    loop {
        let mut p = face.template.clone();
        let mut ha = 0.0;
        let mut hb = 0.0;
        for (t, &w) in face.free.iter().enumerate() {
            if states[t] > 0 {
                p[w] = (states[t] - 1) as f64;
            }
        }
        for i in 0..p.len() {
            let free = face.free.iter().position(|&w| w == i).map(|t| states[t] == 0).unwrap_or(false);
            if !free {
                ha += (p[i] - a[i]) * (p[i] - a[i]);
                hb += (p[i] - b[i]) * (p[i] - b[i]);
            }
        }
        let (ha, hb) = (sqrt(ha), sqrt(hb));
        let t = if ha + hb > 0.0 { ha / (ha + hb) } else { 0.5 };
        let mut ok = true;
        for (s, &w) in states.iter().zip(&face.free) {
            if *s == 0 {
                let v = a[w] + t * (b[w] - a[w]);
                ok &= (-1e-15..=1.0 + 1e-15).contains(&v);
                p[w] = v.clamp(0.0, 1.0);
            }
        }
        let val = eval(&p);
        if ok && val < best_val {
            best_val = val;
            best = p;
        }
        // next state in base 3
        let mut t = 0;
        while t < k && states[t] == 2 {
            states[t] = 0;
            t += 1;
        }
        if t == k {
            return best;
        }
        states[t] += 1;
    }
}

/// Canonical strand of `hyperplane` for the translation `period`.
pub fn strand(model: &CubeComplexModel, hyperplane: usize, period: &CubeMap, tol: &Tolerances) -> Result<StrandModel> {
    strand_with_budget(model, hyperplane, period, tol, tol.max_shortening_iterations)
}

pub fn strand_with_budget(model: &CubeComplexModel, hyperplane: usize, period: &CubeMap, tol: &Tolerances, budget: usize) -> Result<StrandModel> {
    if hyperplane >= model.walls {
        return Err(StrandError::UnknownWall(hyperplane));
    }
    let carrier = carrier_cubes(model, hyperplane);
    if carrier.is_empty() {
        return Err(StrandError::WindowTooSmall(hyperplane));
    }
    let carrier_vertices: BTreeSet<usize> = carrier.iter().flat_map(|c| c.vertices.iter().copied()).collect();
    for &v in &carrier_vertices {
        if period.apply(model, model, v) == Some(v) {
            return Err(StrandError::NotTranslating(v));
        }
    }
    let image = |c: &CarrierCube| -> Option<usize> {
        let mut vs: Vec<usize> = c.vertices.iter().map(|&v| period.apply(model, model, v)).collect::<Option<_>>()?;
        vs.sort_unstable();
        carrier.iter().position(|d| d.vertices == vs)
    };
    let mut order: Vec<usize> = (0..carrier.len()).filter(|&i| carrier[i].vertices.contains(&period.base)).collect();
    order.extend((0..carrier.len()).filter(|&i| !carrier[i].vertices.contains(&period.base)));
    let (start, end) = order
        .iter()
        .find_map(|&i| image(&carrier[i]).map(|j| (i, j)))
        .ok_or(StrandError::WindowTooSmall(hyperplane))?;
    if start == end {
        return Err(StrandError::NotTranslating(carrier[start].vertices[0]));
    }

    // shortest gallery through codimension-one faces
    let d = carrier[0].walls.len();
    let shared = |i: usize, j: usize| carrier[i].vertices.iter().filter(|v| carrier[j].vertices.binary_search(v).is_ok()).count();
    let mut prev = vec![usize::MAX; carrier.len()];
    prev[start] = start;
    let mut queue = vec![start];
    let mut head = 0;
    while head < queue.len() && prev[end] == usize::MAX {
        let c = queue[head];
        head += 1;
        for n in 0..carrier.len() {
            if prev[n] == usize::MAX && shared(c, n) == 1 << (d - 1) {
                prev[n] = c;
                queue.push(n);
            }
        }
    }
    if prev[end] == usize::MAX {
        return Err(StrandError::WindowTooSmall(hyperplane));
    }
    let mut path = vec![end];
    while *path.last().unwrap() != start {
        path.push(prev[*path.last().unwrap()]);
    }
    path.reverse();
    let gallery: Vec<CarrierCube> = path.iter().map(|&i| carrier[i].clone()).collect();
    let m = gallery.len() - 1;

    let faces: Vec<Face> = (0..m)
        .map(|i| {
            let (c, n) = (&gallery[i], &gallery[i + 1]);
            let v = *c.vertices.iter().find(|v| n.vertices.binary_search(v).is_ok()).unwrap();
            let mut template = vertex_point(model, v);
            template[hyperplane] = 0.5;
            let free: Vec<usize> = c.walls.iter().copied().filter(|w| *w != hyperplane && n.walls.contains(w)).collect();
            for &w in &free {
                template[w] = 0.5;
            }
            Face { free, template }
        })
        .collect();
    let inverse = inverse_map(period, model.walls);
    let mut s: Vec<Point> = faces.iter().map(|f| f.template.clone()).collect();
    if map_point(period, model, &s[0]).is_none() || map_point(&inverse, model, &s[m - 1]).is_none() {
        return Err(StrandError::WindowTooSmall(hyperplane));
    }
    let (mut len, _) = period_length(model, &s, period);
    let mut history = vec![len];
    loop {
        if history.len() > budget {
            return Err(StrandError::NoConvergence(budget));
        }
        let before = s.clone();
        for i in 0..m {
            let a = if i == 0 { map_point(&inverse, model, &s[m - 1]) } else { Some(s[i - 1].clone()) };
            let b = if i + 1 < m { Some(s[i + 1].clone()) } else { map_point(period, model, &s[0]) };
            let (Some(a), Some(b)) = (a, b) else {
                return Err(StrandError::WindowTooSmall(hyperplane));
            };
            let candidate = minimise_on_face(&faces[i], &a, &b, &s[i]);
            let old = core::mem::replace(&mut s[i], candidate);
            // with one face per period both neighbours move with the point
            if m == 1 && period_length(model, &s, period).0 > len {
                s[i] = old;
            }
        }
        let (mut next, _) = period_length(model, &s, period);
        // zigzagging sweeps creep along narrow valleys; extrapolate the sweep
        let mut step = 1.0;
        while step < 1e6 {
            let trial: Vec<Point> = s
                .iter()
                .zip(&before)
                .zip(&faces)
                .map(|((p, q), f)| {
                    let mut t = p.clone();
                    for &w in &f.free {
                        t[w] = (p[w] + step * (p[w] - q[w])).clamp(0.0, 1.0);
                    }
                    t
                })
                .collect();
            match map_point(period, model, &trial[0]) {
                Some(_) => {}
                None => break,
            }
            let (l, _) = period_length(model, &trial, period);
            if l >= next {
                break;
            }
            next = l;
            s = trial;
            step *= 3.0;
        }
        let change = len - next;
        len = next.min(len);
        history.push(len);
        if fabs(change) < tol.shortening {
            break;
        }
    }
    let (tau, tau_l1) = period_length(model, &s, period);
    s.push(map_point(period, model, &s[0]).unwrap());
    Ok(StrandModel { hyperplane, period_map: period.clone(), gallery, faces, axis_polyline: s, tau, tau_l1, history })
}

/// The polyline continued `k` periods each way, as far as the window allows.
pub fn extended_polyline(model: &CubeComplexModel, st: &StrandModel, k: usize) -> Vec<Point> {
    let inverse = inverse_map(&st.period_map, model.walls);
    let m = st.axis_polyline.len() - 1;
    let core = &st.axis_polyline[..m];
    let mut pts: Vec<Point> = core.to_vec();
    let mut cur: Vec<Point> = core.to_vec();
    let mut extended = false;
    for _ in 0..k {
        match cur.iter().map(|p| map_point(&st.period_map, model, p)).collect::<Option<Vec<_>>>() {
            Some(next) => {
                pts.extend(next.iter().cloned());
                cur = next;
                extended = true;
            }
            None => break,
        }
    }
    match map_point(&st.period_map, model, &cur[0]) {
        Some(p) => pts.push(p),
        None if !extended => pts.push(st.axis_polyline[m].clone()),
        None => {}
    }
    let mut cur: Vec<Point> = core.to_vec();
    for _ in 0..k {
        match cur.iter().map(|p| map_point(&inverse, model, p)).collect::<Option<Vec<_>>>() {
            Some(prev) => {
                let mut joined = prev.clone();
                joined.extend(pts);
                pts = joined;
                cur = prev;
            }
            None => break,
        }
    }
    pts
}

fn point_segment_distance(p: &[f64], a: &[f64], b: &[f64]) -> (f64, f64) {
    let ab: f64 = a.iter().zip(b).map(|(x, y)| (y - x) * (y - x)).sum();
    let t = if ab == 0.0 { 0.0 } else { (a.iter().zip(b).zip(p).map(|((x, y), z)| (y - x) * (z - x)).sum::<f64>() / ab).clamp(0.0, 1.0) };
    let q: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect();
    (dist(p, &q), t)
}

/// Distance to a polyline and the arclength position of the nearest point.
fn locate(p: &[f64], line: &[Point]) -> (f64, f64) {
    let mut best = (f64::INFINITY, 0.0);
    let mut acc = 0.0;
    for w in line.windows(2) {
        let l = dist(&w[0], &w[1]);
        let (d, t) = point_segment_distance(p, &w[0], &w[1]);
        if d < best.0 {
            best = (d, acc + t * l);
        }
        acc += l;
    }
    best
}

/// Partial wall map of a window model induced by an isometry `g` of the
/// plane: a wall maps to the window line on which g lays it, if there is
/// one. The base vertex is the chamber of `base`, sent to the chamber of g(base).
pub fn deck_map(cc: &ChamberComplex, model: &CubeComplexModel, g: &MobiusMap, base: &HPoint, tol: &Tolerances) -> Option<CubeMap> {
    let lines: Vec<(f64, f64)> = cc.lines.iter().map(|l| l.geodesic.angles()).collect();
    let eps = tol.pattern_dedupe;
    let mut wall_map = vec![None; model.walls];
    let mut flip = vec![false; model.walls];
    for (i, l) in cc.lines.iter().enumerate() {
        let (p, q) = l.geodesic.endpoints();
        let (a, b) = (g.apply(&p).angle(), g.apply(&q).angle());
        let j = lines.iter().position(|&(c, d)| {
            (angular_gap(a, c) <= eps && angular_gap(b, d) <= eps) || (angular_gap(a, d) <= eps && angular_gap(b, c) <= eps)
        });
        if let Some(j) = j {
            wall_map[i] = Some(j);
            // orientation preserving: inner sides correspond iff first ends do
            flip[i] = angular_gap(a, lines[j].0) > eps;
        }
    }
    let base_chamber = cc.chamber_of(base)?;
    let image_chamber = cc.chamber_of(&g.apply(base))?;
    Some(CubeMap { wall_map, flip, base: model.chamber_vertex[base_chamber], base_image: model.chamber_vertex[image_chamber] })
}

/// Largest distance from the image of a strand point to the (extended) strand.
pub fn invariance_defect(model: &CubeComplexModel, st: &StrandModel, map: &CubeMap) -> Option<f64> {
    let line = extended_polyline(model, st, 2);
    let mut worst: Option<f64> = None;
    for p in &st.axis_polyline {
        if let Some(q) = map_point(map, model, p) {
            let d = locate(&q, &line).0;
            worst = Some(worst.map_or(d, |w: f64| w.max(d)));
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StrandType {
    Z,
    Dihedral,
    ReflectiveZ,
    ReflectiveDihedral,
}

impl StrandType {
    pub fn is_reflective(self) -> bool {
        matches!(self, StrandType::ReflectiveZ | StrandType::ReflectiveDihedral)
    }
}

pub fn classify_strand(model: &CubeComplexModel, generators: &[CubeMap], st: &StrandModel, tol: &Tolerances) -> Result<StrandType> {
    let line = extended_polyline(model, st, 2);
    let h = st.hyperplane;
    let mut reflective = false;
    let mut dihedral = false;
    for (g, map) in generators.iter().enumerate() {
        if map.wall_map.get(h).copied().flatten() != Some(h) {
            return Err(StrandError::NotStabilizing(g));
        }
        let mut located = Vec::new();
        for p in &st.axis_polyline {
            if let Some(q) = map_point(map, model, p) {
                let (d, pos) = locate(&q, &line);
                if d > tol.strand_point {
                    return Err(StrandError::NotStabilizing(g));
                }
                located.push((locate(p, &line).1, pos, dist(p, &q)));
            }
        }
        if located.len() < 2 {
            return Err(StrandError::NotStabilizing(g));
        }
        let fixes = located.iter().all(|&(_, _, d)| d <= tol.strand_point);
        reflective |= fixes && map.flip[h];
        let (first, last) = (located[0], located[located.len() - 1]);
        dihedral |= (last.1 - first.1) * (last.0 - first.0) < 0.0;
    }
    Ok(match (dihedral, reflective) {
        (false, false) => StrandType::Z,
        (true, false) => StrandType::Dihedral,
        (false, true) => StrandType::ReflectiveZ,
        (true, true) => StrandType::ReflectiveDihedral,
    })
}

pub fn strand_density(t: StrandType) -> Q {
    if t.is_reflective() {
        Q::new(1, 2)
    } else {
        Q::from_integer(1)
    }
}

// ---------------------------------------------------------------------------
// churros and clutching

#[derive(Debug, Clone, PartialEq)]
pub struct Flap {
    pub id: String,
    pub strand: String,
    pub tau_sigma: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Churro {
    pub core_label: String,
    pub flaps: Vec<Flap>,
    pub tau_core: f64,
}

impl Churro {
    pub fn new(core_label: impl Into<String>, flaps: Vec<Flap>) -> Result<Self> {
        if flaps.is_empty() {
            return Err(StrandError::NoFlaps);
        }
        for f in &flaps {
            if !(f.tau_sigma > 0.0 && f.tau_sigma.is_finite()) {
                return Err(StrandError::BadLength(f.tau_sigma));
            }
        }
        let tau_core = flaps.iter().map(|f| f.tau_sigma).sum::<f64>() / flaps.len() as f64;
        Ok(Churro { core_label: core_label.into(), flaps, tau_core })
    }

    /// Flaps named by position, for synthetic data.
    pub fn from_taus(core_label: impl Into<String>, taus: &[f64]) -> Result<Self> {
        let flaps = taus
            .iter()
            .enumerate()
            .map(|(i, &t)| Flap { id: alloc::format!("f{}", i + 1), strand: alloc::format!("s{}", i + 1), tau_sigma: t })
            .collect();
        Churro::new(core_label, flaps)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClutchingData {
    pub taus: Vec<f64>,
    pub tau_core: f64,
    pub ratios: Vec<Vec<f64>>,
    pub widths: Vec<f64>,
    pub euclidean_flags: Vec<bool>,
}

impl ClutchingData {
    /// Horostrip metrizing flap i; None for a Euclidean flap.
    pub fn horostrip(&self, i: usize) -> Option<Horostrip> {
        if self.euclidean_flags[i] {
            return None;
        }
        let (a, b) = (self.tau_core, self.taus[i]);
        Horostrip::new(a.min(b), a.max(b)).ok()
    }
}

pub fn clutching(ch: &Churro) -> ClutchingData {
    clutching_with(ch, &Tolerances::DEFAULT)
}

pub fn clutching_with(ch: &Churro, tol: &Tolerances) -> ClutchingData {
    let taus: Vec<f64> = ch.flaps.iter().map(|f| f.tau_sigma).collect();
    let ratios = taus.iter().map(|a| taus.iter().map(|b| a / b).collect()).collect();
    let widths = taus.iter().map(|t| fabs(log(ch.tau_core / t))).collect();
    let euclidean_flags = taus.iter().map(|t| fabs(ch.tau_core - t) <= tol.euclidean_strip * ch.tau_core.max(*t)).collect();
    ClutchingData { taus, tau_core: ch.tau_core, ratios, widths, euclidean_flags }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClutchingMatch {
    pub matched: bool,
    /// First disagreeing pair of flap numbers (counting from 1) of the first churro.
    pub witness: Option<(usize, usize)>,
}

/// Flap i of the first churro corresponds to flap `correspondence[i]` of the second.
pub fn clutching_match(a: &ClutchingData, b: &ClutchingData, correspondence: &[usize], tol: f64) -> Result<ClutchingMatch> {
    let n = a.taus.len();
    if b.taus.len() != n || correspondence.len() != n {
        return Err(StrandError::ArityMismatch(n, b.taus.len()));
    }
    let mut seen = vec![false; n];
    for &j in correspondence {
        if j >= n || core::mem::replace(&mut seen[j], true) {
            return Err(StrandError::ArityMismatch(n, b.taus.len()));
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let (r, s) = (a.ratios[i][j], b.ratios[correspondence[i]][correspondence[j]]);
            if fabs(r - s) > tol * fabs(r).max(fabs(s)) {
                return Ok(ClutchingMatch { matched: false, witness: Some((i + 1, j + 1)) });
            }
        }
    }
    Ok(ClutchingMatch { matched: true, witness: None })
}

// ---------------------------------------------------------------------------
// lattice models

/// A CAT(0) cubical subcomplex of the integer lattice, given by the minimal
/// corners of its top cells (all of the ambient dimension).
#[derive(Debug, Clone)]
pub struct LatticeComplex {
    pub dim: usize,
    pub points: Vec<Vec<i32>>,
    /// (low end, direction) → wall.
    pub edge_wall: BTreeMap<(Vec<i32>, usize), usize>,
    pub model: CubeComplexModel,
}

impl LatticeComplex {
    pub fn new(dim: usize, cells: &[Vec<i32>]) -> Result<Self> {
        if dim == 0 || dim > 16 || cells.iter().any(|c| c.len() != dim) {
            return Err(StrandError::BadCells("corner dimension"));
        }
        let corners = |c: &[i32]| -> Vec<Vec<i32>> {
            (0..1u32 << dim).map(|m| c.iter().enumerate().map(|(k, &x)| x + (m >> k & 1) as i32).collect()).collect()
        };
        let points: Vec<Vec<i32>> = cells.iter().flat_map(|c| corners(c)).collect::<BTreeSet<_>>().into_iter().collect();
        let index: BTreeMap<Vec<i32>, usize> = points.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        // union-find over edges, opposite edges of a cell are one wall
        let mut edges: BTreeMap<(Vec<i32>, usize), usize> = BTreeMap::new();
        for c in cells {
            for p in corners(c) {
                for k in 0..dim {
                    if p[k] == c[k] {
                        let n = edges.len();
                        edges.entry((p.clone(), k)).or_insert(n);
                    }
                }
            }
        }
        let mut parent: Vec<usize> = (0..edges.len()).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            let mut y = x;
            while p[y] != r {
                let n = p[y];
                p[y] = r;
                y = n;
            }
            r
        }
        for c in cells {
            for k in 0..dim {
                let here = edges[&(c.clone(), k)];
                for p in corners(c).into_iter().filter(|p| p[k] == c[k]) {
                    let e = edges[&(p, k)];
                    let (a, b) = (find(&mut parent, here), find(&mut parent, e));
                    parent[a] = b;
                }
            }
        }
        let mut roots = BTreeMap::new();
        let mut edge_wall = BTreeMap::new();
        for (key, &e) in &edges {
            let r = find(&mut parent, e);
            let n = roots.len();
            let w = *roots.entry(r).or_insert(n);
            edge_wall.insert(key.clone(), w);
        }
        let walls = roots.len();
        // sides: components of the 1-skeleton without the wall's edges
        let mut adj = vec![Vec::new(); points.len()];
        for ((p, k), &w) in &edge_wall {
            let mut q = p.clone();
            q[*k] += 1;
            let (a, b) = (index[p], index[&q]);
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        let mut sides = vec![SignVector::zeros(walls); points.len()];
        for w in 0..walls {
            let ((low, _), _) = edge_wall.iter().find(|(_, &x)| x == w).unwrap();
            let mut low_side = vec![false; points.len()];
            let mut stack = vec![index[low]];
            low_side[index[low]] = true;
            while let Some(u) = stack.pop() {
                for &(v, x) in &adj[u] {
                    if x != w && !low_side[v] {
                        low_side[v] = true;
                        stack.push(v);
                    }
                }
            }
            for ((p, k), &x) in &edge_wall {
                if x == w {
                    let mut q = p.clone();
                    q[*k] += 1;
                    if !low_side[index[p]] || low_side[index[&q]] {
                        return Err(StrandError::BadCells("a wall does not separate"));
                    }
                }
            }
            for (v, s) in sides.iter_mut().enumerate() {
                s.set(w, !low_side[v]);
            }
        }
        let mut crossing = vec![vec![false; walls]; walls];
        for c in cells {
            for k in 0..dim {
                for l in 0..dim {
                    if k != l {
                        crossing[edge_wall[&(c.clone(), k)]][edge_wall[&(c.clone(), l)]] = true;
                    }
                }
            }
        }
        let model = cubulate(&WallSystem::from_sides(walls, sides, crossing)?)?;
        if model.vertex_count() != points.len() {
            return Err(StrandError::BadCells("not a median complex"));
        }
        Ok(LatticeComplex { dim, points, edge_wall, model })
    }

    pub fn vertex(&self, p: &[i32]) -> Option<usize> {
        let i = self.points.binary_search_by(|q| q.as_slice().cmp(p)).ok()?;
        Some(self.model.chamber_vertex[i])
    }

    pub fn wall(&self, low: &[i32], dir: usize) -> Option<usize> {
        self.edge_wall.get(&(low.to_vec(), dir)).copied()
    }

    /// Partial map induced by a lattice isometry f; `base` must have an image.
    pub fn isometry<F: Fn(&[i32]) -> Vec<i32>>(&self, f: F, base: &[i32]) -> Option<CubeMap> {
        let walls = self.model.walls;
        let mut wall_map = vec![None; walls];
        let mut flip = vec![false; walls];
        for ((p, k), &w) in &self.edge_wall {
            let mut q = p.clone();
            q[*k] += 1;
            let (fp, fq) = (f(p), f(&q));
            let diff: Vec<usize> = (0..self.dim).filter(|&i| fp[i] != fq[i]).collect();
            if diff.len() != 1 {
                return None;
            }
            let d = diff[0];
            let (low, rev) = if fp[d] < fq[d] { (fp, false) } else { (fq, true) };
            if let Some(x) = self.wall(&low, d) {
                if wall_map[w].is_some_and(|y| y != x) {
                    return None;
                }
                wall_map[w] = Some(x);
                flip[w] = rev;
            }
        }
        Some(CubeMap { wall_map, flip, base: self.vertex(base)?, base_image: self.vertex(&f(base))? })
    }

    pub fn translation(&self, t: &[i32], base: &[i32]) -> Option<CubeMap> {
        let t = t.to_vec();
        self.isometry(move |p| p.iter().zip(&t).map(|(a, b)| a + b).collect(), base)
    }
}

/// Shortest periodic path through a planar gallery of unit squares given by
/// unit moves, found by visibility through the portals between consecutive
/// squares and golden-section search over the start point.
pub fn unfolded_taut_length(moves: &[(i32, i32)]) -> f64 {
    let m = moves.len();
    let t = moves.iter().fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    // squares S_0..S_{m+1}; portal i between S_i and S_{i+1}
    let mut sq = vec![(0i32, 0i32)];
    for i in 0..=m {
        let (dx, dy) = moves[i % m];
        let (x, y) = sq[i];
        sq.push((x + dx, y + dy));
    }
    let portal = |i: usize| -> ((f64, f64), (f64, f64)) {
        let (x, y) = sq[i];
        let (dx, dy) = moves[i % m];
        let (x, y) = (x as f64, y as f64);
        match (dx, dy) {
            (1, 0) => ((x + 1.0, y), (x + 1.0, y + 1.0)),
            (-1, 0) => ((x, y), (x, y + 1.0)),
            (0, 1) => ((x, y + 1.0), (x + 1.0, y + 1.0)),
            _ => ((x, y), (x + 1.0, y)),
        }
    };
    let portals: Vec<_> = (0..=m).map(portal).collect();
    let crosses = |a: (f64, f64), b: (f64, f64), p: ((f64, f64), (f64, f64))| -> bool {
        // segment a→b meets the closed portal segment
        let (p0, p1) = p;
        let d = (b.0 - a.0, b.1 - a.1);
        let e = (p1.0 - p0.0, p1.1 - p0.1);
        let den = d.0 * e.1 - d.1 * e.0;
        if fabs(den) < 1e-15 {
            return false;
        }
        let w = (p0.0 - a.0, p0.1 - a.1);
        let s = (w.0 * e.1 - w.1 * e.0) / den;
        let u = (w.0 * d.1 - w.1 * d.0) / den;
        (-1e-12..=1.0 + 1e-12).contains(&s) && (-1e-12..=1.0 + 1e-12).contains(&u)
    };
    let shortest = |s: f64| -> f64 {
        let (a0, a1) = portals[0];
        let start = (a0.0 + s * (a1.0 - a0.0), a0.1 + s * (a1.1 - a0.1));
        let end = (start.0 + t.0 as f64, start.1 + t.1 as f64);
        // nodes: start (portal 0), endpoints of portals 1..m-1, end (portal m)
        let mut nodes = vec![(0usize, start)];
        for (i, p) in portals.iter().enumerate().take(m).skip(1) {
            nodes.push((i, p.0));
            nodes.push((i, p.1));
        }
        nodes.push((m, end));
        let mut best = vec![f64::INFINITY; nodes.len()];
        best[0] = 0.0;
        for j in 1..nodes.len() {
            for i in 0..j {
                let ((pi, a), (pj, b)) = (nodes[i], nodes[j]);
                if pi >= pj || !best[i].is_finite() {
                    continue;
                }
                if (pi + 1..pj).all(|k| crosses(a, b, portals[k])) {
                    let l = sqrt((b.0 - a.0) * (b.0 - a.0) + (b.1 - a.1) * (b.1 - a.1));
                    best[j] = best[j].min(best[i] + l);
                }
            }
        }
        best[nodes.len() - 1]
    };
    let g = (sqrt(5.0) - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..200 {
        let (x1, x2) = (hi - g * (hi - lo), lo + g * (hi - lo));
        if shortest(x1) <= shortest(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    shortest((lo + hi) / 2.0)
}
