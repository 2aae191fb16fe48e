//! Transport of orientations along a boundary matching of two wall systems.

use alloc::vec;
use alloc::vec::Vec;

use crate::cubulation::CubeComplexModel;
use crate::hyperbolic::{angular_gap, BoundaryPoint, Geodesic, MobiusMap};
use crate::patterns::SignVector;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CombinatorializationError {
    #[error("matching is not a bijection on {0} walls")]
    NotBijective(usize),
    #[error("matching breaks the cyclic order of wall endpoints")]
    OrderViolation,
    #[error("transported orientation of vertex {0} is not a vertex of the target")]
    NotConsistent(usize),
    #[error("models have {0} and {1} walls")]
    ArityMismatch(usize, usize),
}

pub type Result<T> = core::result::Result<T, CombinatorializationError>;

/// Wall i of the source goes to wall_bijection[i]; arc_flip[i] pairs its
/// inner half-arc with the image's outer one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuasiMatching {
    pub wall_bijection: Vec<usize>,
    pub arc_flip: Vec<bool>,
}

impl QuasiMatching {
    pub fn identity(n: usize) -> Self {
        QuasiMatching { wall_bijection: (0..n).collect(), arc_flip: vec![false; n] }
    }

    /// `then ∘ self`.
    pub fn then(&self, then: &QuasiMatching) -> QuasiMatching {
        QuasiMatching {
            wall_bijection: self.wall_bijection.iter().map(|&j| then.wall_bijection[j]).collect(),
            arc_flip: self.wall_bijection.iter().zip(&self.arc_flip).map(|(&j, &f)| f ^ then.arc_flip[j]).collect(),
        }
    }

    pub fn is_bijection(&self) -> bool {
        let n = self.wall_bijection.len();
        let mut hit = vec![false; n];
        self.arc_flip.len() == n
            && self.wall_bijection.iter().all(|&j| j < n && !core::mem::replace(&mut hit[j], true))
    }

    pub fn transport(&self, x: &SignVector) -> SignVector {
        let mut y = SignVector::zeros(self.wall_bijection.len());
        for (i, (&j, &f)) in self.wall_bijection.iter().zip(&self.arc_flip).enumerate() {
            y.set(j, x.get(i) ^ f);
        }
        y
    }

    /// Matching induced by a Möbius map sending every source line onto a
    /// target line; None if some image is missing.
    pub fn from_mobius(src: &[Geodesic], dst: &[Geodesic], m: &MobiusMap, tol: f64) -> Option<Self> {
        let mut wall_bijection = Vec::with_capacity(src.len());
        let mut arc_flip = Vec::with_capacity(src.len());
        for g in src {
            let (p, q) = g.endpoints();
            let (a, b) = (m.apply(&p).angle(), m.apply(&q).angle());
            let j = dst.iter().position(|h| {
                let (c, d) = h.angles();
                (angular_gap(a, c) <= tol && angular_gap(b, d) <= tol) || (angular_gap(a, d) <= tol && angular_gap(b, c) <= tol)
            })?;
            let (c, _) = dst[j].angles();
            wall_bijection.push(j);
            // orientation-preserving: first endpoint to first endpoint keeps arcs
            arc_flip.push(angular_gap(a, c) > tol);
        }
        Some(QuasiMatching { wall_bijection, arc_flip })
    }
}

/// The endpoint map induced by the matching (for one global orientation of
/// the boundary map) must be a cyclic-order isomorphism of the endpoint sets.
pub fn check_cyclic_order(m: &QuasiMatching, src: &[(f64, f64)], dst: &[(f64, f64)]) -> Result<()> {
    let n = src.len();
    if dst.len() != n || m.wall_bijection.len() != n {
        return Err(CombinatorializationError::ArityMismatch(n, dst.len()));
    }
    let mut order: Vec<(f64, usize, bool)> = src.iter().enumerate().flat_map(|(i, &(a, b))| [(a, i, false), (b, i, true)]).collect();
    order.sort_by(|x, y| x.0.total_cmp(&y.0));
    let pick = |&(a, b): &(f64, f64), second: bool| if second { b } else { a };
    for reversing in [false, true] {
        let images: Vec<f64> = order
            .iter()
            .map(|&(_, i, k)| pick(&dst[m.wall_bijection[i]], k ^ m.arc_flip[i] ^ reversing))
            .collect();
        let len = images.len();
        let descents = (0..len)
            .filter(|&t| {
                let (u, v) = (images[t], images[(t + 1) % len]);
                if reversing {
                    v > u
                } else {
                    v < u
                }
            })
            .count();
        if len < 2 || descents == 1 {
            return Ok(());
        }
    }
    Err(CombinatorializationError::OrderViolation)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubeIsomorphism {
    pub vertex_map: Vec<usize>,
    pub wall_map: Vec<usize>,
}

impl CubeIsomorphism {
    /// `then ∘ self`.
    pub fn then(&self, then: &CubeIsomorphism) -> CubeIsomorphism {
        CubeIsomorphism {
            vertex_map: self.vertex_map.iter().map(|&v| then.vertex_map[v]).collect(),
            wall_map: self.wall_map.iter().map(|&w| then.wall_map[w]).collect(),
        }
    }
}

pub fn combinatorialize(m: &QuasiMatching, model1: &CubeComplexModel, model2: &CubeComplexModel) -> Result<CubeIsomorphism> {
    if model1.walls != model2.walls || m.wall_bijection.len() != model1.walls {
        return Err(CombinatorializationError::ArityMismatch(model1.walls, model2.walls));
    }
    if !m.is_bijection() {
        return Err(CombinatorializationError::NotBijective(model1.walls));
    }
    if let (Some(a), Some(b)) = (&model1.endpoints, &model2.endpoints) {
        check_cyclic_order(m, a, b)?;
    }
    let mut vertex_map = Vec::with_capacity(model1.vertex_count());
    for (v, x) in model1.vertices.iter().enumerate() {
        let y = m.transport(x);
        vertex_map.push(model2.index_of(&y).ok_or(CombinatorializationError::NotConsistent(v))?);
    }
    Ok(CubeIsomorphism { vertex_map, wall_map: m.wall_bijection.clone() })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Two vertices with the same image, or an image out of range.
    NotBijective(usize),
    /// An edge not sent to an edge with the mapped label.
    Edge(usize, usize, usize),
    /// A cube (index into model1.cubes) whose image is not a cube.
    Cube(usize),
    /// A vertex missing the image carrier of one of its walls.
    Closeness(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verification {
    pub ok: bool,
    pub witness: Option<Violation>,
}

pub fn verify_isomorphism(iso: &CubeIsomorphism, model1: &CubeComplexModel, model2: &CubeComplexModel) -> Verification {
    let fail = |v| Verification { ok: false, witness: Some(v) };
    let n = model1.vertex_count();
    if iso.vertex_map.len() != n || model2.vertex_count() != n {
        return fail(Violation::NotBijective(0));
    }
    let mut hit = vec![false; n];
    for (v, &w) in iso.vertex_map.iter().enumerate() {
        if w >= n || core::mem::replace(&mut hit[w], true) {
            return fail(Violation::NotBijective(v));
        }
    }
    if model1.edges.len() != model2.edges.len() {
        return fail(Violation::Edge(usize::MAX, usize::MAX, usize::MAX));
    }
    for &(a, b, w) in &model1.edges {
        let (x, y) = (iso.vertex_map[a], iso.vertex_map[b]);
        if model2.neighbour(x, iso.wall_map[w]) != Some(y) {
            return fail(Violation::Edge(a, b, w));
        }
    }
    let target = model2.cube_vertex_sets();
    for (k, c) in model1.cubes.iter().enumerate() {
        let mut img: Vec<usize> = model1.cube_vertices(c).into_iter().map(|v| iso.vertex_map[v]).collect();
        img.sort_unstable();
        if !target.contains(&img) {
            return fail(Violation::Cube(k));
        }
    }
    // closeness: a realized vertex on the carrier of wall w maps within the
    // cube diameter of the carrier of the image wall
    let d = crate::cubulation::dimension(model2);
    for v in (0..n).filter(|&v| model1.realized[v]) {
        for &(_, w) in &model1.adjacency[v] {
            if carrier_distance(model2, iso.vertex_map[v], iso.wall_map[w], d).is_none() {
                return fail(Violation::Closeness(v, w));
            }
        }
    }
    Verification { ok: true, witness: None }
}

/// Combinatorial distance from v to the carrier of a wall, searched up to `max`.
fn carrier_distance(m: &CubeComplexModel, v: usize, wall: usize, max: usize) -> Option<usize> {
    let mut dist = vec![usize::MAX; m.vertex_count()];
    let mut queue = vec![v];
    dist[v] = 0;
    let mut head = 0;
    while head < queue.len() {
        let u = queue[head];
        head += 1;
        if m.adjacency[u].iter().any(|&(_, w)| w == wall) {
            return Some(dist[u]);
        }
        if dist[u] == max {
            continue;
        }
        for &(x, _) in &m.adjacency[u] {
            if dist[x] == usize::MAX {
                dist[x] = dist[u] + 1;
                queue.push(x);
            }
        }
    }
    None
}

/// Boundary angles of a line's endpoints, first endpoint first.
pub fn endpoint_angles(g: &Geodesic) -> (f64, f64) {
    let (p, q): (BoundaryPoint, BoundaryPoint) = g.endpoints();
    (p.angle(), q.angle())
}
