//! Cubulation of a finite wall system: consistent orientations reached by
//! single-wall flips from the chambers, cubes on pairwise-crossing flips,
//! hyperplanes, and brute-force automorphism / isomorphism search.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use crate::config::Tolerances;
use crate::hyperbolic::{crossing_with, Geodesic};
use crate::patterns::{ChamberComplex, SignVector};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CubulationError {
    #[error("more than {0} consistent orientations")]
    ConsistencyOverflow(usize),
    #[error("unknown wall {0}")]
    UnknownWall(usize),
    #[error("model has {vertices} vertices, above the brute-force cap {cap}")]
    CapExceeded { vertices: usize, cap: usize },
    #[error("wall system has no chambers")]
    NoChambers,
    #[error("chamber {chamber} has {got} sides, expected {expected}")]
    SideCount { chamber: usize, got: usize, expected: usize },
    #[error("crossing matrix is not symmetric and irreflexive")]
    BadCrossing,
}

pub type Result<T> = core::result::Result<T, CubulationError>;

/// Side combination (s_i, s_j) as a bit index 0..4.
fn combo(a: bool, b: bool) -> u8 {
    1 << ((a as u8) | ((b as u8) << 1))
}

#[derive(Debug, Clone, PartialEq)]
pub struct WallSystem {
    pub walls: usize,
    /// Crossing inside the window; the relation cubes are built from.
    pub crossing: Vec<Vec<bool>>,
    /// Pairs of lines crossing in H² outside the window: treated as
    /// non-crossing, reported here.
    pub flagged: Vec<(usize, usize)>,
    /// Side indicator per chamber, bit set = inner side.
    pub chamber_sides: Vec<SignVector>,
    /// Realized side combinations per pair, 4-bit masks.
    pub combos: Vec<Vec<u8>>,
    /// Lines, when the system comes from a pattern.
    pub geodesics: Option<Vec<Geodesic>>,
    /// Distance of each wall from the base point, when known.
    pub depths: Option<Vec<f64>>,
    /// Window radius, when known.
    pub radius: Option<f64>,
}

impl WallSystem {
    /// Synthetic system; `crossing` is taken as given.
    pub fn from_sides(walls: usize, chamber_sides: Vec<SignVector>, crossing: Vec<Vec<bool>>) -> Result<Self> {
        if chamber_sides.is_empty() {
            return Err(CubulationError::NoChambers);
        }
        if crossing.len() != walls
            || (0..walls).any(|i| crossing[i].len() != walls || crossing[i][i] || (0..walls).any(|j| crossing[i][j] != crossing[j][i]))
        {
            return Err(CubulationError::BadCrossing);
        }
        let mut combos = vec![vec![0u8; walls]; walls];
        for s in &chamber_sides {
            let bits: Vec<bool> = (0..walls).map(|i| s.get(i)).collect();
            for i in 0..walls {
                for j in 0..walls {
                    combos[i][j] |= combo(bits[i], bits[j]);
                }
            }
        }
        Ok(WallSystem { walls, crossing, flagged: Vec::new(), chamber_sides, combos, geodesics: None, depths: None, radius: None })
    }

    /// Allowed combination mask for a pair; crossing pairs allow all four.
    pub fn allowed(&self, i: usize, j: usize) -> u8 {
        if self.crossing[i][j] {
            0b1111
        } else {
            self.combos[i][j]
        }
    }

    pub fn is_consistent(&self, s: &SignVector) -> bool {
        let bits: Vec<bool> = (0..self.walls).map(|i| s.get(i)).collect();
        (0..self.walls).all(|i| (i + 1..self.walls).all(|j| self.allowed(i, j) & combo(bits[i], bits[j]) != 0))
    }
}

pub fn wall_system(cc: &ChamberComplex) -> Result<WallSystem> {
    wall_system_with(cc, &Tolerances::DEFAULT)
}

pub fn wall_system_with(cc: &ChamberComplex, tol: &Tolerances) -> Result<WallSystem> {
    let n = cc.lines.len();
    let mut crossing = vec![vec![false; n]; n];
    for v in &cc.vertices {
        for (a, &i) in v.lines.iter().enumerate() {
            for &j in &v.lines[a + 1..] {
                crossing[i][j] = true;
                crossing[j][i] = true;
            }
        }
    }
    let mut flagged = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let geo = crossing_with(&cc.lines[i].geodesic, &cc.lines[j].geodesic, tol.endpoint).unwrap_or(false);
            if geo && !crossing[i][j] {
                flagged.push((i, j));
            }
        }
    }
    let sides = cc.chambers.iter().map(|c| c.signs.clone()).collect();
    let mut ws = WallSystem::from_sides(n, sides, crossing)?;
    ws.flagged = flagged;
    ws.geodesics = Some(cc.lines.iter().map(|l| l.geodesic).collect());
    ws.depths = Some(cc.lines.iter().map(|l| l.depth).collect());
    ws.radius = Some(cc.radius);
    Ok(ws)
}

// ---------------------------------------------------------------------------
// model

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cube {
    /// Corner with every wall of the cube on its outer side.
    pub base: usize,
    pub walls: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubeComplexModel {
    pub walls: usize,
    /// Sorted orientations.
    pub vertices: Vec<SignVector>,
    /// (v, w, wall), v < w.
    pub edges: Vec<(usize, usize, usize)>,
    /// Cubes of dimension ≥ 2.
    pub cubes: Vec<Cube>,
    /// Vertex of each chamber.
    pub chamber_vertex: Vec<usize>,
    pub realized: Vec<bool>,
    /// (neighbour, wall) per vertex, sorted.
    pub adjacency: Vec<Vec<(usize, usize)>>,
    /// Window-crossing relation copied from the wall system.
    pub crossing: Vec<Vec<bool>>,
    /// Boundary angles of each wall's line, when known.
    pub endpoints: Option<Vec<(f64, f64)>>,
    /// Cubes touching a wall that runs within `margin` of the window rim.
    pub margin_cubes: Vec<usize>,
}

struct FlipMasks {
    /// For wall i set to side b: walls that must be 0 / must be 1; None if
    /// some wall admits neither.
    need: Vec<[Option<(SignVector, SignVector)>; 2]>,
}

fn flip_masks(ws: &WallSystem) -> FlipMasks {
    let n = ws.walls;
    let mut need = Vec::with_capacity(n);
    for i in 0..n {
        let mut both = [None, None];
        for (b, slot) in both.iter_mut().enumerate() {
            let b = b == 1;
            let mut zero = SignVector::zeros(n);
            let mut one = SignVector::zeros(n);
            let mut ok = true;
            for j in 0..n {
                if j == i {
                    continue;
                }
                let m = ws.allowed(i, j);
                let z = m & combo(b, false) != 0;
                let o = m & combo(b, true) != 0;
                match (z, o) {
                    (true, true) => {}
                    (true, false) => zero.set(j, true),
                    (false, true) => one.set(j, true),
                    (false, false) => ok = false,
                }
            }
            *slot = if ok { Some((zero, one)) } else { None };
        }
        need.push(both);
    }
    FlipMasks { need }
}

impl FlipMasks {
    /// Can wall i be set to side b, the rest of s unchanged?
    fn admits(&self, s: &SignVector, i: usize, b: bool) -> bool {
        match &self.need[i][b as usize] {
            None => false,
            Some((zero, one)) => s.0.iter().zip(&zero.0).zip(&one.0).all(|((&w, &z), &o)| {
                // ignore wall i itself: neither mask holds it
                w & z == 0 && !w & o == 0
            }),
        }
    }
}

pub fn cubulate(ws: &WallSystem) -> Result<CubeComplexModel> {
    cubulate_with(ws, &Tolerances::DEFAULT)
}

pub fn cubulate_with(ws: &WallSystem, tol: &Tolerances) -> Result<CubeComplexModel> {
    let n = ws.walls;
    let masks = flip_masks(ws);
    let mut seen: BTreeSet<SignVector> = BTreeSet::new();
    let mut queue: Vec<SignVector> = Vec::new();
    for s in &ws.chamber_sides {
        if seen.insert(s.clone()) {
            queue.push(s.clone());
        }
    }
    if seen.len() > tol.vertex_cap {
        return Err(CubulationError::ConsistencyOverflow(tol.vertex_cap));
    }
    let mut head = 0;
    while head < queue.len() {
        let s = queue[head].clone();
        head += 1;
        for i in 0..n {
            let b = !s.get(i);
            if masks.admits(&s, i, b) {
                let mut t = s.clone();
                t.flip(i);
                if seen.insert(t.clone()) {
                    if seen.len() > tol.vertex_cap {
                        return Err(CubulationError::ConsistencyOverflow(tol.vertex_cap));
                    }
                    queue.push(t);
                }
            }
        }
    }
    let vertices: Vec<SignVector> = seen.into_iter().collect();
    let index: BTreeMap<&SignVector, usize> = vertices.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut adjacency = vec![Vec::new(); vertices.len()];
    let mut edges = Vec::new();
    // upward flips (outer → inner) at each vertex
    let mut up: Vec<Vec<(usize, usize)>> = vec![Vec::new(); vertices.len()];
    for (vi, s) in vertices.iter().enumerate() {
        for i in 0..n {
            let mut t = s.clone();
            t.flip(i);
            if let Some(&wi) = index.get(&t) {
                adjacency[vi].push((wi, i));
                if !s.get(i) {
                    up[vi].push((i, wi));
                    edges.push((vi.min(wi), vi.max(wi), i));
                }
            }
        }
    }
    edges.sort_unstable();
    for a in adjacency.iter_mut() {
        a.sort_unstable();
    }
    let mut cubes = Vec::new();
    for (vi, s) in vertices.iter().enumerate() {
        let cand: Vec<usize> = up[vi].iter().map(|&(i, _)| i).collect();
        let mut stack: Vec<usize> = Vec::new();
        extend_cubes(ws, &index, s, vi, &cand, 0, &mut stack, &mut cubes);
    }
    cubes.sort_by(|a: &Cube, b: &Cube| a.walls.len().cmp(&b.walls.len()).then(a.base.cmp(&b.base)).then(a.walls.cmp(&b.walls)));
    let chamber_vertex: Vec<usize> = ws.chamber_sides.iter().map(|s| index[s]).collect();
    let mut realized = vec![false; vertices.len()];
    for &v in &chamber_vertex {
        realized[v] = true;
    }
    let near_rim: Vec<bool> = match (&ws.depths, ws.radius) {
        (Some(d), Some(r)) => d.iter().map(|&x| x > r - tol.filling_margin).collect(),
        _ => vec![false; n],
    };
    let margin_cubes = (0..cubes.len()).filter(|&c| cubes[c].walls.iter().any(|&w| near_rim[w])).collect();
    let endpoints = ws.geodesics.as_ref().map(|g| g.iter().map(|l| l.angles()).collect());
    Ok(CubeComplexModel {
        walls: n,
        vertices,
        edges,
        cubes,
        chamber_vertex,
        realized,
        adjacency,
        crossing: ws.crossing.clone(),
        endpoints,
        margin_cubes,
    })
}

/// Depth-first over pairwise-crossing subsets of the upward flips at a
/// vertex whose every corner is present; records those of size ≥ 2.
#[allow(clippy::too_many_arguments)]
fn extend_cubes(
    ws: &WallSystem,
    index: &BTreeMap<&SignVector, usize>,
    base: &SignVector,
    base_index: usize,
    cand: &[usize],
    from: usize,
    stack: &mut Vec<usize>,
    out: &mut Vec<Cube>,
) {
    for k in from..cand.len() {
        let w = cand[k];
        if !stack.iter().all(|&u| ws.crossing[u][w]) {
            continue;
        }
        stack.push(w);
        if corners_present(index, base, stack) {
            if stack.len() >= 2 {
                out.push(Cube { base: base_index, walls: stack.clone() });
            }
            extend_cubes(ws, index, base, base_index, cand, k + 1, stack, out);
        }
        stack.pop();
    }
}

fn corners_present(index: &BTreeMap<&SignVector, usize>, base: &SignVector, walls: &[usize]) -> bool {
    let k = walls.len();
    // the corners without the newest wall were checked one level up
    let last = walls[k - 1];
    (0..1u64 << (k - 1)).all(|mask| {
        let mut t = base.clone();
        t.flip(last);
        for (b, &w) in walls[..k - 1].iter().enumerate() {
            if mask >> b & 1 == 1 {
                t.flip(w);
            }
        }
        index.contains_key(&t)
    })
}

impl CubeComplexModel {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn index_of(&self, s: &SignVector) -> Option<usize> {
        self.vertices.binary_search(s).ok()
    }

    pub fn neighbour(&self, v: usize, wall: usize) -> Option<usize> {
        self.adjacency[v].iter().find(|&&(_, w)| w == wall).map(|&(u, _)| u)
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].iter().any(|&(u, _)| u == b)
    }

    /// Vertices of a cube, in flip-mask order.
    pub fn cube_vertices(&self, c: &Cube) -> Vec<usize> {
        let k = c.walls.len();
        (0..1u64 << k)
            .map(|mask| {
                let mut t = self.vertices[c.base].clone();
                for (b, &w) in c.walls.iter().enumerate() {
                    if mask >> b & 1 == 1 {
                        t.flip(w);
                    }
                }
                self.index_of(&t).expect("cube corner")
            })
            .collect()
    }

    /// Sorted vertex sets of all cubes of dimension ≥ 2.
    pub fn cube_vertex_sets(&self) -> BTreeSet<Vec<usize>> {
        self.cubes
            .iter()
            .map(|c| {
                let mut v = self.cube_vertices(c);
                v.sort_unstable();
                v
            })
            .collect()
    }

    /// Squares (2-cubes) with their vertices in cyclic order.
    pub fn squares(&self) -> Vec<[usize; 4]> {
        self.cubes
            .iter()
            .filter(|c| c.walls.len() == 2)
            .map(|c| {
                let v = self.cube_vertices(c);
                [v[0], v[1], v[3], v[2]]
            })
            .collect()
    }

    /// Every face of every cube is present.
    pub fn faces_closed(&self) -> bool {
        let cubes: BTreeSet<(usize, &[usize])> = self.cubes.iter().map(|c| (c.base, c.walls.as_slice())).collect();
        let edges: BTreeSet<(usize, usize, usize)> = self.edges.iter().copied().collect();
        self.cubes.iter().all(|c| {
            (0..c.walls.len()).all(|drop| {
                let rest: Vec<usize> = c.walls.iter().enumerate().filter(|&(k, _)| k != drop).map(|(_, &w)| w).collect();
                let mut far = self.vertices[c.base].clone();
                far.flip(c.walls[drop]);
                let far = match self.index_of(&far) {
                    Some(f) => f,
                    None => return false,
                };
                [c.base, far].iter().all(|&b| {
                    if rest.len() == 1 {
                        let mut t = self.vertices[b].clone();
                        t.flip(rest[0]);
                        match self.index_of(&t) {
                            Some(u) => edges.contains(&(b.min(u), b.max(u), rest[0])),
                            None => false,
                        }
                    } else {
                        cubes.contains(&(b, rest.as_slice()))
                    }
                })
            })
        })
    }

    /// Both ends of every edge differ exactly on its wall.
    pub fn edge_labels_exact(&self) -> bool {
        self.edges.iter().all(|&(a, b, w)| {
            let (x, y) = (&self.vertices[a], &self.vertices[b]);
            (0..self.walls).all(|i| (x.get(i) != y.get(i)) == (i == w))
        })
    }
}

pub fn dimension(model: &CubeComplexModel) -> usize {
    match model.cubes.iter().map(|c| c.walls.len()).max() {
        Some(d) => d,
        None if !model.edges.is_empty() => 1,
        None => 0,
    }
}

/// Maximum clique of the crossing graph, by Bron–Kerbosch with pivoting.
pub fn max_crossing_clique(ws: &WallSystem) -> usize {
    if ws.walls == 0 {
        return 0;
    }
    fn bk(adj: &[Vec<bool>], r: usize, p: Vec<usize>, mut x: Vec<usize>, best: &mut usize) {
        if p.is_empty() {
            if x.is_empty() {
                *best = (*best).max(r);
            }
            return;
        }
        if r + p.len() <= *best {
            return;
        }
        let pivot = *p.iter().chain(x.iter()).max_by_key(|&&u| p.iter().filter(|&&v| adj[u][v]).count()).unwrap();
        let mut p = p;
        for v in p.clone() {
            if adj[pivot][v] {
                continue;
            }
            let np = p.iter().copied().filter(|&u| adj[v][u]).collect();
            let nx = x.iter().copied().filter(|&u| adj[v][u]).collect();
            bk(adj, r + 1, np, nx, best);
            p.retain(|&u| u != v);
            x.push(v);
        }
    }
    let mut best = 1;
    bk(&ws.crossing, 0, (0..ws.walls).collect(), Vec::new(), &mut best);
    best
}

// ---------------------------------------------------------------------------
// hyperplanes

#[derive(Debug, Clone, PartialEq)]
pub struct HyperplaneRecord {
    pub wall: usize,
    pub dual_edges: Vec<usize>,
    pub carrier: Vec<usize>,
    pub endpoints: Option<(f64, f64)>,
}

pub fn hyperplane(model: &CubeComplexModel, wall: usize) -> Result<HyperplaneRecord> {
    if wall >= model.walls {
        return Err(CubulationError::UnknownWall(wall));
    }
    let dual_edges: Vec<usize> = (0..model.edges.len()).filter(|&e| model.edges[e].2 == wall).collect();
    let mut carrier: Vec<usize> = dual_edges.iter().flat_map(|&e| [model.edges[e].0, model.edges[e].1]).collect();
    carrier.sort_unstable();
    carrier.dedup();
    Ok(HyperplaneRecord { wall, dual_edges, carrier, endpoints: model.endpoints.as_ref().map(|e| e[wall]) })
}

// ---------------------------------------------------------------------------
// shadow graph embedding

/// The chamber → vertex map is injective and sends each arrangement edge to a
/// model edge labelled by the edge's line.
pub fn shadow_embedding_ok(cc: &ChamberComplex, model: &CubeComplexModel) -> bool {
    let mut v: Vec<usize> = model.chamber_vertex.clone();
    v.sort_unstable();
    v.dedup();
    if v.len() != model.chamber_vertex.len() {
        return false;
    }
    cc.edges.iter().all(|e| {
        let (a, b) = (model.chamber_vertex[e.inner], model.chamber_vertex[e.outer]);
        model.neighbour(a, e.line) == Some(b)
    })
}

// ---------------------------------------------------------------------------
// automorphisms and isomorphisms

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Constraints {
    /// Prescribed images.
    pub pins: Vec<(usize, usize)>,
    /// Realized vertices go to realized vertices and back.
    pub preserve_realized: bool,
    /// The induced halfspace map comes from a rotation or reflection of the
    /// boundary circle: endpoint cyclic order kept, inner arcs to the images'
    /// sides they bound.
    pub cyclic_order: bool,
}

impl Constraints {
    /// Fix every vertex of a square.
    pub fn fix_square(square: [usize; 4]) -> Self {
        Constraints { pins: square.iter().map(|&v| (v, v)).collect(), ..Default::default() }
    }
}

/// A vertex bijection with its induced wall map.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct CubeMorphism {
    pub vertex_map: Vec<usize>,
    pub wall_map: Vec<usize>,
}

pub fn automorphisms(model: &CubeComplexModel, constraints: &Constraints, cap: usize) -> Result<Vec<CubeMorphism>> {
    isomorphisms(model, model, constraints, cap)
}

/// All label-forgetting isomorphisms m1 → m2 meeting the constraints, by
/// backtracking in breadth-first order with degree and adjacency pruning.
pub fn isomorphisms(m1: &CubeComplexModel, m2: &CubeComplexModel, constraints: &Constraints, cap: usize) -> Result<Vec<CubeMorphism>> {
    for m in [m1, m2] {
        if m.vertex_count() > cap {
            return Err(CubulationError::CapExceeded { vertices: m.vertex_count(), cap });
        }
    }
    let n = m1.vertex_count();
    if n != m2.vertex_count() || m1.edges.len() != m2.edges.len() || m1.cubes.len() != m2.cubes.len() || m1.walls != m2.walls {
        return Ok(Vec::new());
    }
    if n == 0 {
        return Ok(vec![CubeMorphism { vertex_map: Vec::new(), wall_map: Vec::new() }]);
    }
    // visiting order: pinned vertices first, then breadth-first
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    let mut parent = vec![usize::MAX; n];
    for &(v, _) in &constraints.pins {
        if !placed[v] {
            placed[v] = true;
            order.push(v);
        }
    }
    let mut head = 0;
    loop {
        while head < order.len() {
            let v = order[head];
            head += 1;
            for &(u, _) in &m1.adjacency[v] {
                if !placed[u] {
                    placed[u] = true;
                    parent[u] = v;
                    order.push(u);
                }
            }
        }
        match (0..n).find(|&v| !placed[v]) {
            Some(v) => {
                placed[v] = true;
                order.push(v);
            }
            None => break,
        }
    }
    let pins: BTreeMap<usize, usize> = constraints.pins.iter().copied().collect();
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let mut out = Vec::new();
    // cyclic order: only the wall maps of dihedral symmetries of the endpoint
    // word survive, so carry the ones still consistent with the partial map
    let allowed = match (&m1.endpoints, &m2.endpoints) {
        (Some(a), Some(b)) if constraints.cyclic_order => dihedral_wall_maps(a, b),
        _ => Vec::new(),
    };
    let alive: Vec<usize> = (0..allowed.len()).collect();
    let mut st = Search {
        m1,
        m2,
        order: &order,
        parent: &parent,
        pins: &pins,
        constraints,
        allowed: &allowed,
        prune: constraints.cyclic_order && m1.endpoints.is_some() && m2.endpoints.is_some(),
        map: &mut map,
        used: &mut used,
        out: &mut out,
    };
    st.go(0, alive);
    let mut res: Vec<CubeMorphism> = out.into_iter().filter(|f| cubes_preserved(m1, m2, &f.vertex_map)).collect();
    if constraints.cyclic_order {
        res.retain(|f| cyclic_order_preserved(m1, m2, &f.wall_map));
    }
    res.sort();
    Ok(res)
}

struct Search<'a> {
    m1: &'a CubeComplexModel,
    m2: &'a CubeComplexModel,
    order: &'a [usize],
    parent: &'a [usize],
    pins: &'a BTreeMap<usize, usize>,
    constraints: &'a Constraints,
    allowed: &'a [(Vec<usize>, Vec<bool>)],
    prune: bool,
    map: &'a mut Vec<usize>,
    used: &'a mut Vec<bool>,
    out: &'a mut Vec<CubeMorphism>,
}

impl Search<'_> {
    fn fits(&self, v: usize, w: usize) -> bool {
        if self.used[w] || self.m1.adjacency[v].len() != self.m2.adjacency[w].len() {
            return false;
        }
        if self.constraints.preserve_realized && self.m1.realized[v] != self.m2.realized[w] {
            return false;
        }
        // adjacency to every mapped neighbour, and no extra adjacency
        let mut mapped = 0;
        for &(u, _) in &self.m1.adjacency[v] {
            if self.map[u] != usize::MAX {
                mapped += 1;
                if !self.m2.has_edge(w, self.map[u]) {
                    return false;
                }
            }
        }
        let images = self.m2.adjacency[w].iter().filter(|&&(x, _)| self.used[x]).count();
        images == mapped
    }

    /// Candidate wall maps still agreeing with every edge at v once v ↦ w.
    fn narrow(&self, v: usize, w: usize, alive: &[usize]) -> Vec<usize> {
        alive
            .iter()
            .copied()
            .filter(|&d| {
                let (walls, flip) = &self.allowed[d];
                let (sv, sw) = (&self.m1.vertices[v], &self.m2.vertices[w]);
                (0..walls.len()).all(|a| (sv.get(a) != sw.get(walls[a])) == flip[a])
                    && self.m1.adjacency[v].iter().all(|&(u, a)| {
                        let x = self.map[u];
                        x == usize::MAX || self.m2.adjacency[w].iter().any(|&(y, b)| y == x && walls[a] == b)
                    })
            })
            .collect()
    }

    fn go(&mut self, k: usize, alive: Vec<usize>) {
        if k == self.order.len() {
            if let Some(f) = induced(self.m1, self.m2, self.map) {
                self.out.push(f);
            }
            return;
        }
        let v = self.order[k];
        let cands: Vec<usize> = if let Some(&w) = self.pins.get(&v) {
            vec![w]
        } else if self.parent[v] != usize::MAX {
            self.m2.adjacency[self.map[self.parent[v]]].iter().map(|&(x, _)| x).collect()
        } else {
            (0..self.m2.vertex_count()).collect()
        };
        for w in cands {
            if self.fits(v, w) {
                let next = if self.prune {
                    let n = self.narrow(v, w, &alive);
                    if n.is_empty() {
                        continue;
                    }
                    n
                } else {
                    Vec::new()
                };
                self.map[v] = w;
                self.used[w] = true;
                self.go(k + 1, next);
                self.used[w] = false;
                self.map[v] = usize::MAX;
            }
        }
    }
}

/// Wall map induced by a 1-skeleton isomorphism; None if edges of one wall
/// land on several walls.
fn induced(m1: &CubeComplexModel, m2: &CubeComplexModel, map: &[usize]) -> Option<CubeMorphism> {
    let mut wall_map = vec![usize::MAX; m1.walls];
    for &(a, b, w) in &m1.edges {
        let (x, y) = (map[a], map[b]);
        let img = m2.adjacency[x].iter().find(|&&(u, _)| u == y)?.1;
        if wall_map[w] == usize::MAX {
            wall_map[w] = img;
        } else if wall_map[w] != img {
            return None;
        }
    }
    Some(CubeMorphism { vertex_map: map.to_vec(), wall_map })
}

fn cubes_preserved(m1: &CubeComplexModel, m2: &CubeComplexModel, map: &[usize]) -> bool {
    let target = m2.cube_vertex_sets();
    m1.cubes.iter().all(|c| {
        let mut v: Vec<usize> = m1.cube_vertices(c).into_iter().map(|x| map[x]).collect();
        v.sort_unstable();
        target.contains(&v)
    })
}

/// Endpoint labels in angular order, as (wall, which end).
fn endpoint_cycle(e: &[(f64, f64)]) -> Vec<usize> {
    let mut pts: Vec<(f64, usize)> = e.iter().enumerate().flat_map(|(w, &(a, b))| [(a, w), (b, w)]).collect();
    pts.sort_by(|x, y| x.0.total_cmp(&y.0));
    pts.into_iter().map(|p| p.1).collect()
}

/// Does the wall map carry the cyclic word of endpoint labels of m1 to that
/// of m2, up to rotation and reversal?
pub fn cyclic_order_preserved(m1: &CubeComplexModel, m2: &CubeComplexModel, wall_map: &[usize]) -> bool {
    match (&m1.endpoints, &m2.endpoints) {
        (Some(a), Some(b)) => {
            let ca: Vec<usize> = endpoint_cycle(a).into_iter().map(|w| wall_map[w]).collect();
            let cb = endpoint_cycle(b);
            is_rotation(&ca, &cb) || is_rotation(&ca.iter().rev().copied().collect::<Vec<_>>(), &cb)
        }
        _ => true,
    }
}

/// Halfspace maps induced by rotations and reflections carrying the endpoint
/// word of `a` onto that of `b`: the wall map, and per wall whether its inner
/// arc lands on the outer arc of the image.
fn dihedral_wall_maps(a: &[(f64, f64)], b: &[(f64, f64)]) -> Vec<(Vec<usize>, Vec<bool>)> {
    let ends = |e: &[(f64, f64)]| {
        let mut pts: Vec<(f64, usize, bool)> = e.iter().enumerate().flat_map(|(w, &(x, y))| [(x, w, false), (y, w, true)]).collect();
        pts.sort_by(|p, q| p.0.total_cmp(&q.0));
        pts
    };
    let (ca, cb) = (ends(a), ends(b));
    let n = ca.len();
    let mut out: Vec<(Vec<usize>, Vec<bool>)> = Vec::new();
    if n != cb.len() {
        return out;
    }
    for r in 0..n {
        for rev in [false, true] {
            let mut d = vec![usize::MAX; a.len()];
            let mut flip = vec![false; a.len()];
            let ok = (0..n).all(|i| {
                let j = if rev { (r + n - i) % n } else { (r + i) % n };
                let ((_, x, xe), (_, y, ye)) = (ca[i], cb[j]);
                if d[x] == usize::MAX {
                    d[x] = y;
                }
                if !xe {
                    // the inner arc runs ccw from the first endpoint
                    flip[x] = ye != rev;
                }
                d[x] == y
            });
            if ok && !out.iter().any(|(e, f)| *e == d && *f == flip) {
                out.push((d, flip));
            }
        }
    }
    out
}

fn is_rotation(a: &[usize], b: &[usize]) -> bool {
    a.len() == b.len() && (a.is_empty() || (0..a.len()).any(|r| (0..a.len()).all(|i| a[(i + r) % a.len()] == b[i])))
}

// ---------------------------------------------------------------------------
// partial maps

/// A wall-level map between (parts of) models: y[wall_map[i]] = x[i] ^ flip[i]
/// on the mapped walls, other walls of the image copied from `base_image`
/// once the base vertex is sent there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubeMap {
    pub wall_map: Vec<Option<usize>>,
    pub flip: Vec<bool>,
    pub base: usize,
    pub base_image: usize,
}

impl CubeMap {
    /// Image of vertex v, if defined and present in the target.
    pub fn apply(&self, src: &CubeComplexModel, dst: &CubeComplexModel, v: usize) -> Option<usize> {
        let x = &src.vertices[v];
        let b = &src.vertices[self.base];
        let mut y = dst.vertices[self.base_image].clone();
        for i in 0..src.walls {
            match self.wall_map[i] {
                Some(j) => y.set(j, x.get(i) ^ self.flip[i]),
                None if x.get(i) != b.get(i) => return None,
                None => {}
            }
        }
        dst.index_of(&y)
    }
}
