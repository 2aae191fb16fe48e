//! Exact arithmetic on quotient graphs: low-power groups, basic churro
//! groups, augmentations, balance and sheet numbers. No floating point.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use num_rational::Ratio;

pub type Q = Ratio<u128>;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GroupingError {
    #[error("low-power group of order 0")]
    ZeroOrder,
    #[error("{dividend} is not divisible by {divisor}")]
    NotDivisible { dividend: u128, divisor: u128 },
    #[error("order overflow")]
    Overflow,
    #[error("index {index} out of range 1..={len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("edge {0}: endpoints are not one waffle and one churro")]
    NotBipartite(usize),
    #[error("edge {0} is directed churro -> waffle")]
    Orientation(usize),
    #[error("edge {0}: endpoint out of range")]
    UnknownVertex(usize),
    #[error("edge {0}: coweight must be positive")]
    ZeroCoweight(usize),
    #[error("graph is not a tree")]
    NotATree,
    #[error("graph is disconnected")]
    Disconnected,
    #[error("sheet propagation is inconsistent around cycle {cycle:?}")]
    NoSolution { cycle: Vec<usize> },
    #[error("sheet number of vertex {0} is not an integer")]
    NonIntegral(usize),
    #[error("chord {0} failed although its cycle is balanced")]
    Inconsistent(usize),
}

pub type Result<T> = core::result::Result<T, GroupingError>;

// ---------------------------------------------------------------------------
// low power groups

/// ⊕ C_p over the prime factorization of the order. Stored by order, which
/// determines the isomorphism type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LowPowerGroup(u128);

impl LowPowerGroup {
    pub const TRIVIAL: LowPowerGroup = LowPowerGroup(1);

    pub fn order(&self) -> u128 {
        self.0
    }

    pub fn is_trivial(&self) -> bool {
        self.0 == 1
    }

    /// Prime multiset, ascending.
    pub fn primes(&self) -> Vec<u128> {
        factor(self.0)
    }

    /// Number of C2 summands.
    pub fn twos(&self) -> u32 {
        self.0.trailing_zeros()
    }
}

impl fmt::Display for LowPowerGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "L({})", self.0)
    }
}

fn factor(mut n: u128) -> Vec<u128> {
    let mut out = Vec::new();
    let mut p = 2u128;
    while p * p <= n {
        while n % p == 0 {
            out.push(p);
            n /= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push(n);
    }
    out
}

// u128 division is slow; almost every order seen in practice fits in a word
#[inline]
fn div_exact(a: u128, b: u128) -> Option<u128> {
    if a >> 64 == 0 && b >> 64 == 0 {
        let (a, b) = (a as u64, b as u64);
        return (a % b == 0).then(|| (a / b) as u128);
    }
    (a % b == 0).then(|| a / b)
}

pub fn lowpower(n: u128) -> Result<LowPowerGroup> {
    if n == 0 {
        return Err(GroupingError::ZeroOrder);
    }
    Ok(LowPowerGroup(n))
}

pub fn lp_sum(a: LowPowerGroup, b: LowPowerGroup) -> Result<LowPowerGroup> {
    a.0.checked_mul(b.0).map(LowPowerGroup).ok_or(GroupingError::Overflow)
}

pub fn lp_quotient(a: LowPowerGroup, b: LowPowerGroup) -> Result<LowPowerGroup> {
    div_exact(a.0, b.0).map(LowPowerGroup).ok_or(GroupingError::NotDivisible { dividend: a.0, divisor: b.0 })
}

pub fn lp_iso(a: LowPowerGroup, b: LowPowerGroup) -> bool {
    a.0 == b.0
}

// ---------------------------------------------------------------------------
// churro groups

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CoreFactor {
    Z,
    ZSemidirectZ2,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicChurroGroup {
    pub core: CoreFactor,
    pub flap_factor: Vec<LowPowerGroup>,
}

impl BasicChurroGroup {
    pub fn flap_order(&self) -> Result<u128> {
        self.flap_factor.iter().try_fold(1u128, |acc, g| acc.checked_mul(g.0).ok_or(GroupingError::Overflow))
    }
}

pub fn basic_churro_group(flap_family_sizes: &[u128], core: CoreFactor) -> Result<BasicChurroGroup> {
    let flap_factor = flap_family_sizes.iter().map(|&n| lowpower(n)).collect::<Result<Vec<_>>>()?;
    Ok(BasicChurroGroup { core, flap_factor })
}

/// Stabilizer of an edge space or a flap: an infinite cyclic (or dihedral)
/// core part, possibly the distinguished Z_e of an edge, plus finite data.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StabilizerDescriptor {
    pub core: CoreFactor,
    /// Edge whose Z_e ⊕ {1} this descriptor exposes.
    pub edge: Option<usize>,
    pub tau_flag: bool,
    pub lp_part: LowPowerGroup,
    /// Z2 reflector summands, τ_e included when present.
    pub reflectors: u32,
}

impl StabilizerDescriptor {
    /// Order of the finite part.
    pub fn finite_order(&self) -> Option<u128> {
        self.lp_part.0.checked_mul(1u128.checked_shl(self.reflectors)?)
    }

    /// Finite part as a prime multiset, ascending.
    pub fn multiset(&self) -> Vec<u128> {
        let mut m = self.lp_part.primes();
        m.extend(core::iter::repeat(2).take(self.reflectors as usize));
        m.sort_unstable();
        m
    }
}

/// Flap indices are 1-based. The stabilizer keeps every other flap factor.
pub fn flap_stabilizer(bcg: &BasicChurroGroup, flap_index: usize, core_stab: CoreFactor) -> Result<StabilizerDescriptor> {
    let len = bcg.flap_factor.len();
    if flap_index == 0 || flap_index > len {
        return Err(GroupingError::IndexOutOfRange { index: flap_index, len });
    }
    let mut lp = LowPowerGroup::TRIVIAL;
    for (i, g) in bcg.flap_factor.iter().enumerate() {
        if i + 1 != flap_index {
            lp = lp_sum(lp, *g)?;
        }
    }
    Ok(StabilizerDescriptor { core: core_stab, edge: None, tau_flag: false, lp_part: lp, reflectors: 0 })
}

// ---------------------------------------------------------------------------
// quotient graph

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VertexKind {
    Waffle,
    Churro,
}

/// Always directed waffle → churro.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct QEdge {
    pub waffle: usize,
    pub churro: usize,
    pub reflective: bool,
    pub coweight: u128,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuotientGraph {
    kinds: Vec<VertexKind>,
    edges: Vec<QEdge>,
    /// (neighbour, edge) per vertex, by edge id.
    adj: Vec<Vec<(usize, usize)>>,
    /// Product of coweights over the star, for churros; 1 for waffles.
    n: Vec<u128>,
}

impl QuotientGraph {
    /// Edges are given as (from, to, reflective, coweight); `from` must be the
    /// waffle end.
    pub fn new(kinds: Vec<VertexKind>, edges: &[(usize, usize, bool, u128)]) -> Result<Self> {
        let mut out = Vec::with_capacity(edges.len());
        let mut adj = vec![Vec::new(); kinds.len()];
        let mut n = vec![1u128; kinds.len()];
        for (id, &(a, b, reflective, coweight)) in edges.iter().enumerate() {
            if a >= kinds.len() || b >= kinds.len() {
                return Err(GroupingError::UnknownVertex(id));
            }
            match (kinds[a], kinds[b]) {
                (VertexKind::Waffle, VertexKind::Churro) => {}
                (VertexKind::Churro, VertexKind::Waffle) => return Err(GroupingError::Orientation(id)),
                _ => return Err(GroupingError::NotBipartite(id)),
            }
            if coweight == 0 {
                return Err(GroupingError::ZeroCoweight(id));
            }
            n[b] = n[b].checked_mul(coweight).ok_or(GroupingError::Overflow)?;
            adj[a].push((b, id));
            adj[b].push((a, id));
            out.push(QEdge { waffle: a, churro: b, reflective, coweight });
        }
        Ok(QuotientGraph { kinds, edges: out, adj, n })
    }

    pub fn set_reflective(&mut self, e: usize, reflective: bool) -> Result<()> {
        let len = self.edges.len();
        self.edges.get_mut(e).ok_or(GroupingError::IndexOutOfRange { index: e, len })?.reflective = reflective;
        Ok(())
    }

    /// Replaces one coweight, keeping the churro's N_c in step.
    pub fn set_coweight(&mut self, e: usize, coweight: u128) -> Result<()> {
        let len = self.edges.len();
        let q = *self.edges.get(e).ok_or(GroupingError::IndexOutOfRange { index: e, len })?;
        if coweight == 0 {
            return Err(GroupingError::ZeroCoweight(e));
        }
        let n = (self.n[q.churro] / q.coweight).checked_mul(coweight).ok_or(GroupingError::Overflow)?;
        self.n[q.churro] = n;
        self.edges[e].coweight = coweight;
        Ok(())
    }

    pub fn kinds(&self) -> &[VertexKind] {
        &self.kinds
    }

    pub fn edges(&self) -> &[QEdge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.kinds.len()
    }

    pub fn star(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[v].iter().map(|&(_, e)| e)
    }

    /// N_c: order of the full flap factor of churro c.
    pub fn flap_order(&self, c: usize) -> u128 {
        self.n[c]
    }

    /// lp_order of an edge, identified with its coweight.
    pub fn lp_order(&self, e: usize) -> u128 {
        self.edges[e].coweight
    }

    pub fn weight(&self, e: usize) -> Q {
        if self.edges[e].reflective {
            Q::new(1, 2)
        } else {
            Q::from_integer(1)
        }
    }

    pub fn is_connected(&self) -> bool {
        if self.kinds.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.kinds.len()];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &(u, _) in &self.adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.iter().all(|&s| s)
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.kinds.len() && self.is_connected()
    }

    /// Lexicographically least spanning tree by edge id (Kruskal in id order).
    pub fn spanning_tree(&self) -> Result<Vec<usize>> {
        let mut parent: Vec<usize> = (0..self.kinds.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut tree = Vec::new();
        for (id, e) in self.edges.iter().enumerate() {
            let (a, b) = (find(&mut parent, e.waffle), find(&mut parent, e.churro));
            if a != b {
                parent[a] = b;
                tree.push(id);
            }
        }
        if tree.len() + 1 != self.kinds.len().max(1) {
            return Err(GroupingError::Disconnected);
        }
        Ok(tree)
    }
}

/// ν(e) = cowt(e) / wt(e).
pub fn nu(x: &QuotientGraph, e: usize) -> Q {
    Q::from_integer(x.edges[e].coweight) / x.weight(e)
}

// ---------------------------------------------------------------------------
// rooted spanning tree

struct Rooted {
    parent: Vec<Option<(usize, usize)>>,
    depth: Vec<usize>,
    order: Vec<usize>,
}

fn root_tree(x: &QuotientGraph, tree: &[usize]) -> Rooted {
    let nv = x.vertex_count();
    let mut in_tree = vec![false; x.edges.len()];
    for &e in tree {
        in_tree[e] = true;
    }
    let mut parent = vec![None; nv];
    let mut depth = vec![0; nv];
    let mut order = Vec::with_capacity(nv);
    if nv > 0 {
        order.push(0);
        let mut i = 0;
        while i < order.len() {
            let v = order[i];
            i += 1;
            for &(u, e) in &x.adj[v] {
                if in_tree[e] && u != 0 && parent[u].is_none() {
                    parent[u] = Some((v, e));
                    depth[u] = depth[v] + 1;
                    order.push(u);
                }
            }
        }
    }
    Rooted { parent, depth, order }
}

impl Rooted {
    /// Edges of the tree path from a to b, in walking order.
    fn path(&self, mut a: usize, mut b: usize) -> Vec<usize> {
        let mut head = Vec::new();
        let mut tail = Vec::new();
        while self.depth[a] > self.depth[b] {
            let (p, e) = self.parent[a].unwrap();
            head.push(e);
            a = p;
        }
        while self.depth[b] > self.depth[a] {
            let (p, e) = self.parent[b].unwrap();
            tail.push(e);
            b = p;
        }
        while a != b {
            let (pa, ea) = self.parent[a].unwrap();
            let (pb, eb) = self.parent[b].unwrap();
            head.push(ea);
            tail.push(eb);
            a = pa;
            b = pb;
        }
        tail.reverse();
        head.extend(tail);
        head
    }
}

// ---------------------------------------------------------------------------
// augmentation

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Augmentation {
    pub flap_contribution: Vec<LowPowerGroup>,
    pub reflector_bank: Vec<u32>,
    /// Spanning-tree edges the augmentation was computed from.
    pub tree: Vec<usize>,
}

impl Augmentation {
    pub fn order(&self, v: usize) -> Option<u128> {
        self.flap_contribution[v].0.checked_mul(1u128.checked_shl(self.reflector_bank[v])?)
    }
}

pub fn augment_tree(x: &QuotientGraph) -> Result<Augmentation> {
    if x.edges.len() + 1 != x.kinds.len() {
        return Err(GroupingError::NotATree);
    }
    augment_on(x, (0..x.edges.len()).collect()).map_err(|e| match e {
        GroupingError::Disconnected => GroupingError::NotATree,
        e => e,
    })
}

/// A_v over the given spanning tree, with full flap factors N_c. Computed by
/// rerooting: crossing a tree edge changes which side of it one is on, and
/// that edge alone.
pub fn augment_on(x: &QuotientGraph, tree: Vec<usize>) -> Result<Augmentation> {
    let nv = x.vertex_count();
    let rooted = root_tree(x, &tree);
    if rooted.order.len() != nv {
        return Err(GroupingError::Disconnected);
    }
    let factor = |e: usize| -> Result<u128> {
        let q = &x.edges[e];
        let n = x.n[q.churro];
        div_exact(n, q.coweight).ok_or(GroupingError::NotDivisible { dividend: n, divisor: q.coweight })
    };
    let mut flap = vec![1u128; nv];
    let mut bank = vec![0u32; nv];
    if nv > 0 {
        // the root sits on the waffle side of edge (p, u) iff p is its waffle end
        for &u in &rooted.order[1..] {
            let (p, e) = rooted.parent[u].unwrap();
            let q = &x.edges[e];
            if q.waffle == p {
                flap[0] = flap[0].checked_mul(factor(e)?).ok_or(GroupingError::Overflow)?;
            } else if q.reflective {
                bank[0] += 1;
            }
        }
        for &u in &rooted.order[1..] {
            let (p, e) = rooted.parent[u].unwrap();
            let q = &x.edges[e];
            let f = factor(e)?;
            let r = q.reflective as u32;
            if q.churro == u {
                // p on the waffle side, u on the churro side
                flap[u] = div_exact(flap[p], f).ok_or(GroupingError::NotDivisible { dividend: flap[p], divisor: f })?;
                bank[u] = bank[p] + r;
            } else {
                flap[u] = flap[p].checked_mul(f).ok_or(GroupingError::Overflow)?;
                bank[u] = bank[p] - r;
            }
        }
    }
    Ok(Augmentation {
        flap_contribution: flap.into_iter().map(LowPowerGroup).collect(),
        reflector_bank: bank,
        tree,
    })
}

/// (strand side at the waffle, flap side at the churro).
pub fn edge_stabilizer_pair(e: usize, x: &QuotientGraph, a: &Augmentation) -> Result<(StabilizerDescriptor, StabilizerDescriptor)> {
    let q = &x.edges[e];
    let r = q.reflective as u32;
    let waffle = StabilizerDescriptor {
        core: CoreFactor::Z,
        edge: Some(e),
        tau_flag: q.reflective,
        lp_part: a.flap_contribution[q.waffle],
        reflectors: a.reflector_bank[q.waffle] + r,
    };
    let others = lp_quotient(LowPowerGroup(x.n[q.churro]), LowPowerGroup(q.coweight))?;
    let lp_part = lp_sum(others, a.flap_contribution[q.churro])?;
    let bank = a.reflector_bank[q.churro];
    // τ_e is realised on the churro side whenever its finite part (other
    // flaps and augmentation alike) has a C2 to offer
    let tau_flag = q.reflective && (bank > 0 || lp_part.twos() > 0);
    let churro = StabilizerDescriptor { core: CoreFactor::Z, edge: Some(e), tau_flag, lp_part, reflectors: bank };
    Ok((waffle, churro))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IsoVerdict {
    /// Finite parts isomorphic (equal order), τ flags and Z_e markers agree.
    pub iso: bool,
    /// Additionally lp orders and reflector counts agree separately.
    pub strict: bool,
    /// (left ∖ right, right ∖ left) on the prime multisets, when not iso.
    pub witness: Option<(Vec<u128>, Vec<u128>)>,
}

pub fn check_edge_iso(pair: &(StabilizerDescriptor, StabilizerDescriptor)) -> IsoVerdict {
    let (w, c) = pair;
    let markers = w.core == c.core && w.edge.is_some() && w.edge == c.edge && w.tau_flag == c.tau_flag;
    let iso = markers && w.finite_order().is_some() && w.finite_order() == c.finite_order();
    let strict = iso && w.lp_part == c.lp_part && w.reflectors == c.reflectors;
    let witness = if iso { None } else { Some(multiset_diff(&w.multiset(), &c.multiset())) };
    IsoVerdict { iso, strict, witness }
}

fn multiset_diff(a: &[u128], b: &[u128]) -> (Vec<u128>, Vec<u128>) {
    let (mut i, mut j) = (0, 0);
    let (mut l, mut r) = (Vec::new(), Vec::new());
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            l.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            r.push(b[j]);
            j += 1;
        } else {
            i += 1;
            j += 1;
        }
    }
    (l, r)
}

// ---------------------------------------------------------------------------
// balance

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleWitness {
    /// Edges e_1, …, e_k, starting and ending at the churro `start`.
    pub edges: Vec<usize>,
    pub start: usize,
    /// ∏ ν(e_j) over odd j and over even j.
    pub odd_product: Q,
    pub even_product: Q,
}

impl CycleWitness {
    pub fn balanced(&self) -> bool {
        self.odd_product == self.even_product
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalanceReport {
    pub balanced: bool,
    pub tree: Vec<usize>,
    /// Every fundamental cycle.
    pub cycles: Vec<CycleWitness>,
    /// Indices into `cycles` that violate balance.
    pub violations: Vec<usize>,
}

fn fundamental_cycle(x: &QuotientGraph, rooted: &Rooted, chord: usize) -> CycleWitness {
    let q = &x.edges[chord];
    let mut edges = rooted.path(q.churro, q.waffle);
    edges.push(chord);
    let one = Q::from_integer(1);
    let (mut odd, mut even) = (one, one);
    for (i, &e) in edges.iter().enumerate() {
        if i % 2 == 0 {
            odd *= nu(x, e);
        } else {
            even *= nu(x, e);
        }
    }
    CycleWitness { edges, start: q.churro, odd_product: odd, even_product: even }
}

pub fn cycle_balance(x: &QuotientGraph) -> Result<BalanceReport> {
    let tree = x.spanning_tree()?;
    let rooted = root_tree(x, &tree);
    let mut in_tree = vec![false; x.edges.len()];
    for &e in &tree {
        in_tree[e] = true;
    }
    let cycles: Vec<CycleWitness> =
        (0..x.edges.len()).filter(|&e| !in_tree[e]).map(|e| fundamental_cycle(x, &rooted, e)).collect();
    let violations: Vec<usize> = (0..cycles.len()).filter(|&i| !cycles[i].balanced()).collect();
    Ok(BalanceReport { balanced: violations.is_empty(), tree, cycles, violations })
}

// ---------------------------------------------------------------------------
// sheet numbers

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SheetAssignment(pub Vec<u128>);

/// sht(waffle)·wt(e) = sht(core)·cowt(e) on every edge.
pub fn sheet_relation_check(x: &QuotientGraph, s: &SheetAssignment) -> bool {
    s.0.len() == x.vertex_count()
        && x.edges.iter().enumerate().all(|(e, q)| {
            Q::from_integer(s.0[q.waffle]) * x.weight(e) == Q::from_integer(s.0[q.churro]) * Q::from_integer(q.coweight)
        })
}

fn propagate(x: &QuotientGraph, vertex: usize, value: Q) -> Result<Vec<Q>> {
    let tree = x.spanning_tree()?;
    let rooted = root_tree(x, &tree);
    let mut d = vec![Q::from_integer(0); x.vertex_count()];
    // root the walk at `vertex` by walking the BFS order from 0 and rescaling
    d[0] = Q::from_integer(1);
    for &u in &rooted.order[1..] {
        let (p, e) = rooted.parent[u].unwrap();
        let v = nu(x, e);
        d[u] = if x.edges[e].waffle == u { d[p] * v } else { d[p] / v };
    }
    let scale = value / d[vertex];
    for v in d.iter_mut() {
        *v *= scale;
    }
    let mut in_tree = vec![false; x.edges.len()];
    for &e in &tree {
        in_tree[e] = true;
    }
    for (e, q) in x.edges.iter().enumerate() {
        if !in_tree[e] && d[q.waffle] != d[q.churro] * nu(x, e) {
            return Err(GroupingError::NoSolution { cycle: fundamental_cycle(x, &rooted, e).edges });
        }
    }
    Ok(d)
}

/// Given one vertex's sheet number, the rest follow along a spanning tree.
pub fn solve_sheets(x: &QuotientGraph, vertex: usize, sheet: u128) -> Result<SheetAssignment> {
    let d = propagate(x, vertex, Q::from_integer(sheet))?;
    let mut out = Vec::with_capacity(d.len());
    for (v, q) in d.iter().enumerate() {
        if !q.is_integer() {
            return Err(GroupingError::NonIntegral(v));
        }
        out.push(q.to_integer());
    }
    Ok(SheetAssignment(out))
}

/// The least positive integral solution.
pub fn minimal_sheets(x: &QuotientGraph) -> Result<SheetAssignment> {
    if x.vertex_count() == 0 {
        return Ok(SheetAssignment(Vec::new()));
    }
    let d = propagate(x, 0, Q::from_integer(1))?;
    let l = d.iter().fold(1u128, |acc, q| lcm(acc, *q.denom()));
    let ints: Vec<u128> = d.iter().map(|q| (*q * Q::from_integer(l)).to_integer()).collect();
    let g = ints.iter().fold(0u128, |acc, &v| gcd(acc, v));
    Ok(SheetAssignment(ints.into_iter().map(|v| v / g).collect()))
}

fn gcd(a: u128, b: u128) -> u128 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn lcm(a: u128, b: u128) -> u128 {
    a / gcd(a, b) * b
}

// ---------------------------------------------------------------------------
// grouping

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeMatch {
    pub edge: usize,
    pub waffle: StabilizerDescriptor,
    pub churro: StabilizerDescriptor,
    pub verdict: IsoVerdict,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Certificate {
    pub augmentation: Augmentation,
    pub tree_edges: Vec<EdgeMatch>,
    pub chords: Vec<EdgeMatch>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Obstruction {
    pub tree: Vec<usize>,
    pub chord: usize,
    pub cycle: CycleWitness,
    pub mismatch: EdgeMatch,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupingOutcome {
    Certificate(Certificate),
    Obstruction(Obstruction),
}

impl GroupingOutcome {
    pub fn is_certificate(&self) -> bool {
        matches!(self, GroupingOutcome::Certificate(_))
    }
}

fn edge_match(x: &QuotientGraph, a: &Augmentation, e: usize) -> Result<EdgeMatch> {
    let pair = edge_stabilizer_pair(e, x, a)?;
    let verdict = check_edge_iso(&pair);
    Ok(EdgeMatch { edge: e, waffle: pair.0, churro: pair.1, verdict })
}

/// Augment over the least spanning tree, then check every chord.
pub fn augment_graph(x: &QuotientGraph) -> Result<GroupingOutcome> {
    let tree = x.spanning_tree()?;
    let a = augment_on(x, tree.clone())?;
    let mut in_tree = vec![false; x.edges.len()];
    for &e in &tree {
        in_tree[e] = true;
    }
    let mut tree_edges = Vec::with_capacity(tree.len());
    for &e in &tree {
        let m = edge_match(x, &a, e)?;
        if !m.verdict.strict {
            return Err(GroupingError::Inconsistent(e));
        }
        tree_edges.push(m);
    }
    let mut chords = Vec::new();
    let mut rooted = None;
    for e in (0..x.edges.len()).filter(|&e| !in_tree[e]) {
        let m = edge_match(x, &a, e)?;
        if !m.verdict.iso {
            let rooted = rooted.get_or_insert_with(|| root_tree(x, &tree));
            let cycle = fundamental_cycle(x, rooted, e);
            if cycle.balanced() {
                return Err(GroupingError::Inconsistent(e));
            }
            return Ok(GroupingOutcome::Obstruction(Obstruction { tree, chord: e, cycle, mismatch: m }));
        }
        chords.push(m);
    }
    Ok(GroupingOutcome::Certificate(Certificate { augmentation: a, tree_edges, chords }))
}
