// Small-graph enumerators shared by the exhaustive tests. Everything here is
// deliberately naive: canonical forms by brute force or AHU strings.
#![allow(dead_code)]

use std::collections::BTreeSet;
use waffle_core::groupings::VertexKind;

/// A bipartite graph with kinds and (waffle, churro) edge list.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Shape {
    pub kinds: Vec<VertexKind>,
    pub edges: Vec<(usize, usize)>,
}

fn ahu(adj: &[Vec<usize>], kinds: &[bool], v: usize, parent: usize) -> String {
    let mut kids: Vec<String> = adj[v].iter().filter(|&&u| u != parent).map(|&u| ahu(adj, kinds, u, v)).collect();
    kids.sort();
    let mut s = String::from(if kinds[v] { "(W" } else { "(C" });
    for k in kids {
        s.push_str(&k);
    }
    s.push(')');
    s
}

fn tree_canon(n: usize, kinds: &[bool], edges: &[(usize, usize)]) -> String {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    // centres by leaf stripping
    let mut deg: Vec<usize> = adj.iter().map(|a| a.len()).collect();
    let mut alive = n;
    let mut layer: Vec<usize> = (0..n).filter(|&v| deg[v] <= 1).collect();
    let mut removed = vec![false; n];
    while alive > 2 {
        let mut next = Vec::new();
        for &v in &layer {
            removed[v] = true;
            alive -= 1;
            for &u in &adj[v] {
                if !removed[u] {
                    deg[u] -= 1;
                    if deg[u] == 1 {
                        next.push(u);
                    }
                }
            }
        }
        layer = next;
    }
    (0..n).filter(|&v| !removed[v]).map(|c| ahu(&adj, kinds, c, usize::MAX)).min().unwrap()
}

/// Every bipartite tree on `n` vertices with labelled sides, up to isomorphism
/// preserving the waffle/churro labels.
pub fn bipartite_trees(n: usize) -> Vec<Shape> {
    assert!(n >= 1);
    // (is_waffle per vertex, edges)
    let mut level: Vec<(Vec<bool>, Vec<(usize, usize)>)> = vec![(vec![true], vec![]), (vec![false], vec![])];
    for m in 1..n {
        let mut seen = BTreeSet::new();
        let mut next = Vec::new();
        for (kinds, edges) in &level {
            for v in 0..m {
                let mut k = kinds.clone();
                k.push(!kinds[v]);
                let mut e = edges.clone();
                e.push((v, m));
                if seen.insert(tree_canon(m + 1, &k, &e)) {
                    next.push((k, e));
                }
            }
        }
        level = next;
    }
    level.into_iter().map(|(k, e)| orient(&k, &e)).collect()
}

fn orient(kinds: &[bool], edges: &[(usize, usize)]) -> Shape {
    Shape {
        kinds: kinds.iter().map(|&w| if w { VertexKind::Waffle } else { VertexKind::Churro }).collect(),
        edges: edges.iter().map(|&(a, b)| if kinds[a] { (a, b) } else { (b, a) }).collect(),
    }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for i in 0..n {
            let mut q = p.clone();
            q.insert(i, n - 1);
            out.push(q);
        }
    }
    out
}

pub fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    let mut comps = n;
    for &(a, b) in edges {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra] = rb;
            comps -= 1;
        }
    }
    comps == 1
}

/// Connected bipartite multigraphs with `w` waffles (vertices 0..w) and `c`
/// churros (w..w+c), exactly `e` edges, up to side-preserving isomorphism.
pub fn bipartite_multigraphs(w: usize, c: usize, e: usize) -> Vec<Shape> {
    let pairs: Vec<(usize, usize)> = (0..w).flat_map(|a| (0..c).map(move |b| (a, w + b))).collect();
    let pw = permutations(w);
    let pc = permutations(c);
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut idx = vec![0usize; e];
    // multisets as non-decreasing index sequences
    loop {
        let edges: Vec<(usize, usize)> = idx.iter().map(|&i| pairs[i]).collect();
        if connected(w + c, &edges) {
            let mut best: Option<Vec<(usize, usize)>> = None;
            for a in &pw {
                for b in &pc {
                    let mut m: Vec<(usize, usize)> = edges.iter().map(|&(x, y)| (a[x], w + b[y - w])).collect();
                    m.sort();
                    if best.as_ref().map_or(true, |bb| m < *bb) {
                        best = Some(m);
                    }
                }
            }
            if seen.insert(best.unwrap()) {
                let mut kinds = vec![VertexKind::Waffle; w];
                kinds.extend(std::iter::repeat(VertexKind::Churro).take(c));
                out.push(Shape { kinds, edges });
            }
        }
        // advance
        let mut k = e;
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            if idx[k] + 1 < pairs.len() {
                let v = idx[k] + 1;
                for j in k..e {
                    idx[j] = v;
                }
                break;
            }
        }
    }
}

/// All shapes for the multigraph criterion: at most `nv` vertices and `ne` edges.
pub fn small_multigraphs(nv: usize, ne: usize) -> Vec<Shape> {
    let mut out = Vec::new();
    for w in 1..nv {
        for c in 1..=nv - w {
            for e in (w + c - 1)..=ne {
                out.extend(bipartite_multigraphs(w, c, e));
            }
        }
    }
    out
}

/// Odometer over `len` digits in 1..=base.
pub fn odometer(digits: &mut [u128], base: u128) -> bool {
    for d in digits.iter_mut() {
        if *d < base {
            *d += 1;
            return true;
        }
        *d = 1;
    }
    false
}
