// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// fails. Runs without the libtest harness so the lines always show.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use common::*;
use waffle_core::combinatorialization::*;
use waffle_core::cubulation::*;
use waffle_core::groupings::*;
use waffle_core::hyperbolic::*;
use waffle_core::patterns::*;
use waffle_core::strands::*;
use waffle_core::Tolerances;

use std::f64::consts::PI;
use std::result::Result;

const TOL: Tolerances = Tolerances::DEFAULT;

type Verdict = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

// ---------------------------------------------------------------------------
// model corpus

struct Built {
    name: String,
    cc: ChamberComplex,
    ws: WallSystem,
    model: CubeComplexModel,
    /// Lines eligible for rotation matchings.
    chords: Option<Vec<Geodesic>>,
}

fn build(name: impl Into<String>, lines: &[Geodesic], r: f64) -> Built {
    let cc = arrangement_with(lines, r, &TOL).unwrap();
    let ws = wall_system(&cc).unwrap();
    let model = cubulate(&ws).unwrap();
    Built { name: name.into(), cc, ws, model, chords: None }
}

fn hexagonal(k: i32) -> Vec<Geodesic> {
    let mut g = Vec::new();
    for f in 0..3 {
        for j in -k..=k {
            g.push(klein_chord(PI * f as f64 / 3.0 + 0.02, 0.2 * j as f64 + 0.031 * f as f64).unwrap());
        }
    }
    g
}

/// Chords in `dirs` slightly tilted directions, `offsets` per direction.
fn chord_pattern(dirs: usize, offsets: &[f64], rot: f64) -> Vec<Geodesic> {
    let mut g = Vec::new();
    for k in 0..dirs {
        for &s in offsets {
            g.push(klein_chord(PI * k as f64 / dirs as f64 + 0.07 * s + rot, s + 0.01 * k as f64).unwrap());
        }
    }
    g
}

fn surface_window(words: &[&[i32]], r: f64, cap: usize) -> (LinePattern, SurfaceGroupPresentation) {
    let s = standard_generators(2).unwrap();
    let cs: Vec<CurveSpec> = words.iter().enumerate().map(|(i, w)| CurveSpec::new(w.to_vec(), format!("c{i}"))).collect();
    (generate_pattern(&s, &cs, &Window::new(r, cap).unwrap()).unwrap(), s)
}

fn corpus() -> Vec<Built> {
    let mut out = Vec::new();
    out.push(build("single wall", &[klein_chord(0.3, 0.1).unwrap()], 3.0));
    out.push(build("square", &[klein_chord(0.0, 0.1).unwrap(), klein_chord(PI / 2.0, 0.1).unwrap()], 3.0));
    let tri: Vec<Geodesic> = (0..3).map(|k| klein_chord(2.0 * PI * k as f64 / 3.0 + 0.1, 0.3).unwrap()).collect();
    out.push(build("triangle", &tri, 3.0));
    for k in 1..=3 {
        out.push(build(format!("hexagonal k={k}"), &hexagonal(k), klein_radius(0.95)));
    }
    for (dirs, offs) in [(4, &[-0.35, 0.1, 0.45][..]), (5, &[-0.5, -0.1, 0.3, 0.6][..]), (6, &[-0.55, -0.2, 0.15, 0.5][..])] {
        let lines = chord_pattern(dirs, offs, 0.0);
        let mut b = build(format!("chords {dirs}x{}", offs.len()), &lines, klein_radius(0.9));
        b.chords = Some(lines);
        out.push(b);
    }
    let windows: [(&[&[i32]], f64, usize); 6] = [
        (&[&[1], &[2]], 4.5, 6),
        (&[&[1], &[2]], 6.0, 8),
        (&[&[1], &[2], &[3], &[4]], 5.0, 6),
        (&[&[-2, -2, 1], &[-4, 1, 3, 1]], 5.5, 6),
        (&[&[1], &[2], &[3], &[4], &[1, 3], &[2, 4]], 4.5, 6),
        (&[&[1, 2], &[3, -4]], 4.5, 5),
    ];
    for (words, r, cap) in windows {
        let (p, _) = surface_window(words, r, cap);
        out.push(build(format!("genus 2 {words:?} R={r}"), &p.geodesics(), r));
    }
    let mut rng = StdRng::seed_from_u64(7);
    let mut made = 0;
    while made < 20 {
        let n = rng.random_range(3..14);
        let lines: Vec<Geodesic> =
            (0..n).map(|_| klein_chord(rng.random_range(0.0..PI), rng.random_range(-0.85..0.85)).unwrap()).collect();
        if let Ok(cc) = arrangement_with(&lines, klein_radius(0.95), &TOL) {
            let ws = wall_system(&cc).unwrap();
            let model = cubulate(&ws).unwrap();
            out.push(Built { name: format!("random {made}"), cc, ws, model, chords: None });
            made += 1;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// 1. hexagonal dimension

/// Independent clique oracle: crossings read off the geometry, cliques by
/// exhaustive subset growth.
fn geometric_clique(cc: &ChamberComplex) -> usize {
    let n = cc.lines.len();
    let mut adj = vec![0u64; n];
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (a, b) = (&cc.lines[i].geodesic, &cc.lines[j].geodesic);
            if let Some((t, _)) = a.crossing_parameter(b) {
                if distance(&a.point_at(t), &HPoint::I) < cc.radius {
                    adj[i] |= 1 << j;
                }
            }
        }
    }
    fn grow(adj: &[u64], cand: u64, size: usize) -> usize {
        let mut best = size;
        let mut c = cand;
        while c != 0 {
            let v = c.trailing_zeros() as usize;
            c &= c - 1;
            best = best.max(grow(adj, c & adj[v], size + 1));
        }
        best
    }
    grow(&adj, if n == 64 { u64::MAX } else { (1u64 << n) - 1 }, 0)
}

fn criterion_1() -> Verdict {
    let mut seen = Vec::new();
    for k in 1..=3 {
        let b = build("hex", &hexagonal(k), klein_radius(0.95));
        let (d, c, g) = (dimension(&b.model), max_crossing_clique(&b.ws), geometric_clique(&b.cc));
        ensure!(d == 3 && c == 3 && g == 3, "k={k}: dimension {d}, clique {c}, geometric clique {g}");
        seen.push(format!("{} lines/{} vertices", b.cc.lines.len(), b.model.vertex_count()));
    }
    Ok(format!("dimension = clique = 3 on {}", seen.join(", ")))
}

// ---------------------------------------------------------------------------
// 2. two-line condition

fn criterion_2(corpus: &[Built]) -> Verdict {
    let mut waffles = 0;
    let mut squares = 0;
    for b in corpus {
        let m = &b.model;
        let sq = m.squares();
        if m.vertex_count() > 5000 || sq.is_empty() || m.endpoints.is_none() {
            continue;
        }
        let id: Vec<usize> = (0..m.vertex_count()).collect();
        // every square of small waffles, an even spread of 60 on larger ones
        let step = sq.len().div_ceil(60);
        for s in sq.iter().step_by(step) {
            let c = Constraints { cyclic_order: true, ..Constraints::fix_square(*s) };
            let autos = automorphisms(m, &c, 5000).map_err(|e| format!("{}: {e}", b.name))?;
            ensure!(autos.len() == 1 && autos[0].vertex_map == id, "{}: square {s:?} has {} boundary-compatible automorphisms", b.name, autos.len());
            squares += 1;
        }
        waffles += 1;
    }
    ensure!(waffles >= 5, "only {waffles} waffles with squares");
    Ok(format!(
        "{waffles} waffles ≤ 5000 vertices, {squares} chosen squares: pointwise stabilizer (boundary order kept) = {{id}}"
    ))
}

// ---------------------------------------------------------------------------
// 3. shadow embedding

fn criterion_3(corpus: &[Built]) -> Verdict {
    let mut lattice = 0;
    for b in corpus {
        ensure!(shadow_embedding_ok(&b.cc, &b.model), "{}", b.name);
        // and re-derived: chamber vertices distinct, arrangement edges are model edges
        let mut v = b.model.chamber_vertex.clone();
        v.sort_unstable();
        v.dedup();
        ensure!(v.len() == b.cc.chambers.len(), "{}: not injective", b.name);
        for e in &b.cc.edges {
            let (x, y) = (b.model.chamber_vertex[e.inner], b.model.chamber_vertex[e.outer]);
            ensure!(b.model.edges.iter().any(|&(p, q, w)| w == e.line && ((p, q) == (x, y) || (p, q) == (y, x))), "{}: edge {e:?}", b.name);
        }
        lattice += b.cc.chambers.len();
    }
    Ok(format!("{} models, {lattice} chambers, zero failures", corpus.len()))
}

// ---------------------------------------------------------------------------
// 4. horostrips

fn criterion_4() -> Verdict {
    let mut rng = StdRng::seed_from_u64(4);
    let (mut worst_closed, mut worst_quad) = (0f64, 0f64);
    for _ in 0..100 {
        let y0 = rng.random_range(0.05..5.0);
        let y1 = y0 * rng.random_range(1.001..200.0);
        let strip = Horostrip::new(y0, y1).unwrap();
        let (x0, x1): (f64, f64) = (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        if (x1 - x0).abs() < 1e-3 {
            continue;
        }
        let (a, b) = (horocyclic_length((x1 - x0).abs(), y0), horocyclic_length((x1 - x0).abs(), y1));
        let q = quadrilateral_relation(a, b).unwrap();
        let leaf = horostrip_leaf_length(&strip);
        let quad = path_length(|t| (x0, y0 + (y1 - y0) * t, 0.0, y1 - y0), 0.0, 1.0, 1e-10);
        worst_closed = worst_closed.max((q - leaf).abs());
        worst_quad = worst_quad.max((q - quad).abs());
    }
    ensure!(worst_closed <= 1e-9, "closed form off by {worst_closed:e}");
    ensure!(worst_quad <= 1e-5, "quadrature off by {worst_quad:e}");
    Ok(format!("100 strips, closed form {worst_closed:.1e}, quadrature {worst_quad:.1e}"))
}

// ---------------------------------------------------------------------------
// 5. visual sandwich

fn criterion_5() -> Verdict {
    let mut rng = StdRng::seed_from_u64(5);
    let (mut pairs, mut violations) = (0usize, 0usize);
    for eps in [0.05, 0.15, 0.25, 0.3] {
        let o = HPoint::new(rng.random_range(-1.0..1.0), rng.random_range(0.3..3.0)).unwrap();
        let params = VisualMetricParams::new(eps, TOL.visual_delta, o).unwrap();
        let ep = params.epsilon_prime();
        let mut s: Vec<BoundaryPoint> = (0..101).map(|_| BoundaryPoint::from_angle(rng.random_range(0.0..2.0 * PI))).collect();
        s.sort_by(|a, b| a.angle().total_cmp(&b.angle()));
        s.dedup_by(|a, b| (a.angle() - b.angle()).abs() < 1e-9);
        for src in 0..s.len() {
            let d = chain_infimum(&params, &s, src).unwrap();
            for k in 0..s.len() {
                if k == src {
                    continue;
                }
                let q = visual_q(&params, &s[src], &s[k]).unwrap();
                pairs += 1;
                if !(d[k] <= q && (1.0 - 2.0 * ep) * q <= d[k]) {
                    violations += 1;
                }
            }
        }
    }
    ensure!(pairs >= 10_000 && violations == 0, "{violations} violations over {pairs} pairs");
    Ok(format!("{pairs} pairs over 4 admissible epsilons, 0 violations"))
}

// ---------------------------------------------------------------------------
// 6. filling

fn certify(words: &[&[i32]], r: f64, cap: usize) -> Result<(PeriodicFillingReport, ChamberComplex), PatternError> {
    let (p, s) = surface_window(words, r, cap);
    let cc = arrangement_with(&p.geodesics(), r, &TOL)?;
    Ok((certify_filling(&cc, &p, &s, TOL.filling_margin)?, cc))
}

fn criterion_6() -> Verdict {
    let pair: [&[i32]; 2] = [&[-2, -2, 1], &[-4, 1, 3, 1]];
    let s = standard_generators(2).unwrap();
    let cs = [CurveSpec::new(pair[0].to_vec(), "alpha"), CurveSpec::new(pair[1].to_vec(), "beta")];
    let (r, cap) = (6.0, 6);
    let window = Window::new(r, cap).unwrap();
    ensure!(is_saturated_within(&s, &cs, &window, r - TOL.filling_margin).map_err(|e| e.to_string())?, "not saturated at R={r}, cap={cap}");
    let (f, _) = certify(&pair, r, cap).map_err(|e| e.to_string())?;
    ensure!(f.filling && f.witness.is_none(), "pair not certified: {f:?}");
    ensure!(
        f.vertices as i64 - f.edges as i64 + f.boundaries as i64 == f.euler_characteristic && f.euler_characteristic == -2,
        "Euler count {f:?}"
    );
    // one simple closed curve: no crossing, a region that is not a disc
    let (g, cc) = certify(&[&[1]], r, cap).map_err(|e| e.to_string())?;
    ensure!(!g.filling, "single curve certified filling");
    let w = g.witness.ok_or("no witness for the single curve")?;
    ensure!(!cc.chambers[w].bounded, "witness chamber {w} is bounded");
    Ok(format!(
        "pair V={} E={} F={} χ={} at R={r} cap={cap} (saturated); curve a1 rejected, witness chamber {w}",
        f.vertices, f.edges, f.boundaries, f.euler_characteristic
    ))
}

// ---------------------------------------------------------------------------
// 7. combinatorialization

fn sorted_lines(lines: &[Geodesic], r: f64) -> Vec<Geodesic> {
    arrangement_with(lines, r, &TOL).unwrap().lines.iter().map(|l| l.geodesic).collect()
}

/// Brute-force search (boundary order kept) for every extension of the
/// square's images, and the unpinned isomorphism set; the candidate must be
/// the only extension and must appear in the set.
fn agrees_with_search(iso: &CubeIsomorphism, m1: &CubeComplexModel, m2: &CubeComplexModel) -> Result<(), String> {
    let mut sqs = m1.squares();
    if sqs.is_empty() {
        sqs.push([0, 0, 0, 0]);
    }
    for sq in sqs.iter().take(3) {
        let pins = sq.iter().map(|&v| (v, iso.vertex_map[v])).collect();
        let found = isomorphisms(m1, m2, &Constraints { pins, cyclic_order: true, ..Default::default() }, 5000).map_err(|e| e.to_string())?;
        if m1.squares().is_empty() {
            ensure!(found.iter().any(|f| f.vertex_map == iso.vertex_map), "candidate not found");
        } else {
            ensure!(found.len() == 1, "{} extensions of square {sq:?}", found.len());
            ensure!(found[0].vertex_map == iso.vertex_map && found[0].wall_map == iso.wall_map, "search disagrees");
        }
    }
    let all = isomorphisms(m1, m2, &Constraints { cyclic_order: true, ..Default::default() }, 5000).map_err(|e| e.to_string())?;
    ensure!(all.iter().any(|f| f.vertex_map == iso.vertex_map && f.wall_map == iso.wall_map), "candidate missing from the full search");
    Ok(())
}

fn criterion_7(corpus: &[Built]) -> Verdict {
    let (mut ident, mut rot) = (0, 0);
    for b in corpus.iter().filter(|b| b.model.vertex_count() <= 2000) {
        let m = &b.model;
        let iso = combinatorialize(&QuasiMatching::identity(m.walls), m, m).map_err(|e| format!("{}: {e}", b.name))?;
        ensure!(verify_isomorphism(&iso, m, m).ok, "{}: identity not verified", b.name);
        agrees_with_search(&iso, m, m).map_err(|e| format!("{} identity: {e}", b.name))?;
        ident += 1;
    }
    let r = klein_radius(0.9);
    for b in corpus.iter().filter(|b| b.chords.is_some() && b.model.vertex_count() <= 2000) {
        let p0 = b.chords.as_ref().unwrap();
        for (phi, psi) in [(0.4, 0.5), (1.1, -0.3), (2.0, 0.05)] {
            let (a, c) = (MobiusMap::rotation(phi), MobiusMap::rotation(psi));
            let p1: Vec<Geodesic> = p0.iter().map(|g| a.apply(g)).collect();
            let p2: Vec<Geodesic> = p1.iter().map(|g| c.apply(g)).collect();
            let (s0, s1, s2) = (sorted_lines(p0, r), sorted_lines(&p1, r), sorted_lines(&p2, r));
            let m1 = build("", &p1, r).model;
            let m2 = build("", &p2, r).model;
            let q1 = QuasiMatching::from_mobius(&s0, &s1, &a, 1e-9).ok_or("rotation matching failed")?;
            let q2 = QuasiMatching::from_mobius(&s1, &s2, &c, 1e-9).ok_or("rotation matching failed")?;
            let q12 = QuasiMatching::from_mobius(&s0, &s2, &(c * a), 1e-9).ok_or("composite matching failed")?;
            let i1 = combinatorialize(&q1, &b.model, &m1).map_err(|e| e.to_string())?;
            let i2 = combinatorialize(&q2, &m1, &m2).map_err(|e| e.to_string())?;
            let i12 = combinatorialize(&q12, &b.model, &m2).map_err(|e| e.to_string())?;
            ensure!(verify_isomorphism(&i1, &b.model, &m1).ok, "{} rotation {phi}: not verified", b.name);
            agrees_with_search(&i1, &b.model, &m1).map_err(|e| format!("{} rotation {phi}: {e}", b.name))?;
            ensure!(q1.then(&q2) == q12, "{}: matchings do not compose", b.name);
            ensure!(i1.then(&i2) == i12, "{}: functoriality fails", b.name);
            let id = combinatorialize(&QuasiMatching::identity(m1.walls), &m1, &m1).map_err(|e| e.to_string())?;
            ensure!(id.then(&i2) == i2 && i1.then(&id) == i1, "{}: identity is not neutral", b.name);
            rot += 1;
        }
    }
    Ok(format!("{ident} identity and {rot} rotation matchings equal the search; composition exact"))
}

// ---------------------------------------------------------------------------
// 8. clutching

fn criterion_8() -> Verdict {
    let mut rng = StdRng::seed_from_u64(8);
    let (mut accepted, mut rejected) = (0, 0);
    for _ in 0..500 {
        let n = rng.random_range(1..7);
        let taus: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..50.0)).collect();
        let a = clutching(&Churro::from_taus("a", &taus).unwrap());
        let id: Vec<usize> = (0..n).collect();
        // power-of-two scaling is exact in floating point
        let k = rng.random_range(-20..20);
        let mu2 = 2f64.powi(k);
        let b = clutching(&Churro::from_taus("b", &taus.iter().map(|t| t * mu2).collect::<Vec<_>>()).unwrap());
        ensure!(a.ratios == b.ratios && a.widths == b.widths, "ratios moved under scaling by 2^{k}");
        let mu = rng.random_range(1e-3..1e3);
        let c = clutching(&Churro::from_taus("c", &taus.iter().map(|t| t * mu).collect::<Vec<_>>()).unwrap());
        for i in 0..n {
            for j in 0..n {
                ensure!((a.ratios[i][j] - c.ratios[i][j]).abs() <= 4.0 * f64::EPSILON * a.ratios[i][j], "ratio {i}{j} moved");
            }
        }
        ensure!(clutching_match(&a, &b, &id, 1e-9).unwrap().matched && clutching_match(&a, &c, &id, 1e-9).unwrap().matched, "scaled copy rejected");
        accepted += 2;
        if n >= 2 {
            let mut p = taus.clone();
            let j = rng.random_range(0..n);
            p[j] *= 1.0 + rng.random_range(1e-7..1e-2) * if rng.random::<bool>() { 1.0 } else { -1.0 };
            let d = clutching(&Churro::from_taus("d", &p).unwrap());
            let m = clutching_match(&a, &d, &id, 1e-9).unwrap();
            ensure!(!m.matched && m.witness.is_some(), "perturbed copy accepted: {taus:?} vs {p:?}");
            rejected += 1;
        }
    }
    Ok(format!("{accepted} scaled copies accepted (2^k scaling bit-exact), {rejected} perturbed copies rejected"))
}

// ---------------------------------------------------------------------------
// 9-11. groupings

fn quotient(s: &Shape, cowt: &[u128], refl: u32) -> QuotientGraph {
    let e: Vec<(usize, usize, bool, u128)> =
        s.edges.iter().enumerate().map(|(i, &(a, b))| (a, b, refl >> i & 1 == 1, cowt[i])).collect();
    QuotientGraph::new(s.kinds.clone(), &e).unwrap()
}

fn set_all(x: &mut QuotientGraph, cowt: &[u128], refl: u32) {
    for (e, &w) in cowt.iter().enumerate() {
        x.set_coweight(e, w).unwrap();
        x.set_reflective(e, refl >> e & 1 == 1).unwrap();
    }
}

fn tree_pairs(x: &QuotientGraph) -> Vec<(StabilizerDescriptor, StabilizerDescriptor)> {
    let a = augment_tree(x).unwrap();
    (0..x.edges().len()).map(|e| edge_stabilizer_pair(e, x, &a).unwrap()).collect()
}

fn criterion_9() -> Verdict {
    const CAP: u128 = 6;
    let mut literal = 0u64;
    let mut factored = 0u64;
    let mut sampled = 0u64;
    let mut rng = StdRng::seed_from_u64(9);
    for n in 1..=8 {
        for s in bipartite_trees(n) {
            let m = s.edges.len();
            let mut x = quotient(&s, &vec![1; m], 0);
            let mut cw = vec![1u128; m];
            if n <= 6 {
                // the full product, literally
                loop {
                    for r in 0u32..1 << m {
                        set_all(&mut x, &cw, r);
                        for (e, p) in tree_pairs(&x).iter().enumerate() {
                            ensure!(check_edge_iso(p).iso, "{s:?} cowt {cw:?} refl {r:b}: edge {e} fails");
                        }
                        literal += 1;
                    }
                    if !odometer(&mut cw, CAP) {
                        break;
                    }
                }
                continue;
            }
            // lp parts read only coweights, reflector counts and flags only
            // reflectivity: sweep each factor in full with the other fixed
            loop {
                set_all(&mut x, &cw, 0);
                for (e, p) in tree_pairs(&x).iter().enumerate() {
                    let v = check_edge_iso(p);
                    ensure!(v.strict, "{s:?} cowt {cw:?}: edge {e} fails");
                }
                factored += 1;
                if !odometer(&mut cw, CAP) {
                    break;
                }
            }
            for r in 0u32..1 << m {
                for c in [1, CAP] {
                    set_all(&mut x, &vec![c; m], r);
                    for (e, p) in tree_pairs(&x).iter().enumerate() {
                        ensure!(check_edge_iso(p).strict, "{s:?} refl {r:b}: edge {e} fails");
                    }
                    factored += 1;
                }
            }
            // and the separation itself, on random points of the product
            for _ in 0..20_000 {
                let c: Vec<u128> = (0..m).map(|_| rng.random_range(1..=CAP)).collect();
                let r = rng.random_range(0..1u32 << m);
                set_all(&mut x, &c, r);
                let full = tree_pairs(&x);
                set_all(&mut x, &c, 0);
                let lp_only = tree_pairs(&x);
                set_all(&mut x, &vec![1; m], r);
                let refl_only = tree_pairs(&x);
                for e in 0..m {
                    ensure!(check_edge_iso(&full[e]).iso, "{s:?} cowt {c:?} refl {r:b}: edge {e} fails");
                    for side in 0..2 {
                        let pick = |p: &(StabilizerDescriptor, StabilizerDescriptor)| if side == 0 { p.0.clone() } else { p.1.clone() };
                        let (f, l, q) = (pick(&full[e]), pick(&lp_only[e]), pick(&refl_only[e]));
                        ensure!(f.lp_part == l.lp_part && f.reflectors == q.reflectors && f.tau_flag == q.tau_flag, "separation fails on {s:?}");
                    }
                }
                sampled += 1;
            }
        }
    }
    Ok(format!(
        "trees ≤ 8 vertices, cowt ≤ 6, all reflectivity: {literal} combinations literally (n ≤ 6), \
         {factored} factor sweeps (n = 7, 8), {sampled} sampled full combinations; every edge iso"
    ))
}

struct GraphRun {
    combos: u64,
    balanced: u64,
    obstructed: u64,
    reflective_combos: u64,
}

fn check_instance(s: &Shape, x: &QuotientGraph, sheets: &mut u64) -> Result<bool, String> {
    let bal = cycle_balance(x).map_err(|e| e.to_string())?;
    let out = augment_graph(x);
    match (&out, bal.balanced) {
        (Ok(GroupingOutcome::Certificate(c)), true) => {
            let a = &c.augmentation;
            for m in &c.chords {
                let p = edge_stabilizer_pair(m.edge, x, a).map_err(|e| e.to_string())?;
                ensure!(check_edge_iso(&p).iso && p.0 == m.waffle && p.1 == m.churro, "{s:?}: chord {} descriptors differ", m.edge);
            }
            ensure!(c.tree_edges.len() + c.chords.len() == x.edges().len(), "{s:?}: edges missing from the certificate");
            // 11: sheets
            let base = minimal_sheets(x).map_err(|e| format!("{s:?}: {e}"))?;
            ensure!(sheet_relation_check(x, &base), "{s:?}: minimal sheets violate the degree equation");
            for v in 0..x.vertex_count() {
                let solved = solve_sheets(x, v, 3 * base.0[v]).map_err(|e| format!("{s:?}: {e}"))?;
                ensure!(sheet_relation_check(x, &solved), "{s:?}: solved sheets violate the degree equation");
                ensure!(solved.0.iter().zip(&base.0).all(|(a, b)| *a == 3 * b), "{s:?}: solution is not a multiple");
            }
            *sheets += 1;
            Ok(true)
        }
        (Ok(GroupingOutcome::Obstruction(o)), false) => {
            ensure!(!o.cycle.balanced() && !o.mismatch.verdict.iso, "{s:?}: obstruction without witness");
            Ok(false)
        }
        (o, b) => Err(format!("{s:?} {:?}: balanced={b} but augment_graph gave {o:?}", x.edges())),
    }
}

fn criterion_10_11(sheets: &mut u64) -> Result<GraphRun, String> {
    const CAP: u128 = 4;
    let shapes = small_multigraphs(6, 7);
    let mut run = GraphRun { combos: 0, balanced: 0, obstructed: 0, reflective_combos: 0 };
    for s in &shapes {
        let m = s.edges.len();
        let mut x = quotient(s, &vec![1; m], 0);
        let mut cw = vec![1u128; m];
        loop {
            // every reflectivity pattern up to five edges; beyond, the
            // all-plain and all-reflective patterns
            let patterns: Vec<u32> = if m <= 5 { (0..1 << m).collect() } else { vec![0, (1 << m) - 1] };
            for r in patterns {
                set_all(&mut x, &cw, r);
                if check_instance(s, &x, sheets)? {
                    run.balanced += 1;
                } else {
                    run.obstructed += 1;
                }
                if r == 0 {
                    run.combos += 1;
                } else {
                    run.reflective_combos += 1;
                }
            }
            if !odometer(&mut cw, CAP) {
                break;
            }
        }
    }
    Ok(run)
}

// ---------------------------------------------------------------------------
// 12. strands

fn staircase(moves: &[(i32, i32)], periods: usize) -> (LatticeComplex, Vec<i32>) {
    let mut cells = vec![vec![0, 0, 0]];
    for i in 0..moves.len() * periods {
        let (dx, dy) = moves[i % moves.len()];
        let c = cells.last().unwrap();
        cells.push(vec![c[0] + dx, c[1] + dy, 0]);
    }
    (LatticeComplex::new(3, &cells).unwrap(), cells[moves.len()].clone())
}

/// Closed taut string in the quotient of a periodic staircase of unit
/// squares: the shortest periodic polyline through portal corners that
/// stays in the corridor.
fn corner_oracle(moves: &[(i32, i32)]) -> f64 {
    let m = moves.len();
    // portals over three periods: (fixed coordinate axis, position, span lo)
    let mut portals = Vec::new();
    let mut c = (0i32, 0i32);
    for i in 0..3 * m {
        let (dx, dy) = moves[i % m];
        if dx == 1 {
            portals.push((0usize, (c.0 + 1) as f64, c.1 as f64));
        } else {
            portals.push((1usize, (c.1 + 1) as f64, c.0 as f64));
        }
        c = (c.0 + dx, c.1 + dy);
    }
    let t = moves.iter().fold((0.0, 0.0), |a, &(x, y)| (a.0 + x as f64, a.1 + y as f64));
    let inside = |p: (f64, f64), q: (f64, f64), from: usize, to: usize| -> bool {
        (from + 1..to).all(|k| {
            let (axis, pos, lo) = portals[k];
            let (a, b) = if axis == 0 { (p.0, q.0) } else { (p.1, q.1) };
            if (b - a).abs() < 1e-15 {
                return false;
            }
            let s = (pos - a) / (b - a);
            let other = if axis == 0 { p.1 + s * (q.1 - p.1) } else { p.0 + s * (q.0 - p.0) };
            (-1e-12..=1.0 + 1e-12).contains(&s) && other >= lo - 1e-12 && other <= lo + 1.0 + 1e-12
        })
    };
    let corner = |k: usize, end: usize| -> (f64, f64) {
        let (axis, pos, lo) = portals[k];
        let v = lo + end as f64;
        if axis == 0 {
            (pos, v)
        } else {
            (v, pos)
        }
    };
    let mut best = f64::INFINITY;
    // a straight line that threads every portal can be slid onto a corner,
    // so the single-corner polylines cover it
    // corner polylines: subsets of corners within one period (middle copy)
    let n_corners = 2 * m;
    for mask in 1u32..1 << n_corners {
        let pts: Vec<(usize, (f64, f64))> =
            (0..n_corners).filter(|&b| mask >> b & 1 == 1).map(|b| (m + b / 2, corner(m + b / 2, b % 2))).collect();
        // one corner per portal
        if pts.windows(2).any(|w| w[0].0 == w[1].0) {
            continue;
        }
        let mut len = 0.0;
        let mut ok = true;
        for i in 0..pts.len() {
            let (k0, p) = pts[i];
            let (k1, q) = if i + 1 < pts.len() { pts[i + 1] } else { (pts[0].0 + m, (pts[0].1 .0 + t.0, pts[0].1 .1 + t.1)) };
            if !inside(p, q, k0, k1) {
                ok = false;
                break;
            }
            len += ((q.0 - p.0).powi(2) + (q.1 - p.1).powi(2)).sqrt();
        }
        if ok {
            best = best.min(len);
        }
    }
    best
}

fn as_map(model: &CubeComplexModel, m: &CubeMorphism) -> CubeMap {
    let v = &model.vertices[0];
    let w = &model.vertices[m.vertex_map[0]];
    CubeMap {
        wall_map: m.wall_map.iter().map(|&j| Some(j)).collect(),
        flip: (0..model.walls).map(|i| v.get(i) != w.get(m.wall_map[i])).collect(),
        base: 0,
        base_image: m.vertex_map[0],
    }
}

fn criterion_12() -> Verdict {
    let mut worst_straight = 0f64;
    for k in 1..=5 {
        let lc = LatticeComplex::new(2, &(0..4 * k).map(|x| vec![x, 0]).collect::<Vec<_>>()).unwrap();
        let h = lc.wall(&[0, 0], 1).unwrap();
        let g = lc.translation(&[k, 0], &[k, 0]).unwrap();
        let s = strand(&lc.model, h, &g, &TOL).map_err(|e| e.to_string())?;
        worst_straight = worst_straight.max((s.tau - k as f64).abs());
    }
    ensure!(worst_straight <= 1e-9, "straight strip off by {worst_straight:e}");
    let cases: [&[(i32, i32)]; 6] = [
        &[(1, 0), (0, 1)],
        &[(1, 0), (1, 0), (0, 1)],
        &[(1, 0), (1, 0), (0, 1), (0, 1)],
        &[(1, 0), (1, 0), (1, 0), (0, 1), (0, 1), (0, 1), (0, 1)],
        &[(1, 0), (0, 1), (0, 1), (0, 1)],
        &[(1, 0), (1, 0), (1, 0), (1, 0), (0, 1)],
    ];
    let mut worst_l = 0f64;
    let mut checked = 0;
    let mut worst_inv = 0f64;
    for moves in cases {
        let oracle = corner_oracle(moves);
        let (lc, base) = staircase(moves, 4);
        let t = moves.iter().fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        let h = lc.wall(&[0, 0, 0], 2).unwrap();
        let g = lc.translation(&[t.0, t.1, 0], &base).unwrap();
        let s = strand(&lc.model, h, &g, &TOL).map_err(|e| e.to_string())?;
        worst_l = worst_l.max((s.tau - oracle).abs());
        ensure!((s.tau - oracle).abs() <= 1e-8, "{moves:?}: tau {} vs oracle {oracle}", s.tau);
        // symmetries: brute-force automorphisms of a shorter copy
        if moves.len() <= 4 {
            let (lc, base) = staircase(moves, 3);
            let h = lc.wall(&[0, 0, 0], 2).unwrap();
            let g = lc.translation(&[t.0, t.1, 0], &base).unwrap();
            let s = strand(&lc.model, h, &g, &TOL).map_err(|e| e.to_string())?;
            let autos = automorphisms(&lc.model, &Constraints::default(), 5000).map_err(|e| e.to_string())?;
            for a in autos.iter().filter(|a| a.wall_map[h] == h) {
                let commutes = (0..lc.model.vertex_count()).all(|v| {
                    match (g.apply(&lc.model, &lc.model, a.vertex_map[v]), g.apply(&lc.model, &lc.model, v)) {
                        (Some(x), Some(y)) => x == a.vertex_map[y],
                        _ => true,
                    }
                });
                if commutes {
                    let d = invariance_defect(&lc.model, &s, &as_map(&lc.model, a)).ok_or("symmetry moved the strand off the model")?;
                    worst_inv = worst_inv.max(d);
                    checked += 1;
                }
            }
        }
    }
    ensure!(worst_inv <= 1e-9, "strand moved by {worst_inv:e} under a commuting symmetry");
    ensure!(checked > 0, "no commuting symmetries found");
    Ok(format!(
        "straight {worst_straight:.1e}, L-strips vs corner oracle {worst_l:.1e}, {checked} commuting symmetries move strands ≤ {worst_inv:.1e}"
    ))
}

// ---------------------------------------------------------------------------

fn run(n: &str, limit: Option<Duration>, f: impl FnOnce() -> Verdict) -> bool {
    let t = Instant::now();
    let r = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
        Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
    });
    let dt = t.elapsed();
    let late = limit.is_some_and(|l| dt > l);
    let budget = limit.map(|l| format!(" / {}s", l.as_secs())).unwrap_or_default();
    let (ok, msg) = match r {
        Ok(m) if !late => (true, m),
        Ok(m) => (false, format!("over time: {m}")),
        Err(m) => (false, m),
    };
    println!("criterion {n:>2}: {} ({:.2}s{budget}) {msg}", if ok { "PASS" } else { "FAIL" }, dt.as_secs_f64());
    ok
}

fn main() {
    let secs = |s| Some(Duration::from_secs(s));
    let mut ok = Vec::new();
    ok.push(run("1", secs(10), criterion_1));
    let t = Instant::now();
    let corpus = corpus();
    println!("corpus: {} models built in {:.2}s", corpus.len(), t.elapsed().as_secs_f64());
    ok.push(run("2", secs(60), || criterion_2(&corpus)));
    ok.push(run("3", None, || criterion_3(&corpus)));
    ok.push(run("4", secs(5), criterion_4));
    ok.push(run("5", secs(30), criterion_5));
    ok.push(run("6", secs(120), criterion_6));
    ok.push(run("7", None, || criterion_7(&corpus)));
    ok.push(run("8", None, criterion_8));
    ok.push(run("9", secs(60), criterion_9));
    let mut sheets = 0u64;
    let mut graphs: Option<GraphRun> = None;
    ok.push(run("10", secs(120), || {
        let g = criterion_10_11(&mut sheets)?;
        let msg = format!(
            "{} multigraphs, {} coweight assignments (plain) + {} reflective variants: {} balanced = certified, {} obstructed",
            small_multigraphs(6, 7).len(),
            g.combos,
            g.reflective_combos,
            g.balanced,
            g.obstructed
        );
        graphs = Some(g);
        Ok(msg)
    }));
    ok.push(run("11", None, || {
        let g = graphs.as_ref().ok_or("criterion 10 did not finish")?;
        ensure!(sheets == g.balanced && sheets > 0, "{sheets} of {} balanced instances solved", g.balanced);
        Ok(format!("{sheets} balanced instances: minimal and solved sheets satisfy the degree equation on every edge"))
    }));
    ok.push(run("12", None, criterion_12));
    let passed = ok.iter().filter(|&&b| b).count();
    println!("acceptance: {passed}/{} criteria pass", ok.len());
    if passed != ok.len() {
        std::process::exit(1);
    }
}
