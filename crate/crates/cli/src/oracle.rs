//! Brute-force cross-checks, exposed so test expectations can be traced to
//! an independent computation: quadrature of horostrip leaves, crossing
//! cliques against cube dimension, and square-fixing automorphisms.

use rand::rngs::StdRng;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use serde_json::{json, Value};

use waffle_core::cubulation::{automorphisms, dimension, max_crossing_clique, Constraints};
use waffle_core::hyperbolic::{horocyclic_length, horostrip_leaf_length, path_length, quadrilateral_relation, Horostrip};

use crate::input::InputSpec;
use crate::pipeline::{Context, Failure, Outcome, OutcomeKind, Report};
use crate::settings::Settings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Oracle {
    Quadrature,
    Clique,
    Automorphisms,
}

/// Closed form vs quadrature on random strips: leaf length = width, and
/// |ln(a/b)| of the horocyclic sides = width.
fn quadrature(settings: &Settings) -> Result<(Value, bool), Failure> {
    let mut rng = StdRng::seed_from_u64(settings.seed);
    let (mut closed, mut quad) = (0.0f64, 0.0f64);
    for _ in 0..settings.oracle_samples {
        let y_low = 10f64.powf(rng.random_range(-1.0..1.0));
        let width = rng.random_range(0.01..5.0);
        let s = Horostrip::new(y_low, y_low * f64::exp(width)).map_err(|e| Failure::Internal(e.to_string()))?;
        let x0 = rng.random_range(-3.0..3.0);
        let l = rng.random_range(0.1..4.0);
        let leaf = horostrip_leaf_length(&s);
        let (a, b) = (horocyclic_length(l, s.y_low()), horocyclic_length(l, s.y_high()));
        let rel = quadrilateral_relation(a, b).map_err(|e| Failure::Internal(e.to_string()))?;
        let (lo, hi) = (s.y_low(), s.y_high());
        let q = path_length(|t| (x0, lo + (hi - lo) * t, 0.0, hi - lo), 0.0, 1.0, 1e-12);
        closed = closed.max((rel - s.width()).abs()).max((leaf - s.width()).abs());
        quad = quad.max((q - rel).abs());
    }
    let ok = closed <= 1e-9 && quad <= 1e-5;
    Ok((json!({ "samples": settings.oracle_samples, "closed_form_error": closed, "quadrature_error": quad }), ok))
}

fn clique(cx: &mut Context) -> Result<(Value, bool), Failure> {
    let mut out = vec![];
    let mut ok = true;
    for s in 0..cx.spec.surfaces.len() {
        let id = cx.spec.surfaces[s].id.clone();
        let sw = cx.ensure_model(s)?;
        let (ws, m) = sw.model.as_ref().unwrap();
        let (d, k) = (dimension(m), max_crossing_clique(ws));
        ok &= d == k;
        out.push(json!({ "surface": id, "dimension": d, "max_crossing_clique": k }));
    }
    Ok((json!({ "surfaces": out }), ok))
}

/// Automorphisms fixing a square pointwise and acting on the boundary.
fn automorphism_oracle(cx: &mut Context) -> Result<(Value, bool), Failure> {
    let mut rng = StdRng::seed_from_u64(cx.settings.seed);
    let (want, cap) = (cx.settings.oracle_squares, cx.settings.tolerances.automorphism_cap);
    let mut out = vec![];
    let mut ok = true;
    for s in 0..cx.spec.surfaces.len() {
        let id = cx.spec.surfaces[s].id.clone();
        let sw = cx.ensure_model(s)?;
        let (_, m) = sw.model.as_ref().unwrap();
        if m.vertex_count() > cap {
            out.push(json!({ "surface": id, "vertices": m.vertex_count(), "skipped": format!("above the cap of {cap} vertices") }));
            continue;
        }
        let squares = m.squares();
        let picks = sample(&mut rng, squares.len(), want.min(squares.len())).into_vec();
        let mut counts = vec![];
        for i in picks {
            let c = Constraints { cyclic_order: true, ..Constraints::fix_square(squares[i]) };
            let autos = automorphisms(m, &c, cap).map_err(|e| Failure::Internal(e.to_string()))?;
            ok &= autos.len() == 1;
            counts.push(json!({ "square": squares[i], "automorphisms": autos.len() }));
        }
        out.push(json!({ "surface": id, "vertices": m.vertex_count(), "squares": counts }));
    }
    Ok((json!({ "surfaces": out }), ok))
}

pub fn run_oracle(oracle: Oracle, spec: Option<&InputSpec>, settings: &Settings) -> Report {
    let command = format!("oracle {}", serde_json::to_value(oracle).unwrap().as_str().unwrap());
    let result = match (oracle, spec) {
        (Oracle::Quadrature, _) => quadrature(settings),
        (_, None) => Err(Failure::Precondition(json!({ "message": "this oracle needs --input" }))),
        (Oracle::Clique, Some(spec)) => clique(&mut Context::new(spec, settings)),
        (Oracle::Automorphisms, Some(spec)) => automorphism_oracle(&mut Context::new(spec, settings)),
    };
    let (kind, result, diagnostic) = match result {
        Ok((v, true)) => (OutcomeKind::Completed, v, None),
        Ok((v, false)) => (OutcomeKind::Internal, v, Some(json!({ "message": "oracle disagreement" }))),
        Err(Failure::Precondition(d)) => (OutcomeKind::Precondition, Value::Null, Some(d)),
        Err(Failure::Obstruction(d)) => (OutcomeKind::Obstruction, Value::Null, Some(d)),
        Err(Failure::Internal(m)) => (OutcomeKind::Internal, Value::Null, Some(json!({ "message": m }))),
    };
    Report {
        command,
        stages: vec![],
        result: None,
        outcome: Outcome { kind, exit_code: kind.exit_code(), stage: None, diagnostic },
        configuration: settings.echo(),
        figures: vec![],
        timing: None,
    }
    .with_result(result)
}
