//! Stage orchestration: curves → pattern → waffle → strands → clutching →
//! quotient graph → grouping. Stages run in order, each feeding the next; the
//! first failure halts with a structured diagnostic.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use waffle_core::cubulation::{cubulate_with, dimension, shadow_embedding_ok, wall_system_with, CubeComplexModel, WallSystem};
use waffle_core::groupings::{
    augment_graph, basic_churro_group, cycle_balance, minimal_sheets, nu, CoreFactor, EdgeMatch, GroupingError, GroupingOutcome,
    QuotientGraph, StabilizerDescriptor, VertexKind, Q,
};
use waffle_core::hyperbolic::{angular_gap, Geodesic, HPoint};
use waffle_core::patterns::{
    arrangement_with, certify_filling, generate_pattern_with, is_saturated_within, standard_generators, ChamberComplex, CurveSpec,
    LinePattern, PatternError, SurfaceGroupPresentation, Window,
};
use waffle_core::strands::{clutching_match, clutching_with, deck_map, strand, Churro, ClutchingData, Flap};

use crate::input::{CoreSpec, CoweightSpec, InputSpec, Kind};
use crate::settings::Settings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    CheckFilling,
    Cubulate,
    Strands,
    Clutching,
    Balance,
    Group,
    Certify,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::CheckFilling => "check-filling",
            Stage::Cubulate => "cubulate",
            Stage::Strands => "strands",
            Stage::Clutching => "clutching",
            Stage::Balance => "balance",
            Stage::Group => "group",
            Stage::Certify => "certify",
        }
    }

    /// Stages a subcommand runs, in order.
    pub fn plan(command: Stage, spec: &InputSpec) -> Vec<Stage> {
        use Stage::*;
        match command {
            CheckFilling => vec![CheckFilling],
            Cubulate => vec![Cubulate],
            Strands => vec![Strands],
            Clutching => vec![Strands, Clutching],
            Balance => vec![Balance],
            Group => vec![Balance, Group],
            Certify => {
                let mut v = if spec.window.is_some() { vec![CheckFilling, Cubulate] } else { vec![] };
                v.extend([Strands, Clutching, Balance, Group, Certify]);
                v
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OutcomeKind {
    Completed,
    Certificate,
    Obstruction,
    Precondition,
    Internal,
}

impl OutcomeKind {
    pub fn exit_code(self) -> i32 {
        match self {
            OutcomeKind::Completed | OutcomeKind::Certificate => 0,
            OutcomeKind::Internal => 1,
            OutcomeKind::Obstruction => 2,
            OutcomeKind::Precondition => 3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub status: &'static str,
    pub result: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct Outcome {
    pub kind: OutcomeKind,
    pub exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stage: Option<Stage>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<Value>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub command: String,
    pub stages: Vec<StageRecord>,
    /// Oracle output.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<Value>,
    pub outcome: Outcome,
    pub configuration: Value,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub figures: Vec<String>,
    /// Seconds per stage; only with --timing, so reports stay reproducible.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing: Option<BTreeMap<String, f64>>,
}

impl Report {
    pub fn exit_code(&self) -> i32 {
        self.outcome.exit_code
    }

    pub fn with_result(mut self, v: Value) -> Report {
        self.result = (!v.is_null()).then_some(v);
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Report for a run that never got past input handling.
    pub fn rejected(command: &str, kind: OutcomeKind, diagnostic: Value, settings: &Settings) -> Report {
        Report {
            command: command.to_owned(),
            stages: vec![],
            result: None,
            outcome: Outcome { kind, exit_code: kind.exit_code(), stage: None, diagnostic: Some(diagnostic) },
            configuration: settings.echo(),
            figures: vec![],
            timing: None,
        }
    }
}

#[derive(Debug)]
pub(crate) enum Failure {
    Precondition(Value),
    Obstruction(Value),
    Internal(String),
}

type StageResult = Result<Value, Failure>;

fn precondition(message: impl Into<String>) -> Failure {
    Failure::Precondition(json!({ "message": message.into() }))
}

pub(crate) struct SurfaceWindow {
    pub presentation: SurfaceGroupPresentation,
    pub curves: Vec<CurveSpec>,
    pub window: Window,
    pub pattern: LinePattern,
    pub chambers: ChamberComplex,
    pub model: Option<(WallSystem, CubeComplexModel)>,
}

#[derive(Debug, Clone)]
struct TauRecord {
    supplied: Option<f64>,
    derived: Option<Result<f64, String>>,
}

impl TauRecord {
    fn used(&self) -> Option<(f64, &'static str)> {
        match (self.supplied, &self.derived) {
            (Some(t), _) => Some((t, "supplied")),
            (None, Some(Ok(t))) => Some((*t, "windows")),
            _ => None,
        }
    }
}

pub(crate) struct Context<'a> {
    pub spec: &'a InputSpec,
    pub settings: &'a Settings,
    pub windows: Vec<Option<SurfaceWindow>>,
    taus: Vec<Option<TauRecord>>,
    graph: Option<QuotientGraph>,
    coweights: Vec<Value>,
    clutching_checked: usize,
}

fn q(x: Q) -> String {
    if *x.denom() == 1 {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

fn same_line(g: &Geodesic, h: &Geodesic, tol: f64) -> bool {
    let (a, b) = g.angles();
    let (c, d) = h.angles();
    (angular_gap(a, c) <= tol && angular_gap(b, d) <= tol) || (angular_gap(a, d) <= tol && angular_gap(b, c) <= tol)
}

impl<'a> Context<'a> {
    pub(crate) fn new(spec: &'a InputSpec, settings: &'a Settings) -> Self {
        Context {
            spec,
            settings,
            windows: spec.surfaces.iter().map(|_| None).collect(),
            taus: vec![None; spec.edges.len()],
            graph: None,
            coweights: vec![],
            clutching_checked: 0,
        }
    }

    fn ensure_window(&mut self, s: usize) -> Result<&mut SurfaceWindow, Failure> {
        if self.windows[s].is_none() {
            let surf = &self.spec.surfaces[s];
            let w = self.spec.window.ok_or_else(|| precondition("this stage needs a \"window\" block"))?;
            if surf.curves.is_empty() {
                return Err(precondition(format!("surface {} has no curves", surf.id)));
            }
            let tol = &self.settings.tolerances;
            let pattern_err = |e: PatternError| Failure::Precondition(json!({ "surface": surf.id, "message": e.to_string() }));
            let presentation = standard_generators(surf.genus).map_err(pattern_err)?;
            let curves: Vec<CurveSpec> = surf
                .curves
                .iter()
                .enumerate()
                .map(|(k, c)| CurveSpec::new(c.word.clone(), c.label.clone().unwrap_or_else(|| format!("{}.{k}", surf.id))))
                .collect();
            let window = Window::new(w.radius, w.word_length_cap).map_err(pattern_err)?;
            let pattern = generate_pattern_with(&presentation, &curves, &window, tol).map_err(pattern_err)?;
            let chambers = arrangement_with(&pattern.geodesics(), window.radius, tol).map_err(pattern_err)?;
            self.windows[s] = Some(SurfaceWindow { presentation, curves, window, pattern, chambers, model: None });
        }
        Ok(self.windows[s].as_mut().unwrap())
    }

    pub(crate) fn ensure_model(&mut self, s: usize) -> Result<&mut SurfaceWindow, Failure> {
        let tol = self.settings.tolerances.clone();
        let id = self.spec.surfaces[s].id.clone();
        let sw = self.ensure_window(s)?;
        if sw.model.is_none() {
            let fail = |e: String| Failure::Precondition(json!({ "surface": id, "message": e }));
            let ws = wall_system_with(&sw.chambers, &tol).map_err(|e| fail(e.to_string()))?;
            let model = cubulate_with(&ws, &tol).map_err(|e| fail(e.to_string()))?;
            sw.model = Some((ws, model));
        }
        Ok(sw)
    }

    fn run(&mut self, stage: Stage, last: bool) -> StageResult {
        match stage {
            Stage::CheckFilling => self.check_filling(),
            Stage::Cubulate => self.cubulate(),
            Stage::Strands => self.strands(),
            Stage::Clutching => self.clutching(),
            Stage::Balance => self.balance(last),
            Stage::Group => self.group(),
            Stage::Certify => self.certify(),
        }
    }

    fn check_filling(&mut self) -> StageResult {
        let margin = self.settings.tolerances.filling_margin;
        let mut out = vec![];
        for s in 0..self.spec.surfaces.len() {
            let id = self.spec.surfaces[s].id.clone();
            let sw = self.ensure_window(s)?;
            let r = certify_filling(&sw.chambers, &sw.pattern, &sw.presentation, margin)
                .map_err(|e| Failure::Precondition(json!({ "surface": id, "message": e.to_string() })))?;
            let saturated = is_saturated_within(&sw.presentation, &sw.curves, &sw.window, sw.window.radius - margin)
                .map_err(|e| Failure::Internal(e.to_string()))?;
            let entry = json!({
                "surface": id,
                "filling": r.filling,
                "lines": sw.pattern.len(),
                "chambers": sw.chambers.chambers.len(),
                "crossing_orbits": r.vertices,
                "edges": r.edges,
                "boundary_cycles": r.boundaries,
                "euler_characteristic": r.euler_characteristic,
                "saturated": saturated,
                "margin": margin,
            });
            if !r.filling {
                let witness = r.witness.map(|c| {
                    let ch = &sw.chambers.chambers[c];
                    json!({ "chamber": c, "bounded": ch.bounded, "sample": [ch.sample.x(), ch.sample.y()] })
                });
                return Err(Failure::Precondition(json!({
                    "message": format!("curves on {id} do not fill"),
                    "surface": id,
                    "witness": witness,
                    "report": entry,
                })));
            }
            out.push(entry);
        }
        Ok(json!({ "surfaces": out }))
    }

    fn cubulate(&mut self) -> StageResult {
        let mut out = vec![];
        for s in 0..self.spec.surfaces.len() {
            let id = self.spec.surfaces[s].id.clone();
            let sw = self.ensure_model(s)?;
            let (ws, m) = sw.model.as_ref().unwrap();
            if !shadow_embedding_ok(&sw.chambers, m) {
                return Err(Failure::Internal(format!("{id}: chamber map is not an injective graph homomorphism")));
            }
            let mut by_dim: BTreeMap<usize, usize> = BTreeMap::new();
            for c in &m.cubes {
                *by_dim.entry(c.walls.len()).or_default() += 1;
            }
            out.push(json!({
                "surface": id,
                "walls": m.walls,
                "chambers": sw.chambers.chambers.len(),
                "bounded_chambers": sw.chambers.bounded_count(),
                "vertices": m.vertex_count(),
                "realized_vertices": m.realized.iter().filter(|r| **r).count(),
                "edges": m.edges.len(),
                "cubes_by_dimension": by_dim,
                "dimension": dimension(m),
                "margin_cubes": m.margin_cubes.len(),
                "flagged_pairs": ws.flagged.len(),
                "shadow_embedding": true,
            }));
        }
        Ok(json!({ "surfaces": out }))
    }

    fn derive_tau(&mut self, e: usize) -> Option<Result<f64, String>> {
        let edge = &self.spec.edges[e];
        self.spec.window?;
        let s = self.spec.surfaces.iter().position(|s| s.id == edge.from)?;
        let k = self.spec.surfaces[s].curves.iter().position(|c| c.edge.as_deref() == Some(&edge.id))?;
        let tol = self.settings.tolerances.clone();
        let sw = match self.ensure_model(s) {
            Ok(sw) => sw,
            Err(Failure::Precondition(v)) => return Some(Err(v["message"].as_str().unwrap_or("window failed").to_owned())),
            Err(Failure::Internal(m)) => return Some(Err(m)),
            Err(Failure::Obstruction(_)) => unreachable!(),
        };
        let (_, model) = sw.model.as_ref().unwrap();
        let axis = sw.pattern.axes[k];
        let Some(h) = sw.chambers.lines.iter().position(|l| same_line(&l.geodesic, &axis, tol.pattern_dedupe)) else {
            return Some(Err("curve axis does not meet the window".into()));
        };
        // base chamber just off the axis, near its closest point to i
        let p = axis.point_at(axis.foot_parameter(&HPoint::I) + 0.0123);
        let base = match HPoint::new(p.x() + 1e-3 * p.y(), p.y()) {
            Ok(b) => b,
            Err(e) => return Some(Err(e.to_string())),
        };
        let g = sw.presentation.evaluate(&sw.curves[k].word);
        let Some(map) = deck_map(&sw.chambers, model, &g, &base, &tol) else {
            return Some(Err("deck transformation has no base image in the window".into()));
        };
        Some(strand(model, h, &map, &tol).map(|st| st.tau).map_err(|e| e.to_string()))
    }

    fn strands(&mut self) -> StageResult {
        let mut out = vec![];
        for e in 0..self.spec.edges.len() {
            let derived = self.derive_tau(e);
            let rec = TauRecord { supplied: self.spec.edges[e].tau, derived };
            let id = &self.spec.edges[e].id;
            let (used, mode) = match rec.used() {
                Some((t, m)) => (Some(t), Some(m)),
                None => (None, None),
            };
            let (derived, derived_error) = match &rec.derived {
                Some(Ok(t)) => (Some(*t), None),
                Some(Err(m)) => (None, Some(m.clone())),
                None => (None, None),
            };
            if used.is_none() {
                return Err(Failure::Precondition(json!({
                    "message": format!("edge {id}: no tau supplied and none derivable from a window"),
                    "edge": id,
                    "derived_error": derived_error,
                })));
            }
            out.push(json!({
                "edge": id,
                "supplied": rec.supplied,
                "derived": derived,
                "derived_error": derived_error,
                "tau": used,
                "mode": mode,
            }));
            self.taus[e] = Some(rec);
        }
        Ok(json!({ "edges": out }))
    }

    fn clutching_data(&self, star: &[usize], pick: impl Fn(&TauRecord) -> Option<f64>, core: &str) -> Option<ClutchingData> {
        let flaps = star
            .iter()
            .map(|&e| {
                let tau_sigma = pick(self.taus[e].as_ref()?)?;
                Some(Flap { id: self.spec.edges[e].id.clone(), strand: self.spec.edges[e].id.clone(), tau_sigma })
            })
            .collect::<Option<Vec<_>>>()?;
        Churro::new(core, flaps).ok().map(|ch| clutching_with(&ch, &self.settings.tolerances))
    }

    fn clutching(&mut self) -> StageResult {
        let tol = self.settings.tolerances.ratio_match;
        let mut out = vec![];
        for c in &self.spec.churros {
            let star = self.spec.churro_star(&c.id);
            if star.is_empty() {
                continue;
            }
            let data = self
                .clutching_data(&star, |r| r.used().map(|u| u.0), &c.id)
                .ok_or_else(|| Failure::Internal(format!("churro {}: strand data missing", c.id)))?;
            let supplied = self.clutching_data(&star, |r| r.supplied, &c.id);
            let derived = self.clutching_data(&star, |r| r.derived.clone().and_then(Result::ok), &c.id);
            let ids: Vec<&str> = star.iter().map(|&e| self.spec.edges[e].id.as_str()).collect();
            let cross = match (supplied, derived) {
                (Some(a), Some(b)) => {
                    let identity: Vec<usize> = (0..star.len()).collect();
                    let m = clutching_match(&a, &b, &identity, tol).map_err(|e| Failure::Internal(e.to_string()))?;
                    self.clutching_checked += 1;
                    if !m.matched {
                        let (i, j) = m.witness.unwrap();
                        return Err(Failure::Obstruction(json!({
                            "message": format!("churro {}: supplied and window clutching ratios disagree", c.id),
                            "churro": c.id,
                            "flaps": [ids[i - 1], ids[j - 1]],
                            "supplied_ratio": a.ratios[i - 1][j - 1],
                            "window_ratio": b.ratios[i - 1][j - 1],
                            "tolerance": tol,
                        })));
                    }
                    json!({ "matched": true, "tolerance": tol })
                }
                _ => Value::Null,
            };
            let flaps: Vec<Value> = star
                .iter()
                .enumerate()
                .map(|(i, &e)| {
                    json!({
                        "edge": ids[i],
                        "tau": data.taus[i],
                        "mode": self.taus[e].as_ref().and_then(|r| r.used()).map(|u| u.1),
                        "width": data.widths[i],
                        "euclidean": data.euclidean_flags[i],
                    })
                })
                .collect();
            out.push(json!({
                "churro": c.id,
                "tau_core": data.tau_core,
                "flaps": flaps,
                "ratios": data.ratios,
                "cross_check": cross,
            }));
        }
        Ok(json!({ "churros": out }))
    }

    fn ensure_graph(&mut self) -> Result<&QuotientGraph, Failure> {
        if self.graph.is_none() {
            let spec = self.spec;
            let index = spec.vertex_index();
            let kinds: Vec<VertexKind> = spec
                .surfaces
                .iter()
                .map(|_| VertexKind::Waffle)
                .chain(spec.churros.iter().map(|_| VertexKind::Churro))
                .collect();
            let mut edges = vec![];
            for e in &spec.edges {
                let (w, c) = (index[e.from.as_str()], index[e.to.as_str()]);
                debug_assert!(w.1 == Kind::Surface && c.1 == Kind::Churro);
                let (cw, record) = match &e.coweight {
                    CoweightSpec::Given(n) => (*n as u128, json!({ "edge": e.id, "coweight": n, "mode": "given" })),
                    CoweightSpec::Keyword(_) => {
                        let ch = spec.churros.iter().find(|c| c.id == e.to).unwrap();
                        let k = spec.churro_star(&ch.id).iter().position(|&x| spec.edges[x].id == e.id).unwrap();
                        let n = ch.flap_family_sizes[k];
                        let how = format!("flap family {} of churro {}", k + 1, ch.id);
                        (n as u128, json!({ "edge": e.id, "coweight": n, "mode": "derived", "derivation": how }))
                    }
                };
                self.coweights.push(record);
                edges.push((w.0, c.0, e.reflective, cw));
            }
            let g = QuotientGraph::new(kinds, &edges).map_err(|e| Failure::Internal(e.to_string()))?;
            if !g.is_connected() {
                return Err(precondition("quotient graph is disconnected"));
            }
            self.graph = Some(g);
        }
        Ok(self.graph.as_ref().unwrap())
    }

    fn vertex_id(&self, v: usize) -> &str {
        let s = self.spec.surfaces.len();
        if v < s {
            &self.spec.surfaces[v].id
        } else {
            &self.spec.churros[v - s].id
        }
    }

    fn edge_ids(&self, es: &[usize]) -> Vec<&str> {
        es.iter().map(|&e| self.spec.edges[e].id.as_str()).collect()
    }

    fn balance(&mut self, last: bool) -> StageResult {
        let g = self.ensure_graph()?.clone();
        let b = cycle_balance(&g).map_err(|e| Failure::Internal(e.to_string()))?;
        let cycles: Vec<Value> = b
            .cycles
            .iter()
            .map(|c| {
                json!({
                    "edges": self.edge_ids(&c.edges),
                    "start": self.vertex_id(c.start),
                    "odd_product": q(c.odd_product),
                    "even_product": q(c.even_product),
                    "balanced": c.balanced(),
                })
            })
            .collect();
        let edges: Vec<Value> = (0..g.edges().len())
            .map(|e| json!({ "edge": self.spec.edges[e].id, "weight": q(g.weight(e)), "nu": q(nu(&g, e)) }))
            .collect();
        let result = json!({
            "balanced": b.balanced,
            "tree": self.edge_ids(&b.tree),
            "coweights": self.coweights,
            "edges": edges,
            "cycles": cycles,
        });
        if !b.balanced && last {
            let v = &b.cycles[b.violations[0]];
            return Err(Failure::Obstruction(json!({
                "message": "quotient graph is unbalanced",
                "cycle": self.edge_ids(&v.edges),
                "odd_product": q(v.odd_product),
                "even_product": q(v.even_product),
                "report": result,
            })));
        }
        Ok(result)
    }

    fn descriptor(&self, d: &StabilizerDescriptor) -> Value {
        json!({
            "core": match d.core { CoreFactor::Z => "Z", CoreFactor::ZSemidirectZ2 => "Z_semidirect_Z2" },
            "edge": d.edge.map(|e| self.spec.edges[e].id.clone()),
            "tau_flag": d.tau_flag,
            "lp_order": d.lp_part.order().to_string(),
            "lp_primes": d.lp_part.primes().iter().map(u128::to_string).collect::<Vec<_>>(),
            "reflectors": d.reflectors,
            "finite_order": d.finite_order().map(|n| n.to_string()),
        })
    }

    fn edge_match(&self, m: &EdgeMatch) -> Value {
        json!({
            "edge": self.spec.edges[m.edge].id,
            "waffle_side": self.descriptor(&m.waffle),
            "churro_side": self.descriptor(&m.churro),
            "iso": m.verdict.iso,
            "strict": m.verdict.strict,
            "witness": m.verdict.witness.as_ref().map(|(l, r)| json!({
                "waffle_only": l.iter().map(u128::to_string).collect::<Vec<_>>(),
                "churro_only": r.iter().map(u128::to_string).collect::<Vec<_>>(),
            })),
        })
    }

    fn group(&mut self) -> StageResult {
        let g = self.ensure_graph()?.clone();
        let mut churro_groups = vec![];
        for c in &self.spec.churros {
            if c.flap_family_sizes.is_empty() {
                continue;
            }
            let core = match c.core {
                CoreSpec::Z => CoreFactor::Z,
                CoreSpec::ZSemidirectZ2 => CoreFactor::ZSemidirectZ2,
            };
            let sizes: Vec<u128> = c.flap_family_sizes.iter().map(|&n| n as u128).collect();
            let b = basic_churro_group(&sizes, core).map_err(|e| Failure::Internal(e.to_string()))?;
            let order = b.flap_order().map_err(|e| Failure::Internal(e.to_string()))?;
            churro_groups.push(json!({ "churro": c.id, "core": c.core, "flap_order": order.to_string() }));
        }
        match augment_graph(&g) {
            Ok(GroupingOutcome::Certificate(cert)) => {
                let a = &cert.augmentation;
                let augmentation: Vec<Value> = (0..g.vertex_count())
                    .map(|v| {
                        json!({
                            "vertex": self.vertex_id(v),
                            "flap_contribution": a.flap_contribution[v].order().to_string(),
                            "reflector_bank": a.reflector_bank[v],
                            "order": a.order(v).map(|n| n.to_string()),
                        })
                    })
                    .collect();
                let sheets = minimal_sheets(&g).map_err(|e| Failure::Internal(e.to_string()))?;
                let sheets: BTreeMap<&str, String> = (0..g.vertex_count()).map(|v| (self.vertex_id(v), sheets.0[v].to_string())).collect();
                Ok(json!({
                    "certificate": true,
                    "tree": self.edge_ids(&a.tree),
                    "augmentation": augmentation,
                    "tree_edges": cert.tree_edges.iter().map(|m| self.edge_match(m)).collect::<Vec<_>>(),
                    "chords": cert.chords.iter().map(|m| self.edge_match(m)).collect::<Vec<_>>(),
                    "sheets": sheets,
                    "churro_groups": churro_groups,
                }))
            }
            Ok(GroupingOutcome::Obstruction(o)) => Err(Failure::Obstruction(json!({
                "message": format!("chord {} fails: its cycle is unbalanced", self.spec.edges[o.chord].id),
                "tree": self.edge_ids(&o.tree),
                "chord": self.spec.edges[o.chord].id,
                "cycle": self.edge_ids(&o.cycle.edges),
                "odd_product": q(o.cycle.odd_product),
                "even_product": q(o.cycle.even_product),
                "mismatch": self.edge_match(&o.mismatch),
            }))),
            Err(GroupingError::Disconnected) => Err(precondition("quotient graph is disconnected")),
            Err(e) => Err(Failure::Internal(e.to_string())),
        }
    }

    fn certify(&mut self) -> StageResult {
        Ok(json!({
            "certificate": true,
            "edges": self.spec.edges.len(),
            "clutching_cross_checks": self.clutching_checked,
        }))
    }
}

/// Runs `stages` in order on a validated spec.
pub fn run_pipeline(spec: &InputSpec, command: &str, stages: &[Stage], settings: &Settings) -> Report {
    run_with(spec, command, stages, settings, |_| Ok(vec![]))
}

pub(crate) fn run_with(
    spec: &InputSpec,
    command: &str,
    stages: &[Stage],
    settings: &Settings,
    after: impl FnOnce(&Context) -> Result<Vec<String>, String>,
) -> Report {
    let mut cx = Context::new(spec, settings);
    let mut records = vec![];
    let mut timing = BTreeMap::new();
    let mut failure = None;
    for (i, &stage) in stages.iter().enumerate() {
        let t = Instant::now();
        let r = cx.run(stage, i + 1 == stages.len());
        timing.insert(stage.name().to_owned(), t.elapsed().as_secs_f64());
        match r {
            Ok(result) => records.push(StageRecord { stage, status: "ok", result }),
            Err(f) => {
                records.push(StageRecord { stage, status: "failed", result: Value::Null });
                failure = Some((stage, f));
                break;
            }
        }
    }
    let mut figures = vec![];
    let outcome = match failure {
        None => match after(&cx) {
            Ok(f) => {
                figures = f;
                let kind = match stages.last() {
                    Some(Stage::Group | Stage::Certify) => OutcomeKind::Certificate,
                    _ => OutcomeKind::Completed,
                };
                Outcome { kind, exit_code: kind.exit_code(), stage: None, diagnostic: None }
            }
            Err(m) => Outcome { kind: OutcomeKind::Internal, exit_code: 1, stage: None, diagnostic: Some(json!({ "message": m })) },
        },
        Some((stage, f)) => {
            let (kind, diagnostic) = match f {
                Failure::Precondition(v) => (OutcomeKind::Precondition, v),
                Failure::Obstruction(v) => (OutcomeKind::Obstruction, v),
                Failure::Internal(m) => (OutcomeKind::Internal, json!({ "message": m })),
            };
            Outcome { kind, exit_code: kind.exit_code(), stage: Some(stage), diagnostic: Some(diagnostic) }
        }
    };
    Report {
        command: command.to_owned(),
        stages: records,
        result: None,
        outcome,
        configuration: settings.echo(),
        figures,
        timing: settings.timing.then_some(timing),
    }
}
