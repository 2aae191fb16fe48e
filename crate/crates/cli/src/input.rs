//! Input documents: one JSON object with "surfaces", "churros", "edges",
//! "window" and "tolerances". Parsing is strict (unknown fields are errors)
//! and every diagnostic carries a line/column into the source text.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use waffle_core::patterns::MAX_GENUS;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    pub surfaces: Vec<SurfaceSpec>,
    pub churros: Vec<ChurroSpec>,
    pub edges: Vec<EdgeSpec>,
    #[serde(default)]
    pub window: Option<WindowSpec>,
    #[serde(default)]
    pub tolerances: ToleranceOverrides,
}

/// A waffle vertex: a closed surface with the curves glued along its edges.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceSpec {
    pub id: String,
    pub genus: usize,
    #[serde(default)]
    pub curves: Vec<CurveEntry>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveEntry {
    /// Incident edge the curve is glued along; free curves only help fill.
    #[serde(default)]
    pub edge: Option<String>,
    pub word: Vec<i32>,
    #[serde(default)]
    pub label: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
pub enum CoreSpec {
    #[default]
    Z,
    #[serde(rename = "Z_semidirect_Z2")]
    ZSemidirectZ2,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChurroSpec {
    pub id: String,
    /// One size per incident edge, in the order the edges are listed.
    #[serde(default)]
    pub flap_family_sizes: Vec<u64>,
    #[serde(default)]
    pub core: CoreSpec,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum CoweightSpec {
    Given(u64),
    Keyword(String),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub id: String,
    /// Must be a surface.
    pub from: String,
    /// Must be a churro.
    pub to: String,
    #[serde(default)]
    pub reflective: bool,
    pub coweight: CoweightSpec,
    /// Strand translation length of the flap glued along this edge.
    #[serde(default)]
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub radius: f64,
    pub word_length_cap: usize,
}

/// Any subset of the central tolerance record.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub determinant: Option<f64>,
    pub hyperbolic_trace: Option<f64>,
    pub endpoint: Option<f64>,
    pub pattern_dedupe: Option<f64>,
    pub on_geodesic: Option<f64>,
    pub tangency_angle: Option<f64>,
    pub relator_defect: Option<f64>,
    pub vertex_merge: Option<f64>,
    pub filling_margin: Option<f64>,
    pub chain_samples: Option<usize>,
    pub visual_delta: Option<f64>,
    pub shortening: Option<f64>,
    pub max_shortening_iterations: Option<usize>,
    pub strand_point: Option<f64>,
    pub euclidean_strip: Option<f64>,
    pub ratio_match: Option<f64>,
    pub vertex_cap: Option<usize>,
    pub automorphism_cap: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, thiserror::Error)]
#[serde(tag = "kind")]
pub enum InputError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("{line}:{column}: {path}: {message}")]
    SchemaError { path: String, field: Option<String>, message: String, line: usize, column: usize },
    #[error("{line}:{column}: edge {edge} joins two vertices of the same kind ({from}, {to})")]
    BipartiteViolation { edge: String, from: String, to: String, line: usize, column: usize },
    #[error("{line}:{column}: edge {edge} points from churro {from} to surface {to}; edges point to churros")]
    OrientationViolation { edge: String, from: String, to: String, line: usize, column: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Surface,
    Churro,
}

impl InputSpec {
    /// Vertex ids in graph order: surfaces first, then churros.
    pub fn vertex_index(&self) -> BTreeMap<&str, (usize, Kind)> {
        let s = self.surfaces.iter().map(|s| (s.id.as_str(), Kind::Surface));
        let c = self.churros.iter().map(|c| (c.id.as_str(), Kind::Churro));
        s.chain(c).enumerate().map(|(i, (id, k))| (id, (i, k))).collect()
    }

    /// Edges at churro `c` in listing order.
    pub fn churro_star(&self, c: &str) -> Vec<usize> {
        (0..self.edges.len()).filter(|&e| self.edges[e].to == c).collect()
    }
}

pub fn parse(path: &Path) -> Result<InputSpec, Vec<InputError>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| vec![InputError::Io { path: path.display().to_string(), message: e.to_string() }])?;
    parse_str(&text)
}

pub fn parse_str(text: &str) -> Result<InputSpec, Vec<InputError>> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let spec: InputSpec = serde_path_to_error::deserialize(de).map_err(|e| vec![schema_error(e)])?;
    let errors = validate(&spec, text);
    if errors.is_empty() {
        Ok(spec)
    } else {
        Err(errors)
    }
}

pub(crate) fn schema_error(e: serde_path_to_error::Error<serde_json::Error>) -> InputError {
    let path = e.path().to_string();
    let inner = e.into_inner();
    let message = inner.to_string();
    let field = message.strip_prefix("unknown field `").and_then(|r| r.split('`').next()).map(str::to_owned);
    let message = message.split(" at line ").next().unwrap_or_default().to_owned();
    InputError::SchemaError { path, field, message, line: inner.line(), column: inner.column() }
}

/// Line and column of the object whose "id" is `id` (the n-th such object
/// when ids repeat), or 1:1 if it cannot be found.
fn locate(text: &str, id: &str, nth: usize) -> (usize, usize) {
    let needle = serde_json::to_string(id).unwrap_or_default();
    let mut found = 0;
    let mut from = 0;
    while let Some(k) = text[from..].find("\"id\"") {
        let at = from + k;
        let rest = text[at + 4..].trim_start();
        if let Some(after) = rest.strip_prefix(':') {
            if after.trim_start().starts_with(&needle) {
                if found == nth {
                    let line = text[..at].matches('\n').count() + 1;
                    let column = at - text[..at].rfind('\n').map_or(0, |p| p + 1) + 1;
                    return (line, column);
                }
                found += 1;
            }
        }
        from = at + 4;
    }
    (1, 1)
}

fn validate(spec: &InputSpec, text: &str) -> Vec<InputError> {
    let mut errors = Vec::new();
    let schema = |path: String, id: &str, nth: usize, message: String| {
        let (line, column) = locate(text, id, nth);
        InputError::SchemaError { path, field: None, message, line, column }
    };

    let mut seen: BTreeMap<&str, usize> = BTreeMap::new();
    let ids = spec
        .surfaces
        .iter()
        .map(|s| ("surfaces", &s.id))
        .chain(spec.churros.iter().map(|c| ("churros", &c.id)))
        .chain(spec.edges.iter().map(|e| ("edges", &e.id)));
    for (section, id) in ids {
        let n = seen.entry(id).or_default();
        if *n > 0 {
            errors.push(schema(section.into(), id, *n, format!("duplicate id {id:?}")));
        }
        *n += 1;
    }

    for (i, s) in spec.surfaces.iter().enumerate() {
        if !(2..=MAX_GENUS).contains(&s.genus) {
            errors.push(schema(format!("surfaces[{i}].genus"), &s.id, 0, format!("genus {} outside 2..={MAX_GENUS}", s.genus)));
        }
        for (k, c) in s.curves.iter().enumerate() {
            if let Some(e) = &c.edge {
                if !spec.edges.iter().any(|x| &x.id == e && x.from == s.id) {
                    errors.push(schema(
                        format!("surfaces[{i}].curves[{k}].edge"),
                        &s.id,
                        0,
                        format!("{e:?} is not an edge leaving {:?}", s.id),
                    ));
                }
            }
        }
    }

    let vertices = spec.vertex_index();
    for (i, e) in spec.edges.iter().enumerate() {
        let (line, column) = locate(text, &e.id, 0);
        let (Some(&(_, a)), Some(&(_, b))) = (vertices.get(e.from.as_str()), vertices.get(e.to.as_str())) else {
            let missing = if vertices.contains_key(e.from.as_str()) { &e.to } else { &e.from };
            errors.push(schema(format!("edges[{i}]"), &e.id, 0, format!("unknown vertex {missing:?}")));
            continue;
        };
        let (from, to, edge) = (e.from.clone(), e.to.clone(), e.id.clone());
        match (a, b) {
            (Kind::Surface, Kind::Churro) => {}
            (Kind::Churro, Kind::Surface) => errors.push(InputError::OrientationViolation { edge, from, to, line, column }),
            _ => errors.push(InputError::BipartiteViolation { edge, from, to, line, column }),
        }
        match &e.coweight {
            CoweightSpec::Given(0) => errors.push(schema(format!("edges[{i}].coweight"), &e.id, 0, "coweight must be positive".into())),
            CoweightSpec::Keyword(k) if k != "derive" => errors.push(schema(
                format!("edges[{i}].coweight"),
                &e.id,
                0,
                format!("expected a positive integer or \"derive\", found {k:?}"),
            )),
            _ => {}
        }
        if let Some(t) = e.tau {
            if !(t > 0.0 && t.is_finite()) {
                errors.push(schema(format!("edges[{i}].tau"), &e.id, 0, format!("tau must be positive, found {t}")));
            }
        }
    }

    for (i, c) in spec.churros.iter().enumerate() {
        let star = spec.churro_star(&c.id);
        let derives = star.iter().any(|&e| matches!(&spec.edges[e].coweight, CoweightSpec::Keyword(k) if k == "derive"));
        if (derives || !c.flap_family_sizes.is_empty()) && c.flap_family_sizes.len() != star.len() {
            errors.push(schema(
                format!("churros[{i}].flap_family_sizes"),
                &c.id,
                0,
                format!("{} sizes for {} incident edges", c.flap_family_sizes.len(), star.len()),
            ));
        }
        if c.flap_family_sizes.contains(&0) {
            errors.push(schema(format!("churros[{i}].flap_family_sizes"), &c.id, 0, "sizes must be positive".into()));
        }
    }

    if let Some(w) = &spec.window {
        if !(w.radius > 0.0 && w.radius.is_finite()) {
            let at = text.find("\"window\"").unwrap_or(0);
            let line = text[..at].matches('\n').count() + 1;
            let column = at - text[..at].rfind('\n').map_or(0, |p| p + 1) + 1;
            errors.push(InputError::SchemaError {
                path: "window.radius".into(),
                field: None,
                message: format!("radius must be positive, found {}", w.radius),
                line,
                column,
            });
        }
    }
    errors
}
