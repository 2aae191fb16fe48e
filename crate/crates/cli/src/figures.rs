//! SVG figures in the Poincaré disc: the line pattern, the chamber complex
//! of the window, and a projection of the waffle's 2-skeleton.

use std::fmt::Write as _;
use std::path::Path;

use waffle_core::hyperbolic::{Geodesic, HPoint};

use crate::pipeline::{Context, SurfaceWindow};

const SIZE: f64 = 640.0;
const SCALE: f64 = 300.0;

fn px(u: f64, v: f64) -> (f64, f64) {
    (SIZE / 2.0 + SCALE * u, SIZE / 2.0 - SCALE * v)
}

fn disc(p: &HPoint) -> (f64, f64) {
    let (u, v) = p.to_disc();
    px(u, v)
}

fn header(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#);
    let _ = writeln!(s, "<title>{title}</title>");
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let c = SIZE / 2.0;
    let _ = writeln!(s, r#"<circle cx="{c}" cy="{c}" r="{SCALE}" fill="none" stroke="black" stroke-width="1"/>"#);
    s
}

fn polyline(s: &mut String, pts: &[(f64, f64)], style: &str) {
    let _ = write!(s, r#"<polyline fill="none" {style} points=""#);
    for (x, y) in pts {
        let _ = write!(s, "{x:.2},{y:.2} ");
    }
    let _ = writeln!(s, r#""/>"#);
}

fn arc(g: &Geodesic, t0: f64, t1: f64) -> Vec<(f64, f64)> {
    let n = 64;
    (0..=n).map(|k| disc(&g.point_at(t0 + (t1 - t0) * k as f64 / n as f64))).collect()
}

fn window_circle(s: &mut String, radius: f64) {
    let r = SCALE * (radius / 2.0).tanh();
    let c = SIZE / 2.0;
    let _ = writeln!(s, r#"<circle cx="{c}" cy="{c}" r="{r:.2}" fill="none" stroke="grey" stroke-dasharray="4 3"/>"#);
}

pub(crate) fn pattern_svg(id: &str, sw: &SurfaceWindow) -> String {
    let mut s = header(&format!("{id}: line pattern"));
    window_circle(&mut s, sw.window.radius);
    let palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
    for l in &sw.pattern.lines {
        let k = sw.curves.iter().position(|c| c.label == l.orbit_label).unwrap_or(0);
        let foot = l.geodesic.foot_parameter(&HPoint::I);
        let style = format!(r#"stroke="{}" stroke-width="0.8""#, palette[k % palette.len()]);
        polyline(&mut s, &arc(&l.geodesic, foot - 12.0, foot + 12.0), &style);
    }
    s + "</svg>\n"
}

pub(crate) fn chambers_svg(id: &str, sw: &SurfaceWindow) -> String {
    let cc = &sw.chambers;
    let mut s = header(&format!("{id}: chamber complex"));
    window_circle(&mut s, cc.radius);
    for e in &cc.edges {
        polyline(&mut s, &arc(&cc.lines[e.line].geodesic, e.t0, e.t1), r#"stroke="black" stroke-width="0.7""#);
    }
    for v in &cc.vertices {
        let (x, y) = disc(&v.point);
        let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="1.6" fill="black"/>"#);
    }
    for c in &cc.chambers {
        let (x, y) = disc(&c.sample);
        let fill = if c.bounded { "#2ca02c" } else { "#d62728" };
        let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="1.2" fill="{fill}"/>"#);
    }
    s + "</svg>\n"
}

/// Realized vertices sit at their chamber's sample point; the others at the
/// barycentre of their neighbours, by relaxation.
pub(crate) fn skeleton_svg(id: &str, sw: &SurfaceWindow) -> Option<String> {
    let (_, m) = sw.model.as_ref()?;
    let n = m.vertex_count();
    let mut pos = vec![None; n];
    for (c, &v) in m.chamber_vertex.iter().enumerate() {
        pos[v] = Some(disc(&sw.chambers.chambers[c].sample));
    }
    let fixed: Vec<bool> = pos.iter().map(Option::is_some).collect();
    let mut p: Vec<(f64, f64)> = pos.iter().map(|q| q.unwrap_or((SIZE / 2.0, SIZE / 2.0))).collect();
    for _ in 0..200 {
        for v in 0..n {
            if fixed[v] || m.adjacency[v].is_empty() {
                continue;
            }
            let k = m.adjacency[v].len() as f64;
            let (sx, sy) = m.adjacency[v].iter().fold((0.0, 0.0), |(a, b), &(w, _)| (a + p[w].0, b + p[w].1));
            p[v] = (sx / k, sy / k);
        }
    }
    let mut s = header(&format!("{id}: 2-skeleton"));
    for sq in m.squares() {
        let _ = write!(s, r##"<polygon fill="#1f77b4" fill-opacity="0.15" stroke="none" points=""##);
        for v in sq {
            let _ = write!(s, "{:.2},{:.2} ", p[v].0, p[v].1);
        }
        let _ = writeln!(s, r#""/>"#);
    }
    for &(a, b, _) in &m.edges {
        polyline(&mut s, &[p[a], p[b]], r#"stroke="black" stroke-width="0.5""#);
    }
    for v in 0..n {
        let fill = if fixed[v] { "black" } else { "#ff7f0e" };
        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="1.4" fill="{fill}"/>"#, p[v].0, p[v].1);
    }
    Some(s + "</svg>\n")
}

/// Writes figures for every window the run built; returns the file names.
pub(crate) fn write_all(dir: &Path, cx: &Context) -> Result<Vec<String>, String> {
    std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
    let mut names = vec![];
    for (s, sw) in cx.windows.iter().enumerate() {
        let Some(sw) = sw else { continue };
        let id = &cx.spec.surfaces[s].id;
        let mut files = vec![(format!("{id}-pattern.svg"), pattern_svg(id, sw)), (format!("{id}-chambers.svg"), chambers_svg(id, sw))];
        if let Some(k) = skeleton_svg(id, sw) {
            files.push((format!("{id}-skeleton.svg"), k));
        }
        for (name, body) in files {
            std::fs::write(dir.join(&name), body).map_err(|e| format!("{name}: {e}"))?;
            names.push(name);
        }
    }
    Ok(names)
}
