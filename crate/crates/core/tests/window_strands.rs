// Strands of curve lifts in surface windows, with the period taken from the
// deck transformation. On a waffle of lines crossing transversally the
// strand runs straight through squares, so tau counts the walls crossed per
// period: the geometric intersection number with the other curves.

use waffle_core::cubulation::*;
use waffle_core::hyperbolic::*;
use waffle_core::patterns::*;
use waffle_core::strands::*;
use std::result::Result;
use waffle_core::Tolerances;

fn taus(words: &[Vec<i32>], r: f64, cap: usize) -> Vec<Result<f64, StrandError>> {
    let s = standard_generators(2).unwrap();
    let curves: Vec<CurveSpec> = words.iter().enumerate().map(|(i, w)| CurveSpec::new(w.clone(), format!("c{i}"))).collect();
    let win = Window::new(r, cap).unwrap();
    let pat = generate_pattern(&s, &curves, &win).unwrap();
    let cc = arrangement(&pat, &win).unwrap();
    let m = cubulate(&wall_system(&cc).unwrap()).unwrap();
    let o = HPoint::new(0.0, 1.0).unwrap();
    (0..curves.len())
        .map(|k| {
            let axis = pat.axes[k];
            let (a, b) = axis.angles();
            let h = cc
                .lines
                .iter()
                .position(|l| {
                    let (c, d) = l.geodesic.angles();
                    (angular_gap(a, c) < 1e-7 && angular_gap(b, d) < 1e-7) || (angular_gap(a, d) < 1e-7 && angular_gap(b, c) < 1e-7)
                })
                .unwrap();
            let p = axis.point_at(axis.foot_parameter(&o) + 0.0123);
            let base = HPoint::new(p.x() + 1e-3, p.y()).unwrap();
            let g = s.evaluate(&curves[k].word);
            let map = deck_map(&cc, &m, &g, &base, &Tolerances::DEFAULT).unwrap();
            strand(&m, h, &map, &Tolerances::DEFAULT).map(|st| st.tau)
        })
        .collect()
}

#[test]
fn generator_pair_crosses_once() {
    for (r, cap) in [(4.5, 6), (5.0, 6)] {
        for t in taus(&[vec![1], vec![2]], r, cap) {
            assert!((t.unwrap() - 1.0).abs() < 1e-9);
        }
    }
}

#[test]
fn filling_pair_short_curve() {
    let t = taus(&[vec![-2, -2, 1], vec![-4, 1, 3, 1]], 6.0, 6);
    assert!((t[0].clone().unwrap() - 4.0).abs() < 1e-9);
    // the long curve's period does not fit in this window
    assert!(matches!(t[1], Err(StrandError::WindowTooSmall(_))));
}
