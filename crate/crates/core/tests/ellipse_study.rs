//! Smoothed ellipse indicators against an oracle that integrates the exact
//! offset energies of the analytic ellipse over the collar profile.

use std::f64::consts::TAU;

use elastica::curve::{elastica_energy, Curve, ElasticaParams};
use elastica::geom::{BBox, Point2};
use elastica::grid::GridFunction;
use elastica::smoothing::{smoothing_convergence_study, CutoffProfile};

type P = Point2<f64>;

const A: f64 = 2.0;
const B: f64 = 1.0;
const COLLARS: [f64; 4] = [0.4, 0.2, 0.1, 0.05];

/// Energy (p = 2, alpha = beta = 1) of the outer parallel curve at distance
/// `delta` of the ellipse, by the periodic trapezoid rule in the angle.
fn offset_energy(delta: f64) -> f64 {
    let n = 4096;
    (0..n)
        .map(|i| {
            let th = TAU * i as f64 / n as f64;
            let g = (A * th.sin()).powi(2) + (B * th.cos()).powi(2);
            let speed = g.sqrt();
            let k = A * B / (g * speed);
            speed * (1.0 + delta * k) + speed * k * k / (1.0 + delta * k)
        })
        .sum::<f64>()
        * TAU
        / n as f64
}

/// `integral_0^1 W(offset at w^-1(t)) dt = integral_0^eta W(offset at d) |w'(d)| dd`,
/// by composite Simpson in `d`.
fn exact_smoothed_energy(collar: f64) -> f64 {
    let w = CutoffProfile::new(collar, 1.0).unwrap();
    let m = 2000;
    let h = collar / m as f64;
    let f = |d: f64| offset_energy(d) * w.derivative(d).abs();
    let inner: f64 = (1..m).map(|i| f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(0.0) + inner + f(collar)) * h / 3.0
}

#[test]
fn ellipse_study_tracks_exact_oracle() {
    let params = ElasticaParams::standard();
    let boundary = Curve::ellipse(P::zero(), A, B, 1024).unwrap();
    let grid = GridFunction::template(BBox::new(P::new(-3.0, -3.0), P::new(3.0, 3.0)), 512).unwrap();
    let study = smoothing_convergence_study(&boundary, 1.0, &COLLARS, &params, &grid, 64).unwrap();
    let target = offset_energy(0.0);
    assert!((elastica_energy(&boundary, &params).unwrap() - target).abs() < 1e-2 * target);
    for row in &study.rows {
        let exact = exact_smoothed_energy(row.collar);
        assert!((row.f_coarea - exact).abs() <= 5e-3 * exact, "collar {}: {} vs exact {exact}", row.collar, row.f_coarea);
    }
    // The exact values approach the target monotonically only once the
    // collar is thin next to the minimum radius of curvature (b^2/a = 0.5).
    let errs: Vec<f64> = study.rows.iter().map(|r| (r.f_coarea - target).abs()).collect();
    assert!(errs[2] < errs[1] && errs[3] < errs[2], "{errs:?}");
    assert!(study.final_relative_error().unwrap() <= 0.05);
}

#[test]
fn oracle_limit_is_the_ellipse_energy() {
    let thin = exact_smoothed_energy(1e-3);
    assert!((thin - offset_energy(0.0)).abs() < 1e-2, "{thin}");
}
