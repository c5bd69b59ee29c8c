//! One PASS/FAIL line per acceptance criterion; exits nonzero if any fails.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use elastica::curve::{curvature_samples, elastica_energy, Curve, ElasticaParams};
use elastica::functional::{coarea_energy, default_grad_floor, divergence_energy};
use elastica::gallery::figures::{strict_gap, ExampleOne, TwoDisks};
use elastica::gallery::{mirrored_arcs, mirrored_arcs_energy, savare};
use elastica::geom::{ray_cast_parity, BBox, Point2};
use elastica::grid::GridFunction;
use elastica::nesting::{check_conditions, dyadic_average, NestingOptions};
use elastica::relaxed::{relaxed_energy_cusped, CuspedSet};
use elastica::smoothing::{build_smooth_indicator, offset_curve, offset_energy_transform, smoothing_convergence_study, CutoffProfile};
use elastica::system::CurveSystem;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type P = Point2<f64>;
type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn disk_grid() -> GridFunction<f64> {
    GridFunction::template(BBox::new(P::new(-2.0, -2.0), P::new(2.0, 2.0)), 512).unwrap()
}

fn smoothed_disk(collar: f64) -> GridFunction<f64> {
    let boundary = Curve::circle(P::zero(), 1.0, 1024, false).unwrap();
    build_smooth_indicator(&boundary, &CutoffProfile::new(collar, 1.0).unwrap(), &disk_grid()).unwrap()
}

fn circle_closed_forms() -> Outcome {
    let unit = Curve::circle(P::zero(), 1.0, 1024, false).map_err(|e| e.to_string())?;
    let e = elastica_energy(&unit, &ElasticaParams::standard()).map_err(|e| e.to_string())?;
    let mut worst: f64 = 0.0;
    for r in [0.5, 1.0, 2.0] {
        let c = Curve::circle(P::zero(), r, 1024, false).unwrap();
        for p in [1.5, 2.0, 3.0] {
            let params = ElasticaParams::new(p, 1.0, 1.0).unwrap();
            let exact = TAU * r + TAU * r.powf(1.0 - p);
            worst = worst.max(rel(elastica_energy(&c, &params).unwrap(), exact));
        }
    }
    check((e - 4.0 * PI).abs() < 1e-2 && worst < 1e-2, format!("unit circle {e:.6} (4pi {:.6}), worst scaling rel error {worst:.2e}", 4.0 * PI))
}

fn offset_transform() -> Outcome {
    let circle = Curve::circle(P::zero(), 2.0, 1024, false).unwrap();
    let off = offset_curve(&circle, 0.5).map_err(|e| e.to_string())?;
    let k_err = curvature_samples(&off.result).unwrap().iter().map(|k| (k - 0.4).abs()).fold(0.0, f64::max);
    let ellipse = Curve::ellipse(P::zero(), 2.0, 1.0, 1024).unwrap();
    let params = ElasticaParams::standard();
    let predicted = offset_energy_transform(&ellipse, 0.1, &params).unwrap();
    let measured = elastica_energy(&offset_curve(&ellipse, 0.1).unwrap().result, &params).unwrap();
    let r = rel(predicted, measured);
    check(k_err < 1e-2 && r < 0.01, format!("circle offset curvature error {k_err:.2e}; ellipse predicted {predicted:.5} vs measured {measured:.5} ({r:.2e})"))
}

fn smoothing_convergence() -> Outcome {
    let boundary = Curve::circle(P::zero(), 1.0, 1024, false).unwrap();
    let study = smoothing_convergence_study(&boundary, 1.0, &[0.4, 0.2, 0.1, 0.05], &ElasticaParams::standard(), &disk_grid(), 64)
        .map_err(|e| e.to_string())?;
    let errs: Vec<f64> = study.rows.iter().map(|r| r.abs_error / r.target).collect();
    let strictly = errs.windows(2).all(|w| w[1] < w[0]);
    let last = *errs.last().unwrap();
    check(strictly && last <= 0.03, format!("relative errors {:?}", errs.iter().map(|e| format!("{e:.4}")).collect::<Vec<_>>()))
}

fn coarea_identity() -> Outcome {
    let params = ElasticaParams::standard();
    let disk = smoothed_disk(0.4);
    let sigma: f64 = 0.5;
    let raw = disk_grid().resampled(|p| (-p.norm_sq() / (2.0 * sigma * sigma)).exp()).unwrap();
    let floor = raw.border_max();
    let bump = raw.map(|v| (v - floor).max(0.0)).unwrap();
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, u) in [("disk", &disk), ("bump", &bump)] {
        let c = coarea_energy(u, &params, 64).map_err(|e| e.to_string())?.total;
        let d = divergence_energy(u, &params, default_grad_floor(u));
        let r = rel(c, d);
        ok &= r <= 0.05;
        lines.push(format!("{name} coarea {c:.4} divergence {d:.4} ({r:.3})"));
    }
    check(ok, lines.join("; "))
}

fn savare_counterexample() -> Outcome {
    let params = ElasticaParams::standard();
    let mut ok = true;
    let mut gaps = Vec::new();
    let mut defects = Vec::new();
    for n in 0..=6 {
        let r = savare::report(n, &params).map_err(|e| e.to_string())?;
        ok &= r.counts_match_pattern && r.counts_in_one_three && r.energy_below_three_halves && (r.energy - 1.0).abs() < 1e-12;
        for w in r.weak.iter().filter(|w| w.n == n) {
            if w.test == "t" {
                gaps.push(w.gap);
            }
            defects.push(w.strong_defect);
        }
    }
    let halving = gaps.windows(2).all(|w| (w[1] / w[0] - 0.5).abs() <= 0.1);
    let strong = defects.iter().all(|d| (d - 0.5).abs() <= 1e-6);
    check(ok && halving && strong, format!("counts/energy ok {ok}, phi=t gaps {:?}, strong defect ok {strong}", gaps.iter().map(|g| format!("{g:.3e}")).collect::<Vec<_>>()))
}

fn nesting_verdicts() -> Outcome {
    let ex = ExampleOne::build(0.02).map_err(|e| e.to_string())?;
    let opts = NestingOptions::default();
    let mut ok = true;
    let mut lines = Vec::new();
    for (lower, expect) in [(1, vec!["condition_iii"]), (3, vec![]), (4, vec!["condition_ii"])] {
        let fails = check_conditions(&ex.family(lower).unwrap(), &opts).failures();
        ok &= fails == expect;
        lines.push(format!("gamma{lower}/gamma2 fails {fails:?}"));
    }
    check(ok, lines.join("; "))
}

fn ghost_bridge() -> Outcome {
    let params = ElasticaParams::new(2.0, 1.7, 1.0).unwrap();
    let mut worst: f64 = 0.0;
    for gap in [0.25, 1.0, 2.5] {
        let set = mirrored_arcs(gap, 2000).unwrap();
        let e = relaxed_energy_cusped(&set, &params).map_err(|e| e.to_string())?;
        let arcs: f64 = e.report.levels[..set.arcs.len()].iter().map(|r| r.energy).sum();
        // Same arcs with the cusps left unpaired: the bridge term is the only difference.
        let bare = CuspedSet { arcs: set.arcs.clone(), cusp_pairs: vec![] };
        let bare_arcs: f64 = relaxed_energy_cusped(&bare, &params).unwrap().report.levels.iter().map(|r| r.energy).sum();
        worst = worst.max((e.report.total - bare_arcs - 2.0 * params.alpha * gap).abs());
        worst = worst.max((arcs - bare_arcs).abs());
    }
    let std = ElasticaParams::standard();
    let value = relaxed_energy_cusped(&mirrored_arcs(1.0, 2000).unwrap(), &std).unwrap().report.total;
    let closed = mirrored_arcs_energy(1.0, &std);
    check(worst <= 1e-9 && (value - closed).abs() < 1e-2, format!("bridge term deviation {worst:.1e}; mirrored arcs {value:.5} vs {closed:.5}"))
}

fn strict_gap_criterion() -> Outcome {
    let fig = TwoDisks::build(0.02).map_err(|e| e.to_string())?;
    let g = strict_gap(&fig, &ElasticaParams::standard()).map_err(|e| e.to_string())?;
    check(
        g.gap >= 0.98 * g.required_gap,
        format!("lower bound {:.3}, best G {:.3} (fillet {}), gap {:.3} vs required {:.3}", g.lower_bound, g.best_energy, g.best_fillet, g.gap, g.required_gap),
    )
}

fn martingale() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let m = rng.gen_range(5..200);
        let mut ts: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0..1.0)).collect();
        ts.extend([0.0, 1.0]);
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ts.dedup();
        let samples: Vec<(f64, f64)> = ts.iter().map(|&t| (t, rng.gen_range(0.0..5.0))).collect();
        for n in 0..=6 {
            let coarse = dyadic_average(&samples, n).map_err(|e| e.to_string())?;
            let fine = dyadic_average(&samples, n + 1).unwrap();
            for (&k, &v) in &coarse.values {
                let get = |j| fine.values.get(&j).copied().unwrap_or(0.0);
                worst = worst.max((v - 0.5 * (get(2 * k) + get(2 * k + 1))).abs());
            }
        }
    }
    check(worst <= 1e-12, format!("max deviation {worst:.1e} over 100 tabulations, N = 0..6"))
}

fn star_polygon(rng: &mut ChaCha8Rng) -> Vec<P> {
    let k = rng.gen_range(3..24);
    let mut angles: Vec<f64> = (0..k).map(|_| rng.gen_range(0.0..TAU)).collect();
    angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
    angles.dedup_by(|a, b| (*a - *b).abs() < 1e-3);
    angles.iter().map(|&a| P::new(a.cos(), a.sin()) * rng.gen_range(0.2..1.0)).collect()
}

fn property_suites() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut mismatches = 0;
    let mut tested = 0;
    for _ in 0..100 {
        let pts = star_polygon(&mut rng);
        let Ok(curve) = Curve::new(pts.clone()) else { continue };
        let sys = CurveSystem::single(curve);
        for _ in 0..1000 {
            let p = P::new(rng.gen_range(-1.1..1.1), rng.gen_range(-1.1..1.1));
            match sys.winding_index_with_tol(p, 1e-12) {
                Ok(w) => {
                    tested += 1;
                    if (w.rem_euclid(2) == 1) != ray_cast_parity(p, &pts) {
                        mismatches += 1;
                    }
                }
                Err(_) => continue,
            }
        }
    }

    let params = ElasticaParams::new(2.5, 1.3, 0.7).unwrap();
    let ellipse = Curve::ellipse(P::new(0.3, -0.2), 2.0, 1.0, 700).unwrap();
    let base = elastica_energy(&ellipse, &params).unwrap();
    let moved = ellipse.rotated(0.7).unwrap().translated(P::new(3.1, -4.2)).unwrap();
    let rigid = rel(elastica_energy(&moved, &params).unwrap(), base);

    let std = ElasticaParams::standard();
    let u = smoothed_disk(0.4);
    let f = coarea_energy(&u, &std, 64).unwrap().total;
    let scaled = coarea_energy(&u.map(|v| 2.5 * v).unwrap(), &std, 64).unwrap().total;
    let shifted = coarea_energy(&u.map(|v| v + 3.0).unwrap(), &std, 64).unwrap().total;
    let contrast = rel(scaled, 2.5 * f).max(rel(shifted, f));

    let in_pool = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| coarea_energy(&u, &std, 64).unwrap().total)
    };
    let deterministic = in_pool(1).to_bits() == in_pool(4).to_bits();

    check(
        mismatches == 0 && tested >= 90_000 && rigid <= 1e-9 && contrast <= 0.01 && deterministic,
        format!("parity mismatches {mismatches}/{tested}; rigid motion {rigid:.1e}; contrast {contrast:.2e}; thread-count stable {deterministic}"),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("circle closed forms", circle_closed_forms, Duration::from_secs(1)),
        ("offset transform", offset_transform, Duration::from_secs(1)),
        ("smoothing convergence", smoothing_convergence, Duration::from_secs(30)),
        ("coarea identity", coarea_identity, Duration::from_secs(60)),
        ("oscillating profile counterexample", savare_counterexample, Duration::from_secs(10)),
        ("nesting verdicts", nesting_verdicts, Duration::from_secs(10)),
        ("ghost bridge", ghost_bridge, Duration::from_secs(1)),
        ("strict gap", strict_gap_criterion, Duration::from_secs(30)),
        ("martingale identity", martingale, Duration::from_secs(1)),
        ("property suites", property_suites, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (i, (name, run, budget)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let (status, detail) = match outcome {
            Ok(d) if took <= *budget => ("PASS", d),
            Ok(d) => ("FAIL", format!("{d}; over the {budget:?} budget")),
            Err(d) => ("FAIL", d),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("criterion {:>2} {status} {name}: {detail} ({:.2?})", i + 1, took);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
