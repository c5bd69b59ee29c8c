//! Smooth approximations of `c * 1_E`: cut-off profiles, normal offsets of
//! the boundary with their curvature and length transforms, and the
//! resulting grid functions.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{curvature_samples, elastica_energy, resample_arclength, Curve, ElasticaParams};
use crate::error::{Error, Result};
use crate::functional::{coarea_energy_with, CoareaOptions};
use crate::geom::{BBox, Point2};
use crate::grid::GridFunction;
use crate::report::{fmt_sig, Flag};
use crate::scalar::{ordered_sum, Real};
use crate::system::{interior_mask, CurveSystem, Raster};

/// Smallest admissible `1 + delta * k` along an offset.
pub const OFFSET_MARGIN: f64 = 0.05;

/// Decreasing `C^2` profile from `c` at distance 0 to 0 at distance
/// `width`, with flat ends: `w(d) = c (1 - S(d / width))`, `S` the quintic
/// smoothstep `6x^5 - 15x^4 + 10x^3`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct CutoffProfile<T> {
    pub width: T,
    pub c: T,
}

fn smoothstep<T: Real>(x: T) -> T {
    let x = x.max(T::zero()).min(T::one());
    x * x * x * (T::lit(10.0) + x * (T::lit(-15.0) + x * T::lit(6.0)))
}

impl<T: Real> CutoffProfile<T> {
    pub fn new(width: T, c: T) -> Result<Self> {
        if !(width > T::zero()) || !(c > T::zero()) {
            return Err(Error::invalid("cutoff_profile", format!("width and height must be positive, got {width}, {c}")));
        }
        Ok(CutoffProfile { width, c })
    }

    /// `w(d)`; `c` for `d <= 0`, 0 for `d >= width`.
    pub fn value(&self, d: T) -> T {
        self.c * (T::one() - smoothstep(d / self.width))
    }

    pub fn derivative(&self, d: T) -> T {
        let x = (d / self.width).max(T::zero()).min(T::one());
        let s1 = T::lit(30.0) * x * x * (T::one() - x) * (T::one() - x);
        -self.c * s1 / self.width
    }

    /// Distance at which the profile takes the value `t` in `(0, c)`.
    pub fn inverse(&self, t: T) -> T {
        let target = T::one() - t / self.c;
        let (mut lo, mut hi) = (T::zero(), T::one());
        for _ in 0..80 {
            let mid = (lo + hi) * T::half();
            if smoothstep(mid) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        (lo + hi) * T::half() * self.width
    }

    /// `n + 1` equally spaced samples of `w` on `[0, width]`.
    pub fn samples(&self, n: usize) -> Vec<T> {
        (0..=n).map(|i| self.value(self.width * T::of_usize(i) / T::of_usize(n))).collect()
    }
}

/// The normal offset `gamma = base + delta * n` with `n` the outer normal.
#[derive(Clone, Debug, PartialEq)]
pub struct OffsetCurve<T> {
    pub base: Curve<T>,
    pub delta: T,
    /// Offset points in one-to-one correspondence with the base samples.
    pub raw: Curve<T>,
    /// `raw` resampled to arc length.
    pub result: Curve<T>,
    /// `k / (1 + delta * k)` per base sample (signed as the base curvature).
    pub predicted_curvature: Vec<T>,
}

/// Curvature measured with the sign convention "positive on convex arcs".
fn outward_curvature<T: Real>(curve: &Curve<T>) -> Result<Vec<T>> {
    let o = T::lit(curve.orientation() as f64);
    Ok(curvature_samples(curve)?.into_iter().map(|k| k * o).collect())
}

fn check_margin<T: Real>(op: &'static str, curve: &Curve<T>, kappa: &[T], delta: T) -> Result<()> {
    for (j, &k) in kappa.iter().enumerate() {
        let f = T::one() + delta * k;
        if !(f >= T::lit(OFFSET_MARGIN)) {
            let p = curve.points()[j];
            return Err(Error::OffsetSingularity {
                op,
                factor: f.as_f64(),
                margin: OFFSET_MARGIN,
                sample: j,
                x: p.x.as_f64(),
                y: p.y.as_f64(),
            });
        }
    }
    Ok(())
}

/// Outer unit normal at each vertex (from the central chord direction).
pub fn outer_normals<T: Real>(curve: &Curve<T>) -> Vec<Point2<T>> {
    let pts = curve.points();
    let n = pts.len();
    let o = T::lit(curve.orientation() as f64);
    (0..n)
        .map(|j| {
            let t = (pts[(j + 1) % n] - pts[(j + n - 1) % n]).normalized();
            -t.perp() * o
        })
        .collect()
}

/// Offsets `base` by `delta` along its outer normal (negative `delta` moves
/// inwards).
pub fn offset_curve<T: Real>(base: &Curve<T>, delta: T) -> Result<OffsetCurve<T>> {
    let k = curvature_samples(base)?;
    if delta == T::zero() {
        return Ok(OffsetCurve {
            base: base.clone(),
            delta,
            raw: base.clone(),
            result: base.clone(),
            predicted_curvature: k,
        });
    }
    let kappa = outward_curvature(base)?;
    check_margin("offset_curve", base, &kappa, delta)?;
    let normals = outer_normals(base);
    let pts: Vec<Point2<T>> = base.points().iter().zip(&normals).map(|(&p, &n)| p + n * delta).collect();
    let raw = Curve::new(pts)?;
    let result = resample_arclength(&raw, base.len())?;
    let predicted = k.iter().zip(&kappa).map(|(&k, &kp)| k / (T::one() + delta * kp)).collect();
    Ok(OffsetCurve { base: base.clone(), delta, raw, result, predicted_curvature: predicted })
}

/// Energy of the offset predicted from the base alone:
/// `sum_j [alpha + beta |k / (1 + delta k)|^p] |1 + delta k| ds_j`.
pub fn offset_energy_transform<T: Real>(base: &Curve<T>, delta: T, params: &ElasticaParams<T>) -> Result<T> {
    let kappa = outward_curvature(base)?;
    check_margin("offset_energy_transform", base, &kappa, delta)?;
    let w = base.vertex_weights();
    Ok(ordered_sum(kappa.iter().zip(&w).map(|(&k, &w)| {
        let f = T::one() + delta * k;
        params.density(k / f) * f.abs() * w
    })))
}

/// Predicted offset length `sum |1 + delta k| ds`.
pub fn offset_length_transform<T: Real>(base: &Curve<T>, delta: T) -> Result<T> {
    let kappa = outward_curvature(base)?;
    let w = base.vertex_weights();
    Ok(ordered_sum(kappa.iter().zip(&w).map(|(&k, &w)| (T::one() + delta * k).abs() * w)))
}

/// Signed distance to a closed curve at every node of `grid` (negative
/// inside), exact within `band` of the trace and clamped to `±band` beyond.
pub fn signed_distance<T: Real>(boundary: &Curve<T>, grid: &GridFunction<T>, band: T) -> Vec<T> {
    let h = grid.spacing();
    let half = Point2::new(h * T::half(), h * T::half());
    let nodes = Raster::new(BBox::new(grid.origin() - half, grid.node(grid.rows() - 1, grid.cols() - 1) + half), grid.cols(), grid.rows());
    let system = CurveSystem::single(boundary.clone());
    let inside = interior_mask(&system, &nodes);
    let index = system.segment_index(band.max(h));
    (0..grid.rows() * grid.cols())
        .into_par_iter()
        .map(|k| {
            let (r, c) = (k / grid.cols(), k % grid.cols());
            let d = index.nearest_within(grid.node(r, c), band).map_or(band, |(d, _)| d);
            if inside.get(c, r) {
                -d
            } else {
                d
            }
        })
        .collect()
}

/// `u = c` on the closed region bounded by `boundary`, `w(d)` in the outer
/// collar of width `profile.width`, 0 beyond, on the lattice of `grid`.
pub fn build_smooth_indicator<T: Real>(
    boundary: &Curve<T>,
    profile: &CutoffProfile<T>,
    grid: &GridFunction<T>,
) -> Result<GridFunction<T>> {
    let boundary = if boundary.orientation() < 0 { boundary.reversed() } else { boundary.clone() };
    let h = grid.spacing();
    if profile.width < h * T::lit(4.0) {
        return Err(Error::invalid(
            "build_smooth_indicator",
            format!("collar {} is narrower than 4 grid cells ({})", profile.width, h * T::lit(4.0)),
        ));
    }
    let collar_box = boundary.bbox().expanded(profile.width);
    if !grid.bbox().contains_box(&collar_box) {
        return Err(Error::invalid("build_smooth_indicator", "grid does not contain the collar around the boundary"));
    }
    let kappa = outward_curvature(&boundary)?;
    check_margin("build_smooth_indicator", &boundary, &kappa, profile.width)?;
    let band = profile.width + h * T::two();
    let d = signed_distance(&boundary, grid, band);
    grid.with_values(d.into_iter().map(|d| if d <= T::zero() { profile.c } else { profile.value(d) }).collect())
}

/// One collar of a convergence study.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct StudyRow<T> {
    pub collar: T,
    pub f_coarea: T,
    pub target: T,
    pub abs_error: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct StudyReport<T> {
    pub rows: Vec<StudyRow<T>>,
    pub flags: Vec<Flag>,
}

impl<T: Real> StudyReport<T> {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("collar,F_coarea,target,abs_error\n");
        for r in &self.rows {
            s.push_str(&format!(
                "{},{},{},{}\n",
                fmt_sig(r.collar.as_f64(), 9),
                fmt_sig(r.f_coarea.as_f64(), 9),
                fmt_sig(r.target.as_f64(), 9),
                fmt_sig(r.abs_error.as_f64(), 9)
            ));
        }
        s
    }

    pub fn final_relative_error(&self) -> Option<T> {
        self.rows.last().map(|r| r.abs_error / r.target)
    }

    /// True when every error is at most 1.2 times the previous one.
    pub fn decreasing(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].abs_error <= w[0].abs_error * T::lit(1.2))
    }
}

/// Builds the smooth indicator for each collar and compares its coarea
/// energy against `c * W(boundary)`.
pub fn smoothing_convergence_study<T: Real>(
    boundary: &Curve<T>,
    c: T,
    collar_widths: &[T],
    params: &ElasticaParams<T>,
    grid: &GridFunction<T>,
    n_levels: usize,
) -> Result<StudyReport<T>> {
    if collar_widths.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("smoothing_convergence_study", "collar widths must be strictly decreasing"));
    }
    let target = c * elastica_energy(boundary, params)?;
    let rows = collar_widths
        .iter()
        .map(|&w| {
            let u = build_smooth_indicator(boundary, &CutoffProfile::new(w, c)?, grid)?;
            let f = coarea_energy_with(&u, params, &CoareaOptions::new(n_levels))?.total;
            Ok(StudyRow { collar: w, f_coarea: f, target, abs_error: (f - target).abs() })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = StudyReport { rows, flags: Vec::new() };
    for w in report.rows.windows(2) {
        if w[1].abs_error > w[0].abs_error * T::lit(1.2) {
            report.flags.push(Flag {
                name: "error_increase".into(),
                ok: false,
                detail: format!("collar {} error {} exceeds 1.2x collar {} error {}", w[1].collar, w[1].abs_error, w[0].collar, w[0].abs_error),
            });
        }
    }
    let dec = report.decreasing();
    report.flags.push(Flag { name: "decreasing".into(), ok: dec, detail: String::new() });
    Ok(report)
}

/// Symmetric discrete Hausdorff distance between the vertex sets of two
/// curves measured against the other's segments.
pub fn hausdorff_distance<T: Real>(a: &Curve<T>, b: &Curve<T>) -> T {
    let one_way = |x: &Curve<T>, y: &Curve<T>| {
        let idx = CurveSystem::single(y.clone()).segment_index(y.median_spacing() * T::two());
        x.points().iter().map(|&p| idx.nearest(p).unwrap_or(T::infinity())).fold(T::zero(), T::max)
    };
    one_way(a, b).max(one_way(b, a))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::extract_level_set;
    use std::f64::consts::TAU;

    type P = Point2<f64>;

    #[test]
    fn profile_shape() {
        let w: CutoffProfile<f64> = CutoffProfile::new(0.3, 2.0).unwrap();
        assert_eq!(w.value(0.0), 2.0);
        assert_eq!(w.value(0.3), 0.0);
        assert!(w.derivative(0.0).abs() < 1e-9 && w.derivative(0.3).abs() < 1e-9);
        let s = w.samples(200);
        assert!(s.windows(2).all(|p| p[1] <= p[0]));
        // Bounded second differences: C^2.
        let h = 0.3 / 200.0;
        let max_d2 = s.windows(3).map(|q| ((q[2] - 2.0 * q[1] + q[0]) / (h * h)).abs()).fold(0.0, f64::max);
        assert!(max_d2 < 2.0 * 10.0 / (0.3 * 0.3) * 1.1);
        assert!((w.value(w.inverse(0.7)) - 0.7).abs() < 1e-12);
    }

    #[test]
    fn circle_offset_matches_closed_form() {
        let base = Curve::circle(P::zero(), 2.0, 512, false).unwrap();
        let off = offset_curve(&base, 0.5).unwrap();
        for k in curvature_samples(&off.result).unwrap() {
            assert!((k - 0.4).abs() < 1e-2);
        }
        for k in off.predicted_curvature {
            assert!((k - 0.4).abs() < 1e-9);
        }
        let e = offset_energy_transform(&base, 0.5, &ElasticaParams::standard()).unwrap();
        assert!((e - TAU * 2.9).abs() < 1e-2);
    }

    #[test]
    fn zero_offset_is_identity() {
        let base = Curve::ellipse(P::zero(), 2.0, 1.0, 300).unwrap();
        let off = offset_curve(&base, 0.0).unwrap();
        assert_eq!(off.result, base);
        let params = ElasticaParams::standard();
        let e = offset_energy_transform(&base, 0.0, &params).unwrap();
        assert!((e - elastica_energy(&base, &params).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn collapsing_offset_is_rejected() {
        let base = Curve::circle(P::zero(), 1.0, 256, false).unwrap();
        assert!(matches!(offset_curve(&base, -1.0), Err(Error::OffsetSingularity { .. })));
        // Clockwise input: the outer normal still points away from the disk.
        let cw = Curve::circle(P::zero(), 1.0, 256, true).unwrap();
        let off = offset_curve(&cw, 0.5).unwrap();
        assert!((off.result.points()[0].norm() - 1.5).abs() < 1e-9);
    }

    #[test]
    fn ellipse_offset_transforms() {
        let base = Curve::ellipse(P::zero(), 2.0, 1.0, 1024).unwrap();
        let params = ElasticaParams::standard();
        let off = offset_curve(&base, 0.1).unwrap();
        let predicted = offset_energy_transform(&base, 0.1, &params).unwrap();
        let measured = elastica_energy(&off.result, &params).unwrap();
        assert!((predicted - measured).abs() < 0.01 * measured, "{predicted} vs {measured}");
        let len = offset_length_transform(&base, 0.1).unwrap();
        assert!((len - off.result.length()).abs() < 0.01 * len);
        let measured_k = curvature_samples(&off.raw).unwrap();
        let mut rel: Vec<f64> = measured_k
            .iter()
            .zip(&off.predicted_curvature)
            .map(|(m, p)| (m - p).abs() / p.abs())
            .collect();
        rel.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(rel[rel.len() * 95 / 100] <= 0.02);
    }

    #[test]
    fn indicator_level_line_is_offset_of_boundary() {
        let n = 384;
        let h = 6.0 / (n - 1) as f64;
        let grid = GridFunction::template(BBox::new(P::new(-3.0, -3.0), P::new(3.0, 3.0)), n).unwrap();
        let boundary = Curve::ellipse(P::zero(), 2.0, 1.0, 800).unwrap();
        let profile = CutoffProfile::new(0.3, 1.0).unwrap();
        let u = build_smooth_indicator(&boundary, &profile, &grid).unwrap();
        assert_eq!(u.max(), 1.0);
        assert_eq!(u.min(), 0.0);
        let ex = extract_level_set(&u, 0.5).unwrap();
        assert_eq!(ex.system.len(), 1);
        let off = offset_curve(&boundary, profile.inverse(0.5)).unwrap();
        let d = hausdorff_distance(&ex.system.curves()[0], &off.result);
        assert!(d <= 2.0 * h, "hausdorff {d} > {}", 2.0 * h);
    }

    #[test]
    fn narrow_collar_is_rejected() {
        let grid = GridFunction::template(BBox::new(P::new(-2.0, -2.0), P::new(2.0, 2.0)), 64).unwrap();
        let boundary = Curve::circle(P::zero(), 1.0, 256, false).unwrap();
        assert!(build_smooth_indicator(&boundary, &CutoffProfile::new(0.1, 1.0).unwrap(), &grid).is_err());
    }
}
