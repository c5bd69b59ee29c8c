//! The smooth-case energy of a grid function, computed two ways: by
//! decomposing into level lines (coarea) and directly from the normalized
//! gradient's divergence.

use rayon::prelude::*;

use crate::contour::{extract_level_set_with, ContourOptions};
use crate::curve::ElasticaParams;
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::report::{EnergyReport, LevelEnergy};
use crate::scalar::{ordered_sum, Real};
use crate::system::CurveSystem;

/// Relative change of the total, under doubling of the level count, above
/// which the coarea sum is flagged as not converged.
pub const CONVERGENCE_TOL: f64 = 0.02;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoareaOptions {
    pub n_levels: usize,
    /// Recompute with `2 * n_levels` and flag the result when the totals
    /// disagree by more than [`CONVERGENCE_TOL`].
    pub check_doubling: bool,
    pub contour: ContourOptions,
}

impl CoareaOptions {
    pub fn new(n_levels: usize) -> Self {
        CoareaOptions { n_levels, check_doubling: false, contour: ContourOptions::for_energy() }
    }
}

/// Thresholds at the midpoints of `n` equal slabs of `(lo, hi)`, and the slab width.
pub fn slab_midpoints<T: Real>(lo: T, hi: T, n: usize) -> (Vec<T>, T) {
    let w = (hi - lo) / T::of_usize(n);
    ((0..n).map(|j| lo + w * (T::of_usize(j) + T::half())).collect(), w)
}

/// Energy row of one system.
pub fn system_row<T: Real>(
    level: usize,
    t: T,
    weight: T,
    system: &CurveSystem<T>,
    params: &ElasticaParams<T>,
) -> Result<LevelEnergy<T>> {
    let parts = system.energy_parts(params.p)?;
    Ok(LevelEnergy {
        level,
        t,
        weight,
        length: parts.length,
        curvature_term: params.beta * parts.curvature,
        energy: parts.total(params),
    })
}

fn coarea_pass<T: Real>(
    u: &GridFunction<T>,
    params: &ElasticaParams<T>,
    n_levels: usize,
    contour: &ContourOptions,
) -> Result<(Vec<LevelEnergy<T>>, T)> {
    let (lo, hi) = (u.min(), u.max());
    if !(hi > lo) {
        return Ok((Vec::new(), T::zero()));
    }
    let (ts, w) = slab_midpoints(lo, hi, n_levels);
    let rows: Vec<LevelEnergy<T>> = ts
        .par_iter()
        .enumerate()
        .map(|(j, &t)| {
            let ex = extract_level_set_with(u, t, contour)?;
            system_row(j, t, w, &ex.system, params)
        })
        .collect::<Result<_>>()?;
    let total = ordered_sum(rows.iter().map(|r| r.energy * r.weight));
    Ok((rows, total))
}

/// `sum_j w * W(∂{u > t_j})` over the midpoints `t_j` of `n_levels` equal
/// slabs spanning the range of `u`.
pub fn coarea_energy<T: Real>(u: &GridFunction<T>, params: &ElasticaParams<T>, n_levels: usize) -> Result<EnergyReport<T>> {
    coarea_energy_with(u, params, &CoareaOptions { check_doubling: true, ..CoareaOptions::new(n_levels) })
}

pub fn coarea_energy_with<T: Real>(
    u: &GridFunction<T>,
    params: &ElasticaParams<T>,
    opts: &CoareaOptions,
) -> Result<EnergyReport<T>> {
    params.validate()?;
    if opts.n_levels < 16 {
        return Err(Error::invalid("coarea_energy", format!("n_levels must be at least 16, got {}", opts.n_levels)));
    }
    let (rows, total) = coarea_pass(u, params, opts.n_levels, &opts.contour)?;
    let mut report = EnergyReport::new(rows, total);
    if opts.check_doubling {
        let (_, fine) = coarea_pass(u, params, 2 * opts.n_levels, &opts.contour)?;
        let scale = total.abs().max(fine.abs());
        let rel = if scale > T::zero() { ((fine - total).abs() / scale).as_f64() } else { 0.0 };
        report.flag(
            "level_doubling_converged",
            rel <= CONVERGENCE_TOL,
            format!("total {} with {} levels, {} with {}; relative change {:.3e}", total, opts.n_levels, fine, 2 * opts.n_levels, rel),
        );
    }
    Ok(report)
}

/// Default gradient floor: `1e-8 * (max u - min u) / spacing`.
pub fn default_grad_floor<T: Real>(u: &GridFunction<T>) -> T {
    T::lit(1e-8) * (u.max() - u.min()) / u.spacing()
}

/// `sum h^2 |grad u| (alpha + beta |div(grad u / |grad u|)|^p)` with central
/// differences; nodes where `|grad u| <= grad_floor` contribute only
/// `alpha |grad u|`. Where a neighbour's gradient is below the floor its
/// unit normal is undefined and the divergence falls back to a one-sided
/// difference.
pub fn divergence_energy<T: Real>(u: &GridFunction<T>, params: &ElasticaParams<T>, grad_floor: T) -> T {
    let rows = divergence_integrand(u, params, grad_floor);
    let row_sums: Vec<T> = rows.par_chunks(u.cols()).map(|r| ordered_sum(r.iter().copied())).collect();
    ordered_sum(row_sums) * u.cell_area()
}

/// Per-node integrand of [`divergence_energy`] (row-major, zero on the border).
pub fn divergence_integrand<T: Real>(u: &GridFunction<T>, params: &ElasticaParams<T>, grad_floor: T) -> Vec<T> {
    let (rows, cols) = (u.rows(), u.cols());
    let h = u.spacing();
    let two_h = h * T::two();
    // Gradient and unit normal per node; border nodes have no gradient.
    let normals: Vec<Option<(T, T, T)>> = (0..rows * cols)
        .into_par_iter()
        .map(|k| {
            let (r, c) = (k / cols, k % cols);
            if r == 0 || c == 0 || r == rows - 1 || c == cols - 1 {
                return None;
            }
            let gx = (u.at(r, c + 1) - u.at(r, c - 1)) / two_h;
            let gy = (u.at(r + 1, c) - u.at(r - 1, c)) / two_h;
            let g = gx.hypot(gy);
            Some((g, gx, gy))
        })
        .collect();
    let unit = |r: usize, c: usize| -> Option<(T, T)> {
        match normals[r * cols + c] {
            Some((g, gx, gy)) if g > grad_floor => Some((gx / g, gy / g)),
            _ => None,
        }
    };
    let deriv = |minus: Option<T>, centre: T, plus: Option<T>| -> T {
        match (minus, plus) {
            (Some(m), Some(p)) => (p - m) / two_h,
            (None, Some(p)) => (p - centre) / h,
            (Some(m), None) => (centre - m) / h,
            (None, None) => T::zero(),
        }
    };
    (0..rows * cols)
        .into_par_iter()
        .map(|k| {
            let (r, c) = (k / cols, k % cols);
            let Some((g, _, _)) = normals[k] else { return T::zero() };
            if g <= grad_floor {
                return params.alpha * g;
            }
            let (nx, ny) = unit(r, c).expect("above floor");
            let dx = deriv(unit(r, c - 1).map(|n| n.0), nx, unit(r, c + 1).map(|n| n.0));
            let dy = deriv(unit(r - 1, c).map(|n| n.1), ny, unit(r + 1, c).map(|n| n.1));
            g * params.density(dx + dy)
        })
        .collect()
}
