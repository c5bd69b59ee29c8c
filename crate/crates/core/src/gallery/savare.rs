//! A sequence of functions with vertical straight level lines whose level
//! counts oscillate ever faster: bounded energy, weak but no strong limit.

use serde::{Deserialize, Serialize};

use crate::curve::ElasticaParams;
use crate::error::{Error, Result};
use crate::scalar::ordered_sum;

/// Primitive of the 2-periodic square wave (+1 on (0, 1/2) and (1, 2),
/// -1 on (1/2, 1)); grows by 1 per period.
pub fn primitive(x: f64) -> f64 {
    let k = (x / 2.0).floor();
    let r = x - 2.0 * k;
    let base = if r <= 0.5 {
        r
    } else if r <= 1.0 {
        1.0 - r
    } else {
        r - 1.0
    };
    k + base
}

/// `2^-n * primitive(2^n x)`.
pub fn profile(n: u32, x: f64) -> f64 {
    let s = (1u64 << n) as f64;
    primitive(s * x) / s
}

/// The profile tabulated on `[0, x_max]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SavareFamily {
    pub n: u32,
    pub x_max: f64,
    pub values: Vec<f64>,
}

impl SavareFamily {
    /// At least `2^(n+6)` intervals per unit length.
    pub fn new(n: u32, x_max: f64) -> Result<Self> {
        if n > 20 {
            return Err(Error::invalid("savare", format!("n = {n} exceeds 20")));
        }
        if !(x_max > 0.0) {
            return Err(Error::invalid("savare", format!("x_max must be positive, got {x_max}")));
        }
        let m = ((x_max * (1u64 << (n + 6)) as f64).ceil() as usize).max(2);
        let values = (0..=m).map(|i| profile(n, x_max * i as f64 / m as f64)).collect();
        Ok(SavareFamily { n, x_max, values })
    }

    /// Solutions of `profile = t`, counted as sign changes of `profile - t`
    /// between consecutive samples (a sample equal to `t` counts as below).
    pub fn count(&self, t: f64) -> usize {
        self.values.windows(2).filter(|w| (w[0] > t) != (w[1] > t)).count()
    }
}

/// The limit count pattern: 3 on `(2k, 2k+1) / 2^(n+1)`, 1 on `(2k+1, 2k+2) / 2^(n+1)`.
pub fn slab_count(n: u32, t: f64) -> usize {
    if ((t * (1u64 << (n + 1)) as f64).floor() as i64).rem_euclid(2) == 0 {
        3
    } else {
        1
    }
}

/// Midpoints of `per_slab` equal sub-slabs of each count slab in `(0, t_max)`,
/// with the common width.
pub fn t_grid(n: u32, per_slab: usize, t_max: f64) -> (Vec<f64>, f64) {
    let dt = 1.0 / ((1u64 << (n + 1)) as f64 * per_slab as f64);
    let m = (t_max / dt).round() as usize;
    ((0..m).map(|i| (i as f64 + 0.5) * dt).collect(), dt)
}

/// Level counts on `[0, 2]` at the sub-slab midpoints of `(0, 1/2)`.
pub fn level_counts(n: u32) -> Result<Vec<(f64, usize)>> {
    let fam = SavareFamily::new(n, 2.0)?;
    Ok(t_grid(n, 4, 0.5).0.into_iter().map(|t| (t, fam.count(t))).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeakRow {
    pub n: u32,
    pub test: String,
    /// `integral over (0, 1/2) of count * phi`.
    pub integral: f64,
    /// `integral over (0, 1/2) of 2 * phi`.
    pub limit: f64,
    pub gap: f64,
    /// `integral over (0, 1/2) of |count - 2|^2`.
    pub strong_defect: f64,
}

pub type TestFunction = (&'static str, fn(f64) -> f64);

pub fn standard_tests() -> Vec<TestFunction> {
    vec![("one", |_| 1.0), ("t", |t| t)]
}

/// Integrals against the tabulated counts with the midpoint rule on
/// sub-slabs (exact for test functions affine on each sub-slab).
pub fn weak_convergence(ns: &[u32], tests: &[TestFunction]) -> Result<Vec<WeakRow>> {
    let mut rows = Vec::new();
    for &n in ns {
        let fam = SavareFamily::new(n, 2.0)?;
        let (ts, dt) = t_grid(n, 4, 0.5);
        let counts: Vec<f64> = ts.iter().map(|&t| fam.count(t) as f64).collect();
        let strong_defect = ordered_sum(counts.iter().map(|c| (c - 2.0).powi(2) * dt));
        for (name, phi) in tests {
            let integral = ordered_sum(ts.iter().zip(&counts).map(|(&t, c)| c * phi(t) * dt));
            let limit = ordered_sum(ts.iter().map(|&t| 2.0 * phi(t) * dt));
            rows.push(WeakRow { n, test: name.to_string(), integral, limit, gap: (integral - limit).abs(), strong_defect });
        }
    }
    Ok(rows)
}

/// Energy of the lifted function `(x1, x2) -> profile(x1)` on the unit
/// square: each level line is `count` vertical unit segments of zero
/// curvature, integrated over the levels in `(0, 1/2)`.
pub fn energy_bound(n: u32, grid_resolution: usize, params: &ElasticaParams<f64>) -> Result<f64> {
    params.validate()?;
    let min = 1usize << (n + 6);
    if grid_resolution < min {
        return Err(Error::invalid("savare_energy_bound", format!("grid resolution {grid_resolution} below 2^(n+6) = {min}")));
    }
    let values: Vec<f64> = (0..=grid_resolution).map(|i| profile(n, i as f64 / grid_resolution as f64)).collect();
    let fam = SavareFamily { n, x_max: 1.0, values };
    let (ts, dt) = t_grid(n, 4, 0.5);
    Ok(ordered_sum(ts.iter().map(|&t| params.alpha * fam.count(t) as f64 * dt)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SavareReport {
    pub n: u32,
    pub counts_match_pattern: bool,
    pub counts_in_one_three: bool,
    pub energy: f64,
    pub energy_below_three_halves: bool,
    pub weak: Vec<WeakRow>,
}

pub fn report(n: u32, params: &ElasticaParams<f64>) -> Result<SavareReport> {
    let counts = level_counts(n)?;
    let energy = energy_bound(n, 1 << (n + 6), params)?;
    Ok(SavareReport {
        n,
        counts_match_pattern: counts.iter().all(|&(t, c)| c == slab_count(n, t)),
        counts_in_one_three: counts.iter().all(|&(_, c)| c == 1 || c == 3),
        energy,
        energy_below_three_halves: energy < 1.5,
        weak: weak_convergence(&[n, n + 1], &standard_tests())?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitive_shape() {
        assert_eq!(primitive(0.5), 0.5);
        assert_eq!(primitive(1.0), 0.0);
        assert_eq!(primitive(2.0), 1.0);
        assert_eq!(primitive(2.5), 1.5);
        for n in 1..8 {
            assert_eq!(profile(n, 1.0), 0.5);
        }
    }

    #[test]
    fn counts_follow_slabs() {
        let f0 = SavareFamily::new(0, 2.0).unwrap();
        assert_eq!(f0.count(0.25), 3);
        assert_eq!(f0.count(0.75), 1);
        for n in 0..=6 {
            for (t, c) in level_counts(n).unwrap() {
                assert_eq!(c, slab_count(n, t), "n={n} t={t}");
            }
        }
        // On the unit interval the counts agree for n >= 1.
        for n in 1..=6 {
            let unit = SavareFamily::new(n, 1.0).unwrap();
            for (t, c) in level_counts(n).unwrap() {
                assert_eq!(unit.count(t), c);
            }
        }
    }

    #[test]
    fn mean_count_is_two() {
        let (ts, dt) = t_grid(3, 4, 0.5);
        let mean = ts.iter().map(|&t| slab_count(3, t) as f64 * dt).sum::<f64>() / 0.5;
        assert!((mean - 2.0).abs() < 1e-6);
    }

    #[test]
    fn energy_is_one() {
        for n in 0..=6 {
            let e = energy_bound(n, 1 << (n + 6), &ElasticaParams::new(3.0, 1.0, 1.0).unwrap()).unwrap();
            assert!((e - 1.0).abs() < 1e-12, "n={n}: {e}");
        }
    }

    #[test]
    fn weak_but_not_strong() {
        let rows = weak_convergence(&[0, 1, 2, 3, 4, 5, 6], &standard_tests()).unwrap();
        let lin: Vec<&WeakRow> = rows.iter().filter(|r| r.test == "t").collect();
        for (n, r) in lin.iter().enumerate() {
            assert!((r.gap - 2f64.powi(-(n as i32) - 3)).abs() < 1e-12);
            assert!((r.strong_defect - 0.5).abs() < 1e-6);
        }
        for w in lin.windows(2) {
            assert!((w[1].gap / w[0].gap - 0.5).abs() <= 0.1);
        }
        for r in rows.iter().filter(|r| r.test == "one" && r.n >= 1) {
            assert!(r.gap < 1e-12);
        }
    }
}
