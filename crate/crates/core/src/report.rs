//! Tabulated energy reports with CSV output.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// One row of a report: the energy of a level (or collar, or piece).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct LevelEnergy<T> {
    pub level: usize,
    pub t: T,
    /// Weight of the row in the total (slab width; 1 for plain sums).
    pub weight: T,
    /// Multiplicity-weighted length.
    pub length: T,
    /// `beta * integral |k|^p ds`.
    pub curvature_term: T,
    /// `alpha * length + curvature_term`.
    pub energy: T,
}

/// A named diagnostic with its outcome.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Flag {
    pub name: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct EnergyReport<T> {
    pub levels: Vec<LevelEnergy<T>>,
    pub total: T,
    pub flags: Vec<Flag>,
}

impl<T: Real> EnergyReport<T> {
    pub fn new(levels: Vec<LevelEnergy<T>>, total: T) -> Self {
        EnergyReport { levels, total, flags: Vec::new() }
    }

    pub fn flag(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        self.flags.push(Flag { name: name.into(), ok, detail: detail.into() });
    }

    pub fn get_flag(&self, name: &str) -> Option<&Flag> {
        self.flags.iter().find(|f| f.name == name)
    }

    /// `level,t,length,curvature_term,energy` rows followed by `TOTAL,,,,<total>`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,t,length,curvature_term,energy\n");
        for r in &self.levels {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                r.level,
                fmt_sig(r.t.as_f64(), 9),
                fmt_sig(r.length.as_f64(), 9),
                fmt_sig(r.curvature_term.as_f64(), 9),
                fmt_sig(r.energy.as_f64(), 9)
            );
        }
        let _ = writeln!(s, "TOTAL,,,,{}", fmt_sig(self.total.as_f64(), 9));
        s
    }
}

/// `%.{digits}g`-style formatting: `digits` significant digits, trailing
/// zeros removed, exponent form for very large or small magnitudes.
pub fn fmt_sig(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let digits = digits.max(1);
    // Round first so the exponent reflects the printed value.
    let sci = format!("{:.*e}", digits - 1, x);
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= digits as i32 {
        let mant = trim_zeros(mant);
        format!("{mant}e{exp}")
    } else {
        let decimals = (digits as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(12.566370614359172, 9), "12.5663706");
        assert_eq!(fmt_sig(0.5, 9), "0.5");
        assert_eq!(fmt_sig(1.0e-7, 9), "1e-7");
        assert_eq!(fmt_sig(123456789012.0, 9), "1.23456789e11");
        assert_eq!(fmt_sig(-2.0, 9), "-2");
        assert_eq!(fmt_sig(0.0, 9), "0");
        assert_eq!(fmt_sig(9.9999999999, 9), "10");
    }

    #[test]
    fn csv_layout() {
        let r = EnergyReport::new(
            vec![LevelEnergy { level: 0, t: 0.5, weight: 1.0, length: 2.0, curvature_term: 1.0, energy: 3.0 }],
            3.0,
        );
        assert_eq!(r.to_csv(), "level,t,length,curvature_term,energy\n0,0.5,2,1,3\nTOTAL,,,,3\n");
    }
}
