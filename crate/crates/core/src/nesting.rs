//! Level families: piecewise-constant maps from thresholds to curve
//! systems, their nesting audit, membership against a grid function, the
//! family energy `G`, and dyadic averaging of energy profiles.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contact::{classify_contact, ContactKind};
use crate::contour::extract_level_set;
use crate::curve::ElasticaParams;
use crate::error::{Error, Result};
use crate::functional::system_row;
use crate::geom::{BBox, Point2, SegmentIndex};
use crate::grid::GridFunction;
use crate::report::EnergyReport;
use crate::scalar::{ordered_sum, Real};
use crate::system::{interior_mask, trace_band_mask, CurveSystem, Mask, Raster};

/// `Phi(t) = systems[j]` for `t` in `[thresholds[j], thresholds[j + 1])`,
/// the last slab closing at `range.1`; empty outside.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FamilyFile<T>", into = "FamilyFile<T>")]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct LevelFamily<T> {
    range: (T, T),
    thresholds: Vec<T>,
    systems: Vec<CurveSystem<T>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct FamilyFile<T> {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<u32>,
    pub range: [T; 2],
    pub slabs: Vec<SlabFile<T>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct SlabFile<T> {
    pub t: T,
    pub system: CurveSystem<T>,
}

impl<T: Real> TryFrom<FamilyFile<T>> for LevelFamily<T> {
    type Error = Error;
    fn try_from(f: FamilyFile<T>) -> Result<Self> {
        let (thresholds, systems) = f.slabs.into_iter().map(|s| (s.t, s.system)).unzip();
        LevelFamily::new((f.range[0], f.range[1]), thresholds, systems)
    }
}

impl<T: Real> From<LevelFamily<T>> for FamilyFile<T> {
    fn from(f: LevelFamily<T>) -> Self {
        FamilyFile {
            format: Some(1),
            range: [f.range.0, f.range.1],
            slabs: f.thresholds.into_iter().zip(f.systems).map(|(t, system)| SlabFile { t, system }).collect(),
        }
    }
}

impl<T: Real> LevelFamily<T> {
    pub fn new(range: (T, T), thresholds: Vec<T>, systems: Vec<CurveSystem<T>>) -> Result<Self> {
        let op = "level_family";
        if thresholds.len() != systems.len() {
            return Err(Error::invalid(op, format!("{} thresholds for {} systems", thresholds.len(), systems.len())));
        }
        if !(range.0.is_finite() && range.1.is_finite() && range.0 <= range.1) {
            return Err(Error::invalid(op, format!("invalid range ({}, {})", range.0, range.1)));
        }
        if let Some(j) = thresholds.windows(2).position(|w| !(w[0] < w[1])) {
            return Err(Error::invalid(op, format!("thresholds not strictly increasing at slab {}", j + 1)));
        }
        if let (Some(&first), Some(&last)) = (thresholds.first(), thresholds.last()) {
            if first < range.0 || !(last < range.1) {
                return Err(Error::invalid(op, format!("thresholds [{first}, {last}] not bracketed by range ({}, {})", range.0, range.1)));
            }
        }
        Ok(LevelFamily { range, thresholds, systems })
    }

    /// The same system on the whole of `[lo, hi]`.
    pub fn constant(system: CurveSystem<T>, lo: T, hi: T) -> Result<Self> {
        LevelFamily::new((lo, hi), vec![lo], vec![system])
    }

    /// `n_slabs` equal slabs over the range of `u`, each carrying the level
    /// set extracted at the slab midpoint.
    pub fn from_levels(u: &GridFunction<T>, n_slabs: usize) -> Result<Self> {
        let (lo, hi) = (u.min(), u.max());
        if !(hi > lo) || n_slabs == 0 {
            return LevelFamily::new((lo, hi), Vec::new(), Vec::new());
        }
        let w = (hi - lo) / T::of_usize(n_slabs);
        let thresholds: Vec<T> = (0..n_slabs).map(|j| lo + w * T::of_usize(j)).collect();
        let systems = thresholds
            .par_iter()
            .map(|&t| Ok(extract_level_set(u, t + w * T::half())?.system))
            .collect::<Result<Vec<_>>>()?;
        LevelFamily::new((lo, hi), thresholds, systems)
    }

    pub fn range(&self) -> (T, T) {
        self.range
    }

    pub fn thresholds(&self) -> &[T] {
        &self.thresholds
    }

    pub fn systems(&self) -> &[CurveSystem<T>] {
        &self.systems
    }

    pub fn len(&self) -> usize {
        self.thresholds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thresholds.is_empty()
    }

    /// Bounds `[t_j, t_{j+1})` of slab `j`.
    pub fn slab(&self, j: usize) -> (T, T) {
        let hi = self.thresholds.get(j + 1).copied().unwrap_or(self.range.1);
        (self.thresholds[j], hi)
    }

    pub fn slab_midpoint(&self, j: usize) -> T {
        let (a, b) = self.slab(j);
        (a + b) * T::half()
    }

    /// `Phi(t)`, or `None` where the family is empty.
    pub fn at(&self, t: T) -> Option<&CurveSystem<T>> {
        if self.is_empty() || t < self.thresholds[0] || t >= self.range.1 {
            return None;
        }
        let j = self.thresholds.partition_point(|&s| s <= t) - 1;
        Some(&self.systems[j])
    }

    /// Splits at an interior threshold `t` (strictly inside some slab or at a
    /// slab boundary) into the families on `[lo, t)` and `[t, hi)`.
    pub fn split_at(&self, t: T) -> Result<(Self, Self)> {
        if self.is_empty() || !(t > self.thresholds[0] && t < self.range.1) {
            return Err(Error::invalid("split_at", format!("{t} is not interior to the family")));
        }
        let j = self.thresholds.partition_point(|&s| s <= t) - 1;
        let mut lo_t = self.thresholds[..=j].to_vec();
        let mut lo_s = self.systems[..=j].to_vec();
        if self.thresholds[j] == t {
            lo_t.pop();
            lo_s.pop();
        }
        let mut hi_t = vec![t];
        let mut hi_s = vec![self.systems[j].clone()];
        hi_t.extend_from_slice(&self.thresholds[j + 1..]);
        hi_s.extend_from_slice(&self.systems[j + 1..]);
        Ok((LevelFamily::new((self.range.0, t), lo_t, lo_s)?, LevelFamily::new((t, self.range.1), hi_t, hi_s)?))
    }

    pub fn bbox(&self) -> Option<BBox<T>> {
        self.systems.iter().filter_map(|s| s.bbox()).reduce(|a, b| a.union(b))
    }

    /// Twice the median sample spacing over all systems.
    pub fn default_dist_tol(&self) -> T {
        let all = self.systems.iter().fold(CurveSystem::empty(), |acc, s| acc.union(s));
        all.default_dist_tol()
    }
}

/// `G(Phi) = sum_j (t_{j+1} - t_j) W(Phi(t_j))`.
pub fn family_energy<T: Real>(phi: &LevelFamily<T>, params: &ElasticaParams<T>) -> Result<EnergyReport<T>> {
    params.validate()?;
    let rows = (0..phi.len())
        .into_par_iter()
        .map(|j| {
            let (a, b) = phi.slab(j);
            system_row(j, a, b - a, &phi.systems[j], params)
        })
        .collect::<Result<Vec<_>>>()?;
    let total = ordered_sum(rows.iter().map(|r| r.energy * r.weight));
    Ok(EnergyReport::new(rows, total))
}

/// Tolerances of the nesting and membership audits.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct NestingOptions<T> {
    /// Proximity tolerance; defaults to twice the family's median spacing.
    pub dist_tol: Option<T>,
    pub angle_tol: T,
    /// Raster cells along the longer side of the audited box.
    pub area_res: usize,
    /// Largest admissible area discrepancy, as a fraction of the box area.
    pub area_frac: T,
    /// Largest admissible fraction of a curve's length off its allowed region.
    pub escape_frac: T,
    /// Smallest fraction of level-line length that must lie on the family's trace.
    pub cover_frac: T,
    /// Seed for the long-range pair sample.
    pub seed: u64,
}

impl<T: Real> Default for NestingOptions<T> {
    fn default() -> Self {
        NestingOptions {
            dist_tol: None,
            angle_tol: T::lit(0.15),
            area_res: 256,
            area_frac: T::lit(0.005),
            escape_frac: T::lit(0.01),
            cover_frac: T::lit(0.99),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct NestingWitness<T> {
    /// Slab indices involved (lower then upper for pair conditions).
    pub slabs: Vec<usize>,
    pub thresholds: Vec<T>,
    pub point: Option<Point2<T>>,
    /// Offending area fraction, length fraction or contact angle.
    pub measure: T,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct ConditionOutcome<T> {
    pub pass: bool,
    pub witnesses: Vec<NestingWitness<T>>,
}

impl<T> ConditionOutcome<T> {
    fn from_witnesses(witnesses: Vec<NestingWitness<T>>) -> Self {
        ConditionOutcome { pass: witnesses.is_empty(), witnesses }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct NestingVerdict<T> {
    /// No crossing between any audited pair of levels.
    pub condition_i: ConditionOutcome<T>,
    /// Upper interiors inside lower interiors; lower traces avoid upper interiors.
    pub condition_ii: ConditionOutcome<T>,
    /// Upper curves leaving the closed lower interior ride on the lower trace.
    pub condition_iii: ConditionOutcome<T>,
    /// Interior of each level equals the superlevel set (membership only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_sets: Option<ConditionOutcome<T>>,
    /// Each level line lies on the family's trace (membership only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_cover: Option<ConditionOutcome<T>>,
    /// Audited `(lower, upper)` slab pairs.
    pub pairs: Vec<(usize, usize)>,
    pub dist_tol: T,
    pub is_member: bool,
}

impl<T: Real> NestingVerdict<T> {
    fn finish(mut self) -> Self {
        self.is_member = self.condition_i.pass
            && self.condition_ii.pass
            && self.condition_iii.pass
            && self.level_sets.as_ref().is_none_or(|c| c.pass)
            && self.boundary_cover.as_ref().is_none_or(|c| c.pass);
        self
    }

    /// Names of the failing conditions.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        for (name, c) in [("condition_i", Some(&self.condition_i)), ("condition_ii", Some(&self.condition_ii)), ("condition_iii", Some(&self.condition_iii)), ("level_sets", self.level_sets.as_ref()), ("boundary_cover", self.boundary_cover.as_ref())] {
            if c.is_some_and(|c| !c.pass) {
                v.push(name);
            }
        }
        v
    }
}

/// Consecutive pairs plus `ceil(log2(n))` distinct long-range pairs drawn
/// with `seed`. Rasterized nesting is not exactly transitive, so a few
/// distant pairs are audited as well.
pub fn audit_pairs(n: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut pairs: BTreeSet<(usize, usize)> = (1..n).map(|j| (j - 1, j)).collect();
    let far: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 2..n).map(move |b| (a, b))).collect();
    if !far.is_empty() {
        let k = (usize::BITS - (n - 1).leading_zeros()) as usize;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        pairs.extend(far.choose_multiple(&mut rng, k.min(far.len())).copied());
    }
    pairs.into_iter().collect()
}

/// Per-system data shared by all pairs.
struct Prepared<T> {
    interior: Mask,
    closure: Mask,
    band: Mask,
    index: SegmentIndex<T>,
}

fn prepare<T: Real>(s: &CurveSystem<T>, raster: &Raster<T>, dist_tol: T) -> Prepared<T> {
    let interior = interior_mask(s, raster);
    let closure = interior.dilate(1);
    Prepared { interior, closure, band: trace_band_mask(s, raster, dist_tol), index: s.segment_index(dist_tol * T::two()) }
}

/// Length fraction of `curve` whose vertices satisfy `bad`, and the first
/// offending vertex.
fn bad_fraction<T: Real>(curve: &crate::curve::Curve<T>, bad: impl Fn(Point2<T>) -> bool) -> (T, Option<Point2<T>>) {
    let w = curve.vertex_weights();
    let mut acc = T::zero();
    let mut first = None;
    for (&p, &w) in curve.points().iter().zip(&w) {
        if bad(p) {
            acc = acc + w;
            first.get_or_insert(p);
        }
    }
    (acc / curve.length(), first)
}

fn audit_box<T: Real>(phi: &LevelFamily<T>, extra: Option<BBox<T>>, dist_tol: T) -> Option<BBox<T>> {
    let b = match (phi.bbox(), extra) {
        (Some(a), Some(b)) => a.union(b),
        (a, b) => a.or(b)?,
    };
    Some(b.expanded(b.width().max(b.height()) * T::lit(0.05) + dist_tol * T::two()))
}

fn run_conditions<T: Real>(phi: &LevelFamily<T>, opts: &NestingOptions<T>, bbox: Option<BBox<T>>, dist_tol: T) -> NestingVerdict<T> {
    let pairs = audit_pairs(phi.len(), opts.seed);
    let empty = ConditionOutcome { pass: true, witnesses: Vec::new() };
    let blank = NestingVerdict {
        condition_i: empty.clone(),
        condition_ii: empty.clone(),
        condition_iii: empty,
        level_sets: None,
        boundary_cover: None,
        pairs: pairs.clone(),
        dist_tol,
        is_member: false,
    };
    let Some(bbox) = bbox else { return blank.finish() };
    let raster = Raster::with_cell(bbox, bbox.width().max(bbox.height()) / T::of_usize(opts.area_res.max(8)));
    let prepared: Vec<Prepared<T>> = phi.systems.par_iter().map(|s| prepare(s, &raster, dist_tol)).collect();
    let results: Vec<[Vec<NestingWitness<T>>; 3]> = pairs
        .par_iter()
        .map(|&(lo, hi)| audit_pair(phi, &prepared, &raster, bbox, lo, hi, dist_tol, opts))
        .collect();
    let mut w = [Vec::new(), Vec::new(), Vec::new()];
    for r in results {
        for (acc, v) in w.iter_mut().zip(r) {
            acc.extend(v);
        }
    }
    let [i, ii, iii] = w;
    NestingVerdict {
        condition_i: ConditionOutcome::from_witnesses(i),
        condition_ii: ConditionOutcome::from_witnesses(ii),
        condition_iii: ConditionOutcome::from_witnesses(iii),
        ..blank
    }
    .finish()
}

#[allow(clippy::too_many_arguments)]
fn audit_pair<T: Real>(
    phi: &LevelFamily<T>,
    prepared: &[Prepared<T>],
    raster: &Raster<T>,
    bbox: BBox<T>,
    lo: usize,
    hi: usize,
    dist_tol: T,
    opts: &NestingOptions<T>,
) -> [Vec<NestingWitness<T>>; 3] {
    let (lower, upper) = (&phi.systems[lo], &phi.systems[hi]);
    let (pl, pu) = (&prepared[lo], &prepared[hi]);
    let thresholds = vec![phi.thresholds[lo], phi.thresholds[hi]];
    let witness = |point, measure, detail: String| NestingWitness { slabs: vec![lo, hi], thresholds: thresholds.clone(), point, measure, detail };

    let contact = classify_contact(lower, upper, dist_tol, opts.angle_tol);
    let w_i: Vec<_> = if contact.classification == ContactKind::Crossing {
        contact
            .crossings()
            .map(|c| witness(Some(c.point), c.angle, format!("curve {} of the lower level crosses curve {} of the upper level", c.curves.0, c.curves.1)))
            .collect()
    } else {
        Vec::new()
    };

    let mut w_ii = Vec::new();
    let excess = pu.interior.and_not(&pl.interior).and_not(&pl.band.or(&pu.band));
    let frac = raster.cell_area() * T::of_usize(excess.count()) / bbox.area();
    if frac > opts.area_frac {
        let k = excess.data.iter().position(|&b| b).expect("nonempty");
        w_ii.push(witness(
            Some(raster.center(k % raster.nx, k / raster.nx)),
            frac,
            format!("upper interior exceeds lower interior on {:.3}% of the box", frac.as_f64() * 100.0),
        ));
    }
    for (ci, curve) in lower.curves().iter().enumerate() {
        let (f, p) = bad_fraction(curve, |p| upper.interior_membership_with_tol(p, dist_tol).unwrap_or(false));
        if f > opts.escape_frac {
            w_ii.push(witness(p, f, format!("{:.2}% of lower curve {ci} lies inside the upper interior", f.as_f64() * 100.0)));
        }
    }

    let mut w_iii = Vec::new();
    for (ci, curve) in upper.curves().iter().enumerate() {
        let (f, p) = bad_fraction(curve, |p| {
            let inside = raster.cell_of(p).is_some_and(|(i, j)| pl.closure.get(i, j));
            !inside && pl.index.nearest_within(p, dist_tol).is_none()
        });
        if f > opts.escape_frac {
            w_iii.push(witness(
                p,
                f,
                format!("{:.2}% of upper curve {ci} leaves the closed lower interior off the lower trace", f.as_f64() * 100.0),
            ));
        }
    }
    [w_i, w_ii, w_iii]
}

/// Audits nesting conditions (i)-(iii) over consecutive slabs and a sample
/// of long-range pairs. A failure on a single slab boundary fails the
/// family; the witness records where.
pub fn check_conditions<T: Real>(phi: &LevelFamily<T>, opts: &NestingOptions<T>) -> NestingVerdict<T> {
    let dist_tol = opts.dist_tol.unwrap_or_else(|| phi.default_dist_tol());
    run_conditions(phi, opts, audit_box(phi, None, dist_tol), dist_tol)
}

/// [`check_conditions`] plus, at every slab midpoint `t`, agreement of the
/// interior with `{u > t}` on grid nodes and coverage of the extracted level
/// line by the family's trace.
pub fn check_membership<T: Real>(phi: &LevelFamily<T>, u: &GridFunction<T>, opts: &NestingOptions<T>) -> Result<NestingVerdict<T>> {
    let (umin, umax) = (u.min(), u.max());
    if let Some(&t) = phi.thresholds.iter().find(|&&t| t < umin || t > umax) {
        return Err(Error::invalid("check_membership", format!("threshold {t} outside the range [{umin}, {umax}] of u")));
    }
    let dist_tol = opts.dist_tol.unwrap_or_else(|| phi.default_dist_tol());
    let mut verdict = run_conditions(phi, opts, audit_box(phi, Some(u.bbox()), dist_tol), dist_tol);

    let h = u.spacing();
    let cover_tol = dist_tol.max(h * T::lit(1.5));
    let half = Point2::new(h * T::half(), h * T::half());
    let nodes = Raster::new(BBox::new(u.origin() - half, u.node(u.rows() - 1, u.cols() - 1) + half), u.cols(), u.rows());
    let domain = u.bbox().area();
    let per_slab = (0..phi.len())
        .into_par_iter()
        .map(|j| {
            let t = phi.slab_midpoint(j);
            let system = &phi.systems[j];
            let extracted = extract_level_set(u, t)?.system;
            let slabs = vec![j];
            let mut a = Vec::new();
            let mut super_level = Mask::new(u.cols(), u.rows());
            for r in 0..u.rows() {
                for c in 0..u.cols() {
                    super_level.set(c, r, u.at(r, c) > t);
                }
            }
            // Node classification is only ambiguous within a cell or so of
            // either boundary, independently of the curves' sampling.
            let band = trace_band_mask(&system.union(&extracted), &nodes, h * T::lit(1.5));
            let diff = interior_mask(system, &nodes).xor(&super_level).and_not(&band);
            let frac = u.cell_area() * T::of_usize(diff.count()) / domain;
            if frac > opts.area_frac {
                let k = diff.data.iter().position(|&b| b).expect("nonempty");
                a.push(NestingWitness {
                    slabs: slabs.clone(),
                    thresholds: vec![t],
                    point: Some(u.node(k / u.cols(), k % u.cols())),
                    measure: frac,
                    detail: format!("interior and superlevel set differ on {:.3}% of the grid", frac.as_f64() * 100.0),
                });
            }
            let mut b = Vec::new();
            let index = system.segment_index(cover_tol * T::two());
            let covered = !system.is_empty();
            for (ci, curve) in extracted.curves().iter().enumerate() {
                let (f, p) = bad_fraction(curve, |p| !covered || index.nearest_within(p, cover_tol).is_none());
                if T::one() - f < opts.cover_frac {
                    b.push(NestingWitness {
                        slabs: slabs.clone(),
                        thresholds: vec![t],
                        point: p,
                        measure: f,
                        detail: format!("{:.2}% of level line {ci} is off the family's trace", f.as_f64() * 100.0),
                    });
                }
            }
            Ok((a, b))
        })
        .collect::<Result<Vec<_>>>()?;
    let (a, b): (Vec<_>, Vec<_>) = per_slab.into_iter().unzip();
    verdict.level_sets = Some(ConditionOutcome::from_witnesses(a.concat()));
    verdict.boundary_cover = Some(ConditionOutcome::from_witnesses(b.concat()));
    Ok(verdict.finish())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct CandidateOutcome<T> {
    pub index: usize,
    pub verdict: NestingVerdict<T>,
    pub energy: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct CandidateRanking<T> {
    /// Members, by increasing `G`.
    pub ranked: Vec<CandidateOutcome<T>>,
    pub rejected: Vec<CandidateOutcome<T>>,
}

impl<T: Real> CandidateRanking<T> {
    pub fn best(&self) -> &CandidateOutcome<T> {
        &self.ranked[0]
    }
}

/// Keeps the candidates that pass [`check_membership`] and ranks them by `G`.
pub fn compare_candidates<T: Real>(
    candidates: &[LevelFamily<T>],
    u: &GridFunction<T>,
    params: &ElasticaParams<T>,
    opts: &NestingOptions<T>,
) -> Result<CandidateRanking<T>> {
    if candidates.is_empty() {
        return Err(Error::invalid("compare_candidates", "no candidates given"));
    }
    let outcomes = candidates
        .iter()
        .enumerate()
        .map(|(index, phi)| {
            let verdict = check_membership(phi, u, opts)?;
            let energy = family_energy(phi, params)?.total;
            Ok(CandidateOutcome { index, verdict, energy })
        })
        .collect::<Result<Vec<_>>>()?;
    let (mut ranked, rejected): (Vec<_>, Vec<_>) = outcomes.into_iter().partition(|o| o.verdict.is_member);
    if ranked.is_empty() {
        return Err(Error::NoValidCandidate { count: candidates.len() });
    }
    ranked.sort_by(|a, b| a.energy.partial_cmp(&b.energy).expect("finite energy").then(a.index.cmp(&b.index)));
    Ok(CandidateRanking { ranked, rejected })
}

/// Means of a tabulated profile over the dyadic intervals
/// `[k 2^-N, (k + 1) 2^-N)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct DyadicAverages<T> {
    pub depth: u32,
    pub values: BTreeMap<i64, T>,
}

impl<T: Real> DyadicAverages<T> {
    pub fn interval(&self, k: i64) -> (T, T) {
        let w = T::lit((-(self.depth as f64)).exp2());
        (T::lit(k as f64) * w, T::lit((k + 1) as f64) * w)
    }

    /// Value of the piecewise-constant average at `t` (0 off the support).
    pub fn at(&self, t: T) -> T {
        let k = (t * T::lit((self.depth as f64).exp2())).floor().to_i64().unwrap_or(i64::MIN);
        self.values.get(&k).copied().unwrap_or_else(T::zero)
    }

    /// `sum_k 2^-N f^N_k`.
    pub fn mass(&self) -> T {
        ordered_sum(self.values.values().copied()) * T::lit((-(self.depth as f64)).exp2())
    }
}

/// Integral of the piecewise-linear interpolant of `samples` over
/// `(-inf, x]`, zero outside the tabulated support.
fn cumulative<T: Real>(samples: &[(T, T)], prefix: &[T], x: T) -> T {
    let n = samples.len();
    if x <= samples[0].0 {
        return T::zero();
    }
    if x >= samples[n - 1].0 {
        return prefix[n - 1];
    }
    let i = samples.partition_point(|s| s.0 <= x) - 1;
    let (t0, v0) = samples[i];
    let (t1, v1) = samples[i + 1];
    let s = (x - t0) / (t1 - t0);
    let vx = v0 + (v1 - v0) * s;
    prefix[i] + (v0 + vx) * T::half() * (x - t0)
}

/// `f^N(t) = 2^N * integral over I_{N,k} of the profile`, with the profile
/// integrated exactly as a piecewise-linear interpolant of `samples`
/// (sorted by `t`, nonnegative values).
pub fn dyadic_average<T: Real>(samples: &[(T, T)], depth: u32) -> Result<DyadicAverages<T>> {
    let op = "dyadic_average";
    if depth > 20 {
        return Err(Error::invalid(op, format!("depth {depth} exceeds 20")));
    }
    if samples.len() < 2 {
        return Err(Error::invalid(op, "need at least two samples"));
    }
    if samples.windows(2).any(|w| !(w[0].0 < w[1].0)) {
        return Err(Error::invalid(op, "sample abscissae must be strictly increasing"));
    }
    if let Some(s) = samples.iter().find(|s| !(s.1 >= T::zero()) || !s.1.is_finite()) {
        return Err(Error::invalid(op, format!("negative or non-finite value {} at t = {}", s.1, s.0)));
    }
    let mut prefix = vec![T::zero(); samples.len()];
    for i in 1..samples.len() {
        let (t0, v0) = samples[i - 1];
        let (t1, v1) = samples[i];
        prefix[i] = prefix[i - 1] + (v0 + v1) * T::half() * (t1 - t0);
    }
    let scale = T::lit((depth as f64).exp2());
    let k0 = (samples[0].0 * scale).floor().to_i64().unwrap_or(0);
    let k1 = (samples[samples.len() - 1].0 * scale).ceil().to_i64().unwrap_or(0);
    let values = (k0..k1)
        .map(|k| {
            let a = T::lit(k as f64) / scale;
            let b = T::lit((k + 1) as f64) / scale;
            let v = (cumulative(samples, &prefix, b) - cumulative(samples, &prefix, a)) * scale;
            (k, v.max(T::zero()))
        })
        .collect();
    Ok(DyadicAverages { depth, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Curve;
    use crate::smoothing::{build_smooth_indicator, CutoffProfile};
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    type P = Point2<f64>;

    fn circle(x: f64, y: f64, r: f64) -> CurveSystem<f64> {
        CurveSystem::single(Curve::circle(P::new(x, y), r, 256, false).unwrap())
    }

    #[test]
    fn constant_family_passes_and_has_energy_c_w() {
        let phi = LevelFamily::constant(circle(0.0, 0.0, 1.0), 0.0, 1.5).unwrap();
        let v = check_conditions(&phi, &NestingOptions::default());
        assert!(v.is_member && v.pairs.is_empty());
        let g = family_energy(&phi, &ElasticaParams::standard()).unwrap().total;
        assert!((g - 1.5 * 4.0 * PI).abs() < 1e-2);
        let empty = LevelFamily::<f64>::new((0.0, 1.0), vec![], vec![]).unwrap();
        assert_eq!(family_energy(&empty, &ElasticaParams::standard()).unwrap().total, 0.0);
    }

    #[test]
    fn two_slab_energy() {
        let phi = LevelFamily::new((0.0, 2.0), vec![0.0, 1.0], vec![circle(0.0, 0.0, 2.0), circle(0.0, 0.0, 1.0)]).unwrap();
        let g = family_energy(&phi, &ElasticaParams::standard()).unwrap().total;
        let exact = TAU * 2.0 * (1.0 + 0.25) + TAU * 2.0;
        assert!((g - exact).abs() < 1e-2, "{g} vs {exact}");
        let v = check_conditions(&phi, &NestingOptions::default());
        assert!(v.is_member, "{:?}", v.failures());
        // Reversed order: the larger interior sits above the smaller.
        let bad = LevelFamily::new((0.0, 2.0), vec![0.0, 1.0], vec![circle(0.0, 0.0, 1.0), circle(0.0, 0.0, 2.0)]).unwrap();
        let v = check_conditions(&bad, &NestingOptions::default());
        assert!(!v.condition_ii.pass && v.condition_i.pass);
    }

    #[test]
    fn crossing_levels_fail_condition_i() {
        let e = |angle: f64| CurveSystem::single(Curve::ellipse(P::zero(), 2.0, 1.0, 400).unwrap().rotated(angle).unwrap());
        let phi = LevelFamily::new((0.0, 2.0), vec![0.0, 1.0], vec![e(0.0), e(PI / 2.0)]).unwrap();
        let v = check_conditions(&phi, &NestingOptions::default());
        assert!(!v.condition_i.pass);
        assert_eq!(v.condition_i.witnesses.len(), 4);
    }

    #[test]
    fn json_round_trip() {
        let phi = LevelFamily::new((0.0, 2.0), vec![0.0, 1.0], vec![circle(0.0, 0.0, 2.0), circle(0.0, 0.0, 1.0)]).unwrap();
        let s = serde_json::to_string(&phi).unwrap();
        assert!(s.starts_with(r#"{"format":1,"range":[0.0,2.0],"slabs":[{"t":0.0,"system""#));
        let back: LevelFamily<f64> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, phi);
        assert!(serde_json::from_str::<LevelFamily<f64>>(r#"{"range":[0,1],"slabs":[{"t":0.5,"system":{"curves":[]}},{"t":0.2,"system":{"curves":[]}}]}"#).is_err());
    }

    #[test]
    fn split_is_additive() {
        let phi = LevelFamily::new(
            (0.0, 3.0),
            vec![0.0, 1.0, 2.0],
            vec![circle(0.0, 0.0, 2.0), circle(0.0, 0.0, 1.5), circle(0.0, 0.0, 1.0)],
        )
        .unwrap();
        let params = ElasticaParams::standard();
        let g = family_energy(&phi, &params).unwrap().total;
        for t in [0.5, 1.0, 2.7] {
            let (a, b) = phi.split_at(t).unwrap();
            let s = family_energy(&a, &params).unwrap().total + family_energy(&b, &params).unwrap().total;
            assert!((s - g).abs() < 1e-12, "split at {t}: {s} vs {g}");
        }
        assert_eq!(phi.at(1.5), Some(&phi.systems()[1]));
        assert_eq!(phi.at(3.0), None);
    }

    fn smooth_disk() -> GridFunction<f64> {
        let grid = GridFunction::template(BBox::new(P::new(-2.0, -2.0), P::new(2.0, 2.0)), 200).unwrap();
        let b = Curve::circle(P::zero(), 1.0, 512, false).unwrap();
        build_smooth_indicator(&b, &CutoffProfile::new(0.4, 1.0).unwrap(), &grid).unwrap()
    }

    #[test]
    fn self_covering_family_is_member() {
        let u = smooth_disk();
        let phi = LevelFamily::from_levels(&u, 8).unwrap();
        let v = check_membership(&phi, &u, &NestingOptions::default()).unwrap();
        assert!(v.is_member, "{:?}", v.failures());
        assert_eq!(v.pairs.len(), 7 + 3);
    }

    #[test]
    fn shrunk_family_fails_level_sets() {
        let u = smooth_disk();
        let phi = LevelFamily::from_levels(&u, 8).unwrap();
        let shrunk = LevelFamily::new(
            phi.range(),
            phi.thresholds().to_vec(),
            phi.systems().iter().map(|s| s.map_curves(|c| c.scaled(0.9)).unwrap()).collect(),
        )
        .unwrap();
        let v = check_membership(&shrunk, &u, &NestingOptions::default()).unwrap();
        assert!(v.condition_i.pass && v.condition_ii.pass);
        assert!(!v.level_sets.as_ref().unwrap().pass);
        assert!(!v.is_member);
    }

    #[test]
    fn redundant_curve_ranks_second() {
        let u = smooth_disk();
        let phi = LevelFamily::from_levels(&u, 8).unwrap();
        let extra = CurveSystem::single(Curve::circle(P::new(0.1, 0.0), 0.05, 64, false).unwrap());
        let padded = LevelFamily::new(
            phi.range(),
            phi.thresholds().to_vec(),
            // A doubled small loop leaves every interior unchanged.
            phi.systems().iter().map(|s| s.union(&extra.with_multiplicities(vec![2]).unwrap())).collect(),
        )
        .unwrap();
        let params = ElasticaParams::standard();
        let r = compare_candidates(&[padded, phi], &u, &params, &NestingOptions::default()).unwrap();
        assert_eq!(r.ranked.len(), 2);
        assert_eq!(r.best().index, 1);
        let crossing = LevelFamily::new(
            (0.0, 1.0),
            vec![0.0, 0.5],
            vec![
                CurveSystem::single(Curve::ellipse(P::zero(), 1.2, 0.6, 300).unwrap()),
                CurveSystem::single(Curve::ellipse(P::zero(), 1.2, 0.6, 300).unwrap().rotated(PI / 2.0).unwrap()),
            ],
        )
        .unwrap();
        assert!(matches!(
            compare_candidates(&[crossing], &u, &params, &NestingOptions::default()),
            Err(Error::NoValidCandidate { count: 1 })
        ));
    }

    #[test]
    fn audit_pairs_are_seeded() {
        let a = audit_pairs(16, 7);
        assert_eq!(a, audit_pairs(16, 7));
        assert_eq!(a.len(), 15 + 4);
        assert!(audit_pairs(1, 0).is_empty());
        assert_eq!(audit_pairs(2, 0), vec![(0, 1)]);
    }

    #[test]
    fn dyadic_examples() {
        let flat: Vec<(f64, f64)> = (0..=100).map(|i| (i as f64 / 100.0, 5.0)).collect();
        let d = dyadic_average(&flat, 3).unwrap();
        assert_eq!(d.values.len(), 8);
        assert!(d.values.values().all(|&v| (v - 5.0).abs() < 1e-12));
        let ramp: [(f64, f64); 2] = [(0.0, 0.0), (1.0, 1.0)];
        let d = dyadic_average(&ramp, 1).unwrap();
        assert!((d.values[&0] - 0.25).abs() < 1e-15 && (d.values[&1] - 0.75).abs() < 1e-15);
        assert!((d.at(0.3) - 0.25).abs() < 1e-15);
        assert!(dyadic_average(&[(0.0, -1.0), (1.0, 0.0)], 1).is_err());
    }

    proptest! {
        #[test]
        fn martingale_and_mass(vals in prop::collection::vec(0.0f64..10.0, 3..60), start in -1.0f64..1.0, span in 0.1f64..3.0) {
            let n = vals.len();
            let samples: Vec<(f64, f64)> = vals.iter().enumerate().map(|(i, &v)| (start + span * i as f64 / (n - 1) as f64, v)).collect();
            let total: f64 = samples.windows(2).map(|w| (w[0].1 + w[1].1) * 0.5 * (w[1].0 - w[0].0)).sum();
            for depth in 0..=6 {
                let coarse = dyadic_average(&samples, depth).unwrap();
                let fine = dyadic_average(&samples, depth + 1).unwrap();
                for (&k, &v) in &coarse.values {
                    let kids = fine.values.get(&(2 * k)).copied().unwrap_or(0.0) + fine.values.get(&(2 * k + 1)).copied().unwrap_or(0.0);
                    prop_assert!((v - 0.5 * kids).abs() <= 1e-12 * (1.0 + v.abs()));
                }
                prop_assert!(coarse.mass() <= total + 1e-9);
            }
        }
    }
}
