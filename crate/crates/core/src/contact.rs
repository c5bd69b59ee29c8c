//! Contact classification between curve systems: disjoint, tangential
//! contact, or crossing.
//!
//! Segment pairs closer than `dist_tol` are contacts. Contacts whose segment
//! indices are neighbours on both sides are merged into maximal runs (a
//! shared arc is one run, not many). Each run is judged by its closest pair:
//! the run is a crossing when that pair meets at an angle above `angle_tol`,
//! or when the run contains a proper intersection steeper than `angle_tol`.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::geom::{line_angle, proper_intersection, segment_distance, BBox, Point2, SegmentIndex, SegmentRef};
use crate::scalar::Real;
use crate::system::CurveSystem;

/// Ordered from best to worst.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContactKind {
    Disjoint,
    TangentialContact,
    Crossing,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct ContactWitness<T> {
    pub point: Point2<T>,
    /// Curve index in the first and second system.
    pub curves: (usize, usize),
    /// Unoriented angle between the closest segments, in radians.
    pub angle: T,
    pub distance: T,
    pub kind: ContactKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct ContactReport<T> {
    pub classification: ContactKind,
    /// One witness per maximal run of contacts.
    pub witnesses: Vec<ContactWitness<T>>,
}

impl<T: Real> ContactReport<T> {
    pub fn crossings(&self) -> impl Iterator<Item = &ContactWitness<T>> {
        self.witnesses.iter().filter(|w| w.kind == ContactKind::Crossing)
    }
}

#[derive(Clone, Copy, Debug)]
struct Contact<T> {
    a: SegmentRef,
    b: SegmentRef,
    distance: T,
    angle: T,
    point: Point2<T>,
    proper_steep: bool,
}

/// Classifies contacts between `a` and `b`. When both arguments are the same
/// object, self-contacts are examined instead (see [`classify_self_contact`]).
pub fn classify_contact<T: Real>(
    a: &CurveSystem<T>,
    b: &CurveSystem<T>,
    dist_tol: T,
    angle_tol: T,
) -> ContactReport<T> {
    if std::ptr::eq(a, b) {
        return classify_self_contact(a, dist_tol, angle_tol);
    }
    let contacts = collect_contacts(a, b, dist_tol, angle_tol, None);
    summarize(contacts, a, b, angle_tol)
}

/// Self-contacts of one system. Pairs on the same curve whose arc-length gap
/// is below `2 * dist_tol` are ignored, since neighbouring samples are always
/// close.
pub fn classify_self_contact<T: Real>(s: &CurveSystem<T>, dist_tol: T, angle_tol: T) -> ContactReport<T> {
    let arclen: Vec<Vec<T>> = s
        .curves()
        .iter()
        .map(|c| {
            let mut acc = T::zero();
            let mut v = Vec::with_capacity(c.len() + 1);
            v.push(acc);
            for l in c.segment_lengths() {
                acc = acc + l;
                v.push(acc);
            }
            v
        })
        .collect();
    let window = dist_tol * T::two();
    let filter = |ra: SegmentRef, rb: SegmentRef| -> bool {
        if ra.curve != rb.curve {
            return ra.curve < rb.curve;
        }
        if ra.index >= rb.index {
            return false;
        }
        let cum = &arclen[ra.curve];
        let total = *cum.last().expect("non-empty");
        // Gap between the segments along the curve, the shorter way round.
        let forward = cum[rb.index] - cum[ra.index + 1];
        let backward = total - cum[rb.index + 1] + cum[ra.index];
        forward.min(backward) > window
    };
    let contacts = collect_contacts(s, s, dist_tol, angle_tol, Some(&filter));
    summarize(contacts, s, s, angle_tol)
}

type PairFilter<'a> = &'a (dyn Fn(SegmentRef, SegmentRef) -> bool + Sync);

fn collect_contacts<T: Real>(
    a: &CurveSystem<T>,
    b: &CurveSystem<T>,
    dist_tol: T,
    angle_tol: T,
    filter: Option<PairFilter<'_>>,
) -> Vec<Contact<T>> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let cell = (b.median_spacing() * T::two()).max(dist_tol);
    let index: SegmentIndex<T> = b.segment_index(cell);
    let per_curve: Vec<Vec<Contact<T>>> = a
        .curves()
        .par_iter()
        .enumerate()
        .map(|(ci, c)| {
            let mut out = Vec::new();
            for i in 0..c.len() {
                let (a0, a1) = c.segment(i);
                let ra = SegmentRef { curve: ci, index: i };
                let q = BBox::from_points([&a0, &a1]).expect("two points").expanded(dist_tol);
                for k in index.candidates(q) {
                    let (rb, b0, b1) = index.segments()[k];
                    if let Some(f) = filter {
                        if !f(ra, rb) {
                            continue;
                        }
                    }
                    let (d, point) = segment_distance(a0, a1, b0, b1);
                    if d >= dist_tol {
                        continue;
                    }
                    let angle = line_angle(a1 - a0, b1 - b0);
                    let proper_steep = angle > angle_tol && proper_intersection(a0, a1, b0, b1).is_some();
                    out.push(Contact { a: ra, b: rb, distance: d, angle, point, proper_steep });
                }
            }
            out
        })
        .collect();
    per_curve.concat()
}

fn summarize<T: Real>(
    contacts: Vec<Contact<T>>,
    a: &CurveSystem<T>,
    b: &CurveSystem<T>,
    angle_tol: T,
) -> ContactReport<T> {
    if contacts.is_empty() {
        return ContactReport { classification: ContactKind::Disjoint, witnesses: Vec::new() };
    }
    let key = |c: &Contact<T>| (c.a.curve, c.a.index, c.b.curve, c.b.index);
    let lookup: HashMap<(usize, usize, usize, usize), usize> =
        contacts.iter().enumerate().map(|(i, c)| (key(c), i)).collect();
    let mut uf = UnionFind::new(contacts.len());
    for (i, c) in contacts.iter().enumerate() {
        let na = a.curves()[c.a.curve].len();
        let nb = b.curves()[c.b.curve].len();
        for da in [na - 1, 0, 1] {
            for db in [nb - 1, 0, 1] {
                let k = (c.a.curve, (c.a.index + da) % na, c.b.curve, (c.b.index + db) % nb);
                if let Some(&j) = lookup.get(&k) {
                    uf.union(i, j);
                }
            }
        }
    }
    // Group by root, keeping runs in order of their first contact.
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot: HashMap<usize, usize> = HashMap::new();
    for i in 0..contacts.len() {
        let r = uf.find(i);
        let g = *slot.entry(r).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(i);
    }
    let mut witnesses = Vec::with_capacity(groups.len());
    for g in groups {
        let best = g
            .iter()
            .copied()
            .min_by(|&x, &y| {
                let (cx, cy) = (&contacts[x], &contacts[y]);
                cx.distance
                    .partial_cmp(&cy.distance)
                    .expect("finite")
                    .then(cx.angle.partial_cmp(&cy.angle).expect("finite"))
            })
            .expect("non-empty run");
        let w = &contacts[best];
        let steep = g.iter().find(|&&i| contacts[i].proper_steep).map(|&i| &contacts[i]);
        let (kind, src) = if w.angle > angle_tol {
            (ContactKind::Crossing, w)
        } else if let Some(s) = steep {
            (ContactKind::Crossing, s)
        } else {
            (ContactKind::TangentialContact, w)
        };
        witnesses.push(ContactWitness {
            point: src.point,
            curves: (src.a.curve, src.b.curve),
            angle: src.angle,
            distance: src.distance,
            kind,
        });
    }
    let classification = witnesses.iter().map(|w| w.kind).max().unwrap_or(ContactKind::Disjoint);
    ContactReport { classification, witnesses }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, x: usize, y: usize) {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx != ry {
            // Smaller index becomes the root so grouping is deterministic.
            let (lo, hi) = if rx < ry { (rx, ry) } else { (ry, rx) };
            self.parent[hi] = lo;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Curve;

    type P = Point2<f64>;

    fn disk(cx: f64, r: f64) -> CurveSystem<f64> {
        CurveSystem::single(Curve::circle(P::new(cx, 0.0), r, 1024, false).unwrap())
    }

    #[test]
    fn concentric_circles_are_disjoint() {
        let r = classify_contact(&disk(0.0, 1.0), &disk(0.0, 2.0), 1e-3, 0.1);
        assert_eq!(r.classification, ContactKind::Disjoint);
    }

    #[test]
    fn external_tangency_has_one_witness() {
        let (a, b) = (disk(-1.0, 1.0), disk(1.0, 1.0));
        let r = classify_contact(&a, &b, 1e-3, 0.1);
        assert_eq!(r.classification, ContactKind::TangentialContact);
        assert_eq!(r.witnesses.len(), 1);
        let spacing = a.median_spacing();
        assert!(r.witnesses[0].point.dist(P::zero()) <= 2.0 * spacing);
    }

    #[test]
    fn lens_is_crossing_and_symmetric() {
        let (a, b) = (disk(0.0, 1.0), disk(1.0, 1.0));
        let r = classify_contact(&a, &b, 1e-3, 0.1);
        assert_eq!(r.classification, ContactKind::Crossing);
        assert_eq!(r.crossings().count(), 2);
        for w in r.crossings() {
            // Unoriented angle between tangents at the lens corners is pi/3.
            assert!((w.angle - std::f64::consts::FRAC_PI_3).abs() < 0.02);
        }
        assert_eq!(classify_contact(&b, &a, 1e-3, 0.1).classification, ContactKind::Crossing);
    }

    #[test]
    fn identical_systems_touch_tangentially() {
        let a = disk(0.0, 1.0);
        let b = a.clone();
        let r = classify_contact(&a, &b, a.default_dist_tol(), 0.15);
        assert_eq!(r.classification, ContactKind::TangentialContact);
        assert_eq!(r.witnesses.len(), 1);
    }

    #[test]
    fn simple_circle_has_no_self_contact() {
        let a = disk(0.0, 1.0);
        let r = classify_contact(&a, &a, a.default_dist_tol(), 0.15);
        assert_eq!(r.classification, ContactKind::Disjoint);
    }

    #[test]
    fn figure_eight_self_crosses() {
        let c = Curve::from_fn(800, |t: f64| P::new(t.sin(), (2.0 * t).sin() * 0.5)).unwrap();
        let s = CurveSystem::single(c);
        let r = classify_contact(&s, &s, s.default_dist_tol(), 0.15);
        assert_eq!(r.classification, ContactKind::Crossing);
    }
}
