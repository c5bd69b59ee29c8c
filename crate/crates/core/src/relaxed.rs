//! Relaxed energies of sets with cusps (bridged by doubled segments), the
//! level-wise lower bound for the relaxed functional, and energies of curves
//! clipped to a polygonal domain.

use serde::{Deserialize, Serialize};

use crate::curve::{menger_curvature, Curve, ElasticaParams};
use crate::error::{Error, Result};
use crate::geom::{line_angle, point_segment_distance, proper_intersection, ray_cast_parity, signed_area, BBox, Point2};
use crate::grid::GridFunction;
use crate::report::{EnergyReport, LevelEnergy};
use crate::scalar::{ordered_sum, Real};
use crate::system::CurveSystem;

/// A set whose boundary is a union of smooth open arcs meeting at cusps,
/// together with the cusp pairs to be joined by doubled straight bridges.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct CuspedSet<T> {
    pub arcs: Vec<Vec<Point2<T>>>,
    #[serde(default)]
    pub cusp_pairs: Vec<(Point2<T>, Point2<T>)>,
}

impl<T: Real> CuspedSet<T> {
    pub fn new(arcs: Vec<Vec<Point2<T>>>, cusp_pairs: Vec<(Point2<T>, Point2<T>)>) -> Result<Self> {
        let s = CuspedSet { arcs, cusp_pairs };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let op = "cusped_set";
        if self.arcs.is_empty() {
            return Err(Error::invalid(op, "no arcs"));
        }
        for (i, a) in self.arcs.iter().enumerate() {
            if a.len() < 3 {
                return Err(Error::invalid(op, format!("arc {i} has {} points, need at least 3", a.len())));
            }
            if a.iter().any(|p| !p.is_finite()) {
                return Err(Error::invalid(op, format!("arc {i} has a non-finite point")));
            }
            if let Some(j) = a.windows(2).position(|w| w[0] == w[1]) {
                return Err(Error::degenerate(op, format!("arc {i} repeats point {j}")));
            }
        }
        let tol = self.match_tol();
        for (k, (a, b)) in self.cusp_pairs.iter().enumerate() {
            for p in [a, b] {
                if self.ends().all(|(_, q, _)| q.dist(*p) > tol) {
                    return Err(Error::invalid(op, format!("cusp pair {k}: ({}, {}) is not an arc endpoint", p.x, p.y)));
                }
            }
        }
        Ok(())
    }

    pub fn bbox(&self) -> BBox<T> {
        BBox::from_points(self.arcs.iter().flatten()).expect("nonempty arcs")
    }

    /// Endpoint coincidence tolerance: a tenth of the smallest sample spacing.
    fn match_tol(&self) -> T {
        let min_seg = self
            .arcs
            .iter()
            .flat_map(|a| a.windows(2).map(|w| w[0].dist(w[1])))
            .fold(T::infinity(), T::min);
        min_seg * T::lit(0.1)
    }

    /// `(arc, endpoint, outgoing unit tangent)` for both ends of every arc.
    fn ends(&self) -> impl Iterator<Item = (usize, Point2<T>, Point2<T>)> + '_ {
        self.arcs.iter().enumerate().flat_map(|(i, a)| {
            let n = a.len();
            [(i, a[0], (a[1] - a[0]).normalized()), (i, a[n - 1], (a[n - 2] - a[n - 1]).normalized())]
        })
    }

    /// Points where two arc ends meet leaving in the same direction.
    pub fn cusps(&self, angle_tol: T) -> Vec<Point2<T>> {
        let tol = self.match_tol();
        let ends: Vec<_> = self.ends().collect();
        let mut out: Vec<Point2<T>> = Vec::new();
        for (x, &(_, p, u)) in ends.iter().enumerate() {
            for &(_, q, v) in &ends[x + 1..] {
                if p.dist(q) <= tol && u.dot(v) > T::zero() && line_angle(u, v) <= angle_tol && out.iter().all(|c| c.dist(p) > tol) {
                    out.push(p);
                }
            }
        }
        out
    }
}

/// Energy of an open polyline: three-point curvature at interior vertices,
/// the neighbouring value at each end, dual-length weights.
pub fn open_arc_parts<T: Real>(pts: &[Point2<T>], p: T) -> Result<(T, T)> {
    let n = pts.len();
    if n < 3 {
        return Err(Error::degenerate("open_arc_energy", format!("{n} points, need at least 3")));
    }
    let seg: Vec<T> = pts.windows(2).map(|w| w[0].dist(w[1])).collect();
    let mut k = Vec::with_capacity(n);
    k.push(T::zero());
    for j in 1..n - 1 {
        k.push(menger_curvature(pts[j - 1], pts[j], pts[j + 1]).ok_or_else(|| {
            Error::degenerate("open_arc_energy", format!("coincident samples around vertex {j}"))
        })?);
    }
    k.push(k[n - 2]);
    k[0] = k[1];
    let w = |j: usize| {
        let l = if j == 0 { T::zero() } else { seg[j - 1] };
        let r = if j == n - 1 { T::zero() } else { seg[j] };
        (l + r) * T::half()
    };
    let length = ordered_sum(seg.iter().copied());
    let curv = ordered_sum((0..n).map(|j| k[j].abs().powf(p) * w(j)));
    Ok((length, curv))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct RelaxedEnergy<T> {
    /// One row per arc, then one per bridge (length counted twice).
    pub report: EnergyReport<T>,
    /// Cusps not joined by any bridge; the relaxed energy is infinite if any.
    pub unpaired_cusps: Vec<Point2<T>>,
    /// Arcs plus doubled bridges as closed curves, when the pieces chain
    /// into closed loops.
    pub system: Option<CurveSystem<T>>,
}

/// `alpha * length + beta * integral |k|^p` over the arcs, plus `2 alpha L`
/// for every bridged cusp pair at distance `L`.
pub fn relaxed_energy_cusped<T: Real>(set: &CuspedSet<T>, params: &ElasticaParams<T>) -> Result<RelaxedEnergy<T>> {
    params.validate()?;
    set.validate()?;
    for (k, &(a, b)) in set.cusp_pairs.iter().enumerate() {
        if a == b {
            continue;
        }
        let tol = set.match_tol();
        for (i, arc) in set.arcs.iter().enumerate() {
            if let Some(x) = arc.iter().find(|q| q.dist(a) > tol && q.dist(b) > tol && point_segment_distance(**q, a, b) <= tol) {
                return Err(Error::BridgeCrossing { pair: k, arc: i, x: x.x.as_f64(), y: x.y.as_f64() });
            }
            for w in arc.windows(2) {
                if let Some((s, _)) = proper_intersection(a, b, w[0], w[1]) {
                    let x = a.lerp(b, s);
                    return Err(Error::BridgeCrossing { pair: k, arc: i, x: x.x.as_f64(), y: x.y.as_f64() });
                }
            }
        }
    }
    let mut rows = Vec::new();
    for (i, arc) in set.arcs.iter().enumerate() {
        let (length, curv) = open_arc_parts(arc, params.p)?;
        let curvature_term = params.beta * curv;
        rows.push(LevelEnergy { level: i, t: T::zero(), weight: T::one(), length, curvature_term, energy: params.alpha * length + curvature_term });
    }
    for (k, &(a, b)) in set.cusp_pairs.iter().enumerate() {
        let length = a.dist(b) * T::two();
        rows.push(LevelEnergy {
            level: set.arcs.len() + k,
            t: T::zero(),
            weight: T::one(),
            length,
            curvature_term: T::zero(),
            energy: params.alpha * length,
        });
    }
    let tol = set.match_tol();
    let unpaired: Vec<Point2<T>> = set
        .cusps(T::lit(0.15))
        .into_iter()
        .filter(|c| set.cusp_pairs.iter().all(|(a, b)| a.dist(*c) > tol && b.dist(*c) > tol))
        .collect();
    let finite = ordered_sum(rows.iter().map(|r| r.energy));
    let total = if unpaired.is_empty() { finite } else { T::infinity() };
    let mut report = EnergyReport::new(rows, total);
    report.flag(
        "cusps_paired",
        unpaired.is_empty(),
        if unpaired.is_empty() { String::new() } else { format!("{} cusp(s) without a bridge, first at ({}, {})", unpaired.len(), unpaired[0].x, unpaired[0].y) },
    );
    let system = chain_loops(set);
    Ok(RelaxedEnergy { report, unpaired_cusps: unpaired, system })
}

/// Joins arcs and doubled bridges into closed curves by an Euler tour of
/// the endpoint graph, preferring at each node the edge that continues the
/// incoming direction most smoothly.
fn chain_loops<T: Real>(set: &CuspedSet<T>) -> Option<CurveSystem<T>> {
    let tol = set.match_tol();
    let mut nodes: Vec<Point2<T>> = Vec::new();
    let mut node_of = |p: Point2<T>| -> usize {
        if let Some(i) = nodes.iter().position(|q| q.dist(p) <= tol) {
            i
        } else {
            nodes.push(p);
            nodes.len() - 1
        }
    };
    let spacing = {
        let mut s: Vec<T> = set.arcs.iter().flat_map(|a| a.windows(2).map(|w| w[0].dist(w[1]))).collect();
        s.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        s[s.len() / 2]
    };
    // Edge polylines (first point at `ends.0`).
    let mut edges: Vec<(usize, usize, Vec<Point2<T>>)> = Vec::new();
    for arc in &set.arcs {
        let (a, b) = (node_of(arc[0]), node_of(arc[arc.len() - 1]));
        edges.push((a, b, arc.clone()));
    }
    for &(p, q) in &set.cusp_pairs {
        if p.dist(q) <= tol {
            continue;
        }
        let (a, b) = (node_of(p), node_of(q));
        let m = (p.dist(q) / spacing).ceil().to_usize().unwrap_or(1).max(2);
        let seg: Vec<Point2<T>> = (0..=m).map(|i| p.lerp(q, T::of_usize(i) / T::of_usize(m))).collect();
        edges.push((a, b, seg.clone()));
        edges.push((a, b, seg));
    }
    let mut degree = vec![0usize; nodes.len()];
    for &(a, b, _) in &edges {
        degree[a] += 1;
        degree[b] += 1;
    }
    if degree.iter().any(|d| d % 2 == 1) {
        return None;
    }
    let mut used = vec![false; edges.len()];
    let mut curves = Vec::new();
    while let Some(start) = used.iter().position(|u| !u) {
        let mut pts: Vec<Point2<T>> = Vec::new();
        let (mut node, mut e, mut forward) = (edges[start].0, start, true);
        let first_node = node;
        loop {
            used[e] = true;
            let mut poly = edges[e].2.clone();
            if !forward {
                poly.reverse();
            }
            pts.pop();
            pts.extend(poly);
            node = if forward { edges[e].1 } else { edges[e].0 };
            let n = pts.len();
            let dir = (pts[n - 1] - pts[n - 2]).normalized();
            let next = (0..edges.len())
                .filter(|&f| !used[f])
                .flat_map(|f| {
                    let mut v = Vec::new();
                    if edges[f].0 == node {
                        v.push((f, true, (edges[f].2[1] - edges[f].2[0]).normalized()));
                    }
                    if edges[f].1 == node {
                        let p = &edges[f].2;
                        v.push((f, false, (p[p.len() - 2] - p[p.len() - 1]).normalized()));
                    }
                    v
                })
                .max_by(|x, y| x.2.dot(dir).partial_cmp(&y.2.dot(dir)).expect("finite"));
            match next {
                Some((f, fw, _)) => {
                    e = f;
                    forward = fw;
                }
                None => break,
            }
        }
        if node != first_node {
            return None;
        }
        pts.pop();
        curves.push(Curve::new(pts).ok()?);
    }
    Some(CurveSystem::simple(curves))
}

/// `sum_j W_j * |slab_j|` where slab `j` spans the midpoints between
/// neighbouring levels, the outer slabs closing at `min u` and `max u`.
pub fn coarea_lower_bound<T: Real>(u: &GridFunction<T>, per_level: &[(T, T)]) -> Result<T> {
    let op = "coarea_lower_bound";
    let (lo, hi) = (u.min(), u.max());
    if per_level.is_empty() {
        return if hi > lo { Err(Error::invalid(op, "no levels supplied for a non-constant u")) } else { Ok(T::zero()) };
    }
    if per_level.windows(2).any(|w| !(w[0].0 < w[1].0)) {
        return Err(Error::invalid(op, "levels must be strictly increasing"));
    }
    if let Some(&(t, _)) = per_level.iter().find(|l| l.0 < lo || l.0 > hi) {
        return Err(Error::invalid(op, format!("level {t} outside the range [{lo}, {hi}] of u")));
    }
    if let Some(&(t, w)) = per_level.iter().find(|l| !(l.1 >= T::zero())) {
        return Err(Error::invalid(op, format!("negative energy {w} at level {t}")));
    }
    let n = per_level.len();
    let terms = (0..n).map(|j| {
        let a = if j == 0 { lo } else { (per_level[j - 1].0 + per_level[j].0) * T::half() };
        let b = if j == n - 1 { hi } else { (per_level[j].0 + per_level[j + 1].0) * T::half() };
        per_level[j].1 * (b - a)
    });
    Ok(ordered_sum(terms))
}

/// A simple polygon, as a list of vertices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct Polygon<T> {
    pub vertices: Vec<Point2<T>>,
}

impl<T: Real> Polygon<T> {
    pub fn new(vertices: Vec<Point2<T>>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::invalid("polygon", format!("{} vertices, need at least 3", vertices.len())));
        }
        if signed_area(&vertices) == T::zero() {
            return Err(Error::degenerate("polygon", "zero area"));
        }
        Ok(Polygon { vertices })
    }

    pub fn rectangle(b: BBox<T>) -> Self {
        Polygon { vertices: vec![b.min, Point2::new(b.max.x, b.min.y), b.max, Point2::new(b.min.x, b.max.y)] }
    }

    pub fn contains(&self, p: Point2<T>) -> bool {
        ray_cast_parity(p, &self.vertices)
    }

    fn edges(&self) -> impl Iterator<Item = (Point2<T>, Point2<T>)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// Parameter intervals of `[a, b]` lying inside the polygon.
    pub fn clip_segment(&self, a: Point2<T>, b: Point2<T>) -> Vec<(T, T)> {
        let d = b - a;
        let mut cuts = vec![T::zero(), T::one()];
        for (p, q) in self.edges() {
            let e = q - p;
            let den = d.cross(e);
            if den == T::zero() {
                continue;
            }
            let s = (p - a).cross(e) / den;
            let u = (p - a).cross(d) / den;
            if s > T::zero() && s < T::one() && u >= T::zero() && u <= T::one() {
                cuts.push(s);
            }
        }
        cuts.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
        let mut out: Vec<(T, T)> = Vec::new();
        for w in cuts.windows(2) {
            if w[1] <= w[0] {
                continue;
            }
            let mid = a + d * ((w[0] + w[1]) * T::half());
            if self.contains(mid) && self.edges().all(|(p, q)| point_segment_distance(mid, p, q) > T::zero()) {
                match out.last_mut() {
                    Some(last) if last.1 == w[0] => last.1 = w[1],
                    _ => out.push((w[0], w[1])),
                }
            }
        }
        out
    }
}

/// A maximal piece of a curve inside the domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct ClippedArc<T> {
    pub curve: usize,
    pub points: Vec<Point2<T>>,
    /// Entry and exit points on the domain boundary; `None` for a curve
    /// lying wholly inside.
    pub endpoints_on_boundary: Option<(Point2<T>, Point2<T>)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct ClipResult<T> {
    /// One row per curve (multiplicity included).
    pub report: EnergyReport<T>,
    pub arcs: Vec<ClippedArc<T>>,
}

/// Energy of the parts of `system` inside `omega`. Each vertex owns the
/// halves of its two adjacent segments and carries its curvature (computed
/// on the uncut curve) onto whatever part of those halves lies inside.
pub fn clip_energy<T: Real>(system: &CurveSystem<T>, omega: &Polygon<T>, params: &ElasticaParams<T>) -> Result<ClipResult<T>> {
    params.validate()?;
    let mut rows = Vec::new();
    let mut arcs = Vec::new();
    for (ci, (curve, m)) in system.iter().enumerate() {
        let k = crate::curve::curvature_samples(curve)?;
        let pts = curve.points();
        let n = pts.len();
        let mut length = T::zero();
        let mut curv = T::zero();
        // Pieces in traversal order for arc assembly.
        let mut pieces: Vec<(usize, T, T)> = Vec::new();
        for i in 0..n {
            let (a, b) = (pts[i], pts[(i + 1) % n]);
            let seg = a.dist(b);
            for (s0, s1) in omega.clip_segment(a, b) {
                pieces.push((i, s0, s1));
                let half = T::half();
                // Portion in the first half, owned by vertex i.
                let first = (s1.min(half) - s0).max(T::zero()) * seg;
                let second = (s1 - s0.max(half)).max(T::zero()) * seg;
                length = length + first + second;
                curv = curv + first * k[i].abs().powf(params.p) + second * k[(i + 1) % n].abs().powf(params.p);
            }
        }
        let mult = T::of_usize(m as usize);
        let curvature_term = params.beta * curv * mult;
        let length = length * mult;
        rows.push(LevelEnergy { level: ci, t: T::zero(), weight: T::one(), length, curvature_term, energy: params.alpha * length + curvature_term });
        arcs.extend(assemble_arcs(ci, pts, &pieces));
    }
    let total = ordered_sum(rows.iter().map(|r| r.energy));
    Ok(ClipResult { report: EnergyReport::new(rows, total), arcs })
}

fn assemble_arcs<T: Real>(ci: usize, pts: &[Point2<T>], pieces: &[(usize, T, T)]) -> Vec<ClippedArc<T>> {
    let n = pts.len();
    if pieces.is_empty() {
        return Vec::new();
    }
    if pieces.len() == n && pieces.iter().all(|&(_, s0, s1)| s0 == T::zero() && s1 == T::one()) {
        return vec![ClippedArc { curve: ci, points: pts.to_vec(), endpoints_on_boundary: None }];
    }
    let at = |i: usize, s: T| pts[i].lerp(pts[(i + 1) % n], s);
    let mut runs: Vec<Vec<Point2<T>>> = Vec::new();
    let mut bounds: Vec<(Point2<T>, Point2<T>)> = Vec::new();
    let mut prev: Option<(usize, T)> = None;
    for &(i, s0, s1) in pieces {
        let continues = matches!(prev, Some((pi, ps)) if ps == T::one() && s0 == T::zero() && (pi + 1) % n == i);
        if !continues {
            runs.push(vec![at(i, s0)]);
            bounds.push((at(i, s0), at(i, s0)));
        }
        let run = runs.last_mut().expect("run");
        run.push(at(i, s1));
        bounds.last_mut().expect("run").1 = at(i, s1);
        prev = Some((i, s1));
    }
    // Merge the wrap-around run (last piece ending at vertex 0 and first starting there).
    if runs.len() > 1 {
        let (fi, fs0, _) = pieces[0];
        let (li, _, ls1) = pieces[pieces.len() - 1];
        if fi == 0 && fs0 == T::zero() && li == n - 1 && ls1 == T::one() {
            let first = runs.remove(0);
            let fb = bounds.remove(0);
            let last = runs.last_mut().expect("run");
            last.extend(first.into_iter().skip(1));
            bounds.last_mut().expect("run").1 = fb.1;
        }
    }
    runs.into_iter()
        .zip(bounds)
        .map(|(points, b)| ClippedArc { curve: ci, points, endpoints_on_boundary: Some(b) })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::elastica_energy;
    use std::f64::consts::PI;

    type P = Point2<f64>;

    /// Unit-radius arc of opening `2 pi / 3` ending at `tip` with a
    /// horizontal tangent, bulging upwards on the side given by `side`.
    fn arc(tip: P, side: f64, n: usize) -> Vec<P> {
        let c = P::new(tip.x, tip.y + 1.0);
        (0..=n)
            .map(|i| {
                let a = -PI / 2.0 - side * (2.0 * PI / 3.0) * i as f64 / n as f64;
                P::new(c.x + a.cos(), c.y + a.sin())
            })
            .collect()
    }

    #[test]
    fn mirrored_arcs_value() {
        let (l, r) = (P::new(-0.5, 0.0), P::new(0.5, 0.0));
        let set = CuspedSet::new(vec![arc(l, 1.0, 2000), arc(r, -1.0, 2000)], vec![(l, r)]).unwrap();
        let e = relaxed_energy_cusped(&set, &ElasticaParams::standard()).unwrap();
        let exact = 2.0 * (2.0 * PI / 3.0) * 2.0 + 2.0;
        assert!((e.report.total - exact).abs() < 1e-2, "{} vs {exact}", e.report.total);
        // Open free ends: no closed chain.
        assert!(e.system.is_none());
    }

    fn drop(tip: P, dir: f64, n: usize) -> Vec<P> {
        (0..=n)
            .map(|i| {
                let th = 2.0 * PI * i as f64 / n as f64;
                let x = 0.5 * (th.cos() - 1.0);
                let y = 0.5 * th.sin() * (th / 2.0).sin().powi(3);
                P::new(tip.x + dir * x, tip.y + y)
            })
            .collect()
    }

    #[test]
    fn bridge_adds_twice_its_length() {
        let (l, r) = (P::new(-1.0, 0.0), P::new(1.0, 0.0));
        let params = ElasticaParams::new(2.0, 1.7, 1.0).unwrap();
        let drops = vec![drop(l, 1.0, 400), {
            let mut d = drop(r, -1.0, 400);
            d.reverse();
            d
        }];
        let bare = relaxed_energy_cusped(&CuspedSet::new(drops.clone(), vec![]).unwrap(), &params).unwrap();
        assert_eq!(bare.report.total, f64::INFINITY);
        assert_eq!(bare.unpaired_cusps.len(), 2);
        let bridged = relaxed_energy_cusped(&CuspedSet::new(drops, vec![(l, r)]).unwrap(), &params).unwrap();
        let arcs: f64 = bridged.report.levels[..2].iter().map(|r| r.energy).sum();
        assert!((bridged.report.total - arcs - 2.0 * 1.7 * 2.0).abs() < 1e-9);
        let sys = bridged.system.unwrap();
        assert_eq!(sys.len(), 1);
        // Bridges cancel in the winding count.
        assert!(sys.interior_membership(P::new(-1.5, 0.0)).unwrap_or(false) || sys.interior_membership(P::new(-1.5, 0.02)).unwrap());
        assert!(!sys.interior_membership(P::new(0.0, 0.3)).unwrap());
    }

    #[test]
    fn zero_length_bridge_and_crossing_bridge() {
        let l = P::new(0.0, 0.0);
        let set = CuspedSet::new(vec![drop(l, 1.0, 200), drop(l, -1.0, 200)], vec![(l, l)]).unwrap();
        let e = relaxed_energy_cusped(&set, &ElasticaParams::standard()).unwrap();
        assert_eq!(e.report.levels[2].energy, 0.0);
        // A bridge through a drop's body.
        let (a, b) = (P::new(-3.0, 0.0), P::new(3.0, 0.0));
        let wall: Vec<P> = (0..=7).map(|i| P::new(0.0, -1.0 + 0.3 * i as f64)).collect();
        let set = CuspedSet { arcs: vec![drop(a, 1.0, 100), drop(b, -1.0, 100), wall], cusp_pairs: vec![(a, b)] };
        assert!(matches!(relaxed_energy_cusped(&set, &ElasticaParams::standard()), Err(Error::BridgeCrossing { pair: 0, arc: 2, .. })));
    }

    #[test]
    fn lower_bound_slabs() {
        let u = GridFunction::from_fn(8, 8, 1.0, P::zero(), |p| p.x / 7.0).unwrap();
        let b = coarea_lower_bound(&u, &[(0.25, 4.0), (0.75, 2.0)]).unwrap();
        assert!((b - 3.0).abs() < 1e-12);
        let zero = GridFunction::from_fn(8, 8, 1.0, P::zero(), |_| 0.0).unwrap();
        assert_eq!(coarea_lower_bound(&zero, &[]).unwrap(), 0.0);
        assert!(coarea_lower_bound(&u, &[]).is_err());
    }

    #[test]
    fn clipping_halves_circle() {
        let c = CurveSystem::single(Curve::circle(P::zero(), 1.0, 1024, false).unwrap());
        let params = ElasticaParams::standard();
        let full = elastica_energy(&c.curves()[0], &params).unwrap();
        let right = Polygon::rectangle(BBox::new(P::new(0.0, -5.0), P::new(5.0, 5.0)));
        let left = Polygon::rectangle(BBox::new(P::new(-5.0, -5.0), P::new(0.0, 5.0)));
        let r = clip_energy(&c, &right, &params).unwrap();
        let l = clip_energy(&c, &left, &params).unwrap();
        assert!((r.report.total - full / 2.0).abs() < 0.01 * full / 2.0);
        assert!((r.report.total + l.report.total - full).abs() < 1e-9 * full);
        assert_eq!(r.arcs.len(), 1);
        let (a, b) = r.arcs[0].endpoints_on_boundary.unwrap();
        assert!(a.x.abs() < 1e-12 && b.x.abs() < 1e-12 && (a.y + b.y).abs() < 1e-9);
        let all = Polygon::rectangle(BBox::new(P::new(-5.0, -5.0), P::new(5.0, 5.0)));
        let w = clip_energy(&c, &all, &params).unwrap();
        assert!((w.report.total - full).abs() < 1e-9);
        assert!(w.arcs[0].endpoints_on_boundary.is_none());
        let none = Polygon::rectangle(BBox::new(P::new(3.0, 3.0), P::new(4.0, 4.0)));
        assert_eq!(clip_energy(&c, &none, &params).unwrap().report.total, 0.0);
    }

    #[test]
    fn clipping_is_monotone() {
        let c = CurveSystem::single(Curve::ellipse(P::zero(), 2.0, 1.0, 512).unwrap());
        let params = ElasticaParams::standard();
        let mut last = 0.0;
        for x in [-1.5, -0.5, 0.3, 1.1, 2.5] {
            let e = clip_energy(&c, &Polygon::rectangle(BBox::new(P::new(-3.0, -3.0), P::new(x, 3.0))), &params).unwrap().report.total;
            assert!(e >= last * 0.99);
            last = e;
        }
    }
}
