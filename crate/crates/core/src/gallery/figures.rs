//! Fixture geometries. Dimensions are fixed defaults chosen to reproduce
//! the topology of each picture; all expected values are computed here.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::shapes::{circle_arc, closed_from_pieces, segment, Drop, P};
use crate::curve::{Curve, ElasticaParams};
use crate::error::Result;
use crate::geom::BBox;
use crate::grid::GridFunction;
use crate::nesting::{compare_candidates, LevelFamily, NestingOptions};
use crate::relaxed::{coarea_lower_bound, relaxed_energy_cusped, CuspedSet, Polygon};
use crate::smoothing::{offset_curve, offset_energy_transform, CutoffProfile};
use crate::system::{interior_mask, CurveSystem, Raster};
use crate::functional::slab_midpoints;

/// Sample spacing of every fixture curve.
pub const SPACING: f64 = 0.02;

fn drop_arc(d: Drop) -> Vec<P> {
    d.arc(8000)
}

/// One closed curve running along a doubled straight bridge between two
/// drop tips and around both drops (bridge, right drop, bridge back,
/// left drop). Tangent-continuous; the bridge cancels in the winding count.
pub fn bridged_drops(left: Drop, right: Drop) -> Result<Curve<f64>> {
    closed_from_pieces(
        &[segment(left.tip, right.tip, SPACING), drop_arc(right), segment(right.tip, left.tip, SPACING), drop_arc(left)],
        SPACING,
    )
}

/// Interior of `system` sampled at the grid nodes, as 0/1 values.
fn indicator(system: &CurveSystem<f64>, template: &GridFunction<f64>) -> Vec<f64> {
    let h = template.spacing();
    let half = P::new(h / 2.0, h / 2.0);
    let nodes = Raster::new(
        BBox::new(template.origin() - half, template.node(template.rows() - 1, template.cols() - 1) + half),
        template.cols(),
        template.rows(),
    );
    let m = interior_mask(system, &nodes);
    (0..template.rows()).flat_map(|r| (0..template.cols()).map(move |c| (r, c))).map(|(r, c)| if m.get(c, r) { 1.0 } else { 0.0 }).collect()
}

fn grid_over(bbox: BBox<f64>, h: f64) -> Result<GridFunction<f64>> {
    let cols = (bbox.width() / h).ceil() as usize + 1;
    let rows = (bbox.height() / h).ceil() as usize + 1;
    GridFunction::from_fn(rows, cols, h, bbox.min, |_| 0.0)
}

/// `u = 1_E + 1_F`: `E` a stadium whose top edge has a notch between two
/// cusps, `F` two drops inside `E` hanging from the cusps. The straight
/// segment joining the cusps runs across the notch, outside `E`.
#[derive(Clone, Debug)]
pub struct ExampleOne {
    /// `∂E`.
    pub outer: Curve<f64>,
    /// `∂E` with the notch filled in.
    pub filled: Curve<f64>,
    /// Boundary of the notch.
    pub notch: Curve<f64>,
    /// `F` with its cusp pair.
    pub drops: CuspedSet<f64>,
    /// `Γ_1 .. Γ_4` at indices 0..3.
    pub systems: [CurveSystem<f64>; 4],
    pub u: GridFunction<f64>,
}

pub const EXAMPLE_ONE_CUSPS: (f64, f64) = (-1.0, 1.0);

fn notch_depth(x: f64) -> f64 {
    -0.5 * (PI * (x + 1.0) / 2.0).sin().powi(2)
}

impl ExampleOne {
    pub fn build(grid_spacing: f64) -> Result<Self> {
        let (a, b) = EXAMPLE_ONE_CUSPS;
        let (pa, pb) = (P::new(a, 0.0), P::new(b, 0.0));
        let (half, r, bottom) = (3.5, 1.5, -3.0);
        let notch_pts: Vec<P> = (0..=400).map(|i| b + (a - b) * i as f64 / 400.0).map(|x| P::new(x, notch_depth(x))).collect();
        let shell = |top: Vec<P>| -> Vec<Vec<P>> {
            vec![
                segment(pa, P::new(-half, 0.0), SPACING),
                circle_arc(P::new(-half, -r), r, PI / 2.0, 1.5 * PI, SPACING),
                segment(P::new(-half, bottom), P::new(half, bottom), SPACING),
                circle_arc(P::new(half, -r), r, -PI / 2.0, PI / 2.0, SPACING),
                segment(P::new(half, 0.0), pb, SPACING),
                top,
            ]
        };
        let outer = closed_from_pieces(&shell(notch_pts.clone()), SPACING)?;
        let filled = closed_from_pieces(&shell(segment(pb, pa, SPACING)), SPACING)?;
        let mut notch_up = notch_pts;
        notch_up.reverse();
        let notch = closed_from_pieces(&[notch_up, segment(pb, pa, SPACING)], SPACING)?;

        let big = |tip: P, dir: f64| Drop { tip, dir, radius: 0.5, width: 1.0, shear: 1.6 };
        let small = |tip: P, dir: f64| Drop { tip, dir, radius: 0.35, width: 0.35, shear: 1.6 };
        let (fl, fr) = (big(pa, -1.0), big(pb, 1.0));
        let drops = CuspedSet::new(vec![drop_arc(fl), drop_arc(fr)], vec![(pa, pb)])?;
        let gamma2 = CurveSystem::single(bridged_drops(fl, fr)?);
        let inner = bridged_drops(small(pa, -1.0), small(pb, 1.0))?;
        let systems = [
            CurveSystem::single(outer.clone()),
            gamma2.clone(),
            CurveSystem::simple(vec![filled.clone(), notch.clone()]),
            CurveSystem::new(vec![outer.clone(), inner], vec![1, 2])?,
        ];

        let template = grid_over(BBox::new(P::new(-5.5, -3.6), P::new(5.5, 0.8)), grid_spacing)?;
        let e = indicator(&systems[0], &template);
        let f = indicator(&gamma2, &template);
        let u = template.with_values(e.iter().zip(&f).map(|(a, b)| a + b).collect())?;
        Ok(ExampleOne { outer, filled, notch, drops, systems, u })
    }

    /// `Γ_lower` on `[0, 1]`, `Γ_2` on `(1, 2]`.
    pub fn family(&self, lower: usize) -> Result<LevelFamily<f64>> {
        LevelFamily::new((0.0, 2.0), vec![0.0, 1.0], vec![self.systems[lower - 1].clone(), self.systems[1].clone()])
    }
}

/// `u = 1_{E ∪ F} + 1_F`: `E ∪ F` two unit disks, `F` two drops inside
/// them with cusps on the facing sides of the circles.
#[derive(Clone, Debug)]
pub struct TwoDisks {
    pub centers: (P, P),
    pub radius: f64,
    pub disks: CurveSystem<f64>,
    pub drops: CuspedSet<f64>,
    pub upper: CurveSystem<f64>,
    pub u: GridFunction<f64>,
}

pub const CORRIDOR_FILLETS: [f64; 3] = [0.05, 0.2, 0.5];

impl TwoDisks {
    pub fn build(grid_spacing: f64) -> Result<Self> {
        let (cl, cr) = (P::new(-2.5, 0.0), P::new(2.5, 0.0));
        let radius = 1.0;
        let disks = CurveSystem::simple(vec![
            closed_from_pieces(&[circle_arc(cl, radius, 0.0, 2.0 * PI, SPACING)], SPACING)?,
            closed_from_pieces(&[circle_arc(cr, radius, 0.0, 2.0 * PI, SPACING)], SPACING)?,
        ]);
        let (tl, tr) = (P::new(cl.x + radius, 0.0), P::new(cr.x - radius, 0.0));
        let (dl, dr) = (Drop { tip: tl, dir: -1.0, radius: 0.5, width: 1.0, shear: 0.0 }, Drop { tip: tr, dir: 1.0, radius: 0.5, width: 1.0, shear: 0.0 });
        let drops = CuspedSet::new(vec![drop_arc(dl), drop_arc(dr)], vec![(tl, tr)])?;
        let upper = CurveSystem::single(bridged_drops(dl, dr)?);
        let template = grid_over(BBox::new(P::new(-4.0, -1.5), P::new(4.0, 1.5)), grid_spacing)?;
        let a = indicator(&disks, &template);
        let b = indicator(&upper, &template);
        let u = template.with_values(a.iter().zip(&b).map(|(a, b)| a + b).collect())?;
        Ok(TwoDisks { centers: (cl, cr), radius, disks, drops, upper, u })
    }

    /// Distance between the two disks.
    pub fn gap(&self) -> f64 {
        self.centers.0.dist(self.centers.1) - 2.0 * self.radius
    }

    /// Both circles joined by a zero-width corridor along the x axis,
    /// with fillets of radius `fillet` at the four junctions.
    pub fn corridor(&self, fillet: f64) -> Result<Curve<f64>> {
        let (cl, cr, r0, r) = (self.centers.0, self.centers.1, self.radius, fillet);
        let a = ((r0 + r).powi(2) - r * r).sqrt();
        let phi = r.atan2(a);
        let (xl, xr) = (cl.x + a, cr.x - a);
        let fillet_arc = |c: P, from: P, to: P| {
            let a0 = (from.y - c.y).atan2(from.x - c.x);
            let mut a1 = (to.y - c.y).atan2(to.x - c.x);
            // The short way round.
            while a1 - a0 > PI {
                a1 -= 2.0 * PI;
            }
            while a0 - a1 > PI {
                a1 += 2.0 * PI;
            }
            circle_arc(c, r, a0, a1, SPACING)
        };
        let on_circle = |c: P, ang: f64| P::new(c.x + r0 * ang.cos(), c.y + r0 * ang.sin());
        let (l_up, l_dn) = (on_circle(cl, phi), on_circle(cl, -phi));
        let (r_up, r_dn) = (on_circle(cr, PI - phi), on_circle(cr, PI + phi));
        let (ml, mr) = (P::new(xl, 0.0), P::new(xr, 0.0));
        closed_from_pieces(
            &[
                circle_arc(cl, r0, phi, 2.0 * PI - phi, SPACING),
                fillet_arc(P::new(xl, -r), l_dn, ml),
                segment(ml, mr, SPACING),
                fillet_arc(P::new(xr, -r), mr, r_dn),
                circle_arc(cr, r0, PI + phi, 3.0 * PI - phi, SPACING),
                fillet_arc(P::new(xr, r), r_up, mr),
                segment(mr, ml, SPACING),
                fillet_arc(P::new(xl, r), ml, l_up),
            ],
            SPACING,
        )
    }

    /// The independent level boundaries (not nested: the upper bridge
    /// leaves the disks).
    pub fn unbridged(&self) -> Result<LevelFamily<f64>> {
        LevelFamily::new((0.0, 2.0), vec![0.0, 1.0], vec![self.disks.clone(), self.upper.clone()])
    }

    pub fn bridged(&self, fillet: f64) -> Result<LevelFamily<f64>> {
        LevelFamily::new((0.0, 2.0), vec![0.0, 1.0], vec![CurveSystem::single(self.corridor(fillet)?), self.upper.clone()])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StrictGap {
    /// Slab-weighted relaxed energies of the two superlevel sets.
    pub lower_bound: f64,
    /// Energy of the best admissible candidate and its fillet radius.
    pub best_energy: f64,
    pub best_fillet: f64,
    pub candidate_energies: Vec<(f64, f64)>,
    pub rejected: usize,
    /// Disk gap times the height of the slab carrying the extra path, times alpha.
    pub required_gap: f64,
    pub gap: f64,
}

pub fn strict_gap(fig: &TwoDisks, params: &ElasticaParams<f64>) -> Result<StrictGap> {
    let w_disks = fig.disks.energy(params)?;
    let w_drops = relaxed_energy_cusped(&fig.drops, params)?.report.total;
    let lower_bound = coarea_lower_bound(&fig.u, &[(0.5, w_disks), (1.5, w_drops)])?;
    let mut cands = vec![fig.unbridged()?];
    for r in CORRIDOR_FILLETS {
        cands.push(fig.bridged(r)?);
    }
    let ranking = compare_candidates(&cands, &fig.u, params, &NestingOptions::default())?;
    let best = ranking.best();
    let candidate_energies = ranking.ranked.iter().map(|c| (CORRIDOR_FILLETS[c.index - 1], c.energy)).collect();
    Ok(StrictGap {
        lower_bound,
        best_energy: best.energy,
        best_fillet: CORRIDOR_FILLETS[best.index - 1],
        candidate_energies,
        rejected: ranking.rejected.len(),
        required_gap: fig.gap() * 1.0 * params.alpha,
        gap: best.energy - lower_bound,
    })
}

/// Two mirrored drops whose cusps face each other across a straight bridge
/// of length `bridge`: the set with cusps, and the closed curve running
/// along the doubled bridge.
#[derive(Clone, Debug)]
pub struct CuspTube {
    pub drops: CuspedSet<f64>,
    pub boundary: Curve<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CuspTubeRow {
    pub collar: f64,
    /// Energy of the smooth approximant (levels are outer offsets of the
    /// bridged boundary).
    pub energy: f64,
    /// `L1` distance from the indicator of the drops.
    pub l1: f64,
}

impl CuspTube {
    pub fn build(bridge: f64) -> Result<Self> {
        let (l, r) = (P::new(-bridge / 2.0, 0.0), P::new(bridge / 2.0, 0.0));
        let (dl, dr) = (Drop { tip: l, dir: -1.0, radius: 0.5, width: 1.0, shear: 0.0 }, Drop { tip: r, dir: 1.0, radius: 0.5, width: 1.0, shear: 0.0 });
        let drops = CuspedSet::new(vec![drop_arc(dl), drop_arc(dr)], vec![(l, r)])?;
        Ok(CuspTube { drops, boundary: bridged_drops(dl, dr)? })
    }

    /// The approximant `u = w(dist(x, F ∪ bridge))` with cut-off `w` of the
    /// given collar width: its superlevel sets are outer parallel sets of
    /// the bridged boundary, so energies and areas follow from offsets.
    pub fn approximant(&self, collar: f64, params: &ElasticaParams<f64>, n_levels: usize) -> Result<CuspTubeRow> {
        let profile = CutoffProfile::new(collar, 1.0)?;
        let (ts, dt) = slab_midpoints(0.0, 1.0, n_levels);
        let base_area = self.boundary.signed_area();
        let mut energy = 0.0;
        let mut l1 = 0.0;
        for t in ts {
            let delta = profile.inverse(t);
            energy += offset_energy_transform(&self.boundary, delta, params)? * dt;
            let off = offset_curve(&self.boundary, delta)?;
            l1 += (off.raw.signed_area() - base_area) * dt;
        }
        Ok(CuspTubeRow { collar, energy, l1 })
    }

    pub fn grid(&self, collar: f64, grid_spacing: f64) -> Result<GridFunction<f64>> {
        let profile = CutoffProfile::new(collar, 1.0)?;
        let b = self.boundary.bbox().expanded(collar + 4.0 * grid_spacing);
        let template = grid_over(b, grid_spacing)?;
        let system = CurveSystem::single(self.boundary.clone());
        let inside = indicator(&system, &template);
        let index = system.segment_index(collar);
        let values = (0..template.rows())
            .flat_map(|r| (0..template.cols()).map(move |c| (r, c)))
            .zip(inside)
            .map(|((r, c), ins)| {
                if ins > 0.0 {
                    1.0
                } else {
                    index.nearest_within(template.node(r, c), collar).map_or(0.0, |(d, _)| profile.value(d))
                }
            })
            .collect();
        template.with_values(values)
    }
}

/// A drop whose cusp lies outside a rectangular domain, its mirror image
/// (giving an even number of cusps), and two drops whose cusps meet at an
/// angle on the domain boundary.
#[derive(Clone, Debug)]
pub struct DropInDomain {
    pub single: CuspedSet<f64>,
    pub single_curve: Curve<f64>,
    pub mirrored: CuspedSet<f64>,
    pub omega: Polygon<f64>,
    pub double: CurveSystem<f64>,
    pub double_omega: Polygon<f64>,
}

impl DropInDomain {
    pub fn build() -> Result<Self> {
        let tip = P::new(0.0, 0.0);
        let d = Drop { tip, dir: -1.0, radius: 0.5, width: 1.0, shear: 0.0 };
        let arc = drop_arc(d);
        let single = CuspedSet::new(vec![arc.clone()], vec![])?;
        let single_curve = closed_from_pieces(std::slice::from_ref(&arc), SPACING)?;
        let mirror_tip = P::new(0.4, 0.0);
        let m = Drop { tip: mirror_tip, dir: 1.0, ..d };
        let mirrored = CuspedSet::new(vec![arc, drop_arc(m)], vec![(tip, mirror_tip)])?;
        let omega = Polygon::rectangle(BBox::new(P::new(-1.5, -1.0), P::new(-0.1, 1.0)));
        let rotated = |angle: f64| -> Result<Curve<f64>> {
            let pts: Vec<P> = drop_arc(d).into_iter().map(|p| p.rotated(angle)).collect();
            closed_from_pieces(&[pts], SPACING)
        };
        let double = CurveSystem::simple(vec![rotated(PI / 6.0)?, rotated(-PI / 6.0)?]);
        let double_omega = Polygon::rectangle(BBox::new(P::new(-1.5, -1.0), P::new(0.0, 1.0)));
        Ok(DropInDomain { single, single_curve, mirrored, omega, double, double_omega })
    }
}
