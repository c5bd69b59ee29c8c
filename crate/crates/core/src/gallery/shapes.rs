//! Building blocks for the fixtures: cusped drops, filleted corridors and
//! polylines resampled to a common spacing.

use std::f64::consts::PI;

use crate::curve::Curve;
use crate::error::Result;
use crate::geom::Point2;

pub type P = Point2<f64>;

/// A drop with its cusp at `tip`, body extending in direction `dir`
/// (`+1` to the right, `-1` to the left). `radius` sets the body length
/// (`2 radius`), `width` its thickness; `shear` bends the body downwards by
/// `shear * dx^2`. Near the cusp both branches leave along the x axis with
/// finite curvature. Returned as an open arc from the tip around the body
/// back to the tip, counter-clockwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Drop {
    pub tip: P,
    pub dir: f64,
    pub radius: f64,
    pub width: f64,
    pub shear: f64,
}

impl Drop {
    pub fn point(&self, theta: f64) -> P {
        let dx = self.radius * (1.0 - theta.cos());
        let bump = self.width * self.radius * theta.sin() * (theta / 2.0).sin().powi(3);
        // Counter-clockwise: a right-pointing body starts along its lower branch.
        P::new(self.tip.x + self.dir * dx, self.tip.y - self.dir * bump - self.shear * dx * dx)
    }

    pub fn arc(&self, n: usize) -> Vec<P> {
        (0..=n).map(|i| self.point(2.0 * PI * i as f64 / n as f64)).collect()
    }
}

pub fn polyline_length(pts: &[P]) -> f64 {
    pts.windows(2).map(|w| w[0].dist(w[1])).sum()
}

/// Resamples an open polyline to equal arc-length steps no longer than
/// `spacing`, keeping both ends.
pub fn resample_open(pts: &[P], spacing: f64) -> Vec<P> {
    let total = polyline_length(pts);
    let m = ((total / spacing).ceil() as usize).max(1);
    let mut out = Vec::with_capacity(m + 1);
    let mut seg = 0;
    let mut acc = 0.0;
    for i in 0..=m {
        let s = total * i as f64 / m as f64;
        while seg + 1 < pts.len() - 1 && acc + pts[seg].dist(pts[seg + 1]) < s {
            acc += pts[seg].dist(pts[seg + 1]);
            seg += 1;
        }
        let l = pts[seg].dist(pts[seg + 1]);
        let f = if l > 0.0 { ((s - acc) / l).clamp(0.0, 1.0) } else { 0.0 };
        out.push(pts[seg].lerp(pts[seg + 1], f));
    }
    *out.last_mut().expect("nonempty") = pts[pts.len() - 1];
    out
}

/// Straight segment sampled at `spacing`.
pub fn segment(a: P, b: P, spacing: f64) -> Vec<P> {
    resample_open(&[a, b], spacing)
}

/// Circular arc from angle `a0` to `a1` (either direction).
pub fn circle_arc(c: P, r: f64, a0: f64, a1: f64, spacing: f64) -> Vec<P> {
    let m = ((r * (a1 - a0).abs() / spacing).ceil() as usize).max(2);
    (0..=m)
        .map(|i| {
            let a = a0 + (a1 - a0) * i as f64 / m as f64;
            P::new(c.x + r * a.cos(), c.y + r * a.sin())
        })
        .collect()
}

/// Concatenates open pieces whose ends meet into a closed curve resampled
/// at `spacing`.
pub fn closed_from_pieces(pieces: &[Vec<P>], spacing: f64) -> Result<Curve<f64>> {
    let mut pts: Vec<P> = Vec::new();
    for piece in pieces {
        let piece = resample_open(piece, spacing);
        if pts.last().is_some_and(|q| q.dist(piece[0]) < 1e-9) {
            pts.pop();
        }
        pts.extend(piece);
    }
    if pts.len() > 1 && pts[0].dist(pts[pts.len() - 1]) < 1e-9 {
        pts.pop();
    }
    Curve::new(pts)
}

/// Quintic smoothstep on `[0, 1]`.
pub fn smoothstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (10.0 - 15.0 * x + 6.0 * x * x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::curvature_samples;

    #[test]
    fn drop_is_counter_clockwise_with_bounded_curvature() {
        for dir in [1.0, -1.0] {
            let d = Drop { tip: P::new(0.3, -0.2), dir, radius: 0.5, width: 1.0, shear: 0.0 };
            let c = closed_from_pieces(&[d.arc(4000)], 0.005).unwrap();
            assert_eq!(c.orientation(), 1);
            // Bounded curvature away from the cusp itself.
            let k = curvature_samples(&c).unwrap();
            let n = k.len();
            assert!(k[3..n - 3].iter().all(|k| k.abs() < 10.0));
        }
    }

    #[test]
    fn resampling_keeps_ends() {
        let pts = vec![P::new(0.0, 0.0), P::new(1.0, 0.0), P::new(1.0, 2.0)];
        let r = resample_open(&pts, 0.1);
        assert_eq!(r[0], pts[0]);
        assert_eq!(*r.last().unwrap(), pts[2]);
        assert_eq!(r.len(), 31);
    }
}
