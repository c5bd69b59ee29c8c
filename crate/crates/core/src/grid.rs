//! Scalar fields sampled on a regular square grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{BBox, Point2};
use crate::scalar::Real;

/// Values on a `rows × cols` lattice. Node `(r, c)` sits at
/// `origin + (c * spacing, r * spacing)`, so rows run along +y.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridFile<T>", into = "GridFile<T>")]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct GridFunction<T> {
    rows: usize,
    cols: usize,
    spacing: T,
    origin: Point2<T>,
    values: Vec<T>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real", deserialize = "T: Real"))]
pub struct GridFile<T> {
    pub spacing: T,
    #[serde(default)]
    pub origin: Option<Point2<T>>,
    pub values: Vec<Vec<T>>,
}

impl<T: Real> TryFrom<GridFile<T>> for GridFunction<T> {
    type Error = Error;
    fn try_from(f: GridFile<T>) -> Result<Self> {
        let rows = f.values.len();
        let cols = f.values.first().map_or(0, |r| r.len());
        if let Some(r) = f.values.iter().position(|row| row.len() != cols) {
            return Err(Error::invalid("read_grid", format!("row {r} has {} values, expected {cols}", f.values[r].len())));
        }
        GridFunction::new(rows, cols, f.spacing, f.origin.unwrap_or_else(Point2::zero), f.values.concat())
    }
}

impl<T: Real> From<GridFunction<T>> for GridFile<T> {
    fn from(g: GridFunction<T>) -> Self {
        let values = g.values.chunks(g.cols).map(|r| r.to_vec()).collect();
        GridFile { spacing: g.spacing, origin: Some(g.origin), values }
    }
}

impl<T: Real> GridFunction<T> {
    pub fn new(rows: usize, cols: usize, spacing: T, origin: Point2<T>, values: Vec<T>) -> Result<Self> {
        if rows < 8 || cols < 8 {
            return Err(Error::invalid("grid_function", format!("grid must be at least 8x8, got {rows}x{cols}")));
        }
        if values.len() != rows * cols {
            return Err(Error::invalid("grid_function", format!("{} values for a {rows}x{cols} grid", values.len())));
        }
        if !(spacing > T::zero()) || !spacing.is_finite() {
            return Err(Error::invalid("grid_function", format!("spacing must be positive, got {spacing}")));
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid("grid_function", format!("value at row {}, col {} is not finite", k / cols, k % cols)));
        }
        Ok(GridFunction { rows, cols, spacing, origin, values })
    }

    /// `n × n` nodes covering `bbox` (whose width sets the spacing).
    pub fn template(bbox: BBox<T>, n: usize) -> Result<Self> {
        let h = bbox.width() / T::of_usize(n - 1);
        let rows = (bbox.height() / h).round().to_usize().unwrap_or(0) + 1;
        GridFunction::new(rows, n, h, bbox.min, vec![T::zero(); rows * n])
    }

    /// Samples `f` at every node.
    pub fn from_fn(rows: usize, cols: usize, spacing: T, origin: Point2<T>, f: impl Fn(Point2<T>) -> T) -> Result<Self> {
        let mut values = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                values.push(f(Point2::new(
                    origin.x + T::of_usize(c) * spacing,
                    origin.y + T::of_usize(r) * spacing,
                )));
            }
        }
        GridFunction::new(rows, cols, spacing, origin, values)
    }

    /// Same lattice, new values from `f(position)`.
    pub fn resampled(&self, f: impl Fn(Point2<T>) -> T + Sync) -> Result<Self> {
        GridFunction::from_fn(self.rows, self.cols, self.spacing, self.origin, f)
    }

    /// Same lattice with values replaced (row-major).
    pub fn with_values(&self, values: Vec<T>) -> Result<Self> {
        GridFunction::new(self.rows, self.cols, self.spacing, self.origin, values)
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Result<Self> {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn spacing(&self) -> T {
        self.spacing
    }

    pub fn origin(&self) -> Point2<T> {
        self.origin
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    #[inline]
    pub fn at(&self, r: usize, c: usize) -> T {
        self.values[r * self.cols + c]
    }

    pub fn node(&self, r: usize, c: usize) -> Point2<T> {
        Point2::new(self.origin.x + T::of_usize(c) * self.spacing, self.origin.y + T::of_usize(r) * self.spacing)
    }

    /// Rectangle spanned by the nodes.
    pub fn bbox(&self) -> BBox<T> {
        BBox::new(self.origin, self.node(self.rows - 1, self.cols - 1))
    }

    pub fn cell_area(&self) -> T {
        self.spacing * self.spacing
    }

    pub fn min(&self) -> T {
        self.values.iter().copied().fold(T::infinity(), T::min)
    }

    pub fn max(&self) -> T {
        self.values.iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Values on the outermost ring of nodes.
    pub fn border_values(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        let (rows, cols) = (self.rows, self.cols);
        (0..rows)
            .flat_map(move |r| (0..cols).map(move |c| (r, c)))
            .filter(move |&(r, c)| r == 0 || c == 0 || r == rows - 1 || c == cols - 1)
            .map(move |(r, c)| (r, c, self.at(r, c)))
    }

    pub fn border_max(&self) -> T {
        self.border_values().map(|x| x.2).fold(T::neg_infinity(), T::max)
    }

    /// Bilinear interpolation; points outside the grid are clamped to it.
    pub fn sample(&self, p: Point2<T>) -> T {
        let fx = ((p.x - self.origin.x) / self.spacing).max(T::zero()).min(T::of_usize(self.cols - 1));
        let fy = ((p.y - self.origin.y) / self.spacing).max(T::zero()).min(T::of_usize(self.rows - 1));
        let c = fx.floor().to_usize().unwrap_or(0).min(self.cols - 2);
        let r = fy.floor().to_usize().unwrap_or(0).min(self.rows - 2);
        let sx = fx - T::of_usize(c);
        let sy = fy - T::of_usize(r);
        let one = T::one();
        let (v00, v01, v10, v11) = (self.at(r, c), self.at(r, c + 1), self.at(r + 1, c), self.at(r + 1, c + 1));
        (v00 * (one - sx) + v01 * sx) * (one - sy) + (v10 * (one - sx) + v11 * sx) * sy
    }

    /// Discrete L1 distance `sum |u - v| h^2` to a grid on the same lattice.
    pub fn l1_distance(&self, other: &Self) -> Result<T> {
        if (self.rows, self.cols) != (other.rows, other.cols) {
            return Err(Error::invalid("l1_distance", "grids have different shapes"));
        }
        let s = crate::scalar::ordered_sum(self.values.iter().zip(&other.values).map(|(&a, &b)| (a - b).abs()));
        Ok(s * self.cell_area())
    }

    pub fn cast<U: Real>(&self) -> Result<GridFunction<U>> {
        GridFunction::new(
            self.rows,
            self.cols,
            U::lit(self.spacing.as_f64()),
            self.origin.cast(),
            self.values.iter().map(|v| U::lit(v.as_f64())).collect(),
        )
    }
}
