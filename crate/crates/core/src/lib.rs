//! p-elastica energies of planar curves and curve systems, coarea energies
//! of grid functions, nested level families and relaxed energies of sets
//! with cusps.
//!
//! Geometry is generic over the scalar type ([`scalar::Real`]); the aliases
//! below fix it to `f64` or `f32`.

// Negated comparisons are deliberate: they reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod contact;
pub mod contour;
pub mod curve;
pub mod error;
pub mod functional;
pub mod gallery;
pub mod geom;
pub mod grid;
pub mod io;
pub mod nesting;
pub mod relaxed;
pub mod report;
pub mod scalar;
pub mod smoothing;
pub mod system;

pub use error::{Error, Result};

pub type Point64 = geom::Point2<f64>;
pub type Point32 = geom::Point2<f32>;
pub type Curve64 = curve::Curve<f64>;
pub type Curve32 = curve::Curve<f32>;
pub type Params64 = curve::ElasticaParams<f64>;
pub type Params32 = curve::ElasticaParams<f32>;
pub type CurveSystem64 = system::CurveSystem<f64>;
pub type CurveSystem32 = system::CurveSystem<f32>;
pub type GridFunction64 = grid::GridFunction<f64>;
pub type GridFunction32 = grid::GridFunction<f32>;
pub type LevelFamily64 = nesting::LevelFamily<f64>;
pub type LevelFamily32 = nesting::LevelFamily<f32>;
pub type EnergyReport64 = report::EnergyReport<f64>;
pub type EnergyReport32 = report::EnergyReport<f32>;
pub type CuspedSet64 = relaxed::CuspedSet<f64>;
pub type Polygon64 = relaxed::Polygon<f64>;
