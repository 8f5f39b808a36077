//! Topological-derivative imaging of thin penetrable inclusions in a 2-D
//! homogeneous background from a small number of incident plane waves.
//!
//! The numerical core is generic over the scalar type ([`Real`], implemented
//! for `f32` and `f64`); the `*64` aliases below fix it to `f64`, which is
//! what the accuracy targets of the special functions assume.

pub mod directions;
pub mod error;
pub mod forward;
pub mod geometry;
pub mod imaging;
pub mod io;
pub mod quadrature;
pub mod scalar;
pub mod series;
pub mod specfun;
pub mod validation;

pub use directions::{uniform_directions, DirectionSet};
pub use error::{Channel, Error, Result};
pub use forward::{add_noise, synthesize, FrequencySet, Inclusion, MeasurementSet, Spacing, ThinInclusionScene};
pub use geometry::{builtin_sigma, discretize, distance_to_curve, CurveQuadrature, ParametricCurve};
pub use imaging::{concentration_metric, dte_eps, dte_mu, e_mf, e_sf, ImageMap, ImagingGrid};
pub use scalar::{Real, Vec2};

/// Library version recorded in emitted artifacts.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub type Vec2f64 = Vec2<f64>;
pub type Curve64 = ParametricCurve<f64>;
pub type Quadrature64 = CurveQuadrature<f64>;
pub type Directions64 = DirectionSet<f64>;
pub type Scene64 = ThinInclusionScene<f64>;
pub type Frequencies64 = FrequencySet<f64>;
pub type Measurements64 = MeasurementSet<f64>;
pub type Grid64 = ImagingGrid<f64>;
pub type Map64 = ImageMap<f64>;
