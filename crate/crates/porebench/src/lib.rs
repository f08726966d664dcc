//! Analysis toolkit for periodic two-dimensional porous media.
//!
//! The crate covers the full pipeline from geometry to transport-relevant
//! statistics:
//!
//! - [`geometry`]: the binary [`geometry::PoreImage`] raster, shape / noise /
//!   Voronoi unit-cell generators, and netpbm import/export.
//! - [`preprocess`]: connected-component labeling, largest-component
//!   extraction, and periodic connectivity checks.
//! - [`metrics`]: porosity, pore-size distributions, surface area and
//!   orientation, graph connectivity, tortuosity, and max-flow capacity.
//! - [`averaging`]: volume averaging schemes, field decomposition into mean
//!   and variation, and variation products.
//! - [`closure`]: loss functions and derivative-free fitting of closure
//!   models to averaged data.
//! - [`field`]: scalar fields bound to a pore mask, with flat binary I/O.
//! - [`edt`]: exact Euclidean distance transforms, flat or toroidal.

pub mod averaging;
pub mod closure;
pub mod edt;
pub mod field;
pub mod geometry;
pub mod metrics;
pub mod preprocess;

pub use field::{FieldError, ScalarField};
pub use geometry::{GeneratorKind, GeneratorSpec, GeometryError, PoreImage};
