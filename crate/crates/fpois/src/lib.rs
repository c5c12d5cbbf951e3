//! Exact computer algebra for formal Poisson structures on chart domains.
//!
//! Everything is computed over the rationals at a fixed truncation order in
//! the deformation parameter, so every identity in the crate is checked
//! exactly: gauge (B-field) transforms, the Chevalley-Eilenberg homotopy
//! machinery on the cotangent chart, order-by-order solvers for Poisson
//! morphisms and commutants, and Courant-Dorfman bimodule verification.
//!
//! All values are immutable after construction and all operations are pure
//! functions, so everything here is safe to share across threads.

pub mod ce;
pub mod chart;
pub mod cotangent;
pub mod courant;
pub mod error;
pub mod formal;
pub mod poly;
pub mod random;
pub mod scalar;
pub mod series;
pub mod solver;
pub mod tensor;

pub use chart::{Chart, CotangentChart};
pub use error::{Error, Result};
pub use poly::Poly;
pub use scalar::Rat;
pub use series::FormalSeries;
pub use tensor::{DiffForm, MultiVector};
