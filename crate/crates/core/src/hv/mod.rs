//! Finite hidden-variable spaces and probability distributions over their
//! products.
//!
//! Weights are stored row-major over the ordered domain: for a domain
//! `(x, y, z)` the weight of `(i, j, k)` sits at `(i * |y| + j) * |z| + k`.
//! Report and scenario files rely on this ordering.

mod distribution;
mod space;

pub use distribution::{marginalize, product_distribution, validate_distribution, Distribution, NORMALIZATION_TOL};
pub use space::{labels, HiddenSpace};

pub(crate) use space::{ravel, step, unravel};
