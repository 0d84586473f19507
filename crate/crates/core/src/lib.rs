#![allow(clippy::needless_range_loop)]

pub mod automorphisms;
pub mod error;
pub mod fields;
pub mod fixtures;
pub mod input;
pub mod jets;
pub mod linalg;
pub mod manifold;
pub mod nondegeneracy;
pub mod poly;
pub mod registry;
pub mod scalar;
pub mod segre;
pub mod series;
pub mod system;

pub use error::{Error, Result};
pub use poly::{Monomial, Poly};
pub use registry::Registry;
pub use scalar::{GaussianRational, Qi, Q};
