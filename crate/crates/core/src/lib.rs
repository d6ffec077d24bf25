//! Convex relaxation of vectorial variational problems by lifting to
//! currents on cubical complexes.
//!
//! [`multivector`] supplies the exterior algebra, [`cubical`] and
//! [`whitney`] the discretization, [`lifting`] the cost models, [`solver`]
//! the saddle-point assembly and primal-dual iteration, and [`problems`]
//! the experiment builders.

pub mod cubical;
pub mod error;
pub mod image;
pub mod lifting;
pub mod multivector;
pub mod problems;
pub mod selftest;
pub mod solver;
pub mod sparse;
pub mod whitney;

pub use error::{Error, Result};
