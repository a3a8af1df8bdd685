//! Numerical free probability in one dimension and on q-deformed Fock spaces.

pub mod cli;
pub mod entropy;
pub mod error;
pub mod fockq;
pub mod freeconv;
pub mod ineq;
pub mod measure;
pub mod ncpoly;
pub mod quad;
pub(crate) mod serde_ext;
pub mod stein;
pub mod transforms;

pub use error::{Error, Result};
pub use measure::{Atom, Family, Measure1D};
