//! Root-locus geometry of parametric Weierstrass polynomials, Łojasiewicz
//! exponent estimation, exact formal Weierstrass division, and growth checks
//! against Denjoy-Carleman weight sequences.

pub mod dcseq;
pub mod error;
pub mod examples;
pub mod fit;
pub mod io;
pub mod lojafit;
pub mod mpoly;
pub mod optim;
pub mod parampoly;
pub mod rootgeom;
pub mod roots;
pub mod series;
pub mod wdiv;

pub use error::{Error, Result};
pub use num_complex::Complex64;
