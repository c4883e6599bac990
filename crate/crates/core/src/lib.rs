//! Exact-arithmetic tools for exterior modules, their BGG linear complexes,
//! Tor over the exterior algebra, perverse t-structures and linear complexes
//! over local rings.

pub mod bgg;
pub mod error;
pub mod examples;
pub mod exterior;
pub mod groebner;
pub mod homology;
pub mod linalg;
pub mod lincplx;
pub mod modp;
pub mod perversity;
pub mod poly;
pub mod polymatrix;
pub mod rational;
pub mod rng;
pub mod tor;

pub use bgg::{LinearComplex, VectorComplex};
pub use error::{Error, Result};
pub use exterior::{ExteriorModule, StrataSpec};
pub use groebner::{Dim, Ideal};
pub use linalg::RatMatrix;
pub use lincplx::{HomotopyPair, JetComplex};
pub use perversity::FreeGradedComplex;
pub use poly::{Monomial, MonomialOrder, Poly, PolyRing};
pub use polymatrix::PolyMatrix;
pub use polymatrix::RankMethod;
pub use rational::Q;
pub use tor::{RegularityReport, TorTable};
