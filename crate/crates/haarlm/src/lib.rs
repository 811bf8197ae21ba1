//! Exact dyadic piecewise-polynomial toolkit for Haar projections, local-means
//! Triebel-Lizorkin quasi-norms and the scaling experiments built on them.

pub mod dyadic;
pub mod error;
pub mod experiments;
pub mod kernels;
pub mod lmeans;
pub mod norms;
pub mod poly;
pub mod projection;
pub mod pwpoly;
pub mod quad;

pub use dyadic::{DyadicInterval, DyadicRational, FrequencyConfig, HaarIndex, SampleIndexSet};
pub use error::{Error, Result};
pub use pwpoly::{Piece, PwPoly};
pub use quad::QuadratureSpec;
