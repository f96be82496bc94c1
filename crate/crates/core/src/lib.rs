//! Numerical differential geometry for translating solitons of the
//! r-mean curvature flow.

pub mod charts;
pub mod error;
pub mod maxprinciple;
pub mod mesh;
pub mod ode;
pub mod quad;
pub mod regions;
pub mod symfun;
pub mod translators;

pub use error::{GeomError, Result};
pub use symfun::{CurvatureSpectrum, SymMatrix};
