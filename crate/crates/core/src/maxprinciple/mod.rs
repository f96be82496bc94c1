//! Omori–Yau machinery on finite meshes and the theorem drives built on it.

mod drives;
mod gate;
mod gfunction;
mod oy;

pub use drives::{alpha, cone_drive, halfspace_drive, ChainRow, ConeDriveReport, HalfspaceDriveReport};
pub use gate::{hypothesis_gate, GateParams, GateReport, Premise, PremiseStatus, Theorem, PSD_TOL, RESIDUAL_TOL};
pub use gfunction::{p_gamma, splice_point, GFunction};
pub use oy::{oy_sequence, OYRun, OyParams};
