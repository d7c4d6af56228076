//! Finite-dimensional frames, their duals, and woven families.
//!
//! Frames are stored as synthesis matrices whose columns are the frame vectors.
//! The crate computes optimal bounds exactly, decides wovenness of small
//! families by enumeration, and evaluates sufficient conditions for wovenness
//! as certificates that can be checked against the enumeration.

pub mod certificates;
pub mod cli;
pub mod duality;
pub mod error;
pub mod frame;
pub mod generators;
pub mod io;
pub mod linalg;
pub mod sweep;
pub mod weaving;

pub use error::{FrameError, Result};
pub use frame::{Frame, FrameBounds, FrameClass, DEFAULT_TOL};
pub use linalg::{CMatrix, CVector, Complex64};
