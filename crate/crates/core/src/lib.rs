pub mod error;
pub mod numerics;

pub use error::{Error, Result};
pub mod schrodinger1d;
pub mod reduced_action;
pub mod report;
pub mod laws1d;
pub mod hydrogen2d;
pub mod relativistic;
