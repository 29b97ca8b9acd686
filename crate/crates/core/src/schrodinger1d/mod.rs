//! Pairs of real independent solutions of stationary 1-D wave equations.

mod numerov;
mod pair;
mod potential;

pub use numerov::NumericTable;
pub use pair::{pair_free, pair_numeric, PairPoint, SolutionPair, WaveEquation, NUMERIC_WRONSKIAN_LIMIT};
pub(crate) use pair::numeric_pair;
pub use potential::{PotentialKind, PotentialSpec, TabulatedPotential};
