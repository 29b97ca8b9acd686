//! Shared fixtures for the benchmarks.

use qlaw_core::reduced_action::ReducedAction1D;
use qlaw_core::schrodinger1d::{pair_free, pair_numeric, PotentialKind, PotentialSpec};

pub fn free_action(a: f64, b: f64) -> ReducedAction1D {
    ReducedAction1D::new(pair_free(0.5, 1.0, 1.0).expect("free pair"), a, b, 0.0).expect("action")
}

/// `V = x`, `E = 1`: turning point at `x = 1`.
pub fn linear_action() -> ReducedAction1D {
    let v = PotentialSpec::new(PotentialKind::Linear { slope: 1.0 }, (-10.0, 4.0)).expect("potential");
    let pair = pair_numeric(&v, 1.0, 1.0, 1.0, 1e-3).expect("numeric pair");
    ReducedAction1D::new(pair, 1.0, 0.3, 0.0).expect("action")
}
