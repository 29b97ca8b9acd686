//! Numerical kernels shared by the physics modules: special functions,
//! quadrature, finite differences and an adaptive Runge-Kutta integrator.
//!
//! Everything in here is a pure function of its inputs.

mod diff;
mod grid;
mod ode;
mod quadrature;
mod special;

pub use diff::{default_step, fd_derivative, fd_derivative_auto, Derivative};
pub use grid::Grid1D;
pub use ode::{
    ode_solve, ode_solve_guarded, OdeControls, OdeSample, OdeSolution, SampleKind,
    StallDetector, StepStats, Termination,
};
pub use quadrature::{integrate, QuadratureMethod, QuadratureSpec};
pub use special::{expint_ei, laguerre, EI_ASYMPTOTIC_CROSSOVER, EI_MIN_ARGUMENT, EULER_GAMMA};
