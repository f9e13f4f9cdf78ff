//! Weighted inertia-dissipation-energy (WIDE) minimization.
//!
//! A trajectory `u_0, ..., u_N` on a uniform grid is obtained as a global
//! minimizer of the exponentially weighted space-time functional
//!
//! ```text
//! W(u) = sum_i tau * e_i * [ eps^2 rho/2 |u_tt|^2 + eps D(u_t) + E(u) - f.u ]
//! ```
//!
//! and the causal limit `eps -> 0` is compared against classical time
//! steppers. The crate is `no_std` (with `alloc`); file formats and the
//! command line live in `wide-lab`.
#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod band;
pub mod causal;
pub mod diagnostics;
pub mod dissipation;
pub mod energy;
mod error;
pub mod functional;
pub mod grid;
pub mod math;
pub mod minimize;
pub mod oracles;
pub mod pde;
pub mod problem;
pub mod trajectory;
pub mod weights;

pub use dissipation::DissipationModel;
pub use energy::{builtin_energy, Energy, EnergyModel, EnergySpec, Forcing};
pub use error::{Result, WideError};
pub use functional::{assemble_linear_system, eval_functional, eval_gradient, hessian_operator};
pub use grid::TimeGrid;
pub use minimize::{MinimizeReport, SolverKind};
pub use problem::WideProblem;
pub use trajectory::DiscreteTrajectory;
pub use weights::{make_weights, WeightScheme};
