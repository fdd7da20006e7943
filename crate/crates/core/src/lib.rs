//! Variational solver for parameter-dependent discrete second-order boundary
//! value problems.
//!
//! Two problem families are supported:
//!
//! * Dirichlet problems `Δ(p(k)Δx(k-1)) + f(k, x(k), u(k)) = g(k)` on
//!   `k = 1..=T` with `x(0) = x(T+1) = 0`;
//! * Emden-Fowler type problems `Δ(p(k-1)Δx(k-1)) + q(k)x(k) + f(k, x(k), u(k)) = g(k)`
//!   with the periodic-type closure `x(0) = x(T)`.
//!
//! Solutions are the critical points of an action functional `J_u`.
//! [`solver::minimize`] finds a minimizer, [`analysis`] checks the structural
//! assumptions and bounds, and [`analysis::continuation_run`] follows the
//! minimizers along a sequence of parameters `u_n -> ū`.
//!
//! ```
//! use coercive_bvp::problems::{DirichletProblem, Nonlinearity, ParameterFunction};
//! use coercive_bvp::solver::{minimize, SolveOptions};
//!
//! let prob = DirichletProblem::uniform(vec![-1.0; 3], Nonlinearity::zero(), 1.0, None)?;
//! let u = ParameterFunction::constant(3, 0.0, 1.0)?;
//! let report = minimize(&prob, &u, &SolveOptions::default())?;
//! assert!(report.converged);
//! assert!((report.minimizer.interior()[1] - 2.0).abs() < 1e-12);
//! # Ok::<(), coercive_bvp::Error>(())
//! ```

pub mod analysis;
pub mod cli;
pub mod emden;
pub mod error;
pub mod functional;
pub mod grid;
pub mod linalg;
pub mod problems;
pub mod quadrature;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{BoundaryKind, GridFunction};
pub use problems::{DirichletProblem, EmdenProblem, Nonlinearity, ParameterFunction, Problem};
pub use solver::{minimize, SolveOptions, SolveReport};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/grids.md")]
    mod grids {}
    #[doc = include_str!("../../../book/src/action.md")]
    mod action {}
    #[doc = include_str!("../../../book/src/solving.md")]
    mod solving {}
    #[doc = include_str!("../../../book/src/assumptions.md")]
    mod assumptions {}
    #[doc = include_str!("../../../book/src/continuation.md")]
    mod continuation {}
    #[doc = include_str!("../../../book/src/periodic.md")]
    mod periodic {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
