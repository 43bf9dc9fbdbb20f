//! Solver and analysis harness for the logistic population model with
//! nonlocal dispersal on a bounded habitat:
//!
//! `u_t = d L[u] + u (m(x) - u)`,
//! `L[u](x) = integral_Omega k(x,y) u(y) dy - a(x) u(x)`.
//!
//! The crate computes the unique positive steady state by the monotone
//! quadratic fixed point, the existence-deciding principal value mu0 by
//! shifted power iteration, and total-population diagnostics: criterion-(A)
//! feasibility of concentration families, d-sweeps with sqrt(d) growth-law
//! fits, and the constructive upper-bound constants.
//!
//! Modules mirror the pipeline: [`grid`] (midpoint quadrature), [`kernel`]
//! (dispersal kernels and the discrete operator), [`resources`] (m(x)
//! families), [`spectral`] (mu0 and the energy functional), [`steady`] (the
//! steady-state solvers), [`analysis`] (diagnostics and sweeps), [`cli`]
//! (config-driven experiment runner).

pub mod analysis;
pub mod cli;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod resources;
pub mod spectral;
pub mod steady;

pub use error::{Error, Result};
pub use grid::{Domain, Grid};
pub use kernel::{Backend, BoundaryCondition, DiscreteOperator, KernelSpec};
pub use resources::{Resource, ResourceFamily};
pub use spectral::{energy, principal_value, EigenOptions, PrincipalValue};
pub use steady::{evolve, solve_fixed_point, SolveOptions, SteadyState};
