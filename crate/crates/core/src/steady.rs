//! The unique positive steady state of `u_t = d L[u] + u (m - u)`.
//!
//! The production solver iterates the closed-form fixed point obtained by
//! solving the per-cell quadratic in the steady-state equation:
//!
//! `theta <- 1/2 [ m - d a + sqrt((m - d a)^2 + 4 d K theta) ]`
//!
//! started from the supersolution `theta = ||m||_inf`, whose continuous
//! analogue decreases monotonically to the steady state. An explicit-Euler
//! time integration serves as the independent oracle.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::DiscreteOperator;
use crate::resources::Resource;
use crate::spectral::{self, EigenOptions};

/// Iterates can only rise above the previous value by roundoff; anything
/// beyond this slack (scaled by ||m||_inf) is a numerical fault.
const MONOTONE_SLACK: f64 = 1e-8;

/// Positivity floor keeping iterates away from exact zero.
const POSITIVITY_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Max-norm change between successive iterates at which to stop (the
    /// residual must additionally be below 10 * tol).
    pub tol: f64,
    pub max_iter: usize,
    /// Options for the mu0 existence gate.
    pub eigen: EigenOptions,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            tol: 1e-10,
            max_iter: 400_000,
            eigen: EigenOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    FixedPoint,
    Evolve,
}

#[derive(Debug, Clone, Serialize)]
pub struct SteadyState {
    pub theta: Vec<f64>,
    pub d: f64,
    /// max-norm of d L[theta] + theta (m - theta).
    pub residual: f64,
    pub iterations: usize,
    pub total_population: f64,
    pub method: SolveMethod,
}

/// Pointwise residual max-norm of the steady-state equation.
pub fn residual(op: &DiscreteOperator, m: &Resource, d: f64, theta: &[f64]) -> f64 {
    let ltheta = op.apply(theta);
    let mut worst = 0.0f64;
    for i in 0..theta.len() {
        let r = d * ltheta[i] + theta[i] * (m.field()[i] - theta[i]);
        worst = worst.max(r.abs());
    }
    worst
}

/// Monotone fixed-point solve. Errors if mu0 <= 0 (no positive steady
/// state), on non-convergence, or if the scheme loses monotonicity.
pub fn solve_fixed_point(
    op: &DiscreteOperator,
    m: &Resource,
    d: f64,
    opts: &SolveOptions,
) -> Result<SteadyState> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::Config(format!("d = {d} must be positive")));
    }
    let grid = op.grid().clone();
    let n = grid.n_cells();
    if m.field().len() != n {
        return Err(Error::FieldLength {
            expected: n,
            got: m.field().len(),
        });
    }

    // existence gate: a positive Rayleigh quotient certifies mu0 > 0; only
    // run the full power iteration when the cheap certificate fails
    if spectral::mu0_lower_bound(op, m, d) <= 0.0 {
        let pv = spectral::principal_value(op, m, d, &opts.eigen)?;
        if pv.mu0 <= 0.0 {
            return Err(Error::NoPositiveSteadyState { mu0: pv.mu0 });
        }
    }

    let sup_m = m.sup_norm();
    if sup_m <= 0.0 {
        return Err(Error::Resource("resource is identically zero".into()));
    }
    let slack = MONOTONE_SLACK * sup_m.max(1.0);

    let mut theta = vec![sup_m; n];
    let mut ktheta = vec![0.0; n];
    let mut iterations = 0usize;
    let mut last_change = f64::INFINITY;
    let mut last_residual = f64::INFINITY;

    // residual of the previous iterate comes for free from the fresh K theta
    loop {
        op.apply_kernel_into(&theta, &mut ktheta);

        if last_change < opts.tol {
            let mut worst = 0.0f64;
            for i in 0..n {
                let r = d * (ktheta[i] - op.retention(i) * theta[i])
                    + theta[i] * (m.field()[i] - theta[i]);
                worst = worst.max(r.abs());
            }
            last_residual = worst;
            if worst < 10.0 * opts.tol {
                let total_population = grid.integrate(&theta)?;
                return Ok(SteadyState {
                    theta,
                    d,
                    residual: worst,
                    iterations,
                    total_population,
                    method: SolveMethod::FixedPoint,
                });
            }
        }

        if iterations >= opts.max_iter {
            return Err(Error::SolverNonConvergence {
                iterations,
                last_change,
                residual: last_residual,
            });
        }
        iterations += 1;

        let mut change = 0.0f64;
        for i in 0..n {
            let b = m.field()[i] - d * op.retention(i);
            let q = (4.0 * d * ktheta[i]).max(0.0);
            let disc = (b * b + q).sqrt();
            // rationalized branch avoids cancellation when m - d a < 0
            let next = if b >= 0.0 {
                0.5 * (b + disc)
            } else {
                let denom = disc - b;
                if denom > 0.0 {
                    q / (2.0 * denom)
                } else {
                    0.0
                }
            };
            let next = next.max(POSITIVITY_FLOOR);
            let rise = next - theta[i];
            if rise > slack {
                return Err(Error::MonotonicityFault {
                    iteration: iterations,
                    rise,
                });
            }
            change = change.max(rise.abs());
            theta[i] = next;
        }
        last_change = change;
    }
}

#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    pub dt: f64,
    pub t_end: f64,
    /// Time between stored snapshots (the initial state and the final state
    /// are always stored).
    pub snapshot_interval: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub snapshots: Vec<Vec<f64>>,
    pub dt: f64,
    /// Residual max-norm of the final state.
    pub final_residual: f64,
}

impl Trajectory {
    pub fn final_state(&self) -> &[f64] {
        self.snapshots.last().expect("trajectory has snapshots")
    }
}

/// Explicit-Euler positivity/stability bound `1 / (d max(a) + ||m||_inf)`.
pub fn stability_bound(op: &DiscreteOperator, m: &Resource, d: f64) -> f64 {
    1.0 / (d * op.max_retention() + m.sup_norm())
}

/// Explicit Euler integration of the dynamics; the independent oracle for
/// the fixed-point solver. Aborts if the state turns negative.
pub fn evolve(
    op: &DiscreteOperator,
    m: &Resource,
    d: f64,
    u0: &[f64],
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::Config(format!("d = {d} must be positive")));
    }
    let bound = stability_bound(op, m, d);
    if !(opts.dt > 0.0) || opts.dt >= bound {
        return Err(Error::StabilityBound {
            dt: opts.dt,
            bound,
        });
    }
    if u0.iter().any(|v| *v < 0.0 || !v.is_finite()) {
        return Err(Error::Resource("initial state must be nonnegative".into()));
    }

    let n = op.grid().n_cells();
    let steps = (opts.t_end / opts.dt).ceil() as usize;
    let snap_every = (opts.snapshot_interval / opts.dt).round().max(1.0) as usize;

    let mut u = u0.to_vec();
    let mut lu = vec![0.0; n];
    let mut times = vec![0.0];
    let mut snapshots = vec![u.clone()];
    for step in 1..=steps {
        op.apply_into(&u, &mut lu);
        let t = step as f64 * opts.dt;
        for i in 0..n {
            u[i] += opts.dt * (d * lu[i] + u[i] * (m.field()[i] - u[i]));
            if u[i] < 0.0 {
                return Err(Error::NegativeState { t });
            }
        }
        if step % snap_every == 0 || step == steps {
            times.push(t);
            snapshots.push(u.clone());
        }
    }

    let final_residual = residual(op, m, d, &u);
    Ok(Trajectory {
        times,
        snapshots,
        dt: opts.dt,
        final_residual,
    })
}

/// Evolve from `u0 = ||m||_inf` until the dynamics residual drops below
/// `tol` (or `t_max` is reached), returning the end state as a SteadyState.
/// Cross-validation path; the fixed-point solve is the production path.
pub fn solve_by_evolution(
    op: &DiscreteOperator,
    m: &Resource,
    d: f64,
    u0: &[f64],
    tol: f64,
    t_max: f64,
) -> Result<SteadyState> {
    let dt = 0.4 * stability_bound(op, m, d);
    let n = op.grid().n_cells();
    let mut u = u0.to_vec();
    let mut lu = vec![0.0; n];
    let mut iterations = 0usize;
    let mut worst = f64::INFINITY;
    let steps = (t_max / dt).ceil() as usize;
    for _ in 0..steps {
        op.apply_into(&u, &mut lu);
        worst = 0.0;
        for i in 0..n {
            let f = d * lu[i] + u[i] * (m.field()[i] - u[i]);
            worst = worst.max(f.abs());
            u[i] += dt * f;
            if u[i] < 0.0 {
                return Err(Error::NegativeState {
                    t: iterations as f64 * dt,
                });
            }
        }
        iterations += 1;
        if worst < tol {
            break;
        }
    }
    if worst >= tol {
        return Err(Error::SolverNonConvergence {
            iterations,
            last_change: worst,
            residual: worst,
        });
    }
    let total_population = op.grid().integrate(&u)?;
    Ok(SteadyState {
        residual: residual(op, m, d, &u),
        theta: u,
        d,
        iterations,
        total_population,
        method: SolveMethod::Evolve,
    })
}
