//! Principal value mu0 of the map `psi -> d L[psi] + m psi` and the energy
//! functional from the existence proof.
//!
//! mu0 is the supremum of the discrete Rayleigh quotient
//! `integral(d L[psi] psi + m psi^2) / integral(psi^2)`; its sign decides
//! whether a positive steady state exists. The map is self-adjoint in the
//! cell-measure inner product, so a shifted power iteration suffices.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::DiscreteOperator;
use crate::resources::Resource;

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    /// Stop when the Rayleigh-quotient increment falls below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            tol: 1e-12,
            max_iter: 100_000,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PrincipalValue {
    pub mu0: f64,
    /// Maximizing field, unit discrete L2 norm, sign-normalized so the
    /// largest-magnitude component is nonnegative.
    pub eigenfield: Vec<f64>,
    pub iterations: usize,
    /// ||(d L + m) psi - mu0 psi||_L2 for the returned unit eigenfield.
    pub residual: f64,
}

/// Largest eigenvalue of `psi -> d L[psi] + m psi` by power iteration on the
/// shifted map with `s = d max(a) + max(m)`; the shift makes the matrix
/// entrywise nonnegative, so the dominant eigenvalue is the shifted mu0.
pub fn principal_value(
    op: &DiscreteOperator,
    m: &Resource,
    d: f64,
    opts: &EigenOptions,
) -> Result<PrincipalValue> {
    if !(d > 0.0) {
        return Err(Error::Config(format!("d = {d} must be positive")));
    }
    let shift = d * op.max_retention() + m.sup_norm();
    power_iteration(op, m.field(), d, shift, opts)
}

pub(crate) fn power_iteration(
    op: &DiscreteOperator,
    m: &[f64],
    d: f64,
    shift: f64,
    opts: &EigenOptions,
) -> Result<PrincipalValue> {
    let grid = op.grid().clone();
    let n = grid.n_cells();

    // deterministic start: constant field plus a small kick on cell 0 so the
    // iteration never starts orthogonal to a sign-definite eigenfield
    let mut psi = vec![1.0; n];
    psi[0] += 1e-3;
    normalize(&grid, &mut psi);

    let mut work = vec![0.0; n];
    let mut rq = rayleigh_from_parts(op, m, d, &psi, &mut work);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        iterations += 1;
        // work = d L[psi] + m psi (already computed for the quotient); add
        // the shift and renormalize
        for i in 0..n {
            work[i] += shift * psi[i];
        }
        std::mem::swap(&mut psi, &mut work);
        normalize(&grid, &mut psi);
        let rq_next = rayleigh_from_parts(op, m, d, &psi, &mut work);
        let delta = (rq_next - rq).abs();
        rq = rq_next;
        if delta <= opts.tol * rq.abs().max(1.0) {
            converged = true;
            break;
        }
    }

    // sign normalization: largest-magnitude component nonnegative
    let mut peak = 0usize;
    for i in 0..n {
        if psi[i].abs() > psi[peak].abs() {
            peak = i;
        }
    }
    if psi[peak] < 0.0 {
        for v in &mut psi {
            *v = -*v;
        }
        for v in &mut work {
            *v = -*v;
        }
    }

    // work still holds (d L + m) psi for the returned psi
    let mut res2 = 0.0;
    for i in 0..n {
        let r = work[i] - rq * psi[i];
        res2 += r * r;
    }
    let residual = (res2 * grid.cell_measure()).sqrt();

    let value = PrincipalValue {
        mu0: rq,
        eigenfield: psi,
        iterations,
        residual,
    };
    if converged {
        Ok(value)
    } else {
        Err(Error::EigenNonConvergence {
            iterations,
            mu0: value.mu0,
            residual: value.residual,
        })
    }
}

fn normalize(grid: &crate::grid::Grid, v: &mut [f64]) {
    let norm = grid.norm_l2(v);
    if norm > 0.0 {
        for x in v {
            *x /= norm;
        }
    }
}

/// Rayleigh quotient of a unit-norm field; leaves `(d L + m) psi` in `work`.
fn rayleigh_from_parts(
    op: &DiscreteOperator,
    m: &[f64],
    d: f64,
    psi: &[f64],
    work: &mut [f64],
) -> f64 {
    op.apply_into(psi, work);
    for i in 0..psi.len() {
        work[i] = d * work[i] + m[i] * psi[i];
    }
    op.grid().inner(work, psi)
}

/// Rayleigh quotient of an arbitrary test field (a lower bound on mu0).
pub fn rayleigh_quotient(op: &DiscreteOperator, m: &Resource, d: f64, psi: &[f64]) -> f64 {
    let lpsi = op.apply(psi);
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..psi.len() {
        num += (d * lpsi[i] + m.field()[i] * psi[i]) * psi[i];
        den += psi[i] * psi[i];
    }
    num / den
}

/// Cheap positive-mu0 certificate: the best Rayleigh quotient over the
/// constant field and the resource itself. Positive means mu0 > 0 without
/// running the iteration.
pub fn mu0_lower_bound(op: &DiscreteOperator, m: &Resource, d: f64) -> f64 {
    let n = op.grid().n_cells();
    let ones = vec![1.0; n];
    let mut best = rayleigh_quotient(op, m, d, &ones);
    if m.sup_norm() > 0.0 {
        best = best.max(rayleigh_quotient(op, m, d, m.field()));
    }
    best
}

/// Energy functional value with its three quadrature parts:
/// `E[v] = 1/2 (dispersal + resource) - 1/3 cubic`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EnergyValue {
    pub value: f64,
    /// integral d L[v] v
    pub dispersal: f64,
    /// integral m v^2
    pub resource: f64,
    /// integral v^3
    pub cubic: f64,
}

pub fn energy(op: &DiscreteOperator, m: &Resource, d: f64, v: &[f64]) -> EnergyValue {
    let grid = op.grid();
    let lv = op.apply(v);
    let mut dispersal = 0.0;
    let mut resource = 0.0;
    let mut cubic = 0.0;
    for i in 0..v.len() {
        dispersal += d * lv[i] * v[i];
        resource += m.field()[i] * v[i] * v[i];
        cubic += v[i] * v[i] * v[i];
    }
    let w = grid.cell_measure();
    dispersal *= w;
    resource *= w;
    cubic *= w;
    EnergyValue {
        value: 0.5 * (dispersal + resource) - cubic / 3.0,
        dispersal,
        resource,
        cubic,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Domain, Grid};
    use crate::kernel::{Backend, BoundaryCondition, KernelSpec};
    use crate::resources::{from_function, Resource};
    use std::sync::Arc;

    fn two_cell_setup() -> (DiscreteOperator, Resource) {
        let grid = Arc::new(Grid::build(&Domain::Interval { lo: 0.0, hi: 1.0 }, 2).unwrap());
        let op = DiscreteOperator::build(
            grid.clone(),
            KernelSpec::Uniform { radius: 1.0 },
            BoundaryCondition::Neumann,
            Backend::Dense,
        )
        .unwrap();
        let m = Resource::new(&grid, vec![2.0, 0.0]).unwrap();
        (op, m)
    }

    #[test]
    fn constant_resource_gives_mu0_equal_c() {
        let grid = Arc::new(Grid::build(&Domain::Interval { lo: 0.0, hi: 1.0 }, 32).unwrap());
        let op = DiscreteOperator::build_auto(
            grid.clone(),
            KernelSpec::Uniform { radius: 1.0 },
            BoundaryCondition::Neumann,
        )
        .unwrap();
        for (c, d) in [(0.7, 0.5), (2.5, 10.0)] {
            let m = from_function(&grid, |_| c, false).unwrap();
            let pv = principal_value(&op, &m, d, &EigenOptions::default()).unwrap();
            assert!((pv.mu0 - c).abs() < 1e-9, "mu0 = {} for c = {c}", pv.mu0);
            // constant eigenfield
            let spread = pv
                .eigenfield
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    (lo.min(*v), hi.max(*v))
                });
            assert!(spread.1 - spread.0 < 1e-4);
        }
    }

    #[test]
    fn two_cell_mu0_matches_closed_form() {
        // map matrix [[1.75, 0.25], [0.25, -0.25]]: largest eigenvalue
        // (1.5 + sqrt(4.25)) / 2
        let (op, m) = two_cell_setup();
        let exact = (1.5 + 4.25f64.sqrt()) / 2.0;
        let pv = principal_value(&op, &m, 1.0, &EigenOptions::default()).unwrap();
        assert!(
            (pv.mu0 - exact).abs() < 1e-10,
            "mu0 = {}, exact = {}",
            pv.mu0,
            exact
        );
        assert!((pv.mu0 - 1.78078).abs() < 1e-5);
        // Rayleigh quotient of the eigenfield reproduces mu0 within residual
        let rq = rayleigh_quotient(&op, &m, 1.0, &pv.eigenfield);
        assert!((rq - pv.mu0).abs() <= pv.residual + 1e-12);
    }

    #[test]
    fn m1_resource_dominates_flat_test_field() {
        // |Omega| = 1: psi = 1 gives quotient 1, so mu0 >= 1
        let grid = Arc::new(Grid::build(&Domain::Interval { lo: 0.0, hi: 1.0 }, 64).unwrap());
        let op = DiscreteOperator::build_auto(
            grid.clone(),
            KernelSpec::Uniform { radius: 1.0 },
            BoundaryCondition::Neumann,
        )
        .unwrap();
        // unique interior maximum keeps the small-d spectrum well separated
        let m = from_function(&grid, |c| 1.2 + (3.1 * c[0]).sin(), true).unwrap();
        for d in [0.01, 1.0, 100.0] {
            let pv = principal_value(&op, &m, d, &EigenOptions::default()).unwrap();
            assert!(pv.mu0 >= 1.0 - 1e-8, "d = {d}: mu0 = {}", pv.mu0);
            assert!(mu0_lower_bound(&op, &m, d) > 0.0);
        }
    }

    #[test]
    fn mu0_monotone_in_resource_and_d() {
        let grid = Arc::new(Grid::build(&Domain::Interval { lo: 0.0, hi: 1.0 }, 48).unwrap());
        let op = DiscreteOperator::build_auto(
            grid.clone(),
            KernelSpec::Uniform { radius: 0.5 },
            BoundaryCondition::Neumann,
        )
        .unwrap();
        let m1 = from_function(&grid, |c| 0.5 + c[0], false).unwrap();
        let m2 = from_function(&grid, |c| 0.8 + c[0], false).unwrap();
        let opts = EigenOptions::default();
        let a = principal_value(&op, &m1, 2.0, &opts).unwrap().mu0;
        let b = principal_value(&op, &m2, 2.0, &opts).unwrap().mu0;
        assert!(a <= b + 1e-9, "monotone in m: {a} vs {b}");

        let lo_d = principal_value(&op, &m1, 0.5, &opts).unwrap().mu0;
        let hi_d = principal_value(&op, &m1, 5.0, &opts).unwrap().mu0;
        assert!(hi_d <= lo_d + 1e-9, "nonincreasing in d: {lo_d} -> {hi_d}");
    }

    #[test]
    fn eigenfield_independent_of_shift() {
        let (op, m) = two_cell_setup();
        let opts = EigenOptions::default();
        let base = principal_value(&op, &m, 1.0, &opts).unwrap();
        let other = power_iteration(&op, m.field(), 1.0, 7.5, &opts).unwrap();
        assert!((base.mu0 - other.mu0).abs() < 1e-9);
        for (x, y) in base.eigenfield.iter().zip(&other.eigenfield) {
            assert!((x - y).abs() < 1e-6);
        }
    }

    #[test]
    fn energy_two_cell_constant_field() {
        let (op, m) = two_cell_setup();
        let zero = energy(&op, &m, 1.0, &[0.0, 0.0]);
        assert_eq!(zero.value, 0.0);
        let e = energy(&op, &m, 1.0, &[1.0, 1.0]);
        assert!((e.dispersal).abs() < 1e-15);
        assert!((e.resource - 1.0).abs() < 1e-15);
        assert!((e.cubic - 1.0).abs() < 1e-15);
        assert!((e.value - 1.0 / 6.0).abs() < 1e-15);
    }
}
