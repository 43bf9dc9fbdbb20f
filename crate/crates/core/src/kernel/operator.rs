//! Discrete realization of the nonlocal dispersal operator.
//!
//! All backends evaluate the kernel at lattice-offset distances
//! `h * sqrt(dx^2 + dy^2)`, so dense, matrix-free and FFT paths agree on the
//! same tap values and differ only in summation order.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::fft::FftConvolver;
use super::KernelSpec;
use crate::error::{Error, Result};
use crate::grid::Grid;

/// Largest cell count the dense backend will materialize.
pub const DENSE_LIMIT: usize = 4096;

/// Allowed quadrature overshoot of the boundary mass above 1.
pub const OVERSHOOT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    /// Retention term `a(x) u(x)`: individuals jumping outside stay put.
    Neumann,
    /// Retention term `u(x)`: mass crossing the boundary is lost.
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Dense,
    MatrixFree,
    Fft,
}

impl Backend {
    /// Pick a backend: masked grids need the pairwise path, the 1D uniform
    /// kernel has an O(N) sliding window, large full grids go through FFT.
    pub fn auto(grid: &Grid, kernel: &KernelSpec) -> Backend {
        if !grid.is_full() {
            Backend::MatrixFree
        } else if grid.dim() == 1 && matches!(kernel, KernelSpec::Uniform { .. }) {
            Backend::MatrixFree
        } else if grid.n_cells() <= 512 {
            Backend::Dense
        } else {
            Backend::Fft
        }
    }
}

#[derive(Debug)]
enum Impl {
    Dense { k: Vec<f64> },
    /// Uniform kernel on a full 1D grid: compensated prefix sums, O(N).
    Window { value: f64, reach: usize },
    Taps1D,
    Taps2D,
    /// Masked grid: direct pairwise accumulation over active cells.
    Pairwise { coords: Vec<(u32, u32)> },
    Fft(FftConvolver),
}

/// The kernel as an apply-able linear map on grid fields, plus the
/// boundary-mass field. Immutable after construction; `apply` is re-entrant.
#[derive(Debug)]
pub struct DiscreteOperator {
    grid: Arc<Grid>,
    kernel: KernelSpec,
    bc: BoundaryCondition,
    backend: Backend,
    imp: Impl,
    taps: TapTable,
    a: Vec<f64>,
    max_overshoot: f64,
    sup_k: f64,
}

/// Kernel values at lattice offsets: `t(dx,dy) = J(h * |(dx,dy)|)`.
#[derive(Debug)]
struct TapTable {
    lx: usize,
    ly: usize,
    values: Vec<f64>,
}

impl TapTable {
    fn build(grid: &Grid, kernel: &KernelSpec) -> TapTable {
        let (nx, ny) = grid.lattice_shape();
        let h = grid.h();
        let reach = (kernel.support_radius() / h).ceil() as usize + 1;
        let lx = reach.min(nx - 1);
        let ly = if grid.dim() == 1 { 0 } else { reach.min(ny - 1) };
        let dim = grid.dim();
        let mut values = vec![0.0; (lx + 1) * (ly + 1)];
        for dy in 0..=ly {
            for dx in 0..=lx {
                let r = h * ((dx * dx + dy * dy) as f64).sqrt();
                values[dx + (lx + 1) * dy] = kernel.eval(dim, r);
            }
        }
        TapTable { lx, ly, values }
    }

    #[inline]
    fn at(&self, dx: usize, dy: usize) -> f64 {
        if dx > self.lx || dy > self.ly {
            0.0
        } else {
            self.values[dx + (self.lx + 1) * dy]
        }
    }
}

impl DiscreteOperator {
    pub fn build(
        grid: Arc<Grid>,
        kernel: KernelSpec,
        bc: BoundaryCondition,
        backend: Backend,
    ) -> Result<DiscreteOperator> {
        kernel.validate(grid.dim())?;
        let h = grid.h();
        if 2.0 * kernel.support_radius() < 4.0 * h {
            return Err(Error::Kernel(format!(
                "kernel support diameter {:.3e} < 4h = {:.3e}: midpoint quadrature of a near-delta kernel is meaningless",
                2.0 * kernel.support_radius(),
                4.0 * h
            )));
        }

        let n = grid.n_cells();
        let taps = TapTable::build(&grid, &kernel);
        let imp = match backend {
            Backend::Dense => {
                if n > DENSE_LIMIT {
                    return Err(Error::Backend(format!(
                        "dense backend limited to {DENSE_LIMIT} cells, grid has {n}"
                    )));
                }
                let mut k = vec![0.0; n * n];
                let (nx, _) = grid.lattice_shape();
                let idx = grid.active_lattice_indices();
                for i in 0..n {
                    let (xi, yi) = (idx[i] % nx, idx[i] / nx);
                    for j in 0..n {
                        let (xj, yj) = (idx[j] % nx, idx[j] / nx);
                        k[i * n + j] = taps.at(xi.abs_diff(xj), yi.abs_diff(yj));
                    }
                }
                Impl::Dense { k }
            }
            Backend::MatrixFree => {
                if !grid.is_full() {
                    let (nx, _) = grid.lattice_shape();
                    let coords = grid
                        .active_lattice_indices()
                        .iter()
                        .map(|&idx| ((idx % nx) as u32, (idx / nx) as u32))
                        .collect();
                    Impl::Pairwise { coords }
                } else if grid.dim() == 1 {
                    if let KernelSpec::Uniform { .. } = kernel {
                        let value = taps.at(0, 0);
                        let mut reach = 0;
                        while taps.at(reach + 1, 0) > 0.0 {
                            reach += 1;
                        }
                        Impl::Window { value, reach }
                    } else {
                        Impl::Taps1D
                    }
                } else {
                    Impl::Taps2D
                }
            }
            Backend::Fft => {
                if !grid.is_full() {
                    return Err(Error::Backend(
                        "FFT backend requires an unmasked grid (disk grids fall back to matrix-free)"
                            .into(),
                    ));
                }
                let l = taps.lx.max(taps.ly);
                Impl::Fft(FftConvolver::new(&grid, l, |dx, dy| taps.at(dx, dy)))
            }
        };

        let sup_k = kernel.sup_value(grid.dim());
        let mut op = DiscreteOperator {
            grid,
            kernel,
            bc,
            backend,
            imp,
            taps,
            a: Vec::new(),
            max_overshoot: 0.0,
            sup_k,
        };

        // boundary mass a_i = sum_j J(x_i - x_j) * cell_measure
        let ones = vec![1.0; n];
        let mut a = vec![0.0; n];
        op.apply_kernel_into(&ones, &mut a);
        let mut overshoot = 0.0f64;
        for v in &mut a {
            if *v > 1.0 {
                overshoot = overshoot.max(*v - 1.0);
                if *v - 1.0 > OVERSHOOT_TOL {
                    return Err(Error::QuadratureOvershoot { overshoot: *v - 1.0 });
                }
                *v = 1.0;
            }
            if *v <= 0.0 {
                return Err(Error::Kernel(
                    "boundary mass vanished on some cell: kernel/grid mismatch".into(),
                ));
            }
        }
        op.a = a;
        op.max_overshoot = overshoot;
        Ok(op)
    }

    /// Build with the automatically chosen backend.
    pub fn build_auto(
        grid: Arc<Grid>,
        kernel: KernelSpec,
        bc: BoundaryCondition,
    ) -> Result<DiscreteOperator> {
        let backend = Backend::auto(&grid, &kernel);
        DiscreteOperator::build(grid, kernel, bc, backend)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }

    pub fn boundary_condition(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// The boundary-mass field a(x), clamped to <= 1.
    pub fn boundary_mass(&self) -> &[f64] {
        &self.a
    }

    /// Retention coefficient used in L[u]: a(x) for Neumann, 1 for Dirichlet.
    pub fn retention(&self, i: usize) -> f64 {
        match self.bc {
            BoundaryCondition::Neumann => self.a[i],
            BoundaryCondition::Dirichlet => 1.0,
        }
    }

    pub fn max_retention(&self) -> f64 {
        match self.bc {
            BoundaryCondition::Neumann => self.a.iter().copied().fold(0.0, f64::max),
            BoundaryCondition::Dirichlet => 1.0,
        }
    }

    pub fn min_boundary_mass(&self) -> f64 {
        self.a.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_boundary_mass(&self) -> f64 {
        self.a.iter().copied().fold(0.0, f64::max)
    }

    /// sup of the kernel, `||k||_inf`.
    pub fn sup_kernel(&self) -> f64 {
        self.sup_k
    }

    /// Largest boundary-mass quadrature overshoot that was clamped.
    pub fn max_overshoot(&self) -> f64 {
        self.max_overshoot
    }

    /// Kernel integral `(Ku)_i = cell_measure * sum_j J(x_i - x_j) u_j`.
    pub fn apply_kernel_into(&self, u: &[f64], out: &mut [f64]) {
        let n = self.grid.n_cells();
        assert_eq!(u.len(), n);
        assert_eq!(out.len(), n);
        let w = self.grid.cell_measure();
        match &self.imp {
            Impl::Dense { k } => {
                for i in 0..n {
                    let row = &k[i * n..(i + 1) * n];
                    let mut s = 0.0;
                    for (kij, uj) in row.iter().zip(u) {
                        s += kij * uj;
                    }
                    out[i] = s * w;
                }
            }
            Impl::Window { value, reach } => {
                // compensated prefix sums keep window differences accurate
                let mut prefix = vec![0.0; n + 1];
                let (mut s, mut comp) = (0.0f64, 0.0f64);
                for (j, &uj) in u.iter().enumerate() {
                    let y = uj - comp;
                    let t = s + y;
                    comp = (t - s) - y;
                    s = t;
                    prefix[j + 1] = s + comp;
                }
                let cw = value * w;
                for i in 0..n {
                    let lo = i.saturating_sub(*reach);
                    let hi = (i + reach + 1).min(n);
                    out[i] = cw * (prefix[hi] - prefix[lo]);
                }
            }
            Impl::Taps1D => {
                let l = self.taps.lx;
                for i in 0..n {
                    let lo = i.saturating_sub(l);
                    let hi = (i + l + 1).min(n);
                    let mut s = 0.0;
                    for j in lo..hi {
                        s += self.taps.at(i.abs_diff(j), 0) * u[j];
                    }
                    out[i] = s * w;
                }
            }
            Impl::Taps2D => {
                let (nx, ny) = self.grid.lattice_shape();
                let (lx, ly) = (self.taps.lx, self.taps.ly);
                for yi in 0..ny {
                    let ylo = yi.saturating_sub(ly);
                    let yhi = (yi + ly + 1).min(ny);
                    for xi in 0..nx {
                        let xlo = xi.saturating_sub(lx);
                        let xhi = (xi + lx + 1).min(nx);
                        let mut s = 0.0;
                        for yj in ylo..yhi {
                            let dy = yi.abs_diff(yj);
                            for xj in xlo..xhi {
                                s += self.taps.at(xi.abs_diff(xj), dy) * u[xj + nx * yj];
                            }
                        }
                        out[xi + nx * yi] = s * w;
                    }
                }
            }
            Impl::Pairwise { coords } => {
                let (lx, ly) = (self.taps.lx as u32, self.taps.ly as u32);
                for i in 0..n {
                    let (xi, yi) = coords[i];
                    let mut s = 0.0;
                    for (j, &(xj, yj)) in coords.iter().enumerate() {
                        let dx = xi.abs_diff(xj);
                        let dy = yi.abs_diff(yj);
                        if dx <= lx && dy <= ly {
                            s += self.taps.at(dx as usize, dy as usize) * u[j];
                        }
                    }
                    out[i] = s * w;
                }
            }
            Impl::Fft(conv) => conv.apply(u, out),
        }
    }

    /// Full operator `L[u] = Ku - retention * u`.
    pub fn apply_into(&self, u: &[f64], out: &mut [f64]) {
        self.apply_kernel_into(u, out);
        match self.bc {
            BoundaryCondition::Neumann => {
                for i in 0..u.len() {
                    out[i] -= self.a[i] * u[i];
                }
            }
            BoundaryCondition::Dirichlet => {
                for i in 0..u.len() {
                    out[i] -= u[i];
                }
            }
        }
    }

    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.apply_into(u, &mut out);
        out
    }

    pub fn apply_kernel(&self, u: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        self.apply_kernel_into(u, &mut out);
        out
    }
}

/// Convenience wrapper for the boundary-mass field alone.
pub fn boundary_mass(grid: Arc<Grid>, kernel: &KernelSpec) -> Result<Vec<f64>> {
    let op = DiscreteOperator::build_auto(grid, kernel.clone(), BoundaryCondition::Neumann)?;
    Ok(op.boundary_mass().to_vec())
}

/// Outcome of the identity checks the steady-state theory relies on.
#[derive(Debug, Clone, Serialize)]
pub struct SelfcheckReport {
    pub fields: usize,
    /// max |integrate(L[u]) - expected| / integrate(|u|); expected is 0 for
    /// Neumann and integrate((a-1)u) for Dirichlet.
    pub max_conservation_defect: f64,
    /// max over fields of integrate(L[u] u) clipped below at 0.
    pub max_positive_energy: f64,
    /// max |<L u, v> - <u, L v>| / scale over random pairs.
    pub max_asymmetry: f64,
    /// (backend name, max relative gap against this operator).
    pub backend_gaps: Vec<(String, f64)>,
    pub max_overshoot: f64,
}

impl SelfcheckReport {
    pub fn max_violation(&self) -> f64 {
        let gaps = self
            .backend_gaps
            .iter()
            .map(|g| g.1)
            .fold(0.0f64, f64::max);
        self.max_conservation_defect
            .max(self.max_positive_energy)
            .max(self.max_asymmetry)
            .max(gaps)
    }
}

/// Verify symmetry, conservation, negative semidefiniteness and backend
/// agreement on `n_fields` seeded random fields. Report only, never errors.
pub fn operator_selfcheck(
    op: &DiscreteOperator,
    n_fields: usize,
    seed: u64,
) -> SelfcheckReport {
    let grid = op.grid();
    let n = grid.n_cells();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fields = Vec::with_capacity(n_fields);
    for _ in 0..n_fields {
        fields.push((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<f64>>());
    }

    let mut max_cons = 0.0f64;
    let mut max_pos_energy = 0.0f64;
    for u in &fields {
        let lu = op.apply(u);
        let abs_u: Vec<f64> = u.iter().map(|v| v.abs()).collect();
        let scale = grid.integrate(&abs_u).unwrap().max(f64::MIN_POSITIVE);
        let total = grid.integrate(&lu).unwrap();
        let expected = match op.boundary_condition() {
            BoundaryCondition::Neumann => 0.0,
            BoundaryCondition::Dirichlet => {
                let am1u: Vec<f64> = op
                    .boundary_mass()
                    .iter()
                    .zip(u)
                    .map(|(a, v)| (a - 1.0) * v)
                    .collect();
                grid.integrate(&am1u).unwrap()
            }
        };
        max_cons = max_cons.max((total - expected).abs() / scale);
        max_pos_energy = max_pos_energy.max(grid.inner(&lu, u).max(0.0));
    }

    let mut max_asym = 0.0f64;
    for pair in fields.chunks(2) {
        if pair.len() < 2 {
            break;
        }
        let (u, v) = (&pair[0], &pair[1]);
        let lu = op.apply(u);
        let lv = op.apply(v);
        let luv = grid.inner(&lu, v);
        let ulv = grid.inner(u, &lv);
        let scale = luv.abs().max(ulv.abs()).max(1e-30);
        max_asym = max_asym.max((luv - ulv).abs() / scale);
    }

    let mut backend_gaps = Vec::new();
    let alternates: Vec<Backend> = [Backend::Dense, Backend::MatrixFree, Backend::Fft]
        .into_iter()
        .filter(|b| *b != op.backend())
        .collect();
    for alt in alternates {
        if alt == Backend::Dense && n > DENSE_LIMIT {
            continue;
        }
        if alt == Backend::Fft && !grid.is_full() {
            continue;
        }
        let other = match DiscreteOperator::build(
            grid.clone(),
            op.kernel().clone(),
            op.boundary_condition(),
            alt,
        ) {
            Ok(o) => o,
            Err(_) => continue,
        };
        let mut gap = 0.0f64;
        for u in &fields {
            let y1 = op.apply(u);
            let y2 = other.apply(u);
            let norm = y1.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-30);
            let diff = y1
                .iter()
                .zip(&y2)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            gap = gap.max(diff / norm);
        }
        backend_gaps.push((format!("{alt:?}").to_lowercase(), gap));
    }

    SelfcheckReport {
        fields: n_fields,
        max_conservation_defect: max_cons,
        max_positive_energy: max_pos_energy,
        max_asymmetry: max_asym,
        backend_gaps,
        max_overshoot: op.max_overshoot(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Domain;

    fn interval_grid(n: usize) -> Arc<Grid> {
        Arc::new(Grid::build(&Domain::Interval { lo: 0.0, hi: 1.0 }, n).unwrap())
    }

    fn wide_uniform() -> KernelSpec {
        KernelSpec::Uniform { radius: 1.0 }
    }

    #[test]
    fn boundary_mass_constant_half_for_wide_kernel() {
        // J = 1/2 on [-1,1] covers all of [0,1] from every x, so a = 1/2.
        for n in [2usize, 4, 64] {
            let op = DiscreteOperator::build_auto(
                interval_grid(n),
                wide_uniform(),
                BoundaryCondition::Neumann,
            )
            .unwrap();
            for &ai in op.boundary_mass() {
                assert!((ai - 0.5).abs() < 1e-14, "n = {n}: a = {ai}");
            }
        }
    }

    #[test]
    fn boundary_mass_one_inside_small_kernel_support() {
        // snapped resolution: radius/h = 5.5, interior mass exactly 1
        let n = 110;
        let op = DiscreteOperator::build_auto(
            interval_grid(n),
            KernelSpec::Uniform { radius: 0.05 },
            BoundaryCondition::Neumann,
        )
        .unwrap();
        let g = op.grid().clone();
        let mid = g.nearest_cell([0.5, 0.0]);
        assert!((op.boundary_mass()[mid] - 1.0).abs() < 1e-12);
        // and strictly below 1 near the boundary
        assert!(op.boundary_mass()[0] < 1.0);
    }

    #[test]
    fn overshoot_errors_on_unsnapped_uniform_kernel() {
        // radius/h integer: midpoint quadrature overshoots by h/(2r) = 0.1
        let err = DiscreteOperator::build_auto(
            interval_grid(100),
            KernelSpec::Uniform { radius: 0.05 },
            BoundaryCondition::Neumann,
        )
        .unwrap_err();
        assert!(matches!(err, Error::QuadratureOvershoot { .. }));
    }

    #[test]
    fn ring_kernel_boundary_mass_matches_closed_form() {
        // on (-1,1): a(x) = 0.2 + 0.3 x^2
        let grid = Arc::new(Grid::build(&Domain::Interval { lo: -1.0, hi: 1.0 }, 2000).unwrap());
        let op = DiscreteOperator::build_auto(
            grid.clone(),
            KernelSpec::Ring {
                delta: 0.1,
                slope: 0.6,
            },
            BoundaryCondition::Neumann,
        )
        .unwrap();
        let a = op.boundary_mass();
        let i0 = grid.nearest_cell([0.0, 0.0]);
        assert!((a[i0] - 0.2).abs() < 1e-4, "a(0) = {}", a[i0]);
        assert!((a[0] - 0.5).abs() < 2e-3, "a(-1) = {}", a[0]);
        assert!((a[1999] - 0.5).abs() < 2e-3, "a(1) = {}", a[1999]);
        for (i, c) in grid.centers().enumerate() {
            let exact = 0.2 + 0.3 * c[0] * c[0];
            assert!((a[i] - exact).abs() < 1e-3, "a({}) = {}", c[0], a[i]);
        }
    }

    #[test]
    fn apply_matches_hand_computation_two_cells() {
        let op = DiscreteOperator::build(
            interval_grid(2),
            wide_uniform(),
            BoundaryCondition::Neumann,
            Backend::Dense,
        )
        .unwrap();
        let lu = op.apply(&[1.0, 0.0]);
        assert!((lu[0] + 0.25).abs() < 1e-15);
        assert!((lu[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn constants_are_annihilated_neumann() {
        let op = DiscreteOperator::build_auto(
            interval_grid(64),
            wide_uniform(),
            BoundaryCondition::Neumann,
        )
        .unwrap();
        let lu = op.apply(&vec![3.7; 64]);
        for v in lu {
            assert!(v.abs() < 1e-13);
        }
    }

    #[test]
    fn dirichlet_constant_gives_a_minus_one() {
        let op = DiscreteOperator::build_auto(
            interval_grid(32),
            wide_uniform(),
            BoundaryCondition::Dirichlet,
        )
        .unwrap();
        let lu = op.apply(&vec![1.0; 32]);
        for (v, a) in lu.iter().zip(op.boundary_mass()) {
            assert!((v - (a - 1.0)).abs() < 1e-14);
            assert!(*v <= 0.0);
        }
    }

    #[test]
    fn selfcheck_identities_hold() {
        let op = DiscreteOperator::build_auto(
            interval_grid(64),
            wide_uniform(),
            BoundaryCondition::Neumann,
        )
        .unwrap();
        let rep = operator_selfcheck(&op, 10, 7);
        assert!(rep.max_conservation_defect < 1e-12, "{rep:?}");
        assert!(rep.max_positive_energy < 1e-12, "{rep:?}");
        assert!(rep.max_asymmetry < 1e-12, "{rep:?}");
        for (name, gap) in &rep.backend_gaps {
            assert!(*gap < 1e-10, "backend {name} gap {gap}");
        }
    }

    #[test]
    fn backends_agree_on_masked_grid() {
        let grid = Arc::new(
            Grid::build(
                &Domain::Disk {
                    center: [0.0, 0.0],
                    radius: 1.0,
                },
                24,
            )
            .unwrap(),
        );
        // support wider than the disk keeps a < 1 everywhere, so the
        // boundary-mass quadrature cannot overshoot on the masked lattice
        let op = DiscreteOperator::build(
            grid,
            KernelSpec::Uniform { radius: 1.2 },
            BoundaryCondition::Neumann,
            Backend::MatrixFree,
        )
        .unwrap();
        let rep = operator_selfcheck(&op, 4, 3);
        assert!(rep.max_violation() < 1e-10, "{rep:?}");
    }

    #[test]
    fn fft_rejected_on_masked_grid() {
        let grid = Arc::new(
            Grid::build(
                &Domain::Disk {
                    center: [0.0, 0.0],
                    radius: 1.0,
                },
                16,
            )
            .unwrap(),
        );
        let err = DiscreteOperator::build(
            grid,
            KernelSpec::Uniform { radius: 0.5 },
            BoundaryCondition::Neumann,
            Backend::Fft,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Backend(_)));
    }

    #[test]
    fn under_resolved_kernel_rejected() {
        let err = DiscreteOperator::build_auto(
            interval_grid(16),
            KernelSpec::Uniform { radius: 0.05 },
            BoundaryCondition::Neumann,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Kernel(_)));
    }

    #[test]
    fn fft_agrees_with_taps_on_2d_rectangle() {
        let grid = Arc::new(
            Grid::build(
                &Domain::Rectangle {
                    lo: [0.0, 0.0],
                    hi: [1.0, 1.0],
                },
                24,
            )
            .unwrap(),
        );
        let k = KernelSpec::Tent { radius: 1.5 };
        let mf = DiscreteOperator::build(
            grid.clone(),
            k.clone(),
            BoundaryCondition::Neumann,
            Backend::MatrixFree,
        )
        .unwrap();
        let ff =
            DiscreteOperator::build(grid.clone(), k, BoundaryCondition::Neumann, Backend::Fft)
                .unwrap();
        let u: Vec<f64> = grid
            .centers()
            .map(|c| (7.0 * c[0]).sin() + (3.0 * c[1]).cos())
            .collect();
        let y1 = mf.apply(&u);
        let y2 = ff.apply(&u);
        let norm = y1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for (a, b) in y1.iter().zip(&y2) {
            assert!((a - b).abs() / norm < 1e-10);
        }
    }
}
