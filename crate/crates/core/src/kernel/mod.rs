//! Dispersal kernels and the discrete nonlocal operator.
//!
//! Kernels are translation-invariant and radially symmetric: k(x,y) = J(x-y)
//! with J >= 0, J(0) > 0 and unit mass over R^n. Built-in profiles carry an
//! analytic normalization constant; tabulated profiles are checked by
//! quadrature instead. The discrete operator realizes
//! `L[u](x) = integral k(x,y) u(y) dy - a(x) u(x)` on a grid, with
//! `a(x) = integral_Omega k(y,x) dy` the boundary-mass (retention) field.

mod fft;
mod operator;

pub use operator::{
    boundary_mass, operator_selfcheck, Backend, BoundaryCondition, DiscreteOperator,
    SelfcheckReport,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the unit-mass check for tabulated kernels.
pub const TABULATED_MASS_TOL: f64 = 1e-6;

/// Radial kernel profile. `eval` returns J(|z|) including normalization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// Constant on |z| <= radius.
    Uniform { radius: f64 },
    /// Linear decay to zero at |z| = radius.
    Tent { radius: f64 },
    /// Gaussian with a hard cutoff at `cutoff * sigma`, renormalized so the
    /// truncated profile has unit mass (keeps compact support semantics).
    TruncatedGaussian { sigma: f64, cutoff: f64 },
    /// Flat value `delta` on |z| <= 1, then rising linearly with `slope` on
    /// 1 < |z| <= 2. Boundary mass is smallest at the domain center, so
    /// resources do best concentrated away from the boundary.
    Ring { delta: f64, slope: f64 },
    /// Piecewise-linear radial profile from (radius, value) samples starting
    /// at radius 0. Must already have unit mass (checked, not rescaled).
    Tabulated { samples: Vec<(f64, f64)> },
}

impl KernelSpec {
    /// Radius of the support of J (J = 0 beyond it).
    pub fn support_radius(&self) -> f64 {
        match self {
            KernelSpec::Uniform { radius } | KernelSpec::Tent { radius } => *radius,
            KernelSpec::TruncatedGaussian { sigma, cutoff } => sigma * cutoff,
            KernelSpec::Ring { .. } => 2.0,
            KernelSpec::Tabulated { samples } => samples.last().map_or(0.0, |s| s.0),
        }
    }

    /// Unnormalized radial profile.
    fn profile(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        match self {
            KernelSpec::Uniform { radius } => {
                if r <= *radius {
                    1.0
                } else {
                    0.0
                }
            }
            KernelSpec::Tent { radius } => {
                if r <= *radius {
                    1.0 - r / radius
                } else {
                    0.0
                }
            }
            KernelSpec::TruncatedGaussian { sigma, cutoff } => {
                if r <= sigma * cutoff {
                    (-0.5 * (r / sigma).powi(2)).exp()
                } else {
                    0.0
                }
            }
            KernelSpec::Ring { delta, slope } => {
                if r <= 1.0 {
                    *delta
                } else if r <= 2.0 {
                    delta + slope * (r - 1.0)
                } else {
                    0.0
                }
            }
            KernelSpec::Tabulated { samples } => interp_radial(samples, r),
        }
    }

    /// Mass of the unnormalized profile over R^dim.
    fn profile_mass(&self, dim: usize) -> f64 {
        use std::f64::consts::PI;
        match (self, dim) {
            (KernelSpec::Uniform { radius }, 1) => 2.0 * radius,
            (KernelSpec::Uniform { radius }, _) => PI * radius * radius,
            (KernelSpec::Tent { radius }, 1) => *radius,
            (KernelSpec::Tent { radius }, _) => PI * radius * radius / 3.0,
            (KernelSpec::TruncatedGaussian { sigma, cutoff }, 1) => {
                sigma * (2.0 * PI).sqrt() * libm::erf(cutoff / std::f64::consts::SQRT_2)
            }
            (KernelSpec::TruncatedGaussian { sigma, cutoff }, _) => {
                2.0 * PI * sigma * sigma * (1.0 - (-0.5 * cutoff * cutoff).exp())
            }
            // 2*delta on [-1,1] plus two linear flanks of mass delta + slope/2.
            (KernelSpec::Ring { delta, slope }, 1) => 4.0 * delta + slope,
            // polar: delta*pi + 2*pi * int_1^2 (delta + slope (r-1)) r dr
            (KernelSpec::Ring { delta, slope }, _) => {
                4.0 * PI * delta + 5.0 * PI * slope / 3.0
            }
            (KernelSpec::Tabulated { samples }, d) => tabulated_mass(samples, d),
        }
    }

    /// Normalization constant c with `integral c * profile = 1`.
    pub fn normalization(&self, dim: usize) -> f64 {
        1.0 / self.profile_mass(dim)
    }

    /// Normalized kernel value J(|z|) for |z| = r.
    pub fn eval(&self, dim: usize, r: f64) -> f64 {
        match self {
            // tabulated kernels must arrive normalized (checked in validate)
            KernelSpec::Tabulated { .. } => self.profile(r),
            _ => self.normalization(dim) * self.profile(r),
        }
    }

    /// sup of the normalized kernel, the `||k||_inf` of the bound constants.
    pub fn sup_value(&self, dim: usize) -> f64 {
        match self {
            KernelSpec::Ring { delta, slope } => {
                self.normalization(dim) * (delta + slope).max(*delta)
            }
            KernelSpec::Tabulated { samples } => samples
                .iter()
                .map(|s| s.1)
                .fold(0.0, f64::max),
            _ => self.normalization(dim) * self.profile(0.0),
        }
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        if dim != 1 && dim != 2 {
            return Err(Error::Kernel(format!("unsupported dimension {dim}")));
        }
        match self {
            KernelSpec::Uniform { radius } | KernelSpec::Tent { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::Kernel(format!("radius {radius} must be > 0")));
                }
            }
            KernelSpec::TruncatedGaussian { sigma, cutoff } => {
                if !(sigma.is_finite() && *sigma > 0.0) {
                    return Err(Error::Kernel(format!("sigma {sigma} must be > 0")));
                }
                if !(cutoff.is_finite() && *cutoff > 0.0) {
                    return Err(Error::Kernel(format!("cutoff {cutoff} must be > 0")));
                }
            }
            KernelSpec::Ring { delta, slope } => {
                if !(delta.is_finite() && *delta > 0.0) {
                    return Err(Error::Kernel(format!("delta {delta} must be > 0")));
                }
                if !(slope.is_finite() && *slope > 0.0) {
                    return Err(Error::Kernel(format!(
                        "slope {slope} must be > 0 (profile strictly increasing on 1 < |z| <= 2)"
                    )));
                }
            }
            KernelSpec::Tabulated { samples } => {
                if samples.len() < 2 {
                    return Err(Error::Kernel("tabulated kernel needs >= 2 samples".into()));
                }
                if samples[0].0 != 0.0 {
                    return Err(Error::Kernel(
                        "tabulated kernel must start at radius 0".into(),
                    ));
                }
                if samples[0].1 <= 0.0 {
                    // condition (K) requires k(x,x) > 0; a vanishing center
                    // value breaks the positivity argument, so reject it.
                    return Err(Error::Kernel("tabulated kernel has J(0) <= 0".into()));
                }
                for w in samples.windows(2) {
                    if w[1].0 <= w[0].0 {
                        return Err(Error::Kernel(
                            "tabulated radii must be strictly increasing".into(),
                        ));
                    }
                }
                if samples.iter().any(|s| !s.1.is_finite() || s.1 < 0.0) {
                    return Err(Error::Kernel("tabulated values must be >= 0".into()));
                }
                let mass = tabulated_mass(samples, dim);
                if (mass - 1.0).abs() > TABULATED_MASS_TOL {
                    return Err(Error::Kernel(format!(
                        "tabulated kernel mass {mass:.9} deviates from 1 beyond {TABULATED_MASS_TOL:e}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Read a tabulated kernel from a two-column CSV (radius, value). A
    /// non-numeric first record is treated as a header.
    pub fn from_csv(path: &std::path::Path) -> Result<KernelSpec> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(false)
            .from_path(path)
            .map_err(|e| Error::Kernel(format!("reading {}: {e}", path.display())))?;
        let mut samples = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Kernel(format!("csv parse: {e}")))?;
            if rec.len() != 2 {
                return Err(Error::Kernel(format!(
                    "kernel csv row {} has {} columns, expected 2",
                    i + 1,
                    rec.len()
                )));
            }
            match (rec[0].trim().parse::<f64>(), rec[1].trim().parse::<f64>()) {
                (Ok(r), Ok(v)) => samples.push((r, v)),
                _ if i == 0 => continue, // header row
                _ => {
                    return Err(Error::Kernel(format!(
                        "kernel csv row {}: non-numeric entry",
                        i + 1
                    )))
                }
            }
        }
        Ok(KernelSpec::Tabulated { samples })
    }
}

fn interp_radial(samples: &[(f64, f64)], r: f64) -> f64 {
    match samples.last() {
        Some(last) if r <= last.0 => {}
        _ => return 0.0,
    }
    let pos = samples.partition_point(|s| s.0 < r);
    if pos == 0 {
        return samples[0].1;
    }
    let (r0, v0) = samples[pos - 1];
    let (r1, v1) = samples[pos];
    v0 + (v1 - v0) * (r - r0) / (r1 - r0)
}

/// Mass of a piecewise-linear radial profile: exact segment integrals of
/// J(r) (1D, doubled for both signs) or 2*pi*J(r)*r (2D).
fn tabulated_mass(samples: &[(f64, f64)], dim: usize) -> f64 {
    let mut mass = 0.0;
    for w in samples.windows(2) {
        let (r0, v0) = w[0];
        let (r1, v1) = w[1];
        let dr = r1 - r0;
        if dim == 1 {
            mass += (v0 + v1) * dr; // 2 * trapezoid
        } else {
            // int 2 pi r (v0 + (v1-v0)(r-r0)/dr) dr over [r0, r1]
            let lin = v0 * (r1 * r1 - r0 * r0) / 2.0;
            let slope = (v1 - v0) / dr;
            let quad = slope * ((r1.powi(3) - r0.powi(3)) / 3.0 - r0 * (r1 * r1 - r0 * r0) / 2.0);
            mass += 2.0 * std::f64::consts::PI * (lin + quad);
        }
    }
    mass
}
