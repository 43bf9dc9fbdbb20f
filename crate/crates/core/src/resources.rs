//! Resource distributions m(x), including the bang-bang concentration
//! families used by the scaling-law sweeps.
//!
//! A resource in M1 is nonnegative, nonconstant and has total 1. Bang-bang
//! supports are cell-snapped and then rescaled so the discrete total is
//! exactly 1, which every downstream comparison assumes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Domain, Grid};
use crate::kernel::KernelSpec;

/// Minimum number of grid cells across a concentration support. Below this
/// the steady state near the spike is quadrature noise.
pub const MIN_SUPPORT_CELLS: usize = 8;

/// Tolerance on |total - 1| for M1 membership.
pub const M1_TOL: f64 = 1e-12;

/// A nonnegative per-cell resource field with tracked totals.
#[derive(Debug, Clone)]
pub struct Resource {
    field: Vec<f64>,
    total: f64,
    sup_norm: f64,
    constant: bool,
}

impl Resource {
    pub fn new(grid: &Grid, field: Vec<f64>) -> Result<Resource> {
        if field.len() != grid.n_cells() {
            return Err(Error::FieldLength {
                expected: grid.n_cells(),
                got: field.len(),
            });
        }
        if field.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Resource(
                "resource field must be finite and nonnegative".into(),
            ));
        }
        let total = grid.integrate(&field)?;
        let sup = field.iter().copied().fold(0.0, f64::max);
        let min = field.iter().copied().fold(f64::INFINITY, f64::min);
        let constant = (sup - min).abs() <= 1e-14 * sup.max(1.0);
        Ok(Resource {
            field,
            total,
            sup_norm: sup,
            constant,
        })
    }

    pub fn field(&self) -> &[f64] {
        &self.field
    }

    /// integral of m over the habitat.
    pub fn total(&self) -> f64 {
        self.total
    }

    /// L-infinity norm of m.
    pub fn sup_norm(&self) -> f64 {
        self.sup_norm
    }

    pub fn is_constant(&self) -> bool {
        self.constant
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportShape {
    /// Cells whose centers lie in the ball of the target measure.
    Ball,
    /// Cell-aligned block (1D run / 2D square) of the target measure.
    Block,
}

/// A two-valued concentration: `height` on a support of measure 1/height
/// centered at `center`, zero elsewhere.
#[derive(Debug, Clone)]
pub struct BangBangSpec {
    pub height: f64,
    pub center: [f64; 2],
    pub shape: SupportShape,
}

/// Volume of the unit ball: 2 in 1D, pi in 2D.
pub fn unit_ball_volume(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        _ => std::f64::consts::PI,
    }
}

/// Build the bang-bang resource on the grid. The support is the
/// `ceil(measure / cell_measure)` cells nearest the center (Euclidean for
/// balls, Chebyshev for blocks), so the snapped support never undershoots
/// the nominal measure and the rescaled plateau never exceeds the nominal
/// height. The plateau is rescaled so the discrete total is exactly 1.
pub fn bang_bang(grid: &Grid, spec: &BangBangSpec) -> Result<Resource> {
    if !(spec.height.is_finite() && spec.height > 0.0) {
        return Err(Error::Resource(format!(
            "bang-bang height {} must be positive",
            spec.height
        )));
    }
    let measure = 1.0 / spec.height;
    let dim = grid.dim();
    if !grid.domain().contains(spec.center) {
        return Err(Error::SupportOutsideDomain);
    }

    let ratio = measure / grid.cell_measure();
    // exact-integer ratios must not spill into an extra cell
    let k_cells = (ratio - 1e-9 * ratio.max(1.0)).ceil().max(1.0) as usize;
    if k_cells < MIN_SUPPORT_CELLS {
        return Err(Error::SupportUnderResolved {
            cells: k_cells,
            min: MIN_SUPPORT_CELLS,
        });
    }
    if k_cells > grid.n_cells() {
        return Err(Error::SupportOutsideDomain);
    }
    let reach = match spec.shape {
        SupportShape::Ball => (measure / unit_ball_volume(dim)).powf(1.0 / dim as f64),
        SupportShape::Block => measure.powf(1.0 / dim as f64) / 2.0,
    };
    if grid.domain().boundary_distance(spec.center) <= reach + grid.h() {
        return Err(Error::SupportOutsideDomain);
    }

    let mut by_distance: Vec<(f64, usize)> = (0..grid.n_cells())
        .map(|i| {
            let c = grid.center(i);
            let dx = (c[0] - spec.center[0]).abs();
            let dy = (c[1] - spec.center[1]).abs();
            let key = match spec.shape {
                SupportShape::Ball => dx * dx + dy * dy,
                SupportShape::Block => dx.max(dy),
            };
            (key, i)
        })
        .collect();
    by_distance.sort_by(|a, b| a.partial_cmp(b).expect("finite keys"));

    // exact rescale: value * (count * cell_measure) == 1
    let value = 1.0 / (k_cells as f64 * grid.cell_measure());
    let mut field = vec![0.0; grid.n_cells()];
    for &(_, i) in by_distance.iter().take(k_cells) {
        field[i] = value;
    }
    Resource::new(grid, field)
}

/// Sample a pointwise function at cell centers; optionally rescale to
/// total 1.
pub fn from_function(
    grid: &Grid,
    f: impl Fn([f64; 2]) -> f64,
    normalize: bool,
) -> Result<Resource> {
    let mut field: Vec<f64> = grid.centers().map(f).collect();
    if let Some(bad) = field.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::Resource(format!(
            "sampled resource value {bad} is negative or non-finite"
        )));
    }
    let total = grid.integrate(&field)?;
    if total <= 0.0 {
        return Err(Error::Resource("resource has zero total".into()));
    }
    if normalize {
        for v in &mut field {
            *v /= total;
        }
    }
    Resource::new(grid, field)
}

/// M1 membership report: total 1, nonnegative, nonconstant.
#[derive(Debug, Clone, Serialize)]
pub struct M1Report {
    pub total: f64,
    pub total_deviation: f64,
    pub nonnegative: bool,
    pub nonconstant: bool,
    pub pass: bool,
}

pub fn validate_m1(resource: &Resource) -> M1Report {
    let deviation = (resource.total() - 1.0).abs();
    let nonnegative = resource.field().iter().all(|v| *v >= 0.0);
    let nonconstant = !resource.is_constant();
    M1Report {
        total: resource.total(),
        total_deviation: deviation,
        nonnegative,
        nonconstant,
        pass: deviation <= M1_TOL && nonnegative && nonconstant,
    }
}

/// Where a concentration family places its center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    /// Domain centroid.
    Interior,
    /// Inside the boundary layer where a < 1: half a kernel support radius
    /// from the boundary, capped at a twentieth of the domain extent so
    /// domain-spanning kernels still land near the boundary.
    NearBoundary,
    /// Explicit coordinates.
    At([f64; 2]),
}

impl Default for Placement {
    fn default() -> Self {
        Placement::Interior
    }
}

pub fn resolve_placement(
    domain: &Domain,
    kernel: &KernelSpec,
    placement: Placement,
) -> [f64; 2] {
    match placement {
        Placement::At(p) => p,
        Placement::Interior => domain.centroid(),
        Placement::NearBoundary => {
            let (_, extent) = domain.bounding_box();
            let dist = (kernel.support_radius() / 2.0).min(extent[0] / 20.0);
            match domain {
                Domain::Interval { hi, .. } => [hi - dist, 0.0],
                Domain::Rectangle { hi, .. } => {
                    [hi[0] - dist, domain.centroid()[1]]
                }
                Domain::Disk { center, radius } => [center[0] + radius - dist, center[1]],
            }
        }
    }
}

/// d-parametrized resource families from the constructive examples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ResourceFamily {
    /// Height alpha * d^beta on a support of measure (alpha d^beta)^-1.
    Example1 {
        alpha: f64,
        beta: f64,
        #[serde(default)]
        x0: Placement,
        #[serde(default = "default_shape")]
        shape: SupportShape,
    },
    /// Height d on a ball of measure 1/d; placement decides feasibility.
    Example2 {
        #[serde(default)]
        x0: Placement,
    },
    /// Height alpha_hat * d on a ball of measure (alpha_hat d)^-1, for use
    /// with the ring kernel where a is smallest at the center.
    Example3 {
        alpha_hat: f64,
        #[serde(default)]
        x0: Placement,
    },
    /// Height M_d = d^md_exponent on a ball of radius (M_d w_n)^(-1/n).
    LowerBound {
        md_exponent: f64,
        #[serde(default)]
        x0: Placement,
    },
    /// Fixed, d-independent bang-bang plateau.
    Fixed {
        height: f64,
        #[serde(default)]
        x0: Placement,
        #[serde(default = "default_shape")]
        shape: SupportShape,
    },
    /// Named smooth profile, normalized to total 1.
    Smooth { profile: SmoothProfile },
    /// Per-cell values from a CSV (cell index, value).
    Csv { path: std::path::PathBuf },
}

fn default_shape() -> SupportShape {
    SupportShape::Ball
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothProfile {
    /// 1 + cos(2 pi s) with s the normalized first coordinate.
    RaisedCosine,
    /// exp(-8 |x - centroid|^2 / extent^2).
    GaussianBump,
}

impl ResourceFamily {
    /// Plateau height at dispersal rate d, when the family is bang-bang.
    pub fn height_at(&self, d: f64) -> Option<f64> {
        match self {
            ResourceFamily::Example1 { alpha, beta, .. } => Some(alpha * d.powf(*beta)),
            ResourceFamily::Example2 { .. } => Some(d),
            ResourceFamily::Example3 { alpha_hat, .. } => Some(alpha_hat * d),
            ResourceFamily::LowerBound { md_exponent, .. } => Some(d.powf(*md_exponent)),
            ResourceFamily::Fixed { height, .. } => Some(*height),
            ResourceFamily::Smooth { .. } | ResourceFamily::Csv { .. } => None,
        }
    }

    /// Support measure at d (1/height), when the family is bang-bang.
    pub fn support_measure_at(&self, d: f64) -> Option<f64> {
        self.height_at(d).map(|h| 1.0 / h)
    }

    pub fn build(&self, grid: &Grid, kernel: &KernelSpec, d: f64) -> Result<Resource> {
        match self {
            ResourceFamily::Example1 { x0, shape, .. }
            | ResourceFamily::Fixed { x0, shape, .. } => bang_bang(
                grid,
                &BangBangSpec {
                    height: self.height_at(d).unwrap(),
                    center: resolve_placement(grid.domain(), kernel, *x0),
                    shape: *shape,
                },
            ),
            ResourceFamily::Example2 { x0 }
            | ResourceFamily::Example3 { x0, .. }
            | ResourceFamily::LowerBound { x0, .. } => bang_bang(
                grid,
                &BangBangSpec {
                    height: self.height_at(d).unwrap(),
                    center: resolve_placement(grid.domain(), kernel, *x0),
                    shape: SupportShape::Ball,
                },
            ),
            ResourceFamily::Smooth { profile } => {
                let (origin, extent) = grid.domain().bounding_box();
                let centroid = grid.domain().centroid();
                match profile {
                    SmoothProfile::RaisedCosine => from_function(
                        grid,
                        |c| {
                            let s = (c[0] - origin[0]) / extent[0];
                            1.0 + (2.0 * std::f64::consts::PI * s).cos()
                        },
                        true,
                    ),
                    SmoothProfile::GaussianBump => from_function(
                        grid,
                        |c| {
                            let dx = c[0] - centroid[0];
                            let dy = c[1] - centroid[1];
                            (-8.0 * (dx * dx + dy * dy) / (extent[0] * extent[0])).exp()
                        },
                        true,
                    ),
                }
            }
            ResourceFamily::Csv { path } => resource_from_csv(grid, path),
        }
    }

    /// Short name for reports.
    pub fn describe(&self) -> String {
        match self {
            ResourceFamily::Example1 { alpha, beta, .. } => {
                format!("example1(alpha={alpha}, beta={beta})")
            }
            ResourceFamily::Example2 { x0 } => format!("example2(x0={x0:?})"),
            ResourceFamily::Example3 { alpha_hat, x0 } => {
                format!("example3(alpha_hat={alpha_hat}, x0={x0:?})")
            }
            ResourceFamily::LowerBound { md_exponent, .. } => {
                format!("lowerbound(Md=d^{md_exponent})")
            }
            ResourceFamily::Fixed { height, .. } => format!("fixed(height={height})"),
            ResourceFamily::Smooth { profile } => format!("smooth({profile:?})"),
            ResourceFamily::Csv { path } => format!("csv({})", path.display()),
        }
    }
}

/// Load a per-cell resource from a two-column CSV (cell index, value).
pub fn resource_from_csv(grid: &Grid, path: &std::path::Path) -> Result<Resource> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| Error::Resource(format!("reading {}: {e}", path.display())))?;
    let mut field = vec![0.0; grid.n_cells()];
    let mut seen = vec![false; grid.n_cells()];
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Resource(format!("csv parse: {e}")))?;
        if rec.len() != 2 {
            return Err(Error::Resource(format!(
                "resource csv row {} has {} columns, expected 2",
                row + 1,
                rec.len()
            )));
        }
        match (rec[0].trim().parse::<usize>(), rec[1].trim().parse::<f64>()) {
            (Ok(i), Ok(v)) => {
                if i >= field.len() {
                    return Err(Error::Resource(format!(
                        "cell index {i} out of range (grid has {} cells)",
                        field.len()
                    )));
                }
                field[i] = v;
                seen[i] = true;
            }
            _ if row == 0 => continue, // header
            _ => {
                return Err(Error::Resource(format!(
                    "resource csv row {}: non-numeric entry",
                    row + 1
                )))
            }
        }
    }
    if !seen.iter().all(|s| *s) {
        return Err(Error::Resource(format!(
            "resource csv covered {} of {} cells",
            seen.iter().filter(|s| **s).count(),
            field.len()
        )));
    }
    Resource::new(grid, field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Domain;

    fn unit_interval(n: usize) -> Grid {
        Grid::build(&Domain::Interval { lo: 0.0, hi: 1.0 }, n).unwrap()
    }

    #[test]
    fn bang_bang_height_20_on_320_cells() {
        let g = unit_interval(320);
        let r = bang_bang(
            &g,
            &BangBangSpec {
                height: 20.0,
                center: [0.5, 0.0],
                shape: SupportShape::Block,
            },
        )
        .unwrap();
        let support: Vec<f64> = r.field().iter().copied().filter(|v| *v > 0.0).collect();
        assert_eq!(support.len(), 16);
        assert!((r.total() - 1.0).abs() < M1_TOL);
        assert!((r.sup_norm() - 20.0).abs() < 1e-9);
        assert!(validate_m1(&r).pass);
    }

    #[test]
    fn bang_bang_under_resolved_errors() {
        let g = unit_interval(100);
        let err = bang_bang(
            &g,
            &BangBangSpec {
                height: 1e6,
                center: [0.5, 0.0],
                shape: SupportShape::Ball,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::SupportUnderResolved { .. }));
    }

    #[test]
    fn bang_bang_support_must_fit() {
        let g = unit_interval(64);
        let err = bang_bang(
            &g,
            &BangBangSpec {
                height: 2.0,
                center: [0.95, 0.0],
                shape: SupportShape::Ball,
            },
        )
        .unwrap_err();
        assert!(matches!(err, Error::SupportOutsideDomain));
    }

    #[test]
    fn bang_bang_centroid_snap_within_h() {
        let g = unit_interval(257);
        let r = bang_bang(
            &g,
            &BangBangSpec {
                height: 10.0,
                center: [0.4321, 0.0],
                shape: SupportShape::Ball,
            },
        )
        .unwrap();
        let mut mass = 0.0;
        let mut first_moment = 0.0;
        for (i, v) in r.field().iter().enumerate() {
            mass += v;
            first_moment += v * g.center(i)[0];
        }
        let centroid = first_moment / mass;
        assert!((centroid - 0.4321).abs() <= g.h());
    }

    #[test]
    fn from_function_linear_and_errors() {
        let g = unit_interval(64);
        let r = from_function(&g, |c| 2.0 * c[0], true).unwrap();
        assert!((r.total() - 1.0).abs() < 1e-12);
        // proportional to x
        let f = r.field();
        assert!((f[32] / f[16] - g.center(32)[0] / g.center(16)[0]).abs() < 1e-12);

        assert!(from_function(&g, |c| c[0] - 0.5, true).is_err());
        assert!(from_function(&g, |_| 0.0, true).is_err());
    }

    #[test]
    fn constant_resource_fails_m1() {
        let g = unit_interval(32);
        let r = from_function(&g, |_| 1.0, true).unwrap();
        assert!(r.is_constant());
        let rep = validate_m1(&r);
        assert!(!rep.pass && !rep.nonconstant);
    }

    #[test]
    fn wrong_total_reported() {
        let g = unit_interval(32);
        let r = from_function(&g, |c| if c[0] < 0.75 { 1.0 } else { 0.0 }, false).unwrap();
        let rep = validate_m1(&r);
        assert!(!rep.pass);
        assert!((rep.total_deviation - 0.25).abs() < 1e-9, "{rep:?}");
    }

    #[test]
    fn example1_family_height_and_measure() {
        let g = unit_interval(10000);
        let k = KernelSpec::Uniform { radius: 0.05 };
        let fam = ResourceFamily::Example1 {
            alpha: 1.0,
            beta: 1.5,
            x0: Placement::Interior,
            shape: SupportShape::Ball,
        };
        let d = 100.0;
        let r = fam.build(&g, &k, d).unwrap();
        assert!(validate_m1(&r).pass);
        let target_height = d.powf(1.5);
        let support_cells = r.field().iter().filter(|v| **v > 0.0).count();
        // sup_norm = alpha d^beta (1 + O(h * height))
        let rel = (r.sup_norm() - target_height).abs() / target_height;
        assert!(rel < 2.0 * g.h() * target_height, "rel err {rel}");
        let measure = support_cells as f64 * g.cell_measure();
        assert!((measure - 1.0 / target_height).abs() < 2.0 * g.h());
    }

    #[test]
    fn lower_bound_family_ratio_admissible() {
        // Md = d^2: Md / (d a(x0)) = d / a(x0) > 1 for d = 30
        let g = unit_interval(10000);
        let k = KernelSpec::Uniform { radius: 0.05 };
        let fam = ResourceFamily::LowerBound {
            md_exponent: 2.0,
            x0: Placement::Interior,
        };
        let d = 30.0;
        let r = fam.build(&g, &k, d).unwrap();
        assert!(validate_m1(&r).pass);
        // interior placement: a(x0) = 1, ratio = 30 > 1
        let ratio = fam.height_at(d).unwrap() / (d * 1.0);
        assert!(ratio > 1.0);
    }

    #[test]
    fn near_boundary_placement_sits_in_boundary_layer() {
        let dom = Domain::Interval { lo: 0.0, hi: 1.0 };
        let k = KernelSpec::Uniform { radius: 0.05 };
        let p = resolve_placement(&dom, &k, Placement::NearBoundary);
        let dist = dom.boundary_distance(p);
        assert!(dist > 0.0 && dist < 0.05, "dist = {dist}");
    }
}
