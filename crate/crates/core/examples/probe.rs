use nonlocal_logistic::analysis::*;
use nonlocal_logistic::grid::Domain;
use nonlocal_logistic::kernel::{BoundaryCondition, KernelSpec};
use nonlocal_logistic::resources::{Placement, ResourceFamily, SupportShape};
use nonlocal_logistic::steady::{solve_fixed_point, SolveOptions};
use nonlocal_logistic::grid::Grid;
use nonlocal_logistic::kernel::DiscreteOperator;
use std::sync::Arc;
use std::time::Instant;

fn show(res: &SweepResult) {
    for s in &res.samples {
        println!(
            "  d = {:9.2}  N = {:7}  iters = {:6}  total = {:10.5}  t/sqrt(d) = {:.5}",
            s.d, s.cells_per_axis, s.iterations, s.total_population,
            s.total_population / s.d.sqrt()
        );
    }
    println!("  fit: exp {:.4} R2 {:.6}; c1 violations {:?}", res.fit.exponent, res.fit.r_squared, res.c1_violations);
}

fn main() {
    let dom = Domain::Interval { lo: 0.0, hi: 1.0 };
    let k = KernelSpec::Uniform { radius: 0.05 };
    let ds = d_grid(100.0, 1000.0, 8, true).unwrap();

    let t0 = Instant::now();
    println!("=== criterion 7: beta = 0.5 (sub-sqrt family)");
    let fam = ResourceFamily::Example1 { alpha: 1.0, beta: 0.5, x0: Placement::Interior, shape: SupportShape::Ball };
    let res = sweep(&dom, &k, &fam, &ds, &SweepConfig::default()).unwrap();
    show(&res);
    let ratios: Vec<f64> = res.samples.iter().map(|s| s.total_population / s.d.sqrt()).collect();
    println!("  strictly decreasing: {}; final/initial = {:.4}", ratios.windows(2).all(|w| w[1] < w[0]), ratios.last().unwrap() / ratios[0]);

    println!("=== criterion 9a: example2 near-boundary vs interior (6-point sweeps)");
    let ds6 = d_grid(100.0, 1000.0, 6, true).unwrap();
    let eg = default_epsilon_grid();
    for x0 in [Placement::NearBoundary, Placement::Interior] {
        let fam = ResourceFamily::Example2 { x0 };
        let feas = family_feasibility(&dom, &k, BoundaryCondition::Neumann, &fam, &ds6, &eg).unwrap();
        println!("  x0 = {x0:?}: feasible = {} (min max eps = {:?})", feas.feasible, feas.min_max_feasible);
        let res = sweep(&dom, &k, &fam, &ds6, &SweepConfig::default()).unwrap();
        show(&res);
        let ratios: Vec<f64> = res.samples.iter().map(|s| s.total_population / s.d.sqrt()).collect();
        println!("  ratios decreasing: {}", ratios.windows(2).all(|w| w[1] < w[0]));
    }

    println!("=== criterion 9b: example3 ring kernel center vs near-boundary");
    let dom3 = Domain::Interval { lo: -1.0, hi: 1.0 };
    let k3 = KernelSpec::Ring { delta: 0.1, slope: 0.6 };
    for x0 in [Placement::Interior, Placement::NearBoundary] {
        let fam = ResourceFamily::Example3 { alpha_hat: 0.3, x0 };
        let feas = family_feasibility(&dom3, &k3, BoundaryCondition::Neumann, &fam, &ds6, &eg).unwrap();
        println!("  x0 = {x0:?}: feasible = {} (min max eps = {:?})", feas.feasible, feas.min_max_feasible);
        let res = sweep(&dom3, &k3, &fam, &ds6, &SweepConfig::default()).unwrap();
        show(&res);
        let ratios: Vec<f64> = res.samples.iter().map(|s| s.total_population / s.d.sqrt()).collect();
        println!("  ratios decreasing: {}", ratios.windows(2).all(|w| w[1] < w[0]));
    }

    println!("=== criterion 10: limits for smooth m");
    let grid = Arc::new(Grid::build(&dom, 110).unwrap());
    let op = DiscreteOperator::build_auto(grid.clone(), k.clone(), BoundaryCondition::Neumann).unwrap();
    let fam = ResourceFamily::Smooth { profile: nonlocal_logistic::resources::SmoothProfile::RaisedCosine };
    let m = fam.build(&grid, &k, 1.0).unwrap();
    for d in [1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0, 1e4] {
        let st = solve_fixed_point(&op, &m, d, &SolveOptions::default()).unwrap();
        println!("  d = {:8.3}: total = {:.6} iters {}", d, st.total_population, st.iterations);
    }
    println!("all probes took {:.1?}", t0.elapsed());
}
