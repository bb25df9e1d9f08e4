mod common;

use std::f64::consts::PI;

use common::oracle;
use dfw_core::diffusion::*;
use dfw_core::eigensolver::*;
use dfw_core::geometry::*;
use proptest::prelude::*;

fn rod() -> Domain {
    build_domain(DomainSpec::Interval { a: 0.0, b: 1.0 }).unwrap()
}

fn disk() -> Domain {
    build_domain(DomainSpec::Disk { center: [0.0, 0.0], radius: 1.0 }).unwrap()
}

fn scan(lo: f64, hi: f64, grid: usize) -> EigenSource {
    EigenSource::Scan(ScanOptions { lambda_lo: lo, lambda_hi: hi, grid, ..ScanOptions::default() })
}

fn rod_problem<F: Fn(&[f64]) -> f64>(r: F, bc: BoundaryCondition) -> DiffusionProblem {
    let rule = rod().quadrature(48).unwrap();
    DiffusionProblem::on_rule(&rod(), 1.0, bc, &rule, r)
}

fn probes_1d() -> Vec<Point> {
    (0..50).map(|i| vec![(i as f64 + 0.5) / 50.0]).collect()
}

fn rod_error(sol: &DiffusionSolution, t: f64) -> f64 {
    let p = probes_1d();
    let u = evaluate_solution(sol, &p, t).unwrap();
    p.iter().zip(&u).map(|(x, v)| (v - (-PI * PI * t).exp() * (PI * x[0]).sin()).abs()).fold(0.0, f64::max)
}

#[test]
fn rod_with_scanned_eigenvalues() {
    let problem = rod_problem(|x| (PI * x[0]).sin(), BoundaryCondition::Dirichlet);
    let sol = solve_diffusion(&problem, &SolveOptions { budget: 3, eigen: scan(1.0, 10.0, 400), ..SolveOptions::default() }).unwrap();
    assert_eq!(sol.modes.len(), 3);
    for (j, g) in sol.gammas().iter().enumerate() {
        assert!((g - (j + 1) as f64 * PI).abs() < 1e-3, "{g}");
    }
    // unit-norm eigenfunction sqrt(2) sin(pi x) carries coefficient 1/sqrt(2)
    assert!((sol.modes[0].coefficient - 0.5f64.sqrt()).abs() < 1e-6, "{}", sol.modes[0].coefficient);
    assert!(sol.modes[1..].iter().all(|m| m.coefficient.abs() < 1e-3));
    for t in [0.05, 0.1] {
        let e = rod_error(&sol, t);
        assert!(e < 1e-3, "t = {t}: {e}");
    }
}

#[test]
fn rod_with_injected_eigenvalues() {
    let problem = rod_problem(|x| (PI * x[0]).sin(), BoundaryCondition::Dirichlet);
    let given = EigenSource::Given(vec![PI, 2.0 * PI, 3.0 * PI]);
    let sol = solve_diffusion(&problem, &SolveOptions { budget: 3, eigen: given, ..SolveOptions::default() }).unwrap();
    assert_eq!(sol.method, CoefficientMethod::Orthogonality);
    for t in [0.05, 0.1] {
        let e = rod_error(&sol, t);
        assert!(e < 1e-6, "t = {t}: {e}");
    }
}

#[test]
fn scattered_samples_use_least_squares() {
    let points: Vec<Point> = (0..37).map(|i| vec![(i as f64 * 0.618_034).fract()]).collect();
    let values: Vec<f64> = points.iter().map(|x| (PI * x[0]).sin()).collect();
    let problem = DiffusionProblem { domain: rod(), kappa: 1.0, boundary: BoundaryCondition::Dirichlet, points, values, weights: None };
    let given = EigenSource::Given(vec![PI, 2.0 * PI, 3.0 * PI]);
    let sol = solve_diffusion(&problem, &SolveOptions { budget: 3, eigen: given, ..SolveOptions::default() }).unwrap();
    assert_eq!(sol.method, CoefficientMethod::LeastSquares);
    assert!(rod_error(&sol, 0.1) < 1e-6);
}

#[test]
fn zero_initial_data() {
    let problem = rod_problem(|_| 0.0, BoundaryCondition::Dirichlet);
    let sol = solve_diffusion(&problem, &SolveOptions { budget: 3, eigen: scan(1.0, 10.0, 400), ..SolveOptions::default() }).unwrap();
    assert!(sol.modes.iter().all(|m| m.coefficient.abs() < 1e-14));
    assert!(evaluate_solution(&sol, &probes_1d(), 0.0).unwrap().iter().all(|v| v.abs() < 1e-14));
}

#[test]
fn disk_first_mode_and_decay_rate() {
    let rule = disk().quadrature(24).unwrap();
    let eigen = EigenProblem::default_for(&disk(), &BoundaryCondition::Dirichlet).unwrap();
    let found = eigen_scan(&eigen, &ScanOptions { lambda_lo: 1.5, lambda_hi: 6.0, grid: 200, ..ScanOptions::default() }).unwrap();
    let g1 = found.values[0].lambda;
    let j01 = oracle::j0_first_zero();
    assert!((g1 - j01).abs() / j01 < 0.01);
    let problem = DiffusionProblem::on_rule(&disk(), 0.5, BoundaryCondition::Dirichlet, &rule, |p| {
        oracle::j_int(0, g1 * (p[0] * p[0] + p[1] * p[1]).sqrt())
    });
    let opts = SolveOptions { budget: 4, eigen: EigenSource::Given(found.lambdas()), ..SolveOptions::default() };
    let sol = solve_diffusion_with(&problem, &eigen, &opts).unwrap();
    let a1 = sol.modes[0].coefficient.abs();
    for m in &sol.modes[1..] {
        assert!(m.coefficient.abs() < 1e-2 * a1, "gamma {}: {}", m.gamma, m.coefficient);
    }
    let centre = vec![vec![0.1, -0.05]];
    let (t1, t2) = (0.1, 0.3);
    let u1 = evaluate_solution(&sol, &centre, t1).unwrap()[0];
    let u2 = evaluate_solution(&sol, &centre, t2).unwrap()[0];
    let rate = (u1 / u2).ln() / ((t2 - t1) * 0.5);
    assert!((rate - j01 * j01).abs() / (j01 * j01) < 0.01, "rate {rate}");
}

#[test]
fn dirichlet_solution_vanishes_for_large_times() {
    let problem = rod_problem(|x| x[0] * (1.0 - x[0]), BoundaryCondition::Dirichlet);
    let sol = solve_diffusion(&problem, &SolveOptions { budget: 4, eigen: scan(1.0, 13.0, 400), ..SolveOptions::default() }).unwrap();
    let t = 41.0 / (sol.modes[0].gamma.powi(2) * sol.kappa);
    assert!(evaluate_solution(&sol, &probes_1d(), t).unwrap().iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn time_zero_reproduces_projection_residual() {
    let problem = rod_problem(|x| x[0] * (1.0 - x[0]), BoundaryCondition::Dirichlet);
    let sol = solve_diffusion(&problem, &SolveOptions { budget: 3, eigen: scan(1.0, 10.0, 400), ..SolveOptions::default() }).unwrap();
    let u = evaluate_solution(&sol, &problem.points, 0.0).unwrap();
    let w = problem.weights.as_ref().unwrap();
    let num: f64 = w.iter().zip(u.iter().zip(&problem.values)).map(|(w, (a, b))| w * (a - b).powi(2)).sum();
    let den: f64 = w.iter().zip(&problem.values).map(|(w, b)| w * b * b).sum();
    assert!(((num / den).sqrt() - sol.residual).abs() < 1e-12);
    assert!(sol.residual > 0.0 && sol.residual < 0.01);
}

#[test]
fn coefficients_of_modes() {
    let eigen = EigenProblem::default_for(&rod(), &BoundaryCondition::Dirichlet).unwrap();
    let rule = rod().quadrature(48).unwrap();
    let m1 = eigen.mode(PI).unwrap();
    let m2 = eigen.mode(2.0 * PI).unwrap();
    let own: Vec<f64> = rule.nodes.iter().map(|p| m1.eval(p)).collect();
    assert!((mode_coefficients(&own, &m1, &rule).unwrap() - 1.0).abs() < 1e-6);
    let sin1: Vec<f64> = rule.nodes.iter().map(|p| (PI * p[0]).sin()).collect();
    assert!(mode_coefficients(&sin1, &m2, &rule).unwrap().abs() < 1e-12);
    let zero = m1.clone().scaled(0.0);
    assert!(matches!(mode_coefficients(&own, &zero, &rule), Err(DiffusionError::DegenerateMode { .. })));

    let deigen = EigenProblem::default_for(&disk(), &BoundaryCondition::Dirichlet).unwrap();
    let drule = disk().quadrature(24).unwrap();
    let radial = deigen.mode(oracle::j0_first_zero()).unwrap();
    let odd: Vec<f64> = drule.nodes.iter().map(|p| p[0] * (1.0 + p[1] * p[1])).collect();
    let c = mode_coefficients(&odd, &radial, &drule).unwrap();
    assert!(c.abs() < 1e-8, "{c}");
}

#[test]
fn energy_decays() {
    let rule = rod().quadrature(48).unwrap();
    let problem = rod_problem(|x| x[0] * (1.0 - x[0]) * (1.0 + 3.0 * x[0]), BoundaryCondition::Dirichlet);
    let sol = solve_diffusion(&problem, &SolveOptions { budget: 5, eigen: scan(1.0, 16.0, 400), ..SolveOptions::default() }).unwrap();
    let energy: Vec<f64> = [0.0, 0.05, 0.1, 0.5]
        .iter()
        .map(|&t| {
            let u = evaluate_solution(&sol, &rule.nodes, t).unwrap();
            rule.inner(&u, &u)
        })
        .collect();
    assert!(energy.windows(2).all(|w| w[1] <= w[0]), "{energy:?}");
}

#[test]
fn maximum_principle_witness() {
    let problem = rod_problem(|x| x[0] * (1.0 - x[0]), BoundaryCondition::Dirichlet);
    let sol = solve_diffusion(&problem, &SolveOptions { budget: 5, eigen: scan(1.0, 16.0, 400), ..SolveOptions::default() }).unwrap();
    assert!(sol.residual < 0.01);
    let max_r = 0.25;
    for t in [0.01, 0.1] {
        let u = evaluate_solution(&sol, &probes_1d(), t).unwrap();
        assert!(u.iter().copied().fold(f64::INFINITY, f64::min) >= -0.02 * max_r);
    }
}

#[test]
fn semigroup_property() {
    let rule = rod().quadrature(48).unwrap();
    let problem = rod_problem(|x| x[0] * (1.0 - x[0]), BoundaryCondition::Dirichlet);
    let sol = solve_diffusion(&problem, &SolveOptions { budget: 5, eigen: scan(1.0, 16.0, 400), ..SolveOptions::default() }).unwrap();
    let (t1, t2) = (0.02, 0.03);
    let mid = evaluate_solution(&sol, &rule.nodes, t1).unwrap();
    let restarted = sol.reproject(&rule.nodes, &mid, Some(&rule.weights)).unwrap();
    let a = evaluate_solution(&sol, &rule.nodes, t1 + t2).unwrap();
    let b = evaluate_solution(&restarted, &rule.nodes, t2).unwrap();
    let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    let rel = (rule.inner(&d, &d) / rule.inner(&a, &a)).sqrt();
    assert!(rel <= 2.0 * sol.residual, "{rel} vs {}", sol.residual);
}

#[test]
fn neumann_rod_keeps_the_mean() {
    let problem = rod_problem(|x| 2.0 + (PI * x[0]).cos(), BoundaryCondition::Neumann);
    let sol = solve_diffusion(&problem, &SolveOptions { budget: 2, eigen: scan(1.0, 7.0, 300), ..SolveOptions::default() }).unwrap();
    assert!((sol.a0 / 2.0 - 2.0).abs() < 1e-10);
    assert!((sol.gammas()[0] - PI).abs() < 1e-3);
    let late = evaluate_solution(&sol, &probes_1d(), 10.0).unwrap();
    assert!(late.iter().all(|v| (v - 2.0).abs() < 1e-10));
    let t = 0.07;
    let u = evaluate_solution(&sol, &probes_1d(), t).unwrap();
    for (x, v) in probes_1d().iter().zip(&u) {
        let exact = 2.0 + (-PI * PI * t).exp() * (PI * x[0]).cos();
        assert!((v - exact).abs() < 1e-3);
    }
}

#[test]
fn partial_solution_warns() {
    let problem = rod_problem(|x| (PI * x[0]).sin(), BoundaryCondition::Dirichlet);
    let sol = solve_diffusion(&problem, &SolveOptions { budget: 10, eigen: scan(1.0, 10.0, 400), ..SolveOptions::default() }).unwrap();
    assert_eq!(sol.modes.len(), 3);
    assert_eq!(sol.warnings.len(), 1);
}

#[test]
fn validation_errors() {
    let mut p = rod_problem(|x| x[0], BoundaryCondition::Dirichlet);
    p.kappa = 0.0;
    assert!(solve_diffusion(&p, &SolveOptions::default()).is_err());
    let p = rod_problem(|x| x[0], BoundaryCondition::Dirichlet);
    assert!(solve_diffusion(&p, &SolveOptions { budget: 0, ..SolveOptions::default() }).is_err());
    let sol = solve_diffusion(&p, &SolveOptions { budget: 1, eigen: EigenSource::Given(vec![PI]), ..SolveOptions::default() }).unwrap();
    assert!(evaluate_solution(&sol, &probes_1d(), -1.0).is_err());
    assert!(matches!(check_boundary_data(&[0.0, 1.0]), Err(DiffusionError::NonHomogeneous)));
    assert!(check_boundary_data(&[0.0, 0.0]).is_ok());
    assert!(check_robin(0.5).is_ok() && check_robin(0.0).is_ok() && check_robin(-0.1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn coefficients_are_linear(alpha in -2.0f64..2.0, beta in -2.0f64..2.0) {
        let rule = rod().quadrature(48).unwrap();
        let base = rod_problem(|x| x[0] * (1.0 - x[0]), BoundaryCondition::Dirichlet);
        let sol = solve_diffusion(&base, &SolveOptions { budget: 4, eigen: EigenSource::Given(vec![PI, 2.0 * PI, 3.0 * PI, 4.0 * PI]), ..SolveOptions::default() }).unwrap();
        let r1: Vec<f64> = rule.nodes.iter().map(|x| x[0] * (1.0 - x[0])).collect();
        let r2: Vec<f64> = rule.nodes.iter().map(|x| (3.0 * x[0]).sin() * x[0]).collect();
        let mix: Vec<f64> = r1.iter().zip(&r2).map(|(a, b)| alpha * a + beta * b).collect();
        let s1 = sol.reproject(&rule.nodes, &r1, Some(&rule.weights)).unwrap();
        let s2 = sol.reproject(&rule.nodes, &r2, Some(&rule.weights)).unwrap();
        let sm = sol.reproject(&rule.nodes, &mix, Some(&rule.weights)).unwrap();
        for ((a, b), c) in s1.modes.iter().zip(&s2.modes).zip(&sm.modes) {
            prop_assert!((alpha * a.coefficient + beta * b.coefficient - c.coefficient).abs() < 1e-8);
        }
    }
}
