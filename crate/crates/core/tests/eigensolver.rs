mod common;

use std::f64::consts::PI;

use common::oracle;
use dfw_core::eigensolver::*;
use dfw_core::geometry::*;
use proptest::prelude::*;

fn interval(a: f64, b: f64) -> Domain {
    build_domain(DomainSpec::Interval { a, b }).unwrap()
}

fn disk(radius: f64) -> Domain {
    build_domain(DomainSpec::Disk { center: [0.0, 0.0], radius }).unwrap()
}

fn scan(domain: &Domain, bc: &BoundaryCondition, lo: f64, hi: f64) -> EigenResult {
    let p = EigenProblem::default_for(domain, bc).unwrap();
    eigen_scan(&p, &ScanOptions { lambda_lo: lo, lambda_hi: hi, grid: 200, ..ScanOptions::default() }).unwrap()
}

#[test]
fn interval_indicator_examples() {
    let p = EigenProblem::default_for(&interval(0.0, 1.0), &BoundaryCondition::Dirichlet).unwrap();
    assert!(p.indicator(PI).unwrap() < 1e-6);
    assert!(p.indicator(1.0).unwrap() > 0.1);
    assert!(p.indicator(0.0).is_err());
}

#[test]
fn interval_dirichlet_eigenvalues() {
    let res = scan(&interval(0.0, 1.0), &BoundaryCondition::Dirichlet, 1.0, 10.0);
    let l = res.lambdas();
    assert_eq!(l.len(), 3, "{l:?}");
    for (j, v) in l.iter().enumerate() {
        assert!((v - (j + 1) as f64 * PI).abs() < 1e-3, "{l:?}");
    }
    for v in &res.values {
        assert!(v.residual < 1e-6);
    }
    assert_eq!(res.grid.len(), 200);
    assert_eq!(res.curve.len(), 200);
}

#[test]
fn interval_neumann_and_mixed_eigenvalues() {
    let l = scan(&interval(0.0, 1.0), &BoundaryCondition::Neumann, 1.0, 7.0).lambdas();
    assert_eq!(l.len(), 2, "{l:?}");
    assert!((l[0] - PI).abs() < 1e-3 && (l[1] - 2.0 * PI).abs() < 1e-3);
    let mixed = BoundaryCondition::Mixed { axis: 0, threshold: 0.5 };
    let l = scan(&interval(0.0, 1.0), &mixed, 1.0, 8.0).lambdas();
    assert_eq!(l.len(), 3, "{l:?}");
    for (j, v) in l.iter().enumerate() {
        assert!((v - (j as f64 + 0.5) * PI).abs() < 1e-3, "{l:?}");
    }
}

#[test]
fn all_dirichlet_partition_matches_dirichlet_form() {
    let d = disk(1.0);
    let a = EigenProblem::default_for(&d, &BoundaryCondition::Dirichlet).unwrap();
    let b = EigenProblem::default_for(&d, &BoundaryCondition::Mixed { axis: 1, threshold: 5.0 }).unwrap();
    for l in [2.0, 2.4, 3.3] {
        assert_eq!(a.indicator(l).unwrap(), b.indicator(l).unwrap());
    }
}

#[test]
fn disk_dirichlet_first_eigenvalue() {
    let j01 = oracle::j0_first_zero();
    let res = scan(&disk(1.0), &BoundaryCondition::Dirichlet, 2.0, 6.0);
    let l = res.lambdas();
    assert!(!l.is_empty());
    assert!((l[0] - j01).abs() < 0.01 * j01, "{l:?}");
    assert!(l.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn disk_neumann_first_eigenvalue() {
    let target = oracle::j1_prime_first_zero();
    let l = scan(&disk(1.0), &BoundaryCondition::Neumann, 1.0, 3.0).lambdas();
    assert!(!l.is_empty());
    assert!((l[0] - target).abs() < 0.01 * target, "{l:?} vs {target}");
}

#[test]
fn square_dirichlet_first_eigenvalue() {
    let sq = build_domain(DomainSpec::Rectangle { min: [0.0, 0.0], max: [1.0, 1.0] }).unwrap();
    let l = scan(&sq, &BoundaryCondition::Dirichlet, 3.0, 6.0).lambdas();
    let target = PI * 2f64.sqrt();
    assert!(!l.is_empty());
    assert!((l[0] - target).abs() < 0.01 * target, "{l:?}");
}

#[test]
fn scale_covariance() {
    let a = scan(&interval(0.0, 1.0), &BoundaryCondition::Dirichlet, 1.0, 10.0).lambdas();
    let b = scan(&interval(0.0, 2.0), &BoundaryCondition::Dirichlet, 0.5, 5.0).lambdas();
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(&b) {
        assert!((x / y - 2.0).abs() < 0.005 * 2.0);
    }
    let big = scan(&disk(2.0), &BoundaryCondition::Dirichlet, 1.0, 3.0).lambdas();
    let unit = scan(&disk(1.0), &BoundaryCondition::Dirichlet, 2.0, 6.0).lambdas();
    assert!((unit[0] / big[0] - 2.0).abs() < 0.01);
}

#[test]
fn smaller_disk_has_larger_first_eigenvalue() {
    let unit = scan(&disk(1.0), &BoundaryCondition::Dirichlet, 2.0, 6.0).lambdas();
    let half = scan(&disk(0.5), &BoundaryCondition::Dirichlet, 4.0, 6.0).lambdas();
    assert!(unit[0] < half[0]);
}

#[test]
fn indicator_curve_has_no_branch_jumps() {
    for (d, lo, hi) in [(interval(0.0, 1.0), 1.0, 10.0), (disk(1.0), 2.0, 6.0)] {
        let res = scan(&d, &BoundaryCondition::Dirichlet, lo, hi);
        let v = &res.curve;
        for i in 1..v.len() - 2 {
            let jump = (v[i + 1] - v[i]).abs();
            let local = (v[i] - v[i - 1]).abs().max((v[i + 2] - v[i + 1]).abs());
            assert!(jump <= 10.0 * local, "jump at {} on {:?}", res.grid[i], d.spec());
        }
    }
}

#[test]
fn empty_scan_is_not_an_error() {
    let res = scan(&interval(0.0, 1.0), &BoundaryCondition::Dirichlet, 0.5, 3.0);
    assert!(res.is_empty());
    assert_eq!(res.curve.len(), 200);
}

#[test]
fn invalid_problems() {
    let d = interval(0.0, 1.0);
    let p = EigenProblem::default_for(&d, &BoundaryCondition::Dirichlet).unwrap();
    let bad = ScanOptions { grid: 10, ..ScanOptions::default() };
    assert!(eigen_scan(&p, &bad).is_err());
    let bad = ScanOptions { lambda_lo: 3.0, lambda_hi: 2.0, ..ScanOptions::default() };
    assert!(eigen_scan(&p, &bad).is_err());
    let dd = disk(1.0);
    let b = dd.boundary_discretize(16).unwrap();
    let nodes = NodeSet::new(&dd, vec![vec![0.0, 0.0], vec![0.2, 0.0]], None).unwrap();
    let dup = vec![vec![0.1, 0.1], vec![0.1, 0.1]];
    assert!(matches!(
        EigenProblem::new(&dd, &BoundaryCondition::Dirichlet, b, dup, &nodes, Basis::Regular),
        Err(EigenError::RankDeficient(_))
    ));
    assert!(EigenResult::from_values(&[2.0, 1.0]).is_err());
    assert_eq!(EigenResult::from_values(&[PI, 2.0 * PI]).unwrap().lambdas(), vec![PI, 2.0 * PI]);
}

#[test]
fn null_field_vanishes_on_boundary() {
    let d = disk(1.0);
    let p = EigenProblem::default_for(&d, &BoundaryCondition::Dirichlet).unwrap();
    let l = scan(&d, &BoundaryCondition::Dirichlet, 2.0, 3.0).lambdas()[0];
    let mode = p.mode(l).unwrap();
    let centre = mode.eval(&[0.0, 0.0]).abs();
    let edge = d.boundary_discretize(64).unwrap();
    let worst = edge.points.iter().map(|x| mode.eval(x).abs()).fold(0.0, f64::max);
    assert!(worst < 1e-4 * centre, "{worst} vs {centre}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn interval_first_eigenvalue_scales_inversely(len in 0.5f64..3.0) {
        let res = scan(&interval(0.0, len), &BoundaryCondition::Dirichlet, 0.6 * PI / len, 1.6 * PI / len);
        let l = res.lambdas();
        prop_assert_eq!(l.len(), 1);
        prop_assert!((l[0] * len / PI - 1.0).abs() < 1e-6);
    }
}
