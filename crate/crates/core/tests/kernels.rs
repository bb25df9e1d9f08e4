use std::f64::consts::PI;

use dfw_core::kernels::*;
use dfw_core::specfun::{self, BesselOrder};
use num_complex::Complex64;
use proptest::prelude::*;

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn order(n: usize) -> BesselOrder {
    BesselOrder::for_dimension(n).unwrap()
}

fn j(n: usize, z: f64) -> f64 {
    specfun::bessel_first_kind(order(n), z).unwrap()
}
fn y(n: usize, z: f64) -> f64 {
    specfun::bessel_second_kind(order(n), z).unwrap()
}
fn bi(n: usize, z: f64) -> f64 {
    specfun::modified_bessel_first(order(n), z).unwrap()
}
fn bk(n: usize, z: f64) -> f64 {
    specfun::modified_bessel_second(order(n), z).unwrap()
}

// Printed kernel formulas, evaluated literally.
fn printed_phi(n: usize, l: f64, r: f64) -> f64 {
    if n == 1 {
        return (l * r).cos() / (2.0 * l.sqrt());
    }
    let nu = n as f64 / 2.0 - 1.0;
    l.powf(n as f64 - 0.5) / 4.0 * (2.0 * PI * l * r).powf(-nu) * j(n, l * r)
}
fn printed_g(n: usize, l: f64, r: f64) -> Complex64 {
    if n == 1 {
        return l.sqrt() / 2.0 * Complex64::from_polar(1.0, l * r);
    }
    let nu = n as f64 / 2.0 - 1.0;
    Complex64::i() * l.powf(n as f64 - 0.5) / 4.0 * (2.0 * PI * l * r).powf(-nu) * Complex64::new(j(n, l * r), y(n, l * r))
}
fn printed_h(n: usize, l: f64, r: f64) -> Complex64 {
    if n == 1 {
        return -Complex64::i() * l.sqrt() / 2.0 * Complex64::from_polar(1.0, -l * r);
    }
    let nu = n as f64 / 2.0 - 1.0;
    -Complex64::i() * l.powf(n as f64 - 0.5) / 4.0 * (2.0 * PI * l * r).powf(-nu) * Complex64::new(j(n, l * r), -y(n, l * r))
}
fn printed_p(n: usize, l: f64, r: f64) -> f64 {
    if n == 1 {
        return l.sqrt() / 2.0 * (l * r).cos();
    }
    let nu = n as f64 / 2.0 - 1.0;
    l.powf(n as f64 - 0.5) / (2.0 * PI) * (2.0 * PI * l * r).powf(-nu) * j(n, l * r)
}
fn printed_q(n: usize, l: f64, r: f64) -> f64 {
    if n == 1 {
        return l.sqrt() / (2.0 * PI) * (l * r).sin();
    }
    let nu = n as f64 / 2.0 - 1.0;
    l.powf(n as f64 - 0.5) / (2.0 * PI) * (2.0 * PI * l * r).powf(-nu) * y(n, l * r)
}
fn printed_w(n: usize, m: f64, r: f64) -> f64 {
    if n == 1 {
        return m.sqrt() / 2.0 * (-m * r).exp();
    }
    let nu = n as f64 / 2.0 - 1.0;
    m.powf(n as f64 - 0.5) / (2.0 * PI) * (2.0 * PI * m * r).powf(-nu) * bk(n, m * r)
}
fn printed_what(n: usize, m: f64, r: f64) -> f64 {
    if n == 1 {
        return m.sqrt() / 2.0 * (m * r).exp();
    }
    let nu = n as f64 / 2.0 - 1.0;
    m.powf(n as f64 - 0.5) / (2.0 * PI) * (2.0 * PI * m * r).powf(-nu) * bi(n, m * r)
}

#[test]
fn regular_examples() {
    for n in 1..=5 {
        for r in [0.0, 0.3, 7.0] {
            assert_eq!(helmholtz_regular(n, 0.0, r).unwrap(), 1.0);
        }
    }
    assert_eq!(helmholtz_regular(3, 2.5, 0.0).unwrap(), 1.0);
    assert!(helmholtz_regular(3, PI, 1.0).unwrap().abs() < 1e-15);
}

#[test]
fn singular_examples() {
    let lambda = 1.3;
    assert!(helmholtz_singular(3, lambda, PI / 2.0 / lambda).unwrap().abs() < 1e-15);
    // A_2 = -1/4 with Y0(1) = 0.088256964215676957983
    let v = helmholtz_singular(2, 1.0, 1.0).unwrap();
    assert!((v - -0.25 * 0.088_256_964_215_676_96).abs() < 1e-12);
    let a2 = closed_form(3, &ClosedFamily::Helmholtz { lambda: 1.0 }, 1.0 / (4.0 * PI), 0.0, &[2.0]).unwrap();
    assert!((helmholtz_singular(3, 1.0, 2.0).unwrap() - a2).abs() < 1e-12);
    assert!(matches!(helmholtz_singular(3, 1.0, 0.0), Err(KernelError::Singular(_))));
}

#[test]
fn complex_examples() {
    for n in 1..=5 {
        for r in [0.2, 1.0, 9.0] {
            let g = helmholtz_complex(n, 1.7, r, Orientation::Incoming).unwrap();
            let h = helmholtz_complex(n, 1.7, r, Orientation::Outgoing).unwrap();
            assert_eq!(h, g.conj());
        }
    }
    for x in [0.0, 0.5, 3.0, 40.0] {
        let g = helmholtz_complex(1, 2.0, x + 1e-3, Orientation::Incoming).unwrap();
        assert!((g.norm() * 2.0 * 2.0 - 1.0).abs() < 1e-15);
    }
    assert!(helmholtz_complex(2, 1.0, 0.0, Orientation::Outgoing).is_err());
}

#[test]
fn sommerfeld_residual_decreases() {
    let lambda = 2.0;
    for n in 1..=5 {
        let res: Vec<f64> = [1e2, 1e3, 1e4].iter().map(|t| sommerfeld_residual(n, lambda, t / lambda).unwrap()).collect();
        if n == 1 {
            assert!(res.iter().all(|v| *v < 1e-14));
        } else {
            assert!(res[0] > res[1] && res[1] > res[2], "n={n} {res:?}");
        }
        let reference = helmholtz_complex(n, lambda, 1.0 / lambda, Orientation::Outgoing).unwrap().norm();
        if n != 2 {
            assert!(res[1] < 1e-2 * reference, "n={n}");
        }
    }
}

#[test]
fn modified_examples() {
    assert_eq!(modified_helmholtz(1, 1.0, 0.0, ModifiedBranch::Decaying).unwrap(), 0.5);
    for n in 1..=5 {
        assert!(modified_helmholtz(n, 1.0, 800.0, ModifiedBranch::Decaying).unwrap() < 1e-300);
        assert_eq!(modified_helmholtz(n, 2.0, 0.0, ModifiedBranch::Growing).unwrap(), 1.0);
    }
    let b2 = closed_form(3, &ClosedFamily::Modified { mu: 1.0 }, 1.0, 0.0, &[2.0]).unwrap();
    assert!((modified_helmholtz(3, 1.0, 2.0, ModifiedBranch::Growing).unwrap() - b2).abs() < 1e-12);
    assert!(modified_helmholtz(2, 1.0, 0.0, ModifiedBranch::Decaying).is_err());
}

#[test]
fn convdiff_examples() {
    let c = ConvectionParams::new(vec![0.0, 0.0], 0.7, 0.7).unwrap();
    assert!((c.rho() - 1.0).abs() < 1e-15);
    for d in [[0.3f64, 0.1], [1.0, -2.0]] {
        let r: f64 = (d[0] * d[0] + d[1] * d[1]).sqrt();
        let u = convdiff_kernel(KernelFamily::ConvDiffFundamental, 2, &c, &d).unwrap();
        let w = modified_helmholtz(2, 1.0, r, ModifiedBranch::Decaying).unwrap();
        assert!((u - w).abs() < 1e-15 * w.abs());
        let u = convdiff_kernel(KernelFamily::ConvDiffGeneral, 2, &c, &d).unwrap();
        let w = modified_helmholtz(2, 1.0, r, ModifiedBranch::Growing).unwrap();
        assert!((u - w).abs() < 1e-14 * w.abs());
    }
    let c = ConvectionParams::new(vec![2.0, 0.0], 1.0, 0.0).unwrap();
    assert_eq!(c.rho(), 1.0);
    let c = ConvectionParams::new(vec![1.2, -0.4], 0.8, 0.3).unwrap();
    let d = [0.6, -0.2];
    let md = [-0.6, 0.2];
    for fam in [KernelFamily::ConvDiffFundamental, KernelFamily::ConvDiffGeneral, KernelFamily::ConvDiffRapid] {
        let ratio = convdiff_kernel(fam, 2, &c, &d).unwrap() / convdiff_kernel(fam, 2, &c, &md).unwrap();
        let expect = (-(1.2 * 0.6 + 0.4 * 0.2) / 0.8f64).exp();
        assert!((ratio - expect).abs() < 1e-13 * expect);
    }
    assert!(convdiff_kernel(KernelFamily::ConvDiffFundamental, 2, &c, &[0.0, 0.0]).is_err());
}

#[test]
fn rapid_branch_decays_monotonically_along_axes() {
    let c = ConvectionParams::new(vec![1.5, -0.5], 0.5, 0.0).unwrap();
    let axes = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]];
    for n in [1usize, 2] {
        if n == 1 {
            let c1 = ConvectionParams::new(vec![1.5], 0.5, 0.0).unwrap();
            for s in [1.0, -1.0] {
                let mut prev = f64::INFINITY;
                for t in log_grid(1e-3, 50.0, 60) {
                    let v = convdiff_kernel(KernelFamily::ConvDiffRapid, 1, &c1, &[s * t]).unwrap();
                    assert!(v <= prev);
                    prev = v;
                }
            }
            continue;
        }
        for a in axes {
            let mut prev = f64::INFINITY;
            for t in log_grid(1e-3, 50.0, 60) {
                let v = convdiff_kernel(KernelFamily::ConvDiffRapid, n, &c, &[a[0] * t, a[1] * t]).unwrap();
                assert!(v < prev, "axis {a:?} t {t}");
                prev = v;
            }
        }
    }
}

#[test]
fn dimension_exp_examples() {
    let lambda = 1.4;
    for x in [0.1, 0.8, 5.0] {
        let e = dimension_exp(1, lambda, x, DimExpMode::Oscillatory).unwrap();
        let pf = paper_prefactor(KernelFamily::DimExp(DimExpMode::Oscillatory), 1, lambda).unwrap();
        let expect = lambda.sqrt() / (2.0 * PI) * Complex64::new((lambda * x).cos(), (lambda * x).sin());
        assert!((pf * e - expect).norm() < 1e-15);
        assert!((e.norm() - 1.0 / (2.0 * lambda)).abs() < 1e-15);
    }
    for o in [BesselOrder::Half, BesselOrder::ThreeHalves] {
        let h = hankel_first(o, 2.0).unwrap();
        let hk = hankel_first_via_k(o, 2.0).unwrap();
        assert!((h - hk).norm() < 1e-10, "{o:?}");
    }
    assert!(hankel_first_via_k(BesselOrder::Zero, 2.0).is_err());
    for n in 1..=5 {
        let x = 0.9;
        assert_eq!(
            dimension_exp(n, lambda, x, DimExpMode::Decay).unwrap().re,
            modified_helmholtz(n, lambda, x, ModifiedBranch::Decaying).unwrap()
        );
        assert_eq!(
            dimension_exp(n, lambda, x, DimExpMode::Growth).unwrap().re,
            modified_helmholtz(n, lambda, x, ModifiedBranch::Growing).unwrap()
        );
        assert_eq!(
            dimension_exp(n, lambda, x, DimExpMode::Oscillatory).unwrap(),
            helmholtz_complex(n, lambda, x, Orientation::Incoming).unwrap()
        );
    }
}

#[test]
fn closed_form_examples() {
    let v = closed_form(3, &ClosedFamily::Helmholtz { lambda: 1.0 }, 0.0, 1.0, &[PI]).unwrap();
    assert!(v.abs() < 1e-16);
    let v = closed_form(3, &ClosedFamily::Modified { mu: 1.0 }, 1.0, 0.0, &[1.0]).unwrap();
    assert!((v - 1.175_201_193_643_801_4).abs() < 1e-15);
    let c0 = ConvectionParams::new(vec![0.0, 0.0, 0.0], 1.0, 2.25).unwrap();
    for r in [0.2, 1.0, 3.0] {
        for (a1, a2) in [(1.0, 0.0), (0.0, 1.0), (0.4, -1.3)] {
            let c = closed_form(3, &ClosedFamily::ConvDiff(c0.clone()), a1, a2, &[r, 0.0, 0.0]).unwrap();
            let b = closed_form(3, &ClosedFamily::Modified { mu: 1.5 }, a1 + a2, a1, &[r]).unwrap();
            assert!((c - b).abs() < 1e-13 * b.abs());
        }
    }
    assert!(closed_form(3, &ClosedFamily::Modified { mu: 1.0 }, 0.0, 1.0, &[0.0]).is_err());
    assert!(closed_form(2, &ClosedFamily::Modified { mu: 1.0 }, 1.0, 0.0, &[0.0]).is_ok());
    assert!(closed_form(6, &ClosedFamily::Modified { mu: 1.0 }, 1.0, 0.0, &[1.0]).is_err());
}

/// Closed forms against their Bessel counterparts.
fn bessel_counterpart(n: usize, fam: &ClosedFamily, a1: f64, a2: f64, d: &[f64]) -> f64 {
    let r = d.iter().map(|v| v * v).sum::<f64>().sqrt();
    let half = |z: f64| (PI * z / 2.0).sqrt();
    let kfac = |z: f64| (2.0 * z / PI).sqrt();
    match fam {
        ClosedFamily::Helmholtz { lambda } => {
            let z = lambda * r;
            match n {
                2 => a1 * j(2, z) + a2 * y(2, z),
                3 => (-a1 * half(z) * y(3, z) + a2 * half(z) * j(3, z)) / r,
                4 => (a1 * j(4, z) + a2 * y(4, z)) / r,
                _ => (-a1 * z * half(z) * j(5, z) - a2 * z * half(z) * y(5, z)) / r.powi(3),
            }
        }
        ClosedFamily::Modified { mu } => {
            let z = mu * r;
            match n {
                2 => a1 * bi(2, z) + a2 * bk(2, z),
                3 => (a1 * half(z) * bi(3, z) + a2 * kfac(z) * bk(3, z)) / r,
                4 => (a1 * bi(4, z) + a2 * bk(4, z)) / r,
                _ => (a1 * z * half(z) * bi(5, z) + a2 * z * kfac(z) * bk(5, z)) / r.powi(3),
            }
        }
        ClosedFamily::ConvDiff(c) => {
            let z = c.rho() * r;
            let drift = (-c.velocity.iter().zip(d).map(|(a, b)| a * b).sum::<f64>() / (2.0 * c.diffusivity)).exp();
            let radial = match n {
                2 => a1 * bi(2, z) + a2 * bk(2, z),
                3 => {
                    let sinh = half(z) * bi(3, z);
                    let cosh = sinh + kfac(z) * bk(3, z);
                    (a1 * cosh + a2 * sinh) / r
                }
                4 => (a1 * bi(4, z) + a2 * bk(4, z)) / r,
                _ => (a1 * z * half(z) * bi(5, z) + a2 * z * kfac(z) * bk(5, z)) / r.powi(3),
            };
            drift * radial
        }
    }
}

#[test]
fn closed_forms_match_bessel_forms() {
    let velocities = [vec![0.8, -0.3], vec![-2.0, 1.1]];
    for n in 2..=5 {
        let mut fams = vec![ClosedFamily::Helmholtz { lambda: 1.3 }, ClosedFamily::Modified { mu: 0.9 }];
        for v in &velocities {
            let mut vel = v.clone();
            vel.resize(n, 0.25);
            fams.push(ClosedFamily::ConvDiff(ConvectionParams::new(vel, 0.9, 0.4).unwrap()));
        }
        for fam in &fams {
            for r in log_grid(0.1, 10.0, 100) {
                let mut d = vec![0.0; n];
                d[0] = r * 0.6;
                d[1] = r * 0.8;
                let f1 = closed_form(n, fam, 1.0, 0.0, &d).unwrap();
                let f2 = closed_form(n, fam, 0.0, 1.0, &d).unwrap();
                let scale = match fam {
                    ClosedFamily::Helmholtz { .. } => (f1 * f1 + f2 * f2).sqrt(),
                    _ => 0.0,
                };
                for (a1, a2, f) in [(1.0, 0.0, f1), (0.0, 1.0, f2)] {
                    let b = bessel_counterpart(n, fam, a1, a2, &d);
                    let denom = if scale > 0.0 { scale } else { b.abs() };
                    assert!((f - b).abs() <= 1e-10 * denom, "n={n} {fam:?} r={r} ({a1},{a2}): {f} vs {b}");
                }
            }
        }
    }
}

fn fd_derivs(f: &dyn Fn(f64) -> f64, x: f64, h: f64) -> (f64, f64) {
    let (fm2, fm1, f0, fp1, fp2) = (f(x - 2.0 * h), f(x - h), f(x), f(x + h), f(x + 2.0 * h));
    let d1 = (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
    let d2 = (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h);
    (d1, d2)
}

#[test]
fn helmholtz_and_modified_equations_hold() {
    let radii: Vec<f64> = (0..20).map(|i| 0.4 + 0.25 * i as f64).collect();
    let lambda = 1.7;
    let h = 2e-3;
    for n in 1..=5 {
        for &r in &radii {
            let comps: Vec<(Box<dyn Fn(f64) -> f64>, f64)> = vec![
                (Box::new(move |t| helmholtz_regular(n, lambda, t).unwrap()), lambda * lambda),
                (Box::new(move |t| helmholtz_singular(n, lambda, t).unwrap()), lambda * lambda),
                (Box::new(move |t| helmholtz_cosine(n, lambda, t).unwrap()), lambda * lambda),
                (Box::new(move |t| modified_helmholtz(n, lambda, t, ModifiedBranch::Decaying).unwrap()), -lambda * lambda),
                (Box::new(move |t| modified_helmholtz(n, lambda, t, ModifiedBranch::Growing).unwrap()), -lambda * lambda),
            ];
            for (idx, (f, k2)) in comps.iter().enumerate() {
                if idx == 4 && n == 1 {
                    continue;
                }
                let (d1, d2) = fd_derivs(f.as_ref(), r, h);
                let v = f(r);
                let lap = d2 + (n as f64 - 1.0) / r * d1;
                let scale = k2.abs() * v.abs().max(d1.abs() / lambda);
                assert!((lap + k2 * v).abs() < 1e-6 * scale, "n={n} kernel {idx} r={r}");
            }
        }
    }
}

#[test]
fn convdiff_equation_holds() {
    let h = 2e-3;
    for n in [2usize, 3] {
        let mut vel = vec![0.9, -0.4, 0.3];
        vel.truncate(n);
        let c = ConvectionParams::new(vel.clone(), 0.7, 0.5).unwrap();
        for fam in [KernelFamily::ConvDiffFundamental, KernelFamily::ConvDiffGeneral] {
            for i in 0..20 {
                let t = 0.3 + 0.2 * i as f64;
                let mut x: Vec<f64> = vec![t * 0.6, -t * 0.5, t * 0.4];
                x.truncate(n);
                let f = |p: &[f64]| convdiff_kernel(fam, n, &c, p).unwrap();
                let u = f(&x);
                let mut lap = 0.0;
                let mut adv = 0.0;
                let mut grad_norm = 0.0;
                for axis in 0..n {
                    let g = |s: f64| {
                        let mut p = x.clone();
                        p[axis] = s;
                        f(&p)
                    };
                    let (d1, d2) = fd_derivs(&g, x[axis], h);
                    lap += d2;
                    adv += vel[axis] * d1;
                    grad_norm += d1.abs();
                }
                let res = 0.7 * lap + adv - 0.5 * u;
                let scale = 0.7 * lap.abs() + grad_norm + 0.5 * u.abs();
                assert!(res.abs() < 1e-5 * scale, "n={n} {fam:?} t={t} res={res}");
            }
        }
    }
}

#[test]
fn divergence_limits() {
    for n in [2usize, 3] {
        let specs = vec![
            KernelSpec::new(KernelFamily::HelmholtzSingular, n, 1.3).unwrap(),
            KernelSpec::new(KernelFamily::HelmholtzIncoming, n, 1.3).unwrap(),
            KernelSpec::new(KernelFamily::HelmholtzOutgoing, n, 1.3).unwrap(),
            KernelSpec::new(KernelFamily::ModifiedDecaying, n, 0.8).unwrap(),
            KernelSpec::new(KernelFamily::DimExp(DimExpMode::Decay), n, 0.8).unwrap(),
            KernelSpec::convdiff(KernelFamily::ConvDiffFundamental, n, ConvectionParams::new(vec![0.5; n], 1.0, 0.2).unwrap()).unwrap(),
        ];
        for s in specs {
            let rep = divergence_check(&s).unwrap();
            assert!(rep.is_fundamental);
            assert!(rep.residual < 1e-3, "{s:?} {rep:?}");
        }
    }
    for n in [1usize, 4, 5] {
        let rep = divergence_check(&KernelSpec::new(KernelFamily::ModifiedDecaying, n, 1.1).unwrap()).unwrap();
        assert!(rep.residual < 1e-3);
        let rep = divergence_check(&KernelSpec::new(KernelFamily::HelmholtzSingular, n, 1.1).unwrap()).unwrap();
        assert!(rep.residual < 1e-3);
    }
    let rep = divergence_check(&KernelSpec::new(KernelFamily::HelmholtzRegular, 3, 2.0).unwrap()).unwrap();
    assert_eq!(rep.limit, 0.0);
    assert!(!rep.is_fundamental);
}

#[test]
fn psi_matches_components() {
    for n in 1..=5 {
        for r in [0.0, 0.4, 2.2] {
            let p = psi_composite(n, 1.9, r).unwrap();
            assert_eq!(p.re, helmholtz_regular_deriv(n, 1.9, r).unwrap());
            assert_eq!(p.im, -helmholtz_regular(n, 1.9, r).unwrap());
        }
    }
}

#[test]
fn convdiff_is_anisotropic() {
    let c = ConvectionParams::new(vec![1.0, 0.0], 1.0, 0.1).unwrap();
    let d = [0.5, 0.0];
    let rd = [0.0, 0.5];
    for fam in [KernelFamily::ConvDiffFundamental, KernelFamily::ConvDiffGeneral, KernelFamily::ConvDiffRapid] {
        assert!(fam.is_anisotropic());
        let a = convdiff_kernel(fam, 2, &c, &d).unwrap();
        let b = convdiff_kernel(fam, 2, &c, &rd).unwrap();
        assert!((a - b).abs() > 1e-3 * a.abs());
    }
}

#[test]
fn prefactors_reproduce_printed_kernels() {
    for n in 1..=5 {
        for &(s, r) in &[(0.7, 0.9), (2.3, 0.35)] {
            let pf = |f| paper_prefactor(f, n, s).unwrap();
            let lib = |f| KernelSpec::new(f, n, s).unwrap().eval_radial(r).unwrap();
            let close = |a: Complex64, b: Complex64| (a - b).norm() <= 1e-12 * b.norm().max(1e-300);
            assert!(close(pf(KernelFamily::HelmholtzRegular) * lib(KernelFamily::HelmholtzRegular), printed_phi(n, s, r).into()));
            assert!(close(pf(KernelFamily::HelmholtzIncoming) * lib(KernelFamily::HelmholtzIncoming), printed_g(n, s, r)));
            assert!(close(pf(KernelFamily::HelmholtzOutgoing) * lib(KernelFamily::HelmholtzOutgoing), printed_h(n, s, r)));
            assert!(close(pf(KernelFamily::HelmholtzCosine) * lib(KernelFamily::HelmholtzCosine), printed_p(n, s, r).into()));
            assert!(close(pf(KernelFamily::HelmholtzSingular) * lib(KernelFamily::HelmholtzSingular), printed_q(n, s, r).into()));
            assert!(close(pf(KernelFamily::ModifiedDecaying) * lib(KernelFamily::ModifiedDecaying), printed_w(n, s, r).into()));
            assert!(close(pf(KernelFamily::ModifiedGrowing) * lib(KernelFamily::ModifiedGrowing), printed_what(n, s, r).into()));
        }
    }
}

#[test]
fn spec_validation() {
    assert!(KernelSpec::new(KernelFamily::HelmholtzRegular, 2, 0.0).is_ok());
    assert!(KernelSpec::new(KernelFamily::ModifiedDecaying, 2, 0.0).is_err());
    assert!(KernelSpec::new(KernelFamily::HelmholtzRegular, 6, 1.0).is_err());
    assert!(KernelSpec::new(KernelFamily::ConvDiffGeneral, 2, 1.0).is_err());
    assert!(ConvectionParams::new(vec![1.0], 0.0, 0.0).is_err());
    assert!(ConvectionParams::new(vec![1.0], 1.0, -0.1).is_err());
    let c = ConvectionParams::new(vec![1.0, 2.0, 3.0], 1.0, 0.0).unwrap();
    assert!(KernelSpec::convdiff(KernelFamily::ConvDiffGeneral, 2, c).is_err());
    assert!((unit_sphere_surface(1) - 2.0).abs() < 1e-15);
    assert!((unit_sphere_surface(2) - 2.0 * PI).abs() < 1e-15);
    assert!((unit_sphere_surface(3) - 4.0 * PI).abs() < 1e-14);
}

proptest! {
    #[test]
    fn regular_kernels_are_bounded_by_one(n in 1usize..=5, lambda in 0.0f64..20.0, r in 0.0f64..5.0) {
        let v = helmholtz_regular(n, lambda, r).unwrap();
        prop_assert!(v.abs() <= 1.0 + 1e-12);
    }

    #[test]
    fn outgoing_is_conjugate(n in 1usize..=5, lambda in 0.01f64..20.0, r in 1e-3f64..50.0) {
        let g = helmholtz_complex(n, lambda, r, Orientation::Incoming).unwrap();
        let h = helmholtz_complex(n, lambda, r, Orientation::Outgoing).unwrap();
        prop_assert_eq!(h, g.conj());
    }

    #[test]
    fn drift_ratio_along_any_displacement(vx in -3.0f64..3.0, vy in -3.0f64..3.0, dx in -2.0f64..2.0, dy in -2.0f64..2.0, k in 0.0f64..2.0) {
        prop_assume!(dx.abs() + dy.abs() > 1e-3);
        prop_assume!(vx.abs() + vy.abs() + k > 1e-3);
        let c = ConvectionParams::new(vec![vx, vy], 1.3, k).unwrap();
        let a = convdiff_kernel(KernelFamily::ConvDiffFundamental, 2, &c, &[dx, dy]).unwrap();
        let b = convdiff_kernel(KernelFamily::ConvDiffFundamental, 2, &c, &[-dx, -dy]).unwrap();
        let expect = (-(vx * dx + vy * dy) / 1.3).exp();
        prop_assert!((a / b - expect).abs() <= 1e-12 * expect);
    }

    #[test]
    fn regular_derivative_matches_difference(n in 1usize..=5, z in 0.05f64..30.0) {
        let h = 1e-5;
        let fd = (helmholtz_regular(n, 1.0, z + h).unwrap() - helmholtz_regular(n, 1.0, z - h).unwrap()) / (2.0 * h);
        prop_assert!((fd - helmholtz_regular_deriv(n, 1.0, z).unwrap()).abs() < 1e-8);
    }
}
