//! Eigenfunction-expansion solver for homogeneous diffusion problems:
//! initial data are projected on Helmholtz eigenmodes found by the
//! indicator scan, and each mode decays as `exp(-gamma^2 kappa t)`.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eigensolver::{eigen_scan, BoundaryCondition, EigenError, EigenProblem, EigenResult, Eigenmode, ScanOptions};
use crate::geometry::{Domain, GeometryError, Point, QuadratureRule};
use crate::hfseries::{self, HfError};

#[derive(Debug, Error)]
pub enum DiffusionError {
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("boundary data must be homogeneous and time independent")]
    NonHomogeneous,
    #[error("mode norm {norm:e} below {floor:e}")]
    DegenerateMode { norm: f64, floor: f64 },
    #[error("no eigenvalues found")]
    NoModes,
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Series(#[from] HfError),
}

pub type Result<T> = std::result::Result<T, DiffusionError>;

/// Rejects non-zero boundary samples.
pub fn check_boundary_data(values: &[f64]) -> Result<()> {
    if values.iter().all(|v| *v == 0.0) {
        Ok(())
    } else {
        Err(DiffusionError::NonHomogeneous)
    }
}

/// Accepts a Robin coefficient `a` in `du/dn + a u = 0` when eigenvalues stay
/// nonnegative; no Robin solver is provided.
pub fn check_robin(a: f64) -> Result<()> {
    if a >= 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(DiffusionError::InvalidProblem(format!("Robin coefficient {a} must be >= 0")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DiffusionProblem {
    pub domain: Domain,
    pub kappa: f64,
    pub boundary: BoundaryCondition,
    pub points: Vec<Point>,
    pub values: Vec<f64>,
    /// Quadrature weights of the sample points; `None` means uniform
    /// weights and a least-squares projection.
    pub weights: Option<Vec<f64>>,
}

impl DiffusionProblem {
    pub fn on_rule<F: Fn(&[f64]) -> f64>(domain: &Domain, kappa: f64, boundary: BoundaryCondition, rule: &QuadratureRule, r: F) -> Self {
        Self {
            domain: domain.clone(),
            kappa,
            boundary,
            points: rule.nodes.clone(),
            values: rule.nodes.iter().map(|p| r(p)).collect(),
            weights: Some(rule.weights.clone()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(DiffusionError::InvalidProblem(m.into()));
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return bad("kappa must be positive");
        }
        if self.points.is_empty() || self.points.len() != self.values.len() {
            return bad("initial samples must be nonempty with one value per point");
        }
        let n = self.domain.dimension();
        if self.points.iter().any(|p| p.len() != n) {
            return bad("sample dimension does not match the domain");
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return bad("non-finite initial value");
        }
        if let Some(w) = &self.weights {
            if w.len() != self.points.len() || w.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
                return bad("weights must be positive with one per sample");
            }
        }
        Ok(())
    }

    fn weights(&self) -> Vec<f64> {
        match &self.weights {
            Some(w) => w.clone(),
            None => vec![self.domain.measure() / self.points.len() as f64; self.points.len()],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenSource {
    Scan(ScanOptions),
    Given(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub budget: usize,
    pub eigen: EigenSource,
    /// Resolution of the rule used to normalise eigenfunctions.
    pub norm_resolution: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { budget: 5, eigen: EigenSource::Scan(ScanOptions::default()), norm_resolution: 24 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientMethod {
    Orthogonality,
    LeastSquares,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffusionMode {
    pub gamma: f64,
    /// Eigenfunction with unit quadrature L2 norm.
    pub eigenfunction: Eigenmode,
    pub coefficient: f64,
}

impl DiffusionMode {
    /// Per-center coefficients `A_jk` of the value and derivative kernels.
    pub fn center_coefficients(&self) -> (Vec<f64>, Vec<f64>) {
        let f = self.coefficient;
        (
            self.eigenfunction.values.iter().map(|v| f * v).collect(),
            self.eigenfunction.derivs.iter().map(|v| f * v).collect(),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiffusionSolution {
    pub modes: Vec<DiffusionMode>,
    /// Constant term; evaluation adds `a0 / 2` (pure Neumann only).
    pub a0: f64,
    pub kappa: f64,
    pub method: CoefficientMethod,
    /// Relative L2 misfit of the projected initial data.
    pub residual: f64,
    pub warnings: Vec<String>,
    neumann_constant: bool,
}

impl DiffusionSolution {
    pub fn gammas(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.gamma).collect()
    }

    /// Projects new data on the same eigenfunctions.
    pub fn reproject(&self, points: &[Point], values: &[f64], weights: Option<&[f64]>) -> Result<DiffusionSolution> {
        let modes: Vec<Eigenmode> = self.modes.iter().map(|m| m.eigenfunction.clone()).collect();
        let w = match weights {
            Some(w) => w.to_vec(),
            None => vec![1.0; points.len()],
        };
        let mut s = project(&modes, self.neumann_constant, points, values, &w, weights.is_some(), self.kappa)?;
        s.warnings = self.warnings.clone();
        Ok(s)
    }
}

fn mode_values(mode: &Eigenmode, points: &[Point]) -> Vec<f64> {
    points.par_iter().map(|p| mode.eval(p)).collect()
}

/// `int R v / int v^2` on the given quadrature.
pub fn mode_coefficients(values: &[f64], mode: &Eigenmode, rule: &QuadratureRule) -> Result<f64> {
    if values.len() != rule.len() {
        return Err(DiffusionError::InvalidProblem("values do not match quadrature nodes".into()));
    }
    let v = mode_values(mode, &rule.nodes);
    let den = rule.inner(&v, &v);
    let floor = 1e-14 * rule.total_weight();
    if !(den >= floor) {
        return Err(DiffusionError::DegenerateMode { norm: den, floor });
    }
    Ok(rule.inner(values, &v) / den)
}

fn normalise(mode: Eigenmode, rule: &QuadratureRule) -> Result<Eigenmode> {
    let v = mode_values(&mode, &rule.nodes);
    let norm2 = rule.inner(&v, &v);
    let floor = 1e-14 * rule.total_weight();
    if !(norm2 >= floor) {
        return Err(DiffusionError::DegenerateMode { norm: norm2, floor });
    }
    let mean = rule.integrate_values(&v);
    let sign = if mean.abs() > 1e-8 * norm2.sqrt() * rule.total_weight().sqrt() {
        mean.signum()
    } else {
        let big = v.iter().copied().fold(0.0f64, |a, b| if b.abs() > a.abs() { b } else { a });
        big.signum()
    };
    Ok(mode.scaled(sign / norm2.sqrt()))
}

fn project(
    modes: &[Eigenmode],
    constant: bool,
    points: &[Point],
    values: &[f64],
    weights: &[f64],
    weighted: bool,
    kappa: f64,
) -> Result<DiffusionSolution> {
    let offset = usize::from(constant);
    let cols: Vec<Vec<f64>> = modes.par_iter().map(|m| mode_values(m, points)).collect();
    let m = modes.len() + offset;
    let column = |j: usize| -> Vec<f64> {
        if j < offset {
            vec![0.5; points.len()]
        } else {
            cols[j - offset].clone()
        }
    };
    let all: Vec<Vec<f64>> = (0..m).map(column).collect();
    let inner = |a: &[f64], b: &[f64]| -> f64 { weights.iter().zip(a.iter().zip(b)).map(|(w, (x, y))| w * x * y).sum() };
    let gram = DMatrix::from_fn(m, m, |i, j| inner(&all[i], &all[j]));
    let off = (0..m)
        .flat_map(|i| (0..m).filter(move |&j| j != i).map(move |j| (i, j)))
        .map(|(i, j)| gram[(i, j)].abs() / (gram[(i, i)] * gram[(j, j)]).sqrt())
        .fold(0.0, f64::max);
    let (method, x) = if weighted && off < 1e-8 {
        let x: Vec<f64> = (0..m).map(|j| inner(values, &all[j]) / gram[(j, j)]).collect();
        (CoefficientMethod::Orthogonality, x)
    } else {
        let sw: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
        let a = DMatrix::from_fn(points.len(), m, |i, j| sw[i] * all[j][i]);
        let b = DVector::from_iterator(points.len(), values.iter().zip(&sw).map(|(v, s)| v * s));
        let x = hfseries::lstsq(&a, &b, 1e-12)?;
        (CoefficientMethod::LeastSquares, x.iter().copied().collect())
    };
    let fitted: Vec<f64> = (0..points.len()).map(|i| (0..m).map(|j| x[j] * all[j][i]).sum()).collect();
    let diff: Vec<f64> = values.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let energy = inner(values, values);
    let residual = if energy > 0.0 { (inner(&diff, &diff) / energy).sqrt() } else { inner(&diff, &diff).sqrt() };
    let a0 = if constant { x[0] } else { 0.0 };
    let modes = modes
        .iter()
        .zip(x.iter().skip(offset))
        .map(|(e, c)| DiffusionMode { gamma: e.lambda, eigenfunction: e.clone(), coefficient: *c })
        .collect();
    Ok(DiffusionSolution { modes, a0, kappa, method, residual, warnings: Vec::new(), neumann_constant: constant })
}

/// Solve with the default eigenproblem for the domain and boundary condition.
pub fn solve_diffusion(problem: &DiffusionProblem, opts: &SolveOptions) -> Result<DiffusionSolution> {
    let eigen = EigenProblem::default_for(&problem.domain, &problem.boundary)?;
    solve_diffusion_with(problem, &eigen, opts)
}

pub fn solve_diffusion_with(problem: &DiffusionProblem, eigen: &EigenProblem, opts: &SolveOptions) -> Result<DiffusionSolution> {
    problem.validate()?;
    if opts.budget == 0 {
        return Err(DiffusionError::InvalidProblem("mode budget must be at least 1".into()));
    }
    let found = match &opts.eigen {
        EigenSource::Scan(scan) => eigen_scan(eigen, scan)?,
        EigenSource::Given(l) => EigenResult::from_values(l)?,
    };
    let mut warnings = Vec::new();
    let gammas: Vec<f64> = found.lambdas().into_iter().take(opts.budget).collect();
    if gammas.is_empty() {
        return Err(DiffusionError::NoModes);
    }
    if gammas.len() < opts.budget {
        warnings.push(format!("found {} of {} requested eigenvalues", gammas.len(), opts.budget));
    }
    let rule = problem.domain.quadrature(opts.norm_resolution)?;
    let modes: Vec<Eigenmode> = gammas
        .par_iter()
        .map(|&g| normalise(eigen.mode(g)?, &rule))
        .collect::<Result<_>>()?;
    let constant = problem.boundary == BoundaryCondition::Neumann;
    let weights = problem.weights();
    let mut s = project(&modes, constant, &problem.points, &problem.values, &weights, problem.weights.is_some(), problem.kappa)?;
    s.warnings = warnings;
    Ok(s)
}

/// `a0/2 + sum_j A_j exp(-gamma_j^2 kappa t) v_j(x)`.
pub fn evaluate_solution(solution: &DiffusionSolution, points: &[Point], t: f64) -> Result<Vec<f64>> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(DiffusionError::InvalidProblem(format!("time must be finite and >= 0, got {t}")));
    }
    let decay: Vec<f64> = solution.modes.iter().map(|m| m.coefficient * (-m.gamma * m.gamma * solution.kappa * t).exp()).collect();
    Ok(points
        .par_iter()
        .map(|p| {
            solution.a0 / 2.0
                + solution
                    .modes
                    .iter()
                    .zip(&decay)
                    .filter(|(_, d)| **d != 0.0)
                    .map(|(m, d)| d * m.eigenfunction.eval(p))
                    .sum::<f64>()
        })
        .collect())
}
