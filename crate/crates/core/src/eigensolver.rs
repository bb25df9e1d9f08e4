//! Scale eigenvalues from a singular-value indicator of the regular-kernel
//! collocation matrix.
//!
//! The indicator at `lambda` is the smallest singular value of the boundary
//! block of an orthonormal basis for the column space of the stacked
//! `[boundary; interior]` collocation matrix. It vanishes when some kernel
//! combination satisfies the homogeneous boundary condition without being
//! zero inside.

use nalgebra::{DMatrix, DVector, SVD};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{self, BoundarySet, Domain, GeometryError, NodeSet, Point};
use crate::kernels::{regular_shape, regular_shape_prime, regular_shape_second};

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("invalid eigenproblem: {0}")]
    InvalidProblem(String),
    #[error("rank-deficient geometry: {0}")]
    RankDeficient(String),
    #[error("singular value decomposition failed at lambda = {0}")]
    SvdFailed(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

pub type Result<T> = std::result::Result<T, EigenError>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
    /// Boundary points with `x[axis] > threshold` carry the Neumann condition.
    Mixed { axis: usize, threshold: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Basis {
    Regular,
    RegularDeriv,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Column {
    Value,
    Deriv,
}

impl Basis {
    fn columns(self) -> &'static [Column] {
        match self {
            Basis::Regular => &[Column::Value],
            Basis::RegularDeriv => &[Column::Deriv],
            Basis::Both => &[Column::Value, Column::Deriv],
        }
    }

    pub fn width(self) -> usize {
        self.columns().len()
    }
}

#[derive(Clone, Debug)]
pub struct EigenProblem {
    pub dimension: usize,
    pub boundary: BoundarySet,
    /// Per boundary point: `true` for a normal-derivative row.
    pub neumann: Vec<bool>,
    pub interior: Vec<Point>,
    pub centers: Vec<Point>,
    pub basis: Basis,
    pub rank_tol: f64,
}

fn neumann_mask(boundary: &BoundarySet, condition: &BoundaryCondition) -> Result<Vec<bool>> {
    match condition {
        BoundaryCondition::Dirichlet => Ok(vec![false; boundary.len()]),
        BoundaryCondition::Neumann => Ok(vec![true; boundary.len()]),
        BoundaryCondition::Mixed { axis, threshold } => {
            if boundary.points.first().is_some_and(|p| *axis >= p.len()) {
                return Err(EigenError::InvalidProblem(format!("partition axis {axis} out of range")));
            }
            Ok(boundary.points.iter().map(|p| p[*axis] > *threshold).collect())
        }
    }
}

impl EigenProblem {
    pub fn new(
        domain: &Domain,
        condition: &BoundaryCondition,
        boundary: BoundarySet,
        interior: Vec<Point>,
        nodes: &NodeSet,
        basis: Basis,
    ) -> Result<Self> {
        let neumann = neumann_mask(&boundary, condition)?;
        let problem = Self {
            dimension: domain.dimension(),
            boundary,
            neumann,
            interior,
            centers: nodes.centers.clone(),
            basis,
            rank_tol: 1e-10,
        };
        problem.validate()?;
        Ok(problem)
    }

    /// Defaults: on intervals a single center at the left end with both
    /// bases and 20 interior points; in 2D, 40 boundary points, 60 interior
    /// and 20 center points drawn by farthest-point sampling.
    pub fn default_for(domain: &Domain, condition: &BoundaryCondition) -> Result<Self> {
        if domain.dimension() == 1 {
            let boundary = domain.boundary_discretize(8)?;
            let (a, b) = (boundary.points[0][0], boundary.points[1][0]);
            let interior: Vec<Point> = (0..20).map(|i| vec![a + (b - a) * (0.05 + 0.9 * i as f64 / 19.0)]).collect();
            let nodes = NodeSet::new(domain, vec![vec![a]], None)?;
            return Self::new(domain, condition, boundary, interior, &nodes, Basis::Both);
        }
        let boundary = domain.boundary_discretize(40)?;
        let rule = domain.quadrature(12)?;
        let interior = geometry::farthest_point_sample(&rule.nodes, 60);
        let nodes = NodeSet::default_for(domain, 20, 16)?;
        Self::new(domain, condition, boundary, interior, &nodes, Basis::Regular)
    }

    pub fn collocation_count(&self) -> usize {
        self.boundary.len() + self.interior.len()
    }

    pub fn column_count(&self) -> usize {
        self.centers.len() * self.basis.width()
    }

    fn validate(&self) -> Result<()> {
        if !(1..=5).contains(&self.dimension) {
            return Err(EigenError::InvalidProblem(format!("dimension {} unsupported", self.dimension)));
        }
        if self.centers.is_empty() || self.boundary.is_empty() {
            return Err(EigenError::InvalidProblem("no centers or boundary points".into()));
        }
        if self.collocation_count() < self.column_count() {
            return Err(EigenError::InvalidProblem(format!(
                "{} collocation points for {} unknowns",
                self.collocation_count(),
                self.column_count()
            )));
        }
        let all: Vec<&Point> = self.boundary.points.iter().chain(&self.interior).collect();
        for group in [all, self.centers.iter().collect()] {
            for (i, p) in group.iter().enumerate() {
                if p.len() != self.dimension {
                    return Err(EigenError::InvalidProblem("point dimension mismatch".into()));
                }
                if group[i + 1..].iter().any(|q| geometry::distance(p, q) == 0.0) {
                    return Err(EigenError::RankDeficient(format!("coincident points at {p:?}")));
                }
            }
        }
        Ok(())
    }

    fn column_value(&self, col: Column, lambda: f64, x: &[f64], c: &[f64]) -> f64 {
        let z = lambda * geometry::distance(x, c);
        match col {
            Column::Value => regular_shape(self.dimension, z),
            Column::Deriv => regular_shape_prime(self.dimension, z),
        }
    }

    fn column_normal(&self, col: Column, lambda: f64, x: &[f64], normal: &[f64], c: &[f64]) -> f64 {
        let r = geometry::distance(x, c);
        let z = lambda * r;
        // At r = 0 the one-sided limit from the interior is taken.
        let cos = if r > 0.0 {
            x.iter().zip(c).zip(normal).map(|((a, b), m)| (a - b) * m).sum::<f64>() / r
        } else {
            -1.0
        };
        let slope = match col {
            Column::Value => regular_shape_prime(self.dimension, z),
            Column::Deriv => regular_shape_second(self.dimension, z),
        };
        lambda * slope * cos
    }

    /// Collocation matrix with boundary rows first.
    pub fn matrix(&self, lambda: f64) -> DMatrix<f64> {
        let cols = self.basis.columns();
        let k = self.centers.len();
        let nb = self.boundary.len();
        DMatrix::from_fn(self.collocation_count(), self.column_count(), |i, j| {
            let col = cols[j / k];
            let c = &self.centers[j % k];
            if i < nb {
                let x = &self.boundary.points[i];
                if self.neumann[i] {
                    self.column_normal(col, lambda, x, &self.boundary.normals[i], c)
                } else {
                    self.column_value(col, lambda, x, c)
                }
            } else {
                self.column_value(col, lambda, &self.interior[i - nb], c)
            }
        })
    }

    pub fn indicator(&self, lambda: f64) -> Result<f64> {
        Ok(self.analyse(lambda)?.0)
    }

    /// Indicator together with the kernel coefficients of the field that
    /// best satisfies the homogeneous boundary condition.
    pub fn null_field(&self, lambda: f64) -> Result<(f64, DVector<f64>)> {
        self.analyse(lambda)
    }

    fn analyse(&self, lambda: f64) -> Result<(f64, DVector<f64>)> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(EigenError::InvalidProblem(format!("lambda must be positive, got {lambda}")));
        }
        let a = self.matrix(lambda);
        let svd = SVD::try_new(a, true, true, f64::EPSILON, 10_000).ok_or(EigenError::SvdFailed(lambda))?;
        let s = &svd.singular_values;
        let smax = s[0];
        if !(smax > 0.0) {
            return Err(EigenError::RankDeficient(format!("zero collocation matrix at lambda = {lambda}")));
        }
        let rank = s.iter().take_while(|&&v| v > self.rank_tol * smax).count();
        let u = svd.u.as_ref().expect("u requested");
        let v_t = svd.v_t.as_ref().expect("v requested");
        let qb = u.view((0, 0), (self.boundary.len(), rank)).into_owned();
        let inner = SVD::try_new(qb, false, true, f64::EPSILON, 10_000).ok_or(EigenError::SvdFailed(lambda))?;
        let last = inner.singular_values.len() - 1;
        let sigma = inner.singular_values[last];
        let y = inner.v_t.as_ref().expect("v requested").row(last).transpose();
        let mut coeffs = DVector::zeros(self.column_count());
        for (i, yi) in y.iter().enumerate() {
            coeffs += v_t.row(i).transpose() * (yi / s[i]);
        }
        Ok((sigma, coeffs))
    }

    pub fn mode(&self, lambda: f64) -> Result<Eigenmode> {
        let (residual, coeffs) = self.null_field(lambda)?;
        let k = self.centers.len();
        let (values, derivs) = match self.basis {
            Basis::Regular => (coeffs.as_slice().to_vec(), vec![0.0; k]),
            Basis::RegularDeriv => (vec![0.0; k], coeffs.as_slice().to_vec()),
            Basis::Both => (coeffs.as_slice()[..k].to_vec(), coeffs.as_slice()[k..].to_vec()),
        };
        Ok(Eigenmode { lambda, residual, dimension: self.dimension, centers: self.centers.clone(), values, derivs })
    }
}

/// A kernel field `sum_k a_k Phi(lambda r_k) + b_k Phi'(lambda r_k)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Eigenmode {
    pub lambda: f64,
    pub residual: f64,
    pub dimension: usize,
    pub centers: Vec<Point>,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
}

impl Eigenmode {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.centers
            .iter()
            .zip(self.values.iter().zip(&self.derivs))
            .map(|(c, (a, b))| {
                let z = self.lambda * geometry::distance(x, c);
                let mut v = 0.0;
                if *a != 0.0 {
                    v += a * regular_shape(self.dimension, z);
                }
                if *b != 0.0 {
                    v += b * regular_shape_prime(self.dimension, z);
                }
                v
            })
            .sum()
    }

    pub fn scaled(mut self, factor: f64) -> Self {
        self.values.iter_mut().for_each(|v| *v *= factor);
        self.derivs.iter_mut().for_each(|v| *v *= factor);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanOptions {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub grid: usize,
    pub refine_tol: f64,
    pub threshold: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { lambda_lo: 1.0, lambda_hi: 10.0, grid: 400, refine_tol: 1e-10, threshold: 1e-6 }
    }
}

impl ScanOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_lo > 0.0) || !(self.lambda_hi > self.lambda_lo) || !self.lambda_hi.is_finite() {
            return Err(EigenError::InvalidProblem("need 0 < lambda_lo < lambda_hi".into()));
        }
        if self.grid < 50 {
            return Err(EigenError::InvalidProblem(format!("scan grid {} < 50", self.grid)));
        }
        if !(self.refine_tol > 0.0) {
            return Err(EigenError::InvalidProblem("refine_tol must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenValue {
    pub lambda: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    pub values: Vec<EigenValue>,
    pub grid: Vec<f64>,
    pub curve: Vec<f64>,
}

impl EigenResult {
    /// Wraps externally known eigenvalues, for instance analytic ones.
    pub fn from_values(lambdas: &[f64]) -> Result<Self> {
        if lambdas.iter().any(|l| !(*l > 0.0) || !l.is_finite()) || lambdas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(EigenError::InvalidProblem("eigenvalues must be positive and strictly increasing".into()));
        }
        Ok(Self {
            values: lambdas.iter().map(|&lambda| EigenValue { lambda, residual: 0.0 }).collect(),
            grid: Vec::new(),
            curve: Vec::new(),
        })
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.lambda).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }
}

fn golden_section<F: Fn(f64) -> Result<f64>>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<(f64, f64)> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c)?;
    let mut fd = f(d)?;
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(if fc < fd { (c, fc) } else { (d, fd) })
}

pub fn eigen_scan(problem: &EigenProblem, opts: &ScanOptions) -> Result<EigenResult> {
    opts.validate()?;
    let step = (opts.lambda_hi - opts.lambda_lo) / (opts.grid - 1) as f64;
    let grid: Vec<f64> = (0..opts.grid).map(|i| opts.lambda_lo + step * i as f64).collect();
    let curve: Vec<f64> = grid.par_iter().map(|&l| problem.indicator(l)).collect::<Result<_>>()?;

    let mut found: Vec<EigenValue> = Vec::new();
    for i in 1..grid.len() - 1 {
        if !(curve[i] < curve[i - 1] && curve[i] <= curve[i + 1]) {
            continue;
        }
        let (lambda, residual) = golden_section(|l| problem.indicator(l), grid[i - 1], grid[i + 1], opts.refine_tol)?;
        if residual >= opts.threshold || residual >= curve[i - 1] || residual >= curve[i + 1] {
            continue;
        }
        match found.last_mut() {
            Some(prev) if lambda - prev.lambda < 2.0 * step => {
                if residual < prev.residual {
                    *prev = EigenValue { lambda, residual };
                }
            }
            _ => found.push(EigenValue { lambda, residual }),
        }
    }
    Ok(EigenResult { values: found, grid, curve })
}
