//! Helmholtz-Fourier series: harmonic splitting, multiscale kernel fits,
//! Parseval diagnostics and edge-corrected trigonometric series on intervals.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, SVD};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eigensolver::EigenResult;
use crate::geometry::{self, BoundarySet, Domain, DomainSpec, GeometryError, Point, QuadratureRule};
use crate::kernels::{regular_shape, regular_shape_prime, KernelError, KernelSpec};

#[derive(Debug, Error)]
pub enum HfError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("harmonic fit ill-conditioned: boundary residual {residual:e} with {sources} sources")]
    IllConditioned { residual: f64, sources: usize },
    #[error("least-squares solve failed")]
    SolveFailed,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
}

pub type Result<T> = std::result::Result<T, HfError>;

pub(crate) fn lstsq(a: &DMatrix<f64>, b: &DVector<f64>, rcond: f64) -> Result<DVector<f64>> {
    let svd = SVD::try_new(a.clone(), true, true, f64::EPSILON, 10_000).ok_or(HfError::SolveFailed)?;
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return Ok(DVector::zeros(a.ncols()));
    }
    svd.solve(b, rcond * smax).map_err(|_| HfError::SolveFailed)
}

/// Ridge-regularised least squares; `ridge` is relative to the largest
/// eigenvalue of the Gram matrix `A^T A`.
pub(crate) fn ridge_solve(a: &DMatrix<f64>, b: &DVector<f64>, ridge: f64) -> Result<DVector<f64>> {
    if ridge == 0.0 {
        return lstsq(a, b, 1e-13);
    }
    let smax = a.singular_values().iter().copied().fold(0.0, f64::max);
    let (m, n) = a.shape();
    let mut aug = DMatrix::zeros(m + n, n);
    aug.view_mut((0, 0), (m, n)).copy_from(a);
    let damp = ridge.sqrt() * smax;
    for i in 0..n {
        aug[(m + i, i)] = damp;
    }
    let mut rhs = DVector::zeros(m + n);
    rhs.rows_mut(0, m).copy_from(b);
    lstsq(&aug, &rhs, 1e-15)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HarmonicPart {
    Zero,
    /// `offset + slope x` on an interval.
    Linear { offset: f64, slope: f64 },
    /// Logarithmic sources outside the domain plus a constant.
    Mfs { sources: Vec<Point>, strengths: Vec<f64>, constant: f64 },
    /// Poisson integral of boundary samples on a disk.
    Poisson { center: [f64; 2], radius: f64, values: Vec<f64> },
}

impl HarmonicPart {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            HarmonicPart::Zero => 0.0,
            HarmonicPart::Linear { offset, slope } => offset + slope * x[0],
            HarmonicPart::Mfs { sources, strengths, constant } => {
                constant + sources.iter().zip(strengths).map(|(s, q)| q * geometry::distance(x, s).ln()).sum::<f64>()
            }
            HarmonicPart::Poisson { center, radius, values } => {
                let (dx, dy) = (x[0] - center[0], x[1] - center[1]);
                let rho2 = dx * dx + dy * dy;
                let m = values.len();
                if rho2.sqrt() >= radius * (1.0 - 1e-9) {
                    let t = dy.atan2(dx).rem_euclid(2.0 * PI) / (2.0 * PI) * m as f64;
                    let i = t.floor() as usize % m;
                    let frac = t - t.floor();
                    return values[i] * (1.0 - frac) + values[(i + 1) % m] * frac;
                }
                let r2 = radius * radius;
                values
                    .iter()
                    .enumerate()
                    .map(|(i, g)| {
                        let th = 2.0 * PI * i as f64 / m as f64;
                        let (ex, ey) = (radius * th.cos() - dx, radius * th.sin() - dy);
                        g * (r2 - rho2) / (ex * ex + ey * ey)
                    })
                    .sum::<f64>()
                    / m as f64
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "values", rename_all = "snake_case")]
pub enum BoundaryData {
    Dirichlet(Vec<f64>),
    Neumann(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct HarmonicFit {
    pub part: HarmonicPart,
    /// RMS boundary misfit relative to the largest datum.
    pub residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicOptions {
    pub offset: f64,
    pub tolerance: f64,
}

impl Default for HarmonicOptions {
    fn default() -> Self {
        Self { offset: 0.3, tolerance: 1e-4 }
    }
}

/// Harmonic function matching boundary data in least squares. Neumann
/// solutions are pinned to zero at the first boundary point.
pub fn harmonic_part(domain: &Domain, boundary: &BoundarySet, data: &BoundaryData, opts: &HarmonicOptions) -> Result<HarmonicFit> {
    let (values, neumann) = match data {
        BoundaryData::Dirichlet(v) => (v, false),
        BoundaryData::Neumann(v) => (v, true),
    };
    if values.len() != boundary.len() {
        return Err(HfError::InvalidInput(format!("{} boundary values for {} points", values.len(), boundary.len())));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(HfError::InvalidInput("non-finite boundary data".into()));
    }
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return Ok(HarmonicFit { part: HarmonicPart::Zero, residual: 0.0 });
    }
    if domain.dimension() == 1 {
        let (xa, xb) = (boundary.points[0][0], boundary.points[1][0]);
        let part = if neumann {
            let slope = (values[1] - values[0]) / 2.0;
            HarmonicPart::Linear { offset: -slope * xa, slope }
        } else {
            let slope = (values[1] - values[0]) / (xb - xa);
            HarmonicPart::Linear { offset: values[0] - slope * xa, slope }
        };
        let misfit = if neumann { (values[0] + values[1]).abs() / 2.0 } else { 0.0 };
        return Ok(HarmonicFit { part, residual: misfit / scale });
    }
    let shift = opts.offset * domain.diameter();
    let sources: Vec<Point> = boundary
        .points
        .iter()
        .zip(&boundary.normals)
        .map(|(p, n)| p.iter().zip(n).map(|(x, m)| x + shift * m).collect::<Point>())
        .filter(|s| !domain.contains(s, 1e-9 * domain.diameter()))
        .collect();
    let ns = sources.len();
    let cols = if neumann { ns } else { ns + 1 };
    let a = DMatrix::from_fn(boundary.len(), cols, |i, j| {
        let x = &boundary.points[i];
        if j == ns {
            return 1.0;
        }
        let s = &sources[j];
        if neumann {
            let n = &boundary.normals[i];
            let r2: f64 = x.iter().zip(s).map(|(a, b)| (a - b) * (a - b)).sum();
            x.iter().zip(s).zip(n).map(|((a, b), m)| (a - b) * m).sum::<f64>() / r2
        } else {
            geometry::distance(x, s).ln()
        }
    });
    let b = DVector::from_column_slice(values);
    let coef = lstsq(&a, &b, 1e-14)?;
    let misfit = (&a * &coef - &b).norm() / (boundary.len() as f64).sqrt() / scale;
    let strengths = coef.rows(0, ns).iter().copied().collect::<Vec<_>>();
    let mut part = HarmonicPart::Mfs { sources, strengths, constant: if neumann { 0.0 } else { coef[ns] } };
    if neumann {
        let pin = part.eval(&boundary.points[0]);
        if let HarmonicPart::Mfs { constant, .. } = &mut part {
            *constant = -pin;
        }
    }
    if !misfit.is_finite() || misfit > opts.tolerance {
        return Err(HfError::IllConditioned { residual: misfit, sources: ns });
    }
    Ok(HarmonicFit { part, residual: misfit })
}

/// Poisson-integral harmonic extension of equally spaced boundary samples
/// on a disk, as produced by [`Domain::boundary_discretize`].
pub fn harmonic_part_poisson(domain: &Domain, values: &[f64]) -> Result<HarmonicPart> {
    match domain.spec() {
        DomainSpec::Disk { center, radius } => {
            if values.len() < 8 {
                return Err(HfError::InvalidInput("need at least 8 boundary samples".into()));
            }
            Ok(HarmonicPart::Poisson { center: *center, radius: *radius, values: values.to_vec() })
        }
        _ => Err(HfError::InvalidInput("Poisson extension needs a disk".into())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flavor {
    /// `Phi_n(lambda r)`.
    Regular,
    /// `-Phi_n'(lambda r)`, which is `sin(lambda r)` in one dimension.
    Sine,
    Both,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    Orthogonality,
    LeastSquares,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Column {
    Regular,
    Sine,
}

fn column_eval(col: Column, n: usize, z: f64) -> f64 {
    match col {
        Column::Regular => regular_shape(n, z),
        Column::Sine => -regular_shape_prime(n, z),
    }
}

fn flavor_columns(f: Flavor) -> &'static [Column] {
    match f {
        Flavor::Regular => &[Column::Regular],
        Flavor::Sine => &[Column::Sine],
        Flavor::Both => &[Column::Regular, Column::Sine],
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScaleBlock {
    pub lambda: f64,
    pub flavor: Flavor,
    /// Regular coefficients, or sine coefficients when the flavor is `Sine`.
    pub coeffs: Vec<f64>,
    /// Sine coefficients for the `Both` flavor.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub sine_coeffs: Vec<f64>,
}

impl ScaleBlock {
    fn terms(&self) -> Vec<(Column, &[f64])> {
        match self.flavor {
            Flavor::Regular => vec![(Column::Regular, &self.coeffs[..])],
            Flavor::Sine => vec![(Column::Sine, &self.coeffs[..])],
            Flavor::Both => vec![(Column::Regular, &self.coeffs[..]), (Column::Sine, &self.sine_coeffs[..])],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HFSeries {
    pub domain: Domain,
    pub centers: Vec<Point>,
    pub scales: Vec<ScaleBlock>,
    pub harmonic: HarmonicPart,
    /// Constant term; evaluation adds `a0 / 2`.
    pub a0: f64,
    /// RMS misfit on the fitting samples.
    pub residual: f64,
}

impl HFSeries {
    pub fn dimension(&self) -> usize {
        self.domain.dimension()
    }

    pub fn coefficient_count(&self) -> usize {
        self.scales.iter().map(|s| s.coeffs.len() + s.sine_coeffs.len()).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("series serialises")
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    /// Zeroes coefficients with magnitude below `eps`; returns the count.
    pub fn threshold(&mut self, eps: f64) -> usize {
        let mut zeroed = 0;
        for block in &mut self.scales {
            for c in block.coeffs.iter_mut().chain(block.sine_coeffs.iter_mut()) {
                if c.abs() < eps && *c != 0.0 {
                    *c = 0.0;
                    zeroed += 1;
                }
            }
        }
        zeroed
    }
}

/// Samples with optional quadrature weights (required for orthogonality fits).
#[derive(Clone, Debug, PartialEq)]
pub struct SampleSet {
    pub points: Vec<Point>,
    pub values: Vec<f64>,
    pub weights: Option<Vec<f64>>,
}

impl SampleSet {
    pub fn new(points: Vec<Point>, values: Vec<f64>) -> Self {
        Self { points, values, weights: None }
    }

    pub fn on_rule<F: Fn(&[f64]) -> f64>(rule: &QuadratureRule, f: F) -> Self {
        Self { points: rule.nodes.clone(), values: rule.nodes.iter().map(|p| f(p)).collect(), weights: Some(rule.weights.clone()) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitOptions {
    pub flavor: Flavor,
    pub method: FitMethod,
    /// Relative ridge; 0 requests plain least squares.
    pub ridge: f64,
    /// Include the constant `a0 / 2` term (pure Neumann settings).
    pub constant: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { flavor: Flavor::Regular, method: FitMethod::LeastSquares, ridge: 1e-10, constant: false }
    }
}

fn basis_columns(blocks: &[(f64, Flavor)], k: usize) -> Vec<(usize, Column, usize)> {
    let mut out = Vec::new();
    for (j, &(_, flavor)) in blocks.iter().enumerate() {
        for &col in flavor_columns(flavor) {
            for c in 0..k {
                out.push((j, col, c));
            }
        }
    }
    out
}

/// Fit with one flavor over the detected eigenvalues.
pub fn fit_hf_series(
    samples: &SampleSet,
    domain: &Domain,
    eigen: &EigenResult,
    centers: &[Point],
    harmonic: &HarmonicPart,
    opts: &FitOptions,
) -> Result<HFSeries> {
    if eigen.is_empty() {
        return Err(HfError::InvalidInput("no eigenvalues to fit".into()));
    }
    let blocks: Vec<(f64, Flavor)> = eigen.lambdas().into_iter().map(|l| (l, opts.flavor)).collect();
    fit_hf_blocks(samples, domain, &blocks, centers, harmonic, opts)
}

/// Fit over explicit `(lambda, flavor)` blocks, which may mix eigenvalue
/// families.
pub fn fit_hf_blocks(
    samples: &SampleSet,
    domain: &Domain,
    blocks: &[(f64, Flavor)],
    centers: &[Point],
    harmonic: &HarmonicPart,
    opts: &FitOptions,
) -> Result<HFSeries> {
    let n = domain.dimension();
    if samples.points.len() != samples.values.len() || samples.points.is_empty() {
        return Err(HfError::InvalidInput("sample points and values must be nonempty and aligned".into()));
    }
    if samples.points.iter().any(|p| p.len() != n) || centers.iter().any(|c| c.len() != n) {
        return Err(HfError::InvalidInput("point dimension does not match the domain".into()));
    }
    if samples.values.iter().any(|v| !v.is_finite()) {
        return Err(HfError::InvalidInput("non-finite sample value".into()));
    }
    if centers.is_empty() {
        return Err(HfError::InvalidInput("no centers".into()));
    }
    if blocks.iter().any(|(l, _)| !(*l > 0.0) || !l.is_finite()) || blocks.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(HfError::InvalidInput("scales must be positive and strictly increasing".into()));
    }
    if !(opts.ridge >= 0.0) {
        return Err(HfError::InvalidInput("ridge must be nonnegative".into()));
    }
    let k = centers.len();
    let cols = basis_columns(blocks, k);
    let residual: Vec<f64> = samples.points.iter().zip(&samples.values).map(|(p, v)| v - harmonic.eval(p)).collect();
    let column = |&(j, col, c): &(usize, Column, usize)| -> Vec<f64> {
        let lambda = blocks[j].0;
        samples.points.iter().map(|p| column_eval(col, n, lambda * geometry::distance(p, &centers[c]))).collect()
    };
    let columns: Vec<Vec<f64>> = cols.par_iter().map(column).collect();

    let (a0, coef) = match opts.method {
        FitMethod::Orthogonality => {
            let w = samples
                .weights
                .as_ref()
                .ok_or_else(|| HfError::InvalidInput("orthogonality fits need quadrature weights".into()))?;
            if w.len() != residual.len() {
                return Err(HfError::InvalidInput("weights do not match samples".into()));
            }
            let a0 = if opts.constant {
                2.0 * w.iter().zip(&residual).map(|(a, b)| a * b).sum::<f64>() / w.iter().sum::<f64>()
            } else {
                0.0
            };
            let coef: Vec<f64> = columns
                .par_iter()
                .map(|phi| {
                    let num: f64 = w.iter().zip(phi.iter().zip(&residual)).map(|(a, (p, r))| a * p * (r - a0 / 2.0)).sum();
                    let den: f64 = w.iter().zip(phi).map(|(a, p)| a * p * p).sum();
                    if den > 0.0 {
                        num / den
                    } else {
                        0.0
                    }
                })
                .collect();
            (a0, coef)
        }
        FitMethod::LeastSquares => {
            let offset = usize::from(opts.constant);
            let total = cols.len() + offset;
            if opts.ridge == 0.0 && samples.points.len() < total {
                return Err(HfError::InvalidInput(format!(
                    "{} samples for {total} coefficients without regularisation",
                    samples.points.len()
                )));
            }
            let a = DMatrix::from_fn(samples.points.len(), total, |i, j| {
                if j < offset {
                    0.5
                } else {
                    columns[j - offset][i]
                }
            });
            let x = ridge_solve(&a, &DVector::from_column_slice(&residual), opts.ridge)?;
            let a0 = if opts.constant { x[0] } else { 0.0 };
            (a0, x.iter().skip(offset).copied().collect())
        }
    };

    let mut scales: Vec<ScaleBlock> = blocks
        .iter()
        .map(|&(lambda, flavor)| ScaleBlock { lambda, flavor, coeffs: Vec::new(), sine_coeffs: Vec::new() })
        .collect();
    for (&(j, col, _), c) in cols.iter().zip(&coef) {
        let block = &mut scales[j];
        if block.flavor == Flavor::Both && col == Column::Sine {
            block.sine_coeffs.push(*c);
        } else {
            block.coeffs.push(*c);
        }
    }
    let mut series = HFSeries {
        domain: domain.clone(),
        centers: centers.to_vec(),
        scales,
        harmonic: harmonic.clone(),
        a0,
        residual: 0.0,
    };
    let fitted = evaluate_series(&series, &samples.points, None);
    series.residual = rms_difference(&fitted, &samples.values);
    Ok(series)
}

pub(crate) fn rms_difference(a: &[f64], b: &[f64]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len().max(1) as f64).sqrt()
}

fn series_at(series: &HFSeries, x: &[f64], truncation: usize) -> f64 {
    let n = series.dimension();
    let mut v = series.harmonic.eval(x) + series.a0 / 2.0;
    for block in series.scales.iter().take(truncation) {
        for (col, coeffs) in block.terms() {
            for (c, center) in coeffs.iter().zip(&series.centers) {
                if *c != 0.0 {
                    v += c * column_eval(col, n, block.lambda * geometry::distance(x, center));
                }
            }
        }
    }
    v
}

/// `f0 + a0/2 + sum` over the first `truncation` scale blocks (all when `None`).
pub fn evaluate_series(series: &HFSeries, points: &[Point], truncation: Option<usize>) -> Vec<f64> {
    let t = truncation.unwrap_or(series.scales.len());
    points.par_iter().map(|p| series_at(series, p, t)).collect()
}

/// Relative mismatch between the quadrature energy of `f - f0 - a0/2` and
/// the sum of squared coefficients weighted by basis norms.
pub fn parseval_check(series: &HFSeries, rule: &QuadratureRule, f_values: &[f64]) -> Result<f64> {
    if f_values.len() != rule.len() {
        return Err(HfError::InvalidInput("function values do not match quadrature nodes".into()));
    }
    let n = series.dimension();
    let energy: f64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .zip(f_values)
        .map(|((p, w), f)| {
            let r = f - series.harmonic.eval(p) - series.a0 / 2.0;
            w * r * r
        })
        .sum();
    if energy == 0.0 {
        return Ok(0.0);
    }
    let mut terms = Vec::new();
    for block in &series.scales {
        for (col, coeffs) in block.terms() {
            for (c, center) in coeffs.iter().zip(&series.centers) {
                terms.push((block.lambda, col, *c, center));
            }
        }
    }
    let spectral: f64 = terms
        .par_iter()
        .map(|&(lambda, col, c, center)| {
            let norm2: f64 = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(p, w)| {
                    let v = column_eval(col, n, lambda * geometry::distance(p, center));
                    w * v * v
                })
                .sum();
            c * c * norm2
        })
        .collect::<Vec<_>>()
        .iter()
        .sum();
    Ok((energy - spectral).abs() / energy)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeVariant {
    /// Period-`l` Fourier series with no boundary terms.
    Plain,
    /// Linear ramp through `Q(a)`, `Q(b)` plus sines of `k pi (x-a)/l`.
    Ramp,
    /// Quadratic matching `Q'(a)`, `Q'(b)` plus cosines of `k pi (x-a)/l`.
    Slope,
    /// Ramp and quadratic plus full-period sines and cosines of `2 k pi (x-a)/l`.
    Combined,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeData {
    pub qa: Option<f64>,
    pub qb: Option<f64>,
    pub dqa: Option<f64>,
    pub dqb: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeCorrectedSeries1D {
    pub a: f64,
    pub b: f64,
    pub variant: EdgeVariant,
    pub ramp: Option<(f64, f64)>,
    pub slopes: Option<(f64, f64)>,
    /// `cos[k]` multiplies the k-th cosine; `cos[0]` is the constant term.
    pub cos: Vec<f64>,
    /// `sin[k - 1]` multiplies the k-th sine.
    pub sin: Vec<f64>,
}

impl EdgeCorrectedSeries1D {
    fn omega(&self) -> f64 {
        let l = self.b - self.a;
        match self.variant {
            EdgeVariant::Plain | EdgeVariant::Combined => 2.0 * PI / l,
            EdgeVariant::Ramp | EdgeVariant::Slope => PI / l,
        }
    }

    pub fn boundary_terms(&self, x: f64) -> f64 {
        let l = self.b - self.a;
        let mut v = 0.0;
        if let Some((qa, qb)) = self.ramp {
            v += qa + (x - self.a) / l * (qb - qa);
        }
        if let Some((da, db)) = self.slopes {
            v += x * da + (x * x / 2.0 - self.a * x) / l * (db - da);
        }
        v
    }

    pub fn eval(&self, x: f64) -> f64 {
        let w = self.omega();
        let t = x - self.a;
        let mut v = self.boundary_terms(x);
        for (k, c) in self.cos.iter().enumerate() {
            v += c * (k as f64 * w * t).cos();
        }
        for (k, s) in self.sin.iter().enumerate() {
            v += s * ((k + 1) as f64 * w * t).sin();
        }
        v
    }
}

/// Composite Gauss-Legendre rule on `[a, b]` fine enough for `modes` oscillations.
pub fn edge_rule(a: f64, b: f64, modes: usize) -> (Vec<f64>, Vec<f64>) {
    let panels = 4 * modes.max(8);
    let gl = geometry::gauss_legendre_unit(8);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * 8);
    let mut weights = Vec::with_capacity(panels * 8);
    for p in 0..panels {
        for &(x, w) in &gl {
            nodes.push(a + h * (p as f64 + x));
            weights.push(h * w);
        }
    }
    (nodes, weights)
}

/// Edge-corrected series from samples at quadrature nodes of `[a, b]`.
pub fn fit_edge_corrected_1d(
    (a, b): (f64, f64),
    nodes: &[f64],
    weights: &[f64],
    values: &[f64],
    data: &EdgeData,
    variant: EdgeVariant,
    modes: usize,
) -> Result<EdgeCorrectedSeries1D> {
    if !(b > a) {
        return Err(HfError::InvalidInput("interval must have positive length".into()));
    }
    if nodes.len() != weights.len() || nodes.len() != values.len() || nodes.is_empty() {
        return Err(HfError::InvalidInput("nodes, weights and values must align".into()));
    }
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| HfError::InvalidInput(format!("variant {variant:?} needs {name}")));
    let ramp = match variant {
        EdgeVariant::Ramp | EdgeVariant::Combined => Some((need(data.qa, "Q(a)")?, need(data.qb, "Q(b)")?)),
        _ => None,
    };
    let slopes = match variant {
        EdgeVariant::Slope | EdgeVariant::Combined => Some((need(data.dqa, "Q'(a)")?, need(data.dqb, "Q'(b)")?)),
        _ => None,
    };
    let mut series = EdgeCorrectedSeries1D { a, b, variant, ramp, slopes, cos: Vec::new(), sin: Vec::new() };
    let l = b - a;
    let w = series.omega();
    let res: Vec<f64> = nodes.iter().zip(values).map(|(x, v)| v - series.boundary_terms(*x)).collect();
    let project = |g: &dyn Fn(f64) -> f64| -> f64 {
        nodes.iter().zip(weights).zip(&res).map(|((x, wt), r)| wt * r * g(x - a)).sum::<f64>()
    };
    let with_cos = !matches!(variant, EdgeVariant::Ramp);
    let with_sin = !matches!(variant, EdgeVariant::Slope);
    if with_cos {
        series.cos.push(project(&|_| 1.0) / l);
        for k in 1..=modes {
            series.cos.push(2.0 / l * project(&|t| (k as f64 * w * t).cos()));
        }
    }
    if with_sin {
        for k in 1..=modes {
            series.sin.push(2.0 / l * project(&|t| (k as f64 * w * t).sin()));
        }
    }
    Ok(series)
}

/// Convenience wrapper sampling `f` on [`edge_rule`].
pub fn fit_edge_corrected_fn<F: Fn(f64) -> f64>(
    (a, b): (f64, f64),
    f: F,
    data: &EdgeData,
    variant: EdgeVariant,
    modes: usize,
) -> Result<EdgeCorrectedSeries1D> {
    let (nodes, weights) = edge_rule(a, b, modes);
    let values: Vec<f64> = nodes.iter().map(|&x| f(x)).collect();
    fit_edge_corrected_1d((a, b), &nodes, &weights, &values, data, variant, modes)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expressibility {
    Admissible,
    Degenerate,
    Divergent,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpressibilityReport {
    /// `int |f k|` on each truncated domain.
    pub l1: Vec<f64>,
    /// `int |f k|^2` on each truncated domain.
    pub l2: Vec<f64>,
    pub verdict: Expressibility,
}

/// Nested-domain estimates of `int |f k|` and `int |f k|^2` where `k` is the
/// kernel centred at `center`.
pub fn expressibility_check<F: Fn(&[f64]) -> f64 + Sync>(
    f: F,
    spec: &KernelSpec,
    center: &[f64],
    domains: &[Domain],
    resolution: usize,
) -> Result<ExpressibilityReport> {
    if domains.len() < 2 {
        return Err(HfError::InvalidInput("need at least two nested domains".into()));
    }
    let mut l1 = Vec::new();
    let mut l2 = Vec::new();
    for d in domains {
        let rule = d.quadrature(resolution)?;
        let (s1, s2) = rule
            .nodes
            .par_iter()
            .zip(&rule.weights)
            .map(|(p, w)| {
                let disp: Vec<f64> = p.iter().zip(center).map(|(a, b)| a - b).collect();
                let k = spec.eval(&disp).map(|c| c.norm()).unwrap_or(0.0);
                let v = (f(p) * k).abs();
                (w * v, w * v * v)
            })
            .reduce(|| (0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
        l1.push(s1);
        l2.push(s2);
    }
    let last = l1.len() - 1;
    let verdict = if l1.iter().chain(&l2).any(|v| !v.is_finite()) {
        Expressibility::Divergent
    } else if l1[last] <= f64::MIN_POSITIVE {
        Expressibility::Degenerate
    } else {
        let change = |s: &[f64]| (s[last] - s[last - 1]).abs() / s[last];
        let growing = |s: &[f64]| s.windows(2).all(|w| w[1] > w[0] * 1.01);
        if change(&l1) < 0.01 && change(&l2) < 0.01 {
            Expressibility::Admissible
        } else if growing(&l1) || growing(&l2) {
            Expressibility::Divergent
        } else {
            Expressibility::Inconclusive
        }
    };
    Ok(ExpressibilityReport { l1, l2, verdict })
}
