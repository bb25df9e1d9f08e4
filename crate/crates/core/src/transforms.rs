//! Quadrature-based forward and inverse distance-function transforms,
//! admissibility constants and the Helmholtz-Laplace forward transform.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{self, GeometryError, Point, QuadratureRule};
use crate::hfseries::HarmonicPart;
use crate::kernels::{self, KernelError, KernelFamily, KernelSpec};
use crate::specfun;

#[derive(Debug, Error)]
pub enum TransformError {
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("singular kernel skipped {fraction:.3e} of the quadrature weight")]
    SingularNodes { fraction: f64 },
    #[error("admissibility integral does not converge")]
    NotAdmissible,
    #[error("growth bound violated: mu = {mu} <= sigma = {sigma}")]
    GrowthBound { mu: f64, sigma: f64 },
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

pub type Result<T> = std::result::Result<T, TransformError>;

/// Largest fraction of quadrature weight that may be skipped at singular nodes.
pub const MAX_SKIPPED_FRACTION: f64 = 0.01;

#[derive(Clone, Debug, PartialEq)]
pub enum TransformKind {
    /// `F = sum w f conj(k)`.
    Plain,
    /// Finite-domain J transform: the harmonic part is removed first and
    /// every cell is divided by `C_J = int k^2`.
    FiniteJ { harmonic: HarmonicPart },
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransformPlan {
    pub kernel: KernelSpec,
    /// Scales; for convection-diffusion kernels these are diffusivities.
    pub lambdas: Vec<f64>,
    pub lambda_weights: Vec<f64>,
    pub xi: Vec<Point>,
    pub xi_weights: Vec<f64>,
    pub rule: QuadratureRule,
    /// Velocity vectors swept by convection-diffusion kernels.
    pub directions: Vec<Vec<f64>>,
    pub kind: TransformKind,
}

/// Trapezoid weights on a strictly increasing grid; a one-point grid gets weight 1.
pub fn trapezoid_weights(grid: &[f64]) -> Vec<f64> {
    let m = grid.len();
    if m == 1 {
        return vec![1.0];
    }
    (0..m)
        .map(|i| {
            let left = if i > 0 { grid[i] - grid[i - 1] } else { 0.0 };
            let right = if i + 1 < m { grid[i + 1] - grid[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

impl TransformPlan {
    pub fn new(kernel: KernelSpec, lambdas: Vec<f64>, xi: Vec<Point>, xi_weights: Vec<f64>, rule: QuadratureRule) -> Result<Self> {
        let lambda_weights = trapezoid_weights(&lambdas);
        let plan = TransformPlan {
            kernel,
            lambdas,
            lambda_weights,
            xi,
            xi_weights,
            rule,
            directions: Vec::new(),
            kind: TransformKind::Plain,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn with_directions(mut self, directions: Vec<Vec<f64>>) -> Result<Self> {
        self.directions = directions;
        self.validate()?;
        Ok(self)
    }

    pub fn with_kind(mut self, kind: TransformKind) -> Result<Self> {
        self.kind = kind;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(TransformError::InvalidPlan(m.into()));
        self.kernel.validate()?;
        let n = self.kernel.dimension;
        if self.lambdas.is_empty() {
            return bad("empty scale grid");
        }
        if self.lambdas.iter().any(|l| !(*l > 0.0) || !l.is_finite()) || self.lambdas.windows(2).any(|w| w[1] <= w[0]) {
            return bad("scales must be positive, finite and strictly increasing");
        }
        if self.lambda_weights.len() != self.lambdas.len() {
            return bad("scale weights do not match the scale grid");
        }
        if self.xi.is_empty() || self.xi.len() != self.xi_weights.len() {
            return bad("translation grid must be nonempty with one weight per point");
        }
        if self.xi.iter().any(|p| p.len() != n || p.iter().any(|v| !v.is_finite())) {
            return bad("translation points must be finite and match the kernel dimension");
        }
        if self.xi_weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return bad("translation weights must be finite and non-negative");
        }
        if self.rule.is_empty() || self.rule.nodes.len() != self.rule.weights.len() {
            return bad("quadrature rule must be nonempty with one weight per node");
        }
        if self.rule.nodes.iter().any(|p| p.len() != n) {
            return bad("quadrature nodes do not match the kernel dimension");
        }
        if self.rule.weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
            return bad("quadrature weights must be positive");
        }
        if !self.directions.is_empty() {
            if !self.kernel.family.uses_convection() {
                return bad("direction sweeps need a convection-diffusion kernel");
            }
            if self.directions.iter().any(|d| d.len() != n || d.iter().any(|v| !v.is_finite())) {
                return bad("directions must be finite and match the kernel dimension");
            }
        }
        Ok(())
    }

    pub fn direction_count(&self) -> usize {
        self.directions.len().max(1)
    }

    pub fn row_count(&self) -> usize {
        self.direction_count() * self.lambdas.len()
    }

    /// Kernel for row `row = direction * lambdas.len() + scale`.
    pub fn kernel_for_row(&self, row: usize) -> Result<KernelSpec> {
        let (d, l) = (row / self.lambdas.len(), row % self.lambdas.len());
        let lambda = self.lambdas[l];
        match &self.kernel.convection {
            Some(c) => {
                let mut c = c.clone();
                c.diffusivity = lambda;
                if let Some(v) = self.directions.get(d) {
                    c.velocity = v.clone();
                }
                Ok(KernelSpec::convdiff(self.kernel.family, self.kernel.dimension, c)?)
            }
            None => {
                let k = self.kernel.with_scale(lambda);
                k.validate()?;
                Ok(k)
            }
        }
    }

    fn harmonic(&self) -> Option<&HarmonicPart> {
        match &self.kind {
            TransformKind::Plain => None,
            TransformKind::FiniteJ { harmonic } => Some(harmonic),
        }
    }
}

fn displacement(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    pub plan: TransformPlan,
    /// `values[row][xi]`, rows ordered by direction then scale.
    pub values: Vec<Vec<Complex64>>,
    /// Quadrature mean of the transformed samples (after harmonic removal).
    pub mean: f64,
    /// Largest fraction of quadrature weight skipped in any cell.
    pub skipped_fraction: f64,
    /// `C_J` per cell for finite-domain J transforms.
    pub norms: Option<Vec<Vec<f64>>>,
}

impl SpectralField {
    /// Flattened cells: (direction, scale, translation, value).
    pub fn cells(&self) -> Vec<(Option<&[f64]>, f64, &[f64], Complex64)> {
        let mut out = Vec::with_capacity(self.plan.row_count() * self.plan.xi.len());
        for (row, values) in self.values.iter().enumerate() {
            let d = self.plan.directions.get(row / self.plan.lambdas.len()).map(|v| v.as_slice());
            let lambda = self.plan.lambdas[row % self.plan.lambdas.len()];
            for (xi, v) in self.plan.xi.iter().zip(values) {
                out.push((d, lambda, xi.as_slice(), *v));
            }
        }
        out
    }

    pub fn zeroed(&self) -> SpectralField {
        let mut z = self.clone();
        for row in &mut z.values {
            row.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
        }
        z.mean = 0.0;
        z
    }
}

struct Cell {
    value: Complex64,
    skipped: f64,
    norm2: f64,
}

fn reduce_cell(kernel: &KernelSpec, xi: &[f64], rule: &QuadratureRule, f: &[f64], normalize: bool, conj: bool) -> Result<Cell> {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut norm2 = 0.0;
    let mut skipped = 0.0;
    for ((x, w), v) in rule.nodes.iter().zip(&rule.weights).zip(f) {
        let k = match kernel.eval(&displacement(xi, x)) {
            Ok(k) => k,
            Err(KernelError::Singular(_)) => {
                skipped += w;
                continue;
            }
            Err(e) => return Err(e.into()),
        };
        let k = if conj { k.conj() } else { k };
        acc += w * v * k;
        if normalize {
            norm2 += w * k.norm_sqr();
        }
    }
    if normalize {
        if !(norm2 > 0.0) {
            return Err(TransformError::InvalidInput("kernel has zero norm on the domain".into()));
        }
        acc /= norm2;
    }
    Ok(Cell { value: acc, skipped, norm2 })
}

/// Forward transform of samples aligned with the plan's quadrature nodes.
pub fn forward_transform(f: &[f64], plan: &TransformPlan) -> Result<SpectralField> {
    plan.validate()?;
    if f.len() != plan.rule.len() {
        return Err(TransformError::InvalidInput(format!("{} samples for {} quadrature nodes", f.len(), plan.rule.len())));
    }
    if f.iter().any(|v| !v.is_finite()) {
        return Err(TransformError::InvalidInput("non-finite sample".into()));
    }
    let g: Vec<f64> = match plan.harmonic() {
        Some(h) => plan.rule.nodes.iter().zip(f).map(|(x, v)| v - h.eval(x)).collect(),
        None => f.to_vec(),
    };
    let normalize = plan.harmonic().is_some();
    let total = plan.rule.total_weight();
    let rows: Vec<Result<(Vec<Complex64>, Vec<f64>, f64)>> = (0..plan.row_count())
        .into_par_iter()
        .map(|row| {
            let kernel = plan.kernel_for_row(row)?;
            let mut values = Vec::with_capacity(plan.xi.len());
            let mut norms = Vec::with_capacity(plan.xi.len());
            let mut worst = 0.0f64;
            for xi in &plan.xi {
                let cell = reduce_cell(&kernel, xi, &plan.rule, &g, normalize, true)?;
                worst = worst.max(cell.skipped / total);
                values.push(cell.value);
                norms.push(cell.norm2);
            }
            Ok((values, norms, worst))
        })
        .collect();
    let mut values = Vec::with_capacity(rows.len());
    let mut norms = Vec::with_capacity(rows.len());
    let mut skipped_fraction = 0.0f64;
    for r in rows {
        let (v, c, s) = r?;
        skipped_fraction = skipped_fraction.max(s);
        values.push(v);
        norms.push(c);
    }
    let norms = normalize.then_some(norms);
    if skipped_fraction > MAX_SKIPPED_FRACTION {
        return Err(TransformError::SingularNodes { fraction: skipped_fraction });
    }
    let mean = plan.rule.integrate_values(&g) / total;
    Ok(SpectralField { plan: plan.clone(), values, mean, skipped_fraction, norms })
}

/// Normalising constant of the inverse transform.
#[derive(Clone, Copy, Debug)]
pub enum Normalizer<'a> {
    Admissibility(&'a AdmissibilityReport),
    Constant(f64),
}

impl Normalizer<'_> {
    fn value(&self) -> Result<f64> {
        let c = match self {
            Normalizer::Admissibility(r) => r.constant.ok_or(TransformError::NotAdmissible)?,
            Normalizer::Constant(c) => *c,
        };
        if !(c > 0.0) || !c.is_finite() {
            return Err(TransformError::NotAdmissible);
        }
        Ok(c)
    }
}

fn synthesize(field: &SpectralField, kernels: &[KernelSpec], x: &[f64]) -> Result<f64> {
    let plan = &field.plan;
    let mut total = 0.0;
    for (row, values) in field.values.iter().enumerate() {
        let dl = plan.lambda_weights[row % plan.lambdas.len()];
        let mut acc = Complex64::new(0.0, 0.0);
        for ((xi, w), v) in plan.xi.iter().zip(&plan.xi_weights).zip(values) {
            if *v == Complex64::new(0.0, 0.0) {
                continue;
            }
            match kernels[row].eval(&displacement(x, xi)) {
                Ok(k) => acc += w * v * k,
                Err(KernelError::Singular(_)) => {}
                Err(e) => return Err(e.into()),
            }
        }
        total += dl * acc.re;
    }
    Ok(total)
}

/// Discrete inverse: trapezoid over scales, translation weights over `xi`,
/// divided by the normaliser. With `mean_correction` the reconstruction's
/// quadrature mean is replaced by the mean of the transformed samples.
pub fn inverse_transform(field: &SpectralField, normalizer: Normalizer<'_>, points: &[Point], mean_correction: bool) -> Result<Vec<f64>> {
    let c = normalizer.value()?;
    let plan = &field.plan;
    if field.values.len() != plan.row_count() || field.values.iter().any(|r| r.len() != plan.xi.len()) {
        return Err(TransformError::InvalidInput("field dimensions do not match its plan".into()));
    }
    let n = plan.kernel.dimension;
    if points.iter().any(|p| p.len() != n) {
        return Err(TransformError::InvalidInput("evaluation points do not match the kernel dimension".into()));
    }
    let kernels: Vec<KernelSpec> = (0..plan.row_count()).map(|r| plan.kernel_for_row(r)).collect::<Result<_>>()?;
    let eval = |pts: &[Point]| -> Result<Vec<f64>> { pts.par_iter().map(|p| synthesize(field, &kernels, p)).collect() };
    let raw = eval(points)?;
    let shift = if mean_correction {
        let on_rule = eval(&plan.rule.nodes)?;
        field.mean - plan.rule.integrate_values(&on_rule) / plan.rule.total_weight() / c
    } else {
        0.0
    };
    Ok(points
        .iter()
        .zip(raw)
        .map(|(p, r)| r / c + shift + plan.harmonic().map_or(0.0, |h| h.eval(p)))
        .collect())
}

/// Result of the admissibility integral `1/2 int |G|^2/|lambda|`, truncated
/// to a positive range with power-law tail estimates at both ends.
#[derive(Clone, Debug, PartialEq)]
pub struct AdmissibilityReport {
    pub constant: Option<f64>,
    pub convergent: bool,
    pub range: (f64, f64),
    pub tail_low: f64,
    pub tail_high: f64,
    /// Power of `|G|` near the lower end; at most 1/2 means divergence.
    pub low_power: f64,
}

/// Linear combination of isotropic kernels analysed as one radial profile.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile {
    pub terms: Vec<(f64, KernelSpec)>,
}

impl Profile {
    pub fn single(kernel: KernelSpec) -> Self {
        Profile { terms: vec![(1.0, kernel)] }
    }

    fn dimension(&self) -> usize {
        self.terms[0].1.dimension
    }

    fn eval(&self, r: f64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, k) in &self.terms {
            acc += *c * k.eval_radial(r)?;
        }
        Ok(acc)
    }
}

/// Radial Fourier weight so that `G(w) = int g(r) weight(w, r) dr`.
fn fourier_weight(n: usize, w: f64, r: f64) -> f64 {
    let z = w * r;
    match n {
        1 => 2.0 * z.cos(),
        2 => 2.0 * PI * specfun::j0(z) * r,
        3 => {
            if z < 1e-4 {
                4.0 * PI * r * r * (1.0 - z * z / 6.0)
            } else {
                4.0 * PI * z.sin() * r / w
            }
        }
        4 => {
            let j1_over_w = if z < 1e-4 { r / 2.0 * (1.0 - z * z / 8.0) } else { specfun::j1(z) / w };
            4.0 * PI * PI * j1_over_w * r * r
        }
        _ => {
            let bracket = if z < 1e-2 {
                let z2 = z * z;
                z2 / 3.0 * (1.0 - z2 / 10.0 + z2 * z2 / 280.0)
            } else {
                z.sin() / z - z.cos()
            };
            8.0 * PI * PI * bracket * r * r / (w * w)
        }
    }
}

fn radial_rule(r_max: f64, panels: usize) -> (Vec<f64>, Vec<f64>) {
    let gl = geometry::gauss_legendre_unit(16);
    let h = r_max / panels as f64;
    let mut edges = vec![0.0];
    for k in (0..24).rev() {
        edges.push(h * 0.25f64.powi(k + 1));
    }
    for k in 1..=panels {
        edges.push(h * k as f64);
    }
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for e in edges.windows(2) {
        for (t, w) in &gl {
            nodes.push(e[0] + t * (e[1] - e[0]));
            weights.push(w * (e[1] - e[0]));
        }
    }
    (nodes, weights)
}

fn profile_transform(profile: &Profile, values: &[(f64, f64, Complex64)], w: f64) -> Complex64 {
    let n = profile.dimension();
    values.iter().map(|(r, wt, g)| *g * (wt * fourier_weight(n, w, *r))).sum()
}

/// Admissibility constant of an isotropic profile over `range`. `resolution`
/// sets both the radial panel count and the log-scale panel count.
pub fn admissibility(profile: &Profile, range: (f64, f64), resolution: usize) -> Result<AdmissibilityReport> {
    let (lo, hi) = range;
    if !(lo > 0.0) || !(hi > lo) || !hi.is_finite() {
        return Err(TransformError::InvalidInput("range must satisfy 0 < lo < hi".into()));
    }
    if profile.terms.is_empty() || resolution < 4 {
        return Err(TransformError::InvalidInput("empty profile or resolution below 4".into()));
    }
    let n = profile.dimension();
    for (c, k) in &profile.terms {
        k.validate()?;
        if k.dimension != n || k.convection.is_some() || !c.is_finite() {
            return Err(TransformError::InvalidInput("profile terms must be isotropic and share a dimension".into()));
        }
    }
    let diverged = AdmissibilityReport {
        constant: None,
        convergent: false,
        range,
        tail_low: f64::INFINITY,
        tail_high: f64::INFINITY,
        low_power: 0.0,
    };
    let min_scale = profile.terms.iter().map(|(_, k)| k.scale).fold(f64::INFINITY, f64::min);
    let r_max = 50.0 / min_scale;
    // at least one panel per oscillation of the highest probed frequency
    let panels = resolution.max((2.0 * hi * r_max / (2.0 * PI)).ceil() as usize);
    let (rn, rw) = radial_rule(r_max, panels);
    let mut samples = Vec::with_capacity(rn.len());
    for (r, w) in rn.iter().zip(&rw) {
        if *r == 0.0 {
            continue;
        }
        let g = profile.eval(*r)?;
        if !g.re.is_finite() || !g.im.is_finite() {
            return Ok(diverged);
        }
        samples.push((*r, *w, g));
    }
    // the profile must be absolutely integrable on R^n
    let mass = |a: f64, b: f64| -> f64 {
        samples
            .iter()
            .filter(|(r, _, _)| *r >= a && *r < b)
            .map(|(r, w, g)| w * g.norm() * r.powi(n as i32 - 1))
            .sum()
    };
    let total = mass(0.0, f64::INFINITY);
    if !(total > 0.0) || mass(0.5 * r_max, f64::INFINITY) > 1e-8 * total {
        return Ok(diverged);
    }
    let gabs = |w: f64| profile_transform(profile, &samples, w).norm();
    let (g_lo, g_lo2) = (gabs(lo), gabs(0.5 * lo));
    let (g_hi, g_hi2) = (gabs(hi), gabs(2.0 * hi));
    let low_power = if g_lo2 == 0.0 && g_lo == 0.0 { f64::INFINITY } else { (g_lo / g_lo2).log2() };
    let high_power = if g_hi2 == 0.0 && g_hi == 0.0 { f64::INFINITY } else { (g_hi / g_hi2).log2() };
    let tail = |g: f64, p: f64| if g == 0.0 { 0.0 } else { g * g / (2.0 * p) };
    if !(low_power > 0.5) || !(high_power > 0.0) {
        return Ok(AdmissibilityReport {
            low_power,
            tail_low: if low_power > 0.0 { tail(g_lo, low_power) } else { f64::INFINITY },
            tail_high: if high_power > 0.0 { tail(g_hi, high_power) } else { f64::INFINITY },
            ..diverged
        });
    }
    let gl = geometry::gauss_legendre_unit(8);
    let (a, b) = (lo.ln(), hi.ln());
    let h = (b - a) / resolution as f64;
    let nodes: Vec<(f64, f64)> = (0..resolution)
        .flat_map(|p| gl.iter().map(move |(t, w)| (a + h * (p as f64 + t), w * h)))
        .collect();
    let parts: Vec<f64> = nodes.par_iter().map(|(s, w)| w * gabs(s.exp()).powi(2)).collect();
    let constant = parts.iter().sum::<f64>();
    Ok(AdmissibilityReport {
        constant: Some(constant),
        convergent: true,
        range,
        tail_low: tail(g_lo, low_power),
        tail_high: tail(g_hi, high_power),
        low_power,
    })
}

/// Forward Helmholtz-Laplace transform with the decaying kernel in its
/// printed normalisation. Every `mu` must exceed the declared growth bound.
pub fn hlt_forward(f: &[f64], mus: &[f64], sigma: f64, xi: &[Point], rule: &QuadratureRule, dimension: usize) -> Result<Vec<Vec<f64>>> {
    if let Some(&mu) = mus.iter().find(|m| !(**m > sigma)) {
        return Err(TransformError::GrowthBound { mu, sigma });
    }
    if !(sigma >= 0.0) {
        return Err(TransformError::InvalidInput("growth bound must be non-negative".into()));
    }
    if f.len() != rule.len() {
        return Err(TransformError::InvalidInput("samples do not match quadrature nodes".into()));
    }
    if f.iter().any(|v| !v.is_finite()) {
        return Err(TransformError::InvalidInput("non-finite sample".into()));
    }
    if xi.iter().chain(&rule.nodes).any(|p| p.len() != dimension) {
        return Err(TransformError::InvalidInput("points do not match the dimension".into()));
    }
    let total = rule.total_weight();
    mus.par_iter()
        .map(|&mu| {
            let kernel = KernelSpec::new(KernelFamily::ModifiedDecaying, dimension, mu)?;
            let pre = kernels::paper_prefactor(KernelFamily::ModifiedDecaying, dimension, mu)?.re;
            xi.iter()
                .map(|x| {
                    let cell = reduce_cell(&kernel, x, rule, f, false, false)?;
                    if cell.skipped / total > MAX_SKIPPED_FRACTION {
                        return Err(TransformError::SingularNodes { fraction: cell.skipped / total });
                    }
                    Ok(pre * cell.value.re)
                })
                .collect()
        })
        .collect()
}
