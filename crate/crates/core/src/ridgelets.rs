//! Anisotropic convection-diffusion kernel series fitted by regularised
//! least squares, direction sweeps, and a comparison harness against
//! isotropic fits on line-discontinuity data.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{self, DomainSpec, GeometryError, Point};
use crate::hfseries::{self, HfError};
use crate::kernels::{self, ConvectionParams, KernelError, KernelFamily, KernelSpec};

#[derive(Debug, Error)]
pub enum RidgeletError {
    #[error("empty dictionary")]
    EmptyDictionary,
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Solve(#[from] HfError),
}

pub type Result<T> = std::result::Result<T, RidgeletError>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Growing general solution, nonsingular at the center.
    General,
    /// Rapidly decaying variant, bounded everywhere.
    Rapid,
}

impl Branch {
    fn family(self) -> KernelFamily {
        match self {
            Branch::General => KernelFamily::ConvDiffGeneral,
            Branch::Rapid => KernelFamily::ConvDiffRapid,
        }
    }
}

/// Physical parameters of one scale; `rho = sqrt((speed/2D)^2 + reaction/D)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaleParams {
    pub diffusivity: f64,
    pub speed: f64,
    #[serde(default)]
    pub reaction: f64,
}

impl ScaleParams {
    /// Pure convection at unit diffusivity with the given rho.
    pub fn from_rho(rho: f64) -> Self {
        ScaleParams { diffusivity: 1.0, speed: 2.0 * rho, reaction: 0.0 }
    }

    pub fn rho(&self) -> f64 {
        let a = self.speed / (2.0 * self.diffusivity);
        (a * a + self.reaction / self.diffusivity).sqrt()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Atom {
    /// Unit direction of the velocity.
    pub direction: Vec<f64>,
    pub scale: ScaleParams,
    pub center: Point,
}

impl Atom {
    pub fn velocity(&self) -> Vec<f64> {
        self.direction.iter().map(|d| d * self.scale.speed).collect()
    }

    fn params(&self) -> ConvectionParams {
        ConvectionParams { velocity: self.velocity(), diffusivity: self.scale.diffusivity, reaction: self.scale.reaction }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RidgeletDictionary {
    pub dimension: usize,
    pub branch: Branch,
    pub atoms: Vec<Atom>,
}

fn unit(v: &[f64]) -> Option<Vec<f64>> {
    let n = kernels::norm(v);
    (n > 0.0 && n.is_finite()).then(|| v.iter().map(|x| x / n).collect())
}

/// Direction `i` of `m` on the unit circle, exact at quarter turns.
pub fn circle_direction(i: usize, m: usize) -> [f64; 2] {
    if (4 * i).is_multiple_of(m) {
        return match (4 * i / m) % 4 {
            0 => [1.0, 0.0],
            1 => [0.0, 1.0],
            2 => [-1.0, 0.0],
            _ => [0.0, -1.0],
        };
    }
    let t = 2.0 * PI * i as f64 / m as f64;
    [t.cos(), t.sin()]
}

impl RidgeletDictionary {
    /// Validates atoms and normalises their directions.
    pub fn new(dimension: usize, branch: Branch, atoms: Vec<Atom>) -> Result<Self> {
        let mut out = Vec::with_capacity(atoms.len());
        for mut a in atoms {
            if a.direction.len() != dimension || a.center.len() != dimension {
                return Err(RidgeletError::InvalidInput("atom dimension mismatch".into()));
            }
            let s = a.scale;
            if !(s.diffusivity > 0.0) || !(s.speed >= 0.0) || !(s.reaction >= 0.0) || !s.speed.is_finite() || !s.reaction.is_finite() {
                return Err(RidgeletError::InvalidInput("scale parameters need D > 0, speed >= 0, reaction >= 0".into()));
            }
            if !(s.rho() > 0.0) || !s.rho().is_finite() {
                return Err(RidgeletError::InvalidInput("every atom needs rho > 0".into()));
            }
            a.direction = unit(&a.direction).ok_or_else(|| RidgeletError::InvalidInput("zero direction".into()))?;
            if a.center.iter().any(|v| !v.is_finite()) {
                return Err(RidgeletError::InvalidInput("non-finite center".into()));
            }
            out.push(a);
        }
        KernelSpec::new(KernelFamily::HelmholtzRegular, dimension, 1.0)?;
        Ok(RidgeletDictionary { dimension, branch, atoms: out })
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Union of two dictionaries with the same dimension and branch.
    pub fn concat(&self, other: &RidgeletDictionary) -> Result<Self> {
        if self.dimension != other.dimension || self.branch != other.branch {
            return Err(RidgeletError::InvalidInput("dictionaries differ in dimension or branch".into()));
        }
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        Ok(RidgeletDictionary { dimension: self.dimension, branch: self.branch, atoms })
    }

    pub fn atom_value(&self, atom: &Atom, x: &[f64]) -> Result<f64> {
        let d: Vec<f64> = x.iter().zip(&atom.center).map(|(a, b)| a - b).collect();
        Ok(kernels::convdiff_kernel(self.branch.family(), self.dimension, &atom.params(), &d)?)
    }
}

/// `m` directions uniform on the unit circle crossed with scales and
/// centers, ordered direction-major then scale then center.
pub fn build_direction_sweep(m: usize, scales: &[ScaleParams], centers: &[Point], branch: Branch) -> Result<RidgeletDictionary> {
    if m == 0 {
        return Err(RidgeletError::InvalidInput("direction count must be at least 1".into()));
    }
    let mut atoms = Vec::with_capacity(m * scales.len() * centers.len());
    for i in 0..m {
        let dir = circle_direction(i, m);
        for s in scales {
            for c in centers {
                atoms.push(Atom { direction: dir.to_vec(), scale: *s, center: c.clone() });
            }
        }
    }
    RidgeletDictionary::new(2, branch, atoms)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RidgeletSeries {
    pub dictionary: RidgeletDictionary,
    pub coefficients: Vec<f64>,
    /// Constant term; evaluation adds `a0 / 2`.
    pub a0: f64,
    /// RMS misfit on the fitting samples.
    pub residual: f64,
    /// Ridge actually applied.
    pub ridge: f64,
}

/// Column solve shared by anisotropic and isotropic fits: a constant column
/// plus the given kernel columns. Ridge 0 uses column-normalised least
/// squares; a positive ridge penalises the kernel coefficients only.
fn solve_columns(columns: &[Vec<f64>], values: &[f64], ridge: f64) -> Result<(f64, Vec<f64>, f64)> {
    let m = values.len();
    let k = columns.len();
    let norms: Vec<f64> = columns.iter().map(|c| kernels::norm(c)).collect();
    let mut ridge = ridge;
    if ridge == 0.0 && k + 1 > m {
        let big = norms.iter().copied().fold(0.0, f64::max);
        ridge = 1e-10 * big * big;
    }
    let b = DVector::from_column_slice(values);
    let x = if ridge == 0.0 {
        let live: Vec<usize> = (0..k).filter(|&j| norms[j] > 0.0).collect();
        let half = 0.5 * (m as f64).sqrt();
        let a = DMatrix::from_fn(m, live.len() + 1, |i, j| if j == 0 { 0.5 / half } else { columns[live[j - 1]][i] / norms[live[j - 1]] });
        let y = hfseries::lstsq(&a, &b, 1e-12)?;
        let mut x = vec![0.0; k + 1];
        x[0] = y[0] / half;
        for (j, &c) in live.iter().enumerate() {
            x[c + 1] = y[j + 1] / norms[c];
        }
        x
    } else {
        let sr = ridge.sqrt();
        let a = DMatrix::from_fn(m + k, k + 1, |i, j| {
            if i < m {
                if j == 0 {
                    0.5
                } else {
                    columns[j - 1][i]
                }
            } else if j == i - m + 1 {
                sr
            } else {
                0.0
            }
        });
        let mut rhs = DVector::zeros(m + k);
        rhs.rows_mut(0, m).copy_from(&b);
        hfseries::lstsq(&a, &rhs, 1e-15)?.iter().copied().collect()
    };
    Ok((x[0], x[1..].to_vec(), ridge))
}

fn check_samples(points: &[Point], values: &[f64], dimension: usize) -> Result<()> {
    if points.is_empty() || points.len() != values.len() {
        return Err(RidgeletError::InvalidInput("samples must be nonempty with one value per point".into()));
    }
    if points.iter().any(|p| p.len() != dimension) {
        return Err(RidgeletError::InvalidInput("sample dimension mismatch".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(RidgeletError::InvalidInput("non-finite sample value".into()));
    }
    Ok(())
}

/// RMS misfit of `a0/2 + sum coefficients * columns` against the data.
fn column_residual(columns: &[Vec<f64>], a0: f64, coefficients: &[f64], values: &[f64]) -> f64 {
    let ss: f64 = values
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let fit = a0 / 2.0 + columns.iter().zip(coefficients).map(|(c, a)| a * c[i]).sum::<f64>();
            (fit - v) * (fit - v)
        })
        .sum();
    (ss / values.len() as f64).sqrt()
}

pub fn fit_ridgelet(points: &[Point], values: &[f64], dictionary: &RidgeletDictionary, ridge: f64) -> Result<RidgeletSeries> {
    if dictionary.is_empty() {
        return Err(RidgeletError::EmptyDictionary);
    }
    if !(ridge >= 0.0) || !ridge.is_finite() {
        return Err(RidgeletError::InvalidInput("ridge must be finite and >= 0".into()));
    }
    check_samples(points, values, dictionary.dimension)?;
    let columns: Vec<Vec<f64>> = dictionary
        .atoms
        .par_iter()
        .map(|a| points.iter().map(|p| dictionary.atom_value(a, p)).collect::<Result<Vec<f64>>>())
        .collect::<Result<_>>()?;
    let (a0, coefficients, ridge) = solve_columns(&columns, values, ridge)?;
    let residual = column_residual(&columns, a0, &coefficients, values);
    Ok(RidgeletSeries { dictionary: dictionary.clone(), coefficients, a0, residual, ridge })
}

pub fn evaluate_ridgelet(series: &RidgeletSeries, points: &[Point]) -> Result<Vec<f64>> {
    let dict = &series.dictionary;
    if points.iter().any(|p| p.len() != dict.dimension) {
        return Err(RidgeletError::InvalidInput("point dimension mismatch".into()));
    }
    points
        .par_iter()
        .map(|p| {
            let mut v = series.a0 / 2.0;
            for (a, c) in dict.atoms.iter().zip(&series.coefficients) {
                if *c != 0.0 {
                    v += c * dict.atom_value(a, p)?;
                }
            }
            Ok(v)
        })
        .collect()
}

/// Isotropic kernel series over `scales x centers` plus a constant, solved
/// exactly as `fit_ridgelet` solves its columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsotropicFit {
    pub kernel: KernelSpec,
    pub scales: Vec<f64>,
    pub centers: Vec<Point>,
    pub coefficients: Vec<f64>,
    pub a0: f64,
    pub residual: f64,
}

pub fn fit_isotropic(points: &[Point], values: &[f64], kernel: &KernelSpec, scales: &[f64], centers: &[Point], ridge: f64) -> Result<IsotropicFit> {
    if scales.is_empty() || centers.is_empty() {
        return Err(RidgeletError::EmptyDictionary);
    }
    check_samples(points, values, kernel.dimension)?;
    let pairs: Vec<(f64, &Point)> = scales.iter().flat_map(|s| centers.iter().map(move |c| (*s, c))).collect();
    let columns: Vec<Vec<f64>> = pairs
        .par_iter()
        .map(|(s, c)| {
            let k = kernel.with_scale(*s);
            points.iter().map(|p| Ok(k.eval_radial(geometry::distance(p, c))?.re)).collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<_>>()?;
    let (a0, coefficients, _) = solve_columns(&columns, values, ridge)?;
    let residual = column_residual(&columns, a0, &coefficients, values);
    Ok(IsotropicFit { kernel: kernel.clone(), scales: scales.to_vec(), centers: centers.to_vec(), coefficients, a0, residual })
}

/// Settings of the line-discontinuity comparison on the unit disk.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepExperiment {
    pub sample_resolution: usize,
    /// Angle of the step normal.
    pub normal_angle: f64,
    pub offset: [f64; 2],
    pub iso_lambda_min: f64,
    pub iso_lambda_max: f64,
    pub iso_scale_count: usize,
    pub iso_center_count: usize,
    pub center_resolution: usize,
    pub rho: f64,
    pub diffusivity: f64,
    /// Centers per beam direction, spread along the step line.
    pub beam_centers: usize,
    /// Upstream distance of beam centers from the line.
    pub standoff: f64,
    pub span: f64,
}

impl Default for StepExperiment {
    fn default() -> Self {
        StepExperiment {
            sample_resolution: 24,
            normal_angle: 0.3,
            offset: [0.1, -0.05],
            iso_lambda_min: 2.4,
            iso_lambda_max: 20.0,
            iso_scale_count: 6,
            iso_center_count: 16,
            center_resolution: 16,
            rho: 640.0,
            diffusivity: 1.0,
            beam_centers: 48,
            standoff: 1.5,
            span: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepComparison {
    pub budget_isotropic: usize,
    pub budget_anisotropic: usize,
    pub isotropic_rms: f64,
    pub anisotropic_rms: f64,
    pub ratio: f64,
}

impl StepExperiment {
    /// Sample points and step values `sign(n . (x - c))`.
    pub fn samples(&self) -> Result<(Vec<Point>, Vec<f64>)> {
        let disk = geometry::build_domain(DomainSpec::Disk { center: [0.0, 0.0], radius: 1.0 })?;
        let rule = disk.quadrature(self.sample_resolution)?;
        let n = [self.normal_angle.cos(), self.normal_angle.sin()];
        let values = rule
            .nodes
            .iter()
            .map(|p| {
                let s = n[0] * (p[0] - self.offset[0]) + n[1] * (p[1] - self.offset[1]);
                if s > 0.0 {
                    1.0
                } else if s < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            })
            .collect();
        Ok((rule.nodes, values))
    }

    /// Two beam sweeps travelling along the step line in both directions,
    /// each with centers upstream of the disk spread across the line.
    pub fn anisotropic_dictionary(&self) -> Result<RidgeletDictionary> {
        let n = [self.normal_angle.cos(), self.normal_angle.sin()];
        let t = [-n[1], n[0]];
        let scale = ScaleParams { diffusivity: self.diffusivity, speed: 2.0 * self.diffusivity * self.rho, reaction: 0.0 };
        let k = self.beam_centers;
        let mut atoms = Vec::with_capacity(2 * k);
        for sign in [1.0, -1.0] {
            let travel = [sign * t[0], sign * t[1]];
            for i in 0..k {
                let s = if k == 1 { 0.0 } else { -self.span + 2.0 * self.span * i as f64 / (k - 1) as f64 };
                let center = vec![
                    self.offset[0] - self.standoff * travel[0] + s * n[0],
                    self.offset[1] - self.standoff * travel[1] + s * n[1],
                ];
                // the drift factor exp(-v.d/2D) favours d along -v, so v points against the travel direction
                atoms.push(Atom { direction: vec![-travel[0], -travel[1]], scale, center });
            }
        }
        RidgeletDictionary::new(2, Branch::Rapid, atoms)
    }

    pub fn run(&self) -> Result<StepComparison> {
        let (points, values) = self.samples()?;
        let disk = geometry::build_domain(DomainSpec::Disk { center: [0.0, 0.0], radius: 1.0 })?;
        let pool = disk.quadrature(self.center_resolution)?;
        let centers = geometry::farthest_point_sample(&pool.nodes, self.iso_center_count);
        let m = self.iso_scale_count;
        let scales: Vec<f64> = (0..m)
            .map(|i| {
                if m == 1 {
                    self.iso_lambda_min
                } else {
                    self.iso_lambda_min + (self.iso_lambda_max - self.iso_lambda_min) * i as f64 / (m - 1) as f64
                }
            })
            .collect();
        let kernel = KernelSpec::new(KernelFamily::HelmholtzRegular, 2, 1.0)?;
        let iso = fit_isotropic(&points, &values, &kernel, &scales, &centers, 0.0)?;
        let dict = self.anisotropic_dictionary()?;
        let aniso = fit_ridgelet(&points, &values, &dict, 0.0)?;
        Ok(StepComparison {
            budget_isotropic: scales.len() * centers.len(),
            budget_anisotropic: dict.len(),
            isotropic_rms: iso.residual,
            anisotropic_rms: aniso.residual,
            ratio: aniso.residual / iso.residual,
        })
    }
}
