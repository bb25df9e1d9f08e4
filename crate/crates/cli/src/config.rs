//! Run configurations, one schema per command.

use std::path::PathBuf;

use dfw_core::diffusion::EigenSource;
use dfw_core::eigensolver::{BoundaryCondition, ScanOptions};
use dfw_core::geometry::{build_domain, Domain, DomainSpec, NodeSet, Point};
use dfw_core::hfseries::{FitMethod, FitOptions, Flavor};
use dfw_core::kernels::{KernelFamily, KernelSpec};
use dfw_core::ridgelets::{Atom, Branch, ScaleParams, StepExperiment};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum CommandName {
    KernelTable,
    Eigen,
    Fit,
    Transform,
    Diffuse,
    Ridge,
}

impl CommandName {
    pub fn as_str(self) -> &'static str {
        match self {
            CommandName::KernelTable => "kernel-table",
            CommandName::Eigen => "eigen",
            CommandName::Fit => "fit",
            CommandName::Transform => "transform",
            CommandName::Diffuse => "diffuse",
            CommandName::Ridge => "ridge",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        (0..self.count).map(|i| self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64).collect()
    }

    fn check(&self, what: &str) -> Result<(), Failure> {
        if self.count == 0 || !self.min.is_finite() || !self.max.is_finite() || self.max < self.min {
            return Err(Failure::validation(format!("{what}: need count >= 1 and finite min <= max")));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PointSet {
    Explicit { points: Vec<Point> },
    /// Farthest-point subset of the domain quadrature nodes.
    Sampled { count: usize, resolution: usize },
}

impl PointSet {
    pub fn resolve(&self, domain: &Domain, inside: bool) -> Result<Vec<Point>, Failure> {
        let pts = match self {
            PointSet::Explicit { points } => {
                if points.iter().any(|p| p.len() != domain.dimension() || p.iter().any(|v| !v.is_finite())) {
                    return Err(Failure::validation("explicit points must be finite and match the domain dimension"));
                }
                if inside {
                    NodeSet::new(domain, points.clone(), None).map_err(Failure::validation)?;
                }
                points.clone()
            }
            PointSet::Sampled { count, resolution } => {
                if *count == 0 {
                    return Err(Failure::validation("sampled point count must be positive"));
                }
                NodeSet::default_for(domain, *count, *resolution).map_err(Failure::validation)?.centers
            }
        };
        if pts.is_empty() {
            return Err(Failure::validation("point set is empty"));
        }
        Ok(pts)
    }
}

fn domain(spec: &DomainSpec) -> Result<Domain, Failure> {
    build_domain(spec.clone()).map_err(Failure::validation)
}

fn check_eigen(source: &EigenSource) -> Result<(), Failure> {
    match source {
        EigenSource::Scan(s) => s.validate().map_err(Failure::validation)?,
        EigenSource::Given(v) => {
            if v.is_empty() || v.iter().any(|l| !(*l > 0.0) || !l.is_finite()) || v.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Failure::validation("given eigenvalues must be positive, finite and increasing"));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelTableConfig {
    pub kernel: KernelSpec,
    pub r_min: f64,
    pub r_max: f64,
    pub points: usize,
    /// Direction of the sampling ray; anisotropic kernels need it.
    #[serde(default)]
    pub direction: Option<Vec<f64>>,
}

impl Default for KernelTableConfig {
    fn default() -> Self {
        KernelTableConfig {
            kernel: KernelSpec { family: KernelFamily::HelmholtzRegular, dimension: 3, scale: std::f64::consts::PI, convection: None },
            r_min: 0.0,
            r_max: 10.0,
            points: 101,
            direction: None,
        }
    }
}

impl KernelTableConfig {
    pub fn validate(&self) -> Result<Vec<f64>, Failure> {
        self.kernel.validate().map_err(Failure::validation)?;
        Grid { min: self.r_min, max: self.r_max, count: self.points }.check("radius grid")?;
        if self.r_min < 0.0 {
            return Err(Failure::validation("r_min must be >= 0"));
        }
        let dir = match &self.direction {
            Some(d) => d.clone(),
            None => {
                let mut d = vec![0.0; self.kernel.dimension];
                d[0] = 1.0;
                d
            }
        };
        let n = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
        if dir.len() != self.kernel.dimension || !(n > 0.0) || !n.is_finite() {
            return Err(Failure::validation("direction must be a nonzero vector of the kernel dimension"));
        }
        Ok(dir.iter().map(|v| v / n).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EigenConfig {
    pub domain: DomainSpec,
    pub boundary: BoundaryCondition,
    pub scan: ScanOptions,
}

impl Default for EigenConfig {
    fn default() -> Self {
        EigenConfig { domain: DomainSpec::Interval { a: 0.0, b: 1.0 }, boundary: BoundaryCondition::Dirichlet, scan: ScanOptions::default() }
    }
}

impl EigenConfig {
    pub fn validate(&self) -> Result<Domain, Failure> {
        check_eigen(&EigenSource::Scan(self.scan))?;
        domain(&self.domain)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub domain: DomainSpec,
    pub boundary: BoundaryCondition,
    pub eigen: EigenSource,
    pub centers: PointSet,
    pub options: FitOptions,
    /// Evaluate a stored series on the data instead of fitting.
    #[serde(default)]
    pub series: Option<PathBuf>,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            domain: DomainSpec::Interval { a: 0.0, b: 1.0 },
            boundary: BoundaryCondition::Dirichlet,
            eigen: EigenSource::Scan(ScanOptions::default()),
            centers: PointSet::Explicit { points: vec![vec![0.0]] },
            options: FitOptions { flavor: Flavor::Sine, method: FitMethod::LeastSquares, ridge: 1e-10, constant: false },
            series: None,
        }
    }
}

impl FitConfig {
    pub fn validate(&self) -> Result<(Domain, Vec<Point>), Failure> {
        let d = domain(&self.domain)?;
        check_eigen(&self.eigen)?;
        if !(self.options.ridge >= 0.0) || !self.options.ridge.is_finite() {
            return Err(Failure::validation("ridge must be finite and >= 0"));
        }
        let c = self.centers.resolve(&d, true)?;
        Ok((d, c))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TransformSource {
    /// A series written by `fit`, sampled on the domain quadrature.
    Series { path: PathBuf },
    /// The `--data` samples, weighted equally over the domain measure.
    Samples,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransformConfig {
    pub domain: DomainSpec,
    pub kernel: KernelSpec,
    pub lambdas: Grid,
    pub xi: PointSet,
    pub resolution: usize,
    #[serde(default)]
    pub directions: Vec<Vec<f64>>,
    pub source: TransformSource,
    #[serde(default)]
    pub admissibility: bool,
}

impl Default for TransformConfig {
    fn default() -> Self {
        TransformConfig {
            domain: DomainSpec::Interval { a: -8.0, b: 8.0 },
            kernel: KernelSpec { family: KernelFamily::HelmholtzRegular, dimension: 1, scale: 1.0, convection: None },
            lambdas: Grid { min: 0.1, max: 8.0, count: 80 },
            xi: PointSet::Explicit { points: vec![vec![-1.0], vec![0.0], vec![1.0]] },
            resolution: 64,
            directions: Vec::new(),
            source: TransformSource::Samples,
            admissibility: false,
        }
    }
}

impl TransformConfig {
    pub fn validate(&self) -> Result<(Domain, Vec<Point>), Failure> {
        let d = domain(&self.domain)?;
        self.kernel.validate().map_err(Failure::validation)?;
        if self.kernel.dimension != d.dimension() {
            return Err(Failure::validation("kernel dimension differs from the domain dimension"));
        }
        self.lambdas.check("lambda grid")?;
        if self.resolution == 0 {
            return Err(Failure::validation("resolution must be positive"));
        }
        let xi = self.xi.resolve(&d, false)?;
        Ok((d, xi))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiffuseConfig {
    pub domain: DomainSpec,
    pub kappa: f64,
    pub boundary: BoundaryCondition,
    pub eigen: EigenSource,
    pub budget: usize,
    pub norm_resolution: usize,
    pub times: Vec<f64>,
    pub probes: PointSet,
}

impl Default for DiffuseConfig {
    fn default() -> Self {
        DiffuseConfig {
            domain: DomainSpec::Interval { a: 0.0, b: 1.0 },
            kappa: 1.0,
            boundary: BoundaryCondition::Dirichlet,
            eigen: EigenSource::Scan(ScanOptions::default()),
            budget: 3,
            norm_resolution: 24,
            times: vec![0.05, 0.1],
            probes: PointSet::Explicit { points: (1..10).map(|i| vec![i as f64 / 10.0]).collect() },
        }
    }
}

impl DiffuseConfig {
    pub fn validate(&self) -> Result<(Domain, Vec<Point>), Failure> {
        let d = domain(&self.domain)?;
        check_eigen(&self.eigen)?;
        if !(self.kappa > 0.0) || !self.kappa.is_finite() || self.budget == 0 || self.norm_resolution == 0 {
            return Err(Failure::validation("need kappa > 0, budget >= 1 and norm_resolution >= 1"));
        }
        if self.times.is_empty() || self.times.iter().any(|t| !(*t >= 0.0) || !t.is_finite()) {
            return Err(Failure::validation("times must be nonempty, finite and >= 0"));
        }
        let p = self.probes.resolve(&d, false)?;
        Ok((d, p))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RidgeConfig {
    pub branch: Branch,
    /// Directions of the sweep, uniform on the circle; 0 disables it.
    pub directions: usize,
    pub scales: Vec<ScaleParams>,
    pub centers: Vec<Point>,
    /// Extra atoms appended after the sweep.
    #[serde(default)]
    pub atoms: Vec<Atom>,
    pub ridge: f64,
    /// Run the line-discontinuity comparison.
    #[serde(default)]
    pub comparison: Option<StepExperiment>,
}

impl Default for RidgeConfig {
    fn default() -> Self {
        RidgeConfig {
            branch: Branch::Rapid,
            directions: 4,
            scales: vec![ScaleParams::from_rho(2.0)],
            centers: vec![vec![0.0, 0.0], vec![0.5, 0.0], vec![-0.5, 0.0], vec![0.0, 0.5], vec![0.0, -0.5]],
            atoms: Vec::new(),
            ridge: 1e-8,
            comparison: None,
        }
    }
}

impl RidgeConfig {
    pub fn validate(&self) -> Result<dfw_core::ridgelets::RidgeletDictionary, Failure> {
        use dfw_core::ridgelets::{build_direction_sweep, RidgeletDictionary};
        if !(self.ridge >= 0.0) || !self.ridge.is_finite() {
            return Err(Failure::validation("ridge must be finite and >= 0"));
        }
        let extra = RidgeletDictionary::new(2, self.branch, self.atoms.clone()).map_err(Failure::validation)?;
        let dict = if self.directions > 0 {
            build_direction_sweep(self.directions, &self.scales, &self.centers, self.branch)
                .map_err(Failure::validation)?
                .concat(&extra)
                .map_err(Failure::validation)?
        } else {
            extra
        };
        if let Some(exp) = &self.comparison {
            if exp.sample_resolution == 0 || exp.beam_centers == 0 || exp.iso_scale_count == 0 || exp.iso_center_count == 0 || !(exp.rho > 0.0) || !(exp.diffusivity > 0.0) {
                return Err(Failure::validation("comparison needs positive counts, rho and diffusivity"));
            }
        }
        Ok(dict)
    }
}

pub fn defaults(cmd: CommandName) -> Value {
    let body = match cmd {
        CommandName::KernelTable => serde_json::to_value(KernelTableConfig::default()),
        CommandName::Eigen => serde_json::to_value(EigenConfig::default()),
        CommandName::Fit => serde_json::to_value(FitConfig::default()),
        CommandName::Transform => serde_json::to_value(TransformConfig::default()),
        CommandName::Diffuse => serde_json::to_value(DiffuseConfig::default()),
        CommandName::Ridge => serde_json::to_value(RidgeConfig::default()),
    };
    with_command(cmd, body.expect("defaults serialise"))
}

pub fn with_command(cmd: CommandName, body: Value) -> Value {
    let mut map = serde_json::Map::new();
    map.insert("command".into(), Value::String(cmd.as_str().into()));
    if let Value::Object(m) = body {
        map.extend(m);
    }
    Value::Object(map)
}

/// Checks the `command` discriminator and returns the remaining fields.
pub fn split_command(cmd: CommandName, doc: Value) -> Result<Value, Failure> {
    let Value::Object(mut map) = doc else {
        return Err(Failure::validation("config must be a JSON object"));
    };
    match map.remove("command") {
        Some(Value::String(s)) if s == cmd.as_str() => Ok(Value::Object(map)),
        Some(Value::String(s)) => Err(Failure::validation(format!("config command {s:?} does not match {:?}", cmd.as_str()))),
        Some(_) => Err(Failure::validation("config field `command` must be a string")),
        None => Err(Failure::validation("config is missing the `command` field")),
    }
}
