//! Command runners: validate the config, load data, compute, and build the
//! output artifacts.

use std::path::PathBuf;

use dfw_core::diffusion::{evaluate_solution, solve_diffusion, DiffusionProblem, EigenSource, SolveOptions};
use dfw_core::eigensolver::{eigen_scan, EigenProblem, EigenResult};
use dfw_core::geometry::{read_samples_path, Domain, GeometryError, QuadratureRule, Samples};
use dfw_core::hfseries::{evaluate_series, fit_hf_series, HFSeries, HarmonicPart, SampleSet};
use dfw_core::ridgelets::{evaluate_ridgelet, fit_ridgelet};
use dfw_core::transforms::{admissibility, forward_transform, Profile, TransformPlan};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::*;
use crate::output::{Artifact, Table};
use crate::Failure;

pub struct Outcome {
    pub config: Value,
    pub diagnostics: Value,
    pub artifacts: Vec<Artifact>,
}

fn parse<T: DeserializeOwned + Serialize>(cmd: CommandName, body: Value) -> Result<(T, Value), Failure> {
    let cfg: T = serde_json::from_value(body).map_err(|e| Failure::validation(format!("invalid {} config: {e}", cmd.as_str())))?;
    let echo = with_command(cmd, serde_json::to_value(&cfg).expect("config serialises"));
    Ok((cfg, echo))
}

pub fn dispatch(cmd: CommandName, body: Value, data: &[PathBuf]) -> Result<Outcome, Failure> {
    match cmd {
        CommandName::KernelTable => {
            let (cfg, echo) = parse(cmd, body)?;
            kernel_table(cfg, echo, data)
        }
        CommandName::Eigen => {
            let (cfg, echo) = parse(cmd, body)?;
            eigen(cfg, echo, data)
        }
        CommandName::Fit => {
            let (cfg, echo) = parse(cmd, body)?;
            fit(cfg, echo, data)
        }
        CommandName::Transform => {
            let (cfg, echo) = parse(cmd, body)?;
            transform(cfg, echo, data)
        }
        CommandName::Diffuse => {
            let (cfg, echo) = parse(cmd, body)?;
            diffuse(cfg, echo, data)
        }
        CommandName::Ridge => {
            let (cfg, echo) = parse(cmd, body)?;
            ridge(cfg, echo, data)
        }
    }
}

fn no_data(cmd: CommandName, data: &[PathBuf]) -> Result<(), Failure> {
    if data.is_empty() {
        Ok(())
    } else {
        Err(Failure::validation(format!("{} takes no --data", cmd.as_str())))
    }
}

/// Reads and concatenates sample files; every file must match `dimension`.
fn load_data(paths: &[PathBuf], dimension: usize) -> Result<Samples, Failure> {
    if paths.is_empty() {
        return Err(Failure::validation("this command needs --data"));
    }
    let mut all = Samples { points: Vec::new(), values: Vec::new() };
    for p in paths {
        let s = read_samples_path(p).map_err(|e| match e {
            GeometryError::Csv { line, message } => Failure::validation(format!("{}: line {line}: {message}", p.display())),
            other => Failure::validation(format!("{}: {other}", p.display())),
        })?;
        if s.is_empty() {
            return Err(Failure::validation(format!("{}: no samples", p.display())));
        }
        if s.dimension() != dimension {
            return Err(Failure::validation(format!("{}: samples are {}D, expected {dimension}D", p.display(), s.dimension())));
        }
        all.points.extend(s.points);
        all.values.extend(s.values);
    }
    Ok(all)
}

fn load_series(path: &PathBuf) -> Result<HFSeries, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::validation(format!("cannot read series {}: {e}", path.display())))?;
    HFSeries::from_json(&text).map_err(|e| Failure::validation(format!("{}: {e}", path.display())))
}

fn rms(a: &[f64], b: &[f64]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len().max(1) as f64).sqrt()
}

fn coord_names(dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("x{i}")).collect()
}

fn sample_table(name: &str, samples: &Samples, fitted: &[f64]) -> Table {
    let mut h = coord_names(samples.dimension());
    h.extend(["value".into(), "fitted".into()]);
    let mut t = Table::with_header(name, h);
    for ((p, v), f) in samples.points.iter().zip(&samples.values).zip(fitted) {
        let mut row = p.clone();
        row.extend([*v, *f]);
        t.push(&row);
    }
    t
}

fn kernel_table(cfg: KernelTableConfig, config: Value, data: &[PathBuf]) -> Result<Outcome, Failure> {
    let dir = cfg.validate()?;
    no_data(CommandName::KernelTable, data)?;
    let mut t = Table::new("kernel_table.csv", &["r", "re", "im"]);
    for r in (Grid { min: cfg.r_min, max: cfg.r_max, count: cfg.points }).values() {
        let d: Vec<f64> = dir.iter().map(|u| u * r).collect();
        let v = cfg.kernel.eval(&d).map_err(|e| Failure::numeric(format!("r = {r}: {e}")))?;
        t.push(&[r, v.re, v.im]);
    }
    Ok(Outcome { config, diagnostics: json!({ "points": t.rows() }), artifacts: vec![Artifact::Csv(t)] })
}

fn scan(domain: &Domain, cfg_bc: &dfw_core::eigensolver::BoundaryCondition, source: &EigenSource) -> Result<EigenResult, Failure> {
    match source {
        EigenSource::Scan(opts) => {
            let problem = EigenProblem::default_for(domain, cfg_bc).map_err(Failure::numeric)?;
            eigen_scan(&problem, opts).map_err(Failure::numeric)
        }
        EigenSource::Given(v) => EigenResult::from_values(v).map_err(Failure::validation),
    }
}

fn eigen(cfg: EigenConfig, config: Value, data: &[PathBuf]) -> Result<Outcome, Failure> {
    let domain = cfg.validate()?;
    no_data(CommandName::Eigen, data)?;
    let res = scan(&domain, &cfg.boundary, &EigenSource::Scan(cfg.scan))?;
    let mut curve = Table::new("indicator.csv", &["lambda", "indicator"]);
    for (l, s) in res.grid.iter().zip(&res.curve) {
        curve.push(&[*l, *s]);
    }
    let mut vals = Table::new("eigenvalues.csv", &["index", "lambda", "residual"]);
    for (i, v) in res.values.iter().enumerate() {
        vals.push(&[(i + 1) as f64, v.lambda, v.residual]);
    }
    let diagnostics = json!({ "eigenvalues": res.lambdas() });
    Ok(Outcome { config, diagnostics, artifacts: vec![Artifact::Csv(curve), Artifact::Csv(vals)] })
}

fn fit(cfg: FitConfig, config: Value, data: &[PathBuf]) -> Result<Outcome, Failure> {
    let (domain, centers) = cfg.validate()?;
    let stored = cfg.series.as_ref().map(load_series).transpose()?;
    if let Some(s) = &stored {
        if s.dimension() != domain.dimension() {
            return Err(Failure::validation("stored series dimension differs from the domain"));
        }
    }
    let samples = load_data(data, domain.dimension())?;
    if let Some(series) = stored {
        let fitted = evaluate_series(&series, &samples.points, None);
        let residual = rms(&fitted, &samples.values);
        let diagnostics = json!({ "mode": "evaluate", "residual": residual, "stored_residual": series.residual });
        return Ok(Outcome { config, diagnostics, artifacts: vec![Artifact::Csv(sample_table("evaluation.csv", &samples, &fitted))] });
    }
    let eig = scan(&domain, &cfg.boundary, &cfg.eigen)?;
    if eig.is_empty() {
        return Err(Failure::numeric("the eigenvalue scan found no eigenvalues"));
    }
    let set = SampleSet::new(samples.points.clone(), samples.values.clone());
    let series = fit_hf_series(&set, &domain, &eig, &centers, &HarmonicPart::Zero, &cfg.options).map_err(Failure::numeric)?;
    let fitted = evaluate_series(&series, &samples.points, None);
    let diagnostics = json!({
        "mode": "fit",
        "residual": series.residual,
        "eigenvalues": eig.lambdas(),
        "coefficients": series.coefficient_count(),
    });
    let mut text = series.to_json();
    text.push('\n');
    let artifacts = vec![
        Artifact::Json { name: "series.json".into(), text, rows: series.coefficient_count() },
        Artifact::Csv(sample_table("fit.csv", &samples, &fitted)),
    ];
    Ok(Outcome { config, diagnostics, artifacts })
}

fn transform(cfg: TransformConfig, config: Value, data: &[PathBuf]) -> Result<Outcome, Failure> {
    let (domain, xi) = cfg.validate()?;
    let (rule, f) = match &cfg.source {
        TransformSource::Series { path } => {
            let series = load_series(path)?;
            if series.dimension() != domain.dimension() {
                return Err(Failure::validation("stored series dimension differs from the domain"));
            }
            no_data(CommandName::Transform, data)?;
            let rule = domain.quadrature(cfg.resolution).map_err(Failure::validation)?;
            let f = evaluate_series(&series, &rule.nodes, None);
            (rule, f)
        }
        TransformSource::Samples => {
            let s = load_data(data, domain.dimension())?;
            let w = domain.measure() / s.len() as f64;
            (QuadratureRule { weights: vec![w; s.len()], nodes: s.points }, s.values)
        }
    };
    let xi_weights = vec![domain.measure() / xi.len() as f64; xi.len()];
    let lambdas = cfg.lambdas.values();
    let mut plan = TransformPlan::new(cfg.kernel.clone(), lambdas.clone(), xi.clone(), xi_weights, rule).map_err(Failure::validation)?;
    if !cfg.directions.is_empty() {
        plan = plan.with_directions(cfg.directions.clone()).map_err(Failure::validation)?;
    }
    let field = forward_transform(&f, &plan).map_err(Failure::numeric)?;
    let directional = !cfg.directions.is_empty();
    let mut header: Vec<String> = Vec::new();
    if directional {
        header.push("direction".into());
    }
    header.push("lambda".into());
    header.extend((1..=domain.dimension()).map(|i| format!("xi{i}")));
    header.extend(["re".into(), "im".into()]);
    let mut t = Table::with_header("spectrum.csv", header);
    let nl = lambdas.len();
    for (row, values) in field.values.iter().enumerate() {
        for (x, v) in xi.iter().zip(values) {
            let mut r = Vec::with_capacity(x.len() + 4);
            if directional {
                r.push((row / nl) as f64);
            }
            r.push(lambdas[row % nl]);
            r.extend(x);
            r.extend([v.re, v.im]);
            t.push(&r);
        }
    }
    let mut diagnostics = json!({ "mean": field.mean, "skipped_fraction": field.skipped_fraction });
    if cfg.admissibility {
        let rep = admissibility(&Profile::single(cfg.kernel.clone()), (cfg.lambdas.min, cfg.lambdas.max), 64).map_err(Failure::numeric)?;
        diagnostics["admissibility"] = json!({ "convergent": rep.convergent, "constant": rep.constant, "low_power": rep.low_power });
    }
    Ok(Outcome { config, diagnostics, artifacts: vec![Artifact::Csv(t)] })
}

fn diffuse(cfg: DiffuseConfig, config: Value, data: &[PathBuf]) -> Result<Outcome, Failure> {
    let (domain, probes) = cfg.validate()?;
    let samples = load_data(data, domain.dimension())?;
    let problem = DiffusionProblem {
        domain: domain.clone(),
        kappa: cfg.kappa,
        boundary: cfg.boundary.clone(),
        points: samples.points,
        values: samples.values,
        weights: None,
    };
    problem.validate().map_err(Failure::validation)?;
    let opts = SolveOptions { budget: cfg.budget, eigen: cfg.eigen.clone(), norm_resolution: cfg.norm_resolution };
    let sol = solve_diffusion(&problem, &opts).map_err(Failure::numeric)?;
    let mut header = coord_names(domain.dimension());
    header.extend(["t".into(), "u".into()]);
    let mut t = Table::with_header("solution.csv", header);
    for &time in &cfg.times {
        let u = evaluate_solution(&sol, &probes, time).map_err(Failure::numeric)?;
        for (p, v) in probes.iter().zip(u) {
            let mut row = p.clone();
            row.extend([time, v]);
            t.push(&row);
        }
    }
    let mut modes = Table::new("modes.csv", &["index", "gamma", "coefficient"]);
    for (i, m) in sol.modes.iter().enumerate() {
        modes.push(&[(i + 1) as f64, m.gamma, m.coefficient]);
    }
    let diagnostics = json!({
        "method": sol.method,
        "residual": sol.residual,
        "a0": sol.a0,
        "gammas": sol.gammas(),
        "warnings": sol.warnings,
    });
    Ok(Outcome { config, diagnostics, artifacts: vec![Artifact::Csv(t), Artifact::Csv(modes)] })
}

fn ridge(cfg: RidgeConfig, config: Value, data: &[PathBuf]) -> Result<Outcome, Failure> {
    let dict = cfg.validate()?;
    if data.is_empty() && cfg.comparison.is_none() {
        return Err(Failure::validation("ridge needs --data or a comparison section"));
    }
    let samples = if data.is_empty() { None } else { Some(load_data(data, 2)?) };
    if samples.is_some() && dict.is_empty() {
        return Err(Failure::validation("the dictionary is empty"));
    }
    let mut artifacts = Vec::new();
    let mut diagnostics = json!({});
    if let Some(s) = samples {
        let series = fit_ridgelet(&s.points, &s.values, &dict, cfg.ridge).map_err(Failure::numeric)?;
        let fitted = evaluate_ridgelet(&series, &s.points).map_err(Failure::numeric)?;
        diagnostics["residual"] = json!(series.residual);
        diagnostics["ridge"] = json!(series.ridge);
        diagnostics["atoms"] = json!(dict.len());
        artifacts.push(Artifact::json("ridgelet_series.json", &series, dict.len()));
        artifacts.push(Artifact::Csv(sample_table("ridge_fit.csv", &s, &fitted)));
    }
    if let Some(exp) = &cfg.comparison {
        let r = exp.run().map_err(Failure::numeric)?;
        diagnostics["comparison"] = serde_json::to_value(&r).expect("comparison serialises");
        artifacts.push(Artifact::json("comparison.json", &r, 1));
    }
    Ok(Outcome { config, diagnostics, artifacts })
}
