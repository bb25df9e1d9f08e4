//! Long-format CSV tables, atomic file writes and the run report.

use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;

use crate::Failure;

/// Shortest round-trip decimal, switching to exponent form outside
/// `[1e-5, 1e16)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub struct Table {
    pub name: String,
    header: Vec<String>,
    body: String,
    rows: usize,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Table { name: name.into(), header: header.iter().map(|s| s.to_string()).collect(), body: String::new(), rows: 0 }
    }

    pub fn with_header(name: &str, header: Vec<String>) -> Self {
        Table { name: name.into(), header, body: String::new(), rows: 0 }
    }

    pub fn push(&mut self, row: &[f64]) {
        debug_assert_eq!(row.len(), self.header.len());
        let line: Vec<String> = row.iter().map(|v| num(*v)).collect();
        self.body.push_str(&line.join(","));
        self.body.push('\n');
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn render(&self) -> String {
        format!("{}\n{}", self.header.join(","), self.body)
    }
}

pub enum Artifact {
    Csv(Table),
    Json { name: String, text: String, rows: usize },
}

impl Artifact {
    pub fn json<T: Serialize>(name: &str, value: &T, rows: usize) -> Self {
        let mut text = serde_json::to_string_pretty(value).expect("output serialises");
        text.push('\n');
        Artifact::Json { name: name.into(), text, rows }
    }

    fn parts(&self) -> (&str, String, usize) {
        match self {
            Artifact::Csv(t) => (&t.name, t.render(), t.rows()),
            Artifact::Json { name, text, rows } => (name, text.clone(), *rows),
        }
    }
}

#[derive(Serialize)]
pub struct ManifestEntry {
    pub file: String,
    pub rows: usize,
}

#[derive(Serialize)]
pub struct RunReport {
    pub command: String,
    pub config: Value,
    pub diagnostics: Value,
    pub outputs: Vec<ManifestEntry>,
}

pub fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Numeric(format!("cannot write {}: {e}", dir.join(name).display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(dir.join(name)).map_err(|e| io(e.error))?;
    Ok(())
}

/// Writes every artifact, then the report listing them.
pub fn emit(dir: &Path, command: &str, config: Value, diagnostics: Value, artifacts: &[Artifact]) -> Result<RunReport, Failure> {
    std::fs::create_dir_all(dir).map_err(|e| Failure::Numeric(format!("cannot create {}: {e}", dir.display())))?;
    let mut outputs = Vec::new();
    for a in artifacts {
        let (name, text, rows) = a.parts();
        write_atomic(dir, name, &text)?;
        outputs.push(ManifestEntry { file: name.into(), rows });
    }
    let report = RunReport { command: command.into(), config, diagnostics, outputs };
    let mut text = serde_json::to_string_pretty(&report).expect("report serialises");
    text.push('\n');
    write_atomic(dir, "report.json", &text)?;
    Ok(report)
}
