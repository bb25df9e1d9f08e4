//! Domains, quadrature rules, boundary samples and center selection.

use std::f64::consts::PI;
use std::io::Read;
use std::num::NonZeroUsize;
use std::path::Path;

use gauss_quad::legendre::GaussLegendre;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Point = Vec<f64>;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("degenerate geometry: {0}")]
    Degenerate(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("csv line {line}: {message}")]
    Csv { line: u64, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, GeometryError>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainSpec {
    Interval { a: f64, b: f64 },
    Rectangle { min: [f64; 2], max: [f64; 2] },
    Disk { center: [f64; 2], radius: f64 },
    Polygon { vertices: Vec<[f64; 2]> },
}

/// A validated domain. Polygons are stored counter-clockwise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "DomainSpec", into = "DomainSpec")]
pub struct Domain {
    spec: DomainSpec,
    measure: f64,
    diameter: f64,
}

impl TryFrom<DomainSpec> for Domain {
    type Error = GeometryError;
    fn try_from(spec: DomainSpec) -> Result<Self> {
        build_domain(spec)
    }
}

impl From<Domain> for DomainSpec {
    fn from(d: Domain) -> Self {
        d.spec
    }
}

fn finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(GeometryError::InvalidParameters(format!("{what} must be finite")))
    }
}

fn shoelace(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    (0..n)
        .map(|i| {
            let (p, q) = (v[i], v[(i + 1) % n]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
        / 2.0
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn on_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> bool {
    p[0] >= a[0].min(b[0]) && p[0] <= a[0].max(b[0]) && p[1] >= a[1].min(b[1]) && p[1] <= a[1].max(b[1])
}

fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = cross(q1, q2, p1);
    let d2 = cross(q1, q2, p2);
    let d3 = cross(p1, p2, q1);
    let d4 = cross(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0)) {
        return true;
    }
    (d1 == 0.0 && on_segment(p1, q1, q2))
        || (d2 == 0.0 && on_segment(p2, q1, q2))
        || (d3 == 0.0 && on_segment(q1, p1, p2))
        || (d4 == 0.0 && on_segment(q2, p1, p2))
}

fn is_simple(v: &[[f64; 2]]) -> bool {
    let n = v.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}

fn max_pairwise(points: &[[f64; 2]]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, p) in points.iter().enumerate() {
        for q in &points[i + 1..] {
            d = d.max((p[0] - q[0]).hypot(p[1] - q[1]));
        }
    }
    d
}

pub fn build_domain(spec: DomainSpec) -> Result<Domain> {
    let (spec, measure, diameter) = match spec {
        DomainSpec::Interval { a, b } => {
            finite(&[a, b], "interval endpoints")?;
            if b <= a {
                return Err(GeometryError::Degenerate(format!("interval [{a}, {b}] has no length")));
            }
            (DomainSpec::Interval { a, b }, b - a, b - a)
        }
        DomainSpec::Rectangle { min, max } => {
            finite(&[min[0], min[1], max[0], max[1]], "rectangle corners")?;
            let (w, h) = (max[0] - min[0], max[1] - min[1]);
            if w <= 0.0 || h <= 0.0 {
                return Err(GeometryError::Degenerate("rectangle has zero area".into()));
            }
            (DomainSpec::Rectangle { min, max }, w * h, w.hypot(h))
        }
        DomainSpec::Disk { center, radius } => {
            finite(&[center[0], center[1], radius], "disk parameters")?;
            if radius <= 0.0 {
                return Err(GeometryError::Degenerate("disk radius must be positive".into()));
            }
            (DomainSpec::Disk { center, radius }, PI * radius * radius, 2.0 * radius)
        }
        DomainSpec::Polygon { mut vertices } => {
            if vertices.len() < 3 {
                return Err(GeometryError::InvalidParameters("polygon needs at least 3 vertices".into()));
            }
            finite(&vertices.iter().flatten().copied().collect::<Vec<_>>(), "polygon vertices")?;
            let n = vertices.len();
            if (0..n).any(|i| vertices[i] == vertices[(i + 1) % n]) {
                return Err(GeometryError::Degenerate("repeated polygon vertex".into()));
            }
            let mut area = shoelace(&vertices);
            let diameter = max_pairwise(&vertices);
            if area.abs() <= 1e-14 * diameter * diameter {
                return Err(GeometryError::Degenerate("polygon has zero area".into()));
            }
            if !is_simple(&vertices) {
                return Err(GeometryError::Degenerate("polygon is self-intersecting".into()));
            }
            if area < 0.0 {
                vertices.reverse();
                area = -area;
            }
            (DomainSpec::Polygon { vertices }, area, diameter)
        }
    };
    Ok(Domain { spec, measure, diameter })
}

/// Interior quadrature nodes with positive weights.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<Point>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn integrate<F: Fn(&[f64]) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(p, w)| w * f(p)).sum()
    }

    pub fn integrate_values(&self, values: &[f64]) -> f64 {
        self.weights.iter().zip(values).map(|(w, v)| w * v).sum()
    }

    pub fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        self.weights.iter().zip(a.iter().zip(b)).map(|(w, (x, y))| w * x * y).sum()
    }
}

/// Boundary points with unit outward normals and arc-length weights.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundarySet {
    pub points: Vec<Point>,
    pub normals: Vec<Point>,
    pub weights: Vec<f64>,
}

impl BoundarySet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Gauss-Legendre nodes and weights on [0, 1], ascending.
pub fn gauss_legendre_unit(n: usize) -> Vec<(f64, f64)> {
    let n = NonZeroUsize::new(n.max(1)).expect("nonzero");
    let mut pairs: Vec<(f64, f64)> = GaussLegendre::new(n)
        .as_node_weight_pairs()
        .iter()
        .map(|&(x, w)| ((x + 1.0) / 2.0, w / 2.0))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

fn ear_clip(vertices: &[[f64; 2]]) -> Vec<[[f64; 2]; 3]> {
    let mut idx: Vec<usize> = (0..vertices.len()).collect();
    let mut tris = Vec::with_capacity(vertices.len() - 2);
    while idx.len() > 3 {
        let m = idx.len();
        let mut clipped = false;
        for i in 0..m {
            let (ia, ib, ic) = (idx[(i + m - 1) % m], idx[i], idx[(i + 1) % m]);
            let (a, b, c) = (vertices[ia], vertices[ib], vertices[ic]);
            if cross(a, b, c) <= 0.0 {
                continue;
            }
            let blocked = idx.iter().any(|&k| {
                if k == ia || k == ib || k == ic {
                    return false;
                }
                let p = vertices[k];
                cross(a, b, p) >= 0.0 && cross(b, c, p) >= 0.0 && cross(c, a, p) >= 0.0
            });
            if blocked {
                continue;
            }
            tris.push([a, b, c]);
            idx.remove(i);
            clipped = true;
            break;
        }
        if !clipped {
            // Only collinear chains remain; fan out from the first vertex.
            for k in 1..idx.len() - 1 {
                tris.push([vertices[idx[0]], vertices[idx[k]], vertices[idx[k + 1]]]);
            }
            return tris;
        }
    }
    tris.push([vertices[idx[0]], vertices[idx[1]], vertices[idx[2]]]);
    tris
}

impl Domain {
    pub fn spec(&self) -> &DomainSpec {
        &self.spec
    }

    pub fn dimension(&self) -> usize {
        match self.spec {
            DomainSpec::Interval { .. } => 1,
            _ => 2,
        }
    }

    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn centroid(&self) -> Point {
        match &self.spec {
            DomainSpec::Interval { a, b } => vec![(a + b) / 2.0],
            DomainSpec::Rectangle { min, max } => vec![(min[0] + max[0]) / 2.0, (min[1] + max[1]) / 2.0],
            DomainSpec::Disk { center, .. } => center.to_vec(),
            DomainSpec::Polygon { vertices } => {
                let n = vertices.len();
                let (mut cx, mut cy) = (0.0, 0.0);
                for i in 0..n {
                    let (p, q) = (vertices[i], vertices[(i + 1) % n]);
                    let c = p[0] * q[1] - q[0] * p[1];
                    cx += (p[0] + q[0]) * c;
                    cy += (p[1] + q[1]) * c;
                }
                vec![cx / (6.0 * self.measure), cy / (6.0 * self.measure)]
            }
        }
    }

    pub fn boundary_measure(&self) -> f64 {
        match &self.spec {
            DomainSpec::Interval { .. } => 2.0,
            DomainSpec::Rectangle { min, max } => 2.0 * (max[0] - min[0] + max[1] - min[1]),
            DomainSpec::Disk { radius, .. } => 2.0 * PI * radius,
            DomainSpec::Polygon { vertices } => polygon_edges(vertices).iter().map(|e| e.2).sum(),
        }
    }

    /// Closed-set membership with absolute tolerance `tol`.
    pub fn contains(&self, p: &[f64], tol: f64) -> bool {
        if p.len() != self.dimension() {
            return false;
        }
        match &self.spec {
            DomainSpec::Interval { a, b } => p[0] >= a - tol && p[0] <= b + tol,
            DomainSpec::Rectangle { min, max } => {
                (0..2).all(|i| p[i] >= min[i] - tol && p[i] <= max[i] + tol)
            }
            DomainSpec::Disk { center, radius } => {
                (p[0] - center[0]).hypot(p[1] - center[1]) <= radius + tol
            }
            DomainSpec::Polygon { vertices } => {
                let q = [p[0], p[1]];
                let n = vertices.len();
                let mut inside = false;
                for i in 0..n {
                    let (a, b) = (vertices[i], vertices[(i + 1) % n]);
                    if segment_distance(q, a, b) <= tol {
                        return true;
                    }
                    if (a[1] > q[1]) != (b[1] > q[1]) {
                        let x = a[0] + (q[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
                        if q[0] < x {
                            inside = !inside;
                        }
                    }
                }
                inside
            }
        }
    }

    /// Interior rule: tensor Gauss-Legendre on intervals and rectangles,
    /// polar Gauss on disks, collapsed-square Gauss on polygon triangles.
    pub fn quadrature(&self, resolution: usize) -> Result<QuadratureRule> {
        if resolution < 4 {
            return Err(GeometryError::InvalidParameters(format!("quadrature resolution {resolution} < 4")));
        }
        let gl = gauss_legendre_unit(resolution);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        match &self.spec {
            DomainSpec::Interval { a, b } => {
                let l = b - a;
                for &(x, w) in &gl {
                    nodes.push(vec![a + l * x]);
                    weights.push(l * w);
                }
            }
            DomainSpec::Rectangle { min, max } => {
                let (lx, ly) = (max[0] - min[0], max[1] - min[1]);
                for &(x, wx) in &gl {
                    for &(y, wy) in &gl {
                        nodes.push(vec![min[0] + lx * x, min[1] + ly * y]);
                        weights.push(lx * ly * wx * wy);
                    }
                }
            }
            DomainSpec::Disk { center, radius } => {
                let m = 2 * resolution;
                for &(s, ws) in &gl {
                    let r = radius * s;
                    for k in 0..m {
                        let t = 2.0 * PI * k as f64 / m as f64;
                        nodes.push(vec![center[0] + r * t.cos(), center[1] + r * t.sin()]);
                        weights.push(radius * ws * r * 2.0 * PI / m as f64);
                    }
                }
            }
            DomainSpec::Polygon { vertices } => {
                for [a, b, c] in ear_clip(vertices) {
                    let area2 = cross(a, b, c);
                    for &(u, wu) in &gl {
                        for &(v, wv) in &gl {
                            let x = a[0] + u * (b[0] - a[0]) + u * v * (c[0] - b[0]);
                            let y = a[1] + u * (b[1] - a[1]) + u * v * (c[1] - b[1]);
                            nodes.push(vec![x, y]);
                            weights.push(area2 * u * wu * wv);
                        }
                    }
                }
            }
        }
        Ok(QuadratureRule { nodes, weights })
    }

    /// Boundary points spaced evenly by arc length.
    pub fn boundary_discretize(&self, count: usize) -> Result<BoundarySet> {
        if count < 8 {
            return Err(GeometryError::InvalidParameters(format!("boundary count {count} < 8")));
        }
        let mut set = BoundarySet { points: Vec::new(), normals: Vec::new(), weights: Vec::new() };
        match &self.spec {
            DomainSpec::Interval { a, b } => {
                set.points = vec![vec![*a], vec![*b]];
                set.normals = vec![vec![-1.0], vec![1.0]];
                set.weights = vec![1.0, 1.0];
            }
            DomainSpec::Disk { center, radius } => {
                for i in 0..count {
                    let t = 2.0 * PI * i as f64 / count as f64;
                    let (s, c) = t.sin_cos();
                    set.points.push(vec![center[0] + radius * c, center[1] + radius * s]);
                    set.normals.push(vec![c, s]);
                    set.weights.push(2.0 * PI * radius / count as f64);
                }
            }
            DomainSpec::Rectangle { min, max } => {
                let v = [*min, [max[0], min[1]], *max, [min[0], max[1]]];
                walk_edges(&polygon_edges(&v), count, &mut set);
            }
            DomainSpec::Polygon { vertices } => walk_edges(&polygon_edges(vertices), count, &mut set),
        }
        Ok(set)
    }
}

fn segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let t = (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    (p[0] - a[0] - t * dx).hypot(p[1] - a[1] - t * dy)
}

fn polygon_edges(v: &[[f64; 2]]) -> Vec<([f64; 2], [f64; 2], f64)> {
    (0..v.len())
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % v.len()]);
            (a, b, (b[0] - a[0]).hypot(b[1] - a[1]))
        })
        .collect()
}

fn walk_edges(edges: &[([f64; 2], [f64; 2], f64)], count: usize, set: &mut BoundarySet) {
    let perimeter: f64 = edges.iter().map(|e| e.2).sum();
    let step = perimeter / count as f64;
    let mut edge = 0;
    let mut start = 0.0;
    for i in 0..count {
        let s = (i as f64 + 0.5) * step;
        while edge + 1 < edges.len() && s > start + edges[edge].2 {
            start += edges[edge].2;
            edge += 1;
        }
        let (a, b, len) = edges[edge];
        let t = ((s - start) / len).clamp(0.0, 1.0);
        set.points.push(vec![a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
        set.normals.push(vec![(b[1] - a[1]) / len, -(b[0] - a[0]) / len]);
        set.weights.push(step);
    }
}

/// Expansion centers with optional collocation points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NodeSet {
    pub centers: Vec<Point>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub collocation: Option<Vec<Point>>,
}

impl NodeSet {
    pub fn new(domain: &Domain, centers: Vec<Point>, collocation: Option<Vec<Point>>) -> Result<Self> {
        let tol = 1e-9 * domain.diameter();
        let check = |pts: &[Point], what: &str| -> Result<()> {
            for p in pts {
                if p.len() != domain.dimension() {
                    return Err(GeometryError::DimensionMismatch { expected: domain.dimension(), found: p.len() });
                }
                if !domain.contains(p, tol) {
                    return Err(GeometryError::InvalidParameters(format!("{what} {p:?} lies outside the domain")));
                }
            }
            for (i, p) in pts.iter().enumerate() {
                if pts[i + 1..].iter().any(|q| distance(p, q) == 0.0) {
                    return Err(GeometryError::Degenerate(format!("repeated {what} {p:?}")));
                }
            }
            Ok(())
        };
        check(&centers, "center")?;
        if let Some(c) = &collocation {
            check(c, "collocation point")?;
        }
        Ok(Self { centers, collocation })
    }

    /// Quadrature nodes thinned by farthest-point sampling.
    pub fn default_for(domain: &Domain, count: usize, resolution: usize) -> Result<Self> {
        let rule = domain.quadrature(resolution)?;
        if count > rule.len() {
            return Err(GeometryError::InvalidParameters(format!(
                "{count} centers requested from {} quadrature nodes",
                rule.len()
            )));
        }
        Ok(Self { centers: farthest_point_sample(&rule.nodes, count), collocation: None })
    }
}

pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub fn pairwise_distance(a: &[Point], b: &[Point]) -> Result<DMatrix<f64>> {
    let dim = a.first().or(b.first()).map_or(0, |p| p.len());
    for p in a.iter().chain(b) {
        if p.len() != dim {
            return Err(GeometryError::DimensionMismatch { expected: dim, found: p.len() });
        }
    }
    Ok(DMatrix::from_fn(a.len(), b.len(), |i, j| distance(&a[i], &b[j])))
}

/// Greedy farthest-point subset, seeded at the point nearest the centroid.
/// Ties go to the lowest index.
pub fn farthest_point_sample(points: &[Point], count: usize) -> Vec<Point> {
    if points.is_empty() || count == 0 {
        return Vec::new();
    }
    let dim = points[0].len();
    let mut mean = vec![0.0; dim];
    for p in points {
        for (m, x) in mean.iter_mut().zip(p) {
            *m += x / points.len() as f64;
        }
    }
    let argmin = |d: &[f64]| d.iter().enumerate().fold(0, |best, (i, v)| if *v < d[best] { i } else { best });
    let argmax = |d: &[f64]| d.iter().enumerate().fold(0, |best, (i, v)| if *v > d[best] { i } else { best });
    let to_mean: Vec<f64> = points.iter().map(|p| distance(p, &mean)).collect();
    let mut chosen = vec![argmin(&to_mean)];
    let mut nearest: Vec<f64> = points.iter().map(|p| distance(p, &points[chosen[0]])).collect();
    while chosen.len() < count.min(points.len()) {
        let next = argmax(&nearest);
        chosen.push(next);
        for (d, p) in nearest.iter_mut().zip(points) {
            *d = d.min(distance(p, &points[next]));
        }
    }
    chosen.into_iter().map(|i| points[i].clone()).collect()
}

/// Scattered samples read from a `x1[,x2],f` CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct Samples {
    pub points: Vec<Point>,
    pub values: Vec<f64>,
}

impl Samples {
    pub fn dimension(&self) -> usize {
        self.points.first().map_or(0, |p| p.len())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

pub fn read_samples<R: Read>(reader: R) -> Result<Samples> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let csv_err = |e: csv::Error| {
        let line = e.position().map_or(0, |p| p.line());
        GeometryError::Csv { line, message: e.to_string() }
    };
    let header: Vec<String> = rdr.headers().map_err(csv_err)?.iter().map(|h| h.trim().to_string()).collect();
    let dim = match header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["x1", "f"] => 1,
        ["x1", "x2", "f"] => 2,
        _ => {
            return Err(GeometryError::Csv {
                line: 1,
                message: format!("header must be x1,f or x1,x2,f, found {}", header.join(",")),
            })
        }
    };
    let mut samples = Samples { points: Vec::new(), values: Vec::new() };
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != dim + 1 {
            return Err(GeometryError::Csv { line, message: format!("expected {} fields, found {}", dim + 1, rec.len()) });
        }
        let mut row = Vec::with_capacity(dim + 1);
        for field in rec.iter() {
            let v: f64 = field
                .trim()
                .parse()
                .map_err(|_| GeometryError::Csv { line, message: format!("not a number: {field:?}") })?;
            if !v.is_finite() {
                return Err(GeometryError::Csv { line, message: format!("non-finite value {field:?}") });
            }
            row.push(v);
        }
        samples.values.push(row[dim]);
        row.truncate(dim);
        samples.points.push(row);
    }
    Ok(samples)
}

pub fn read_samples_path(path: &Path) -> Result<Samples> {
    read_samples(std::fs::File::open(path)?)
}
