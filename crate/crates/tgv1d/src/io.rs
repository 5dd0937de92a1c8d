//! JSON and CSV file formats.
//!
//! Sampled values are written with 17 significant digits, so every `f64`
//! survives a round trip and reruns produce identical bytes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;
use serde_json::Value;
use tgv1d_core::exact::{Cubic, PiecewisePoly};
use tgv1d_core::{Grid, Signal};

/// Decimal rendering with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// `f64` serialised through [`fmt17`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sig17(pub f64);

impl Serialize for Sig17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        RawValue::from_string(fmt17(self.0)).map_err(serde::ser::Error::custom)?.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Sig17 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        f64::deserialize(d).map(Sig17)
    }
}

pub fn sig17(values: &[f64]) -> Vec<Sig17> {
    values.iter().copied().map(Sig17).collect()
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct GridDto {
    pub a: Sig17,
    pub b: Sig17,
    pub n: usize,
}

impl From<&Grid> for GridDto {
    fn from(g: &Grid) -> Self {
        Self { a: Sig17(g.a()), b: Sig17(g.b()), n: g.n() }
    }
}

impl GridDto {
    pub fn grid(&self) -> anyhow::Result<Grid> {
        Ok(Grid::new(self.a.0, self.b.0, self.n)?)
    }
}

/// Sampled values on a grid: the Signal JSON file, also embedded in solution
/// files.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignalDto {
    pub grid: GridDto,
    pub values: Vec<Sig17>,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub meta: Value,
}

impl SignalDto {
    pub fn new(s: &Signal, meta: Value) -> Self {
        Self { grid: s.grid().into(), values: sig17(s.values()), meta }
    }

    pub fn signal(&self) -> anyhow::Result<Signal> {
        let values = self.values.iter().map(|v| v.0).collect();
        Ok(Signal::new(self.grid.grid()?, values)?)
    }
}

/// Values on a secondary grid (the interior nodes for `w`).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldDto {
    pub grid: GridDto,
    pub values: Vec<Sig17>,
}

impl FieldDto {
    pub fn new(s: &Signal) -> Self {
        Self { grid: s.grid().into(), values: sig17(s.values()) }
    }

    pub fn signal(&self) -> anyhow::Result<Signal> {
        let values = self.values.iter().map(|v| v.0).collect();
        Ok(Signal::new(self.grid.grid()?, values)?)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ParamsDto {
    pub alpha: f64,
    pub beta: Option<f64>,
}

/// Numeric solution file: `u` in Signal JSON layout plus `w` and diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionDto {
    pub grid: GridDto,
    pub values: Vec<Sig17>,
    pub w: Option<FieldDto>,
    pub model: String,
    pub params: ParamsDto,
    pub diagnostics: Value,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub meta: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyDto {
    pub breakpoints: Vec<f64>,
    pub pieces: Vec<Cubic>,
}

impl PolyDto {
    pub fn poly(&self) -> anyhow::Result<PiecewisePoly> {
        Ok(PiecewisePoly::new(self.breakpoints.clone(), self.pieces.clone())?)
    }
}

/// The parts of an exact solution file needed to compare or verify it.
#[derive(Debug, Clone, Deserialize)]
pub struct ExactDto {
    pub regime: String,
    pub params: ParamsDto,
    pub u: PolyDto,
    pub w: PolyDto,
}

/// A solution file of either kind.
#[derive(Debug, Clone)]
pub enum SolutionFile {
    Sampled { u: Signal, w: Option<Signal>, params: Option<ParamsDto> },
    Exact { u: PiecewisePoly, w: PiecewisePoly, params: ParamsDto },
}

impl SolutionFile {
    pub fn params(&self) -> Option<ParamsDto> {
        match self {
            SolutionFile::Sampled { params, .. } => *params,
            SolutionFile::Exact { params, .. } => Some(*params),
        }
    }

    /// `u` on `grid`, which must be the file's own grid for sampled files.
    pub fn u_on(&self, grid: &Grid) -> anyhow::Result<Signal> {
        match self {
            SolutionFile::Sampled { u, .. } => {
                if !u.grid().matches(grid) {
                    bail!(tgv1d_core::Error::GridMismatch);
                }
                Ok(u.clone())
            }
            SolutionFile::Exact { u, .. } => {
                check_domain(u, grid)?;
                Ok(Signal::from_fn(*grid, |x| u.eval(x))?)
            }
        }
    }

    /// `w` on the interior nodes of `grid`. Exact `w` is averaged over each
    /// dual cell, as for exact sampling elsewhere.
    pub fn w_on(&self, grid: &Grid) -> anyhow::Result<Signal> {
        match self {
            SolutionFile::Sampled { w: Some(w), .. } => {
                if !w.grid().matches(&grid.node_grid()?) {
                    bail!(tgv1d_core::Error::GridMismatch);
                }
                Ok(w.clone())
            }
            SolutionFile::Sampled { w: None, .. } => bail!("the solution file has no w field"),
            SolutionFile::Exact { w, .. } => {
                check_domain(w, grid)?;
                let big = w.antiderivative();
                let d = grid.delta();
                let vals = (1..grid.n()).map(|j| (big.eval(grid.x(j)) - big.eval(grid.x(j - 1))) / d).collect();
                Ok(Signal::new(grid.node_grid()?, vals)?)
            }
        }
    }
}

fn check_domain(p: &PiecewisePoly, grid: &Grid) -> anyhow::Result<()> {
    let (a, b) = p.domain();
    let tol = 1e-12 * b.abs().max(1.0);
    if (grid.a() - a).abs() > tol || (grid.b() - b).abs() > tol {
        bail!(tgv1d_core::Error::GridMismatch);
    }
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> anyhow::Result<()> {
    let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    let mut out = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

pub fn read_signal(path: &Path) -> anyhow::Result<(Signal, Value)> {
    let dto: SignalDto = read_json(path)?;
    let s = dto.signal().with_context(|| format!("invalid signal in {}", path.display()))?;
    Ok((s, dto.meta))
}

/// Reads a numeric or exact solution file.
pub fn read_solution(path: &Path) -> anyhow::Result<SolutionFile> {
    let raw: Value = read_json(path)?;
    let ctx = || format!("invalid solution in {}", path.display());
    if raw.get("values").is_some() {
        let dto: SignalDto = serde_json::from_value(raw.clone()).with_context(ctx)?;
        let u = dto.signal().with_context(ctx)?;
        let w = match raw.get("w") {
            Some(Value::Null) | None => None,
            Some(w) => Some(serde_json::from_value::<FieldDto>(w.clone()).with_context(ctx)?.signal().with_context(ctx)?),
        };
        let params = match raw.get("params") {
            Some(p) => Some(serde_json::from_value(p.clone()).with_context(ctx)?),
            None => None,
        };
        return Ok(SolutionFile::Sampled { u, w, params });
    }
    if raw.get("regime").is_some() {
        let dto: ExactDto = serde_json::from_value(raw).with_context(ctx)?;
        return Ok(SolutionFile::Exact { u: dto.u.poly().with_context(ctx)?, w: dto.w.poly().with_context(ctx)?, params: dto.params });
    }
    bail!("{} is neither a sampled nor an exact solution file", path.display())
}

/// Writes a CSV whose columns are all numeric.
pub fn write_csv(path: &Path, header: &[&str], columns: &[&[f64]]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    w.write_record(header)?;
    let rows = columns.first().map_or(0, |c| c.len());
    for i in 0..rows {
        w.write_record(columns.iter().map(|c| fmt17(c[i])))?;
    }
    w.flush()?;
    Ok(())
}

/// `w` from the interior nodes linearly interpolated to the cell midpoints.
/// The two boundary cells take the nearest node value.
pub fn w_at_midpoints(w_nodes: &[f64], n: usize) -> Vec<f64> {
    if w_nodes.is_empty() {
        return vec![0.0; n];
    }
    let last = w_nodes.len() - 1;
    (0..n)
        .map(|i| {
            let left = w_nodes[i.saturating_sub(1).min(last)];
            let right = w_nodes[i.min(last)];
            0.5 * (left + right)
        })
        .collect()
}
