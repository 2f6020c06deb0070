//! Parsing of parameter strings and input files.

use crate::error::{CliError, CliResult};
use gengauss::geometry::{Polytope, PolytopeJson};
use gengauss::ma2d::PeriodicField;
use gengauss::normalized::MeasureJson;
use gengauss::Params;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use std::path::{Path, PathBuf};

/// Parses `n,alpha,q,p`.
pub fn parse_params(s: &str) -> CliResult<Params> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(CliError::Usage(format!(
            "--params expects n,alpha,q,p, got {s:?}"
        )));
    }
    let n: usize = parts[0]
        .parse()
        .map_err(|_| CliError::Usage(format!("n must be an integer, got {:?}", parts[0])))?;
    let mut vals = [0.0; 3];
    for (v, t) in vals.iter_mut().zip(&parts[1..]) {
        *v = t
            .parse()
            .map_err(|_| CliError::Usage(format!("not a number: {t:?}")))?;
    }
    Ok(Params::new(n, vals[0], vals[1], vals[2])?)
}

pub fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|source| CliError::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// A body file: explicit facets, or a named shape built from the grid size.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum BodyInput {
    Shape(ShapeInput),
    Facets(PolytopeJson),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "shape", rename_all = "lowercase")]
pub enum ShapeInput {
    /// Circumscribed polytope of the centered ball.
    Ball { radius: f64 },
    Cube { half: f64 },
}

impl BodyInput {
    pub fn build(&self, dim: usize, grid: usize) -> CliResult<Polytope> {
        Ok(match self {
            BodyInput::Shape(ShapeInput::Ball { radius }) => Polytope::ball(dim, *radius, grid)?,
            BodyInput::Shape(ShapeInput::Cube { half }) => Polytope::cube(dim, *half)?,
            BodyInput::Facets(j) => {
                let k = Polytope::try_from(j.clone())?;
                if k.dim() != dim {
                    return Err(gengauss::Error::Shape(format!(
                        "body has dimension {}, parameters have n = {dim}",
                        k.dim()
                    ))
                    .into());
                }
                k
            }
        })
    }
}

/// Problem file for the normalized solver.
#[derive(Debug, Clone, Deserialize)]
pub struct NormalizedProblem {
    pub c: f64,
    pub measure: MeasureJson,
}

/// Right-hand side of the planar equation.
#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum RhsSpec {
    /// c(1 + amp cos(mode θ)).
    Cosine { c: f64, amp: f64, mode: u32 },
    Constant { c: f64 },
}

impl RhsSpec {
    pub fn field(&self, m: usize) -> CliResult<PeriodicField> {
        Ok(match *self {
            RhsSpec::Cosine { c, amp, mode } => {
                PeriodicField::from_fn(m, |t| c * (1.0 + amp * (mode as f64 * t).cos()))?
            }
            RhsSpec::Constant { c } => PeriodicField::constant(m, c)?,
        })
    }
}

/// Reads f from JSON (`RhsSpec`) or from CSV, taking the last column on the uniform grid.
pub fn read_rhs(path: &Path, m: usize) -> CliResult<PeriodicField> {
    let is_csv = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if !is_csv {
        return read_json::<RhsSpec>(path)?.field(m);
    }
    let bad = |reason: String| CliError::Csv {
        path: PathBuf::from(path),
        reason,
    };
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let last = rec.iter().last().ok_or_else(|| bad("empty row".into()))?;
        values.push(
            last.parse::<f64>()
                .map_err(|_| bad(format!("not a number: {last:?}")))?,
        );
    }
    Ok(PeriodicField::new(values)?)
}
