//! File formats: field CSVs, solution directories and positivity instances.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{AlgebraError, GeometryError};
use crate::mav::{Monitors, PathPoint, SolutionReport, VortexConfig};
use crate::positivity::{CMatrix, EndoForm11};
use crate::torus::{ScalarField, TorusGrid};

pub const SOLUTION_SCHEMA: &str = "mav-1";
pub const SOLUTION_HEADER: &str = "solution.json";
pub const PSI_FILE: &str = "psi.bin";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn json_err(path: &Path) -> impl FnOnce(serde_json::Error) -> IoError + '_ {
    move |source| IoError::Json {
        path: path.to_path_buf(),
        source,
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(json_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value).map_err(json_err(path))?;
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

/// Writes `x,y,value` rows in node order with 17 significant digits.
pub fn write_field_csv(path: &Path, grid: &TorusGrid, values: &[f64]) -> Result<(), IoError> {
    if values.len() != grid.len() {
        return Err(GeometryError::LengthMismatch {
            expected: grid.len(),
            got: values.len(),
        }
        .into());
    }
    let mut out = String::with_capacity(64 * values.len());
    out.push_str("x,y,value\n");
    for (idx, v) in values.iter().enumerate() {
        let z = grid.point(idx);
        out.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", z.re, z.im, v));
    }
    let mut f = fs::File::create(path).map_err(io_err(path))?;
    f.write_all(out.as_bytes()).map_err(io_err(path))
}

/// Reads the `value` column of a field CSV written by [`write_field_csv`].
pub fn read_field_csv(path: &Path, grid: &TorusGrid) -> Result<ScalarField, IoError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut lines = text.lines();
    match lines.next() {
        Some("x,y,value") => {}
        other => {
            return Err(IoError::SchemaMismatch(format!(
                "{}: expected header x,y,value, found {:?}",
                path.display(),
                other
            )))
        }
    }
    let mut values = Vec::with_capacity(grid.len());
    for (k, line) in lines.enumerate() {
        let v = line
            .rsplit(',')
            .next()
            .and_then(|s| s.trim().parse::<f64>().ok())
            .ok_or_else(|| {
                IoError::SchemaMismatch(format!("{}: bad row {}", path.display(), k + 2))
            })?;
        values.push(v);
    }
    if values.len() != grid.len() {
        return Err(IoError::SchemaMismatch(format!(
            "{}: {} rows for a grid with {} nodes",
            path.display(),
            values.len(),
            grid.len()
        )));
    }
    Ok(ScalarField::from_values(grid, values)?)
}

/// Header of a solution directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionHeader {
    pub schema: String,
    pub config: VortexConfig,
    pub monitors: Monitors,
    pub converged: bool,
    pub t_final: f64,
    pub final_residual: f64,
    pub t_history: Vec<PathPoint>,
}

impl SolutionHeader {
    pub fn new(cfg: &VortexConfig, report: &SolutionReport) -> Self {
        SolutionHeader {
            schema: SOLUTION_SCHEMA.to_string(),
            config: cfg.clone(),
            monitors: report.monitors,
            converged: report.converged,
            t_final: report.t_final,
            final_residual: report.final_residual,
            t_history: report.t_history.clone(),
        }
    }
}

/// Writes `solution.json` and the little-endian `psi.bin` into `dir`.
pub fn write_solution(
    dir: &Path,
    cfg: &VortexConfig,
    report: &SolutionReport,
) -> Result<(), IoError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    write_json(
        &dir.join(SOLUTION_HEADER),
        &SolutionHeader::new(cfg, report),
    )?;
    let bytes: Vec<u8> = report
        .psi_final
        .values()
        .iter()
        .flat_map(|v| v.to_le_bytes())
        .collect();
    let path = dir.join(PSI_FILE);
    fs::write(&path, bytes).map_err(io_err(&path))
}

/// Reads a solution directory back; `psi` is reproduced bit for bit.
pub fn read_solution(dir: &Path) -> Result<(SolutionHeader, ScalarField), IoError> {
    let header_path = dir.join(SOLUTION_HEADER);
    let text = fs::read_to_string(&header_path).map_err(io_err(&header_path))?;
    let raw: serde_json::Value = serde_json::from_str(&text).map_err(json_err(&header_path))?;
    match raw.get("schema").and_then(|s| s.as_str()) {
        Some(SOLUTION_SCHEMA) => {}
        other => {
            return Err(IoError::SchemaMismatch(format!(
                "expected schema {SOLUTION_SCHEMA:?}, found {other:?}"
            )))
        }
    }
    let header: SolutionHeader = serde_json::from_value(raw).map_err(json_err(&header_path))?;
    let grid = TorusGrid::new(header.config.tau(), header.config.n)?;
    let path = dir.join(PSI_FILE);
    let bytes = fs::read(&path).map_err(io_err(&path))?;
    if bytes.len() != 8 * grid.len() {
        return Err(IoError::SchemaMismatch(format!(
            "{} holds {} bytes, expected {} for n = {}",
            path.display(),
            bytes.len(),
            8 * grid.len(),
            grid.n()
        )));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8-byte chunk")))
        .collect();
    Ok((header, ScalarField::from_values(&grid, values)?))
}

/// A complex `r x r` block, either flat row-major `[[re, im], ...]` or nested rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BlockJson {
    Flat(Vec<[f64; 2]>),
    Nested(Vec<Vec<[f64; 2]>>),
}

impl BlockJson {
    fn to_matrix(&self, r: usize, name: &str) -> Result<CMatrix, AlgebraError> {
        let flat: Vec<[f64; 2]> = match self {
            BlockJson::Flat(v) => v.clone(),
            BlockJson::Nested(rows) => {
                if rows.len() != r || rows.iter().any(|row| row.len() != r) {
                    return Err(AlgebraError::InvalidArgument(format!(
                        "block {name} is not {r} x {r}"
                    )));
                }
                rows.concat()
            }
        };
        if flat.len() != r * r {
            return Err(AlgebraError::InvalidArgument(format!(
                "block {name} has {} entries, expected {}",
                flat.len(),
                r * r
            )));
        }
        Ok(CMatrix::from_row_iterator(
            r,
            r,
            flat.iter().map(|[re, im]| Complex64::new(*re, *im)),
        ))
    }

    fn from_matrix(m: &CMatrix) -> Self {
        let mut flat = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                flat.push([m[(i, j)].re, m[(i, j)].im]);
            }
        }
        BlockJson::Flat(flat)
    }
}

/// Positivity instance file `{"r": .., "A": .., "B": .., "C": ..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceJson {
    pub r: usize,
    #[serde(rename = "A")]
    pub a: BlockJson,
    #[serde(rename = "B")]
    pub b: BlockJson,
    #[serde(rename = "C")]
    pub c: BlockJson,
}

impl InstanceJson {
    pub fn to_form(&self) -> Result<EndoForm11, AlgebraError> {
        if self.r == 0 {
            return Err(AlgebraError::Shape(0));
        }
        EndoForm11::new(
            self.a.to_matrix(self.r, "A")?,
            self.b.to_matrix(self.r, "B")?,
            self.c.to_matrix(self.r, "C")?,
        )
    }

    pub fn from_form(f: &EndoForm11) -> Self {
        InstanceJson {
            r: f.rank(),
            a: BlockJson::from_matrix(f.a()),
            b: BlockJson::from_matrix(f.b()),
            c: BlockJson::from_matrix(f.c()),
        }
    }
}
