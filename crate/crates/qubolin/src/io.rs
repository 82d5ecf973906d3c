//! Problem and QUBO file formats.
//!
//! Problems are JSON with named fields (`A`, `b`, `encoding.low/high`,
//! optional `scale`, optional explicit `R`). QUBO instances have two
//! serializations: a self-describing JSON document carrying model metadata,
//! and a flat coordinate listing for annealer interop — header line
//! `qubo <n> <offset>` followed by `<i> <j> <value>` lines with 0-based
//! `i <= j`. Values are written in shortest round-trip decimal, so
//! read∘write is lossless.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::encoding::RadixEncoding;
use crate::linalg::{CongruenceDecomposition, LinalgError, LinearSystem, Matrix, Vector};
use crate::qubo::{QuboError, QuboMatrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IoError {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("dimension mismatch: {msg}")]
    DimensionMismatch { msg: String },
    #[error("duplicate entry ({i}, {j})")]
    DuplicateEntry { i: usize, j: usize },
    #[error("invalid problem: {msg}")]
    Invalid { msg: String },
}

impl From<serde_json::Error> for IoError {
    fn from(e: serde_json::Error) -> Self {
        IoError::Parse {
            line: e.line(),
            msg: e.to_string(),
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> IoError {
    IoError::Invalid { msg: e.to_string() }
}

/// Exponent range of the radix-2 encoding as stored in files.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingSpec {
    pub low: i32,
    pub high: i32,
}

impl Default for EncodingSpec {
    fn default() -> Self {
        Self { low: 0, high: 2 }
    }
}

/// On-disk description of a linear system instance.
///
/// `scale` tunes the column scaling of the computed congruence transform;
/// `R` skips the computation and supplies the transform directly. The two
/// are mutually exclusive. Indices and layout follow the JSON structure,
/// e.g. `{"A": [[3, 1], [-1, 2]], "b": [-1, 5], "encoding": {"low": 0,
/// "high": 2}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    #[serde(rename = "A")]
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    #[serde(default)]
    pub encoding: EncodingSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<Vec<f64>>,
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<Vec<Vec<f64>>>,
}

impl ProblemFile {
    fn validate(&self) -> Result<(), IoError> {
        let rows = self.a.len();
        if rows == 0 || self.a[0].is_empty() {
            return Err(IoError::Invalid {
                msg: "matrix A must be nonempty".into(),
            });
        }
        let cols = self.a[0].len();
        for (i, row) in self.a.iter().enumerate() {
            if row.len() != cols {
                return Err(IoError::DimensionMismatch {
                    msg: format!("row {i} of A has {} entries, expected {cols}", row.len()),
                });
            }
        }
        if self.b.len() != rows {
            return Err(IoError::DimensionMismatch {
                msg: format!("b has {} entries, A has {rows} rows", self.b.len()),
            });
        }
        if self.encoding.low > self.encoding.high {
            return Err(IoError::Invalid {
                msg: format!(
                    "encoding range [{}, {}] is empty",
                    self.encoding.low, self.encoding.high
                ),
            });
        }
        if let Some(scale) = &self.scale {
            if scale.len() != cols {
                return Err(IoError::DimensionMismatch {
                    msg: format!("scale has {} entries, A has {cols} columns", scale.len()),
                });
            }
            if scale.iter().any(|&s| !s.is_finite() || s <= 0.0) {
                return Err(IoError::Invalid {
                    msg: "scale entries must be positive and finite".into(),
                });
            }
        }
        if let Some(r) = &self.r {
            if r.len() != cols || r.iter().any(|row| row.len() != cols) {
                return Err(IoError::DimensionMismatch {
                    msg: format!("R must be {cols}x{cols}"),
                });
            }
            if self.scale.is_some() {
                return Err(IoError::Invalid {
                    msg: "scale and R are mutually exclusive: an explicit R already fixes the column scaling".into(),
                });
            }
        }
        let finite = |vals: &[f64]| vals.iter().all(|v| v.is_finite());
        if !self.a.iter().all(|row| finite(row))
            || !finite(&self.b)
            || !self.r.as_ref().is_none_or(|r| r.iter().all(|row| finite(row)))
        {
            return Err(IoError::Invalid {
                msg: "all entries must be finite".into(),
            });
        }
        Ok(())
    }

    /// Materialize the domain objects described by the file.
    pub fn to_instance(&self) -> Result<ProblemInstance, IoError> {
        self.validate()?;
        let a = Matrix::from_rows(&self.a).map_err(invalid)?;
        let b = Vector::new(self.b.clone()).map_err(invalid)?;
        let system = LinearSystem::new(a, b).map_err(invalid)?;
        let encoding = RadixEncoding::new(
            system.num_vars(),
            self.encoding.low,
            self.encoding.high,
        )
        .map_err(invalid)?;
        let explicit_r = match &self.r {
            Some(rows) => Some(Matrix::from_rows(rows).map_err(invalid)?),
            None => None,
        };
        Ok(ProblemInstance {
            system,
            encoding,
            scale: self.scale.clone(),
            explicit_r,
        })
    }
}

/// A parsed and validated problem, ready for the builders.
#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub system: LinearSystem,
    pub encoding: RadixEncoding,
    pub scale: Option<Vec<f64>>,
    pub explicit_r: Option<Matrix>,
}

impl ProblemInstance {
    /// Congruence decomposition of the Gram matrix, either computed by
    /// elimination (honoring `scale`) or taken from the explicit `R`.
    pub fn decomposition(&self) -> Result<CongruenceDecomposition, LinalgError> {
        let g = crate::linalg::gram(self.system.a());
        match &self.explicit_r {
            Some(r) => CongruenceDecomposition::from_explicit(&g, r.clone()),
            None => crate::linalg::congruence_diagonalize(&g, self.scale.as_deref()),
        }
    }
}

pub fn read_problem(text: &str) -> Result<ProblemFile, IoError> {
    let file: ProblemFile = serde_json::from_str(text)?;
    file.validate()?;
    Ok(file)
}

pub fn write_problem(problem: &ProblemFile) -> String {
    let mut out = serde_json::to_string_pretty(problem).expect("problem files always serialize");
    out.push('\n');
    out
}

/// Which objective a stored QUBO came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Vanilla,
    Congruence,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelKind::Vanilla => write!(f, "vanilla"),
            ModelKind::Congruence => write!(f, "congruence"),
        }
    }
}

/// Encoding shape recorded alongside a QUBO so downstream tools can label
/// and group qubits by variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuboEncodingMeta {
    pub num_vars: usize,
    pub low: i32,
    pub high: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuboMeta {
    pub model: ModelKind,
    pub annihilate_pm: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub encoding: Option<QuboEncodingMeta>,
}

/// JSON carrier for a QUBO instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuboFile {
    pub n: usize,
    pub offset: f64,
    pub entries: Vec<(usize, usize, f64)>,
    pub metadata: QuboMeta,
}

fn entry_list(q: &QuboMatrix, include_zeros: bool) -> Vec<(usize, usize, f64)> {
    if include_zeros {
        let mut entries = Vec::with_capacity(q.n() * (q.n() + 1) / 2);
        for i in 0..q.n() {
            for j in i..q.n() {
                entries.push((i, j, q.coefficient(i, j)));
            }
        }
        entries
    } else {
        q.coefficients().map(|((i, j), c)| (i, j, c)).collect()
    }
}

/// Serialize to JSON. With `include_zeros` every upper-triangular pair is
/// written explicitly; otherwise only the stored nonzeros appear.
pub fn write_qubo_json(q: &QuboMatrix, meta: &QuboMeta, include_zeros: bool) -> String {
    let file = QuboFile {
        n: q.n(),
        offset: q.offset(),
        entries: entry_list(q, include_zeros),
        metadata: meta.clone(),
    };
    let mut out = serde_json::to_string_pretty(&file).expect("qubo files always serialize");
    out.push('\n');
    out
}

pub fn read_qubo_json(text: &str) -> Result<(QuboMatrix, QuboMeta), IoError> {
    let file: QuboFile = serde_json::from_str(text)?;
    let q = QuboMatrix::from_entries(file.n, file.offset, file.entries).map_err(|e| match e {
        QuboError::DuplicateEntry { i, j } => IoError::DuplicateEntry { i, j },
        other => invalid(other),
    })?;
    Ok((q, file.metadata))
}

/// Serialize to the flat coordinate format.
pub fn write_qubo_coord(q: &QuboMatrix, include_zeros: bool) -> String {
    let mut out = format!("qubo {} {}\n", q.n(), q.offset());
    for (i, j, c) in entry_list(q, include_zeros) {
        out.push_str(&format!("{i} {j} {c}\n"));
    }
    out
}

pub fn read_qubo_coord(text: &str) -> Result<QuboMatrix, IoError> {
    let parse_err = |line: usize, msg: String| IoError::Parse { line, msg };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 3 || fields[0] != "qubo" {
        return Err(parse_err(1, format!("expected 'qubo <n> <offset>', got '{header}'")));
    }
    let n: usize = fields[1]
        .parse()
        .map_err(|e| parse_err(1, format!("bad qubit count: {e}")))?;
    let offset: f64 = fields[2]
        .parse()
        .map_err(|e| parse_err(1, format!("bad offset: {e}")))?;

    let mut entries = Vec::new();
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(parse_err(line_no, format!("expected '<i> <j> <value>', got '{line}'")));
        }
        let i: usize = fields[0]
            .parse()
            .map_err(|e| parse_err(line_no, format!("bad row index: {e}")))?;
        let j: usize = fields[1]
            .parse()
            .map_err(|e| parse_err(line_no, format!("bad column index: {e}")))?;
        let c: f64 = fields[2]
            .parse()
            .map_err(|e| parse_err(line_no, format!("bad coefficient: {e}")))?;
        if i > j || j >= n {
            return Err(parse_err(
                line_no,
                format!("entry ({i}, {j}) outside the upper triangle of size {n}"),
            ));
        }
        entries.push((i, j, c));
    }
    QuboMatrix::from_entries(n, offset, entries).map_err(|e| match e {
        QuboError::DuplicateEntry { i, j } => IoError::DuplicateEntry { i, j },
        other => invalid(other),
    })
}

/// Read either serialization, sniffing the coordinate header.
pub fn read_qubo_any(text: &str) -> Result<(QuboMatrix, Option<QuboMeta>), IoError> {
    if text.trim_start().starts_with("qubo ") {
        Ok((read_qubo_coord(text)?, None))
    } else {
        let (q, meta) = read_qubo_json(text)?;
        Ok((q, Some(meta)))
    }
}


#[cfg(test)]
mod prop_tests {
    use super::*;
    use proptest::prelude::*;

    fn arbitrary_problem() -> impl Strategy<Value = ProblemFile> {
        (1usize..=4, 1usize..=3).prop_flat_map(|(rows, cols)| {
            let a = proptest::collection::vec(
                proptest::collection::vec(-1e6f64..1e6, cols),
                rows,
            );
            let b = proptest::collection::vec(-1e6f64..1e6, rows);
            let scale = proptest::option::of(proptest::collection::vec(0.01f64..10.0, cols));
            (a, b, scale, -3i32..=0, 0i32..=3).prop_map(|(a, b, scale, low, extra)| {
                ProblemFile {
                    a,
                    b,
                    encoding: EncodingSpec {
                        low,
                        high: low + extra,
                    },
                    scale,
                    r: None,
                }
            })
        })
    }

    fn arbitrary_qubo() -> impl Strategy<Value = QuboMatrix> {
        (1usize..=10).prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|i| (i..n).map(move |j| (i, j)))
                .collect();
            let len = pairs.len();
            (
                proptest::collection::vec(proptest::option::of(-1e3f64..1e3), len),
                -1e3f64..1e3,
            )
                .prop_map(move |(values, offset)| {
                    let entries = pairs
                        .iter()
                        .zip(values)
                        .filter_map(|(&(i, j), v)| v.map(|v| (i, j, v)))
                        .collect::<Vec<_>>();
                    QuboMatrix::from_entries(n, offset, entries).unwrap()
                })
        })
    }

    proptest! {
        #[test]
        fn problem_write_read_identity(file in arbitrary_problem()) {
            prop_assume!(file.validate().is_ok());
            let back = read_problem(&write_problem(&file)).unwrap();
            prop_assert_eq!(file, back);
        }

        #[test]
        fn qubo_write_read_identity(q in arbitrary_qubo(), zeros in proptest::bool::ANY) {
            let coord = read_qubo_coord(&write_qubo_coord(&q, zeros)).unwrap();
            prop_assert_eq!(&coord, &q);
            let meta = QuboMeta { model: ModelKind::Vanilla, annihilate_pm: false, encoding: None };
            let (json, _) = read_qubo_json(&write_qubo_json(&q, &meta, zeros)).unwrap();
            prop_assert_eq!(&json, &q);
        }
    }
}
