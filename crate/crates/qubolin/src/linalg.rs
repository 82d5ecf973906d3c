//! Dense real matrices and the congruence diagonalization behind the
//! simplified QUBO formulation.
//!
//! The central operation is [`congruence_diagonalize`]: given a symmetric
//! positive semidefinite matrix `M` (here always a Gram matrix `AᵀA`) it
//! produces a nonsingular upper-triangular `R` and a diagonal `D` with
//! `Rᵀ M R = D`. The construction is one sweep of symmetric Gaussian
//! elimination accumulated into `R`, followed by an optional per-column
//! scaling of `R` (which multiplies `d_i` by the square of the scale).

use std::fmt;

use thiserror::Error;

/// Relative tolerance used for symmetry checks, pivot classification and
/// diagonality verification. Scaled by the max-norm of the input matrix.
pub const REL_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("entry count {got} does not match a {rows}x{cols} matrix")]
    BadShape { rows: usize, cols: usize, got: usize },
    #[error("matrix and vector dimensions must be positive")]
    ZeroDim,
    #[error("non-finite entry at index {index}")]
    NonFinite { index: usize },
    #[error("ragged rows: row {row} has {got} entries, expected {expected}")]
    RaggedRows { row: usize, expected: usize, got: usize },
    #[error("dimension mismatch in {op}: expected {expected}, got {got}")]
    DimensionMismatch {
        op: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric: |m[{i}][{j}] - m[{j}][{i}]| = {delta:e}")]
    NotSymmetric { i: usize, j: usize, delta: f64 },
    #[error("matrix is not positive semidefinite: pivot {pivot:e} at column {index}")]
    NotPsd { index: usize, pivot: f64 },
    #[error("scale must hold {expected} strictly positive finite entries")]
    BadScale { expected: usize },
    #[error("R does not diagonalize M: |(R^T M R)[{i}][{j}]| = {off:e} exceeds tolerance")]
    NotDiagonalizing { i: usize, j: usize, off: f64 },
}

/// Shortest representation, switching to scientific notation where plain
/// decimal would be unreadable.
pub(crate) fn fmt_entry(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-4 || v.abs() >= 1e16) {
        format!("{v:e}")
    } else {
        format!("{v}")
    }
}

/// Dense row-major matrix of finite reals. Dimensions are always positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::ZeroDim);
        }
        if entries.len() != rows * cols {
            return Err(LinalgError::BadShape {
                rows,
                cols,
                got: entries.len(),
            });
        }
        if let Some(index) = entries.iter().position(|e| !e.is_finite()) {
            return Err(LinalgError::NonFinite { index });
        }
        Ok(Self {
            rows,
            cols,
            entries,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LinalgError> {
        if rows.is_empty() {
            return Err(LinalgError::ZeroDim);
        }
        let cols = rows[0].len();
        for (row, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(LinalgError::RaggedRows {
                    row,
                    expected: cols,
                    got: r.len(),
                });
            }
        }
        Self::new(
            rows.len(),
            cols,
            rows.iter().flatten().copied().collect(),
        )
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Self {
            rows: n,
            cols: n,
            entries,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.entries[i * self.cols + j] = v;
    }

    /// Row-major view of all entries.
    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, e| m.max(e.abs()))
    }

    pub fn transpose(&self) -> Matrix {
        let mut entries = vec![0.0; self.entries.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                entries[j * self.rows + i] = self.get(i, j);
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            entries,
        }
    }

    pub fn mul_vec(&self, v: &Vector) -> Result<Vector, LinalgError> {
        if v.dim() != self.cols {
            return Err(LinalgError::DimensionMismatch {
                op: "matrix-vector product",
                expected: self.cols,
                got: v.dim(),
            });
        }
        let out = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * v[j]).sum())
            .collect();
        Vector::new(out)
    }

    /// `Aᵀ v` without materializing the transpose.
    pub fn transpose_mul_vec(&self, v: &Vector) -> Result<Vector, LinalgError> {
        if v.dim() != self.rows {
            return Err(LinalgError::DimensionMismatch {
                op: "transposed matrix-vector product",
                expected: self.rows,
                got: v.dim(),
            });
        }
        let out = (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self.get(i, j) * v[i]).sum())
            .collect();
        Vector::new(out)
    }
}

impl fmt::Display for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cells: Vec<Vec<String>> = (0..self.rows)
            .map(|i| (0..self.cols).map(|j| fmt_entry(self.get(i, j))).collect())
            .collect();
        let width = cells
            .iter()
            .flatten()
            .map(|c| c.len())
            .max()
            .unwrap_or(1);
        for (i, row) in cells.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "[")?;
            for (j, c) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, "  ")?;
                }
                write!(f, "{c:>width$}")?;
            }
            write!(f, "]")?;
        }
        Ok(())
    }
}

/// Column vector of finite reals with positive dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    entries: Vec<f64>,
}

impl Vector {
    pub fn new(entries: Vec<f64>) -> Result<Self, LinalgError> {
        if entries.is_empty() {
            return Err(LinalgError::ZeroDim);
        }
        if let Some(index) = entries.iter().position(|e| !e.is_finite()) {
            return Err(LinalgError::NonFinite { index });
        }
        Ok(Self { entries })
    }

    pub fn ones(n: usize) -> Self {
        Self {
            entries: vec![1.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a * b)
            .sum()
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.entries[i]
    }
}

impl fmt::Display for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, e) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", fmt_entry(*e))?;
        }
        write!(f, "]")
    }
}

/// The system `Ax = b`. `A` may be rectangular; solutions are understood in
/// the least-squares sense.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    a: Matrix,
    b: Vector,
}

impl LinearSystem {
    pub fn new(a: Matrix, b: Vector) -> Result<Self, LinalgError> {
        if a.rows() != b.dim() {
            return Err(LinalgError::DimensionMismatch {
                op: "linear system",
                expected: a.rows(),
                got: b.dim(),
            });
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &Matrix {
        &self.a
    }

    pub fn b(&self) -> &Vector {
        &self.b
    }

    pub fn num_vars(&self) -> usize {
        self.a.cols()
    }
}

/// Result of diagonalizing a Gram matrix by congruence: `Rᵀ M R = diag(D)`.
///
/// `R` is upper triangular with column `j` scaled by `scale[j]`; rank
/// deficiency shows up as zero entries of `D`, with the offending columns
/// listed in `zero_pivots` rather than reported as an error.
#[derive(Debug, Clone, PartialEq)]
pub struct CongruenceDecomposition {
    r: Matrix,
    d: Vector,
    scale: Vector,
    zero_pivots: Vec<usize>,
}

impl CongruenceDecomposition {
    pub fn r(&self) -> &Matrix {
        &self.r
    }

    /// Diagonal entries of `Rᵀ M R`.
    pub fn d(&self) -> &Vector {
        &self.d
    }

    pub fn scale(&self) -> &Vector {
        &self.scale
    }

    /// Columns whose elimination pivot vanished (rank-deficient `M`).
    pub fn zero_pivots(&self) -> &[usize] {
        &self.zero_pivots
    }

    pub fn is_singular(&self) -> bool {
        !self.zero_pivots.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.d.dim()
    }

    /// Build a decomposition from an explicitly supplied `R`, verifying that
    /// it actually diagonalizes `m`. The scale is recorded as all ones since
    /// any scaling is already baked into `R`.
    pub fn from_explicit(m: &Matrix, r: Matrix) -> Result<Self, LinalgError> {
        let n = check_symmetric(m)?;
        if r.rows() != n || r.cols() != n {
            return Err(LinalgError::DimensionMismatch {
                op: "explicit congruence matrix",
                expected: n,
                got: r.rows().max(r.cols()),
            });
        }
        let tol = REL_TOL * m.max_abs();
        let t = congruence_transform(m, &r);
        let mut d = vec![0.0; n];
        let mut zero_pivots = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if i != j && t.get(i, j).abs() > tol {
                    return Err(LinalgError::NotDiagonalizing {
                        i,
                        j,
                        off: t.get(i, j).abs(),
                    });
                }
            }
            let di = t.get(i, i);
            if di < -tol {
                return Err(LinalgError::NotPsd {
                    index: i,
                    pivot: di,
                });
            }
            if di <= tol {
                zero_pivots.push(i);
            } else {
                d[i] = di;
            }
        }
        Ok(Self {
            r,
            d: Vector::new(d)?,
            scale: Vector::ones(n),
            zero_pivots,
        })
    }
}

/// `Rᵀ M R` by direct triple loop.
fn congruence_transform(m: &Matrix, r: &Matrix) -> Matrix {
    let n = m.rows();
    let mut mr = Matrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            let v = (0..n).map(|k| m.get(i, k) * r.get(k, j)).sum();
            mr.set(i, j, v);
        }
    }
    let mut out = Matrix::identity(n);
    for i in 0..n {
        for j in 0..n {
            let v = (0..n).map(|k| r.get(k, i) * mr.get(k, j)).sum();
            out.set(i, j, v);
        }
    }
    out
}

fn check_symmetric(m: &Matrix) -> Result<usize, LinalgError> {
    let n = m.rows();
    if m.cols() != n {
        return Err(LinalgError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let tol = REL_TOL * m.max_abs();
    for i in 0..n {
        for j in (i + 1)..n {
            let delta = (m.get(i, j) - m.get(j, i)).abs();
            if delta > tol {
                return Err(LinalgError::NotSymmetric { i, j, delta });
            }
        }
    }
    Ok(n)
}

/// Gram matrix `AᵀA`. Symmetric entrywise by construction: the upper
/// triangle is computed once and mirrored.
pub fn gram(a: &Matrix) -> Matrix {
    let n = a.cols();
    let mut g = Matrix::identity(n);
    for i in 0..n {
        for j in i..n {
            let v = (0..a.rows()).map(|k| a.get(k, i) * a.get(k, j)).sum();
            g.set(i, j, v);
            g.set(j, i, v);
        }
    }
    g
}

/// Diagonalize a symmetric PSD matrix by congruence.
///
/// Symmetric Gaussian elimination produces a unit-upper-triangular `R`
/// (accumulated from the elementary column operations) whose columns are
/// then multiplied by `scale` (default all ones). Pivots below `-tol` make
/// the matrix non-PSD and are an error; pivots within `tol` of zero are
/// skipped, leave their column untouched, and force `d_i = 0`.
pub fn congruence_diagonalize(
    m: &Matrix,
    scale: Option<&[f64]>,
) -> Result<CongruenceDecomposition, LinalgError> {
    let n = check_symmetric(m)?;
    let scale: Vec<f64> = match scale {
        Some(s) => {
            if s.len() != n || s.iter().any(|&x| !x.is_finite() || x <= 0.0) {
                return Err(LinalgError::BadScale { expected: n });
            }
            s.to_vec()
        }
        None => vec![1.0; n],
    };
    let tol = REL_TOL * m.max_abs();
    let mut w = m.clone();
    let mut r = Matrix::identity(n);
    let mut zero_pivots = Vec::new();

    for k in 0..n {
        let pivot = w.get(k, k);
        if pivot < -tol {
            return Err(LinalgError::NotPsd { index: k, pivot });
        }
        if pivot <= tol {
            zero_pivots.push(k);
            continue;
        }
        for j in (k + 1)..n {
            let f = w.get(k, j) / pivot;
            if f == 0.0 {
                continue;
            }
            // Congruence update W <- Eᵀ W E for E = I - f·e_k e_jᵀ:
            // column op then row op, in place.
            for i in 0..n {
                let v = w.get(i, j) - f * w.get(i, k);
                w.set(i, j, v);
            }
            for i in 0..n {
                let v = w.get(j, i) - f * w.get(k, i);
                w.set(j, i, v);
            }
            for i in 0..n {
                let v = r.get(i, j) - f * r.get(i, k);
                r.set(i, j, v);
            }
        }
    }

    let mut d = vec![0.0; n];
    for k in 0..n {
        if zero_pivots.contains(&k) {
            continue;
        }
        d[k] = w.get(k, k) * scale[k] * scale[k];
    }
    for j in 0..n {
        for i in 0..n {
            let v = r.get(i, j) * scale[j];
            r.set(i, j, v);
        }
    }

    Ok(CongruenceDecomposition {
        r,
        d: Vector::new(d)?,
        scale: Vector::new(scale)?,
        zero_pivots,
    })
}

/// Closed-form real minimizer of `‖Ax − b‖²` through the decomposition:
/// `y_i = (RᵀAᵀb)_i / d_i` (zero where the pivot vanished), `x = R y`.
/// Returns `(y, x)`.
pub fn solve_via_congruence(
    sys: &LinearSystem,
    dec: &CongruenceDecomposition,
) -> Result<(Vector, Vector), LinalgError> {
    let n = sys.num_vars();
    if dec.dim() != n {
        return Err(LinalgError::DimensionMismatch {
            op: "congruence solve",
            expected: n,
            got: dec.dim(),
        });
    }
    let atb = sys.a().transpose_mul_vec(sys.b())?;
    let c = dec.r().transpose_mul_vec(&atb)?;
    let y = Vector::new(
        (0..n)
            .map(|i| {
                let d = dec.d()[i];
                if d > 0.0 {
                    c[i] / d
                } else {
                    0.0
                }
            })
            .collect(),
    )?;
    let x = dec.r().mul_vec(&y)?;
    Ok((y, x))
}

/// `‖Ax − b‖²`.
pub fn residual_norm_sq(sys: &LinearSystem, x: &Vector) -> Result<f64, LinalgError> {
    let ax = sys.a().mul_vec(x)?;
    Ok((0..ax.dim()).map(|i| (ax[i] - sys.b()[i]).powi(2)).sum())
}
