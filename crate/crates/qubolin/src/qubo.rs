//! QUBO construction for linear systems.
//!
//! Two builders expand a least-squares objective over the radix-2 encoding:
//!
//! * [`build_vanilla`] — `xᵀ(AᵀA)x − 2bᵀAx` directly over the encoding of
//!   `x`; couples every pair of qubits whose variables meet in `AᵀA`.
//! * [`build_congruence`] — `yᵀDy − 2(bᵀAR)y` over the encoding of
//!   `y = R⁻¹x`; `D` diagonal means qubits of different variables never
//!   couple, so the matrix is block diagonal by variable.
//!
//! Squared qubits always fold onto the diagonal (`q² = q` on {0,1}); the
//! annihilation rule `q⁺q⁻ = 0` inside a variable optionally drops the
//! cross-sign terms. Both matrices carry the constant offset `bᵀb`
//! separating QUBO energy from the true residual.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::encoding::{QubitAssignment, RadixEncoding};
use crate::linalg::{gram, CongruenceDecomposition, LinearSystem};

/// Coefficients whose magnitude falls below this fraction of the largest one
/// are treated as exact cancellations and pruned from the sparse map.
pub const PRUNE_REL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuboError {
    #[error("dimension mismatch in {op}: expected {expected}, got {got}")]
    DimensionMismatch {
        op: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("entry ({i}, {j}) outside upper triangle of size {n}")]
    IndexOutOfRange { i: usize, j: usize, n: usize },
    #[error("duplicate entry ({i}, {j})")]
    DuplicateEntry { i: usize, j: usize },
    #[error("non-finite coefficient at ({i}, {j})")]
    NonFinite { i: usize, j: usize },
    #[error("fold_squares cannot be disabled: q^2 = q is what makes the matrix quadratic-free")]
    UnsupportedReduction,
}

/// Which reduction rules the builders apply while expanding the objective.
///
/// `fold_squares` must stay enabled; it is kept as a field so the applied
/// rules are visible in one place. `annihilate_pm` drops the plus/minus
/// cross terms inside each variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReductionFlags {
    pub fold_squares: bool,
    pub annihilate_pm: bool,
}

impl ReductionFlags {
    /// Defaults for the direct model: no annihilation.
    pub fn vanilla() -> Self {
        Self {
            fold_squares: true,
            annihilate_pm: false,
        }
    }

    /// Defaults for the congruence model: annihilation on.
    pub fn congruence() -> Self {
        Self {
            fold_squares: true,
            annihilate_pm: true,
        }
    }

    fn require_fold(self) -> Result<(), QuboError> {
        if self.fold_squares {
            Ok(())
        } else {
            Err(QuboError::UnsupportedReduction)
        }
    }
}

/// Sparse upper-triangular QUBO matrix plus constant offset.
///
/// Diagonal entries hold the linear terms. The map never stores zero
/// coefficients; explicit zeros exist only in exported files.
#[derive(Debug, Clone, PartialEq)]
pub struct QuboMatrix {
    n: usize,
    coeffs: BTreeMap<(usize, usize), f64>,
    offset: f64,
}

impl QuboMatrix {
    pub fn new(n: usize, offset: f64) -> Self {
        Self {
            n,
            coeffs: BTreeMap::new(),
            offset,
        }
    }

    /// Build from an entry list, validating indices and rejecting duplicate
    /// keys. Entries that are exactly zero are dropped.
    pub fn from_entries(
        n: usize,
        offset: f64,
        entries: impl IntoIterator<Item = (usize, usize, f64)>,
    ) -> Result<Self, QuboError> {
        let mut coeffs = BTreeMap::new();
        for (i, j, c) in entries {
            if i > j || j >= n {
                return Err(QuboError::IndexOutOfRange { i, j, n });
            }
            if !c.is_finite() {
                return Err(QuboError::NonFinite { i, j });
            }
            if coeffs.insert((i, j), c).is_some() {
                return Err(QuboError::DuplicateEntry { i, j });
            }
        }
        coeffs.retain(|_, c| *c != 0.0);
        Ok(Self { n, coeffs, offset })
    }

    fn from_map_pruned(n: usize, offset: f64, map: BTreeMap<(usize, usize), f64>) -> Self {
        let max_abs = map.values().fold(0.0f64, |m, c| m.max(c.abs()));
        let threshold = PRUNE_REL_TOL * max_abs;
        let mut coeffs = map;
        coeffs.retain(|_, c| *c != 0.0 && c.abs() >= threshold);
        Self { n, coeffs, offset }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn nnz(&self) -> usize {
        self.coeffs.len()
    }

    /// Stored coefficient at `(i, j)` in either index order; 0 when absent.
    pub fn coefficient(&self, i: usize, j: usize) -> f64 {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.coeffs.get(&key).copied().unwrap_or(0.0)
    }

    /// Nonzero coefficients in ascending `(i, j)` order.
    pub fn coefficients(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.coeffs.iter().map(|(&k, &c)| (k, c))
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.coeffs.values().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// `Σ_{i≤j} c_ij q_i q_j`, without the offset.
    pub fn energy(&self, q: &QubitAssignment) -> Result<f64, QuboError> {
        if q.len() != self.n {
            return Err(QuboError::DimensionMismatch {
                op: "energy",
                expected: self.n,
                got: q.len(),
            });
        }
        let bits = q.bits();
        Ok(self
            .coeffs
            .iter()
            .map(|(&(i, j), &c)| {
                if bits[i] == 1 && bits[j] == 1 {
                    c
                } else {
                    0.0
                }
            })
            .sum())
    }

    /// Energy plus the offset; equals `‖Ax − b‖²` of the decoded point when
    /// no reduction dropped a nonvanishing term.
    pub fn total_objective(&self, q: &QubitAssignment) -> Result<f64, QuboError> {
        Ok(self.energy(q)? + self.offset)
    }

    /// Count stored nonzeros and detect block structure from the coefficient
    /// support: a block boundary sits wherever no coupling spans it.
    pub fn sparsity_report(&self) -> SparsityReport {
        let n = self.n;
        let mut reach: Vec<usize> = (0..n).collect();
        for &(i, j) in self.coeffs.keys() {
            if j > reach[i] {
                reach[i] = j;
            }
        }
        let mut block_sizes = Vec::new();
        let mut start = 0;
        while start < n {
            let mut end = reach[start];
            let mut t = start;
            while t <= end {
                if reach[t] > end {
                    end = reach[t];
                }
                t += 1;
            }
            block_sizes.push(end - start + 1);
            start = end + 1;
        }
        let bound = block_sizes.iter().map(|b| b * (b + 1) / 2).sum();
        SparsityReport {
            nnz: self.coeffs.len(),
            bound,
            dense_bound: n * (n + 1) / 2,
            block_sizes,
        }
    }
}

/// Nonzero count against the upper-triangular bound of the detected blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsityReport {
    pub nnz: usize,
    /// `Σ b(b+1)/2` over detected blocks; equals `dense_bound` for a matrix
    /// with full coupling support.
    pub bound: usize,
    pub dense_bound: usize,
    pub block_sizes: Vec<usize>,
}

fn accumulate(map: &mut BTreeMap<(usize, usize), f64>, i: usize, j: usize, c: f64) {
    let key = if i <= j { (i, j) } else { (j, i) };
    *map.entry(key).or_insert(0.0) += c;
}

fn check_vars(op: &'static str, expected: usize, enc: &RadixEncoding) -> Result<(), QuboError> {
    if enc.num_vars() != expected {
        return Err(QuboError::DimensionMismatch {
            op,
            expected,
            got: enc.num_vars(),
        });
    }
    Ok(())
}

/// Expand `xᵀ(AᵀA)x − 2bᵀAx` over the encoding of `x`; offset `bᵀb`.
pub fn build_vanilla(
    sys: &LinearSystem,
    enc: &RadixEncoding,
    flags: ReductionFlags,
) -> Result<QuboMatrix, QuboError> {
    flags.require_fold()?;
    let nv = sys.num_vars();
    check_vars("vanilla build", nv, enc)?;
    let g = gram(sys.a());
    let atb = sys
        .a()
        .transpose_mul_vec(sys.b())
        .expect("system dimensions are validated on construction");
    let w = enc.weights_per_var();
    let per = w.len();
    let mut map = BTreeMap::new();

    for vi in 0..nv {
        let base_i = vi * per;
        let g_ii = g.get(vi, vi);
        let lin = -2.0 * atb[vi];
        for si in 0..per {
            accumulate(
                &mut map,
                base_i + si,
                base_i + si,
                g_ii * w[si] * w[si] + lin * w[si],
            );
            for sj in (si + 1)..per {
                if flags.annihilate_pm && (w[si] > 0.0) != (w[sj] > 0.0) {
                    continue;
                }
                accumulate(&mut map, base_i + si, base_i + sj, 2.0 * g_ii * w[si] * w[sj]);
            }
        }
        for vj in (vi + 1)..nv {
            let g_ij = g.get(vi, vj);
            if g_ij == 0.0 {
                continue;
            }
            let base_j = vj * per;
            for si in 0..per {
                for sj in 0..per {
                    accumulate(
                        &mut map,
                        base_i + si,
                        base_j + sj,
                        2.0 * g_ij * w[si] * w[sj],
                    );
                }
            }
        }
    }

    Ok(QuboMatrix::from_map_pruned(
        enc.num_qubits(),
        sys.b().dot(sys.b()),
        map,
    ))
}

/// Expand `yᵀDy − 2(bᵀAR)y` over the encoding of `y`; offset `bᵀb`.
/// `D` diagonal means no cross-variable couplings ever appear.
pub fn build_congruence(
    sys: &LinearSystem,
    dec: &CongruenceDecomposition,
    enc: &RadixEncoding,
    flags: ReductionFlags,
) -> Result<QuboMatrix, QuboError> {
    flags.require_fold()?;
    let nv = sys.num_vars();
    check_vars("congruence build", nv, enc)?;
    if dec.dim() != nv {
        return Err(QuboError::DimensionMismatch {
            op: "congruence build",
            expected: nv,
            got: dec.dim(),
        });
    }
    let atb = sys
        .a()
        .transpose_mul_vec(sys.b())
        .expect("system dimensions are validated on construction");
    let btar = dec
        .r()
        .transpose_mul_vec(&atb)
        .expect("decomposition dimension checked above");
    let w = enc.weights_per_var();
    let per = w.len();
    let mut map = BTreeMap::new();

    for vi in 0..nv {
        let base = vi * per;
        let d_i = dec.d()[vi];
        let lin = -2.0 * btar[vi];
        for si in 0..per {
            accumulate(
                &mut map,
                base + si,
                base + si,
                d_i * w[si] * w[si] + lin * w[si],
            );
            for sj in (si + 1)..per {
                if flags.annihilate_pm && (w[si] > 0.0) != (w[sj] > 0.0) {
                    continue;
                }
                accumulate(&mut map, base + si, base + sj, 2.0 * d_i * w[si] * w[sj]);
            }
        }
    }

    Ok(QuboMatrix::from_map_pruned(
        enc.num_qubits(),
        sys.b().dot(sys.b()),
        map,
    ))
}


#[cfg(test)]
mod prop_tests {
    use super::*;
    use crate::linalg::{residual_norm_sq, Matrix, Vector};
    use proptest::prelude::*;

    fn small_system() -> impl Strategy<Value = (LinearSystem, RadixEncoding)> {
        (1usize..=2, 1usize..=2, 0i32..=1).prop_flat_map(|(rows, cols, high)| {
            let entries = proptest::collection::vec(-3.0f64..3.0, rows * cols);
            let rhs = proptest::collection::vec(-3.0f64..3.0, rows);
            (entries, rhs).prop_map(move |(e, b)| {
                let sys = LinearSystem::new(
                    Matrix::new(rows, cols, e).unwrap(),
                    Vector::new(b).unwrap(),
                )
                .unwrap();
                let enc = RadixEncoding::new(cols, 0, high).unwrap();
                (sys, enc)
            })
        })
    }

    proptest! {
        #[test]
        fn vanilla_total_equals_residual((sys, enc) in small_system()) {
            let q = build_vanilla(&sys, &enc, ReductionFlags::vanilla()).unwrap();
            let n = enc.num_qubits();
            for mask in 0..(1u64 << n) {
                let bits = QubitAssignment::from_mask(mask, n);
                let x = enc.decode(&bits).unwrap();
                let total = q.total_objective(&bits).unwrap();
                let residual = residual_norm_sq(&sys, &x).unwrap();
                prop_assert!((total - residual).abs() <= 1e-9);
            }
        }
    }
}
