//! Turn a system of linear equations into QUBO instances and study them.
//!
//! A least-squares objective `‖Ax − b‖²` expands over a signed radix-2
//! encoding of the unknowns into an upper-triangular QUBO matrix. Two
//! formulations are supported: the direct expansion over `x`, whose matrix
//! couples every pair of qubits, and a simplified form obtained by
//! congruence-diagonalizing the Gram matrix `AᵀA` and expanding over
//! `y = R⁻¹x`, whose matrix is block diagonal by variable. The toolkit
//! builds both, finds ground states exactly or by seeded simulated
//! annealing, compares hit rates and sparsity, and reads/writes problem and
//! QUBO files (JSON plus a flat coordinate format).
//!
//! ```
//! use qubolin::{
//!     build_vanilla, brute_force, LinearSystem, Matrix, RadixEncoding,
//!     ReductionFlags, Vector,
//! };
//!
//! let sys = LinearSystem::new(
//!     Matrix::from_rows(&[vec![3.0, 1.0], vec![-1.0, 2.0]]).unwrap(),
//!     Vector::new(vec![-1.0, 5.0]).unwrap(),
//! )
//! .unwrap();
//! let enc = RadixEncoding::new(2, 0, 2).unwrap();
//! let q = build_vanilla(&sys, &enc, ReductionFlags::vanilla()).unwrap();
//! let result = brute_force(&q).unwrap();
//! assert_eq!(result.ground_states.len(), 42);
//! ```

pub mod encoding;
pub mod io;
pub mod linalg;
pub mod qubo;
pub mod report;
pub mod solver;

pub use encoding::{EncodingError, QubitAssignment, RadixEncoding};
pub use io::{
    read_problem, read_qubo_any, read_qubo_coord, read_qubo_json, write_problem,
    write_qubo_coord, write_qubo_json, EncodingSpec, IoError, ModelKind, ProblemFile,
    ProblemInstance, QuboEncodingMeta, QuboFile, QuboMeta,
};
pub use linalg::{
    congruence_diagonalize, gram, residual_norm_sq, solve_via_congruence,
    CongruenceDecomposition, LinalgError, LinearSystem, Matrix, Vector,
};
pub use qubo::{
    build_congruence, build_vanilla, QuboError, QuboMatrix, ReductionFlags, SparsityReport,
};
pub use report::{CompareReport, ModelReport, SolveKind, TableOptions};
pub use solver::{
    brute_force, brute_force_capped, brute_force_serial, ground_hit_rate, simulated_anneal,
    simulated_anneal_serial, AnnealParams, SampleRecord, SolveResult, SolverError,
    GROUND_TOLERANCE, MAX_EXHAUSTIVE_QUBITS,
};

/// Any error the pipeline can produce, for callers that mix the modules.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Encoding(#[from] EncodingError),
    #[error(transparent)]
    Qubo(#[from] QuboError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Io(#[from] IoError),
}
