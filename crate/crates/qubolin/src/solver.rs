//! Ground-state search: exact enumeration and seeded simulated annealing.
//!
//! Both solvers are deterministic. Annealing derives one child generator
//! per read from `(seed, read_index)`, so the parallel and serial paths
//! produce bit-identical results; enumeration merges partial scans with
//! order-independent reductions. The `parallel` feature (on by default)
//! runs reads and mask ranges on a rayon pool; [`brute_force_serial`] and
//! [`simulated_anneal_serial`] stay available either way for benchmarks and
//! agreement checks.

use std::collections::{BTreeMap, BinaryHeap, HashSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use thiserror::Error;

use crate::encoding::QubitAssignment;
use crate::qubo::QuboMatrix;

/// Assignments within this distance of the minimum count as ground states.
pub const GROUND_TOLERANCE: f64 = 1e-9;

/// Exhaustive enumeration refuses instances beyond this many qubits.
pub const MAX_EXHAUSTIVE_QUBITS: usize = 30;

const CHUNK_BITS: u32 = 14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("exhaustive enumeration is limited to {max} qubits, instance has {n}")]
    TooLarge { n: usize, max: usize },
    #[error("cannot anneal an empty instance")]
    EmptyQubo,
    #[error("invalid annealing parameters: {msg}")]
    InvalidParams { msg: String },
}

/// One distinct assignment with its energy and how often it was observed.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub assignment: QubitAssignment,
    pub energy: f64,
    pub occurrences: u64,
}

/// Records sorted by ascending energy, then lexicographic bits.
///
/// For the sampler the occurrences sum to `total_reads`; exhaustive solves
/// set `total_reads = 2^n` and list every assignment unless an excited-state
/// cap truncated the tail (ground states are never dropped).
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub records: Vec<SampleRecord>,
    pub ground_energy: f64,
    pub ground_states: Vec<QubitAssignment>,
    pub total_reads: u64,
}

/// Schedule and budget of one annealing run.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealParams {
    pub num_reads: u64,
    pub sweeps_per_read: usize,
    pub beta_initial: f64,
    pub beta_final: f64,
    pub seed: u64,
}

impl Default for AnnealParams {
    /// A cold quench: on block-diagonal instances single-flip dynamics
    /// descend without strict local traps, while densely coupled ones keep
    /// a trapped fraction, which is the contrast the compare command is
    /// built to expose. Slow schedules (e.g. 0.05 -> 5) wash that out.
    fn default() -> Self {
        Self {
            num_reads: 10_000,
            sweeps_per_read: 100,
            beta_initial: 1.0,
            beta_final: 20.0,
            seed: 42,
        }
    }
}

impl AnnealParams {
    fn validate(&self) -> Result<(), SolverError> {
        let fail = |msg: &str| {
            Err(SolverError::InvalidParams {
                msg: msg.to_string(),
            })
        };
        if self.num_reads == 0 {
            return fail("num_reads must be positive");
        }
        if self.sweeps_per_read == 0 {
            return fail("sweeps_per_read must be positive");
        }
        if !self.beta_initial.is_finite() || !self.beta_final.is_finite() {
            return fail("betas must be finite");
        }
        if self.beta_initial <= 0.0 {
            return fail("beta_initial must be positive");
        }
        if self.beta_initial >= self.beta_final {
            return fail("beta_initial must be below beta_final");
        }
        Ok(())
    }
}

/// Inverse temperatures interpolated geometrically over `sweeps` steps.
pub fn geometric_beta_schedule(beta_initial: f64, beta_final: f64, sweeps: usize) -> Vec<f64> {
    if sweeps == 1 {
        return vec![beta_final];
    }
    let log_start = beta_initial.ln();
    let step = (beta_final.ln() - log_start) / (sweeps - 1) as f64;
    (0..sweeps)
        .map(|i| (log_start + step * i as f64).exp())
        .collect()
}

/// Per-qubit view of the coefficients for O(degree) flip deltas.
struct Adjacency {
    diag: Vec<f64>,
    neighbors: Vec<Vec<(usize, f64)>>,
}

impl Adjacency {
    fn build(q: &QuboMatrix) -> Self {
        let n = q.n();
        let mut diag = vec![0.0; n];
        let mut neighbors = vec![Vec::new(); n];
        for ((i, j), c) in q.coefficients() {
            if i == j {
                diag[i] = c;
            } else {
                neighbors[i].push((j, c));
                neighbors[j].push((i, c));
            }
        }
        Self { diag, neighbors }
    }
}

/// Pair masks for O(nnz) energy of a mask-encoded assignment (n ≤ 64).
struct PairMasks {
    pairs: Vec<(u64, f64)>,
}

impl PairMasks {
    fn build(q: &QuboMatrix) -> Self {
        let pairs = q
            .coefficients()
            .map(|((i, j), c)| ((1u64 << i) | (1u64 << j), c))
            .collect();
        Self { pairs }
    }

    fn energy(&self, mask: u64) -> f64 {
        self.pairs
            .iter()
            .map(|&(pm, c)| if mask & pm == pm { c } else { 0.0 })
            .sum()
    }
}

/// Bits in lexicographic order as an integer key (bit 0 most significant).
fn lex_key(mask: u64, n: usize) -> u64 {
    if n == 0 {
        0
    } else {
        mask.reverse_bits() >> (64 - n)
    }
}

#[derive(PartialEq)]
struct HeapEntry {
    energy: f64,
    lex: u64,
    mask: u64,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.energy
            .total_cmp(&other.energy)
            .then(self.lex.cmp(&other.lex))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

/// Keeps the `cap` smallest entries; max-heap so the worst sits on top.
struct BoundedSelection {
    cap: usize,
    heap: BinaryHeap<HeapEntry>,
}

impl BoundedSelection {
    fn new(cap: usize) -> Self {
        Self {
            cap,
            heap: BinaryHeap::new(),
        }
    }

    fn push(&mut self, entry: HeapEntry) {
        if self.cap == 0 {
            return;
        }
        if self.heap.len() < self.cap {
            self.heap.push(entry);
        } else if entry < *self.heap.peek().expect("heap is nonempty") {
            self.heap.pop();
            self.heap.push(entry);
        }
    }

    fn merge(mut self, other: Self) -> Self {
        for entry in other.heap {
            self.push(entry);
        }
        self
    }
}

/// Enumerate all `2^n` assignments exactly, keeping every record.
pub fn brute_force(q: &QuboMatrix) -> Result<SolveResult, SolverError> {
    run_brute(q, None, cfg!(feature = "parallel"))
}

/// Exhaustive solve keeping all ground states but at most `max_excited`
/// higher-energy records. `total_reads` still reports `2^n`.
pub fn brute_force_capped(q: &QuboMatrix, max_excited: usize) -> Result<SolveResult, SolverError> {
    run_brute(q, Some(max_excited), cfg!(feature = "parallel"))
}

/// Single-threaded enumeration; kept public for benchmarks and for checking
/// that the parallel path returns identical results.
pub fn brute_force_serial(q: &QuboMatrix) -> Result<SolveResult, SolverError> {
    run_brute(q, None, false)
}

fn run_brute(
    q: &QuboMatrix,
    max_excited: Option<usize>,
    parallel: bool,
) -> Result<SolveResult, SolverError> {
    let n = q.n();
    if n > MAX_EXHAUSTIVE_QUBITS {
        return Err(SolverError::TooLarge {
            n,
            max: MAX_EXHAUSTIVE_QUBITS,
        });
    }
    let total: u64 = 1u64 << n;
    let pairs = PairMasks::build(q);

    let chunk_len = 1u64 << CHUNK_BITS.min(n as u32);
    let num_chunks = total.div_ceil(chunk_len) as usize;
    let chunk_range = |c: usize| {
        let start = c as u64 * chunk_len;
        start..(start + chunk_len).min(total)
    };

    let chunk_min = |c: usize| {
        chunk_range(c)
            .map(|m| pairs.energy(m))
            .fold(f64::INFINITY, f64::min)
    };
    #[cfg(feature = "parallel")]
    let ground_energy = if parallel {
        (0..num_chunks)
            .into_par_iter()
            .map(chunk_min)
            .reduce(|| f64::INFINITY, f64::min)
    } else {
        (0..num_chunks).map(chunk_min).fold(f64::INFINITY, f64::min)
    };
    #[cfg(not(feature = "parallel"))]
    let ground_energy = {
        let _ = parallel;
        (0..num_chunks).map(chunk_min).fold(f64::INFINITY, f64::min)
    };

    // Second pass: collect ground states plus the lowest excited records.
    let cap = max_excited.unwrap_or(usize::MAX);
    let scan_chunk = |mut acc: (Vec<(u64, f64)>, BoundedSelection),
                      c: usize|
     -> (Vec<(u64, f64)>, BoundedSelection) {
        for mask in chunk_range(c) {
            let energy = pairs.energy(mask);
            if energy <= ground_energy + GROUND_TOLERANCE {
                acc.0.push((mask, energy));
            } else {
                acc.1.push(HeapEntry {
                    energy,
                    lex: lex_key(mask, n),
                    mask,
                });
            }
        }
        acc
    };
    let new_acc = || (Vec::new(), BoundedSelection::new(cap));
    let merge_acc = |mut a: (Vec<(u64, f64)>, BoundedSelection),
                     b: (Vec<(u64, f64)>, BoundedSelection)| {
        a.0.extend(b.0);
        (a.0, a.1.merge(b.1))
    };

    #[cfg(feature = "parallel")]
    let (ground, excited) = if parallel {
        (0..num_chunks)
            .into_par_iter()
            .fold(new_acc, scan_chunk)
            .reduce(new_acc, merge_acc)
    } else {
        (0..num_chunks).fold(new_acc(), scan_chunk)
    };
    #[cfg(not(feature = "parallel"))]
    let (ground, excited) = {
        let _ = &merge_acc;
        (0..num_chunks).fold(new_acc(), scan_chunk)
    };

    let mut entries: Vec<(u64, f64)> = ground;
    entries.extend(excited.heap.into_iter().map(|e| (e.mask, e.energy)));
    entries.sort_unstable_by(|a, b| {
        a.1.total_cmp(&b.1).then(lex_key(a.0, n).cmp(&lex_key(b.0, n)))
    });

    let records: Vec<SampleRecord> = entries
        .iter()
        .map(|&(mask, energy)| SampleRecord {
            assignment: QubitAssignment::from_mask(mask, n),
            energy,
            occurrences: 1,
        })
        .collect();
    let ground_states = records
        .iter()
        .take_while(|r| r.energy <= ground_energy + GROUND_TOLERANCE)
        .map(|r| r.assignment.clone())
        .collect();

    Ok(SolveResult {
        records,
        ground_energy,
        ground_states,
        total_reads: total,
    })
}

fn anneal_one_read(adj: &Adjacency, schedule: &[f64], seed: u64, read: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(read);
    let n = adj.diag.len();
    let mut bits: Vec<u8> = (0..n).map(|_| u8::from(rng.gen_bool(0.5))).collect();
    for &beta in schedule {
        for k in 0..n {
            let mut field = adj.diag[k];
            for &(j, c) in &adj.neighbors[k] {
                field += c * f64::from(bits[j]);
            }
            let delta = if bits[k] == 0 { field } else { -field };
            if delta <= 0.0 || rng.gen::<f64>() < (-beta * delta).exp() {
                bits[k] ^= 1;
            }
        }
    }
    bits
}

/// Independent single-spin-flip Metropolis chains, one per read.
///
/// Each read starts from a uniformly random assignment and sweeps the qubits
/// in index order while the inverse temperature follows the geometric
/// schedule. Read `r` draws from a child generator keyed by `(seed, r)`,
/// which makes the result independent of how reads are distributed over
/// threads.
pub fn simulated_anneal(q: &QuboMatrix, params: &AnnealParams) -> Result<SolveResult, SolverError> {
    run_sa(q, params, cfg!(feature = "parallel"))
}

/// Single-threaded annealing; bit-identical to [`simulated_anneal`].
pub fn simulated_anneal_serial(
    q: &QuboMatrix,
    params: &AnnealParams,
) -> Result<SolveResult, SolverError> {
    run_sa(q, params, false)
}

fn run_sa(q: &QuboMatrix, params: &AnnealParams, parallel: bool) -> Result<SolveResult, SolverError> {
    if q.n() == 0 {
        return Err(SolverError::EmptyQubo);
    }
    params.validate()?;
    let adj = Adjacency::build(q);
    let schedule = geometric_beta_schedule(
        params.beta_initial,
        params.beta_final,
        params.sweeps_per_read,
    );

    let count_read = |mut acc: BTreeMap<Vec<u8>, u64>, r: u64| {
        let bits = anneal_one_read(&adj, &schedule, params.seed, r);
        *acc.entry(bits).or_insert(0) += 1;
        acc
    };
    let merge_counts = |mut a: BTreeMap<Vec<u8>, u64>, b: BTreeMap<Vec<u8>, u64>| {
        for (bits, count) in b {
            *a.entry(bits).or_insert(0) += count;
        }
        a
    };

    #[cfg(feature = "parallel")]
    let counts = if parallel {
        (0..params.num_reads)
            .into_par_iter()
            .fold(BTreeMap::new, count_read)
            .reduce(BTreeMap::new, merge_counts)
    } else {
        (0..params.num_reads).fold(BTreeMap::new(), count_read)
    };
    #[cfg(not(feature = "parallel"))]
    let counts = {
        let _ = (parallel, &merge_counts);
        (0..params.num_reads).fold(BTreeMap::new(), count_read)
    };

    // BTreeMap iteration is lexicographic; a stable sort by energy keeps
    // that order within ties.
    let mut records: Vec<SampleRecord> = counts
        .into_iter()
        .map(|(bits, occurrences)| {
            let assignment =
                QubitAssignment::new(bits).expect("annealer only produces 0/1 bits");
            let energy = q
                .energy(&assignment)
                .expect("assignment length matches the instance");
            SampleRecord {
                assignment,
                energy,
                occurrences,
            }
        })
        .collect();
    records.sort_by(|a, b| a.energy.total_cmp(&b.energy));

    let ground_energy = records
        .first()
        .map(|r| r.energy)
        .expect("at least one read");
    let ground_states = records
        .iter()
        .take_while(|r| r.energy <= ground_energy + GROUND_TOLERANCE)
        .map(|r| r.assignment.clone())
        .collect();

    Ok(SolveResult {
        records,
        ground_energy,
        ground_states,
        total_reads: params.num_reads,
    })
}

/// Fraction of reads that landed in `reference_ground`.
pub fn ground_hit_rate(result: &SolveResult, reference_ground: &[QubitAssignment]) -> f64 {
    let reference: HashSet<&QubitAssignment> = reference_ground.iter().collect();
    let hits: u64 = result
        .records
        .iter()
        .filter(|r| reference.contains(&r.assignment))
        .map(|r| r.occurrences)
        .sum();
    hits as f64 / result.total_reads as f64
}
