//! End-to-end acceptance checks for the bundled 2x2 demo instance: golden
//! coefficient matrices, exact ground-state sets, the energy/residual
//! identity, sparsity and hit-rate comparisons, determinism, and file round
//! trips. Each test prints one PASS line; a failing assertion fails the
//! test (and withholds the line).

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qubolin::io::{
    read_problem, read_qubo_coord, write_problem, write_qubo_coord, EncodingSpec, ModelKind,
    ProblemFile, QuboMeta,
};
use qubolin::solver::{brute_force, ground_hit_rate, simulated_anneal, AnnealParams};
use qubolin::{
    build_congruence, build_vanilla, congruence_diagonalize, gram, residual_norm_sq,
    CongruenceDecomposition, LinearSystem, Matrix, QubitAssignment, QuboMatrix, RadixEncoding,
    ReductionFlags, Vector,
};

/// Upper triangle of the direct model's 12x12 coefficient matrix for the
/// demo system with encoding exponents 0..2 (rows below the diagonal zero).
const EXPECTED_VANILLA: [[f64; 12]; 12] = [
    [26., 40., 80., -20., -40., -80., 2., 4., 8., -2., -4., -8.],
    [0., 72., 160., -40., -80., -160., 4., 8., 16., -4., -8., -16.],
    [0., 0., 224., -80., -160., -320., 8., 16., 32., -8., -16., -32.],
    [0., 0., 0., -6., 40., 80., -2., -4., -8., 2., 4., 8.],
    [0., 0., 0., 0., 8., 160., -4., -8., -16., 4., 8., 16.],
    [0., 0., 0., 0., 0., 96., -8., -16., -32., 8., 16., 32.],
    [0., 0., 0., 0., 0., 0., -13., 20., 40., -10., -20., -40.],
    [0., 0., 0., 0., 0., 0., 0., -16., 80., -20., -40., -80.],
    [0., 0., 0., 0., 0., 0., 0., 0., 8., -40., -80., -160.],
    [0., 0., 0., 0., 0., 0., 0., 0., 0., 23., 20., 40.],
    [0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 56., 80.],
    [0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 152.],
];

/// Upper triangle of the congruence model's matrix (column scale 2/5,
/// annihilation on). Block diagonal with 3x3 blocks; the (5, 5) diagonal
/// cancels exactly.
const EXPECTED_CONGRUENCE: [[f64; 12]; 12] = [
    [8., 6.4, 12.8, 0., 0., 0., 0., 0., 0., 0., 0., 0.],
    [0., 19.2, 25.6, 0., 0., 0., 0., 0., 0., 0., 0., 0.],
    [0., 0., 51.2, 0., 0., 0., 0., 0., 0., 0., 0., 0.],
    [0., 0., 0., -4.8, 6.4, 12.8, 0., 0., 0., 0., 0., 0.],
    [0., 0., 0., 0., -6.4, 25.6, 0., 0., 0., 0., 0., 0.],
    [0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0.],
    [0., 0., 0., 0., 0., 0., -7.056, 3.136, 6.272, 0., 0., 0.],
    [0., 0., 0., 0., 0., 0., 0., -12.544, 12.544, 0., 0., 0.],
    [0., 0., 0., 0., 0., 0., 0., 0., -18.816, 0., 0., 0.],
    [0., 0., 0., 0., 0., 0., 0., 0., 0., 8.624, 3.136, 6.272],
    [0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 18.816, 12.544],
    [0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 0., 43.904],
];

/// Unique ground assignment of the congruence model.
const GROUND_BITS: [u8; 12] = [0, 0, 0, 0, 1, 0, 1, 0, 1, 0, 0, 0];

fn demo_system() -> LinearSystem {
    LinearSystem::new(
        Matrix::from_rows(&[vec![3.0, 1.0], vec![-1.0, 2.0]]).unwrap(),
        Vector::new(vec![-1.0, 5.0]).unwrap(),
    )
    .unwrap()
}

fn demo_encoding() -> RadixEncoding {
    RadixEncoding::new(2, 0, 2).unwrap()
}

fn demo_decomposition() -> CongruenceDecomposition {
    congruence_diagonalize(&gram(demo_system().a()), Some(&[0.4, 0.4])).unwrap()
}

fn demo_vanilla() -> QuboMatrix {
    build_vanilla(&demo_system(), &demo_encoding(), ReductionFlags::vanilla()).unwrap()
}

fn demo_congruence() -> QuboMatrix {
    build_congruence(
        &demo_system(),
        &demo_decomposition(),
        &demo_encoding(),
        ReductionFlags::congruence(),
    )
    .unwrap()
}

fn assert_matches_golden(q: &QuboMatrix, golden: &[[f64; 12]; 12]) {
    for i in 0..12 {
        for j in 0..12 {
            if j < i {
                continue;
            }
            let got = q.coefficient(i, j);
            let want = golden[i][j];
            assert!(
                (got - want).abs() <= 1e-9,
                "entry ({i}, {j}): got {got}, want {want}"
            );
        }
    }
}

#[test]
fn criterion_1_vanilla_matrix_is_golden() {
    let start = Instant::now();
    let q = demo_vanilla();
    assert_matches_golden(&q, &EXPECTED_VANILLA);
    assert_eq!(q.nnz(), 78);
    assert!((q.coefficient(0, 0) - 26.0).abs() <= 1e-9);
    assert!((q.coefficient(3, 3) - -6.0).abs() <= 1e-9);
    assert!((q.coefficient(11, 11) - 152.0).abs() <= 1e-9);
    assert!(start.elapsed().as_secs_f64() < 1.0);
    println!("PASS criterion 1: direct model reproduces all 78 golden entries within 1e-9");
}

#[test]
fn criterion_2_congruence_matrix_is_golden() {
    let start = Instant::now();
    let q = demo_congruence();
    assert_matches_golden(&q, &EXPECTED_CONGRUENCE);
    assert_eq!(q.nnz(), 23);
    // the vanished diagonal must be pruned from the sparse map, not stored
    assert!(!q.coefficients().any(|(k, _)| k == (5, 5)));
    assert!(start.elapsed().as_secs_f64() < 1.0);
    println!("PASS criterion 2: congruence model matches golden entries with exactly 23 stored nonzeros");
}

#[test]
fn criterion_3_congruence_identity_holds() {
    // independent check: naive R^T M R against the returned D
    let check = |m: &Matrix, dec: &CongruenceDecomposition| {
        let n = m.rows();
        let tol = 1e-9 * m.max_abs();
        let r = dec.r();
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for p in 0..n {
                    for q in 0..n {
                        acc += r.get(p, i) * m.get(p, q) * r.get(q, j);
                    }
                }
                if i == j {
                    assert!((acc - dec.d()[i]).abs() <= tol.max(1e-12));
                } else {
                    assert!(acc.abs() <= tol, "off-diagonal {acc} at ({i}, {j})");
                }
            }
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..1000 {
        let n = rng.gen_range(1usize..=8);
        let entries: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let m = gram(&Matrix::new(n, n, entries).unwrap());
        let scale: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..2.0)).collect();
        let dec = congruence_diagonalize(&m, Some(&scale)).unwrap();
        check(&m, &dec);
    }

    let m = gram(demo_system().a());
    let dec = congruence_diagonalize(&m, Some(&[0.4, 0.4])).unwrap();
    check(&m, &dec);
    let expected_r = [[0.4, -0.04], [0.0, 0.4]];
    for i in 0..2 {
        for j in 0..2 {
            assert!(
                (dec.r().get(i, j) - expected_r[i][j]).abs() <= 1e-15,
                "R[{i}][{j}] = {}",
                dec.r().get(i, j)
            );
        }
    }
    println!("PASS criterion 3: R^T (A^T A) R diagonal within 1e-9 on 1000 random PSD matrices; demo R recovered");
}

#[test]
fn criterion_4_ground_state_degeneracy() {
    let start = Instant::now();
    let enc = demo_encoding();

    let vanilla = brute_force(&demo_vanilla()).unwrap();
    assert!((vanilla.ground_energy - -26.0).abs() <= 1e-9);
    assert_eq!(vanilla.ground_states.len(), 42);
    for g in &vanilla.ground_states {
        let x = enc.decode(g).unwrap();
        assert!((x[0] - -1.0).abs() <= 1e-12 && (x[1] - 2.0).abs() <= 1e-12);
    }

    let congruence = brute_force(&demo_congruence()).unwrap();
    assert!((congruence.ground_energy - -26.0).abs() <= 1e-9);
    assert_eq!(congruence.ground_states.len(), 1);
    assert_eq!(congruence.ground_states[0].bits(), &GROUND_BITS);

    assert!(start.elapsed().as_secs_f64() < 1.0);
    println!("PASS criterion 4: 42-fold degenerate direct ground set vs unique congruence ground state");
}

#[test]
fn criterion_5_energy_equals_residual() {
    let sys = demo_system();
    let enc = demo_encoding();
    let q = demo_vanilla();
    for mask in 0..(1u64 << 12) {
        let bits = QubitAssignment::from_mask(mask, 12);
        let total = q.total_objective(&bits).unwrap();
        let x = enc.decode(&bits).unwrap();
        let residual = residual_norm_sq(&sys, &x).unwrap();
        assert!(
            (total - residual).abs() <= 1e-9,
            "assignment {mask}: energy+offset {total} vs residual {residual}"
        );
    }
    println!("PASS criterion 5: energy + offset equals |Ax - b|^2 on all 4096 assignments");
}

#[test]
fn criterion_6_sparsity_ratio() {
    let vanilla = demo_vanilla().sparsity_report();
    let congruence = demo_congruence().sparsity_report();
    assert_eq!(vanilla.nnz, 78);
    assert_eq!(congruence.nnz, 23);
    assert_eq!(congruence.bound, 24);
    let ratio = congruence.nnz as f64 / vanilla.nnz as f64;
    assert!(ratio < 1.0 / 3.0, "ratio {ratio}");
    println!("PASS criterion 6: nnz ratio 23/78 < 1/3");
}

#[test]
fn criterion_7_hit_rate_ordering() {
    let start = Instant::now();
    let vanilla = demo_vanilla();
    let congruence = demo_congruence();
    let vanilla_ground = brute_force(&vanilla).unwrap().ground_states;
    let congruence_ground = brute_force(&congruence).unwrap().ground_states;

    let mut vanilla_mean = 0.0;
    let mut congruence_mean = 0.0;
    for seed in 0..5 {
        let params = AnnealParams {
            num_reads: 10_000,
            sweeps_per_read: 100,
            beta_initial: 1.0,
            beta_final: 20.0,
            seed,
        };
        let v = simulated_anneal(&vanilla, &params).unwrap();
        let c = simulated_anneal(&congruence, &params).unwrap();
        vanilla_mean += ground_hit_rate(&v, &vanilla_ground) / 5.0;
        congruence_mean += ground_hit_rate(&c, &congruence_ground) / 5.0;
    }
    assert!(vanilla_mean > 0.0);
    assert!(congruence_mean > 0.0);
    assert!(
        congruence_mean > vanilla_mean,
        "congruence {congruence_mean} vs vanilla {vanilla_mean}"
    );
    assert!(start.elapsed().as_secs_f64() < 30.0);
    println!(
        "PASS criterion 7: mean hit rate congruence {:.4} > vanilla {:.4} over 5 seeds",
        congruence_mean, vanilla_mean
    );
}

#[test]
fn criterion_8_compare_is_deterministic() {
    let exe = env!("CARGO_BIN_EXE_qubolin");
    let dir = tempfile::tempdir().unwrap();
    let problem = dir.path().join("demo.json");
    std::fs::write(
        &problem,
        r#"{"A": [[3, 1], [-1, 2]], "b": [-1, 5], "encoding": {"low": 0, "high": 2}, "scale": [0.4, 0.4]}"#,
    )
    .unwrap();
    let run = || {
        let out = std::process::Command::new(exe)
            .args([
                "compare",
                problem.to_str().unwrap(),
                "--reads",
                "500",
                "--sweeps",
                "50",
                "--trials",
                "2",
                "--seed",
                "7",
            ])
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        (out.stdout, out.stderr)
    };
    let first = run();
    let second = run();
    assert_eq!(first, second, "reports differ between identical runs");
    println!("PASS criterion 8: compare output is byte-identical across runs with the same seed");
}

#[test]
fn criterion_9_file_round_trips() {
    // demo instance
    let demo = ProblemFile {
        a: vec![vec![3.0, 1.0], vec![-1.0, 2.0]],
        b: vec![-1.0, 5.0],
        encoding: EncodingSpec { low: 0, high: 2 },
        scale: Some(vec![0.4, 0.4]),
        r: None,
    };
    assert_eq!(read_problem(&write_problem(&demo)).unwrap(), demo);

    let q = demo_congruence();
    let meta = QuboMeta {
        model: ModelKind::Congruence,
        annihilate_pm: true,
        encoding: None,
    };
    let sparse = write_qubo_coord(&q, false);
    assert_eq!(sparse.lines().count() - 1, 23);
    let dense = write_qubo_coord(&q, true);
    assert_eq!(dense.lines().count() - 1, 78);
    assert_eq!(read_qubo_coord(&sparse).unwrap(), q);
    assert_eq!(read_qubo_coord(&dense).unwrap(), q);
    let json = qubolin::write_qubo_json(&q, &meta, false);
    assert_eq!(qubolin::read_qubo_json(&json).unwrap(), (q, meta));

    // random instances
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..100 {
        let rows = rng.gen_range(1usize..=4);
        let cols = rng.gen_range(1usize..=3);
        let low = rng.gen_range(-3i32..=0);
        let problem = ProblemFile {
            a: (0..rows)
                .map(|_| (0..cols).map(|_| rng.gen_range(-1e3..1e3)).collect())
                .collect(),
            b: (0..rows).map(|_| rng.gen_range(-1e3..1e3)).collect(),
            encoding: EncodingSpec {
                low,
                high: low + rng.gen_range(0i32..=3),
            },
            scale: if rng.gen_bool(0.5) {
                Some((0..cols).map(|_| rng.gen_range(0.1..4.0)).collect())
            } else {
                None
            },
            r: None,
        };
        assert_eq!(read_problem(&write_problem(&problem)).unwrap(), problem);

        let n = rng.gen_range(1usize..=10);
        let mut entries = Vec::new();
        for i in 0..n {
            for j in i..n {
                if rng.gen_bool(0.6) {
                    entries.push((i, j, rng.gen_range(-1e3..1e3)));
                }
            }
        }
        let q = QuboMatrix::from_entries(n, rng.gen_range(-10.0..10.0), entries).unwrap();
        let include_zeros = rng.gen_bool(0.5);
        assert_eq!(read_qubo_coord(&write_qubo_coord(&q, include_zeros)).unwrap(), q);
        let meta = QuboMeta {
            model: ModelKind::Vanilla,
            annihilate_pm: false,
            encoding: None,
        };
        let (back, _) = qubolin::read_qubo_json(&qubolin::write_qubo_json(&q, &meta, include_zeros))
            .unwrap();
        assert_eq!(back, q);
    }
    println!("PASS criterion 9: problem and QUBO files round-trip on the demo and 100 random instances");
}
