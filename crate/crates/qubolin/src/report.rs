//! Occurrence tables and the two-model comparison report.
//!
//! Tables mirror the usual annealer-output layout: one column per qubit,
//! the energy, and one occurrence column per trial. When the ground states
//! factor into independent per-variable pattern sets, the rows collapse to
//! one per leading-variable pattern with the other variables shown as
//! "all k combinations".

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::encoding::{QubitAssignment, RadixEncoding};
use crate::linalg::{
    residual_norm_sq, CongruenceDecomposition, LinearSystem, Vector,
};
use crate::qubo::{build_congruence, build_vanilla, QuboMatrix, ReductionFlags};
use crate::solver::{
    brute_force_capped, simulated_anneal, AnnealParams, SolveResult, GROUND_TOLERANCE,
};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveKind {
    Exhaustive,
    Sampled,
}

#[derive(Debug, Clone)]
pub struct TableOptions {
    pub collapse: bool,
    pub max_rows: usize,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self {
            collapse: true,
            max_rows: 25,
        }
    }
}

struct MergedRow {
    assignment: QubitAssignment,
    energy: f64,
    occurrences: Vec<u64>,
}

fn merge_results(results: &[SolveResult]) -> Vec<MergedRow> {
    let trials = results.len();
    let mut merged: BTreeMap<QubitAssignment, (f64, Vec<u64>)> = BTreeMap::new();
    for (t, result) in results.iter().enumerate() {
        for record in &result.records {
            let entry = merged
                .entry(record.assignment.clone())
                .or_insert_with(|| (record.energy, vec![0; trials]));
            entry.1[t] += record.occurrences;
        }
    }
    let mut rows: Vec<MergedRow> = merged
        .into_iter()
        .map(|(assignment, (energy, occurrences))| MergedRow {
            assignment,
            energy,
            occurrences,
        })
        .collect();
    rows.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    rows
}

/// Sum of occurrences per trial column over every merged record; for the
/// sampler this must equal the read count.
pub fn occurrence_totals(results: &[SolveResult]) -> Vec<u64> {
    results
        .iter()
        .map(|r| r.records.iter().map(|rec| rec.occurrences).sum())
        .collect()
}

fn qubit_labels(n: usize, enc: Option<&RadixEncoding>) -> Vec<Vec<String>> {
    match enc {
        Some(enc) if enc.num_qubits() == n => (0..enc.num_vars())
            .map(|v| {
                (0..enc.qubits_per_var())
                    .map(|p| format!("q{}{}", v + 1, p + 1))
                    .collect()
            })
            .collect(),
        _ => vec![(0..n).map(|i| format!("q{}", i + 1)).collect()],
    }
}

fn group_header(labels: &[Vec<String>]) -> String {
    labels
        .iter()
        .map(|group| group.join(" "))
        .collect::<Vec<_>>()
        .join("   ")
}

fn bits_cell(bits: &[u8], labels: &[Vec<String>]) -> String {
    let mut out = Vec::new();
    let mut idx = 0;
    for group in labels {
        let cells: Vec<String> = group
            .iter()
            .map(|label| {
                let cell = format!("{:>width$}", bits[idx], width = label.len());
                idx += 1;
                cell
            })
            .collect();
        out.push(cells.join(" "));
    }
    out.join("   ")
}

/// A display row where some variable groups may be collapsed.
struct CollapsedRow {
    leading: Vec<u8>,
    collapsed: Vec<Option<usize>>, // per non-leading variable: Some(k) if collapsed
    patterns: Vec<Vec<u8>>,        // singleton patterns for non-collapsed variables
    energy: f64,
    occurrences: Vec<u64>,
}

fn collapsed_bits_cell(row: &CollapsedRow, labels: &[Vec<String>]) -> String {
    let mut out = vec![bits_cell(&row.leading, &labels[..1])];
    let mut pattern_idx = 0;
    for (v, k) in row.collapsed.iter().enumerate() {
        let group = &labels[v + 1];
        match k {
            Some(k) => {
                let width = group.iter().map(|l| l.len()).sum::<usize>() + group.len() - 1;
                out.push(format!("{:<width$}", format!("all {k} combinations")));
            }
            None => {
                out.push(bits_cell(&row.patterns[pattern_idx], &labels[v + 1..v + 2]));
                pattern_idx += 1;
            }
        }
    }
    out.join("   ")
}

/// Try to factor the ground rows into per-variable pattern sets. Returns
/// collapsed rows keyed by the leading variable's pattern, or `None` when
/// the set is not a cross product (or there is nothing to collapse).
fn collapse_ground_rows(
    rows: &[&MergedRow],
    enc: &RadixEncoding,
    trials: usize,
) -> Option<Vec<CollapsedRow>> {
    let nv = enc.num_vars();
    if nv < 2 || rows.is_empty() {
        return None;
    }
    let per = enc.qubits_per_var();
    let mut sets: Vec<BTreeSet<Vec<u8>>> = vec![BTreeSet::new(); nv];
    for row in rows {
        for v in 0..nv {
            sets[v].insert(row.assignment.bits()[v * per..(v + 1) * per].to_vec());
        }
    }
    let product: usize = sets.iter().map(|s| s.len()).product();
    if product != rows.len() || sets[1..].iter().all(|s| s.len() == 1) {
        return None;
    }

    let mut grouped: BTreeMap<Vec<u8>, (f64, Vec<u64>)> = BTreeMap::new();
    for row in rows {
        let leading = row.assignment.bits()[..per].to_vec();
        let entry = grouped
            .entry(leading)
            .or_insert_with(|| (row.energy, vec![0; trials]));
        entry.0 = entry.0.min(row.energy);
        for (t, occ) in row.occurrences.iter().enumerate() {
            entry.1[t] += occ;
        }
    }
    let collapsed: Vec<Option<usize>> = sets[1..]
        .iter()
        .map(|s| if s.len() > 1 { Some(s.len()) } else { None })
        .collect();
    let patterns: Vec<Vec<u8>> = sets[1..]
        .iter()
        .filter(|s| s.len() == 1)
        .map(|s| s.iter().next().expect("singleton set").clone())
        .collect();
    Some(
        grouped
            .into_iter()
            .map(|(leading, (energy, occurrences))| CollapsedRow {
                leading,
                collapsed: collapsed.clone(),
                patterns: patterns.clone(),
                energy,
                occurrences,
            })
            .collect(),
    )
}

fn pad_table(header: Vec<String>, rows: Vec<Vec<String>>) -> String {
    let cols = header.len();
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in &rows {
        for (c, cell) in row.iter().enumerate() {
            widths[c] = widths[c].max(cell.len());
        }
    }
    let mut out = String::new();
    let render_row = |cells: &[String]| {
        let mut line = String::new();
        for c in 0..cols {
            if c > 0 {
                line.push_str(" | ");
            }
            let cell = cells.get(c).map(String::as_str).unwrap_or("");
            if c == 0 {
                line.push_str(&format!("{:<width$}", cell, width = widths[c]));
            } else {
                line.push_str(&format!("{:>width$}", cell, width = widths[c]));
            }
        }
        line.trim_end().to_string()
    };
    out.push_str(&render_row(&header));
    out.push('\n');
    for row in rows {
        out.push_str(&render_row(&row));
        out.push('\n');
    }
    out
}

/// Render the energy-sorted occurrence table plus its summary lines.
pub fn render_solve_report(
    results: &[SolveResult],
    labels: &[String],
    enc: Option<&RadixEncoding>,
    kind: SolveKind,
    opts: &TableOptions,
) -> String {
    assert_eq!(results.len(), labels.len());
    let n = results[0].records[0].assignment.len();
    let trials = results.len();
    let merged = merge_results(results);
    let ground_energy = merged
        .first()
        .map(|r| r.energy)
        .unwrap_or(f64::INFINITY);
    let is_ground = |e: f64| e <= ground_energy + GROUND_TOLERANCE;
    let ground_rows: Vec<&MergedRow> = merged.iter().filter(|r| is_ground(r.energy)).collect();
    let excited_rows: Vec<&MergedRow> = merged.iter().filter(|r| !is_ground(r.energy)).collect();

    let group_labels = qubit_labels(n, enc);
    let mut header = vec![group_header(&group_labels), "energy".to_string()];
    header.extend(labels.iter().cloned());

    let mut body: Vec<Vec<String>> = Vec::new();
    let collapsed = if opts.collapse {
        enc.filter(|e| e.num_qubits() == n)
            .and_then(|e| collapse_ground_rows(&ground_rows, e, trials))
    } else {
        None
    };
    match &collapsed {
        Some(rows) => {
            for row in rows {
                let mut cells = vec![
                    collapsed_bits_cell(row, &group_labels),
                    format!("{:.4}", row.energy),
                ];
                cells.extend(row.occurrences.iter().map(|o| o.to_string()));
                body.push(cells);
            }
        }
        None => {
            for row in &ground_rows {
                let mut cells = vec![
                    bits_cell(row.assignment.bits(), &group_labels),
                    format!("{:.4}", row.energy),
                ];
                cells.extend(row.occurrences.iter().map(|o| o.to_string()));
                body.push(cells);
            }
        }
    }
    let ground_row_count = body.len();
    for row in &excited_rows {
        let mut cells = vec![
            bits_cell(row.assignment.bits(), &group_labels),
            format!("{:.4}", row.energy),
        ];
        cells.extend(row.occurrences.iter().map(|o| o.to_string()));
        body.push(cells);
    }

    let total_row_count = body.len();
    let hidden = total_row_count.saturating_sub(opts.max_rows.max(ground_row_count));
    body.truncate(opts.max_rows.max(ground_row_count));

    let mut totals = vec!["total".to_string(), String::new()];
    totals.extend(results.iter().map(|r| r.total_reads.to_string()));
    body.push(totals);

    let mut out = pad_table(header, body);
    if hidden > 0 {
        let plural = if hidden == 1 { "" } else { "s" };
        out.push_str(&format!("({hidden} higher-energy row{plural} not shown)\n"));
    }
    match kind {
        SolveKind::Exhaustive => {
            out.push_str(&format!(
                "ground energy {:.4}, degeneracy {}\n",
                ground_energy,
                results[0].ground_states.len()
            ));
            out.push_str(&format!("enumerated {} assignments\n", results[0].total_reads));
        }
        SolveKind::Sampled => {
            let hits: Vec<String> = results
                .iter()
                .map(|r| {
                    r.records
                        .iter()
                        .filter(|rec| is_ground(rec.energy))
                        .map(|rec| rec.occurrences)
                        .sum::<u64>()
                        .to_string()
                })
                .collect();
            out.push_str(&format!(
                "lowest sampled energy {:.4}; hits per trial: {}\n",
                ground_energy,
                hits.join(" ")
            ));
        }
    }
    out
}

/// CSV form of the merged table: full, never collapsed.
pub fn render_csv(
    results: &[SolveResult],
    labels: &[String],
    enc: Option<&RadixEncoding>,
) -> String {
    let n = results[0].records[0].assignment.len();
    let merged = merge_results(results);
    let group_labels = qubit_labels(n, enc);
    let mut out = String::new();
    let mut header: Vec<String> = group_labels.into_iter().flatten().collect();
    header.push("energy".to_string());
    header.extend(labels.iter().cloned());
    out.push_str(&header.join(","));
    out.push('\n');
    for row in merged {
        let mut cells: Vec<String> = row.assignment.bits().iter().map(|b| b.to_string()).collect();
        cells.push(format!("{}", row.energy));
        cells.extend(row.occurrences.iter().map(|o| o.to_string()));
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// Pretty form of a congruence decomposition and the real solution it
/// yields.
pub fn render_diagonalize(
    sys: &LinearSystem,
    dec: &CongruenceDecomposition,
    y: &Vector,
    x: &Vector,
) -> String {
    let mut out = String::new();
    out.push_str(&format!("R =\n{}\n", dec.r()));
    out.push_str(&format!("D = {}\n", dec.d()));
    out.push_str(&format!("scale = {}\n", dec.scale()));
    out.push_str(&format!("y* = {y}\n"));
    out.push_str(&format!("x* = {x}\n"));
    let residual = residual_norm_sq(sys, x).expect("solution has matching dimension");
    out.push_str(&format!(
        "residual |Ax - b|^2 = {}\n",
        crate::linalg::fmt_entry(residual)
    ));
    if dec.is_singular() {
        out.push_str(&format!(
            "warning: singular Gram matrix; zero pivot at column(s) {:?}, d fixed to 0 there\n",
            dec.zero_pivots()
        ));
    }
    out
}

/// Per-model half of a [`CompareReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct ModelReport {
    pub label: String,
    pub num_qubits: usize,
    pub nnz: usize,
    pub nnz_bound: usize,
    pub ground_energy: f64,
    pub degeneracy: usize,
    pub trial_hits: Vec<u64>,
    pub mean_hit_rate: f64,
}

/// Side-by-side outcome of building and annealing both formulations.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareReport {
    pub vanilla: ModelReport,
    pub congruence: ModelReport,
    pub trials: u32,
    pub params: AnnealParams,
    /// `nnz(congruence) / nnz(vanilla)`; NaN when the vanilla model is empty.
    pub nnz_ratio: f64,
}

fn model_report(
    label: &str,
    q: &QuboMatrix,
    base: &AnnealParams,
    trials: u32,
) -> Result<ModelReport, Error> {
    let sparsity = q.sparsity_report();
    let exact = brute_force_capped(q, 0)?;
    let reference: HashSet<&QubitAssignment> = exact.ground_states.iter().collect();
    let mut trial_hits = Vec::with_capacity(trials as usize);
    for t in 0..trials {
        let params = AnnealParams {
            seed: base.seed.wrapping_add(u64::from(t)),
            ..base.clone()
        };
        let sampled = simulated_anneal(q, &params)?;
        let hits: u64 = sampled
            .records
            .iter()
            .filter(|r| reference.contains(&r.assignment))
            .map(|r| r.occurrences)
            .sum();
        trial_hits.push(hits);
    }
    let total_hits: u64 = trial_hits.iter().sum();
    let mean_hit_rate =
        total_hits as f64 / (u64::from(trials.max(1)) * base.num_reads) as f64;
    Ok(ModelReport {
        label: label.to_string(),
        num_qubits: q.n(),
        nnz: sparsity.nnz,
        nnz_bound: sparsity.bound,
        ground_energy: exact.ground_energy,
        degeneracy: exact.ground_states.len(),
        trial_hits,
        mean_hit_rate,
    })
}

/// Build both models with their default reduction flags, solve each exactly
/// for the reference ground set, then run the same annealing budget on both,
/// reseeding per trial.
pub fn run_compare(
    sys: &LinearSystem,
    dec: &CongruenceDecomposition,
    enc: &RadixEncoding,
    base: &AnnealParams,
    trials: u32,
) -> Result<CompareReport, Error> {
    let vanilla_q = build_vanilla(sys, enc, ReductionFlags::vanilla())?;
    let congruence_q = build_congruence(sys, dec, enc, ReductionFlags::congruence())?;
    let vanilla = model_report("vanilla", &vanilla_q, base, trials)?;
    let congruence = model_report("congruence", &congruence_q, base, trials)?;
    let nnz_ratio = congruence.nnz as f64 / vanilla.nnz as f64;
    Ok(CompareReport {
        vanilla,
        congruence,
        trials,
        params: base.clone(),
        nnz_ratio,
    })
}

pub fn render_compare(report: &CompareReport) -> String {
    let mut out = String::new();
    let header = vec![
        "model".to_string(),
        "qubits".to_string(),
        "nnz".to_string(),
        "bound".to_string(),
        "ground energy".to_string(),
        "degeneracy".to_string(),
        "hits per trial".to_string(),
        "mean hit rate".to_string(),
    ];
    let model_row = |m: &ModelReport| {
        vec![
            m.label.clone(),
            m.num_qubits.to_string(),
            m.nnz.to_string(),
            m.nnz_bound.to_string(),
            format!("{:.4}", m.ground_energy),
            m.degeneracy.to_string(),
            m.trial_hits
                .iter()
                .map(u64::to_string)
                .collect::<Vec<_>>()
                .join(" "),
            format!("{:.2}%", m.mean_hit_rate * 100.0),
        ]
    };
    let p = &report.params;
    out.push_str(&format!(
        "annealing: {} trials x {} reads, {} sweeps, beta {} -> {}, seed {}\n\n",
        report.trials, p.num_reads, p.sweeps_per_read, p.beta_initial, p.beta_final, p.seed
    ));
    out.push_str(&pad_table(
        header,
        vec![model_row(&report.vanilla), model_row(&report.congruence)],
    ));
    let ratio = report.nnz_ratio;
    if ratio.is_nan() {
        out.push_str("nnz ratio: n/a (vanilla model is empty)\n");
    } else {
        let relation = if ratio < 1.0 / 3.0 { "<" } else { ">=" };
        out.push_str(&format!(
            "nnz ratio: {}/{} {relation} 1/3\n",
            report.congruence.nnz, report.vanilla.nnz
        ));
    }
    out
}
