//! Seeded sweeps over flip fraction, symmetry, sparsity, input coupling and
//! memory, with CSV/JSON persistence and SVG figures.
//!
//! Every realization owns a seed `derive_seed(base_seed, [stream, grid, r])`
//! and runs end to end on one worker; results are collected in grid order,
//! so output is independent of the worker count.

mod plot;
mod spec;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use plot::{emit_contour_plot, emit_plots, PlotKind};
pub use spec::{
    default_fraction_grid, default_symmetry_counts, kind_label, ExperimentSpec, FlipValue, Operation, ReservoirOverrides,
    ResolvedSpec, Task,
};

use crate::analysis::{count_rank, median, memory_from_states, rank_spectrum, RankForm, RankPolicy};
use crate::error::{Error, Result};
use crate::network::{
    flip_edges, make_base_network, make_defect_network, make_input_vector, make_random_network, normalize_matrix,
    InputKind, InputVector, SignedNetwork,
};
use crate::readout::{fit, testing_error, training_error};
use crate::reservoir::{run_reservoir, StateMatrix};
use crate::rng::derive_seed;
use crate::signals::{lorenz_generate, map_generate, standardize, uniform_drive, LorenzParams, MapParams, TimeSeries};
use crate::symmetry::{count_automorphisms, log10_biguint};

const STREAM_BASE: u64 = 0;
const STREAM_SIGNAL: u64 = 1;
const STREAM_FLIP: u64 = 2;
const STREAM_SEARCH: u64 = 3;
const STREAM_RANDOM_NET: u64 = 4;
const STREAM_DRIVE: u64 = 5;
const STREAM_INPUT: u64 = 6;

/// Density of the fully random comparison network.
pub const RANDOM_NETWORK_DENSITY: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Unstable,
}

/// One realization. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub seed: u64,
    pub case: String,
    pub epsilon_f: f64,
    pub phi: f64,
    pub symmetry_count: Option<String>,
    pub gamma_ulp: Option<usize>,
    pub gamma_1e6: Option<usize>,
    pub delta_rc: Option<f64>,
    pub delta_tx: Option<f64>,
    pub mc_total: Option<f64>,
    pub status: Status,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    DeltaTx,
    DeltaRc,
    GammaUlp,
    Gamma1e6,
    McTotal,
    Log10Symmetry,
}

impl ResultRecord {
    pub fn metric(&self, m: Metric) -> Option<f64> {
        match m {
            Metric::DeltaTx => self.delta_tx,
            Metric::DeltaRc => self.delta_rc,
            Metric::GammaUlp => self.gamma_ulp.map(|g| g as f64),
            Metric::Gamma1e6 => self.gamma_1e6.map(|g| g as f64),
            Metric::McTotal => self.mc_total,
            Metric::Log10Symmetry => self
                .symmetry_count
                .as_ref()
                .and_then(|s| s.parse::<num_bigint::BigUint>().ok())
                .map(|v| log10_biguint(&v)),
        }
    }
}

/// Records plus log lines from one sweep.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Sweep {
    pub records: Vec<ResultRecord>,
    pub log: Vec<String>,
}

/// Median of `metric` over ok records of `case` (all cases when `None`),
/// grouped by flip fraction in ascending order.
pub fn median_by_epsilon(records: &[ResultRecord], case: Option<&str>, metric: Metric) -> Vec<(f64, f64)> {
    let mut keys: Vec<f64> = records
        .iter()
        .filter(|r| case.is_none_or(|c| r.case == c))
        .map(|r| r.epsilon_f)
        .collect();
    keys.sort_by(|a, b| a.total_cmp(b));
    keys.dedup();
    keys.into_iter()
        .filter_map(|e| {
            let vals: Vec<f64> = records
                .iter()
                .filter(|r| r.epsilon_f == e && case.is_none_or(|c| r.case == c))
                .filter_map(|r| r.metric(metric))
                .collect();
            (!vals.is_empty()).then(|| (e, median(&vals)))
        })
        .collect()
}

struct TaskSignals {
    train_drive: TimeSeries,
    train_target: Vec<f64>,
    test_drive: TimeSeries,
    test_target: Vec<f64>,
}

fn task_signals(task: Task, len: usize, stride: usize, base_seed: u64) -> Result<TaskSignals> {
    match task {
        Task::MapXy => {
            let gen = |k: u64| -> Result<(TimeSeries, Vec<f64>)> {
                let p = MapParams { n_steps: len + 1, y0: 0.0, rng_seed: derive_seed(base_seed, &[STREAM_SIGNAL, k]) };
                let (x, y) = map_generate(&p)?;
                let drive = standardize(&TimeSeries::new(x.samples()[..len].to_vec(), 1.0)?)?;
                let target = standardize(&TimeSeries::new(y.samples()[1..].to_vec(), 1.0)?)?;
                Ok((drive, target.samples().to_vec()))
            };
            let (train_drive, train_target) = gen(0)?;
            let (test_drive, test_target) = gen(1)?;
            Ok(TaskSignals { train_drive, train_target, test_drive, test_target })
        }
        _ => {
            let gen = |p: LorenzParams| -> Result<(TimeSeries, Vec<f64>)> {
                let p = LorenzParams { n_steps: len * stride, ..p };
                let (x, _, z) = lorenz_generate(&p)?;
                let drive = standardize(&x.decimate(stride)?)?;
                let target = standardize(&z.decimate(stride)?)?;
                Ok((drive, target.samples().to_vec()))
            };
            let (train_drive, train_target) = gen(LorenzParams::default())?;
            let (test_drive, test_target) =
                gen(LorenzParams::default().with_seeded_init(derive_seed(base_seed, &[STREAM_SIGNAL, 1])))?;
            Ok(TaskSignals { train_drive, train_target, test_drive, test_target })
        }
    }
}

/// Node-covariance rank under the ulp and fixed 1e-6 policies.
pub fn gammas(omega: &StateMatrix) -> Result<(usize, usize)> {
    let (sv, dim) = rank_spectrum(omega.values(), RankForm::NodeCovariance)?;
    let (g_ulp, _) = count_rank(&sv, dim, RankPolicy::UlpScaled)?;
    let (g_fixed, _) = count_rank(&sv, dim, RankPolicy::fixed_default())?;
    Ok((g_ulp, g_fixed))
}

#[derive(Debug, Clone, Copy, Default)]
struct Metrics {
    gamma_ulp: Option<usize>,
    gamma_1e6: Option<usize>,
    delta_rc: Option<f64>,
    delta_tx: Option<f64>,
    mc_total: Option<f64>,
}

fn evaluate_task(
    matrix: &nalgebra::DMatrix<f64>,
    w: &InputVector,
    sig: &TaskSignals,
    rs: &ResolvedSpec,
) -> Result<Metrics> {
    let cfg = &rs.reservoir;
    let adj = normalize_matrix(matrix, rs.normalization_target, rs.spec.spectral_mode)?;
    let rows = cfg.transient..cfg.input_len();
    let om = run_reservoir(&adj, w, &sig.train_drive, cfg)?;
    let g = &sig.train_target[rows.clone()];
    let model = fit(&om, g, rs.spec.ridge_k)?;
    let delta_rc = training_error(&om, &model, g)?;
    let (g_ulp, g_fixed) = gammas(&om)?;
    drop(om);
    let om_test = run_reservoir(&adj, w, &sig.test_drive, cfg)?;
    let delta_tx = testing_error(&om_test, &model, &sig.test_target[rows])?;
    Ok(Metrics {
        gamma_ulp: Some(g_ulp),
        gamma_1e6: Some(g_fixed),
        delta_rc: Some(delta_rc),
        delta_tx: Some(delta_tx),
        mc_total: None,
    })
}

fn evaluate_memory(matrix: &nalgebra::DMatrix<f64>, w: &InputVector, drive: &TimeSeries, rs: &ResolvedSpec) -> Result<Metrics> {
    let cfg = &rs.reservoir;
    let adj = normalize_matrix(matrix, rs.normalization_target, rs.spec.spectral_mode)?;
    let om = run_reservoir(&adj, w, drive, cfg)?;
    let (g_ulp, g_fixed) = gammas(&om)?;
    let mem = memory_from_states(om.values(), drive.samples(), cfg.transient, rs.spec.k_max, rs.spec.ridge_k)?;
    Ok(Metrics { gamma_ulp: Some(g_ulp), gamma_1e6: Some(g_fixed), mc_total: Some(mem.mc_total), ..Default::default() })
}

/// Failures that mark one realization unstable instead of aborting the sweep.
fn is_realization_failure(e: &Error) -> bool {
    matches!(
        e,
        Error::Unstable { .. } | Error::Divergence { .. } | Error::Numeric(_) | Error::NormalizationUndefined | Error::ZeroVariance
    )
}

struct Cell {
    seed: u64,
    case: String,
    epsilon_f: f64,
    phi: f64,
    symmetry_count: Option<String>,
}

type Outcome = (ResultRecord, Option<String>);

fn finish(cell: Cell, result: Result<Metrics>) -> Result<Outcome> {
    let (m, status, msg) = match result {
        Ok(m) => (m, Status::Ok, None),
        Err(e) if is_realization_failure(&e) => {
            let e = match e {
                Error::Unstable { step, .. } => Error::Unstable { step, epsilon_f: Some(cell.epsilon_f) },
                e => e,
            };
            let msg = format!("seed {} case {} epsilon_f {}: {e}", cell.seed, cell.case, cell.epsilon_f);
            (Metrics::default(), Status::Unstable, Some(msg))
        }
        Err(e) => return Err(e),
    };
    let record = ResultRecord {
        seed: cell.seed,
        case: cell.case,
        epsilon_f: cell.epsilon_f,
        phi: cell.phi,
        symmetry_count: cell.symmetry_count,
        gamma_ulp: m.gamma_ulp,
        gamma_1e6: m.gamma_1e6,
        delta_rc: m.delta_rc,
        delta_tx: m.delta_tx,
        mc_total: m.mc_total,
        status,
    };
    Ok((record, msg))
}

/// Run jobs on the current rayon pool and keep their input order.
fn run_jobs<J, F>(jobs: Vec<J>, f: F) -> Result<Sweep>
where
    J: Sync,
    F: Fn(&J) -> Result<Outcome> + Sync + Send,
{
    let outcomes: Vec<Result<Outcome>> = jobs.par_iter().map(f).collect();
    let mut sweep = Sweep::default();
    for o in outcomes {
        let (rec, msg) = o?;
        sweep.log.extend(msg);
        sweep.records.push(rec);
    }
    Ok(sweep)
}

/// Run `f` inside a dedicated pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(f))
}

fn realization_seed(base: u64, grid: usize, r: usize) -> u64 {
    derive_seed(base, &[STREAM_FLIP, grid as u64, r as u64])
}

fn input_vector(rs: &ResolvedSpec, kind: InputKind, seed: u64) -> InputVector {
    make_input_vector(rs.spec.size, kind, derive_seed(seed, &[STREAM_INPUT]))
}

fn case_label(rs: &ResolvedSpec) -> String {
    let task = if rs.operation == Operation::Memory { Task::Memory } else { rs.spec.task };
    format!("{}/{}", task.label(), kind_label(rs.reservoir.node_kind))
}

fn signal_task(rs: &ResolvedSpec) -> Task {
    match rs.spec.task {
        Task::MapXy => Task::MapXy,
        _ => Task::LorenzXz,
    }
}

fn resolved_counts(rs: &ResolvedSpec, base: &SignedNetwork) -> Result<Vec<usize>> {
    rs.flips.iter().map(|f| f.resolve(base.n_positive())).collect()
}

fn header(rs: &ResolvedSpec) -> Vec<String> {
    let mut log = vec![format!(
        "{:?} task={} kind={} M={} realizations={} base_seed={}",
        rs.operation,
        rs.spec.task.label(),
        kind_label(rs.reservoir.node_kind),
        rs.spec.size,
        rs.spec.realizations,
        rs.spec.base_seed
    )];
    log.extend(rs.notes.iter().map(|n| format!("note: {n}")));
    log
}

/// Flip-fraction sweep on one shared base network.
pub fn run_flip_sweep(spec: &ExperimentSpec) -> Result<Sweep> {
    let rs = spec.resolve(Operation::FlipSweep)?;
    let base = make_base_network(spec.size, spec.n_edges, derive_seed(spec.base_seed, &[STREAM_BASE]))?;
    let sig = task_signals(signal_task(&rs), rs.reservoir.input_len(), spec.stride, spec.base_seed)?;
    let counts = resolved_counts(&rs, &base)?;
    let phi = crate::network::sparsity(&base);
    let case = case_label(&rs);
    let jobs: Vec<(usize, usize)> =
        (0..counts.len()).flat_map(|g| (0..spec.realizations).map(move |r| (g, r))).collect();
    let mut sweep = run_jobs(jobs, |&(g, r)| {
        let seed = realization_seed(spec.base_seed, g, r);
        let net = flip_edges(&base, counts[g], seed)?;
        let w = input_vector(&rs, spec.input_kind, seed);
        let cell = Cell { seed, case: case.clone(), epsilon_f: net.flip_fraction(), phi, symmetry_count: None };
        finish(cell, evaluate_task(&net.to_matrix(), &w, &sig, &rs))
    })?;
    let mut log = header(&rs);
    log.append(&mut sweep.log);
    sweep.log = log;
    Ok(sweep)
}

/// Dense base with a large automorphism group, found by sampling defect
/// networks. Returns the network, its group order and the attempts used.
pub fn find_symmetric_base(spec: &ExperimentSpec) -> Result<(SignedNetwork, num_bigint::BigUint, usize)> {
    spec.validate()?;
    let mut best: Option<(SignedNetwork, num_bigint::BigUint)> = None;
    for a in 0..spec.search_budget {
        let net = make_defect_network(spec.size, spec.n_edges, spec.defect_nodes, derive_seed(spec.base_seed, &[STREAM_SEARCH, a as u64]))?;
        let order = count_automorphisms(&net).group_order;
        if log10_biguint(&order) > spec.symmetry_threshold_log10 {
            return Ok((net, order, a + 1));
        }
        if best.as_ref().is_none_or(|(_, o)| order > *o) {
            best = Some((net, order));
        }
    }
    let (net, order) = best.expect("search budget is positive");
    Ok((net, order, spec.search_budget))
}

/// Flip sweep on a highly symmetric base, with the exact automorphism
/// group order of every realization.
pub fn run_symmetry_sweep(spec: &ExperimentSpec) -> Result<Sweep> {
    let rs = spec.resolve(Operation::SymmetrySweep)?;
    let (base, order, attempts) = find_symmetric_base(spec)?;
    let mut log = header(&rs);
    let accepted = log10_biguint(&order) > spec.symmetry_threshold_log10;
    log.push(format!(
        "base network: group order {order} (log10 {:.3}) after {attempts} candidates{}",
        log10_biguint(&order),
        if accepted { "" } else { "; threshold not reached, using best found" }
    ));
    let sig = task_signals(signal_task(&rs), rs.reservoir.input_len(), spec.stride, spec.base_seed)?;
    let counts = resolved_counts(&rs, &base)?;
    let phi = crate::network::sparsity(&base);
    let case = case_label(&rs);
    let jobs: Vec<(usize, usize)> =
        (0..counts.len()).flat_map(|g| (0..spec.realizations).map(move |r| (g, r))).collect();
    let mut sweep = run_jobs(jobs, |&(g, r)| {
        let seed = realization_seed(spec.base_seed, g, r);
        let net = flip_edges(&base, counts[g], seed)?;
        let zeta = count_automorphisms(&net).group_order.to_string();
        let w = input_vector(&rs, spec.input_kind, seed);
        let cell = Cell { seed, case: case.clone(), epsilon_f: net.flip_fraction(), phi, symmetry_count: Some(zeta) };
        finish(cell, evaluate_task(&net.to_matrix(), &w, &sig, &rs))
    })?;
    log.append(&mut sweep.log);
    sweep.log = log;
    Ok(sweep)
}

/// One aggregated cell of a sparsity x flip grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourCell {
    pub phi: f64,
    pub epsilon_f: f64,
    pub median_log10_delta_tx: Option<f64>,
    pub mean_gamma_ulp: Option<f64>,
    pub mean_gamma_1e6: Option<f64>,
    pub n_ok: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourGrid {
    /// Row-major: one row per sparsity value, one column per flip value.
    pub n_phi: usize,
    pub n_flip: usize,
    pub cells: Vec<ContourCell>,
}

impl ContourGrid {
    pub fn cell(&self, p: usize, f: usize) -> &ContourCell {
        &self.cells[p * self.n_flip + f]
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for c in &self.cells {
            out.serialize(c).map_err(csv_error)?;
        }
        out.flush()?;
        Ok(())
    }
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        k => Error::Parse(format!("{k:?}")),
    }
}

fn mean_of(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// Sweep sparsity and flip fraction jointly; each sparsity value gets its
/// own base network.
pub fn run_contour(spec: &ExperimentSpec) -> Result<(Sweep, ContourGrid)> {
    let rs = spec.resolve(Operation::Contour)?;
    let grid = spec.sparsity_grid.clone().expect("resolve checks the grid");
    let slots = spec.size * (spec.size - 1);
    let bases: Vec<SignedNetwork> = grid
        .iter()
        .enumerate()
        .map(|(p, phi)| {
            let n_edges = ((phi * slots as f64).round() as usize).clamp(1, slots);
            make_base_network(spec.size, n_edges, derive_seed(spec.base_seed, &[STREAM_BASE, p as u64 + 1]))
        })
        .collect::<Result<_>>()?;
    let counts: Vec<Vec<usize>> = bases.iter().map(|b| resolved_counts(&rs, b)).collect::<Result<_>>()?;
    let sig = task_signals(signal_task(&rs), rs.reservoir.input_len(), spec.stride, spec.base_seed)?;
    let n_flip = rs.flips.len();
    let case = case_label(&rs);
    let jobs: Vec<(usize, usize, usize)> = (0..grid.len())
        .flat_map(|p| (0..n_flip).flat_map(move |f| (0..spec.realizations).map(move |r| (p, f, r))))
        .collect();
    let mut sweep = run_jobs(jobs, |&(p, f, r)| {
        let seed = realization_seed(spec.base_seed, p * n_flip + f, r);
        let net = flip_edges(&bases[p], counts[p][f], seed)?;
        let w = input_vector(&rs, spec.input_kind, seed);
        let phi = crate::network::sparsity(&bases[p]);
        let cell = Cell { seed, case: case.clone(), epsilon_f: net.flip_fraction(), phi, symmetry_count: None };
        finish(cell, evaluate_task(&net.to_matrix(), &w, &sig, &rs))
    })?;

    let cells = sweep
        .records
        .chunks(spec.realizations)
        .map(|chunk| {
            let ok: Vec<&ResultRecord> = chunk.iter().filter(|r| r.status == Status::Ok).collect();
            let logs: Vec<f64> = ok.iter().filter_map(|r| r.delta_tx).map(f64::log10).collect();
            let gu: Vec<f64> = ok.iter().filter_map(|r| r.metric(Metric::GammaUlp)).collect();
            let g6: Vec<f64> = ok.iter().filter_map(|r| r.metric(Metric::Gamma1e6)).collect();
            ContourCell {
                phi: chunk[0].phi,
                epsilon_f: chunk[0].epsilon_f,
                median_log10_delta_tx: (!logs.is_empty()).then(|| median(&logs)),
                mean_gamma_ulp: mean_of(&gu),
                mean_gamma_1e6: mean_of(&g6),
                n_ok: ok.len(),
            }
        })
        .collect();
    let mut log = header(&rs);
    log.append(&mut sweep.log);
    sweep.log = log;
    Ok((sweep, ContourGrid { n_phi: grid.len(), n_flip, cells }))
}

pub const CASE_ALTERNATING: &str = "case1_alternating_w";
pub const CASE_ALL_ONES: &str = "case2_all_ones_w";
pub const CASE_RANDOM_W: &str = "case3_random_w";
pub const CASE_RANDOM_NETWORK: &str = "case4_random_network";

/// The four coupling/network configurations. Cases 1-3 share the flip
/// seeds; case 4 has no flip axis and is run once, recorded at epsilon 0.
pub fn run_input_vector_comparison(spec: &ExperimentSpec) -> Result<Sweep> {
    let rs = spec.resolve(Operation::InputComparison)?;
    let base = make_base_network(spec.size, spec.n_edges, derive_seed(spec.base_seed, &[STREAM_BASE]))?;
    let sig = task_signals(signal_task(&rs), rs.reservoir.input_len(), spec.stride, spec.base_seed)?;
    let counts = resolved_counts(&rs, &base)?;
    let phi = crate::network::sparsity(&base);
    let flipped_cases = [
        (CASE_ALTERNATING, InputKind::Alternating),
        (CASE_ALL_ONES, InputKind::AllOnes),
        (CASE_RANDOM_W, InputKind::UniformRandom),
    ];
    let mut jobs: Vec<(usize, usize, usize)> = Vec::new();
    for c in 0..flipped_cases.len() {
        for g in 0..counts.len() {
            jobs.extend((0..spec.realizations).map(|r| (c, g, r)));
        }
    }
    jobs.extend((0..spec.realizations).map(|r| (flipped_cases.len(), 0, r)));
    let mut sweep = run_jobs(jobs, |&(c, g, r)| {
        if c < flipped_cases.len() {
            let (label, kind) = flipped_cases[c];
            let seed = realization_seed(spec.base_seed, g, r);
            let net = flip_edges(&base, counts[g], seed)?;
            let w = input_vector(&rs, kind, seed);
            let cell = Cell { seed, case: label.into(), epsilon_f: net.flip_fraction(), phi, symmetry_count: None };
            finish(cell, evaluate_task(&net.to_matrix(), &w, &sig, &rs))
        } else {
            let seed = derive_seed(spec.base_seed, &[STREAM_RANDOM_NET, r as u64]);
            let net = make_random_network(spec.size, RANDOM_NETWORK_DENSITY, seed)?;
            let w = input_vector(&rs, InputKind::UniformRandom, seed);
            let cell =
                Cell { seed, case: CASE_RANDOM_NETWORK.into(), epsilon_f: 0.0, phi: net.sparsity(), symmetry_count: None };
            finish(cell, evaluate_task(net.matrix(), &w, &sig, &rs))
        }
    })?;
    let mut log = header(&rs);
    log.append(&mut sweep.log);
    sweep.log = log;
    Ok(sweep)
}

/// Memory capacity over the flip grid, all realizations driven by the same
/// uniform noise on [-1, 1].
pub fn run_memory_sweep(spec: &ExperimentSpec) -> Result<Sweep> {
    let rs = spec.resolve(Operation::Memory)?;
    let base = make_base_network(spec.size, spec.n_edges, derive_seed(spec.base_seed, &[STREAM_BASE]))?;
    let drive = uniform_drive(rs.reservoir.input_len(), derive_seed(spec.base_seed, &[STREAM_DRIVE]))?;
    let counts = resolved_counts(&rs, &base)?;
    let phi = crate::network::sparsity(&base);
    let case = case_label(&rs);
    let jobs: Vec<(usize, usize)> =
        (0..counts.len()).flat_map(|g| (0..spec.realizations).map(move |r| (g, r))).collect();
    let mut sweep = run_jobs(jobs, |&(g, r)| {
        let seed = realization_seed(spec.base_seed, g, r);
        let net = flip_edges(&base, counts[g], seed)?;
        let w = input_vector(&rs, spec.input_kind, seed);
        let cell = Cell { seed, case: case.clone(), epsilon_f: net.flip_fraction(), phi, symmetry_count: None };
        finish(cell, evaluate_memory(&net.to_matrix(), &w, &drive, &rs))
    })?;
    let mut log = header(&rs);
    log.append(&mut sweep.log);
    sweep.log = log;
    Ok(sweep)
}

/// Write records as CSV with the fixed column set.
pub fn write_records_csv<W: Write>(records: &[ResultRecord], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    if records.is_empty() {
        out.write_record([
            "seed", "case", "epsilon_f", "phi", "symmetry_count", "gamma_ulp", "gamma_1e6", "delta_rc", "delta_tx", "mc_total",
            "status",
        ])
        .map_err(csv_error)?;
    }
    for r in records {
        out.serialize(r).map_err(csv_error)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_records_csv<R: std::io::Read>(r: R) -> Result<Vec<ResultRecord>> {
    csv::Reader::from_reader(r).deserialize().map(|rec| rec.map_err(csv_error)).collect()
}

/// Results directory: `spec.json`, `records.csv`, `log.txt`, `plots/`.
/// Records are written before any plotting, and plot failures only reach
/// the log.
pub fn write_results(dir: &Path, resolved: &ResolvedSpec, sweep: &Sweep, plot: Option<PlotKind>) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("spec.json"), serde_json::to_string_pretty(resolved)?)?;
    write_records_csv(&sweep.records, fs::File::create(dir.join("records.csv"))?)?;
    let mut log = sweep.log.clone();
    let mut files = Vec::new();
    if let Some(kind) = plot {
        match emit_plots(&sweep.records, kind, &dir.join("plots")) {
            Ok(mut f) => files.append(&mut f),
            Err(e) => log.push(format!("plotting failed: {e}")),
        }
    }
    let unstable = sweep.records.iter().filter(|r| r.status == Status::Unstable).count();
    log.push(format!("{} records, {unstable} unstable", sweep.records.len()));
    fs::write(dir.join("log.txt"), log.join("\n") + "\n")?;
    Ok(files)
}
