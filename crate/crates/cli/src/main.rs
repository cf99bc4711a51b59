use std::fs;
use std::io::{self, BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use signed_reservoir::harness::{
    emit_contour_plot, emit_plots, median_by_epsilon, read_records_csv, run_contour, run_flip_sweep,
    run_input_vector_comparison, run_memory_sweep, run_symmetry_sweep, with_workers, write_records_csv, write_results,
    ExperimentSpec, FlipValue, Metric, Operation, PlotKind, ResultRecord, Sweep, Task,
};
use signed_reservoir::network::{flip_edges, make_base_network, make_defect_network, normalize_spectral, SignedNetwork};
use signed_reservoir::symmetry::count_automorphisms;
use signed_reservoir::{Error, Result};

#[derive(Parser)]
#[command(name = "signres", version, about = "Signed-network reservoir computing experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a signed network in the text format.
    GenNetwork(GenNetworkArgs),
    /// Count the automorphisms of a network file.
    Symmetries(SymmetriesArgs),
    /// Run the sweep that matches the spec's task.
    Run(RunArgs),
    /// Testing error, rank and flip fraction over the flip grid.
    SweepFlips(RunArgs),
    /// Testing error against symmetry count on a highly symmetric base.
    SweepSymmetry(RunArgs),
    /// Joint sweep over sparsity and flip fraction.
    SweepContour(RunArgs),
    /// Compare the four input-vector / network configurations.
    CompareInputs(RunArgs),
    /// Memory capacity over the flip grid.
    Memory(RunArgs),
    /// Redraw figures from an existing records.csv.
    Plot(PlotArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct RunArgs {
    /// Experiment spec (TOML). Defaults apply when omitted.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Override the spec's base seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Results directory. Without it, records go to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct GenNetworkArgs {
    #[arg(long, default_value_t = 100)]
    size: usize,
    /// Number of nonzero entries.
    #[arg(long, default_value_t = 9800)]
    edges: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Confine every zero entry to this many nodes.
    #[arg(long)]
    defect_nodes: Option<usize>,
    /// Edges to flip: a count (`40`) or a fraction of the edges (`0.25`).
    #[arg(long)]
    flip: Option<String>,
    /// Write the spectrally normalized real matrix as CSV instead.
    #[arg(long)]
    normalize: Option<f64>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SymmetriesArgs {
    /// Network file in the text format.
    network: PathBuf,
    /// `csv`: order on the first line, orbits as JSON on the second.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotChoice {
    Flip,
    Symmetry,
    Memory,
}

#[derive(Args)]
struct PlotArgs {
    /// records.csv from an earlier run.
    records: PathBuf,
    #[arg(long, value_enum)]
    kind: PlotChoice,
    /// Directory for the SVG files.
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    if e.is_validation() {
        2
    } else if matches!(e, Error::Io(_)) {
        1
    } else {
        3
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::GenNetwork(a) => gen_network(a),
        Command::Symmetries(a) => symmetries(a),
        Command::Run(a) => {
            let spec = load_spec(&a)?;
            let op = match spec.task {
                Task::Memory => Operation::Memory,
                Task::InputVectorComparison => Operation::InputComparison,
                _ if spec.sparsity_grid.is_some() => Operation::Contour,
                _ => Operation::FlipSweep,
            };
            sweep(op, spec, &a)
        }
        Command::SweepFlips(a) => sweep(Operation::FlipSweep, load_spec(&a)?, &a),
        Command::SweepSymmetry(a) => sweep(Operation::SymmetrySweep, load_spec(&a)?, &a),
        Command::SweepContour(a) => sweep(Operation::Contour, load_spec(&a)?, &a),
        Command::CompareInputs(a) => sweep(Operation::InputComparison, load_spec(&a)?, &a),
        Command::Memory(a) => sweep(Operation::Memory, load_spec(&a)?, &a),
        Command::Plot(a) => plot(a),
    }
}

fn load_spec(a: &RunArgs) -> Result<ExperimentSpec> {
    let mut spec = match &a.spec {
        Some(path) => ExperimentSpec::from_toml(&fs::read_to_string(path)?)?,
        None => ExperimentSpec::default(),
    };
    if let Some(seed) = a.seed {
        spec.base_seed = seed;
    }
    Ok(spec)
}

fn sweep(op: Operation, spec: ExperimentSpec, a: &RunArgs) -> Result<()> {
    let resolved = spec.resolve(op)?;
    let (result, grid) = with_workers(a.workers, || -> Result<(Sweep, Option<_>)> {
        Ok(match op {
            Operation::FlipSweep => (run_flip_sweep(&spec)?, None),
            Operation::SymmetrySweep => (run_symmetry_sweep(&spec)?, None),
            Operation::Contour => {
                let (s, g) = run_contour(&spec)?;
                (s, Some(g))
            }
            Operation::InputComparison => (run_input_vector_comparison(&spec)?, None),
            Operation::Memory => (run_memory_sweep(&spec)?, None),
        })
    })??;
    let plot = match op {
        Operation::SymmetrySweep => Some(PlotKind::Symmetry),
        Operation::Memory => Some(PlotKind::Memory),
        Operation::Contour => None,
        _ => Some(PlotKind::Flip),
    };

    let stdout = io::stdout();
    let mut out = stdout.lock();
    match &a.out {
        Some(dir) => {
            write_results(dir, &resolved, &result, plot)?;
            if let Some(g) = &grid {
                g.write_csv(fs::File::create(dir.join("grid.csv"))?)?;
                if let Err(e) = emit_contour_plot(g, &dir.join("plots")) {
                    eprintln!("warning: contour plot failed: {e}");
                }
            }
            write_summary(&result.records, a.format, &mut out)?;
            eprintln!("wrote {} records to {}", result.records.len(), dir.display());
        }
        None => match a.format {
            Format::Csv => write_records_csv(&result.records, &mut out)?,
            Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&result.records)?)?,
        },
    }
    Ok(())
}

#[derive(Serialize)]
struct SummaryRow {
    case: String,
    epsilon_f: f64,
    median_delta_tx: Option<f64>,
    median_gamma_ulp: Option<f64>,
    median_gamma_1e6: Option<f64>,
    median_mc_total: Option<f64>,
}

/// Medians per case and flip fraction.
fn summarize(records: &[ResultRecord]) -> Vec<SummaryRow> {
    let mut cases: Vec<&str> = Vec::new();
    for r in records {
        if !cases.contains(&r.case.as_str()) {
            cases.push(&r.case);
        }
    }
    let mut rows = Vec::new();
    for case in cases {
        let mut eps: Vec<f64> = records.iter().filter(|r| r.case == case).map(|r| r.epsilon_f).collect();
        eps.sort_by(f64::total_cmp);
        eps.dedup();
        let lookup = |m: Metric| median_by_epsilon(records, Some(case), m);
        let (tx, gu, g6, mc) =
            (lookup(Metric::DeltaTx), lookup(Metric::GammaUlp), lookup(Metric::Gamma1e6), lookup(Metric::McTotal));
        let at = |v: &[(f64, f64)], e: f64| v.iter().find(|(x, _)| *x == e).map(|(_, m)| *m);
        for e in eps {
            rows.push(SummaryRow {
                case: case.to_string(),
                epsilon_f: e,
                median_delta_tx: at(&tx, e),
                median_gamma_ulp: at(&gu, e),
                median_gamma_1e6: at(&g6, e),
                median_mc_total: at(&mc, e),
            });
        }
    }
    rows
}

fn write_summary(records: &[ResultRecord], format: Format, out: &mut impl Write) -> Result<()> {
    let rows = summarize(records);
    match format {
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&rows)?)?,
        Format::Csv => {
            let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
            writeln!(out, "case,epsilon_f,median_delta_tx,median_gamma_ulp,median_gamma_1e6,median_mc_total")?;
            for r in rows {
                writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    r.case,
                    r.epsilon_f,
                    opt(r.median_delta_tx),
                    opt(r.median_gamma_ulp),
                    opt(r.median_gamma_1e6),
                    opt(r.median_mc_total)
                )?;
            }
        }
    }
    Ok(())
}

fn parse_flip(s: &str) -> Result<FlipValue> {
    let bad = || Error::InvalidParameter(format!("--flip expects a count or a fraction, got {s:?}"));
    if s.contains('.') || s.contains('e') {
        s.parse().map(FlipValue::Fraction).map_err(|_| bad())
    } else {
        s.parse().map(FlipValue::Count).map_err(|_| bad())
    }
}

fn gen_network(a: GenNetworkArgs) -> Result<()> {
    let mut net = match a.defect_nodes {
        Some(d) => make_defect_network(a.size, a.edges, d, a.seed)?,
        None => make_base_network(a.size, a.edges, a.seed)?,
    };
    if let Some(f) = &a.flip {
        let n = parse_flip(f)?.resolve(net.n_nonzero())?;
        net = flip_edges(&net, n, a.seed.wrapping_add(1))?;
    }
    let mut buf = Vec::new();
    match a.normalize {
        Some(target) => normalize_spectral(&net, target)?.write_csv(&mut buf)?,
        None => net.write_text(&mut buf)?,
    }
    match &a.out {
        Some(path) => fs::write(path, buf)?,
        None => io::stdout().lock().write_all(&buf)?,
    }
    Ok(())
}

fn read_network(path: &Path) -> Result<SignedNetwork> {
    SignedNetwork::read_text(BufReader::new(fs::File::open(path)?))
}

fn symmetries(a: SymmetriesArgs) -> Result<()> {
    let net = read_network(&a.network)?;
    let report = count_automorphisms(&net);
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match a.format {
        Format::Csv => {
            writeln!(out, "{}", report.group_order)?;
            writeln!(out, "{}", serde_json::to_string(&report.orbit_partition)?)?;
        }
        Format::Json => writeln!(out, "{}", serde_json::to_string_pretty(&report)?)?,
    }
    Ok(())
}

fn plot(a: PlotArgs) -> Result<()> {
    let records = read_records_csv(fs::File::open(&a.records)?)?;
    let kind = match a.kind {
        PlotChoice::Flip => PlotKind::Flip,
        PlotChoice::Symmetry => PlotKind::Symmetry,
        PlotChoice::Memory => PlotKind::Memory,
    };
    for f in emit_plots(&records, kind, &a.out)? {
        println!("{}", f.display());
    }
    Ok(())
}
