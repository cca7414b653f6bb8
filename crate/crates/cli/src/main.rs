//! `rieszcap`: Riesz capacities, capacity curves, equilibrium weights and
//! closed-form checks from the command line.
//!
//! Exit codes: 0 on success, 1 when `validate` finds a failing identity or a
//! computation fails, 2 on argument errors.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};
use serde_json::json;

use riesz_capacity::analysis::{
    capacity_curve, closed_form_suite, equilibrium_l1, estimate_capacity, figure1_grid,
    figure1_table, solve_level, CurveRow,
};
use riesz_capacity::closedform::closed_form_capacity;
use riesz_capacity::energy::DiagonalMode;
use riesz_capacity::solver::SolverConfig;
use riesz_capacity::{Error, Scheme, SetSpec};

#[derive(Parser, Debug)]
#[command(
    name = "rieszcap",
    version,
    about = "Riesz p-capacities, energies and equilibrium measures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print solver diagnostics to stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Capacity of a set at one exponent, extrapolated along the ladder.
    Capacity {
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long, allow_negative_numbers = true)]
        p: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Capacity as a function of p.
    Curve {
        #[command(flatten)]
        solve: SolveArgs,
        /// Strictly increasing comma-separated exponents.
        #[arg(
            long,
            value_delimiter = ',',
            allow_hyphen_values = true,
            required = true
        )]
        p_grid: Vec<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Equilibrium weights on the finest ladder level.
    Equilibrium {
        #[command(flatten)]
        solve: SolveArgs,
        #[arg(long, allow_negative_numbers = true)]
        p: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Closed-form identity suite; exits 1 if any check fails.
    Validate {
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Closed-form ball capacities for n = 1..4 over a p grid.
    Figure1 {
        /// Defaults to the built-in reference grid.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        p_grid: Option<Vec<f64>>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Set description: a JSON file path or inline JSON.
    #[arg(long)]
    set: String,
    /// Comma-separated node-count targets.
    #[arg(long, value_delimiter = ',', default_value = "256,512,1024")]
    ladder: Vec<usize>,
    /// grid, boundary or native.
    #[arg(long, default_value = "native")]
    scheme: Scheme,
    /// exclude, auto, self-cell or self-cell:<sigma>.
    #[arg(long, default_value = "auto")]
    diag: DiagonalMode,
    /// Relative duality-gap tolerance.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

/// Failure of a run, mapped to an exit code.
enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidInput(_) | Error::Domain { .. } | Error::Json(_) => {
                Failure::Usage(e.to_string())
            }
            other => Failure::Runtime(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type Run<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => Cli::command().error(ErrorKind::ValueValidation, msg).exit(),
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Run<ExitCode> {
    let verbose = cli.verbose > 0;
    match cli.command {
        Command::Capacity { solve, p, output } => {
            let (spec, cfg) = solve.resolve()?;
            let res = estimate_capacity(&spec, p, &solve.ladder, solve.scheme, &cfg)?;
            if !res.converged {
                warn_unconverged(res.gap, res.iterations);
            }
            if verbose {
                eprintln!(
                    "levels {:?} -> {:?}, gap {:.3e}, {} iterations, diag {}",
                    res.node_counts,
                    res.level_capacities,
                    res.gap,
                    res.iterations,
                    res.diag.as_deref().unwrap_or("-")
                );
            }
            let closed = closed_form_capacity(&spec, p);
            let text = match output.format.unwrap_or(Format::Json) {
                Format::Json => {
                    let mut v = serde_json::to_value(&res)?;
                    v["closed_form"] = json!(closed);
                    v["set"] = serde_json::to_value(&spec)?;
                    pretty(&v)?
                }
                Format::Csv => curve_csv(&[CurveRow {
                    p,
                    capacity: res.capacity,
                    energy: res.energy.value(),
                    gap: res.gap,
                    iterations: res.iterations,
                    n: res.node_counts.last().copied().unwrap_or(0),
                    closed_form: closed,
                    extrapolated: res.extrapolated,
                }])?,
            };
            emit(output.out.as_deref(), &text)?;
        }
        Command::Curve {
            solve,
            p_grid,
            output,
        } => {
            let (spec, cfg) = solve.resolve()?;
            let table = capacity_curve(&spec, &p_grid, &solve.ladder, solve.scheme, &cfg)?;
            if table.rows.iter().any(|r| r.iterations >= cfg.max_iters) {
                eprintln!("warning: some rows stopped at --max-iters; see the gap column");
            }
            if verbose {
                for r in &table.rows {
                    eprintln!("p={} gap={:.3e} iterations={}", r.p, r.gap, r.iterations);
                }
            }
            let text = match output.format.unwrap_or(Format::Csv) {
                Format::Json => pretty(&serde_json::to_value(&table)?)?,
                Format::Csv => curve_csv(&table.rows)?,
            };
            emit(output.out.as_deref(), &text)?;
        }
        Command::Equilibrium { solve, p, output } => {
            let (spec, cfg) = solve.resolve()?;
            let target = *solve.ladder.iter().max().ok_or_else(|| {
                Failure::Usage("ladder must contain at least one node count".into())
            })?;
            let level = solve_level(&spec, p, target, solve.scheme, &cfg)?;
            let res = &level.result;
            if !res.converged {
                warn_unconverged(res.gap, res.iterations);
            }
            let cloud = &level.cloud;
            let l1 = equilibrium_l1(&spec, p, cloud, &res.weights);
            let support = res.weights.support(1e-12);
            if verbose || output.format == Some(Format::Csv) {
                match l1 {
                    Some(d) => eprintln!("L1 distance to the exact equilibrium measure: {d:.6e}"),
                    None => eprintln!("no exact equilibrium measure for this set and exponent"),
                }
            }
            let text = match output.format.unwrap_or(Format::Json) {
                Format::Json => {
                    let nodes: Vec<&[f64]> = cloud.nodes().collect();
                    let v = json!({
                        "set": spec,
                        "p": p,
                        "node_count": cloud.len(),
                        "capacity": res.capacity().ok(),
                        "energy": res.energy.value(),
                        "gap": res.gap,
                        "iterations": res.iterations,
                        "converged": res.converged,
                        "diag": res.diag.to_string(),
                        "non_unique_regime": res.non_unique_regime,
                        "closed_form": closed_form_capacity(&spec, p),
                        "l1_distance": l1,
                        "support": {
                            "size": support.len(),
                            "threshold": 1e-12,
                            "max_weight": res.weights.as_slice().iter().cloned().fold(0.0, f64::max),
                        },
                        "nodes": nodes,
                        "cell_measures": cloud.cell_measures(),
                        "weights": res.weights.as_slice(),
                    });
                    pretty(&v)?
                }
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    let mut header: Vec<String> =
                        (0..cloud.dim()).map(|k| format!("x{k}")).collect();
                    header.extend(["cell_measure".into(), "weight".into()]);
                    w.write_record(&header)?;
                    for (i, x) in cloud.nodes().enumerate() {
                        let mut rec: Vec<String> = x.iter().map(|v| v.to_string()).collect();
                        rec.push(cloud.cell_measures()[i].to_string());
                        rec.push(res.weights.as_slice()[i].to_string());
                        w.write_record(&rec)?;
                    }
                    csv_string(w)?
                }
            };
            emit(output.out.as_deref(), &text)?;
        }
        Command::Validate { output } => {
            let checks = closed_form_suite()?;
            let pass = checks.iter().all(|c| c.pass);
            let text = match output.format.unwrap_or(Format::Json) {
                Format::Json => pretty(&json!({ "pass": pass, "checks": checks }))?,
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    for c in &checks {
                        w.serialize(c)?;
                    }
                    csv_string(w)?
                }
            };
            emit(output.out.as_deref(), &text)?;
            if verbose {
                for c in checks.iter().filter(|c| !c.pass) {
                    eprintln!("FAIL {}: {} vs {}", c.name, c.value, c.expected);
                }
            }
            if !pass {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Figure1 { p_grid, output } => {
            let grid = p_grid.unwrap_or_else(figure1_grid);
            if grid.is_empty() || grid.windows(2).any(|w| !(w[0] < w[1])) {
                return Err(Failure::Usage("p grid must be strictly increasing".into()));
            }
            let table = figure1_table(&grid)?;
            let text = match output.format.unwrap_or(Format::Csv) {
                Format::Json => {
                    let curves: Vec<_> = table
                        .iter()
                        .map(|(n, caps)| json!({ "n": n, "capacity": caps }))
                        .collect();
                    pretty(&json!({ "p": grid, "curves": curves }))?
                }
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(Vec::new());
                    let mut header = vec!["n".to_string()];
                    header.extend(grid.iter().map(|p| p.to_string()));
                    w.write_record(&header)?;
                    for (n, caps) in &table {
                        let mut rec = vec![n.to_string()];
                        rec.extend(caps.iter().map(|c| c.to_string()));
                        w.write_record(&rec)?;
                    }
                    csv_string(w)?
                }
            };
            emit(output.out.as_deref(), &text)?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

impl SolveArgs {
    fn resolve(&self) -> Run<(SetSpec, SolverConfig)> {
        let spec = load_set(&self.set)?;
        let mut cfg = SolverConfig {
            diag: self.diag,
            ..Default::default()
        };
        if let Some(t) = self.tol {
            cfg.gap_tol = t;
        }
        if let Some(m) = self.max_iters {
            cfg.max_iters = m;
        }
        cfg.validate()?;
        if self.ladder.is_empty() || self.ladder.contains(&0) {
            return Err(Failure::Usage("ladder entries must be positive".into()));
        }
        Ok((spec, cfg))
    }
}

fn warn_unconverged(gap: f64, iterations: usize) {
    eprintln!(
        "warning: solver stopped after {iterations} iterations with gap {gap:.3e}; \
         raise --max-iters or --tol"
    );
}

/// A path to a JSON file, or the JSON itself.
fn load_set(arg: &str) -> Run<SetSpec> {
    let path = Path::new(arg);
    let text = if path.is_file() {
        fs::read_to_string(path)?
    } else if arg.trim_start().starts_with('{') {
        arg.to_string()
    } else {
        return Err(Failure::Usage(format!(
            "--set: no such file and not inline JSON: {arg}"
        )));
    };
    Ok(SetSpec::from_json(&text)?)
}

fn curve_csv(rows: &[CurveRow]) -> Run<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "p",
        "capacity",
        "energy",
        "gap",
        "iterations",
        "N",
        "closed_form",
    ])?;
    for r in rows {
        w.write_record([
            r.p.to_string(),
            r.capacity.to_string(),
            r.energy
                .map_or_else(|| "inf".to_string(), |e| e.to_string()),
            r.gap.to_string(),
            r.iterations.to_string(),
            r.n.to_string(),
            r.closed_form.map(|c| c.to_string()).unwrap_or_default(),
        ])?;
    }
    csv_string(w)
}

fn csv_string(w: csv::Writer<Vec<u8>>) -> Run<String> {
    let bytes = w
        .into_inner()
        .map_err(|e| Failure::Runtime(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure::Runtime(e.to_string()))
}

fn pretty(v: &serde_json::Value) -> Run<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn emit(out: Option<&Path>, text: &str) -> Run<()> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}
