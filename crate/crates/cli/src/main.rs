//! `qwalk`: quantum walks and scattering on graphs with two tails.
//!
//! Exit codes: 0 success, 1 failed check or computation, 2 bad input or usage.

mod output;
mod verify;

use std::f64::consts::TAU;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sha2::{Digest, Sha256};

use qwalk::fixtures::{random_graph, RandomGraphParams};
use qwalk::oracle::path_sum;
use qwalk::scattering::{transmission_series, transmission_series_converged, Direction, ScatteringSystem};
use qwalk::spectral::{check_time_reversal, find_bound_states, internal_block_eigenvalues};
use qwalk::{build_step_operator, run_measured_walk, EdgeSpec, EdgeState, Error, Graph, GraphDocument};

use output::{complex, sci, to_json_string, Cell, OrderedMap, Table};
use verify::{
    coin_failure, p_out_estimate, run_checks, tails_for, RunReport, VerifyOptions, DEFAULT_N_MAX, DEFAULT_P_OUT_N_MAX,
    DEFAULT_SPECTRAL_SAMPLES, DEFAULT_SWEEP_SAMPLES, SERIES_ALIASING_TOLERANCE,
};

/// Amplitudes below this are left out of bound-state supports.
const SUPPORT_CUTOFF: f64 = 1e-12;

#[derive(Parser, Debug)]
#[command(
    name = "qwalk",
    version,
    about = "Discrete-time quantum walks and scattering on graphs with two tails"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Graph file (JSON).
    #[arg(long, global = true)]
    graph: Option<PathBuf>,
    /// Use a random graph with this seed instead of --graph.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Phase samples for sweeps, or spectral samples for `pout`.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Highest series order.
    #[arg(long = "n-max", global = true)]
    n_max: Option<usize>,
    /// Sampling radius for the series, in (0, 1].
    #[arg(long, global = true)]
    radius: Option<f64>,
    /// Write the table here instead of stdout (for `verify`: the residual table).
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum DirectionArg {
    Left,
    Right,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Quantity {
    Qseries,
    Spectrum,
    Transmission,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run the walk from a tail edge and record the exit edge per step.
    Simulate {
        #[arg(long)]
        steps: usize,
        /// Remove the exit amplitude after each step (first-arrival statistics).
        #[arg(long)]
        measured: bool,
        /// Initial edge state, `FROM>TO[#ID]`; defaults to the first entry-tail edge.
        #[arg(long)]
        from: Option<String>,
        /// Monitored edge state; defaults to the first exit-tail edge.
        #[arg(long)]
        to: Option<String>,
    },
    /// Transmission and reflection amplitudes on a circle of phases.
    Scatter {
        #[arg(long, value_enum, default_value = "left")]
        direction: DirectionArg,
    },
    /// First-arrival probabilities from the Taylor series of t.
    Qseries,
    /// Total transmission probability by both routes.
    Pout,
    /// Eigenstates confined to the graph.
    BoundStates,
    /// Time-reversal residual.
    TimeReversal,
    /// Path-sum amplitude between two edge states.
    Oracle {
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        steps: usize,
    },
    /// Run every cross-check and print a report.
    Verify,
    /// Plot-ready CSV.
    EmitPlotdata {
        #[arg(value_enum)]
        quantity: Quantity,
    },
}

#[derive(Debug)]
enum Failure {
    /// Exit code 2.
    Input(String),
    /// Exit code 1.
    Compute(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            Failure::Input(e.to_string())
        } else {
            Failure::Compute(e.to_string())
        }
    }
}

/// What a command produced; `passed` is false when a check failed.
struct Outcome {
    text: String,
    passed: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, passed: true }
    }
}

struct Source {
    document: GraphDocument,
    sha256: String,
}

fn load(global: &Global) -> Result<Source, Failure> {
    let (document, bytes) = match (&global.graph, global.seed) {
        (Some(_), Some(_)) => return Err(Failure::Input("--graph and --seed are mutually exclusive".into())),
        (None, None) => return Err(Failure::Input("a graph is required: pass --graph or --seed".into())),
        (Some(path), None) => {
            let text =
                fs::read_to_string(path).map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
            (GraphDocument::from_json(&text)?, text.into_bytes())
        }
        (None, Some(seed)) => {
            let doc = random_graph(seed, RandomGraphParams::default());
            let text = serde_json::to_string(&doc.to_value()).expect("graph documents serialize");
            (doc, text.into_bytes())
        }
    };
    Ok(Source {
        document,
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

fn parse_edge(graph: &Graph, text: &str) -> Result<EdgeState, Failure> {
    Ok(graph.resolve(&text.parse::<EdgeSpec>()?)?)
}

fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    }
}

fn json_only(format: Option<Format>, command: &str) -> Result<(), Failure> {
    match format {
        Some(Format::Csv) => Err(Failure::Input(format!("{command} only supports --format json"))),
        _ => Ok(()),
    }
}

fn simulate(
    graph: &Graph,
    steps: usize,
    measured: bool,
    from: Option<&str>,
    to: Option<&str>,
) -> Result<Table, Failure> {
    let initial = from.map_or_else(|| Ok(graph.entry_incoming()), |s| parse_edge(graph, s))?;
    let target = to.map_or_else(|| Ok(graph.exit_outgoing()), |s| parse_edge(graph, s))?;
    let tails = tails_for(&initial, steps.max(target.tail_depth()));
    let op = build_step_operator(graph, tails);
    if measured {
        let record = run_measured_walk(&op, &initial, &target, steps)?;
        let mut table = Table::new(&["n", "q", "cumulative", "remaining"]);
        for (n, ((q, c), r)) in record
            .q
            .iter()
            .zip(record.cumulative())
            .zip(&record.remaining)
            .enumerate()
        {
            table.push(vec![
                Cell::Int(n as u64),
                Cell::Float(*q),
                Cell::Float(c),
                Cell::Float(*r),
            ]);
        }
        Ok(table)
    } else {
        let index = op.basis().require(&target)?;
        let mut walker = qwalk::walk::walker_from_edge(&op, &initial, steps)?;
        let mut table = Table::new(&["n", "probability", "norm"]);
        for n in 0..=steps {
            if n > 0 {
                walker.step();
            }
            let s = walker.state();
            table.push(vec![
                Cell::Int(n as u64),
                Cell::Float(s.amplitudes[index].norm_sqr()),
                Cell::Float(s.norm_sqr()),
            ]);
        }
        Ok(table)
    }
}

fn scatter(graph: &Graph, samples: usize, radius: f64, direction: Direction) -> Result<Table, Failure> {
    if samples == 0 {
        return Err(Failure::Input("--samples must be positive".into()));
    }
    let solutions = ScatteringSystem::new(graph).sweep(samples, radius, direction)?;
    let mut table = Table::new(&["theta", "re_t", "im_t", "abs_t2", "re_r", "im_r"]);
    for (k, s) in solutions.iter().enumerate() {
        table.push(vec![
            Cell::Float(TAU * k as f64 / samples as f64),
            Cell::Float(s.t.re),
            Cell::Float(s.t.im),
            Cell::Float(s.t.norm_sqr()),
            Cell::Float(s.r.re),
            Cell::Float(s.r.im),
        ]);
    }
    Ok(table)
}

fn first_arrival_series(graph: &Graph, global: &Global) -> Result<Vec<f64>, Failure> {
    let system = ScatteringSystem::new(graph);
    let n_max = global.n_max.unwrap_or(DEFAULT_N_MAX);
    let radius = global.radius.unwrap_or(1.0);
    let series = match global.samples {
        Some(samples) => transmission_series(&system, n_max, radius, samples)?,
        None => transmission_series_converged(&system, n_max, radius, SERIES_ALIASING_TOLERANCE)?,
    };
    Ok(series.q())
}

#[derive(Serialize)]
struct BoundStateOut {
    eigenvalue: [f64; 2],
    residual: f64,
    support: OrderedMap<[f64; 2]>,
}

fn bound_states(graph: &Graph) -> Vec<BoundStateOut> {
    let op = build_step_operator(graph, qwalk::TailConfig::for_steps(0));
    find_bound_states(graph)
        .into_iter()
        .map(|b| BoundStateOut {
            eigenvalue: complex(b.eigenvalue),
            residual: b.residual,
            support: OrderedMap(
                b.vector
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| a.norm() > SUPPORT_CUTOFF)
                    .map(|(i, a)| (op.basis().state(i).to_string(), complex(*a)))
                    .collect(),
            ),
        })
        .collect()
}

#[derive(Serialize)]
struct TimeReversalOut {
    holds: bool,
    residual: f64,
}

#[derive(Serialize)]
struct OracleOut {
    from: String,
    to: String,
    steps: usize,
    amplitude: [f64; 2],
    path_count: u64,
}

fn verify(
    graph: Result<Graph, Error>,
    source: &Source,
    global: &Global,
    argv: Vec<String>,
) -> Result<Outcome, Failure> {
    let (checks, quantities) = match graph {
        Ok(g) => {
            let opts = VerifyOptions {
                sweep_samples: global.samples.unwrap_or(DEFAULT_SWEEP_SAMPLES),
                n_max: global.n_max.unwrap_or(DEFAULT_N_MAX),
            };
            if opts.sweep_samples == 0 {
                return Err(Failure::Input("--samples must be positive".into()));
            }
            let (checks, q) = run_checks(&g, opts);
            (checks, Some(q))
        }
        Err(Error::Coin { vertex, violation }) => (vec![coin_failure(vertex, &violation)], None),
        Err(e) => return Err(e.into()),
    };
    let mut report = RunReport::new(argv, source.sha256.clone(), checks, quantities);
    let table = report.residual_table();
    if let Some(path) = &global.output {
        fs::write(path, &table).map_err(|e| Failure::Compute(format!("cannot write {}: {e}", path.display())))?;
        report.output_table = Some(path.display().to_string());
    }
    if !report.passed {
        eprint!("verification failed\n{table}");
    }
    Ok(Outcome {
        text: to_json_string(&report),
        passed: report.passed,
    })
}

fn run(cli: &Cli, argv: Vec<String>) -> Result<Outcome, Failure> {
    let global = &cli.global;
    let source = load(global)?;
    let built = source.document.clone().build();
    if let Command::Verify = cli.command {
        json_only(global.format, "verify")?;
        return verify(built, &source, global, argv);
    }
    let graph = built?;
    let format = global.format;
    let table_format = format.unwrap_or(Format::Csv);

    let text = match &cli.command {
        Command::Simulate {
            steps,
            measured,
            from,
            to,
        } => render(
            &simulate(&graph, *steps, *measured, from.as_deref(), to.as_deref())?,
            table_format,
        ),
        Command::Scatter { direction } => {
            let direction = match direction {
                DirectionArg::Left => Direction::Left,
                DirectionArg::Right => Direction::Right,
            };
            let samples = global.samples.unwrap_or(DEFAULT_SWEEP_SAMPLES);
            render(
                &scatter(&graph, samples, global.radius.unwrap_or(1.0), direction)?,
                table_format,
            )
        }
        Command::Qseries => {
            let mut table = Table::new(&["n", "q", "cumulative"]);
            let mut acc = 0.0;
            for (n, q) in first_arrival_series(&graph, global)?.into_iter().enumerate() {
                acc += q;
                table.push(vec![Cell::Int(n as u64), Cell::Float(q), Cell::Float(acc)]);
            }
            render(&table, table_format)
        }
        Command::Pout => {
            let system = ScatteringSystem::new(&graph);
            let samples = global.samples.unwrap_or(DEFAULT_SPECTRAL_SAMPLES);
            let n_max = global.n_max.unwrap_or(DEFAULT_P_OUT_N_MAX);
            let p = p_out_estimate(&system, samples, n_max, global.n_max.is_none())?;
            match format.unwrap_or(Format::Json) {
                Format::Json => to_json_string(&p),
                Format::Csv => format!(
                    "quantity,value\np_out_spectral,{}\np_out_series,{}\ndiscrepancy,{}\ntail_bound,{}\n",
                    sci(p.p_out_spectral),
                    sci(p.p_out_series),
                    sci(p.discrepancy),
                    sci(p.tail_bound)
                ),
            }
        }
        Command::BoundStates => {
            json_only(format, "bound-states")?;
            to_json_string(&bound_states(&graph))
        }
        Command::TimeReversal => {
            json_only(format, "time-reversal")?;
            let tr = check_time_reversal(&graph);
            to_json_string(&TimeReversalOut {
                holds: tr.holds,
                residual: tr.max_residual,
            })
        }
        Command::Oracle { from, to, steps } => {
            json_only(format, "oracle")?;
            let (a, b) = (parse_edge(&graph, from)?, parse_edge(&graph, to)?);
            let p = path_sum(&graph, &a, &b, *steps)?;
            to_json_string(&OracleOut {
                from: a.to_string(),
                to: b.to_string(),
                steps: *steps,
                amplitude: complex(p.amplitude),
                path_count: p.path_count,
            })
        }
        Command::EmitPlotdata { quantity } => {
            if format == Some(Format::Json) {
                return Err(Failure::Input("emit-plotdata only writes CSV".into()));
            }
            plotdata(&graph, *quantity, global)?.to_csv()
        }
        Command::Verify => unreachable!("handled above"),
    };
    Ok(Outcome::ok(text))
}

fn plotdata(graph: &Graph, quantity: Quantity, global: &Global) -> Result<Table, Failure> {
    let mut table;
    match quantity {
        Quantity::Qseries => {
            table = Table::new(&["n", "q"]);
            for (n, q) in first_arrival_series(graph, global)?.into_iter().enumerate() {
                table.push(vec![Cell::Int(n as u64), Cell::Float(q)]);
            }
        }
        Quantity::Transmission => {
            table = Table::new(&["theta", "t2"]);
            let samples = global.samples.unwrap_or(DEFAULT_SWEEP_SAMPLES);
            let solutions =
                ScatteringSystem::new(graph).sweep(samples, global.radius.unwrap_or(1.0), Direction::Left)?;
            for (k, s) in solutions.iter().enumerate() {
                table.push(vec![
                    Cell::Float(TAU * k as f64 / samples as f64),
                    Cell::Float(s.t.norm_sqr()),
                ]);
            }
        }
        Quantity::Spectrum => {
            table = Table::new(&["k", "re", "im", "modulus"]);
            let values = internal_block_eigenvalues(graph)
                .ok_or_else(|| Failure::Compute("Schur iteration did not converge".into()))?;
            for (k, z) in values.into_iter().enumerate() {
                table.push(vec![
                    Cell::Int(k as u64),
                    Cell::Float(z.re),
                    Cell::Float(z.im),
                    Cell::Float(z.norm()),
                ]);
            }
        }
    }
    Ok(table)
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(value) = std::env::var("QWALK_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Input(format!("QWALK_THREADS must be a positive integer, got {value:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Failure::Compute(e.to_string()))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = Cli::parse();

    let result = configure_threads().and_then(|()| run(&cli, argv)).and_then(|outcome| {
        match (&cli.global.output, &cli.command) {
            (Some(path), cmd) if !matches!(cmd, Command::Verify) => fs::write(path, &outcome.text)
                .map_err(|e| Failure::Compute(format!("cannot write {}: {e}", path.display())))?,
            _ => print!("{}", outcome.text),
        }
        Ok(outcome.passed)
    });
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Compute(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
