use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aggchain::factor::{self, HarrisBound};
use aggchain::gibbs::gibbs_verdict;
use aggchain::oracle::{empirical_pk, simulate, write_trajectory};
use aggchain::report::{digest, plot_csv, render_text, AnalysisOptions, AnalysisReport, EmpiricalSection, SCHEMA_VERSION};
use aggchain::{Error, MatrixFile, Result, Tolerances, TransitionMatrix};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "aggchain", version, about = "Continuity analysis of a Markov chain seen through a one-symbol aggregation map")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Full pipeline: structure, p_k, verdict, rate, order, Gibbs grid and simulation check.
    Analyze(Common),
    /// The sequence p_0..p_K.
    Pk(Common),
    /// The two-sided grid p_{m,n} and its verdict.
    Gibbs(Common),
    /// Simulate the chain and estimate p_k from pattern counts.
    Simulate(SimulateArgs),
    /// Finite Markov order of the image process.
    MarkovOrder(Common),
    /// Harris's comparison bound for strictly positive matrices.
    Harris(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Args)]
struct Common {
    /// Matrix file (JSON with `m`, `matrix`, optional `labels` and `special`).
    input: PathBuf,
    #[arg(long, default_value_t = 100)]
    kmax: usize,
    #[arg(long, default_value_t = 20)]
    m_max: usize,
    #[arg(long, default_value_t = 20)]
    n_max: usize,
    #[arg(long)]
    tol_limit: Option<f64>,
    #[arg(long)]
    tol_eig: Option<f64>,
    #[arg(long)]
    zero_tol: Option<f64>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    steps: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write `n,p_n,bound_n` rows to this CSV file.
    #[arg(long)]
    emit_plot_data: Option<PathBuf>,
    /// Symbol mapped to 1 (1-based); overrides the file.
    #[arg(long)]
    special: Option<usize>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    /// Also write the trajectory as a binary file.
    #[arg(long)]
    dump: Option<PathBuf>,
}

struct Input {
    bytes: Vec<u8>,
    matrix: TransitionMatrix,
    special: usize,
    tol: Tolerances,
}

impl Common {
    fn tolerances(&self) -> Tolerances {
        let mut tol = Tolerances::default();
        if let Some(x) = self.tol_limit {
            tol.tol_limit = x;
        }
        if let Some(x) = self.tol_eig {
            tol.tol_eig = x;
        }
        if let Some(x) = self.zero_tol {
            tol.zero_tol = x;
        }
        tol
    }

    fn load(&self) -> Result<Input> {
        let bytes = fs::read(&self.input).map_err(|e| Error::Io(format!("{}: {e}", self.input.display())))?;
        let text = String::from_utf8(bytes.clone()).map_err(|e| Error::Parse(e.to_string()))?;
        let tol = self.tolerances();
        let (matrix, file_special) = MatrixFile::from_json(&text)?.into_matrix(tol.tol_row, tol.zero_tol)?;
        let special = self.special.unwrap_or(file_special);
        if special == 0 || special > matrix.m() {
            return Err(Error::InvalidSymbol {
                symbol: special,
                m: matrix.m(),
            });
        }
        Ok(Input {
            bytes,
            matrix,
            special,
            tol,
        })
    }

    fn report(&self, input: &Input, gibbs: bool, simulation: bool) -> Result<AnalysisReport> {
        let options = AnalysisOptions {
            special: input.special,
            kmax: self.kmax,
            gibbs: gibbs.then_some((self.m_max, self.n_max)),
            simulation: simulation.then_some((self.steps, self.seed, self.kmax.min(20))),
        };
        AnalysisReport::build(&input.bytes, &input.matrix, &options, &input.tol)
    }
}

fn envelope(input: &Input, key: &str, body: Value) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "tool_version": env!("CARGO_PKG_VERSION"),
        "input_digest": digest(&input.bytes),
        "special": input.special,
        "tolerances": input.tol,
        key: body,
    })
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn write_plot(path: &Path, report: &AnalysisReport) -> Result<()> {
    fs::write(path, plot_csv(report)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn run(command: &Command) -> Result<(Value, Format)> {
    match command {
        Command::Analyze(c) => {
            let input = c.load()?;
            let report = c.report(&input, true, true)?;
            if let Some(path) = &c.emit_plot_data {
                write_plot(path, &report)?;
            }
            Ok((to_value(&report), c.format))
        }
        Command::Pk(c) => {
            let input = c.load()?;
            let report = c.report(&input, false, false)?;
            if let Some(path) = &c.emit_plot_data {
                write_plot(path, &report)?;
            }
            Ok((envelope(&input, "pk", to_value(&report.pk)), c.format))
        }
        Command::Gibbs(c) => {
            let input = c.load()?;
            let g = gibbs_verdict(&input.matrix, input.special, c.m_max, c.n_max, &input.tol)?;
            Ok((envelope(&input, "gibbs", to_value(&g)), c.format))
        }
        Command::Simulate(s) => {
            let c = &s.common;
            let input = c.load()?;
            let run = simulate(&input.matrix, input.special, c.steps, c.seed)?;
            if let Some(path) = &s.dump {
                let mut file = fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
                write_trajectory(&mut file, input.matrix.m(), &run.symbols)?;
            }
            let section = EmpiricalSection {
                seed: c.seed,
                steps: c.steps,
                estimates: empirical_pk(&run, c.kmax),
            };
            Ok((envelope(&input, "empirical", to_value(&section)), c.format))
        }
        Command::MarkovOrder(c) => {
            let input = c.load()?;
            let decomp = input.matrix.decompose(input.special)?;
            let keep = factor::reachable_states(&decomp);
            let order = factor::markov_order(&decomp.restrict(&keep), &input.tol)?;
            Ok((envelope(&input, "markov_order", to_value(&order)), c.format))
        }
        Command::Harris(c) => {
            let input = c.load()?;
            let h = HarrisBound::new(&input.matrix)?;
            let bounds: Vec<f64> = (1..=c.kmax).map(|n| h.at(n)).collect();
            let body = json!({ "lambda": h.lambda, "base": h.base(), "bounds": bounds });
            Ok((envelope(&input, "harris", body), c.format))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli.command) {
        Ok((value, Format::Json)) => {
            println!("{}", serde_json::to_string_pretty(&value).expect("serializable"));
            ExitCode::SUCCESS
        }
        Ok((value, Format::Text)) => {
            print!("{}", render_text(&value));
            ExitCode::SUCCESS
        }
        Err(e) => {
            let body = json!({ "error": { "code": e.code(), "message": e.to_string() } });
            eprintln!("{}", serde_json::to_string_pretty(&body).expect("serializable"));
            ExitCode::from(if e.is_input_error() { 1 } else { 2 })
        }
    }
}
