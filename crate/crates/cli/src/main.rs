//! `gridsym` command-line tool: generate point clouds, digitize them into marked grids,
//! run symmetry tests and query the Ising model.
//!
//! Exit codes: 0 success, 1 I/O failure (missing, unreadable or unwritable files), 2 invalid
//! parameters or capacity limits.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gridsym::digitize::{DEFAULT_BETTI_INDEX, DEFAULT_RESOLUTION};
use gridsym::ising::{
    exact_partition, expected_hamming, metropolis_sample, Boundary, ExpectationMode, IsingModel, IsingParams,
    SpinConfig, MC_BURN_IN,
};
use gridsym::symmetry::{
    estimate_on_config, eta_default, eta_null, sample_config_block, symmetry_test, trial_rng, CanonicalSampler,
    FixedSequence, SequenceSampler,
};
use gridsym::synth::{generate, mirror_scene, GeneratorSpec, MirrorAxis, SourceKind};
use gridsym::{generate_grid_diagram, Configuration, GridBlock, GridSpec, MarkedGrid, MoveSequence, Point, PointCloud};
use thiserror::Error;

#[derive(Debug, Error)]
enum CliError {
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Invalid(_) => 2,
        }
    }
}

fn invalid(e: impl std::fmt::Display) -> CliError {
    CliError::Invalid(e.to_string())
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "gridsym", version, about = "Grid symmetry detection for 2-D point data")]
struct Cli {
    /// Seed for every random choice; each trial gets its own stream derived from it.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the main result here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Draw a synthetic point cloud (CSV with header `x,y`).
    Generate(GenerateArgs),
    /// Bin points onto an n × n grid and mark cells by their Betti numbers.
    Digitize(DigitizeArgs),
    /// Run the symmetry test on a marked grid or configuration.
    Analyze(AnalyzeArgs),
    /// Partition function, Metropolis samples or expected distance under the Ising model.
    Ising(IsingArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Gaussian,
    Gamma,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    /// Full generator spec as JSON (any kind, including mixtures and ring scenes).
    #[arg(long, conflicts_with_all = ["kind", "mean", "cov", "shape", "scale"])]
    spec: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "gaussian")]
    kind: Kind,
    /// Number of points (defaults to 1000, or the spec file's count).
    #[arg(long)]
    count: Option<usize>,
    /// Gaussian mean as `x,y`.
    #[arg(long, default_value = "0,0")]
    mean: String,
    /// Gaussian covariance, row-major `a,b,c,d`.
    #[arg(long, default_value = "1,0,0,1")]
    cov: String,
    /// Gamma shape per axis as `kx,ky`.
    #[arg(long, default_value = "2,2")]
    shape: String,
    /// Gamma scale per axis as `sx,sy`.
    #[arg(long, default_value = "1,1")]
    scale: String,
    /// Standard deviation of the additive Gaussian noise.
    #[arg(long)]
    noise: Option<f64>,
    /// Make the scene mirror-symmetric about the line x = A.
    #[arg(long, value_name = "A", conflicts_with = "mirror_y")]
    mirror_x: Option<f64>,
    /// Make the scene mirror-symmetric about the line y = B.
    #[arg(long, value_name = "B")]
    mirror_y: Option<f64>,
}

#[derive(Debug, Args)]
struct DigitizeArgs {
    /// CSV point file with header `x,y`.
    #[arg(long)]
    input: PathBuf,
    /// Grid number (cells per side).
    #[arg(long)]
    n: usize,
    /// Cell side length; fitted to the bounding box when omitted.
    #[arg(long)]
    l: Option<f64>,
    /// Lower-left grid corner as `x,y`; defaults to the bounding box corner.
    #[arg(long, requires = "l", allow_hyphen_values = true)]
    origin: Option<String>,
    /// Raster resolution per cell.
    #[arg(long, default_value_t = DEFAULT_RESOLUTION)]
    r: usize,
    /// Betti index used for marking (0 or 1).
    #[arg(long, default_value_t = DEFAULT_BETTI_INDEX)]
    k: usize,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Marked grid JSON or bare configuration JSON.
    #[arg(long)]
    input: PathBuf,
    /// Block size; the whole grid when omitted.
    #[arg(long)]
    m: Option<usize>,
    /// 1-based `row,col` of the block's top-left cell; sampled when omitted.
    #[arg(long)]
    offset: Option<String>,
    /// Move sequence as labels, e.g. `T2,T2,T1,T1`.
    #[arg(long, conflicts_with = "seq_file")]
    seq: Option<String>,
    /// Move sequence as a JSON array of moves.
    #[arg(long)]
    seq_file: Option<PathBuf>,
    /// Threshold: a number, `auto` (Bernoulli expectation) or `null` (same, minus fixed cells).
    #[arg(long, default_value = "auto")]
    eta: String,
    /// Estimate Pr(symmetric) over this many random blocks instead of testing one.
    #[arg(long)]
    trials: Option<usize>,
    /// Largest T1 exponent when sampling sequences.
    #[arg(long, default_value_t = 4)]
    max_a: usize,
    /// Largest T2 exponent when sampling sequences.
    #[arg(long, default_value_t = 4)]
    max_b: usize,
    /// Stabilize/destabilize pairs per sampled sequence.
    #[arg(long, default_value_t = 0)]
    kinks: usize,
    /// Also write the per-step trace (step, move, H) as CSV here.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum IsingMode {
    Exact,
    Sample,
    Expect,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BoundaryArg {
    Open,
    Periodic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ExpectArg {
    Exact,
    MonteCarlo,
}

#[derive(Debug, Args)]
struct IsingArgs {
    #[arg(value_enum, value_name = "TASK")]
    task: IsingMode,
    /// Model parameters as JSON; replaces the individual flags.
    #[arg(long, conflicts_with_all = ["n", "j", "gamma", "tau", "boundary"])]
    params: Option<PathBuf>,
    /// Lattice shape: `N` or `RxC`.
    #[arg(long)]
    n: Option<String>,
    #[arg(long = "J", default_value_t = 0.0, allow_hyphen_values = true)]
    j: f64,
    #[arg(long = "Gamma", default_value_t = 0.0, allow_hyphen_values = true)]
    gamma: f64,
    #[arg(long, default_value_t = 1.0)]
    tau: f64,
    #[arg(long, value_enum, default_value = "open")]
    boundary: BoundaryArg,
    /// Recorded sweeps (sample mode) or Monte Carlo samples (expect mode).
    #[arg(long, default_value_t = 1000)]
    sweeps: usize,
    #[arg(long, default_value_t = MC_BURN_IN)]
    burn_in: usize,
    /// Move sequence for expect mode.
    #[arg(long, default_value = "T2")]
    seq: String,
    /// How expect computes ⟨H⟩.
    #[arg(long, value_enum, default_value = "exact")]
    mode: ExpectArg,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Generate(args) => cmd_generate(cli, args),
        Command::Digitize(args) => cmd_digitize(cli, args),
        Command::Analyze(args) => cmd_analyze(cli, args),
        Command::Ising(args) => cmd_ising(cli, args),
    }
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Writes the main result to `--output` or standard output.
fn emit(cli: &Cli, bytes: &[u8]) -> Result<()> {
    match &cli.output {
        Some(path) => write_file(path, bytes),
        None => io::stdout().write_all(bytes).map_err(|e| CliError::Io(format!("cannot write output: {e}"))),
    }
}

/// Side messages go to stdout when the result went to a file, to stderr otherwise.
fn note(cli: &Cli, msg: &str) {
    if cli.output.is_some() {
        println!("{msg}");
    } else {
        eprintln!("{msg}");
    }
}

fn json_line(value: &impl serde::Serialize) -> Vec<u8> {
    let mut out = serde_json::to_vec(value).expect("in-memory JSON serialization");
    out.push(b'\n');
    out
}

fn parse_floats<const N: usize>(text: &str, what: &str) -> Result<[f64; N]> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| CliError::Invalid(format!("{what}: expected {N} comma-separated numbers, got {text:?}")))?;
    parts.try_into().map_err(|_| CliError::Invalid(format!("{what}: expected {N} comma-separated numbers, got {text:?}")))
}

fn cmd_generate(cli: &Cli, args: &GenerateArgs) -> Result<()> {
    let mut spec = match &args.spec {
        Some(path) => serde_json::from_str::<GeneratorSpec>(&read_text(path)?)
            .map_err(|e| invalid(format!("bad generator spec {}: {e}", path.display())))?,
        None => {
            let kind = match args.kind {
                Kind::Gaussian => {
                    let [a, b, c, d] = parse_floats::<4>(&args.cov, "--cov")?;
                    SourceKind::Gaussian { mean: parse_floats(&args.mean, "--mean")?, cov: [[a, b], [c, d]] }
                }
                Kind::Gamma => SourceKind::Gamma {
                    shape: parse_floats(&args.shape, "--shape")?,
                    scale: parse_floats(&args.scale, "--scale")?,
                },
            };
            GeneratorSpec { kind, count: 1000, noise_sigma: 0.0, seed: 0 }
        }
    };
    if let Some(count) = args.count {
        spec.count = count;
    }
    if let Some(sigma) = args.noise {
        spec.noise_sigma = sigma;
    }
    if let Some(seed) = cli.seed {
        spec.seed = seed;
    }
    let axis = args.mirror_x.map(MirrorAxis::Vertical).or(args.mirror_y.map(MirrorAxis::Horizontal));
    let cloud = match axis {
        Some(axis) => mirror_scene(&spec, axis),
        None => generate(&spec),
    }
    .map_err(invalid)?;

    let bytes = match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["x", "y"]).map_err(|e| CliError::Io(e.to_string()))?;
            for p in &cloud.points {
                w.serialize((p.x, p.y)).map_err(|e| CliError::Io(e.to_string()))?;
            }
            w.into_inner().map_err(|e| CliError::Io(e.to_string()))?
        }
        Format::Json => json_line(&cloud),
    };
    emit(cli, &bytes)?;
    let summary = match cloud.bounding_box() {
        Some((lo, hi)) => format!("count={} bbox=[{}, {}]x[{}, {}]", cloud.len(), lo.x, hi.x, lo.y, hi.y),
        None => "count=0".to_string(),
    };
    note(cli, &summary);
    Ok(())
}

fn read_points(path: &Path) -> Result<PointCloud> {
    let text = read_text(path)?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let points = reader
        .deserialize::<Point>()
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|e| CliError::Io(format!("cannot parse {}: {e}", path.display())))?;
    Ok(PointCloud::new(points))
}

fn cmd_digitize(cli: &Cli, args: &DigitizeArgs) -> Result<()> {
    let cloud = read_points(&args.input)?;
    cloud.validate().map_err(invalid)?;
    let spec = match args.l {
        None => GridSpec::fit(&cloud, args.n),
        Some(l) => {
            let origin = match &args.origin {
                Some(text) => {
                    let [x, y] = parse_floats::<2>(text, "--origin")?;
                    (x, y)
                }
                None => cloud.bounding_box().map_or((0.0, 0.0), |(lo, _)| (lo.x, lo.y)),
            };
            GridSpec::new(args.n, l, origin)
        }
    }
    .map_err(invalid)?;
    let grid = generate_grid_diagram(&cloud, &spec, args.r, args.k).map_err(invalid)?;
    let bytes = match cli.format.unwrap_or(Format::Json) {
        Format::Json => json_line(&grid),
        Format::Csv => config_csv(&grid.config),
    };
    emit(cli, &bytes)?;
    note(
        cli,
        &format!(
            "n={} l={} origin=({}, {}) marked={} dropped_points={}",
            spec.n,
            spec.l,
            spec.origin.0,
            spec.origin.1,
            grid.config.occupied(),
            grid.dropped_points
        ),
    );
    Ok(())
}

fn config_csv(config: &Configuration) -> Vec<u8> {
    let mut out = String::new();
    for row in config.rows() {
        let cells: Vec<&str> = row.iter().map(|&c| if c { "1" } else { "0" }).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out.into_bytes()
}

/// Accepts a marked grid (recognised by its Betti matrices) or a bare configuration.
fn read_grid(path: &Path) -> Result<Configuration> {
    let text = read_text(path)?;
    let unreadable = |e: serde_json::Error| CliError::Io(format!("cannot parse {}: {e}", path.display()));
    let value: serde_json::Value = serde_json::from_str(&text).map_err(unreadable)?;
    if value.get("betti0").is_some() {
        Ok(serde_json::from_value::<MarkedGrid>(value).map_err(unreadable)?.config)
    } else {
        serde_json::from_value::<Configuration>(value).map_err(unreadable)
    }
}

enum Eta {
    Fixed(usize),
    Auto,
    Null,
}

fn parse_eta(text: &str) -> Result<Eta> {
    match text {
        "auto" => Ok(Eta::Auto),
        "null" => Ok(Eta::Null),
        _ => text.parse().map(Eta::Fixed).map_err(|_| invalid(format!("--eta: expected a count, auto or null, got {text:?}"))),
    }
}

fn resolve_eta(eta: &Eta, m: usize, occupancy: f64, seq: Option<&MoveSequence>) -> Result<usize> {
    Ok(match eta {
        Eta::Fixed(v) => *v,
        Eta::Auto => eta_default(m, occupancy),
        Eta::Null => {
            let seq = seq.ok_or_else(|| invalid("--eta null needs a fixed sequence (--seq or --seq-file)"))?;
            eta_null(m, occupancy, seq.fixed_points(m).map_err(invalid)?)
        }
    })
}

fn cmd_analyze(cli: &Cli, args: &AnalyzeArgs) -> Result<()> {
    let grid = read_grid(&args.input)?;
    let n = grid.n();
    let m = args.m.unwrap_or(n);
    if m == 0 || m > n {
        return Err(invalid(format!("block size {m} does not fit a grid of number {n}")));
    }
    let seq = match (&args.seq, &args.seq_file) {
        (Some(labels), _) => Some(MoveSequence::parse(labels).map_err(invalid)?),
        (None, Some(path)) => Some(
            serde_json::from_str::<MoveSequence>(&read_text(path)?)
                .map_err(|e| invalid(format!("bad sequence file {}: {e}", path.display())))?,
        ),
        (None, None) => None,
    };
    let eta = parse_eta(&args.eta)?;
    let seed = cli.seed.unwrap_or(0);
    // η is calibrated on the occupancy of the whole grid
    let occupancy = grid.occupancy();

    if let Some(trials) = args.trials {
        let eta = resolve_eta(&eta, m, occupancy, seq.as_ref())?;
        let canonical = CanonicalSampler { max_a: args.max_a, max_b: args.max_b, kink_pairs: args.kinks };
        let fixed = seq.clone().map(FixedSequence);
        let sampler: &dyn SequenceSampler = match &fixed {
            Some(f) => f,
            None => &canonical,
        };
        let est = estimate_on_config(&grid, m, sampler, eta, trials, seed).map_err(invalid)?;
        let body = serde_json::json!({
            "m": m,
            "eta": eta,
            "seed": seed,
            "trials": est.trials,
            "successes": est.successes,
            "probability": est.probability,
            "std_error": est.std_error,
        });
        return emit(cli, &json_line(&body));
    }

    let mut rng = trial_rng(seed, 0);
    let block = match &args.offset {
        Some(text) => {
            let [r, c] = parse_floats::<2>(text, "--offset")?;
            if r < 1.0 || c < 1.0 || r.fract() != 0.0 || c.fract() != 0.0 {
                return Err(invalid(format!("--offset: expected 1-based integers, got {text:?}")));
            }
            GridBlock::new(&grid, (r as usize - 1, c as usize - 1), m).map_err(invalid)?
        }
        None if m == n => GridBlock::whole(&grid),
        None => sample_config_block(&grid, m, &mut rng).map_err(invalid)?,
    };
    let seq = match seq {
        Some(s) => s,
        None => CanonicalSampler { max_a: args.max_a, max_b: args.max_b, kink_pairs: args.kinks }
            .sample(&block.config, &mut rng),
    };
    let eta = resolve_eta(&eta, m, occupancy, Some(&seq))?;
    let report = symmetry_test(&block, &seq, eta).map_err(invalid)?;

    let trace_csv = || {
        let mut out = String::from("step,move,H\n");
        for (i, (label, h)) in report.sequence.labels().iter().zip(&report.trace).enumerate() {
            out.push_str(&format!("{},{label},{h}\n", i + 1));
        }
        out.into_bytes()
    };
    if let Some(path) = &args.trace {
        write_file(path, &trace_csv())?;
    }
    let bytes = match cli.format.unwrap_or(Format::Json) {
        Format::Json => json_line(&report),
        Format::Csv => trace_csv(),
    };
    emit(cli, &bytes)
}

fn ising_params(args: &IsingArgs) -> Result<IsingParams> {
    let params = match &args.params {
        Some(path) => serde_json::from_str::<IsingParams>(&read_text(path)?)
            .map_err(|e| invalid(format!("bad parameter file {}: {e}", path.display())))?,
        None => {
            let shape = args.n.as_deref().ok_or_else(|| invalid("--n (or --params) is required"))?;
            let (rows, cols) = gridsym::ising::parse_shape(shape).map_err(invalid)?;
            let boundary = match args.boundary {
                BoundaryArg::Open => Boundary::Open,
                BoundaryArg::Periodic => Boundary::Periodic,
            };
            IsingParams::rect(rows, cols, args.j, args.gamma, args.tau).with_boundary(boundary)
        }
    };
    IsingModel::new(&params).map_err(invalid)?;
    Ok(params)
}

fn cmd_ising(cli: &Cli, args: &IsingArgs) -> Result<()> {
    let params = ising_params(args)?;
    let seed = cli.seed.unwrap_or(0);
    let format = cli.format.unwrap_or(Format::Json);
    match args.task {
        IsingMode::Exact => {
            let z = exact_partition(&params).map_err(invalid)?;
            let bytes = match format {
                Format::Json => json_line(&serde_json::json!({
                    "rows": params.rows,
                    "cols": params.cols,
                    "states": 1u64 << params.cells(),
                    "Z": z,
                })),
                Format::Csv => {
                    let model = IsingModel::new(&params).map_err(invalid)?;
                    let probs = model.exact_distribution().map_err(invalid)?;
                    let mut out = String::from("state,energy,probability\n");
                    for (i, p) in probs.iter().enumerate() {
                        let s = SpinConfig::from_index(params.rows, params.cols, i as u64);
                        out.push_str(&format!("{i},{},{p}\n", model.energy(&s.spins)));
                    }
                    out.into_bytes()
                }
            };
            emit(cli, &bytes)
        }
        IsingMode::Sample => {
            let model = IsingModel::new(&params).map_err(invalid)?;
            let samples = metropolis_sample(&params, args.sweeps, args.burn_in, seed).map_err(invalid)?;
            let mut out = Vec::new();
            if format == Format::Csv {
                out.extend_from_slice(b"sweep,occupied,energy\n");
            }
            for (i, s) in samples.enumerate() {
                match format {
                    Format::Json => out.extend(json_line(&s.to_json())),
                    Format::Csv => {
                        let occupied = s.spins.iter().filter(|&&v| v > 0).count();
                        out.extend(format!("{},{occupied},{}\n", i + 1, model.energy(&s.spins)).into_bytes());
                    }
                }
            }
            emit(cli, &out)
        }
        IsingMode::Expect => {
            let seq = MoveSequence::parse(&args.seq).map_err(invalid)?;
            let mode = match args.mode {
                ExpectArg::Exact => ExpectationMode::Exact,
                ExpectArg::MonteCarlo => ExpectationMode::MonteCarlo,
            };
            let e = expected_hamming(&params, &seq, mode, args.sweeps, seed).map_err(invalid)?;
            emit(cli, &json_line(&e))
        }
    }
}
