use std::fs;
use std::io::{self, Read, Write};
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use trimhill::format::{
    detection_csv, estimate_csv, mc_report_csv, multi_series_csv, series_csv, to_json, DetectDoc,
    DetectionDoc, EstimateDoc, McReportDoc, SeriesDoc,
};
use trimhill::ingest::DEFAULT_DITHER_EPSILON;
use trimhill::{
    adaptive_trimmed_hill, alpha_schedule, classic_hill, diagnostic_series, hill_series,
    ingest_csv, k_opt_default, pareto_qq_series, ratio_statistics, run_mc, run_mc_with_threads,
    select_k0, trimmed_hill, ColumnSelector, HeaderMode, IngestOptions, McConfig, ModelSpec,
    Sample, TiePolicy, DEFAULT_LEVEL, DEFAULT_WEIGHT,
};
use trimhill_service::ServiceConfig;

#[derive(Parser)]
#[command(
    name = "trimhill",
    version,
    about = "Trimmed Hill tail-index estimation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the tail index of a CSV column.
    Estimate(EstimateArgs),
    /// Run the sequential test for the number of extreme outliers.
    Detect(DetectArgs),
    /// Trimmed Hill diagnostic plot series (estimate against k0 at fixed k).
    Diagnose(DiagnoseArgs),
    /// Classic, trimmed and biased Hill plot series over a range of k.
    Hillplot(HillplotArgs),
    /// Pareto quantile plot series.
    Qq(QqArgs),
    /// Run a Monte Carlo experiment from a TOML or JSON config.
    Simulate(SimulateArgs),
    /// Serve the HTTP API.
    Serve(ServeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum TieArg {
    None,
    Unique,
    Dither,
}

#[derive(Clone, Copy, ValueEnum)]
enum HeaderArg {
    Auto,
    Yes,
    No,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct InputArgs {
    /// CSV file to read, `-` for stdin.
    #[arg(long)]
    input: PathBuf,
    /// Column name or zero-based index (default: first numeric column).
    #[arg(long)]
    column: Option<String>,
    #[arg(long, value_enum, default_value = "auto")]
    header: HeaderArg,
    #[arg(long, default_value = ",")]
    delimiter: char,
    #[arg(long, value_enum, default_value = "unique")]
    tie_policy: TieArg,
    /// Dither amplitude (uniform noise on [0, epsilon)).
    #[arg(long, default_value_t = DEFAULT_DITHER_EPSILON)]
    epsilon: f64,
    /// Seed for dithering; required with `--tie-policy dither`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct TestArgs {
    #[arg(long, default_value_t = DEFAULT_LEVEL)]
    q: f64,
    #[arg(long, default_value_t = DEFAULT_WEIGHT)]
    a: f64,
}

#[derive(Clone, Copy)]
enum Auto<T> {
    Auto,
    Value(T),
}

fn positive_or_auto(s: &str) -> Result<Auto<usize>, String> {
    if s == "auto" {
        return Ok(Auto::Auto);
    }
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(v) => Ok(Auto::Value(v)),
        Err(_) => Err(format!("expected a positive integer or 'auto', got '{s}'")),
    }
}

fn count_or_auto(s: &str) -> Result<Auto<usize>, String> {
    if s == "auto" {
        return Ok(Auto::Auto);
    }
    s.parse::<usize>()
        .map(Auto::Value)
        .map_err(|_| format!("expected a non-negative integer or 'auto', got '{s}'"))
}

fn model_hint(s: &str) -> Result<ModelSpec, String> {
    ModelSpec::from_str(s).map_err(|e| e.to_string())
}

#[derive(Args)]
struct EstimateArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Number of top order statistics, or `auto` (needs `--model`).
    #[arg(long, value_parser = positive_or_auto)]
    k: Auto<usize>,
    /// Number of trimmed extremes, or `auto` for the sequential test.
    #[arg(long, value_parser = count_or_auto)]
    k0: Option<Auto<usize>>,
    /// Model hint for `--k auto`, e.g. `pareto(1,2)`, `burr(1,0.5,2)`, `abst(2)`.
    #[arg(long, value_parser = model_hint)]
    model: Option<ModelSpec>,
    #[command(flatten)]
    test: TestArgs,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    k: u64,
    #[command(flatten)]
    test: TestArgs,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct DiagnoseArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    k: u64,
    /// Output file; `.csv` writes CSV, anything else JSON.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct HillplotArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    k0: usize,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    kmin: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    kmax: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct QqArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    /// Experiment configuration (`.toml` or `.json`).
    #[arg(long)]
    config: PathBuf,
    /// Report file; `.csv` writes flat records, anything else JSON.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    bind: IpAddr,
    /// Allowed CORS origin (default: any).
    #[arg(long)]
    cors_origin: Option<String>,
    /// Largest accepted dataset, in values.
    #[arg(long, default_value_t = 10_000_000)]
    max_values: usize,
    /// Largest `reps * n * |k_grid|` accepted by `/v1/simulate`.
    #[arg(long, default_value_t = 50_000_000)]
    simulation_budget: u128,
}

/// Failure of a subcommand: bad usage (exit 2) or bad data (exit 1).
enum Failure {
    Usage(String),
    Data(String),
}

impl From<trimhill::Error> for Failure {
    fn from(e: trimhill::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn load_sample(args: &InputArgs) -> Result<Sample, Failure> {
    let tie_policy = match args.tie_policy {
        TieArg::None => TiePolicy::None,
        TieArg::Unique => TiePolicy::Unique,
        TieArg::Dither => TiePolicy::Dither {
            epsilon: args.epsilon,
            seed: args
                .seed
                .ok_or_else(|| Failure::Usage("--tie-policy dither requires --seed".into()))?,
        },
    };
    if !args.delimiter.is_ascii() {
        return Err(Failure::Usage(
            "--delimiter must be an ASCII character".into(),
        ));
    }
    let opts = IngestOptions {
        column: match &args.column {
            None => ColumnSelector::Auto,
            Some(c) => match c.parse::<usize>() {
                Ok(i) => ColumnSelector::Index(i),
                Err(_) => ColumnSelector::Name(c.clone()),
            },
        },
        header: match args.header {
            HeaderArg::Auto => HeaderMode::Auto,
            HeaderArg::Yes => HeaderMode::Yes,
            HeaderArg::No => HeaderMode::No,
        },
        tie_policy,
        delimiter: args.delimiter as u8,
    };
    let located = |e: trimhill::Error| Failure::Data(format!("{}: {e}", args.input.display()));
    if args.input.as_os_str() == "-" {
        let mut buf = Vec::new();
        io::stdin().read_to_end(&mut buf)?;
        ingest_csv(buf.as_slice(), &opts).map_err(located)
    } else {
        let file = fs::File::open(&args.input)
            .map_err(|e| Failure::Data(format!("{}: {e}", args.input.display())))?;
        ingest_csv(io::BufReader::new(file), &opts).map_err(located)
    }
}

fn emit(text: &str) -> CmdResult {
    io::stdout().write_all(text.as_bytes())?;
    Ok(())
}

fn write_out(path: &Path, text: &str) -> CmdResult {
    fs::write(path, text).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))
}

fn is_csv(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn estimate(args: EstimateArgs) -> CmdResult {
    let s = load_sample(&args.input)?;
    let k = match args.k {
        Auto::Value(k) => k,
        Auto::Auto => {
            let model = args
                .model
                .ok_or_else(|| Failure::Usage("--k auto requires a --model hint".into()))?;
            k_opt_default(&model, s.len())?
        }
    };
    let doc = match args.k0 {
        None => EstimateDoc {
            tail_estimate: classic_hill(&s, k)?,
            detection: None,
        },
        Some(Auto::Value(k0)) => EstimateDoc {
            tail_estimate: trimmed_hill(&s, k0, k)?,
            detection: None,
        },
        Some(Auto::Auto) => {
            let (d, e) = adaptive_trimmed_hill(&s, k, args.test.q, args.test.a)?;
            EstimateDoc {
                tail_estimate: e,
                detection: Some(DetectionDoc::from(&d)),
            }
        }
    };
    match args.format {
        Format::Json => emit(&to_json(&doc)),
        Format::Csv => emit(&estimate_csv(&doc.tail_estimate, doc.detection.as_ref())?),
    }
}

fn detect(args: DetectArgs) -> CmdResult {
    let s = load_sample(&args.input)?;
    let k = args.k as usize;
    let ratios = ratio_statistics(&s, k)?;
    let d = select_k0(&ratios, &alpha_schedule(k, args.test.q, args.test.a)?)?;
    let doc = DetectDoc {
        detection: DetectionDoc::from(&d),
    };
    match args.format {
        Format::Json => emit(&to_json(&doc)),
        Format::Csv => emit(&detection_csv(&doc.detection)?),
    }
}

fn diagnose(args: DiagnoseArgs) -> CmdResult {
    let s = load_sample(&args.input)?;
    let series = diagnostic_series(&s, args.k as usize)?;
    let text = if is_csv(&args.out) {
        series_csv(&series)?
    } else {
        to_json(&SeriesDoc { series })
    };
    write_out(&args.out, &text)
}

fn hillplot(args: HillplotArgs) -> CmdResult {
    let s = load_sample(&args.input)?;
    let h = hill_series(&s, args.k0, args.kmin as usize, args.kmax as usize)?;
    let text = if is_csv(&args.out) {
        multi_series_csv(&[
            ("classic", &h.classic),
            ("trimmed", &h.trimmed),
            ("biased", &h.biased),
        ])?
    } else {
        to_json(&h)
    };
    write_out(&args.out, &text)
}

fn qq(args: QqArgs) -> CmdResult {
    let s = load_sample(&args.input)?;
    let series = pareto_qq_series(&s);
    let text = if is_csv(&args.out) {
        series_csv(&series)?
    } else {
        to_json(&SeriesDoc { series })
    };
    write_out(&args.out, &text)
}

fn simulate(args: SimulateArgs) -> CmdResult {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| Failure::Data(format!("{}: {e}", args.config.display())))?;
    let is_json = args
        .config
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let cfg = if is_json {
        McConfig::from_json_str(&text)
    } else {
        McConfig::from_toml_str(&text)
    }
    .map_err(|e| Failure::Data(format!("{}: {e}", args.config.display())))?;
    let report = match args.threads {
        Some(0) => return Err(Failure::Usage("--threads must be at least 1".into())),
        Some(t) => run_mc_with_threads(&cfg, t)?,
        None => run_mc(&cfg)?,
    };
    eprintln!(
        "{} replications in {:.2}s",
        report.reps_used,
        report.elapsed.as_secs_f64()
    );
    let out = if is_csv(&args.out) {
        mc_report_csv(&report)?
    } else {
        to_json(&McReportDoc { mc_report: report })
    };
    write_out(&args.out, &out)
}

fn serve(args: ServeArgs) -> CmdResult {
    let config = ServiceConfig {
        max_values: args.max_values,
        simulation_budget: args.simulation_budget,
        cors_origin: args.cors_origin,
        ..Default::default()
    };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(trimhill_service::serve(
        SocketAddr::new(args.bind, args.port),
        config,
    ))?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Estimate(a) => estimate(a),
        Command::Detect(a) => detect(a),
        Command::Diagnose(a) => diagnose(a),
        Command::Hillplot(a) => hillplot(a),
        Command::Qq(a) => qq(a),
        Command::Simulate(a) => simulate(a),
        Command::Serve(a) => serve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
