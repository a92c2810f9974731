use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use simplex_reduce::complex::DEFAULT_SIMPLEX_CAP;
use simplex_reduce::experiments::{
    audit_experiment, clique_regime_experiment, complexity_audit, moment_experiment, AuditResult, AuditSpec,
    MomentSpec, RegimeSpec,
};
use simplex_reduce::geometry::{add_boundary_grid, binomial_process, poisson_process, rips_complex};
use simplex_reduce::homology::boundary_matrix;
use simplex_reduce::io as formats;
use simplex_reduce::reduction::{verify_dominating, verify_nash};
use simplex_reduce::{
    betti_numbers, reduce, Error, FieldChoice, Metric, ReduceOptions, ReductionReport, RipsParams, SimplicialComplex,
    TorusSpec,
};

const ARTIFACT_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "simplex-reduce", version, about = "Homology-preserving reduction of simplicial complexes")]
struct Cli {
    /// Refuse to build complexes with more simplices than this.
    #[arg(long, global = true, default_value_t = DEFAULT_SIMPLEX_CAP)]
    simplex_cap: usize,
    /// Print progress to standard error.
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a point process on a torus or square.
    Generate(GenerateArgs),
    /// Build the Vietoris-Rips complex of a point file.
    Rips(RipsArgs),
    /// Print Betti numbers of a complex file.
    Homology(HomologyArgs),
    /// Remove vertices while keeping the low Betti numbers.
    Reduce(ReduceArgs),
    /// Run a Monte-Carlo experiment described by a JSON config.
    Experiment(ExperimentArgs),
    /// Check a saved reduction report against its input complex.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum Process {
    Binomial,
    Poisson,
}

#[derive(Args, Serialize)]
struct GenerateArgs {
    #[arg(long, value_enum, default_value = "binomial")]
    process: Process,
    /// Number of points for the binomial process.
    #[arg(long)]
    n: Option<usize>,
    /// Intensity for the Poisson process.
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 2)]
    d: usize,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value = "uniform")]
    metric: Metric,
    /// Use the square without wrap-around instead of the torus.
    #[arg(long)]
    square: bool,
    /// Add evenly spaced points on the square's perimeter with this spacing.
    #[arg(long, requires = "square")]
    boundary_step: Option<f64>,
    /// Write the ids of the boundary points here.
    #[arg(long, requires = "boundary_step")]
    critical_out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RipsArgs {
    /// Points are joined when strictly closer than this.
    #[arg(long)]
    epsilon: f64,
    #[arg(long)]
    max_dim: Option<usize>,
    /// Point file; standard input when absent.
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct HomologyArgs {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Report beta_0 .. beta_{k0-1}.
    #[arg(long, default_value_t = 2)]
    k0: usize,
    /// rational, gf2 or gf<p>.
    #[arg(long, default_value = "rational")]
    field: FieldChoice,
    /// Also print the boundary matrix of dimension K as `row col value` triplets.
    #[arg(long, value_name = "K")]
    dump_boundary: Option<usize>,
}

#[derive(Args)]
struct ReduceArgs {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// File of critical vertex ids.
    #[arg(long)]
    critical: Option<PathBuf>,
    #[arg(long)]
    k0: usize,
    #[arg(long)]
    full_domain: bool,
    #[arg(long, default_value = "rational")]
    field: FieldChoice,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Compare incremental tables with a full recomputation after each removal.
    #[arg(long)]
    verify_tables: bool,
    /// Report path; standard output when absent.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Also write the reduced complex here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentKind {
    Moments,
    Regime,
    Audit,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(value_enum)]
    kind: ExperimentKind,
    /// JSON file with the experiment parameters.
    #[arg(long)]
    config: PathBuf,
    /// Output directory for report.json, CSV tables and the SVG plot.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Check {
    Nash,
    Dominating,
    Audit,
}

#[derive(Args)]
struct VerifyArgs {
    /// Report written by `reduce`.
    #[arg(long)]
    report: PathBuf,
    /// The complex the report was computed from.
    #[arg(long = "in")]
    input: PathBuf,
    /// Checks to run; nash and audit when absent.
    #[arg(long, value_enum)]
    check: Vec<Check>,
}

/// Parameters of a `reduce` run as resolved from the command line.
#[derive(Serialize, Deserialize)]
struct ReduceConfig {
    input: Option<PathBuf>,
    critical_file: Option<PathBuf>,
    k0: usize,
    full_domain: bool,
    field: FieldChoice,
    seed: u64,
    verify_tables: bool,
    simplex_cap: usize,
}

#[derive(Serialize, Deserialize)]
struct ReduceArtifact {
    format_version: u32,
    command: String,
    config: ReduceConfig,
    report: ReductionReport,
}

#[derive(Serialize)]
struct Verification {
    nash: Option<bool>,
    dominating: Option<bool>,
    audit: Option<AuditResult>,
}

enum Failure {
    Usage(String),
    Resource(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_resource() {
            Failure::Resource(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

fn open_input(path: Option<&Path>) -> CliResult<Box<dyn BufRead>> {
    Ok(match path {
        Some(p) => Box::new(BufReader::new(
            File::open(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufReader::new(io::stdin())),
    })
}

fn open_output(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn read_complex(path: Option<&Path>, cap: usize) -> CliResult<SimplicialComplex> {
    Ok(formats::read_complex_with_cap(open_input(path)?, cap)?)
}

fn generate(args: &GenerateArgs) -> CliResult<()> {
    let torus = if args.square { TorusSpec::square(args.d, args.a)? } else { TorusSpec::new(args.d, args.a)? };
    let torus = torus.with_metric(args.metric);
    let mut config = match args.process {
        Process::Binomial => {
            let n = args.n.ok_or_else(|| Failure::Usage("--process binomial needs --n".into()))?;
            binomial_process(torus, n, args.seed)
        }
        Process::Poisson => {
            let lambda = args.lambda.ok_or_else(|| Failure::Usage("--process poisson needs --lambda".into()))?;
            poisson_process(torus, lambda, args.seed)?
        }
    };
    if let Some(step) = args.boundary_step {
        let critical = add_boundary_grid(&mut config, step)?;
        if let Some(path) = &args.critical_out {
            let mut w = open_output(Some(path))?;
            formats::write_vertex_list(&mut w, &critical)?;
            w.flush()?;
        }
    }
    let mut w = open_output(args.out.as_deref())?;
    writeln!(w, "# generate {}", serde_json::to_string(args)?)?;
    formats::write_points(&mut w, &config)?;
    w.flush()?;
    Ok(())
}

fn rips(args: &RipsArgs, cap: usize, verbose: bool) -> CliResult<()> {
    let config = formats::read_points(open_input(args.input.as_deref())?)?;
    let params = RipsParams { epsilon: args.epsilon, max_dim: args.max_dim, simplex_cap: cap };
    let complex = rips_complex(&config, &params)?;
    if verbose {
        eprintln!("{} points, simplex counts {:?}", config.len(), complex.s_counts());
    }
    let mut w = open_output(args.out.as_deref())?;
    writeln!(w, "# rips {}", serde_json::to_string(&params)?)?;
    formats::write_complex(&mut w, &complex)?;
    w.flush()?;
    Ok(())
}

fn homology(args: &HomologyArgs, cap: usize) -> CliResult<()> {
    if args.k0 == 0 {
        return Err(Failure::Usage("--k0 must be at least 1".into()));
    }
    let complex = read_complex(args.input.as_deref(), cap)?;
    let betti = betti_numbers(&complex, args.k0, args.field);
    let mut out = io::stdout().lock();
    writeln!(out, "beta: {betti}")?;
    if let Some(k) = args.dump_boundary {
        boundary_matrix(&complex, k).write_triplets(&mut out)?;
    }
    Ok(())
}

fn reduce_cmd(args: &ReduceArgs, cap: usize, verbose: bool) -> CliResult<()> {
    let complex = read_complex(args.input.as_deref(), cap)?;
    let critical = match &args.critical {
        Some(path) => formats::read_vertex_list(open_input(Some(path))?)?,
        None => Vec::new(),
    };
    let options = ReduceOptions { full_domain: args.full_domain, field: args.field, verify_tables: args.verify_tables };
    let report = reduce(&complex, &critical, args.k0, &options, args.seed)?;
    if verbose {
        eprintln!(
            "removed {} of {} vertices, bounds {:?}, betti {:?}",
            report.removed,
            complex.num_vertices(),
            report.bounds,
            report.final_betti
        );
    }
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    if let Some(path) = &args.out {
        let mut w = open_output(Some(path))?;
        formats::write_complex(&mut w, &report.final_complex)?;
        w.flush()?;
    }
    let artifact = ReduceArtifact {
        format_version: ARTIFACT_VERSION,
        command: "reduce".into(),
        config: ReduceConfig {
            input: args.input.clone(),
            critical_file: args.critical.clone(),
            k0: args.k0,
            full_domain: args.full_domain,
            field: args.field,
            seed: args.seed,
            verify_tables: args.verify_tables,
            simplex_cap: cap,
        },
        report,
    };
    let mut w = open_output(args.report.as_deref())?;
    serde_json::to_writer_pretty(&mut w, &artifact)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<T> {
    let mut text = String::new();
    File::open(path)
        .and_then(|mut f| f.read_to_string(&mut text))
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    fs::write(dir.join(name), contents).map_err(|e| Failure::Usage(format!("{}: {e}", dir.join(name).display())))
}

fn experiment(args: &ExperimentArgs, verbose: bool) -> CliResult<()> {
    if let Some(threads) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Failure::Usage(e.to_string()))?;
    }
    fs::create_dir_all(&args.out).map_err(|e| Failure::Usage(format!("{}: {e}", args.out.display())))?;
    let (json, summary, samples, svg, wall) = match args.kind {
        ExperimentKind::Moments => {
            let spec: MomentSpec = read_json(&args.config)?;
            let r = moment_experiment(&spec)?;
            (serde_json::to_string_pretty(&r)?, r.summary_csv(), Some(r.samples_csv()), r.svg(), r.wall_time_s)
        }
        ExperimentKind::Regime => {
            let spec: RegimeSpec = read_json(&args.config)?;
            let r = clique_regime_experiment(&spec)?;
            (serde_json::to_string_pretty(&r)?, r.summary_csv(), Some(r.samples_csv()), r.svg(), r.wall_time_s)
        }
        ExperimentKind::Audit => {
            let spec: AuditSpec = read_json(&args.config)?;
            let r = audit_experiment(&spec)?;
            (serde_json::to_string_pretty(&r)?, r.summary_csv(), None, r.svg(), r.wall_time_s)
        }
    };
    write_file(&args.out, "report.json", &(json + "\n"))?;
    write_file(&args.out, "summary.csv", &summary)?;
    if let Some(samples) = samples {
        write_file(&args.out, "samples.csv", &samples)?;
    }
    write_file(&args.out, "plot.svg", &svg)?;
    if verbose {
        eprintln!("finished in {wall:.2} s, results in {}", args.out.display());
    }
    Ok(())
}

/// Returns whether every requested check passed.
fn verify(args: &VerifyArgs, cap: usize) -> CliResult<bool> {
    let artifact: ReduceArtifact = read_json(&args.report)?;
    let initial = read_complex(Some(&args.input), cap)?;
    let checks = if args.check.is_empty() { vec![Check::Nash, Check::Audit] } else { args.check.clone() };
    let report = &artifact.report;
    let result = Verification {
        nash: checks.contains(&Check::Nash).then(|| verify_nash(report, &initial)).transpose()?,
        dominating: checks.contains(&Check::Dominating).then(|| verify_dominating(report, &initial)).transpose()?,
        audit: checks.contains(&Check::Audit).then(|| complexity_audit(report, &initial)),
    };
    println!("{}", serde_json::to_string_pretty(&result)?);
    Ok(result.nash != Some(false) && result.dominating != Some(false) && result.audit.is_none_or(|a| a.passed))
}

fn run(cli: &Cli) -> CliResult<bool> {
    match &cli.command {
        Command::Generate(a) => generate(a).map(|_| true),
        Command::Rips(a) => rips(a, cli.simplex_cap, cli.verbose).map(|_| true),
        Command::Homology(a) => homology(a, cli.simplex_cap).map(|_| true),
        Command::Reduce(a) => reduce_cmd(a, cli.simplex_cap, cli.verbose).map(|_| true),
        Command::Experiment(a) => experiment(a, cli.verbose).map(|_| true),
        Command::Verify(a) => verify(a, cli.simplex_cap),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("verification failed");
            ExitCode::from(1)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Resource(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
