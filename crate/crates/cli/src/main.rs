use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use presolve::io::{
    mps_name, params, read_mps, read_record, read_sol, record_mode, shifted_geomean, write_mps, write_record, write_sol,
    ConflictReport, MpsFormat, MpsOptions, RecordFormat, Settings, Statistics,
};
use presolve::model::Problem;
use presolve::numerics::{NumericContext, NumericMode, Rational, Real};
use presolve::postsolve::postsolve_primal;
use presolve::scheduler::{presolve, PresolveStatus};

#[derive(Parser)]
#[command(name = "presolve", version, about = "Presolve mixed-integer programs and map solutions back")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Reduce an MPS file; writes the reduced problem, a postsolve record and statistics.
    Presolve(PresolveArgs),
    /// Turn a solution of the reduced problem into one of the original problem.
    Postsolve(PostsolveArgs),
    /// Summarise conflicts between presolvers from verbosity-4 logs.
    Report(ReportArgs),
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum RecordLayout {
    #[default]
    Binary,
    Text,
}

#[derive(Args)]
struct MpsFlags {
    /// Read fixed-format MPS (names may contain blanks).
    #[arg(long)]
    fixed_format: bool,
    /// Integral columns without bounds are binary.
    #[arg(long)]
    legacy_integer_bounds: bool,
}

#[derive(Args)]
struct PresolveArgs {
    /// MPS file to presolve.
    input: PathBuf,
    /// Reduced problem [default: <input>.reduced.mps].
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Postsolve record [default: <input>.postsolve].
    #[arg(long)]
    record: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t)]
    record_format: RecordLayout,
    /// Statistics as key=value lines [default: <input>.stats].
    #[arg(long)]
    stats: Option<PathBuf>,
    /// Write the message log here instead of standard error.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Parameter file with `key = value` lines.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Set a parameter; may be repeated.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads, 0 for one per core.
    #[arg(long)]
    threads: Option<usize>,
    /// 0 silent, 1 summary, 2 rounds, 3 presolver calls, 4 every transaction.
    #[arg(long)]
    verbosity: Option<u8>,
    /// Arithmetic: float or rational.
    #[arg(long)]
    mode: Option<String>,
    /// Fraction of columns, rows or nonzeros a round must change to restart at the fast presolvers
    #[arg(long)]
    abortfac: Option<f64>,
    /// With one thread, apply each presolver's reductions before the next one runs.
    #[arg(long)]
    apply_immediately: bool,
    /// Switch off a presolver by name; may be repeated.
    #[arg(long, value_name = "PRESOLVER")]
    disable: Vec<String>,
    /// Print every parameter with its resolved value and exit.
    #[arg(long)]
    print_params: bool,
    #[command(flatten)]
    mps: MpsFlags,
}

#[derive(Args)]
struct PostsolveArgs {
    /// Record written by `presolve`.
    #[arg(long)]
    record: PathBuf,
    /// Solution of the reduced problem.
    #[arg(long)]
    solution: PathBuf,
    /// Original solution [default: original.sol next to the reduced solution].
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Check the result against this original MPS file.
    #[arg(long)]
    check: Option<PathBuf>,
    /// Feasibility tolerance in float mode.
    #[arg(long)]
    feastol: Option<f64>,
    #[command(flatten)]
    mps: MpsFlags,
}

#[derive(Args)]
struct ReportArgs {
    /// Log files, statistics files (*.stats) or directories containing them.
    #[arg(required = true)]
    paths: Vec<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

impl MpsFlags {
    fn options(&self, legacy: bool) -> MpsOptions {
        MpsOptions {
            format: if self.fixed_format { MpsFormat::Fixed } else { MpsFormat::Free },
            legacy_integer_bounds: legacy || self.legacy_integer_bounds,
        }
    }
}

fn with_suffix(input: &Path, suffix: &str) -> PathBuf {
    let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    input.with_file_name(format!("{stem}{suffix}"))
}

impl PresolveArgs {
    /// Command-line parameters in the order they override each other.
    fn flag_params(&self) -> Result<Vec<(String, String)>> {
        let mut flags = Vec::new();
        let mut put = |k: &str, v: String| flags.push((k.to_string(), v));
        if let Some(t) = self.threads {
            put(params::THREADS, t.to_string());
        }
        if let Some(v) = self.verbosity {
            put(params::VERBOSITY, v.to_string());
        }
        if let Some(m) = &self.mode {
            put(params::MODE, m.clone());
        }
        if let Some(a) = self.abortfac {
            put(params::ABORTFAC, a.to_string());
        }
        if self.apply_immediately {
            put(params::APPLY_IMMEDIATELY, "true".into());
        }
        if self.mps.legacy_integer_bounds {
            put(params::LEGACY_INTEGER_BOUNDS, "true".into());
        }
        for name in &self.disable {
            put(&format!("{name}.enabled"), "false".into());
        }
        for item in &self.set {
            let (k, v) = item
                .split_once('=')
                .with_context(|| format!("--set expects KEY=VALUE, got `{item}`"))?;
            put(k.trim(), v.trim().to_string());
        }
        Ok(flags)
    }

    fn settings(&self) -> Result<Settings> {
        let file = match &self.params {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                Settings::parse_file(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => Vec::new(),
        };
        let env = Settings::from_env(std::env::vars());
        Settings::resolve(&file, &env, &self.flag_params()?).map_err(anyhow::Error::msg)
    }
}

fn emit_log(lines: &[String], path: Option<&Path>) -> Result<()> {
    match path {
        Some(path) => {
            let mut text = lines.join("\n");
            if !text.is_empty() {
                text.push('\n');
            }
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            for line in lines {
                eprintln!("{line}");
            }
            Ok(())
        }
    }
}

fn run_presolve<R: Real>(args: &PresolveArgs, settings: &Settings) -> Result<PresolveStatus> {
    let input = &args.input;
    let problem: Problem<R> = read_mps(input, args.mps.options(settings.legacy_integer_bounds))
        .with_context(|| format!("reading {}", input.display()))?;
    let ctx = settings.options.context::<R>()?;
    let warnings = problem.validate(&ctx).with_context(|| format!("invalid problem in {}", input.display()))?;
    if settings.options.verbosity > 0 {
        for w in warnings {
            eprintln!("warning: {w}");
        }
    }
    let start = Instant::now();
    let result = presolve(problem.clone(), &settings.options, ctx);
    let elapsed = start.elapsed();
    emit_log(&result.log, args.log.as_deref())?;

    let stats_path = args.stats.clone().unwrap_or_else(|| with_suffix(input, ".stats"));
    let stats = Statistics::new(&problem, &result, settings.options.effective_threads(), elapsed);
    fs::write(&stats_path, stats.to_text()).with_context(|| format!("writing {}", stats_path.display()))?;

    if matches!(result.status, PresolveStatus::Reduced | PresolveStatus::Unchanged) {
        let reduced_path = args.output.clone().unwrap_or_else(|| with_suffix(input, ".reduced.mps"));
        write_mps(&result.reduced, &reduced_path).with_context(|| format!("writing {}", reduced_path.display()))?;
        let record_path = args.record.clone().unwrap_or_else(|| with_suffix(input, ".postsolve"));
        let layout = match args.record_format {
            RecordLayout::Binary => RecordFormat::Binary,
            RecordLayout::Text => RecordFormat::Text,
        };
        fs::write(&record_path, write_record(&result.record, layout))
            .with_context(|| format!("writing {}", record_path.display()))?;
    }
    Ok(result.status)
}

/// Exit code for the run.
fn cmd_presolve(args: &PresolveArgs) -> Result<u8> {
    let settings = args.settings()?;
    if args.print_params {
        print!("{}", settings.to_text());
        return Ok(0);
    }
    let status = match settings.mode {
        NumericMode::Float64 => run_presolve::<f64>(args, &settings)?,
        NumericMode::Rational => run_presolve::<Rational>(args, &settings)?,
    };
    eprintln!("presolve status {status}");
    Ok(match status {
        PresolveStatus::Reduced | PresolveStatus::Unchanged => 0,
        PresolveStatus::Infeasible => 2,
        PresolveStatus::Unbounded => 3,
    })
}

fn run_postsolve<R: Real>(args: &PostsolveArgs, bytes: &[u8]) -> Result<()> {
    let record = read_record::<R>(bytes).with_context(|| format!("reading {}", args.record.display()))?;
    let reduced_names: Vec<String> = record
        .col_map
        .iter()
        .enumerate()
        .map(|(k, &j)| mps_name(&record.col_names[j], 'C', k))
        .collect();
    let text = fs::read_to_string(&args.solution).with_context(|| format!("reading {}", args.solution.display()))?;
    let (values, _) = read_sol::<R>(&text, &reduced_names).with_context(|| format!("parsing {}", args.solution.display()))?;
    let mut settings = Settings::default();
    if let Some(tol) = args.feastol {
        settings.options.feastol = tol;
    }
    let ctx: NumericContext<R> = settings.options.context()?;
    let solution = postsolve_primal(&record, &values, &ctx)?;
    if let Some(path) = &args.check {
        let original: Problem<R> =
            read_mps(path, args.mps.options(false)).with_context(|| format!("reading {}", path.display()))?;
        if original.ncols() != solution.values.len() {
            bail!("{} has {} columns, the record {}", path.display(), original.ncols(), solution.values.len());
        }
        original
            .is_feasible(&solution.values, &ctx)
            .map_err(|e| anyhow::anyhow!("postsolved solution violates {}: {e}", path.display()))?;
    }
    let names: Vec<String> = record.col_names.iter().enumerate().map(|(j, n)| mps_name(n, 'C', j)).collect();
    let output = args
        .output
        .clone()
        .unwrap_or_else(|| args.solution.with_file_name("original.sol"));
    fs::write(&output, write_sol(&names, &solution.values, &solution.objective))
        .with_context(|| format!("writing {}", output.display()))?;
    eprintln!("objective {}", solution.objective);
    Ok(())
}

fn cmd_postsolve(args: &PostsolveArgs) -> Result<()> {
    let bytes = fs::read(&args.record).with_context(|| format!("reading {}", args.record.display()))?;
    match record_mode(&bytes).with_context(|| format!("reading {}", args.record.display()))? {
        NumericMode::Float64 => run_postsolve::<f64>(args, &bytes),
        NumericMode::Rational => run_postsolve::<Rational>(args, &bytes),
    }
}

fn is_stats(path: &Path) -> bool {
    path.extension().is_some_and(|e| e == "stats")
}

fn report_inputs(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for path in paths {
        if path.is_dir() {
            let mut entries: Vec<PathBuf> = fs::read_dir(path)
                .with_context(|| format!("listing {}", path.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && (is_stats(p) || p.extension().is_some_and(|e| e == "log")))
                .collect();
            entries.sort();
            files.extend(entries);
        } else {
            files.push(path.clone());
        }
    }
    Ok(files)
}

fn cmd_report(args: &ReportArgs) -> Result<()> {
    let mut report = ConflictReport::default();
    let mut times = Vec::new();
    let mut rounds = Vec::new();
    for path in report_inputs(&args.paths)? {
        let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
        if is_stats(&path) {
            let stats = Statistics::parse(&text).with_context(|| format!("parsing {}", path.display()))?;
            stats
                .check_consistency()
                .map_err(|e| anyhow::anyhow!("{}: {e}", path.display()))?;
            if let Some(t) = stats.get("time_seconds").and_then(|t| t.parse::<f64>().ok()) {
                times.push(t);
            }
            if let Some(r) = stats.get_usize("rounds_total") {
                rounds.push(r as f64);
            }
        } else {
            report.merge(&ConflictReport::from_log(&text));
        }
    }
    if report.logs == 0 && times.is_empty() {
        bail!("no logs or statistics found");
    }
    let mut out = report.render();
    if !times.is_empty() {
        out.push_str(&format!(
            "\nshifted geometric means over {} runs: time_seconds {:.6} (shift 1), rounds_total {:.3} (shift 1)\n",
            times.len(),
            shifted_geomean(&times, 1.0)?,
            shifted_geomean(&rounds, 1.0).unwrap_or(0.0)
        ));
    }
    match &args.output {
        Some(path) => fs::write(path, out).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{out}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Presolve(args) => cmd_presolve(args),
        Command::Postsolve(args) => cmd_postsolve(args).map(|()| 0),
        Command::Report(args) => cmd_report(args).map(|()| 0),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
