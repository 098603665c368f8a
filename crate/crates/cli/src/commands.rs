//! Subcommand orchestration: argument types, the run pipeline, artifact
//! writing, and exit-code mapping.
//!
//! Exit codes: 0 success, 2 input error, 3 numerical failure, 4
//! configuration error. Output files are written atomically
//! (write-temp-then-rename), so a failed run leaves no partial artifacts.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use bubble_core::{
    bsadf_cv_sequence, classify, gen_multi_bubble, load_draws, p_value, quantile_table,
    sadf_cv_sequence, save_draws, simulate_null, stamp, write_series, AdfConfig, CsvSchema,
    CvSequence, DateFormat, DgpSpec, Error, Frequency, NullDraws, Reinit, Series, StampConfig,
    StatKind, TestResult, WindowPolicy,
};

use crate::plot::render_plot;
use crate::report::{
    episode_out, render_text, sequences_from, Classification, ConfigEcho, CriticalValuesOut,
    CvSequenceOut, Diagnostics, PValues, Report, SeriesInfo, Statistics, ToolInfo,
};

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: 4,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

/// Map library errors onto the documented exit-code classes.
pub fn exit_code(e: &Error) -> i32 {
    use Error::*;
    match e {
        EmptyInput(_) | MalformedRow { .. } | MissingValue { .. } | NonMonotonicDates { .. }
        | DuplicateDate { .. } | NonConsecutiveMonths { .. } | MissingColumn(_)
        | NonFiniteValue { .. } | EmptyRange { .. } | SeriesTooShort { .. }
        | CacheKeyMismatch(_) | Io(_) => 2,
        DegenerateRegression { .. } | AllWindowsDegenerate | SimulationFailed { .. }
        | EmptyDraws | WindowTooSmall { .. } | LengthMismatch { .. } => 3,
        InvalidRange { .. } | InvalidMinWindow { .. } | InvalidLevel(_)
        | MissingStandardLevels | InvalidSpec(_) | InvalidConfig(_) => 4,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "bubble",
    version,
    about = "Detect and date-stamp explosive episodes in valuation-ratio time series"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the SADF/GSADF tests with Monte Carlo critical values.
    Test(TestArgs),
    /// Run the tests and date-stamp exuberance episodes.
    Datestamp(DatestampArgs),
    /// Generate a synthetic series with labeled bubble episodes.
    Simulate(SimulateArgs),
    /// Print a critical-value table for a sample length.
    Critvals(CritvalsArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Text,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DateFormatArg {
    /// Decide from the first data row.
    Auto,
    /// YYYY-MM-DD
    Date,
    /// YYYY-MM
    Month,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FrequencyArg {
    Auto,
    Daily,
    Monthly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ThresholdArg {
    /// Critical value of the sup-ADF statistic at each endpoint's sample
    /// size (the original method's date-stamping rule).
    Sadf,
    /// Pointwise quantile of the null BSADF draws at each endpoint. More
    /// permissive: flags spurious episodes on roughly a third of pure
    /// random walks at the 95% level.
    BsadfQuantile,
}

impl ThresholdArg {
    fn label(self) -> &'static str {
        match self {
            ThresholdArg::Sadf => "sadf",
            ThresholdArg::BsadfQuantile => "bsadf-quantile",
        }
    }
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Delimited input file with a header row (canonical schema: date,value).
    #[arg(long)]
    pub input: PathBuf,
    /// Field delimiter.
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// Name of the date column.
    #[arg(long, default_value = "date")]
    pub date_column: String,
    /// Name of the value column.
    #[arg(long, default_value = "value")]
    pub value_column: String,
    /// How date cells are formatted.
    #[arg(long, value_enum, default_value_t = DateFormatArg::Auto)]
    pub date_format: DateFormatArg,
    /// Sampling frequency; auto infers monthly from YYYY-MM dates.
    #[arg(long, value_enum, default_value_t = FrequencyArg::Auto)]
    pub frequency: FrequencyArg,
}

impl InputArgs {
    fn schema(&self) -> Result<CsvSchema, CliError> {
        if !self.delimiter.is_ascii() {
            return Err(CliError::config("delimiter must be an ASCII character"));
        }
        Ok(CsvSchema {
            date_column: self.date_column.clone(),
            value_column: self.value_column.clone(),
            date_format: match self.date_format {
                DateFormatArg::Auto => DateFormat::Auto,
                DateFormatArg::Date => DateFormat::IsoDate,
                DateFormatArg::Month => DateFormat::IsoMonth,
            },
            delimiter: self.delimiter as u8,
            frequency: match self.frequency {
                FrequencyArg::Auto => None,
                FrequencyArg::Daily => Some(Frequency::Daily),
                FrequencyArg::Monthly => Some(Frequency::Monthly),
            },
        })
    }
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    /// Lag order of the augmented regression.
    #[arg(long, default_value_t = 0)]
    pub lag: usize,
    /// Minimum window in observations (default: fractional rule).
    #[arg(long)]
    pub min_window: Option<usize>,
    /// Monte Carlo replications for critical values.
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    /// Master seed; all randomness derives from it.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Quantile levels for the critical-value table.
    #[arg(long, value_delimiter = ',', default_values_t = [0.90, 0.95, 0.99])]
    pub levels: Vec<f64>,
    /// Cache file for simulated null draws (loaded if present and matching,
    /// written otherwise).
    #[arg(long)]
    pub null_cache: Option<PathBuf>,
}

impl EngineArgs {
    fn policy(&self) -> WindowPolicy {
        match self.min_window {
            Some(w) => WindowPolicy::Explicit(w),
            None => WindowPolicy::Fractional,
        }
    }
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Output directory for artifacts.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Artifacts to write.
    #[arg(long, value_delimiter = ',', value_enum, default_values_t = [FormatArg::Text, FormatArg::Json])]
    pub formats: Vec<FormatArg>,
}

#[derive(Debug, Args)]
pub struct DatestampArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Quantile level of the critical-value sequence used for stamping.
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    /// Which critical-value sequence exceedance is measured against.
    #[arg(long, value_enum, default_value_t = ThresholdArg::Sadf)]
    pub threshold: ThresholdArg,
    /// Minimum episode duration in observations (default: ceil(ln T)).
    #[arg(long)]
    pub min_duration: Option<usize>,
    /// Output directory for artifacts.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Artifacts to write.
    #[arg(long, value_delimiter = ',', value_enum, default_values_t = [FormatArg::Text, FormatArg::Json, FormatArg::Svg])]
    pub formats: Vec<FormatArg>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Number of observations.
    #[arg(long)]
    pub t: usize,
    /// Episode intervals as sample fractions, e.g. 0.40:0.55,0.70:0.80.
    #[arg(long, value_delimiter = ',')]
    pub episodes: Vec<String>,
    /// Explosive root inside episodes.
    #[arg(long, default_value_t = 1.06)]
    pub delta: f64,
    /// Innovation standard deviation.
    #[arg(long, default_value_t = 1.0)]
    pub noise_sd: f64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Post-episode level policy: pre-bubble or fixed:<value>.
    #[arg(long, default_value = "pre-bubble")]
    pub reinit: String,
    /// Output directory for series.csv and series.labels.csv.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CritvalsArgs {
    /// Sample length the critical values are simulated for.
    #[arg(long)]
    pub t: usize,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Optional path for a JSON copy of the table.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Dispatch a parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Test(args) => cmd_test(&args),
        Command::Datestamp(args) => cmd_datestamp(&args),
        Command::Simulate(args) => cmd_simulate(&args),
        Command::Critvals(args) => cmd_critvals(&args),
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let dir = dir.unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir).map_err(Error::Io)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(Error::Io)?;
    tmp.write_all(bytes).map_err(Error::Io)?;
    tmp.persist(path)
        .map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn obtain_draws(
    t_len: usize,
    engine: &EngineArgs,
    config: AdfConfig,
    policy: WindowPolicy,
) -> Result<NullDraws, CliError> {
    if let Some(cache) = &engine.null_cache {
        if cache.exists() {
            return Ok(load_draws(
                cache,
                t_len,
                engine.reps,
                engine.seed,
                config,
                policy,
            )?);
        }
        let draws = simulate_null(t_len, engine.reps, engine.seed, config, policy)?;
        save_draws(&draws, cache)?;
        return Ok(draws);
    }
    Ok(simulate_null(t_len, engine.reps, engine.seed, config, policy)?)
}

struct Pipeline {
    series: Series,
    result: TestResult,
    draws: NullDraws,
    report: Report,
}

fn run_pipeline(
    command: &str,
    input: &InputArgs,
    engine: &EngineArgs,
) -> Result<Pipeline, CliError> {
    let schema = input.schema()?;
    let series = bubble_core::load_series(&input.input, &schema)?;
    let config = AdfConfig::new(engine.lag);
    let policy = engine.policy();

    let result = bubble_core::run_gsadf(series.values(), config, policy)?;
    let draws = obtain_draws(series.len(), engine, config, policy)?;
    let table = quantile_table(&draws, &engine.levels)?;

    let p_gsadf = p_value(result.gsadf, &draws.gsadf_draws)?;
    let p_sadf = p_value(result.sadf, &draws.sadf_draws)?;
    let classification = match (
        table.scalar_cvs(StatKind::Sadf),
        table.scalar_cvs(StatKind::Gsadf),
    ) {
        (Ok(sadf_cvs), Ok(gsadf_cvs)) => Some(Classification {
            sadf: classify(result.sadf, &sadf_cvs),
            gsadf: classify(result.gsadf, &gsadf_cvs),
        }),
        _ => None,
    };

    let mut notes = Vec::new();
    if classification.is_none() {
        notes.push(
            "classification omitted: levels do not include the 0.90/0.95/0.99 triple".to_string(),
        );
    }

    let report = Report {
        tool: ToolInfo::default(),
        command: command.to_string(),
        series: SeriesInfo::from_series(&series),
        config: ConfigEcho {
            input: input.input.display().to_string(),
            lag: engine.lag,
            min_window: result.min_window,
            reps: engine.reps,
            seed: engine.seed,
            levels: engine.levels.clone(),
            stamp_level: None,
            threshold: None,
            min_duration: None,
        },
        statistics: Statistics {
            df_full: result.sadf_sequence.last().copied().flatten(),
            sadf: result.sadf,
            gsadf: result.gsadf,
        },
        p_values: PValues {
            sadf: p_sadf,
            gsadf: p_gsadf,
        },
        classification,
        critical_values: CriticalValuesOut {
            levels: table.levels.clone(),
            sadf: table.sadf.clone(),
            gsadf: table.gsadf.clone(),
        },
        sequences: sequences_from(&result, &series),
        cv_sequence: None,
        episodes: None,
        diagnostics: Diagnostics {
            sadf_windows_skipped: result.sadf_skipped,
            bsadf_windows_skipped: result.bsadf.skipped_windows,
            null_redraws: draws.redraws,
        },
        notes,
    };

    Ok(Pipeline {
        series,
        result,
        draws,
        report,
    })
}

fn emit_artifacts(
    report: &Report,
    formats: &[FormatArg],
    out: &Path,
    svg: Option<&str>,
) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    for format in formats {
        match format {
            FormatArg::Json => {
                let path = out.join("report.json");
                write_atomic(&path, report.to_json().as_bytes())?;
                written.push(path);
            }
            FormatArg::Text => {
                let path = out.join("report.txt");
                write_atomic(&path, render_text(report).as_bytes())?;
                written.push(path);
            }
            FormatArg::Svg => match svg {
                Some(svg) => {
                    let path = out.join("plot.svg");
                    write_atomic(&path, svg.as_bytes())?;
                    written.push(path);
                }
                None => {
                    return Err(CliError::config(
                        "svg output is only available for the datestamp command",
                    ));
                }
            },
        }
    }
    Ok(written)
}

fn print_run(report: &Report, written: &[PathBuf]) {
    print!("{}", render_text(report));
    for path in written {
        println!("wrote {}", path.display());
    }
}

/// Build the `test` report without writing artifacts.
pub fn test_report(args: &TestArgs) -> Result<Report, CliError> {
    Ok(run_pipeline("test", &args.input, &args.engine)?.report)
}

pub fn cmd_test(args: &TestArgs) -> Result<(), CliError> {
    let pipeline = run_pipeline("test", &args.input, &args.engine)?;
    let written = emit_artifacts(&pipeline.report, &args.formats, &args.out, None)?;
    print_run(&pipeline.report, &written);
    Ok(())
}

/// Build the `datestamp` report and SVG without writing artifacts.
pub fn datestamp_report(args: &DatestampArgs) -> Result<(Report, String), CliError> {
    let (pipeline, svg) = datestamp_pipeline(args)?;
    Ok((pipeline.report, svg))
}

pub fn cmd_datestamp(args: &DatestampArgs) -> Result<(), CliError> {
    let (pipeline, svg) = datestamp_pipeline(args)?;
    let written = emit_artifacts(&pipeline.report, &args.formats, &args.out, Some(&svg))?;
    print_run(&pipeline.report, &written);
    Ok(())
}

fn datestamp_pipeline(args: &DatestampArgs) -> Result<(Pipeline, String), CliError> {
    let mut pipeline = run_pipeline("datestamp", &args.input, &args.engine)?;
    let min_duration = args
        .min_duration
        .unwrap_or_else(|| bubble_core::default_min_duration(pipeline.series.len()));
    if min_duration < 1 {
        return Err(CliError::config("min-duration must be at least 1"));
    }

    let cv_seq: CvSequence = match args.threshold {
        ThresholdArg::Sadf => sadf_cv_sequence(&pipeline.draws, args.level)?,
        ThresholdArg::BsadfQuantile => bsadf_cv_sequence(&pipeline.draws, args.level)?,
    };
    let stamp_cfg = StampConfig {
        min_duration,
        level: args.level,
    };
    let episodes = stamp(&pipeline.result.bsadf, &cv_seq, &stamp_cfg, &pipeline.series)?;

    // The scalar test and the sequence test can disagree; both facts are
    // reported side by side rather than one suppressing the other.
    let scalar_cv = {
        let mut sorted = pipeline.draws.gsadf_draws.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("draws are finite"));
        quantile_at(&sorted, args.level)
    };
    if pipeline.result.gsadf < scalar_cv && !episodes.is_empty() {
        pipeline.report.notes.push(format!(
            "episodes stamped although the scalar GSADF test does not reject at the {:.0}% level",
            args.level * 100.0
        ));
    }

    pipeline.report.command = "datestamp".to_string();
    pipeline.report.config.stamp_level = Some(args.level);
    pipeline.report.config.threshold = Some(args.threshold.label().to_string());
    pipeline.report.config.min_duration = Some(min_duration);
    pipeline.report.cv_sequence = Some(CvSequenceOut {
        level: cv_seq.level,
        threshold: args.threshold.label().to_string(),
        values: cv_seq.values.clone(),
    });
    pipeline.report.episodes = Some(
        episodes
            .iter()
            .map(|ep| episode_out(ep, &pipeline.series))
            .collect(),
    );

    let svg = render_plot(&pipeline.result.bsadf, &cv_seq, &episodes, &pipeline.series)?;
    Ok((pipeline, svg))
}

fn quantile_at(sorted: &[f64], level: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * level;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

fn parse_episode_fraction(spec: &str) -> Result<(f64, f64), CliError> {
    let (a, b) = spec
        .split_once(':')
        .ok_or_else(|| CliError::config(format!("episode {spec:?} should look like 0.40:0.55")))?;
    let parse = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| CliError::config(format!("bad episode fraction {s:?}")))
    };
    Ok((parse(a)?, parse(b)?))
}

fn parse_reinit(spec: &str) -> Result<Reinit, CliError> {
    if spec == "pre-bubble" {
        return Ok(Reinit::PreBubbleLevel);
    }
    if let Some(v) = spec.strip_prefix("fixed:") {
        let v: f64 = v
            .parse()
            .map_err(|_| CliError::config(format!("bad fixed reinit level {v:?}")))?;
        return Ok(Reinit::Fixed(v));
    }
    Err(CliError::config(format!(
        "unknown reinit policy {spec:?}; use pre-bubble or fixed:<value>"
    )))
}

pub fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let episodes = args
        .episodes
        .iter()
        .map(|s| parse_episode_fraction(s))
        .collect::<Result<Vec<_>, _>>()?;
    let spec = DgpSpec {
        t_len: args.t,
        episodes,
        delta: args.delta,
        noise_sd: args.noise_sd,
        seed: args.seed,
        reinit: parse_reinit(&args.reinit)?,
    };
    let labeled = if spec.episodes.is_empty() {
        bubble_core::LabeledSeries {
            series: bubble_core::gen_random_walk(args.t, args.noise_sd, args.seed)?,
            true_episodes: vec![],
        }
    } else {
        gen_multi_bubble(&spec)?
    };

    let mut series_csv = Vec::new();
    write_series(&labeled.series, &mut series_csv)?;
    let series_path = args.out.join("series.csv");
    write_atomic(&series_path, &series_csv)?;

    let mut labels_csv = String::from("start_index,end_index\n");
    for (s, e) in &labeled.true_episodes {
        let _ = writeln!(labels_csv, "{s},{e}");
    }
    let labels_path = args.out.join("series.labels.csv");
    write_atomic(&labels_path, labels_csv.as_bytes())?;

    println!(
        "simulated {} observations (delta {}, noise sd {}, seed {})",
        args.t, args.delta, args.noise_sd, args.seed
    );
    for (s, e) in &labeled.true_episodes {
        println!(
            "  episode: observations {s}..{e} ({}..{})",
            labeled.series.date_label(*s),
            labeled.series.date_label(*e)
        );
    }
    println!("wrote {}", series_path.display());
    println!("wrote {}", labels_path.display());
    Ok(())
}

pub fn cmd_critvals(args: &CritvalsArgs) -> Result<(), CliError> {
    let config = AdfConfig::new(args.engine.lag);
    let policy = args.engine.policy();
    let draws = obtain_draws(args.t, &args.engine, config, policy)?;
    let table = quantile_table(&draws, &args.engine.levels)?;

    println!(
        "critical values for T={} (lag {}, min window {}, {} replications, seed {})",
        args.t, args.engine.lag, draws.min_window, args.engine.reps, args.engine.seed
    );
    println!("{:<12}{:>12}{:>12}", "level", "SADF", "GSADF");
    for (i, level) in table.levels.iter().enumerate() {
        println!(
            "{:<12}{:>12.6}{:>12.6}",
            format!("{:.0}%", level * 100.0),
            table.sadf[i],
            table.gsadf[i]
        );
    }

    if let Some(out) = &args.out {
        #[derive(serde::Serialize)]
        struct CritvalsOut<'a> {
            t: usize,
            lag: usize,
            min_window: usize,
            reps: usize,
            seed: u64,
            generator: &'a str,
            levels: &'a [f64],
            sadf: &'a [f64],
            gsadf: &'a [f64],
        }
        let doc = CritvalsOut {
            t: args.t,
            lag: args.engine.lag,
            min_window: draws.min_window,
            reps: args.engine.reps,
            seed: args.engine.seed,
            generator: bubble_core::critical::GENERATOR_VERSION,
            levels: &table.levels,
            sadf: &table.sadf,
            gsadf: &table.gsadf,
        };
        let mut json = serde_json::to_string_pretty(&doc).expect("table serializes");
        json.push('\n');
        write_atomic(out, json.as_bytes())?;
        println!("wrote {}", out.display());
    }
    Ok(())
}
