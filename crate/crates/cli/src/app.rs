use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use wsd_core::depth::{depth_all, Method, DEFAULT_BANDWIDTH};
use wsd_core::numeric::mean;
use wsd_core::sim::{
    run_consistency, run_kernel_comparison, run_location_equivalence, run_outlier_experiment,
    sample_repetition, DataArray, Experiment, ExperimentConfig,
};

use crate::ingest::{ingest, IngestError, IngestManifest, Layout};
use crate::report::{fmt_num, records, round_sig, write_records};

/// Depth of each distribution in a sample of distributions.
#[derive(Debug, Parser)]
#[command(name = "wsd", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank the groups of a delimited file by depth and flag the shallowest.
    Depth(DepthArgs),
    /// Run one of the simulation studies and write its table.
    Experiment(ExperimentArgs),
    /// Write a simulated data array as a delimited file.
    Sample(SampleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Wsd,
    WsdDiscrete,
    Lens,
    MetricSpatial,
    KernelSpatial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExperimentArg {
    Consistency,
    #[value(alias = "location")]
    LocationEquivalence,
    Outliers,
    #[value(alias = "kernel")]
    KernelComparison,
}

impl From<ExperimentArg> for Experiment {
    fn from(e: ExperimentArg) -> Self {
        match e {
            ExperimentArg::Consistency => Experiment::Consistency,
            ExperimentArg::LocationEquivalence => Experiment::LocationEquivalence,
            ExperimentArg::Outliers => Experiment::Outliers,
            ExperimentArg::KernelComparison => Experiment::KernelComparison,
        }
    }
}

#[derive(Debug, Args)]
pub struct DepthArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Group id column: a header name or a 1-based position.
    #[arg(long, default_value = "1")]
    pub group_col: String,
    /// Coordinate columns, e.g. `2-13` or `tmin,tmax`; default is every other column.
    #[arg(long)]
    pub coord_cols: Option<String>,
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// The first line holds data, not column names.
    #[arg(long)]
    pub no_header: bool,
    #[arg(long, value_enum, default_value_t = MethodArg::Wsd)]
    pub method: MethodArg,
    /// Fraction of distributions to flag, counted from the smallest depth.
    #[arg(long, default_value_t = 0.05)]
    pub threshold: f64,
    /// Kernel bandwidth for `kernel-spatial`.
    #[arg(long, default_value_t = DEFAULT_BANDWIDTH)]
    pub bandwidth: f64,
    /// Accepted for uniformity with the other commands; depth draws no random numbers.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses one per core.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Report file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StudyArgs {
    #[arg(long, value_enum)]
    pub experiment: ExperimentArg,
    #[arg(long, default_value_t = 1)]
    pub case: u8,
    /// Number of regular distributions.
    #[arg(long)]
    pub n: Option<usize>,
    /// Points per distribution.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
}

impl StudyArgs {
    fn config(&self) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(self.experiment.into(), self.case);
        if let Some(n) = self.n {
            c.n = n;
        }
        if let Some(m) = self.m {
            c.m = m;
        }
        c.d = self.d;
        c.seed = self.seed;
        c
    }
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[command(flatten)]
    pub study: StudyArgs,
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    /// Flagging fraction; 0.01 for outliers and 0.05 otherwise.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[arg(long)]
    pub bandwidth: Option<f64>,
    /// Query parameters of the consistency study, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    /// Table file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON summary file; standard error when absent.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub study: StudyArgs,
    #[arg(long, default_value_t = 0)]
    pub rep: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// A failed run and its exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Input(String),
    Numerical(String),
}

impl Failure {
    pub fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Input(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Input(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Self {
        Failure::Input(e.to_string())
    }
}

fn computation(e: wsd_core::Error, otherwise: fn(String) -> Failure) -> Failure {
    if e.is_numerical() {
        Failure::Numerical(e.to_string())
    } else {
        otherwise(e.to_string())
    }
}

fn write_output(path: Option<&Path>, bytes: &[u8], stdout: &mut dyn Write) -> Result<(), Failure> {
    let result = match path {
        Some(p) => {
            std::fs::write(p, bytes).map_err(|e| format!("cannot write {}: {e}", p.display()))
        }
        None => stdout.write_all(bytes).map_err(|e| e.to_string()),
    };
    result.map_err(Failure::Input)
}

fn pool(threads: usize) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Failure::Usage(format!("cannot start {threads} threads: {e}")))
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Depth(a) => cmd_depth(a, stdout),
        Command::Experiment(a) => cmd_experiment(a, stdout, stderr),
        Command::Sample(a) => cmd_sample(a, stdout),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(stderr, "wsd: {}", f.message());
            f.code()
        }
    }
}

pub fn cmd_depth(a: &DepthArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    if !(0.0..=1.0).contains(&a.threshold) {
        return Err(Failure::Usage(format!(
            "threshold {} outside [0, 1]",
            a.threshold
        )));
    }
    if !(a.bandwidth > 0.0 && a.bandwidth.is_finite()) {
        return Err(Failure::Usage(format!(
            "bandwidth must be positive, got {}",
            a.bandwidth
        )));
    }
    if !a.delimiter.is_ascii() {
        return Err(Failure::Usage(
            "delimiter must be a single ASCII character".into(),
        ));
    }
    let mut layout = Layout::new(&a.group_col, a.coord_cols.as_deref())
        .map_err(|e| Failure::Usage(e.to_string()))?;
    layout.delimiter = a.delimiter as u8;
    layout.has_header = !a.no_header;
    let data = ingest(&IngestManifest {
        path: a.input.clone(),
        layout,
    })?;
    let method = match a.method {
        MethodArg::Wsd => Method::Wsd,
        MethodArg::WsdDiscrete => Method::WsdDiscrete,
        MethodArg::Lens => Method::Lens,
        MethodArg::MetricSpatial => Method::MetricSpatial,
        MethodArg::KernelSpatial => Method::KernelSpatial {
            bandwidth: a.bandwidth,
        },
    };
    let report = pool(a.threads)?
        .install(|| depth_all(&data.clouds, method, a.threshold))
        .map_err(|e| computation(e, Failure::Input))?;
    let mut bytes = Vec::new();
    write_records(&mut bytes, &records(&data.ids, &report)).expect("writing to memory");
    write_output(a.out.as_deref(), &bytes, stdout)
}

fn r(v: f64) -> Value {
    json!(round_sig(v) + 0.0)
}

fn rounded(vs: &[f64]) -> Value {
    Value::Array(vs.iter().map(|&v| r(v)).collect())
}

/// Builds the table and the JSON summary of one study.
pub fn experiment_outputs(config: &ExperimentConfig) -> wsd_core::Result<(String, Value)> {
    let mut table = String::new();
    let mut summary = json!({
        "experiment": config.experiment.name(),
        "case": config.case,
        "n": config.n,
        "m": config.m,
        "d": config.dim(),
        "repetitions": config.repetitions,
        "seed": config.seed,
    });
    let extra = match config.experiment {
        Experiment::Consistency => {
            let rows = run_consistency(config)?;
            table.push_str("param,analytic,mean,sd\n");
            for row in &rows {
                let cells = [row.param, row.analytic, row.mean, row.sd].map(fmt_num);
                let _ = writeln!(table, "{}", cells.join(","));
            }
            let rows: Vec<Value> = rows
                .iter()
                .map(|row| {
                    json!({
                        "param": r(row.param),
                        "analytic": r(row.analytic),
                        "mean": r(row.mean),
                        "sd": r(row.sd),
                        "values": rounded(&row.values),
                    })
                })
                .collect();
            json!({ "rows": rows })
        }
        Experiment::LocationEquivalence => {
            let runs = run_location_equivalence(config)?;
            table.push_str("repetition,id,wsd,spatial\n");
            for (rep, run) in runs.iter().enumerate() {
                for (i, (w, s)) in run.wsd.iter().zip(&run.spatial).enumerate() {
                    let _ = writeln!(table, "{rep},{i},{},{}", fmt_num(*w), fmt_num(*s));
                }
            }
            let gaps: Vec<f64> = runs.iter().map(|r| r.max_gap).collect();
            let rhos: Vec<f64> = runs.iter().map(|r| r.spearman).collect();
            json!({
                "max_gap": rounded(&gaps),
                "spearman": rounded(&rhos),
                "mean_max_gap": r(mean(&gaps)),
                "mean_spearman": r(mean(&rhos)),
            })
        }
        Experiment::Outliers => {
            let runs = run_outlier_experiment(config)?;
            let tags = (0..config.repetitions)
                .map(|rep| sample_tags(config, rep))
                .collect::<wsd_core::Result<Vec<_>>>()?;
            table.push_str("repetition,id,tag,depth,rank,flagged,planted\n");
            for (rep, run) in runs.iter().enumerate() {
                let rep_report = &run.report;
                for i in 0..rep_report.len() {
                    let _ = writeln!(
                        table,
                        "{rep},{i},{},{},{},{},{}",
                        tags[rep][i],
                        fmt_num(rep_report.values[i]),
                        rep_report.ranks[i],
                        rep_report.flags[i],
                        run.planted.contains(&i)
                    );
                }
            }
            let fractions: Vec<f64> = runs.iter().map(|r| r.recovery_fraction()).collect();
            json!({
                "threshold": config.threshold,
                "recovery": rounded(&fractions),
                "mean_recovery": r(mean(&fractions)),
                "bottom": runs.iter().map(|r| r.bottom).collect::<Vec<_>>(),
                "bottom_count": runs.iter().filter(|r| r.bottom).count(),
            })
        }
        Experiment::KernelComparison => {
            let runs = run_kernel_comparison(config)?;
            let tags = (0..config.repetitions)
                .map(|rep| sample_tags(config, rep))
                .collect::<wsd_core::Result<Vec<_>>>()?;
            table.push_str("repetition,id,tag,wsd,kernel,exotic\n");
            for (rep, run) in runs.iter().enumerate() {
                for i in 0..run.wsd.len() {
                    let _ = writeln!(
                        table,
                        "{rep},{i},{},{},{},{}",
                        tags[rep][i],
                        fmt_num(run.wsd[i]),
                        fmt_num(run.kernel[i]),
                        run.exotic.contains(&i)
                    );
                }
            }
            json!({
                "bandwidth": config.bandwidth,
                "wsd_separates": runs.iter().map(|r| r.wsd_separates).collect::<Vec<_>>(),
                "kernel_separates": runs.iter().map(|r| r.kernel_separates).collect::<Vec<_>>(),
            })
        }
    };
    if let (Value::Object(s), Value::Object(e)) = (&mut summary, extra) {
        s.extend(e);
    }
    Ok((table, summary))
}

fn sample_tags(config: &ExperimentConfig, rep: usize) -> wsd_core::Result<Vec<String>> {
    Ok(sample_repetition(config, rep)?.tags)
}

pub fn cmd_experiment(
    a: &ExperimentArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), Failure> {
    let mut config = a.study.config();
    config.repetitions = a.reps;
    if let Some(t) = a.threshold {
        config.threshold = t;
    }
    if let Some(b) = a.bandwidth {
        config.bandwidth = b;
    }
    config.grid = a.grid.clone();
    config
        .validate()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let (table, summary) = pool(a.study.threads)?
        .install(|| experiment_outputs(&config))
        .map_err(|e| computation(e, Failure::Usage))?;
    write_output(a.out.as_deref(), table.as_bytes(), stdout)?;
    let mut summary = serde_json::to_string_pretty(&summary).expect("summary serializes");
    summary.push('\n');
    match &a.summary {
        Some(p) => write_output(Some(p), summary.as_bytes(), stdout),
        None => stderr
            .write_all(summary.as_bytes())
            .map_err(|e| Failure::Input(e.to_string())),
    }
}

/// Delimited dump: `id,tag,x1..xd`, one row per point, coordinates in
/// shortest round-trip form.
pub fn sample_dump(data: &DataArray) -> String {
    let d = data.dim();
    let mut out = String::from("id,tag");
    for k in 1..=d {
        let _ = write!(out, ",x{k}");
    }
    out.push('\n');
    for (i, (cloud, tag)) in data.clouds.iter().zip(&data.tags).enumerate() {
        for row in cloud.rows() {
            let _ = write!(out, "{i},{tag}");
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
    }
    out
}

pub fn cmd_sample(a: &SampleArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let config = a.study.config();
    config
        .validate()
        .map_err(|e| Failure::Usage(e.to_string()))?;
    let data = pool(a.study.threads)?
        .install(|| sample_repetition(&config, a.rep))
        .map_err(|e| computation(e, Failure::Usage))?;
    write_output(a.out.as_deref(), sample_dump(&data).as_bytes(), stdout)
}
