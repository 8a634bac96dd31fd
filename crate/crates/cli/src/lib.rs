//! Command implementations behind the `igsd` binary.

pub mod document;
pub mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use igsd::measures::agreement::{ac1, icc, read_ratings};
use igsd::oracle::{OracleReport, replay_with};
use igsd::{
    Association, CutMode, Dataset, NumericPolicy, RefineConfig, SchemaHints, SearchConfig, ThresholdMode, evaluate, load_csv,
    load_schema_hints, mine,
};

use crate::document::{ConfigEcho, PatternDocument, SetStatsDoc};
use crate::report::{Format, ReportRow, render};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("oracle mismatch")]
    OracleMismatch,
}

impl CliError {
    pub fn data(msg: impl Into<String>) -> Self {
        CliError::Data(msg.into())
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Data(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
            CliError::OracleMismatch => 3,
        }
    }
}

impl From<igsd::Error> for CliError {
    fn from(e: igsd::Error) -> Self {
        match e {
            igsd::Error::Config(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "igsd", version, about = "Information-gain driven subgroup set discovery")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Discover patterns and write a pattern document.
    Discover(DiscoverArgs),
    /// Score one or more pattern documents against a dataset.
    Evaluate(EvaluateArgs),
    /// Inter-rater agreement (AC1 and ICC) of pattern ratings.
    Agree(AgreeArgs),
    /// Check the engine against exhaustive enumeration on a small input.
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Target column; repeat to combine several columns into one target.
    #[arg(long = "target", required = true)]
    pub targets: Vec<String>,
    /// Equal-frequency bins for a numeric target.
    #[arg(long, default_value_t = 2)]
    pub bins: usize,
    /// `column=nominal|numeric` lines overriding type inference.
    #[arg(long)]
    pub schema: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct MiningArgs {
    #[arg(long, default_value = "dynamic")]
    pub t_mode: ThresholdMode,
    /// Maximum pattern length; defaults to the number of non-target columns.
    #[arg(long)]
    pub dmax: Option<usize>,
    /// Attributes every pattern must contain, comma separated.
    #[arg(long = "cond", value_delimiter = ',')]
    pub cond_list: Vec<String>,
    /// Wall-clock budget in seconds.
    #[arg(long, default_value_t = 3600.0)]
    pub time_budget: f64,
    /// Equal-frequency parts per numeric attribute.
    #[arg(long = "cuts", default_value_t = 9)]
    pub cuts_per_column: usize,
    /// How numeric attributes become selectors: intervals or thresholds.
    #[arg(long, default_value = "intervals")]
    pub numeric_policy: NumericPolicy,
    /// Which candidates a one-vs-rest pass keeps: any, or positive (confidence above the base rate).
    #[arg(long, default_value = "any")]
    pub association: Association,
    /// Smallest ORR band a cut pattern may have.
    #[arg(long, default_value_t = 2)]
    pub min_orr: u8,
    /// Whether the cut keeps the best selector (inclusive) or stops before it.
    #[arg(long, default_value = "inclusive")]
    pub cut_mode: CutMode,
}

impl MiningArgs {
    pub fn search_config(&self) -> Result<SearchConfig, CliError> {
        if !(self.time_budget.is_finite() && self.time_budget > 0.0) {
            return Err(CliError::Usage("time budget must be a positive number of seconds".into()));
        }
        Ok(SearchConfig {
            t_mode: self.t_mode,
            dmax: self.dmax,
            cond_list: self.cond_list.clone(),
            time_budget: Duration::from_secs_f64(self.time_budget.min(1e9)),
            cuts_per_column: self.cuts_per_column,
            numeric_policy: self.numeric_policy,
            association: self.association,
        })
    }

    pub fn refine_config(&self) -> RefineConfig {
        RefineConfig {
            cut_mode: self.cut_mode,
            min_orr: self.min_orr,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct DiscoverArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub mining: MiningArgs,
    /// Output path; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Pattern documents to compare.
    #[arg(long, required = true, num_args = 1..)]
    pub patterns: Vec<PathBuf>,
    #[arg(long, default_value = "csv")]
    pub format: Format,
    /// Target columns; taken from each document's config when absent.
    #[arg(long = "target")]
    pub targets: Vec<String>,
    /// Bins for a numeric target; taken from the document when absent.
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long)]
    pub schema: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct AgreeArgs {
    /// CSV of `item,rater,rating` with accept/reject or numeric ratings.
    #[arg(long)]
    pub ratings: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub mining: MiningArgs,
    /// Run the engine with the cut one position short, as a negative control.
    #[arg(long, hide = true)]
    pub inject_cut_bug: bool,
}

fn hints(schema: Option<&Path>) -> Result<SchemaHints, CliError> {
    Ok(match schema {
        Some(p) => load_schema_hints(p)?,
        None => SchemaHints::new(),
    })
}

/// Loads the raw dataset and its target-resolved view.
pub fn load(args: &DataArgs) -> Result<(Dataset, Dataset), CliError> {
    let raw = load_csv(&args.data, &hints(args.schema.as_deref())?)?;
    let d = raw.resolve_target(&args.targets, args.bins)?;
    Ok((raw, d))
}

pub fn discover_document(args: &DiscoverArgs) -> Result<PatternDocument, CliError> {
    let (raw, d) = load(&args.data)?;
    let search = args.mining.search_config()?;
    let refine = args.mining.refine_config();
    let mining = mine(&d, &search, &refine)?;
    let config = ConfigEcho {
        target_columns: args.data.targets.clone(),
        bins: args.data.bins,
        t_mode: search.t_mode.to_string(),
        dmax: search.effective_dmax(&d),
        cond_list: search.cond_list.clone(),
        time_budget: args.mining.time_budget,
        cuts_per_column: search.cuts_per_column,
        numeric_policy: search.numeric_policy.as_str().to_string(),
        association: search.association.to_string(),
        min_orr: refine.min_orr,
        cut_mode: refine.cut_mode.to_string(),
    };
    PatternDocument::from_mining(&raw, &d, config, &mining)
}

pub fn cmd_discover(args: &DiscoverArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    let doc = discover_document(args)?;
    let stats = doc.set_stats.as_ref().map(|s| &s.overall);
    let _ = writeln!(
        stderr,
        "{} patterns{}{}",
        doc.patterns.len(),
        stats
            .and_then(|s| s.confidence)
            .map_or(String::new(), |c| format!(", mean confidence {c:.3}")),
        if doc.truncated { " (time budget exhausted, search truncated)" } else { "" }
    );
    match &args.out {
        Some(path) => doc.write(path),
        None => stdout
            .write_all(doc.to_canonical_json().as_bytes())
            .map_err(|e| CliError::data(e.to_string())),
    }
}

/// Recomputes the summary metrics of every document on the dataset.
pub fn evaluate_rows(args: &EvaluateArgs) -> Result<Vec<ReportRow>, CliError> {
    let raw = load_csv(&args.data, &hints(args.schema.as_deref())?)?;
    let mut rows = Vec::with_capacity(args.patterns.len());
    for path in &args.patterns {
        let doc = PatternDocument::read(path)?;
        if let Some(fp) = &doc.dataset {
            if fp.columns != raw.column_names() {
                return Err(CliError::data(format!(
                    "{}: pattern document columns do not match the dataset",
                    path.display()
                )));
            }
        }
        let (targets, bins) = match &doc.config {
            _ if !args.targets.is_empty() => (args.targets.clone(), args.bins.unwrap_or(2)),
            Some(cfg) => (cfg.target_columns.clone(), args.bins.unwrap_or(cfg.bins)),
            None => {
                return Err(CliError::Usage(format!(
                    "{}: document names no target; pass --target",
                    path.display()
                )));
            }
        };
        let d = raw.resolve_target(&targets, bins)?;
        let evaluated = doc
            .patterns
            .iter()
            .map(|p| evaluate(&d, p.to_pattern(&d)?).map_err(CliError::from))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::data(format!("{}: {e}", path.display())))?;
        rows.push(ReportRow {
            name: path.display().to_string(),
            stats: SetStatsDoc::from(&igsd::set_stats(&d, &evaluated)?),
        });
    }
    Ok(rows)
}

pub fn cmd_evaluate(args: &EvaluateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let text = render(&evaluate_rows(args)?, args.format)?;
    match &args.out {
        Some(path) => std::fs::write(path, text).map_err(|e| CliError::io(path, e)),
        None => stdout.write_all(text.as_bytes()).map_err(|e| CliError::data(e.to_string())),
    }
}

pub fn cmd_agree(args: &AgreeArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let file = std::fs::File::open(&args.ratings).map_err(|e| CliError::io(&args.ratings, e))?;
    let m = read_ratings(std::io::BufReader::new(file))?;
    let show = |r: igsd::Result<f64>| match r {
        Ok(v) => format!("{v:.6}"),
        Err(e) => format!("n/a ({e})"),
    };
    let text = format!(
        "items: {}\nraters: {}\nAC1: {}\nICC: {}\n",
        m.n_items(),
        m.n_raters(),
        show(ac1(&m)),
        show(icc(&m))
    );
    stdout.write_all(text.as_bytes()).map_err(|e| CliError::data(e.to_string()))
}

pub fn oracle_report(args: &OracleArgs) -> Result<OracleReport, CliError> {
    let (_, d) = load(&args.data)?;
    let search = args.mining.search_config()?;
    let refine = args.mining.refine_config();
    refine.validate()?;
    let engine = if args.inject_cut_bug {
        RefineConfig {
            cut_mode: match refine.cut_mode {
                CutMode::Inclusive => CutMode::Exclusive,
                CutMode::Exclusive => CutMode::Inclusive,
            },
            ..refine
        }
    } else {
        refine
    };
    Ok(replay_with(&d, &search, &refine, &engine)?)
}

pub fn cmd_oracle(args: &OracleArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let report = oracle_report(args)?;
    stdout
        .write_all(report.to_string().as_bytes())
        .map_err(|e| CliError::data(e.to_string()))?;
    if report.passed() { Ok(()) } else { Err(CliError::OracleMismatch) }
}

pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Discover(a) => cmd_discover(a, stdout, stderr),
        Command::Evaluate(a) => cmd_evaluate(a, stdout),
        Command::Agree(a) => cmd_agree(a, stdout),
        Command::Oracle(a) => cmd_oracle(a, stdout),
    }
}
