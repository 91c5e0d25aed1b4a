//! Command-line front end: `eval` runs repeated cross-validation and writes a
//! report, `predict` prints per-instance outputs of a model fitted on a
//! training file.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::credal::CredalEnsemble;
use crate::dataset::{
    is_missing_marker, load_csv, stratified_folds, Column, ColumnKind, Discretizer, Imputer,
    RawTable, Schema,
};
use crate::ensemble::{DeterminateKind, Ensemble, EnsembleSettings};
use crate::error::{Error, Result};
use crate::eval::{cross_validate, ClassifierKind, EvalReport};
use crate::mass::argmax;

/// Version of the report layout written by `eval`.
pub const SCHEMA_VERSION: u32 = 1;
pub const SEED_ENV: &str = "CREDAL_AODE_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "credal-aode",
    version,
    about = "AODE ensembles and their credal extensions"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Repeated stratified cross-validation of one or more classifiers.
    Eval(EvalArgs),
    /// Fit on a training file and print one JSON line per instance.
    Predict(PredictArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Name of the class column.
    #[arg(long, default_value = "class")]
    pub class_col: String,
    /// Lower bound on every model prior.
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    /// SPODEs whose likelihood is below `L_max / 10^e` are pruned.
    #[arg(long, default_value_t = 4.0)]
    pub pruning_exponent: f64,
    /// Seed for fold assignment and optimizer restarts.
    #[arg(long, env = SEED_ENV, default_value_t = 42)]
    pub seed: u64,
    /// Columns to treat as categorical even if every value parses as a number.
    #[arg(long, value_delimiter = ',')]
    pub categorical: Vec<String>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub data: PathBuf,
    /// Comma-separated classifier names.
    #[arg(
        long,
        value_delimiter = ',',
        default_value = "aode,bma-aode,comp-aode,bma-aode-star,comp-aode-star"
    )]
    pub classifiers: Vec<String>,
    #[arg(long, default_value_t = 5)]
    pub folds: usize,
    #[arg(long, default_value_t = 10)]
    pub runs: usize,
    /// Report path; the report goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Worker threads (default: available parallelism).
    #[arg(long)]
    pub jobs: Option<usize>,
    #[command(flatten)]
    pub model: ModelArgs,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    /// Training CSV file.
    #[arg(long)]
    pub train: PathBuf,
    /// Instances to classify; the class column may be absent. Defaults to the training rows.
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long, default_value = "comp-aode-star")]
    pub classifier: String,
    #[command(flatten)]
    pub model: ModelArgs,
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Eval(args) => cmd_eval(&args),
        Command::Predict(args) => cmd_predict(&args),
    }
}

fn parse_classifiers(names: &[String]) -> Result<Vec<ClassifierKind>> {
    let mut out = Vec::new();
    for name in names.iter().filter(|n| !n.trim().is_empty()) {
        let kind: ClassifierKind = name.parse()?;
        if !out.contains(&kind) {
            out.push(kind);
        }
    }
    if out.is_empty() {
        return Err(Error::Config("no classifiers given".into()));
    }
    Ok(out)
}

fn schema(model: &ModelArgs) -> Schema {
    model
        .categorical
        .iter()
        .filter(|c| !c.is_empty())
        .map(|c| (c.clone(), ColumnKind::Categorical))
        .collect()
}

fn settings(model: &ModelArgs, k: usize) -> Result<EnsembleSettings> {
    let eps = model.epsilon;
    if !(eps > 0.0 && eps < 1.0 / (k as f64 + 1.0)) {
        return Err(Error::Config(format!(
            "epsilon must lie in (0, 1/(k+1)) = (0, {:.6}) for {k} features, got {eps}",
            1.0 / (k as f64 + 1.0)
        )));
    }
    if !(model.pruning_exponent >= 0.0) || !model.pruning_exponent.is_finite() {
        return Err(Error::Config(
            "pruning exponent must be a nonnegative number".into(),
        ));
    }
    Ok(EnsembleSettings {
        epsilon: eps,
        prune_log_ratio: model.pruning_exponent * std::f64::consts::LN_10,
    })
}

#[derive(Debug, Serialize)]
struct ReportFile {
    schema_version: u32,
    reports: Vec<ReportRecord>,
}

#[derive(Debug, Serialize)]
struct ReportRecord {
    classifier: String,
    accuracy: f64,
    brier: f64,
    determinacy: f64,
    single_accuracy: Option<f64>,
    set_accuracy: Option<f64>,
    output_size: Option<f64>,
    discounted_accuracy: f64,
    u65: f64,
    u80: f64,
    n: usize,
    k: usize,
    folds: usize,
    runs: usize,
    seed: u64,
    epsilon: f64,
}

impl From<&EvalReport> for ReportRecord {
    fn from(r: &EvalReport) -> Self {
        let m = &r.aggregate;
        Self {
            classifier: r.classifier.name().to_string(),
            accuracy: m.accuracy,
            brier: m.brier,
            determinacy: m.determinacy,
            single_accuracy: m.single_accuracy,
            set_accuracy: m.set_accuracy,
            output_size: m.output_size,
            discounted_accuracy: m.discounted_accuracy,
            u65: m.u65,
            u80: m.u80,
            n: r.n,
            k: r.k,
            folds: r.folds,
            runs: r.runs,
            seed: r.seed,
            epsilon: r.epsilon,
        }
    }
}

/// Canonical JSON report.
pub fn render_json(reports: &[EvalReport]) -> String {
    let file = ReportFile {
        schema_version: SCHEMA_VERSION,
        reports: reports.iter().map(ReportRecord::from).collect(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("report serializes");
    s.push('\n');
    s
}

/// One row per classifier; undefined metrics are empty cells.
pub fn render_csv(reports: &[EvalReport]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in reports {
        w.serialize(ReportRecord::from(r))
            .map_err(|e| Error::Config(format!("cannot write CSV: {e}")))?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Error::Config(format!("cannot write CSV: {e}")))?;
    Ok(String::from_utf8(bytes).expect("CSV is UTF-8"))
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.4}"))
}

pub fn summary_line(r: &EvalReport) -> String {
    let m = &r.aggregate;
    format!(
        "{:<15} accuracy {:.4}  brier {:.4}  determinacy {:.4}  u65 {:.4}  u80 {:.4}  set-accuracy {}",
        r.classifier.name(),
        m.accuracy,
        m.brier,
        m.determinacy,
        m.u65,
        m.u80,
        fmt_opt(m.set_accuracy)
    )
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut f = File::create(path).map_err(io_err)?;
    f.write_all(contents.as_bytes()).map_err(io_err)
}

pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let classifiers = parse_classifiers(&args.classifiers)?;
    if args.folds < 2 {
        return Err(Error::Config(format!(
            "--folds must be at least 2, got {}",
            args.folds
        )));
    }
    if args.runs < 1 {
        return Err(Error::Config("--runs must be at least 1".into()));
    }
    if args.jobs == Some(0) {
        return Err(Error::Config("--jobs must be at least 1".into()));
    }
    let table = load_csv(&args.data, &args.model.class_col, &schema(&args.model))?;
    let k = table.feature_columns().len();
    let settings = settings(&args.model, k)?;
    let seed = args.model.seed;
    let plan = stratified_folds(&table.class_codes(), args.runs, args.folds, seed)?;

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = args.jobs {
        pool = pool.num_threads(j);
    }
    let pool = pool
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?;
    let reports = pool.install(|| cross_validate(&table, &plan, &classifiers, settings, seed))?;

    let rendered = match args.format {
        Format::Json => render_json(&reports),
        Format::Csv => render_csv(&reports)?,
    };
    match &args.out {
        Some(path) => {
            write_file(path, &rendered)?;
            for r in &reports {
                println!("{}", summary_line(r));
            }
        }
        None => {
            for r in &reports {
                eprintln!("{}", summary_line(r));
            }
            print!("{rendered}");
        }
    }
    Ok(())
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

#[derive(Debug, Serialize)]
struct PredictLine<'a> {
    row: usize,
    classifier: &'a str,
    posterior: Vec<f64>,
    classes: Vec<&'a str>,
    prior_dependent: bool,
    weights: Vec<f64>,
}

/// Reads instance rows laid out like `train`. Missing feature columns are
/// an error; a missing class column is allowed. Returns the combined table
/// (training rows first) and the number of instance rows.
fn append_instances<R: Read>(train: &RawTable, reader: R) -> Result<(RawTable, usize)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Parse {
            row: 1,
            message: e.to_string(),
        })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let positions: Vec<Option<usize>> = train
        .names()
        .iter()
        .map(|n| header.iter().position(|h| h == n))
        .collect();
    for (c, p) in positions.iter().enumerate() {
        if p.is_none() && c != train.class_column() {
            return Err(Error::Parse {
                row: 1,
                message: format!("column `{}` is missing", train.names()[c]),
            });
        }
    }
    let placeholder = train.class_labels()[0].clone();
    let mut columns: Vec<Column> = train.columns().to_vec();
    let mut added = 0;
    for (i, record) in rdr.records().enumerate() {
        let row = i + 2;
        let record = record.map_err(|e| Error::Parse {
            row,
            message: e.to_string(),
        })?;
        if record.len() != header.len() {
            return Err(Error::Parse {
                row,
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        for (c, column) in columns.iter_mut().enumerate() {
            let cell = positions[c]
                .map(|p| record[p].trim())
                .filter(|s| !is_missing_marker(s));
            match column {
                Column::Numeric(values) => values.push(match cell {
                    None => None,
                    Some(s) => Some(s.parse::<f64>().map_err(|_| Error::Parse {
                        row,
                        message: format!("`{s}` in numeric column `{}`", train.names()[c]),
                    })?),
                }),
                Column::Categorical(values) => {
                    if c == train.class_column() {
                        values.push(Some(placeholder.clone()));
                    } else {
                        values.push(cell.map(str::to_string));
                    }
                }
            }
        }
        added += 1;
    }
    Ok((
        RawTable::new(train.names().to_vec(), columns, train.class_column())?,
        added,
    ))
}

fn warn_unseen(table: &RawTable, train_rows: usize) {
    for (c, column) in table.columns().iter().enumerate() {
        if c == table.class_column() {
            continue;
        }
        if let Column::Categorical(values) = column {
            let (train, rest) = values.split_at(train_rows);
            for (i, v) in rest.iter().enumerate() {
                if let Some(v) = v {
                    if !train.iter().flatten().any(|t| t == v) {
                        log::warn!(
                            "instance {}: value `{v}` of column `{}` was not seen in training; its conditional tables are uniform",
                            i + 1,
                            table.names()[c]
                        );
                    }
                }
            }
        }
    }
}

pub fn cmd_predict(args: &PredictArgs) -> Result<()> {
    let kind: ClassifierKind = args.classifier.parse()?;
    let train = load_csv(&args.train, &args.model.class_col, &schema(&args.model))?;
    let n_train = train.n_rows();
    let (table, n_new) = match &args.data {
        Some(path) => {
            let file = File::open(path).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })?;
            append_instances(&train, file)?
        }
        None => {
            let rows = n_train;
            (train, rows)
        }
    };
    let train_rows: Vec<usize> = (0..n_train).collect();
    let new_rows: Vec<usize> = if args.data.is_some() {
        (n_train..n_train + n_new).collect()
    } else {
        train_rows.clone()
    };
    warn_unseen(&table, n_train);

    let k = table.feature_columns().len();
    let settings = settings(&args.model, k)?;
    let imputed = Imputer::fit(&table, &train_rows)?.apply(&table);
    let disc = Discretizer::fit(&imputed, &train_rows)?;
    let train_ds = disc.transform_rows(&imputed, &train_rows)?;
    let new_ds = disc.transform_rows(&imputed, &new_rows)?;
    let ensemble = Ensemble::fit(&train_ds, settings);
    let credal = match kind.credal() {
        Some(_) => Some(CredalEnsemble::new(&ensemble, args.model.seed)?),
        None => None,
    };
    let labels = train_ds.class_labels();
    let weights: Vec<f64> = match kind.determinate() {
        DeterminateKind::Aode => vec![1.0 / ensemble.k() as f64; ensemble.k()],
        DeterminateKind::BmaAode => ensemble.bma_weights().to_vec(),
        DeterminateKind::CompAode => ensemble
            .comp_weights()
            .map_or_else(|| vec![0.0; ensemble.k()], <[f64]>::to_vec),
    };
    let weights: Vec<f64> = weights.into_iter().map(round6).collect();

    let stdout = io::stdout();
    let mut out = stdout.lock();
    for (i, (_, x)) in new_ds.instances().enumerate() {
        let posteriors = ensemble.posteriors(x);
        let (posterior, classes, prior_dependent) = match (kind.credal(), &credal) {
            (Some(variant), Some(cred)) => {
                let p = cred.predict_from(variant, &posteriors)?;
                let dependent = p.prior_dependent;
                (p.posterior, p.classes, dependent)
            }
            _ => {
                let p = ensemble.combine(kind.determinate(), &posteriors);
                let best = argmax(&p);
                (p, vec![best], false)
            }
        };
        let line = PredictLine {
            row: i + 1,
            classifier: kind.name(),
            posterior: posterior.into_iter().map(round6).collect(),
            classes: classes.iter().map(|&c| labels[c].as_str()).collect(),
            prior_dependent,
            weights: weights.clone(),
        };
        let json = serde_json::to_string(&line).expect("prediction serializes");
        writeln!(out, "{json}").map_err(|source| Error::Io {
            path: PathBuf::from("<stdout>"),
            source,
        })?;
    }
    Ok(())
}
