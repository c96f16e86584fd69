//! Command-line driver.
//!
//! Every subcommand reads one optional config file; `--method`, `--n-train`,
//! `--lag` and `--threshold` override it. Artifacts go to `--out-dir`, which
//! defaults to `$VOLFIT_OUT_DIR`.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::decompose::SeriesName;
use crate::error::Error;
use crate::evaluate::{
    export_coefficient_csv, export_coefficient_table, residuals, rmse, RmseMode,
};
use crate::ingest::{load_config, PipelineConfig};
use crate::pipeline::{decompose_prices, fit_all, split_series};
use crate::surface_fit::{
    evaluate_surface, FeatureTable, FitMethod, IrlsOptions, PolySurfaceModel,
};

pub const DECOMPOSITION_FILE: &str = "decomposition.csv";
pub const COEFFICIENTS_FILE: &str = "coefficients.csv";
pub const COEFFICIENT_TABLE_FILE: &str = "coefficient_table.txt";

pub fn model_file(name: SeriesName) -> String {
    format!("model_{name}.json")
}

pub fn report_file(name: SeriesName) -> String {
    format!("report_{name}.json")
}

pub fn surface_file(name: SeriesName) -> String {
    format!("surface_{name}.csv")
}

pub fn residual_file(name: SeriesName) -> String {
    format!("residuals_{name}.csv")
}

#[derive(Debug, Parser)]
#[command(
    name = "volfit",
    version,
    about = "KZ decomposition and robust polynomial surface fits for price series"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the return series and its trend, seasonal and remainder components.
    Decompose(RunArgs),
    /// Fit all four series and write models, reports and the coefficient CSV.
    Fit(RunArgs),
    /// Evaluate a saved model at one point.
    Predict(PredictArgs),
    /// Score saved models on the train/test split and write the coefficient grid.
    Evaluate(RunArgs),
    /// Write surface-grid and residual CSVs for saved models.
    ExportPlot(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub method: Option<FitMethod>,
    #[arg(long = "n-train")]
    pub n_train: Option<usize>,
    #[arg(long)]
    pub lag: Option<usize>,
    #[arg(long, env = "VOLFIT_OUT_DIR", default_value = "volfit-out")]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub grid: usize,
    #[arg(long)]
    pub threshold: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long, allow_negative_numbers = true)]
    pub x: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub y: f64,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Pipeline(#[from] Error),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Pipeline(_) | CliError::Read { .. } => 2,
            CliError::Write { .. } => 1,
        }
    }
}

type CliResult<T> = Result<T, CliError>;

pub fn run(cli: Cli, stdout: &mut dyn Write) -> CliResult<()> {
    match cli.command {
        Command::Decompose(args) => cmd_decompose(&args),
        Command::Fit(args) => cmd_fit(&args).map(|_| ()),
        Command::Predict(args) => cmd_predict(&args, stdout),
        Command::Evaluate(args) => cmd_evaluate(&args, stdout),
        Command::ExportPlot(args) => cmd_export_plot(&args),
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads the config file (or defaults) and applies flag overrides.
pub fn resolve_config(args: &RunArgs) -> CliResult<PipelineConfig> {
    let mut config = match &args.config {
        Some(path) => load_config(&read(path)?)?,
        None => PipelineConfig::default(),
    };
    if let Some(method) = args.method {
        config.fit_method = method;
    }
    if let Some(n) = args.n_train {
        config.n_train = n;
    }
    if let Some(lag) = args.lag {
        config.feature_spec.lag = lag;
    }
    if let Some(t) = args.threshold {
        config.outlier_threshold = t;
    }
    config.validate()?;
    Ok(config)
}

/// Writes every `(name, contents)` pair into `dir`; on failure removes what
/// was already written.
fn write_artifacts(dir: &Path, files: &[(String, String)]) -> CliResult<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| CliError::Write {
        path: dir.to_path_buf(),
        source,
    })?;
    let mut written = Vec::new();
    for (name, contents) in files {
        let path = dir.join(name);
        if let Err(source) = fs::write(&path, contents) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            return Err(CliError::Write { path, source });
        }
        written.push(path);
    }
    Ok(written)
}

pub fn cmd_decompose(args: &RunArgs) -> CliResult<()> {
    let config = resolve_config(args)?;
    let decomposed = decompose_prices(&read(&args.input)?, &config)?;
    write_artifacts(
        &args.out_dir,
        &[(DECOMPOSITION_FILE.into(), decomposed.to_csv())],
    )?;
    Ok(())
}

/// Runs the whole pipeline and returns the paths of the nine artifacts.
pub fn cmd_fit(args: &RunArgs) -> CliResult<Vec<PathBuf>> {
    let config = resolve_config(args)?;
    let decomposed = decompose_prices(&read(&args.input)?, &config)?;
    let fits = fit_all(&decomposed, &config, &IrlsOptions::default())?;

    let mut files = Vec::new();
    for (name, fit) in &fits {
        files.push((model_file(*name), fit.model.to_document()));
    }
    for (name, fit) in &fits {
        files.push((report_file(*name), fit.report.to_document()));
    }
    let models: BTreeMap<_, _> = fits.iter().map(|(n, f)| (*n, f.model.clone())).collect();
    files.push((COEFFICIENTS_FILE.into(), export_coefficient_csv(&models)));
    write_artifacts(&args.out_dir, &files)
}

pub fn cmd_predict(args: &PredictArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let model = PolySurfaceModel::from_document(&read(&args.model)?)?;
    let value = evaluate_surface(&model, args.x, args.y);
    writeln!(stdout, "{}", format_significant(value, 6)).map_err(|source| CliError::Write {
        path: PathBuf::from("<stdout>"),
        source,
    })
}

fn load_models(dir: &Path) -> CliResult<BTreeMap<SeriesName, PolySurfaceModel>> {
    SeriesName::ALL
        .into_iter()
        .map(|name| {
            let text = read(&dir.join(model_file(name)))?;
            Ok((name, PolySurfaceModel::from_document(&text)?))
        })
        .collect()
}

pub fn cmd_evaluate(args: &RunArgs, stdout: &mut dyn Write) -> CliResult<()> {
    let config = resolve_config(args)?;
    let models = load_models(&args.out_dir)?;
    let decomposed = decompose_prices(&read(&args.input)?, &config)?;

    let mut summary = String::from("series,method,train_rmse,test_rmse,n_train,n_test\n");
    for (name, model) in &models {
        let (train, test) = split_series(&decomposed, *name, &config)?;
        summary.push_str(&format!(
            "{},{},{},{},{},{}\n",
            name,
            model.method,
            rmse(model, &train, RmseMode::Train)?,
            rmse(model, &test, RmseMode::Test)?,
            train.len(),
            test.len()
        ));
    }
    write_artifacts(
        &args.out_dir,
        &[(
            COEFFICIENT_TABLE_FILE.into(),
            export_coefficient_table(&models),
        )],
    )?;
    stdout
        .write_all(summary.as_bytes())
        .map_err(|source| CliError::Write {
            path: PathBuf::from("<stdout>"),
            source,
        })
}

pub fn cmd_export_plot(args: &RunArgs) -> CliResult<()> {
    let config = resolve_config(args)?;
    let models = load_models(&args.out_dir)?;
    let decomposed = decompose_prices(&read(&args.input)?, &config)?;
    let mut files = Vec::new();
    for (name, model) in &models {
        let (train, _) = split_series(&decomposed, *name, &config)?;
        let (surface, resid) = export_plot_data(model, &train, args.grid)?;
        files.push((surface_file(*name), surface));
        files.push((residual_file(*name), resid));
    }
    write_artifacts(&args.out_dir, &files)?;
    Ok(())
}

/// Surface grid over the table's observed `x` and `y` ranges
/// (`grid_density^2` rows of `x,y,f`) and per-row residuals
/// (`index,residual`).
pub fn export_plot_data(
    model: &PolySurfaceModel,
    table: &FeatureTable,
    grid_density: usize,
) -> Result<(String, String), Error> {
    if grid_density < 2 {
        return Err(Error::Config(format!(
            "grid density must be at least 2, got {grid_density}"
        )));
    }
    let ((x_lo, x_hi), (y_lo, y_hi)) = table
        .ranges()
        .ok_or_else(|| Error::InsufficientData("empty table".into()))?;
    let step = |lo: f64, hi: f64, i: usize| {
        if i == grid_density - 1 {
            hi
        } else {
            lo + (hi - lo) * i as f64 / (grid_density - 1) as f64
        }
    };

    let mut surface = String::from("x,y,f\n");
    for i in 0..grid_density {
        let x = step(x_lo, x_hi, i);
        for j in 0..grid_density {
            let y = step(y_lo, y_hi, j);
            surface.push_str(&format!("{},{},{}\n", x, y, evaluate_surface(model, x, y)));
        }
    }

    let mut resid = String::from("index,residual\n");
    for (t, r) in table.provenance().iter().zip(residuals(model, table)) {
        resid.push_str(&format!("{t},{r}\n"));
    }
    Ok((surface, resid))
}

/// `%#.Ng`-style formatting: `digits` significant digits, trailing zeros kept.
pub fn format_significant(value: f64, digits: usize) -> String {
    if !value.is_finite() {
        return value.to_string();
    }
    let digits = digits.max(1);
    if value == 0.0 {
        return format!("{:.*}", digits - 1, 0.0);
    }
    // exponent after rounding to `digits` significant digits
    let sci = format!("{:.*e}", digits - 1, value);
    let exponent: i32 = sci
        .split_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .expect("scientific formatting has an exponent");
    if exponent < -4 || exponent >= digits as i32 {
        let (mantissa, _) = sci.split_once('e').unwrap();
        let sign = if exponent < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exponent.abs())
    } else {
        let decimals = (digits as i32 - 1 - exponent).max(0) as usize;
        format!("{value:.decimals$}")
    }
}
