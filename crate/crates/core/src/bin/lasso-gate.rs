use std::fs::OpenOptions;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use lasso_gate::calibration::{
    calibrate, size_band, validate_size, validation_stream, CalibrationSettings, ResponseScaling, MIN_REPLICATES,
};
use lasso_gate::global_test::{fingerprint, prepare, run_global_test};
use lasso_gate::power::{export_power_tables, run_power_study, PowerConfig};
use lasso_gate::{CalibrationTable, Dataset, Error, RngSpec, SpectralFactor, TestOutcome};

#[derive(Parser)]
#[command(name = "lasso-gate", version, about = "LASSO-based global test for linear models with p > n")]
struct Cli {
    /// Worker threads (0 = all available cores). Never changes results.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Calibrate λ_r for the covariance structure of a dataset.
    Calibrate(CalibrateArgs),
    /// Run the global test on a dataset.
    Test(TestArgs),
    /// Run the simulated power study described by a config file.
    Power(PowerArgs),
    /// Re-measure the size of a calibration table on fresh null data.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct CalibrationOpts {
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Monte Carlo replicates.
    #[arg(long, default_value_t = 10_000)]
    replicates: usize,
    #[arg(long, default_value_t = 2_000)]
    validation_replicates: usize,
    /// Accept fewer than 10000 replicates.
    #[arg(long)]
    allow_downgrade: bool,
    /// Scaling of the simulated response: `standardized` or `raw`.
    #[arg(long, default_value = "standardized")]
    response: ResponseScaling,
}

impl CalibrationOpts {
    fn settings(&self) -> CalibrationSettings {
        CalibrationSettings {
            alpha: self.alpha,
            replicates: self.replicates,
            validation_replicates: self.validation_replicates,
            allow_downgrade: self.allow_downgrade,
            response: self.response,
        }
    }
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(long)]
    data: PathBuf,
    /// Comma-separated r values.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,5,10,20")]
    r: Vec<usize>,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    calibration: CalibrationOpts,
}

#[derive(Args)]
struct TestArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 0)]
    r: usize,
    /// Calibration table for this dataset's covariance. Calibrated on the fly if absent.
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long)]
    seed: u64,
    /// Directory receiving the `test_results.csv` record.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[command(flatten)]
    calibration: CalibrationOpts,
}

#[derive(Args)]
struct PowerArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    table: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 2_000)]
    replicates: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

/// Command failure with its exit status.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::FingerprintMismatch { .. } => 4,
            Error::UnvalidatedTable => 3,
            Error::NoConvergence { .. } => 1,
            Error::Replicate { source, .. } if matches!(**source, Error::NoConvergence { .. }) => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

type CmdResult = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return ExitCode::from(1);
        }
    };
    let result = pool.install(|| match &cli.command {
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Test(args) => cmd_test(args),
        Command::Power(args) => cmd_power(args),
        Command::Validate(args) => cmd_validate(args),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn check_alpha(alpha: f64) -> CmdResult {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("alpha must lie in (0, 1), got {alpha}")).into())
    }
}

/// Maps a dataset error to a failure, naming the marker behind a constant column.
fn dataset_failure(path: &Path, raw: &Dataset, e: Error) -> Failure {
    match e {
        Error::ConstantColumn(j) => Failure {
            code: 2,
            message: format!(
                "{}: marker `{}` (column {}) is constant",
                path.display(),
                raw.marker_names()[j],
                j + 2
            ),
        },
        other => other.into(),
    }
}

/// Standardizes and factors a dataset.
fn load(path: &Path) -> Result<(Dataset, SpectralFactor), Failure> {
    let raw = Dataset::read_csv(path)?;
    prepare(&raw).map_err(|e| dataset_failure(path, &raw, e))
}

fn prepare_dir(dir: &Path) -> CmdResult {
    std::fs::create_dir_all(dir)?;
    Ok(())
}

fn cmd_calibrate(args: &CalibrateArgs) -> CmdResult {
    check_alpha(args.calibration.alpha)?;
    let (data, factor) = load(&args.data)?;
    let table = calibrate(
        &factor,
        data.n(),
        &args.r,
        &args.calibration.settings(),
        RngSpec::new(args.seed, 0),
    )?;
    prepare_dir(&args.out)?;
    let path = args.out.join("calibration.csv");
    let comments = vec![
        "command=calibrate".to_string(),
        format!("data={}", args.data.display()),
        format!("r={}", args.r.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")),
        format!("allow_downgrade={}", args.calibration.allow_downgrade),
    ];
    table.write_csv(&path, &comments)?;

    let band = table.validation_band();
    println!("calibration table: {}", path.display());
    println!("{:>4}  {:>14}  {:>10}  {}", "r", "lambda_r", "rate", "within band");
    for e in &table.entries {
        let ok = !table.attainable(e.r) || (e.exceedance_rate - table.alpha).abs() <= band;
        println!("{:>4}  {:>14.6}  {:>10.4}  {}", e.r, e.lambda_r, e.exceedance_rate, ok);
    }
    if table.downgraded {
        println!("note: fewer than 10000 replicates; table is marked downgraded");
    }
    if table.validated {
        Ok(())
    } else {
        Err(Failure {
            code: 3,
            message: format!(
                "validation rates outside {} ± {band:.4}; table written but unusable for testing",
                table.alpha
            ),
        })
    }
}

fn append_record(dir: &Path, outcome: &TestOutcome) -> CmdResult {
    prepare_dir(dir)?;
    let path = dir.join("test_results.csv");
    let fresh = !path.exists();
    let mut file = OpenOptions::new().create(true).append(true).open(&path)?;
    if fresh {
        writeln!(file, "{}", TestOutcome::CSV_HEADER)?;
    }
    writeln!(file, "{}", outcome.csv_row())?;
    Ok(())
}

fn cmd_test(args: &TestArgs) -> CmdResult {
    check_alpha(args.calibration.alpha)?;
    let raw = Dataset::read_csv(&args.data)?;
    let table = args.table.as_ref().map(CalibrationTable::read_csv).transpose()?;
    let outcome = run_global_test(
        &raw,
        args.r,
        &args.calibration.settings(),
        RngSpec::new(args.seed, 0),
        table.as_ref(),
    )
    .map_err(|e| dataset_failure(&args.data, &raw, e))?;
    println!("{}", outcome.summary());
    append_record(&args.out, &outcome)
}

fn cmd_power(args: &PowerArgs) -> CmdResult {
    let config = PowerConfig::from_path(&args.config)?;
    let started = Instant::now();
    let report = run_power_study::<f64>(&config)?;
    prepare_dir(&args.out)?;

    let mut comments = vec![
        "lasso-gate power table".to_string(),
        format!("version={}", env!("CARGO_PKG_VERSION")),
        format!("config={}", args.config.display()),
    ];
    comments.extend(config.echo());
    report
        .table
        .write_csv(args.out.join("calibration.csv"), &["command=power".to_string()])?;

    let calibration_fits = report.table.replicates + report.table.validation_replicates;
    println!(
        "calibration: {} replicate paths, {} validation datasets",
        report.table.replicates, report.table.validation_replicates
    );
    let mut total_fits = 0;
    for (name, study) in &report.studies {
        let path = args.out.join(name);
        export_power_tables(&study.curves, &path, &comments)?;
        total_fits += study.lasso_fits;
        println!(
            "{}: {} datasets, {} LASSO fits",
            path.display(),
            study.replicates,
            study.lasso_fits
        );
    }
    println!(
        "total: {} scenario fits plus {} calibration datasets in {:.1} s",
        total_fits,
        calibration_fits,
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

fn cmd_validate(args: &ValidateArgs) -> CmdResult {
    if args.replicates < MIN_REPLICATES {
        return Err(Error::InvalidInput(format!("need at least {MIN_REPLICATES} validation replicates")).into());
    }
    let table = CalibrationTable::read_csv(&args.table)?;
    let (data, factor) = load(&args.data)?;
    let fp = fingerprint(&factor, data.n());
    if fp != table.factor_fingerprint {
        return Err(Error::FingerprintMismatch {
            table: table.factor_fingerprint,
            data: fp,
        }
        .into());
    }
    let rates = validate_size(
        &table,
        &factor,
        data.n(),
        args.replicates,
        validation_stream(RngSpec::new(args.seed, 0)),
    )?;
    let band = size_band(table.alpha, args.replicates);
    prepare_dir(&args.out)?;
    let path = args.out.join("validation.csv");
    let mut out = std::io::BufWriter::new(std::fs::File::create(&path)?);
    writeln!(out, "# lasso-gate size validation")?;
    writeln!(out, "# version={}", env!("CARGO_PKG_VERSION"))?;
    writeln!(out, "# table={}", args.table.display())?;
    writeln!(out, "# data={}", args.data.display())?;
    writeln!(out, "# replicates={}", args.replicates)?;
    writeln!(out, "# seed={}", args.seed)?;
    writeln!(out, "# alpha={}", table.alpha)?;
    writeln!(out, "r,lambda_r,observed_rate,within_band")?;
    let mut all_ok = true;
    println!("{:>4}  {:>14}  {:>10}  {}", "r", "lambda_r", "rate", "within band");
    for (e, (_, rate)) in table.entries.iter().zip(&rates) {
        let ok = !table.attainable(e.r) || (rate - table.alpha).abs() <= band;
        all_ok &= ok;
        writeln!(out, "{},{},{},{}", e.r, e.lambda_r, rate, ok)?;
        println!("{:>4}  {:>14.6}  {:>10.4}  {}", e.r, e.lambda_r, rate, ok);
    }
    out.flush()?;
    if all_ok {
        Ok(())
    } else {
        Err(Failure {
            code: 3,
            message: format!("observed size outside {} ± {band:.4}", table.alpha),
        })
    }
}
