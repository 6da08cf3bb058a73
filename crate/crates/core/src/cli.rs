//! Command-line front end.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::agreement::compare;
use crate::attribution::{block_cir, cir_scores, class_conditioned_cir};
use crate::centering::{CenterMethod, CenteringSpec};
use crate::data::DataTable;
use crate::error::{Error, Result};
use crate::groups::{GroupFamily, WeightVector};
use crate::io::{
    align_scores, load_feature_scores, load_groups, load_table, load_weights, write_agreement,
    write_curve, write_reports, Format,
};
use crate::sketch::GkSketch;
use crate::transfer::{pareto_knee, run_transfer, TransferConfig, DEFAULT_FRACTIONS};

/// Environment variable capping worker threads (0 = automatic).
pub const THREADS_ENV: &str = "EXCIR_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "excir",
    version,
    about = "Correlation impact ratio feature attribution"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Per-feature scores (plus group scores when --groups is given).
    Score(RunArgs),
    /// Group scores only.
    Block(RunArgs),
    /// One report per class score column.
    Classcond(RunArgs),
    /// Subsampled runs compared against the full run.
    Transfer(TransferArgs),
    /// Agreement metrics between two score reports.
    Agree(AgreeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CenterArg {
    Midmean,
    Median,
    Mean,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SketchArg {
    Exact,
    Gk,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    input: PathBuf,
    /// Output (prediction) column.
    #[arg(long)]
    target: Option<String>,
    /// Comma-separated class score columns.
    #[arg(long, value_delimiter = ',')]
    class_cols: Option<Vec<String>>,
    /// JSON file of the form {"groups": {name: [feature, ...]}}.
    #[arg(long)]
    groups: Option<PathBuf>,
    /// Single-column CSV of nonnegative row weights.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "midmean")]
    center: CenterArg,
    #[arg(long, value_enum, default_value = "exact")]
    sketch: SketchArg,
    #[arg(long, default_value_t = GkSketch::DEFAULT_EPSILON)]
    epsilon: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    k: usize,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TransferArgs {
    #[command(flatten)]
    run: RunArgs,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_FRACTIONS.to_vec())]
    fractions: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[arg(long, default_value_t = 0.8)]
    target_jaccard: f64,
}

#[derive(Debug, Args)]
struct AgreeArgs {
    #[arg(long)]
    a: PathBuf,
    #[arg(long)]
    b: PathBuf,
    #[arg(long, default_value_t = 8)]
    k: usize,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

impl RunArgs {
    fn centering(&self) -> Result<CenteringSpec> {
        let method = match self.center {
            CenterArg::Midmean => CenterMethod::Midmean,
            CenterArg::Median => CenterMethod::Median,
            CenterArg::Mean => CenterMethod::Mean,
        };
        match self.sketch {
            SketchArg::Exact => Ok(CenteringSpec::exact(method)),
            SketchArg::Gk => CenteringSpec::sketch(method, self.epsilon),
        }
    }

    fn target(&self) -> Result<&str> {
        if self.class_cols.is_some() {
            return Err(Error::InvalidInput(
                "--class-cols is only valid with the classcond subcommand".into(),
            ));
        }
        self.target
            .as_deref()
            .ok_or_else(|| Error::InvalidInput("--target is required".into()))
    }

    fn class_cols(&self) -> Result<&[String]> {
        if self.target.is_some() {
            return Err(Error::InvalidInput(
                "classcond takes --class-cols, not --target".into(),
            ));
        }
        match self.class_cols.as_deref() {
            Some(cols) if !cols.is_empty() => Ok(cols),
            _ => Err(Error::InvalidInput("--class-cols is required".into())),
        }
    }

    fn no_weights(&self, sub: &str) -> Result<()> {
        if self.weights.is_some() {
            return Err(Error::InvalidInput(format!(
                "--weights is not supported by {sub}"
            )));
        }
        Ok(())
    }

    fn load(&self, outputs: &[String]) -> Result<(DataTable, GroupFamily)> {
        let table = load_table(&self.input, outputs)?;
        let groups = match &self.groups {
            Some(path) => load_groups(path, table.feature_names())?,
            None => GroupFamily::empty(),
        };
        Ok((table, groups))
    }

    fn sink<'a>(&self, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
        open_sink(self.output.as_ref(), stdout)
    }
}

fn open_sink<'a>(path: Option<&PathBuf>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    match path {
        Some(p) => Ok(Box::new(File::create(p).map_err(|e| Error::io(p, e))?)),
        None => Ok(Box::new(stdout)),
    }
}

fn execute(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match command {
        Command::Score(args) => {
            let target = args.target()?.to_string();
            let (table, groups) = args.load(std::slice::from_ref(&target))?;
            let weights: Option<WeightVector> = match &args.weights {
                Some(p) => Some(load_weights(p, table.n())?),
                None => None,
            };
            let report = cir_scores(
                &table,
                &target,
                &groups,
                &args.centering()?,
                weights.as_ref(),
            )?;
            write_reports(args.sink(stdout)?, &[report], Some(args.seed), args.format)
        }
        Command::Block(args) => {
            args.no_weights("block")?;
            let target = args.target()?.to_string();
            if args.groups.is_none() {
                return Err(Error::InvalidInput("block requires --groups".into()));
            }
            let (table, groups) = args.load(std::slice::from_ref(&target))?;
            let report = block_cir(&table, &target, &groups, &args.centering()?)?;
            write_reports(args.sink(stdout)?, &[report], Some(args.seed), args.format)
        }
        Command::Classcond(args) => {
            args.no_weights("classcond")?;
            let classes = args.class_cols()?.to_vec();
            let (table, groups) = args.load(&classes)?;
            let reports = class_conditioned_cir(&table, &classes, &groups, &args.centering()?)?;
            write_reports(args.sink(stdout)?, &reports, Some(args.seed), args.format)
        }
        Command::Transfer(t) => {
            let args = &t.run;
            args.no_weights("transfer")?;
            let target = args.target()?.to_string();
            let (table, groups) = args.load(std::slice::from_ref(&target))?;
            let config = TransferConfig {
                fractions: t.fractions.clone(),
                seed: args.seed,
                k: args.k,
                repeats: t.repeats,
            };
            let curve = run_transfer(&table, &target, &groups, &args.centering()?, config)?;
            let knee = pareto_knee(&curve, t.target_jaccard);
            writeln!(
                stderr,
                "knee: fraction={} target_jaccard={}{}",
                knee.fraction,
                knee.target_jaccard,
                if knee.no_knee {
                    " (no fraction met the target)"
                } else {
                    ""
                }
            )
            .map_err(|e| Error::io("<stderr>", e))?;
            write_curve(args.sink(stdout)?, &curve, Some(knee), args.format)
        }
        Command::Agree(args) => {
            let a = load_feature_scores(&args.a)?;
            let b = load_feature_scores(&args.b)?;
            let (va, vb) = align_scores(&a, &b)?;
            let report = compare(&va, &vb, args.k)?;
            write_agreement(
                open_sink(args.output.as_ref(), stdout)?,
                &report,
                args.format,
            )
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .map_err(|_| Error::InvalidInput(format!("{THREADS_ENV}={raw} is not a thread count")))?;
    if threads > 0 {
        // A pool may already exist when embedded; the cap is best effort then.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    Ok(())
}

/// Runs the CLI with explicit output streams and returns the exit code:
/// 0 on success, 2 on usage or input errors, 1 on internal errors.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                write!(stdout, "{rendered}")
            } else {
                write!(stderr, "{rendered}")
            };
            return code;
        }
    };
    let result = configure_threads().and_then(|_| execute(cli.command, stdout, stderr));
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_input_error() {
                2
            } else {
                1
            }
        }
    }
}

/// Entry point used by the binary.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run(argv, &mut stdout.lock(), &mut stderr.lock())
}
