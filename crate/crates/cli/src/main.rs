use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ctreg::dataio::LabelColumn;
use ctreg::RegularizerKind;
use ctreg_cli::{
    cmd_compare, cmd_export_features, cmd_gen_synth, cmd_sweep, cmd_train, format_compare_table, CliError, Model,
    RunConfig, SweepRow,
};

#[derive(Parser)]
#[command(name = "ctreg", version, about = "Coupled-tensor-norm regularized classifiers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one model and write report.json, features.csv and the model.
    Train(Common),
    /// Fit one model per lambda in the grid.
    Sweep(Common),
    /// Sweep every regularizer kind on the same data.
    Compare(Common),
    /// Write synthetic low-rank train.csv and test.csv.
    GenSynth(Common),
    /// Write features.csv from a model saved by `train`.
    ExportFeatures {
        #[command(flatten)]
        common: Common,
        /// Output directory of an earlier `train` run.
        #[arg(long)]
        from: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<Model>,
    /// none, l1, l2, tikhonov or coupled.
    #[arg(long)]
    reg: Option<RegularizerKind>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Comma-separated lambda grid for sweep and compare.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<f64>>,
    /// Comma-separated regularizer kinds for compare.
    #[arg(long, value_delimiter = ',')]
    kinds: Option<Vec<RegularizerKind>>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    train_csv: Option<PathBuf>,
    #[arg(long)]
    test_csv: Option<PathBuf>,
    /// Label column, by header name or zero-based index.
    #[arg(long)]
    label_col: Option<LabelColumn>,
    /// The CSV files have no header row.
    #[arg(long)]
    no_header: bool,
    #[arg(long)]
    standardize: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_json_file(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = self.model {
            cfg.model = v;
        }
        if let Some(v) = self.reg {
            cfg.reg = v;
        }
        if let Some(v) = self.lambda {
            cfg.lambda = v;
        }
        if let Some(v) = &self.grid {
            cfg.lambda_grid = v.clone();
        }
        if let Some(v) = &self.kinds {
            cfg.kinds = v.clone();
        }
        if self.mu.is_some() {
            cfg.mu = self.mu;
        }
        if self.train_csv.is_some() {
            cfg.train_csv = self.train_csv.clone();
        }
        if self.test_csv.is_some() {
            cfg.test_csv = self.test_csv.clone();
        }
        if let Some(v) = &self.label_col {
            cfg.label_col = v.clone();
        }
        if self.no_header {
            cfg.has_header = false;
        }
        if self.standardize {
            cfg.standardize = true;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = &self.out {
            cfg.out = v.clone();
        }
        if let Some(v) = self.workers {
            cfg.workers = v;
        }
        Ok(cfg)
    }
}

fn print_sweep(rows: &[SweepRow]) {
    println!("{:<10} {:>8} {:>9} {:>9}", "kind", "lambda", "train", "test");
    for r in rows {
        let pct = |v: Option<f64>| v.map(|a| format!("{:.2}%", 100.0 * a)).unwrap_or_else(|| "failed".into());
        println!(
            "{:<10} {:>8.0e} {:>9} {:>9}{}",
            r.kind.as_str(),
            r.lambda,
            pct(r.train_accuracy),
            pct(r.test_accuracy),
            if r.best { "  *" } else { "" }
        );
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Train(c) => {
            let r = cmd_train(&c.resolve()?)?;
            println!(
                "train {:.2}%  test {:.2}%  ({}, {} iterations)",
                100.0 * r.train_accuracy.unwrap_or(0.0),
                100.0 * r.test_accuracy.unwrap_or(0.0),
                r.stop_reason.as_deref().unwrap_or("-"),
                r.iterations.unwrap_or(0)
            );
        }
        Command::Sweep(c) => {
            let r = cmd_sweep(&c.resolve()?)?;
            print_sweep(&r.sweep);
            if let Some(s) = &r.selection {
                println!("{s}");
            }
        }
        Command::Compare(c) => {
            let cfg = c.resolve()?;
            let r = cmd_compare(&cfg)?;
            print!("{}", format_compare_table(cfg.model, &r.compare));
            if let Some(s) = &r.selection {
                println!("{s}");
            }
        }
        Command::GenSynth(c) => {
            let (tr, te) = cmd_gen_synth(&c.resolve()?)?;
            println!("wrote {} and {}", tr.display(), te.display());
        }
        Command::ExportFeatures { common, from } => {
            let p = cmd_export_features(&common.resolve()?, &from)?;
            println!("wrote {}", p.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
