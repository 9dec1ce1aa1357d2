//! `hopsig`: enroll, verify and evaluate signatures from the command line.
//!
//! Exit codes: 0 success or genuine, 3 forged, 1 input or runtime error,
//! 2 usage or configuration error.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hopsig::change::InitStrategy;
use hopsig::imageops::{load_gray, GrayImage};
use hopsig::verifier::{
    curve_csv, enroll, evaluate, synth_dataset, verify, Canvas, DatasetManifest, EnrollmentRecord,
    ForgeryThreshold, Verdict, VerificationConfig, DEFAULT_SEED,
};
use log::{info, warn};

use config::{parse_canvas, parse_taus, RunConfig, Taus};

#[derive(Parser, Debug)]
#[command(name = "hopsig", version, about = "Offline signature verification with Hopfield networks")]
struct Cli {
    /// TOML configuration file; command-line flags take precedence.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Normalization canvas, e.g. 64x64.
    #[arg(long, global = true, value_name = "WxH", value_parser = parse_canvas)]
    canvas: Option<Canvas>,
    /// Only print results and errors.
    #[arg(long, short, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Train an enrollment record from reference signatures.
    Enroll {
        #[arg(long)]
        id: String,
        #[arg(long, required = true, num_args = 1..)]
        refs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Verify one test signature against an enrollment record.
    Verify {
        #[arg(long)]
        record: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[command(flatten)]
        budget: Budget,
        #[command(flatten)]
        relax: RelaxArgs,
        /// Per-iteration CSV of energy, perc and changed count.
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
        /// Final change labels as a PGM (changed = 255).
        #[arg(long, value_name = "PATH")]
        labels: Option<PathBuf>,
        /// Full result as JSON.
        #[arg(long, value_name = "PATH")]
        result: Option<PathBuf>,
    },
    /// Enroll and verify every customer of a dataset manifest.
    Evaluate {
        #[arg(long)]
        manifest: PathBuf,
        /// Directory for report.json and table.txt.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        budget: Budget,
        #[command(flatten)]
        relax: RelaxArgs,
    },
    /// FRR and FAR over a list of absolute budgets.
    Sweep {
        #[arg(long)]
        manifest: PathBuf,
        /// `A..B` (inclusive) or a comma-separated ascending list.
        #[arg(long, value_parser = parse_taus)]
        taus: Taus,
        /// CSV with header tau,frr,far.
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        relax: RelaxArgs,
    },
    /// Render the seeded synthetic dataset.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        customers: Option<usize>,
        #[arg(long)]
        genuine_per: Option<usize>,
        #[arg(long)]
        forged_per: Option<usize>,
        #[arg(long)]
        references_per: Option<usize>,
    },
}

#[derive(Args, Debug)]
struct Budget {
    /// Changed-pixel budget in pixels.
    #[arg(long, conflicts_with = "tau_frac")]
    tau: Option<u64>,
    /// Changed-pixel budget as a fraction of reference ink pixels.
    #[arg(long)]
    tau_frac: Option<f64>,
}

#[derive(Args, Debug)]
struct RelaxArgs {
    #[arg(long, value_enum)]
    init: Option<InitArg>,
    /// Agreement goal in percent.
    #[arg(long)]
    goal: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    bias_gain: Option<f64>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum InitArg {
    Thresholded,
    AllUnchanged,
    Random,
}

impl From<InitArg> for InitStrategy {
    fn from(a: InitArg) -> Self {
        match a {
            InitArg::Thresholded => InitStrategy::Thresholded,
            InitArg::AllUnchanged => InitStrategy::AllUnchanged,
            InitArg::Random => InitStrategy::Random,
        }
    }
}

impl Budget {
    fn apply(&self, cfg: &mut VerificationConfig) {
        if let Some(t) = self.tau {
            cfg.forgery_threshold = ForgeryThreshold::Pixels(t);
        }
        if let Some(f) = self.tau_frac {
            cfg.forgery_threshold = ForgeryThreshold::ForegroundFraction(f);
        }
    }
}

impl RelaxArgs {
    fn apply(&self, cfg: &mut VerificationConfig) {
        if let Some(init) = self.init {
            cfg.init = init.into();
        }
        if let Some(goal) = self.goal {
            cfg.goal_perc = goal;
        }
        if let Some(beta) = self.beta {
            cfg.beta = beta;
        }
        if let Some(gain) = self.bias_gain {
            cfg.bias_gain = gain;
        }
    }
}

enum Failure {
    Usage(String),
    Runtime(String),
}

impl From<hopsig::Error> for Failure {
    fn from(e: hopsig::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "error" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    let mut cfg = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(Failure::Usage)?,
        None => RunConfig::default(),
    };
    cfg.override_with(cli.seed, cli.canvas);
    let say = |msg: String| {
        if !cli.quiet {
            println!("{msg}");
        }
    };

    match cli.command {
        Command::Enroll { id, refs, out } => {
            cfg.validate().map_err(Failure::Usage)?;
            let images = refs.iter().map(load_gray).collect::<hopsig::Result<Vec<GrayImage>>>()?;
            let record = enroll(&id, &images, &cfg.enroll_config())?;
            let meta = &record.train_meta;
            if !meta.all_stable {
                warn!("training stopped after {} epochs without stabilizing", meta.epochs_used);
            }
            write_output(&out, record.to_json().as_bytes())?;
            say(format!(
                "enrolled {id}: {} of {} samples, {} epochs, stable={}",
                meta.samples_used,
                meta.samples_used + meta.samples_rejected,
                meta.epochs_used,
                meta.all_stable
            ));
            Ok(0)
        }
        Command::Verify {
            record,
            test,
            budget,
            relax,
            trace,
            labels,
            result,
        } => {
            budget.apply(&mut cfg.verify);
            relax.apply(&mut cfg.verify);
            cfg.validate().map_err(Failure::Usage)?;
            let text = fs::read_to_string(&record).map_err(|e| input_error(&record, e))?;
            let record = EnrollmentRecord::from_json(&text).map_err(|e| input_error(&record, e))?;
            if cli.canvas.is_some_and(|c| c != record.canvas) {
                warn!("--canvas ignored: the record fixes the canvas");
            }
            let image = load_gray(&test)?;
            let outcome = verify(&record, &image, &cfg.verify)?;
            if let Some(path) = trace {
                write_output(&path, outcome.trace.to_csv().as_bytes())?;
            }
            if let Some(path) = labels {
                write_output(&path, &outcome.labels.to_gray().to_pgm_bytes())?;
            }
            if let Some(path) = result {
                write_output(&path, pretty(&outcome).as_bytes())?;
            }
            let (word, code) = match outcome.verdict {
                Verdict::Genuine => ("GENUINE", 0),
                Verdict::Forged => ("FORGED", 3),
            };
            println!(
                "{word} changed={} perc={:.2} goal={}",
                outcome.changed_count,
                outcome.perc_final,
                if outcome.reached_goal { 'y' } else { 'n' }
            );
            info!("tau={} truth_changed={}", outcome.tau, outcome.truth_changed);
            Ok(code)
        }
        Command::Evaluate {
            manifest,
            out,
            budget,
            relax,
        } => {
            budget.apply(&mut cfg.verify);
            relax.apply(&mut cfg.verify);
            cfg.validate().map_err(Failure::Usage)?;
            let manifest = DatasetManifest::load(&manifest)?;
            let evaluation = evaluate(&manifest, &cfg.enroll_config(), &cfg.verify)?;
            let table = evaluation.report.render_table();
            write_output(&out.join("report.json"), pretty(&evaluation).as_bytes())?;
            write_output(&out.join("table.txt"), table.as_bytes())?;
            print!("{table}");
            Ok(0)
        }
        Command::Sweep {
            manifest,
            taus,
            out,
            relax,
        } => {
            relax.apply(&mut cfg.verify);
            cfg.validate().map_err(Failure::Usage)?;
            let manifest = DatasetManifest::load(&manifest)?;
            let evaluation = evaluate(&manifest, &cfg.enroll_config(), &cfg.verify)?;
            let curve = evaluation.operating_curve(&taus.0)?;
            write_output(&out, curve_csv(&curve).as_bytes())?;
            say(format!("wrote {} operating points to {}", curve.len(), out.display()));
            Ok(0)
        }
        Command::Synth {
            out,
            customers,
            genuine_per,
            forged_per,
            references_per,
        } => {
            let p = &mut cfg.synth;
            for (slot, flag) in [
                (&mut p.customers, customers),
                (&mut p.genuine_per, genuine_per),
                (&mut p.forged_per, forged_per),
                (&mut p.references_per, references_per),
            ] {
                if let Some(v) = flag {
                    *slot = v;
                }
            }
            cfg.validate().map_err(Failure::Usage)?;
            let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
            let manifest = synth_dataset(seed, &cfg.synth, &out)?;
            say(format!(
                "wrote {} customers, {} trials to {}",
                manifest.customers.len(),
                manifest.trial_count(),
                out.join("manifest.json").display()
            ));
            Ok(0)
        }
    }
}

fn pretty<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("outputs serialize");
    text.push('\n');
    text
}

fn input_error(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Runtime(format!("{}: {e}", path.display()))
}

fn write_output(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| input_error(dir, e))?;
    }
    fs::write(path, bytes).map_err(|e| input_error(path, e))
}
