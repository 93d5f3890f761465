use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use careguard::cli::{self, TrainLayer};

#[derive(Parser)]
#[command(
    name = "careguard",
    version,
    about = "Layered SVM-based intrusion detection for a simulated remote-healthcare system"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum LayerArg {
    Anomaly,
    Misuse,
}

impl From<LayerArg> for TrainLayer {
    fn from(value: LayerArg) -> Self {
        match value {
            LayerArg::Anomaly => TrainLayer::Anomaly,
            LayerArg::Misuse => TrainLayer::Misuse,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Build the anomaly and misuse train/test splits from NSL-KDD files.
    BuildData {
        /// Raw training-source file (e.g. KDDTrain+.txt).
        #[arg(long)]
        train_file: PathBuf,
        /// Raw test-source file (e.g. KDDTest+.txt).
        #[arg(long)]
        test_file: PathBuf,
        /// Sampling seed.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output dataset directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Train one detection layer's model from a built dataset directory.
    Train {
        /// Built dataset directory.
        #[arg(long, env = "CAREGUARD_DATA_DIR")]
        data: PathBuf,
        /// Which layer to train.
        #[arg(long)]
        layer: LayerArg,
        /// Soft-margin box constraint.
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// RBF width; defaults to 1 / encoded dimension.
        #[arg(long)]
        gamma: Option<f64>,
        /// KKT tolerance of the trainer.
        #[arg(long, default_value_t = 1e-3)]
        tolerance: f64,
        /// Cap on full sweeps over the training set.
        #[arg(long, default_value_t = 50)]
        max_passes: u32,
        /// Trainer seed.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output model file.
        #[arg(long)]
        out: PathBuf,
        /// Fail (exit 4) instead of warning when training does not converge.
        #[arg(long)]
        strict_convergence: bool,
    },
    /// Evaluate all three layers on the built test split and emit reports.
    Eval {
        /// Built dataset directory.
        #[arg(long, env = "CAREGUARD_DATA_DIR")]
        data: PathBuf,
        /// Trained anomaly model file.
        #[arg(long)]
        anomaly_model: PathBuf,
        /// Trained misuse model file.
        #[arg(long)]
        misuse_model: PathBuf,
        /// Timing repetitions per layer.
        #[arg(long, default_value_t = 10)]
        repeats: usize,
        /// Output report directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the multiagent simulation with IDS-screened messaging.
    Simulate {
        /// Simulation config (TOML); defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Built dataset directory (traffic pools and schema).
        #[arg(long, env = "CAREGUARD_DATA_DIR")]
        data: PathBuf,
        /// Trained anomaly model file.
        #[arg(long)]
        anomaly_model: PathBuf,
        /// Trained misuse model file.
        #[arg(long)]
        misuse_model: PathBuf,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output run directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic NSL-KDD-format corpus (no real dataset needed).
    SynthData {
        /// Generator seed.
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Output corpus directory.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    // Die quietly when a downstream pipe closes (e.g. `careguard eval | head`)
    // instead of panicking on the failed print.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }

    let cli = Cli::parse();
    let result = match cli.command {
        Command::BuildData {
            train_file,
            test_file,
            seed,
            out,
        } => cli::cmd_build_data(&train_file, &test_file, seed, &out),
        Command::Train {
            data,
            layer,
            c,
            gamma,
            tolerance,
            max_passes,
            seed,
            out,
            strict_convergence,
        } => cli::cmd_train(
            &data,
            layer.into(),
            c,
            gamma,
            tolerance,
            max_passes,
            seed,
            &out,
            strict_convergence,
        ),
        Command::Eval {
            data,
            anomaly_model,
            misuse_model,
            repeats,
            out,
        } => cli::cmd_eval(&data, &anomaly_model, &misuse_model, repeats, &out),
        Command::Simulate {
            config,
            data,
            anomaly_model,
            misuse_model,
            seed,
            out,
        } => cli::cmd_simulate(
            config.as_deref(),
            &data,
            &anomaly_model,
            &misuse_model,
            seed,
            &out,
        ),
        Command::SynthData { seed, out } => cli::cmd_synth_data(seed, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
