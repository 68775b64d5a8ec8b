mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use config::Settings;
use zkdfl::fl::{FixedPointCodec, ModelId, TrainConfig, NUM_CLASSES};
use zkdfl::orchestrator::{
    load_dataset, read_artifacts, run_experiment, verify_artifacts, write_artifacts, write_csv,
    Dataset, DatasetSource, ExperimentGrid, ExperimentRow, Protocol, ProveMode, RoundConfig,
};

const DEFAULT_SYNTHETIC_SAMPLES: usize = 5000;

#[derive(Parser)]
#[command(name = "zkdfl", version, about = "Verifiable federated averaging on a simulated ledger")]
struct Cli {
    /// key=value settings; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one protocol round and report every check.
    Round(RunArgs),
    /// Sweep a grid; list-valued flags take comma-separated values.
    Experiment(RunArgs),
    /// Re-verify a stored proof against its public inputs and verifying key.
    Verify {
        #[arg(long)]
        vk: PathBuf,
        #[arg(long)]
        public: PathBuf,
        #[arg(long)]
        proof: PathBuf,
    },
    /// Dataset utilities.
    Dataset {
        #[command(subcommand)]
        cmd: DatasetCmd,
    },
}

#[derive(Subcommand)]
enum DatasetCmd {
    /// Parse and validate a UCI activity tree.
    Check {
        #[arg(long)]
        dataset_dir: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    clients: Option<String>,
    #[arg(long)]
    fraction: Option<f64>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    epochs: Option<String>,
    #[arg(long)]
    batch: Option<String>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, conflicts_with = "synthetic")]
    dataset_dir: Option<PathBuf>,
    /// Seeded synthetic data instead of the UCI tree.
    #[arg(long)]
    synthetic: bool,
    #[arg(long)]
    max_samples: Option<usize>,
    /// Output directory (round) or CSV file (experiment).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Count constraints and meter gas without generating a proof.
    #[arg(long)]
    no_prove: bool,
}

impl RunArgs {
    fn settings(&self, file: Option<&Path>) -> Result<Settings> {
        let mut s = Settings::from_file(file)?;
        s.set("clients", self.clients.as_ref());
        s.set("fraction", self.fraction);
        s.set("model", self.model.as_ref());
        s.set("epochs", self.epochs.as_ref());
        s.set("batch", self.batch.as_ref());
        s.set("lr", self.lr);
        s.set("seed", self.seed);
        s.set("max_samples", self.max_samples);
        s.set("out", self.out.as_ref().map(|p| p.display()));
        if let Some(dir) = &self.dataset_dir {
            s.set("dataset_dir", Some(dir.display()));
            s.set("synthetic", Some(false));
        }
        if self.synthetic {
            s.set("synthetic", Some(true));
        }
        if self.no_prove {
            s.set("prove", Some(false));
        }
        Ok(s)
    }
}

fn dataset(s: &Settings, seed: u64) -> Result<Dataset> {
    let max = s.opt::<usize>("max_samples")?;
    let dir = s.opt::<PathBuf>("dataset_dir")?;
    let source = match (s.get("synthetic", false)?, dir) {
        (false, Some(dir)) => DatasetSource::Uci(dir),
        _ => DatasetSource::Synthetic { samples: max.unwrap_or(DEFAULT_SYNTHETIC_SAMPLES) },
    };
    Ok(load_dataset(&source, max, seed)?)
}

fn mode(s: &Settings) -> Result<ProveMode> {
    Ok(if s.get("prove", true)? { ProveMode::Full } else { ProveMode::Skip })
}

fn round(args: RunArgs, file: Option<&Path>) -> Result<()> {
    let s = args.settings(file)?;
    let defaults = TrainConfig::default();
    let model: ModelId = s.get("model", ModelId::Model1)?;
    let mut cfg = RoundConfig::new(model, s.get("clients", 10)?);
    cfg.fraction = s.get("fraction", 1.0)?;
    cfg.seed = s.get("seed", 0)?;
    cfg.train = TrainConfig {
        epochs: s.get("epochs", defaults.epochs)?,
        batch: s.get("batch", defaults.batch)?,
        lr: s.get("lr", defaults.lr)?,
        seed: 0,
    };
    cfg.codec = FixedPointCodec::default();
    let (batch, epochs) = (cfg.train.batch, cfg.train.epochs);
    let data = dataset(&s, cfg.seed)?;
    let mut proto = Protocol::new(cfg, &data)?;
    let rec = proto.run_round(mode(&s)?)?;

    println!("model        {}", rec.arch);
    println!("clients      {:?}", rec.selected);
    println!("parameters   {}", rec.params);
    println!("constraints  {}", rec.constraints);
    if let Some(ms) = rec.setup_ms {
        println!("setup_ms     {ms}");
    }
    match rec.prove_ms {
        Some(ms) => println!("prove_ms     {ms}"),
        None => println!("prove_ms     skipped"),
    }
    println!("hash_sum     {}", if rec.hash_sum_ok { "ok" } else { "FAILED" });
    match rec.proof_ok {
        Some(ok) => println!("proof        {}", if ok { "accepted" } else { "REJECTED" }),
        None => println!("proof        skipped"),
    }
    println!("clients_ok   {}", rec.clients_ok);
    println!("accuracy     {:.4}", rec.accuracy);
    println!("gas_zkdfl    {} (deploys {}, calls {})", rec.gas.total(), rec.gas.deploys(), rec.gas.calls());
    println!("gas_baseline {} (deploy {}, calls {})", rec.baseline.call_gas + rec.baseline.deploy_gas, rec.baseline.deploy_gas, rec.baseline.call_gas);
    if let Some(kb) = rec.peak_memory_kb {
        println!("peak_rss_kb  {kb}");
    }

    if let Some(dir) = s.opt::<PathBuf>("out")? {
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        write_csv(&dir.join("metrics.csv"), &[ExperimentRow::from_record(&rec, batch, epochs)])?;
        if let Some(art) = &rec.artifacts {
            write_artifacts(&dir, art)?;
        }
        let log = dir.join("txlog.csv");
        fs::write(&log, proto.chain().export_log()).with_context(|| format!("writing {}", log.display()))?;
        println!("wrote        {}", dir.display());
    }
    Ok(())
}

fn experiment(args: RunArgs, file: Option<&Path>) -> Result<()> {
    let s = args.settings(file)?;
    let defaults = TrainConfig::default();
    let grid = ExperimentGrid {
        models: s.list("model", vec![ModelId::Model1])?,
        clients: s.list("clients", vec![10])?,
        batches: s.list("batch", vec![defaults.batch])?,
        epochs: s.list("epochs", vec![defaults.epochs])?,
        lr: s.get("lr", defaults.lr)?,
        seed: s.get("seed", 0)?,
        mode: mode(&s)?,
    };
    if s.raw("fraction").is_some_and(|f| f.parse::<f64>().ok() != Some(1.0)) {
        bail!("experiments use every client; drop `fraction`");
    }
    let out = s.get("out", PathBuf::from("metrics.csv"))?;
    let data = dataset(&s, grid.seed)?;
    let rows = run_experiment(&grid, &data, &out)?;
    println!("{} rows -> {}", rows.len(), out.display());
    Ok(())
}

fn verify(vk: &Path, public: &Path, proof: &Path) -> Result<bool> {
    let art = read_artifacts(vk, public, proof)?;
    let ok = verify_artifacts(&art)?;
    println!("{}", if ok { "accepted" } else { "rejected" });
    Ok(ok)
}

fn dataset_check(dir: &Path) -> Result<()> {
    let data = load_dataset(&DatasetSource::Uci(dir.to_path_buf()), None, 0)?;
    let mut per_class = [0usize; NUM_CLASSES];
    data.labels.iter().for_each(|&l| per_class[l] += 1);
    println!("rows    {}", data.len());
    for (c, n) in per_class.iter().enumerate() {
        println!("a{:02}     {n}", c + 1);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file = cli.config.as_deref();
    let result = match cli.cmd {
        Command::Round(a) => round(a, file),
        Command::Experiment(a) => experiment(a, file),
        Command::Verify { vk, public, proof } => match verify(&vk, &public, &proof) {
            Ok(true) => Ok(()),
            Ok(false) => return ExitCode::from(1),
            Err(e) => Err(e),
        },
        Command::Dataset { cmd: DatasetCmd::Check { dataset_dir } } => dataset_check(&dataset_dir),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
