use std::path::{Path, PathBuf};
use std::process::ExitCode;

use auxgan_core::config::{ConfigError, TrainingConfig};
use auxgan_core::descriptors::DESCRIPTOR_NAMES;
use auxgan_core::data::synth::{synthetic_corpus, write_corpus, SyntheticSpec};
use auxgan_core::pipeline::{self, PipelineError};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "auxgan", version, about = "Class-conditional molecule generation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML configuration file
    #[arg(long)]
    config: PathBuf,
    /// overrides `seed`
    #[arg(long)]
    seed: Option<u64>,
    /// overrides `output_dir`
    #[arg(long)]
    out: Option<PathBuf>,
    /// worker threads; 1 runs everything serially
    #[arg(long)]
    workers: Option<usize>,
    /// overrides `oversample.factor`
    #[arg(long)]
    oversample_factor: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the auxiliary random forest and report its CV AUC
    TrainClassifier(Common),
    /// MLE-pretrain the generator and pretrain the critic
    Pretrain(Common),
    /// Adversarial training from the pretrained checkpoint
    Train(Common),
    /// Sample SMILES per class from the latest checkpoint
    Generate {
        #[command(flatten)]
        common: Common,
        /// samples per class
        #[arg(long, default_value_t = 6400)]
        n: usize,
        /// one class name; all classes when omitted
        #[arg(long)]
        class: Option<String>,
    },
    /// Score generated samples
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        class: Option<String>,
    },
    /// Write the seeded two-class toy corpus as CSV
    SynthCorpus {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// records of class A and class B
        #[arg(long, value_delimiter = ',', default_values_t = [300, 300])]
        counts: Vec<usize>,
    },
}

fn resolve(common: &Common) -> Result<(TrainingConfig, PathBuf), PipelineError> {
    let mut cfg = TrainingConfig::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(factor) = common.oversample_factor {
        cfg.oversample.factor = factor;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.display().to_string();
    }
    cfg.validate()?;
    let out = if cfg.output_dir.is_empty() {
        PathBuf::from(".")
    } else {
        PathBuf::from(&cfg.output_dir)
    };
    Ok((cfg, out))
}

fn with_workers<T>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T
where
    T: Send,
{
    match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .expect("thread pool")
            .install(f),
        None => f(),
    }
}

fn run(cli: Cli) -> Result<(), PipelineError> {
    match cli.command {
        Command::TrainClassifier(c) => {
            let (cfg, out) = resolve(&c)?;
            let model = with_workers(c.workers, || pipeline::train_classifier(&cfg, &out))?;
            println!("cv_auc\t{}", model.cv_auc.unwrap_or(f64::NAN));
            let names: Vec<&str> = model.features.iter().map(|&f| DESCRIPTOR_NAMES[f]).collect();
            println!("features\t{}", names.join(","));
            println!("model\t{}", pipeline::classifier_path(&out).display());
        }
        Command::Pretrain(c) => {
            let (cfg, out) = resolve(&c)?;
            let (_, trace) = with_workers(c.workers, || pipeline::pretrain(&cfg, &out))?;
            if let Some(last) = trace.last() {
                println!("final_nll\t{last}");
            }
            println!("checkpoint\t{}", pipeline::pretrain_path(&out).display());
        }
        Command::Train(c) => {
            let (cfg, out) = resolve(&c)?;
            let trace = with_workers(c.workers, || pipeline::train(&cfg, &out))?;
            for m in &trace {
                println!(
                    "epoch {}\tresponsiveness {:.4}\tcritic_loss {:.6}\tmean_q {:.4}",
                    m.epoch, m.responsiveness, m.critic_loss, m.mean_q
                );
            }
        }
        Command::Generate { common, n, class } => {
            let (cfg, out) = resolve(&common)?;
            let paths = with_workers(common.workers, || pipeline::generate(&cfg, &out, n, class.as_deref()))?;
            for p in paths {
                println!("{}", p.display());
            }
        }
        Command::Evaluate { common, class } => {
            let (cfg, out) = resolve(&common)?;
            let reports = with_workers(common.workers, || pipeline::evaluate_samples(&cfg, &out, class.as_deref()))?;
            for r in reports {
                print!("{}", r.to_key_value());
            }
        }
        Command::SynthCorpus { out, seed, counts } => {
            let [a, b] = counts[..] else {
                return Err(ConfigError::Invalid("--counts takes two values, e.g. 300,16".into()).into());
            };
            let rows = synthetic_corpus(&SyntheticSpec::two_class(a, b), seed);
            if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            write_corpus(Path::new(&out), &rows)?;
            println!("{}\t{} rows", out.display(), rows.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
