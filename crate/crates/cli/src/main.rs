//! `advqa`: command-line front end for the advqa-core toolkit.
//!
//! Exit codes: 0 on success, 1 on usage errors (bad flags, missing input files),
//! 2 on data errors (malformed input, failed checks). Diagnostics go to stderr.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use advqa_core::attacks::{run_augmentation, run_negation_pairs, AttackConfig};
use advqa_core::corpus::{load_dataset, parse_predictions, write_augmented, CheckMode};
use advqa_core::entity::{mine_hard_negatives, negative_stats};
use advqa_core::losskit::{run_loss_checks, LossConfig};
use advqa_core::metrics::{adversarial_gap, evaluate};
use advqa_core::mixer::{mix, mix_sweep, MixConfig, MixRatio, Sampling};
use advqa_core::report::{emit_report, pattern_figure_csv, table_csv, Format, Table};
use advqa_core::taxonomy::{analyze, TaxonomyReport};
use advqa_core::toy::{toy_datasets, toy_train, TrainHyper};
use advqa_core::{Dataset, Error, PredictionSet};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "advqa", version, about = "Adversarial extractive-QA toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct SeedArg {
    /// Random seed; falls back to $ADVQA_SEED, then 0.
    #[arg(long, env = "ADVQA_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Clone, Copy)]
struct ModeArg {
    /// Skip examples whose answer offsets do not match instead of failing.
    #[arg(long)]
    lenient: bool,
}

impl ModeArg {
    fn mode(self) -> CheckMode {
        if self.lenient {
            CheckMode::Lenient
        } else {
            CheckMode::Strict
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print size and composition of a SQuAD JSON or JSONL dataset.
    ParseStats {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        mode: ModeArg,
    },
    /// Score predictions with EM/F1.
    Evaluate {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
        /// Write per-example scores here as CSV.
        #[arg(long)]
        per_example: Option<PathBuf>,
        /// Adversarial dataset; with --adv-predictions adds the gap to the output.
        #[arg(long, requires = "adv_predictions")]
        adv_dataset: Option<PathBuf>,
        #[arg(long, requires = "adv_dataset")]
        adv_predictions: Option<PathBuf>,
        /// Baseline gap in EM points, for gap closure.
        #[arg(long, allow_hyphen_values = true)]
        baseline_gap: Option<f64>,
        #[command(flatten)]
        mode: ModeArg,
    },
    /// Classify failed predictions under the five error schemes.
    AnalyzeErrors {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        predictions: PathBuf,
        /// Directory for analysis.json, one CSV per table and pattern_distribution.csv.
        /// Without it the JSON report goes to stdout.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[command(flatten)]
        mode: ModeArg,
    },
    /// Append distractor attacks to a sample of examples.
    Augment(GenerateArgs),
    /// Build the negation contrastive set.
    PairsNegation(GenerateArgs),
    /// Mine same-type hard negatives for every example.
    MineNegatives {
        #[arg(long)]
        input: PathBuf,
        /// JSONL of negative sets; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// CSV of answer entity types over entity-rich examples.
        #[arg(long)]
        distribution: Option<PathBuf>,
        #[command(flatten)]
        mode: ModeArg,
    },
    /// Mix clean and adversarial data at a ratio.
    Mix {
        #[arg(long)]
        clean: PathBuf,
        #[arg(long)]
        adversarial: PathBuf,
        /// Ratio such as 80-20; with --sweep, a comma-separated list.
        #[arg(long, default_value = "80-20")]
        ratio: String,
        /// Output size; all clean examples are kept when absent.
        #[arg(long)]
        total: Option<usize>,
        #[command(flatten)]
        seed: SeedArg,
        /// Output JSONL, or a directory with --sweep; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Run every listed ratio, writing mix-<ratio>.jsonl files into --out.
        #[arg(long, requires = "out")]
        sweep: bool,
        /// Draw repeats when supply is short instead of failing.
        #[arg(long)]
        with_replacement: bool,
        /// Write mixing statistics as JSON here; otherwise they are logged.
        #[arg(long)]
        stats: Option<PathBuf>,
        #[command(flatten)]
        mode: ModeArg,
    },
    /// Run gradient and closed-form checks on the losses.
    LossCheck {
        #[command(flatten)]
        seed: SeedArg,
        #[arg(long, default_value_t = 100)]
        instances: usize,
    },
    /// Train the linear span scorer on synthetic data.
    ToyTrain {
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        #[arg(long, default_value_t = 3)]
        epochs: usize,
        #[arg(long, default_value_t = 0.01)]
        lr: f64,
        #[arg(long, default_value_t = 16)]
        batch_size: usize,
        #[command(flatten)]
        seed: SeedArg,
        /// Training data; synthetic when absent.
        #[arg(long, requires = "eval")]
        train: Option<PathBuf>,
        #[arg(long, requires = "train")]
        eval: Option<PathBuf>,
        #[arg(long, default_value_t = 400)]
        n_train: usize,
        #[arg(long, default_value_t = 300)]
        n_eval: usize,
        /// Loss curve as CSV (epoch,loss).
        #[arg(long)]
        curve: Option<PathBuf>,
    },
    /// Render a saved analysis as tables.
    Report {
        #[arg(long)]
        from: PathBuf,
        /// json, csv or markdown
        #[arg(long, default_value = "markdown")]
        format: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    input: PathBuf,
    /// TOML attack configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configuration's seed.
    #[arg(long, env = "ADVQA_SEED")]
    seed: Option<u64>,
    /// Output JSONL; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report JSON; logged when absent.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Write only the generated examples, not the originals.
    #[arg(long)]
    generated_only: bool,
    #[command(flatten)]
    mode: ModeArg,
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Data(Error::Io(e))
    }
}

type Outcome = Result<(), Failure>;

fn require_file(path: &Path) -> Outcome {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::Usage(format!("input file not found: {}", path.display())))
    }
}

fn read_dataset(path: &Path, mode: ModeArg) -> Result<Dataset, Failure> {
    Ok(load_dataset(&fs::read(path)?, mode.mode())?.value)
}

fn read_predictions(path: &Path, mode: ModeArg) -> Result<PredictionSet, Failure> {
    Ok(parse_predictions(&fs::read(path)?, mode.mode())?.value)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Outcome {
    match out {
        Some(p) => fs::write(p, bytes)?,
        None => io::stdout().lock().write_all(bytes)?,
    }
    Ok(())
}

fn json_line(value: &impl serde::Serialize) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("serializable value");
    v.push(b'\n');
    v
}

fn emit_or_log(out: Option<&Path>, what: &str, value: &impl serde::Serialize) -> Outcome {
    match out {
        Some(p) => fs::write(p, json_line(value))?,
        None => log::info!("{what}: {}", serde_json::to_string(value).expect("serializable value")),
    }
    Ok(())
}

fn csv_writer() -> csv::Writer<Vec<u8>> {
    csv::Writer::from_writer(Vec::new())
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<Vec<u8>, Failure> {
    w.into_inner()
        .map_err(|e| Failure::Data(Error::Io(io::Error::other(e.to_string()))))
}

fn csv_err(e: csv::Error) -> Failure {
    Failure::Data(Error::Io(io::Error::other(e)))
}

fn attack_config(args: &GenerateArgs) -> Result<AttackConfig, Failure> {
    let mut cfg = match &args.config {
        Some(p) => {
            require_file(p)?;
            AttackConfig::from_toml(&fs::read_to_string(p)?)?
        }
        None => AttackConfig::default(),
    };
    if let Some(s) = args.seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::ParseStats { input, mode } => {
            require_file(&input)?;
            let parsed = load_dataset(&fs::read(&input)?, mode.mode())?;
            let ds = &parsed.value;
            let impossible = ds.examples.iter().filter(|e| e.is_impossible).count();
            let stats = json!({
                "examples": ds.len(),
                "answerable": ds.len() - impossible,
                "impossible": impossible,
                "answers": ds.examples.iter().map(|e| e.answers.len()).sum::<usize>(),
                "with_negation_marker": ds.examples.iter().filter(|e| e.has_negation_marker()).count(),
                "source": ds.source_label,
                "version": ds.version,
                "skipped": parsed.warnings.len(),
            });
            emit(None, &json_line(&stats))
        }
        Command::Evaluate {
            dataset,
            predictions,
            per_example,
            adv_dataset,
            adv_predictions,
            baseline_gap,
            mode,
        } => {
            for p in [
                Some(&dataset),
                Some(&predictions),
                adv_dataset.as_ref(),
                adv_predictions.as_ref(),
            ]
            .into_iter()
            .flatten()
            {
                require_file(p)?;
            }
            let report = evaluate(&read_dataset(&dataset, mode)?, &read_predictions(&predictions, mode)?)?;
            let mut out = json!({"em": report.em, "f1": report.f1, "n": report.n_examples});
            if report.n_missing > 0 {
                out["missing"] = json!(report.n_missing);
            }
            if let (Some(d), Some(p)) = (adv_dataset, adv_predictions) {
                let adv = evaluate(&read_dataset(&d, mode)?, &read_predictions(&p, mode)?)?;
                let mut gap = adversarial_gap(&report, &adv)?;
                if let Some(b) = baseline_gap {
                    gap = gap.with_baseline(b);
                }
                out["adversarial"] = json!({"em": adv.em, "f1": adv.f1, "n": adv.n_examples});
                out["gap"] = json!(gap.gap);
                if let Some(c) = gap.closure {
                    out["gap_closure"] = json!(c);
                }
            }
            if let Some(path) = per_example {
                let mut w = csv_writer();
                w.write_record(["id", "em", "f1", "missing", "prediction"])
                    .map_err(csv_err)?;
                for (id, s) in &report.per_example {
                    w.write_record([
                        id.as_str(),
                        &s.em.to_string(),
                        &s.f1.to_string(),
                        &s.missing.to_string(),
                        &s.predicted,
                    ])
                    .map_err(csv_err)?;
                }
                fs::write(path, finish_csv(w)?)?;
            }
            emit(None, &json_line(&out))
        }
        Command::AnalyzeErrors {
            dataset,
            predictions,
            out_dir,
            mode,
        } => {
            require_file(&dataset)?;
            require_file(&predictions)?;
            let rep = analyze(&read_dataset(&dataset, mode)?, &read_predictions(&predictions, mode)?)?;
            match out_dir {
                Some(dir) => {
                    fs::create_dir_all(&dir)?;
                    fs::write(dir.join("analysis.json"), emit_report(&rep, Format::Json)?)?;
                    for t in Table::ALL {
                        fs::write(dir.join(format!("{}.csv", t.slug())), table_csv(&rep, t)?)?;
                    }
                    fs::write(dir.join("pattern_distribution.csv"), pattern_figure_csv(&rep)?)?;
                    log::info!("{} errors out of {} examples", rep.total_errors, rep.n_examples);
                    Ok(())
                }
                None => emit(None, &emit_report(&rep, Format::Json)?),
            }
        }
        Command::Augment(args) => {
            require_file(&args.input)?;
            let cfg = attack_config(&args)?;
            let ds = read_dataset(&args.input, args.mode)?;
            let (mut out, report) = run_augmentation(&ds, &cfg)?;
            if args.generated_only {
                out.examples.retain(|e| e.attack_type.is_some());
            }
            emit(args.out.as_deref(), &write_augmented(&out)?)?;
            emit_or_log(args.report.as_deref(), "augmentation report", &report)
        }
        Command::PairsNegation(args) => {
            require_file(&args.input)?;
            let cfg = attack_config(&args)?;
            let ds = read_dataset(&args.input, args.mode)?;
            let (mut out, report) = run_negation_pairs(&ds, &cfg)?;
            if args.generated_only {
                out.examples.retain(|e| e.attack_type.is_some());
            }
            emit(args.out.as_deref(), &write_augmented(&out)?)?;
            emit_or_log(args.report.as_deref(), "negation report", &report)
        }
        Command::MineNegatives {
            input,
            out,
            distribution,
            mode,
        } => {
            require_file(&input)?;
            let mut ds = read_dataset(&input, mode)?;
            let sets: Vec<_> = ds.examples.iter_mut().filter_map(mine_hard_negatives).collect();
            let mut lines = Vec::new();
            for s in &sets {
                serde_json::to_writer(&mut lines, s).map_err(|e| Error::MalformedJson(e.to_string()))?;
                lines.push(b'\n');
            }
            emit(out.as_deref(), &lines)?;
            let stats = negative_stats(ds.len(), &sets);
            if let Some(path) = distribution {
                let mut w = csv_writer();
                w.write_record(["entity_type", "count", "percent"]).map_err(csv_err)?;
                for (t, n) in &stats.type_distribution {
                    let pct = 100.0 * *n as f64 / stats.entity_rich.max(1) as f64;
                    w.write_record([t.to_string(), n.to_string(), format!("{pct:.2}")])
                        .map_err(csv_err)?;
                }
                fs::write(path, finish_csv(w)?)?;
            }
            log::info!(
                "{} of {} examples entity-rich, {:.2} negatives on average",
                stats.entity_rich,
                stats.examples,
                stats.mean_negatives
            );
            Ok(())
        }
        Command::Mix {
            clean,
            adversarial,
            ratio,
            total,
            seed,
            out,
            sweep,
            with_replacement,
            stats,
            mode,
        } => {
            require_file(&clean)?;
            require_file(&adversarial)?;
            let ratios: Vec<MixRatio> = ratio
                .split(',')
                .map(|r| r.parse::<MixRatio>().map_err(|e| Failure::Usage(e.to_string())))
                .collect::<Result<_, _>>()?;
            if ratios.len() > 1 && !sweep {
                return Err(Failure::Usage("several ratios given; add --sweep".into()));
            }
            let cfg = MixConfig {
                ratio: ratios[0],
                total,
                seed: seed.seed,
                sampling: if with_replacement {
                    Sampling::WithReplacementIfShort
                } else {
                    Sampling::WithoutReplacement
                },
            };
            let c = read_dataset(&clean, mode)?;
            let a = read_dataset(&adversarial, mode)?;
            if sweep {
                let dir = out.expect("clap enforces --out with --sweep");
                fs::create_dir_all(&dir)?;
                let mut all = Vec::new();
                for (r, ds, st) in mix_sweep(&c, &a, &ratios, &cfg)? {
                    fs::write(dir.join(format!("mix-{r}.jsonl")), write_augmented(&ds)?)?;
                    all.push(st);
                }
                emit_or_log(stats.as_deref(), "mix statistics", &all)
            } else {
                let (ds, st) = mix(&c, &a, &cfg)?;
                emit(out.as_deref(), &write_augmented(&ds)?)?;
                emit_or_log(stats.as_deref(), "mix statistics", &st)
            }
        }
        Command::LossCheck { seed, instances } => {
            let results = run_loss_checks(seed.seed, instances)?;
            let mut stdout = io::stdout().lock();
            for r in &results {
                writeln!(
                    stdout,
                    "{} {}: {}",
                    if r.passed { "PASS" } else { "FAIL" },
                    r.name,
                    r.detail
                )?;
            }
            let failed = results.iter().filter(|r| !r.passed).count();
            if failed > 0 {
                return Err(Failure::Data(Error::InvalidLossInput(format!(
                    "{failed} loss checks failed"
                ))));
            }
            Ok(())
        }
        Command::ToyTrain {
            alpha,
            epochs,
            lr,
            batch_size,
            seed,
            train,
            eval,
            n_train,
            n_eval,
            curve,
        } => {
            let config = LossConfig::with_alpha(alpha);
            config.validate().map_err(|e| Failure::Usage(e.to_string()))?;
            let (train_ds, eval_ds) = match (train, eval) {
                (Some(t), Some(e)) => {
                    require_file(&t)?;
                    require_file(&e)?;
                    let m = ModeArg { lenient: false };
                    (read_dataset(&t, m)?, read_dataset(&e, m)?)
                }
                _ => toy_datasets(seed.seed, n_train, n_eval)?,
            };
            let hyper = TrainHyper {
                epochs,
                lr,
                batch_size,
                seed: seed.seed,
            };
            let report = toy_train(&train_ds, &eval_ds, &config, &hyper)?;
            if let Some(path) = curve {
                let mut w = csv_writer();
                w.write_record(["epoch", "loss"]).map_err(csv_err)?;
                for (i, l) in report.loss_curve.iter().enumerate() {
                    w.write_record([i.to_string(), l.to_string()]).map_err(csv_err)?;
                }
                fs::write(path, finish_csv(w)?)?;
            }
            emit(None, &json_line(&report))
        }
        Command::Report { from, format, out } => {
            require_file(&from)?;
            let format: Format = format.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
            let rep: TaxonomyReport = serde_json::from_slice(&fs::read(&from)?)
                .map_err(|e| Error::MalformedJson(format!("{}: {e}", from.display())))?;
            emit(out.as_deref(), &emit_report(&rep, format)?)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .target(env_logger::Target::Stderr)
        .init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            eprintln!("run with --help for usage");
            ExitCode::from(1)
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
