use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use harchain::eval::{ConfusionMatrix, EvaluationReport, FoldResult};
use harchain::features::{extract_matrix, FeatureMatrix};
use harchain::model::KnnModel;
use harchain::pipeline::{
    prepare_output_dir, real_windows, render_comparison, render_evaluation, render_run_dir, run_compare, run_pipeline,
    stage, synthetic_windows, write_json, write_sessions, PipelineConfig, RunManifest,
};
use harchain::rng::derive_seed;
use harchain::selection::{hfse_select, SelectionResult};
use harchain::signal::{simulate_cohort, CoarseLabel, CohortSpec};
use harchain::synth::WindowStore;
use harchain::Error;

#[derive(Parser)]
#[command(
    name = "harchain",
    version,
    about = "Activity recognition chain for dual-accelerometer recordings"
)]
struct Cli {
    /// Pipeline configuration (JSON); defaults apply to missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; must be new or empty unless --force is given.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for every parallel stage.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Reuse a non-empty output directory.
    #[arg(long, global = true)]
    force: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Design {
    /// Posture and gait models in the reference class proportions.
    Reference,
    /// Frequency-coded classes; only the mean-crossing rates carry the label.
    Planted,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a cohort and write it as sensor CSVs plus a sessions file.
    Simulate {
        #[arg(long, default_value_t = 24)]
        participants: usize,
        #[arg(long, value_enum, default_value = "reference")]
        design: Design,
        /// Windows per participant for the reference design.
        #[arg(long, default_value_t = 150)]
        windows: usize,
        /// Use a cohort specification file instead of a built-in design.
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Smooth and segment recordings into a store of labelled windows.
    Ingest {
        /// Sessions file; falls back to the configured data source.
        #[arg(long)]
        sessions: Option<PathBuf>,
    },
    /// Generate the count-matched synthetic window store.
    Synth {
        /// Store of real windows.
        #[arg(long)]
        windows: PathBuf,
    },
    /// Extract the 62 window features into features.csv.
    Features {
        #[arg(long)]
        windows: PathBuf,
    },
    /// Run the feature-selection ensemble on a feature matrix.
    Select {
        #[arg(long)]
        features: PathBuf,
    },
    /// Fit a KNN model on the selected features.
    Train {
        #[arg(long)]
        features: PathBuf,
        #[arg(long)]
        selection: PathBuf,
    },
    /// Leave-one-subject-out evaluation, or scoring of a trained model.
    Evaluate {
        #[arg(long)]
        features: PathBuf,
        #[arg(long, required_unless_present = "model")]
        selection: Option<PathBuf>,
        /// Score this trained model per participant instead of running LOSO.
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long, default_value = "FIM")]
        name: String,
    },
    /// Paired comparison of two evaluation reports.
    Compare {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Print the reports of a run directory or a single report file.
    Report {
        #[arg(long)]
        input: PathBuf,
    },
    /// Run the configured workflow end to end.
    Run,
}

/// Exit status classes.
enum Failure {
    Config(Error),
    Data(Error),
    Pipeline(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parameter(_) | Error::Json(_) => Failure::Config(e),
            Error::Parse { .. } | Error::Format(_) | Error::Range(_) | Error::Io { .. } | Error::Csv(_) => {
                Failure::Data(e)
            }
            Error::Generation { .. } | Error::Pipeline(_) | Error::Leakage(_) | Error::Numerical(_) => {
                Failure::Pipeline(e)
            }
        }
    }
}

type Outcome = std::result::Result<(), Failure>;

fn load_config(cli: &Cli) -> std::result::Result<PipelineConfig, Failure> {
    let mut config = match &cli.config {
        Some(p) => PipelineConfig::from_json_file(p).map_err(Failure::Config)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(out) = &cli.out {
        config.out = Some(out.clone());
    }
    Ok(config)
}

fn out_dir(cli: &Cli, config: &PipelineConfig) -> std::result::Result<PathBuf, Failure> {
    let dir = config
        .out
        .clone()
        .ok_or_else(|| Failure::Config(Error::Parameter("an output directory is required (--out)".into())))?;
    prepare_output_dir(&dir, cli.force)?;
    Ok(dir)
}

fn finish(dir: &Path, command: &str, config: &PipelineConfig, outputs: &[&str]) -> Outcome {
    let mut manifest = RunManifest::new(command, config)?;
    manifest.outputs = outputs.iter().map(|s| s.to_string()).collect();
    manifest.write(dir)?;
    Ok(())
}

/// Per-participant scores of an already trained model.
fn score_model(model: &KnnModel, matrix: &FeatureMatrix, name: &str) -> harchain::Result<EvaluationReport> {
    let predicted = model.predict_matrix(matrix)?;
    let folds = matrix
        .participant_ids()
        .into_iter()
        .map(|p| {
            let rows: Vec<usize> = (0..matrix.n_rows()).filter(|&i| matrix.participants[i] == p).collect();
            let truth: Vec<CoarseLabel> = rows.iter().map(|&i| matrix.labels[i].coarse()).collect();
            let pred: Vec<CoarseLabel> = rows.iter().map(|&i| predicted[i]).collect();
            FoldResult::from_confusion(p, ConfusionMatrix::from_pairs(&truth, &pred))
        })
        .collect();
    EvaluationReport::from_folds(name, model.feature_names().to_vec(), folds)
}

fn execute(cli: &Cli) -> Outcome {
    let mut config = load_config(cli)?;
    match &cli.command {
        Command::Simulate {
            participants,
            design,
            windows,
            spec,
        } => {
            let spec = match spec {
                Some(p) => {
                    let text = std::fs::read_to_string(p).map_err(|e| {
                        Failure::Config(Error::Io {
                            path: p.clone(),
                            source: e,
                        })
                    })?;
                    serde_json::from_str(&text).map_err(|e| Failure::Config(e.into()))?
                }
                None => match design {
                    Design::Reference => CohortSpec::reference_cohort(*participants, *windows, config.seed),
                    Design::Planted => {
                        CohortSpec::frequency_coded(*participants, &harchain::signal::simulate::PLANTED_COUNTS)
                    }
                },
            };
            let dir = out_dir(cli, &config)?;
            let sessions = simulate_cohort::<f64>(&spec, derive_seed(config.seed, &[stage::SIMULATE]))?;
            let entries = write_sessions(&dir, &sessions)?;
            write_json(&dir.join("sessions.json"), &entries)?;
            write_json(&dir.join("cohort.json"), &spec)?;
            log::info!("simulated {} participants into {}", sessions.len(), dir.display());
            finish(&dir, "simulate", &config, &["sessions.json", "cohort.json"])
        }
        Command::Ingest { sessions } => {
            if let Some(p) = sessions {
                config.data = Default::default();
                config.data.sessions = Some(p.clone());
            }
            config.validate()?;
            let dir = out_dir(cli, &config)?;
            let windows = real_windows(&config)?;
            WindowStore::new(&dir).write(
                &windows,
                config.seed,
                serde_json::to_value(&config.preprocess).map_err(Error::from)?,
            )?;
            log::info!("{} windows written to {}", windows.len(), dir.display());
            finish(&dir, "ingest", &config, &["manifest.json"])
        }
        Command::Synth { windows } => {
            config.data = Default::default();
            config.validate()?;
            let dir = out_dir(cli, &config)?;
            let real = WindowStore::new(windows).read::<f64>()?.1;
            let synthetic = synthetic_windows(&real, &config)?;
            WindowStore::new(&dir).write(
                &synthetic,
                config.seed,
                serde_json::to_value(&config.synthesis).map_err(Error::from)?,
            )?;
            log::info!("{} synthetic windows written to {}", synthetic.len(), dir.display());
            finish(&dir, "synth", &config, &["manifest.json"])
        }
        Command::Features { windows } => {
            let dir = out_dir(cli, &config)?;
            let w = WindowStore::new(windows).read::<f64>()?.1;
            extract_matrix(&w).write_csv(&dir.join("features.csv"))?;
            finish(&dir, "features", &config, &["features.csv"])
        }
        Command::Select { features } => {
            config.selection.validate()?;
            let dir = out_dir(cli, &config)?;
            let m = FeatureMatrix::read_csv(features)?;
            let result = hfse_select(&m, &config.selection, derive_seed(config.seed, &[stage::FIM_SELECTION]))?;
            result.write_json(&dir.join("selection.json"))?;
            result.write_vote_csv(&dir.join("votes.csv"))?;
            print!("{}", result.vote_table());
            if result.final_features.is_empty() {
                return Err(Failure::Pipeline(Error::Pipeline(format!(
                    "no feature reached {} votes",
                    config.selection.vote_threshold
                ))));
            }
            finish(&dir, "select", &config, &["selection.json", "votes.csv"])
        }
        Command::Train { features, selection } => {
            let dir = out_dir(cli, &config)?;
            let m = FeatureMatrix::read_csv(features)?;
            let sel = SelectionResult::read_json(selection)?;
            KnnModel::train(&m, &sel.final_features, config.model.k)?.save(&dir)?;
            finish(&dir, "train", &config, &["manifest.json", "training_rows.csv"])
        }
        Command::Evaluate {
            features,
            selection,
            model,
            name,
        } => {
            let dir = out_dir(cli, &config)?;
            let m = FeatureMatrix::read_csv(features)?;
            let report = match (model, selection) {
                (Some(model_dir), _) => score_model(&KnnModel::load(model_dir)?, &m, name)?,
                (None, Some(sel)) => {
                    let sel = SelectionResult::read_json(sel)?;
                    harchain::eval::loso_cv(&m, &sel.final_features, &config.model, name)?
                }
                (None, None) => unreachable!("clap requires --selection without --model"),
            };
            report.write_json(&dir.join("evaluation.json"))?;
            report.write_confusion_csv(&dir.join("confusion.csv"))?;
            report.write_table_csv(&dir.join("table.csv"))?;
            print!("{}", render_evaluation(&report));
            finish(
                &dir,
                "evaluate",
                &config,
                &["evaluation.json", "confusion.csv", "table.csv"],
            )
        }
        Command::Compare { a, b } => {
            let dir = out_dir(cli, &config)?;
            let report = run_compare(&EvaluationReport::read_json(a)?, &EvaluationReport::read_json(b)?)?;
            report.write_json(&dir.join("comparison.json"))?;
            print!("{}", render_comparison(&report));
            finish(&dir, "compare", &config, &["comparison.json"])
        }
        Command::Report { input } => {
            let text = if input.is_dir() {
                render_run_dir(input)?
            } else {
                render_evaluation(&EvaluationReport::read_json(input)?)
            };
            print!("{text}");
            if config.out.is_some() {
                let dir = out_dir(cli, &config)?;
                let path = dir.join("report.txt");
                std::fs::write(&path, &text).map_err(|e| Error::Io { path, source: e })?;
            }
            Ok(())
        }
        Command::Run => {
            let dir = config
                .out
                .clone()
                .ok_or_else(|| Failure::Config(Error::Parameter("an output directory is required (--out)".into())))?;
            let outcome = run_pipeline(&config, &dir, cli.force)?;
            for r in [
                outcome.fim.as_ref().map(|f| &f.report),
                outcome.ccm.as_ref().map(|c| &c.report),
            ]
            .into_iter()
            .flatten()
            {
                print!("{}", render_evaluation(r));
            }
            if let Some(c) = &outcome.comparison {
                print!("{}", render_comparison(c));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (code, e) = match f {
                Failure::Config(e) => (2, e),
                Failure::Data(e) => (3, e),
                Failure::Pipeline(e) => (4, e),
            };
            eprintln!("error: {e}");
            ExitCode::from(code)
        }
    }
}
