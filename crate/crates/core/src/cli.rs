//! The `textmut` command line.
//!
//! Exit status is 0 on success, 2 on a usage error and 1 on any other
//! failure, which is reported as one `error:` line on stderr.

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use serde::Serialize;
use thiserror::Error;

use crate::corpus::tokenize;
use crate::dataset::{self, DatasetBundle, DatasetError, PipelineConfig, TextMode};
use crate::detector::{train_from_bundle, BaselineModel, DetectorError, Hyperparams};
use crate::eval::{self, EvalError, ReportFormat};
use crate::io::write_atomic;
use crate::lexicon::{Lexicon, LexiconError, DEFAULT_CAP};
use crate::mutation::{apply_operator, MutationConfig, MutationError, OperatorId, RandomizeMode};
use crate::rng::SeedStream;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Mutation(#[from] MutationError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Detector(#[from] DetectorError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

fn io_at(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Parser)]
#[command(name = "textmut", version, about = "Seeded text mutation, labeled datasets and a baseline mutation detector")]
struct Cli {
    /// Global seed [default: 0]
    #[arg(long, env = "TEXTMUT_SEED", global = true)]
    seed: Option<u64>,
    /// Lexicon directory; the bundled lexicon is used when absent
    #[arg(long, global = true, value_name = "DIR")]
    lexicon_dir: Option<PathBuf>,
    /// Log more (repeatable)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct MutationArgs {
    /// Word selection probability
    #[arg(long, default_value_t = 0.15)]
    rate: f64,
    /// Character selection probability inside a selected word
    #[arg(long, default_value_t = 0.5)]
    char_rate: f64,
    /// Cap on mutated words [default: ceil(rate * words)]
    #[arg(long)]
    max_mutations: Option<usize>,
    /// Allow a mutation to change nothing
    #[arg(long)]
    no_guarantee: bool,
    /// Randomization applies each operator with probability `rate` instead of picking one
    #[arg(long)]
    stacked: bool,
    /// Also replace uppercase A and E with Greek capitals
    #[arg(long)]
    uppercase: bool,
}

impl MutationArgs {
    fn config(&self) -> MutationConfig {
        MutationConfig {
            rate: self.rate,
            char_rate: self.char_rate,
            max_mutations: self.max_mutations,
            guarantee_one: !self.no_guarantee,
            uppercase: self.uppercase,
            randomize_mode: if self.stacked {
                RandomizeMode::Stacked
            } else {
                RandomizeMode::PickOne
            },
            ..MutationConfig::default()
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Mutate each line of a file (or stdin) and print the result
    Mutate {
        /// Operator or perturbation name
        #[arg(long, default_value = "randomization")]
        op: String,
        #[command(flatten)]
        mutation: MutationArgs,
        /// Force these word positions, comma separated
        #[arg(long, value_delimiter = ',')]
        targets: Option<Vec<usize>>,
        /// Print the edit log of each line to stderr as JSON
        #[arg(long)]
        edits: bool,
        /// Input file [default: stdin]
        input: Option<PathBuf>,
    },
    /// Lexicon utilities
    Lexicon {
        #[command(subcommand)]
        command: LexiconCommand,
    },
    /// Build a labeled dataset bundle from caption records
    Dataset {
        /// Line-delimited caption records [default: the bundled sample corpus]
        #[arg(long)]
        input: Option<PathBuf>,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "individual", value_parser = parse_mode)]
        mode: TextMode,
        /// Train, validation and test ratios
        #[arg(long, default_value = "0.8,0.1,0.1", value_parser = parse_splits)]
        splits: [f64; 3],
        /// Remove punctuation before mutating
        #[arg(long)]
        strip_punctuation: bool,
        /// Worker threads (0 = one per core); output is the same for any value
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[command(flatten)]
        mutation: MutationArgs,
    },
    /// Train the baseline detector on a bundle's train split
    Train {
        /// Bundle directory
        #[arg(long)]
        bundle: PathBuf,
        /// Model file
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = Hyperparams::default().epochs)]
        epochs: u32,
        #[arg(long, default_value_t = Hyperparams::default().learning_rate)]
        learning_rate: f64,
        #[arg(long, default_value_t = Hyperparams::default().l2)]
        l2: f64,
        /// Hashed feature dimension
        #[arg(long, default_value_t = Hyperparams::default().dim)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Evaluate a model on a bundle's test suites
    Eval {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        bundle: PathBuf,
        #[arg(long, default_value = "table", value_parser = parse_format)]
        format: ReportFormat,
        /// Report file [default: stdout]
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Re-render a report stored in records format
    Report {
        input: PathBuf,
        #[arg(long, default_value = "table", value_parser = parse_format)]
        format: ReportFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum LexiconCommand {
    /// Validate the lexicon files and print table sizes
    Check,
}

fn parse_mode(s: &str) -> Result<TextMode, String> {
    s.parse()
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse().map_err(|e: EvalError| e.to_string())
}

fn parse_splits(s: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    parts
        .try_into()
        .map_err(|v: Vec<f64>| format!("expected three ratios, got {}", v.len()))
}

/// Every input that determines a command's output, with defaults resolved.
/// Output paths and worker counts are left out: they never change content.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub seed: u64,
    pub lexicon_dir: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pipeline: Option<PipelineConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hyperparams: Option<Hyperparams>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<PathBuf>,
}

impl RunConfig {
    fn validate(&self) -> Result<(), CliError> {
        if let Some(p) = &self.pipeline {
            p.mutation.validate()?;
            dataset::validate_ratios(p.splits)?;
        }
        if let Some(hp) = &self.hyperparams {
            hp.validate()?;
        }
        Ok(())
    }

    fn to_value(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("serializable")
    }
}

fn operator_help() -> String {
    let mut s = String::from("Operators:\n");
    let width = OperatorId::all().iter().map(|o| o.name().len()).max().unwrap_or(0);
    for op in OperatorId::CORE {
        s.push_str(&format!("  {:width$}  {}\n", op.name(), op.definition()));
    }
    s.push_str("\nPerturbations:\n");
    for op in OperatorId::all().into_iter().filter(|o| matches!(o, OperatorId::Perturbation(_))) {
        s.push_str(&format!("  {:width$}  {}\n", op.name(), op.definition()));
    }
    s
}

fn command() -> clap::Command {
    Cli::command().after_help(operator_help())
}

fn load_lexicon(dir: Option<&Path>) -> Result<Lexicon, CliError> {
    Ok(match dir {
        Some(d) => Lexicon::load_dir(d, DEFAULT_CAP)?,
        None => Lexicon::bundled(),
    })
}

fn emit(out: Option<&Path>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => write_atomic(path, text.as_bytes()).map_err(io_at(path)),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(io_at(Path::new("<stdout>"))),
    }
}

fn execute(cli: Cli, stdin: &mut dyn BufRead, stdout: &mut dyn Write) -> Result<(), CliError> {
    let seed = cli.seed.unwrap_or(0);
    let mut run = RunConfig {
        command: String::new(),
        seed,
        lexicon_dir: cli.lexicon_dir.clone(),
        pipeline: None,
        hyperparams: None,
        inputs: Vec::new(),
    };
    let out_err = |e| io_at(Path::new("<stdout>"))(e);
    match cli.command {
        Command::Mutate {
            op,
            mutation,
            targets,
            edits,
            input,
        } => {
            let id: OperatorId = op.parse()?;
            let mut cfg = mutation.config();
            cfg.targets = targets;
            cfg.validate()?;
            let lex = load_lexicon(cli.lexicon_dir.as_deref())?;
            let mut text = String::new();
            match &input {
                Some(p) => text = fs::read_to_string(p).map_err(io_at(p))?,
                None => {
                    stdin.read_to_string(&mut text).map_err(io_at(Path::new("<stdin>")))?;
                }
            }
            for (n, line) in text.lines().enumerate() {
                let mut rng = SeedStream::for_example(seed, &format!("line{n}"));
                let res = apply_operator(id, &tokenize(line), &lex, &cfg, &mut rng)?;
                writeln!(stdout, "{}", res.text()).map_err(out_err)?;
                if edits {
                    eprintln!("{}", serde_json::to_string(&res.edits).expect("serializable"));
                }
            }
        }
        Command::Lexicon {
            command: LexiconCommand::Check,
        } => {
            let lex = load_lexicon(cli.lexicon_dir.as_deref())?;
            writeln!(
                stdout,
                "ok: {} common words, {} synonyms, {} antonyms, {} misspellings, {} keyboard keys, {} homoglyphs, {} tandem characters",
                lex.common_words().len(),
                lex.synonyms().len(),
                lex.antonyms().len(),
                lex.misspellings().len(),
                lex.keyboard_adjacency().len(),
                lex.homoglyphs().len(),
                lex.tandem().len()
            )
            .map_err(out_err)?;
        }
        Command::Dataset {
            input,
            out,
            mode,
            splits,
            strip_punctuation,
            workers,
            mutation,
        } => {
            run.command = "dataset".into();
            run.pipeline = Some(PipelineConfig {
                seed,
                mode,
                splits,
                strip_punctuation,
                mutation: mutation.config(),
            });
            run.inputs = input.iter().cloned().collect();
            run.validate()?;
            let lex = load_lexicon(cli.lexicon_dir.as_deref())?;
            let records = match &input {
                Some(p) => dataset::ingest_file(p)?,
                None => dataset::sample_captions(),
            };
            let cfg = run.pipeline.clone().expect("set above");
            let mut bundle = dataset::with_workers(workers, || dataset::build_bundle(&records, &lex, &cfg))??;
            bundle.manifest.run = Some(run.to_value());
            bundle.write(&out)?;
            writeln!(
                stdout,
                "wrote {}: {} train, {} valid, {} test examples, {} suites, checksum {}",
                out.display(),
                bundle.train.len(),
                bundle.valid.len(),
                bundle.test.len(),
                bundle.suites.len(),
                bundle.manifest.checksum
            )
            .map_err(out_err)?;
        }
        Command::Train {
            bundle,
            out,
            epochs,
            learning_rate,
            l2,
            dim,
            workers,
        } => {
            run.command = "train".into();
            let hp = Hyperparams {
                dim,
                learning_rate,
                epochs,
                l2,
            };
            run.hyperparams = Some(hp);
            run.inputs = vec![bundle.clone()];
            run.validate()?;
            let data = DatasetBundle::read(&bundle)?;
            let mut model = dataset::with_workers(workers, || train_from_bundle(&data, &hp, seed))??;
            model.manifest.run = Some(run.to_value());
            model.save(&out)?;
            writeln!(
                stdout,
                "wrote {}: train accuracy {:.4} over {} examples",
                out.display(),
                model.manifest.train_accuracy,
                model.manifest.train_examples
            )
            .map_err(out_err)?;
        }
        Command::Eval {
            model,
            bundle,
            format,
            out,
            workers,
        } => {
            let m = BaselineModel::load(&model)?;
            let data = DatasetBundle::read(&bundle)?;
            let report = dataset::with_workers(workers, || eval::evaluate_bundle(&m, &data))?;
            emit(out.as_deref(), &eval::render_report(&report, format), stdout)?;
        }
        Command::Report { input, format, out } => {
            let text = fs::read_to_string(&input).map_err(io_at(&input))?;
            let report = eval::parse_records(&text)?;
            emit(out.as_deref(), &eval::render_report(&report, format), stdout)?;
        }
    }
    Ok(())
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .parse_env("TEXTMUT_LOG")
        .try_init();
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn run_with<I, T>(args: I, stdin: &mut dyn BufRead, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match command().try_get_matches_from(args).and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    init_logging(cli.verbose);
    match execute(cli, stdin, stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn run() -> i32 {
    let stdin = io::stdin();
    run_with(std::env::args_os(), &mut stdin.lock(), &mut io::stdout().lock())
}
