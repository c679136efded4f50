//! Caption ingestion, labeled dataset generation and evaluation suites.
//!
//! The pipeline is: ingest caption records, build one text per caption
//! (individual mode) or per image (combined mode), split by image, then emit
//! a Human and a Mutation example for every text and eight test suites from
//! the test split. Every random decision is keyed by `(global seed,
//! source_id)`, so output does not depend on worker count or arrival order.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::io::{self, BufRead};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::corpus::{normalize, strip_punctuation, tokenize};
use crate::io::write_atomic;
use crate::lexicon::Lexicon;
use crate::mutation::{apply_operator, randomize, MutationConfig, MutationError, MutationResult, OperatorId, RandomizeMode};
use crate::rng::SeedStream;

pub const BUNDLE_FORMAT_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

/// The bundled sample corpus: 2400 images, 5 captions each.
pub const SAMPLE_CAPTIONS: &str = include_str!("../data/captions.jsonl");

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("read error: {0}")]
    Read(#[from] io::Error),
    #[error("invalid split: {0}")]
    Split(String),
    #[error("bundle checksum mismatch: manifest says {expected}, content hashes to {found}")]
    Checksum { expected: String, found: String },
    #[error("bundle format: {0}")]
    Format(String),
    #[error(transparent)]
    Mutation(#[from] MutationError),
    #[error("worker pool: {0}")]
    Pool(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> DatasetError + '_ {
    move |source| DatasetError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaptionRecord {
    pub image_id: String,
    pub caption: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Human,
    Mutation,
}

mod decimal {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub text: String,
    pub label: Label,
    pub source_id: String,
    pub operator: Option<OperatorId>,
    #[serde(with = "decimal")]
    pub seed: u64,
}

/// One text to label, keyed by a stable id and grouped by image.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SourceText {
    pub source_id: String,
    pub group: String,
    pub text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TextMode {
    #[default]
    Individual,
    Combined,
}

impl std::str::FromStr for TextMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "individual" => Ok(TextMode::Individual),
            "combined" => Ok(TextMode::Combined),
            other => Err(format!("unknown mode {other:?} (expected individual or combined)")),
        }
    }
}

impl std::fmt::Display for TextMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TextMode::Individual => "individual",
            TextMode::Combined => "combined",
        })
    }
}

#[derive(Deserialize)]
struct RawCaption {
    image_id: serde_json::Value,
    caption: String,
}

/// Reads line-delimited `{"image_id": ..., "caption": ...}` records. Blank
/// lines and lines starting with `#` are skipped. Numeric image ids are
/// accepted and kept as their decimal text.
pub fn ingest_captions(reader: impl BufRead) -> Result<Vec<CaptionRecord>, DatasetError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let lineno = i + 1;
        let raw: RawCaption = serde_json::from_str(trimmed).map_err(|e| DatasetError::Parse {
            line: lineno,
            reason: e.to_string(),
        })?;
        let image_id = match raw.image_id {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            _ => {
                return Err(DatasetError::Parse {
                    line: lineno,
                    reason: "image_id must be a string or number".into(),
                })
            }
        };
        if image_id.trim().is_empty() {
            return Err(DatasetError::Parse {
                line: lineno,
                reason: "empty image_id".into(),
            });
        }
        if raw.caption.trim().is_empty() {
            return Err(DatasetError::Parse {
                line: lineno,
                reason: "empty caption".into(),
            });
        }
        out.push(CaptionRecord {
            image_id,
            caption: raw.caption,
        });
    }
    Ok(out)
}

pub fn ingest_file(path: impl AsRef<Path>) -> Result<Vec<CaptionRecord>, DatasetError> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(io_err(path))?;
    ingest_captions(io::BufReader::new(file))
}

pub fn sample_captions() -> Vec<CaptionRecord> {
    ingest_captions(SAMPLE_CAPTIONS.as_bytes()).expect("bundled captions parse")
}

/// SHA-256 of the records in canonical line-delimited form.
pub fn records_checksum(records: &[CaptionRecord]) -> String {
    let mut h = Sha256::new();
    for r in records {
        h.update(serde_json::to_string(r).expect("serializable").as_bytes());
        h.update(b"\n");
    }
    hex::encode(h.finalize())
}

/// Texts in normal form (NFC, single spaces). Individual mode ids are
/// `image_id#k` with `k` the caption's index within its image; combined
/// mode joins an image's captions with single spaces under id `image_id`.
pub fn build_texts(records: &[CaptionRecord], mode: TextMode) -> Vec<SourceText> {
    match mode {
        TextMode::Individual => {
            let mut seen: HashMap<&str, usize> = HashMap::new();
            records
                .iter()
                .map(|r| {
                    let k = seen.entry(r.image_id.as_str()).or_default();
                    let id = format!("{}#{}", r.image_id, k);
                    *k += 1;
                    SourceText {
                        source_id: id,
                        group: r.image_id.clone(),
                        text: normalize(&r.caption),
                    }
                })
                .collect()
        }
        TextMode::Combined => {
            let mut order: Vec<&str> = Vec::new();
            let mut joined: HashMap<&str, Vec<String>> = HashMap::new();
            for r in records {
                let entry = joined.entry(r.image_id.as_str()).or_insert_with(|| {
                    order.push(r.image_id.as_str());
                    Vec::new()
                });
                entry.push(normalize(&r.caption));
            }
            order
                .into_iter()
                .map(|id| SourceText {
                    source_id: id.to_string(),
                    group: id.to_string(),
                    text: joined[id].join(" "),
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Splits {
    pub train: Vec<SourceText>,
    pub valid: Vec<SourceText>,
    pub test: Vec<SourceText>,
}

pub fn validate_ratios(ratios: [f64; 3]) -> Result<(), DatasetError> {
    if ratios.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(DatasetError::Split(format!("ratios must be positive, got {ratios:?}")));
    }
    let sum: f64 = ratios.iter().sum();
    if (sum - 1.0).abs() > 1e-9 {
        return Err(DatasetError::Split(format!("ratios must sum to 1, got {sum}")));
    }
    Ok(())
}

/// Partitions by group (image) with a seeded shuffle of the sorted group
/// ids. Within each split the input order is kept.
pub fn split_dataset(texts: &[SourceText], ratios: [f64; 3], seed: u64) -> Result<Splits, DatasetError> {
    validate_ratios(ratios)?;
    let mut groups: Vec<&str> = texts
        .iter()
        .map(|t| t.group.as_str())
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    if texts.len() < 3 || groups.len() < 3 {
        return Err(DatasetError::Split(format!(
            "need at least 3 texts in 3 groups, got {} texts in {} groups",
            texts.len(),
            groups.len()
        )));
    }
    groups.sort_unstable();
    SeedStream::new(seed).fork("split").shuffle(&mut groups);
    let n = groups.len();
    let mut n_train = ((ratios[0] * n as f64).round() as usize).clamp(1, n - 2);
    let mut n_valid = ((ratios[1] * n as f64).round() as usize).max(1);
    if n_train + n_valid >= n {
        n_valid = n - n_train - 1;
        if n_valid == 0 {
            n_train -= 1;
            n_valid = 1;
        }
    }
    let mut which: HashMap<&str, usize> = HashMap::new();
    for (i, g) in groups.iter().enumerate() {
        let split = if i < n_train {
            0
        } else if i < n_train + n_valid {
            1
        } else {
            2
        };
        which.insert(g, split);
    }
    let mut out = Splits::default();
    for t in texts {
        match which[t.group.as_str()] {
            0 => out.train.push(t.clone()),
            1 => out.valid.push(t.clone()),
            _ => out.test.push(t.clone()),
        }
    }
    Ok(out)
}

fn prepare(text: &str, strip: bool) -> crate::corpus::TextCorpus {
    let c = tokenize(text);
    if strip {
        strip_punctuation(&c)
    } else {
        c
    }
}

fn mutation_example(source: &SourceText, result: &MutationResult, seed: u64) -> LabeledExample {
    let ops = result.operators();
    LabeledExample {
        text: result.text(),
        label: Label::Mutation,
        source_id: source.source_id.clone(),
        operator: Some(if ops.len() == 1 { ops[0] } else { OperatorId::Randomization }),
        seed,
    }
}

/// The run-time random mutation of one text: randomization first, then
/// the remaining single operators in rotation until one applies.
pub fn runtime_mutation(
    source: &SourceText,
    lex: &Lexicon,
    cfg: &MutationConfig,
    seed: u64,
) -> Result<Option<LabeledExample>, MutationError> {
    let corpus = tokenize(&source.text);
    let stream = SeedStream::for_example(seed, &source.source_id);
    let mut rng = stream.clone();
    let first = randomize(&corpus, lex, cfg, &mut rng)?;
    if first.applied {
        return Ok(Some(mutation_example(source, &first, stream.key())));
    }
    let start = match cfg.randomize_mode {
        RandomizeMode::PickOne => stream.clone().below(OperatorId::SINGLE.len()) + 1,
        RandomizeMode::Stacked => 0,
    };
    for k in 0..OperatorId::SINGLE.len() {
        let op = OperatorId::SINGLE[(start + k) % OperatorId::SINGLE.len()];
        let res = apply_operator(op, &corpus, lex, cfg, &mut stream.fork(op.name()))?;
        if res.applied {
            return Ok(Some(mutation_example(source, &res, stream.key())));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Generated {
    pub examples: Vec<LabeledExample>,
    /// Source ids that no operator could mutate.
    pub skipped: Vec<String>,
}

/// A Human and (when possible) a Mutation example per text, in input order.
/// Runs on the current rayon pool; output is independent of its size.
pub fn generate_labeled(
    texts: &[SourceText],
    lex: &Lexicon,
    cfg: &MutationConfig,
    seed: u64,
) -> Result<Generated, MutationError> {
    cfg.validate()?;
    let per_text: Vec<Result<(LabeledExample, Option<LabeledExample>), MutationError>> = texts
        .par_iter()
        .map(|t| {
            let key = SeedStream::for_example(seed, &t.source_id).key();
            let human = LabeledExample {
                text: t.text.clone(),
                label: Label::Human,
                source_id: t.source_id.clone(),
                operator: None,
                seed: key,
            };
            Ok((human, runtime_mutation(t, lex, cfg, seed)?))
        })
        .collect();
    let mut out = Generated::default();
    for (t, r) in texts.iter().zip(per_text) {
        let (human, mutated) = r?;
        out.examples.push(human);
        match mutated {
            Some(m) => out.examples.push(m),
            None => {
                log::warn!("no operator applies to {}; mutation example skipped", t.source_id);
                out.skipped.push(t.source_id.clone());
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Suite {
    pub name: String,
    pub expected: Label,
    pub examples: Vec<LabeledExample>,
    pub skipped: Vec<String>,
}

/// Suite names in report order.
pub const SUITE_ORDER: [&str; 8] = [
    "human",
    "randomized",
    "alpha_epsilon",
    "misspelling",
    "delete_articles",
    "synonym",
    "random_word",
    "antonym",
];

/// Eight suites over the test texts: untouched human text, run-time
/// randomized mutation, and one suite per single operator applied to every
/// text. Texts an operator cannot mutate are skipped and logged.
pub fn build_test_suites(
    test_texts: &[SourceText],
    lex: &Lexicon,
    cfg: &MutationConfig,
    seed: u64,
) -> Result<Vec<Suite>, MutationError> {
    cfg.validate()?;
    let mut suites = Vec::with_capacity(SUITE_ORDER.len());
    suites.push(Suite {
        name: "human".into(),
        expected: Label::Human,
        examples: test_texts
            .iter()
            .map(|t| LabeledExample {
                text: t.text.clone(),
                label: Label::Human,
                source_id: t.source_id.clone(),
                operator: None,
                seed: SeedStream::for_example(seed, &t.source_id).key(),
            })
            .collect(),
        skipped: Vec::new(),
    });
    for name in &SUITE_ORDER[1..] {
        let results: Vec<Result<Option<LabeledExample>, MutationError>> = test_texts
            .par_iter()
            .map(|t| {
                if *name == "randomized" {
                    return runtime_mutation(t, lex, cfg, seed);
                }
                let op: OperatorId = name.parse()?;
                let stream = SeedStream::for_example(seed, &t.source_id);
                let res = apply_operator(op, &tokenize(&t.text), lex, cfg, &mut stream.fork(op.name()))?;
                Ok(res.applied.then(|| mutation_example(t, &res, stream.key())))
            })
            .collect();
        let mut suite = Suite {
            name: name.to_string(),
            expected: Label::Mutation,
            examples: Vec::new(),
            skipped: Vec::new(),
        };
        for (t, r) in test_texts.iter().zip(results) {
            match r? {
                Some(ex) => suite.examples.push(ex),
                None => suite.skipped.push(t.source_id.clone()),
            }
        }
        if !suite.skipped.is_empty() {
            log::info!("suite {}: {} texts skipped", suite.name, suite.skipped.len());
        }
        suites.push(suite);
    }
    Ok(suites)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub seed: u64,
    pub mode: TextMode,
    pub splits: [f64; 3],
    pub strip_punctuation: bool,
    pub mutation: MutationConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            mode: TextMode::Individual,
            splits: [0.8, 0.1, 0.1],
            strip_punctuation: false,
            mutation: MutationConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub texts: usize,
    pub train: usize,
    pub valid: usize,
    pub test: usize,
    pub suites: BTreeMap<String, usize>,
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub seed: u64,
    pub mode: TextMode,
    pub config: PipelineConfig,
    pub lexicon_checksum: String,
    /// SHA-256 of the ingested caption records.
    pub corpus_checksum: String,
    pub counts: Counts,
    pub skipped: Vec<String>,
    /// SHA-256 over every data file of the bundle.
    pub checksum: String,
    /// Resolved run configuration of the producing command, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetBundle {
    pub manifest: Manifest,
    pub train: Vec<LabeledExample>,
    pub valid: Vec<LabeledExample>,
    pub test: Vec<LabeledExample>,
    pub suites: Vec<Suite>,
}

fn to_jsonl<T: Serialize>(items: &[T]) -> String {
    let mut s = String::new();
    for it in items {
        s.push_str(&serde_json::to_string(it).expect("serializable"));
        s.push('\n');
    }
    s
}

impl DatasetBundle {
    /// Relative path and content of every data file, in checksum order.
    pub fn files(&self) -> Vec<(String, String)> {
        let mut files = vec![
            ("train.jsonl".to_string(), to_jsonl(&self.train)),
            ("valid.jsonl".to_string(), to_jsonl(&self.valid)),
            ("test.jsonl".to_string(), to_jsonl(&self.test)),
        ];
        for s in &self.suites {
            files.push((format!("suites/{}.jsonl", s.name), to_jsonl(&s.examples)));
        }
        files
    }

    pub fn content_checksum(&self) -> String {
        let mut h = Sha256::new();
        for (name, content) in self.files() {
            h.update(name.as_bytes());
            h.update(b"\n");
            h.update((content.len() as u64).to_le_bytes());
            h.update(content.as_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn write(&self, dir: impl AsRef<Path>) -> Result<(), DatasetError> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir.join("suites")).map_err(io_err(dir))?;
        for (name, content) in self.files() {
            let path = dir.join(&name);
            write_atomic(&path, content.as_bytes()).map_err(io_err(&path))?;
        }
        let path = dir.join(MANIFEST_FILE);
        let mut manifest = serde_json::to_string_pretty(&self.manifest).expect("serializable");
        manifest.push('\n');
        write_atomic(&path, manifest.as_bytes()).map_err(io_err(&path))
    }

    /// Reads a bundle directory and verifies its checksum.
    pub fn read(dir: impl AsRef<Path>) -> Result<Self, DatasetError> {
        let dir = dir.as_ref();
        let read = |name: &str| -> Result<String, DatasetError> {
            let path = dir.join(name);
            fs::read_to_string(&path).map_err(io_err(&path))
        };
        let manifest: Manifest =
            serde_json::from_str(&read(MANIFEST_FILE)?).map_err(|e| DatasetError::Format(format!("manifest: {e}")))?;
        if manifest.format_version != BUNDLE_FORMAT_VERSION {
            return Err(DatasetError::Format(format!(
                "unsupported bundle version {}",
                manifest.format_version
            )));
        }
        let parse = |name: &str| -> Result<Vec<LabeledExample>, DatasetError> {
            read(name)?
                .lines()
                .enumerate()
                .filter(|(_, l)| !l.is_empty())
                .map(|(i, l)| {
                    serde_json::from_str(l).map_err(|e| DatasetError::Format(format!("{name}:{}: {e}", i + 1)))
                })
                .collect()
        };
        let mut suites = Vec::new();
        for name in manifest.counts.suites.keys() {
            let expected = if name == "human" { Label::Human } else { Label::Mutation };
            suites.push(Suite {
                name: name.clone(),
                expected,
                examples: parse(&format!("suites/{name}.jsonl"))?,
                skipped: Vec::new(),
            });
        }
        // restore report order
        suites.sort_by_key(|s| SUITE_ORDER.iter().position(|n| *n == s.name).unwrap_or(usize::MAX));
        let bundle = DatasetBundle {
            train: parse("train.jsonl")?,
            valid: parse("valid.jsonl")?,
            test: parse("test.jsonl")?,
            suites,
            manifest,
        };
        let found = bundle.content_checksum();
        if found != bundle.manifest.checksum {
            return Err(DatasetError::Checksum {
                expected: bundle.manifest.checksum.clone(),
                found,
            });
        }
        Ok(bundle)
    }

    pub fn suite(&self, name: &str) -> Option<&Suite> {
        self.suites.iter().find(|s| s.name == name)
    }
}

/// ingest → build_texts → split → generate_labeled → build_test_suites.
pub fn build_bundle(records: &[CaptionRecord], lex: &Lexicon, cfg: &PipelineConfig) -> Result<DatasetBundle, DatasetError> {
    cfg.mutation.validate()?;
    validate_ratios(cfg.splits)?;
    let mut texts = build_texts(records, cfg.mode);
    if cfg.strip_punctuation {
        for t in &mut texts {
            t.text = prepare(&t.text, true).render();
        }
        texts.retain(|t| !t.text.is_empty());
    }
    let splits = split_dataset(&texts, cfg.splits, cfg.seed)?;
    let train = generate_labeled(&splits.train, lex, &cfg.mutation, cfg.seed)?;
    let valid = generate_labeled(&splits.valid, lex, &cfg.mutation, cfg.seed)?;
    let test = generate_labeled(&splits.test, lex, &cfg.mutation, cfg.seed)?;
    let suites = build_test_suites(&splits.test, lex, &cfg.mutation, cfg.seed)?;
    let skipped: Vec<String> = train
        .skipped
        .iter()
        .chain(&valid.skipped)
        .chain(&test.skipped)
        .cloned()
        .collect();
    let mut bundle = DatasetBundle {
        manifest: Manifest {
            format_version: BUNDLE_FORMAT_VERSION,
            seed: cfg.seed,
            mode: cfg.mode,
            config: cfg.clone(),
            lexicon_checksum: lex.fingerprint(),
            corpus_checksum: records_checksum(records),
            counts: Counts {
                texts: texts.len(),
                train: train.examples.len(),
                valid: valid.examples.len(),
                test: test.examples.len(),
                suites: suites.iter().map(|s| (s.name.clone(), s.examples.len())).collect(),
                skipped: skipped.len(),
            },
            skipped,
            checksum: String::new(),
            run: None,
        },
        train: train.examples,
        valid: valid.examples,
        test: test.examples,
        suites,
    };
    bundle.manifest.checksum = bundle.content_checksum();
    Ok(bundle)
}

/// Runs `f` on a dedicated pool of `workers` threads (0 = rayon default).
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T, DatasetError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| DatasetError::Pool(e.to_string()))?;
    Ok(pool.install(f))
}
