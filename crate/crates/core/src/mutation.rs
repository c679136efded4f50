//! Mutation operators.
//!
//! Every operator is a pure function of `(corpus, lexicon, config, stream)`
//! that returns the mutated corpus together with an audit trail of word
//! edits. Operators that find nothing to mutate return the input unchanged
//! with `applied == false`; that is not an error.
//!
//! Edit positions refer to the corpus the edit was applied to. Single
//! operators have one step (0). Stacked randomization applies several
//! operators in sequence and numbers the steps, so a later step's positions
//! refer to the output of the previous one.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::corpus::{tokenize_fragment, TextCorpus, Token, WordToken};
use crate::lexicon::{Lexicon, LexiconError, Relation};
use crate::perturbation::{self, PerturbationId};
use crate::rng::SeedStream;

pub const ALPHA: char = '\u{03B1}';
pub const EPSILON: char = '\u{03B5}';
pub const CAPITAL_ALPHA: char = '\u{0391}';
pub const CAPITAL_EPSILON: char = '\u{0395}';

#[derive(Debug, Error)]
pub enum MutationError {
    #[error("invalid mutation config: {0}")]
    Config(String),
    #[error("unknown operator {0:?}")]
    UnknownOperator(String),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OperatorId {
    Randomization,
    Misspelling,
    DeleteArticles,
    RandomWord,
    Synonym,
    Antonym,
    AlphaEpsilon,
    Perturbation(PerturbationId),
}

impl OperatorId {
    /// The seven experimental operators, in table order.
    pub const CORE: [OperatorId; 7] = [
        OperatorId::Randomization,
        OperatorId::Misspelling,
        OperatorId::DeleteArticles,
        OperatorId::RandomWord,
        OperatorId::Synonym,
        OperatorId::Antonym,
        OperatorId::AlphaEpsilon,
    ];

    /// The six operators randomization draws from.
    pub const SINGLE: [OperatorId; 6] = [
        OperatorId::Misspelling,
        OperatorId::DeleteArticles,
        OperatorId::RandomWord,
        OperatorId::Synonym,
        OperatorId::Antonym,
        OperatorId::AlphaEpsilon,
    ];

    /// All 17 registered ids: core operators then perturbations.
    pub fn all() -> Vec<OperatorId> {
        Self::CORE
            .iter()
            .copied()
            .chain(PerturbationId::ALL.iter().map(|&p| OperatorId::Perturbation(p)))
            .collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            OperatorId::Randomization => "randomization",
            OperatorId::Misspelling => "misspelling",
            OperatorId::DeleteArticles => "delete_articles",
            OperatorId::RandomWord => "random_word",
            OperatorId::Synonym => "synonym",
            OperatorId::Antonym => "antonym",
            OperatorId::AlphaEpsilon => "alpha_epsilon",
            OperatorId::Perturbation(p) => p.name(),
        }
    }

    pub fn definition(self) -> &'static str {
        match self {
            OperatorId::Randomization => "Use all below mutation operators",
            OperatorId::Misspelling => "Misspell a few words",
            OperatorId::DeleteArticles => "Delete a few articles, including starting ones",
            OperatorId::RandomWord => "Replace a random word with another random word",
            OperatorId::Synonym => "Replace a word with its synonym",
            OperatorId::Antonym => "Replace a word with its antonym",
            OperatorId::AlphaEpsilon => "Replace some a's and e's with epsilon & alpha",
            OperatorId::Perturbation(p) => p.definition(),
        }
    }

    /// Operators that pick whole words and so honour `max_mutations`.
    /// Alpha/epsilon works per character and is exempt.
    pub fn is_word_level(self) -> bool {
        !matches!(self, OperatorId::AlphaEpsilon | OperatorId::Randomization)
    }
}

impl fmt::Display for OperatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatorId {
    type Err = MutationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::all()
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| MutationError::UnknownOperator(s.to_string()))
    }
}

impl Serialize for OperatorId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for OperatorId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomizeMode {
    /// One of the six operators, drawn uniformly.
    #[default]
    PickOne,
    /// Each of the six in table order, each with probability `rate`.
    Stacked,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MutationConfig {
    /// Probability that an eligible word is mutated.
    pub rate: f64,
    /// Probability that an eligible character (or gap) inside a selected word is mutated.
    pub char_rate: f64,
    /// Cap on mutated words; `None` means `ceil(rate * words)`, at least 1.
    pub max_mutations: Option<usize>,
    /// Mutate at least one target when any target is eligible.
    pub guarantee_one: bool,
    /// Let alpha/epsilon also replace 'A' and 'E' (with capital alpha/epsilon).
    pub uppercase: bool,
    pub randomize_mode: RandomizeMode,
    /// Separator inserted by the combined-unicode perturbation.
    pub separator: char,
    /// Forced word positions. Overrides `rate`, the cap and the guarantee;
    /// positions that are not eligible for the operator are ignored.
    pub targets: Option<Vec<usize>>,
}

impl Default for MutationConfig {
    fn default() -> Self {
        Self {
            rate: 0.15,
            char_rate: 0.5,
            max_mutations: None,
            guarantee_one: true,
            uppercase: false,
            randomize_mode: RandomizeMode::PickOne,
            separator: '.',
            targets: None,
        }
    }
}

impl MutationConfig {
    pub fn validate(&self) -> Result<(), MutationError> {
        if !(self.rate > 0.0 && self.rate <= 1.0) {
            return Err(MutationError::Config(format!("rate must be in (0, 1], got {}", self.rate)));
        }
        if !(self.char_rate > 0.0 && self.char_rate <= 1.0) {
            return Err(MutationError::Config(format!(
                "char_rate must be in (0, 1], got {}",
                self.char_rate
            )));
        }
        if self.max_mutations == Some(0) {
            return Err(MutationError::Config("max_mutations must be at least 1".into()));
        }
        if self.separator.is_whitespace() {
            return Err(MutationError::Config("separator must not be whitespace".into()));
        }
        Ok(())
    }

    /// Effective cap for a corpus with `word_count` words.
    pub fn max_for(&self, word_count: usize) -> usize {
        self.max_mutations
            .unwrap_or_else(|| (self.rate * word_count as f64).ceil() as usize)
            .max(1)
    }

    pub fn with_rate(mut self, rate: f64) -> Self {
        self.rate = rate;
        self
    }

    pub fn with_char_rate(mut self, char_rate: f64) -> Self {
        self.char_rate = char_rate;
        self
    }

    pub fn with_targets(mut self, targets: impl IntoIterator<Item = usize>) -> Self {
        self.targets = Some(targets.into_iter().collect());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edit {
    pub step: usize,
    pub operator: OperatorId,
    /// Word position in the corpus this step was applied to.
    pub position: usize,
    pub original: String,
    /// `None` when the word was deleted.
    pub replacement: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutationResult {
    pub corpus: TextCorpus,
    pub applied: bool,
    pub edits: Vec<Edit>,
}

impl MutationResult {
    pub fn unchanged(corpus: &TextCorpus) -> Self {
        Self {
            corpus: corpus.clone(),
            applied: false,
            edits: Vec::new(),
        }
    }

    pub fn text(&self) -> String {
        self.corpus.render()
    }

    /// Distinct operators that produced edits, in order of first use.
    pub fn operators(&self) -> Vec<OperatorId> {
        let mut out = Vec::new();
        for e in &self.edits {
            if !out.contains(&e.operator) {
                out.push(e.operator);
            }
        }
        out
    }
}

/// What an operator does to one selected word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Change {
    Replace(String),
    Delete,
}

/// Rebuilds a corpus with word edits applied. Replacements are re-tokenized,
/// so one word may become several tokens.
pub(crate) fn rewrite(corpus: &TextCorpus, changes: &BTreeMap<usize, Change>) -> TextCorpus {
    let mut tokens: Vec<Token> = Vec::with_capacity(corpus.len());
    for (pos, tok) in corpus.tokens().into_iter().enumerate() {
        match changes.get(&pos) {
            Some(Change::Delete) if tok.is_word() => {}
            Some(Change::Replace(rep)) if tok.is_word() => {
                tokens.extend(tokenize_fragment(rep, tok.spaced));
            }
            _ => tokens.push(tok),
        }
    }
    TextCorpus::from_tokens(tokens, corpus.is_normalized())
}

/// Picks word positions out of `eligible` (ascending) per the config.
pub(crate) fn select_positions(
    eligible: &[usize],
    word_count: usize,
    cfg: &MutationConfig,
    rng: &mut SeedStream,
    force_one: bool,
) -> Vec<usize> {
    if let Some(targets) = &cfg.targets {
        return eligible
            .iter()
            .copied()
            .filter(|p| targets.contains(p))
            .collect();
    }
    let mut picked: Vec<usize> = eligible
        .iter()
        .copied()
        .filter(|_| rng.chance(cfg.rate))
        .collect();
    let cap = cfg.max_for(word_count);
    if picked.len() > cap {
        picked = rng
            .sample_indices(picked.len(), cap)
            .into_iter()
            .map(|i| picked[i])
            .collect();
    }
    if picked.is_empty() && (cfg.guarantee_one || force_one) && !eligible.is_empty() {
        picked.push(eligible[rng.below(eligible.len())]);
    }
    picked
}

/// Shared driver for word-level operators: select eligible words, apply
/// `change` to each, record edits. A change that leaves the word as it was
/// is dropped.
pub(crate) fn mutate_words<E, F>(
    corpus: &TextCorpus,
    cfg: &MutationConfig,
    rng: &mut SeedStream,
    operator: OperatorId,
    force_one: bool,
    eligible: E,
    mut change: F,
) -> Result<MutationResult, MutationError>
where
    E: Fn(&WordToken) -> bool,
    F: FnMut(&WordToken, &mut SeedStream) -> Result<Option<Change>, MutationError>,
{
    let positions: Vec<usize> = corpus
        .words()
        .iter()
        .filter(|w| eligible(w))
        .map(|w| w.position)
        .collect();
    let selected = select_positions(&positions, corpus.word_count(), cfg, rng, force_one);
    let mut changes = BTreeMap::new();
    let mut edits = Vec::new();
    for pos in selected {
        let word = corpus.word_at(pos).expect("selected position is a word");
        let Some(ch) = change(word, rng)? else { continue };
        if ch == Change::Replace(word.text.clone()) {
            continue;
        }
        edits.push(Edit {
            step: 0,
            operator,
            position: pos,
            original: word.text.clone(),
            replacement: match &ch {
                Change::Replace(s) => Some(s.clone()),
                Change::Delete => None,
            },
        });
        changes.insert(pos, ch);
    }
    Ok(finish(corpus, changes, edits))
}

pub(crate) fn finish(corpus: &TextCorpus, changes: BTreeMap<usize, Change>, edits: Vec<Edit>) -> MutationResult {
    if edits.is_empty() {
        return MutationResult::unchanged(corpus);
    }
    MutationResult {
        corpus: rewrite(corpus, &changes),
        applied: true,
        edits,
    }
}

/// Carries the capitalization pattern of `original` over to `replacement`:
/// all-caps stays all-caps, an initial capital stays an initial capital.
pub fn match_case(original: &str, replacement: &str) -> String {
    let letters: Vec<char> = original.chars().filter(|c| c.is_alphabetic()).collect();
    let all_upper = letters.len() > 1 && letters.iter().all(|c| c.is_uppercase());
    if all_upper {
        return replacement.to_uppercase();
    }
    if original.chars().next().is_some_and(char::is_uppercase) {
        let mut chars = replacement.chars();
        if let Some(first) = chars.next() {
            return first.to_uppercase().chain(chars).collect();
        }
    }
    replacement.to_string()
}

/// Replaces every occurrence of `rho` in the word with `sigma`. The flag
/// reports whether anything changed.
pub fn apply_char_mutation(word: &WordToken, rho: char, sigma: char) -> (WordToken, bool) {
    let applied = rho != sigma && word.text.contains(rho);
    let text = if applied {
        word.text.chars().map(|c| if c == rho { sigma } else { c }).collect()
    } else {
        word.text.clone()
    };
    (
        WordToken {
            text,
            position: word.position,
            preceded_by_space: word.preceded_by_space,
        },
        applied,
    )
}

fn homoglyph_for(c: char, uppercase: bool) -> Option<char> {
    match c {
        'a' => Some(ALPHA),
        'e' => Some(EPSILON),
        'A' if uppercase => Some(CAPITAL_ALPHA),
        'E' if uppercase => Some(CAPITAL_EPSILON),
        _ => None,
    }
}

pub fn replace_alpha_epsilon(
    corpus: &TextCorpus,
    cfg: &MutationConfig,
    rng: &mut SeedStream,
) -> Result<MutationResult, MutationError> {
    cfg.validate()?;
    let mut words: Vec<(usize, Vec<char>)> = Vec::new();
    let mut occurrences: Vec<(usize, usize)> = Vec::new();
    let mut replaced: Vec<Vec<bool>> = Vec::new();
    for w in corpus.words() {
        if cfg.targets.as_ref().is_some_and(|t| !t.contains(&w.position)) {
            continue;
        }
        let chars: Vec<char> = w.text.chars().collect();
        let wi = words.len();
        let mut flags = vec![false; chars.len()];
        for (ci, &c) in chars.iter().enumerate() {
            if homoglyph_for(c, cfg.uppercase).is_some() {
                occurrences.push((wi, ci));
                flags[ci] = rng.chance(cfg.char_rate);
            }
        }
        words.push((w.position, chars));
        replaced.push(flags);
    }
    let any = replaced.iter().flatten().any(|&f| f);
    if !any && cfg.guarantee_one && !occurrences.is_empty() {
        let (wi, ci) = occurrences[rng.below(occurrences.len())];
        replaced[wi][ci] = true;
    }
    let mut changes = BTreeMap::new();
    let mut edits = Vec::new();
    for ((pos, chars), flags) in words.iter().zip(&replaced) {
        if !flags.iter().any(|&f| f) {
            continue;
        }
        let text: String = chars
            .iter()
            .zip(flags)
            .map(|(&c, &f)| if f { homoglyph_for(c, cfg.uppercase).unwrap_or(c) } else { c })
            .collect();
        let original: String = chars.iter().collect();
        edits.push(Edit {
            step: 0,
            operator: OperatorId::AlphaEpsilon,
            position: *pos,
            original,
            replacement: Some(text.clone()),
        });
        changes.insert(*pos, Change::Replace(text));
    }
    Ok(finish(corpus, changes, edits))
}

/// Adjacent pairs `(i, i + 1)` that may be swapped: the first character
/// stays put when the word has at least three characters, and swapping two
/// equal characters is not a change.
pub(crate) fn transposable_pairs(chars: &[char]) -> Vec<usize> {
    let start = if chars.len() >= 3 { 1 } else { 0 };
    (start..chars.len().saturating_sub(1))
        .filter(|&i| chars[i] != chars[i + 1])
        .collect()
}

pub(crate) fn transpose(word: &str, rng: &mut SeedStream) -> Option<String> {
    let mut chars: Vec<char> = word.chars().collect();
    let pairs = transposable_pairs(&chars);
    let &i = rng.choose(&pairs)?;
    chars.swap(i, i + 1);
    Some(chars.into_iter().collect())
}

pub fn misspell_words(
    corpus: &TextCorpus,
    lex: &Lexicon,
    cfg: &MutationConfig,
    rng: &mut SeedStream,
) -> Result<MutationResult, MutationError> {
    cfg.validate()?;
    let has_entry = |w: &WordToken| !lex.candidates(Relation::Misspelling, &w.text).is_empty();
    let any_eligible = corpus.words().iter().any(has_entry);
    if any_eligible || !cfg.guarantee_one {
        return mutate_words(corpus, cfg, rng, OperatorId::Misspelling, false, has_entry, |w, rng| {
            let cands = lex.candidates(Relation::Misspelling, &w.text);
            Ok(rng.choose(cands).map(|c| Change::Replace(match_case(&w.text, c))))
        });
    }
    // No dictionary misspelling anywhere: swap two adjacent characters of one word.
    let transposable = |w: &WordToken| {
        let chars: Vec<char> = w.text.chars().collect();
        !transposable_pairs(&chars).is_empty()
    };
    let fallback = MutationConfig {
        max_mutations: Some(1),
        ..cfg.clone()
    };
    mutate_words(corpus, &fallback, rng, OperatorId::Misspelling, true, transposable, |w, rng| {
        Ok(transpose(&w.text, rng).map(Change::Replace))
    })
}

pub fn delete_articles(
    corpus: &TextCorpus,
    lex: &Lexicon,
    cfg: &MutationConfig,
    rng: &mut SeedStream,
) -> Result<MutationResult, MutationError> {
    cfg.validate()?;
    mutate_words(
        corpus,
        cfg,
        rng,
        OperatorId::DeleteArticles,
        false,
        |w| lex.is_article(&w.text),
        |_, _| Ok(Some(Change::Delete)),
    )
}

pub fn replace_random_word(
    corpus: &TextCorpus,
    lex: &Lexicon,
    cfg: &MutationConfig,
    rng: &mut SeedStream,
) -> Result<MutationResult, MutationError> {
    cfg.validate()?;
    if lex.common_words().is_empty() {
        return Err(LexiconError::Config("random_word needs a nonempty common word list".into()).into());
    }
    mutate_words(corpus, cfg, rng, OperatorId::RandomWord, true, |_| true, |w, rng| {
        let word = lex.sample_common_word(rng, &w.text)?;
        Ok(Some(Change::Replace(match_case(&w.text, word))))
    })
}

fn replace_related(
    corpus: &TextCorpus,
    lex: &Lexicon,
    cfg: &MutationConfig,
    rng: &mut SeedStream,
    relation: Relation,
    operator: OperatorId,
) -> Result<MutationResult, MutationError> {
    cfg.validate()?;
    mutate_words(
        corpus,
        cfg,
        rng,
        operator,
        false,
        |w| !lex.candidates(relation, &w.text).is_empty(),
        |w, rng| {
            let cands = lex.candidates(relation, &w.text);
            Ok(rng.choose(cands).map(|c| Change::Replace(match_case(&w.text, c))))
        },
    )
}

pub fn replace_synonym(
    corpus: &TextCorpus,
    lex: &Lexicon,
    cfg: &MutationConfig,
    rng: &mut SeedStream,
) -> Result<MutationResult, MutationError> {
    replace_related(corpus, lex, cfg, rng, Relation::Synonym, OperatorId::Synonym)
}

pub fn replace_antonym(
    corpus: &TextCorpus,
    lex: &Lexicon,
    cfg: &MutationConfig,
    rng: &mut SeedStream,
) -> Result<MutationResult, MutationError> {
    replace_related(corpus, lex, cfg, rng, Relation::Antonym, OperatorId::Antonym)
}

/// Randomization. Pick-one draws one of [`OperatorId::SINGLE`] and runs it on
/// `rng.fork(name)`; stacked runs each of them with probability `rate`.
pub fn randomize(
    corpus: &TextCorpus,
    lex: &Lexicon,
    cfg: &MutationConfig,
    rng: &mut SeedStream,
) -> Result<MutationResult, MutationError> {
    cfg.validate()?;
    match cfg.randomize_mode {
        RandomizeMode::PickOne => {
            let op = OperatorId::SINGLE[rng.below(OperatorId::SINGLE.len())];
            let mut sub = rng.fork(op.name());
            apply_operator(op, corpus, lex, cfg, &mut sub)
        }
        RandomizeMode::Stacked => {
            let mut chosen: Vec<OperatorId> = OperatorId::SINGLE
                .iter()
                .copied()
                .filter(|_| rng.chance(cfg.rate))
                .collect();
            if chosen.is_empty() && cfg.guarantee_one {
                chosen.push(OperatorId::SINGLE[rng.below(OperatorId::SINGLE.len())]);
            }
            stack(corpus, lex, cfg, rng, &chosen)
        }
    }
}

/// Applies `ops` in order, each on its own fork of `rng`, numbering steps.
pub fn stack(
    corpus: &TextCorpus,
    lex: &Lexicon,
    cfg: &MutationConfig,
    rng: &SeedStream,
    ops: &[OperatorId],
) -> Result<MutationResult, MutationError> {
    let mut current = corpus.clone();
    let mut edits = Vec::new();
    let mut step = 0;
    for &op in ops {
        let mut sub = rng.fork(op.name());
        let res = apply_operator(op, &current, lex, cfg, &mut sub)?;
        if res.applied {
            edits.extend(res.edits.into_iter().map(|e| Edit { step, ..e }));
            current = res.corpus;
            step += 1;
        }
    }
    Ok(MutationResult {
        applied: !edits.is_empty(),
        corpus: current,
        edits,
    })
}

/// Registry dispatch for every operator id, perturbations included.
pub fn apply_operator(
    id: OperatorId,
    corpus: &TextCorpus,
    lex: &Lexicon,
    cfg: &MutationConfig,
    rng: &mut SeedStream,
) -> Result<MutationResult, MutationError> {
    match id {
        OperatorId::Randomization => randomize(corpus, lex, cfg, rng),
        OperatorId::Misspelling => misspell_words(corpus, lex, cfg, rng),
        OperatorId::DeleteArticles => delete_articles(corpus, lex, cfg, rng),
        OperatorId::RandomWord => replace_random_word(corpus, lex, cfg, rng),
        OperatorId::Synonym => replace_synonym(corpus, lex, cfg, rng),
        OperatorId::Antonym => replace_antonym(corpus, lex, cfg, rng),
        OperatorId::AlphaEpsilon => replace_alpha_epsilon(corpus, cfg, rng),
        OperatorId::Perturbation(p) => perturbation::apply_perturbation(p, corpus, lex, cfg, rng),
    }
}

/// [`apply_operator`] by serialized name.
pub fn apply_named(
    name: &str,
    corpus: &TextCorpus,
    lex: &Lexicon,
    cfg: &MutationConfig,
    rng: &mut SeedStream,
) -> Result<MutationResult, MutationError> {
    apply_operator(name.parse()?, corpus, lex, cfg, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::tokenize;

    const TABLE2: &str = "Please share and like the video";

    fn run(
        op: OperatorId,
        text: &str,
        lex: &Lexicon,
        cfg: &MutationConfig,
        seed: u64,
    ) -> MutationResult {
        apply_operator(op, &tokenize(text), lex, cfg, &mut SeedStream::new(seed)).unwrap()
    }

    #[test]
    fn char_mutation_primitive() {
        let c = tokenize("Text generation is interesting!");
        let (w, applied) = apply_char_mutation(&c.words()[1], 'a', ALPHA);
        assert!(applied);
        assert_eq!(w.text, "generαtion");
        assert_eq!(w.position, 1);

        let and = tokenize("and");
        assert_eq!(apply_char_mutation(&and.words()[0], 'a', ALPHA).0.text, "αnd");

        let xyz = tokenize("xyz");
        let (w, applied) = apply_char_mutation(&xyz.words()[0], 'a', ALPHA);
        assert!(!applied);
        assert_eq!(w.text, "xyz");
    }

    #[test]
    fn alpha_epsilon_full_substitution() {
        let cfg = MutationConfig::default().with_char_rate(1.0);
        let r = run(OperatorId::AlphaEpsilon, "Please like and share the video", &Lexicon::fixture(), &cfg, 0);
        assert_eq!(r.text(), "Plεαsε likε αnd shαrε thε vidεo");
        assert!(r.applied);
    }

    #[test]
    fn alpha_epsilon_without_targets() {
        let r = run(OperatorId::AlphaEpsilon, "xyz boo", &Lexicon::fixture(), &MutationConfig::default(), 0);
        assert!(!r.applied);
        assert_eq!(r.text(), "xyz boo");
    }

    #[test]
    fn alpha_epsilon_leaves_capitals_by_default() {
        let cfg = MutationConfig::default().with_char_rate(1.0);
        let r = run(OperatorId::AlphaEpsilon, "AE ae", &Lexicon::fixture(), &cfg, 0);
        assert_eq!(r.text(), "AE αε");
        let cfg = MutationConfig {
            uppercase: true,
            ..cfg
        };
        let r = run(OperatorId::AlphaEpsilon, "AE ae", &Lexicon::fixture(), &cfg, 0);
        assert_eq!(r.text(), "\u{391}\u{395} αε");
    }

    #[test]
    fn alpha_epsilon_guarantees_one() {
        let cfg = MutationConfig::default().with_char_rate(1e-9);
        for seed in 0..20 {
            let r = run(OperatorId::AlphaEpsilon, "a cat sat", &Lexicon::fixture(), &cfg, seed);
            assert_eq!(r.edits.len(), 1);
            assert_eq!(r.text().chars().filter(|&c| c == ALPHA).count(), 1);
        }
    }

    #[test]
    fn table2_misspelling() {
        let cfg = MutationConfig::default().with_rate(1.0);
        let r = run(OperatorId::Misspelling, TABLE2, &Lexicon::fixture(), &cfg, 0);
        assert_eq!(r.text(), "Plz sharr and like the vid");
        assert_eq!(r.edits.len(), 3);
    }

    #[test]
    fn misspelling_transposition_fallback() {
        let lex = Lexicon::from_tables(
            crate::lexicon::LexiconTables {
                misspellings: "",
                ..crate::lexicon::LexiconTables::fixture()
            },
            10,
        )
        .unwrap();
        let r = run(OperatorId::Misspelling, "hi", &lex, &MutationConfig::default(), 0);
        assert_eq!(r.text(), "ih");
        assert!(r.applied);
    }

    #[test]
    fn misspelling_nothing_selected() {
        let cfg = MutationConfig {
            rate: 1e-12,
            guarantee_one: false,
            ..Default::default()
        };
        let r = run(OperatorId::Misspelling, TABLE2, &Lexicon::fixture(), &cfg, 0);
        assert!(!r.applied);
        assert_eq!(r.text(), TABLE2);
    }

    #[test]
    fn table2_delete_articles() {
        let cfg = MutationConfig::default().with_rate(1.0);
        let lex = Lexicon::fixture();
        assert_eq!(run(OperatorId::DeleteArticles, TABLE2, &lex, &cfg, 0).text(), "Please share and like video");
        let r = run(OperatorId::DeleteArticles, "The a an the", &lex, &cfg, 0);
        assert_eq!(r.text(), "");
        assert_eq!(r.corpus.word_count(), 0);
        let r = run(OperatorId::DeleteArticles, "Dogs like cats", &lex, &cfg, 0);
        assert!(!r.applied);
    }

    #[test]
    fn delete_articles_keeps_punctuation() {
        let cfg = MutationConfig::default().with_rate(1.0);
        let r = run(OperatorId::DeleteArticles, "A dog, the cat!", &Lexicon::fixture(), &cfg, 0);
        assert_eq!(r.text(), "dog, cat!");
    }

    #[test]
    fn table2_random_word_shape() {
        let lex = Lexicon::fixture();
        let cfg = MutationConfig::default().with_targets([1, 3]);
        let mut exact = false;
        for seed in 0..32 {
            let r = run(OperatorId::RandomWord, TABLE2, &lex, &cfg, seed);
            let words: Vec<String> = r.corpus.words().iter().map(|w| w.text.clone()).collect();
            assert!(["roar", "tree"].contains(&words[1].as_str()));
            assert!(["roar", "tree"].contains(&words[3].as_str()));
            exact |= r.text() == "Please roar and tree the video";
        }
        assert!(exact);
    }

    #[test]
    fn random_word_cap_and_replay() {
        let lex = Lexicon::bundled();
        let cfg = MutationConfig {
            max_mutations: Some(1),
            rate: 1.0,
            ..Default::default()
        };
        let a = run(OperatorId::RandomWord, TABLE2, &lex, &cfg, 9);
        assert_eq!(a.edits.len(), 1);
        assert_eq!(a, run(OperatorId::RandomWord, TABLE2, &lex, &cfg, 9));
    }

    #[test]
    fn random_word_needs_common_words() {
        let lex = Lexicon::from_tables(
            crate::lexicon::LexiconTables {
                common_words: "",
                ..crate::lexicon::LexiconTables::fixture()
            },
            10,
        )
        .unwrap();
        let err = replace_random_word(&tokenize("a b"), &lex, &MutationConfig::default(), &mut SeedStream::new(0));
        assert!(matches!(err, Err(MutationError::Lexicon(LexiconError::Config(_)))));
    }

    #[test]
    fn table2_synonym_and_antonym() {
        let cfg = MutationConfig::default().with_rate(1.0);
        let lex = Lexicon::fixture();
        assert_eq!(
            run(OperatorId::Synonym, TABLE2, &lex, &cfg, 0).text(),
            "Please disseminate and prefer the video"
        );
        assert_eq!(
            run(OperatorId::Antonym, TABLE2, &lex, &cfg, 0).text(),
            "Please hide and hate the video"
        );
    }

    #[test]
    fn synonym_preserves_capitalization() {
        let cfg = MutationConfig::default().with_rate(1.0);
        let lex = Lexicon::fixture();
        assert_eq!(run(OperatorId::Synonym, "Share it", &lex, &cfg, 0).text(), "Disseminate it");
        assert_eq!(run(OperatorId::Synonym, "SHARE it", &lex, &cfg, 0).text(), "DISSEMINATE it");
        assert!(!run(OperatorId::Synonym, "the a an", &lex, &cfg, 0).applied);
        assert!(!run(OperatorId::Antonym, "dogs bark", &lex, &cfg, 0).applied);
    }

    #[test]
    fn antonym_replay() {
        let lex = Lexicon::bundled();
        let cfg = MutationConfig::default();
        let text = "A small dog sitting on a big white couch";
        assert_eq!(
            run(OperatorId::Antonym, text, &lex, &cfg, 5).edits,
            run(OperatorId::Antonym, text, &lex, &cfg, 5).edits
        );
    }

    #[test]
    fn pick_one_is_transparent() {
        let lex = Lexicon::bundled();
        let cfg = MutationConfig::default();
        let c = tokenize("A man riding a wave on top of a surfboard");
        for seed in 0..40 {
            let mut rng = SeedStream::new(seed);
            let r = randomize(&c, &lex, &cfg, &mut rng).unwrap();
            let mut probe = SeedStream::new(seed);
            let op = OperatorId::SINGLE[probe.below(6)];
            let direct = apply_operator(op, &c, &lex, &cfg, &mut probe.fork(op.name())).unwrap();
            assert_eq!(r, direct);
            if op == OperatorId::AlphaEpsilon {
                let direct = replace_alpha_epsilon(&c, &cfg, &mut SeedStream::new(seed).fork("alpha_epsilon")).unwrap();
                assert_eq!(r, direct);
            }
        }
    }

    #[test]
    fn stacked_records_several_operators() {
        let lex = Lexicon::fixture();
        let cfg = MutationConfig {
            rate: 1.0,
            randomize_mode: RandomizeMode::Stacked,
            ..Default::default()
        };
        let r = run(OperatorId::Randomization, TABLE2, &lex, &cfg, 3);
        assert!(r.operators().len() >= 3, "{:?}", r.edits);
        let steps: Vec<usize> = r.edits.iter().map(|e| e.step).collect();
        assert!(steps.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn pick_one_frequencies_within_three_sigma() {
        let lex = Lexicon::bundled();
        let cfg = MutationConfig::default();
        // every one of the six operators applies to this sentence
        let c = tokenize("The small cat likes a big red ball");
        let n = 10_000;
        let mut counts: BTreeMap<OperatorId, usize> = BTreeMap::new();
        for i in 0..n {
            let mut rng = SeedStream::for_example(2024, &i.to_string());
            let r = randomize(&c, &lex, &cfg, &mut rng).unwrap();
            assert_eq!(r.operators().len(), 1);
            *counts.entry(r.operators()[0]).or_default() += 1;
        }
        assert_eq!(counts.len(), 6);
        let p = 1.0 / 6.0;
        let mean = n as f64 * p;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for (op, c) in &counts {
            assert!((*c as f64 - mean).abs() <= 3.0 * sigma, "{op}: {counts:?}");
        }
    }

    #[test]
    fn registry() {
        assert_eq!(OperatorId::CORE.len(), 7);
        assert_eq!(OperatorId::all().len(), 17);
        for id in OperatorId::all() {
            assert_eq!(id.name().parse::<OperatorId>().unwrap(), id);
            let json = serde_json::to_string(&id).unwrap();
            assert_eq!(serde_json::from_str::<OperatorId>(&json).unwrap(), id);
        }
        assert!(matches!("foo".parse::<OperatorId>(), Err(MutationError::UnknownOperator(_))));
        let c = tokenize(TABLE2);
        assert!(apply_named("foo", &c, &Lexicon::fixture(), &MutationConfig::default(), &mut SeedStream::new(0)).is_err());
    }

    #[test]
    fn dispatch_equality() {
        let lex = Lexicon::bundled();
        let cfg = MutationConfig::default();
        let c = tokenize("The cat and the dog on a mat");
        let a = apply_operator(OperatorId::DeleteArticles, &c, &lex, &cfg, &mut SeedStream::new(4)).unwrap();
        let b = delete_articles(&c, &lex, &cfg, &mut SeedStream::new(4)).unwrap();
        assert_eq!(a, b);
        assert!(a.edits.iter().all(|e| e.operator == OperatorId::DeleteArticles));
    }

    #[test]
    fn config_validation() {
        assert!(MutationConfig::default().validate().is_ok());
        assert!(MutationConfig::default().with_rate(0.0).validate().is_err());
        assert!(MutationConfig::default().with_rate(1.5).validate().is_err());
        assert!(MutationConfig::default().with_char_rate(0.0).validate().is_err());
        let bad = MutationConfig {
            max_mutations: Some(0),
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert_eq!(MutationConfig::default().max_for(7), 2);
        assert_eq!(MutationConfig::default().max_for(0), 1);
    }

    #[test]
    fn match_case_patterns() {
        assert_eq!(match_case("Please", "plz"), "Plz");
        assert_eq!(match_case("VIDEO", "vid"), "VID");
        assert_eq!(match_case("video", "vid"), "vid");
        assert_eq!(match_case("A", "the"), "The");
    }
}
