//! Word maps consumed by the mutation and perturbation operators.
//!
//! A lexicon is a directory of small UTF-8 text tables:
//!
//! | file               | format                                  | required |
//! |--------------------|-----------------------------------------|----------|
//! | `common_words.txt` | one word per line                       | yes      |
//! | `synonyms.tsv`     | `key<TAB>cand1,cand2,...`               | yes      |
//! | `antonyms.tsv`     | `key<TAB>cand1,cand2,...`               | yes      |
//! | `misspellings.tsv` | `key<TAB>cand1,cand2,...`               | yes      |
//! | `keyboard.tsv`     | `char<TAB>neighbors-as-string`          | no       |
//! | `homoglyphs.tsv`   | `char<TAB>replacement`                  | no       |
//! | `tandem.tsv`       | `char<TAB>multi-char-replacement`       | no       |
//!
//! Lines starting with `#` and blank lines are skipped. Keys and candidates
//! are NFC-normalized and lowercased. Optional tables fall back to the
//! bundled QWERTY adjacency and look-alike maps.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::rng::SeedStream;

pub const DEFAULT_CAP: usize = 3000;
pub const ARTICLES: [&str; 3] = ["a", "an", "the"];

pub const COMMON_WORDS_FILE: &str = "common_words.txt";
pub const SYNONYMS_FILE: &str = "synonyms.tsv";
pub const ANTONYMS_FILE: &str = "antonyms.tsv";
pub const MISSPELLINGS_FILE: &str = "misspellings.tsv";
pub const KEYBOARD_FILE: &str = "keyboard.tsv";
pub const HOMOGLYPHS_FILE: &str = "homoglyphs.tsv";
pub const TANDEM_FILE: &str = "tandem.tsv";

mod bundled {
    pub const COMMON_WORDS: &str = include_str!("../data/lexicon/common_words.txt");
    pub const SYNONYMS: &str = include_str!("../data/lexicon/synonyms.tsv");
    pub const ANTONYMS: &str = include_str!("../data/lexicon/antonyms.tsv");
    pub const MISSPELLINGS: &str = include_str!("../data/lexicon/misspellings.tsv");
    pub const KEYBOARD: &str = include_str!("../data/lexicon/keyboard.tsv");
    pub const HOMOGLYPHS: &str = include_str!("../data/lexicon/homoglyphs.tsv");
    pub const TANDEM: &str = include_str!("../data/lexicon/tandem.tsv");

    pub mod fixture {
        pub const COMMON_WORDS: &str = include_str!("../data/fixture/common_words.txt");
        pub const SYNONYMS: &str = include_str!("../data/fixture/synonyms.tsv");
        pub const ANTONYMS: &str = include_str!("../data/fixture/antonyms.tsv");
        pub const MISSPELLINGS: &str = include_str!("../data/fixture/misspellings.tsv");
    }
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("lexicon file not found: {}", .0.display())]
    Missing(PathBuf),
    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{file}:{line}: {reason}")]
    Malformed {
        file: String,
        line: usize,
        reason: String,
    },
    #[error("{file}:{line}: duplicate key {key:?} with a different payload")]
    Conflict {
        file: String,
        line: usize,
        key: String,
    },
    #[error("{file}:{line}: {key:?} maps to itself")]
    SelfMapping {
        file: String,
        line: usize,
        key: String,
    },
    #[error("lexicon configuration: {0}")]
    Config(String),
}

/// Raw text of every table, as read from disk or bundled.
#[derive(Debug, Clone, Copy)]
pub struct LexiconTables<'a> {
    pub common_words: &'a str,
    pub synonyms: &'a str,
    pub antonyms: &'a str,
    pub misspellings: &'a str,
    pub keyboard: &'a str,
    pub homoglyphs: &'a str,
    pub tandem: &'a str,
}

impl LexiconTables<'static> {
    pub fn bundled() -> Self {
        Self {
            common_words: bundled::COMMON_WORDS,
            synonyms: bundled::SYNONYMS,
            antonyms: bundled::ANTONYMS,
            misspellings: bundled::MISSPELLINGS,
            keyboard: bundled::KEYBOARD,
            homoglyphs: bundled::HOMOGLYPHS,
            tandem: bundled::TANDEM,
        }
    }

    /// The small golden-test lexicon: please/share/like/video pairs only.
    pub fn fixture() -> Self {
        Self {
            common_words: bundled::fixture::COMMON_WORDS,
            synonyms: bundled::fixture::SYNONYMS,
            antonyms: bundled::fixture::ANTONYMS,
            misspellings: bundled::fixture::MISSPELLINGS,
            ..Self::bundled()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Synonym,
    Antonym,
    Misspelling,
    NeighborKey,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lexicon {
    common_words: Vec<String>,
    common_index: HashMap<String, usize>,
    synonyms: BTreeMap<String, Vec<String>>,
    antonyms: BTreeMap<String, Vec<String>>,
    misspellings: BTreeMap<String, Vec<String>>,
    keyboard_adjacency: BTreeMap<char, Vec<char>>,
    homoglyphs: BTreeMap<char, String>,
    tandem: BTreeMap<char, String>,
}

fn fold(s: &str) -> String {
    s.nfc().collect::<String>().to_lowercase()
}

/// Content lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.split('\n').enumerate().filter_map(|(i, raw)| {
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() || line.starts_with('#') {
            None
        } else {
            Some((i + 1, line))
        }
    })
}

fn malformed(file: &str, line: usize, reason: impl Into<String>) -> LexiconError {
    LexiconError::Malformed {
        file: file.to_string(),
        line,
        reason: reason.into(),
    }
}

fn split_row<'a>(file: &str, line: usize, row: &'a str) -> Result<(&'a str, &'a str), LexiconError> {
    let (key, rest) = row
        .split_once('\t')
        .ok_or_else(|| malformed(file, line, "expected key<TAB>value"))?;
    let key = key.trim();
    let rest = rest.trim();
    if key.is_empty() {
        return Err(malformed(file, line, "empty key"));
    }
    if rest.is_empty() {
        return Err(malformed(file, line, "empty value"));
    }
    Ok((key, rest))
}

fn parse_common_words(text: &str, cap: usize) -> Result<Vec<String>, LexiconError> {
    let mut seen = std::collections::HashSet::new();
    let mut words = Vec::new();
    for (line, row) in content_lines(text) {
        let word = fold(row.trim());
        if word.chars().any(char::is_whitespace) {
            return Err(malformed(COMMON_WORDS_FILE, line, "expected one word per line"));
        }
        if seen.insert(word.clone()) {
            if words.len() == cap {
                break;
            }
            words.push(word);
        }
    }
    Ok(words)
}

fn parse_relation(file: &str, text: &str) -> Result<BTreeMap<String, Vec<String>>, LexiconError> {
    let mut map: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (line, row) in content_lines(text) {
        let (key, rest) = split_row(file, line, row)?;
        let key = fold(key);
        if key.chars().any(char::is_whitespace) {
            return Err(malformed(file, line, "key contains whitespace"));
        }
        let mut cands: Vec<String> = Vec::new();
        for cand in rest.split(',') {
            let cand = fold(cand.trim());
            if cand.is_empty() {
                return Err(malformed(file, line, "empty candidate"));
            }
            if cand.chars().any(char::is_whitespace) {
                return Err(malformed(file, line, format!("candidate {cand:?} contains whitespace")));
            }
            if cand == key {
                return Err(LexiconError::SelfMapping {
                    file: file.to_string(),
                    line,
                    key,
                });
            }
            if !cands.contains(&cand) {
                cands.push(cand);
            }
        }
        match map.get(&key) {
            Some(existing) if *existing != cands => {
                return Err(LexiconError::Conflict {
                    file: file.to_string(),
                    line,
                    key,
                })
            }
            Some(_) => {}
            None => {
                map.insert(key, cands);
            }
        }
    }
    Ok(map)
}

fn single_char(file: &str, line: usize, key: &str) -> Result<char, LexiconError> {
    let key: String = key.nfc().collect();
    let mut chars = key.chars();
    match (chars.next(), chars.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(malformed(file, line, format!("key {key:?} is not a single character"))),
    }
}

fn parse_keyboard(text: &str) -> Result<BTreeMap<char, Vec<char>>, LexiconError> {
    let file = KEYBOARD_FILE;
    let mut map: BTreeMap<char, Vec<char>> = BTreeMap::new();
    for (line, row) in content_lines(text) {
        let (key, rest) = split_row(file, line, row)?;
        let key = single_char(file, line, &fold(key))?;
        let mut neighbors = Vec::new();
        for c in fold(rest).chars() {
            if c.is_whitespace() {
                return Err(malformed(file, line, "neighbors contain whitespace"));
            }
            if c == key {
                return Err(LexiconError::SelfMapping {
                    file: file.to_string(),
                    line,
                    key: key.to_string(),
                });
            }
            if !neighbors.contains(&c) {
                neighbors.push(c);
            }
        }
        match map.get(&key) {
            Some(existing) if *existing != neighbors => {
                return Err(LexiconError::Conflict {
                    file: file.to_string(),
                    line,
                    key: key.to_string(),
                })
            }
            Some(_) => {}
            None => {
                map.insert(key, neighbors);
            }
        }
    }
    Ok(map)
}

// Look-alike maps keep case: 'A' and 'a' may map differently.
fn parse_char_map(file: &str, text: &str) -> Result<BTreeMap<char, String>, LexiconError> {
    let mut map = BTreeMap::new();
    for (line, row) in content_lines(text) {
        let (key, rest) = split_row(file, line, row)?;
        let key = single_char(file, line, key)?;
        let value: String = rest.nfc().collect();
        if value.chars().any(char::is_whitespace) {
            return Err(malformed(file, line, "replacement contains whitespace"));
        }
        if value == key.to_string() {
            return Err(LexiconError::SelfMapping {
                file: file.to_string(),
                line,
                key: key.to_string(),
            });
        }
        match map.get(&key) {
            Some(existing) if *existing != value => {
                return Err(LexiconError::Conflict {
                    file: file.to_string(),
                    line,
                    key: key.to_string(),
                })
            }
            Some(_) => {}
            None => {
                map.insert(key, value);
            }
        }
    }
    Ok(map)
}

impl Lexicon {
    pub fn from_tables(tables: LexiconTables<'_>, cap: usize) -> Result<Self, LexiconError> {
        let common_words = parse_common_words(tables.common_words, cap)?;
        let common_index = common_words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i))
            .collect();
        Ok(Self {
            common_words,
            common_index,
            synonyms: parse_relation(SYNONYMS_FILE, tables.synonyms)?,
            antonyms: parse_relation(ANTONYMS_FILE, tables.antonyms)?,
            misspellings: parse_relation(MISSPELLINGS_FILE, tables.misspellings)?,
            keyboard_adjacency: parse_keyboard(tables.keyboard)?,
            homoglyphs: parse_char_map(HOMOGLYPHS_FILE, tables.homoglyphs)?,
            tandem: parse_char_map(TANDEM_FILE, tables.tandem)?,
        })
    }

    /// Loads a lexicon directory; see the module docs for the file set.
    pub fn load_dir(dir: impl AsRef<Path>, cap: usize) -> Result<Self, LexiconError> {
        let dir = dir.as_ref();
        let read = |name: &str, required: bool| -> Result<Option<String>, LexiconError> {
            let path = dir.join(name);
            match fs::read_to_string(&path) {
                Ok(s) => Ok(Some(s)),
                Err(e) if e.kind() == io::ErrorKind::NotFound => {
                    if required {
                        Err(LexiconError::Missing(path))
                    } else {
                        Ok(None)
                    }
                }
                Err(source) => Err(LexiconError::Io { path, source }),
            }
        };
        let common = read(COMMON_WORDS_FILE, true)?.unwrap_or_default();
        let syn = read(SYNONYMS_FILE, true)?.unwrap_or_default();
        let ant = read(ANTONYMS_FILE, true)?.unwrap_or_default();
        let mis = read(MISSPELLINGS_FILE, true)?.unwrap_or_default();
        let kb = read(KEYBOARD_FILE, false)?;
        let hg = read(HOMOGLYPHS_FILE, false)?;
        let td = read(TANDEM_FILE, false)?;
        let defaults = LexiconTables::bundled();
        Self::from_tables(
            LexiconTables {
                common_words: &common,
                synonyms: &syn,
                antonyms: &ant,
                misspellings: &mis,
                keyboard: kb.as_deref().unwrap_or(defaults.keyboard),
                homoglyphs: hg.as_deref().unwrap_or(defaults.homoglyphs),
                tandem: td.as_deref().unwrap_or(defaults.tandem),
            },
            cap,
        )
    }

    /// The lexicon shipped with the crate.
    pub fn bundled() -> Self {
        Self::from_tables(LexiconTables::bundled(), DEFAULT_CAP).expect("bundled lexicon is valid")
    }

    pub fn fixture() -> Self {
        Self::from_tables(LexiconTables::fixture(), DEFAULT_CAP).expect("fixture lexicon is valid")
    }

    /// SHA-256 over the full normalized content, for manifests.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut h = Sha256::new();
        let mut put = |tag: &str, line: String| {
            h.update(tag.as_bytes());
            h.update(b"\t");
            h.update(line.as_bytes());
            h.update(b"\n");
        };
        for w in &self.common_words {
            put("common", w.clone());
        }
        for (tag, map) in [("syn", &self.synonyms), ("ant", &self.antonyms), ("mis", &self.misspellings)] {
            for (k, v) in map {
                put(tag, format!("{k}\t{}", v.join("|")));
            }
        }
        for (k, v) in &self.keyboard_adjacency {
            put("key", format!("{k}\t{}", v.iter().collect::<String>()));
        }
        for (tag, map) in [("glyph", &self.homoglyphs), ("tandem", &self.tandem)] {
            for (k, v) in map {
                put(tag, format!("{k}\t{v}"));
            }
        }
        hex::encode(h.finalize())
    }

    pub fn common_words(&self) -> &[String] {
        &self.common_words
    }

    pub fn synonyms(&self) -> &BTreeMap<String, Vec<String>> {
        &self.synonyms
    }

    pub fn antonyms(&self) -> &BTreeMap<String, Vec<String>> {
        &self.antonyms
    }

    pub fn misspellings(&self) -> &BTreeMap<String, Vec<String>> {
        &self.misspellings
    }

    pub fn keyboard_adjacency(&self) -> &BTreeMap<char, Vec<char>> {
        &self.keyboard_adjacency
    }

    pub fn homoglyphs(&self) -> &BTreeMap<char, String> {
        &self.homoglyphs
    }

    pub fn tandem(&self) -> &BTreeMap<char, String> {
        &self.tandem
    }

    /// Candidates stored for `key` under `relation`, empty when absent.
    /// For [`Relation::NeighborKey`] the key is one character and each
    /// candidate is a one-character string.
    pub fn lookup(&self, relation: Relation, key: &str) -> Vec<String> {
        match relation {
            Relation::NeighborKey => {
                let folded = fold(key);
                let mut chars = folded.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) => self
                        .neighbors(c)
                        .iter()
                        .map(|n| n.to_string())
                        .collect(),
                    _ => Vec::new(),
                }
            }
            _ => self.candidates(relation, key).to_vec(),
        }
    }

    /// Borrowing form of [`Lexicon::lookup`] for the word relations.
    pub fn candidates(&self, relation: Relation, key: &str) -> &[String] {
        let map = match relation {
            Relation::Synonym => &self.synonyms,
            Relation::Antonym => &self.antonyms,
            Relation::Misspelling => &self.misspellings,
            Relation::NeighborKey => return &[],
        };
        map.get(&fold(key)).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn neighbors(&self, c: char) -> &[char] {
        let lower = c.to_lowercase().next().unwrap_or(c);
        self.keyboard_adjacency
            .get(&lower)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn is_article(&self, word: &str) -> bool {
        let w = fold(word);
        ARTICLES.contains(&w.as_str())
    }

    /// Uniform draw from the common words, never `exclude` (case-insensitive).
    pub fn sample_common_word(&self, rng: &mut SeedStream, exclude: &str) -> Result<&str, LexiconError> {
        if self.common_words.is_empty() {
            return Err(LexiconError::Config("common word list is empty".into()));
        }
        let skip = self.common_index.get(&fold(exclude)).copied();
        let available = self.common_words.len() - usize::from(skip.is_some());
        if available == 0 {
            return Err(LexiconError::Config(format!(
                "no common word other than {exclude:?} to sample"
            )));
        }
        let mut idx = rng.below(available);
        if let Some(s) = skip {
            if idx >= s {
                idx += 1;
            }
        }
        Ok(&self.common_words[idx])
    }
}
