//! The ten adversarial text perturbation types, exposed through the same
//! registry as the mutation operators.
//!
//! Each perturbation selects words exactly like the word-level operators
//! (`rate`, `max_mutations`, `guarantee_one`, `targets`) and then edits
//! characters inside each selected word. Character-level choices use
//! `char_rate`; a selected word always receives at least one change.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::corpus::{TextCorpus, WordToken};
use crate::lexicon::Lexicon;
use crate::mutation::{mutate_words, transpose, transposable_pairs, Change, MutationConfig, MutationError, MutationResult, OperatorId};
use crate::rng::SeedStream;

pub const ZERO_WIDTH: char = '\u{200C}';
const FAKE_PUNCTUATION: [char; 6] = ['.', ',', '!', '?', ';', ':'];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PerturbationId {
    CombinedUnicode,
    FakePunctuation,
    NeighboringKey,
    RandomSpaces,
    ReplaceUnicode,
    SpaceSeparation,
    TandemObfuscation,
    Transposition,
    VowelRepeatDelete,
    ZeroWidthSpace,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PerturbationInfo {
    pub id: PerturbationId,
    pub title: &'static str,
    pub definition: &'static str,
    pub example: &'static str,
    /// Defense listed alongside the perturbation; catalog metadata only.
    pub defense: &'static str,
}

impl PerturbationId {
    pub const ALL: [PerturbationId; 10] = [
        PerturbationId::CombinedUnicode,
        PerturbationId::FakePunctuation,
        PerturbationId::NeighboringKey,
        PerturbationId::RandomSpaces,
        PerturbationId::ReplaceUnicode,
        PerturbationId::SpaceSeparation,
        PerturbationId::TandemObfuscation,
        PerturbationId::Transposition,
        PerturbationId::VowelRepeatDelete,
        PerturbationId::ZeroWidthSpace,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PerturbationId::CombinedUnicode => "combined_unicode",
            PerturbationId::FakePunctuation => "fake_punctuation",
            PerturbationId::NeighboringKey => "neighboring_key",
            PerturbationId::RandomSpaces => "random_spaces",
            PerturbationId::ReplaceUnicode => "replace_unicode",
            PerturbationId::SpaceSeparation => "space_separation",
            PerturbationId::TandemObfuscation => "tandem_obfuscation",
            PerturbationId::Transposition => "transposition",
            PerturbationId::VowelRepeatDelete => "vowel_repeat_delete",
            PerturbationId::ZeroWidthSpace => "zero_width_space",
        }
    }

    pub fn info(self) -> PerturbationInfo {
        let (title, definition, example, defense) = match self {
            PerturbationId::CombinedUnicode => (
                "Combined Unicode",
                "Insert a Unicode character between each original character",
                "P.l.e.a.s.e l.i.k.e a.n.d s.h.a.r.e",
                "ACD",
            ),
            PerturbationId::FakePunctuation => (
                "Fake punctuation",
                "Randomly add zero or more punctuation marks between characters",
                "Pleas.e lik,e and shar!e the video",
                "CW2V",
            ),
            PerturbationId::NeighboringKey => (
                "Neighboring key",
                "Replace characters with keyboard-adjacent characters",
                "Plwase lime and sharr the video",
                "CW2V",
            ),
            PerturbationId::RandomSpaces => (
                "Random spaces",
                "Randomly insert zero or more spaces between characters",
                "Pl ease lik e and sha re th e video",
                "CW2V",
            ),
            PerturbationId::ReplaceUnicode => (
                "Replace Unicode",
                "Replace characters with Unicode look-alikes",
                "Pleãse lîke and sharê the video",
                "UC",
            ),
            PerturbationId::SpaceSeparation => (
                "Space separation",
                "Place spaces between characters",
                "Please l i k e and s h a r e",
                "ACD",
            ),
            PerturbationId::TandemObfuscation => (
                "Tandem character obfuscation",
                "Replace individual characters with characters that together look original",
                "PLE/\\SE LIKE /\\ND SH/\\RE",
                "UC",
            ),
            PerturbationId::Transposition => (
                "Transposition",
                "Swap adjacent characters",
                "Please like adn sahre",
                "CW2V",
            ),
            PerturbationId::VowelRepeatDelete => (
                "Vowel repetition and deletion",
                "Repeat or delete vowels",
                "Pls likee nd sharee",
                "CW2V",
            ),
            PerturbationId::ZeroWidthSpace => (
                "Zero-width space separation",
                "Place zero-width spaces (U+200C) between characters",
                "Please like and share the video",
                "ACD",
            ),
        };
        PerturbationInfo {
            id: self,
            title,
            definition,
            example,
            defense,
        }
    }

    pub fn definition(self) -> &'static str {
        self.info().definition
    }
}

impl fmt::Display for PerturbationId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PerturbationId {
    type Err = MutationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| MutationError::UnknownOperator(s.to_string()))
    }
}

impl Serialize for PerturbationId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for PerturbationId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The catalog, in table order.
pub fn list_perturbations() -> Vec<PerturbationInfo> {
    PerturbationId::ALL.iter().map(|p| p.info()).collect()
}

fn chars(w: &WordToken) -> Vec<char> {
    w.text.chars().collect()
}

/// Decides independently for each of `n` slots whether to act, with at
/// least one slot chosen whenever `n > 0`.
fn pick_slots(n: usize, p: f64, rng: &mut SeedStream) -> Vec<bool> {
    let mut flags: Vec<bool> = (0..n).map(|_| rng.chance(p)).collect();
    if n > 0 && !flags.iter().any(|&f| f) {
        flags[rng.below(n)] = true;
    }
    flags
}

/// Inserts `insert(rng)` into the gaps picked by `pick_slots`.
fn fill_gaps(chars: &[char], p: f64, rng: &mut SeedStream, mut insert: impl FnMut(&mut SeedStream) -> char) -> String {
    let gaps = pick_slots(chars.len().saturating_sub(1), p, rng);
    let mut out = String::new();
    for (i, &c) in chars.iter().enumerate() {
        out.push(c);
        if gaps.get(i).copied().unwrap_or(false) {
            out.push(insert(rng));
        }
    }
    out
}

/// Replaces the characters for which `lookup` has an answer, each with
/// probability `p` and at least one.
fn substitute<F>(chars: &[char], p: f64, rng: &mut SeedStream, lookup: F) -> Option<String>
where
    F: Fn(char, &mut SeedStream) -> Option<String>,
{
    let slots: Vec<usize> = (0..chars.len())
        .filter(|&i| lookup(chars[i], &mut rng.clone()).is_some())
        .collect();
    if slots.is_empty() {
        return None;
    }
    let flags = pick_slots(slots.len(), p, rng);
    let mut out: Vec<String> = chars.iter().map(|c| c.to_string()).collect();
    for (&i, &f) in slots.iter().zip(&flags) {
        if f {
            out[i] = lookup(chars[i], rng)?;
        }
    }
    Some(out.concat())
}

fn is_vowel(c: char) -> bool {
    matches!(c.to_ascii_lowercase(), 'a' | 'e' | 'i' | 'o' | 'u')
}

fn vowel_repeat_delete(chars: &[char], p: f64, rng: &mut SeedStream) -> Option<String> {
    let vowels: Vec<usize> = (0..chars.len()).filter(|&i| is_vowel(chars[i])).collect();
    if vowels.is_empty() {
        return None;
    }
    // deleting from an all-vowel word could empty it
    let may_delete = vowels.len() < chars.len();
    let flags = pick_slots(vowels.len(), p, rng);
    let mut out = String::new();
    let mut vi = 0;
    for (i, &c) in chars.iter().enumerate() {
        if vowels.get(vi) == Some(&i) {
            let act = flags[vi];
            vi += 1;
            if act {
                if may_delete && rng.chance(0.5) {
                    continue;
                }
                out.push(c);
            }
        }
        out.push(c);
    }
    let original: String = chars.iter().collect();
    if out == original {
        // e.g. "oo" with one deletion and one doubling
        let first = vowels[0];
        out = chars[..=first].iter().chain(&chars[first..]).collect();
    }
    Some(out)
}

pub fn apply_perturbation(
    id: PerturbationId,
    corpus: &TextCorpus,
    lex: &Lexicon,
    cfg: &MutationConfig,
    rng: &mut SeedStream,
) -> Result<MutationResult, MutationError> {
    cfg.validate()?;
    let op = OperatorId::Perturbation(id);
    let p = cfg.char_rate;
    let multi = |w: &WordToken| w.text.chars().count() >= 2;
    let run = |rng: &mut SeedStream,
               eligible: &dyn Fn(&WordToken) -> bool,
               change: &mut dyn FnMut(&WordToken, &mut SeedStream) -> Option<String>| {
        mutate_words(corpus, cfg, rng, op, false, eligible, |w, rng| {
            Ok(change(w, rng).map(Change::Replace))
        })
    };
    match id {
        PerturbationId::CombinedUnicode => run(rng, &multi, &mut |w, _| {
            let sep = cfg.separator.to_string();
            Some(chars(w).iter().map(char::to_string).collect::<Vec<_>>().join(&sep))
        }),
        PerturbationId::SpaceSeparation => run(rng, &multi, &mut |w, _| {
            Some(chars(w).iter().map(char::to_string).collect::<Vec<_>>().join(" "))
        }),
        PerturbationId::ZeroWidthSpace => run(rng, &multi, &mut |w, _| {
            let sep = ZERO_WIDTH.to_string();
            Some(chars(w).iter().map(char::to_string).collect::<Vec<_>>().join(&sep))
        }),
        PerturbationId::FakePunctuation => run(rng, &multi, &mut |w, rng| {
            Some(fill_gaps(&chars(w), p, rng, |rng| FAKE_PUNCTUATION[rng.below(FAKE_PUNCTUATION.len())]))
        }),
        PerturbationId::RandomSpaces => run(rng, &multi, &mut |w, rng| Some(fill_gaps(&chars(w), p, rng, |_| ' '))),
        PerturbationId::NeighboringKey => {
            let lookup = |c: char, rng: &mut SeedStream| {
                let n = *rng.choose(lex.neighbors(c))?;
                Some(if c.is_uppercase() { n.to_uppercase().collect() } else { n.to_string() })
            };
            run(
                rng,
                &|w: &WordToken| w.text.chars().any(|c| !lex.neighbors(c).is_empty()),
                &mut |w, rng| substitute(&chars(w), p, rng, lookup),
            )
        }
        PerturbationId::ReplaceUnicode => {
            let lookup = |c: char, _: &mut SeedStream| lex.homoglyphs().get(&c).cloned();
            run(
                rng,
                &|w: &WordToken| w.text.chars().any(|c| lex.homoglyphs().contains_key(&c)),
                &mut |w, rng| substitute(&chars(w), p, rng, lookup),
            )
        }
        PerturbationId::TandemObfuscation => {
            let lookup = |c: char, _: &mut SeedStream| lex.tandem().get(&c).cloned();
            run(
                rng,
                &|w: &WordToken| w.text.chars().any(|c| lex.tandem().contains_key(&c)),
                &mut |w, rng| substitute(&chars(w), p, rng, lookup),
            )
        }
        PerturbationId::Transposition => run(
            rng,
            &|w: &WordToken| !transposable_pairs(&chars(w)).is_empty(),
            &mut |w, rng| transpose(&w.text, rng),
        ),
        PerturbationId::VowelRepeatDelete => run(
            rng,
            &|w: &WordToken| w.text.chars().any(is_vowel),
            &mut |w, rng| vowel_repeat_delete(&chars(w), p, rng),
        ),
    }
}
