//! Text corpus model: an ordered set of words plus an ordered set of
//! punctuation tokens, each remembering its slot in the original token stream.
//!
//! A word is a maximal run of alphabetic characters (combining marks may
//! continue a word, and a single apostrophe or hyphen may sit between two
//! letters). Everything else that is not whitespace becomes punctuation.
//! Digits and symbols are punctuation too.
//!
//! `detokenize(tokenize(t))` is the normal form of `t`: NFC, whitespace runs
//! collapsed to one space, leading and trailing whitespace removed.

use std::fmt;

use thiserror::Error;
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CorpusError {
    #[error("token positions are not a contiguous 0..{expected} range (found {found:?})")]
    Positions { expected: usize, found: Vec<usize> },
    #[error("word token at position {position} is not a word: {text:?}")]
    InvalidWord { position: usize, text: String },
    #[error("punctuation token at position {position} is not punctuation: {text:?}")]
    InvalidPunct { position: usize, text: String },
    #[error("word at position {position} abuts the preceding word without a space")]
    Unspaced { position: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WordToken {
    pub text: String,
    pub position: usize,
    pub preceded_by_space: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PunctToken {
    pub text: String,
    pub position: usize,
    /// Abutted the previous token with no space in between.
    pub attached: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Word,
    Punct,
}

/// Position-free view of one token, used when building or rewriting corpora.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// Separated from the previous token by a space.
    pub spaced: bool,
}

impl Token {
    pub fn word(text: impl Into<String>, spaced: bool) -> Self {
        Self {
            kind: TokenKind::Word,
            text: text.into(),
            spaced,
        }
    }

    pub fn punct(text: impl Into<String>, spaced: bool) -> Self {
        Self {
            kind: TokenKind::Punct,
            text: text.into(),
            spaced,
        }
    }

    pub fn is_word(&self) -> bool {
        self.kind == TokenKind::Word
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TextCorpus {
    words: Vec<WordToken>,
    puncts: Vec<PunctToken>,
    normalized: bool,
}

impl TextCorpus {
    /// Assembles a corpus from raw parts without checking anything.
    /// [`TextCorpus::validate`] (or [`detokenize`]) reports structural problems.
    pub fn from_parts(words: Vec<WordToken>, puncts: Vec<PunctToken>, normalized: bool) -> Self {
        Self {
            words,
            puncts,
            normalized,
        }
    }

    /// Builds a corpus from tokens in order, assigning contiguous positions.
    /// Empty tokens are dropped and a word directly after a word is marked
    /// spaced, so the result always validates when the token texts do.
    pub fn from_tokens(tokens: impl IntoIterator<Item = Token>, normalized: bool) -> Self {
        let mut words = Vec::new();
        let mut puncts = Vec::new();
        let mut prev_word = false;
        let mut position = 0;
        for tok in tokens {
            if tok.text.is_empty() {
                continue;
            }
            let first = position == 0;
            match tok.kind {
                TokenKind::Word => {
                    words.push(WordToken {
                        text: tok.text,
                        position,
                        preceded_by_space: !first && (tok.spaced || prev_word),
                    });
                    prev_word = true;
                }
                TokenKind::Punct => {
                    puncts.push(PunctToken {
                        text: tok.text,
                        position,
                        attached: !first && !tok.spaced,
                    });
                    prev_word = false;
                }
            }
            position += 1;
        }
        Self {
            words,
            puncts,
            normalized,
        }
    }

    pub fn words(&self) -> &[WordToken] {
        &self.words
    }

    pub fn puncts(&self) -> &[PunctToken] {
        &self.puncts
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Total number of tokens, words and punctuation.
    pub fn len(&self) -> usize {
        self.words.len() + self.puncts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty() && self.puncts.is_empty()
    }

    pub fn word_count(&self) -> usize {
        self.words.len()
    }

    /// Tokens merged in position order.
    pub fn tokens(&self) -> Vec<Token> {
        let mut merged: Vec<(usize, Token)> = self
            .words
            .iter()
            .map(|w| (w.position, Token::word(w.text.clone(), w.preceded_by_space)))
            .chain(
                self.puncts
                    .iter()
                    .map(|p| (p.position, Token::punct(p.text.clone(), !p.attached))),
            )
            .collect();
        merged.sort_by_key(|(pos, _)| *pos);
        merged.into_iter().map(|(_, t)| t).collect()
    }

    pub fn word_at(&self, position: usize) -> Option<&WordToken> {
        self.words.iter().find(|w| w.position == position)
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let mut positions: Vec<usize> = self
            .words
            .iter()
            .map(|w| w.position)
            .chain(self.puncts.iter().map(|p| p.position))
            .collect();
        positions.sort_unstable();
        if positions.iter().enumerate().any(|(i, &p)| i != p) {
            return Err(CorpusError::Positions {
                expected: positions.len(),
                found: positions,
            });
        }
        for w in &self.words {
            if !is_word(&w.text) {
                return Err(CorpusError::InvalidWord {
                    position: w.position,
                    text: w.text.clone(),
                });
            }
        }
        for p in &self.puncts {
            if !is_punct(&p.text) {
                return Err(CorpusError::InvalidPunct {
                    position: p.position,
                    text: p.text.clone(),
                });
            }
        }
        let mut prev_word = false;
        for (pos, tok) in self.tokens().iter().enumerate() {
            if tok.is_word() && prev_word && !tok.spaced {
                return Err(CorpusError::Unspaced { position: pos });
            }
            prev_word = tok.is_word();
        }
        Ok(())
    }

    /// Renders tokens without validating; use [`detokenize`] for untrusted corpora.
    pub fn render(&self) -> String {
        render_tokens(&self.tokens())
    }
}

impl fmt::Display for TextCorpus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

pub fn render_tokens(tokens: &[Token]) -> String {
    let mut out = String::new();
    for (i, tok) in tokens.iter().enumerate() {
        if i > 0 && tok.spaced {
            out.push(' ');
        }
        out.push_str(&tok.text);
    }
    out
}

fn is_joiner(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '-')
}

fn continues_word(c: char) -> bool {
    c.is_alphabetic() || is_combining_mark(c)
}

/// True when `text` would tokenize as exactly one word.
pub fn is_word(text: &str) -> bool {
    let chars: Vec<char> = text.chars().collect();
    match chars.first() {
        Some(c) if c.is_alphabetic() => {}
        _ => return false,
    }
    word_run_end(&chars, 0) == chars.len()
}

fn is_punct(text: &str) -> bool {
    !text.is_empty() && text.chars().all(|c| !c.is_alphabetic() && !c.is_whitespace())
}

// chars[start] must be alphabetic
fn word_run_end(chars: &[char], start: usize) -> usize {
    let mut j = start + 1;
    while j < chars.len() {
        if continues_word(chars[j]) {
            j += 1;
        } else if is_joiner(chars[j]) && j + 1 < chars.len() && chars[j + 1].is_alphabetic() {
            j += 2;
        } else {
            break;
        }
    }
    j
}

/// Splits whitespace-free text into word and punctuation runs. The first
/// token carries `first_spaced`; the rest are attached.
fn split_chunk(chunk: &str, first_spaced: bool, out: &mut Vec<Token>) {
    let chars: Vec<char> = chunk.chars().collect();
    let mut i = 0;
    let mut spaced = first_spaced;
    while i < chars.len() {
        let (kind, end) = if chars[i].is_alphabetic() {
            (TokenKind::Word, word_run_end(&chars, i))
        } else {
            let mut j = i + 1;
            while j < chars.len() && !chars[j].is_alphabetic() {
                j += 1;
            }
            (TokenKind::Punct, j)
        };
        out.push(Token {
            kind,
            text: chars[i..end].iter().collect(),
            spaced,
        });
        spaced = false;
        i = end;
    }
}

/// Tokenizes a fragment such as an operator's replacement for one word.
/// The fragment is not NFC-normalized; the first token gets `first_spaced`
/// and tokens after internal whitespace are spaced.
pub fn tokenize_fragment(text: &str, first_spaced: bool) -> Vec<Token> {
    let mut out = Vec::new();
    for (i, chunk) in text.split_whitespace().enumerate() {
        split_chunk(chunk, if i == 0 { first_spaced } else { true }, &mut out);
    }
    out
}

pub fn tokenize(text: &str) -> TextCorpus {
    let normalized: String = text.nfc().collect();
    TextCorpus::from_tokens(tokenize_fragment(&normalized, false), true)
}

pub fn detokenize(corpus: &TextCorpus) -> Result<String, CorpusError> {
    corpus.validate()?;
    Ok(corpus.render())
}

/// Drops every punctuation token; words keep their text and are re-indexed.
pub fn strip_punctuation(corpus: &TextCorpus) -> TextCorpus {
    TextCorpus::from_tokens(
        corpus
            .tokens()
            .into_iter()
            .filter(Token::is_word)
            .map(|t| Token::word(t.text, true)),
        corpus.normalized,
    )
}

/// `detokenize(tokenize(text))`.
pub fn normalize(text: &str) -> String {
    tokenize(text).render()
}
