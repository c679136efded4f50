//! Oracles shared by the integration tests. They only rely on the crate's
//! tokenizer to split intermediate text; every other check is recomputed
//! from the edit log.

#![allow(dead_code)]

use textmut::corpus::{tokenize, TextCorpus};
use textmut::mutation::{apply_operator, Edit, MutationConfig, MutationResult, OperatorId, RandomizeMode};
use textmut::{Lexicon, PerturbationId, SeedStream};

const ARTICLES: [&str; 3] = ["a", "an", "the"];

fn render(tokens: &[(String, bool)]) -> String {
    let mut s = String::new();
    for (i, (text, spaced)) in tokens.iter().enumerate() {
        if i > 0 && *spaced {
            s.push(' ');
        }
        s.push_str(text);
    }
    s
}

/// Replays `edits` step by step on `source` and returns the final text.
pub fn replay(source: &str, edits: &[Edit]) -> Result<String, String> {
    let mut current = source.to_string();
    let mut steps: Vec<usize> = edits.iter().map(|e| e.step).collect();
    steps.dedup();
    if steps.windows(2).any(|w| w[0] > w[1]) {
        return Err("edit steps out of order".into());
    }
    for step in steps {
        let tokens = tokenize(&current).tokens();
        let mut out: Vec<Option<(String, bool)>> = tokens.iter().map(|t| Some((t.text.clone(), t.spaced))).collect();
        for e in edits.iter().filter(|e| e.step == step) {
            let tok = tokens
                .get(e.position)
                .ok_or_else(|| format!("step {step}: position {} out of range", e.position))?;
            if !tok.is_word() || tok.text != e.original {
                return Err(format!(
                    "step {step}: slot {} holds {:?}, edit says {:?}",
                    e.position, tok.text, e.original
                ));
            }
            out[e.position] = e.replacement.clone().map(|r| (r, tok.spaced));
        }
        let kept: Vec<(String, bool)> = out.into_iter().flatten().filter(|(t, _)| !t.is_empty()).collect();
        current = render(&kept);
    }
    Ok(current)
}

fn step_inputs(source: &str, edits: &[Edit]) -> Vec<(usize, String)> {
    let mut inputs = Vec::new();
    let mut current = source.to_string();
    let mut steps: Vec<usize> = edits.iter().map(|e| e.step).collect();
    steps.dedup();
    for step in steps {
        inputs.push((step, current.clone()));
        let upto: Vec<Edit> = edits.iter().filter(|e| e.step <= step).cloned().collect();
        current = replay(source, &upto).unwrap_or_default();
    }
    inputs
}

fn alpha_epsilon_ok(original: &str, replacement: &str, uppercase: bool) -> bool {
    let o: Vec<char> = original.chars().collect();
    let r: Vec<char> = replacement.chars().collect();
    o.len() == r.len()
        && o.iter().zip(&r).all(|(a, b)| {
            a == b
                || matches!((a, b), ('a', '\u{3b1}') | ('e', '\u{3b5}'))
                || (uppercase && matches!((a, b), ('A', '\u{391}') | ('E', '\u{395}')))
        })
}

/// Every invariant of one mutation result; returns the violations found.
pub fn check(op: OperatorId, source: &TextCorpus, cfg: &MutationConfig, res: &MutationResult) -> Vec<String> {
    let mut bad = Vec::new();
    let text = source.render();
    match replay(&text, &res.edits) {
        Ok(replayed) if replayed == res.text() => {}
        Ok(replayed) => bad.push(format!("replay gives {replayed:?}, result is {:?}", res.text())),
        Err(e) => bad.push(format!("replay failed: {e}")),
    }
    if res.applied != !res.edits.is_empty() {
        bad.push(format!("applied={} with {} edits", res.applied, res.edits.len()));
    }
    if res.applied && res.text() == text {
        bad.push("applied but text unchanged".into());
    }
    if !res.applied && res.text() != text {
        bad.push("not applied but text changed".into());
    }
    if cfg.targets.is_none() {
        for (step, input) in step_inputs(&text, &res.edits) {
            let step_edits: Vec<&Edit> = res.edits.iter().filter(|e| e.step == step).collect();
            // the cap binds word-level operators; alpha/epsilon works per character
            if !step_edits.iter().all(|e| e.operator.is_word_level()) {
                continue;
            }
            let n = step_edits.len();
            let cap = cfg.max_for(tokenize(&input).word_count());
            if n > cap {
                bad.push(format!("step {step}: {n} edits over cap {cap}"));
            }
        }
    }
    for e in &res.edits {
        match e.operator {
            OperatorId::DeleteArticles => {
                if !ARTICLES.contains(&e.original.to_lowercase().as_str()) || e.replacement.is_some() {
                    bad.push(format!("delete_articles touched {:?}", e.original));
                }
            }
            OperatorId::AlphaEpsilon => {
                let rep = e.replacement.as_deref().unwrap_or("");
                if !alpha_epsilon_ok(&e.original, rep, cfg.uppercase) {
                    bad.push(format!("alpha_epsilon rewrote {:?} as {rep:?}", e.original));
                }
            }
            OperatorId::Randomization => bad.push("edit attributed to randomization".into()),
            _ => {}
        }
        if op != OperatorId::Randomization && e.operator != op {
            bad.push(format!("{op} recorded an edit for {}", e.operator));
        }
        if op == OperatorId::Randomization && !OperatorId::SINGLE.contains(&e.operator) {
            bad.push(format!("randomization used {}", e.operator));
        }
    }
    bad
}

/// A random operator and configuration drawn from `rng`.
pub fn random_case(rng: &mut SeedStream) -> (OperatorId, MutationConfig) {
    let ops = OperatorId::all();
    let op = ops[rng.below(ops.len())];
    let cfg = MutationConfig {
        rate: 0.05 + 0.95 * rng.next_f64(),
        char_rate: 0.1 + 0.9 * rng.next_f64(),
        max_mutations: rng.chance(0.5).then(|| 1 + rng.below(4)),
        guarantee_one: rng.chance(0.8),
        uppercase: rng.chance(0.3),
        randomize_mode: if rng.chance(0.3) {
            RandomizeMode::Stacked
        } else {
            RandomizeMode::PickOne
        },
        ..MutationConfig::default()
    };
    (op, cfg)
}

/// Runs `n` random mutations over `texts` and collects violations.
pub fn sweep(texts: &[String], lex: &Lexicon, n: usize, seed: u64) -> (usize, Vec<String>) {
    let mut rng = SeedStream::new(seed).fork("sweep");
    let mut applied = 0;
    let mut bad = Vec::new();
    for i in 0..n {
        let text = &texts[rng.below(texts.len())];
        let (op, cfg) = random_case(&mut rng);
        let corpus = tokenize(text);
        let mut op_rng = SeedStream::for_example(seed, &i.to_string());
        match apply_operator(op, &corpus, lex, &cfg, &mut op_rng) {
            Ok(res) => {
                applied += res.applied as usize;
                for v in check(op, &corpus, &cfg, &res) {
                    bad.push(format!("#{i} {op} on {text:?}: {v}"));
                }
            }
            Err(e) => bad.push(format!("#{i} {op} on {text:?}: {e}")),
        }
    }
    (applied, bad)
}

pub fn sample_texts() -> Vec<String> {
    textmut::dataset::sample_captions().into_iter().map(|r| r.caption).collect()
}

pub fn perturbation(id: PerturbationId) -> OperatorId {
    OperatorId::Perturbation(id)
}
