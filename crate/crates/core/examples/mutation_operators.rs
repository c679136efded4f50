//! The six word- and character-level operators plus randomization, run on
//! one sentence with the small fixture lexicon.
//!
//! cargo run --example mutation_operators -- [seed]

use textmut::mutation::{apply_operator, randomize, MutationConfig, OperatorId, RandomizeMode};
use textmut::{tokenize, Lexicon, SeedStream};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed: u64 = std::env::args().nth(1).as_deref().unwrap_or("0").parse()?;
    let lex = Lexicon::fixture();
    let text = tokenize("Please share and like the video");
    // rate 1.0 selects every eligible word
    let cfg = MutationConfig::default().with_rate(1.0);

    for op in OperatorId::CORE {
        let mut rng = SeedStream::new(seed);
        let res = apply_operator(op, &text, &lex, &cfg, &mut rng)?;
        println!("{:<16} {}", op.name(), res.text());
        for e in &res.edits {
            println!(
                "{:<16}   #{} {:?} -> {:?}",
                "",
                e.position,
                e.original,
                e.replacement.as_deref().unwrap_or("(deleted)")
            );
        }
    }

    let stacked = MutationConfig {
        randomize_mode: RandomizeMode::Stacked,
        rate: 0.5,
        ..MutationConfig::default()
    };
    let res = randomize(&text, &Lexicon::bundled(), &stacked, &mut SeedStream::new(seed))?;
    let ops: Vec<_> = res.operators().iter().map(|o| o.name()).collect();
    println!("stacked {:?}: {}", ops, res.text());
    Ok(())
}
