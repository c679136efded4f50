//! Loading a lexicon directory and querying it.
//!
//! cargo run --example lexicon -- [DIR]

use textmut::lexicon::{Relation, DEFAULT_CAP};
use textmut::{Lexicon, SeedStream};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lex = match std::env::args().nth(1) {
        Some(dir) => Lexicon::load_dir(dir, DEFAULT_CAP)?,
        None => Lexicon::bundled(),
    };
    println!(
        "{} common words, {} synonym keys, {} antonym keys, {} misspelling keys",
        lex.common_words().len(),
        lex.synonyms().len(),
        lex.antonyms().len(),
        lex.misspellings().len()
    );
    println!("fingerprint {}", lex.fingerprint());

    for word in ["Street", "large", "the", "kitchen"] {
        println!(
            "{word:<8} synonyms {:?} antonyms {:?} misspellings {:?} article {}",
            lex.lookup(Relation::Synonym, word),
            lex.lookup(Relation::Antonym, word),
            lex.lookup(Relation::Misspelling, word),
            lex.is_article(word)
        );
    }
    println!("keys next to 'g': {:?}", lex.neighbors('g'));

    let mut rng = SeedStream::new(1);
    let picks: Vec<&str> = (0..5).map(|_| lex.sample_common_word(&mut rng, "dog")).collect::<Result<_, _>>()?;
    println!("random common words: {picks:?}");
    Ok(())
}
