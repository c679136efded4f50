//! The character-level primitive: replace every occurrence of one character
//! in a chosen word, then put the text back together.

use textmut::corpus::{detokenize, tokenize, TextCorpus};
use textmut::mutation::apply_char_mutation;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let corpus = tokenize("Text generation is interesting!");
    for t in corpus.tokens() {
        println!("{:>5}  {:?}", if t.is_word() { "word" } else { "punct" }, t.text);
    }

    let target = corpus.words().iter().find(|w| w.text == "generation").expect("word present");
    let (mutated, changed) = apply_char_mutation(target, 'a', 'α');
    assert!(changed);

    let words = corpus
        .words()
        .iter()
        .map(|w| if w.position == target.position { mutated.clone() } else { w.clone() })
        .collect();
    let out = TextCorpus::from_parts(words, corpus.puncts().to_vec(), true);
    println!("{}", detokenize(&out)?);
    Ok(())
}
