//! Every perturbation type on the same text, with its catalogue entry.

use textmut::mutation::{apply_operator, MutationConfig, OperatorId};
use textmut::perturbation::list_perturbations;
use textmut::{tokenize, Lexicon, SeedStream};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lex = Lexicon::bundled();
    let text = tokenize("Please like and share");
    // force the middle two words
    let cfg = MutationConfig::default().with_targets([1, 2]);

    for info in list_perturbations() {
        let res = apply_operator(OperatorId::Perturbation(info.id), &text, &lex, &cfg, &mut SeedStream::new(3))?;
        println!("{} ({})", info.title, info.id);
        println!("  {}", info.definition);
        println!("  {:?}", res.text());
        println!("  countered by: {}", info.defense);
    }
    Ok(())
}
