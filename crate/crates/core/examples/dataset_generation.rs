//! Builds a labeled dataset bundle and writes it to a directory.
//!
//! cargo run --release --example dataset_generation -- OUT_DIR [CAPTIONS.jsonl]

use textmut::dataset::{build_bundle, ingest_file, sample_captions, with_workers, DatasetBundle, PipelineConfig, TextMode};
use textmut::Lexicon;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out = args.next().ok_or("usage: dataset_generation OUT_DIR [CAPTIONS.jsonl]")?;
    let records = match args.next() {
        Some(path) => ingest_file(path)?,
        None => sample_captions(),
    };
    let cfg = PipelineConfig {
        seed: 7,
        mode: TextMode::Individual,
        ..Default::default()
    };
    let lex = Lexicon::bundled();
    let bundle = with_workers(4, || build_bundle(&records, &lex, &cfg))??;
    bundle.write(&out)?;

    let back = DatasetBundle::read(&out)?;
    println!("{} records -> {} texts", records.len(), back.manifest.counts.texts);
    println!("train {} / valid {} / test {}", back.train.len(), back.valid.len(), back.test.len());
    for s in &back.suites {
        println!("  suite {:<16} {}", s.name, s.examples.len());
    }
    println!("checksum {}", back.manifest.checksum);
    for ex in back.train.iter().take(4) {
        println!("{}", serde_json::to_string(ex)?);
    }
    Ok(())
}
