//! Builds a bundle from the sample captions, trains the baseline detector
//! and prints the per-suite accuracy table.
//!
//! cargo run --release --example train_evaluate -- [individual|combined] [seed] [epochs]

use std::time::Instant;

use textmut::dataset::{build_bundle, sample_captions, PipelineConfig, TextMode};
use textmut::detector::{train_from_bundle, Hyperparams};
use textmut::eval::{evaluate_bundle, render_report, ReportFormat};
use textmut::Lexicon;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let mode: TextMode = args.next().as_deref().unwrap_or("individual").parse()?;
    let seed: u64 = args.next().as_deref().unwrap_or("7").parse()?;
    let epochs: u32 = args.next().as_deref().unwrap_or("5").parse()?;

    let start = Instant::now();
    let cfg = PipelineConfig {
        seed,
        mode,
        ..Default::default()
    };
    let bundle = build_bundle(&sample_captions(), &Lexicon::bundled(), &cfg)?;
    println!(
        "bundle: {} train / {} valid / {} test examples ({:.1?})",
        bundle.train.len(),
        bundle.valid.len(),
        bundle.test.len(),
        start.elapsed()
    );

    let hp = Hyperparams {
        epochs,
        ..Default::default()
    };
    let model = train_from_bundle(&bundle, &hp, seed)?;
    println!("train accuracy {:.4} ({:.1?})", model.manifest.train_accuracy, start.elapsed());

    let report = evaluate_bundle(&model, &bundle);
    print!("\n{}", render_report(&report, ReportFormat::Table));
    Ok(())
}
