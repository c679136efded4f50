//! Close-ended, seeded mutation-based text generation.
//!
//! `textmut` turns human-written text into slightly altered copies under
//! tight control: the output is fully determined by the input text, the
//! operator, its configuration and a 64-bit seed. Around the operators sit
//! a labeled dataset pipeline and a small linear mutation detector for
//! measuring per-operator robustness.
//!
//! ```
//! use textmut::{corpus, mutation::{self, MutationConfig, OperatorId}, Lexicon, SeedStream};
//!
//! let lex = Lexicon::fixture();
//! let text = corpus::tokenize("Please share and like the video");
//! let cfg = MutationConfig::default().with_rate(1.0);
//! let out = mutation::apply_operator(OperatorId::DeleteArticles, &text, &lex, &cfg, &mut SeedStream::new(0))?;
//! assert_eq!(out.text(), "Please share and like video");
//! # Ok::<(), textmut::mutation::MutationError>(())
//! ```

pub mod cli;
pub mod corpus;
pub mod dataset;
pub mod detector;
pub mod eval;
pub mod io;
pub mod lexicon;
pub mod mutation;
pub mod perturbation;
pub mod rng;

pub use corpus::{detokenize, tokenize, TextCorpus};
pub use lexicon::Lexicon;
pub use mutation::{apply_operator, MutationConfig, MutationResult, OperatorId};
pub use perturbation::PerturbationId;
pub use rng::SeedStream;
