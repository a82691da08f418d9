//! Burst information networks over coordinated text streams.
//!
//! The crate detects per-word bursts in two timestamped token streams, links
//! co-bursting words into weighted graphs, and aligns the nodes of a source
//! graph to the nodes of a target graph by propagating credibility scores from
//! a small set of anchor pairs.
//!
//! Pipeline stages, in order:
//!
//! 1. [`corpus`]: ingest streams and compute word probability series.
//! 2. [`burst`]: optimal two-state burst sequences and burst periods.
//! 3. [`binet`]: the burst information network of one stream.
//! 4. [`lexicon`]: seed lexicon, romanization and seed alignments.
//! 5. [`align`]: candidate generation, clue scoring and propagation.
//! 6. [`eval`]: synthetic coordinated streams, accuracy and split/merge runs.
//!
//! [`pipeline`] wires the stages together and [`config`] holds the flat
//! `key=value` run configuration used by the CLI.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod align;
pub mod binet;
pub mod burst;
pub mod config;
pub mod corpus;
mod error;
pub mod eval;
pub mod lexicon;
pub mod pipeline;
pub mod text;

pub use error::{Error, Result};

pub use align::{AlignedPair, AlignmentResult, ScoreParams, ScoreTable, WordTranslation};
pub use binet::{BINet, BurstElement, NeighborNorm, NodeId};
pub use burst::{BurstParams, BurstPeriod, BurstSequence};
pub use config::PipelineConfig;
pub use corpus::{Document, Granularity, Stream, WordStats};
pub use eval::{GoldTable, SynthConfig};
pub use lexicon::{RomanizationTable, SeedAlignment, SeedLexicon, UniversalClass};
