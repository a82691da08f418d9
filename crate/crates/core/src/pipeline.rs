//! End-to-end runs: streams in, ranked alignments out.

use std::collections::BTreeMap;
use std::fmt;
use std::time::{Duration, Instant};

use crate::align::{extract_pairs, AlignmentResult, DecipherInput, Decipherer, ScoreParams, ScoreTable};
use crate::binet::BINet;
use crate::burst::{detect_all, periods_by_word, BurstParams, BurstPeriod, BurstSequence};
use crate::corpus::{vocabulary, Stream};
use crate::lexicon::{seed_alignments, RomanizationTable, SeedAlignment, SeedLexicon, UniversalMatcher};
use crate::Result;

/// Knobs shared by every stage of a run.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineSettings {
    pub burst: BurstParams,
    pub score: ScoreParams,
    pub min_count: u64,
    pub min_edge_weight: u32,
}

impl Default for PipelineSettings {
    fn default() -> Self {
        PipelineSettings {
            burst: BurstParams::default(),
            score: ScoreParams::default(),
            min_count: 1,
            min_edge_weight: 1,
        }
    }
}

/// Burst sequences, periods and network of one stream.
#[derive(Clone, Debug)]
pub struct StreamNetwork {
    pub sequences: BTreeMap<String, BurstSequence>,
    pub periods: BTreeMap<String, Vec<BurstPeriod>>,
    pub net: BINet,
    pub num_docs: usize,
}

pub fn build_network(
    stream: &Stream,
    base: Option<&Stream>,
    settings: &PipelineSettings,
) -> Result<StreamNetwork> {
    let words = vocabulary(stream, settings.min_count.max(1));
    let sequences = detect_all(stream, &words, &settings.burst, base)?;
    let periods = periods_by_word(&sequences);
    let net = BINet::build(stream, &periods, settings.min_edge_weight);
    Ok(StreamNetwork {
        sequences,
        periods,
        net,
        num_docs: stream.num_docs(),
    })
}

/// Borrowed inputs of a run.
#[derive(Clone, Copy)]
pub struct PipelineInputs<'a> {
    pub source: &'a Stream,
    pub target: &'a Stream,
    pub lexicon: &'a SeedLexicon,
    pub romanization: &'a RomanizationTable,
    pub matcher: &'a UniversalMatcher,
    /// Streams used to estimate base probabilities, when not the streams
    /// themselves.
    pub source_base: Option<&'a Stream>,
    pub target_base: Option<&'a Stream>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub source_nodes: usize,
    pub source_edges: usize,
    pub source_docs: usize,
    pub target_nodes: usize,
    pub target_edges: usize,
    pub target_docs: usize,
    pub seeds: usize,
    pub candidate_pairs: usize,
    pub round_deltas: Vec<f64>,
    pub wall_time: Duration,
}

impl fmt::Display for RunReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "stream\t#node\t#edge\t#doc")?;
        writeln!(
            f,
            "source\t{}\t{}\t{}",
            self.source_nodes, self.source_edges, self.source_docs
        )?;
        writeln!(
            f,
            "target\t{}\t{}\t{}",
            self.target_nodes, self.target_edges, self.target_docs
        )?;
        writeln!(f, "seeds\t{}", self.seeds)?;
        writeln!(f, "candidate_pairs\t{}", self.candidate_pairs)?;
        for (i, d) in self.round_deltas.iter().enumerate() {
            writeln!(f, "round\t{}\tmax_delta\t{:.6e}", i + 1, d)?;
        }
        writeln!(f, "wall_time_s\t{:.3}", self.wall_time.as_secs_f64())
    }
}

pub struct PipelineOutput {
    pub source: StreamNetwork,
    pub target: StreamNetwork,
    pub seeds: SeedAlignment,
    pub table: ScoreTable,
    /// Every non-seeded source node's best pair, ranked.
    pub result: AlignmentResult,
    pub report: RunReport,
}

/// Detect bursts, build both networks, seed and propagate.
pub fn run_pipeline(inputs: PipelineInputs<'_>, settings: &PipelineSettings) -> Result<PipelineOutput> {
    let started = Instant::now();
    settings.burst.validate()?;
    settings.score.validate()?;
    let (source, target) = rayon::join(
        || build_network(inputs.source, inputs.source_base, settings),
        || build_network(inputs.target, inputs.target_base, settings),
    );
    let (source, target) = (source?, target?);
    log::info!(
        "source network: {} nodes, {} edges; target network: {} nodes, {} edges",
        source.net.num_nodes(),
        source.net.num_edges(),
        target.net.num_nodes(),
        target.net.num_edges()
    );

    let seeds = seed_alignments(&source.net, &target.net, inputs.lexicon, inputs.matcher);
    log::info!("{} seed pairs", seeds.len());

    let input = DecipherInput {
        source: &source.net,
        target: &target.net,
        seeds: &seeds,
        lexicon: inputs.lexicon,
        romanization: inputs.romanization,
        source_sequences: &source.sequences,
        target_sequences: &target.sequences,
    };
    let mut decipherer = Decipherer::new(input, settings.score.clone())?;
    decipherer.run();
    let table = decipherer.into_table();
    let result = extract_pairs(&table, &source.net, &target.net, None);

    let report = RunReport {
        source_nodes: source.net.num_nodes(),
        source_edges: source.net.num_edges(),
        source_docs: source.num_docs,
        target_nodes: target.net.num_nodes(),
        target_edges: target.net.num_edges(),
        target_docs: target.num_docs,
        seeds: seeds.len(),
        candidate_pairs: table.num_pairs(),
        round_deltas: table.round_deltas().to_vec(),
        wall_time: started.elapsed(),
    };
    Ok(PipelineOutput {
        source,
        target,
        seeds,
        table,
        result,
        report,
    })
}
