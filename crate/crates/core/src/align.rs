//! Candidate generation, clue scoring and graph-based propagation.
//!
//! Every source node `c` may only align to target nodes whose burst period
//! intersects its own (`Cand(c)`). Each candidate pair carries four clues:
//!
//! * pronunciation `Sp`: normalized edit distance between the romanized
//!   source word and the target word (or its closest part);
//! * translation `St`: character LCS between the source word and lexicon
//!   translations of the target word (or concatenations of its parts);
//! * neighbor `Sn`: how well the neighbors of `c` are already aligned to
//!   neighbors of `e`;
//! * co-burst `Sb`: overlap of the two words' burst sequences.
//!
//! `Sp`, `St` and `Sb` are fixed per pair. `Sn` couples pairs together, so
//! scores are refined by synchronous rounds until the iteration budget is
//! spent.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;

use crate::binet::{BINet, BurstElement, NeighborNorm, NodeId};
use crate::burst::{BurstPeriod, BurstSequence};
use crate::lexicon::{RomanizationTable, SeedAlignment, SeedLexicon};
use crate::text::{lcs_len, levenshtein};
use crate::{Error, Result};

/// Interval index over the burst periods of a target network.
#[derive(Clone, Debug)]
pub struct CandidateIndex {
    /// Sorted by (start, word, end).
    by_start: Vec<(usize, NodeId)>,
    ends: Vec<usize>,
    max_len: usize,
}

impl CandidateIndex {
    pub fn new(target: &BINet) -> Self {
        let mut ids: Vec<NodeId> = target.node_ids().collect();
        ids.sort_by(|&a, &b| {
            let (x, y) = (target.node(a), target.node(b));
            x.period
                .start
                .cmp(&y.period.start)
                .then_with(|| x.word.cmp(&y.word))
                .then_with(|| x.period.end.cmp(&y.period.end))
        });
        let by_start: Vec<(usize, NodeId)> = ids
            .iter()
            .map(|&id| (target.node(id).period.start, id))
            .collect();
        let ends = ids.iter().map(|&id| target.node(id).period.end).collect();
        let max_len = target
            .nodes()
            .iter()
            .map(|n| n.period.len())
            .max()
            .unwrap_or(0);
        CandidateIndex {
            by_start,
            ends,
            max_len,
        }
    }

    /// Target nodes whose period intersects `period`, by start then word.
    pub fn query(&self, period: BurstPeriod) -> impl Iterator<Item = NodeId> + '_ {
        let earliest = period.start.saturating_sub(self.max_len.saturating_sub(1));
        let lo = self.by_start.partition_point(|&(s, _)| s < earliest);
        let hi = self.by_start.partition_point(|&(s, _)| s <= period.end);
        (lo..hi.max(lo))
            .filter(move |&i| self.ends[i] >= period.start)
            .map(move |i| self.by_start[i].1)
    }
}

/// `Cand(c)`: target elements whose burst period intersects that of `c`.
pub fn candidates(source: &BINet, target: &BINet, c: &BurstElement) -> Result<Vec<BurstElement>> {
    if source.id_of(c).is_none() {
        return Err(Error::UnknownNode(c.to_string()));
    }
    Ok(CandidateIndex::new(target)
        .query(c.period)
        .map(|e| target.node(e).clone())
        .collect())
}

/// `Sp` as a function of the normalized edit distance.
pub fn pronunciation_clue(normalized_distance: f64) -> f64 {
    if normalized_distance <= 0.25 {
        3.0
    } else if normalized_distance <= 0.5 {
        1.0 + 1.0 / (2.0 * normalized_distance)
    } else {
        0.0
    }
}

/// Smallest normalized edit distance between `romanized` and any
/// whitespace-separated part of `target_word` (lowercased).
pub fn normalized_edit_distance(romanized: &str, target_word: &str) -> Option<f64> {
    target_word
        .to_lowercase()
        .split_whitespace()
        .map(|part| levenshtein(romanized, part) as f64 / part.chars().count() as f64)
        .min_by(f64::total_cmp)
}

pub fn score_pronunciation(c_word: &str, e_word: &str, table: &RomanizationTable) -> f64 {
    let romanized = table.romanize(c_word);
    if romanized.is_empty() {
        return 0.0;
    }
    normalized_edit_distance(&romanized, e_word).map_or(0.0, pronunciation_clue)
}

/// `St` as a function of the LCS ratio `r = LCS(c, c*) / len(c)`.
pub fn translation_clue(ratio: f64) -> f64 {
    if ratio >= 0.75 {
        2.0
    } else if ratio >= 0.5 {
        1.0 / (2.0 * (1.0 - ratio))
    } else {
        0.0
    }
}

pub const DEFAULT_MAX_COMBINATIONS: usize = 64;

/// Source-language renderings `C(e)` of a target word: its own lexicon
/// translations plus, for multi-word targets, concatenations of one
/// translation per translatable part in part order.
///
/// When the full product exceeds `max_combinations`, parts are combined
/// with a beam that keeps the partial strings sharing the longest
/// subsequence with `c_word`.
pub fn target_renderings(
    c_word: &str,
    e_word: &str,
    lexicon: &SeedLexicon,
    max_combinations: usize,
) -> Vec<String> {
    let lowered = e_word.to_lowercase();
    let mut out: Vec<String> = lexicon
        .sources_of(&lowered)
        .map(|s| s.iter().cloned().collect())
        .unwrap_or_default();
    let parts: Vec<&str> = lowered.split_whitespace().collect();
    if parts.len() < 2 {
        return out;
    }
    let per_part: Vec<Vec<&String>> = parts
        .iter()
        .filter_map(|p| lexicon.sources_of(p))
        .map(|s| s.iter().collect())
        .collect();
    if per_part.is_empty() {
        return out;
    }
    let cap = max_combinations.max(1);
    let mut partial: Vec<String> = vec![String::new()];
    for options in &per_part {
        let mut next: Vec<String> = Vec::with_capacity(partial.len() * options.len());
        for prefix in &partial {
            for opt in options {
                next.push(format!("{prefix}{opt}"));
            }
        }
        if next.len() > cap {
            let mut ranked: Vec<(usize, String)> =
                next.into_iter().map(|s| (lcs_len(c_word, &s), s)).collect();
            ranked.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
            ranked.truncate(cap);
            next = ranked.into_iter().map(|(_, s)| s).collect();
        }
        partial = next;
    }
    out.extend(partial);
    out.sort();
    out.dedup();
    out
}

pub fn score_translation(c_word: &str, e_word: &str, lexicon: &SeedLexicon) -> f64 {
    score_translation_with(c_word, e_word, lexicon, DEFAULT_MAX_COMBINATIONS)
}

pub fn score_translation_with(
    c_word: &str,
    e_word: &str,
    lexicon: &SeedLexicon,
    max_combinations: usize,
) -> f64 {
    let len = c_word.chars().count();
    if len == 0 {
        return 0.0;
    }
    let best = target_renderings(c_word, e_word, lexicon, max_combinations)
        .iter()
        .map(|r| lcs_len(c_word, r))
        .max();
    match best {
        Some(l) => translation_clue(l as f64 / len as f64),
        None => 0.0,
    }
}

/// `Sb = s_c . s_e / (|s_c|^2 + |s_e|^2)` over binary burst vectors.
pub fn score_coburst(a: &[bool], b: &[bool]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let dot = a.iter().zip(b).filter(|(&x, &y)| x && y).count();
    let norms = a.iter().filter(|&&x| x).count() + b.iter().filter(|&&y| y).count();
    if norms == 0 {
        return Ok(0.0);
    }
    Ok(dot as f64 / norms as f64)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScoreParams {
    /// Weight of the pronunciation clue.
    pub eta: f64,
    /// Weight of the translation clue.
    pub lambda: f64,
    /// Weight of the neighbor clue.
    pub gamma: f64,
    /// Weight of the co-burst clue.
    pub delta: f64,
    /// Cap on `gamma * Sn`.
    pub sn_max: f64,
    pub iterations: usize,
    /// Mass spread uniformly over `Cand(c)` at initialization.
    pub init_mass: f64,
    /// Ceiling for non-seed scores; seeds sit at exactly 1.
    pub cap: f64,
    pub neighbor_norm: NeighborNorm,
    pub max_combinations: usize,
    /// Stop early once no score moves by more than this.
    pub convergence_tol: Option<f64>,
}

impl Default for ScoreParams {
    fn default() -> Self {
        ScoreParams {
            eta: 0.25,
            lambda: 0.3,
            gamma: 0.5,
            delta: 0.2,
            sn_max: 0.4,
            iterations: 20,
            init_mass: 0.5,
            cap: 0.99,
            neighbor_norm: NeighborNorm::Source,
            max_combinations: DEFAULT_MAX_COMBINATIONS,
            convergence_tol: None,
        }
    }
}

impl ScoreParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eta", self.eta),
            ("lambda", self.lambda),
            ("gamma", self.gamma),
            ("delta", self.delta),
            ("sn_max", self.sn_max),
            ("init_mass", self.init_mass),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be >= 0, got {v}")));
            }
        }
        if !(self.cap > 0.0 && self.cap < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "cap must lie in (0, 1), got {}",
                self.cap
            )));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidParameter("iterations must be >= 1".into()));
        }
        Ok(())
    }
}

/// `eta*Sp + lambda*St + min(gamma*Sn, sn_max) + delta*Sb`.
pub fn combined_score(sp: f64, st: f64, sn: f64, sb: f64, params: &ScoreParams) -> f64 {
    params.eta * sp + params.lambda * st + (params.gamma * sn).min(params.sn_max) + params.delta * sb
}

/// Credibility scores of all candidate pairs.
///
/// Pairs are stored per source node, ordered by target node id.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreTable {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    scores: Vec<f64>,
    fixed: Vec<bool>,
    pair_source: Vec<NodeId>,
    round_deltas: Vec<f64>,
}

impl ScoreTable {
    fn range(&self, c: NodeId) -> std::ops::Range<usize> {
        self.offsets[c.index()]..self.offsets[c.index() + 1]
    }

    pub fn num_sources(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn num_pairs(&self) -> usize {
        self.targets.len()
    }

    /// Candidates of `c`, by target node id.
    pub fn candidates(&self, c: NodeId) -> &[NodeId] {
        &self.targets[self.range(c)]
    }

    fn slot(&self, c: NodeId, e: NodeId) -> Option<usize> {
        let r = self.range(c);
        self.targets[r.clone()]
            .binary_search(&e)
            .ok()
            .map(|i| r.start + i)
    }

    /// Current score of `(c, e)`; `None` when `e` is not a candidate of `c`.
    pub fn score(&self, c: NodeId, e: NodeId) -> Option<f64> {
        self.slot(c, e).map(|k| self.scores[k])
    }

    pub fn is_fixed(&self, c: NodeId, e: NodeId) -> bool {
        self.slot(c, e).is_some_and(|k| self.fixed[k])
    }

    /// True when any pair of `c` is a seed.
    pub fn has_seed(&self, c: NodeId) -> bool {
        self.fixed[self.range(c)].iter().any(|&f| f)
    }

    /// `(source, target, score, fixed)` for every pair.
    pub fn iter(&self) -> impl Iterator<Item = (NodeId, NodeId, f64, bool)> + '_ {
        (0..self.targets.len()).map(move |k| {
            (
                self.pair_source[k],
                self.targets[k],
                self.scores[k],
                self.fixed[k],
            )
        })
    }

    /// Largest absolute score change of each completed round.
    pub fn round_deltas(&self) -> &[f64] {
        &self.round_deltas
    }

    pub fn rounds(&self) -> usize {
        self.round_deltas.len()
    }

    /// Candidates of `c` with their scores, best first; ties go to the
    /// earlier period start, then the smaller word.
    pub fn ranked_candidates<'a>(
        &'a self,
        c: NodeId,
        target: &'a BINet,
    ) -> Vec<(NodeId, f64)> {
        let r = self.range(c);
        let mut v: Vec<(NodeId, f64)> = r.map(|k| (self.targets[k], self.scores[k])).collect();
        v.sort_by(|a, b| better_target(target, *a, *b));
        v
    }
}

fn better_target(target: &BINet, a: (NodeId, f64), b: (NodeId, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then_with(|| {
        let (x, y) = (target.node(a.0), target.node(b.0));
        x.period
            .start
            .cmp(&y.period.start)
            .then_with(|| x.word.cmp(&y.word))
            .then_with(|| a.0.cmp(&b.0))
    })
}

/// Everything propagation reads.
#[derive(Clone, Copy)]
pub struct DecipherInput<'a> {
    pub source: &'a BINet,
    pub target: &'a BINet,
    pub seeds: &'a SeedAlignment,
    pub lexicon: &'a SeedLexicon,
    pub romanization: &'a RomanizationTable,
    /// Word-level burst sequences of the source stream.
    pub source_sequences: &'a BTreeMap<String, BurstSequence>,
    /// Word-level burst sequences of the target stream.
    pub target_sequences: &'a BTreeMap<String, BurstSequence>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct StaticClues {
    sp: f64,
    st: f64,
    sb: f64,
}

/// Iterative decipherment state.
pub struct Decipherer<'a> {
    input: DecipherInput<'a>,
    params: ScoreParams,
    table: ScoreTable,
    clues: Vec<StaticClues>,
}

impl<'a> Decipherer<'a> {
    /// Build the candidate table, pin seeds at 1, spread `init_mass` over
    /// the remaining candidates and cache the static clues.
    pub fn new(input: DecipherInput<'a>, params: ScoreParams) -> Result<Self> {
        params.validate()?;
        let DecipherInput { source, target, .. } = input;
        let index = CandidateIndex::new(target);

        let mut offsets = Vec::with_capacity(source.num_nodes() + 1);
        let mut targets = Vec::new();
        let mut pair_source = Vec::new();
        offsets.push(0);
        for c in source.node_ids() {
            let mut cand: Vec<NodeId> = index.query(source.node(c).period).collect();
            cand.sort_unstable();
            pair_source.extend(std::iter::repeat_n(c, cand.len()));
            targets.extend(cand);
            offsets.push(targets.len());
        }
        let n = targets.len();
        let mut table = ScoreTable {
            offsets,
            targets,
            scores: vec![0.0; n],
            fixed: vec![false; n],
            pair_source,
            round_deltas: Vec::new(),
        };

        for (c, e) in input.seeds.iter() {
            if c.index() >= source.num_nodes() || e.index() >= target.num_nodes() {
                return Err(Error::InvalidParameter(format!(
                    "seed ({}, {}) is out of range",
                    c.0, e.0
                )));
            }
            let k = table.slot(c, e).ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "seed {} -> {} has no overlapping burst period",
                    source.node(c),
                    target.node(e)
                ))
            })?;
            table.fixed[k] = true;
        }
        for c in source.node_ids() {
            let r = table.range(c);
            if r.is_empty() {
                continue;
            }
            let init = params.init_mass / r.len() as f64;
            for k in r {
                table.scores[k] = if table.fixed[k] { 1.0 } else { init };
            }
        }

        let clues = (0..n)
            .into_par_iter()
            .map(|k| static_clues(&input, &params, table.pair_source[k], table.targets[k]))
            .collect::<Result<Vec<_>>>()?;

        Ok(Decipherer {
            input,
            params,
            table,
            clues,
        })
    }

    pub fn table(&self) -> &ScoreTable {
        &self.table
    }

    pub fn into_table(self) -> ScoreTable {
        self.table
    }

    pub fn params(&self) -> &ScoreParams {
        &self.params
    }

    /// The fixed clues `(Sp, St, Sb)` of pair `(c, e)`. Clues whose weight is
    /// zero are not computed and read as 0.
    pub fn static_clues(&self, c: NodeId, e: NodeId) -> Option<(f64, f64, f64)> {
        self.table.slot(c, e).map(|k| {
            let s = self.clues[k];
            (s.sp, s.st, s.sb)
        })
    }

    /// `Sn(c, e)` against the current table.
    pub fn neighbor_score(&self, c: NodeId, e: NodeId) -> f64 {
        neighbor_score(
            self.input.source,
            self.input.target,
            &self.table,
            c,
            e,
            self.params.neighbor_norm,
        )
    }

    fn updated(&self, k: usize) -> f64 {
        if self.table.fixed[k] {
            return 1.0;
        }
        let s = self.clues[k];
        let sn = if self.params.gamma > 0.0 {
            self.neighbor_score(self.table.pair_source[k], self.table.targets[k])
        } else {
            0.0
        };
        combined_score(s.sp, s.st, sn, s.sb, &self.params).min(self.params.cap)
    }

    fn commit(&mut self, next: Vec<f64>) -> f64 {
        let delta = self
            .table
            .scores
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        self.table.scores = next;
        self.table.round_deltas.push(delta);
        delta
    }

    /// One synchronous round: every new score is computed from the previous
    /// table, then all are applied at once. Returns the largest change.
    pub fn step(&mut self) -> f64 {
        let next: Vec<f64> = (0..self.table.num_pairs())
            .into_par_iter()
            .map(|k| self.updated(k))
            .collect();
        self.commit(next)
    }

    /// Sequential round visiting pairs in `order` (a permutation of pair
    /// slots). Produces the same table as [`step`](Self::step).
    pub fn step_in_order(&mut self, order: &[usize]) -> Result<f64> {
        let n = self.table.num_pairs();
        let mut seen = vec![false; n];
        if order.len() != n || order.iter().any(|&k| k >= n || std::mem::replace(&mut seen[k], true)) {
            return Err(Error::InvalidParameter(
                "evaluation order must be a permutation of pair slots".into(),
            ));
        }
        let mut next = vec![0.0; n];
        for &k in order {
            next[k] = self.updated(k);
        }
        Ok(self.commit(next))
    }

    /// Run up to `iterations` rounds, stopping early when a convergence
    /// tolerance is configured and met.
    pub fn run(&mut self) {
        for _ in 0..self.params.iterations {
            let delta = self.step();
            if self.params.convergence_tol.is_some_and(|tol| delta < tol) {
                break;
            }
        }
    }
}

fn static_clues(
    input: &DecipherInput<'_>,
    params: &ScoreParams,
    c: NodeId,
    e: NodeId,
) -> Result<StaticClues> {
    let c_word = &input.source.node(c).word;
    let e_word = &input.target.node(e).word;
    let sp = if params.eta > 0.0 {
        score_pronunciation(c_word, e_word, input.romanization)
    } else {
        0.0
    };
    let st = if params.lambda > 0.0 {
        score_translation_with(c_word, e_word, input.lexicon, params.max_combinations)
    } else {
        0.0
    };
    let sb = if params.delta > 0.0 {
        match (
            input.source_sequences.get(c_word),
            input.target_sequences.get(e_word),
        ) {
            (Some(a), Some(b)) => score_coburst(&a.states, &b.states)?,
            _ => 0.0,
        }
    } else {
        0.0
    };
    Ok(StaticClues { sp, st, sb })
}

/// `Sn(c, e) = sum_{c' in N(c)} w(c,c') * max_{e' in N(e)} Score(c', e')`,
/// where pairs outside the candidate table score 0.
pub fn neighbor_score(
    source: &BINet,
    target: &BINet,
    table: &ScoreTable,
    c: NodeId,
    e: NodeId,
    norm: NeighborNorm,
) -> f64 {
    let e_neighbors = target.neighbors(e);
    if e_neighbors.is_empty() {
        return 0.0;
    }
    let mut total = 0.0;
    for (c2, w) in source.normalized_neighbors(c, norm) {
        let best = e_neighbors
            .iter()
            .filter_map(|&(e2, _)| table.score(c2, e2))
            .fold(0.0, f64::max);
        total += w * best;
    }
    total
}

/// Initialize and run propagation for `params.iterations` rounds.
pub fn decipher(input: DecipherInput<'_>, params: &ScoreParams) -> Result<ScoreTable> {
    let mut d = Decipherer::new(input, params.clone())?;
    d.run();
    Ok(d.into_table())
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlignedPair {
    pub source: BurstElement,
    pub target: BurstElement,
    pub score: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct WordTranslation {
    pub source_word: String,
    pub target_word: String,
    pub score: f64,
}

/// Ranked node pairs plus word-level translations.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct AlignmentResult {
    pub pairs: Vec<AlignedPair>,
    pub words: Vec<WordTranslation>,
}

impl AlignmentResult {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Pairs TSV: `source_word, src_start, src_end, target_word, tgt_start,
    /// tgt_end, score`, tab separated, in rank order.
    pub fn write_pairs<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for p in &self.pairs {
            writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                p.source.word,
                p.source.period.start,
                p.source.period.end,
                p.target.word,
                p.target.period.start,
                p.target.period.end,
                p.score
            )?;
        }
        Ok(())
    }

    /// Word-translation TSV: `source_word<TAB>target_word<TAB>score`.
    pub fn write_words<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for w in &self.words {
            writeln!(out, "{}\t{}\t{}", w.source_word, w.target_word, w.score)?;
        }
        Ok(())
    }

    /// Read a pairs TSV written by [`write_pairs`](Self::write_pairs).
    pub fn read_pairs<R: BufRead>(reader: R, name: &str) -> Result<Vec<AlignedPair>> {
        let mut pairs = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|e| Error::parse(name, lineno, e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.trim_end_matches('\r').split('\t').collect();
            if f.len() != 7 {
                return Err(Error::parse(name, lineno, "expected 7 tab-separated fields"));
            }
            let num = |s: &str| {
                s.parse::<usize>()
                    .map_err(|e| Error::parse(name, lineno, format!("{s:?}: {e}")))
            };
            let (ss, se, ts, te) = (num(f[1])?, num(f[2])?, num(f[4])?, num(f[5])?);
            if ss > se || ts > te {
                return Err(Error::parse(name, lineno, "period start after end"));
            }
            let score = f[6]
                .parse::<f64>()
                .map_err(|e| Error::parse(name, lineno, format!("{:?}: {e}", f[6])))?;
            pairs.push(AlignedPair {
                source: BurstElement::new(f[0], ss, se),
                target: BurstElement::new(f[3], ts, te),
                score,
            });
        }
        Ok(pairs)
    }
}

fn rank_pairs(pairs: &mut [AlignedPair]) {
    pairs.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.source.cmp(&b.source))
            .then_with(|| a.target.cmp(&b.target))
    });
}

/// Best candidate of every non-seeded source node, ranked by score; the top
/// `k` are kept (all when `k` is `None`). Word translations are attached for
/// every source word that has candidates.
pub fn extract_pairs(
    table: &ScoreTable,
    source: &BINet,
    target: &BINet,
    k: Option<usize>,
) -> AlignmentResult {
    let mut pairs: Vec<AlignedPair> = source
        .node_ids()
        .filter(|&c| !table.has_seed(c))
        .filter_map(|c| {
            table
                .ranked_candidates(c, target)
                .first()
                .map(|&(e, score)| AlignedPair {
                    source: source.node(c).clone(),
                    target: target.node(e).clone(),
                    score,
                })
        })
        .collect();
    rank_pairs(&mut pairs);
    if let Some(k) = k {
        pairs.truncate(k);
    }
    AlignmentResult {
        pairs,
        words: translate_all_words(table, source, target),
    }
}

fn best_for_word(
    word: &str,
    table: &ScoreTable,
    source: &BINet,
    target: &BINet,
) -> Option<(NodeId, f64)> {
    source
        .nodes_of_word(word)
        .filter_map(|c| table.ranked_candidates(c, target).first().copied())
        .fold(None, |best, cand| match best {
            Some(b) if better_target(target, b, cand) != Ordering::Greater => Some(b),
            _ => Some(cand),
        })
}

/// `w* = w(argmax_e max_{c in V(w)} Score(c, e))`.
pub fn translate_word(
    word: &str,
    table: &ScoreTable,
    source: &BINet,
    target: &BINet,
) -> Option<(String, f64)> {
    best_for_word(word, table, source, target).map(|(e, s)| (target.node(e).word.clone(), s))
}

/// Translations of every source word with at least one candidate, ranked by
/// score then source word.
pub fn translate_all_words(table: &ScoreTable, source: &BINet, target: &BINet) -> Vec<WordTranslation> {
    let mut words: Vec<&str> = source.nodes().iter().map(|n| n.word.as_str()).collect();
    words.dedup();
    let mut out: Vec<WordTranslation> = words
        .into_iter()
        .filter_map(|w| {
            translate_word(w, table, source, target).map(|(t, score)| WordTranslation {
                source_word: w.to_string(),
                target_word: t,
                score,
            })
        })
        .collect();
    out.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.source_word.cmp(&b.source_word))
    });
    out
}

/// Merge ranked pair lists, keeping the highest score for each
/// (source word, target word).
pub fn merge_results(parts: impl IntoIterator<Item = AlignmentResult>) -> AlignmentResult {
    let mut pairs: BTreeMap<(String, String), AlignedPair> = BTreeMap::new();
    let mut words: BTreeMap<String, WordTranslation> = BTreeMap::new();
    for part in parts {
        for p in part.pairs {
            let key = (p.source.word.clone(), p.target.word.clone());
            match pairs.get(&key) {
                Some(old) if old.score >= p.score => {}
                _ => {
                    pairs.insert(key, p);
                }
            }
        }
        for w in part.words {
            match words.get(&w.source_word) {
                Some(old) if old.score >= w.score => {}
                _ => {
                    words.insert(w.source_word.clone(), w);
                }
            }
        }
    }
    let mut pairs: Vec<AlignedPair> = pairs.into_values().collect();
    rank_pairs(&mut pairs);
    let mut words: Vec<WordTranslation> = words.into_values().collect();
    words.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.source_word.cmp(&b.source_word))
    });
    AlignmentResult { pairs, words }
}
