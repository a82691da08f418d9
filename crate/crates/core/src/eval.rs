//! Evaluation: planted-truth synthetic streams, top-K accuracy and
//! split/merge decipherment.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::align::{merge_results, AlignmentResult};
use crate::corpus::{Document, Granularity, Stream};
use crate::lexicon::{RomanizationTable, SeedLexicon};
use crate::pipeline::{run_pipeline, PipelineInputs, PipelineSettings};
use crate::{Error, Result};

/// Acceptable target words per source word.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GoldTable {
    entries: BTreeMap<String, BTreeSet<String>>,
}

impl GoldTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, source: &str, target: &str) {
        self.entries
            .entry(source.to_string())
            .or_default()
            .insert(target.to_string());
    }

    /// Number of source words.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn accepts(&self, source: &str, target: &str) -> bool {
        self.entries.get(source).is_some_and(|t| t.contains(target))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &BTreeSet<String>)> {
        self.entries.iter().map(|(s, t)| (s.as_str(), t))
    }

    /// Gold TSV: `source_word<TAB>target_word`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let name = path.display().to_string();
        let mut gold = GoldTable::new();
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            match line.split_once('\t') {
                Some((s, t)) if !s.is_empty() && !t.is_empty() && !t.contains('\t') => {
                    gold.insert(s, t)
                }
                _ => {
                    return Err(Error::parse(
                        &name,
                        i + 1,
                        "expected source_word<TAB>target_word",
                    ))
                }
            }
        }
        Ok(gold)
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (s, ts) in &self.entries {
            for t in ts {
                writeln!(out, "{s}\t{t}")?;
            }
        }
        Ok(())
    }
}

/// Fraction of the top `k` ranked pairs whose target word is gold for their
/// source word. Fewer than `k` pairs shrink the denominator.
pub fn topk_accuracy(result: &AlignmentResult, gold: &GoldTable, k: usize) -> Result<f64> {
    topk_accuracy_of(
        result
            .pairs
            .iter()
            .map(|p| (p.source.word.as_str(), p.target.word.as_str())),
        gold,
        k,
    )
}

/// [`topk_accuracy`] over ranked `(source word, target word)` pairs.
pub fn topk_accuracy_of<'a>(
    ranked: impl IntoIterator<Item = (&'a str, &'a str)>,
    gold: &GoldTable,
    k: usize,
) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    let mut seen = 0usize;
    let mut correct = 0usize;
    for (s, t) in ranked.into_iter().take(k) {
        seen += 1;
        if gold.accepts(s, t) {
            correct += 1;
        }
    }
    if seen == 0 {
        return Err(Error::EmptyResult);
    }
    Ok(correct as f64 / seen as f64)
}

/// Run the pipeline on `[0, split_epoch)` and `[split_epoch, T)`
/// concurrently and merge the ranked pairs, keeping the best score per
/// (source word, target word).
///
/// Unless base streams are supplied, each half estimates base
/// probabilities from the whole stream it was cut from.
pub fn split_merge_decipher(
    inputs: PipelineInputs<'_>,
    split_epoch: usize,
    settings: &PipelineSettings,
) -> Result<AlignmentResult> {
    let t = inputs.source.num_epochs();
    if inputs.target.num_epochs() != t {
        return Err(Error::InvalidParameter(format!(
            "streams are not coordinated: {} vs {} epochs",
            t,
            inputs.target.num_epochs()
        )));
    }
    if split_epoch == 0 || split_epoch >= t {
        return Err(Error::InvalidParameter(format!(
            "split epoch {split_epoch} must lie in (0, {t})"
        )));
    }
    let halves = [
        (inputs.source.slice(0..split_epoch)?, inputs.target.slice(0..split_epoch)?),
        (inputs.source.slice(split_epoch..t)?, inputs.target.slice(split_epoch..t)?),
    ];
    let source_base = inputs.source_base.unwrap_or(inputs.source);
    let target_base = inputs.target_base.unwrap_or(inputs.target);
    let run = |(s, g): &(Stream, Stream)| {
        run_pipeline(
            PipelineInputs {
                source: s,
                target: g,
                source_base: Some(source_base),
                target_base: Some(target_base),
                ..inputs
            },
            settings,
        )
        .map(|out| out.result)
    };
    let (first, second) = rayon::join(|| run(&halves[0]), || run(&halves[1]));
    Ok(merge_results([first?, second?]))
}

/// Parameters of the synthetic coordinated-stream generator.
#[derive(Clone, Debug, PartialEq)]
pub struct SynthConfig {
    pub num_epochs: usize,
    pub n_topics: usize,
    /// Topical words per language per topic; planted pairs fill these slots
    /// first and the rest stay unpaired.
    pub words_per_topic: usize,
    pub n_planted_pairs: usize,
    /// Fraction of planted pairs whose translation goes into the lexicon.
    pub seed_fraction: f64,
    /// Background documents per epoch and stream.
    pub docs_per_epoch: usize,
    pub background_vocab_size: usize,
    pub rng_seed: u64,
    /// Shortest and longest topic episode, in epochs.
    pub episode_len: (usize, usize),
    /// Episodes keep this epoch and a two-epoch margin on each side free.
    pub avoid_epoch: Option<usize>,
    /// Shares of non-seed pairs recognizable by pronunciation and by
    /// translation; the remainder only shares context.
    pub transliterated_share: f64,
    pub compositional_share: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            num_epochs: 90,
            n_topics: 6,
            words_per_topic: 8,
            n_planted_pairs: 48,
            seed_fraction: 0.4,
            docs_per_epoch: 40,
            background_vocab_size: 300,
            rng_seed: 20100127,
            episode_len: (7, 10),
            avoid_epoch: None,
            transliterated_share: 0.4,
            compositional_share: 0.35,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(0.0..=1.0).contains(&self.seed_fraction) {
            return bad(format!("seed_fraction {} outside [0, 1]", self.seed_fraction));
        }
        for (name, v) in [
            ("num_epochs", self.num_epochs),
            ("n_topics", self.n_topics),
            ("words_per_topic", self.words_per_topic),
            ("n_planted_pairs", self.n_planted_pairs),
            ("docs_per_epoch", self.docs_per_epoch),
            ("background_vocab_size", self.background_vocab_size),
        ] {
            if v == 0 {
                return bad(format!("{name} must be >= 1"));
            }
        }
        if self.n_planted_pairs > self.n_topics * self.words_per_topic {
            return bad(format!(
                "{} planted pairs exceed topic capacity {} x {}",
                self.n_planted_pairs, self.n_topics, self.words_per_topic
            ));
        }
        let (lo, hi) = self.episode_len;
        if lo == 0 || lo > hi {
            return bad(format!("episode_len ({lo}, {hi}) is not a valid range"));
        }
        if hi + 6 > self.num_epochs {
            return bad(format!(
                "episodes of up to {hi} epochs do not fit in {} epochs",
                self.num_epochs
            ));
        }
        if let Some(a) = self.avoid_epoch {
            if a >= self.num_epochs {
                return bad(format!("avoid_epoch {a} outside the stream"));
            }
        }
        for (name, v) in [
            ("transliterated_share", self.transliterated_share),
            ("compositional_share", self.compositional_share),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return bad(format!("{name} {v} outside [0, 1]"));
            }
        }
        if self.transliterated_share + self.compositional_share > 1.0 + 1e-12 {
            return bad("transliterated_share + compositional_share exceeds 1".into());
        }
        Ok(())
    }
}

/// How a planted pair can be recognized besides its context.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PairKind {
    /// The target is a near-copy of the source romanization.
    Transliterated,
    /// The target is a phrase whose parts translate into most of the source
    /// word.
    Compositional,
    /// Only co-occurrence and co-burst evidence.
    Contextual,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlantedPair {
    pub source: String,
    pub target: String,
    pub topic: usize,
    pub kind: PairKind,
    pub seeded: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SynthReport {
    pub planted: Vec<PlantedPair>,
    /// Topic episodes as inclusive epoch ranges.
    pub episodes: Vec<(usize, usize)>,
    /// Non-seed planted pairs whose source word never shares a document
    /// with a seeded word of the same topic.
    pub missing_seeded_neighbor: Vec<String>,
}

impl SynthReport {
    pub fn self_check_passed(&self) -> bool {
        self.missing_seeded_neighbor.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct SynthDataset {
    pub source: Stream,
    pub target: Stream,
    pub lexicon: SeedLexicon,
    pub romanization: RomanizationTable,
    pub gold: GoldTable,
    pub report: SynthReport,
}

impl SynthDataset {
    /// Write `source.tsv`, `target.tsv`, `lexicon.tsv`, `romanization.tsv`,
    /// `gold.tsv` and a `pipeline.conf` that points at them.
    pub fn write_dir(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, f: &dyn Fn(&mut dyn Write) -> std::io::Result<()>| {
            let p = dir.join(name);
            let file = File::create(&p).map_err(|e| Error::io(&p, e))?;
            let mut out = std::io::BufWriter::new(file);
            f(&mut out).and_then(|_| out.flush()).map_err(|e| Error::io(&p, e))
        };
        write("source.tsv", &|w| self.source.write_to(w))?;
        write("target.tsv", &|w| self.target.write_to(w))?;
        write("lexicon.tsv", &|w| self.lexicon.write_to(w))?;
        write("romanization.tsv", &|w| self.romanization.write_to(w))?;
        write("gold.tsv", &|w| self.gold.write_to(w))?;
        write("pipeline.conf", &|w| {
            writeln!(
                w,
                "# generated dataset\nsource_corpus=source.tsv\ntarget_corpus=target.tsv\nlexicon=lexicon.tsv\nromanization=romanization.tsv\ngold=gold.tsv\noutput_dir=out"
            )
        })?;
        Ok(())
    }
}

const SYLLABLES: &[&str] = &[
    "ba", "bai", "ban", "bao", "bei", "ben", "bi", "bo", "bu", "ca", "cai", "ce", "chen", "chi",
    "da", "dai", "de", "di", "dong", "du", "fa", "fei", "fu", "ga", "gao", "ge", "gu", "ha",
    "hai", "he", "hu", "hua", "ji", "jia", "jin", "ka", "kai", "ke", "ku", "la", "lai", "lan",
    "li", "lian", "lin", "lu", "luo", "ma", "mai", "man", "mei", "mi", "mo", "na", "nai", "ni",
    "nuo", "ou", "pa", "pei", "pu", "qi", "qin", "sa", "sai", "sha", "shi", "si", "su", "ta",
    "tai", "te", "ti", "tu", "wa", "wei", "wen", "xi", "xia", "ya", "yi", "yu", "za", "zhe",
    "zhu", "zi",
];
const HOMOPHONES: u32 = 4;
const MIN_WINDOW: usize = 3;
const MAX_TRIM: usize = 3;
const CJK_BASE: u32 = 0x4E00;
const CONSONANTS: &[u8] = b"bcdfghklmnprstvz";
const VOWELS: &[u8] = b"aeiou";

struct Lexemes {
    rng: ChaCha8Rng,
    used_source: HashSet<String>,
    used_syllables: HashSet<Vec<usize>>,
    planted_chars: HashSet<char>,
    used_target: HashSet<String>,
}

impl Lexemes {
    fn char_of(syllable: usize, homophone: u32) -> char {
        char::from_u32(CJK_BASE + syllable as u32 * HOMOPHONES + homophone).expect("CJK block")
    }

    /// Fresh source word of `n` characters and its syllables. Planted words
    /// never share a character with each other.
    fn source_word(&mut self, n: usize, planted: bool) -> (String, Vec<usize>) {
        loop {
            let syl: Vec<usize> = (0..n).map(|_| self.rng.gen_range(0..SYLLABLES.len())).collect();
            let word: String = syl
                .iter()
                .map(|&s| Self::char_of(s, self.rng.gen_range(0..HOMOPHONES)))
                .collect();
            if self.used_syllables.contains(&syl) || self.used_source.contains(&word) {
                continue;
            }
            if planted && word.chars().any(|c| self.planted_chars.contains(&c)) {
                continue;
            }
            if planted {
                self.planted_chars.extend(word.chars());
            }
            self.used_syllables.insert(syl.clone());
            self.used_source.insert(word.clone());
            return (word, syl);
        }
    }

    fn fresh_target(&mut self, candidate: String) -> Option<String> {
        self.used_target.insert(candidate.clone()).then_some(candidate)
    }

    /// Fresh English-looking word.
    fn target_word(&mut self) -> String {
        loop {
            let len = self.rng.gen_range(5..=8);
            let w: String = (0..len)
                .map(|i| {
                    let set = if i % 2 == 0 { CONSONANTS } else { VOWELS };
                    set[self.rng.gen_range(0..set.len())] as char
                })
                .collect();
            if let Some(w) = self.fresh_target(w) {
                return w;
            }
        }
    }

    /// Romanization of `syl` with at most one edit, capitalized.
    fn transliteration(&mut self, syl: &[usize]) -> String {
        loop {
            let mut letters: Vec<u8> = syl.iter().flat_map(|&s| SYLLABLES[s].bytes()).collect();
            if letters.len() >= 6 && self.rng.gen_bool(0.6) {
                let i = self.rng.gen_range(1..letters.len());
                match self.rng.gen_range(0..3) {
                    0 => letters[i] = CONSONANTS[self.rng.gen_range(0..CONSONANTS.len())],
                    1 => {
                        letters.remove(i);
                    }
                    _ => letters.insert(i, VOWELS[self.rng.gen_range(0..VOWELS.len())]),
                }
            }
            letters[0] = letters[0].to_ascii_uppercase();
            let w = String::from_utf8(letters).expect("ascii");
            if let Some(w) = self.fresh_target(w) {
                return w;
            }
            // Collisions are rare; retry with a different edit.
        }
    }

    fn capitalize(w: &str) -> String {
        let mut c = w.chars();
        c.next()
            .map(|f| f.to_ascii_uppercase().to_string() + c.as_str())
            .unwrap_or_default()
    }
}

struct Topic {
    episode: (usize, usize),
    /// Indices into the planted pair list.
    pairs: Vec<usize>,
    /// Unpaired topical words per stream.
    extra_source: Vec<String>,
    extra_target: Vec<String>,
    /// Burst window of each member; pairs first, then extras.
    windows: Vec<(usize, usize)>,
    /// Members mentioned alongside each member.
    anchors: Vec<Vec<usize>>,
}

/// Generate two coordinated streams with planted translation pairs.
///
/// Each topic bursts in both streams during one episode. Inside an episode
/// every planted word heads one story document per day, accompanied by the
/// words of its anchor pairs (the topic hub plus one other member), so the
/// co-occurrence structure of the two streams mirrors each other. Seeds are
/// assigned round-robin over topics, hubs first, so every topic is anchored
/// once there are at least as many seeds as topics.
pub fn generate_coordinated(config: &SynthConfig) -> Result<SynthDataset> {
    config.validate()?;
    let stream_rng = |k: u64| {
        let mut r = ChaCha8Rng::seed_from_u64(config.rng_seed);
        r.set_stream(k);
        r
    };
    let mut structure = stream_rng(1);
    let mut lex = Lexemes {
        rng: stream_rng(2),
        used_source: HashSet::new(),
        used_syllables: HashSet::new(),
        planted_chars: HashSet::new(),
        used_target: HashSet::new(),
    };

    // Romanization table over the whole synthetic character inventory.
    let mut romanization = RomanizationTable::new();
    for (s, syl) in SYLLABLES.iter().enumerate() {
        for h in 0..HOMOPHONES {
            romanization.insert(&Lexemes::char_of(s, h).to_string(), syl)?;
        }
    }

    let background_source: Vec<String> = (0..config.background_vocab_size)
        .map(|_| lex.source_word(2, false).0)
        .collect();
    let background_target: Vec<String> = (0..config.background_vocab_size)
        .map(|_| lex.target_word())
        .collect();

    // Planted pairs round-robin over topics.
    let n_pairs = config.n_planted_pairs;
    let mut topic_of: Vec<usize> = (0..n_pairs).map(|i| i % config.n_topics).collect();
    topic_of.sort_unstable();

    // Seeding order: each topic's members shuffled, then interleaved.
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); config.n_topics];
    for (i, &t) in topic_of.iter().enumerate() {
        members[t].push(i);
    }
    for m in &mut members {
        m.shuffle(&mut structure);
    }
    let mut seed_order = Vec::with_capacity(n_pairs);
    for round in 0..config.words_per_topic {
        for m in &members {
            if let Some(&i) = m.get(round) {
                seed_order.push(i);
            }
        }
    }
    let n_seeds = (config.seed_fraction * n_pairs as f64).round() as usize;
    let seeded: HashSet<usize> = seed_order[..n_seeds].iter().copied().collect();

    // Kinds: decided for every pair independent of seeding.
    let mut kinds: Vec<PairKind> = (0..n_pairs)
        .map(|i| {
            let x = (i as f64 + 0.5) / n_pairs as f64;
            if x < config.transliterated_share {
                PairKind::Transliterated
            } else if x < config.transliterated_share + config.compositional_share {
                PairKind::Compositional
            } else {
                PairKind::Contextual
            }
        })
        .collect();
    kinds.shuffle(&mut structure);

    let mut lexicon = SeedLexicon::new();
    let mut planted = Vec::with_capacity(n_pairs);
    for i in 0..n_pairs {
        let kind = kinds[i];
        // Unrelated planted words must not pass for each other's
        // transliteration.
        let (source, target, parts) = loop {
            let (source, target, parts) = match kind {
                PairKind::Transliterated => {
                    let n = lex.rng.gen_range(2..=3);
                    let (w, syl) = lex.source_word(n, true);
                    let t = lex.transliteration(&syl);
                    (w, t, None)
                }
                PairKind::Compositional => {
                    let (head, _) = lex.source_word(2, true);
                    let (filler, _) = lex.source_word(1, true);
                    let (tail, _) = lex.source_word(2, true);
                    let x = lex.target_word();
                    let y = lex.target_word();
                    let source = format!("{head}{filler}{tail}");
                    lex.used_source.insert(source.clone());
                    let target = format!("{} {}", Lexemes::capitalize(&x), Lexemes::capitalize(&y));
                    (source, target, Some([(head, x), (tail, y)]))
                }
                PairKind::Contextual => {
                    let n = lex.rng.gen_range(2..=3);
                    let (w, _) = lex.source_word(n, true);
                    (w, lex.target_word(), None)
                }
            };
            let sounds_like = |c: &str, e: &str| {
                crate::align::score_pronunciation(c, e, &romanization) > 0.0
            };
            let clash = planted.iter().any(|p: &PlantedPair| {
                sounds_like(&source, &p.target) || sounds_like(&p.source, &target)
            });
            let own_sound = kind != PairKind::Transliterated && sounds_like(&source, &target);
            if !clash && !own_sound {
                break (source, target, parts);
            }
        };
        if let Some(parts) = parts {
            for (c, e) in parts {
                lexicon.insert(&c, &e);
            }
        }
        planted.push(PlantedPair {
            source,
            target,
            topic: topic_of[i],
            kind,
            seeded: seeded.contains(&i),
        });
    }
    for p in planted.iter().filter(|p| p.seeded) {
        lexicon.insert(&p.source, &p.target);
    }

    // Episodes, member windows and anchors.
    let mut topics = Vec::with_capacity(config.n_topics);
    for m in &members {
        let len = structure.gen_range(config.episode_len.0..=config.episode_len.1);
        let episode = place_episode(config, len, &mut structure)?;
        let n_extra = config.words_per_topic.saturating_sub(m.len());
        let n_members = m.len() + n_extra;
        let windows = member_windows(episode, n_members, |j| {
            j < m.len() && kinds[m[j]] == PairKind::Contextual
        }, &mut structure);
        // Seeded members are spread over the others as first anchors.
        let seeded_members: Vec<usize> = (0..m.len()).filter(|&j| seeded.contains(&m[j])).collect();
        // Co-mentions come from members other clues can resolve, so the
        // neighborhood of every member is anchored.
        let resolvable: Vec<usize> = (0..m.len())
            .filter(|&j| seeded.contains(&m[j]) || kinds[m[j]] != PairKind::Contextual)
            .collect();
        let anchors = (0..n_members)
            .map(|i| {
                let mut a = Vec::with_capacity(2);
                let own: Vec<usize> = seeded_members.iter().copied().filter(|&j| j != i).collect();
                if !own.is_empty() {
                    a.push(own[i % own.len()]);
                }
                let rest: Vec<usize> = resolvable
                    .iter()
                    .copied()
                    .filter(|&j| j != i && !a.contains(&j))
                    .collect();
                if let Some(&j) = rest.choose(&mut structure) {
                    a.push(j);
                }
                a
            })
            .collect();
        let extra_source = (0..n_extra).map(|_| lex.source_word(2, true).0).collect();
        let extra_target = (0..n_extra).map(|_| lex.target_word()).collect();
        topics.push(Topic {
            episode,
            pairs: m.clone(),
            extra_source,
            extra_target,
            windows,
            anchors,
        });
    }

    let source_words: Vec<&str> = planted.iter().map(|p| p.source.as_str()).collect();
    let target_words: Vec<&str> = planted.iter().map(|p| p.target.as_str()).collect();
    let source = generate_stream(
        config,
        &topics,
        &source_words,
        |t| &t.extra_source,
        &background_source,
        stream_rng(3),
        "s",
    )?;
    let target = generate_stream(
        config,
        &topics,
        &target_words,
        |t| &t.extra_target,
        &background_target,
        stream_rng(4),
        "e",
    )?;

    let mut gold = GoldTable::new();
    for p in planted.iter().filter(|p| !p.seeded) {
        gold.insert(&p.source, &p.target);
    }

    let missing_seeded_neighbor = self_check(&source, &planted);
    let report = SynthReport {
        planted,
        episodes: topics.iter().map(|t| t.episode).collect(),
        missing_seeded_neighbor,
    };
    Ok(SynthDataset {
        source,
        target,
        lexicon,
        romanization,
        gold,
        report,
    })
}

/// Burst window of every topic member inside `episode`. Members flagged
/// `distinct` get a window no other member of the topic shares, so that
/// their co-burst profile alone singles them out; the others may collide.
fn member_windows(
    episode: (usize, usize),
    n_members: usize,
    distinct: impl Fn(usize) -> bool,
    rng: &mut ChaCha8Rng,
) -> Vec<(usize, usize)> {
    let len = episode.1 - episode.0 + 1;
    let slack = len.saturating_sub(MIN_WINDOW).min(MAX_TRIM * 2);
    let mut shapes: Vec<(usize, usize)> = (0..=slack.min(MAX_TRIM))
        .flat_map(|h| (0..=(slack - h).min(MAX_TRIM)).map(move |t| (h, t)))
        .collect();
    shapes.shuffle(rng);
    let mut taken = HashSet::new();
    let mut windows = vec![(0, 0); n_members];
    let (unique, shared): (Vec<usize>, Vec<usize>) = (0..n_members).partition(|&j| distinct(j));
    for j in unique {
        let shape = shapes
            .iter()
            .copied()
            .find(|s| !taken.contains(s))
            .unwrap_or_else(|| shapes[rng.gen_range(0..shapes.len())]);
        taken.insert(shape);
        windows[j] = shape;
    }
    let free: Vec<(usize, usize)> = shapes.iter().copied().filter(|s| !taken.contains(s)).collect();
    for j in shared {
        windows[j] = *free.choose(rng).unwrap_or(&shapes[0]);
    }
    windows
        .into_iter()
        .map(|(h, t)| (episode.0 + h, episode.1 - t))
        .collect()
}

fn place_episode(config: &SynthConfig, len: usize, rng: &mut ChaCha8Rng) -> Result<(usize, usize)> {
    let lo = 3;
    let hi = config.num_epochs - len - 3;
    let ok = |start: usize| match config.avoid_epoch {
        Some(a) => start + len + 2 <= a || start >= a + 2,
        None => true,
    };
    let starts: Vec<usize> = (lo..=hi).filter(|&s| ok(s)).collect();
    let start = *starts.choose(rng).ok_or_else(|| {
        Error::InvalidConfig("no room for an episode around avoid_epoch".into())
    })?;
    Ok((start, start + len - 1))
}

fn generate_stream<'t>(
    config: &SynthConfig,
    topics: &'t [Topic],
    planted_words: &[&str],
    extras: impl Fn(&'t Topic) -> &'t Vec<String>,
    background: &[String],
    mut rng: ChaCha8Rng,
    prefix: &str,
) -> Result<Stream> {
    const ANCHOR_KEEP: f64 = 0.85;
    const EXTRA_STORIES: usize = 2;

    let mut docs = Vec::new();
    let bg = |rng: &mut ChaCha8Rng, n: usize| -> Vec<String> {
        (0..n)
            .map(|_| background[rng.gen_range(0..background.len())].clone())
            .collect()
    };
    for epoch in 0..config.num_epochs {
        let mut day: Vec<Vec<String>> = (0..config.docs_per_epoch)
            .map(|_| {
                let n = rng.gen_range(10..=20);
                bg(&mut rng, n)
            })
            .collect();

        for topic in topics {
            let members: Vec<&str> = topic
                .pairs
                .iter()
                .map(|&i| planted_words[i])
                .chain(extras(topic).iter().map(String::as_str))
                .collect();
            let active: Vec<usize> = (0..members.len())
                .filter(|&i| (topic.windows[i].0..=topic.windows[i].1).contains(&epoch))
                .collect();
            if active.is_empty() {
                continue;
            }
            let focus_of_day = active
                .iter()
                .copied()
                .chain((0..EXTRA_STORIES).map(|_| active[rng.gen_range(0..active.len())]))
                .collect::<Vec<_>>();
            for focus in focus_of_day {
                let mut doc = vec![members[focus].to_string()];
                for &a in &topic.anchors[focus] {
                    if active.contains(&a) && rng.gen_bool(ANCHOR_KEEP) {
                        doc.push(members[a].to_string());
                    }
                }
                let n = rng.gen_range(6..=10);
                doc.extend(bg(&mut rng, n));
                doc.shuffle(&mut rng);
                day.push(doc);
            }
        }
        for (n, tokens) in day.into_iter().enumerate() {
            docs.push(Document {
                doc_id: format!("{prefix}{epoch:03}-{n:03}"),
                epoch,
                tokens,
            });
        }
    }
    let origin = NaiveDate::from_ymd_opt(2010, 1, 1).expect("valid date");
    Ok(Stream::new(config.num_epochs, docs, Granularity::DAY)?.with_origin(origin))
}

fn self_check(source: &Stream, planted: &[PlantedPair]) -> Vec<String> {
    let mut missing = Vec::new();
    for p in planted.iter().filter(|p| !p.seeded) {
        let seeded_mates: HashSet<&str> = planted
            .iter()
            .filter(|q| q.seeded && q.topic == p.topic)
            .map(|q| q.source.as_str())
            .collect();
        let found = source.docs().any(|d| {
            d.tokens.iter().any(|t| t == &p.source)
                && d.tokens.iter().any(|t| seeded_mates.contains(t.as_str()))
        });
        if !found {
            missing.push(p.source.clone());
        }
    }
    missing
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::align::AlignedPair;
    use crate::binet::BurstElement;

    fn result(pairs: &[(&str, &str)]) -> AlignmentResult {
        AlignmentResult {
            pairs: pairs
                .iter()
                .map(|&(s, t)| AlignedPair {
                    source: BurstElement::new(s, 0, 1),
                    target: BurstElement::new(t, 0, 1),
                    score: 0.5,
                })
                .collect(),
            words: vec![],
        }
    }

    #[test]
    fn accuracy_ratio_and_truncation() {
        let mut gold = GoldTable::new();
        for i in 0..10 {
            gold.insert(&format!("s{i}"), &format!("t{i}"));
        }
        let pairs: Vec<(String, String)> = (0..10)
            .map(|i| {
                let t = if i < 8 { format!("t{i}") } else { "wrong".into() };
                (format!("s{i}"), t)
            })
            .collect();
        let refs: Vec<(&str, &str)> = pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        let r = result(&refs);
        assert_eq!(topk_accuracy(&r, &gold, 10).unwrap(), 0.8);
        assert_eq!(topk_accuracy(&r, &gold, 100).unwrap(), 0.8);
        assert_eq!(topk_accuracy(&r, &gold, 4).unwrap(), 1.0);
        assert!(matches!(
            topk_accuracy(&result(&[]), &gold, 3),
            Err(Error::EmptyResult)
        ));
        assert!(topk_accuracy(&r, &gold, 0).is_err());
        // unknown source words count as wrong
        assert_eq!(topk_accuracy(&result(&[("zz", "t0")]), &gold, 1).unwrap(), 0.0);
    }

    #[test]
    fn config_validation() {
        assert!(SynthConfig::default().validate().is_ok());
        let c = SynthConfig {
            n_planted_pairs: 49,
            ..Default::default()
        };
        assert!(matches!(c.validate(), Err(Error::InvalidConfig(_))));
        let c = SynthConfig {
            seed_fraction: 1.5,
            ..Default::default()
        };
        assert!(c.validate().is_err());
        let c = SynthConfig {
            num_epochs: 8,
            ..Default::default()
        };
        assert!(c.validate().is_err());
    }

    fn small() -> SynthConfig {
        SynthConfig {
            num_epochs: 40,
            n_topics: 2,
            n_planted_pairs: 8,
            words_per_topic: 5,
            docs_per_epoch: 10,
            background_vocab_size: 80,
            ..Default::default()
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_coordinated(&small()).unwrap();
        let b = generate_coordinated(&small()).unwrap();
        assert_eq!(a.source, b.source);
        assert_eq!(a.target, b.target);
        assert_eq!(a.lexicon, b.lexicon);
        assert_eq!(a.gold, b.gold);
        let c = generate_coordinated(&SynthConfig {
            rng_seed: 7,
            ..small()
        })
        .unwrap();
        assert_ne!(a.source, c.source);
    }

    #[test]
    fn seed_fraction_partitions_pairs() {
        let all = generate_coordinated(&SynthConfig {
            seed_fraction: 1.0,
            ..small()
        })
        .unwrap();
        assert!(all.gold.is_empty());
        let none = generate_coordinated(&SynthConfig {
            seed_fraction: 0.0,
            ..small()
        })
        .unwrap();
        assert_eq!(none.gold.len(), 8);
        // same planted pairs; only the split between lexicon and gold moves
        let words = |d: &SynthDataset| -> Vec<(String, String)> {
            d.report.planted.iter().map(|p| (p.source.clone(), p.target.clone())).collect()
        };
        assert_eq!(words(&all), words(&none));
        let half = generate_coordinated(&SynthConfig {
            seed_fraction: 0.5,
            ..small()
        })
        .unwrap();
        let seeded = half.report.planted.iter().filter(|p| p.seeded).count();
        assert_eq!(seeded + half.gold.len(), half.report.planted.len());
        for p in half.report.planted.iter().filter(|p| !p.seeded) {
            assert!(half.gold.accepts(&p.source, &p.target));
        }
    }

    #[test]
    fn unpaired_topic_words_are_added() {
        let d = generate_coordinated(&small()).unwrap();
        // 2 topics x 5 slots, 8 pairs: one extra word per topic and stream
        let planted: HashSet<&str> = d.report.planted.iter().map(|p| p.source.as_str()).collect();
        let (s, e) = d.report.episodes[0];
        let mid = (s + e) / 2;
        let topical = d
            .source
            .docs_at(mid)
            .iter()
            .flat_map(|doc| doc.tokens.iter())
            .filter(|t| planted.contains(t.as_str()))
            .count();
        assert!(topical > 0);
    }

    #[test]
    fn episodes_respect_avoided_epoch() {
        let cfg = SynthConfig {
            avoid_epoch: Some(45),
            ..Default::default()
        };
        let d = generate_coordinated(&cfg).unwrap();
        for &(s, e) in &d.report.episodes {
            assert!(e + 2 < 45 || s >= 47, "episode ({s},{e})");
        }
    }

    #[test]
    fn gold_tsv_round_trip() {
        let d = generate_coordinated(&small()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        d.write_dir(dir.path()).unwrap();
        let gold = GoldTable::load(dir.path().join("gold.tsv")).unwrap();
        assert_eq!(gold, d.gold);
        let lex = SeedLexicon::load(dir.path().join("lexicon.tsv")).unwrap();
        assert_eq!(lex, d.lexicon);
    }
}
