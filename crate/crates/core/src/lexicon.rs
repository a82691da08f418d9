//! Prior knowledge that anchors decipherment: a bilingual seed lexicon, a
//! romanization table, and language-universal tokens.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use once_cell::sync::Lazy;
use regex::Regex;

use crate::align::CandidateIndex;
use crate::binet::{BINet, NodeId};
use crate::{Error, Result};

/// Bidirectional source/target word lexicon. Target words are lowercased.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SeedLexicon {
    entries: BTreeMap<String, BTreeSet<String>>,
    reverse: BTreeMap<String, BTreeSet<String>>,
    len: usize,
}

impl SeedLexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns false when the pair was already present.
    pub fn insert(&mut self, source: &str, target: &str) -> bool {
        let target = target.to_lowercase();
        let added = self
            .entries
            .entry(source.to_string())
            .or_default()
            .insert(target.clone());
        if added {
            self.reverse
                .entry(target)
                .or_default()
                .insert(source.to_string());
            self.len += 1;
        }
        added
    }

    /// Number of distinct (source, target) pairs.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn num_sources(&self) -> usize {
        self.entries.len()
    }

    /// Target translations of a source word.
    pub fn translations(&self, source: &str) -> Option<&BTreeSet<String>> {
        self.entries.get(source)
    }

    /// Source translations of a target word (matched lowercased).
    pub fn sources_of(&self, target: &str) -> Option<&BTreeSet<String>> {
        match self.reverse.get(target) {
            Some(s) => Some(s),
            None => self.reverse.get(&target.to_lowercase()),
        }
    }

    pub fn contains(&self, source: &str, target: &str) -> bool {
        self.entries
            .get(source)
            .is_some_and(|t| t.contains(&target.to_lowercase()))
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries
            .iter()
            .flat_map(|(s, ts)| ts.iter().map(move |t| (s.as_str(), t.as_str())))
    }

    /// Lexicon TSV: `source_word<TAB>target_word` per line.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse(BufReader::new(file), &path.display().to_string())
    }

    pub fn parse<R: BufRead>(reader: R, name: &str) -> Result<Self> {
        let mut lex = SeedLexicon::new();
        for (_, pair) in tsv_pairs(reader, name, "source_word<TAB>target_word") {
            let (s, t) = pair?;
            lex.insert(&s, &t);
        }
        Ok(lex)
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for (s, t) in self.pairs() {
            writeln!(out, "{s}\t{t}")?;
        }
        Ok(())
    }
}

fn tsv_pairs<'a, R: BufRead + 'a>(
    reader: R,
    name: &'a str,
    expected: &'a str,
) -> impl Iterator<Item = (usize, Result<(String, String)>)> + 'a {
    reader.lines().enumerate().filter_map(move |(i, line)| {
        let lineno = i + 1;
        let line = match line {
            Ok(l) => l,
            Err(e) => return Some((lineno, Err(Error::parse(name, lineno, e.to_string())))),
        };
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            return None;
        }
        let mut f = line.split('\t');
        let out = match (f.next(), f.next(), f.next()) {
            (Some(a), Some(b), None) if !a.trim().is_empty() && !b.trim().is_empty() => {
                Ok((a.trim().to_string(), b.trim().to_string()))
            }
            _ => Err(Error::parse(name, lineno, format!("expected {expected}"))),
        };
        Some((lineno, out))
    })
}

/// Grapheme (or whole word) to romanization table.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RomanizationTable {
    map: HashMap<String, String>,
    max_key_chars: usize,
}

impl RomanizationTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, key: &str, romanized: &str) -> Result<()> {
        if !romanized.is_ascii() {
            return Err(Error::InvalidParameter(format!(
                "romanization of {key:?} is not ASCII: {romanized:?}"
            )));
        }
        self.max_key_chars = self.max_key_chars.max(key.chars().count());
        self.map.insert(key.to_string(), romanized.to_ascii_lowercase());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Romanization TSV: `grapheme_or_word<TAB>romanized`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::parse(BufReader::new(file), &path.display().to_string())
    }

    pub fn parse<R: BufRead>(reader: R, name: &str) -> Result<Self> {
        let mut table = RomanizationTable::new();
        for (lineno, pair) in tsv_pairs(reader, name, "grapheme_or_word<TAB>romanized") {
            let (k, v) = pair?;
            table
                .insert(&k, &v)
                .map_err(|e| Error::parse(name, lineno, e.to_string()))?;
        }
        Ok(table)
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut entries: Vec<_> = self.map.iter().collect();
        entries.sort();
        for (k, v) in entries {
            writeln!(out, "{k}\t{v}")?;
        }
        Ok(())
    }

    /// Romanize `word`: whole-word entry first, otherwise greedy longest
    /// match over characters. Unmapped ASCII characters pass through
    /// lowercased; other unmapped characters are dropped.
    pub fn romanize(&self, word: &str) -> String {
        if let Some(r) = self.map.get(word) {
            return r.clone();
        }
        let chars: Vec<char> = word.chars().collect();
        let mut out = String::new();
        let mut i = 0;
        let mut key = String::new();
        while i < chars.len() {
            if chars[i].is_ascii() {
                out.push(chars[i].to_ascii_lowercase());
                i += 1;
                continue;
            }
            let longest = self.max_key_chars.min(chars.len() - i);
            let hit = (1..=longest).rev().find_map(|n| {
                key.clear();
                key.extend(&chars[i..i + n]);
                self.map.get(key.as_str()).map(|r| (n, r))
            });
            match hit {
                Some((n, r)) => {
                    out.push_str(r);
                    i += n;
                }
                None => i += 1,
            }
        }
        out
    }
}

/// Classes of tokens written identically across languages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UniversalClass {
    Number,
    Date,
    Scoreline,
    Url,
    Currency,
}

impl fmt::Display for UniversalClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UniversalClass::Number => "NUMBER",
            UniversalClass::Date => "DATE",
            UniversalClass::Scoreline => "SCORELINE",
            UniversalClass::Url => "URL",
            UniversalClass::Currency => "CURRENCY",
        })
    }
}

const NUMBER: &str = r"[0-9]+(?:[.,][0-9]+)?";

static NUMBER_RE: Lazy<Regex> = Lazy::new(|| Regex::new(&format!("^{NUMBER}$")).unwrap());
static SCORELINE_RE: Lazy<Regex> = Lazy::new(|| Regex::new(r"^[0-9]+-[0-9]+$").unwrap());
static DATE_RE: Lazy<Regex> = Lazy::new(|| {
    Regex::new(
        r"^(?:[0-9]{4}([-/.])[0-9]{1,2}([-/.])[0-9]{1,2}|[0-9]{1,2}([-/.])[0-9]{1,2}([-/.])[0-9]{2,4})$",
    )
    .unwrap()
});
static URL_RE: Lazy<Regex> =
    Lazy::new(|| Regex::new(r"(?i)^(?:[a-z][a-z0-9+.-]*://|www\.)\S+$").unwrap());

pub const DEFAULT_CURRENCY_SYMBOLS: &[&str] = &["$", "US$", "€", "£", "¥", "￥", "元"];

/// Recognizes language-universal tokens.
#[derive(Clone, Debug)]
pub struct UniversalMatcher {
    currency: Regex,
    symbols: Vec<String>,
}

impl Default for UniversalMatcher {
    fn default() -> Self {
        Self::with_currency_symbols(DEFAULT_CURRENCY_SYMBOLS.iter().copied())
    }
}

impl UniversalMatcher {
    pub fn with_currency_symbols<I, S>(symbols: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut symbols: Vec<String> = symbols
            .into_iter()
            .map(|s| s.as_ref().trim().to_string())
            .filter(|s| !s.is_empty())
            .collect();
        // Longest first so "US$" wins over "$".
        symbols.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
        symbols.dedup();
        let alt = if symbols.is_empty() {
            // Matches nothing.
            r"[^\s\S]".to_string()
        } else {
            symbols
                .iter()
                .map(|s| regex::escape(s))
                .collect::<Vec<_>>()
                .join("|")
        };
        let currency =
            Regex::new(&format!(r"^(?:(?:{alt}){NUMBER}|{NUMBER}(?:{alt}))$")).expect("valid");
        UniversalMatcher { currency, symbols }
    }

    /// Currency symbols, one per line.
    pub fn load_currency_symbols(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::with_currency_symbols(text.lines()))
    }

    pub fn currency_symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn classify(&self, word: &str) -> Option<UniversalClass> {
        if SCORELINE_RE.is_match(word) {
            Some(UniversalClass::Scoreline)
        } else if NUMBER_RE.is_match(word) {
            Some(UniversalClass::Number)
        } else if is_date(word) {
            Some(UniversalClass::Date)
        } else if URL_RE.is_match(word) {
            Some(UniversalClass::Url)
        } else if self.currency.is_match(word) {
            Some(UniversalClass::Currency)
        } else {
            None
        }
    }
}

fn is_date(word: &str) -> bool {
    DATE_RE.captures(word).is_some_and(|c| {
        // Both separators must agree.
        match (c.get(1), c.get(2), c.get(3), c.get(4)) {
            (Some(a), Some(b), _, _) | (_, _, Some(a), Some(b)) => a.as_str() == b.as_str(),
            _ => false,
        }
    })
}

static DEFAULT_MATCHER: Lazy<UniversalMatcher> = Lazy::new(UniversalMatcher::default);

/// Classify `word` with the default currency symbols.
pub fn universal_match(word: &str) -> Option<UniversalClass> {
    DEFAULT_MATCHER.classify(word)
}

/// Source/target node pairs fixed at score 1 before propagation.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SeedAlignment {
    pairs: BTreeSet<(NodeId, NodeId)>,
}

impl SeedAlignment {
    pub fn from_pairs(pairs: impl IntoIterator<Item = (NodeId, NodeId)>) -> Self {
        SeedAlignment {
            pairs: pairs.into_iter().collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, source: NodeId, target: NodeId) -> bool {
        self.pairs.contains(&(source, target))
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.pairs.iter().copied()
    }

    pub fn seeded_sources(&self) -> BTreeSet<NodeId> {
        self.pairs.iter().map(|&(s, _)| s).collect()
    }
}

/// Seed every temporally admissible pair whose words are lexicon
/// translations, or identical language-universal tokens of the same class.
pub fn seed_alignments(
    source: &BINet,
    target: &BINet,
    lexicon: &SeedLexicon,
    matcher: &UniversalMatcher,
) -> SeedAlignment {
    let index = CandidateIndex::new(target);
    seed_alignments_with_index(source, target, &index, lexicon, matcher)
}

pub(crate) fn seed_alignments_with_index(
    source: &BINet,
    target: &BINet,
    index: &CandidateIndex,
    lexicon: &SeedLexicon,
    matcher: &UniversalMatcher,
) -> SeedAlignment {
    let mut pairs = BTreeSet::new();
    for c in source.node_ids() {
        let c_word = &source.node(c).word;
        let translations = lexicon.translations(c_word);
        let class = matcher.classify(c_word);
        if translations.is_none() && class.is_none() {
            continue;
        }
        for e in index.query(source.node(c).period) {
            let e_word = &target.node(e).word;
            let by_lexicon =
                translations.is_some_and(|t| t.contains(&e_word.to_lowercase()));
            let by_identity = class.is_some() && c_word == e_word && matcher.classify(e_word) == class;
            if by_lexicon || by_identity {
                pairs.insert((c, e));
            }
        }
    }
    SeedAlignment { pairs }
}
