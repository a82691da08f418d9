//! Timestamped, pre-tokenized document streams and per-word statistics.
//!
//! Corpus files are UTF-8, one document per line:
//!
//! ```text
//! doc_id<TAB>YYYY-MM-DD<TAB>token token token ...
//! ```
//!
//! Tokens that contain spaces are written with `\_` in place of each space.
//! Dates are bucketed into consecutive epochs counted from the earliest date
//! in the file; epochs without documents are kept as empty buckets.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::ops::Range;
use std::path::Path;
use std::str::FromStr;

use chrono::{Days, NaiveDate};

use crate::text::{escape_token, unescape_token};
use crate::{Error, Result};

const DATE_FORMAT: &str = "%Y-%m-%d";

/// Width of one epoch, in whole days.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Granularity {
    days: u32,
}

impl Granularity {
    pub const DAY: Granularity = Granularity { days: 1 };
    pub const WEEK: Granularity = Granularity { days: 7 };

    pub fn days(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter(
                "epoch granularity must be at least one day".into(),
            ));
        }
        Ok(Granularity { days: n })
    }

    pub fn num_days(self) -> u32 {
        self.days
    }
}

impl Default for Granularity {
    fn default() -> Self {
        Granularity::DAY
    }
}

impl fmt::Display for Granularity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.days {
            1 => f.write_str("day"),
            7 => f.write_str("week"),
            n => write!(f, "{n}d"),
        }
    }
}

impl FromStr for Granularity {
    type Err = Error;

    /// Accepts `day`, `week`, or `<n>d`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "day" | "1d" => Ok(Granularity::DAY),
            "week" | "7d" => Ok(Granularity::WEEK),
            other => {
                let n = other
                    .strip_suffix('d')
                    .and_then(|n| n.parse::<u32>().ok())
                    .ok_or_else(|| {
                        Error::InvalidParameter(format!("unrecognized epoch granularity {other:?}"))
                    })?;
                Granularity::days(n)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub epoch: usize,
    pub tokens: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct WordCounts {
    /// (epoch, occurrences), ascending by epoch.
    by_epoch: Vec<(usize, u64)>,
    total: u64,
}

/// A stream of documents bucketed into `T` consecutive epochs.
///
/// Immutable once built; word counts are indexed at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Stream {
    docs_by_epoch: Vec<Vec<Document>>,
    granularity: Granularity,
    origin: Option<NaiveDate>,
    epoch_totals: Vec<u64>,
    total_tokens: u64,
    counts: HashMap<String, WordCounts>,
}

impl Stream {
    /// Build a stream from documents already assigned to epochs.
    pub fn new(num_epochs: usize, docs: Vec<Document>, granularity: Granularity) -> Result<Self> {
        if num_epochs == 0 {
            return Err(Error::EmptyStream);
        }
        let mut docs_by_epoch = vec![Vec::new(); num_epochs];
        for doc in docs {
            if doc.epoch >= num_epochs {
                return Err(Error::InvalidParameter(format!(
                    "document {} has epoch {} outside [0, {num_epochs})",
                    doc.doc_id, doc.epoch
                )));
            }
            if doc.tokens.is_empty() {
                continue;
            }
            docs_by_epoch[doc.epoch].push(doc);
        }
        Ok(Self::index(docs_by_epoch, granularity, None))
    }

    fn index(
        docs_by_epoch: Vec<Vec<Document>>,
        granularity: Granularity,
        origin: Option<NaiveDate>,
    ) -> Self {
        let mut epoch_totals = vec![0u64; docs_by_epoch.len()];
        let mut counts: HashMap<String, WordCounts> = HashMap::new();
        for (epoch, docs) in docs_by_epoch.iter().enumerate() {
            for doc in docs {
                epoch_totals[epoch] += doc.tokens.len() as u64;
                for token in &doc.tokens {
                    let entry = counts.entry(token.clone()).or_default();
                    entry.total += 1;
                    match entry.by_epoch.last_mut() {
                        Some((e, n)) if *e == epoch => *n += 1,
                        _ => entry.by_epoch.push((epoch, 1)),
                    }
                }
            }
        }
        let total_tokens = epoch_totals.iter().sum();
        Stream {
            docs_by_epoch,
            granularity,
            origin,
            epoch_totals,
            total_tokens,
            counts,
        }
    }

    pub fn num_epochs(&self) -> usize {
        self.docs_by_epoch.len()
    }

    pub fn num_docs(&self) -> usize {
        self.docs_by_epoch.iter().map(Vec::len).sum()
    }

    pub fn granularity(&self) -> Granularity {
        self.granularity
    }

    /// Calendar date of epoch 0, when the stream was read from a dated file.
    pub fn origin(&self) -> Option<NaiveDate> {
        self.origin
    }

    pub fn docs_at(&self, epoch: usize) -> &[Document] {
        &self.docs_by_epoch[epoch]
    }

    pub fn docs(&self) -> impl Iterator<Item = &Document> {
        self.docs_by_epoch.iter().flatten()
    }

    pub fn epoch_total(&self, epoch: usize) -> u64 {
        self.epoch_totals[epoch]
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    /// Global occurrence count of `word` (0 when absent).
    pub fn count(&self, word: &str) -> u64 {
        self.counts.get(word).map_or(0, |c| c.total)
    }

    /// Occurrences of `word` at `epoch`.
    pub fn count_at(&self, word: &str, epoch: usize) -> u64 {
        self.counts
            .get(word)
            .and_then(|c| {
                c.by_epoch
                    .binary_search_by_key(&epoch, |&(e, _)| e)
                    .ok()
                    .map(|i| c.by_epoch[i].1)
            })
            .unwrap_or(0)
    }

    pub fn num_distinct_tokens(&self) -> usize {
        self.counts.len()
    }

    pub fn contains_word(&self, word: &str) -> bool {
        self.counts.contains_key(word)
    }

    /// Sub-stream over `epochs`, renumbered from zero.
    pub fn slice(&self, epochs: Range<usize>) -> Result<Stream> {
        if epochs.start >= epochs.end || epochs.end > self.num_epochs() {
            return Err(Error::InvalidParameter(format!(
                "epoch range {}..{} invalid for a stream of {} epochs",
                epochs.start,
                epochs.end,
                self.num_epochs()
            )));
        }
        let offset = epochs.start;
        let docs_by_epoch = self.docs_by_epoch[epochs]
            .iter()
            .map(|docs| {
                docs.iter()
                    .map(|d| Document {
                        doc_id: d.doc_id.clone(),
                        epoch: d.epoch - offset,
                        tokens: d.tokens.clone(),
                    })
                    .collect()
            })
            .collect();
        let origin = self.origin.map(|o| {
            o + Days::new(offset as u64 * u64::from(self.granularity.num_days()))
        });
        Ok(Self::index(docs_by_epoch, self.granularity, origin))
    }

    /// Write in the corpus format. Streams without an origin date are dated
    /// from 2000-01-01.
    pub fn write_to<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let origin = self
            .origin
            .unwrap_or_else(|| NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date"));
        let step = u64::from(self.granularity.num_days());
        for (epoch, docs) in self.docs_by_epoch.iter().enumerate() {
            let date = origin + Days::new(epoch as u64 * step);
            for doc in docs {
                write!(out, "{}\t{}\t", doc.doc_id, date.format(DATE_FORMAT))?;
                for (i, tok) in doc.tokens.iter().enumerate() {
                    if i > 0 {
                        out.write_all(b" ")?;
                    }
                    out.write_all(escape_token(tok).as_bytes())?;
                }
                out.write_all(b"\n")?;
            }
        }
        Ok(())
    }

    /// The same documents on an epoch axis starting at `origin` and
    /// spanning `num_epochs` epochs.
    pub fn rebase(&self, origin: NaiveDate, num_epochs: usize) -> Result<Stream> {
        let own = self.origin.unwrap_or(origin);
        let days = (own - origin).num_days();
        let step = i64::from(self.granularity.num_days());
        if days < 0 || days % step != 0 {
            return Err(Error::InvalidParameter(format!(
                "origin {origin} is not an epoch boundary before {own}"
            )));
        }
        let shift = (days / step) as usize;
        if shift + self.num_epochs() > num_epochs {
            return Err(Error::InvalidParameter(format!(
                "{num_epochs} epochs from {origin} do not cover the stream"
            )));
        }
        let mut docs_by_epoch = vec![Vec::new(); num_epochs];
        for (epoch, docs) in self.docs_by_epoch.iter().enumerate() {
            docs_by_epoch[epoch + shift] = docs
                .iter()
                .map(|d| Document {
                    doc_id: d.doc_id.clone(),
                    epoch: d.epoch + shift,
                    tokens: d.tokens.clone(),
                })
                .collect();
        }
        Ok(Self::index(docs_by_epoch, self.granularity, Some(origin)))
    }

    pub(crate) fn with_origin(mut self, origin: NaiveDate) -> Self {
        self.origin = Some(origin);
        self
    }
}

/// Put two streams of the same granularity on one epoch axis: epoch 0 is
/// the earlier origin and both span the later end.
pub fn coordinate(a: &Stream, b: &Stream) -> Result<(Stream, Stream)> {
    if a.granularity != b.granularity {
        return Err(Error::InvalidParameter(format!(
            "granularity mismatch: {} vs {}",
            a.granularity, b.granularity
        )));
    }
    let (Some(oa), Some(ob)) = (a.origin, b.origin) else {
        if a.num_epochs() != b.num_epochs() {
            return Err(Error::InvalidParameter(
                "undated streams must have the same number of epochs".into(),
            ));
        }
        return Ok((a.clone(), b.clone()));
    };
    let origin = oa.min(ob);
    let step = i64::from(a.granularity.num_days());
    let end = |o: NaiveDate, t: usize| (o - origin).num_days() + t as i64 * step;
    let span = end(oa, a.num_epochs()).max(end(ob, b.num_epochs()));
    let num_epochs = ((span + step - 1) / step) as usize;
    // Origins that are not a whole number of epochs apart snap down.
    let snap = |s: &Stream, o: NaiveDate| -> Result<Stream> {
        let off = (o - origin).num_days() % step;
        let shifted = Stream::index(
            s.docs_by_epoch.clone(),
            s.granularity,
            Some(o - Days::new(off as u64)),
        );
        shifted.rebase(origin, num_epochs)
    };
    Ok((snap(a, oa)?, snap(b, ob)?))
}

/// Stopword list: one token per line, blank lines ignored.
pub fn load_stopwords(path: impl AsRef<Path>) -> Result<HashSet<String>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut words = HashSet::new();
    for line in BufReader::new(file).lines() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let word = line.trim();
        if !word.is_empty() {
            words.insert(word.to_string());
        }
    }
    Ok(words)
}

/// Read a corpus file into a [`Stream`].
pub fn ingest_stream(path: impl AsRef<Path>, granularity: Granularity) -> Result<Stream> {
    ingest_stream_with(path, granularity, None)
}

pub fn ingest_stream_with(
    path: impl AsRef<Path>,
    granularity: Granularity,
    stopwords: Option<&HashSet<String>>,
) -> Result<Stream> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_stream(
        BufReader::new(file),
        &path.display().to_string(),
        granularity,
        stopwords,
    )
}

/// Parse corpus records from any reader; `name` labels parse errors.
pub fn parse_stream<R: BufRead>(
    reader: R,
    name: &str,
    granularity: Granularity,
    stopwords: Option<&HashSet<String>>,
) -> Result<Stream> {
    let mut records: Vec<(String, NaiveDate, Vec<String>)> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::parse(name, lineno, e.to_string()))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.splitn(3, '\t');
        let (doc_id, date, body) = match (fields.next(), fields.next(), fields.next()) {
            (Some(id), Some(date), Some(body)) if !id.is_empty() => (id, date, body),
            _ => {
                return Err(Error::parse(
                    name,
                    lineno,
                    "expected doc_id<TAB>YYYY-MM-DD<TAB>tokens",
                ))
            }
        };
        let date = NaiveDate::parse_from_str(date.trim(), DATE_FORMAT)
            .map_err(|e| Error::parse(name, lineno, format!("unparseable date {date:?}: {e}")))?;
        let tokens = body
            .split(' ')
            .filter(|t| !t.is_empty())
            .map(unescape_token)
            .filter(|t| stopwords.is_none_or(|s| !s.contains(t)))
            .collect();
        records.push((doc_id.to_string(), date, tokens));
    }

    let earliest = records
        .iter()
        .map(|r| r.1)
        .min()
        .ok_or(Error::EmptyStream)?;
    let step = i64::from(granularity.num_days());
    let epoch_of = |d: NaiveDate| ((d - earliest).num_days() / step) as usize;
    let num_epochs = records.iter().map(|r| epoch_of(r.1)).max().unwrap_or(0) + 1;

    let mut docs_by_epoch = vec![Vec::new(); num_epochs];
    for (doc_id, date, tokens) in records {
        if tokens.is_empty() {
            continue;
        }
        let epoch = epoch_of(date);
        docs_by_epoch[epoch].push(Document {
            doc_id,
            epoch,
            tokens,
        });
    }
    Ok(Stream::index(docs_by_epoch, granularity, None).with_origin(earliest))
}

/// Per-epoch probability series of one word plus its base probability.
#[derive(Clone, Debug, PartialEq)]
pub struct WordStats {
    pub word: String,
    pub p: Vec<f64>,
    pub q0: f64,
    pub count: u64,
}

/// Probability series of `word` in `stream`; `q0` comes from `base` when
/// supplied, otherwise from `stream` itself.
pub fn word_stats(stream: &Stream, word: &str, base: Option<&Stream>) -> Result<WordStats> {
    let q_source = base.unwrap_or(stream);
    let base_count = q_source.count(word);
    if base_count == 0 || q_source.total_tokens == 0 {
        return Err(Error::UnknownWord(word.to_string()));
    }
    let q0 = base_count as f64 / q_source.total_tokens as f64;

    let mut p = vec![0.0; stream.num_epochs()];
    let mut count = 0;
    if let Some(wc) = stream.counts.get(word) {
        count = wc.total;
        for &(epoch, n) in &wc.by_epoch {
            let total = stream.epoch_totals[epoch];
            if total > 0 {
                p[epoch] = n as f64 / total as f64;
            }
        }
    }
    Ok(WordStats {
        word: word.to_string(),
        p,
        q0,
        count,
    })
}

/// Tokens with global count at least `min_count`, by descending count then
/// lexicographically.
pub fn vocabulary(stream: &Stream, min_count: u64) -> Vec<String> {
    let mut words: Vec<(&String, u64)> = stream
        .counts
        .iter()
        .filter(|(_, c)| c.total >= min_count)
        .map(|(w, c)| (w, c.total))
        .collect();
    words.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    words.into_iter().map(|(w, _)| w.clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Stream> {
        parse_stream(text.as_bytes(), "test", Granularity::DAY, None)
    }

    fn doc(id: &str, epoch: usize, tokens: &[&str]) -> Document {
        Document {
            doc_id: id.into(),
            epoch,
            tokens: tokens.iter().map(|t| t.to_string()).collect(),
        }
    }

    #[test]
    fn gap_days_become_empty_buckets() {
        let s = parse("d1\t2010-01-01\ta b\nd2\t2010-01-03\tb c\n").unwrap();
        assert_eq!(s.num_epochs(), 3);
        assert!(s.docs_at(1).is_empty());
        assert_eq!(s.docs_at(2)[0].doc_id, "d2");
        assert_eq!(s.origin(), NaiveDate::from_ymd_opt(2010, 1, 1));
    }

    #[test]
    fn empty_file_is_an_error() {
        assert!(matches!(parse(""), Err(Error::EmptyStream)));
        assert!(matches!(parse("\n\n"), Err(Error::EmptyStream)));
    }

    #[test]
    fn malformed_record_reports_line() {
        let err = parse("d1\t2010-01-01\ta\nbroken line\n").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let err = parse("d1\t2010-13-01\ta\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn escaped_spaces_and_stopwords() {
        let stop: HashSet<String> = ["the".to_string()].into();
        let s = parse_stream(
            "d1\t2010-01-01\tthe serena\\_williams won\n".as_bytes(),
            "t",
            Granularity::DAY,
            Some(&stop),
        )
        .unwrap();
        assert_eq!(s.docs_at(0)[0].tokens, vec!["serena williams", "won"]);
        assert_eq!(s.count("the"), 0);
    }

    #[test]
    fn weekly_granularity() {
        let s = parse_stream(
            "a\t2010-01-01\tx\nb\t2010-01-08\tx\nc\t2010-01-20\tx\n".as_bytes(),
            "t",
            Granularity::WEEK,
            None,
        )
        .unwrap();
        assert_eq!(s.num_epochs(), 3);
        assert_eq!(s.docs_at(1).len(), 1);
    }

    #[test]
    fn ratio_definition() {
        // 5 of 50 tokens at epoch 0; 500 tokens overall.
        let mut docs = vec![doc("a", 0, &["w"; 5]), doc("b", 0, &["x"; 45])];
        for i in 0..9 {
            docs.push(doc(&format!("f{i}"), i + 1, &["y"; 50]));
        }
        let s = Stream::new(10, docs, Granularity::DAY).unwrap();
        let st = word_stats(&s, "w", None).unwrap();
        assert_eq!(st.p[0], 0.1);
        assert!(st.p[1..].iter().all(|&p| p == 0.0));
        assert_eq!(st.q0, 0.01);
        assert_eq!(st.count, 5);
    }

    #[test]
    fn base_stream_supplies_q0() {
        let s = Stream::new(2, vec![doc("a", 0, &["x", "y"])], Granularity::DAY).unwrap();
        let base = Stream::new(1, vec![doc("b", 0, &["w", "x", "x", "x"])], Granularity::DAY)
            .unwrap();
        let st = word_stats(&s, "w", Some(&base)).unwrap();
        assert_eq!(st.p, vec![0.0, 0.0]);
        assert_eq!(st.q0, 0.25);
        assert!(matches!(
            word_stats(&s, "zzz", Some(&base)),
            Err(Error::UnknownWord(_))
        ));
        assert!(matches!(word_stats(&s, "w", None), Err(Error::UnknownWord(_))));
    }

    #[test]
    fn vocabulary_ordering_and_filter() {
        let s = Stream::new(1, vec![doc("a", 0, &["b", "a", "a", "c", "a"])], Granularity::DAY)
            .unwrap();
        assert_eq!(vocabulary(&s, 1), vec!["a", "b", "c"]);
        assert_eq!(vocabulary(&s, 2), vec!["a"]);
        assert!(vocabulary(&s, 4).is_empty());
    }

    #[test]
    fn slice_renumbers_epochs() {
        let s = parse("a\t2010-01-01\tx\nb\t2010-01-02\ty\nc\t2010-01-03\tz\n").unwrap();
        let tail = s.slice(1..3).unwrap();
        assert_eq!(tail.num_epochs(), 2);
        assert_eq!(tail.docs_at(0)[0].doc_id, "b");
        assert_eq!(tail.docs_at(1)[0].epoch, 1);
        assert_eq!(tail.origin(), NaiveDate::from_ymd_opt(2010, 1, 2));
        assert!(s.slice(2..2).is_err());
    }

    #[test]
    fn write_then_parse_is_identity() {
        let text = "a\t2010-01-01\tx serena\\_williams\nb\t2010-01-03\ty\n";
        let s = parse(text).unwrap();
        let mut out = Vec::new();
        s.write_to(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text);
    }

    #[test]
    fn granularity_parsing() {
        assert_eq!("day".parse::<Granularity>().unwrap(), Granularity::DAY);
        assert_eq!("3d".parse::<Granularity>().unwrap().num_days(), 3);
        assert!("0d".parse::<Granularity>().is_err());
        assert!("fortnight".parse::<Granularity>().is_err());
    }

    #[test]
    fn coordinate_shares_epoch_axis() {
        let a = parse("a\t2010-01-03\tx y\nb\t2010-01-04\tx\n").unwrap();
        let b = parse("c\t2010-01-01\tu\nd\t2010-01-03\tv w\n").unwrap();
        let (a2, b2) = coordinate(&a, &b).unwrap();
        assert_eq!(a2.num_epochs(), 4);
        assert_eq!(b2.num_epochs(), 4);
        assert_eq!(a2.origin(), b2.origin());
        assert_eq!(a2.count_at("x", 2), 1);
        assert_eq!(a2.count_at("x", 3), 1);
        assert_eq!(a2.epoch_total(0), 0);
        assert_eq!(b2.count_at("v", 2), 1);
        assert_eq!(b2, coordinate(&b, &a).unwrap().0);
    }

}
