//! C ABI for `burstalign`.
//!
//! Objects cross the boundary as opaque handles created by `ba_*_load` /
//! `ba_*_new` and released by the matching `ba_*_free`. Every fallible
//! function returns a [`BaStatus`]; on failure `ba_last_error()` describes
//! the error until the next failing call on the same thread. Strings passed
//! in must be NUL-terminated UTF-8. Strings handed out are owned by the
//! handle they came from and stay valid until it is freed.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use burstalign::align::{pronunciation_clue, translation_clue, AlignmentResult};
use burstalign::burst::burst_cost;
use burstalign::corpus::{coordinate, ingest_stream};
use burstalign::eval::{split_merge_decipher, topk_accuracy, GoldTable};
use burstalign::lexicon::UniversalMatcher;
use burstalign::pipeline::{run_pipeline, PipelineInputs, PipelineSettings};
use burstalign::{
    BurstParams, Error, Granularity, NeighborNorm, RomanizationTable, ScoreParams, SeedLexicon,
    Stream,
};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    InvalidArgument = 5,
    OutOfRange = 6,
    EmptyResult = 7,
    Internal = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

fn fail(status: BaStatus, msg: impl Into<String>) -> BaStatus {
    set_error(msg);
    status
}

fn status_of(e: &Error) -> BaStatus {
    match e {
        Error::Io { .. } => BaStatus::Io,
        Error::Parse { .. } | Error::EmptyStream => BaStatus::Parse,
        Error::EmptyResult => BaStatus::EmptyResult,
        Error::UnknownWord(_) | Error::UnknownNode(_) | Error::MissingEdge(..) => {
            BaStatus::OutOfRange
        }
        _ => BaStatus::InvalidArgument,
    }
}

/// Run `f`, turning errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), BaStatus>) -> BaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => BaStatus::Ok,
        Ok(Err(status)) => status,
        Err(_) => fail(BaStatus::Internal, "internal panic"),
    }
}

trait OrStatus<T> {
    fn or_status(self) -> Result<T, BaStatus>;
}

impl<T> OrStatus<T> for burstalign::Result<T> {
    fn or_status(self) -> Result<T, BaStatus> {
        self.map_err(|e| fail(status_of(&e), e.to_string()))
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, BaStatus> {
    if p.is_null() {
        return Err(fail(BaStatus::NullPointer, format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(BaStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, BaStatus> {
    p.as_ref()
        .ok_or_else(|| fail(BaStatus::NullPointer, format!("{name} is null")))
}

fn out_arg<T>(p: *mut T, name: &str) -> Result<(), BaStatus> {
    if p.is_null() {
        Err(fail(BaStatus::NullPointer, format!("{name} is null")))
    } else {
        Ok(())
    }
}

fn c_string(s: &str) -> CString {
    CString::new(s.replace('\0', " ")).unwrap_or_default()
}

/// Message of the last failing call on this thread; empty when none.
/// Valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ba_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ba_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// A tokenized, timestamped document stream.
pub struct BaStream {
    inner: Stream,
}

/// Load a corpus file (`doc_id<TAB>YYYY-MM-DD<TAB>tokens`) bucketed into
/// epochs of `epoch_days` days.
///
/// # Safety
/// `path` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ba_stream_load(
    path: *const c_char,
    epoch_days: u32,
    out: *mut *mut BaStream,
) -> BaStatus {
    guard(|| {
        out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let gran = Granularity::days(epoch_days).or_status()?;
        let inner = ingest_stream(Path::new(path), gran).or_status()?;
        *out = Box::into_raw(Box::new(BaStream { inner }));
        Ok(())
    })
}

/// # Safety
/// `stream` must be null or a handle from `ba_stream_load` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ba_stream_free(stream: *mut BaStream) {
    if !stream.is_null() {
        drop(Box::from_raw(stream));
    }
}

/// Number of epochs; 0 for a null handle.
///
/// # Safety
/// `stream` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ba_stream_num_epochs(stream: *const BaStream) -> usize {
    stream.as_ref().map_or(0, |s| s.inner.num_epochs())
}

/// Number of documents; 0 for a null handle.
///
/// # Safety
/// `stream` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ba_stream_num_docs(stream: *const BaStream) -> usize {
    stream.as_ref().map_or(0, |s| s.inner.num_docs())
}

/// Bilingual seed lexicon.
pub struct BaLexicon {
    inner: SeedLexicon,
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ba_lexicon_new(out: *mut *mut BaLexicon) -> BaStatus {
    guard(|| {
        out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(BaLexicon {
            inner: SeedLexicon::new(),
        }));
        Ok(())
    })
}

/// Load a `source<TAB>target` lexicon file.
///
/// # Safety
/// `path` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ba_lexicon_load(path: *const c_char, out: *mut *mut BaLexicon) -> BaStatus {
    guard(|| {
        out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let inner = SeedLexicon::load(path).or_status()?;
        *out = Box::into_raw(Box::new(BaLexicon { inner }));
        Ok(())
    })
}

/// # Safety
/// `lexicon` must be a live handle; `source` and `target` valid C strings.
#[no_mangle]
pub unsafe extern "C" fn ba_lexicon_insert(
    lexicon: *mut BaLexicon,
    source: *const c_char,
    target: *const c_char,
) -> BaStatus {
    guard(|| {
        let lex = lexicon
            .as_mut()
            .ok_or_else(|| fail(BaStatus::NullPointer, "lexicon is null"))?;
        let (s, t) = (str_arg(source, "source")?, str_arg(target, "target")?);
        if s.is_empty() || t.is_empty() {
            return Err(fail(BaStatus::InvalidArgument, "empty lexicon entry"));
        }
        lex.inner.insert(s, t);
        Ok(())
    })
}

/// Number of distinct entries; 0 for a null handle.
///
/// # Safety
/// `lexicon` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ba_lexicon_len(lexicon: *const BaLexicon) -> usize {
    lexicon.as_ref().map_or(0, |l| l.inner.len())
}

/// # Safety
/// `lexicon` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ba_lexicon_free(lexicon: *mut BaLexicon) {
    if !lexicon.is_null() {
        drop(Box::from_raw(lexicon));
    }
}

/// Character-to-Latin romanization table.
pub struct BaRomanization {
    inner: RomanizationTable,
}

/// Load a `unit<TAB>romanization` file.
///
/// # Safety
/// `path` must be a valid C string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ba_romanization_load(
    path: *const c_char,
    out: *mut *mut BaRomanization,
) -> BaStatus {
    guard(|| {
        out_arg(out, "out")?;
        let path = str_arg(path, "path")?;
        let inner = RomanizationTable::load(path).or_status()?;
        *out = Box::into_raw(Box::new(BaRomanization { inner }));
        Ok(())
    })
}

/// # Safety
/// `table` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ba_romanization_free(table: *mut BaRomanization) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Run parameters. Fill with `ba_params_default` before changing fields.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BaParams {
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub eta: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub delta: f64,
    pub sn_max: f64,
    pub iterations: u32,
    pub init_mass: f64,
    pub cap: f64,
    /// 0 normalizes neighbor weights over the source node, 1 over the
    /// neighbor.
    pub neighbor_norm: u32,
    pub min_count: u64,
    pub min_edge_weight: u32,
}

impl From<&PipelineSettings> for BaParams {
    fn from(s: &PipelineSettings) -> Self {
        BaParams {
            alpha: s.burst.alpha,
            beta: s.burst.beta,
            epsilon: s.burst.epsilon,
            eta: s.score.eta,
            lambda: s.score.lambda,
            gamma: s.score.gamma,
            delta: s.score.delta,
            sn_max: s.score.sn_max,
            iterations: s.score.iterations as u32,
            init_mass: s.score.init_mass,
            cap: s.score.cap,
            neighbor_norm: match s.score.neighbor_norm {
                NeighborNorm::Source => 0,
                NeighborNorm::Neighbor => 1,
            },
            min_count: s.min_count,
            min_edge_weight: s.min_edge_weight,
        }
    }
}

impl BaParams {
    fn settings(&self) -> Result<PipelineSettings, BaStatus> {
        let neighbor_norm = match self.neighbor_norm {
            0 => NeighborNorm::Source,
            1 => NeighborNorm::Neighbor,
            n => {
                return Err(fail(
                    BaStatus::InvalidArgument,
                    format!("neighbor_norm must be 0 or 1, got {n}"),
                ))
            }
        };
        let settings = PipelineSettings {
            burst: BurstParams {
                alpha: self.alpha,
                beta: self.beta,
                epsilon: self.epsilon,
            },
            score: ScoreParams {
                eta: self.eta,
                lambda: self.lambda,
                gamma: self.gamma,
                delta: self.delta,
                sn_max: self.sn_max,
                iterations: self.iterations as usize,
                init_mass: self.init_mass,
                cap: self.cap,
                neighbor_norm,
                ..ScoreParams::default()
            },
            min_count: self.min_count,
            min_edge_weight: self.min_edge_weight,
        };
        settings.burst.validate().or_status()?;
        settings.score.validate().or_status()?;
        Ok(settings)
    }
}

/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ba_params_default(out: *mut BaParams) -> BaStatus {
    guard(|| {
        out_arg(out, "out")?;
        *out = BaParams::from(&PipelineSettings::default());
        Ok(())
    })
}

/// Ranked alignment pairs and word translations.
pub struct BaResult {
    inner: AlignmentResult,
    /// C copies of the words of every pair and every translation.
    pair_words: Vec<(CString, CString)>,
    word_words: Vec<(CString, CString)>,
}

impl BaResult {
    fn new(inner: AlignmentResult) -> Self {
        let pair_words = inner
            .pairs
            .iter()
            .map(|p| (c_string(&p.source.word), c_string(&p.target.word)))
            .collect();
        let word_words = inner
            .words
            .iter()
            .map(|w| (c_string(&w.source_word), c_string(&w.target_word)))
            .collect();
        BaResult {
            inner,
            pair_words,
            word_words,
        }
    }
}

/// One ranked pair. Strings are owned by the result handle.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct BaPair {
    pub source_word: *const c_char,
    pub source_start: usize,
    pub source_end: usize,
    pub target_word: *const c_char,
    pub target_start: usize,
    pub target_end: usize,
    pub score: f64,
}

/// One word translation. Strings are owned by the result handle.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct BaWordTranslation {
    pub source_word: *const c_char,
    pub target_word: *const c_char,
    pub score: f64,
}

/// Align `source` to `target`. The two streams are put on a shared epoch
/// axis first. `romanization` and `params` may be null (empty table,
/// defaults). With `split_epoch > 0` both halves run in parallel and their
/// pairs are merged.
///
/// # Safety
/// Handles must be live; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ba_decipher(
    source: *const BaStream,
    target: *const BaStream,
    lexicon: *const BaLexicon,
    romanization: *const BaRomanization,
    params: *const BaParams,
    split_epoch: usize,
    out: *mut *mut BaResult,
) -> BaStatus {
    guard(|| {
        out_arg(out, "out")?;
        let source = &ref_arg(source, "source")?.inner;
        let target = &ref_arg(target, "target")?.inner;
        let lexicon = &ref_arg(lexicon, "lexicon")?.inner;
        let empty = RomanizationTable::new();
        let romanization = romanization.as_ref().map_or(&empty, |r| &r.inner);
        let settings = match params.as_ref() {
            Some(p) => p.settings()?,
            None => PipelineSettings::default(),
        };
        let (source, target) = coordinate(source, target).or_status()?;
        let matcher = UniversalMatcher::default();
        let inputs = PipelineInputs {
            source: &source,
            target: &target,
            lexicon,
            romanization,
            matcher: &matcher,
            source_base: None,
            target_base: None,
        };
        let result = if split_epoch > 0 {
            split_merge_decipher(inputs, split_epoch, &settings).or_status()?
        } else {
            run_pipeline(inputs, &settings).or_status()?.result
        };
        *out = Box::into_raw(Box::new(BaResult::new(result)));
        Ok(())
    })
}

/// Number of ranked pairs; 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ba_result_len(result: *const BaResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.pairs.len())
}

/// Pair at rank `index` (0 = best).
///
/// # Safety
/// `result` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ba_result_pair(
    result: *const BaResult,
    index: usize,
    out: *mut BaPair,
) -> BaStatus {
    guard(|| {
        out_arg(out, "out")?;
        let r = ref_arg(result, "result")?;
        let (p, (s, t)) = r
            .inner
            .pairs
            .get(index)
            .zip(r.pair_words.get(index))
            .ok_or_else(|| fail(BaStatus::OutOfRange, format!("no pair at rank {index}")))?;
        *out = BaPair {
            source_word: s.as_ptr(),
            source_start: p.source.period.start,
            source_end: p.source.period.end,
            target_word: t.as_ptr(),
            target_start: p.target.period.start,
            target_end: p.target.period.end,
            score: p.score,
        };
        Ok(())
    })
}

/// Number of word translations; 0 for a null handle.
///
/// # Safety
/// `result` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ba_result_num_words(result: *const BaResult) -> usize {
    result.as_ref().map_or(0, |r| r.inner.words.len())
}

/// # Safety
/// `result` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ba_result_word(
    result: *const BaResult,
    index: usize,
    out: *mut BaWordTranslation,
) -> BaStatus {
    guard(|| {
        out_arg(out, "out")?;
        let r = ref_arg(result, "result")?;
        let (w, (s, t)) = r
            .inner
            .words
            .get(index)
            .zip(r.word_words.get(index))
            .ok_or_else(|| {
                fail(BaStatus::OutOfRange, format!("no word translation at {index}"))
            })?;
        *out = BaWordTranslation {
            source_word: s.as_ptr(),
            target_word: t.as_ptr(),
            score: w.score,
        };
        Ok(())
    })
}

/// Write the ranked pairs as TSV.
///
/// # Safety
/// `result` must be a live handle and `path` a valid C string.
#[no_mangle]
pub unsafe extern "C" fn ba_result_write_pairs(
    result: *const BaResult,
    path: *const c_char,
) -> BaStatus {
    guard(|| {
        let r = ref_arg(result, "result")?;
        let path = str_arg(path, "path")?;
        let mut buf = Vec::new();
        r.inner
            .write_pairs(&mut buf)
            .and_then(|_| std::fs::write(path, buf))
            .map_err(|e| fail(BaStatus::Io, format!("{path}: {e}")))
    })
}

/// Top-`k` accuracy of the ranked pairs against a gold TSV file.
///
/// # Safety
/// `result` must be a live handle, `gold_path` a valid C string and `out`
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ba_result_accuracy(
    result: *const BaResult,
    gold_path: *const c_char,
    k: usize,
    out: *mut f64,
) -> BaStatus {
    guard(|| {
        out_arg(out, "out")?;
        let r = ref_arg(result, "result")?;
        let gold = GoldTable::load(str_arg(gold_path, "gold_path")?).or_status()?;
        *out = topk_accuracy(&r.inner, &gold, k).or_status()?;
        Ok(())
    })
}

/// # Safety
/// `result` must be null or a live handle. Strings obtained from it become
/// invalid.
#[no_mangle]
pub unsafe extern "C" fn ba_result_free(result: *mut BaResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Cost of a 0/1 state sequence against probabilities `p` (both of length
/// `len`) with base probability `q0` and burst probability
/// `min(alpha * q0, 1)`.
///
/// # Safety
/// `states` and `p` must point to `len` elements; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn ba_burst_cost(
    states: *const u8,
    p: *const f64,
    len: usize,
    q0: f64,
    alpha: f64,
    beta: f64,
    epsilon: f64,
    out: *mut f64,
) -> BaStatus {
    guard(|| {
        out_arg(out, "out")?;
        if len > 0 && (states.is_null() || p.is_null()) {
            return Err(fail(BaStatus::NullPointer, "states or p is null"));
        }
        let (s, p): (Vec<bool>, &[f64]) = if len == 0 {
            (Vec::new(), &[])
        } else {
            (
                std::slice::from_raw_parts(states, len)
                    .iter()
                    .map(|&b| b != 0)
                    .collect(),
                std::slice::from_raw_parts(p, len),
            )
        };
        let params = BurstParams {
            alpha,
            beta,
            epsilon,
        };
        params.validate().or_status()?;
        let q1 = params.burst_probability(q0);
        *out = burst_cost(&s, p, q0, q1, beta, epsilon).or_status()?;
        Ok(())
    })
}

/// Pronunciation clue for a normalized edit distance.
#[no_mangle]
pub extern "C" fn ba_pronunciation_clue(normalized_distance: f64) -> f64 {
    pronunciation_clue(normalized_distance)
}

/// Translation clue for a longest-common-subsequence ratio.
#[no_mangle]
pub extern "C" fn ba_translation_clue(ratio: f64) -> f64 {
    translation_clue(ratio)
}
