//! Two-state burst detection.
//!
//! A word's burst sequence `s` assigns every epoch either the base state
//! (expected probability `q0`) or the burst state (`q1 = alpha * q0`). The
//! optimal sequence minimizes
//!
//! ```text
//! sum_t |ln max(p_t, eps) - ln q_{s_t}|  +  beta * #{t : s_t != s_{t+1}}
//! ```
//!
//! which is solved exactly by a two-state dynamic program.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::corpus::{word_stats, Stream, WordStats};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BurstParams {
    /// Burst probability multiplier, `q1 = alpha * q0`.
    pub alpha: f64,
    /// Penalty per state transition.
    pub beta: f64,
    /// Floor applied to `p` before taking logs.
    pub epsilon: f64,
}

impl Default for BurstParams {
    fn default() -> Self {
        BurstParams {
            alpha: 9.0,
            beta: 1.0,
            epsilon: 1e-9,
        }
    }
}

impl BurstParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 1.0) || !self.alpha.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "alpha must be > 1, got {}",
                self.alpha
            )));
        }
        if !(self.beta >= 0.0) || !self.beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "beta must be >= 0, got {}",
                self.beta
            )));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be > 0, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }

    /// Burst-state probability for base probability `q0`, clamped to 1.
    pub fn burst_probability(&self, q0: f64) -> f64 {
        (self.alpha * q0).min(1.0)
    }
}

/// Inclusive range of epochs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BurstPeriod {
    pub start: usize,
    pub end: usize,
}

impl BurstPeriod {
    pub fn new(start: usize, end: usize) -> Self {
        debug_assert!(start <= end);
        BurstPeriod { start, end }
    }

    pub fn contains(&self, epoch: usize) -> bool {
        self.start <= epoch && epoch <= self.end
    }

    pub fn overlaps(&self, other: &BurstPeriod) -> bool {
        self.start <= other.end && other.start <= self.end
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

impl fmt::Display for BurstPeriod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{}]", self.start, self.end)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BurstSequence {
    pub word: String,
    pub states: Vec<bool>,
    pub cost: f64,
}

impl BurstSequence {
    pub fn num_epochs(&self) -> usize {
        self.states.len()
    }

    /// Number of epochs in the burst state.
    pub fn burst_epochs(&self) -> usize {
        self.states.iter().filter(|&&b| b).count()
    }

    pub fn transitions(&self) -> usize {
        self.states.windows(2).filter(|w| w[0] != w[1]).count()
    }
}

#[inline]
fn state_cost(p: f64, log_q: f64, epsilon: f64) -> f64 {
    (p.max(epsilon).ln() - log_q).abs()
}

/// Cost of the state sequence `s` against the probability series `p`.
pub fn burst_cost(s: &[bool], p: &[f64], q0: f64, q1: f64, beta: f64, epsilon: f64) -> Result<f64> {
    if s.len() != p.len() {
        return Err(Error::LengthMismatch {
            left: s.len(),
            right: p.len(),
        });
    }
    if !(q0 > 0.0 && q1 > 0.0) {
        return Err(Error::InvalidParameter(
            "state probabilities must be positive".into(),
        ));
    }
    let log_q = [q0.ln(), q1.ln()];
    let fit: f64 = s
        .iter()
        .zip(p)
        .map(|(&b, &pt)| state_cost(pt, log_q[usize::from(b)], epsilon))
        .sum();
    let transitions = s.windows(2).filter(|w| w[0] != w[1]).count();
    Ok(fit + beta * transitions as f64)
}

/// Optimal burst sequence for one word.
///
/// Among equal-cost optima the lexicographically smallest sequence (reading
/// `false < true` from the first epoch) is returned, so flat signals never
/// burst.
pub fn detect_bursts(stats: &WordStats, params: &BurstParams) -> Result<BurstSequence> {
    params.validate()?;
    let n = stats.p.len();
    if n == 0 {
        return Err(Error::EmptyStream);
    }
    if !(stats.q0 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "base probability of {:?} must be positive",
            stats.word
        )));
    }
    let q0 = stats.q0;
    let q1 = params.burst_probability(q0);
    let log_q = [q0.ln(), q1.ln()];
    let beta = params.beta;

    // suffix[t][k]: least cost of epochs t.. given state k at t.
    let mut suffix = vec![[0.0f64; 2]; n];
    for t in (0..n).rev() {
        for k in 0..2 {
            let here = state_cost(stats.p[t], log_q[k], params.epsilon);
            let rest = if t + 1 < n {
                let stay = suffix[t + 1][k];
                let switch = suffix[t + 1][1 - k] + beta;
                stay.min(switch)
            } else {
                0.0
            };
            suffix[t][k] = here + rest;
        }
    }

    let mut states = Vec::with_capacity(n);
    let mut prev = suffix[0][1] < suffix[0][0];
    states.push(prev);
    for row in &suffix[1..] {
        let via = |k: usize| row[k] + if (k == 1) != prev { beta } else { 0.0 };
        prev = via(1) < via(0);
        states.push(prev);
    }

    let cost = burst_cost(&states, &stats.p, q0, q1, beta, params.epsilon)?;
    Ok(BurstSequence {
        word: stats.word.clone(),
        states,
        cost,
    })
}

/// Maximal runs of burst epochs, in increasing start order.
pub fn extract_periods(seq: &BurstSequence) -> Vec<BurstPeriod> {
    periods_of(&seq.states)
}

pub fn periods_of(states: &[bool]) -> Vec<BurstPeriod> {
    let mut periods = Vec::new();
    let mut run_start = None;
    for (t, &b) in states.iter().enumerate() {
        match (b, run_start) {
            (true, None) => run_start = Some(t),
            (false, Some(s)) => {
                periods.push(BurstPeriod::new(s, t - 1));
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = run_start {
        periods.push(BurstPeriod::new(s, states.len() - 1));
    }
    periods
}

/// Inverse of [`periods_of`].
pub fn states_from_periods(periods: &[BurstPeriod], num_epochs: usize) -> Vec<bool> {
    let mut states = vec![false; num_epochs];
    for p in periods {
        for s in &mut states[p.start..=p.end] {
            *s = true;
        }
    }
    states
}

/// Burst sequences for every word in `words`, keyed by word.
///
/// Words are processed in parallel; the result does not depend on the
/// thread count.
pub fn detect_all(
    stream: &Stream,
    words: &[String],
    params: &BurstParams,
    base: Option<&Stream>,
) -> Result<BTreeMap<String, BurstSequence>> {
    params.validate()?;
    words
        .par_iter()
        .filter_map(|w| match word_stats(stream, w, base) {
            Ok(stats) => Some(detect_bursts(&stats, params).map(|s| (w.clone(), s))),
            // A word missing from the base stream has no defined q0; skip it.
            Err(Error::UnknownWord(_)) => None,
            Err(e) => Some(Err(e)),
        })
        .collect()
}

/// Burst periods of every word that bursts at least once.
pub fn periods_by_word(
    sequences: &BTreeMap<String, BurstSequence>,
) -> BTreeMap<String, Vec<BurstPeriod>> {
    sequences
        .iter()
        .filter_map(|(w, s)| {
            let periods = extract_periods(s);
            (!periods.is_empty()).then(|| (w.clone(), periods))
        })
        .collect()
}

/// Burst dump: `word<TAB>start<TAB>end`, sorted by word then start.
pub fn write_burst_dump<W: std::io::Write>(
    periods: &BTreeMap<String, Vec<BurstPeriod>>,
    mut out: W,
) -> std::io::Result<()> {
    for (word, ps) in periods {
        for p in ps {
            writeln!(out, "{}\t{}\t{}", word, p.start, p.end)?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(p: Vec<f64>, q0: f64) -> WordStats {
        WordStats {
            word: "w".into(),
            count: 1,
            p,
            q0,
        }
    }

    fn bits(v: &[u8]) -> Vec<bool> {
        v.iter().map(|&b| b == 1).collect()
    }

    #[test]
    fn cost_identity_cases() {
        let c = burst_cost(&bits(&[0, 0]), &[0.1, 0.1], 0.1, 0.9, 1.0, 1e-9).unwrap();
        assert_eq!(c, 0.0);
        let c = burst_cost(&bits(&[0, 1]), &[0.1, 0.9], 0.1, 0.9, 1.0, 1e-9).unwrap();
        assert!((c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cost_length_mismatch() {
        assert!(matches!(
            burst_cost(&bits(&[0]), &[0.1, 0.2], 0.1, 0.2, 1.0, 1e-9),
            Err(Error::LengthMismatch { left: 1, right: 2 })
        ));
    }

    #[test]
    fn flat_signal_never_bursts() {
        let seq = detect_bursts(&stats(vec![0.02; 30], 0.02), &BurstParams::default()).unwrap();
        assert!(seq.states.iter().all(|&b| !b));
        assert_eq!(seq.cost, 0.0);
    }

    #[test]
    fn flat_signal_with_free_transitions_stays_calm() {
        let params = BurstParams {
            beta: 0.0,
            ..Default::default()
        };
        let seq = detect_bursts(&stats(vec![0.02; 8], 0.02), &params).unwrap();
        assert!(seq.states.iter().all(|&b| !b));
    }

    #[test]
    fn four_epoch_example() {
        let seq = detect_bursts(
            &stats(vec![0.01, 0.2, 0.2, 0.01], 0.02),
            &BurstParams::default(),
        )
        .unwrap();
        assert_eq!(seq.states, bits(&[0, 1, 1, 0]));
    }

    #[test]
    fn absent_epochs_are_floored() {
        let seq = detect_bursts(&stats(vec![0.0, 0.5, 0.0], 0.05), &BurstParams::default())
            .unwrap();
        assert!(seq.cost.is_finite());
        assert_eq!(seq.states, bits(&[0, 1, 0]));
    }

    #[test]
    fn high_frequency_word_clamps_q1() {
        let params = BurstParams::default();
        assert_eq!(params.burst_probability(0.5), 1.0);
        let seq = detect_bursts(&stats(vec![0.5, 1.0, 0.5], 0.5), &params).unwrap();
        assert!(seq.cost.is_finite());
    }

    #[test]
    fn rejects_bad_params() {
        let bad = BurstParams {
            alpha: 1.0,
            ..Default::default()
        };
        assert!(detect_bursts(&stats(vec![0.1], 0.1), &bad).is_err());
        assert!(detect_bursts(&stats(vec![0.1], 0.0), &BurstParams::default()).is_err());
    }

    #[test]
    fn periods_examples() {
        assert!(periods_of(&bits(&[0, 0, 0])).is_empty());
        assert_eq!(
            periods_of(&bits(&[1, 1, 0, 1])),
            vec![BurstPeriod::new(0, 1), BurstPeriod::new(3, 3)]
        );
        assert_eq!(periods_of(&bits(&[1, 1, 1, 1])), vec![BurstPeriod::new(0, 3)]);
    }

    #[test]
    fn period_overlap_is_inclusive() {
        let a = BurstPeriod::new(10, 15);
        assert!(a.overlaps(&BurstPeriod::new(14, 20)));
        assert!(a.overlaps(&BurstPeriod::new(15, 15)));
        assert!(!a.overlaps(&BurstPeriod::new(16, 20)));
    }
}
