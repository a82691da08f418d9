//! Flat `key=value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Relative paths are
//! resolved against the directory of the configuration file. Unknown keys
//! are rejected so that typos do not silently fall back to defaults.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::burst::BurstParams;
use crate::corpus::Granularity;
use crate::eval::SynthConfig;
use crate::pipeline::PipelineSettings;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub settings: PipelineSettings,
    pub granularity: Granularity,
    pub source_corpus: Option<PathBuf>,
    pub target_corpus: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub romanization: Option<PathBuf>,
    pub stopwords: Option<PathBuf>,
    pub source_base: Option<PathBuf>,
    pub target_base: Option<PathBuf>,
    pub currency_symbols: Option<PathBuf>,
    pub gold: Option<PathBuf>,
    pub output_dir: PathBuf,
    /// Bound on the number of ranked pairs written.
    pub k: Option<usize>,
    pub split_epoch: Option<usize>,
    pub synth: SynthConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            settings: PipelineSettings::default(),
            granularity: Granularity::DAY,
            source_corpus: None,
            target_corpus: None,
            lexicon: None,
            romanization: None,
            stopwords: None,
            source_base: None,
            target_base: None,
            currency_symbols: None,
            gold: None,
            output_dir: PathBuf::from("out"),
            k: None,
            split_epoch: None,
            synth: SynthConfig::default(),
        }
    }
}

/// Every key accepted by [`PipelineConfig::set`].
pub const KEYS: &[&str] = &[
    "alpha",
    "beta",
    "epsilon",
    "eta",
    "lambda",
    "gamma",
    "delta",
    "sn_max",
    "iterations",
    "init_mass",
    "cap",
    "neighbor_norm",
    "max_combinations",
    "convergence_tol",
    "min_count",
    "min_edge_weight",
    "granularity",
    "source_corpus",
    "target_corpus",
    "lexicon",
    "romanization",
    "stopwords",
    "source_base",
    "target_base",
    "currency_symbols",
    "gold",
    "output_dir",
    "k",
    "split_epoch",
    "synth.num_epochs",
    "synth.n_topics",
    "synth.words_per_topic",
    "synth.n_planted_pairs",
    "synth.seed_fraction",
    "synth.docs_per_epoch",
    "synth.background_vocab_size",
    "synth.rng_seed",
    "synth.episode_min",
    "synth.episode_max",
    "synth.avoid_epoch",
    "synth.transliterated_share",
    "synth.compositional_share",
];

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::InvalidConfig(format!("bad value for {key}: {raw:?}")))
}

/// `none` (or an empty value) clears an optional setting.
fn optional<T: FromStr>(key: &str, raw: &str) -> Result<Option<T>> {
    if raw.is_empty() || raw.eq_ignore_ascii_case("none") {
        Ok(None)
    } else {
        value(key, raw).map(Some)
    }
}

impl PipelineConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let dir = path.parent().unwrap_or_else(|| Path::new(""));
        let mut config = PipelineConfig::default();
        config.apply(&text, &path.display().to_string(), dir)?;
        Ok(config)
    }

    /// Apply the lines of a configuration file on top of `self`.
    pub fn apply(&mut self, text: &str, name: &str, base_dir: &Path) -> Result<()> {
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, raw)) = line.split_once('=') else {
                return Err(Error::InvalidConfig(format!(
                    "{name}:{}: expected key=value",
                    i + 1
                )));
            };
            self.set_in(key.trim(), raw.trim(), base_dir)
                .map_err(|e| Error::InvalidConfig(format!("{name}:{}: {}", i + 1, strip(e))))?;
        }
        Ok(())
    }

    /// Set one key, resolving relative paths against the working directory.
    pub fn set(&mut self, key: &str, raw: &str) -> Result<()> {
        self.set_in(key, raw, Path::new(""))
    }

    fn set_in(&mut self, key: &str, raw: &str, base_dir: &Path) -> Result<()> {
        let path = |raw: &str| -> Option<PathBuf> {
            if raw.is_empty() || raw.eq_ignore_ascii_case("none") {
                None
            } else {
                Some(base_dir.join(raw))
            }
        };
        let b = &mut self.settings.burst;
        let s = &mut self.settings.score;
        let y = &mut self.synth;
        match key {
            "alpha" => b.alpha = value(key, raw)?,
            "beta" => b.beta = value(key, raw)?,
            "epsilon" => b.epsilon = value(key, raw)?,
            "eta" => s.eta = value(key, raw)?,
            "lambda" => s.lambda = value(key, raw)?,
            "gamma" => s.gamma = value(key, raw)?,
            "delta" => s.delta = value(key, raw)?,
            "sn_max" => s.sn_max = value(key, raw)?,
            "iterations" => s.iterations = value(key, raw)?,
            "init_mass" => s.init_mass = value(key, raw)?,
            "cap" => s.cap = value(key, raw)?,
            "neighbor_norm" => s.neighbor_norm = value(key, raw)?,
            "max_combinations" => s.max_combinations = value(key, raw)?,
            "convergence_tol" => s.convergence_tol = optional(key, raw)?,
            "min_count" => self.settings.min_count = value(key, raw)?,
            "min_edge_weight" => self.settings.min_edge_weight = value(key, raw)?,
            "granularity" => self.granularity = value(key, raw)?,
            "source_corpus" => self.source_corpus = path(raw),
            "target_corpus" => self.target_corpus = path(raw),
            "lexicon" => self.lexicon = path(raw),
            "romanization" => self.romanization = path(raw),
            "stopwords" => self.stopwords = path(raw),
            "source_base" => self.source_base = path(raw),
            "target_base" => self.target_base = path(raw),
            "currency_symbols" => self.currency_symbols = path(raw),
            "gold" => self.gold = path(raw),
            "output_dir" => {
                self.output_dir = path(raw)
                    .ok_or_else(|| Error::InvalidConfig("output_dir must not be empty".into()))?
            }
            "k" => self.k = optional(key, raw)?,
            "split_epoch" => self.split_epoch = optional(key, raw)?,
            "synth.num_epochs" => y.num_epochs = value(key, raw)?,
            "synth.n_topics" => y.n_topics = value(key, raw)?,
            "synth.words_per_topic" => y.words_per_topic = value(key, raw)?,
            "synth.n_planted_pairs" => y.n_planted_pairs = value(key, raw)?,
            "synth.seed_fraction" => y.seed_fraction = value(key, raw)?,
            "synth.docs_per_epoch" => y.docs_per_epoch = value(key, raw)?,
            "synth.background_vocab_size" => y.background_vocab_size = value(key, raw)?,
            "synth.rng_seed" => y.rng_seed = value(key, raw)?,
            "synth.episode_min" => y.episode_len.0 = value(key, raw)?,
            "synth.episode_max" => y.episode_len.1 = value(key, raw)?,
            "synth.avoid_epoch" => y.avoid_epoch = optional(key, raw)?,
            "synth.transliterated_share" => y.transliterated_share = value(key, raw)?,
            "synth.compositional_share" => y.compositional_share = value(key, raw)?,
            _ => return Err(Error::InvalidConfig(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Check parameter ranges of every stage.
    pub fn validate(&self) -> Result<()> {
        let wrap = |e: Error| match e {
            Error::InvalidParameter(m) => Error::InvalidConfig(m),
            other => other,
        };
        self.settings.burst.validate().map_err(wrap)?;
        self.settings.score.validate().map_err(wrap)?;
        if self.k == Some(0) {
            return Err(Error::InvalidConfig("k must be >= 1".into()));
        }
        Ok(())
    }

    pub fn burst(&self) -> &BurstParams {
        &self.settings.burst
    }

    /// Render as a configuration file that loads back to an equal value
    /// (paths are written as given).
    pub fn to_config_string(&self) -> String {
        let b = &self.settings.burst;
        let s = &self.settings.score;
        let y = &self.synth;
        let opt = |v: Option<String>| v.unwrap_or_else(|| "none".into());
        let p = |v: &Option<PathBuf>| opt(v.as_ref().map(|p| p.display().to_string()));
        let mut lines = vec![
            format!("alpha={}", b.alpha),
            format!("beta={}", b.beta),
            format!("epsilon={}", b.epsilon),
            format!("eta={}", s.eta),
            format!("lambda={}", s.lambda),
            format!("gamma={}", s.gamma),
            format!("delta={}", s.delta),
            format!("sn_max={}", s.sn_max),
            format!("iterations={}", s.iterations),
            format!("init_mass={}", s.init_mass),
            format!("cap={}", s.cap),
            format!("neighbor_norm={}", s.neighbor_norm),
            format!("max_combinations={}", s.max_combinations),
            format!("convergence_tol={}", opt(s.convergence_tol.map(|v| v.to_string()))),
            format!("min_count={}", self.settings.min_count),
            format!("min_edge_weight={}", self.settings.min_edge_weight),
            format!("granularity={}", self.granularity),
        ];
        for (k, v) in [
            ("source_corpus", &self.source_corpus),
            ("target_corpus", &self.target_corpus),
            ("lexicon", &self.lexicon),
            ("romanization", &self.romanization),
            ("stopwords", &self.stopwords),
            ("source_base", &self.source_base),
            ("target_base", &self.target_base),
            ("currency_symbols", &self.currency_symbols),
            ("gold", &self.gold),
        ] {
            lines.push(format!("{k}={}", p(v)));
        }
        lines.push(format!("output_dir={}", self.output_dir.display()));
        lines.push(format!("k={}", opt(self.k.map(|v| v.to_string()))));
        lines.push(format!(
            "split_epoch={}",
            opt(self.split_epoch.map(|v| v.to_string()))
        ));
        lines.extend([
            format!("synth.num_epochs={}", y.num_epochs),
            format!("synth.n_topics={}", y.n_topics),
            format!("synth.words_per_topic={}", y.words_per_topic),
            format!("synth.n_planted_pairs={}", y.n_planted_pairs),
            format!("synth.seed_fraction={}", y.seed_fraction),
            format!("synth.docs_per_epoch={}", y.docs_per_epoch),
            format!("synth.background_vocab_size={}", y.background_vocab_size),
            format!("synth.rng_seed={}", y.rng_seed),
            format!("synth.episode_min={}", y.episode_len.0),
            format!("synth.episode_max={}", y.episode_len.1),
            format!(
                "synth.avoid_epoch={}",
                opt(y.avoid_epoch.map(|v| v.to_string()))
            ),
            format!("synth.transliterated_share={}", y.transliterated_share),
            format!("synth.compositional_share={}", y.compositional_share),
        ]);
        lines.join("\n") + "\n"
    }
}

fn strip(e: Error) -> String {
    match e {
        Error::InvalidConfig(m) => m,
        other => other.to_string(),
    }
}
