use std::collections::HashSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

use burstalign::burst::{detect_all, periods_by_word, write_burst_dump};
use burstalign::corpus::{coordinate, ingest_stream_with, load_stopwords, vocabulary};
use burstalign::eval::{generate_coordinated, split_merge_decipher, topk_accuracy, GoldTable};
use burstalign::lexicon::UniversalMatcher;
use burstalign::pipeline::{build_network, run_pipeline, PipelineInputs};
use burstalign::{
    AlignmentResult, Error, PipelineConfig, RomanizationTable, Result, SeedLexicon, Stream,
};

#[derive(Parser)]
#[command(name = "burstalign", version, about = "Align coordinated text streams through burst information networks")]
struct Cli {
    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Flat key=value configuration file.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Override one configuration key, e.g. `--set alpha=5`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (overrides `output_dir`).
    #[arg(short, long)]
    output_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    Source,
    Target,
}

#[derive(Subcommand)]
enum Command {
    /// Detect burst periods of every word in one stream.
    DetectBursts {
        #[command(flatten)]
        common: Common,
        /// Which configured corpus to read.
        #[arg(long, value_enum, default_value = "source")]
        stream: Side,
        /// Corpus file (overrides the configured one).
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Build the burst information network of one stream.
    BuildBinet {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "source")]
        stream: Side,
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Align the source network to the target network.
    Decipher {
        #[command(flatten)]
        common: Common,
        /// Keep only the top K ranked pairs.
        #[arg(long)]
        k: Option<usize>,
        /// Run both halves of the streams in parallel and merge.
        #[arg(long)]
        split_epoch: Option<usize>,
        #[arg(long)]
        disable_sp: bool,
        #[arg(long)]
        disable_st: bool,
        #[arg(long)]
        disable_sn: bool,
        #[arg(long)]
        disable_sb: bool,
    },
    /// Write a synthetic coordinated dataset with planted translations.
    Generate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        rng_seed: Option<u64>,
        #[arg(long)]
        seed_fraction: Option<f64>,
    },
    /// Top-K accuracy of a ranked pairs file against a gold file.
    Eval {
        /// Ranked pairs TSV written by `decipher`.
        #[arg(long)]
        result: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        /// One or more K values.
        #[arg(short, long, required = true, num_args = 1..)]
        k: Vec<usize>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_usage() { 1 } else { 2 })
        }
    }
}

fn load_config(common: &Common) -> Result<PipelineConfig> {
    let mut config = match &common.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    for kv in &common.overrides {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::InvalidConfig(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        config.set(k.trim(), v.trim())?;
    }
    if let Some(dir) = &common.output_dir {
        config.output_dir = dir.clone();
    }
    config.validate()?;
    Ok(config)
}

fn required<'a>(path: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
    path.as_deref()
        .ok_or_else(|| Error::InvalidConfig(format!("{key} is not configured")))
}

fn stopwords(config: &PipelineConfig) -> Result<Option<HashSet<String>>> {
    config.stopwords.as_ref().map(load_stopwords).transpose()
}

fn load_stream(path: &Path, config: &PipelineConfig, stop: Option<&HashSet<String>>) -> Result<Stream> {
    let stream = ingest_stream_with(path, config.granularity, stop)?;
    log::info!(
        "{}: {} documents, {} epochs, {} tokens",
        path.display(),
        stream.num_docs(),
        stream.num_epochs(),
        stream.total_tokens()
    );
    Ok(stream)
}

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>)> {
    std::fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let path = dir.join(name);
    let file = File::create(&path).map_err(|e| io_error(&path, e))?;
    Ok((path, BufWriter::new(file)))
}

fn io_error(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(
    dir: &Path,
    name: &str,
    f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<PathBuf> {
    let (path, mut out) = create(dir, name)?;
    f(&mut out)
        .and_then(|_| out.flush())
        .map_err(|e| io_error(&path, e))?;
    Ok(path)
}

/// Corpus and base corpus of one side.
fn side_paths(config: &PipelineConfig, side: Side, corpus: &Option<PathBuf>) -> Result<(PathBuf, Option<PathBuf>)> {
    let (key, configured, base) = match side {
        Side::Source => ("source_corpus", &config.source_corpus, &config.source_base),
        Side::Target => ("target_corpus", &config.target_corpus, &config.target_base),
    };
    let path = match corpus {
        Some(p) => p.clone(),
        None => required(configured, key)?.to_path_buf(),
    };
    Ok((path, base.clone()))
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::DetectBursts {
            common,
            stream,
            corpus,
        } => {
            let config = load_config(&common)?;
            let (path, base) = side_paths(&config, stream, &corpus)?;
            let stop = stopwords(&config)?;
            let stream = load_stream(&path, &config, stop.as_ref())?;
            let base = base
                .map(|b| load_stream(&b, &config, stop.as_ref()))
                .transpose()?;
            let words = vocabulary(&stream, config.settings.min_count.max(1));
            let sequences = detect_all(&stream, &words, &config.settings.burst, base.as_ref())?;
            let periods = periods_by_word(&sequences);
            let n: usize = periods.values().map(Vec::len).sum();
            let out = write_file(&config.output_dir, "bursts.tsv", |w| {
                write_burst_dump(&periods, w)
            })?;
            println!("{n} burst periods over {} words -> {}", periods.len(), out.display());
        }
        Command::BuildBinet {
            common,
            stream,
            corpus,
        } => {
            let config = load_config(&common)?;
            let (path, base) = side_paths(&config, stream, &corpus)?;
            let stop = stopwords(&config)?;
            let stream = load_stream(&path, &config, stop.as_ref())?;
            let base = base
                .map(|b| load_stream(&b, &config, stop.as_ref()))
                .transpose()?;
            let network = build_network(&stream, base.as_ref(), &config.settings)?;
            let net = &network.net;
            log::info!("{} nodes, {} edges", net.num_nodes(), net.num_edges());
            let nodes = write_file(&config.output_dir, "nodes.tsv", |w| net.write_nodes(w))?;
            let edges = write_file(&config.output_dir, "edges.tsv", |w| net.write_edges(w))?;
            println!(
                "{} nodes -> {}\n{} edges -> {}",
                net.num_nodes(),
                nodes.display(),
                net.num_edges(),
                edges.display()
            );
        }
        Command::Decipher {
            common,
            k,
            split_epoch,
            disable_sp,
            disable_st,
            disable_sn,
            disable_sb,
        } => {
            let mut config = load_config(&common)?;
            let score = &mut config.settings.score;
            for (off, weight) in [
                (disable_sp, &mut score.eta),
                (disable_st, &mut score.lambda),
                (disable_sn, &mut score.gamma),
                (disable_sb, &mut score.delta),
            ] {
                if off {
                    *weight = 0.0;
                }
            }
            if k.is_some() {
                config.k = k;
            }
            if split_epoch.is_some() {
                config.split_epoch = split_epoch;
            }
            config.validate()?;
            decipher(&config)?;
        }
        Command::Generate {
            common,
            rng_seed,
            seed_fraction,
        } => {
            let mut config = load_config(&common)?;
            if let Some(s) = rng_seed {
                config.synth.rng_seed = s;
            }
            if let Some(f) = seed_fraction {
                config.synth.seed_fraction = f;
            }
            let data = generate_coordinated(&config.synth)?;
            let dir = &config.output_dir;
            data.write_dir(dir)?;
            let report = &data.report;
            let text = format!(
                "rng_seed\t{}\nplanted_pairs\t{}\nseed_pairs\t{}\ngold_pairs\t{}\nsource_docs\t{}\ntarget_docs\t{}\nself_check\t{}\n",
                config.synth.rng_seed,
                report.planted.len(),
                report.planted.iter().filter(|p| p.seeded).count(),
                data.gold.len(),
                data.source.num_docs(),
                data.target.num_docs(),
                if report.self_check_passed() {
                    "pass".to_string()
                } else {
                    format!("fail ({} without seeded neighbor)", report.missing_seeded_neighbor.len())
                }
            );
            write_file(dir, "generate_report.txt", |w| w.write_all(text.as_bytes()))?;
            print!("{text}");
            println!("dataset -> {}", dir.display());
        }
        Command::Eval { result, gold, k } => {
            let file = File::open(&result).map_err(|e| io_error(&result, e))?;
            let pairs =
                AlignmentResult::read_pairs(BufReader::new(file), &result.display().to_string())?;
            let gold = GoldTable::load(&gold)?;
            let result = AlignmentResult {
                pairs,
                words: Vec::new(),
            };
            println!("k\taccuracy");
            for k in k {
                let acc = topk_accuracy(&result, &gold, k)?;
                println!("{k}\t{acc:.4}");
            }
        }
    }
    Ok(())
}

fn decipher(config: &PipelineConfig) -> Result<()> {
    let started = Instant::now();
    let stop = stopwords(config)?;
    let stop = stop.as_ref();
    let source = load_stream(required(&config.source_corpus, "source_corpus")?, config, stop)?;
    let target = load_stream(required(&config.target_corpus, "target_corpus")?, config, stop)?;
    let (source, target) = coordinate(&source, &target)?;
    let source_base = config
        .source_base
        .as_ref()
        .map(|p| load_stream(p, config, stop))
        .transpose()?;
    let target_base = config
        .target_base
        .as_ref()
        .map(|p| load_stream(p, config, stop))
        .transpose()?;
    let lexicon = match &config.lexicon {
        Some(p) => SeedLexicon::load(p)?,
        None => SeedLexicon::new(),
    };
    let romanization = match &config.romanization {
        Some(p) => RomanizationTable::load(p)?,
        None => RomanizationTable::new(),
    };
    let matcher = match &config.currency_symbols {
        Some(p) => UniversalMatcher::load_currency_symbols(p)?,
        None => UniversalMatcher::default(),
    };
    let gold = config.gold.as_ref().map(GoldTable::load).transpose()?;
    let inputs = PipelineInputs {
        source: &source,
        target: &target,
        lexicon: &lexicon,
        romanization: &romanization,
        matcher: &matcher,
        source_base: source_base.as_ref(),
        target_base: target_base.as_ref(),
    };

    let (mut result, mut report) = match config.split_epoch {
        Some(split) => {
            let result = split_merge_decipher(inputs, split, &config.settings)?;
            let report = format!(
                "split_epoch\t{split}\nsource_docs\t{}\ntarget_docs\t{}\n",
                source.num_docs(),
                target.num_docs()
            );
            (result, report)
        }
        None => {
            let out = run_pipeline(inputs, &config.settings)?;
            (out.result, out.report.to_string())
        }
    };
    let ranked = result.pairs.len();
    if let Some(k) = config.k {
        result.pairs.truncate(k);
    }

    let dir = &config.output_dir;
    let pairs_path = write_file(dir, "pairs.tsv", |w| result.write_pairs(w))?;
    let words_path = write_file(dir, "words.tsv", |w| result.write_words(w))?;
    if let Some(gold) = &gold {
        if !result.pairs.is_empty() {
            let k = gold.len().max(1);
            let acc = topk_accuracy(&result, gold, k)?;
            report.push_str(&format!("accuracy_top{k}\t{acc:.4}\n"));
            println!("top-{k} accuracy: {acc:.4}");
        }
    }
    if config.split_epoch.is_some() {
        report.push_str(&format!("wall_time_s\t{:.3}\n", started.elapsed().as_secs_f64()));
    }
    write_file(dir, "report.txt", |w| w.write_all(report.as_bytes()))?;
    println!(
        "{} of {ranked} ranked pairs -> {}\n{} word translations -> {}",
        result.pairs.len(),
        pairs_path.display(),
        result.words.len(),
        words_path.display()
    );
    Ok(())
}
