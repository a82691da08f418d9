//! Compile a small C program against the generated header and link it to
//! the shared library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "burstalign.h"

int main(int argc, char **argv) {
    BaStream *src = NULL, *tgt = NULL;
    BaLexicon *lex = NULL;
    BaResult *res = NULL;
    if (ba_stream_load(argv[1], 1, &src) != BA_STATUS_OK) return 10;
    if (ba_stream_load(argv[2], 1, &tgt) != BA_STATUS_OK) return 11;
    if (ba_lexicon_load(argv[3], &lex) != BA_STATUS_OK) return 12;
    if (ba_stream_load("/nonexistent", 1, &src) != BA_STATUS_IO) return 13;
    if (strlen(ba_last_error()) == 0) return 14;
    BaParams params;
    ba_params_default(&params);
    params.gamma = 0.0;
    if (ba_decipher(src, tgt, lex, NULL, &params, 0, &res) != BA_STATUS_OK) return 15;
    size_t n = ba_result_len(res);
    for (size_t i = 0; i < n && i < 3; i++) {
        BaPair p;
        if (ba_result_pair(res, i, &p) != BA_STATUS_OK) return 16;
        printf("%s\t%s\t%.4f\n", p.source_word, p.target_word, p.score);
    }
    printf("pairs %zu\n", n);
    ba_result_free(res);
    ba_lexicon_free(lex);
    ba_stream_free(src);
    ba_stream_free(tgt);
    return 0;
}
"#;

fn lib_dir() -> PathBuf {
    // target/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let lib = lib_dir();
    if !lib.join("libburstalign_ffi.so").exists() || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or shared library in {}", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let cfg = burstalign::SynthConfig {
        num_epochs: 30,
        n_topics: 2,
        words_per_topic: 4,
        n_planted_pairs: 8,
        docs_per_epoch: 8,
        background_vocab_size: 60,
        ..Default::default()
    };
    burstalign::eval::generate_coordinated(&cfg)
        .unwrap()
        .write_dir(&data)
        .unwrap();
    let c = dir.path().join("main.c");
    std::fs::write(&c, PROGRAM).unwrap();
    let bin = dir.path().join("main");
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include"))
        .arg(&c)
        .arg("-o")
        .arg(&bin)
        .arg("-L")
        .arg(&lib)
        .arg("-lburstalign_ffi")
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&bin)
        .arg(data.join("source.tsv"))
        .arg(data.join("target.tsv"))
        .arg(data.join("lexicon.tsv"))
        .env("LD_LIBRARY_PATH", &lib)
        .output()
        .unwrap();
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success(), "exit {:?}: {stdout}", out.status.code());
    assert!(stdout.contains("pairs "), "{stdout}");
}
