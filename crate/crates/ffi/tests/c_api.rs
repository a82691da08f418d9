use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::ptr;

use burstalign::eval::{generate_coordinated, SynthConfig};
use burstalign_ffi::*;

fn small_dataset(dir: &Path) {
    let cfg = SynthConfig {
        num_epochs: 40,
        n_topics: 2,
        words_per_topic: 6,
        n_planted_pairs: 12,
        docs_per_epoch: 12,
        background_vocab_size: 80,
        ..Default::default()
    };
    generate_coordinated(&cfg).unwrap().write_dir(dir).unwrap();
}

fn cpath(p: PathBuf) -> CString {
    CString::new(p.to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(ba_last_error()) }
        .to_string_lossy()
        .into_owned()
}

#[test]
fn load_decipher_and_read_back() {
    let dir = tempfile::tempdir().unwrap();
    small_dataset(dir.path());
    unsafe {
        let mut src = ptr::null_mut();
        let mut tgt = ptr::null_mut();
        let mut lex = ptr::null_mut();
        let mut rom = ptr::null_mut();
        assert_eq!(ba_stream_load(cpath(dir.path().join("source.tsv")).as_ptr(), 1, &mut src), BaStatus::Ok);
        assert_eq!(ba_stream_load(cpath(dir.path().join("target.tsv")).as_ptr(), 1, &mut tgt), BaStatus::Ok);
        assert_eq!(ba_lexicon_load(cpath(dir.path().join("lexicon.tsv")).as_ptr(), &mut lex), BaStatus::Ok);
        assert_eq!(
            ba_romanization_load(cpath(dir.path().join("romanization.tsv")).as_ptr(), &mut rom),
            BaStatus::Ok
        );
        assert_eq!(ba_stream_num_epochs(src), 40);
        assert!(ba_stream_num_docs(tgt) > 0);
        assert!(ba_lexicon_len(lex) > 0);

        let mut params = std::mem::zeroed::<BaParams>();
        assert_eq!(ba_params_default(&mut params), BaStatus::Ok);
        assert_eq!(params.eta, 0.25);
        assert_eq!(params.iterations, 20);

        let mut result = ptr::null_mut();
        assert_eq!(ba_decipher(src, tgt, lex, rom, &params, 0, &mut result), BaStatus::Ok);
        let n = ba_result_len(result);
        assert!(n > 0);
        let mut prev = f64::INFINITY;
        for i in 0..n {
            let mut pair = std::mem::zeroed::<BaPair>();
            assert_eq!(ba_result_pair(result, i, &mut pair), BaStatus::Ok);
            assert!(pair.score <= prev);
            prev = pair.score;
            assert!(!CStr::from_ptr(pair.source_word).to_bytes().is_empty());
            assert!(pair.source_start <= pair.source_end);
        }
        let mut pair = std::mem::zeroed::<BaPair>();
        assert_eq!(ba_result_pair(result, n, &mut pair), BaStatus::OutOfRange);
        assert!(last_error().contains("rank"));

        let mut word = std::mem::zeroed::<BaWordTranslation>();
        assert!(ba_result_num_words(result) > 0);
        assert_eq!(ba_result_word(result, 0, &mut word), BaStatus::Ok);

        let mut acc = 0.0;
        assert_eq!(
            ba_result_accuracy(result, cpath(dir.path().join("gold.tsv")).as_ptr(), 100, &mut acc),
            BaStatus::Ok
        );
        assert!((0.0..=1.0).contains(&acc));
        let out = dir.path().join("pairs.tsv");
        assert_eq!(ba_result_write_pairs(result, cpath(out.clone()).as_ptr()), BaStatus::Ok);
        assert_eq!(std::fs::read_to_string(out).unwrap().lines().count(), n);

        let mut split = ptr::null_mut();
        assert_eq!(ba_decipher(src, tgt, lex, rom, ptr::null(), 20, &mut split), BaStatus::Ok);
        assert!(ba_result_len(split) > 0);
        assert_eq!(ba_decipher(src, tgt, lex, rom, ptr::null(), 40, &mut split), BaStatus::InvalidArgument);

        ba_result_free(split);
        ba_result_free(result);
        ba_stream_free(src);
        ba_stream_free(tgt);
        ba_lexicon_free(lex);
        ba_romanization_free(rom);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(ba_stream_load(ptr::null(), 1, &mut s), BaStatus::NullPointer);
        let missing = CString::new("/nonexistent/corpus.tsv").unwrap();
        assert_eq!(ba_stream_load(missing.as_ptr(), 1, &mut s), BaStatus::Io);
        assert!(last_error().contains("/nonexistent/corpus.tsv"));
        assert!(s.is_null());
        assert_eq!(ba_stream_load(missing.as_ptr(), 0, &mut s), BaStatus::InvalidArgument);

        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("bad.tsv");
        std::fs::write(&bad, "d1\tnot-a-date\ta b\n").unwrap();
        assert_eq!(ba_stream_load(cpath(bad).as_ptr(), 1, &mut s), BaStatus::Parse);
        assert!(last_error().contains(":1:"));

        let invalid = [0xffu8, 0xfe, 0];
        assert_eq!(ba_stream_load(invalid.as_ptr().cast(), 1, &mut s), BaStatus::InvalidUtf8);

        let mut lex = ptr::null_mut();
        assert_eq!(ba_lexicon_new(&mut lex), BaStatus::Ok);
        let a = CString::new("种子").unwrap();
        let b = CString::new("seed").unwrap();
        assert_eq!(ba_lexicon_insert(lex, a.as_ptr(), b.as_ptr()), BaStatus::Ok);
        assert_eq!(ba_lexicon_len(lex), 1);
        ba_lexicon_free(lex);

        let mut params = std::mem::zeroed::<BaParams>();
        ba_params_default(&mut params);
        params.cap = 1.5;
        let mut r = ptr::null_mut();
        assert_eq!(
            ba_decipher(ptr::null(), ptr::null(), ptr::null(), ptr::null(), &params, 0, &mut r),
            BaStatus::NullPointer
        );
        assert_eq!(ba_result_len(ptr::null()), 0);
        ba_result_free(ptr::null_mut());
        ba_stream_free(ptr::null_mut());
    }
}

#[test]
fn scoring_functions() {
    // Term-by-term: q0 = 0.02, q1 = 0.18, two transitions.
    let p = [0.01, 0.2, 0.2, 0.01];
    let s = [0u8, 1, 1, 0];
    let expected = 2.0 * (0.02f64.ln() - 0.01f64.ln()).abs()
        + 2.0 * (0.2f64.ln() - 0.18f64.ln()).abs()
        + 2.0;
    let mut cost = 0.0;
    unsafe {
        assert_eq!(
            ba_burst_cost(s.as_ptr(), p.as_ptr(), 4, 0.02, 9.0, 1.0, 1e-9, &mut cost),
            BaStatus::Ok
        );
        assert_eq!(
            ba_burst_cost(s.as_ptr(), p.as_ptr(), 4, 0.02, 0.5, 1.0, 1e-9, &mut cost),
            BaStatus::InvalidArgument
        );
    }
    assert!((cost - expected).abs() < 1e-12);
    assert_eq!(ba_pronunciation_clue(0.4), 2.25);
    assert_eq!(ba_translation_clue(0.6), 1.25);
    let v = unsafe { CStr::from_ptr(ba_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/burstalign.h")).unwrap();
    let src = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/src/lib.rs")).unwrap();
    let exports: Vec<&str> = src
        .lines()
        .filter_map(|l| l.split("extern \"C\" fn ").nth(1))
        .map(|l| l.split('(').next().unwrap())
        .collect();
    assert!(exports.len() > 15);
    for f in exports {
        assert!(header.contains(&format!("{f}(")), "{f} missing from header");
    }
    for t in ["typedef struct BaStream BaStream;", "BA_STATUS_OK = 0", "typedef struct BaPair"] {
        assert!(header.contains(t), "{t}");
    }
}
