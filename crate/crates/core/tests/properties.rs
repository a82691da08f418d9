use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use burstalign::align::{
    candidates, score_coburst, translation_clue, pronunciation_clue, CandidateIndex,
};
use burstalign::binet::NeighborNorm;
use burstalign::burst::{burst_cost, detect_bursts, periods_of, states_from_periods};
use burstalign::corpus::{vocabulary, word_stats};
use burstalign::eval::topk_accuracy_of;
use burstalign::text::{lcs_len, levenshtein};
use burstalign::{
    BINet, BurstElement, BurstParams, BurstPeriod, Document, GoldTable, Granularity,
    RomanizationTable, Stream, WordStats,
};

fn min_cost_exhaustive(p: &[f64], q0: f64, params: &BurstParams) -> f64 {
    let q1 = params.burst_probability(q0);
    let t = p.len();
    (0u32..1 << t)
        .map(|m| {
            let s: Vec<bool> = (0..t).map(|k| m >> k & 1 == 1).collect();
            burst_cost(&s, p, q0, q1, params.beta, params.epsilon).unwrap()
        })
        .fold(f64::INFINITY, f64::min)
}

fn net_strategy() -> impl Strategy<Value = BINet> {
    (1usize..40, 5usize..60).prop_flat_map(|(n, t)| {
        let nodes = prop::collection::btree_set((0u8..30, 0..t, 0usize..8), n).prop_map(move |s| {
            let mut seen = BTreeSet::new();
            s.into_iter()
                .map(|(w, a, len)| BurstElement::new(format!("w{w}"), a, (a + len).min(t - 1)))
                .filter(|e| seen.insert(e.clone()))
                .collect::<Vec<_>>()
        });
        nodes.prop_flat_map(|nodes| {
            let n = nodes.len();
            let edges = prop::collection::vec((0..n, 0..n, 1u32..6), 0..n * 3);
            (Just(nodes), edges)
        })
    })
    .prop_map(|(nodes, edges)| {
        let edges: Vec<_> = edges.into_iter().filter(|(a, b, _)| a != b).collect();
        BINet::from_edges(nodes, edges).unwrap()
    })
}

fn stream_strategy() -> impl Strategy<Value = Stream> {
    (1usize..12).prop_flat_map(|t| {
        prop::collection::vec(
            (0..t, prop::collection::vec(prop::sample::select(vec!["a", "b", "c", "d", "e"]), 0..6)),
            0..30,
        )
        .prop_map(move |docs| {
            let docs = docs
                .into_iter()
                .enumerate()
                .map(|(i, (epoch, toks))| Document {
                    doc_id: format!("d{i}"),
                    epoch,
                    tokens: toks.into_iter().map(String::from).collect(),
                })
                .collect();
            Stream::new(t, docs, Granularity::DAY).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn dp_matches_exhaustive(
        p in prop::collection::vec(0.0f64..0.5, 1..10),
        q0 in 0.001f64..0.2,
        alpha in 1.5f64..15.0,
        beta in 0.0f64..3.0,
    ) {
        let params = BurstParams { alpha, beta, epsilon: 1e-9 };
        let stats = WordStats { word: "w".into(), p: p.clone(), q0, count: 1 };
        let seq = detect_bursts(&stats, &params).unwrap();
        let best = min_cost_exhaustive(&p, q0, &params);
        prop_assert!((seq.cost - best).abs() < 1e-9);
    }

    #[test]
    fn transitions_never_increase_with_beta(
        p in prop::collection::vec(0.0f64..0.5, 1..30),
        q0 in 0.001f64..0.2,
        b1 in 0.0f64..3.0,
        extra in 0.0f64..3.0,
    ) {
        let run = |beta| {
            let params = BurstParams { beta, ..BurstParams::default() };
            detect_bursts(&WordStats { word: "w".into(), p: p.clone(), q0, count: 1 }, &params)
                .unwrap()
                .transitions()
        };
        prop_assert!(run(b1 + extra) <= run(b1));
    }

    #[test]
    fn periods_round_trip(states in prop::collection::vec(any::<bool>(), 0..50)) {
        let periods = periods_of(&states);
        prop_assert_eq!(states_from_periods(&periods, states.len()), states);
        for w in periods.windows(2) {
            // maximal runs: separated by at least one non-burst epoch
            prop_assert!(w[0].end + 1 < w[1].start);
        }
    }

    #[test]
    fn normalized_source_weights_sum_to_one(net in net_strategy()) {
        for id in net.node_ids() {
            if net.neighbors(id).is_empty() {
                continue;
            }
            let sum: f64 = net.normalized_neighbors(id, NeighborNorm::Source).map(|(_, w)| w).sum();
            prop_assert!((sum - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn edges_are_symmetric(net in net_strategy()) {
        for (a, b, w) in net.edges() {
            prop_assert_eq!(net.weight(a, b), Some(w));
            prop_assert_eq!(net.weight(b, a), Some(w));
        }
    }

    #[test]
    fn candidate_index_matches_scan(
        source in net_strategy(),
        target in net_strategy(),
        start in 0usize..60,
        len in 0usize..10,
    ) {
        let period = BurstPeriod::new(start, start + len);
        let index = CandidateIndex::new(&target);
        let got: Vec<BurstElement> = index.query(period).map(|id| target.node(id).clone()).collect();
        let want: BTreeSet<BurstElement> = target
            .nodes()
            .iter()
            .filter(|e| e.period.overlaps(&period))
            .cloned()
            .collect();
        prop_assert_eq!(got.iter().cloned().collect::<BTreeSet<_>>(), want);
        prop_assert_eq!(got.len(), got.iter().collect::<BTreeSet<_>>().len());
        for c in source.nodes() {
            let cands = candidates(&source, &target, c).unwrap();
            prop_assert!(cands.iter().all(|e| e.period.overlaps(&c.period)));
        }
    }

    #[test]
    fn coburst_is_symmetric_and_bounded(
        pairs in prop::collection::vec((any::<bool>(), any::<bool>()), 1..40)
    ) {
        let (a, b): (Vec<bool>, Vec<bool>) = pairs.into_iter().unzip();
        let ab = score_coburst(&a, &b).unwrap();
        prop_assert_eq!(ab.to_bits(), score_coburst(&b, &a).unwrap().to_bits());
        prop_assert!((0.0..=0.5).contains(&ab));
    }

    #[test]
    fn clues_are_bounded(x in 0.0f64..=2.0) {
        let sp = pronunciation_clue(x);
        let st = translation_clue(x.min(1.0));
        prop_assert!((0.0..=3.0).contains(&sp));
        prop_assert!((0.0..=2.0).contains(&st));
    }

    #[test]
    fn edit_measures_agree_on_identity(a in "[a-z]{0,12}", b in "[a-z]{0,12}") {
        prop_assert_eq!(levenshtein(&a, &a), 0);
        prop_assert_eq!(lcs_len(&a, &a), a.len());
        prop_assert_eq!(levenshtein(&a, &b), levenshtein(&b, &a));
        prop_assert!(lcs_len(&a, &b) <= a.len().min(b.len()));
        prop_assert!(levenshtein(&a, &b) >= a.len().abs_diff(b.len()));
    }

    #[test]
    fn romanizing_ascii_only_lowercases(word in "[A-Za-z0-9]{1,12}") {
        let table = RomanizationTable::new();
        let once = table.romanize(&word);
        prop_assert_eq!(&once, &word.to_ascii_lowercase());
        prop_assert_eq!(table.romanize(&once), once);
    }

    #[test]
    fn stream_probabilities_are_consistent(stream in stream_strategy()) {
        let total: u64 = (0..stream.num_epochs()).map(|e| stream.epoch_total(e)).sum();
        prop_assert_eq!(total, stream.total_tokens());
        for w in vocabulary(&stream, 1) {
            let s = word_stats(&stream, &w, None).unwrap();
            prop_assert!(s.p.iter().all(|p| (0.0..=1.0).contains(p)));
            prop_assert!((s.q0 - stream.count(&w) as f64 / total as f64).abs() < 1e-12);
            let by_epoch: u64 = (0..stream.num_epochs()).map(|e| stream.count_at(&w, e)).sum();
            prop_assert_eq!(by_epoch, stream.count(&w));
        }
    }

    #[test]
    fn topk_accuracy_is_a_fraction(
        gold in prop::collection::btree_map("[a-e]", "[v-z]", 1..5),
        guesses in prop::collection::vec(("[a-e]", "[v-z]"), 0..20),
        k in 1usize..10,
    ) {
        let mut table = GoldTable::new();
        for (s, t) in &gold {
            table.insert(s, t);
        }
        let pairs: Vec<(&str, &str)> = guesses.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        match topk_accuracy_of(pairs.iter().copied(), &table, k) {
            Ok(acc) => prop_assert!((0.0..=1.0).contains(&acc)),
            Err(_) => prop_assert!(pairs.is_empty()),
        }
    }
}

#[test]
fn build_counts_documents_in_shared_periods() {
    let docs = vec![
        Document { doc_id: "1".into(), epoch: 0, tokens: vec!["a".into(), "b".into()] },
        Document { doc_id: "2".into(), epoch: 1, tokens: vec!["a".into(), "b".into(), "b".into()] },
        Document { doc_id: "3".into(), epoch: 2, tokens: vec!["a".into(), "b".into()] },
    ];
    let stream = Stream::new(3, docs, Granularity::DAY).unwrap();
    let mut periods = BTreeMap::new();
    periods.insert("a".to_string(), vec![BurstPeriod::new(0, 1)]);
    periods.insert("b".to_string(), vec![BurstPeriod::new(1, 2)]);
    let net = BINet::build(&stream, &periods, 1);
    let a = net.id_of(&BurstElement::new("a", 0, 1)).unwrap();
    let b = net.id_of(&BurstElement::new("b", 1, 2)).unwrap();
    // only document 2 lies in both periods; repeated tokens count once
    assert_eq!(net.weight(a, b), Some(1));
}
