//! Pathwise agreement of forward and backward simulation, history files,
//! update-sequence serialization and the perfect sampler.

use std::path::PathBuf;

use infoperc::backward::{develop_history, perfect_sample, reconstruct};
use infoperc::forward::run_forward;
use infoperc::mixing::{exact_stationary, tv_distance, DistributionTable};
use infoperc::{Error, Graph, SpinConfig, UpdateEvent, UpdateSequence, VertexSet};
use proptest::prelude::*;

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Compare against a stored baseline; `INFOPERC_BLESS=1` rewrites it.
fn check_golden(name: &str, actual: &str) {
    let path = golden(name);
    if std::env::var_os("INFOPERC_BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {name}"));
    assert_eq!(actual, expected, "golden mismatch for {name}");
}

#[test]
fn backward_equals_forward_on_mixed_graphs() {
    let graphs = [
        Graph::cycle(17).unwrap(),
        Graph::torus(3, 3).unwrap(),
        // A non-regular graph: a path with a pendant triangle.
        Graph::from_edges(7, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 3), (2, 6)]).unwrap(),
    ];
    for g in &graphs {
        for seed in 0..40 {
            let seq = UpdateSequence::generate(g.n(), 4.0, seed).unwrap();
            let x0 = SpinConfig::from_index((seed as usize).wrapping_mul(2_654_435_761) % (1 << g.n()), g.n());
            for beta in [0.05, 0.3, 0.8] {
                let fwd = run_forward(&x0, &seq, beta, g).unwrap();
                let h = develop_history(&VertexSet::all(g.n()), &seq, beta, g, 1e9).unwrap();
                assert_eq!(h.uses_local_degrees(), !g.is_regular());
                let back = reconstruct(&h, &seq, beta, g, &x0).unwrap();
                assert_eq!(fwd.spins(), &back[..]);
                // Sub-histories agree with the joint one.
                let single = develop_history(&VertexSet::singleton(0), &seq, beta, g, 1e9).unwrap();
                assert_eq!(reconstruct(&single, &seq, beta, g, &x0).unwrap()[0], fwd.get(0));
            }
        }
    }
}

#[test]
fn history_dump_golden() {
    let g = Graph::cycle(8).unwrap();
    let seq = UpdateSequence::generate(8, 2.0, 2024).unwrap();
    let h = develop_history(&VertexSet::new(vec![0, 4], 8).unwrap(), &seq, 0.3, &g, 1e9).unwrap();
    check_golden("history_c8.txt", &h.dump_string());
}

#[test]
fn sequence_round_trips() {
    let seq = UpdateSequence::generate(12, 3.5, 77).unwrap();
    let mut text = Vec::new();
    seq.write_text(&mut text).unwrap();
    let back = UpdateSequence::read_text(&text[..]).unwrap();
    assert_eq!(back.events().collect::<Vec<_>>(), seq.events().collect::<Vec<_>>());
    let mut bin = Vec::new();
    seq.write_binary(&mut bin).unwrap();
    let back = UpdateSequence::read_binary(&bin[..]).unwrap();
    assert_eq!(back.events().collect::<Vec<_>>(), seq.events().collect::<Vec<_>>());
    assert_eq!(back.horizon(), 3.5);
}

#[test]
fn sequence_is_prefix_consistent() {
    let short = UpdateSequence::generate(9, 2.0, 5).unwrap();
    let long = UpdateSequence::generate(9, 6.0, 5).unwrap();
    for v in 0..9 {
        let k = short.site_len(v);
        assert_eq!(short.site_times(v), &long.site_times(v)[..k]);
        assert!(long.site_times(v).get(k).is_none_or(|&t| t > 2.0));
    }
}

#[test]
fn history_from_other_graph_is_rejected() {
    let g = Graph::cycle(6).unwrap();
    let other = Graph::from_edges(6, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 5)]).unwrap();
    let seq = UpdateSequence::generate(6, 5.0, 3).unwrap();
    let h = develop_history(&VertexSet::all(6), &seq, 0.4, &g, 1e9).unwrap();
    if !h.branch_points().is_empty() {
        let r = reconstruct(&h, &seq, 0.4, &other, &SpinConfig::all_plus(6));
        assert!(matches!(r, Err(Error::Integrity(_))));
    }
}

#[test]
fn branch_into_untouched_neighbor_reads_initial_state() {
    let g = Graph::cycle(4).unwrap();
    // Site 0 updates once with a branching mark; its neighbors never update.
    let seq = UpdateSequence::from_events(4, 1.0, 0, &[UpdateEvent { site: 0, time: 0.5, u: 0.99 }]).unwrap();
    let h = develop_history(&VertexSet::singleton(0), &seq, 0.5, &g, 1e9).unwrap();
    assert_eq!(h.surviving().as_slice(), &[1, 3]);
    assert_eq!(h.chi(), 2);
    for idx in 0..16 {
        let x0 = SpinConfig::from_index(idx, 4);
        let fwd = run_forward(&x0, &seq, 0.5, &g).unwrap();
        assert_eq!(reconstruct(&h, &seq, 0.5, &g, &x0).unwrap(), vec![fwd.get(0)]);
    }
}

#[test]
fn perfect_sampler_matches_exact_law_on_small_cycle() {
    let g = Graph::cycle(4).unwrap();
    let beta = 0.4;
    let samples = 100_000u64;
    let mut counts = vec![0u64; 16];
    let drawn: Vec<usize> = infoperc::replicas::map(99, samples as usize, |_, s| {
        Ok(perfect_sample(&g, beta, s, 0.5)?.to_index())
    })
    .unwrap();
    for i in drawn {
        counts[i] += 1;
    }
    let empirical = DistributionTable::new(4, counts.iter().map(|&c| c as f64 / samples as f64).collect()).unwrap();
    let pi = exact_stationary(&g, beta).unwrap();
    let expected: Vec<f64> = pi.probs().iter().map(|p| p * samples as f64).collect();
    let chi = infoperc::stats::chi_square_gof(&counts, &expected, 5.0);
    assert!(chi.p_value > 1e-3, "{chi:?}");
    assert!(tv_distance(&empirical, &pi).unwrap() < 0.01);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The grand coupling is monotone: ordered starts stay ordered.
    #[test]
    fn grand_coupling_is_monotone(seed in any::<u64>(), a in 0usize..1024, b in 0usize..1024, beta in 0.0f64..1.5) {
        let g = Graph::cycle(10).unwrap();
        let seq = UpdateSequence::generate(10, 3.0, seed).unwrap();
        let lo = SpinConfig::from_index(a & b, 10);
        let hi = SpinConfig::from_index(a | b, 10);
        let x = run_forward(&lo, &seq, beta, &g).unwrap();
        let y = run_forward(&hi, &seq, beta, &g).unwrap();
        prop_assert!(x.le(&y));
    }

    #[test]
    fn backward_equals_forward_random(seed in any::<u64>(), idx in 0usize..(1 << 9), beta in 0.0f64..1.0) {
        let g = Graph::torus(3, 2).unwrap();
        let seq = UpdateSequence::generate(9, 3.0, seed).unwrap();
        let x0 = SpinConfig::from_index(idx, 9);
        let fwd = run_forward(&x0, &seq, beta, &g).unwrap();
        let h = develop_history(&VertexSet::all(9), &seq, beta, &g, 1e9).unwrap();
        prop_assert_eq!(fwd.spins(), &reconstruct(&h, &seq, beta, &g, &x0).unwrap()[..]);
    }
}
