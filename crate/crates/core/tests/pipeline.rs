use one_core::network::{load_result, save_result, Labels};
use one_core::numerics::{nmf_init, Rng};
use one_core::one::{fit, loss_joint, HyperParams, LossWeights};
use one_core::seeder::{seed_outliers, synth_network, SeedingPlan, SynthConfig};
use one_core::{AttributedNetwork, DenseMatrix, SparseMatrix};
use proptest::prelude::*;

fn random_network(seed: u64, n: usize, d: usize, p_edge: f64, p_attr: f64) -> AttributedNetwork {
    let mut rng = Rng::seed_from(seed);
    let mut entries = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.bernoulli(p_edge) {
                entries.push((i, j, 1.0));
                entries.push((j, i, 1.0));
            }
        }
    }
    let attrs = DenseMatrix::from_fn(n, d, |_, _| if rng.bernoulli(p_attr) { rng.uniform(0.1, 1.0) } else { 0.0 });
    AttributedNetwork::new(
        SparseMatrix::from_triplets(n, n, entries).unwrap(),
        attrs,
        None,
        (0..n).map(|i| i.to_string()).collect(),
        false,
    )
    .unwrap()
}

#[test]
fn planted_outliers_score_higher() {
    let net = synth_network(&SynthConfig::default()).unwrap();
    let seeded = seed_outliers(&net, &SeedingPlan::default()).unwrap();
    let out = fit(&seeded.network, &HyperParams::for_network(&seeded.network).unwrap()).unwrap();
    let combined = &out.result.combined;
    let n = seeded.original_nodes;
    let mean = |r: std::ops::Range<usize>| r.clone().map(|i| combined[i]).sum::<f64>() / r.len() as f64;
    assert!(mean(n..combined.len()) > mean(0..n));
}

#[test]
fn default_dimension_is_three_per_class() {
    let cfg = SynthConfig { n_classes: 6, n_nodes: 120, p_in: 0.2, p_out: 0.01, ..SynthConfig::default() };
    let net = synth_network(&cfg).unwrap();
    assert_eq!(HyperParams::for_network(&net).unwrap().k, 18);
}

#[test]
fn sparse_high_dimensional_nmf_stays_finite() {
    // Citeseer-like sparsity: ~32 keywords out of 3703 per node.
    let (n, d) = (400, 3703);
    let mut rng = Rng::seed_from(1);
    let entries: Vec<_> = (0..n)
        .flat_map(|i| {
            let cols = rng.sample(&(0..d).collect::<Vec<_>>(), 32);
            cols.into_iter().map(move |j| (i, j, 1.0))
        })
        .collect();
    let c = SparseMatrix::from_triplets(n, d, entries).unwrap();
    let f = nmf_init(&c, 18, 200, &mut Rng::seed_from(2)).unwrap();
    assert!(f.p.is_finite() && f.q.is_finite());
    assert!(f.p.as_slice().iter().chain(f.q.as_slice()).all(|&v| v >= 0.0));
}

#[test]
fn result_files_round_trip_after_fit() {
    let net = random_network(3, 25, 12, 0.2, 0.3);
    let out = fit(&net, &HyperParams::new(3)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    save_result(&out.result, dir.path()).unwrap();
    assert_eq!(load_result(dir.path()).unwrap(), out.result);
}

#[test]
fn fit_without_edges_or_attributes() {
    let n = 6;
    let labels = Labels { ids: vec![0, 0, 0, 1, 1, 1], class_names: vec!["a".into(), "b".into()] };
    let net = AttributedNetwork::new(
        SparseMatrix::empty(n, n),
        DenseMatrix::from_fn(n, 4, |i, j| if j == i % 4 { 1.0 } else { 0.0 }),
        Some(labels),
        (0..n).map(|i| format!("v{i}")).collect(),
        false,
    )
    .unwrap();
    let out = fit(&net, &HyperParams::new(2)).unwrap();
    assert!(out.diagnostics.calibration_fallback);
    assert!(out.result.embedding.is_finite());
    // An exactly reconstructed adjacency leaves O1 uniform.
    assert!(out.scores.o1.iter().all(|&o| (o - 1.0 / 6.0).abs() < 1e-12));
}

#[cfg(feature = "parallel")]
#[test]
fn thread_count_does_not_change_results() {
    let net = random_network(9, 60, 40, 0.1, 0.2);
    let hp = HyperParams::new(5);
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| fit(&net, &hp).unwrap().result)
    };
    assert_eq!(run(1), run(4));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn fit_invariants(seed in any::<u64>(), n in 5usize..40, d in 3usize..30, k in 1usize..5) {
        let net = random_network(seed, n, d, 0.2, 0.3);
        prop_assume!(k <= n.min(d));
        let hp = HyperParams::new(k).with_seed(seed);
        let out = fit(&net, &hp).unwrap();

        let mut last = out.diagnostics.initial_loss.unwrap().total();
        for l in &out.diagnostics.losses {
            prop_assert!(l.total() <= last + 1e-9 * last.abs());
            last = l.total();
        }
        for o in [&out.scores.o1, &out.scores.o2, &out.scores.o3] {
            prop_assert!((o.iter().sum::<f64>() - hp.mu).abs() < 1e-9);
            prop_assert!(o.iter().all(|&v| v >= hp.eps_o && v <= 1.0));
        }
        prop_assert!(out.model.w.orthogonality_error() < 1e-9);
        prop_assert!(out.result.combined.iter().all(|&s| s > 0.0 && s <= 1.0));

        // The reported trace is the joint loss of the returned state.
        let fin = loss_joint(net.adjacency(), net.attributes(), &out.model, &out.scores, out.weights).unwrap();
        prop_assert!((fin.total() - last).abs() <= 1e-12 * last.abs().max(1.0));

        let again = fit(&net, &hp).unwrap();
        prop_assert_eq!(again.result, out.result);
    }

    #[test]
    fn fixed_weights_are_respected(seed in any::<u64>()) {
        let net = random_network(seed, 20, 10, 0.2, 0.3);
        let mut hp = HyperParams::new(3);
        hp.weights = Some(LossWeights::new(2.0, 0.5).unwrap());
        let out = fit(&net, &hp).unwrap();
        prop_assert_eq!(out.weights, LossWeights { alpha: 2.0, beta: 0.5 });
        prop_assert!(!out.diagnostics.calibration_fallback);
    }
}
