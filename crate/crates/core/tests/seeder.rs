use one_core::numerics::Rng;
use one_core::seeder::{
    plant_attribute, plant_combined, plant_structural, seed_outliers, synth_network, OutlierKind, Planter, SeedingPlan,
    SynthConfig,
};
use one_core::AttributedNetwork;
use proptest::prelude::*;

fn two_class(seed: u64, attr_signal: f64) -> (SynthConfig, AttributedNetwork) {
    let cfg = SynthConfig {
        n_nodes: 120,
        n_classes: 2,
        p_in: 0.1,
        p_out: 0.01,
        n_attrs: 60,
        attr_signal,
        seed,
        ..SynthConfig::default()
    };
    let net = synth_network(&cfg).unwrap();
    (cfg, net)
}

fn in_block(cfg: &SynthConfig, class: usize, attrs: &[f64]) -> (usize, usize) {
    let block = cfg.keyword_block(class);
    let nnz: Vec<usize> = attrs.iter().enumerate().filter(|(_, v)| **v != 0.0).map(|(j, _)| j).collect();
    (nnz.iter().filter(|j| block.contains(j)).count(), nnz.len())
}

#[test]
fn structural_outlier_avoids_its_class() {
    let (cfg, net) = two_class(1, 1.0);
    let labels = &net.labels().unwrap().ids;
    let planter = Planter::new(&net, &SeedingPlan::default()).unwrap();
    let mut rng = Rng::seed_from(2);
    for _ in 0..20 {
        let p = planter.structural(&mut rng).unwrap();
        assert!(p.neighbors.iter().all(|&j| labels[j] != p.structure_class));
        let (inside, total) = in_block(&cfg, p.structure_class, &p.attributes);
        assert_eq!(inside, total, "keywords must come from the selected class");
        let (lo, hi) = planter.degree_range(p.structure_class).unwrap();
        assert!((lo..=hi).contains(&p.neighbors.len()));
    }
}

#[test]
fn attribute_outlier_borrows_foreign_keywords() {
    let (cfg, net) = two_class(3, 1.0);
    let labels = &net.labels().unwrap().ids;
    let mut rng = Rng::seed_from(4);
    for _ in 0..20 {
        let p = plant_attribute(&net, &SeedingPlan::default(), &mut rng).unwrap();
        assert!(p.neighbors.iter().all(|&j| labels[j] == p.structure_class));
        let other = 1 - p.structure_class;
        let (inside, total) = in_block(&cfg, other, &p.attributes);
        assert!(total > 0);
        assert_eq!(inside, total, "two classes: keywords come only from the other block");
    }
}

#[test]
fn combined_outlier_is_consistent_per_view() {
    let (cfg, net) = two_class(5, 1.0);
    let labels = &net.labels().unwrap().ids;
    let mut rng = Rng::seed_from(6);
    for _ in 0..20 {
        let p = plant_combined(&net, &SeedingPlan::default(), &mut rng).unwrap();
        let c2 = p.attribute_class.unwrap();
        assert_ne!(c2, p.structure_class);
        // Structure alone looks like c1, attributes alone look like c2.
        assert!(p.neighbors.iter().all(|&j| labels[j] == p.structure_class));
        let (inside, total) = in_block(&cfg, c2, &p.attributes);
        assert_eq!(inside, total);
    }
}

#[test]
fn keyword_frequency_tracks_source_signal() {
    let cfg = SynthConfig::default();
    let net = synth_network(&cfg).unwrap();
    let ids = &net.labels().unwrap().ids;
    let source: (usize, usize) = (0..net.n_nodes())
        .map(|i| in_block(&cfg, ids[i], net.attributes().row(i)))
        .fold((0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let source = source.0 as f64 / source.1 as f64;

    let mut rng = Rng::seed_from(8);
    let (mut inside, mut total) = (0, 0);
    for _ in 0..500 {
        let p = plant_structural(&net, &SeedingPlan::default(), &mut rng).unwrap();
        let (i, t) = in_block(&cfg, p.structure_class, &p.attributes);
        inside += i;
        total += t;
    }
    let planted = inside as f64 / total as f64;
    // Drawing without replacement depletes the heavy in-block keywords, so
    // the planted share sits slightly below the source share.
    assert!((planted - source).abs() < 0.02, "{planted} vs {source}");
    assert!(planted >= cfg.attr_signal - 0.02, "{planted}");
}

#[test]
fn planted_nodes_blend_in() {
    let net = synth_network(&SynthConfig::default()).unwrap();
    let plan = SeedingPlan { fraction: 0.2, ..SeedingPlan::default() };
    let seeded = seed_outliers(&net, &plan).unwrap();
    let g = &seeded.network;
    let nnz = |i: usize| g.attributes().row(i).iter().filter(|&&v| v != 0.0).count() as f64;
    let mean = |ids: &mut dyn Iterator<Item = usize>, f: &dyn Fn(usize) -> f64| {
        let v: Vec<f64> = ids.map(f).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let n = seeded.original_nodes;
    let degree = |i: usize| g.degree(i) as f64;
    // Degrees of original nodes are measured on the original network.
    let normal_degree = mean(&mut (0..n), &|i| net.degree(i) as f64);
    let planted_degree = mean(&mut (n..g.n_nodes()), &degree);
    let normal_nnz = mean(&mut (0..n), &nnz);
    let planted_nnz = mean(&mut (n..g.n_nodes()), &nnz);
    assert!((planted_degree - normal_degree).abs() < 0.2 * normal_degree);
    assert!((planted_nnz - normal_nnz).abs() < 0.2 * normal_nnz);
}

#[test]
fn labels_follow_structure() {
    let net = synth_network(&SynthConfig::default()).unwrap();
    let seeded = seed_outliers(&net, &SeedingPlan::default()).unwrap();
    let labels = &seeded.network.labels().unwrap().ids;
    for p in &seeded.provenance {
        assert_eq!(labels[p.node], p.structure_class);
        assert_eq!(seeded.network.degree(p.node), p.degree);
    }
}

#[test]
fn single_class_cannot_be_seeded() {
    let cfg = SynthConfig { n_classes: 1, p_out: 0.0, ..SynthConfig::default() };
    let net = synth_network(&cfg).unwrap();
    assert!(plant_structural(&net, &SeedingPlan::default(), &mut Rng::seed_from(0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn seeding_contract(seed in 0u64..1000, n in 60usize..200, fraction in 0.0f64..0.3) {
        let cfg = SynthConfig { n_nodes: n, p_in: 0.15, p_out: 0.01, seed, ..SynthConfig::default() };
        let net = synth_network(&cfg).unwrap();
        let plan = SeedingPlan { fraction, seed, ..SeedingPlan::default() };
        let seeded = seed_outliers(&net, &plan).unwrap();

        let total = plan.total(n);
        prop_assert_eq!(total, (fraction * n as f64 - 1e-9).ceil().max(0.0) as usize);
        prop_assert_eq!(seeded.network.n_nodes(), n + total);
        let sizes: Vec<usize> = OutlierKind::ALL.iter().map(|&k| seeded.truth.of_kind(k).len()).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        prop_assert!(sizes.windows(2).all(|w| w[0] >= w[1]));

        let mut all = seeded.truth.all();
        all.dedup();
        prop_assert_eq!(all.len(), total);

        let planter = Planter::new(&net, &plan).unwrap();
        let labels = &net.labels().unwrap().ids;
        for p in &seeded.provenance {
            let nbrs = seeded.network.neighbors(p.node);
            prop_assert!(nbrs.iter().all(|&j| j < n));
            let within = nbrs.iter().filter(|&&j| labels[j] == p.structure_class).count();
            match p.kind {
                OutlierKind::Structural => prop_assert_eq!(within, 0),
                _ => prop_assert_eq!(within, nbrs.len()),
            }
            let m = planter.mean_degree(p.structure_class);
            prop_assert!(p.degree >= 1);
            if !p.band_fallback {
                prop_assert!(p.degree as f64 >= 0.9 * m - 1e-9 && p.degree as f64 <= 1.1 * m + 1e-9);
            }
        }

        let again = seed_outliers(&net, &plan).unwrap();
        prop_assert_eq!(again, seeded);
    }
}
