use std::path::Path;

use anyhow::{bail, Context, Result};
use one_core::eval::{evaluate_all, EvalConfig, RankedList};
use one_core::network::{
    load_network, load_result, read_scores, save_network, save_result, AttributedNetwork, ATTRIBUTES_FILE, EDGES_FILE,
    LABELS_FILE,
};
use one_core::one::{final_outlier_score, fit, CombineWeights, HyperParams, LossWeights};
use one_core::seeder::{load_seeded, read_truth, save_seeded, seed_outliers, synth_network, SeedingPlan, SynthConfig};

use crate::{Cli, Command, ConfigError, EmbedArgs, EvaluateArgs, NetworkArgs, RankArgs, SeedArgs, SynthArgs};

pub const RANKED_FILE: &str = "ranked.tsv";

pub fn dispatch(cli: Cli) -> Result<()> {
    init_threads(cli.threads)?;
    match cli.command {
        Command::Synth(a) => synth(a, cli.seed),
        Command::Seed(a) => seed(a, cli.seed),
        Command::Embed(a) => embed(a, cli.seed),
        Command::RankOutliers(a) => rank(a),
        Command::Evaluate(a) => evaluate(a, cli.seed),
    }
}

fn init_threads(threads: usize) -> Result<()> {
    if threads == 0 {
        bail!(ConfigError("--threads must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    {
        // A second call in the same process keeps the existing pool.
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            log::debug!("thread pool already initialised: {e}");
        }
    }
    #[cfg(not(feature = "parallel"))]
    if threads > 1 {
        log::warn!("built without the `parallel` feature; running on one thread");
    }
    Ok(())
}

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

fn load(args: &NetworkArgs) -> Result<AttributedNetwork> {
    let from_dir = |name: &str| args.input.as_ref().map(|d| d.join(name));
    let edges = args.edges.clone().or_else(|| from_dir(EDGES_FILE));
    let attributes = args.attributes.clone().or_else(|| from_dir(ATTRIBUTES_FILE));
    let labels = args.labels.clone().or_else(|| from_dir(LABELS_FILE).filter(|p| p.exists()));
    let (Some(edges), Some(attributes)) = (edges, attributes) else {
        return Err(config_err("give --input <dir> or both --edges and --attributes"));
    };
    let net = load_network(&edges, &attributes, labels.as_deref())?;
    log::info!(
        "loaded {} nodes, {} edges, {} attributes from {}",
        net.n_nodes(),
        net.n_edges(),
        net.n_attributes(),
        edges.display()
    );
    Ok(net)
}

fn parse_weights(text: &str) -> Result<CombineWeights> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let values: Vec<f64> = parts
        .iter()
        .map(|p| p.parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| config_err(format!("malformed weights {text:?}; expected w1,w2,w3")))?;
    let [w1, w2, w3] = values[..] else {
        return Err(config_err(format!("expected three weights, got {}", values.len())));
    };
    CombineWeights::new(w1, w2, w3).map_err(|e| config_err(e.to_string()))
}

/// `start:stop:step` in percent, inclusive.
fn parse_splits(text: &str) -> Result<Vec<f64>> {
    let bad = || config_err(format!("malformed splits {text:?}; expected start:stop:step"));
    let parts: Vec<u32> = text.split(':').map(|p| p.trim().parse()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if step == 0 || start == 0 || start > stop || stop >= 100 {
        return Err(bad());
    }
    Ok((start..=stop).step_by(step as usize).map(|p| f64::from(p) / 100.0).collect())
}

fn parse_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| config_err(format!("malformed list {text:?}")))
}

fn print_summary(rows: &[(&str, &AttributedNetwork, usize)]) {
    println!("{:<10} {:>8} {:>8} {:>8} {:>11} {:>9}", "dataset", "nodes", "edges", "labels", "attributes", "outliers");
    for (name, net, outliers) in rows {
        println!(
            "{:<10} {:>8} {:>8} {:>8} {:>11} {:>9}",
            name,
            net.n_nodes(),
            net.n_edges(),
            net.n_classes().unwrap_or(0),
            net.n_attributes(),
            outliers
        );
    }
}

fn synth(a: SynthArgs, seed: u64) -> Result<()> {
    let cfg = SynthConfig {
        n_nodes: a.nodes,
        n_classes: a.classes,
        p_in: a.p_in,
        p_out: a.p_out,
        n_attrs: a.attrs,
        attr_signal: a.signal,
        nnz_range: (a.nnz_min, a.nnz_max),
        seed,
    };
    let net = synth_network(&cfg)?;
    save_network(&net, &a.out)?;
    print_summary(&[("synthetic", &net, 0)]);
    Ok(())
}

fn seed(a: SeedArgs, seed: u64) -> Result<()> {
    let net = load(&a.network)?;
    net.require_labels().context("seeding needs class labels")?;
    let plan = SeedingPlan { fraction: a.fraction, degree_band: a.band, seed };
    let seeded = seed_outliers(&net, &plan)?;
    save_seeded(&seeded, &a.out)?;
    print_summary(&[("original", &net, 0), ("seeded", &seeded.network, seeded.truth.len())]);
    let fallbacks = seeded.provenance.iter().filter(|p| p.band_fallback).count();
    if fallbacks > 0 {
        log::warn!("{fallbacks} planted nodes used the rounded mean degree (empty band)");
    }
    Ok(())
}

fn embed(a: EmbedArgs, seed: u64) -> Result<()> {
    let net = load(&a.network)?;
    let k = match (a.k, net.n_classes()) {
        (Some(k), _) => k,
        (None, Some(c)) => 3 * c,
        (None, None) => return Err(config_err("--k is required when no labels are given")),
    };
    let mut hp = HyperParams::new(k).with_seed(seed).with_iters(a.iters);
    hp.mu = a.mu;
    hp.eps_o = a.eps_o;
    hp.nmf_sweeps = a.nmf_sweeps;
    hp.tol = a.tol;
    if let (Some(alpha), Some(beta)) = (a.alpha, a.beta) {
        hp.weights = Some(LossWeights::new(alpha, beta).map_err(|e| config_err(e.to_string()))?);
    }
    if let Some(w) = &a.weights {
        hp.combine_weights = parse_weights(w)?;
    }
    hp.validate(net.n_nodes(), net.n_attributes()).map_err(|e| config_err(e.to_string()))?;
    log::info!("fitting with K = {k}, {} iterations", hp.iters);

    let out = fit(&net, &hp)?;
    save_result(&out.result, &a.out)?;
    if out.diagnostics.degenerate_coordinates > 0 {
        log::warn!("{} coordinate updates hit a vanishing denominator", out.diagnostics.degenerate_coordinates);
    }
    println!("iteration\tloss");
    for (i, l) in out.result.loss_trace.iter().enumerate() {
        println!("{}\t{l}", i + 1);
    }
    Ok(())
}

fn write_ranked(path: &Path, names: &[String], scores: &[f64]) -> Result<()> {
    use std::fmt::Write as _;
    let ranked = RankedList::from_scores(scores)?;
    let mut body = String::from("rank\tnode\tscore\n");
    for (r, &i) in ranked.order().iter().enumerate() {
        let _ = writeln!(body, "{}\t{}\t{}", r + 1, names[i], scores[i]);
    }
    std::fs::write(path, body).with_context(|| format!("cannot write {}", path.display()))
}

fn rank(a: RankArgs) -> Result<()> {
    let (names, scores, combined) = read_scores(&a.scores)?;
    let scores = match &a.weights {
        Some(w) => final_outlier_score(&scores, parse_weights(w)?)?,
        None => combined,
    };
    std::fs::create_dir_all(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    let path = a.out.join(RANKED_FILE);
    write_ranked(&path, &names, &scores)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn evaluate(a: EvaluateArgs, seed: u64) -> Result<()> {
    let (net, mut truth) = load_seeded(&a.data)?;
    if let Some(path) = &a.truth {
        truth = read_truth(path, net.node_names())?;
    }
    let mut result = load_result(&a.result)?;
    if let Some(w) = &a.weights {
        result.combined = final_outlier_score(&result.scores, parse_weights(w)?)?;
    }
    let cfg = EvalConfig {
        l_percents: parse_list(&a.l)?,
        train_fractions: parse_splits(&a.splits)?,
        reps: a.reps,
        seed,
        exclude_outliers: a.exclude_outliers,
        ..EvalConfig::default()
    };
    cfg.validate().map_err(|e| config_err(e.to_string()))?;
    let report = evaluate_all(&net, &truth, &result, &cfg)?;
    report.save(&a.out)?;
    print!("{}", report.to_tsv());
    Ok(())
}
