use anyhow::Result;
use serde_json::json;

use topofc::fconn::functional_connectivity;
use topofc::featsynth::node_features;
use topofc::graphstore::{graph_slice, parse_tudataset, validate, Dataset};
use topofc::learn::{train_vectors, Confusion, Standardizer};
use topofc::pgh::{betti_curve, decompose, ThresholdGrid};
use topofc::pipeline::{self, embed_dataset, extract, GraphRecord};
use topofc::wasser::{barycenter_with_spread, default_resolution, wasserstein_p, ValueSet};
use topofc::Error;

use crate::config::{parse_grid, RunConfig};
use crate::output::{input_hash, real, Report};
use crate::UsageError;

fn load(cfg: &RunConfig) -> Result<(Dataset, String)> {
    let ds = parse_tudataset(&cfg.dataset, &cfg.name)?;
    let hash = input_hash(&cfg.dataset, &cfg.name)?;
    Ok((ds, hash))
}

fn records(cfg: &RunConfig, ds: &Dataset) -> Result<Vec<GraphRecord>> {
    let policy = cfg.feature_spec().resolve(ds)?;
    Ok(extract(ds, &policy, cfg.workers)?)
}

fn raw_label(ds: &Dataset, g: usize) -> i64 {
    ds.label_alphabet()[ds.labels()[g]]
}

pub fn extract_cmd(
    mut cfg: RunConfig,
    emit_fc: Option<std::path::PathBuf>,
    fc_graph: usize,
) -> Result<()> {
    if let Some(path) = &emit_fc {
        cfg.set("emit-fc", path.display().to_string());
        cfg.set("fc-graph", fc_graph);
    }
    let (ds, hash) = load(&cfg)?;
    let recs = records(&cfg, &ds)?;
    let mut report = Report::jsonl(&cfg, &hash)?;
    for r in &recs {
        let d = &r.decomposition;
        report.record(&json!({
            "graph": r.graph,
            "label": raw_label(&ds, r.graph),
            "num_nodes": r.num_nodes,
            "births": d.births,
            "deaths": d.deaths,
            "zero_variance_rows": r.zero_variance_rows,
            "degenerate_births": d.births.is_empty(),
            "degenerate_deaths": d.deaths.is_empty(),
        }))?;
    }
    if let Some(path) = emit_fc {
        let g = graph_slice(&ds, fc_graph)?;
        let policy = cfg.feature_spec().resolve(&ds)?;
        let fc = functional_connectivity(&node_features(&g, &policy)?)?;
        let mut csv = Report::csv(&cfg, &hash, "i,j,r")?;
        for (i, j, r) in fc.pairs() {
            csv.row(&[i.to_string(), j.to_string(), real(r)]);
        }
        csv.finish(&path)?;
    }
    report.finish(&cfg.out)
}

pub fn embed_cmd(cfg: RunConfig) -> Result<()> {
    let (ds, hash) = load(&cfg)?;
    let recs = records(&cfg, &ds)?;
    let (m, n, embeddings) = embed_dataset(&recs, cfg.mn_policy())?;
    let mut report = Report::jsonl(&cfg, &hash)?;
    for (g, e) in embeddings.iter().enumerate() {
        report.record(&json!({
            "graph": g,
            "label": raw_label(&ds, g),
            "m": m,
            "n": n,
            "degenerate_births": e.degenerate_b,
            "degenerate_deaths": e.degenerate_d,
            "births": e.v_b,
            "deaths": e.v_d,
        }))?;
    }
    report.finish(&cfg.out)
}

pub fn betti_cmd(mut cfg: RunConfig, graph: usize, grid: &str) -> Result<()> {
    let grid: ThresholdGrid = parse_grid(grid)?;
    cfg.set("graph", graph);
    cfg.set("grid", grid_name(grid));
    let (ds, hash) = load(&cfg)?;
    let g = graph_slice(&ds, graph)?;
    let policy = cfg.feature_spec().resolve(&ds)?;
    let run = || -> topofc::Result<_> {
        let fc = functional_connectivity(&node_features(&g, &policy)?)?;
        let d = decompose(&fc.to_weighted_graph());
        betti_curve(&d, &grid.thresholds(&d))
    };
    let curve = run().map_err(|e| Error::InGraph {
        graph,
        source: Box::new(e),
    })?;
    let mut report = Report::csv(&cfg, &hash, "epsilon,beta0,beta1")?;
    for ((eps, b0), b1) in curve.thresholds.iter().zip(&curve.beta0).zip(&curve.beta1) {
        report.row(&[real(*eps), b0.to_string(), b1.to_string()]);
    }
    report.finish(&cfg.out)
}

fn grid_name(g: ThresholdGrid) -> String {
    match g {
        ThresholdGrid::Uniform(k) => format!("uniform:{k}"),
        ThresholdGrid::Weights => "weights".into(),
    }
}

#[derive(Clone, Copy)]
enum Diagram {
    Births,
    Deaths,
}

fn parse_diagram(s: &str) -> Result<Diagram> {
    match s {
        "births" => Ok(Diagram::Births),
        "deaths" => Ok(Diagram::Deaths),
        _ => Err(UsageError(format!("--diagram: expected births or deaths, got {s:?}")).into()),
    }
}

fn value_sets(recs: &[GraphRecord], diagram: Diagram) -> Result<Vec<ValueSet>> {
    recs.iter()
        .map(|r| {
            let v = match diagram {
                Diagram::Births => &r.decomposition.births,
                Diagram::Deaths => &r.decomposition.deaths,
            };
            Ok(ValueSet::new(v.clone())?)
        })
        .collect()
}

pub fn distance_cmd(mut cfg: RunConfig, p: f64, diagram: &str) -> Result<()> {
    let which = parse_diagram(diagram)?;
    cfg.set("p", p);
    cfg.set("diagram", diagram);
    let (ds, hash) = load(&cfg)?;
    let recs = records(&cfg, &ds)?;
    let sets = value_sets(&recs, which)?;
    if let Some(g) = sets.iter().position(ValueSet::is_empty) {
        return Err(Error::InGraph {
            graph: g,
            source: Box::new(Error::EmptySet),
        }
        .into());
    }
    let mut report = Report::csv(&cfg, &hash, "i,j,w_p")?;
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            let w = wasserstein_p(&sets[i], &sets[j], p)?;
            report.row(&[i.to_string(), j.to_string(), real(w)]);
        }
    }
    report.finish(&cfg.out)
}

pub fn barycenter_cmd(
    mut cfg: RunConfig,
    class: i64,
    diagram: &str,
    resolution: Option<usize>,
) -> Result<()> {
    let which = parse_diagram(diagram)?;
    cfg.set("class", class);
    cfg.set("diagram", diagram);
    let (ds, hash) = load(&cfg)?;
    if !ds.label_alphabet().contains(&class) {
        return Err(UsageError(format!(
            "no graphs with label {class}; labels are {:?}",
            ds.label_alphabet()
        ))
        .into());
    }
    let recs = records(&cfg, &ds)?;
    let sets: Vec<ValueSet> = value_sets(&recs, which)?
        .into_iter()
        .enumerate()
        .filter(|(g, s)| raw_label(&ds, *g) == class && !s.is_empty())
        .map(|(_, s)| s)
        .collect();
    if sets.is_empty() {
        return Err(Error::EmptySet.into());
    }
    let resolution = resolution.unwrap_or_else(|| default_resolution(&sets));
    cfg.set("resolution", resolution);
    cfg.set("sets", sets.len());
    let summary = barycenter_with_spread(&sets, resolution)?;
    let mut report = Report::csv(&cfg, &hash, "z,value_mean,value_std")?;
    for q in summary {
        report.row(&[real(q.z), real(q.mean), real(q.std)]);
    }
    report.finish(&cfg.out)
}

fn embedding_matrix(cfg: &RunConfig, ds: &Dataset) -> Result<(usize, usize, Vec<Vec<f64>>)> {
    let recs = records(cfg, ds)?;
    let (m, n, embeddings) = embed_dataset(&recs, cfg.mn_policy())?;
    Ok((m, n, embeddings.iter().map(|e| e.concat()).collect()))
}

pub fn train_cmd(cfg: RunConfig) -> Result<()> {
    let pcfg = cfg.pipeline()?;
    let (ds, hash) = load(&cfg)?;
    let (m, n, mut xs) = embedding_matrix(&cfg, &ds)?;
    if pcfg.cv.standardize {
        let st = Standardizer::fit(&xs);
        xs = xs.iter().map(|x| st.apply(x)).collect();
    }
    let mcfg = pcfg.learner.config(m + n, ds.num_classes(), cfg.seed);
    let (model, losses) = train_vectors(&xs, ds.labels(), &mcfg)?;
    let preds = xs
        .iter()
        .map(|x| model.predict(x))
        .collect::<topofc::Result<Vec<_>>>()?;
    let confusion = Confusion::from_predictions(&preds, ds.labels(), ds.num_classes())?;
    let mut report = Report::jsonl(&cfg, &hash)?;
    for (e, loss) in losses.iter().enumerate() {
        report.record(&json!({ "epoch": e + 1, "loss": loss }))?;
    }
    report.record(&json!({
        "m": m,
        "n": n,
        "train_accuracy": confusion.accuracy(),
        "train_weighted_f1": confusion.weighted_f1(),
        "confusion": confusion.counts,
    }))?;
    eprintln!(
        "{}: training accuracy {:.4} after {} epochs",
        cfg.name,
        confusion.accuracy(),
        losses.len()
    );
    report.finish(&cfg.out)
}

pub fn crossval_cmd(cfg: RunConfig) -> Result<()> {
    let pcfg = cfg.pipeline()?;
    let (ds, hash) = load(&cfg)?;
    let r = pipeline::crossval(&ds, &pcfg, cfg.workers)?;
    let mut report = Report::jsonl(&cfg, &hash)?;
    for f in &r.per_fold {
        report.record(&json!({
            "fold": f.index,
            "train_size": f.train_size,
            "test_size": f.test_size,
            "accuracy": f.accuracy,
            "weighted_f1": f.weighted_f1,
        }))?;
    }
    report.record(&json!({
        "protocol": r.protocol.to_string(),
        "accuracy": r.accuracy,
        "weighted_f1": r.weighted_f1,
        "mean_accuracy": r.mean_accuracy,
        "std_accuracy": r.std_accuracy,
        "mean_weighted_f1": r.mean_weighted_f1,
        "std_weighted_f1": r.std_weighted_f1,
        "confusion": r.confusion.counts,
    }))?;
    eprintln!(
        "{} {}: accuracy {:.2} ± {:.2}, weighted F1 {:.2} ± {:.2}",
        cfg.name,
        r.protocol,
        100.0 * r.mean_accuracy,
        100.0 * r.std_accuracy,
        100.0 * r.mean_weighted_f1,
        100.0 * r.std_weighted_f1
    );
    report.finish(&cfg.out)
}

pub fn validate_cmd(cfg: RunConfig) -> Result<()> {
    let (ds, hash) = load(&cfg)?;
    let v = validate(&ds);
    let mut report = Report::jsonl(&cfg, &hash)?;
    for g in &v.graphs {
        report.record(&json!({
            "graph": g.graph,
            "self_loops_removed": g.self_loops_removed,
            "duplicate_edges_removed": g.duplicate_edges_removed,
            "asymmetric_edges": g.asymmetric_edges,
            "isolated_nodes": g.isolated_nodes,
        }))?;
    }
    report.record(&json!({
        "graphs": ds.len(),
        "graphs_with_violations": v.graphs.len(),
        "self_loops_removed": v.total_self_loops(),
        "duplicate_edges_removed": v.total_duplicates(),
        "asymmetric_edges": v.total_asymmetric(),
        "isolated_nodes": v.total_isolated(),
    }))?;
    report.finish(&cfg.out)
}
