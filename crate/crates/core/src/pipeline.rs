//! Dataset-level wiring: features, connectivity, decomposition, embedding and
//! evaluation, run on a bounded worker pool.

use rayon::prelude::*;

use crate::embed::{embed, select_mn, GraphStats, MnPolicy, TopoEmbedding};
use crate::error::{Error, Result};
use crate::fconn::functional_connectivity;
use crate::featsynth::{node_features, FeaturePolicy, FeatureSpec};
use crate::graphstore::Dataset;
use crate::learn::{crossval_vectors, CvConfig, EvalReport, MlpLearner};
use crate::pgh::{decompose, PersistenceDecomposition};

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Err(Error::Argument("worker count must be >= 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Argument(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GraphRecord {
    pub graph: usize,
    pub num_nodes: usize,
    pub decomposition: PersistenceDecomposition,
    pub zero_variance_rows: usize,
}

impl GraphRecord {
    pub fn stats(&self) -> GraphStats {
        GraphStats::from(&self.decomposition)
    }
}

/// Decomposes every graph's functional connectivity. Records come back in
/// graph order whatever the worker count; failures carry the graph index.
pub fn extract(ds: &Dataset, policy: &FeaturePolicy, workers: usize) -> Result<Vec<GraphRecord>> {
    with_workers(workers, || {
        ds.graphs()
            .par_iter()
            .enumerate()
            .map(|(idx, g)| {
                let run = || -> Result<GraphRecord> {
                    let x = node_features(g, policy)?;
                    let fc = functional_connectivity(&x)?;
                    Ok(GraphRecord {
                        graph: idx,
                        num_nodes: g.num_nodes(),
                        decomposition: decompose(&fc.to_weighted_graph()),
                        zero_variance_rows: fc.zero_variance_rows().len(),
                    })
                };
                run().map_err(|e| e.in_graph(idx))
            })
            .collect()
    })?
}

/// Embeds all records at the `(m, n)` chosen by `policy`.
pub fn embed_dataset(
    records: &[GraphRecord],
    policy: MnPolicy,
) -> Result<(usize, usize, Vec<TopoEmbedding>)> {
    let stats: Vec<GraphStats> = records.iter().map(GraphRecord::stats).collect();
    let (m, n) = select_mn(&stats, policy)?;
    let embeddings = records
        .iter()
        .map(|r| embed(&r.decomposition, m, n).map_err(|e| e.in_graph(r.graph)))
        .collect::<Result<Vec<_>>>()?;
    Ok((m, n, embeddings))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    pub features: FeatureSpec,
    pub mn: MnPolicy,
    pub learner: MlpLearner,
    pub cv: CvConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            features: FeatureSpec::LabelsLdp,
            mn: MnPolicy::Avg,
            learner: MlpLearner::default(),
            cv: CvConfig::default(),
        }
    }
}

/// Extracts, embeds and evaluates `ds` end to end.
pub fn crossval(ds: &Dataset, cfg: &PipelineConfig, workers: usize) -> Result<EvalReport> {
    let policy = cfg.features.resolve(ds)?;
    let records = extract(ds, &policy, workers)?;
    let (_, _, embeddings) = embed_dataset(&records, cfg.mn)?;
    let xs: Vec<Vec<f64>> = embeddings.iter().map(TopoEmbedding::concat).collect();
    with_workers(workers, || {
        crossval_vectors(&xs, ds.labels(), ds.num_classes(), &cfg.learner, &cfg.cv)
    })?
}
