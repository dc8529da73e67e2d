//! Stratified k-fold and repeated random-split evaluation.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::metrics::Confusion;
use super::mlp::{train_vectors, MlpConfig};
use crate::error::{Error, Result};

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable per-task seed derived from the run seed and a task index.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index))
}

/// Splits indices into `k` folds that preserve class proportions. Members of
/// each class are shuffled and dealt round-robin, continuing the dealing
/// position across classes so fold sizes stay balanced.
pub fn stratified_kfold(labels: &[usize], k: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::Argument(format!("k-fold needs k >= 2, got {k}")));
    }
    let classes = labels.iter().max().map_or(0, |m| m + 1);
    let mut members = vec![Vec::new(); classes];
    for (i, &y) in labels.iter().enumerate() {
        members[y].push(i);
    }
    for (class, m) in members.iter().enumerate() {
        if !m.is_empty() && m.len() < k {
            return Err(Error::Stratification {
                class,
                count: m.len(),
                folds: k,
            });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![Vec::new(); k];
    let mut offset = 0;
    for mut m in members {
        m.shuffle(&mut rng);
        for (j, idx) in m.iter().enumerate() {
            folds[(offset + j) % k].push(*idx);
        }
        offset = (offset + m.len()) % k;
    }
    for f in &mut folds {
        f.sort_unstable();
    }
    Ok(folds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Protocol {
    /// Stratified k-fold.
    KFold(usize),
    /// Repeated random 80/10/10 train/validation/test splits; the final-epoch
    /// model is scored on the test part and the validation part is unused.
    Splits(usize),
}

impl FromStr for Protocol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || {
            Error::Argument(format!(
                "unknown protocol {s:?} (expected kfold:K or splits:N)"
            ))
        };
        let (kind, count) = s.split_once(':').ok_or_else(bad)?;
        let count: usize = count.parse().map_err(|_| bad())?;
        match kind {
            "kfold" if count >= 2 => Ok(Protocol::KFold(count)),
            "splits" if count >= 1 => Ok(Protocol::Splits(count)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Protocol::KFold(k) => write!(f, "kfold:{k}"),
            Protocol::Splits(n) => write!(f, "splits:{n}"),
        }
    }
}

/// Anything that can be fit on one partition and predict another.
pub trait Learner: Sync {
    fn fit_predict(
        &self,
        train_x: &[Vec<f64>],
        train_y: &[usize],
        test_x: &[Vec<f64>],
        num_classes: usize,
        seed: u64,
    ) -> Result<Vec<usize>>;
}

/// Hyperparameters of the MLP learner; dimensions come from the data.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpLearner {
    pub hidden_dim: usize,
    pub dropout: f64,
    pub lr: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub batch_size: usize,
}

impl Default for MlpLearner {
    fn default() -> Self {
        let base = MlpConfig::new(1, 2);
        MlpLearner {
            hidden_dim: base.hidden_dim,
            dropout: base.dropout,
            lr: base.lr,
            weight_decay: base.weight_decay,
            epochs: base.epochs,
            batch_size: base.batch_size,
        }
    }
}

impl MlpLearner {
    pub fn config(&self, input_dim: usize, num_classes: usize, seed: u64) -> MlpConfig {
        MlpConfig {
            input_dim,
            hidden_dim: self.hidden_dim,
            num_classes,
            dropout: self.dropout,
            lr: self.lr,
            weight_decay: self.weight_decay,
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed,
        }
    }
}

impl Learner for MlpLearner {
    fn fit_predict(
        &self,
        train_x: &[Vec<f64>],
        train_y: &[usize],
        test_x: &[Vec<f64>],
        num_classes: usize,
        seed: u64,
    ) -> Result<Vec<usize>> {
        let dim = train_x.first().map_or(0, Vec::len);
        let cfg = self.config(dim, num_classes, seed);
        let (model, _) = train_vectors(train_x, train_y, &cfg)?;
        test_x.iter().map(|x| model.predict(x)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvConfig {
    pub protocol: Protocol,
    /// Standardize features with training-partition statistics.
    pub standardize: bool,
    pub seed: u64,
}

impl Default for CvConfig {
    fn default() -> Self {
        CvConfig {
            protocol: Protocol::KFold(5),
            standardize: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldResult {
    pub index: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub accuracy: f64,
    pub weighted_f1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub protocol: Protocol,
    /// Pooled over all test predictions, `trace(confusion) / sum(confusion)`.
    pub accuracy: f64,
    /// Pooled weighted F1 of `confusion`.
    pub weighted_f1: f64,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
    pub mean_weighted_f1: f64,
    pub std_weighted_f1: f64,
    pub per_fold: Vec<FoldResult>,
    pub confusion: Confusion,
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count().max(1) as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Per-column affine map to zero mean and unit population variance.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit<R: AsRef<[f64]>>(xs: &[R]) -> Self {
        let d = xs.first().map_or(0, |x| x.as_ref().len());
        let n = xs.len().max(1) as f64;
        let mut mean = vec![0.0; d];
        for x in xs {
            for (m, v) in mean.iter_mut().zip(x.as_ref()) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; d];
        for x in xs {
            for ((s, v), m) in var.iter_mut().zip(x.as_ref()).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        // constant columns are only centered
        let scale = var
            .iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

/// Train/test index pairs for every task of the protocol.
fn partitions(labels: &[usize], cfg: &CvConfig) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    match cfg.protocol {
        Protocol::KFold(k) => {
            let folds = stratified_kfold(labels, k, cfg.seed)?;
            Ok((0..k)
                .map(|i| {
                    let train = folds
                        .iter()
                        .enumerate()
                        .filter(|(j, _)| *j != i)
                        .flat_map(|(_, f)| f.iter().copied())
                        .collect::<Vec<_>>();
                    (train, folds[i].clone())
                })
                .collect())
        }
        Protocol::Splits(count) => {
            let n = labels.len();
            let n_train = (0.8 * n as f64).round() as usize;
            let n_val = (0.1 * n as f64).round() as usize;
            if n_train + n_val >= n {
                return Err(Error::Argument(format!(
                    "{n} samples are too few for an 80/10/10 split"
                )));
            }
            Ok((0..count)
                .map(|s| {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, s as u64));
                    let mut perm: Vec<usize> = (0..n).collect();
                    perm.shuffle(&mut rng);
                    let mut train = perm[..n_train].to_vec();
                    let mut test = perm[n_train + n_val..].to_vec();
                    train.sort_unstable();
                    test.sort_unstable();
                    (train, test)
                })
                .collect())
        }
    }
}

/// Runs the protocol with any learner. Tasks run on the current rayon pool
/// and are collected in task order, so results do not depend on the number
/// of threads.
pub fn crossval_with<L: Learner>(
    learner: &L,
    xs: &[Vec<f64>],
    labels: &[usize],
    num_classes: usize,
    cfg: &CvConfig,
) -> Result<EvalReport> {
    if xs.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} samples for {} labels",
            xs.len(),
            labels.len()
        )));
    }
    let parts = partitions(labels, cfg)?;
    let results: Vec<(FoldResult, Confusion)> = parts
        .par_iter()
        .enumerate()
        .map(|(i, (train, test))| {
            let train_raw: Vec<&Vec<f64>> = train.iter().map(|&t| &xs[t]).collect();
            let (train_x, test_x): (Vec<Vec<f64>>, Vec<Vec<f64>>) = if cfg.standardize {
                let st = Standardizer::fit(&train_raw);
                (
                    train_raw.iter().map(|x| st.apply(x)).collect(),
                    test.iter().map(|&t| st.apply(&xs[t])).collect(),
                )
            } else {
                (
                    train_raw.into_iter().cloned().collect(),
                    test.iter().map(|&t| xs[t].clone()).collect(),
                )
            };
            let train_y: Vec<usize> = train.iter().map(|&t| labels[t]).collect();
            let test_y: Vec<usize> = test.iter().map(|&t| labels[t]).collect();
            let seed = derive_seed(cfg.seed, i as u64);
            let preds = learner.fit_predict(&train_x, &train_y, &test_x, num_classes, seed)?;
            let confusion = Confusion::from_predictions(&preds, &test_y, num_classes)?;
            Ok((
                FoldResult {
                    index: i,
                    train_size: train.len(),
                    test_size: test.len(),
                    accuracy: confusion.accuracy(),
                    weighted_f1: confusion.weighted_f1(),
                },
                confusion,
            ))
        })
        .collect::<Result<_>>()?;

    let mut confusion = Confusion::new(num_classes);
    for (_, c) in &results {
        confusion.add(c);
    }
    let per_fold: Vec<FoldResult> = results.into_iter().map(|(f, _)| f).collect();
    let (mean_accuracy, std_accuracy) = mean_std(per_fold.iter().map(|f| f.accuracy));
    let (mean_weighted_f1, std_weighted_f1) = mean_std(per_fold.iter().map(|f| f.weighted_f1));
    Ok(EvalReport {
        protocol: cfg.protocol,
        accuracy: confusion.accuracy(),
        weighted_f1: confusion.weighted_f1(),
        mean_accuracy,
        std_accuracy,
        mean_weighted_f1,
        std_weighted_f1,
        per_fold,
        confusion,
    })
}

pub fn crossval_vectors(
    xs: &[Vec<f64>],
    labels: &[usize],
    num_classes: usize,
    learner: &MlpLearner,
    cfg: &CvConfig,
) -> Result<EvalReport> {
    crossval_with(learner, xs, labels, num_classes, cfg)
}
