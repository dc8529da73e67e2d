//! Two-layer perceptron: linear → ReLU → dropout → linear → softmax, trained
//! with mean cross-entropy, L2 weight decay and Adam.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::embed::TopoEmbedding;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct MlpConfig {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub num_classes: usize,
    pub dropout: f64,
    pub lr: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl MlpConfig {
    /// Defaults: hidden 64, dropout 0.3, lr 1e-3, weight decay 1e-5,
    /// 200 epochs, batches of 64.
    pub fn new(input_dim: usize, num_classes: usize) -> Self {
        MlpConfig {
            input_dim,
            hidden_dim: 64,
            num_classes,
            dropout: 0.3,
            lr: 1e-3,
            weight_decay: 1e-5,
            epochs: 200,
            batch_size: 64,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.hidden_dim == 0 || self.num_classes == 0 {
            return Err(Error::Argument("MLP dimensions must be >= 1".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::Argument(format!(
                "dropout {} outside [0, 1)",
                self.dropout
            )));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Argument(format!(
                "learning rate {} must be positive",
                self.lr
            )));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            return Err(Error::Argument("weight decay must be >= 0".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Argument("batch size must be >= 1".into()));
        }
        Ok(())
    }
}

/// Parameters live in one flat buffer laid out as `[w1 | b1 | w2 | b2]`,
/// with `w1` of shape hidden × input and `w2` of shape classes × hidden,
/// both row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    params: Vec<f64>,
    config: MlpConfig,
}

struct Layout {
    w1: std::ops::Range<usize>,
    b1: std::ops::Range<usize>,
    w2: std::ops::Range<usize>,
    b2: std::ops::Range<usize>,
}

impl Layout {
    fn of(cfg: &MlpConfig) -> Layout {
        let (i, h, c) = (cfg.input_dim, cfg.hidden_dim, cfg.num_classes);
        let w1 = 0..h * i;
        let b1 = w1.end..w1.end + h;
        let w2 = b1.end..b1.end + c * h;
        let b2 = w2.end..w2.end + c;
        Layout { w1, b1, w2, b2 }
    }

    fn len(&self) -> usize {
        self.b2.end
    }
}

/// Intermediate values of one forward pass.
struct Trace {
    z1: Vec<f64>,
    hidden: Vec<f64>,
    log_probs: Vec<f64>,
}

impl MlpModel {
    /// Glorot-uniform weights, zero biases.
    pub fn init(config: MlpConfig, rng: &mut impl Rng) -> Result<Self> {
        config.validate()?;
        let layout = Layout::of(&config);
        let mut params = vec![0.0; layout.len()];
        let a1 = (6.0 / (config.input_dim + config.hidden_dim) as f64).sqrt();
        let a2 = (6.0 / (config.hidden_dim + config.num_classes) as f64).sqrt();
        for w in &mut params[layout.w1.clone()] {
            *w = rng.gen_range(-a1..a1);
        }
        for w in &mut params[layout.w2.clone()] {
            *w = rng.gen_range(-a2..a2);
        }
        Ok(MlpModel { params, config })
    }

    pub fn zeros(config: MlpConfig) -> Result<Self> {
        config.validate()?;
        let len = Layout::of(&config).len();
        Ok(MlpModel {
            params: vec![0.0; len],
            config,
        })
    }

    /// Builds a model from explicit layer matrices (row-major).
    pub fn from_weights(
        config: MlpConfig,
        w1: &[f64],
        b1: &[f64],
        w2: &[f64],
        b2: &[f64],
    ) -> Result<Self> {
        config.validate()?;
        let layout = Layout::of(&config);
        if w1.len() != layout.w1.len()
            || b1.len() != layout.b1.len()
            || w2.len() != layout.w2.len()
            || b2.len() != layout.b2.len()
        {
            return Err(Error::Dimension(
                "layer shapes do not match the config".into(),
            ));
        }
        let params = [w1, b1, w2, b2].concat();
        Ok(MlpModel { params, config })
    }

    pub fn config(&self) -> &MlpConfig {
        &self.config
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.config.input_dim {
            return Err(Error::Dimension(format!(
                "input of length {} for input_dim {}",
                x.len(),
                self.config.input_dim
            )));
        }
        Ok(())
    }

    /// `mask` holds the already-scaled dropout multipliers per hidden unit.
    fn trace(&self, x: &[f64], mask: Option<&[f64]>) -> Trace {
        let (h, c, d) = (
            self.config.hidden_dim,
            self.config.num_classes,
            self.config.input_dim,
        );
        let lay = Layout::of(&self.config);
        let w1 = &self.params[lay.w1];
        let b1 = &self.params[lay.b1];
        let w2 = &self.params[lay.w2];
        let b2 = &self.params[lay.b2];

        let mut z1 = vec![0.0; h];
        let mut hidden = vec![0.0; h];
        for u in 0..h {
            let row = &w1[u * d..(u + 1) * d];
            let z = b1[u] + row.iter().zip(x).map(|(w, v)| w * v).sum::<f64>();
            z1[u] = z;
            let a = z.max(0.0);
            hidden[u] = match mask {
                Some(m) => a * m[u],
                None => a,
            };
        }
        let mut logits = vec![0.0; c];
        for k in 0..c {
            let row = &w2[k * h..(k + 1) * h];
            logits[k] = b2[k] + row.iter().zip(&hidden).map(|(w, a)| w * a).sum::<f64>();
        }
        let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lse = max + logits.iter().map(|z| (z - max).exp()).sum::<f64>().ln();
        let log_probs = logits.iter().map(|z| z - lse).collect();
        Trace {
            z1,
            hidden,
            log_probs,
        }
    }

    fn dropout_mask(&self, rng: &mut impl Rng) -> Vec<f64> {
        let p = self.config.dropout;
        let keep = 1.0 / (1.0 - p);
        (0..self.config.hidden_dim)
            .map(|_| if rng.gen::<f64>() < p { 0.0 } else { keep })
            .collect()
    }

    /// Class probabilities. In train mode hidden units are dropped with the
    /// configured probability and survivors scaled by `1/(1-p)`.
    pub fn forward(&self, x: &[f64], train_mode: bool, rng: &mut impl Rng) -> Result<Vec<f64>> {
        self.check_input(x)?;
        let mask = (train_mode && self.config.dropout > 0.0).then(|| self.dropout_mask(rng));
        Ok(self
            .trace(x, mask.as_deref())
            .log_probs
            .into_iter()
            .map(f64::exp)
            .collect())
    }

    /// Most probable class, evaluation mode.
    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        self.check_input(x)?;
        let lp = self.trace(x, None).log_probs;
        Ok(argmax(&lp))
    }

    /// Objective `mean CE + (λ/2)·‖θ‖²` over `batch` and its gradient.
    /// `masks`, when given, holds one dropout mask per sample.
    pub(crate) fn loss_and_grad(
        &self,
        batch: &[(&[f64], usize)],
        masks: Option<&[Vec<f64>]>,
    ) -> (f64, Vec<f64>) {
        let (h, c, d) = (
            self.config.hidden_dim,
            self.config.num_classes,
            self.config.input_dim,
        );
        let lay = Layout::of(&self.config);
        let mut grad = vec![0.0; lay.len()];
        let scale = 1.0 / batch.len() as f64;
        let mut loss = 0.0;
        for (s, &(x, y)) in batch.iter().enumerate() {
            let mask = masks.map(|m| m[s].as_slice());
            let t = self.trace(x, mask);
            loss -= t.log_probs[y];
            // dL/dlogits = softmax - onehot
            let dz2: Vec<f64> = t
                .log_probs
                .iter()
                .enumerate()
                .map(|(k, lp)| (lp.exp() - if k == y { 1.0 } else { 0.0 }) * scale)
                .collect();
            let mut dhidden = vec![0.0; h];
            for k in 0..c {
                grad[lay.b2.start + k] += dz2[k];
                let w2_row = lay.w2.start + k * h;
                for u in 0..h {
                    grad[w2_row + u] += dz2[k] * t.hidden[u];
                    dhidden[u] += self.params[w2_row + u] * dz2[k];
                }
            }
            for u in 0..h {
                if t.z1[u] <= 0.0 {
                    continue;
                }
                let dz1 = dhidden[u] * mask.map_or(1.0, |m| m[u]);
                if dz1 == 0.0 {
                    continue;
                }
                grad[lay.b1.start + u] += dz1;
                let w1_row = lay.w1.start + u * d;
                for (g, xv) in grad[w1_row..w1_row + d].iter_mut().zip(x) {
                    *g += dz1 * xv;
                }
            }
        }
        loss *= scale;
        let wd = self.config.weight_decay;
        if wd > 0.0 {
            loss += 0.5 * wd * self.params.iter().map(|p| p * p).sum::<f64>();
            for (g, p) in grad.iter_mut().zip(&self.params) {
                *g += wd * p;
            }
        }
        (loss, grad)
    }

    /// Mean cross-entropy of `batch` in evaluation mode (no weight decay term).
    pub fn cross_entropy(&self, xs: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
        let mut total = 0.0;
        for (x, &y) in xs.iter().zip(labels) {
            self.check_input(x)?;
            total -= self.trace(x, None).log_probs[y];
        }
        Ok(total / xs.len().max(1) as f64)
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

struct Adam {
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    const BETA1: f64 = 0.9;
    const BETA2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    fn new(len: usize) -> Self {
        Adam {
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::BETA1.powi(self.t);
        let c2 = 1.0 - Self::BETA2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = Self::BETA1 * self.m[i] + (1.0 - Self::BETA1) * grad[i];
            self.v[i] = Self::BETA2 * self.v[i] + (1.0 - Self::BETA2) * grad[i] * grad[i];
            let mhat = self.m[i] / c1;
            let vhat = self.v[i] / c2;
            params[i] -= lr * mhat / (vhat.sqrt() + Self::EPS);
        }
    }
}

fn check_training_set(xs: &[Vec<f64>], labels: &[usize], cfg: &MlpConfig) -> Result<()> {
    cfg.validate()?;
    if xs.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} samples for {} labels",
            xs.len(),
            labels.len()
        )));
    }
    if let Some(x) = xs.iter().find(|x| x.len() != cfg.input_dim) {
        return Err(Error::Dimension(format!(
            "sample of length {} for input_dim {}",
            x.len(),
            cfg.input_dim
        )));
    }
    if let Some(&y) = labels.iter().find(|&&y| y >= cfg.num_classes) {
        return Err(Error::Argument(format!(
            "label {y} outside 0..{}",
            cfg.num_classes
        )));
    }
    if labels.iter().all(|&y| Some(&y) == labels.first()) {
        return Err(Error::DegenerateLabels);
    }
    Ok(())
}

/// Trains on feature vectors and returns the final-epoch model together with
/// the mean training objective of every epoch.
pub fn train_vectors(
    xs: &[Vec<f64>],
    labels: &[usize],
    cfg: &MlpConfig,
) -> Result<(MlpModel, Vec<f64>)> {
    check_training_set(xs, labels, cfg)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut model = MlpModel::init(cfg.clone(), &mut rng)?;
    let mut adam = Adam::new(model.params.len());
    let mut order: Vec<usize> = (0..xs.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let use_dropout = cfg.dropout > 0.0;
    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<(&[f64], usize)> = chunk
                .iter()
                .map(|&i| (xs[i].as_slice(), labels[i]))
                .collect();
            let masks: Option<Vec<Vec<f64>>> =
                use_dropout.then(|| chunk.iter().map(|_| model.dropout_mask(&mut rng)).collect());
            let (loss, grad) = model.loss_and_grad(&batch, masks.as_deref());
            epoch_loss += loss * chunk.len() as f64;
            adam.step(&mut model.params, &grad, cfg.lr);
        }
        if model.params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Numeric { row: 0, col: 0 });
        }
        history.push(epoch_loss / xs.len() as f64);
    }
    Ok((model, history))
}

/// Trains on concatenated `[v_b; v_d]` embeddings.
pub fn train(embeddings: &[TopoEmbedding], labels: &[usize], cfg: &MlpConfig) -> Result<MlpModel> {
    let xs: Vec<Vec<f64>> = embeddings.iter().map(TopoEmbedding::concat).collect();
    train_vectors(&xs, labels, cfg).map(|(m, _)| m)
}

/// Largest relative deviation between analytic gradients and central finite
/// differences (step 1e-5, dropout off):
/// `|g_a − g_n| / max(1e-8, |g_a| + |g_n|)`.
pub fn gradient_check(model: &MlpModel, batch: &[(Vec<f64>, usize)]) -> Result<f64> {
    const STEP: f64 = 1e-5;
    for (x, y) in batch {
        model.check_input(x)?;
        if *y >= model.config.num_classes {
            return Err(Error::Argument(format!("label {y} out of range")));
        }
    }
    let refs: Vec<(&[f64], usize)> = batch.iter().map(|(x, y)| (x.as_slice(), *y)).collect();
    let (_, analytic) = model.loss_and_grad(&refs, None);
    let mut probe = model.clone();
    let mut worst = 0.0f64;
    for (k, &ga) in analytic.iter().enumerate() {
        let orig = probe.params[k];
        probe.params[k] = orig + STEP;
        let (plus, _) = probe.loss_and_grad(&refs, None);
        probe.params[k] = orig - STEP;
        let (minus, _) = probe.loss_and_grad(&refs, None);
        probe.params[k] = orig;
        let numeric = (plus - minus) / (2.0 * STEP);
        let rel = (ga - numeric).abs() / (ga.abs() + numeric.abs()).max(1e-8);
        worst = worst.max(rel);
    }
    Ok(worst)
}
