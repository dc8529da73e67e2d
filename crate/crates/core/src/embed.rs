//! Fixed-length embeddings by sampling the empirical quantile function of the
//! birth and death sets at `1/m, 2/m, ..., 1`.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::pgh::PersistenceDecomposition;

/// Fraction of `sorted` that is `<= x`.
pub fn empirical_cdf(sorted: &[f64], x: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptySet);
    }
    Ok(sorted.partition_point(|&v| v <= x) as f64 / sorted.len() as f64)
}

/// Smallest element whose empirical CDF reaches `z`, for `0 < z <= 1`.
pub fn pseudo_inverse(sorted: &[f64], z: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::EmptySet);
    }
    if !(z > 0.0 && z <= 1.0) {
        return Err(Error::Argument(format!(
            "quantile level {z} outside (0, 1]"
        )));
    }
    let k = sorted.len();
    let kf = k as f64;
    // ceil(z*k) can be off by one under rounding; settle it against the CDF
    // values i/k exactly as `empirical_cdf` computes them.
    let mut i = ((z * kf).ceil() as usize).clamp(1, k);
    while i > 1 && (i - 1) as f64 / kf >= z {
        i -= 1;
    }
    while i < k && (i as f64 / kf) < z {
        i += 1;
    }
    Ok(sorted[i - 1])
}

/// 1-based index `ceil(j*k/resolution)` of the sample at level `j/resolution`
/// in a sorted set of size `k`, in exact integer arithmetic.
pub(crate) fn grid_index(j: usize, resolution: usize, k: usize) -> usize {
    (j * k).div_ceil(resolution).clamp(1, k)
}

/// Samples `sorted` at `1/resolution, ..., 1`. Empty input gives zeros.
pub(crate) fn sample_quantiles(sorted: &[f64], resolution: usize) -> Vec<f64> {
    if sorted.is_empty() {
        return vec![0.0; resolution];
    }
    (1..=resolution)
        .map(|j| sorted[grid_index(j, resolution, sorted.len()) - 1])
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopoEmbedding {
    pub v_b: Vec<f64>,
    pub v_d: Vec<f64>,
    /// The birth set was empty and `v_b` is all zeros.
    pub degenerate_b: bool,
    pub degenerate_d: bool,
}

impl TopoEmbedding {
    pub fn m(&self) -> usize {
        self.v_b.len()
    }

    pub fn n(&self) -> usize {
        self.v_d.len()
    }

    /// `[v_b; v_d]`.
    pub fn concat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.m() + self.n());
        v.extend_from_slice(&self.v_b);
        v.extend_from_slice(&self.v_d);
        v
    }
}

pub fn embed(d: &PersistenceDecomposition, m: usize, n: usize) -> Result<TopoEmbedding> {
    if m == 0 || n == 0 {
        return Err(Error::Argument(format!(
            "embedding sizes must be >= 1, got m={m}, n={n}"
        )));
    }
    Ok(TopoEmbedding {
        v_b: sample_quantiles(&d.births, m),
        v_d: sample_quantiles(&d.deaths, n),
        degenerate_b: d.births.is_empty(),
        degenerate_d: d.deaths.is_empty(),
    })
}

/// How `m` and `n` are chosen from dataset statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MnPolicy {
    Max,
    Min,
    Avg,
    Fixed(usize, usize),
}

impl FromStr for MnPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(MnPolicy::Max),
            "min" => Ok(MnPolicy::Min),
            "avg" => Ok(MnPolicy::Avg),
            _ => {
                let bad = || {
                    Error::Argument(format!(
                        "unknown m/n policy {s:?} (expected max, min, avg or fixed:M,N)"
                    ))
                };
                let rest = s.strip_prefix("fixed:").ok_or_else(bad)?;
                let (m, n) = rest.split_once(',').ok_or_else(bad)?;
                let m: usize = m.trim().parse().map_err(|_| bad())?;
                let n: usize = n.trim().parse().map_err(|_| bad())?;
                if m == 0 || n == 0 {
                    return Err(Error::Argument("fixed m and n must be >= 1".into()));
                }
                Ok(MnPolicy::Fixed(m, n))
            }
        }
    }
}

impl fmt::Display for MnPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MnPolicy::Max => f.write_str("max"),
            MnPolicy::Min => f.write_str("min"),
            MnPolicy::Avg => f.write_str("avg"),
            MnPolicy::Fixed(m, n) => write!(f, "fixed:{m},{n}"),
        }
    }
}

/// Per-graph sizes that drive [`select_mn`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphStats {
    pub num_nodes: usize,
    pub birth_count: usize,
    pub death_count: usize,
}

impl From<&PersistenceDecomposition> for GraphStats {
    fn from(d: &PersistenceDecomposition) -> Self {
        GraphStats {
            num_nodes: d.num_nodes,
            birth_count: d.births.len(),
            death_count: d.deaths.len(),
        }
    }
}

pub fn select_mn(stats: &[GraphStats], policy: MnPolicy) -> Result<(usize, usize)> {
    if stats.is_empty() {
        return Err(Error::Argument("no graph statistics".into()));
    }
    let births = stats.iter().map(|s| s.birth_count);
    let deaths = stats.iter().map(|s| s.death_count);
    Ok(match policy {
        MnPolicy::Fixed(m, n) => (m, n),
        MnPolicy::Max => (
            births.max().unwrap_or(0).max(1),
            deaths.max().unwrap_or(0).max(1),
        ),
        MnPolicy::Min => (
            births.min().unwrap_or(0).max(1),
            deaths.min().unwrap_or(0).max(1),
        ),
        MnPolicy::Avg => {
            let len = stats.len() as f64;
            // f64::round is half-away-from-zero
            let mean_b = births.sum::<usize>() as f64 / len;
            let mean_d = deaths.sum::<usize>() as f64 / len;
            (
                (mean_b.round() as usize).max(1),
                (mean_d.round() as usize).max(1),
            )
        }
    })
}
