//! Functional connectivity: pairwise Pearson correlations between node
//! feature rows.

use crate::error::{Error, Result};
use crate::featsynth::FeatureMatrix;
use crate::pgh::WeightedGraph;

/// Rows at least this long are reduced with compensated summation.
const COMPENSATED_LEN: usize = 1024;

fn sum(values: impl Iterator<Item = f64>, len: usize) -> f64 {
    if len < COMPENSATED_LEN {
        return values.sum();
    }
    // Neumaier
    let mut s = 0.0f64;
    let mut c = 0.0f64;
    for v in values {
        let t = s + v;
        if s.abs() >= v.abs() {
            c += (s - t) + v;
        } else {
            c += (v - t) + s;
        }
        s = t;
    }
    s + c
}

/// Centered copy of `x` and its squared Euclidean norm. A constant row
/// reports exactly zero even when its mean is not representable.
fn center(x: &[f64]) -> (Vec<f64>, f64) {
    let n = x.len();
    if x.iter().all(|&v| v == x[0]) {
        return (vec![0.0; n], 0.0);
    }
    let mean = sum(x.iter().copied(), n) / n as f64;
    let c: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let sq = sum(c.iter().map(|v| v * v), n);
    (c, sq)
}

fn correlate(cx: &[f64], sx: f64, cy: &[f64], sy: f64) -> f64 {
    if sx == 0.0 || sy == 0.0 {
        return 0.0;
    }
    let dot = sum(cx.iter().zip(cy).map(|(a, b)| a * b), cx.len());
    // one square root keeps r(x, x) and r(x, -x) exact
    let prod = sx * sy;
    let denom = if prod.is_normal() {
        prod.sqrt()
    } else {
        sx.sqrt() * sy.sqrt()
    };
    (dot / denom).clamp(-1.0, 1.0)
}

/// Pearson correlation in centered-cosine form, clamped to `[-1, 1]`.
/// A zero-variance argument yields 0.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "vectors of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Dimension(format!(
            "Pearson correlation needs at least 2 entries, got {}",
            x.len()
        )));
    }
    let (cx, nx) = center(x);
    let (cy, ny) = center(y);
    Ok(correlate(&cx, nx, &cy, ny))
}

/// Symmetric correlation matrix. The diagonal is excluded and stored as NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct FcMatrix {
    n: usize,
    values: Vec<f64>,
    zero_variance_rows: Vec<usize>,
}

impl FcMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `None` on the diagonal.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        (i != j).then(|| self.values[i * self.n + j])
    }

    pub fn zero_variance_rows(&self) -> &[usize] {
        &self.zero_variance_rows
    }

    /// `(i, j, r_ij)` for every unordered pair with `i < j`, row-major.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n)
            .flat_map(move |i| (i + 1..self.n).map(move |j| (i, j, self.values[i * self.n + j])))
    }

    /// The complete weighted graph over all node pairs.
    pub fn to_weighted_graph(&self) -> WeightedGraph {
        WeightedGraph::from_canonical(self.n, self.pairs().collect())
    }
}

pub fn functional_connectivity(x: &FeatureMatrix) -> Result<FcMatrix> {
    if x.rows() == 0 {
        return Err(Error::Dimension("feature matrix has no rows".into()));
    }
    if x.cols() < 2 {
        return Err(Error::DegenerateFeature { dim: x.cols() });
    }
    if let Some(pos) = x.as_slice().iter().position(|v| !v.is_finite()) {
        return Err(Error::Numeric {
            row: pos / x.cols(),
            col: pos % x.cols(),
        });
    }
    let n = x.rows();
    let centered: Vec<(Vec<f64>, f64)> = (0..n).map(|i| center(x.row(i))).collect();
    let zero_variance_rows = centered
        .iter()
        .enumerate()
        .filter(|(_, (_, sq))| *sq == 0.0)
        .map(|(i, _)| i)
        .collect();
    let mut values = vec![f64::NAN; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let r = correlate(&centered[i].0, centered[i].1, &centered[j].0, centered[j].1);
            values[i * n + j] = r;
            values[j * n + i] = r;
        }
    }
    Ok(FcMatrix {
        n,
        values,
        zero_variance_rows,
    })
}
