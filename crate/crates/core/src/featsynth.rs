//! Node feature matrices feeding the correlation step.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graphstore::{Dataset, Graph};

/// Dense row-major real matrix; row `i` is the feature vector of node `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl FeatureMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::Numeric {
                row: pos / cols.max(1),
                col: pos % cols.max(1),
            });
        }
        Ok(FeatureMatrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    fn hconcat(parts: &[FeatureMatrix]) -> FeatureMatrix {
        let rows = parts[0].rows;
        let cols = parts.iter().map(|p| p.cols).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for p in parts {
                data.extend_from_slice(p.row(r));
            }
        }
        FeatureMatrix { rows, cols, data }
    }
}

/// Source of node features.
#[derive(Debug, Clone, PartialEq)]
pub enum FeaturePolicy {
    /// The graph's own node attributes.
    Intrinsic,
    /// One-hot encoding of node labels over a fixed alphabet.
    LabelOneHot { alphabet: Vec<i64> },
    /// Local degree profile, see [`ldp`].
    Ldp,
    /// Column-wise concatenation in list order.
    Concat(Vec<FeaturePolicy>),
}

/// Dataset-independent policy name as accepted on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureSpec {
    Intrinsic,
    Labels,
    Ldp,
    IntrinsicLdp,
    LabelsLdp,
}

impl FromStr for FeatureSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "intrinsic" => FeatureSpec::Intrinsic,
            "labels" => FeatureSpec::Labels,
            "ldp" => FeatureSpec::Ldp,
            "intrinsic+ldp" => FeatureSpec::IntrinsicLdp,
            "labels+ldp" => FeatureSpec::LabelsLdp,
            other => {
                return Err(Error::Argument(format!(
                    "unknown feature policy {other:?} (expected intrinsic, labels, ldp, intrinsic+ldp or labels+ldp)"
                )))
            }
        })
    }
}

impl fmt::Display for FeatureSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureSpec::Intrinsic => "intrinsic",
            FeatureSpec::Labels => "labels",
            FeatureSpec::Ldp => "ldp",
            FeatureSpec::IntrinsicLdp => "intrinsic+ldp",
            FeatureSpec::LabelsLdp => "labels+ldp",
        })
    }
}

impl FeatureSpec {
    /// Binds the feature choice to a dataset; label one-hot encodings use the
    /// dataset-wide node label alphabet so every graph gets the same width.
    pub fn resolve(self, ds: &Dataset) -> Result<FeaturePolicy> {
        let labels = || -> Result<FeaturePolicy> {
            let alphabet = ds.node_label_alphabet().ok_or_else(|| {
                Error::Policy(format!("dataset {} has no node labels", ds.name()))
            })?;
            Ok(FeaturePolicy::LabelOneHot {
                alphabet: alphabet.to_vec(),
            })
        };
        Ok(match self {
            FeatureSpec::Intrinsic => FeaturePolicy::Intrinsic,
            FeatureSpec::Labels => labels()?,
            FeatureSpec::Ldp => FeaturePolicy::Ldp,
            FeatureSpec::IntrinsicLdp => {
                FeaturePolicy::Concat(vec![FeaturePolicy::Intrinsic, FeaturePolicy::Ldp])
            }
            FeatureSpec::LabelsLdp => FeaturePolicy::Concat(vec![labels()?, FeaturePolicy::Ldp]),
        })
    }
}

/// Builds the feature matrix for `g`. Matrices narrower than two columns are
/// rejected because the Pearson correlation of scalars is always ±1 or 0.
pub fn node_features(g: &Graph, policy: &FeaturePolicy) -> Result<FeatureMatrix> {
    let x = build(g, policy)?;
    if x.cols < 2 {
        return Err(Error::DegenerateFeature { dim: x.cols });
    }
    Ok(x)
}

fn build(g: &Graph, policy: &FeaturePolicy) -> Result<FeatureMatrix> {
    match policy {
        FeaturePolicy::Intrinsic => g
            .node_attributes()
            .cloned()
            .ok_or_else(|| Error::Policy("intrinsic features need node attributes".into())),
        FeaturePolicy::LabelOneHot { alphabet } => {
            let labels = g
                .node_labels()
                .ok_or_else(|| Error::Policy("label one-hot features need node labels".into()))?;
            let cols = alphabet.len();
            let mut data = vec![0.0; labels.len() * cols];
            for (i, l) in labels.iter().enumerate() {
                let c = alphabet
                    .binary_search(l)
                    .map_err(|_| Error::Policy(format!("node label {l} not in alphabet")))?;
                data[i * cols + c] = 1.0;
            }
            FeatureMatrix::new(labels.len(), cols, data)
        }
        FeaturePolicy::Ldp => Ok(ldp(g)),
        FeaturePolicy::Concat(parts) => {
            if parts.is_empty() {
                return Err(Error::Policy("empty concat list".into()));
            }
            let built = parts
                .iter()
                .map(|p| build(g, p))
                .collect::<Result<Vec<_>>>()?;
            Ok(FeatureMatrix::hconcat(&built))
        }
    }
}

/// Local degree profile: `(degree, min, max, mean, population std)` of the
/// neighbors' degrees. Isolated nodes get all zeros.
pub fn ldp(g: &Graph) -> FeatureMatrix {
    let deg = g.degrees();
    let adj = g.adjacency();
    let mut data = Vec::with_capacity(g.num_nodes() * 5);
    for (v, nbrs) in adj.iter().enumerate() {
        if nbrs.is_empty() {
            data.extend_from_slice(&[0.0; 5]);
            continue;
        }
        let nd: Vec<f64> = nbrs.iter().map(|&u| deg[u] as f64).collect();
        let k = nd.len() as f64;
        let min = nd.iter().copied().fold(f64::INFINITY, f64::min);
        let max = nd.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = nd.iter().sum::<f64>() / k;
        let var = nd.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / k;
        data.extend_from_slice(&[deg[v] as f64, min, max, mean, var.sqrt()]);
    }
    FeatureMatrix {
        rows: g.num_nodes(),
        cols: 5,
        data,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ldp_star() {
        let g = Graph::new(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let x = ldp(&g);
        assert_eq!(x.row(0), &[3.0, 1.0, 1.0, 1.0, 0.0]);
        for leaf in 1..4 {
            assert_eq!(x.row(leaf), &[1.0, 3.0, 3.0, 3.0, 0.0]);
        }
        let via_policy = node_features(&g, &FeaturePolicy::Ldp).unwrap();
        assert_eq!(via_policy, x);
    }

    #[test]
    fn ldp_triangle_path_and_isolated() {
        let k3 = Graph::new(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        let x = ldp(&k3);
        for r in 0..3 {
            assert_eq!(x.row(r), &[2.0, 2.0, 2.0, 2.0, 0.0]);
        }
        let path = Graph::new(3, &[(0, 1), (1, 2)]).unwrap();
        let x = ldp(&path);
        assert_eq!(x.row(1), &[2.0, 1.0, 1.0, 1.0, 0.0]);
        assert_eq!(x.row(0), &[1.0, 2.0, 2.0, 2.0, 0.0]);
        let single = Graph::new(1, &[]).unwrap();
        assert_eq!(ldp(&single).row(0), &[0.0; 5]);
    }

    #[test]
    fn ldp_population_std() {
        // node 0 has neighbours of degree 1 and 3
        let g = Graph::new(5, &[(0, 1), (0, 2), (2, 3), (2, 4)]).unwrap();
        let x = ldp(&g);
        assert_eq!(x.row(0), &[2.0, 1.0, 3.0, 2.0, 1.0]);
    }

    #[test]
    fn intrinsic_passthrough() {
        let attrs =
            FeatureMatrix::from_rows(&[vec![1.0, 2.0, 3.0, 4.0], vec![0.5, 0.0, -1.0, 2.0]])
                .unwrap();
        let g = Graph::new(2, &[(0, 1)])
            .unwrap()
            .with_node_attributes(attrs.clone())
            .unwrap();
        assert_eq!(node_features(&g, &FeaturePolicy::Intrinsic).unwrap(), attrs);
    }

    #[test]
    fn one_hot_labels() {
        let g = Graph::new(3, &[(0, 1)])
            .unwrap()
            .with_node_labels(vec![2, 0, 1])
            .unwrap();
        let x = node_features(
            &g,
            &FeaturePolicy::LabelOneHot {
                alphabet: vec![0, 1, 2],
            },
        )
        .unwrap();
        assert_eq!(x.cols(), 3);
        assert_eq!(x.row(0), &[0.0, 0.0, 1.0]);
        assert_eq!(x.row(1), &[1.0, 0.0, 0.0]);
        assert_eq!(x.row(2), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn concat_in_list_order() {
        let g = Graph::new(2, &[(0, 1)])
            .unwrap()
            .with_node_labels(vec![7, 9])
            .unwrap();
        let p = FeaturePolicy::Concat(vec![
            FeaturePolicy::LabelOneHot {
                alphabet: vec![7, 9],
            },
            FeaturePolicy::Ldp,
        ]);
        let x = node_features(&g, &p).unwrap();
        assert_eq!(x.cols(), 7);
        assert_eq!(x.row(0), &[1.0, 0.0, 1.0, 1.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn inapplicable_and_degenerate_policies() {
        let g = Graph::new(2, &[(0, 1)]).unwrap();
        assert!(matches!(
            node_features(&g, &FeaturePolicy::Intrinsic),
            Err(Error::Policy(_))
        ));
        assert!(matches!(
            node_features(&g, &FeaturePolicy::LabelOneHot { alphabet: vec![0] }),
            Err(Error::Policy(_))
        ));
        assert!(matches!(
            node_features(&g, &FeaturePolicy::Concat(vec![])),
            Err(Error::Policy(_))
        ));
        let labelled = g.with_node_labels(vec![0, 0]).unwrap();
        assert!(matches!(
            node_features(&labelled, &FeaturePolicy::LabelOneHot { alphabet: vec![0] }),
            Err(Error::DegenerateFeature { dim: 1 })
        ));
    }

    #[test]
    fn feature_choice_round_trips_through_strings() {
        for s in ["intrinsic", "labels", "ldp", "intrinsic+ldp", "labels+ldp"] {
            assert_eq!(s.parse::<FeatureSpec>().unwrap().to_string(), s);
        }
        assert!("degree".parse::<FeatureSpec>().is_err());
    }
}
