//! Exact 1-D optimal transport between persistence value sets.
//!
//! In one dimension the p-Wasserstein distance is the L^p distance between
//! quantile functions. For empirical measures both quantile functions are
//! step functions, so the integral is a finite sum over the merged break
//! points `i/|a|` and `j/|b|`.

use crate::embed::sample_quantiles;
use crate::error::{Error, Result};

/// Sorted multiset of finite reals.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueSet(Vec<f64>);

impl ValueSet {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Argument("value sets must be finite".into()));
        }
        values.sort_by(f64::total_cmp);
        Ok(ValueSet(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::Argument(format!(
            "p must be a finite real >= 1, got {p}"
        )));
    }
    Ok(())
}

/// `(∫₀¹ |F_a⁻¹(z) − F_b⁻¹(z)|^p dz)^(1/p)`, integrated exactly.
pub fn wasserstein_p(a: &ValueSet, b: &ValueSet, p: f64) -> Result<f64> {
    check_p(p)?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    let (a, b) = (a.values(), b.values());
    let (na, nb) = (a.len() as u64, b.len() as u64);
    // positions are measured in units of 1/(na*nb)
    let (mut ia, mut ib, mut pos) = (0usize, 0usize, 0u64);
    let mut acc = 0.0;
    while ia < a.len() && ib < b.len() {
        let end_a = (ia as u64 + 1) * nb;
        let end_b = (ib as u64 + 1) * na;
        let end = end_a.min(end_b);
        acc += (a[ia] - b[ib]).abs().powf(p) * (end - pos) as f64;
        pos = end;
        if end == end_a {
            ia += 1;
        }
        if end == end_b {
            ib += 1;
        }
    }
    Ok((acc / (na * nb) as f64).powf(1.0 / p))
}

/// Sorted-matching closed form for sets of equal size:
/// `((1/k) Σ |a_(i) − b_(i)|^p)^(1/p)`.
pub fn wasserstein_p_matched(a: &ValueSet, b: &ValueSet, p: f64) -> Result<f64> {
    check_p(p)?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySet);
    }
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "sorted matching needs equal sizes, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let sum: f64 = a
        .values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs().powf(p))
        .sum();
    Ok((sum / a.len() as f64).powf(1.0 / p))
}

/// Quantile-mean set at `resolution` levels, the 2-Wasserstein barycenter of
/// the inputs' empirical distributions at that resolution.
pub fn barycenter(sets: &[ValueSet], resolution: usize) -> Result<ValueSet> {
    Ok(ValueSet(
        barycenter_with_spread(sets, resolution)?
            .into_iter()
            .map(|q| q.mean)
            .collect(),
    ))
}

/// Default barycenter resolution: the largest input cardinality.
pub fn default_resolution(sets: &[ValueSet]) -> usize {
    sets.iter().map(ValueSet::len).max().unwrap_or(1).max(1)
}

/// One quantile level of a barycenter with the population standard
/// deviation of the inputs at that level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileSummary {
    pub z: f64,
    pub mean: f64,
    pub std: f64,
}

pub fn barycenter_with_spread(
    sets: &[ValueSet],
    resolution: usize,
) -> Result<Vec<QuantileSummary>> {
    if sets.is_empty() {
        return Err(Error::Argument("barycenter of zero sets".into()));
    }
    if resolution == 0 {
        return Err(Error::Argument("resolution must be >= 1".into()));
    }
    if sets.iter().any(ValueSet::is_empty) {
        return Err(Error::EmptySet);
    }
    let samples: Vec<Vec<f64>> = sets
        .iter()
        .map(|s| sample_quantiles(s.values(), resolution))
        .collect();
    let count = sets.len() as f64;
    Ok((0..resolution)
        .map(|j| {
            let mean = samples.iter().map(|s| s[j]).sum::<f64>() / count;
            let var = samples.iter().map(|s| (s[j] - mean).powi(2)).sum::<f64>() / count;
            QuantileSummary {
                z: (j + 1) as f64 / resolution as f64,
                mean,
                std: var.sqrt(),
            }
        })
        .collect())
}

/// Distance between two sampled embeddings of length `m`, normalized so that
/// it converges to [`wasserstein_p`] between the underlying sets as `m`
/// grows: `(Σ_j |va_j − vb_j|^p)^(1/p) / m^(1/p)`. For `p = 1` this is the
/// plain p-norm divided by `m`.
pub fn embedding_distance(va: &[f64], vb: &[f64], p: f64, m: usize) -> Result<f64> {
    check_p(p)?;
    if va.len() != m || vb.len() != m {
        return Err(Error::Dimension(format!(
            "embedding lengths {} and {} for m={m}",
            va.len(),
            vb.len()
        )));
    }
    if m == 0 {
        return Err(Error::Argument("m must be >= 1".into()));
    }
    let sum: f64 = va.iter().zip(vb).map(|(x, y)| (x - y).abs().powf(p)).sum();
    Ok((sum / m as f64).powf(1.0 / p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn vs(v: &[f64]) -> ValueSet {
        ValueSet::new(v.to_vec()).unwrap()
    }

    /// Midpoint-rule integration on a fine grid; exact for step functions
    /// whose break points all fall on grid nodes.
    fn quadrature(a: &ValueSet, b: &ValueSet, p: f64, cells: usize) -> f64 {
        let mut acc = 0.0;
        for c in 0..cells {
            let z = (c as f64 + 0.5) / cells as f64;
            let qa = crate::embed::pseudo_inverse(a.values(), z).unwrap();
            let qb = crate::embed::pseudo_inverse(b.values(), z).unwrap();
            acc += (qa - qb).abs().powf(p);
        }
        (acc / cells as f64).powf(1.0 / p)
    }

    #[test]
    fn distance_examples() {
        assert_eq!(
            wasserstein_p(&vs(&[0.0, 1.0]), &vs(&[1.0, 2.0]), 1.0).unwrap(),
            1.0
        );
        assert_eq!(
            wasserstein_p(&vs(&[0.3, -0.2]), &vs(&[0.3, -0.2]), 2.0).unwrap(),
            0.0
        );
        assert_eq!(
            wasserstein_p(&vs(&[0.0]), &vs(&[0.0, 1.0]), 1.0).unwrap(),
            0.5
        );
        assert!(
            (wasserstein_p(&vs(&[0.0]), &vs(&[0.0, 1.0]), 2.0).unwrap() - 0.5f64.sqrt()).abs()
                < 1e-15
        );
    }

    #[test]
    fn distance_errors() {
        assert!(matches!(
            wasserstein_p(&vs(&[]), &vs(&[1.0]), 1.0),
            Err(Error::EmptySet)
        ));
        assert!(matches!(
            wasserstein_p(&vs(&[0.0]), &vs(&[1.0]), 0.5),
            Err(Error::Argument(_))
        ));
        assert!(ValueSet::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn matches_quadrature_on_unequal_sizes() {
        // sizes 3 and 4: all break points are multiples of 1/12
        let a = vs(&[0.1, -0.4, 0.9]);
        let b = vs(&[0.0, 0.2, 0.25, 0.7]);
        for p in [1.0, 2.0, 3.5] {
            let exact = wasserstein_p(&a, &b, p).unwrap();
            let quad = quadrature(&a, &b, p, 12 * 50);
            assert!((exact - quad).abs() < 1e-12, "p={p}: {exact} vs {quad}");
        }
    }

    #[test]
    fn barycenter_examples() {
        let out = barycenter(&[vs(&[0.0, 1.0]), vs(&[2.0, 3.0])], 2).unwrap();
        assert_eq!(out.values(), &[1.0, 2.0]);
        let s = vs(&[0.2, 0.5, 0.9]);
        let copies = vec![s.clone(), s.clone(), s.clone(), s.clone()];
        assert_eq!(barycenter(&copies, 3).unwrap(), s);
        assert_eq!(
            barycenter(&[vs(&[0.0]), vs(&[1.0])], 1).unwrap().values(),
            &[0.5]
        );
        assert_eq!(default_resolution(&[vs(&[0.0]), vs(&[1.0, 2.0, 3.0])]), 3);
        assert!(matches!(
            barycenter(&[vs(&[]), vs(&[1.0])], 1),
            Err(Error::EmptySet)
        ));
    }

    #[test]
    fn barycenter_spread() {
        let out = barycenter_with_spread(&[vs(&[0.0, 1.0]), vs(&[2.0, 3.0])], 2).unwrap();
        assert_eq!(
            out[0],
            QuantileSummary {
                z: 0.5,
                mean: 1.0,
                std: 1.0
            }
        );
        assert_eq!(
            out[1],
            QuantileSummary {
                z: 1.0,
                mean: 2.0,
                std: 1.0
            }
        );
    }

    /// Searches every nondecreasing candidate on a 0.1 grid in [0, 1] with up
    /// to 3 support points and checks none beats the quantile mean.
    #[test]
    fn barycenter_minimizes_squared_w2_on_small_grid() {
        let pairs = [
            (vs(&[0.0, 0.6]), vs(&[0.4, 1.0])),
            (vs(&[0.1, 0.2, 0.9]), vs(&[0.3, 0.5, 0.7])),
            (vs(&[0.5]), vs(&[0.1])),
        ];
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        for (a, b) in &pairs {
            let res = a.len();
            let bary = barycenter(&[a.clone(), b.clone()], res).unwrap();
            let cost = |c: &ValueSet| {
                wasserstein_p(c, a, 2.0).unwrap().powi(2)
                    + wasserstein_p(c, b, 2.0).unwrap().powi(2)
            };
            let best = cost(&bary);
            for size in 1..=3usize {
                let mut idx = vec![0usize; size];
                loop {
                    let cand = vs(&idx.iter().map(|&i| grid[i]).collect::<Vec<_>>());
                    assert!(cost(&cand) >= best - 1e-12, "{cand:?} beats {bary:?}");
                    // next nondecreasing index tuple
                    let mut k = size;
                    while k > 0 && idx[k - 1] == grid.len() - 1 {
                        k -= 1;
                    }
                    if k == 0 {
                        break;
                    }
                    idx[k - 1] += 1;
                    let v = idx[k - 1];
                    for t in idx.iter_mut().skip(k) {
                        *t = v;
                    }
                }
            }
        }
    }

    #[test]
    fn embedding_distance_examples() {
        let d = embedding_distance(&[0.0, 1.0], &[1.0, 2.0], 1.0, 2).unwrap();
        assert_eq!(d, 1.0);
        assert_eq!(
            d,
            wasserstein_p(&vs(&[0.0, 1.0]), &vs(&[1.0, 2.0]), 1.0).unwrap()
        );
        assert_eq!(
            embedding_distance(&[0.3, 0.4], &[0.3, 0.4], 2.0, 2).unwrap(),
            0.0
        );
        assert!(matches!(
            embedding_distance(&[0.0], &[0.0, 1.0], 1.0, 2),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn embedding_distance_converges() {
        let a = vs(&[-0.7, 0.1, 0.3, 0.95]);
        let b = vs(&[-0.2, 0.0, 0.4, 0.5, 0.6, 0.8, 0.81]);
        for p in [1.0, 2.0] {
            let w = wasserstein_p(&a, &b, p).unwrap();
            let err = |m: usize| {
                let va = sample_quantiles(a.values(), m);
                let vb = sample_quantiles(b.values(), m);
                (embedding_distance(&va, &vb, p, m).unwrap() - w).abs()
            };
            assert!(err(10_001) < err(101));
            assert!(err(10_001) / w < 1e-2);
            // multiples of lcm(4, 7) sample every step exactly
            assert!(err(2800) < 1e-12);
        }
    }

    fn equal_sets() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<f64>)> {
        (1usize..20).prop_flat_map(|k| {
            (
                prop::collection::vec(-1.0f64..1.0, k),
                prop::collection::vec(-1.0f64..1.0, k),
                prop::collection::vec(-1.0f64..1.0, k),
            )
        })
    }

    proptest! {
        #[test]
        fn metric_axioms((a, b, c) in equal_sets(), p in prop::sample::select(vec![1.0, 2.0])) {
            let (a, b, c) = (vs(&a), vs(&b), vs(&c));
            let ab = wasserstein_p(&a, &b, p).unwrap();
            prop_assert_eq!(ab, wasserstein_p(&b, &a, p).unwrap());
            prop_assert_eq!(wasserstein_p(&a, &a, p).unwrap(), 0.0);
            if a != b {
                prop_assert!(ab > 0.0);
            }
            let ac = wasserstein_p(&a, &c, p).unwrap();
            let cb = wasserstein_p(&c, &b, p).unwrap();
            prop_assert!(ab <= ac + cb + 1e-9);
            prop_assert!((ab - wasserstein_p_matched(&a, &b, p).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn symmetric_on_unequal_sizes(
            a in prop::collection::vec(-1.0f64..1.0, 1..15),
            b in prop::collection::vec(-1.0f64..1.0, 1..15),
        ) {
            let (a, b) = (vs(&a), vs(&b));
            prop_assert_eq!(wasserstein_p(&a, &b, 1.0).unwrap(), wasserstein_p(&b, &a, 1.0).unwrap());
        }
    }
}
