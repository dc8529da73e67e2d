use crate::error::{Error, Result};

/// `counts[true][predicted]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Confusion {
    pub counts: Vec<Vec<usize>>,
}

impl Confusion {
    pub fn new(num_classes: usize) -> Self {
        Confusion {
            counts: vec![vec![0; num_classes]; num_classes],
        }
    }

    pub fn from_predictions(preds: &[usize], labels: &[usize], num_classes: usize) -> Result<Self> {
        if preds.len() != labels.len() {
            return Err(Error::Dimension(format!(
                "{} predictions for {} labels",
                preds.len(),
                labels.len()
            )));
        }
        let mut c = Confusion::new(num_classes);
        for (&p, &y) in preds.iter().zip(labels) {
            if p >= num_classes || y >= num_classes {
                return Err(Error::Argument(format!(
                    "class index outside 0..{num_classes}"
                )));
            }
            c.counts[y][p] += 1;
        }
        Ok(c)
    }

    pub fn add(&mut self, other: &Confusion) {
        for (row, o) in self.counts.iter_mut().zip(&other.counts) {
            for (a, b) in row.iter_mut().zip(o) {
                *a += b;
            }
        }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn accuracy(&self) -> f64 {
        let trace: usize = (0..self.counts.len()).map(|i| self.counts[i][i]).sum();
        trace as f64 / self.total().max(1) as f64
    }

    /// Support-weighted mean of per-class F1; a class with `P + R = 0`
    /// scores 0.
    pub fn weighted_f1(&self) -> f64 {
        let c = self.counts.len();
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        let mut acc = 0.0;
        for k in 0..c {
            let tp = self.counts[k][k] as f64;
            let support: usize = self.counts[k].iter().sum();
            let predicted: usize = (0..c).map(|r| self.counts[r][k]).sum();
            if support == 0 {
                continue;
            }
            let precision = if predicted == 0 {
                0.0
            } else {
                tp / predicted as f64
            };
            let recall = tp / support as f64;
            let f1 = if precision + recall == 0.0 {
                0.0
            } else {
                2.0 * precision * recall / (precision + recall)
            };
            acc += support as f64 * f1;
        }
        acc / total as f64
    }
}

pub fn weighted_f1(preds: &[usize], labels: &[usize]) -> Result<f64> {
    if preds.is_empty() {
        return Err(Error::Dimension("no predictions".into()));
    }
    let classes = preds.iter().chain(labels).max().map_or(0, |m| m + 1);
    Ok(Confusion::from_predictions(preds, labels, classes)?.weighted_f1())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_predictions() {
        assert_eq!(weighted_f1(&[0, 1, 2, 1], &[0, 1, 2, 1]).unwrap(), 1.0);
    }

    #[test]
    fn hand_computed_cases() {
        let v = weighted_f1(&[0, 1, 1, 1], &[0, 0, 1, 1]).unwrap();
        assert!((v - (2.0 * (2.0 / 3.0) + 2.0 * 0.8) / 4.0).abs() < 1e-15);
        let v = weighted_f1(&[0, 0], &[0, 1]).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn errors_and_accuracy() {
        assert!(matches!(
            weighted_f1(&[0], &[0, 1]),
            Err(Error::Dimension(_))
        ));
        assert!(weighted_f1(&[], &[]).is_err());
        let c = Confusion::from_predictions(&[0, 1, 1, 1], &[0, 0, 1, 1], 2).unwrap();
        assert_eq!(c.accuracy(), 0.75);
        assert_eq!(c.counts, vec![vec![1, 1], vec![0, 2]]);
    }
}
