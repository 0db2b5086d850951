use super::hungarian::max_weight_assignment;
use crate::points::compact_labels;
use crate::{Error, Result};

/// Cross-tabulation of true classes (rows) against predicted clusters (columns).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Contingency {
    table: Vec<Vec<usize>>,
    n: usize,
}

impl Contingency {
    pub fn new(y_true: &[usize], y_pred: &[usize]) -> Result<Self> {
        if y_true.len() != y_pred.len() {
            return Err(Error::LengthMismatch {
                left: y_true.len(),
                right: y_pred.len(),
            });
        }
        let t = compact_labels(y_true);
        let p = compact_labels(y_pred);
        let rows = t.iter().max().map_or(0, |v| v + 1);
        let cols = p.iter().max().map_or(0, |v| v + 1);
        let mut table = vec![vec![0usize; cols]; rows];
        for (&a, &b) in t.iter().zip(&p) {
            table[a][b] += 1;
        }
        Ok(Contingency { table, n: y_true.len() })
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn row_sums(&self) -> Vec<usize> {
        self.table.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn col_sums(&self) -> Vec<usize> {
        let cols = self.table.first().map_or(0, Vec::len);
        (0..cols).map(|j| self.table.iter().map(|r| r[j]).sum()).collect()
    }
}

/// Best fraction of samples whose cluster maps to their class, over
/// injective cluster-to-class mappings. Unmatched clusters (when there are
/// more clusters than classes) score nothing.
pub fn clustering_accuracy(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    if y_true.is_empty() && y_pred.is_empty() {
        return Err(Error::invalid("accuracy of an empty labelling"));
    }
    let c = Contingency::new(y_true, y_pred)?;
    let weights: Vec<Vec<f64>> = c.table.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
    let (_, matched) = max_weight_assignment(&weights);
    Ok(matched / c.n as f64)
}

fn entropy(counts: &[usize], n: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Normalized mutual information with the arithmetic-mean normalizer.
///
/// Returns 0 when either partition is a single cluster.
pub fn nmi(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    let c = Contingency::new(y_true, y_pred)?;
    if c.n == 0 {
        return Err(Error::invalid("nmi of an empty labelling"));
    }
    let rows = c.row_sums();
    let cols = c.col_sums();
    if rows.len() < 2 || cols.len() < 2 {
        return Ok(0.0);
    }
    let n = c.n as f64;
    let h_true = entropy(&rows, n);
    let h_pred = entropy(&cols, n);
    let mut mi = 0.0;
    for (i, row) in c.table.iter().enumerate() {
        for (j, &nij) in row.iter().enumerate() {
            if nij == 0 {
                continue;
            }
            let nij = nij as f64;
            mi += nij / n * (n * nij / (rows[i] as f64 * cols[j] as f64)).ln();
        }
    }
    let denom = 0.5 * (h_true + h_pred);
    Ok((mi / denom).clamp(0.0, 1.0))
}

fn comb2(v: usize) -> f64 {
    let v = v as f64;
    v * (v - 1.0) / 2.0
}

/// Adjusted Rand index from pair counts over the contingency table.
pub fn ari(y_true: &[usize], y_pred: &[usize]) -> Result<f64> {
    let c = Contingency::new(y_true, y_pred)?;
    if c.n < 2 {
        return Err(Error::invalid("ari needs at least two samples"));
    }
    let index: f64 = c.table.iter().flatten().map(|&v| comb2(v)).sum();
    let a: f64 = c.row_sums().into_iter().map(comb2).sum();
    let b: f64 = c.col_sums().into_iter().map(comb2).sum();
    let total = comb2(c.n);
    let expected = a * b / total;
    let max_index = 0.5 * (a + b);
    let denom = max_index - expected;
    if denom == 0.0 {
        return Ok(1.0);
    }
    Ok((index - expected) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn contingency_margins() {
        let c = Contingency::new(&[0, 0, 1, 1, 1], &[5, 2, 2, 2, 9]).unwrap();
        assert_eq!(c.row_sums(), vec![2, 3]);
        assert_eq!(c.col_sums(), vec![3, 1, 1]);
        assert_eq!(c.n(), 5);
    }

    #[test]
    fn acc_permutation_and_example() {
        assert_eq!(clustering_accuracy(&[0, 0, 1, 1, 2], &[2, 2, 0, 0, 1]).unwrap(), 1.0);
        assert_eq!(clustering_accuracy(&[0, 0, 1, 1], &[1, 1, 0, 2]).unwrap(), 0.75);
    }

    #[test]
    fn acc_errors() {
        assert!(clustering_accuracy(&[], &[]).is_err());
        assert!(matches!(clustering_accuracy(&[0, 1], &[0]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn nmi_conventions() {
        assert!((nmi(&[0, 0, 1, 1], &[1, 1, 0, 0]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(nmi(&[0, 0, 1, 1], &[3, 3, 3, 3]).unwrap(), 0.0);
    }

    #[test]
    fn nmi_hand_computed_contingency() {
        // contingency [[2,0],[1,1]] on n = 4
        let t = [0, 0, 1, 1];
        let p = [0, 0, 0, 1];
        let ln = f64::ln;
        let h_t = ln(2.0);
        let h_p = -(0.75 * ln(0.75) + 0.25 * ln(0.25));
        let mi = 0.5 * ln(0.5 / (0.5 * 0.75)) + 0.25 * ln(0.25 / (0.5 * 0.75)) + 0.25 * ln(0.25 / (0.5 * 0.25));
        let expected = mi / ((h_t + h_p) / 2.0);
        assert!((nmi(&t, &p).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn ari_identical_and_errors() {
        assert_eq!(ari(&[0, 0, 1, 2], &[4, 4, 1, 0]).unwrap(), 1.0);
        assert!(ari(&[0], &[0]).is_err());
        assert!(ari(&[0, 1], &[0]).is_err());
    }

    #[test]
    fn ari_near_zero_for_independent_partitions() {
        let mut rng = crate::rng::rng_from_seed(3);
        let a: Vec<usize> = (0..2000).map(|_| rand::Rng::random_range(&mut rng, 0..4)).collect();
        let b: Vec<usize> = (0..2000).map(|_| rand::Rng::random_range(&mut rng, 0..3)).collect();
        assert!(ari(&a, &b).unwrap().abs() < 0.05);
    }
}
