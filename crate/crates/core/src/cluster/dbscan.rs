use std::collections::VecDeque;

use super::distance::Distance;

const UNSET: usize = usize::MAX;

/// Density clustering. A sample is core when at least `min_samples` samples
/// (itself included) lie within `eps`. Clusters are grown from cores in scan
/// order, so a border sample joins the first cluster that reaches it. Noise
/// samples all share the label after the last cluster.
pub(crate) fn dbscan(dist: &Distance<'_>, n: usize, eps: f64, min_samples: usize) -> Vec<usize> {
    let region = |i: usize| -> Vec<usize> { (0..n).filter(|&j| dist.between(i, j) <= eps).collect() };
    let core: Vec<bool> = (0..n).map(|i| region(i).len() >= min_samples).collect();
    let mut labels = vec![UNSET; n];
    let mut clusters = 0;
    let mut queue = VecDeque::new();
    for i in 0..n {
        if labels[i] != UNSET || !core[i] {
            continue;
        }
        let c = clusters;
        clusters += 1;
        labels[i] = c;
        queue.push_back(i);
        while let Some(p) = queue.pop_front() {
            for q in region(p) {
                if labels[q] != UNSET {
                    continue;
                }
                labels[q] = c;
                if core[q] {
                    queue.push_back(q);
                }
            }
        }
    }
    for l in &mut labels {
        if *l == UNSET {
            *l = clusters;
        }
    }
    labels
}
