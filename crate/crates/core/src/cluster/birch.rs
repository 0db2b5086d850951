use super::agglomerative::{agglomerate, cut, Condensed, Linkage};
use crate::points::{sq_euclidean, Points};

/// Clustering feature: count, linear sum and squared-norm sum.
#[derive(Clone, Debug)]
struct Cf {
    n: f64,
    ls: Vec<f64>,
    ss: f64,
}

impl Cf {
    fn point(x: &[f64]) -> Self {
        Cf {
            n: 1.0,
            ls: x.to_vec(),
            ss: x.iter().map(|v| v * v).sum(),
        }
    }

    fn add(&mut self, o: &Cf) {
        self.n += o.n;
        self.ls.iter_mut().zip(&o.ls).for_each(|(a, b)| *a += b);
        self.ss += o.ss;
    }

    fn merged(&self, o: &Cf) -> Cf {
        let mut c = self.clone();
        c.add(o);
        c
    }

    fn centroid(&self) -> Vec<f64> {
        self.ls.iter().map(|v| v / self.n).collect()
    }

    fn radius(&self) -> f64 {
        let c2: f64 = self.ls.iter().map(|v| (v / self.n).powi(2)).sum();
        (self.ss / self.n - c2).max(0.0).sqrt()
    }
}

enum Node {
    Leaf(Vec<Cf>),
    Inner(Vec<(Cf, Box<Node>)>),
}

fn closest<'a>(cfs: impl Iterator<Item = &'a Cf>, x: &[f64]) -> usize {
    let mut best = (0, f64::INFINITY);
    for (i, cf) in cfs.enumerate() {
        let d = sq_euclidean(&cf.centroid(), x);
        if d < best.1 {
            best = (i, d);
        }
    }
    best.0
}

/// Splits entries around the farthest pair of centroids.
fn split_by_seeds<T>(entries: Vec<T>, cf_of: impl Fn(&T) -> &Cf) -> (Vec<T>, Vec<T>) {
    let cents: Vec<Vec<f64>> = entries.iter().map(|e| cf_of(e).centroid()).collect();
    let (mut s1, mut s2, mut far) = (0, 1, -1.0);
    for i in 0..cents.len() {
        for j in (i + 1)..cents.len() {
            let d = sq_euclidean(&cents[i], &cents[j]);
            if d > far {
                far = d;
                s1 = i;
                s2 = j;
            }
        }
    }
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (i, e) in entries.into_iter().enumerate() {
        let to_a = i == s1 || (i != s2 && sq_euclidean(&cents[i], &cents[s1]) <= sq_euclidean(&cents[i], &cents[s2]));
        if to_a {
            a.push(e);
        } else {
            b.push(e);
        }
    }
    (a, b)
}

fn summary(node: &Node) -> Cf {
    let mut it: Box<dyn Iterator<Item = &Cf>> = match node {
        Node::Leaf(es) => Box::new(es.iter()),
        Node::Inner(es) => Box::new(es.iter().map(|(cf, _)| cf)),
    };
    let mut acc = it.next().expect("non-empty node").clone();
    for cf in it {
        acc.add(cf);
    }
    acc
}

struct CfTree {
    root: Node,
    threshold: f64,
    branching: usize,
}

impl CfTree {
    fn insert(&mut self, x: &[f64]) {
        let root = std::mem::replace(&mut self.root, Node::Leaf(Vec::new()));
        self.root = match self.insert_into(root, Cf::point(x)) {
            (node, None) => node,
            (a, Some(b)) => Node::Inner(vec![(summary(&a), Box::new(a)), (summary(&b), Box::new(b))]),
        };
    }

    fn insert_into(&self, node: Node, p: Cf) -> (Node, Option<Node>) {
        match node {
            Node::Leaf(mut es) => {
                if es.is_empty() {
                    es.push(p);
                    return (Node::Leaf(es), None);
                }
                let i = closest(es.iter(), &p.ls);
                let merged = es[i].merged(&p);
                if merged.radius() <= self.threshold {
                    es[i] = merged;
                } else {
                    es.push(p);
                }
                if es.len() > self.branching {
                    let (a, b) = split_by_seeds(es, |c| c);
                    (Node::Leaf(a), Some(Node::Leaf(b)))
                } else {
                    (Node::Leaf(es), None)
                }
            }
            Node::Inner(mut es) => {
                let i = closest(es.iter().map(|(cf, _)| cf), &p.ls);
                let (cf, child) = es.remove(i);
                let (a, b) = self.insert_into(*child, p.clone());
                match b {
                    None => {
                        let mut cf = cf;
                        cf.add(&p);
                        es.insert(i, (cf, Box::new(a)));
                    }
                    Some(b) => {
                        es.insert(i, (summary(&b), Box::new(b)));
                        es.insert(i, (summary(&a), Box::new(a)));
                    }
                }
                if es.len() > self.branching {
                    let (a, b) = split_by_seeds(es, |(cf, _)| cf);
                    (Node::Inner(a), Some(Node::Inner(b)))
                } else {
                    (Node::Inner(es), None)
                }
            }
        }
    }

    fn leaves(&self) -> Vec<Cf> {
        fn walk(node: &Node, out: &mut Vec<Cf>) {
            match node {
                Node::Leaf(es) => out.extend(es.iter().cloned()),
                Node::Inner(es) => es.iter().for_each(|(_, c)| walk(c, out)),
            }
        }
        let mut out = Vec::new();
        walk(&self.root, &mut out);
        out
    }
}

/// CF-tree summarization followed by Ward agglomeration of the leaf
/// subclusters down to `k`; samples take the label of their nearest
/// subcluster centroid.
pub(crate) fn birch(pts: &Points, threshold: f64, branching: usize, k: usize) -> Vec<usize> {
    let mut tree = CfTree {
        root: Node::Leaf(Vec::new()),
        threshold,
        branching: branching.max(2),
    };
    for i in 0..pts.n() {
        tree.insert(pts.row(i));
    }
    let subs = tree.leaves();
    let cents: Vec<Vec<f64>> = subs.iter().map(Cf::centroid).collect();
    let sizes: Vec<f64> = subs.iter().map(|c| c.n).collect();
    let s = subs.len();
    let sub_labels = if s <= k {
        (0..s).collect()
    } else {
        let d = Condensed::from_fn(s, |i, j| {
            2.0 * sizes[i] * sizes[j] / (sizes[i] + sizes[j]) * sq_euclidean(&cents[i], &cents[j])
        });
        cut(s, &agglomerate(d, &sizes, Linkage::Ward), k)
    };
    (0..pts.n()).map(|i| sub_labels[closest(subs.iter(), pts.row(i))]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_blobs() {
        let d = crate::data::blobs("b", &[vec![0.0, 0.0], vec![10.0, 0.0], vec![0.0, 10.0]], &[60, 60, 60], 0.5, 2).unwrap();
        let pts = Points::from_matrix(d.x());
        let labels = birch(&pts, 0.5, 5, 3);
        let acc = crate::metrics::clustering_accuracy(d.labels().unwrap(), &labels).unwrap();
        assert_eq!(acc, 1.0);
    }

    #[test]
    fn tree_conserves_mass() {
        let rows: Vec<Vec<f64>> = (0..500).map(|i| vec![(i % 37) as f64, (i % 11) as f64 * 0.5]).collect();
        let pts = Points::from_rows(&rows);
        let mut tree = CfTree {
            root: Node::Leaf(Vec::new()),
            threshold: 0.7,
            branching: 4,
        };
        for i in 0..pts.n() {
            tree.insert(pts.row(i));
        }
        let leaves = tree.leaves();
        assert_eq!(leaves.iter().map(|c| c.n).sum::<f64>(), 500.0);
        assert!(leaves.iter().all(|c| c.radius() <= 0.7 + 1e-9 || c.n == 1.0));
        assert_eq!(summary(&tree.root).n, 500.0);
    }
}
