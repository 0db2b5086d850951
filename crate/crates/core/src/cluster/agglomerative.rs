use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Linkage {
    Single,
    Complete,
    Average,
    /// Minimum variance; dissimilarities must be squared Euclidean
    /// distances scaled as `2 n_a n_b / (n_a + n_b) * ||c_a - c_b||^2`.
    Ward,
}

impl std::str::FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "single" => Ok(Linkage::Single),
            "complete" => Ok(Linkage::Complete),
            "average" => Ok(Linkage::Average),
            "ward" => Ok(Linkage::Ward),
            other => Err(Error::InvalidConfig(format!("unknown linkage {other:?}"))),
        }
    }
}

/// One dendrogram step joining the clusters that contain items `a` and `b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Merge {
    pub a: usize,
    pub b: usize,
    pub height: f64,
}

/// Packed upper-triangular dissimilarities.
pub struct Condensed {
    n: usize,
    d: Vec<f64>,
}

impl Condensed {
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut d = Vec::with_capacity(n * n.saturating_sub(1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                d.push(f(i, j));
            }
        }
        Condensed { n, d }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[self.idx(i, j)]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.d[k] = v;
    }
}

/// Hierarchical agglomeration by the nearest-neighbor chain algorithm with
/// Lance-Williams updates. `sizes` weights each item (all 1 for raw samples).
pub fn agglomerate(mut d: Condensed, sizes: &[f64], linkage: Linkage) -> Vec<Merge> {
    let n = d.n;
    let mut size = sizes.to_vec();
    let mut active = vec![true; n];
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    let mut chain: Vec<usize> = Vec::new();
    let mut remaining = n;
    while remaining > 1 {
        if chain.is_empty() {
            chain.push(active.iter().position(|&a| a).expect("an active item"));
        }
        let (a, b) = loop {
            let a = *chain.last().expect("non-empty chain");
            let prev = chain.len().checked_sub(2).map(|p| chain[p]);
            let (mut best, mut best_d) = match prev {
                Some(p) => (p, d.get(a, p)),
                None => (usize::MAX, f64::INFINITY),
            };
            for c in 0..n {
                if c == a || !active[c] {
                    continue;
                }
                let dc = d.get(a, c);
                if dc < best_d || best == usize::MAX {
                    best = c;
                    best_d = dc;
                }
            }
            if Some(best) == prev {
                chain.pop();
                chain.pop();
                break (a, best);
            }
            chain.push(best);
        };
        let (keep, gone) = if a < b { (a, b) } else { (b, a) };
        let dab = d.get(a, b);
        merges.push(Merge {
            a: keep,
            b: gone,
            height: dab,
        });
        let (sa, sb) = (size[keep], size[gone]);
        for c in 0..n {
            if !active[c] || c == keep || c == gone {
                continue;
            }
            let (dac, dbc) = (d.get(keep, c), d.get(gone, c));
            let v = match linkage {
                Linkage::Single => dac.min(dbc),
                Linkage::Complete => dac.max(dbc),
                Linkage::Average => (sa * dac + sb * dbc) / (sa + sb),
                Linkage::Ward => {
                    let sc = size[c];
                    ((sa + sc) * dac + (sb + sc) * dbc - sc * dab) / (sa + sb + sc)
                }
            };
            d.set(keep, c, v);
        }
        active[gone] = false;
        size[keep] = sa + sb;
        remaining -= 1;
    }
    merges
}

/// Flat labels with `k` clusters from a merge list, applying the
/// `n - k` lowest merges (stable in discovery order on equal heights).
pub fn cut(n: usize, merges: &[Merge], k: usize) -> Vec<usize> {
    let mut order: Vec<&Merge> = merges.iter().collect();
    order.sort_by(|x, y| x.height.total_cmp(&y.height));
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for m in order.into_iter().take(n.saturating_sub(k)) {
        let (ra, rb) = (find(&mut parent, m.a), find(&mut parent, m.b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
    crate::points::compact_labels(&roots)
}
