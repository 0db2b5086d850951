use nalgebra::DMatrix;

/// Row-major copy of a sample matrix so each sample is a contiguous slice.
#[derive(Clone, Debug)]
pub(crate) struct Points {
    data: Vec<f64>,
    n: usize,
    m: usize,
}

impl Points {
    pub fn from_matrix(x: &DMatrix<f64>) -> Self {
        let (n, m) = x.shape();
        let mut data = Vec::with_capacity(n * m);
        for i in 0..n {
            for j in 0..m {
                data.push(x[(i, j)]);
            }
        }
        Points { data, n, m }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * m);
        for r in rows {
            data.extend_from_slice(r);
        }
        Points { data, n, m }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }

    pub fn select(&self, idx: &[usize]) -> Points {
        let mut data = Vec::with_capacity(idx.len() * self.m);
        for &i in idx {
            data.extend_from_slice(self.row(i));
        }
        Points {
            data,
            n: idx.len(),
            m: self.m,
        }
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.m, &self.data)
    }
}

#[inline]
pub(crate) fn sq_euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

#[inline]
pub(crate) fn manhattan(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    a.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Relabels arbitrary ids to `0..C` preserving the numeric order of ids.
pub(crate) fn compact_labels(labels: &[usize]) -> Vec<usize> {
    let mut ids: Vec<usize> = labels.to_vec();
    ids.sort_unstable();
    ids.dedup();
    labels.iter().map(|l| ids.binary_search(l).expect("id present")).collect()
}
