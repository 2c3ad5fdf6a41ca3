//! Dense square matrices, in linear and log domain.

#[derive(Clone, Debug, PartialEq)]
pub(crate) struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_row_major(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n);
        Matrix { n, data }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn pow(&self, k: usize) -> Matrix {
        let mut result = Matrix::identity(self.n);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Induced sup-norm: the largest row sum of absolute values.
    #[cfg(test)]
    pub fn sup_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|a| a.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_log(&self) -> LogMatrix {
        LogMatrix {
            n: self.n,
            data: self.data.iter().map(|&a| a.ln()).collect(),
        }
    }
}

/// Entry-wise logarithm of a nonnegative matrix; zeros are `-∞`.
#[derive(Clone, Debug, PartialEq)]
pub(crate) struct LogMatrix {
    n: usize,
    data: Vec<f64>,
}

impl LogMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        self.get(i, j) > f64::NEG_INFINITY
    }

    /// Adds `shift[j]` to every entry of column `j`.
    pub fn shift_columns(&self, shift: &[f64]) -> LogMatrix {
        let n = self.n;
        let mut data = self.data.clone();
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] += shift[j];
            }
        }
        LogMatrix { n, data }
    }

    /// The principal submatrix on `idx`, in that order.
    pub fn submatrix(&self, idx: &[usize]) -> LogMatrix {
        let m = idx.len();
        let mut data = Vec::with_capacity(m * m);
        for &i in idx {
            for &j in idx {
                data.push(self.get(i, j));
            }
        }
        LogMatrix { n: m, data }
    }

    pub fn max_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `ln (M v)` given `ln v`, by log-sum-exp per row.
    pub fn log_mul_vec(&self, log_v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| log_sum_exp((0..self.n).map(|j| self.get(i, j) + log_v[j])))
            .collect()
    }
}

pub(crate) fn log_sum_exp(terms: impl Iterator<Item = f64> + Clone) -> f64 {
    let top = terms.clone().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    top + terms.map(|t| (t - top).exp()).sum::<f64>().ln()
}
