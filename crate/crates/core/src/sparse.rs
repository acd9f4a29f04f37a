//! Compressed sparse row storage and a triplet assembler.

#[derive(Debug, Clone, Default)]
pub struct TripletBuilder {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl TripletBuilder {
    pub fn new(rows: usize, cols: usize) -> Self {
        TripletBuilder {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(rows: usize, cols: usize, cap: usize) -> Self {
        TripletBuilder {
            rows,
            cols,
            entries: Vec::with_capacity(cap),
        }
    }

    #[inline]
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        debug_assert!(r < self.rows && c < self.cols);
        if v != 0.0 {
            self.entries.push((r, c, v));
        }
    }

    /// Adds `weight · a aᵀ` for a sparse vector `a`.
    pub fn add_outer(&mut self, weight: f64, a: &[(usize, f64)]) {
        for &(r, vr) in a {
            for &(c, vc) in a {
                self.add(r, c, weight * vr * vc);
            }
        }
    }

    pub fn build(mut self) -> CsrMatrix {
        self.entries
            .sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut indptr = vec![0usize; self.rows + 1];
        let mut indices = Vec::with_capacity(self.entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..self.rows {
            indptr[r + 1] += indptr[r];
        }
        CsrMatrix {
            rows: self.rows,
            cols: self.cols,
            indptr,
            indices,
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.row(r).find(|&(k, _)| k == c).map_or(0.0, |(_, v)| v)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows).map(|r| self.get(r, r)).collect()
    }

    pub fn mul_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (r, out) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            *out = acc;
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        self.mul_into(x, &mut y);
        y
    }

    /// `y = Aᵀ x`.
    pub fn mul_transpose(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.cols];
        for (r, &xr) in x.iter().enumerate() {
            if xr == 0.0 {
                continue;
            }
            for k in self.indptr[r]..self.indptr[r + 1] {
                y[self.indices[k]] += self.values[k] * xr;
            }
        }
        y
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut b = TripletBuilder::with_capacity(self.cols, self.rows, self.nnz());
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                b.add(c, r, v);
            }
        }
        b.build()
    }

    /// `Σ_r A_rc` for every column.
    pub fn column_sums(&self) -> Vec<f64> {
        self.mul_transpose(&vec![1.0; self.rows])
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.rows * self.cols];
        for r in 0..self.rows {
            for (c, v) in self.row(r) {
                out[r * self.cols + c] += v;
            }
        }
        out
    }

    /// `x·(A x)`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        self.mul(x).iter().zip(x).map(|(a, b)| a * b).sum()
    }

    pub fn scaled(&self, s: f64) -> CsrMatrix {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// Sparse product `A B`.
    pub fn matmul(&self, other: &CsrMatrix) -> CsrMatrix {
        assert_eq!(self.cols, other.rows);
        let mut t = TripletBuilder::new(self.rows, other.cols);
        for r in 0..self.rows {
            for (k, v) in self.row(r) {
                for (c, w) in other.row(k) {
                    t.add(r, c, v * w);
                }
            }
        }
        t.build()
    }

    /// Entrywise linear combination `α A + β B` of equally shaped matrices.
    pub fn combine(alpha: f64, a: &CsrMatrix, beta: f64, b: &CsrMatrix) -> CsrMatrix {
        assert_eq!((a.rows, a.cols), (b.rows, b.cols));
        let mut t = TripletBuilder::with_capacity(a.rows, a.cols, a.nnz() + b.nnz());
        for r in 0..a.rows {
            for (c, v) in a.row(r) {
                t.add(r, c, alpha * v);
            }
            for (c, v) in b.row(r) {
                t.add(r, c, beta * v);
            }
        }
        t.build()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_are_summed() {
        let mut b = TripletBuilder::new(2, 3);
        b.add(0, 1, 1.0);
        b.add(0, 1, 2.5);
        b.add(1, 0, -1.0);
        b.add(1, 2, 4.0);
        let a = b.build();
        assert_eq!(a.get(0, 1), 3.5);
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.mul(&[1.0, 1.0, 1.0]), vec![3.5, 3.0]);
        assert_eq!(a.mul_transpose(&[1.0, 2.0]), vec![-2.0, 3.5, 8.0]);
        assert_eq!(a.transpose().get(2, 1), 4.0);
        let p = a.matmul(&a.transpose());
        assert_eq!(p.get(0, 0), 12.25);
        assert_eq!(p.get(1, 1), 17.0);
        assert_eq!(a.scaled(2.0).get(1, 2), 8.0);
    }

    #[test]
    fn outer_product_is_symmetric() {
        let mut b = TripletBuilder::new(3, 3);
        b.add_outer(2.0, &[(0, 1.0), (2, -1.0)]);
        let a = b.build();
        assert_eq!(a.get(0, 2), -2.0);
        assert_eq!(a.get(2, 0), -2.0);
        assert_eq!(a.quadratic_form(&[1.0, 5.0, 1.0]), 0.0);
    }
}
