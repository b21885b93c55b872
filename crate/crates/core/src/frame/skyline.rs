//! Symmetric matrices in skyline (variable-band) storage and an in-place
//! Cholesky factorization over the same profile.
//!
//! Column `j` stores rows `first_row[j] ..= j` of the upper triangle.

use super::FrameError;

/// Relative pivot below which the reduced stiffness is treated as singular.
const PIVOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SkylineMatrix {
    first_row: Vec<usize>,
    offsets: Vec<usize>,
    data: Vec<f64>,
}

impl SkylineMatrix {
    pub fn from_profile(first_row: Vec<usize>) -> Self {
        let mut offsets = Vec::with_capacity(first_row.len() + 1);
        let mut total = 0;
        for (j, &f) in first_row.iter().enumerate() {
            debug_assert!(f <= j);
            offsets.push(total);
            total += j - f + 1;
        }
        offsets.push(total);
        Self { first_row, offsets, data: vec![0.0; total] }
    }

    pub fn dim(&self) -> usize {
        self.first_row.len()
    }

    pub fn stored_len(&self) -> usize {
        self.data.len()
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (r, c) = if i <= j { (i, j) } else { (j, i) };
        (r >= self.first_row[c]).then(|| self.offsets[c] + r - self.first_row[c])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.slot(i, j).map_or(0.0, |s| self.data[s])
    }

    /// Adds to the symmetric pair `(i, j)`/`(j, i)`; the entry must lie in the
    /// profile.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.slot(i, j).expect("entry outside skyline profile");
        self.data[s] += v;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut y = vec![0.0; n];
        for j in 0..n {
            let f = self.first_row[j];
            let col = &self.data[self.offsets[j]..self.offsets[j + 1]];
            for (k, &a) in col.iter().enumerate() {
                let i = f + k;
                y[i] += a * x[j];
                if i != j {
                    y[j] += a * x[i];
                }
            }
        }
        y
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        (0..n).map(|i| (0..n).map(|j| self.get(i, j)).collect()).collect()
    }

    /// Principal submatrix on `keep` (ascending indices), with the profile
    /// tightened to the kept rows.
    pub fn submatrix(&self, keep: &[usize]) -> Self {
        let mut new_index = vec![usize::MAX; self.dim()];
        for (k, &i) in keep.iter().enumerate() {
            new_index[i] = k;
        }
        let first_row: Vec<usize> = keep
            .iter()
            .enumerate()
            .map(|(k, &j)| {
                (self.first_row[j]..=j)
                    .find(|&i| new_index[i] != usize::MAX)
                    .map_or(k, |i| new_index[i])
            })
            .collect();
        let mut out = Self::from_profile(first_row);
        for (kc, &j) in keep.iter().enumerate() {
            for i in self.first_row[j]..=j {
                let kr = new_index[i];
                if kr != usize::MAX {
                    let s = out.slot(kr, kc).expect("row inside tightened profile");
                    out.data[s] = self.data[self.offsets[j] + i - self.first_row[j]];
                }
            }
        }
        out
    }

    /// `A = Uᵀ U` with `U` upper triangular on the same profile.
    pub fn cholesky(mut self) -> Result<CholeskyFactor, FrameError> {
        let n = self.dim();
        for j in 0..n {
            let fj = self.first_row[j];
            let oj = self.offsets[j];
            for i in fj..j {
                let fi = self.first_row[i];
                let oi = self.offsets[i];
                let start = fi.max(fj);
                let mut s = self.data[oj + i - fj];
                for k in start..i {
                    s -= self.data[oi + k - fi] * self.data[oj + k - fj];
                }
                self.data[oj + i - fj] = s / self.data[oi + i - fi];
            }
            let diag = self.data[oj + j - fj];
            let mut s = diag;
            for k in fj..j {
                let u = self.data[oj + k - fj];
                s -= u * u;
            }
            if !(s > PIVOT_TOL * diag.abs()) || !s.is_finite() {
                return Err(FrameError::Mechanism { dof: j });
            }
            self.data[oj + j - fj] = s.sqrt();
        }
        Ok(CholeskyFactor { upper: self })
    }
}

#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    upper: SkylineMatrix,
}

impl CholeskyFactor {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let u = &self.upper;
        let n = u.dim();
        let mut x = b.to_vec();
        // Uᵀ y = b
        for j in 0..n {
            let f = u.first_row[j];
            let o = u.offsets[j];
            let mut s = x[j];
            for k in f..j {
                s -= u.data[o + k - f] * x[k];
            }
            x[j] = s / u.data[o + j - f];
        }
        // U x = y, column sweep
        for j in (0..n).rev() {
            let f = u.first_row[j];
            let o = u.offsets[j];
            x[j] /= u.data[o + j - f];
            let xj = x[j];
            for k in f..j {
                x[k] -= u.data[o + k - f] * xj;
            }
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiagonal(n: usize) -> SkylineMatrix {
        let mut m = SkylineMatrix::from_profile((0..n).map(|j| j.saturating_sub(1)).collect());
        for i in 0..n {
            m.add(i, i, 2.0);
            if i + 1 < n {
                m.add(i, i + 1, -1.0);
            }
        }
        m
    }

    #[test]
    fn solves_tridiagonal_system() {
        let m = tridiagonal(6);
        let x_true: Vec<f64> = (0..6).map(|i| (i as f64).sin() + 1.0).collect();
        let b = m.mul_vec(&x_true);
        let x = m.clone().cholesky().unwrap().solve(&b);
        for (a, e) in x.iter().zip(&x_true) {
            assert!((a - e).abs() < 1e-12);
        }
    }

    #[test]
    fn submatrix_keeps_entries() {
        let m = tridiagonal(5);
        let s = m.submatrix(&[0, 2, 3]);
        assert_eq!(s.get(0, 1), 0.0);
        assert_eq!(s.get(1, 2), -1.0);
        assert_eq!(s.get(2, 2), 2.0);
    }

    #[test]
    fn singular_matrix_reports_mechanism() {
        let mut m = SkylineMatrix::from_profile(vec![0, 0]);
        m.add(0, 0, 1.0);
        m.add(0, 1, -1.0);
        m.add(1, 1, 1.0);
        assert!(matches!(m.cholesky(), Err(FrameError::Mechanism { dof: 1 })));
    }
}
