//! Dense linear algebra over a prime field.

use std::fmt;

use serde::Serialize;

use crate::rips::inv_mod;

/// Dense matrix over `F_p`, row-major.
#[derive(Clone, PartialEq, Eq, Serialize)]
pub struct FpMatrix {
    p: u32,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl fmt::Debug for FpMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F{}[{}x{}]", self.p, self.rows, self.cols)?;
        f.debug_list().entries((0..self.rows).map(|r| self.row(r))).finish()
    }
}

impl FpMatrix {
    pub fn zeros(p: u32, rows: usize, cols: usize) -> Self {
        FpMatrix { p, rows, cols, data: vec![0; rows * cols] }
    }

    pub fn identity(p: u32, n: usize) -> Self {
        let mut m = FpMatrix::zeros(p, n, n);
        for i in 0..n {
            m.set(i, i, 1);
        }
        m
    }

    /// Builds a matrix from rows; entries are reduced mod `p`.
    pub fn from_rows(p: u32, rows: usize, cols: usize, entries: &[Vec<i64>]) -> Self {
        assert_eq!(entries.len(), rows, "row count");
        let mut m = FpMatrix::zeros(p, rows, cols);
        for (r, row) in entries.iter().enumerate() {
            assert_eq!(row.len(), cols, "column count");
            for (c, &x) in row.iter().enumerate() {
                m.set(r, c, x.rem_euclid(p as i64) as u32);
            }
        }
        m
    }

    /// Builds a matrix whose columns are the given vectors of length `rows`.
    pub fn from_columns(p: u32, rows: usize, columns: &[Vec<u32>]) -> Self {
        let mut m = FpMatrix::zeros(p, rows, columns.len());
        for (c, col) in columns.iter().enumerate() {
            for (r, &x) in col.iter().enumerate() {
                m.set(r, c, x % p);
            }
        }
        m
    }

    pub fn field(&self) -> u32 {
        self.p
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u32 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u32) {
        self.data[r * self.cols + c] = v % self.p;
    }

    pub fn row(&self, r: usize) -> &[u32] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<u32> {
        (0..self.rows).map(|r| self.get(r, c)).collect()
    }

    pub fn entries(&self) -> &[u32] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&x| x == 0)
    }

    pub fn mul(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let p = self.p as u64;
        let mut out = FpMatrix::zeros(self.p, self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k) as u64;
                if a == 0 {
                    continue;
                }
                for c in 0..other.cols {
                    let idx = r * other.cols + c;
                    out.data[idx] = ((out.data[idx] as u64 + a * other.get(k, c) as u64) % p) as u32;
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[u32]) -> Vec<u32> {
        assert_eq!(self.cols, v.len(), "dimension mismatch");
        let p = self.p as u64;
        (0..self.rows)
            .map(|r| (self.row(r).iter().zip(v).map(|(&a, &b)| a as u64 * b as u64).sum::<u64>() % p) as u32)
            .collect()
    }

    pub fn hstack(&self, other: &FpMatrix) -> FpMatrix {
        assert_eq!(self.rows, other.rows, "row mismatch");
        let mut out = FpMatrix::zeros(self.p, self.rows, self.cols + other.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, self.get(r, c));
            }
            for c in 0..other.cols {
                out.set(r, self.cols + c, other.get(r, c));
            }
        }
        out
    }

    pub fn negated(&self) -> FpMatrix {
        let mut out = self.clone();
        for x in out.data.iter_mut() {
            *x = (self.p - *x) % self.p;
        }
        out
    }

    /// Keeps the listed columns, in order.
    pub fn select_columns(&self, cols: &[usize]) -> FpMatrix {
        let columns: Vec<Vec<u32>> = cols.iter().map(|&c| self.column(c)).collect();
        FpMatrix::from_columns(self.p, self.rows, &columns)
    }

    /// Reduced row echelon form and its pivot columns.
    fn rref(&self) -> (FpMatrix, Vec<usize>) {
        let p = self.p as u64;
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..m.cols {
            if row == m.rows {
                break;
            }
            let Some(pr) = (row..m.rows).find(|&r| m.get(r, col) != 0) else {
                continue;
            };
            if pr != row {
                for c in 0..m.cols {
                    m.data.swap(pr * m.cols + c, row * m.cols + c);
                }
            }
            let inv = inv_mod(m.get(row, col) as u64, p);
            for c in 0..m.cols {
                let idx = row * m.cols + c;
                m.data[idx] = (m.data[idx] as u64 * inv % p) as u32;
            }
            for r in 0..m.rows {
                let factor = m.get(r, col) as u64;
                if r == row || factor == 0 {
                    continue;
                }
                for c in 0..m.cols {
                    let sub = factor * m.get(row, c) as u64 % p;
                    let idx = r * m.cols + c;
                    m.data[idx] = ((m.data[idx] as u64 + p - sub) % p) as u32;
                }
            }
            pivots.push(col);
            row += 1;
        }
        (m, pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    pub fn is_injective(&self) -> bool {
        self.rank() == self.cols
    }

    /// Basis of the column space, taken from the pivot columns.
    pub fn image(&self) -> FpMatrix {
        let (_, pivots) = self.rref();
        self.select_columns(&pivots)
    }

    /// Basis of the null space, one column per free variable.
    pub fn kernel(&self) -> FpMatrix {
        let p = self.p;
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &f in &free {
            let mut v = vec![0u32; self.cols];
            v[f] = 1;
            for (i, &pc) in pivots.iter().enumerate() {
                v[pc] = (p - r.get(i, f)) % p;
            }
            basis.push(v);
        }
        FpMatrix::from_columns(p, self.cols, &basis)
    }
}

/// Intersection of the column spans of `u` and `w`, as a basis matrix.
pub fn intersection(u: &FpMatrix, w: &FpMatrix) -> FpMatrix {
    assert_eq!(u.rows(), w.rows(), "ambient mismatch");
    if u.cols() == 0 || w.cols() == 0 {
        return FpMatrix::zeros(u.field(), u.rows(), 0);
    }
    let k = u.hstack(&w.negated()).kernel();
    let coeffs: Vec<Vec<u32>> = (0..k.cols()).map(|c| k.column(c)[..u.cols()].to_vec()).collect();
    let x = FpMatrix::from_columns(u.field(), u.cols(), &coeffs);
    u.mul(&x).image()
}

/// Sum of the column spans of `u` and `w`, as a basis matrix.
pub fn sum(u: &FpMatrix, w: &FpMatrix) -> FpMatrix {
    u.hstack(w).image()
}

/// Whether `v` lies in the column span of `u`.
pub fn contains(u: &FpMatrix, v: &[u32]) -> bool {
    let with = u.hstack(&FpMatrix::from_columns(u.field(), u.rows(), &[v.to_vec()]));
    with.rank() == u.rank()
}

/// Whether the column spans agree.
pub fn same_span(u: &FpMatrix, w: &FpMatrix) -> bool {
    let r = u.rank();
    r == w.rank() && sum(u, w).cols() == r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_kernel_image() {
        let m = FpMatrix::from_rows(3, 2, 3, &[vec![1, 2, 0], vec![2, 1, 0]]);
        // second row = 2 * first over F_3
        assert_eq!(m.rank(), 1);
        let k = m.kernel();
        assert_eq!(k.cols(), 2);
        assert!(m.mul(&k).is_zero());
        assert_eq!(m.image().cols(), 1);
        let m2 = FpMatrix::from_rows(2, 2, 2, &[vec![1, 1], vec![1, 1]]);
        assert_eq!(m2.rank(), 1);
    }

    #[test]
    fn intersection_and_sum() {
        let e = |v: Vec<i64>| FpMatrix::from_rows(5, 3, 1, &v.into_iter().map(|x| vec![x]).collect::<Vec<_>>());
        let xy = sum(&e(vec![1, 0, 0]), &e(vec![0, 1, 0]));
        let yz = sum(&e(vec![0, 1, 0]), &e(vec![0, 0, 1]));
        assert_eq!(xy.cols(), 2);
        let both = intersection(&xy, &yz);
        assert_eq!(both.cols(), 1);
        assert!(contains(&both, &[0, 3, 0]));
        assert!(!contains(&both, &[1, 0, 0]));
        assert!(same_span(&sum(&xy, &yz), &FpMatrix::identity(5, 3)));
    }
}
