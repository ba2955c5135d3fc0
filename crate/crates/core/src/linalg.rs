//! Dense matrices over the rationals with exact Gaussian elimination.
//!
//! Matrices act on column vectors; `Matrix { rows, cols }` represents a map
//! from a `cols`-dimensional space to a `rows`-dimensional one. Everything
//! here is exact, so rank, kernel and quotient computations are decidable.

use num_rational::BigRational;
use num_traits::{One, Zero};

#[derive(Clone, PartialEq, Eq)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    data: Vec<BigRational>,
}

impl std::fmt::Debug for Matrix {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| self.get(r, c).to_string()).collect();
            writeln!(f, "  {}", row.join(" "))?;
        }
        write!(f, "]")
    }
}

impl Matrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![BigRational::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, BigRational::one());
        }
        m
    }

    pub fn get(&self, r: usize, c: usize) -> &BigRational {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigRational) {
        self.data[r * self.cols + c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = Matrix::zero(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    let v = out.get(r, c) + a * b;
                    out.set(r, c, v);
                }
            }
        }
        out
    }

    pub fn add(&self, other: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let mut out = self.clone();
        for i in 0..self.data.len() {
            out.data[i] = &out.data[i] + &other.data[i];
        }
        out
    }

    pub fn scale(&self, s: &BigRational) -> Matrix {
        let mut out = self.clone();
        for v in &mut out.data {
            *v = &*v * s;
        }
        out
    }

    pub fn sub(&self, other: &Matrix) -> Matrix {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn apply(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| {
                (0..self.cols)
                    .map(|c| self.get(r, c) * &v[c])
                    .fold(BigRational::zero(), |a, b| a + b)
            })
            .collect()
    }

    pub fn column(&self, c: usize) -> Vec<BigRational> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn from_columns(rows: usize, cols: &[Vec<BigRational>]) -> Matrix {
        let mut m = Matrix::zero(rows, cols.len());
        for (c, col) in cols.iter().enumerate() {
            assert_eq!(col.len(), rows);
            for (r, v) in col.iter().enumerate() {
                m.set(r, c, v.clone());
            }
        }
        m
    }

    /// Reduced row echelon form together with the pivot columns.
    pub fn rref(&self) -> (Matrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut row = 0usize;
        for col in 0..m.cols {
            if row >= m.rows {
                break;
            }
            let pivot_row = (row..m.rows).find(|&r| !m.get(r, col).is_zero());
            let pr = match pivot_row {
                Some(pr) => pr,
                None => continue,
            };
            for c in 0..m.cols {
                let tmp = m.get(row, c).clone();
                let v = m.get(pr, c).clone();
                m.set(row, c, v);
                m.set(pr, c, tmp);
            }
            let inv = m.get(row, col).clone();
            for c in 0..m.cols {
                let v = m.get(row, c) / &inv;
                m.set(row, c, v);
            }
            for r in 0..m.rows {
                if r != row && !m.get(r, col).is_zero() {
                    let f = m.get(r, col).clone();
                    for c in 0..m.cols {
                        let v = m.get(r, c) - &f * m.get(row, c);
                        m.set(r, c, v);
                    }
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

    /// A basis of the kernel.
    pub fn kernel_basis(&self) -> Vec<Vec<BigRational>> {
        let (r, pivots) = self.rref();
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivot_set.contains(c)).collect();
        let mut basis = Vec::with_capacity(free.len());
        for &f in &free {
            let mut v = vec![BigRational::zero(); self.cols];
            v[f] = BigRational::one();
            for (prow, &pcol) in pivots.iter().enumerate() {
                v[pcol] = -r.get(prow, f).clone();
            }
            basis.push(v);
        }
        basis
    }
}

/// A quotient `V / W` of a coordinate space by the span of some vectors,
/// presented by the projection onto the non-pivot coordinates.
pub struct Quotient {
    pub ambient_dim: usize,
    /// Projection matrix of shape `quot_dim x ambient_dim`.
    pub projection: Matrix,
    /// A section of the projection, shape `ambient_dim x quot_dim`.
    pub section: Matrix,
}

impl Quotient {
    /// Quotient of the `dim`-dimensional coordinate space by the span of
    /// `relations`.
    pub fn new(dim: usize, relations: &[Vec<BigRational>]) -> Quotient {
        let mut m = Matrix::zero(relations.len(), dim);
        for (r, rel) in relations.iter().enumerate() {
            assert_eq!(rel.len(), dim);
            for (c, v) in rel.iter().enumerate() {
                m.set(r, c, v.clone());
            }
        }
        let (rref, pivots) = m.rref();
        let pivot_set: std::collections::BTreeSet<usize> = pivots.iter().copied().collect();
        let free: Vec<usize> = (0..dim).filter(|c| !pivot_set.contains(c)).collect();
        // e_f maps to e_f for free f; a pivot column maps to minus the rest
        // of its row expressed on the free coordinates.
        let mut projection = Matrix::zero(free.len(), dim);
        for (q, &f) in free.iter().enumerate() {
            projection.set(q, f, BigRational::one());
        }
        for (prow, &pcol) in pivots.iter().enumerate() {
            for (q, &f) in free.iter().enumerate() {
                let v = -rref.get(prow, f).clone();
                projection.set(q, pcol, v);
            }
        }
        let mut section = Matrix::zero(dim, free.len());
        for (q, &f) in free.iter().enumerate() {
            section.set(f, q, BigRational::one());
        }
        Quotient {
            ambient_dim: dim,
            projection,
            section,
        }
    }

    pub fn dim(&self) -> usize {
        self.projection.rows
    }

    /// Push a map of ambient spaces down to the quotients. The caller
    /// asserts that the map sends relations to relations; downstream tests
    /// verify this through the cosimplicial-identity validator.
    pub fn induced_map(&self, target: &Quotient, ambient: &Matrix) -> Matrix {
        assert_eq!(ambient.cols, self.ambient_dim);
        assert_eq!(ambient.rows, target.ambient_dim);
        target.projection.mul(&ambient.mul(&self.section))
    }
}
