//! Dense matrices over a [`Field`].
//!
//! Basis convention used throughout the crate: a bilinear form on an
//! `m`-dimensional and an `n`-dimensional space is stored as a length `m*n`
//! vector in row-major order, entry `(i, j)` at index `i * n + j`. The same
//! index layout is used for tensor-product carriers, so `kron(x, y)` is the
//! coordinate vector of `x ⊗ y`.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::scalar::Field;

pub type Vector<F> = Vec<F>;

#[derive(Clone, PartialEq)]
pub struct Matrix<F> {
    rows: usize,
    cols: usize,
    data: Vec<F>,
}

impl<F: Field> fmt::Debug for Matrix<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl<F> Index<(usize, usize)> for Matrix<F> {
    type Output = F;
    fn index(&self, (r, c): (usize, usize)) -> &F {
        &self.data[r * self.cols + c]
    }
}

impl<F> IndexMut<(usize, usize)> for Matrix<F> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut F {
        &mut self.data[r * self.cols + c]
    }
}

impl<F: Field> Matrix<F> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![F::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = F::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<F>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<F>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c, "ragged rows");
            data.extend(row.iter().cloned());
        }
        Matrix { rows: r, cols: c, data }
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_cols(cols: &[Vec<F>]) -> Self {
        Self::from_rows(cols).transpose()
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn diagonal(d: &[F]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, x) in d.iter().enumerate() {
            m[(i, i)] = x.clone();
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[F] {
        &self.data
    }

    pub fn into_data(self) -> Vec<F> {
        self.data
    }

    pub fn row(&self, r: usize) -> &[F] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn col(&self, c: usize) -> Vec<F> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<F>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].clone())
    }

    pub fn mul(&self, other: &Matrix<F>) -> Matrix<F> {
        assert_eq!(self.cols, other.rows, "matrix product shape");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        let p = a.clone() * b;
                        out[(i, j)] += &p;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[F]) -> Vector<F> {
        assert_eq!(self.cols, v.len(), "matrix-vector shape");
        (0..self.rows).map(|r| dot(self.row(r), v)).collect()
    }

    pub fn scale(&self, s: &F) -> Matrix<F> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.clone() * s).collect(),
        }
    }

    pub fn add(&self, other: &Matrix<F>) -> Matrix<F> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.clone() + b.clone()).collect(),
        }
    }

    pub fn sub(&self, other: &Matrix<F>) -> Matrix<F> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a.clone() - b.clone()).collect(),
        }
    }

    pub fn kron(&self, other: &Matrix<F>) -> Matrix<F> {
        let (r2, c2) = (other.rows, other.cols);
        Self::from_fn(self.rows * r2, self.cols * c2, |r, c| {
            self[(r / r2, c / c2)].clone() * &other[(r % r2, c % c2)]
        })
    }

    /// Max-abs entry, as f64.
    pub fn max_abs(&self) -> f64 {
        crate::scalar::max_abs(&self.data)
    }

    pub fn max_abs_diff(&self, other: &Matrix<F>) -> f64 {
        self.sub(other).max_abs()
    }

    /// Exact (or tolerance) zero test of every entry.
    pub fn is_zero_matrix(&self) -> bool {
        self.data.iter().all(Field::near_zero)
    }

    pub fn approx_eq(&self, other: &Matrix<F>) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.sub(other).is_zero_matrix()
    }

    pub fn is_identity(&self) -> bool {
        self.is_square() && self.approx_eq(&Self::identity(self.rows))
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && self.approx_eq(&self.transpose())
    }

    pub fn map<G: Field>(&self, f: impl Fn(&F) -> G) -> Matrix<G> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    pub fn rank(&self) -> usize {
        Echelon::new(self.clone()).rank
    }

    /// Basis of the right null space `{x : M x = 0}`.
    pub fn nullspace(&self) -> Vec<Vector<F>> {
        Echelon::new(self.clone()).nullspace()
    }

    pub fn inverse(&self) -> Option<Matrix<F>> {
        if !self.is_square() {
            return None;
        }
        let n = self.rows;
        let mut aug = Self::zeros(n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                aug[(r, c)] = self[(r, c)].clone();
            }
            aug[(r, n + r)] = F::one();
        }
        let e = Echelon::new(aug);
        if e.pivots.len() < n || e.pivots.iter().enumerate().any(|(i, &p)| p != i) {
            return None;
        }
        Some(Self::from_fn(n, n, |r, c| e.m[(r, n + c)].clone()))
    }

    /// Solves `M x = b`; returns one solution if consistent.
    pub fn solve(&self, b: &[F]) -> Option<Vector<F>> {
        assert_eq!(b.len(), self.rows);
        let n = self.cols;
        let mut aug = Self::zeros(self.rows, n + 1);
        for r in 0..self.rows {
            for c in 0..n {
                aug[(r, c)] = self[(r, c)].clone();
            }
            aug[(r, n)] = b[r].clone();
        }
        let e = Echelon::new(aug);
        if e.pivots.contains(&n) {
            return None;
        }
        let mut x = vec![F::zero(); n];
        for (i, &p) in e.pivots.iter().enumerate() {
            x[p] = e.m[(i, n)].clone();
        }
        Some(x)
    }
}

/// Reduced row echelon form.
struct Echelon<F> {
    m: Matrix<F>,
    pivots: Vec<usize>,
    rank: usize,
}

impl<F: Field> Echelon<F> {
    fn new(mut m: Matrix<F>) -> Self {
        let (rows, cols) = (m.rows, m.cols);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            // largest magnitude pivot; for rationals any nonzero would do
            let mut best = None;
            let mut best_abs = 0.0;
            for i in r..rows {
                if !m[(i, c)].near_zero() {
                    let a = m[(i, c)].to_f64().abs();
                    if best.is_none() || a > best_abs {
                        best = Some(i);
                        best_abs = a;
                    }
                }
            }
            let Some(p) = best else {
                for i in r..rows {
                    m[(i, c)] = F::zero();
                }
                continue;
            };
            if p != r {
                for k in 0..cols {
                    m.data.swap(p * cols + k, r * cols + k);
                }
            }
            let inv = F::one() / m[(r, c)].clone();
            for k in c..cols {
                let v = m[(r, k)].clone() * &inv;
                m[(r, k)] = v;
            }
            for i in 0..rows {
                if i == r || m[(i, c)].is_zero() {
                    continue;
                }
                let factor = m[(i, c)].clone();
                for k in c..cols {
                    if m[(r, k)].is_zero() {
                        continue;
                    }
                    let d = factor.clone() * &m[(r, k)];
                    m[(i, k)] -= &d;
                }
                m[(i, c)] = F::zero();
            }
            pivots.push(c);
            r += 1;
        }
        let rank = pivots.len();
        Echelon { m, pivots, rank }
    }

    fn nullspace(&self) -> Vec<Vector<F>> {
        let cols = self.m.cols;
        let free: Vec<usize> = (0..cols).filter(|c| !self.pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut x = vec![F::zero(); cols];
                x[f] = F::one();
                for (i, &p) in self.pivots.iter().enumerate() {
                    x[p] = -self.m[(i, f)].clone();
                }
                x
            })
            .collect()
    }
}

pub fn dot<F: Field>(a: &[F], b: &[F]) -> F {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = F::zero();
    for (x, y) in a.iter().zip(b) {
        if !x.is_zero() && !y.is_zero() {
            let p = x.clone() * y;
            acc += &p;
        }
    }
    acc
}

pub fn kron_vec<F: Field>(a: &[F], b: &[F]) -> Vector<F> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x.clone() * y);
        }
    }
    out
}

pub fn add_vec<F: Field>(a: &[F], b: &[F]) -> Vector<F> {
    a.iter().zip(b).map(|(x, y)| x.clone() + y.clone()).collect()
}

pub fn sub_vec<F: Field>(a: &[F], b: &[F]) -> Vector<F> {
    a.iter().zip(b).map(|(x, y)| x.clone() - y.clone()).collect()
}

pub fn scale_vec<F: Field>(a: &[F], s: &F) -> Vector<F> {
    a.iter().map(|x| x.clone() * s).collect()
}

pub fn is_zero_vec<F: Field>(a: &[F]) -> bool {
    a.iter().all(Field::near_zero)
}

pub fn vec_max_abs_diff<F: Field>(a: &[F], b: &[F]) -> f64 {
    crate::scalar::max_abs(&sub_vec(a, b))
}

pub fn unit_vec<F: Field>(n: usize, i: usize) -> Vector<F> {
    let mut v = vec![F::zero(); n];
    v[i] = F::one();
    v
}

pub fn rank_of<F: Field>(vectors: &[Vector<F>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    Matrix::from_rows(vectors).rank()
}

/// True if `a = t * b` for some `t > 0`.
pub fn positively_parallel<F: Field>(a: &[F], b: &[F]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let Some(i) = b.iter().position(|x| !x.near_zero()) else {
        return is_zero_vec(a);
    };
    if !(a[i].is_pos() == b[i].is_pos()) || a[i].near_zero() {
        return false;
    }
    let t = a[i].clone() / b[i].clone();
    a.iter().zip(b).all(|(x, y)| (x.clone() - t.clone() * y).near_zero())
}

/// Scales a nonzero vector so that its first nonzero entry has absolute value 1.
pub fn canonical_ray<F: Field>(v: &[F]) -> Vector<F> {
    match v.iter().find(|x| !x.near_zero()) {
        Some(p) => {
            let s = F::one() / p.abs();
            scale_vec(v, &s)
        }
        None => v.to_vec(),
    }
}

/// Reshapes a row-major coordinate vector to a `rows x cols` matrix.
pub fn reshape<F: Field>(v: &[F], rows: usize, cols: usize) -> Matrix<F> {
    Matrix::from_vec(rows, cols, v.to_vec())
}

/// Incremental row-echelon basis; picks independent rows.
#[derive(Clone)]
pub(crate) struct IncrementalBasis<F> {
    rows: Vec<(usize, Vector<F>)>,
}

impl<F: Field> IncrementalBasis<F> {
    pub fn new() -> Self {
        IncrementalBasis { rows: Vec::new() }
    }

    /// Reduces `v` against the basis; returns the reduced row and its pivot if independent.
    pub fn reduce(&self, v: &[F]) -> Option<(usize, Vector<F>)> {
        let mut w = v.to_vec();
        for (p, row) in &self.rows {
            if w[*p].is_zero() {
                continue;
            }
            let f = w[*p].clone();
            for (x, y) in w.iter_mut().zip(row) {
                if !y.is_zero() {
                    let d = f.clone() * y;
                    *x -= &d;
                }
            }
        }
        let p = w.iter().position(|x| !x.near_zero())?;
        let inv = F::one() / w[p].clone();
        for x in w.iter_mut() {
            if !x.is_zero() {
                *x = x.clone() * &inv;
            }
        }
        Some((p, w))
    }

    pub fn push(&mut self, reduced: (usize, Vector<F>)) {
        self.rows.push(reduced);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qi, Q};

    fn m(rows: &[&[i64]]) -> Matrix<Q> {
        Matrix::from_rows(&rows.iter().map(|r| r.iter().map(|&x| qi(x)).collect()).collect::<Vec<_>>())
    }

    #[test]
    fn inverse_and_rank() {
        let a = m(&[&[2, 1], &[1, 1]]);
        let inv = a.inverse().unwrap();
        assert!(a.mul(&inv).is_identity());
        assert_eq!(m(&[&[1, 2], &[2, 4]]).rank(), 1);
        assert!(m(&[&[1, 2], &[2, 4]]).inverse().is_none());
    }

    #[test]
    fn nullspace_is_orthogonal() {
        let a = m(&[&[1, 1, 0], &[0, 1, 1]]);
        let ns = a.nullspace();
        assert_eq!(ns.len(), 1);
        assert!(is_zero_vec(&a.mul_vec(&ns[0])));
    }

    #[test]
    fn kron_matches_vector_kron() {
        let a = m(&[&[1, 2], &[3, 4]]);
        let b = m(&[&[0, 1], &[1, 0]]);
        let x = vec![qi(1), q(1, 2)];
        let y = vec![qi(3), qi(-1)];
        let lhs = a.kron(&b).mul_vec(&kron_vec(&x, &y));
        let rhs = kron_vec(&a.mul_vec(&x), &b.mul_vec(&y));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let a = m(&[&[1, 1], &[2, 2]]);
        assert!(a.solve(&[qi(1), qi(3)]).is_none());
        let x = a.solve(&[qi(1), qi(2)]).unwrap();
        assert_eq!(a.mul_vec(&x), vec![qi(1), qi(2)]);
    }

    #[test]
    fn parallel_rays() {
        assert!(positively_parallel(&[qi(2), qi(4)], &[qi(1), qi(2)]));
        assert!(!positively_parallel(&[qi(-2), qi(-4)], &[qi(1), qi(2)]));
        assert!(!positively_parallel(&[qi(2), qi(3)], &[qi(1), qi(2)]));
    }
}
