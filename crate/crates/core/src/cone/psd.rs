//! Hermitian coordinatization and spectral membership.
//!
//! The standard basis of `Herm(d)` is, in order: the diagonal units `E_kk`;
//! for `j < k`, `(E_jk + E_kj)/√2`; for `j < k`, `i(E_jk - E_kj)/√2`. It is
//! orthonormal for the trace pairing, so the trace pairing is the dot product
//! of coordinates and the PSD cone is self-dual in these coordinates.
//! Tensor-product bases (`B_i ⊗ B_j`, row-major) are orthonormal as well.

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::Vector;
use crate::scalar::Field;

pub type CMatrix = DMatrix<Complex64>;

/// An orthonormal real basis of `Herm(d)`.
#[derive(Clone, Debug)]
pub struct HermitianBasis {
    hilbert_dim: usize,
    /// `None` for the standard basis, otherwise the factor dimensions of a
    /// tensor-product basis.
    factors: Option<Vec<usize>>,
    elements: Vec<CMatrix>,
}

impl PartialEq for HermitianBasis {
    fn eq(&self, other: &Self) -> bool {
        self.hilbert_dim == other.hilbert_dim && self.factor_dims() == other.factor_dims()
    }
}

impl HermitianBasis {
    pub fn standard(d: usize) -> Arc<Self> {
        assert!(d >= 1, "hilbert dimension must be positive");
        let c = |re: f64, im: f64| Complex64::new(re, im);
        let mut elements = Vec::with_capacity(d * d);
        for k in 0..d {
            let mut m = CMatrix::zeros(d, d);
            m[(k, k)] = c(1.0, 0.0);
            elements.push(m);
        }
        for j in 0..d {
            for k in j + 1..d {
                let mut m = CMatrix::zeros(d, d);
                m[(j, k)] = c(FRAC_1_SQRT_2, 0.0);
                m[(k, j)] = c(FRAC_1_SQRT_2, 0.0);
                elements.push(m);
            }
        }
        for j in 0..d {
            for k in j + 1..d {
                let mut m = CMatrix::zeros(d, d);
                m[(j, k)] = c(0.0, FRAC_1_SQRT_2);
                m[(k, j)] = c(0.0, -FRAC_1_SQRT_2);
                elements.push(m);
            }
        }
        Arc::new(HermitianBasis { hilbert_dim: d, factors: None, elements })
    }

    /// Basis `{A_i ⊗ B_j}` indexed `i * dim(B) + j`.
    pub fn tensor(a: &HermitianBasis, b: &HermitianBasis) -> Arc<Self> {
        let mut elements = Vec::with_capacity(a.len() * b.len());
        for x in &a.elements {
            for y in &b.elements {
                elements.push(x.kronecker(y));
            }
        }
        let factors = [a.factor_dims(), b.factor_dims()].concat();
        Arc::new(HermitianBasis {
            hilbert_dim: a.hilbert_dim * b.hilbert_dim,
            factors: Some(factors),
            elements,
        })
    }

    pub fn from_factor_dims(dims: &[usize]) -> Arc<Self> {
        let mut it = dims.iter();
        let first = HermitianBasis::standard(*it.next().expect("at least one factor"));
        it.fold(first, |acc, &d| HermitianBasis::tensor(&acc, &HermitianBasis::standard(d)))
    }

    pub fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn is_standard(&self) -> bool {
        self.factors.is_none()
    }

    pub fn factor_dims(&self) -> Vec<usize> {
        self.factors.clone().unwrap_or_else(|| vec![self.hilbert_dim])
    }

    pub fn element(&self, i: usize) -> &CMatrix {
        &self.elements[i]
    }

    pub fn to_matrix<F: Field>(&self, coords: &[F]) -> CMatrix {
        assert_eq!(coords.len(), self.len(), "hermitian coordinate length");
        let mut m = CMatrix::zeros(self.hilbert_dim, self.hilbert_dim);
        for (x, b) in coords.iter().zip(&self.elements) {
            let x = x.to_f64();
            if x != 0.0 {
                m += b * Complex64::new(x, 0.0);
            }
        }
        m
    }

    /// Coordinates `tr(B_i M)` of a Hermitian matrix.
    pub fn coords<F: Field>(&self, m: &CMatrix) -> Vector<F> {
        self.elements.iter().map(|b| F::from_float(trace_product(b, m).re)).collect()
    }

    /// Coordinates of the identity (also the trace functional).
    pub fn identity_coords<F: Field>(&self) -> Vector<F> {
        self.coords(&CMatrix::identity(self.hilbert_dim, self.hilbert_dim))
    }

    /// Coordinates of `|ψ⟩⟨ψ|`.
    pub fn projector_coords<F: Field>(&self, psi: &[Complex64]) -> Vector<F> {
        self.coords(&projector(psi))
    }

    /// Coordinate matrix of transposition `M ↦ Mᵀ`.
    pub fn transpose_map(&self) -> DMatrix<f64> {
        let n = self.len();
        DMatrix::from_fn(n, n, |r, c| trace_product(&self.elements[r], &self.elements[c].transpose()).re)
    }
}

pub fn trace_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn projector(psi: &[Complex64]) -> CMatrix {
    let d = psi.len();
    CMatrix::from_fn(d, d, |r, c| psi[r] * psi[c].conj())
}

/// Eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let h = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

pub fn max_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).last().copied().unwrap_or(0.0)
}

/// Unitarily invariant random unit vector (normalized complex Gaussian).
pub fn random_unit_vector(d: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..d)
        .map(|_| Complex64::new(gaussian(rng), gaussian(rng)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|z| *z /= norm);
    v
}

/// Random density matrix of full rank.
pub fn random_density(d: usize, rng: &mut impl Rng) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| Complex64::new(gaussian(rng), gaussian(rng)));
    let m = &g * g.adjoint();
    let t = m.trace();
    m / t
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    rng.sample(StandardNormal)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_basis_is_orthonormal() {
        let b = HermitianBasis::standard(3);
        assert_eq!(b.len(), 9);
        for i in 0..9 {
            for j in 0..9 {
                let ip = trace_product(b.element(i), b.element(j));
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((ip.re - want).abs() < 1e-12 && ip.im.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coords_round_trip() {
        let b = HermitianBasis::standard(2);
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(0.7, 0.0), Complex64::new(0.1, -0.2), Complex64::new(0.1, 0.2), Complex64::new(0.3, 0.0)],
        );
        let x: Vec<f64> = b.coords(&m);
        assert!((b.to_matrix(&x) - m).norm() < 1e-12);
    }

    #[test]
    fn eigenvalues_of_indefinite_matrix() {
        // [[1,2],[2,1]] has eigenvalues 3 and -1
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0)],
        );
        let ev = hermitian_eigenvalues(&m);
        assert!((ev[0] + 1.0).abs() < 1e-12 && (ev[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn transpose_map_is_diagonal_sign_flip() {
        let t = HermitianBasis::standard(2).transpose_map();
        let want = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 1.0, 1.0, -1.0]));
        assert!((t - want).abs().max() < 1e-12);
    }
}
