//! Conditioning maps, marginals, conditional states and remote evaluation.
//!
//! A bilinear form `ω` on `A ⊗ B` is stored as its coordinate vector; its
//! matrix `W = reshape(ω, n_A, n_B)` satisfies `ω(a, b) = aᵀ W b`. Then
//! `ω̂ = Wᵀ : A♯ → B` and `ω̂* = W : B♯ → A`. For a form `f` on `A ⊗ B`,
//! `f̂ = Fᵀ : A → B♯`.

use serde::Serialize;

use crate::com::Com;
use crate::composite::swap_matrix;
use crate::error::{check_dim, ComError, Result};
use crate::linalg::{dot, kron_vec, reshape, vec_max_abs_diff, Matrix, Vector};
use crate::scalar::Field;

/// A bilinear form on `left ⊗ right` (state or effect-multiple).
#[derive(Clone, Debug, PartialEq)]
pub struct Bipartite<F> {
    pub coords: Vector<F>,
    pub left: usize,
    pub right: usize,
}

impl<F: Field> Bipartite<F> {
    pub fn new(coords: Vector<F>, left: usize, right: usize) -> Result<Self> {
        check_dim(left * right, coords.len())?;
        Ok(Bipartite { coords, left, right })
    }

    pub fn from_matrix(m: &Matrix<F>) -> Self {
        Bipartite { coords: m.data().to_vec(), left: m.rows(), right: m.cols() }
    }

    pub fn product(x: &[F], y: &[F]) -> Self {
        Bipartite { coords: kron_vec(x, y), left: x.len(), right: y.len() }
    }

    /// `W` with `ω(a, b) = aᵀ W b`.
    pub fn matrix(&self) -> Matrix<F> {
        reshape(&self.coords, self.left, self.right)
    }

    pub fn eval(&self, a: &[F], b: &[F]) -> F {
        dot(&self.coords, &kron_vec(a, b))
    }

    /// The same form with its arguments exchanged.
    pub fn swap(&self) -> Self {
        Bipartite {
            coords: swap_matrix(self.left, self.right).mul_vec(&self.coords),
            left: self.right,
            right: self.left,
        }
    }

    pub fn scale(&self, s: &F) -> Self {
        Bipartite { coords: self.coords.iter().map(|x| x.clone() * s).collect(), left: self.left, right: self.right }
    }
}

const STREAM_COND: u64 = 0x50;

/// Fails unless `ω(a, b) >= 0` on every pair of effect generators.
pub fn check_nonsignaling<F: Field>(omega: &Bipartite<F>, a: &Com<F>, b: &Com<F>) -> Result<()> {
    check_dim(a.dim(), omega.left)?;
    check_dim(b.dim(), omega.right)?;
    let ea = a.effect_cone().probe_rays(STREAM_COND);
    let eb = b.effect_cone().probe_rays(STREAM_COND + 1);
    let w = omega.matrix();
    for (i, x) in ea.iter().enumerate() {
        let wx = w.transpose().mul_vec(x);
        for (j, y) in eb.iter().enumerate() {
            let v = dot(&wx, y);
            if v.is_neg() {
                return Err(ComError::NotNonsignalingState(format!(
                    "value {v} on effect generators #{i} of {} and #{j} of {}",
                    a.label(),
                    b.label()
                )));
            }
        }
    }
    Ok(())
}

/// `ω̂ : A♯ → B` as an `n_B x n_A` matrix, after checking positivity.
pub fn conditioning_map<F: Field>(omega: &Bipartite<F>, a: &Com<F>, b: &Com<F>) -> Result<Matrix<F>> {
    check_nonsignaling(omega, a, b)?;
    Ok(omega.matrix().transpose())
}

/// `ω̂*: B♯ → A`.
pub fn co_conditioning_map<F: Field>(omega: &Bipartite<F>) -> Matrix<F> {
    omega.matrix()
}

/// `f̂ : A → B♯` for a form `f` on `A ⊗ B`.
pub fn effect_conditioning_map<F: Field>(f: &Bipartite<F>) -> Matrix<F> {
    f.matrix().transpose()
}

/// `(ω_A, ω_B) = (ω̂*(u_B), ω̂(u_A))`.
pub fn marginals<F: Field>(omega: &Bipartite<F>, a: &Com<F>, b: &Com<F>) -> Result<(Vector<F>, Vector<F>)> {
    check_nonsignaling(omega, a, b)?;
    let w = omega.matrix();
    Ok((w.mul_vec(b.unit()), w.transpose().mul_vec(a.unit())))
}

/// `ω_{A|b} = ω̂*(b) / ω_B(b)`.
pub fn conditional_state<F: Field>(omega: &Bipartite<F>, b_effect: &[F], a: &Com<F>, b: &Com<F>) -> Result<Vector<F>> {
    check_nonsignaling(omega, a, b)?;
    check_dim(b.dim(), b_effect.len())?;
    let unnorm = omega.matrix().mul_vec(b_effect);
    let p = dot(a.unit(), &unnorm);
    if !p.is_pos() {
        return Err(ComError::ZeroProbabilityCondition);
    }
    let inv = F::one() / p;
    Ok(unnorm.into_iter().map(|x| x * &inv).collect())
}

/// Both sides of a remote-evaluation identity.
#[derive(Clone, Debug, Serialize)]
pub struct RemoteEval<F> {
    /// Composite of conditioning maps (right-hand side).
    #[serde(skip)]
    pub result: Vector<F>,
    /// Direct contraction of the joint form (left-hand side).
    #[serde(skip)]
    pub direct: Vector<F>,
    pub residual: f64,
}

fn compare<F: Field>(result: Vector<F>, direct: Vector<F>) -> Result<RemoteEval<F>> {
    let residual = vec_max_abs_diff(&result, &direct);
    let agree = if F::EXACT { result == direct } else { residual <= crate::settings::tolerance() };
    if !agree {
        return Err(ComError::RemoteEvalMismatch(residual));
    }
    Ok(RemoteEval { result, direct, residual })
}

/// For `f` on `A ⊗ B`, `ω` on `B ⊗ C`, `α ∈ A`: returns `ω̂(f̂(α))` after
/// checking it against `(f ⊗ id_C)(α ⊗ ω)` contracted directly.
pub fn remote_evaluate<F: Field>(f: &Bipartite<F>, omega: &Bipartite<F>, alpha: &[F]) -> Result<RemoteEval<F>> {
    check_dim(f.right, omega.left)?;
    check_dim(f.left, alpha.len())?;
    let (na, nb, nc) = (f.left, f.right, omega.right);
    let rhs = omega.matrix().transpose().mul_vec(&effect_conditioning_map(f).mul_vec(alpha));
    // α ⊗ ω has index i*(nb*nc) + j*nc + k
    let joint = kron_vec(alpha, &omega.coords);
    let mut lhs = vec![F::zero(); nc];
    for i in 0..na {
        for j in 0..nb {
            let fij = &f.coords[i * nb + j];
            if fij.is_zero() {
                continue;
            }
            for (k, out) in lhs.iter_mut().enumerate() {
                *out += &(fij.clone() * &joint[i * nb * nc + j * nc + k]);
            }
        }
    }
    compare(rhs, lhs)
}

/// For `ω` on `A ⊗ B`, `f` on `B ⊗ C`, `γ ∈ C`: returns `ω̂*(f̂*(γ))` after
/// checking it against `(id_A ⊗ f)(ω ⊗ γ)` contracted directly.
pub fn remote_evaluate_dual<F: Field>(f: &Bipartite<F>, omega: &Bipartite<F>, gamma: &[F]) -> Result<RemoteEval<F>> {
    check_dim(omega.right, f.left)?;
    check_dim(f.right, gamma.len())?;
    let (na, nb, nc) = (omega.left, omega.right, f.right);
    let rhs = co_conditioning_map(omega).mul_vec(&f.matrix().mul_vec(gamma));
    // ω ⊗ γ has index (i*nb + j)*nc + k
    let joint = kron_vec(&omega.coords, gamma);
    let mut lhs = vec![F::zero(); na];
    for (i, out) in lhs.iter_mut().enumerate() {
        for j in 0..nb {
            for k in 0..nc {
                let fjk = &f.coords[j * nc + k];
                if !fjk.is_zero() {
                    *out += &(fjk.clone() * &joint[(i * nb + j) * nc + k]);
                }
            }
        }
    }
    compare(rhs, lhs)
}
