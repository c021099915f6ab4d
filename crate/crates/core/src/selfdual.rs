//! Weak and symmetric self-duality, the canonical adjoint and its square.
//!
//! A structure `(γ, f)` on `A` has matrices `G`, `F` with `γ̂ = Gᵀ : A♯ → A`
//! and `f̂ = Fᵀ : A → A♯`. The defining condition `f̂ = γ̂⁻¹` reads `F = G⁻¹`,
//! and `τ = γ̂ ∘ f̂* = Gᵀ F`.

use serde::Serialize;

use crate::com::{Com, LinearMap};
use crate::conditioning::Bipartite;
use crate::cone::Cone;
use crate::error::{check_dim, ComError, Result};
use crate::linalg::{Matrix, Vector};
use crate::matching::{find_ray_matching, MatchOptions};
use crate::protocols::CompactStructure;
use crate::scalar::Field;

#[derive(Clone, Debug, PartialEq)]
pub struct DualityStructure<F> {
    pub label: String,
    /// Bipartite state on `A ⊗ A` (may be unnormalized).
    pub gamma: Bipartite<F>,
    /// Positive bilinear functional on `A ⊗ A`.
    pub f: Bipartite<F>,
}

impl<F: Field> DualityStructure<F> {
    pub fn from_matrices(label: impl Into<String>, g: &Matrix<F>, f: &Matrix<F>) -> Self {
        DualityStructure { label: label.into(), gamma: Bipartite::from_matrix(g), f: Bipartite::from_matrix(f) }
    }

    /// Builds `(γ, f)` from `f̂ = Φ`, rescaled so that `γ(u, u) = 1`.
    pub fn from_effect_map(label: impl Into<String>, phi: &Matrix<F>, unit: &[F]) -> Result<Self> {
        let phi_inv = phi.inverse().ok_or(ComError::InvalidStructure(f64::INFINITY))?;
        let g = phi_inv.transpose();
        let norm = crate::linalg::dot(unit, &g.mul_vec(unit));
        if !norm.is_pos() {
            return Err(ComError::InvalidStructure(norm.to_f64()));
        }
        let inv = F::one() / norm.clone();
        Ok(Self::from_matrices(label, &g.scale(&inv), &phi.transpose().scale(&norm)))
    }

    pub fn dim(&self) -> usize {
        self.gamma.left
    }

    pub fn g(&self) -> Matrix<F> {
        self.gamma.matrix()
    }

    pub fn f_matrix(&self) -> Matrix<F> {
        self.f.matrix()
    }

    pub fn gamma_hat(&self) -> Matrix<F> {
        self.g().transpose()
    }

    pub fn f_hat(&self) -> Matrix<F> {
        self.f_matrix().transpose()
    }

    /// `τ = γ̂ ∘ f̂*`.
    pub fn tau(&self) -> Matrix<F> {
        self.g().transpose().mul(&self.f_matrix())
    }

    /// The compact structure with `A′ = A`, `η = γ`, `ε = f`.
    pub fn compact_structure(&self) -> CompactStructure<F> {
        CompactStructure { eta: self.gamma.clone(), epsilon: self.f.clone() }
    }
}

fn tol<F: Field>() -> f64 {
    if F::EXACT {
        0.0
    } else {
        crate::settings::tolerance()
    }
}

const STREAM_SELFDUAL: u64 = 0x70;

/// Checks that `m` maps every probe ray of `from` into `to`; returns the
/// indices that fail.
fn maps_into<F: Field>(m: &Matrix<F>, from: &Cone<F>, to: &Cone<F>, stream: u64) -> Result<Vec<usize>> {
    let mut bad = Vec::new();
    for (i, g) in from.probe_rays(stream).iter().enumerate() {
        if !to.member(&m.mul_vec(g))? {
            bad.push(i);
        }
    }
    Ok(bad)
}

#[derive(Clone, Debug, Serialize)]
pub struct IsomorphismReport {
    pub passed: bool,
    pub rank: usize,
    pub violations: Vec<String>,
}

/// `γ̂` invertible with `γ̂(A♯₊) = A₊`, checked in both directions.
pub fn verify_isomorphism_state<F: Field>(gamma: &Bipartite<F>, a: &Com<F>) -> Result<IsomorphismReport> {
    check_dim(a.dim(), gamma.left)?;
    check_dim(a.dim(), gamma.right)?;
    let hat = gamma.matrix().transpose();
    let rank = hat.rank();
    let mut violations = Vec::new();
    // swapping then conditioning is the transposed conditioning map
    if !gamma.swap().matrix().transpose().approx_eq(&gamma.matrix()) {
        violations.push("swap does not transpose the conditioning map".to_string());
    }
    for i in maps_into(&hat, a.effect_cone(), a.state_cone(), STREAM_SELFDUAL)? {
        violations.push(format!("γ̂ maps effect generator #{i} outside the state cone"));
    }
    match hat.inverse() {
        None => violations.push(format!("γ̂ has rank {rank} < {}", a.dim())),
        Some(inv) => {
            for i in maps_into(&inv, a.state_cone(), a.effect_cone(), STREAM_SELFDUAL + 1)? {
                violations.push(format!("γ̂⁻¹ maps state generator #{i} outside the effect cone"));
            }
        }
    }
    Ok(IsomorphismReport { passed: violations.is_empty(), rank, violations })
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureReport {
    pub passed: bool,
    /// `max(|f̂ γ̂ − id|, |γ̂ f̂ − id|)`.
    pub inverse_residual: f64,
    pub gamma_symmetry_residual: f64,
    pub f_symmetry_residual: f64,
    pub tau_is_identity: bool,
    pub violations: Vec<String>,
}

/// Every invariant of a duality structure on `A`.
pub fn verify_structure<F: Field>(d: &DualityStructure<F>, a: &Com<F>) -> Result<StructureReport> {
    check_dim(a.dim(), d.f.left)?;
    check_dim(a.dim(), d.f.right)?;
    let iso = verify_isomorphism_state(&d.gamma, a)?;
    let mut violations = iso.violations;
    let (gh, fh) = (d.gamma_hat(), d.f_hat());
    let id = Matrix::identity(a.dim());
    let inverse_residual = fh.mul(&gh).max_abs_diff(&id).max(gh.mul(&fh).max_abs_diff(&id));
    if inverse_residual > tol::<F>() {
        violations.push(format!("f̂ is not γ̂⁻¹ (residual {inverse_residual:e})"));
    }
    let tau = d.tau();
    for i in maps_into(&tau, a.state_cone(), a.state_cone(), STREAM_SELFDUAL + 2)? {
        violations.push(format!("τ maps state generator #{i} outside the state cone"));
    }
    match tau.inverse() {
        Some(inv) => {
            for i in maps_into(&inv, a.state_cone(), a.state_cone(), STREAM_SELFDUAL + 3)? {
                violations.push(format!("τ⁻¹ maps state generator #{i} outside the state cone"));
            }
        }
        None => violations.push("τ is singular".to_string()),
    }
    let (g, f) = (d.g(), d.f_matrix());
    Ok(StructureReport {
        passed: violations.is_empty(),
        inverse_residual,
        gamma_symmetry_residual: g.max_abs_diff(&g.transpose()),
        f_symmetry_residual: f.max_abs_diff(&f.transpose()),
        tau_is_identity: tau.is_identity(),
        violations,
    })
}

fn search<F: Field>(a: &Com<F>, opts: MatchOptions, label: &str) -> Result<Option<DualityStructure<F>>> {
    let s = a.state_cone().poly("self-duality search")?;
    let e = a.effect_cone().poly("self-duality search")?;
    match find_ray_matching(s, e, None, opts, &mut |_| true) {
        Some((phi, _)) => Ok(Some(DualityStructure::from_effect_map(format!("{}-{label}", a.label()), &phi, a.unit())?)),
        None => Ok(None),
    }
}

/// Order isomorphism `A₊ ≅ A♯₊` by exhaustive ray matching.
pub fn check_weak_self_duality<F: Field>(a: &Com<F>) -> Result<Option<DualityStructure<F>>> {
    search(a, MatchOptions::default(), "weak")
}

/// As [`check_weak_self_duality`] with `f̂` constrained to be symmetric.
pub fn check_symmetric_self_duality<F: Field>(a: &Com<F>) -> Result<Option<DualityStructure<F>>> {
    search(a, MatchOptions { symmetric: true }, "symmetric")
}

/// `φ′ = γ̂_A* ∘ φ* ∘ f̂_B*` for `φ : A → B`, cross-checked against
/// `(f̂_B ∘ φ ∘ γ̂_A)*`.
pub fn canonical_adjoint<F: Field>(phi: &LinearMap<F>, da: &DualityStructure<F>, db: &DualityStructure<F>) -> Result<LinearMap<F>> {
    check_dim(da.dim(), phi.cols())?;
    check_dim(db.dim(), phi.rows())?;
    let lhs = da.gamma_hat().transpose().mul(&phi.transpose()).mul(&db.f_hat().transpose());
    let rhs = db.f_hat().mul(phi).mul(&da.gamma_hat()).transpose();
    if !lhs.approx_eq(&rhs) {
        return Err(ComError::Inconsistent(format!("canonical adjoint mismatch {:e}", lhs.max_abs_diff(&rhs))));
    }
    Ok(lhs)
}

#[derive(Clone, Debug, Serialize)]
pub struct DoubleDualReport {
    pub residual_vs_conjugation: f64,
    pub residual_vs_phi: f64,
    pub involutive: bool,
}

/// `φ″` versus `τ_B⁻¹ ∘ φ ∘ τ_A` and versus `φ`.
pub fn double_dual_check<F: Field>(phi: &LinearMap<F>, da: &DualityStructure<F>, db: &DualityStructure<F>) -> Result<DoubleDualReport> {
    let once = canonical_adjoint(phi, da, db)?;
    let twice = canonical_adjoint(&once, db, da)?;
    let tb_inv = db.tau().inverse().ok_or(ComError::InvalidStructure(f64::INFINITY))?;
    let conj = tb_inv.mul(phi).mul(&da.tau());
    Ok(DoubleDualReport {
        residual_vs_conjugation: twice.max_abs_diff(&conj),
        residual_vs_phi: twice.max_abs_diff(phi),
        involutive: twice.approx_eq(phi),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SymmetryEquivalence {
    /// `φ″ = φ` on every matrix unit.
    pub i: bool,
    /// `τ = id`.
    pub ii: bool,
    /// `γ` and `f` symmetric.
    pub iii: bool,
    pub consistent: bool,
    /// First matrix unit `E_rc` with `φ″ ≠ φ`.
    pub witness: Option<(usize, usize)>,
    pub witness_residual: f64,
}

pub fn symmetry_equivalence_report<F: Field>(d: &DualityStructure<F>) -> Result<SymmetryEquivalence> {
    let n = d.dim();
    let mut witness = None;
    let mut witness_residual = 0.0;
    'outer: for r in 0..n {
        for c in 0..n {
            let mut e = Matrix::zeros(n, n);
            e[(r, c)] = F::one();
            let rep = double_dual_check(&e, d, d)?;
            if !rep.involutive {
                witness = Some((r, c));
                witness_residual = rep.residual_vs_phi;
                break 'outer;
            }
        }
    }
    let i = witness.is_none();
    let ii = d.tau().is_identity();
    let iii = d.g().is_symmetric() && d.f_matrix().is_symmetric();
    Ok(SymmetryEquivalence { i, ii, iii, consistent: i == ii && ii == iii, witness, witness_residual })
}

#[derive(Clone, Debug, Serialize)]
pub struct CounitReport {
    pub residual: f64,
    pub holds: bool,
}

/// `f′ = σ ∘ γ`, where `f : A ⊗ A → I` is adjointed with the product
/// structure on `A ⊗ A` and the trivial structure on `I`.
pub fn counit_dual_check<F: Field>(d: &DualityStructure<F>) -> CounitReport {
    let f_adj = canonical_counit_adjoint(d);
    let swapped = d.gamma.swap().coords;
    let residual = crate::linalg::vec_max_abs_diff(&f_adj, &swapped);
    let holds = if F::EXACT { f_adj == swapped } else { residual <= crate::settings::tolerance() };
    CounitReport { residual, holds }
}

/// `ε† = (G ⊗ G) vec(F)`: the canonical adjoint of `f` viewed as a map
/// `A ⊗ A → I`, a state on `A ⊗ A`.
fn canonical_counit_adjoint<F: Field>(d: &DualityStructure<F>) -> Vector<F> {
    let g = d.g();
    g.kron(&g).mul_vec(&d.f.coords)
}

#[derive(Clone, Debug, Serialize)]
pub struct ObjectDagger {
    pub object: String,
    pub structure_valid: bool,
    pub symmetry_equivalence: SymmetryEquivalence,
    pub counit: CounitReport,
    /// `max |η − σ ∘ ε†|`.
    pub dagger_axiom_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct DaggerVerdict {
    pub dagger_compact: bool,
    pub objects: Vec<ObjectDagger>,
}

/// Dagger compact with respect to the canonical adjoint iff every object's
/// structure is symmetric; the dagger axiom `η = σ ∘ ε†` is checked too.
pub fn dagger_compactness_verdict<F: Field>(theory: &[(Com<F>, DualityStructure<F>)]) -> Result<DaggerVerdict> {
    let mut objects = Vec::new();
    let mut all = true;
    for (a, d) in theory {
        let valid = verify_structure(d, a)?.passed;
        let eqv = symmetry_equivalence_report(d)?;
        let counit = counit_dual_check(d);
        let eps_dagger = Bipartite { coords: canonical_counit_adjoint(d), left: d.dim(), right: d.dim() };
        let residual = crate::linalg::vec_max_abs_diff(&d.gamma.coords, &eps_dagger.swap().coords);
        all &= valid && eqv.consistent && eqv.iii && residual <= tol::<F>();
        objects.push(ObjectDagger {
            object: a.label().to_string(),
            structure_valid: valid,
            symmetry_equivalence: eqv,
            counit,
            dagger_axiom_residual: residual,
        });
    }
    Ok(DaggerVerdict { dagger_compact: all && !theory.is_empty(), objects })
}

/// Leading pivots of `m` without row exchanges; `None` if a zero pivot
/// appears. All pivots positive iff `m` is positive definite.
fn sylvester_pivots<F: Field>(m: &Matrix<F>) -> Option<Vec<F>> {
    let n = m.rows();
    let mut a = m.clone();
    let mut pivots = Vec::with_capacity(n);
    for k in 0..n {
        let p = a[(k, k)].clone();
        if p.near_zero() {
            return None;
        }
        for r in k + 1..n {
            let factor = a[(r, k)].clone() / p.clone();
            for c in k..n {
                let delta = factor.clone() * &a[(k, c)];
                a[(r, c)] -= &delta;
            }
        }
        pivots.push(p);
    }
    Some(pivots)
}

pub fn is_positive_definite<F: Field>(m: &Matrix<F>) -> bool {
    m.is_symmetric() && sylvester_pivots(m).is_some_and(|p| p.iter().all(Field::is_pos))
}

/// Eigenvalues of the symmetric part of `m`, ascending.
pub fn symmetric_eigenvalues<F: Field>(m: &Matrix<F>) -> Vec<f64> {
    let n = m.rows();
    let dm = nalgebra::DMatrix::from_fn(n, n, |r, c| 0.5 * (m[(r, c)].to_f64() + m[(c, r)].to_f64()));
    let mut ev: Vec<f64> = dm.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

#[derive(Clone, Debug, Serialize)]
pub struct StrongSelfDuality {
    pub strongly_self_dual: bool,
    /// Eigenvalues of the form of the symmetric structure examined.
    pub eigenvalues: Vec<f64>,
    pub negative_eigenvalues: usize,
}

/// Self-dual with respect to some inner product. Polyhedral: some
/// symmetric ray matching has a positive-definite form. PSD: the
/// Hilbert–Schmidt pairing realizes the cone as its own dual.
pub fn is_strongly_self_dual<F: Field>(a: &Com<F>) -> Result<StrongSelfDuality> {
    if a.is_psd() {
        let id = Matrix::<F>::identity(a.dim());
        let d = DualityStructure::from_matrices("hilbert-schmidt", &id, &id);
        let ok = verify_structure(&d, a)?.passed;
        let ev = symmetric_eigenvalues(&id);
        return Ok(StrongSelfDuality { strongly_self_dual: ok, negative_eigenvalues: 0, eigenvalues: ev });
    }
    let s = a.state_cone().poly("is_strongly_self_dual")?;
    let e = a.effect_cone().poly("is_strongly_self_dual")?;
    let sym = MatchOptions { symmetric: true };
    let mut first: Option<Matrix<F>> = None;
    let found = find_ray_matching(s, e, None, sym, &mut |phi| {
        first.get_or_insert_with(|| phi.clone());
        is_positive_definite(phi)
    });
    let witness = found.map(|(phi, _)| phi).or(first);
    let Some(phi) = witness else {
        return Ok(StrongSelfDuality { strongly_self_dual: false, eigenvalues: Vec::new(), negative_eigenvalues: 0 });
    };
    let eigenvalues = symmetric_eigenvalues(&phi);
    let negative = eigenvalues.iter().filter(|x| **x < -crate::settings::tolerance()).count();
    Ok(StrongSelfDuality { strongly_self_dual: is_positive_definite(&phi), eigenvalues, negative_eigenvalues: negative })
}
