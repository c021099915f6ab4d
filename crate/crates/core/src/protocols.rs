//! Conclusive teleportation, compact structures and the factorization of
//! morphisms through a unit and co-unit.
//!
//! A teleportation certificate for `A` through `B` is a state `ω` on `B ⊗ A`,
//! a positive `r̂ : A → B♯` with `ω̂ ∘ r̂ = id_A`, and `c > 0` such that the
//! form `f` on `A ⊗ B` with `f̂ = c r̂` is an effect of the composite.

use serde::Serialize;

use crate::com::{Com, LinearMap};
use crate::composite::CompositeCom;
use crate::conditioning::{check_nonsignaling, remote_evaluate, remote_evaluate_dual, Bipartite};
use crate::cone::psd::max_eigenvalue;
use crate::cone::Cone;
use crate::error::{check_dim, ComError, Result};
use crate::linalg::{dot, kron_vec, positively_parallel, sub_vec, unit_vec, Matrix, Vector};
use crate::lp::{LinearProgram, LpOutcome, Relation};
use crate::scalar::Field;

#[derive(Clone, Debug)]
pub struct TeleportationCertificate<F: Field> {
    /// State on `B ⊗ A`.
    pub omega: Bipartite<F>,
    /// `r̂ : A → B♯`, an `n_B x n_A` matrix.
    pub r_hat: Matrix<F>,
    pub c: F,
    /// Effect on `A ⊗ B` with `f̂ = c r̂`.
    pub f: Bipartite<F>,
    /// `max |ω̂ ∘ r̂ − id|`.
    pub residual: f64,
}

impl<F: Field> TeleportationCertificate<F> {
    /// Assembles the derived fields from `(ω, r̂, c)`.
    pub fn new(omega: Bipartite<F>, r_hat: Matrix<F>, c: F) -> Self {
        let f = Bipartite::from_matrix(&r_hat.scale(&c).transpose());
        let residual = omega.matrix().transpose().mul(&r_hat).max_abs_diff(&Matrix::identity(r_hat.cols()));
        TeleportationCertificate { omega, r_hat, c, f, residual }
    }
}

fn tol<F: Field>() -> f64 {
    if F::EXACT {
        0.0
    } else {
        crate::settings::tolerance()
    }
}

/// Candidate states for the search: normalized extreme rays of the `B ⊗ A`
/// state cone, then normalized sums of up to `n_A` distinct rays.
fn candidate_states<F: Field>(a: &Com<F>, b: &Com<F>, ba: &Com<F>) -> Result<Vec<Bipartite<F>>> {
    let rays = ba.state_cone().poly("find_teleportation")?.generators();
    let u = ba.unit();
    let norm = |v: Vector<F>| -> Vector<F> {
        let s = F::one() / dot(u, &v);
        v.into_iter().map(|x| x * &s).collect()
    };
    let (nb, na) = (b.dim(), a.dim());
    let mut out: Vec<Bipartite<F>> = rays.iter().map(|r| Bipartite { coords: norm(r.clone()), left: nb, right: na }).collect();
    let k = rays.len();
    let mut subset = Vec::new();
    for size in 2..=na.min(k) {
        subsets(k, size, 0, &mut subset, &mut |idx| {
            let mut v = vec![F::zero(); nb * na];
            for &i in idx {
                for (x, y) in v.iter_mut().zip(&rays[i]) {
                    *x += y;
                }
            }
            out.push(Bipartite { coords: norm(v), left: nb, right: na });
        });
    }
    Ok(out)
}

fn subsets(n: usize, size: usize, start: usize, cur: &mut Vec<usize>, visit: &mut dyn FnMut(&[usize])) {
    if cur.len() == size {
        visit(cur);
        return;
    }
    for i in start..n {
        if n - i < size - cur.len() {
            break;
        }
        cur.push(i);
        subsets(n, size, i + 1, cur, visit);
        cur.pop();
    }
}

/// Necessary condition: every extreme ray of `A₊` must be the image of some
/// effect generator of `B` under `ω̂` (up to scaling).
fn passes_ray_filter<F: Field>(omega: &Bipartite<F>, a: &Com<F>, b: &Com<F>) -> Result<bool> {
    let w_hat = omega.matrix().transpose();
    let images: Vec<Vector<F>> = b.effect_cone().poly("find_teleportation")?.generators().iter().map(|h| w_hat.mul_vec(h)).collect();
    if !images.iter().all(|x| a.state_cone().member(x).unwrap_or(false)) {
        return Ok(true);
    }
    Ok(a.state_cone()
        .poly("find_teleportation")?
        .generators()
        .iter()
        .all(|g| images.iter().any(|x| positively_parallel(x, g))))
}

/// Maximizes `c` over `S = c r̂` for a fixed `ω`. Returns `(r̂, c)` when
/// the optimum is positive.
fn best_protocol_for<F: Field>(omega: &Bipartite<F>, a: &Com<F>, b: &Com<F>, ab: &Com<F>) -> Result<Option<(Matrix<F>, F)>> {
    let (na, nb) = (a.dim(), b.dim());
    let w = omega.matrix(); // n_B x n_A
    let nv = nb * na + 1;
    let c_var = nb * na;
    let s = |r: usize, col: usize| r * na + col; // S is n_B x n_A
    let mut lp = LinearProgram::new(nv);
    lp.set_nonneg(c_var);
    // Wᵀ S = c I
    for i in 0..na {
        for j in 0..na {
            let mut terms: Vec<(usize, F)> = (0..nb).map(|k| (s(k, j), w[(k, i)].clone())).collect();
            if i == j {
                terms.push((c_var, -F::one()));
            }
            lp.add_sparse(&terms, Relation::Eq, F::zero());
        }
    }
    // S(A₊) ⊆ B♯₊
    let b_eff_facets = b.effect_cone().poly("find_teleportation")?.facets();
    for g in a.state_cone().poly("find_teleportation")?.generators() {
        for kf in b_eff_facets {
            let terms: Vec<(usize, F)> =
                (0..nb).flat_map(|r| (0..na).map(move |col| (r, col))).map(|(r, col)| (s(r, col), kf[r].clone() * &g[col])).collect();
            lp.add_sparse(&terms, Relation::Ge, F::zero());
        }
    }
    // f = Sᵀ as a form on A ⊗ B: f[i*nb + j] = S[j][i]; need 0 <= f <= u_AB
    let u_ab = ab.unit();
    for rho in ab.effect_cone().poly("find_teleportation")?.facets() {
        let terms: Vec<(usize, F)> = (0..na)
            .flat_map(|i| (0..nb).map(move |j| (i, j)))
            .map(|(i, j)| (s(j, i), rho[i * nb + j].clone()))
            .collect();
        lp.add_sparse(&terms, Relation::Ge, F::zero());
        lp.add_sparse(&terms, Relation::Le, dot(rho, u_ab));
    }
    let mut objective = vec![F::zero(); nv];
    objective[c_var] = F::one();
    match lp.maximize(&objective) {
        LpOutcome::Optimal { point, value } if value.is_pos() => {
            let inv = F::one() / value.clone();
            let r_hat = Matrix::from_vec(nb, na, point[..nb * na].iter().map(|x| x.clone() * &inv).collect());
            Ok(Some((r_hat, value)))
        }
        LpOutcome::Unbounded => Err(ComError::Unbounded),
        _ => Ok(None),
    }
}

/// Searches for a teleportation protocol of `A` through `B`. Candidates are
/// tried in a fixed order and the first success is returned, so the answer
/// is deterministic.
pub fn find_teleportation<F: Field>(
    a: &Com<F>,
    b: &Com<F>,
    ab: &CompositeCom<F>,
    ba: &CompositeCom<F>,
) -> Result<Option<TeleportationCertificate<F>>> {
    if a.is_psd() || b.is_psd() {
        return Err(ComError::UnsupportedKind("find_teleportation"));
    }
    check_dim(a.dim() * b.dim(), ab.com().dim())?;
    check_dim(a.dim() * b.dim(), ba.com().dim())?;
    for omega in candidate_states(a, b, ba.com())? {
        if omega.matrix().rank() < a.dim() || !passes_ray_filter(&omega, a, b)? {
            continue;
        }
        if let Some((r_hat, c)) = best_protocol_for(&omega, a, b, ab.com())? {
            return Ok(Some(TeleportationCertificate::new(omega, r_hat, c)));
        }
    }
    Ok(None)
}

/// Searches polyhedral pairs. Two copies of one quantum system get the
/// maximally entangled candidate instead, which must pass verification.
pub fn teleportation_for_pair<F: Field>(
    a: &Com<F>,
    b: &Com<F>,
    ab: &CompositeCom<F>,
    ba: &CompositeCom<F>,
) -> Result<Option<TeleportationCertificate<F>>> {
    if !a.is_psd() && !b.is_psd() {
        return find_teleportation(a, b, ab, ba);
    }
    let standard = |c: &Com<F>| c.state_cone().as_psd().filter(|p| p.basis().is_standard()).map(|p| p.hilbert_dim());
    let d = match (standard(a), standard(b)) {
        (Some(d), Some(e)) if d == e => d,
        _ => return Err(ComError::UnsupportedKind("find_teleportation")),
    };
    let gamma = crate::models::maximally_entangled_structure(d)?.gamma;
    let omega = Bipartite::new(gamma.coords.iter().map(|x| F::from_float(*x)).collect(), gamma.left, gamma.right)?;
    let cert = teleportation_from_isomorphism_state(omega, ab.com())?;
    let ok = cert.c.is_pos() && verify_teleportation(&cert, a, b, ab.com(), ba.com())?.passed;
    Ok(ok.then_some(cert))
}

/// Largest `c` for which the `c r̂`-form is an effect of `AB`.
pub fn max_scale<F: Field>(r_hat: &Matrix<F>, ab: &Com<F>) -> Result<F> {
    check_dim(ab.dim(), r_hat.rows() * r_hat.cols())?;
    let f1 = Bipartite::from_matrix(&r_hat.transpose());
    match ab.effect_cone() {
        Cone::Psd(c) => {
            let m = c.basis().to_matrix(&f1.coords);
            let lmax = max_eigenvalue(&m);
            if lmax <= 0.0 {
                return Err(ComError::Unbounded);
            }
            Ok(F::from_float(1.0 / lmax))
        }
        Cone::Polyhedral(c) => {
            let mut best: Option<F> = None;
            for rho in c.facets() {
                let num = dot(rho, ab.unit());
                let den = dot(rho, &f1.coords);
                if den.is_pos() {
                    let ratio = num / den;
                    if best.as_ref().is_none_or(|b| ratio < *b) {
                        best = Some(ratio);
                    }
                }
            }
            best.ok_or(ComError::Unbounded)
        }
    }
}

/// Candidate for models where no search is attempted: `r̂ = ω̂⁻¹` for an
/// isomorphism state `ω` on `B ⊗ A`, with the maximal admissible scale.
pub fn teleportation_from_isomorphism_state<F: Field>(omega: Bipartite<F>, ab: &Com<F>) -> Result<TeleportationCertificate<F>> {
    check_dim(ab.dim(), omega.left * omega.right)?;
    let r_hat = omega.matrix().transpose().inverse().ok_or(ComError::InvalidStructure(f64::INFINITY))?;
    let c = max_scale(&r_hat, ab)?;
    Ok(TeleportationCertificate::new(omega, r_hat, c))
}

#[derive(Clone, Debug, Serialize)]
pub struct TeleportationReport {
    pub passed: bool,
    pub residual: f64,
    pub violations: Vec<String>,
}

const STREAM_TELEPORT: u64 = 0x60;

/// Re-checks every certificate condition from scratch.
pub fn verify_teleportation<F: Field>(
    cert: &TeleportationCertificate<F>,
    a: &Com<F>,
    b: &Com<F>,
    ab: &Com<F>,
    ba: &Com<F>,
) -> Result<TeleportationReport> {
    check_dim(b.dim(), cert.omega.left)?;
    check_dim(a.dim(), cert.omega.right)?;
    let mut v = Vec::new();
    if !ba.state_cone().member(&cert.omega.coords)? {
        v.push("ω is not a state of the B⊗A composite".to_string());
    }
    if let Err(e) = check_nonsignaling(&cert.omega, b, a) {
        v.push(e.to_string());
    }
    let norm = dot(ba.unit(), &cert.omega.coords) - F::one();
    if norm.to_f64().abs() > tol::<F>() {
        v.push(format!("ω is not normalized (u(ω) - 1 = {norm})"));
    }
    let residual = cert.omega.matrix().transpose().mul(&cert.r_hat).max_abs_diff(&Matrix::identity(a.dim()));
    if residual > tol::<F>() {
        v.push(format!("ω̂ ∘ r̂ differs from the identity by {residual:e}"));
    }
    for (i, g) in a.state_cone().probe_rays(STREAM_TELEPORT).iter().enumerate() {
        if !b.effect_cone().member(&cert.r_hat.mul_vec(g))? {
            v.push(format!("r̂ maps state generator #{i} outside the effect cone"));
        }
    }
    if !cert.c.is_pos() {
        v.push(format!("scale c = {} is not positive", cert.c));
    }
    let f = Bipartite::from_matrix(&cert.r_hat.scale(&cert.c).transpose());
    if !ab.effect_cone().member(&f.coords)? {
        v.push("c·r̂-form is not in the composite effect cone".to_string());
    }
    if !ab.effect_cone().member(&sub_vec(ab.unit(), &f.coords))? {
        v.push("c·r̂-form exceeds the composite unit".to_string());
    }
    Ok(TeleportationReport { passed: v.is_empty(), residual, violations: v })
}

/// Unit `η` on `A′ ⊗ A` and co-unit `ε` on `A ⊗ A′`.
#[derive(Clone, Debug)]
pub struct CompactStructure<F> {
    pub eta: Bipartite<F>,
    pub epsilon: Bipartite<F>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SnakeReport {
    /// `max |(ε ⊗ id_A)(id_A ⊗ η) − id_A|`.
    pub residual_a: f64,
    /// `max |(id_{A′} ⊗ ε)(η ⊗ id_{A′}) − id_{A′}|`.
    pub residual_dual: f64,
    pub passed: bool,
}

/// The first snake map `A → A` assembled column by column from remote
/// evaluation (each call cross-checks the direct contraction).
fn snake_maps<F: Field>(s: &CompactStructure<F>) -> Result<(Matrix<F>, Matrix<F>)> {
    let (nd, na) = (s.eta.left, s.eta.right);
    check_dim(na, s.epsilon.left)?;
    check_dim(nd, s.epsilon.right)?;
    let cols_a: Vec<Vector<F>> =
        (0..na).map(|i| remote_evaluate(&s.epsilon, &s.eta, &unit_vec(na, i)).map(|r| r.result)).collect::<Result<_>>()?;
    let cols_d: Vec<Vector<F>> = (0..nd)
        .map(|i| remote_evaluate_dual(&s.epsilon, &s.eta, &unit_vec(nd, i)).map(|r| r.result))
        .collect::<Result<_>>()?;
    Ok((Matrix::from_cols(&cols_a), Matrix::from_cols(&cols_d)))
}

/// Evaluates both snake equations as matrix identities.
pub fn verify_compact_structure<F: Field>(s: &CompactStructure<F>) -> Result<SnakeReport> {
    let (m1, m2) = snake_maps(s)?;
    let residual_a = m1.max_abs_diff(&Matrix::identity(m1.rows()));
    let residual_dual = m2.max_abs_diff(&Matrix::identity(m2.rows()));
    let passed = residual_a <= tol::<F>() && residual_dual <= tol::<F>();
    Ok(SnakeReport { residual_a, residual_dual, passed })
}

#[derive(Clone, Debug)]
pub struct Factorization<F> {
    /// `ω_φ = (id_{A′} ⊗ φ) ∘ η` on `A′ ⊗ B`.
    pub omega_phi: Bipartite<F>,
    pub counit: Bipartite<F>,
    /// `max |ω̂_φ ∘ ε̂ − φ|`.
    pub residual: f64,
}

/// `φ = ω̂_φ ∘ ε̂` through a verified compact structure on `A`.
pub fn factor_morphism<F: Field>(phi: &LinearMap<F>, s: &CompactStructure<F>) -> Result<Factorization<F>> {
    let report = verify_compact_structure(s)?;
    if !report.passed {
        return Err(ComError::InvalidStructure(report.residual_a.max(report.residual_dual)));
    }
    check_dim(s.eta.right, phi.cols())?;
    let h = s.eta.matrix();
    let omega_phi = Bipartite::from_matrix(&h.mul(&phi.transpose()));
    let recovered = omega_phi.matrix().transpose().mul(&s.epsilon.matrix().transpose());
    let residual = recovered.max_abs_diff(phi);
    Ok(Factorization { omega_phi, counit: s.epsilon.clone(), residual })
}

/// Writes `φ : A → B` as `Σ μ_ij g_j h_iᵀ` with `g_j` state generators of
/// `B`, `h_i` effect generators of `A`, `μ >= 0` (entanglement-breaking
/// form). `None` certifies that no such decomposition exists.
pub fn entanglement_breaking_decomposition<F: Field>(phi: &LinearMap<F>, a: &Com<F>, b: &Com<F>) -> Result<Option<Vector<F>>> {
    let ha = a.effect_cone().poly("entanglement_breaking_decomposition")?.generators();
    let gb = b.state_cone().poly("entanglement_breaking_decomposition")?.generators();
    let terms: Vec<Vector<F>> = ha.iter().flat_map(|h| gb.iter().map(move |g| kron_vec(g, h))).collect();
    // kron(g, h) is the row-major vector of g hᵀ
    Ok(crate::cone::conic_combination(&terms, phi.data()))
}

#[derive(Clone, Debug)]
pub struct ObjectVerdict<F: Field> {
    pub object: String,
    /// Partner and both certificates (`A` through `B`, `B` through `A`).
    pub certified: Option<(String, TeleportationCertificate<F>, TeleportationCertificate<F>)>,
    /// Partners tried without success, with the reason.
    pub exhausted: Vec<(String, String)>,
}

/// For each object, looks for a partner `B` in the list such that `A`
/// teleports through `B` and `B` through `A`.
pub fn check_theory_compact_closed<F: Field>(
    objects: &[Com<F>],
    composite: &dyn Fn(&Com<F>, &Com<F>) -> Result<CompositeCom<F>>,
) -> Result<Vec<ObjectVerdict<F>>> {
    let mut out = Vec::new();
    for a in objects {
        let mut verdict = ObjectVerdict { object: a.label().to_string(), certified: None, exhausted: Vec::new() };
        for b in objects {
            let attempt = (|| -> Result<Option<(TeleportationCertificate<F>, TeleportationCertificate<F>)>> {
                let ab = composite(a, b)?;
                let ba = composite(b, a)?;
                let Some(there) = teleportation_for_pair(a, b, &ab, &ba)? else { return Ok(None) };
                let Some(back) = teleportation_for_pair(b, a, &ba, &ab)? else { return Ok(None) };
                Ok(Some((there, back)))
            })();
            match attempt {
                Ok(Some((t, r))) => {
                    verdict.certified = Some((b.label().to_string(), t, r));
                    break;
                }
                Ok(None) => verdict.exhausted.push((b.label().to_string(), "no teleportation certificate".into())),
                Err(e) => verdict.exhausted.push((b.label().to_string(), e.to_string())),
            }
        }
        out.push(verdict);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::composite::min_tensor;
    use crate::models::{classical, trivial};
    use crate::scalar::{q, qi, Q};

    #[test]
    fn classical_bit_teleports_with_half() {
        let bit = classical(2).unwrap();
        let ab = min_tensor(&bit, &bit).unwrap();
        let cert = find_teleportation(&bit, &bit, &ab, &ab).unwrap().unwrap();
        assert_eq!(cert.c, q(1, 2));
        assert_eq!(cert.omega.coords, vec![q(1, 2), qi(0), qi(0), q(1, 2)]);
        assert_eq!(cert.f.coords, vec![qi(1), qi(0), qi(0), qi(1)]);
        let rep = verify_teleportation(&cert, &bit, &bit, ab.com(), ab.com()).unwrap();
        assert!(rep.passed, "{:?}", rep.violations);
        assert_eq!(max_scale(&cert.r_hat, ab.com()).unwrap(), q(1, 2));
    }

    #[test]
    fn bit_does_not_teleport_through_trivial() {
        let bit = classical(2).unwrap();
        let one = trivial();
        let ab = min_tensor(&bit, &one).unwrap();
        let ba = min_tensor(&one, &bit).unwrap();
        assert!(find_teleportation(&bit, &one, &ab, &ba).unwrap().is_none());
    }

    #[test]
    fn qubit_candidate_has_quarter_scale() {
        let qubit = crate::models::quantum(2).unwrap();
        let ab = crate::composite::spatial_quantum_composite(&qubit, &qubit).unwrap();
        let gamma = crate::models::maximally_entangled_structure(2).unwrap().gamma;
        let cert = teleportation_from_isomorphism_state(gamma, ab.com()).unwrap();
        assert!((cert.c - 0.25).abs() <= 1e-9);
        let rep = verify_teleportation(&cert, &qubit, &qubit, ab.com(), ab.com()).unwrap();
        assert!(rep.passed && rep.residual <= 1e-10, "{:?}", rep.violations);
        let greedy = TeleportationCertificate::new(cert.omega.clone(), cert.r_hat.clone(), 0.5);
        let rep = verify_teleportation(&greedy, &qubit, &qubit, ab.com(), ab.com()).unwrap();
        assert!(!rep.passed);
        assert!(rep.violations.iter().any(|v| v.contains("exceeds")));
    }

    #[test]
    fn classical_snakes_and_factorization() {
        let id = Matrix::<Q>::identity(2);
        let s = CompactStructure { eta: Bipartite::from_matrix(&id), epsilon: Bipartite::from_matrix(&id) };
        let r = verify_compact_structure(&s).unwrap();
        assert!(r.passed && r.residual_a == 0.0 && r.residual_dual == 0.0);
        let not = Matrix::from_rows(&[vec![qi(0), qi(1)], vec![qi(1), qi(0)]]);
        let fac = factor_morphism(&not, &s).unwrap();
        assert_eq!(fac.residual, 0.0);
        assert_eq!(fac.omega_phi.coords, vec![qi(0), qi(1), qi(1), qi(0)]);

        let doubled = CompactStructure { eta: Bipartite::from_matrix(&id.scale(&qi(2))), epsilon: s.epsilon.clone() };
        let r = verify_compact_structure(&doubled).unwrap();
        assert_eq!((r.residual_a, r.residual_dual), (1.0, 1.0));
        assert!(matches!(factor_morphism(&not, &doubled), Err(ComError::InvalidStructure(_))));
    }

    #[test]
    fn classical_identity_is_entanglement_breaking() {
        let bit = classical(2).unwrap();
        assert!(entanglement_breaking_decomposition(&Matrix::identity(2), &bit, &bit).unwrap().is_some());
    }
}
