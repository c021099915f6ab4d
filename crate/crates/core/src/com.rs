//! COMs `(A, A#, u_A)`, their states and effects, and the morphism and
//! process predicates.
//!
//! States and effects share one coordinate space; the pairing is the dot
//! product. A linear map `A -> B` is an `n_B x n_A` matrix acting on column
//! vectors, so its adjoint is the transpose.

use std::fmt;

use rand::Rng;
use serde::Serialize;

use crate::cone::psd::max_eigenvalue;
use crate::cone::Cone;
use crate::error::{check_dim, ComError, Result};
use crate::linalg::{dot, scale_vec, sub_vec, Matrix, Vector};
use crate::scalar::Field;

#[derive(Clone, Debug)]
pub struct Com<F> {
    label: String,
    state_cone: Cone<F>,
    effect_cone: Cone<F>,
    unit: Vector<F>,
}

/// One failed invariant of a candidate COM.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Violation {
    pub code: &'static str,
    pub message: String,
}

impl Violation {
    fn new(code: &'static str, message: impl Into<String>) -> Self {
        Violation { code, message: message.into() }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

/// Unvalidated COM data.
#[derive(Clone, Debug)]
pub struct ComCandidate<F> {
    pub label: String,
    pub state_cone: Cone<F>,
    pub effect_cone: Cone<F>,
    pub unit: Vector<F>,
}

/// Checks every COM invariant and reports all failures, not just the first.
pub fn validate_com<F: Field>(c: ComCandidate<F>) -> Result<Com<F>, Vec<Violation>> {
    let mut out = Vec::new();
    let n = c.state_cone.dim();
    if c.effect_cone.dim() != n {
        out.push(Violation::new(
            "dimension",
            format!("effect cone has dimension {}, state cone {}", c.effect_cone.dim(), n),
        ));
    }
    if c.unit.len() != n {
        out.push(Violation::new("dimension", format!("unit has length {}, state cone dimension {}", c.unit.len(), n)));
    }
    if !out.is_empty() {
        return Err(out);
    }
    if !c.effect_cone.member(&c.unit).unwrap_or(false) {
        out.push(Violation::new("unit_not_effect", "unit is not in the effect cone"));
    }
    let states = c.state_cone.probe_rays(STREAM_VALIDATE);
    for (i, g) in states.iter().enumerate() {
        let p = dot(&c.unit, g);
        if !p.is_pos() {
            out.push(Violation::new(
                "unit_not_strictly_positive",
                format!("unit takes value {p} on state generator #{i} {}", fmt_vec(g)),
            ));
        }
    }
    let effects = c.effect_cone.probe_rays(STREAM_VALIDATE + 1);
    for (j, e) in effects.iter().enumerate() {
        for (i, g) in states.iter().enumerate() {
            let p = dot(e, g);
            if p.is_neg() {
                out.push(Violation::new(
                    "effect_not_in_dual",
                    format!("effect generator #{j} {} takes value {p} on state generator #{i} {}", fmt_vec(e), fmt_vec(g)),
                ));
            }
        }
    }
    if out.is_empty() {
        Ok(Com { label: c.label, state_cone: c.state_cone, effect_cone: c.effect_cone, unit: c.unit })
    } else {
        Err(out)
    }
}

const STREAM_VALIDATE: u64 = 0x10;
const STREAM_MORPHISM: u64 = 0x20;

pub(crate) fn fmt_vec<F: Field>(v: &[F]) -> String {
    let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("({})", parts.join(", "))
}

impl<F: Field> Com<F> {
    pub fn new(label: impl Into<String>, state_cone: Cone<F>, effect_cone: Cone<F>, unit: Vector<F>) -> Result<Self> {
        validate_com(ComCandidate { label: label.into(), state_cone, effect_cone, unit }).map_err(|v| {
            ComError::Inconsistent(v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; "))
        })
    }

    /// Saturated COM: effect cone is the full dual of the state cone.
    pub fn saturated(label: impl Into<String>, state_cone: Cone<F>, unit: Vector<F>) -> Result<Self> {
        let effect_cone = state_cone.dual();
        Self::new(label, state_cone, effect_cone, unit)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.unit.len()
    }

    pub fn state_cone(&self) -> &Cone<F> {
        &self.state_cone
    }

    pub fn effect_cone(&self) -> &Cone<F> {
        &self.effect_cone
    }

    pub fn unit(&self) -> &Vector<F> {
        &self.unit
    }

    pub fn is_psd(&self) -> bool {
        self.state_cone.is_psd() || self.effect_cone.is_psd()
    }

    pub fn is_polyhedral(&self) -> bool {
        !self.is_psd()
    }

    pub fn is_saturated(&self) -> bool {
        self.effect_cone.same_cone(&self.state_cone.dual())
    }

    /// Vertices of the normalized state space (polyhedral) or spanning pure
    /// states plus samples (PSD), each with `u(alpha) = 1`.
    pub fn normalized_states(&self, stream: u64) -> Vec<Vector<F>> {
        self.state_cone
            .probe_rays(stream)
            .into_iter()
            .map(|g| {
                let s = F::one() / dot(&self.unit, &g);
                scale_vec(&g, &s)
            })
            .collect()
    }

    pub fn state(&self, coords: Vector<F>) -> Result<StateVector<F>> {
        check_dim(self.dim(), coords.len())?;
        if !self.state_cone.member(&coords)? {
            return Err(ComError::Inconsistent(format!("{} is not in the state cone of {}", fmt_vec(&coords), self.label)));
        }
        let normalized = (dot(&self.unit, &coords) - F::one()).near_zero();
        Ok(StateVector { coords, normalized })
    }

    pub fn effect(&self, coords: Vector<F>) -> Result<Effect<F>> {
        check_dim(self.dim(), coords.len())?;
        if !self.is_effect(&coords) {
            return Err(ComError::Inconsistent(format!("{} is not an effect of {}", fmt_vec(&coords), self.label)));
        }
        Ok(Effect { coords })
    }

    /// `0 <= a <= u_A` in the effect order.
    pub fn is_effect(&self, a: &[F]) -> bool {
        a.len() == self.dim()
            && self.effect_cone.member(a).unwrap_or(false)
            && self.effect_cone.member(&sub_vec(&self.unit, a)).unwrap_or(false)
    }

    /// Random normalized state: a random nonnegative combination of state
    /// probe rays.
    pub fn random_state(&self, rng: &mut impl Rng) -> Vector<F> {
        let rays = self.state_cone.probe_rays(rng.gen());
        let v = random_combination(&rays, rng);
        let s = F::one() / dot(&self.unit, &v);
        scale_vec(&v, &s)
    }

    /// Random element of the effect cone (not necessarily below the unit).
    pub fn random_effect_multiple(&self, rng: &mut impl Rng) -> Vector<F> {
        let rays = self.effect_cone.probe_rays(rng.gen());
        random_combination(&rays, rng)
    }

    /// Random effect: an effect-cone element scaled below the unit.
    pub fn random_effect(&self, rng: &mut impl Rng) -> Vector<F> {
        let e = self.random_effect_multiple(rng);
        let m = max_on_normalized_states(self, &e, 0x31);
        if m.near_zero() {
            return e;
        }
        let a = scale_vec(&e, &(F::one() / m));
        if self.is_effect(&a) {
            a
        } else {
            // non-saturated models: fall back to a multiple of the unit
            scale_vec(&self.unit, &F::from_frac(1, 2))
        }
    }
}

fn random_combination<F: Field>(rays: &[Vector<F>], rng: &mut impl Rng) -> Vector<F> {
    let n = rays[0].len();
    let mut v = vec![F::zero(); n];
    let mut any = false;
    for r in rays {
        let w: i64 = rng.gen_range(0..4);
        if w > 0 {
            any = true;
            let w = F::from_int(w);
            for (x, y) in v.iter_mut().zip(r) {
                *x += &(w.clone() * y);
            }
        }
    }
    if !any {
        v = rays[rng.gen_range(0..rays.len())].clone();
    }
    v
}

/// `max u(alpha)` style maximum of a functional over normalized states:
/// exact vertex maximum for polyhedral state spaces, `lambda_max` for PSD.
pub fn max_on_normalized_states<F: Field>(a: &Com<F>, functional: &[F], stream: u64) -> F {
    match a.state_cone() {
        Cone::Psd(c) => {
            // <x, rho> over density matrices peaks at lambda_max(x) (for trace-unit models)
            let m = c.basis().to_matrix(functional);
            let unit_is_trace = crate::linalg::vec_max_abs_diff(a.unit(), &c.basis().identity_coords::<F>()) <= 1e-12;
            if unit_is_trace {
                F::from_float(max_eigenvalue(&m))
            } else {
                sampled_max(a, functional, stream)
            }
        }
        Cone::Polyhedral(_) => sampled_max(a, functional, stream),
    }
}

fn sampled_max<F: Field>(a: &Com<F>, functional: &[F], stream: u64) -> F {
    a.normalized_states(stream)
        .iter()
        .map(|s| dot(functional, s))
        .fold(None, |m: Option<F>, x| match m {
            Some(m) if m >= x => Some(m),
            _ => Some(x),
        })
        .unwrap_or_else(F::zero)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<F> {
    pub coords: Vector<F>,
    pub normalized: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Effect<F> {
    pub coords: Vector<F>,
}

/// Linear map between carrier spaces, stored as an `n_B x n_A` matrix.
pub type LinearMap<F> = Matrix<F>;

/// Adjoint in the fixed pairing coordinates: the transpose.
pub fn linear_adjoint<F: Field>(phi: &LinearMap<F>) -> LinearMap<F> {
    phi.transpose()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum MorphismSide {
    /// `phi(g)` left the target state cone.
    State,
    /// `phi*(h)` left the source effect cone.
    Effect,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MorphismViolation {
    pub side: MorphismSide,
    pub index: usize,
    pub ray: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MorphismCheck {
    pub is_morphism: bool,
    pub violations: Vec<MorphismViolation>,
}

/// `phi(A+) ⊆ B+` checked on state generators of `A`, and
/// `phi*(B#+) ⊆ A#+` checked on effect generators of `B`.
pub fn is_morphism<F: Field>(phi: &LinearMap<F>, a: &Com<F>, b: &Com<F>) -> Result<MorphismCheck> {
    check_dim(a.dim(), phi.cols())?;
    check_dim(b.dim(), phi.rows())?;
    let mut violations = Vec::new();
    for (i, g) in a.state_cone().probe_rays(STREAM_MORPHISM).iter().enumerate() {
        if !b.state_cone().member(&phi.mul_vec(g))? {
            violations.push(MorphismViolation {
                side: MorphismSide::State,
                index: i,
                ray: g.iter().map(|x| x.to_string()).collect(),
            });
        }
    }
    let adj = linear_adjoint(phi);
    for (j, h) in b.effect_cone().probe_rays(STREAM_MORPHISM + 1).iter().enumerate() {
        if !a.effect_cone().member(&adj.mul_vec(h))? {
            violations.push(MorphismViolation {
                side: MorphismSide::Effect,
                index: j,
                ray: h.iter().map(|x| x.to_string()).collect(),
            });
        }
    }
    Ok(MorphismCheck { is_morphism: violations.is_empty(), violations })
}

/// A morphism with `u_A - phi*(u_B) ∈ A#+`.
pub fn is_process<F: Field>(phi: &LinearMap<F>, a: &Com<F>, b: &Com<F>) -> Result<bool> {
    if !is_morphism(phi, a, b)?.is_morphism {
        return Err(ComError::NotAMorphism);
    }
    let pulled = linear_adjoint(phi).mul_vec(b.unit());
    a.effect_cone().member(&sub_vec(a.unit(), &pulled))
}

/// Splits a nonzero morphism as `M * (phi / M)` with `phi / M` a process
/// and `M = max u_B(phi(alpha))` over normalized states.
pub fn normalize_morphism<F: Field>(phi: &LinearMap<F>, a: &Com<F>, b: &Com<F>) -> Result<(LinearMap<F>, F)> {
    if !is_morphism(phi, a, b)?.is_morphism {
        return Err(ComError::NotAMorphism);
    }
    if phi.is_zero_matrix() {
        return Err(ComError::ZeroMap);
    }
    let pulled = linear_adjoint(phi).mul_vec(b.unit());
    let m = max_on_normalized_states(a, &pulled, STREAM_MORPHISM + 2);
    if !m.is_pos() {
        return Err(ComError::ZeroMap);
    }
    Ok((phi.scale(&(F::one() / m.clone())), m))
}
