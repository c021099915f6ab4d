//! Locally tomographic composites on the tensor-product carrier.
//!
//! Vectors on `A ⊗ B` use the row-major index `i * n_B + j` (see
//! [`crate::linalg`]). Composite rules are pluggable through [`TensorRule`];
//! the builtin rules are `min`, `max` and `spatial`.

use std::collections::BTreeMap;
use std::fmt;

use serde::Serialize;

use crate::com::{fmt_vec, Com, Violation};
use crate::cone::psd::HermitianBasis;
use crate::cone::{conic_combination, Cone, PolyCone, PsdCone};
use crate::error::{ComError, Result};
use crate::linalg::{dot, kron_vec, Matrix, Vector};
use crate::lp::{LinearProgram, Relation};
use crate::scalar::Field;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CompositeKind {
    Min,
    Max,
    SpatialQuantum,
    Custom,
}

impl fmt::Display for CompositeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CompositeKind::Min => "min",
            CompositeKind::Max => "max",
            CompositeKind::SpatialQuantum => "spatial",
            CompositeKind::Custom => "custom",
        })
    }
}

#[derive(Clone, Debug)]
pub struct CompositeCom<F> {
    com: Com<F>,
    factors: Box<(Com<F>, Com<F>)>,
    kind: CompositeKind,
}

impl<F: Field> CompositeCom<F> {
    /// Wraps a user-supplied composite after checking the composite axioms.
    pub fn custom(com: Com<F>, a: &Com<F>, b: &Com<F>) -> Result<Self, Vec<Violation>> {
        let check = is_composite(&com, a, b);
        if !check.is_composite {
            return Err(check.violations);
        }
        Ok(CompositeCom { com, factors: Box::new((a.clone(), b.clone())), kind: CompositeKind::Custom })
    }

    pub fn com(&self) -> &Com<F> {
        &self.com
    }

    pub fn into_com(self) -> Com<F> {
        self.com
    }

    pub fn left(&self) -> &Com<F> {
        &self.factors.0
    }

    pub fn right(&self) -> &Com<F> {
        &self.factors.1
    }

    pub fn kind(&self) -> CompositeKind {
        self.kind
    }
}

/// A rule for forming the composite of two COMs.
pub trait TensorRule<F: Field>: Send + Sync {
    fn name(&self) -> &'static str;
    fn compose(&self, a: &Com<F>, b: &Com<F>) -> Result<CompositeCom<F>>;
}

pub struct MinTensor;
pub struct MaxTensor;
pub struct SpatialTensor;

impl<F: Field> TensorRule<F> for MinTensor {
    fn name(&self) -> &'static str {
        "min"
    }

    fn compose(&self, a: &Com<F>, b: &Com<F>) -> Result<CompositeCom<F>> {
        min_tensor(a, b)
    }
}

impl<F: Field> TensorRule<F> for MaxTensor {
    fn name(&self) -> &'static str {
        "max"
    }

    fn compose(&self, a: &Com<F>, b: &Com<F>) -> Result<CompositeCom<F>> {
        max_tensor(a, b)
    }
}

impl<F: Field> TensorRule<F> for SpatialTensor {
    fn name(&self) -> &'static str {
        "spatial"
    }

    fn compose(&self, a: &Com<F>, b: &Com<F>) -> Result<CompositeCom<F>> {
        spatial_quantum_composite(a, b)
    }
}

/// Named composite rules.
pub struct TensorRegistry<F> {
    rules: BTreeMap<&'static str, Box<dyn TensorRule<F>>>,
}

impl<F: Field> TensorRegistry<F> {
    pub fn empty() -> Self {
        TensorRegistry { rules: BTreeMap::new() }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(MinTensor));
        r.register(Box::new(MaxTensor));
        r.register(Box::new(SpatialTensor));
        r
    }

    pub fn register(&mut self, rule: Box<dyn TensorRule<F>>) {
        self.rules.insert(rule.name(), rule);
    }

    pub fn get(&self, name: &str) -> Result<&dyn TensorRule<F>> {
        self.rules
            .get(name)
            .map(|r| r.as_ref())
            .ok_or_else(|| ComError::Unknown { kind: "composite rule", name: name.to_string() })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.rules.keys().copied().collect()
    }

    pub fn compose(&self, name: &str, a: &Com<F>, b: &Com<F>) -> Result<CompositeCom<F>> {
        self.get(name)?.compose(a, b)
    }
}

fn products<F: Field>(xs: &[Vector<F>], ys: &[Vector<F>]) -> Vec<Vector<F>> {
    xs.iter().flat_map(|x| ys.iter().map(move |y| kron_vec(x, y))).collect()
}

fn polyhedral_factors<'a, F: Field>(a: &'a Com<F>, b: &'a Com<F>) -> Result<[&'a PolyCone<F>; 4]> {
    let get = |c: &'a Cone<F>| c.as_poly().ok_or(ComError::MixedKindUnsupported);
    Ok([get(a.state_cone())?, get(a.effect_cone())?, get(b.state_cone())?, get(b.effect_cone())?])
}

/// States generated by product states; effects are everything positive on
/// them (the dual cone).
pub fn min_tensor<F: Field>(a: &Com<F>, b: &Com<F>) -> Result<CompositeCom<F>> {
    let [sa, _, sb, _] = polyhedral_factors(a, b)?;
    let dim = a.dim() * b.dim();
    // products of extreme rays are extreme in the minimal tensor cone
    let state = PolyCone::from_extreme_rays(dim, products(sa.generators(), sb.generators()));
    let effect = state.dual();
    let com = Com::new(
        format!("{}⊗min{}", a.label(), b.label()),
        Cone::Polyhedral(state),
        Cone::Polyhedral(effect),
        kron_vec(a.unit(), b.unit()),
    )?;
    Ok(CompositeCom { com, factors: Box::new((a.clone(), b.clone())), kind: CompositeKind::Min })
}

/// States are all forms positive on product effects; effects are generated
/// by product effects.
pub fn max_tensor<F: Field>(a: &Com<F>, b: &Com<F>) -> Result<CompositeCom<F>> {
    let [_, ea, _, eb] = polyhedral_factors(a, b)?;
    let dim = a.dim() * b.dim();
    let effect = PolyCone::from_extreme_rays(dim, products(ea.generators(), eb.generators()));
    let state = effect.dual();
    let com = Com::new(
        format!("{}⊗max{}", a.label(), b.label()),
        Cone::Polyhedral(state),
        Cone::Polyhedral(effect),
        kron_vec(a.unit(), b.unit()),
    )?;
    Ok(CompositeCom { com, factors: Box::new((a.clone(), b.clone())), kind: CompositeKind::Max })
}

/// PSD cone on the tensor-product Hilbert space, coordinatized by products
/// of the factor bases so that the pairing factorizes.
pub fn spatial_quantum_composite<F: Field>(a: &Com<F>, b: &Com<F>) -> Result<CompositeCom<F>> {
    let (Some(pa), Some(pb)) = (a.state_cone().as_psd(), b.state_cone().as_psd()) else {
        return Err(ComError::KindMismatch);
    };
    if a.effect_cone().as_psd().is_none() || b.effect_cone().as_psd().is_none() {
        return Err(ComError::KindMismatch);
    }
    let basis = HermitianBasis::tensor(pa.basis(), pb.basis());
    let cone = Cone::Psd(PsdCone::with_basis(basis));
    let com = Com::new(
        format!("{}⊗{}", a.label(), b.label()),
        cone.clone(),
        cone,
        kron_vec(a.unit(), b.unit()),
    )?;
    Ok(CompositeCom { com, factors: Box::new((a.clone(), b.clone())), kind: CompositeKind::SpatialQuantum })
}

#[derive(Clone, Debug, Serialize)]
pub struct CompositeCheck {
    pub is_composite: bool,
    pub violations: Vec<Violation>,
}

const STREAM_COMPOSITE: u64 = 0x40;

/// The composite axioms: unit `u_A ⊗ u_B`, product states and product
/// effects are allowed, and every state is positive on product effects.
pub fn is_composite<F: Field>(ab: &Com<F>, a: &Com<F>, b: &Com<F>) -> CompositeCheck {
    let mut v = Vec::new();
    if ab.dim() != a.dim() * b.dim() {
        v.push(Violation {
            code: "dimension",
            message: format!("composite has dimension {}, expected {}", ab.dim(), a.dim() * b.dim()),
        });
        return CompositeCheck { is_composite: false, violations: v };
    }
    let u = kron_vec(a.unit(), b.unit());
    if crate::linalg::vec_max_abs_diff(&u, ab.unit()) > tol::<F>() {
        v.push(Violation { code: "unit", message: "composite unit differs from u_A ⊗ u_B".into() });
    }
    let sa = a.state_cone().probe_rays(STREAM_COMPOSITE);
    let sb = b.state_cone().probe_rays(STREAM_COMPOSITE + 1);
    for (i, x) in sa.iter().enumerate() {
        for (j, y) in sb.iter().enumerate() {
            if !ab.state_cone().member(&kron_vec(x, y)).unwrap_or(false) {
                v.push(Violation {
                    code: "product_state",
                    message: format!("product of state generators #{i} and #{j} is not a composite state"),
                });
            }
        }
    }
    let ea = a.effect_cone().probe_rays(STREAM_COMPOSITE + 2);
    let eb = b.effect_cone().probe_rays(STREAM_COMPOSITE + 3);
    for (i, x) in ea.iter().enumerate() {
        for (j, y) in eb.iter().enumerate() {
            if !ab.effect_cone().member(&kron_vec(x, y)).unwrap_or(false) {
                v.push(Violation {
                    code: "product_effect",
                    message: format!("product of effect generators #{i} and #{j} is not a composite effect"),
                });
            }
        }
    }
    for (k, w) in ab.state_cone().probe_rays(STREAM_COMPOSITE + 4).iter().enumerate() {
        for (i, x) in ea.iter().enumerate() {
            for (j, y) in eb.iter().enumerate() {
                let p = dot(w, &kron_vec(x, y));
                if p.is_neg() {
                    v.push(Violation {
                        code: "signaling_state",
                        message: format!(
                            "composite state #{k} {} takes value {p} on effect pair (#{i} {}, #{j} {})",
                            fmt_vec(w),
                            fmt_vec(x),
                            fmt_vec(y)
                        ),
                    });
                }
            }
        }
    }
    CompositeCheck { is_composite: v.is_empty(), violations: v }
}

fn tol<F: Field>() -> f64 {
    if F::EXACT {
        0.0
    } else {
        crate::settings::tolerance()
    }
}

#[derive(Clone, Debug)]
pub enum Separability<F> {
    /// `omega = sum_k weights[k] * (g_i ⊗ h_j)` over the listed pairs.
    Separable { terms: Vec<((usize, usize), F)> },
    /// `w` is nonnegative on every product state and `w(omega) <= -1`.
    Entangled { witness: Vector<F> },
}

impl<F> Separability<F> {
    pub fn is_separable(&self) -> bool {
        matches!(self, Separability::Separable { .. })
    }
}

/// LP membership of `omega` in the minimal tensor cone of the factors.
pub fn separability_check<F: Field>(omega: &[F], a: &Com<F>, b: &Com<F>) -> Result<Separability<F>> {
    let [sa, _, sb, _] = polyhedral_factors(a, b)?;
    crate::error::check_dim(a.dim() * b.dim(), omega.len())?;
    let ga = sa.generators();
    let gb = sb.generators();
    let prods = products(ga, gb);
    if let Some(lambda) = conic_combination(&prods, omega) {
        let terms = lambda
            .into_iter()
            .enumerate()
            .filter(|(_, l)| !l.near_zero())
            .map(|(k, l)| ((k / gb.len(), k % gb.len()), l))
            .collect();
        return Ok(Separability::Separable { terms });
    }
    // Farkas: some functional separates omega from the product cone.
    let n = omega.len();
    let mut lp = LinearProgram::new(n);
    for p in &prods {
        lp.add(p.clone(), Relation::Ge, F::zero());
    }
    lp.add(omega.to_vec(), Relation::Le, -F::one());
    let witness = lp
        .feasible_point()
        .ok_or_else(|| ComError::Inconsistent("no separating functional for a non-separable state".into()))?;
    Ok(Separability::Entangled { witness })
}

/// First extreme ray of the maximal composite that is not separable, with
/// its entanglement witness.
pub fn max_minus_min_witness<F: Field>(a: &Com<F>, b: &Com<F>) -> Result<Option<(Vector<F>, Vector<F>)>> {
    let max = max_tensor(a, b)?;
    let rays = max.com().state_cone().poly("max_minus_min_witness")?.generators().to_vec();
    for r in rays {
        if let Separability::Entangled { witness } = separability_check(&r, a, b)? {
            return Ok(Some((r, witness)));
        }
    }
    Ok(None)
}

/// Permutation taking `A ⊗ B` coordinates to `B ⊗ A` coordinates.
pub fn swap_matrix<F: Field>(n_a: usize, n_b: usize) -> Matrix<F> {
    let n = n_a * n_b;
    let mut m = Matrix::zeros(n, n);
    for i in 0..n_a {
        for j in 0..n_b {
            m[(j * n_a + i, i * n_b + j)] = F::one();
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{qi, Q};

    fn bit() -> Com<Q> {
        Com::new("bit", Cone::orthant(2), Cone::orthant(2), vec![qi(1), qi(1)]).unwrap()
    }

    #[test]
    fn classical_min_is_orthant() {
        let ab = min_tensor(&bit(), &bit()).unwrap();
        assert!(ab.com().state_cone().same_cone(&Cone::orthant(4)));
        assert!(is_composite(ab.com(), &bit(), &bit()).is_composite);
    }

    #[test]
    fn registry_lookup() {
        let reg = TensorRegistry::<Q>::builtin();
        assert_eq!(reg.names(), vec!["max", "min", "spatial"]);
        assert!(matches!(reg.get("nope"), Err(ComError::Unknown { .. })));
        assert_eq!(reg.compose("spatial", &bit(), &bit()).unwrap_err(), ComError::KindMismatch);
    }

    #[test]
    fn swap_is_involution() {
        let s = swap_matrix::<Q>(2, 3);
        let t = swap_matrix::<Q>(3, 2);
        assert!(t.mul(&s).is_identity());
        let x = kron_vec(&[qi(1), qi(2)], &[qi(3), qi(4), qi(5)]);
        assert_eq!(s.mul_vec(&x), kron_vec(&[qi(3), qi(4), qi(5)], &[qi(1), qi(2)]));
    }

    #[test]
    fn signaling_state_is_named() {
        // a composite whose state cone contains a form negative on e1⊗e1
        let a = bit();
        let bad = PolyCone::from_generators(vec![
            vec![qi(-1), qi(4), qi(4), qi(4)],
            vec![qi(0), qi(1), qi(0), qi(0)],
            vec![qi(0), qi(0), qi(1), qi(0)],
            vec![qi(0), qi(0), qi(0), qi(1)],
            vec![qi(1), qi(0), qi(0), qi(0)],
        ])
        .unwrap();
        let com = Com::saturated("bad", Cone::Polyhedral(bad), vec![qi(1); 4]).unwrap();
        let check = is_composite(&com, &a, &a);
        assert!(!check.is_composite);
        assert!(check.violations.iter().any(|v| v.code == "signaling_state" && v.message.contains("(1, 0), #0")));
    }
}
