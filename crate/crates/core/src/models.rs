//! Builtin systems, Mackey-triple linearization, and the model registry.

use std::collections::BTreeMap;
use std::fmt;

use crate::com::Com;
use crate::cone::{Cone, PolyCone, PsdCone};
use crate::error::{ComError, Result};
use crate::linalg::{dot, rank_of, Matrix, Vector};
use crate::matching::{find_ray_matching, MatchOptions};
use crate::scalar::{q, qi, Field, Q};
use crate::selfdual::{check_symmetric_self_duality, check_weak_self_duality, DualityStructure};

/// `n` outcomes, simplex of probability weights.
pub fn classical(n: usize) -> Result<Com<Q>> {
    if n == 0 {
        return Err(ComError::Empty);
    }
    let label = if n == 1 { "trivial".to_string() } else { format!("classical{n}") };
    Com::new(label, Cone::orthant(n), Cone::orthant(n), vec![qi(1); n])
}

/// The trivial system `(ℝ, ℝ₊, 1)`.
pub fn trivial() -> Com<Q> {
    classical(1).expect("orthant of dimension 1")
}

/// Density operators on `ℂ^d` in the orthonormal Hermitian coordinates.
pub fn quantum(d: usize) -> Result<Com<f64>> {
    if d < 2 {
        return Err(ComError::Parse("quantum systems need hilbert dimension >= 2".into()));
    }
    let cone = PsdCone::new(d);
    let unit = cone.basis().identity_coords();
    let label = if d == 2 { "qubit".to_string() } else { format!("quantum{d}") };
    Com::new(label, Cone::Psd(cone.clone()), Cone::Psd(cone), unit)
}

fn ints(rows: &[[i64; 3]]) -> Vec<Vector<Q>> {
    rows.iter().map(|r| r.iter().map(|&x| qi(x)).collect()).collect()
}

/// Square state space; effect cone is the full dual.
///
/// Both ray lists are stored counter-clockwise starting from the first
/// quadrant, so matchings between them read as planar rotations.
pub fn gbit() -> Com<Q> {
    let states = ints(&[[1, 1, 1], [-1, 1, 1], [-1, -1, 1], [1, -1, 1]]);
    let effects = ints(&[[1, 0, 1], [0, 1, 1], [-1, 0, 1], [0, -1, 1]]);
    let state = PolyCone::from_generators(states).expect("square cone");
    let effect = PolyCone::from_generators(effects).expect("dual square cone");
    Com::new("gbit", Cone::Polyhedral(state), Cone::Polyhedral(effect), ints(&[[0, 0, 1]]).remove(0))
        .expect("gbit is a valid COM")
}

/// Cone over a rational (non-regular) pentagon; effect cone is the dual.
pub fn pentagon() -> Com<Q> {
    let states = ints(&[[0, 2, 1], [-2, 1, 1], [-1, -2, 1], [1, -2, 1], [2, 1, 1]]);
    let state = PolyCone::from_generators(states).expect("pentagon cone");
    Com::saturated("pentagon", Cone::Polyhedral(state), ints(&[[0, 0, 1]]).remove(0))
        .expect("pentagon is a valid COM")
}

/// `γ̂ = I/n`, `f̂ = n I`: the correlated state and its inverse.
pub fn classical_structure(n: usize) -> Result<DualityStructure<Q>> {
    let id = Matrix::<Q>::identity(n);
    Ok(DualityStructure::from_matrices(
        format!("{}-symmetric", classical(n)?.label()),
        &id.scale(&q(1, n as i64)),
        &id.scale(&qi(n as i64)),
    ))
}

/// Lexicographically first ray matching of the square onto its dual: a
/// 45° rotation, not symmetric.
pub fn gbit_rotation_structure() -> DualityStructure<Q> {
    let s = check_weak_self_duality(&gbit()).ok().flatten().expect("the square is weakly self-dual");
    DualityStructure { label: "gbit-rotation".into(), ..s }
}

/// First symmetric ray matching of the square onto its dual (a reflection).
pub fn gbit_reflection_structure() -> DualityStructure<Q> {
    let s = check_symmetric_self_duality(&gbit()).ok().flatten().expect("the square is symmetrically self-dual");
    DualityStructure { label: "gbit-reflection".into(), ..s }
}

/// `γ(a, b) = tr(P_Ψ (a ⊗ b))` for `Ψ = Σ x_i ⊗ x_i / √d`, and
/// `f(ρ, σ) = d tr(ρ σᵀ)`, the inverse Choi correspondence.
pub fn maximally_entangled_structure(d: usize) -> Result<DualityStructure<f64>> {
    let com = quantum(d)?;
    let basis = crate::cone::psd::HermitianBasis::standard(d);
    let pair = crate::cone::psd::HermitianBasis::tensor(&basis, &basis);
    let amp = 1.0 / (d as f64).sqrt();
    let psi: Vec<num_complex::Complex64> =
        (0..d * d).map(|k| if k % (d + 1) == 0 { num_complex::Complex64::new(amp, 0.0) } else { num_complex::Complex64::new(0.0, 0.0) }).collect();
    let g: Vector<f64> = pair.projector_coords(&psi);
    let n = basis.len();
    let f = Matrix::from_fn(n, n, |r, c| {
        d as f64 * crate::cone::psd::trace_product(basis.element(r), &basis.element(c).transpose()).re
    });
    Ok(DualityStructure::from_matrices(format!("{}-choi", com.label()), &crate::linalg::reshape(&g, n, n), &f))
}

/// A duality structure in either scalar mode.
#[derive(Clone, Debug)]
pub enum AnyStructure {
    Exact(DualityStructure<Q>),
    Float(DualityStructure<f64>),
}

impl AnyStructure {
    pub fn label(&self) -> &str {
        match self {
            AnyStructure::Exact(s) => &s.label,
            AnyStructure::Float(s) => &s.label,
        }
    }
}

/// Builds a named structure together with the model it lives on.
pub trait StructureFactory: Send + Sync {
    fn name(&self) -> &'static str;
    fn build(&self, param: Option<usize>) -> Result<(AnyCom, AnyStructure)>;
}

struct ClassicalStructure;
struct ChoiStructure(&'static str, usize);
struct FixedStructure(&'static str, fn() -> DualityStructure<Q>);

impl StructureFactory for ClassicalStructure {
    fn name(&self) -> &'static str {
        "classical"
    }

    fn build(&self, param: Option<usize>) -> Result<(AnyCom, AnyStructure)> {
        let n = param.unwrap_or(2);
        Ok((AnyCom::Exact(classical(n)?), AnyStructure::Exact(classical_structure(n)?)))
    }
}

impl StructureFactory for ChoiStructure {
    fn name(&self) -> &'static str {
        self.0
    }

    fn build(&self, param: Option<usize>) -> Result<(AnyCom, AnyStructure)> {
        let d = match (self.1, param) {
            (0, p) => p.unwrap_or(2),
            (fixed, None) => fixed,
            (_, Some(p)) => return Err(ComError::Unknown { kind: "structure", name: format!("{}{p}", self.0) }),
        };
        Ok((AnyCom::Float(quantum(d)?), AnyStructure::Float(maximally_entangled_structure(d)?)))
    }
}

impl StructureFactory for FixedStructure {
    fn name(&self) -> &'static str {
        self.0
    }

    fn build(&self, param: Option<usize>) -> Result<(AnyCom, AnyStructure)> {
        if let Some(p) = param {
            return Err(ComError::Unknown { kind: "structure", name: format!("{}{p}", self.0) });
        }
        Ok((AnyCom::Exact(gbit()), AnyStructure::Exact((self.1)())))
    }
}

pub struct StructureRegistry {
    factories: BTreeMap<&'static str, Box<dyn StructureFactory>>,
}

impl fmt::Debug for StructureRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.factories.keys()).finish()
    }
}

impl StructureRegistry {
    pub fn builtin() -> Self {
        let mut r = StructureRegistry { factories: BTreeMap::new() };
        r.register(Box::new(ClassicalStructure));
        r.register(Box::new(ChoiStructure("quantum", 0)));
        r.register(Box::new(ChoiStructure("qubit", 2)));
        r.register(Box::new(FixedStructure("gbit-rotation", gbit_rotation_structure)));
        r.register(Box::new(FixedStructure("gbit-reflection", gbit_reflection_structure)));
        r
    }

    pub fn register(&mut self, f: Box<dyn StructureFactory>) {
        self.factories.insert(f.name(), f);
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.factories.keys().copied().collect()
    }

    /// `classical3`, `qubit`, `quantum3`, `gbit-rotation`, `gbit-reflection`.
    pub fn resolve(&self, name: &str) -> Result<(AnyCom, AnyStructure)> {
        let (family, param) = split_name(name, "structure")?;
        self.factories
            .get(family)
            .ok_or_else(|| ComError::Unknown { kind: "structure", name: name.to_string() })?
            .build(param)
    }
}

fn split_name<'a>(name: &'a str, kind: &'static str) -> Result<(&'a str, Option<usize>)> {
    let split = name.find(|c: char| c.is_ascii_digit()).unwrap_or(name.len());
    let (family, digits) = name.split_at(split);
    if digits.is_empty() {
        return Ok((family, None));
    }
    let p = digits.parse().map_err(|_| ComError::Unknown { kind, name: name.to_string() })?;
    Ok((family, Some(p)))
}

/// A finite outcome set `X`, state set `Σ`, and table `p[x][s]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MackeyTriple {
    pub outcomes: Vec<String>,
    pub states: Vec<String>,
    /// `|X|` rows, `|Σ|` columns.
    pub table: Vec<Vec<Q>>,
}

impl MackeyTriple {
    /// The identity table on `n` outcomes and `n` states.
    pub fn classical(n: usize) -> Self {
        MackeyTriple {
            outcomes: (0..n).map(|i| format!("x{i}")).collect(),
            states: (0..n).map(|i| format!("s{i}")).collect(),
            table: (0..n).map(|x| (0..n).map(|s| if x == s { qi(1) } else { qi(0) }).collect()).collect(),
        }
    }

    /// `±z` and `±x` outcomes on the six Pauli eigenstates (Born rule).
    pub fn pauli_fragment() -> Self {
        let h = crate::scalar::q(1, 2);
        let (o, z) = (qi(1), qi(0));
        // states: +z, -z, +x, -x, +y, -y
        let table = vec![
            vec![o.clone(), z.clone(), h.clone(), h.clone(), h.clone(), h.clone()],
            vec![z.clone(), o.clone(), h.clone(), h.clone(), h.clone(), h.clone()],
            vec![h.clone(), h.clone(), o.clone(), z.clone(), h.clone(), h.clone()],
            vec![h.clone(), h.clone(), z, o, h.clone(), h],
        ];
        MackeyTriple {
            outcomes: ["+z", "-z", "+x", "-x"].map(String::from).to_vec(),
            states: ["+z", "-z", "+x", "-x", "+y", "-y"].map(String::from).to_vec(),
            table,
        }
    }

    fn column(&self, s: usize) -> Vector<Q> {
        self.table.iter().map(|row| row[s].clone()).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.table.len() != self.outcomes.len() {
            return Err(ComError::DegenerateTriple(format!(
                "{} table rows for {} outcomes",
                self.table.len(),
                self.outcomes.len()
            )));
        }
        if self.states.is_empty() || self.outcomes.is_empty() {
            return Err(ComError::DegenerateTriple("empty outcome or state set".into()));
        }
        for (x, row) in self.table.iter().enumerate() {
            if row.len() != self.states.len() {
                return Err(ComError::DegenerateTriple(format!("row {x} has {} entries", row.len())));
            }
            if let Some(p) = row.iter().find(|p| p.is_neg() || **p > qi(1)) {
                return Err(ComError::DegenerateTriple(format!("probability {p} outside [0, 1] in row {x}")));
            }
        }
        Ok(())
    }
}

/// The linearized model plus the embedding data.
#[derive(Clone, Debug)]
pub struct MackeyModel {
    pub com: Com<Q>,
    /// Distinct fingerprint columns kept after merging.
    pub merged_states: Vec<Vec<String>>,
    /// Coordinates of each original state in the carrier.
    pub state_coords: Vec<Vector<Q>>,
    /// Evaluation functional of each outcome.
    pub outcome_functionals: Vec<Vector<Q>>,
}

/// Identifies statistically indistinguishable states, coordinatizes the span
/// of the fingerprints by a basis of fingerprint columns, and takes the state
/// cone generated by the states and the effect cone generated by the outcome
/// functionals and the unit.
pub fn from_mackey(t: &MackeyTriple) -> Result<MackeyModel> {
    t.validate()?;
    let mut distinct: Vec<Vector<Q>> = Vec::new();
    let mut merged_states: Vec<Vec<String>> = Vec::new();
    let mut class_of = Vec::new();
    for s in 0..t.states.len() {
        let c = t.column(s);
        match distinct.iter().position(|d| *d == c) {
            Some(k) => {
                merged_states[k].push(t.states[s].clone());
                class_of.push(k);
            }
            None => {
                class_of.push(distinct.len());
                distinct.push(c);
                merged_states.push(vec![t.states[s].clone()]);
            }
        }
    }
    // basis of the column span, chosen greedily among fingerprints
    let mut basis: Vec<Vector<Q>> = Vec::new();
    for c in &distinct {
        let mut trial = basis.clone();
        trial.push(c.clone());
        if rank_of(&trial) == trial.len() {
            basis = trial;
        }
    }
    let k = basis.len();
    if k == 0 {
        return Err(ComError::DegenerateTriple("all fingerprints vanish".into()));
    }
    let b = Matrix::from_cols(&basis);
    let coords: Vec<Vector<Q>> = distinct
        .iter()
        .map(|c| b.solve(c).ok_or_else(|| ComError::Inconsistent("fingerprint outside its own span".into())))
        .collect::<Result<_>>()?;
    // basis columns are states, so u(e_i) = 1 forces u = (1, ..., 1)
    let unit = vec![qi(1); k];
    if let Some((i, _)) = coords.iter().enumerate().find(|(_, x)| dot(&unit, x) != qi(1)) {
        return Err(ComError::DegenerateTriple(format!(
            "no unit functional: state {:?} is not normalized by the outcome span",
            merged_states[i][0]
        )));
    }
    let outcome_functionals: Vec<Vector<Q>> = (0..t.outcomes.len()).map(|x| b.row(x).to_vec()).collect();
    let state_cone = PolyCone::from_generators(coords.clone())?;
    let mut eff_gens: Vec<Vector<Q>> =
        outcome_functionals.iter().filter(|a| !crate::linalg::is_zero_vec(a)).cloned().collect();
    eff_gens.push(unit.clone());
    let effect_cone = PolyCone::from_generators(eff_gens)?;
    let label = if k == 1 { "trivial".to_string() } else { format!("mackey{k}") };
    let com = Com::new(label, Cone::Polyhedral(state_cone), Cone::Polyhedral(effect_cone), unit)?;
    let state_coords = class_of.iter().map(|&c| coords[c].clone()).collect();
    Ok(MackeyModel { com, merged_states, state_coords, outcome_functionals })
}

/// Unit-preserving linear `Φ: A → B` with `Φ(A₊) = B₊` and
/// `Φ*(B♯₊) = A♯₊`, if one exists (polyhedral models).
pub fn order_isomorphism(a: &Com<Q>, b: &Com<Q>) -> Result<Option<Matrix<Q>>> {
    if a.dim() != b.dim() {
        return Ok(None);
    }
    let sa = a.state_cone().poly("order_isomorphism")?;
    let sb = b.state_cone().poly("order_isomorphism")?;
    let ea = a.effect_cone().poly("order_isomorphism")?;
    let eb = b.effect_cone().poly("order_isomorphism")?;
    let mut effects_match = |phi: &Matrix<Q>| {
        let adj = phi.transpose();
        let image: Vec<Vector<Q>> = eb.generators().iter().map(|h| adj.mul_vec(h)).collect();
        crate::cone::same_ray_set(&image, ea.generators())
    };
    Ok(find_ray_matching(sa, sb, Some((a.unit(), b.unit())), MatchOptions::default(), &mut effects_match)
        .map(|(phi, _)| phi))
}

/// A COM in either scalar mode: exact (polyhedral) or float (PSD).
#[derive(Clone, Debug)]
pub enum AnyCom {
    Exact(Com<Q>),
    Float(Com<f64>),
}

impl AnyCom {
    pub fn label(&self) -> &str {
        match self {
            AnyCom::Exact(c) => c.label(),
            AnyCom::Float(c) => c.label(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            AnyCom::Exact(c) => c.dim(),
            AnyCom::Float(c) => c.dim(),
        }
    }

    pub fn to_float(&self) -> Com<f64> {
        match self {
            AnyCom::Exact(c) => to_float_com(c),
            AnyCom::Float(c) => c.clone(),
        }
    }

    pub fn as_exact(&self) -> Option<&Com<Q>> {
        match self {
            AnyCom::Exact(c) => Some(c),
            AnyCom::Float(_) => None,
        }
    }

    /// The model over `F`; float models have no exact view.
    pub fn to_field<F: Field>(&self) -> Result<Com<F>> {
        fn conv<G: Field, F: Field>(c: &Com<G>) -> Result<Com<F>> {
            let unit = c.unit().iter().map(crate::cone::convert_scalar).collect();
            Com::new(c.label(), c.state_cone().convert(), c.effect_cone().convert(), unit)
        }
        match self {
            AnyCom::Exact(c) => conv(c),
            AnyCom::Float(_) if F::EXACT => Err(ComError::UnsupportedKind("exact view of a float model")),
            AnyCom::Float(c) => conv(c),
        }
    }
}

pub fn to_float_com(c: &Com<Q>) -> Com<f64> {
    Com::new(
        c.label(),
        c.state_cone().convert(),
        c.effect_cone().convert(),
        c.unit().iter().map(Field::to_f64).collect(),
    )
    .expect("float image of a valid exact COM")
}

/// Builds a family of models from a name suffix (`classical3` → `3`).
pub trait ModelFactory: Send + Sync {
    fn family(&self) -> &'static str;
    fn build(&self, param: Option<usize>) -> Result<AnyCom>;
}

struct ClassicalFactory;
struct QuantumFactory;
struct Fixed(&'static str, fn() -> AnyCom);

impl ModelFactory for ClassicalFactory {
    fn family(&self) -> &'static str {
        "classical"
    }

    fn build(&self, param: Option<usize>) -> Result<AnyCom> {
        classical(param.unwrap_or(2)).map(AnyCom::Exact)
    }
}

impl ModelFactory for QuantumFactory {
    fn family(&self) -> &'static str {
        "quantum"
    }

    fn build(&self, param: Option<usize>) -> Result<AnyCom> {
        quantum(param.unwrap_or(2)).map(AnyCom::Float)
    }
}

impl ModelFactory for Fixed {
    fn family(&self) -> &'static str {
        self.0
    }

    fn build(&self, param: Option<usize>) -> Result<AnyCom> {
        match param {
            None => Ok((self.1)()),
            Some(p) => Err(ComError::Unknown { kind: "model", name: format!("{}{p}", self.0) }),
        }
    }
}

pub struct ModelRegistry {
    factories: BTreeMap<&'static str, Box<dyn ModelFactory>>,
}

impl fmt::Debug for ModelRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.factories.keys()).finish()
    }
}

impl ModelRegistry {
    pub fn builtin() -> Self {
        let mut r = ModelRegistry { factories: BTreeMap::new() };
        r.register(Box::new(ClassicalFactory));
        r.register(Box::new(QuantumFactory));
        r.register(Box::new(Fixed("gbit", || AnyCom::Exact(gbit()))));
        r.register(Box::new(Fixed("pentagon", || AnyCom::Exact(pentagon()))));
        r.register(Box::new(Fixed("trivial", || AnyCom::Exact(trivial()))));
        r.register(Box::new(Fixed("qubit", || AnyCom::Float(quantum(2).expect("qubit")))));
        r
    }

    pub fn register(&mut self, f: Box<dyn ModelFactory>) {
        self.factories.insert(f.family(), f);
    }

    pub fn families(&self) -> Vec<&'static str> {
        self.factories.keys().copied().collect()
    }

    /// Resolves names such as `classical3`, `quantum2`, `qubit`, `gbit`.
    pub fn resolve(&self, name: &str) -> Result<AnyCom> {
        let (family, param) = split_name(name, "model")?;
        let factory = self
            .factories
            .get(family)
            .ok_or_else(|| ComError::Unknown { kind: "model", name: name.to_string() })?;
        factory.build(param)
    }
}
