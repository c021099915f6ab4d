//! Regular cones: polyhedral (generators and facets) and Hermitian PSD.
//!
//! Polyhedral cones are described by an irredundant generator list and an
//! irredundant facet list. Either side can be computed from the other on
//! demand; the dual cone is the same data with the two lists swapped.

pub mod psd;

use std::fmt;
use std::sync::{Arc, OnceLock};

use num_complex::Complex64;

use crate::error::{check_dim, ComError, Result};
use fixedbitset::FixedBitSet;

use crate::linalg::{add_vec, dot, is_zero_vec, positively_parallel, rank_of, IncrementalBasis, Matrix, Vector};
use crate::lp::{LinearProgram, Relation};
use crate::scalar::{primitive_integer_vector, Field, Q};
use crate::settings;
use psd::{min_eigenvalue, random_unit_vector, HermitianBasis};

/// A polyhedral cone in `F^dim`.
#[derive(Clone)]
pub struct PolyCone<F> {
    dim: usize,
    generators: OnceLock<Vec<Vector<F>>>,
    facets: OnceLock<Vec<Vector<F>>>,
}

impl<F> fmt::Debug for PolyCone<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PolyCone")
            .field("dim", &self.dim)
            .field("generators", &self.generators.get().map(Vec::len))
            .field("facets", &self.facets.get().map(Vec::len))
            .finish()
    }
}

impl<F: Field> PolyCone<F> {
    /// Builds the cone spanned by `gens`, dropping zero, duplicate and
    /// redundant rays. Fails unless the cone is pointed and generating.
    pub fn from_generators(gens: Vec<Vector<F>>) -> Result<Self> {
        let dim = gens.first().ok_or(ComError::Empty)?.len();
        if dim == 0 {
            return Err(ComError::Empty);
        }
        for g in &gens {
            check_dim(dim, g.len())?;
        }
        let mut rays: Vec<Vector<F>> = Vec::new();
        for g in gens {
            if !is_zero_vec(&g) && !rays.iter().any(|r| positively_parallel(&g, r)) {
                rays.push(g);
            }
        }
        let rank = rank_of(&rays);
        if rank < dim {
            return Err(ComError::NotGenerating { rank, dim });
        }
        if !is_pointed(&rays) {
            return Err(ComError::NotPointed);
        }
        let rays = remove_redundant(rays);
        Ok(Self::from_extreme_rays(dim, rays))
    }

    /// The cone `{x : h·x >= 0 for all h in facets}`.
    pub fn from_facets(facets: Vec<Vector<F>>) -> Result<Self> {
        // C pointed <=> C* generating, and vice versa.
        match Self::from_generators(facets) {
            Ok(dual) => Ok(dual.dual()),
            Err(ComError::NotPointed) => {
                Err(ComError::Inconsistent("facet description does not span the dual: cone is not generating".into()))
            }
            Err(ComError::NotGenerating { .. }) => Err(ComError::NotPointed),
            Err(e) => Err(e),
        }
    }

    /// Trusted constructor for rays already known to be extreme.
    pub(crate) fn from_extreme_rays(dim: usize, rays: Vec<Vector<F>>) -> Self {
        let generators = OnceLock::new();
        let _ = generators.set(rays);
        PolyCone { dim, generators, facets: OnceLock::new() }
    }

    /// Both representations at once; used when parsing files that carry both.
    pub fn from_parts(generators: Vec<Vector<F>>, facets: Vec<Vector<F>>) -> Result<Self> {
        let cone = Self::from_generators(generators)?;
        let derived = cone.facets();
        let same = facets.len() == derived.len()
            && facets.iter().all(|h| derived.iter().any(|d| positively_parallel(h, d)));
        if !same {
            return Err(ComError::Inconsistent("supplied facets do not match the generators".into()));
        }
        Ok(cone)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn generators(&self) -> &[Vector<F>] {
        self.generators.get_or_init(|| {
            let facets = self.facets.get().expect("cone has at least one representation");
            enumerate_facets(self.dim, facets)
        })
    }

    pub fn facets(&self) -> &[Vector<F>] {
        self.facets.get_or_init(|| {
            let gens = self.generators.get().expect("cone has at least one representation");
            enumerate_facets(self.dim, gens)
        })
    }

    /// Representation swap.
    pub fn dual(&self) -> Self {
        PolyCone { dim: self.dim, generators: self.facets.clone(), facets: self.generators.clone() }
    }

    pub fn member(&self, x: &[F]) -> Result<bool> {
        check_dim(self.dim, x.len())?;
        Ok(self.facets().iter().all(|h| dot(h, x).is_nonneg()))
    }

    /// A facet violated by `x`, if any.
    pub fn violated_facet(&self, x: &[F]) -> Option<&Vector<F>> {
        self.facets().iter().find(|h| dot(h, x).is_neg())
    }

    pub fn interior_point(&self) -> Vector<F> {
        self.generators().iter().fold(vec![F::zero(); self.dim], |acc, g| add_vec(&acc, g))
    }

    /// Cone equality: generator sets equal up to positive scaling.
    pub fn same_cone(&self, other: &PolyCone<F>) -> bool {
        self.dim == other.dim && same_ray_set(self.generators(), other.generators())
    }

    /// Containment, checked on generators.
    pub fn contains_cone(&self, other: &PolyCone<F>) -> bool {
        self.dim == other.dim && other.generators().iter().all(|g| self.member(g).unwrap_or(false))
    }

    /// LP membership in the conic hull of the generators; returns the
    /// nonnegative combination when it exists.
    pub fn conic_combination(&self, x: &[F]) -> Option<Vector<F>> {
        conic_combination(self.generators(), x)
    }

    /// Generators that are tight on a facet.
    pub fn tight_generators(&self, facet: &[F]) -> Vec<usize> {
        self.generators()
            .iter()
            .enumerate()
            .filter(|(_, g)| dot(facet, g).near_zero())
            .map(|(i, _)| i)
            .collect()
    }
}

/// Equality of ray lists up to positive scaling and order.
pub fn same_ray_set<F: Field>(a: &[Vector<F>], b: &[Vector<F>]) -> bool {
    a.len() == b.len()
        && a.iter().all(|x| b.iter().any(|y| positively_parallel(x, y)))
        && b.iter().all(|y| a.iter().any(|x| positively_parallel(x, y)))
}

/// Solves `sum_i l_i g_i = x, l >= 0`.
pub fn conic_combination<F: Field>(gens: &[Vector<F>], x: &[F]) -> Option<Vector<F>> {
    let k = gens.len();
    let mut lp = LinearProgram::new(k);
    lp.set_all_nonneg();
    for (row, xr) in x.iter().enumerate() {
        lp.add(gens.iter().map(|g| g[row].clone()).collect(), Relation::Eq, xr.clone());
    }
    lp.feasible_point()
}

/// Pointed iff no nontrivial nonnegative combination of the rays vanishes.
fn is_pointed<F: Field>(rays: &[Vector<F>]) -> bool {
    let k = rays.len();
    let dim = rays[0].len();
    let mut lp = LinearProgram::new(k);
    lp.set_all_nonneg();
    for row in 0..dim {
        lp.add(rays.iter().map(|g| g[row].clone()).collect(), Relation::Eq, F::zero());
    }
    lp.add(vec![F::one(); k], Relation::Eq, F::one());
    lp.feasible_point().is_none()
}

fn remove_redundant<F: Field>(mut rays: Vec<Vector<F>>) -> Vec<Vector<F>> {
    let mut i = 0;
    while i < rays.len() {
        let others: Vec<Vector<F>> =
            rays.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, r)| r.clone()).collect();
        if !others.is_empty() && conic_combination(&others, &rays[i]).is_some() {
            rays.remove(i);
        } else {
            i += 1;
        }
    }
    rays
}

/// Facets of `cone(gens)` for a pointed generating cone, as the extreme
/// rays of `{h : h·g >= 0}` by the double-description method. Two rays are
/// merged only when adjacent (no third ray is tight on every row both are
/// tight on). Output is sorted by tight-generator sets, so it does not
/// depend on the insertion order.
pub(crate) fn enumerate_facets<F: Field>(dim: usize, gens: &[Vector<F>]) -> Vec<Vector<F>> {
    let n = gens.len();
    let mut basis = IncrementalBasis::new();
    let mut start = Vec::with_capacity(dim);
    for (i, g) in gens.iter().enumerate() {
        if let Some(r) = basis.reduce(g) {
            basis.push(r);
            start.push(i);
            if start.len() == dim {
                break;
            }
        }
    }
    if start.len() < dim {
        return Vec::new();
    }
    // {h : A0 h >= 0} has the columns of A0⁻¹ as extreme rays.
    let a0 = Matrix::from_rows(&start.iter().map(|&i| gens[i].clone()).collect::<Vec<_>>());
    let inv = a0.inverse().expect("independent rows");
    let mut rays: Vec<(Vector<F>, FixedBitSet)> = (0..dim)
        .map(|j| {
            let mut zero = FixedBitSet::with_capacity(n);
            for (k, &i) in start.iter().enumerate() {
                zero.set(i, k != j);
            }
            (normalize_integral(inv.col(j)), zero)
        })
        .collect();
    for (i, row) in gens.iter().enumerate() {
        if start.contains(&i) {
            continue;
        }
        let vals: Vec<F> = rays.iter().map(|(r, _)| dot(row, r)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&k| vals[k].is_pos() && !vals[k].near_zero()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&k| vals[k].is_neg() && !vals[k].near_zero()).collect();
        let mut next = Vec::with_capacity(rays.len());
        for (k, (r, z)) in rays.iter().enumerate() {
            if vals[k].near_zero() {
                let mut z = z.clone();
                z.insert(i);
                next.push((r.clone(), z));
            } else if vals[k].is_pos() {
                next.push((r.clone(), z.clone()));
            }
        }
        for &p in &pos {
            for &m in &neg {
                let mut common = rays[p].1.clone();
                common.intersect_with(&rays[m].1);
                if common.count_ones(..) + 2 < dim {
                    continue;
                }
                let adjacent = rays.iter().enumerate().all(|(k, (_, z))| k == p || k == m || !common.is_subset(z));
                if !adjacent {
                    continue;
                }
                let (rp, rm) = (&rays[p].0, &rays[m].0);
                let (vp, vm) = (vals[p].clone(), -vals[m].clone());
                let v: Vector<F> = rp.iter().zip(rm).map(|(a, b)| vm.clone() * a + vp.clone() * b).collect();
                common.insert(i);
                next.push((normalize_integral(v), common));
            }
        }
        rays = next;
    }
    let mut out: Vec<(Vec<usize>, Vector<F>)> = rays.into_iter().map(|(r, z)| (z.ones().collect(), r)).collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out.dedup_by(|a, b| positively_parallel(&a.1, &b.1));
    out.into_iter().map(|(_, r)| r).collect()
}

/// Rescales a ray to a tidy representative: for exact fields the primitive
/// integer vector, for floats unit max-norm.
fn normalize_integral<F: Field>(v: Vector<F>) -> Vector<F> {
    if F::EXACT {
        let qs: Vec<Q> = v.iter().map(Field::to_q).collect();
        let primitive = primitive_integer_vector(&qs);
        primitive.iter().map(F::from_q).collect()
    } else {
        let m = v.iter().map(|x| x.to_f64().abs()).fold(0.0, f64::max);
        if m == 0.0 {
            v
        } else {
            let s = F::from_float(1.0 / m);
            v.into_iter().map(|x| x * &s).collect()
        }
    }
}

/// The Hermitian PSD cone in a fixed orthonormal coordinatization.
#[derive(Clone, Debug, PartialEq)]
pub struct PsdCone {
    basis: Arc<HermitianBasis>,
}

impl PsdCone {
    pub fn new(hilbert_dim: usize) -> Self {
        PsdCone { basis: HermitianBasis::standard(hilbert_dim) }
    }

    pub fn with_basis(basis: Arc<HermitianBasis>) -> Self {
        PsdCone { basis }
    }

    pub fn basis(&self) -> &Arc<HermitianBasis> {
        &self.basis
    }

    pub fn hilbert_dim(&self) -> usize {
        self.basis.hilbert_dim()
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn min_eigenvalue<F: Field>(&self, x: &[F]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(min_eigenvalue(&self.basis.to_matrix(x)))
    }

    pub fn member<F: Field>(&self, x: &[F]) -> Result<bool> {
        Ok(self.min_eigenvalue(x)? >= -settings::tolerance())
    }

    /// Finite set of pure states that spans the cone: the `d` basis
    /// projectors, the `|j>+|k>` and `|j>+i|k>` projectors, then `samples`
    /// random pure states drawn from `stream`.
    pub fn probe_rays<F: Field>(&self, samples: usize, stream: u64) -> Vec<Vector<F>> {
        let d = self.hilbert_dim();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut out = Vec::new();
        for k in 0..d {
            let mut psi = vec![Complex64::new(0.0, 0.0); d];
            psi[k] = Complex64::new(1.0, 0.0);
            out.push(self.basis.projector_coords(&psi));
        }
        for phase in [Complex64::new(s, 0.0), Complex64::new(0.0, s)] {
            for j in 0..d {
                for k in j + 1..d {
                    let mut psi = vec![Complex64::new(0.0, 0.0); d];
                    psi[j] = Complex64::new(s, 0.0);
                    psi[k] = phase;
                    out.push(self.basis.projector_coords(&psi));
                }
            }
        }
        let mut rng = settings::rng(stream);
        for _ in 0..samples {
            out.push(self.basis.projector_coords(&random_unit_vector(d, &mut rng)));
        }
        out
    }
}

#[derive(Clone, Debug)]
pub enum Cone<F> {
    Polyhedral(PolyCone<F>),
    Psd(PsdCone),
}

impl<F: Field> Cone<F> {
    pub fn from_generators(gens: Vec<Vector<F>>) -> Result<Self> {
        PolyCone::from_generators(gens).map(Cone::Polyhedral)
    }

    pub fn from_facets(facets: Vec<Vector<F>>) -> Result<Self> {
        PolyCone::from_facets(facets).map(Cone::Polyhedral)
    }

    pub fn psd(hilbert_dim: usize) -> Self {
        Cone::Psd(PsdCone::new(hilbert_dim))
    }

    pub fn orthant(n: usize) -> Self {
        let gens = (0..n).map(|i| crate::linalg::unit_vec(n, i)).collect();
        Cone::Polyhedral(PolyCone::from_extreme_rays(n, gens))
    }

    pub fn dim(&self) -> usize {
        match self {
            Cone::Polyhedral(c) => c.dim(),
            Cone::Psd(c) => c.dim(),
        }
    }

    pub fn is_psd(&self) -> bool {
        matches!(self, Cone::Psd(_))
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Cone::Polyhedral(_) => "polyhedral",
            Cone::Psd(_) => "psd",
        }
    }

    pub fn as_poly(&self) -> Option<&PolyCone<F>> {
        match self {
            Cone::Polyhedral(c) => Some(c),
            Cone::Psd(_) => None,
        }
    }

    pub fn as_psd(&self) -> Option<&PsdCone> {
        match self {
            Cone::Psd(c) => Some(c),
            Cone::Polyhedral(_) => None,
        }
    }

    pub fn poly(&self, op: &'static str) -> Result<&PolyCone<F>> {
        self.as_poly().ok_or(ComError::UnsupportedKind(op))
    }

    pub fn member(&self, x: &[F]) -> Result<bool> {
        match self {
            Cone::Polyhedral(c) => c.member(x),
            Cone::Psd(c) => c.member(x),
        }
    }

    /// Polyhedral: representation swap. PSD: the cone itself (self-dual in
    /// the orthonormal coordinatization).
    pub fn dual(&self) -> Self {
        match self {
            Cone::Polyhedral(c) => Cone::Polyhedral(c.dual()),
            Cone::Psd(c) => Cone::Psd(c.clone()),
        }
    }

    pub fn is_self_dual_kind(&self) -> bool {
        self.is_psd()
    }

    pub fn interior_point(&self) -> Vector<F> {
        match self {
            Cone::Polyhedral(c) => c.interior_point(),
            Cone::Psd(c) => c.basis().identity_coords(),
        }
    }

    /// Rays on which cone-positivity is tested: all generators for
    /// polyhedral cones, a spanning set of pure states plus seeded samples
    /// for PSD cones.
    pub fn probe_rays(&self, stream: u64) -> Vec<Vector<F>> {
        match self {
            Cone::Polyhedral(c) => c.generators().to_vec(),
            Cone::Psd(c) => c.probe_rays(settings::PSD_SAMPLES, stream),
        }
    }

    /// Functionals certifying membership: facets (polyhedral) or probe
    /// rays (PSD, self-dual).
    pub fn probe_functionals(&self, stream: u64) -> Vec<Vector<F>> {
        match self {
            Cone::Polyhedral(c) => c.facets().to_vec(),
            Cone::Psd(c) => c.probe_rays(settings::PSD_SAMPLES, stream),
        }
    }

    pub fn same_cone(&self, other: &Cone<F>) -> bool {
        match (self, other) {
            (Cone::Polyhedral(a), Cone::Polyhedral(b)) => a.same_cone(b),
            (Cone::Psd(a), Cone::Psd(b)) => a == b,
            _ => false,
        }
    }

    /// Converts the scalar type (polyhedral data goes through `f64` when
    /// leaving exact arithmetic).
    pub fn convert<G: Field>(&self) -> Cone<G> {
        match self {
            Cone::Polyhedral(c) => {
                let conv = |v: &[Vector<F>]| -> Vec<Vector<G>> {
                    v.iter().map(|r| r.iter().map(|x| convert_scalar::<F, G>(x)).collect()).collect()
                };
                let out = PolyCone::from_extreme_rays(c.dim(), conv(c.generators()));
                let _ = out.facets.set(conv(c.facets()));
                Cone::Polyhedral(out)
            }
            Cone::Psd(c) => Cone::Psd(c.clone()),
        }
    }
}

pub fn convert_scalar<F: Field, G: Field>(x: &F) -> G {
    if F::EXACT && G::EXACT {
        G::from_q(&x.to_q())
    } else {
        G::from_float(x.to_f64())
    }
}
