use comcat_core::com::{is_morphism, Com};
use comcat_core::linalg::Matrix;
use comcat_core::models::{classical, gbit, maximally_entangled_structure, pentagon, quantum, AnyCom, AnyStructure, StructureRegistry};
use comcat_core::protocols::verify_compact_structure;
use comcat_core::scalar::{q, Field, Q};
use comcat_core::selfdual::{
    canonical_adjoint, check_symmetric_self_duality, check_weak_self_duality, counit_dual_check, dagger_compactness_verdict,
    double_dual_check, is_strongly_self_dual, symmetry_equivalence_report, verify_structure, DualityStructure,
};
use proptest::prelude::*;

const NAMES: [&str; 6] = ["classical2", "classical3", "quantum2", "qubit", "gbit-rotation", "gbit-reflection"];

fn invariants<F: Field>(a: &Com<F>, d: &DualityStructure<F>) {
    let rep = verify_structure(d, a).unwrap();
    assert!(rep.passed, "{}: {:?}", d.label, rep.violations);
    let t = symmetry_equivalence_report(d).unwrap();
    assert!(t.consistent, "{}: {t:?}", d.label);
    assert_eq!(t.witness.is_none(), t.i);
    assert_eq!(rep.tau_is_identity, t.ii);
    assert!(counit_dual_check(d).holds, "{}", d.label);
    assert!(verify_compact_structure(&d.compact_structure()).unwrap().passed);
    // φ″ is conjugation by τ for every matrix unit
    let n = d.dim();
    for r in 0..n {
        for c in 0..n {
            let mut e = Matrix::<F>::zeros(n, n);
            e[(r, c)] = F::one();
            let dd = double_dual_check(&e, d, d).unwrap();
            assert!(dd.residual_vs_conjugation <= 1e-10, "{} E_{r}{c}: {dd:?}", d.label);
        }
    }
}

#[test]
fn builtin_structures_satisfy_every_invariant() {
    let reg = StructureRegistry::builtin();
    for name in NAMES {
        match reg.resolve(name).unwrap() {
            (AnyCom::Exact(a), AnyStructure::Exact(d)) => invariants(&a, &d),
            (AnyCom::Float(a), AnyStructure::Float(d)) => invariants(&a, &d),
            _ => panic!("{name}: mixed scalar modes"),
        }
    }
}

#[test]
fn expected_symmetry_equivalence_patterns() {
    let reg = StructureRegistry::builtin();
    let pattern = |name: &str| match reg.resolve(name).unwrap().1 {
        AnyStructure::Exact(d) => {
            let t = symmetry_equivalence_report(&d).unwrap();
            (t.i, t.ii, t.iii)
        }
        AnyStructure::Float(d) => {
            let t = symmetry_equivalence_report(&d).unwrap();
            (t.i, t.ii, t.iii)
        }
    };
    assert_eq!(pattern("classical2"), (true, true, true));
    assert_eq!(pattern("gbit-reflection"), (true, true, true));
    assert_eq!(pattern("qubit"), (true, true, true));
    assert_eq!(pattern("gbit-rotation"), (false, false, false));
}

#[test]
fn searched_structures_are_valid() {
    for a in [classical(2).unwrap(), classical(4).unwrap(), gbit(), pentagon()] {
        let weak = check_weak_self_duality(&a).unwrap().unwrap_or_else(|| panic!("{} is weakly self-dual", a.label()));
        assert!(verify_structure(&weak, &a).unwrap().passed);
        let sym = check_symmetric_self_duality(&a).unwrap().unwrap();
        assert!(verify_structure(&sym, &a).unwrap().passed);
        assert!(sym.g().is_symmetric() && sym.f_matrix().is_symmetric());
        assert!(symmetry_equivalence_report(&sym).unwrap().ii);
    }
}

#[test]
fn strong_self_duality() {
    assert!(is_strongly_self_dual(&classical(3).unwrap()).unwrap().strongly_self_dual);
    assert!(is_strongly_self_dual(&quantum(2).unwrap()).unwrap().strongly_self_dual);
    let g = is_strongly_self_dual(&gbit()).unwrap();
    assert!(!g.strongly_self_dual);
    assert_eq!(g.negative_eigenvalues, 1);
}

#[test]
fn dagger_verdicts() {
    let reg = StructureRegistry::builtin();
    let exact = |names: &[&str]| -> Vec<(Com<Q>, DualityStructure<Q>)> {
        names
            .iter()
            .map(|n| match reg.resolve(n).unwrap() {
                (AnyCom::Exact(a), AnyStructure::Exact(d)) => (a, d),
                _ => unreachable!(),
            })
            .collect()
    };
    assert!(dagger_compactness_verdict(&exact(&["classical2", "classical3"])).unwrap().dagger_compact);
    assert!(dagger_compactness_verdict(&exact(&["gbit-reflection"])).unwrap().dagger_compact);
    assert!(!dagger_compactness_verdict(&exact(&["gbit-rotation"])).unwrap().dagger_compact);
    assert!(!dagger_compactness_verdict::<Q>(&[]).unwrap().dagger_compact);
}

fn gbit_structures() -> [DualityStructure<Q>; 2] {
    [comcat_core::models::gbit_rotation_structure(), comcat_core::models::gbit_reflection_structure()]
}

fn small_matrix() -> impl Strategy<Value = Matrix<Q>> {
    prop::collection::vec((-4i64..=4, 1i64..=3), 9).prop_map(|xs| Matrix::from_vec(3, 3, xs.into_iter().map(|(a, b)| q(a, b)).collect()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The canonical adjoint is contravariant for any pair of structures.
    #[test]
    fn adjoint_reverses_composition(phi in small_matrix(), psi in small_matrix(), i in 0usize..2, j in 0usize..2, k in 0usize..2) {
        let s = gbit_structures();
        let (da, db, dc) = (&s[i], &s[j], &s[k]);
        let lhs = canonical_adjoint(&psi.mul(&phi), da, dc).unwrap();
        let rhs = canonical_adjoint(&phi, da, db).unwrap().mul(&canonical_adjoint(&psi, db, dc).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    /// With symmetric structures the adjoint is an involution.
    #[test]
    fn symmetric_adjoint_is_involutive(phi in small_matrix()) {
        let d = comcat_core::models::gbit_reflection_structure();
        let twice = canonical_adjoint(&canonical_adjoint(&phi, &d, &d).unwrap(), &d, &d).unwrap();
        prop_assert_eq!(twice, phi);
    }
}

/// For a channel with Kraus operators `K`, the canonical adjoint under the
/// Choi structure is `ρ ↦ (Σ K† ρᵀ K)ᵀ`: the Hilbert–Schmidt adjoint
/// conjugated by the transpose.
#[test]
fn qubit_adjoint_matches_transpose_oracle() {
    use comcat_core::cone::psd::CMatrix;
    use num_complex::Complex64 as C;
    let qubit = quantum(2).unwrap();
    let basis = qubit.state_cone().as_psd().unwrap().basis().clone();
    let d = maximally_entangled_structure(2).unwrap();
    let s = 0.6f64.sqrt();
    let kraus = [
        CMatrix::from_row_slice(2, 2, &[C::new(s, 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0), C::new(0.3, 0.4)]),
        CMatrix::from_row_slice(2, 2, &[C::new(0.0, 0.0), C::new(0.4f64.sqrt(), 0.0), C::new(0.0, 0.0), C::new(0.0, 0.0)]),
    ];
    let apply = |f: &dyn Fn(&CMatrix) -> CMatrix| Matrix::from_cols(&(0..4).map(|j| basis.coords::<f64>(&f(basis.element(j)))).collect::<Vec<_>>());
    let phi = apply(&|rho| kraus.iter().map(|k| k * rho * k.adjoint()).sum());
    let oracle = apply(&|rho| kraus.iter().map(|k| k.adjoint() * rho.transpose() * k).sum::<CMatrix>().transpose());
    assert!(is_morphism(&phi, &qubit, &qubit).unwrap().is_morphism);
    let adj = canonical_adjoint(&phi, &d, &d).unwrap();
    assert!(adj.max_abs_diff(&oracle) < 1e-10, "{}", adj.max_abs_diff(&oracle));
}
