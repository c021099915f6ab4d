use comcat_core::com::{is_morphism, is_process, linear_adjoint, normalize_morphism, Com};
use comcat_core::linalg::{dot, Matrix};
use comcat_core::models::{classical, gbit, quantum};
use comcat_core::scalar::{q, qi, Q};
use comcat_core::ComError;
use proptest::prelude::*;

/// Nonnegative integer matrices map the orthant into itself, and so do
/// their transposes.
fn orthant_map(n: usize) -> impl Strategy<Value = Matrix<Q>> {
    prop::collection::vec(0i64..=3, n * n).prop_map(move |xs| Matrix::from_vec(n, n, xs.into_iter().map(qi).collect()))
}

/// Symmetries of the square (and scalings of them) preserve both gbit cones.
fn square_symmetry(k: usize, scale: i64) -> Matrix<Q> {
    let rot = Matrix::from_rows(&[vec![qi(0), qi(-1), qi(0)], vec![qi(1), qi(0), qi(0)], vec![qi(0), qi(0), qi(1)]]);
    let flip = Matrix::from_rows(&[vec![qi(1), qi(0), qi(0)], vec![qi(0), qi(-1), qi(0)], vec![qi(0), qi(0), qi(1)]]);
    let mut m = Matrix::identity(3);
    for _ in 0..k % 4 {
        m = rot.mul(&m);
    }
    if k >= 4 {
        m = flip.mul(&m);
    }
    m.scale(&qi(scale))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn morphisms_compose(phi in orthant_map(3), psi in orthant_map(3)) {
        let trit = classical(3).unwrap();
        prop_assert!(is_morphism(&phi, &trit, &trit).unwrap().is_morphism);
        prop_assert!(is_morphism(&psi.mul(&phi), &trit, &trit).unwrap().is_morphism);
    }

    #[test]
    fn gbit_symmetries_compose(a in 0usize..8, b in 0usize..8, s in 1i64..4) {
        let g = gbit();
        let (x, y) = (square_symmetry(a, s), square_symmetry(b, 1));
        prop_assert!(is_morphism(&x, &g, &g).unwrap().is_morphism);
        prop_assert!(is_morphism(&y.mul(&x), &g, &g).unwrap().is_morphism);
    }

    #[test]
    fn normalized_morphisms_are_tight_processes(phi in orthant_map(3)) {
        let trit = classical(3).unwrap();
        prop_assume!(!phi.is_zero_matrix());
        let (p, m) = normalize_morphism(&phi, &trit, &trit).unwrap();
        prop_assert!(is_process(&p, &trit, &trit).unwrap());
        prop_assert_eq!(p.scale(&m), phi);
        let best = trit.normalized_states(0).iter().map(|s| dot(trit.unit(), &p.mul_vec(s))).max().unwrap();
        prop_assert_eq!(best, qi(1));
    }

    #[test]
    fn adjoint_is_involutive(xs in prop::collection::vec(-9i64..=9, 12)) {
        let m = Matrix::from_vec(3, 4, xs.into_iter().map(|x| q(x, 7)).collect());
        prop_assert_eq!(linear_adjoint(&linear_adjoint(&m)), m);
    }

    #[test]
    fn effects_form_an_order_interval(seed in any::<u64>()) {
        use rand::SeedableRng;
        let g = gbit();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let a = g.random_effect(&mut rng);
        prop_assert!(g.is_effect(&a));
        let complement: Vec<Q> = g.unit().iter().zip(&a).map(|(u, x)| u - x).collect();
        prop_assert!(g.is_effect(&complement));
        // twice an effect that is not below u/2 leaves the interval
        let doubled: Vec<Q> = a.iter().map(|x| x * qi(2)).collect();
        let half_unit: Vec<Q> = g.unit().iter().map(|u| u * q(1, 2)).collect();
        let above_half = g.state_cone().as_poly().unwrap().generators().iter().any(|s| dot(&a, s) > dot(&half_unit, s));
        prop_assert_eq!(g.is_effect(&doubled), !above_half);
    }
}

fn bit() -> Com<Q> {
    classical(2).unwrap()
}

#[test]
fn processes_and_scaling() {
    let id = Matrix::<Q>::identity(2);
    assert!(is_process(&id, &bit(), &bit()).unwrap());
    assert!(!is_process(&id.scale(&qi(2)), &bit(), &bit()).unwrap());
    assert!(is_process(&id.scale(&q(1, 2)), &bit(), &bit()).unwrap());
    assert_eq!(normalize_morphism(&id.scale(&qi(2)), &bit(), &bit()).unwrap(), (id.clone(), qi(2)));
    assert_eq!(normalize_morphism(&id, &bit(), &bit()).unwrap().1, qi(1));
    assert_eq!(normalize_morphism(&Matrix::zeros(2, 2), &bit(), &bit()), Err(ComError::ZeroMap));
}

#[test]
fn negating_a_generator_is_not_a_morphism() {
    let phi = Matrix::from_rows(&[vec![qi(-1), qi(0)], vec![qi(0), qi(1)]]);
    let check = is_morphism(&phi, &bit(), &bit()).unwrap();
    assert!(!check.is_morphism);
    assert_eq!(check.violations[0].ray, vec!["1".to_string(), "0".to_string()]);
}

#[test]
fn qubit_transpose_and_depolarizer() {
    let qubit = quantum(2).unwrap();
    let basis = qubit.state_cone().as_psd().unwrap().basis().clone();
    let t = basis.transpose_map();
    let t = Matrix::from_fn(4, 4, |r, c| t[(r, c)]);
    assert!(is_morphism(&t, &qubit, &qubit).unwrap().is_morphism);
    // rho -> tr(rho) I/2
    let half_id: Vec<f64> = basis.identity_coords::<f64>().iter().map(|x| x / 2.0).collect();
    let dep = Matrix::from_fn(4, 4, |r, c| half_id[r] * qubit.unit()[c]);
    let (p, m) = normalize_morphism(&dep, &qubit, &qubit).unwrap();
    assert!((m - 1.0).abs() < 1e-12);
    assert!(p.approx_eq(&dep));
}
