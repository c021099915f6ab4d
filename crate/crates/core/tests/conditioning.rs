use comcat_core::composite::{max_tensor, min_tensor, spatial_quantum_composite};
use comcat_core::conditioning::{
    conditional_state, conditioning_map, marginals, remote_evaluate, remote_evaluate_dual, Bipartite,
};
use comcat_core::linalg::dot;
use comcat_core::models::{classical, gbit, maximally_entangled_structure, quantum};
use comcat_core::scalar::{q, qi, Q};
use comcat_core::settings;
use proptest::prelude::*;

fn rational_vec(n: usize) -> impl Strategy<Value = Vec<Q>> {
    prop::collection::vec((-9i64..=9, 1i64..=5), n).prop_map(|xs| xs.into_iter().map(|(a, b)| q(a, b)).collect())
}

fn shapes() -> impl Strategy<Value = (usize, usize, usize)> {
    (1usize..=3, 1usize..=3, 1usize..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    /// Both remote-evaluation identities are linear-algebra facts, so they
    /// hold exactly for arbitrary rational forms.
    #[test]
    fn remote_evaluation_is_exact(
        ((na, nb, nc), f, w, a, g) in shapes().prop_flat_map(|(na, nb, nc)| {
            (Just((na, nb, nc)), rational_vec(na * nb), rational_vec(nb * nc), rational_vec(na), rational_vec(nc))
        })
    ) {
        let f = Bipartite::new(f, na, nb).unwrap();
        let w = Bipartite::new(w, nb, nc).unwrap();
        let r = remote_evaluate(&f, &w, &a).unwrap();
        prop_assert_eq!(&r.result, &r.direct);
        prop_assert_eq!(r.residual, 0.0);
        // mirror: ω on (A)⊗(B) = f here, form on B⊗C = w
        let d = remote_evaluate_dual(&w, &f, &g).unwrap();
        prop_assert_eq!(d.result, d.direct);
    }

    #[test]
    fn swap_transposes_co_conditioning(xs in rational_vec(6)) {
        let w = Bipartite::new(xs, 2, 3).unwrap();
        prop_assert_eq!(w.swap().matrix(), w.matrix().transpose());
    }
}

#[test]
fn conditioning_is_closed_in_builtin_composites() {
    let mut rng = settings::rng(0xc0);
    for (a, b) in [(classical(2).unwrap(), classical(3).unwrap()), (gbit(), gbit()), (classical(2).unwrap(), gbit())] {
        for ab in [min_tensor(&a, &b).unwrap(), max_tensor(&a, &b).unwrap()] {
            for _ in 0..10 {
                let omega = Bipartite::new(ab.com().random_state(&mut rng), a.dim(), b.dim()).unwrap();
                let (ma, mb) = marginals(&omega, &a, &b).unwrap();
                assert_eq!(dot(a.unit(), &ma), qi(1));
                assert_eq!(dot(b.unit(), &mb), qi(1));
                for e in b.effect_cone().as_poly().unwrap().generators() {
                    match conditional_state(&omega, e, &a, &b) {
                        Ok(s) => {
                            assert_eq!(dot(a.unit(), &s), qi(1));
                            assert!(a.state_cone().member(&s).unwrap());
                        }
                        Err(comcat_core::ComError::ZeroProbabilityCondition) => {}
                        Err(e) => panic!("{e}"),
                    }
                }
            }
        }
    }
}

#[test]
fn qubit_bell_state() {
    let qubit = quantum(2).unwrap();
    let gamma = maximally_entangled_structure(2).unwrap().gamma;
    let (ma, mb) = marginals(&gamma, &qubit, &qubit).unwrap();
    let half_id: Vec<f64> = qubit.unit().iter().map(|x| x / 2.0).collect();
    assert!(comcat_core::linalg::vec_max_abs_diff(&ma, &half_id) < 1e-12);
    assert!(comcat_core::linalg::vec_max_abs_diff(&mb, &half_id) < 1e-12);
    // ω̂ is the transpose map divided by 2
    let w = conditioning_map(&gamma, &qubit, &qubit).unwrap();
    let t = qubit.state_cone().as_psd().unwrap().basis().transpose_map();
    assert!(w.max_abs_diff(&comcat_core::linalg::Matrix::from_fn(4, 4, |r, c| t[(r, c)] / 2.0)) < 1e-12);

    // f = P_Φ as an effect on A⊗B; ω = Φ on B⊗C: result α/4
    let ab = spatial_quantum_composite(&qubit, &qubit).unwrap();
    assert!(ab.com().effect_cone().member(&gamma.coords).unwrap());
    let mut rng = settings::rng(0xc1);
    for _ in 0..5 {
        let alpha = qubit.random_state(&mut rng);
        let r = remote_evaluate(&gamma, &gamma, &alpha).unwrap();
        let quarter: Vec<f64> = alpha.iter().map(|x| x / 4.0).collect();
        assert!(comcat_core::linalg::vec_max_abs_diff(&r.result, &quarter) < 1e-10);
        assert!(r.residual <= 1e-10);
    }
}

#[test]
fn classical_teleportation_data_is_proportional() {
    let corr = Bipartite::new(vec![q(1, 2), qi(0), qi(0), q(1, 2)], 2, 2).unwrap();
    let f = Bipartite::new(vec![qi(1), qi(0), qi(0), qi(1)], 2, 2).unwrap();
    let alpha = vec![q(1, 3), q(2, 3)];
    let r = remote_evaluate(&f, &corr, &alpha).unwrap();
    assert_eq!(r.result, vec![q(1, 6), q(1, 3)]);
}
