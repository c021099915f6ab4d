use comcat_core::cone::{same_ray_set, Cone, PolyCone};
use comcat_core::linalg::{dot, positively_parallel, Matrix, Vector};
use comcat_core::lp::{LinearProgram, Relation};
use comcat_core::scalar::{qi, Q};
use comcat_core::ComError;
use proptest::prelude::*;

fn v(xs: &[i64]) -> Vector<Q> {
    xs.iter().map(|&x| qi(x)).collect()
}

/// Rays over a polygon in the plane `z > 0`, so the cone is pointed.
fn polygon_rays() -> impl Strategy<Value = Vec<Vector<Q>>> {
    prop::collection::vec((-4i64..=4, -4i64..=4, 1i64..=3), 3..=8)
        .prop_map(|rs| rs.into_iter().map(|(x, y, z)| v(&[x, y, z])).collect())
}

fn cone_of(rays: Vec<Vector<Q>>) -> Option<PolyCone<Q>> {
    match PolyCone::from_generators(rays) {
        Ok(c) => Some(c),
        Err(ComError::NotGenerating { .. }) => None,
        Err(e) => panic!("unexpected error {e}"),
    }
}

/// Oracle: every `(dim-1)`-subset of generators whose span is a
/// hyperplane, keeping the one-signed normals.
fn brute_force_facets(dim: usize, gens: &[Vector<Q>]) -> Vec<Vector<Q>> {
    fn subsets(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            subsets(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut all = Vec::new();
    subsets(gens.len(), dim - 1, 0, &mut Vec::new(), &mut all);
    let mut facets: Vec<Vector<Q>> = Vec::new();
    for s in all {
        let rows: Vec<Vector<Q>> = s.iter().map(|&i| gens[i].clone()).collect();
        let ns = Matrix::from_rows(&rows).nullspace();
        if ns.len() != 1 {
            continue;
        }
        let mut h = ns[0].clone();
        let vals: Vec<Q> = gens.iter().map(|g| dot(&h, g)).collect();
        if vals.iter().any(|v| *v > qi(0)) && vals.iter().any(|v| *v < qi(0)) {
            continue;
        }
        if vals.iter().any(|v| *v < qi(0)) {
            h = h.into_iter().map(|x| -x).collect();
        }
        if !facets.iter().any(|f| positively_parallel(f, &h)) {
            facets.push(h);
        }
    }
    facets
}

/// Rays over a random polytope in the slice `x_last > 0` of 4-space.
fn polytope_rays() -> impl Strategy<Value = Vec<Vector<Q>>> {
    prop::collection::vec((-3i64..=3, -3i64..=3, -3i64..=3, 1i64..=2), 4..=10)
        .prop_map(|rs| rs.into_iter().map(|(x, y, z, w)| v(&[x, y, z, w])).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn facets_match_brute_force(rays in prop_oneof![polygon_rays(), polytope_rays()]) {
        let Some(c) = cone_of(rays) else { return Ok(()) };
        let oracle = brute_force_facets(c.dim(), c.generators());
        prop_assert!(same_ray_set(c.facets(), &oracle), "{:?} vs {:?}", c.facets(), oracle);
    }

    #[test]
    fn double_dual_is_identity(rays in polygon_rays()) {
        let Some(c) = cone_of(rays) else { return Ok(()) };
        prop_assert!(c.dual().dual().same_cone(&c));
        // dual computed from scratch by facet enumeration, twice
        let again = PolyCone::from_generators(c.facets().to_vec()).unwrap();
        let back = PolyCone::from_generators(again.facets().to_vec()).unwrap();
        prop_assert!(back.same_cone(&c));
    }

    #[test]
    fn generators_and_facets_are_members(rays in polygon_rays()) {
        let Some(c) = cone_of(rays) else { return Ok(()) };
        for g in c.generators() {
            prop_assert!(c.member(g).unwrap());
        }
        let d = c.dual();
        for h in c.facets() {
            prop_assert!(d.member(h).unwrap());
        }
        // every facet is tight on dim - 1 independent generators
        for h in c.facets() {
            let tight: Vec<Vector<Q>> = c.tight_generators(h).into_iter().map(|i| c.generators()[i].clone()).collect();
            prop_assert_eq!(comcat_core::linalg::rank_of(&tight), c.dim() - 1);
        }
    }

    #[test]
    fn interior_point_is_strict(rays in polygon_rays()) {
        let Some(c) = cone_of(rays) else { return Ok(()) };
        let p = c.interior_point();
        for h in c.facets() {
            prop_assert!(dot(h, &p) > qi(0));
        }
    }

    /// Bounded 2-variable systems: feasibility agrees with brute-force
    /// vertex enumeration.
    #[test]
    fn lp_feasibility_matches_vertex_enumeration(
        rows in prop::collection::vec((-3i64..=3, -3i64..=3, -6i64..=6), 1..=5)
    ) {
        let mut cons: Vec<(Vector<Q>, Q)> = rows.iter().map(|&(a, b, c)| (v(&[a, b]), qi(c))).collect();
        for (a, b) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            cons.push((v(&[a, b]), qi(10)));
        }
        let mut lp = LinearProgram::new(2);
        for (a, b) in &cons {
            lp.add(a.clone(), Relation::Le, b.clone());
        }
        let sat = |x: &[Q]| cons.iter().all(|(a, b)| dot(a, x) <= *b);
        let mut brute = false;
        for i in 0..cons.len() {
            for j in i + 1..cons.len() {
                let (a, b) = (&cons[i].0, &cons[j].0);
                let det = a[0].clone() * &b[1] - a[1].clone() * &b[0];
                if det == qi(0) {
                    continue;
                }
                let x = (cons[i].1.clone() * &b[1] - cons[j].1.clone() * &a[1]) / det.clone();
                let y = (a[0].clone() * &cons[j].1 - b[0].clone() * &cons[i].1) / det;
                brute |= sat(&[x, y]);
            }
        }
        let found = lp.feasible_point();
        prop_assert_eq!(found.is_some(), brute);
        if let Some(x) = found {
            prop_assert!(lp.satisfied_by(&x));
        }
    }
}

#[test]
fn square_cone_facets() {
    let c = PolyCone::from_generators(vec![v(&[1, 1, 1]), v(&[-1, 1, 1]), v(&[1, -1, 1]), v(&[-1, -1, 1])]).unwrap();
    assert_eq!(c.facets().len(), 4);
    for h in c.facets() {
        assert_eq!(c.tight_generators(h).len(), 2);
    }
    assert_eq!(c.interior_point(), v(&[0, 0, 4]));
}

#[test]
fn construction_errors() {
    let line = vec![v(&[1, 1]), v(&[-1, 1]), v(&[1, -1]), v(&[-1, -1])];
    assert_eq!(PolyCone::from_generators(line).unwrap_err(), ComError::NotPointed);
    assert!(matches!(PolyCone::from_generators(vec![v(&[1, 0]), v(&[1, 0, 0])]), Err(ComError::DimensionMismatch { .. })));
    assert!(PolyCone::<Q>::from_generators(vec![]).is_err());
}

#[test]
fn psd_membership_and_duality() {
    let c: Cone<f64> = Cone::psd(2);
    let basis = c.as_psd().unwrap().basis().clone();
    let m = nalgebra_free_matrix(&basis, [[1.0, 2.0], [2.0, 1.0]]);
    assert!(!c.member(&m).unwrap());
    let id = basis.identity_coords::<f64>();
    assert!(c.member(&id).unwrap());
    assert!(c.dual().same_cone(&c));
    assert_eq!(c.interior_point(), id);
}

fn nalgebra_free_matrix(basis: &comcat_core::cone::psd::HermitianBasis, rows: [[f64; 2]; 2]) -> Vec<f64> {
    let m = comcat_core::cone::psd::CMatrix::from_fn(2, 2, |r, c| num_complex::Complex64::new(rows[r][c], 0.0));
    basis.coords(&m)
}
