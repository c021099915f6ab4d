//! Linear maps carrying the extreme rays of one polyhedral cone bijectively
//! onto the extreme rays of another.
//!
//! The search runs over bijections in lexicographic order, prunes by facet
//! degree and ray adjacency (both preserved by linear cone isomorphisms),
//! and solves one LP per surviving bijection.

use crate::cone::PolyCone;
use crate::linalg::{dot, scale_vec, Matrix, Vector};
use crate::lp::{LinearProgram, Relation};
use crate::scalar::Field;

#[derive(Clone, Copy, Debug, Default)]
pub struct MatchOptions {
    /// Require `Φ = Φᵀ`.
    pub symmetric: bool,
}

/// Combinatorial data of a cone's extreme rays.
struct RayGraph {
    degree: Vec<usize>,
    adjacent: Vec<Vec<bool>>,
}

impl RayGraph {
    fn new<F: Field>(dim: usize, rays: &[Vector<F>], facets: &[Vector<F>]) -> Self {
        let tight: Vec<Vec<usize>> = rays
            .iter()
            .map(|r| (0..facets.len()).filter(|&k| dot(&facets[k], r).near_zero()).collect())
            .collect();
        let degree = tight.iter().map(Vec::len).collect();
        let k = rays.len();
        let mut adjacent = vec![vec![false; k]; k];
        for i in 0..k {
            for j in i + 1..k {
                let common: Vec<Vector<F>> = tight[i]
                    .iter()
                    .filter(|f| tight[j].contains(f))
                    .map(|&f| facets[f].clone())
                    .collect();
                let adj = dim < 2 || (dim == 2 && common.is_empty()) || crate::linalg::rank_of(&common) + 2 == dim;
                adjacent[i][j] = adj;
                adjacent[j][i] = adj;
            }
        }
        RayGraph { degree, adjacent }
    }
}

/// Finds `Φ` (an `n x n` matrix) with `Φ src_i = λ_i dst_π(i)`, `λ_i >= 1`
/// for the lexicographically first bijection `π` admitting one and for
/// which `accept(Φ)` holds. Returns `(Φ, π)`.
///
/// With `units = Some((u_src, u_dst))` the map must also satisfy
/// `u_dst ∘ Φ = u_src`; rays are then normalized and matched without
/// rescaling.
pub fn find_ray_matching<F: Field>(
    src: &PolyCone<F>,
    dst: &PolyCone<F>,
    units: Option<(&[F], &[F])>,
    opts: MatchOptions,
    accept: &mut dyn FnMut(&Matrix<F>) -> bool,
) -> Option<(Matrix<F>, Vec<usize>)> {
    let n = src.dim();
    if dst.dim() != n {
        return None;
    }
    let (sr, dr) = (src.generators(), dst.generators());
    if sr.len() != dr.len() {
        return None;
    }
    let normalize = |rays: &[Vector<F>], u: &[F]| -> Vec<Vector<F>> {
        rays.iter().map(|r| scale_vec(r, &(F::one() / dot(u, r)))).collect()
    };
    let (sr, dr) = match units {
        Some((us, ud)) => (normalize(sr, us), normalize(dr, ud)),
        None => (sr.to_vec(), dr.to_vec()),
    };
    let exact_scale = units.is_some();
    let sg = RayGraph::new(n, &sr, src.facets());
    let dg = RayGraph::new(n, &dr, dst.facets());
    let mut search = Search { n, src: &sr, dst: &dr, sg, dg, opts, exact_scale, perm: Vec::new(), used: vec![false; dr.len()] };
    search.dfs(accept)
}

struct Search<'a, F> {
    n: usize,
    src: &'a [Vector<F>],
    dst: &'a [Vector<F>],
    sg: RayGraph,
    dg: RayGraph,
    opts: MatchOptions,
    exact_scale: bool,
    perm: Vec<usize>,
    used: Vec<bool>,
}

impl<F: Field> Search<'_, F> {
    fn dfs(&mut self, accept: &mut dyn FnMut(&Matrix<F>) -> bool) -> Option<(Matrix<F>, Vec<usize>)> {
        let i = self.perm.len();
        if i == self.src.len() {
            let phi = self.solve()?;
            return accept(&phi).then(|| (phi, self.perm.clone()));
        }
        for j in 0..self.dst.len() {
            if self.used[j] || self.sg.degree[i] != self.dg.degree[j] {
                continue;
            }
            let consistent = self
                .perm
                .iter()
                .enumerate()
                .all(|(i2, &j2)| self.sg.adjacent[i][i2] == self.dg.adjacent[j][j2]);
            if !consistent {
                continue;
            }
            self.used[j] = true;
            self.perm.push(j);
            let found = self.dfs(accept);
            self.perm.pop();
            self.used[j] = false;
            if found.is_some() {
                return found;
            }
        }
        None
    }

    /// Variables: `Φ` row-major (`n*n`, free), then `λ` (one per ray).
    fn solve(&self) -> Option<Matrix<F>> {
        let n = self.n;
        let k = self.src.len();
        let nv = n * n + if self.exact_scale { 0 } else { k };
        let mut lp = LinearProgram::new(nv);
        for (i, g) in self.src.iter().enumerate() {
            let h = &self.dst[self.perm[i]];
            for r in 0..n {
                let mut terms: Vec<(usize, F)> = (0..n).map(|c| (r * n + c, g[c].clone())).collect();
                if self.exact_scale {
                    lp.add_sparse(&terms, Relation::Eq, h[r].clone());
                } else {
                    terms.push((n * n + i, -h[r].clone()));
                    lp.add_sparse(&terms, Relation::Eq, F::zero());
                }
            }
            if !self.exact_scale {
                lp.set_nonneg(n * n + i);
                lp.add_sparse(&[(n * n + i, F::one())], Relation::Ge, F::one());
            }
        }
        if self.opts.symmetric {
            for r in 0..n {
                for c in r + 1..n {
                    lp.add_sparse(&[(r * n + c, F::one()), (c * n + r, -F::one())], Relation::Eq, F::zero());
                }
            }
        }
        let x = lp.feasible_point()?;
        let phi = Matrix::from_vec(n, n, x[..n * n].to_vec());
        (phi.rank() == n).then_some(phi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{q, qi, Q};

    fn v(xs: &[i64]) -> Vector<Q> {
        xs.iter().map(|&x| qi(x)).collect()
    }

    #[test]
    fn square_to_its_dual() {
        let s = PolyCone::from_extreme_rays(3, vec![v(&[1, 1, 1]), v(&[-1, 1, 1]), v(&[-1, -1, 1]), v(&[1, -1, 1])]);
        let d = PolyCone::from_extreme_rays(3, vec![v(&[1, 0, 1]), v(&[0, 1, 1]), v(&[-1, 0, 1]), v(&[0, -1, 1])]);
        let (phi, perm) = find_ray_matching(&s, &d, None, MatchOptions::default(), &mut |_| true).unwrap();
        assert_eq!(perm, vec![0, 1, 2, 3]);
        let half = q(1, 2);
        let want = Matrix::from_rows(&[
            vec![half.clone(), half.clone(), qi(0)],
            vec![-half.clone(), half.clone(), qi(0)],
            vec![qi(0), qi(0), qi(1)],
        ]);
        assert_eq!(phi, want);
        let sym = MatchOptions { symmetric: true };
        let (phi, perm) = find_ray_matching(&s, &d, None, sym, &mut |_| true).unwrap();
        assert_eq!(perm, vec![0, 3, 2, 1]);
        assert!(phi.is_symmetric());
    }

    #[test]
    fn unit_preserving_matching_of_simplices() {
        let a = PolyCone::from_extreme_rays(2, vec![v(&[1, 0]), v(&[0, 1])]);
        let b = PolyCone::from_extreme_rays(2, vec![v(&[2, 0]), v(&[0, 3])]);
        let ua = v(&[1, 1]);
        let ub = vec![q(1, 2), q(1, 3)];
        let (phi, _) = find_ray_matching(&a, &b, Some((&ua, &ub)), MatchOptions::default(), &mut |_| true).unwrap();
        assert_eq!(phi, Matrix::from_rows(&[vec![qi(2), qi(0)], vec![qi(0), qi(3)]]));
    }

    #[test]
    fn different_ray_counts_never_match() {
        let s = PolyCone::from_extreme_rays(2, vec![v(&[1, 0]), v(&[0, 1])]);
        let t = PolyCone::<Q>::from_generators(vec![v(&[1, 0, 0]), v(&[0, 1, 0]), v(&[0, 0, 1])]).unwrap();
        assert!(find_ray_matching(&s, &t, None, MatchOptions::default(), &mut |_| true).is_none());
    }
}
