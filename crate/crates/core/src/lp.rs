//! Two-phase primal simplex over a [`Field`], dense tableau, Bland's rule.
//!
//! With `Q` the solver is exact: returned points satisfy every constraint
//! exactly and an `Infeasible` answer is a certificate (phase one optimum is
//! strictly positive). Bland's rule rules out cycling.

use crate::error::{ComError, Result};
use crate::linalg::{dot, Vector};
use crate::scalar::Field;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Clone, Debug)]
pub struct Constraint<F> {
    pub coeffs: Vector<F>,
    pub relation: Relation,
    pub rhs: F,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpOutcome<F> {
    Optimal { point: Vector<F>, value: F },
    Infeasible,
    Unbounded,
}

/// A linear program in `num_vars` variables; variables are free unless
/// marked nonnegative.
#[derive(Clone, Debug)]
pub struct LinearProgram<F> {
    num_vars: usize,
    nonneg: Vec<bool>,
    constraints: Vec<Constraint<F>>,
}

impl<F: Field> LinearProgram<F> {
    pub fn new(num_vars: usize) -> Self {
        LinearProgram { num_vars, nonneg: vec![false; num_vars], constraints: Vec::new() }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn constraints(&self) -> &[Constraint<F>] {
        &self.constraints
    }

    pub fn set_nonneg(&mut self, var: usize) -> &mut Self {
        self.nonneg[var] = true;
        self
    }

    pub fn set_all_nonneg(&mut self) -> &mut Self {
        self.nonneg.iter_mut().for_each(|b| *b = true);
        self
    }

    pub fn is_nonneg(&self, var: usize) -> bool {
        self.nonneg[var]
    }

    pub fn add(&mut self, coeffs: Vector<F>, relation: Relation, rhs: F) -> &mut Self {
        assert_eq!(coeffs.len(), self.num_vars, "constraint width");
        self.constraints.push(Constraint { coeffs, relation, rhs });
        self
    }

    /// Adds a constraint given as `(variable, coefficient)` pairs.
    pub fn add_sparse(&mut self, terms: &[(usize, F)], relation: Relation, rhs: F) -> &mut Self {
        let mut coeffs = vec![F::zero(); self.num_vars];
        for (i, c) in terms {
            coeffs[*i] += c;
        }
        self.add(coeffs, relation, rhs)
    }

    /// Checks a point against every constraint and bound (exact for `Q`).
    pub fn satisfied_by(&self, x: &[F]) -> bool {
        if x.len() != self.num_vars {
            return false;
        }
        let bounds = x.iter().zip(&self.nonneg).all(|(v, nn)| !nn || v.is_nonneg());
        bounds
            && self.constraints.iter().all(|c| {
                let lhs = dot(&c.coeffs, x);
                let d = lhs - c.rhs.clone();
                match c.relation {
                    Relation::Le => !d.is_pos(),
                    Relation::Ge => d.is_nonneg(),
                    Relation::Eq => d.near_zero(),
                }
            })
    }

    pub fn feasible_point(&self) -> Option<Vector<F>> {
        match self.solve(None) {
            LpOutcome::Optimal { point, .. } => Some(point),
            _ => None,
        }
    }

    pub fn maximize(&self, objective: &[F]) -> LpOutcome<F> {
        assert_eq!(objective.len(), self.num_vars);
        self.solve(Some(objective))
    }

    pub fn minimize(&self, objective: &[F]) -> LpOutcome<F> {
        let neg: Vec<F> = objective.iter().map(|c| -c.clone()).collect();
        match self.solve(Some(&neg)) {
            LpOutcome::Optimal { point, value } => LpOutcome::Optimal { point, value: -value },
            other => other,
        }
    }

    fn solve(&self, objective: Option<&[F]>) -> LpOutcome<F> {
        let mut t = Tableau::build(self);
        if !t.phase_one() {
            return LpOutcome::Infeasible;
        }
        let costs = t.structural_costs(self, objective);
        if !t.phase_two(&costs) {
            return LpOutcome::Unbounded;
        }
        let point = t.recover(self);
        let value = objective.map_or_else(F::zero, |c| dot(c, &point));
        LpOutcome::Optimal { point, value }
    }
}

/// Feasibility of a constraint system; `None` certifies infeasibility.
pub fn lp_feasible<F: Field>(lp: &LinearProgram<F>) -> Option<Vector<F>> {
    lp.feasible_point()
}

pub fn lp_maximize<F: Field>(lp: &LinearProgram<F>, objective: &[F]) -> Result<(Vector<F>, F)> {
    match lp.maximize(objective) {
        LpOutcome::Optimal { point, value } => Ok((point, value)),
        LpOutcome::Infeasible => Err(ComError::Inconsistent("infeasible linear program".into())),
        LpOutcome::Unbounded => Err(ComError::Unbounded),
    }
}

/// Column layout: structural columns (free variables split in two), then
/// slack/surplus columns, then artificial columns.
struct Tableau<F> {
    rows: Vec<Vec<F>>, // each row: coefficients followed by rhs
    basis: Vec<usize>,
    ncols: usize,
    n_struct: usize,
    art_start: usize,
    // for each original variable: (positive column, negative column if free)
    var_cols: Vec<(usize, Option<usize>)>,
}

impl<F: Field> Tableau<F> {
    fn build(lp: &LinearProgram<F>) -> Self {
        let mut var_cols = Vec::with_capacity(lp.num_vars);
        let mut n_struct = 0;
        for v in 0..lp.num_vars {
            if lp.nonneg[v] {
                var_cols.push((n_struct, None));
                n_struct += 1;
            } else {
                var_cols.push((n_struct, Some(n_struct + 1)));
                n_struct += 2;
            }
        }
        // normalize rows to rhs >= 0
        let mut norm: Vec<(Vec<F>, Relation, F)> = lp
            .constraints
            .iter()
            .map(|c| {
                let mut row = vec![F::zero(); n_struct];
                for (v, a) in c.coeffs.iter().enumerate() {
                    if a.is_zero() {
                        continue;
                    }
                    let (p, n) = var_cols[v];
                    row[p] = a.clone();
                    if let Some(n) = n {
                        row[n] = -a.clone();
                    }
                }
                (row, c.relation, c.rhs.clone())
            })
            .collect();
        for (row, rel, rhs) in norm.iter_mut() {
            if rhs.is_neg() {
                row.iter_mut().for_each(|x| *x = -x.clone());
                *rhs = -rhs.clone();
                *rel = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
        }
        let n_slack = norm.iter().filter(|(_, r, _)| *r != Relation::Eq).count();
        let n_art = norm.iter().filter(|(_, r, _)| *r != Relation::Le).count();
        let art_start = n_struct + n_slack;
        let ncols = art_start + n_art;
        let mut rows = Vec::with_capacity(norm.len());
        let mut basis = Vec::with_capacity(norm.len());
        let (mut s, mut a) = (n_struct, art_start);
        for (coeffs, rel, rhs) in norm {
            let mut row = coeffs;
            row.resize(ncols + 1, F::zero());
            match rel {
                Relation::Le => {
                    row[s] = F::one();
                    basis.push(s);
                    s += 1;
                }
                Relation::Ge => {
                    row[s] = -F::one();
                    s += 1;
                    row[a] = F::one();
                    basis.push(a);
                    a += 1;
                }
                Relation::Eq => {
                    row[a] = F::one();
                    basis.push(a);
                    a += 1;
                }
            }
            row[ncols] = rhs;
            rows.push(row);
        }
        Tableau { rows, basis, ncols, n_struct, art_start, var_cols }
    }

    fn pivot(&mut self, r: usize, c: usize, obj: &mut [F]) {
        let inv = F::one() / self.rows[r][c].clone();
        for x in self.rows[r].iter_mut() {
            if !x.is_zero() {
                *x = x.clone() * &inv;
            }
        }
        let prow = self.rows[r].clone();
        let nz: Vec<usize> = (0..prow.len()).filter(|&k| !prow[k].is_zero()).collect();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let f = row[c].clone();
            for &k in &nz {
                let d = f.clone() * &prow[k];
                row[k] -= &d;
            }
            if !F::EXACT {
                row[c] = F::zero();
            }
        }
        if !obj[c].is_zero() {
            let f = obj[c].clone();
            for &k in &nz {
                let d = f.clone() * &prow[k];
                obj[k] -= &d;
            }
            if !F::EXACT {
                obj[c] = F::zero();
            }
        }
        self.basis[r] = c;
    }

    /// Maximizes using reduced-cost row `obj` (entries are `-c_j` adjusted by
    /// the basis; last entry is the objective value). Columns `>= limit` never enter.
    fn iterate(&mut self, obj: &mut Vec<F>, limit: usize) -> bool {
        loop {
            // Bland: lowest index with negative reduced cost
            let Some(c) = (0..limit).find(|&j| obj[j].is_neg()) else {
                return true;
            };
            let mut best: Option<(usize, F)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[c].is_pos() {
                    continue;
                }
                let ratio = row[self.ncols].clone() / row[c].clone();
                best = match best {
                    None => Some((i, ratio)),
                    Some((bi, br)) => {
                        let d = ratio.clone() - br.clone();
                        if d.is_neg() || (d.near_zero() && self.basis[i] < self.basis[bi]) {
                            Some((i, ratio))
                        } else {
                            Some((bi, br))
                        }
                    }
                };
            }
            let Some((r, _)) = best else {
                return false;
            };
            self.pivot(r, c, obj);
        }
    }

    fn phase_one(&mut self) -> bool {
        if self.art_start == self.ncols {
            return true;
        }
        // maximize -sum(artificials)
        let mut obj = vec![F::zero(); self.ncols + 1];
        for j in self.art_start..self.ncols {
            obj[j] = F::one();
        }
        for (i, &b) in self.basis.iter().enumerate() {
            if b >= self.art_start {
                for (o, x) in obj.iter_mut().zip(&self.rows[i]) {
                    *o -= x;
                }
            }
        }
        let ncols = self.ncols;
        self.iterate(&mut obj, ncols);
        // objective value is -(sum of artificials) = obj[ncols] with sign flip
        if !obj[self.ncols].near_zero() {
            return false;
        }
        // drive artificials out of the basis
        let mut i = 0;
        while i < self.rows.len() {
            if self.basis[i] >= self.art_start {
                match (0..self.art_start).find(|&j| !self.rows[i][j].near_zero()) {
                    Some(j) => {
                        let mut dummy = vec![F::zero(); self.ncols + 1];
                        self.pivot(i, j, &mut dummy);
                    }
                    None => {
                        self.rows.remove(i);
                        self.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        true
    }

    fn structural_costs(&self, lp: &LinearProgram<F>, objective: Option<&[F]>) -> Vec<F> {
        let mut costs = vec![F::zero(); self.ncols];
        if let Some(c) = objective {
            for (v, cv) in c.iter().enumerate() {
                let (p, n) = self.var_cols[v];
                costs[p] = cv.clone();
                if let Some(n) = n {
                    costs[n] = -cv.clone();
                }
            }
        }
        debug_assert_eq!(self.var_cols.len(), lp.num_vars);
        costs
    }

    fn phase_two(&mut self, costs: &[F]) -> bool {
        let mut obj: Vec<F> = costs.iter().map(|c| -c.clone()).collect();
        obj.push(F::zero());
        for (i, &b) in self.basis.iter().enumerate() {
            if !costs[b].is_zero() {
                let f = costs[b].clone();
                for (o, x) in obj.iter_mut().zip(&self.rows[i]) {
                    if !x.is_zero() {
                        let d = f.clone() * x;
                        *o += &d;
                    }
                }
            }
        }
        let limit = self.art_start;
        self.iterate(&mut obj, limit)
    }

    fn recover(&self, lp: &LinearProgram<F>) -> Vector<F> {
        let mut col_val = vec![F::zero(); self.ncols];
        for (i, &b) in self.basis.iter().enumerate() {
            col_val[b] = self.rows[i][self.ncols].clone();
        }
        let _ = self.n_struct;
        (0..lp.num_vars)
            .map(|v| {
                let (p, n) = self.var_cols[v];
                match n {
                    Some(n) => col_val[p].clone() - col_val[n].clone(),
                    None => col_val[p].clone(),
                }
            })
            .collect()
    }
}
