//! Dense two-phase simplex.
//!
//! Problems are stated over variables with finite lower bounds and rows with
//! `≤`, `≥` or `=` relations. Pricing is Dantzig's largest-coefficient rule
//! with lowest-index tie breaking; after a run of degenerate pivots the solver
//! switches to Bland's rule until the objective moves again. The final basis
//! is re-solved against the original matrix, so reported values do not carry
//! the tableau's accumulated rounding.

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    sense: Sense,
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
    lower_bounds: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Variable values; empty unless optimal.
    pub values: Vec<f64>,
    /// Objective in the caller's sense; NaN unless optimal.
    pub objective: f64,
    pub pivots: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

impl LinearProgram {
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            sense,
            objective,
            constraints: Vec::new(),
            lower_bounds: vec![0.0; n],
        }
    }

    pub fn add_constraint(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) -> &mut Self {
        self.constraints.push(Constraint { coeffs, relation, rhs });
        self
    }

    pub fn set_lower_bound(&mut self, var: usize, bound: f64) -> &mut Self {
        self.lower_bounds[var] = bound;
        self
    }

    pub fn sense(&self) -> Sense {
        self.sense
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn lower_bounds(&self) -> &[f64] {
        &self.lower_bounds
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.num_vars();
        if n == 0 {
            return Err(Error::DimensionMismatch("no variables".into()));
        }
        if self.lower_bounds.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "{} lower bounds for {n} variables",
                self.lower_bounds.len()
            )));
        }
        if self.objective.iter().chain(&self.lower_bounds).any(|v| !v.is_finite()) {
            return Err(invalid("objective and bounds must be finite"));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.coeffs.len() != n {
                return Err(Error::DimensionMismatch(format!(
                    "row {i} has {} coefficients, expected {n}",
                    c.coeffs.len()
                )));
            }
            if !c.rhs.is_finite() || c.coeffs.iter().any(|v| !v.is_finite()) {
                return Err(invalid(format!("row {i} has a non-finite entry")));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }

    /// Largest violation of any row or lower bound at `x` (0 if feasible).
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.constraints.iter().map(|c| {
            let lhs = dot(&c.coeffs, x);
            match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            }
        });
        let bounds = x.iter().zip(&self.lower_bounds).map(|(v, lb)| lb - v);
        rows.chain(bounds).fold(0.0, f64::max)
    }

    pub fn solve(&self) -> Result<LpSolution> {
        solve(self)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

const COST_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const DEGENERATE_RUN: usize = 50;
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColumnKind {
    Structural,
    Slack,
    Artificial,
}

/// Standard form `A x = b`, `x ≥ 0`, `b ≥ 0` after shifting by the lower
/// bounds and flipping rows with negative right-hand sides.
struct StandardForm {
    m: usize,
    n: usize,
    a: Vec<f64>,
    b: Vec<f64>,
    kinds: Vec<ColumnKind>,
    initial_basis: Vec<usize>,
}

impl StandardForm {
    fn build(lp: &LinearProgram) -> Self {
        let nv = lp.num_vars();
        let m = lp.num_constraints();
        let mut rows = Vec::with_capacity(m);
        for c in &lp.constraints {
            let mut rhs = c.rhs - dot(&c.coeffs, &lp.lower_bounds);
            let mut coeffs = c.coeffs.clone();
            let mut rel = c.relation;
            if rhs < 0.0 {
                rhs = -rhs;
                coeffs.iter_mut().for_each(|v| *v = -*v);
                rel = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
            rows.push((coeffs, rel, rhs));
        }
        let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
        let n = nv + n_slack + n_art;
        let mut kinds = vec![ColumnKind::Structural; nv];
        kinds.extend(std::iter::repeat_n(ColumnKind::Slack, n_slack));
        kinds.extend(std::iter::repeat_n(ColumnKind::Artificial, n_art));
        let mut a = vec![0.0; m * n];
        let mut b = vec![0.0; m];
        let mut basis = vec![0; m];
        let (mut next_slack, mut next_art) = (nv, nv + n_slack);
        for (i, (coeffs, rel, rhs)) in rows.into_iter().enumerate() {
            let row = &mut a[i * n..(i + 1) * n];
            row[..nv].copy_from_slice(&coeffs);
            b[i] = rhs;
            match rel {
                Relation::Le => {
                    row[next_slack] = 1.0;
                    basis[i] = next_slack;
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -1.0;
                    next_slack += 1;
                    row[next_art] = 1.0;
                    basis[i] = next_art;
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = 1.0;
                    basis[i] = next_art;
                    next_art += 1;
                }
            }
        }
        Self {
            m,
            n,
            a,
            b,
            kinds,
            initial_basis: basis,
        }
    }
}

/// Simplex tableau; column `n` holds the right-hand side.
struct Tableau {
    m: usize,
    n: usize,
    t: Vec<f64>,
    cost: Vec<f64>,
    basis: Vec<usize>,
    enterable: Vec<bool>,
    pivots: usize,
}

enum Outcome {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn width(&self) -> usize {
        self.n + 1
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.t[r * self.width() + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.n)
    }

    /// Installs cost vector `c` and prices out the current basis.
    fn set_costs(&mut self, c: &[f64]) {
        let w = self.width();
        self.cost = c.to_vec();
        self.cost.push(0.0);
        for r in 0..self.m {
            let f = self.cost[self.basis[r]];
            if f != 0.0 {
                let row = &self.t[r * w..(r + 1) * w];
                for (cv, rv) in self.cost.iter_mut().zip(row) {
                    *cv -= f * rv;
                }
            }
        }
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width();
        let p = self.t[pr * w + pc];
        for v in &mut self.t[pr * w..(pr + 1) * w] {
            *v /= p;
        }
        let pivot_row = self.t[pr * w..(pr + 1) * w].to_vec();
        for r in 0..self.m {
            if r == pr {
                continue;
            }
            let f = self.t[r * w + pc];
            if f != 0.0 {
                for (v, pv) in self.t[r * w..(r + 1) * w].iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                self.t[r * w + pc] = 0.0;
            }
        }
        let f = self.cost[pc];
        if f != 0.0 {
            for (v, pv) in self.cost.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
            self.cost[pc] = 0.0;
        }
        self.basis[pr] = pc;
        self.pivots += 1;
    }

    fn entering(&self, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for j in 0..self.n {
            if !self.enterable[j] || self.cost[j] >= -COST_TOL {
                continue;
            }
            if bland {
                return Some(j);
            }
            // Strict comparison keeps the lowest index among ties.
            if best.is_none_or(|(_, v)| self.cost[j] < v) {
                best = Some((j, self.cost[j]));
            }
        }
        best.map(|(j, _)| j)
    }

    fn leaving(&self, col: usize, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64, f64)> = None;
        for r in 0..self.m {
            let a = self.at(r, col);
            if a <= PIVOT_TOL {
                continue;
            }
            let ratio = self.rhs(r).max(0.0) / a;
            best = match best {
                None => Some((r, ratio, a)),
                Some((br, bratio, ba)) => {
                    let tie = (ratio - bratio).abs() <= 1e-12 * (1.0 + bratio.abs());
                    let better = if tie {
                        if bland {
                            self.basis[r] < self.basis[br]
                        } else {
                            a > ba
                        }
                    } else {
                        ratio < bratio
                    };
                    if better {
                        Some((r, ratio, a))
                    } else {
                        Some((br, bratio, ba))
                    }
                }
            };
        }
        best.map(|(r, _, _)| r)
    }

    fn run(&mut self) -> Result<Outcome> {
        let mut degenerate = 0;
        let mut bland = false;
        loop {
            if self.pivots >= MAX_PIVOTS {
                return Err(Error::IterationLimit(MAX_PIVOTS));
            }
            let Some(col) = self.entering(bland) else {
                return Ok(Outcome::Optimal);
            };
            let Some(row) = self.leaving(col, bland) else {
                return Ok(Outcome::Unbounded);
            };
            let step = self.rhs(row) / self.at(row, col);
            self.pivot(row, col);
            if step.abs() <= 1e-12 {
                degenerate += 1;
                if degenerate >= DEGENERATE_RUN {
                    bland = true;
                }
            } else {
                degenerate = 0;
                bland = false;
            }
        }
    }

    fn remove_row(&mut self, r: usize) {
        let w = self.width();
        self.t.drain(r * w..(r + 1) * w);
        self.basis.remove(r);
        self.m -= 1;
    }
}

/// Solves `lp`. Infeasible and unbounded programs are reported through
/// [`LpSolution::status`]; malformed programs are errors.
pub fn solve(lp: &LinearProgram) -> Result<LpSolution> {
    lp.validate()?;
    let sf = StandardForm::build(lp);
    let (m, n) = (sf.m, sf.n);
    let mut t = vec![0.0; m * (n + 1)];
    for r in 0..m {
        t[r * (n + 1)..r * (n + 1) + n].copy_from_slice(&sf.a[r * n..(r + 1) * n]);
        t[r * (n + 1) + n] = sf.b[r];
    }
    let mut tab = Tableau {
        m,
        n,
        t,
        cost: Vec::new(),
        basis: sf.initial_basis.clone(),
        enterable: vec![true; n],
        pivots: 0,
    };
    // Original row index of each tableau row, for the final re-solve.
    let mut row_ids: Vec<usize> = (0..m).collect();

    let has_artificial = sf.kinds.contains(&ColumnKind::Artificial);
    if has_artificial {
        let phase1: Vec<f64> = sf
            .kinds
            .iter()
            .map(|&k| if k == ColumnKind::Artificial { 1.0 } else { 0.0 })
            .collect();
        tab.set_costs(&phase1);
        tab.run()?;
        let infeasibility = -tab.cost[n];
        let scale = 1.0 + sf.b.iter().fold(0.0f64, |a, &v| a.max(v));
        if infeasibility > 1e-9 * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                values: Vec::new(),
                objective: f64::NAN,
                pivots: tab.pivots,
            });
        }
        // Drive zero-level artificials out of the basis; drop redundant rows.
        let mut r = 0;
        while r < tab.m {
            if sf.kinds[tab.basis[r]] != ColumnKind::Artificial {
                r += 1;
                continue;
            }
            let replacement = (0..n)
                .filter(|&j| sf.kinds[j] != ColumnKind::Artificial)
                .max_by(|&i, &j| tab.at(r, i).abs().total_cmp(&tab.at(r, j).abs()).then(j.cmp(&i)))
                .filter(|&j| tab.at(r, j).abs() > PIVOT_TOL);
            match replacement {
                Some(j) => {
                    tab.pivot(r, j);
                    r += 1;
                }
                None => {
                    tab.remove_row(r);
                    row_ids.remove(r);
                }
            }
        }
        for (j, k) in sf.kinds.iter().enumerate() {
            if *k == ColumnKind::Artificial {
                tab.enterable[j] = false;
            }
        }
    }

    let sign = match lp.sense {
        Sense::Minimize => 1.0,
        Sense::Maximize => -1.0,
    };
    let mut phase2 = vec![0.0; n];
    for (c, &v) in phase2.iter_mut().zip(&lp.objective) {
        *c = sign * v;
    }
    tab.set_costs(&phase2);
    if let Outcome::Unbounded = tab.run()? {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            values: Vec::new(),
            objective: f64::NAN,
            pivots: tab.pivots,
        });
    }

    let xb = resolve_basis(&sf, &row_ids, &tab.basis).unwrap_or_else(|| (0..tab.m).map(|r| tab.rhs(r)).collect());
    let nv = lp.num_vars();
    let mut values = lp.lower_bounds.clone();
    for (r, &col) in tab.basis.iter().enumerate() {
        if col < nv {
            values[col] += xb[r];
        }
    }
    let objective = lp.objective_value(&values);
    Ok(LpSolution {
        status: LpStatus::Optimal,
        values,
        objective,
        pivots: tab.pivots,
    })
}

/// Solves `B x_B = b` on the original standard-form data by Gaussian
/// elimination with partial pivoting. `None` if the basis is singular.
fn resolve_basis(sf: &StandardForm, rows: &[usize], basis: &[usize]) -> Option<Vec<f64>> {
    let k = basis.len();
    let mut mat = vec![0.0; k * (k + 1)];
    for (i, &r) in rows.iter().enumerate() {
        for (j, &c) in basis.iter().enumerate() {
            mat[i * (k + 1) + j] = sf.a[r * sf.n + c];
        }
        mat[i * (k + 1) + k] = sf.b[r];
    }
    let w = k + 1;
    for col in 0..k {
        let p = (col..k).max_by(|&a, &b| mat[a * w + col].abs().total_cmp(&mat[b * w + col].abs()))?;
        if mat[p * w + col].abs() < 1e-14 {
            return None;
        }
        if p != col {
            for j in 0..w {
                mat.swap(p * w + j, col * w + j);
            }
        }
        let pv = mat[col * w + col];
        for r in col + 1..k {
            let f = mat[r * w + col] / pv;
            if f != 0.0 {
                for j in col..w {
                    mat[r * w + j] -= f * mat[col * w + j];
                }
            }
        }
    }
    let mut x = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|j| mat[i * w + j] * x[j]).sum();
        x[i] = (mat[i * w + k] - s) / mat[i * w + i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_upper_bound() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0]);
        lp.add_constraint(vec![1.0], Relation::Le, 3.0);
        let s = lp.solve().unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.values[0] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0]);
        lp.add_constraint(vec![1.0], Relation::Ge, 2.0);
        lp.add_constraint(vec![1.0], Relation::Le, 1.0);
        assert_eq!(lp.solve().unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn degenerate_tie() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 1.0]);
        lp.add_constraint(vec![1.0, 1.0], Relation::Le, 1.0);
        let s = lp.solve().unwrap();
        assert!((s.objective - 1.0).abs() < 1e-12);
        assert!(lp.max_violation(&s.values) < 1e-12);
    }

    #[test]
    fn unbounded() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 0.0]);
        lp.add_constraint(vec![1.0, -1.0], Relation::Le, 1.0);
        assert_eq!(lp.solve().unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_and_lower_bounds() {
        // min x + 2y, x + y = 4, x ≥ 1, y ≥ 1.5
        let mut lp = LinearProgram::new(Sense::Minimize, vec![1.0, 2.0]);
        lp.add_constraint(vec![1.0, 1.0], Relation::Eq, 4.0);
        lp.set_lower_bound(0, 1.0).set_lower_bound(1, 1.5);
        let s = lp.solve().unwrap();
        assert!((s.values[0] - 2.5).abs() < 1e-12 && (s.values[1] - 1.5).abs() < 1e-12);
        assert!((s.objective - 5.5).abs() < 1e-12);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 2.0]);
        lp.add_constraint(vec![1.0, 1.0], Relation::Eq, 1.0);
        lp.add_constraint(vec![2.0, 2.0], Relation::Eq, 2.0);
        let s = lp.solve().unwrap();
        assert!((s.objective - 2.0).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs_rows_are_flipped() {
        // max -x s.t. -x ≤ -2  (x ≥ 2)
        let mut lp = LinearProgram::new(Sense::Maximize, vec![-1.0]);
        lp.add_constraint(vec![-1.0], Relation::Le, -2.0);
        let s = lp.solve().unwrap();
        assert!((s.values[0] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_and_finiteness_errors() {
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0, 1.0]);
        lp.add_constraint(vec![1.0], Relation::Le, 1.0);
        assert!(matches!(lp.solve(), Err(Error::DimensionMismatch(_))));
        let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0]);
        lp.add_constraint(vec![f64::NAN], Relation::Le, 1.0);
        assert!(lp.solve().is_err());
        assert!(LinearProgram::new(Sense::Minimize, vec![]).solve().is_err());
    }

    #[test]
    fn klee_minty_cube() {
        // max Σ 2^{n-j} x_j s.t. 2 Σ_{j<i} 2^{i-j} x_j + x_i ≤ 5^i
        let n = 8;
        let c: Vec<f64> = (0..n).map(|j| 2f64.powi((n - 1 - j) as i32)).collect();
        let mut lp = LinearProgram::new(Sense::Maximize, c);
        for i in 0..n {
            let mut row = vec![0.0; n];
            for (j, v) in row.iter_mut().enumerate().take(i) {
                *v = 2f64.powi((i - j + 1) as i32);
            }
            row[i] = 1.0;
            lp.add_constraint(row, Relation::Le, 5f64.powi(i as i32 + 1));
        }
        let s = lp.solve().unwrap();
        assert!((s.objective - 5f64.powi(n as i32)).abs() < 1e-6);
    }
}
