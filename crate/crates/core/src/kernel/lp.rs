//! Dense two-phase simplex for small bounded linear programs.
//!
//! Problems are stated as `maximize cᵀx` subject to `row·x ≤ rhs` and
//! per-variable bounds, which may be infinite. Variables are shifted,
//! reflected or split into nonnegative parts before the tableau is built.

use serde::{Deserialize, Serialize};

use super::SolverTolerances;
use crate::error::{Error, Result};

const PIVOT_EPS: f64 = 1e-10;
const COST_EPS: f64 = 1e-11;
/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERATE_SWITCH: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpConstraint {
    pub row: Vec<f64>,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    /// Maximized.
    pub objective: Vec<f64>,
    pub constraints: Vec<LpConstraint>,
    pub bounds: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub status: LpStatus,
    pub pivots: usize,
}

impl LpProblem {
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        LpProblem {
            objective,
            constraints: Vec::new(),
            bounds: vec![(f64::NEG_INFINITY, f64::INFINITY); n],
        }
    }

    pub fn dim(&self) -> usize {
        self.objective.len()
    }

    pub fn push(&mut self, row: Vec<f64>, rhs: f64) {
        self.constraints.push(LpConstraint { row, rhs });
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim();
        if self.bounds.len() != n {
            return Err(Error::Structure(format!(
                "{} bounds for {n} variables",
                self.bounds.len()
            )));
        }
        for (i, c) in self.constraints.iter().enumerate() {
            if c.row.len() != n {
                return Err(Error::Structure(format!(
                    "constraint {i} has {} coefficients, expected {n}",
                    c.row.len()
                )));
            }
            if c.row.iter().any(|v| !v.is_finite()) || c.rhs.is_nan() {
                return Err(Error::Structure(format!("constraint {i} is not finite")));
            }
        }
        for (j, &(lo, hi)) in self.bounds.iter().enumerate() {
            if lo.is_nan() || hi.is_nan() || lo > hi || lo == f64::INFINITY || hi == f64::NEG_INFINITY {
                return Err(Error::Structure(format!("invalid bounds ({lo}, {hi}) on x[{j}]")));
            }
        }
        if self.objective.iter().any(|v| !v.is_finite()) {
            return Err(Error::Structure("objective is not finite".into()));
        }
        Ok(())
    }

    /// Largest violation of any constraint or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self.constraints.iter().map(|c| {
            let lhs: f64 = c.row.iter().zip(x).map(|(a, b)| a * b).sum();
            (lhs - c.rhs).max(0.0)
        });
        let boxes = self
            .bounds
            .iter()
            .zip(x)
            .map(|(&(lo, hi), &v)| (lo - v).max(v - hi).max(0.0));
        rows.chain(boxes).fold(0.0, f64::max)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

/// How an original variable maps onto nonnegative tableau columns.
#[derive(Debug, Clone, Copy)]
enum VarMap {
    /// `x = lo + y`
    Shift { col: usize, lo: f64 },
    /// `x = hi − y`
    Reflect { col: usize, hi: f64 },
    /// `x = y⁺ − y⁻`
    Split { pos: usize, neg: usize },
}

pub fn solve_lp(prob: &LpProblem, tol: &SolverTolerances) -> Result<LpSolution> {
    prob.validate()?;
    let n = prob.dim();

    let mut maps = Vec::with_capacity(n);
    let mut ncols = 0;
    for &(lo, hi) in &prob.bounds {
        let m = if lo.is_finite() {
            ncols += 1;
            VarMap::Shift { col: ncols - 1, lo }
        } else if hi.is_finite() {
            ncols += 1;
            VarMap::Reflect { col: ncols - 1, hi }
        } else {
            ncols += 2;
            VarMap::Split {
                pos: ncols - 2,
                neg: ncols - 1,
            }
        };
        maps.push(m);
    }

    // Standard-form rows `A y ≤ b`.
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for c in &prob.constraints {
        let mut r = vec![0.0; ncols];
        let mut rhs = c.rhs;
        for (j, &a) in c.row.iter().enumerate() {
            match maps[j] {
                VarMap::Shift { col, lo } => {
                    r[col] += a;
                    rhs -= a * lo;
                }
                VarMap::Reflect { col, hi } => {
                    r[col] -= a;
                    rhs -= a * hi;
                }
                VarMap::Split { pos, neg } => {
                    r[pos] += a;
                    r[neg] -= a;
                }
            }
        }
        rows.push((r, rhs));
    }
    for (j, &(lo, hi)) in prob.bounds.iter().enumerate() {
        if let VarMap::Shift { col, .. } = maps[j] {
            if hi.is_finite() {
                let mut r = vec![0.0; ncols];
                r[col] = 1.0;
                rows.push((r, hi - lo));
            }
        }
    }

    let mut cost = vec![0.0; ncols];
    let mut offset = 0.0;
    for (j, &c) in prob.objective.iter().enumerate() {
        match maps[j] {
            VarMap::Shift { col, lo } => {
                cost[col] += c;
                offset += c * lo;
            }
            VarMap::Reflect { col, hi } => {
                cost[col] -= c;
                offset += c * hi;
            }
            VarMap::Split { pos, neg } => {
                cost[pos] += c;
                cost[neg] -= c;
            }
        }
    }

    let outcome = Tableau::build(&rows, ncols).run(&cost, tol);
    let (y, status, pivots) = match outcome {
        Ok((y, pivots)) => (y, LpStatus::Optimal, pivots),
        Err((status, y, pivots)) => (y, status, pivots),
    };

    let x: Vec<f64> = maps
        .iter()
        .map(|m| match *m {
            VarMap::Shift { col, lo } => lo + y[col],
            VarMap::Reflect { col, hi } => hi - y[col],
            VarMap::Split { pos, neg } => y[pos] - y[neg],
        })
        .collect();
    let objective = prob.value(&x);
    debug_assert!(status != LpStatus::Optimal || (objective - offset - dot(&cost, &y)).abs() < 1e-6 * (1.0 + objective.abs()));
    Ok(LpSolution {
        x,
        objective,
        status,
        pivots,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Dense simplex tableau over `[structural | slack | artificial]` columns.
struct Tableau {
    m: usize,
    /// Structural column count.
    n: usize,
    width: usize,
    /// Row-major `m × (width + 1)`; last column is the right-hand side.
    data: Vec<f64>,
    basis: Vec<usize>,
    artificial_start: usize,
    /// Columns that may not enter the basis.
    barred: Vec<bool>,
}

type RunResult = std::result::Result<(Vec<f64>, usize), (LpStatus, Vec<f64>, usize)>;

impl Tableau {
    fn build(rows: &[(Vec<f64>, f64)], n: usize) -> Self {
        let m = rows.len();
        let n_art = rows.iter().filter(|(_, b)| *b < 0.0).count();
        let artificial_start = n + m;
        let width = n + m + n_art;
        let stride = width + 1;
        let mut data = vec![0.0; m * stride];
        let mut basis = vec![0; m];
        let mut next_art = artificial_start;
        for (i, (r, b)) in rows.iter().enumerate() {
            let row = &mut data[i * stride..(i + 1) * stride];
            let sign = if *b < 0.0 { -1.0 } else { 1.0 };
            for (dst, &a) in row[..n].iter_mut().zip(r) {
                *dst = sign * a;
            }
            row[n + i] = sign;
            row[width] = sign * b;
            if *b < 0.0 {
                row[next_art] = 1.0;
                basis[i] = next_art;
                next_art += 1;
            } else {
                basis[i] = n + i;
            }
        }
        Tableau {
            m,
            n,
            width,
            data,
            basis,
            artificial_start,
            barred: vec![false; width],
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * (self.width + 1) + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.data[i * (self.width + 1) + self.width]
    }

    fn pivot(&mut self, r: usize, c: usize, obj: &mut [f64]) {
        let stride = self.width + 1;
        let p = self.at(r, c);
        for v in &mut self.data[r * stride..(r + 1) * stride] {
            *v /= p;
        }
        let (before, rest) = self.data.split_at_mut(r * stride);
        let (prow, after) = rest.split_at_mut(stride);
        for row in before.chunks_exact_mut(stride).chain(after.chunks_exact_mut(stride)) {
            let f = row[c];
            if f != 0.0 {
                for (v, &pv) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        let f = obj[c];
        if f != 0.0 {
            for (v, &pv) in obj.iter_mut().zip(prow.iter()) {
                *v -= f * pv;
            }
            obj[c] = 0.0;
        }
        self.basis[r] = c;
    }

    /// Reduced-cost row for maximizing `cost` over all columns, with the
    /// negated objective value in the last slot.
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut obj = vec![0.0; self.width + 1];
        for (j, &c) in cost.iter().enumerate() {
            obj[j] = -c;
        }
        let stride = self.width + 1;
        for i in 0..self.m {
            let cb = cost.get(self.basis[i]).copied().unwrap_or(0.0);
            if cb != 0.0 {
                for (v, &a) in obj.iter_mut().zip(&self.data[i * stride..(i + 1) * stride]) {
                    *v += cb * a;
                }
            }
        }
        obj
    }

    /// Primal simplex from the current basis. Returns `Ok(pivots)` at
    /// optimality.
    fn optimize(&mut self, obj: &mut [f64], max_pivots: usize, pivots: &mut usize) -> std::result::Result<(), LpStatus> {
        let mut degenerate = 0usize;
        let mut bland = false;
        loop {
            let entering = if bland {
                (0..self.width).find(|&j| !self.barred[j] && obj[j] < -COST_EPS)
            } else {
                let mut best: Option<(usize, f64)> = None;
                for (j, &c) in obj.iter().enumerate().take(self.width) {
                    if !self.barred[j] && c < -COST_EPS && best.is_none_or(|(_, v)| c < v) {
                        best = Some((j, c));
                    }
                }
                best.map(|(j, _)| j)
            };
            let Some(c) = entering else {
                return Ok(());
            };
            if *pivots >= max_pivots {
                return Err(LpStatus::IterLimit);
            }

            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, c);
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i).max(0.0) / a;
                    let better = match leave {
                        None => true,
                        Some((r, best)) => {
                            ratio < best - 1e-12
                                || (ratio <= best + 1e-12 && self.basis[i] < self.basis[r])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, ratio)) = leave else {
                return Err(LpStatus::Unbounded);
            };
            if ratio <= 1e-12 {
                degenerate += 1;
                if degenerate >= DEGENERATE_SWITCH {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }
            self.pivot(r, c, obj);
            *pivots += 1;
        }
    }

    fn solution(&self) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for i in 0..self.m {
            if self.basis[i] < self.n {
                y[self.basis[i]] = self.rhs(i).max(0.0);
            }
        }
        y
    }

    fn run(mut self, cost: &[f64], tol: &SolverTolerances) -> RunResult {
        let max_pivots = tol.max_iters.max(1);
        let mut pivots = 0usize;

        if self.artificial_start < self.width {
            // Phase 1: maximize −Σ artificials.
            let mut phase1 = vec![0.0; self.width];
            for v in &mut phase1[self.artificial_start..] {
                *v = -1.0;
            }
            let mut obj = self.reduced_costs(&phase1);
            if let Err(status) = self.optimize(&mut obj, max_pivots, &mut pivots) {
                let status = if status == LpStatus::Unbounded { LpStatus::Infeasible } else { status };
                return Err((status, self.solution(), pivots));
            }
            let infeasibility = obj[self.width];
            let scale = 1.0 + (0..self.m).map(|i| self.rhs(i).abs()).fold(0.0, f64::max);
            if infeasibility.abs() > tol.feas_tol * scale {
                return Err((LpStatus::Infeasible, self.solution(), pivots));
            }
            // Drive remaining artificials out of the basis.
            for i in 0..self.m {
                if self.basis[i] >= self.artificial_start {
                    if let Some(c) = (0..self.artificial_start).find(|&j| self.at(i, j).abs() > 1e-9) {
                        self.pivot(i, c, &mut obj);
                    }
                }
            }
            for j in self.artificial_start..self.width {
                self.barred[j] = true;
            }
        }

        let mut full_cost = vec![0.0; self.width];
        full_cost[..cost.len()].copy_from_slice(cost);
        let mut obj = self.reduced_costs(&full_cost);
        match self.optimize(&mut obj, max_pivots, &mut pivots) {
            Ok(()) => Ok((self.solution(), pivots)),
            Err(status) => Err((status, self.solution(), pivots)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> SolverTolerances {
        SolverTolerances::lp()
    }

    #[test]
    fn single_variable_min_of_caps() {
        let mut p = LpProblem::new(vec![1.0]);
        p.push(vec![1.0], 3.0);
        p.push(vec![1.0], 5.0);
        let s = solve_lp(&p, &tol()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.x[0] - 3.0).abs() < 1e-12);
        assert!((s.objective - 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_gradient_surrogate_keeps_current_value() {
        // max τ s.t. τ ≤ g0 + 0ᵀ(φ − φ0), |φ_n| ≤ 1.
        let g0 = 2.5;
        let mut p = LpProblem::new(vec![0.0, 0.0, 1.0]);
        p.bounds = vec![(-1.0, 1.0), (-1.0, 1.0), (f64::NEG_INFINITY, f64::INFINITY)];
        p.push(vec![0.0, 0.0, 1.0], g0);
        let s = solve_lp(&p, &tol()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - g0).abs() < 1e-12);
    }

    #[test]
    fn detects_infeasible() {
        let mut p = LpProblem::new(vec![1.0]);
        p.push(vec![1.0], -1.0);
        p.bounds = vec![(0.0, 10.0)];
        assert_eq!(solve_lp(&p, &tol()).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn detects_unbounded() {
        let mut p = LpProblem::new(vec![1.0, 1.0]);
        p.push(vec![1.0, -1.0], 1.0);
        p.bounds = vec![(0.0, f64::INFINITY), (0.0, f64::INFINITY)];
        assert_eq!(solve_lp(&p, &tol()).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn negative_rhs_needs_phase_one() {
        // max −x − y s.t. x + y ≥ 2, x ≤ 3, y ≤ 3  → value −2.
        let mut p = LpProblem::new(vec![-1.0, -1.0]);
        p.push(vec![-1.0, -1.0], -2.0);
        p.bounds = vec![(0.0, 3.0), (0.0, 3.0)];
        let s = solve_lp(&p, &tol()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 2.0).abs() < 1e-12);
        assert!(p.max_violation(&s.x) < 1e-12);
    }

    #[test]
    fn upper_bounded_only_variable() {
        let mut p = LpProblem::new(vec![1.0]);
        p.bounds = vec![(f64::NEG_INFINITY, 4.0)];
        let s = solve_lp(&p, &tol()).unwrap();
        assert!((s.x[0] - 4.0).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch_is_structural() {
        let mut p = LpProblem::new(vec![1.0, 2.0]);
        p.push(vec![1.0], 1.0);
        assert!(matches!(solve_lp(&p, &tol()), Err(Error::Structure(_))));
    }
}
