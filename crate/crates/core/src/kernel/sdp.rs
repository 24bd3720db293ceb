//! Small dense complex SDP solver for max-min gain relaxations:
//!
//! ```text
//! maximize    τ + Re Tr(C W)
//! subject to  Tr(A_q W) ≥ τ      for every gain matrix A_q ⪰ 0
//!             W_nn = d           for every n
//!             W ⪰ 0              (Hermitian)
//! ```
//!
//! The core is an infeasible-start primal-dual interior-point method using
//! the HKM search direction with Mehrotra predictor-corrector steps. Gain
//! matrices are held as low-rank factors `A_q = F_q F_qᴴ` so the Schur
//! complement costs `O(R²N)` instead of `O(Q²N³)`.
//!
//! Most gain constraints are slack at the optimum, so the IPM is wrapped
//! in constraint generation: it solves over a working set, adds the most
//! violated constraints and repeats until every constraint holds.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use super::{CMatrix, SolverTolerances};
use crate::error::{Error, Result};

const HERMITIAN_TOL: f64 = 1e-12;
const REFINE_STEPS: usize = 2;
/// Iterations without a 10% gap reduction before giving up.
const IDLE_LIMIT: usize = 5;
/// Tolerance multiple accepted as [`SdpStatus::NearOptimal`].
const NEAR_FACTOR: f64 = 100.0;

/// Positive semidefinite gain matrix stored as `F Fᴴ`.
#[derive(Debug, Clone, PartialEq)]
pub struct GainMatrix {
    factor: CMatrix,
}

impl GainMatrix {
    /// `a aᴴ`.
    pub fn rank_one(a: &[Complex64]) -> Self {
        GainMatrix {
            factor: CMatrix::from_column_slice(a.len(), 1, a),
        }
    }

    /// Factorizes an explicit Hermitian PSD matrix, dropping numerically
    /// zero eigen-directions.
    pub fn from_hermitian(a: &CMatrix) -> Result<Self> {
        check_hermitian(a, "gain matrix")?;
        let n = a.nrows();
        let eig = SymmetricEigen::new((a + a.adjoint()) * Complex64::new(0.5, 0.0));
        let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let keep: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] > 1e-14 * top.max(1e-300)).collect();
        if eig.eigenvalues.iter().any(|&v| v < -1e-9 * top.max(1.0)) {
            return Err(Error::Structure("gain matrix is not positive semidefinite".into()));
        }
        let mut factor = CMatrix::zeros(n, keep.len());
        for (c, &k) in keep.iter().enumerate() {
            let s = Complex64::new(eig.eigenvalues[k].sqrt(), 0.0);
            for r in 0..n {
                factor[(r, c)] = eig.eigenvectors[(r, k)] * s;
            }
        }
        Ok(GainMatrix { factor })
    }

    pub fn dim(&self) -> usize {
        self.factor.nrows()
    }

    pub fn rank(&self) -> usize {
        self.factor.ncols()
    }

    pub fn matrix(&self) -> CMatrix {
        &self.factor * self.factor.adjoint()
    }

    /// `Re Tr(A W)`.
    pub fn trace_with(&self, w: &CMatrix) -> f64 {
        let wf = w * &self.factor;
        (0..self.factor.ncols())
            .map(|c| self.factor.column(c).dotc(&wf.column(c)).re)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub dim: usize,
    /// Hermitian `C`; the objective is `τ + Re Tr(C W)`.
    pub objective: CMatrix,
    pub gains: Vec<GainMatrix>,
    pub diag_value: f64,
    /// Without coupling the problem is `max Re Tr(C W)` and the gain
    /// matrices are ignored.
    pub tau_coupled: bool,
    /// Hermitian positive definite `S`. The solver works on
    /// `X' = S⁻¹ W S⁻¹`, which helps when `C` is badly conditioned; for
    /// `C = −η (W₀ + ζI)⁻¹` the choice `S = (W₀ + ζI)^{1/2}` turns the
    /// objective into `−η Tr(X')` and starts the iteration at `W₀ + ζI`.
    pub preconditioner: Option<CMatrix>,
}

impl SdpProblem {
    /// Builds a problem from explicit Hermitian gain matrices.
    pub fn new(
        dim: usize,
        objective: CMatrix,
        gain_matrices: &[CMatrix],
        diag_value: f64,
        tau_coupled: bool,
    ) -> Result<Self> {
        let gains = gain_matrices
            .iter()
            .map(GainMatrix::from_hermitian)
            .collect::<Result<Vec<_>>>()?;
        let prob = SdpProblem {
            dim,
            objective,
            gains,
            diag_value,
            tau_coupled,
            preconditioner: None,
        };
        prob.validate()?;
        Ok(prob)
    }

    /// Gain matrices `a_q a_qᴴ` given by their vectors.
    pub fn with_rank_one_gains(dim: usize, objective: CMatrix, vectors: &[Vec<Complex64>], diag_value: f64) -> Result<Self> {
        let prob = SdpProblem {
            dim,
            objective,
            gains: vectors.iter().map(|a| GainMatrix::rank_one(a)).collect(),
            diag_value,
            tau_coupled: true,
            preconditioner: None,
        };
        prob.validate()?;
        Ok(prob)
    }

    fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::Structure("SDP dimension must be positive".into()));
        }
        if self.objective.nrows() != self.dim || self.objective.ncols() != self.dim {
            return Err(Error::Structure(format!(
                "objective is {}x{}, expected {}x{}",
                self.objective.nrows(),
                self.objective.ncols(),
                self.dim,
                self.dim
            )));
        }
        check_hermitian(&self.objective, "objective")?;
        if let Some(q) = self.gains.iter().position(|g| g.dim() != self.dim) {
            return Err(Error::Structure(format!("gain matrix {q} has the wrong dimension")));
        }
        if !(self.diag_value.is_finite() && self.diag_value > 0.0) {
            return Err(Error::Structure("diagonal value must be positive".into()));
        }
        if let Some(s) = &self.preconditioner {
            if s.nrows() != self.dim || s.ncols() != self.dim {
                return Err(Error::Structure("preconditioner has the wrong dimension".into()));
            }
            check_hermitian(s, "preconditioner")?;
            if Cholesky::new(s.clone()).is_none() {
                return Err(Error::Structure("preconditioner is not positive definite".into()));
            }
        }
        if self.tau_coupled && self.gains.is_empty() {
            return Err(Error::Structure("a coupled problem needs at least one gain matrix".into()));
        }
        Ok(())
    }
}

fn check_hermitian(a: &CMatrix, what: &str) -> Result<()> {
    if !a.is_square() {
        return Err(Error::Structure(format!("{what} is not square")));
    }
    let scale = a.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let n = a.nrows();
    for i in 0..n {
        for j in i..n {
            if (a[(i, j)] - a[(j, i)].conj()).norm() > HERMITIAN_TOL * scale {
                return Err(Error::Structure(format!("{what} is not Hermitian at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum SdpStatus {
    Optimal,
    /// Progress stalled with all residuals within 100 times the
    /// tolerances; typical of strongly penalized objectives.
    NearOptimal,
    /// Iteration or stall limit; the solution holds the last iterate.
    IterLimit,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    /// Hermitian PSD with diagonal exactly `diag_value`.
    pub w: CMatrix,
    /// `min_q Tr(A_q W)`; zero for uncoupled problems.
    pub tau: f64,
    /// `tau + Re Tr(C W)`.
    pub objective: f64,
    pub status: SdpStatus,
    /// Interior-point iterations over all rounds.
    pub iterations: usize,
    /// Constraint-generation rounds.
    pub rounds: usize,
    /// Gain constraints present in the final round.
    pub working_set: Vec<usize>,
}

pub fn solve_sdp(prob: &SdpProblem, tol: &SolverTolerances) -> Result<SdpSolution> {
    solve_sdp_seeded(prob, tol, &[])
}

/// Like [`solve_sdp`], starting constraint generation from `seed` (for
/// example the working set of a closely related earlier solve).
pub fn solve_sdp_seeded(prob: &SdpProblem, tol: &SolverTolerances, seed: &[usize]) -> Result<SdpSolution> {
    prob.validate()?;
    let n = prob.dim;
    let s = prob.preconditioner.clone().unwrap_or_else(|| CMatrix::identity(n, n));
    let c_scaled = -(&s * &prob.objective * &s);
    let unscale = |x: &CMatrix| normalize_diag(&(&s * x * &s), prob.diag_value);

    if !prob.tau_coupled {
        let out = interior_point(&c_scaled, &s, prob.diag_value, &[], tol);
        let w = unscale(&out.x);
        let objective = trace_re(&prob.objective, &w);
        return Ok(SdpSolution {
            w,
            tau: 0.0,
            objective,
            status: out.status,
            iterations: out.iterations,
            rounds: 1,
            working_set: Vec::new(),
        });
    }

    let q_total = prob.gains.len();
    let scaled: Vec<CMatrix> = prob.gains.iter().map(|g| &s * &g.factor).collect();
    let mut in_set = vec![false; q_total];
    let mut working: Vec<usize> = seed.iter().copied().filter(|&q| q < q_total).collect();
    if working.is_empty() {
        let k0 = q_total.min((2 * n).max(8));
        for i in 0..k0 {
            let q = if k0 == 1 { 0 } else { i * (q_total - 1) / (k0 - 1) };
            working.push(q);
        }
    }
    working.sort_unstable();
    working.dedup();
    for &q in &working {
        in_set[q] = true;
    }

    let batch = n.max(5);
    let mut iterations = 0;
    let mut rounds = 0;
    loop {
        rounds += 1;
        let factors: Vec<&CMatrix> = working.iter().map(|&q| &scaled[q]).collect();
        let out = interior_point(&c_scaled, &s, prob.diag_value, &factors, tol);
        iterations += out.iterations;
        let w = unscale(&out.x);
        let traces: Vec<f64> = prob.gains.iter().map(|g| g.trace_with(&w)).collect();
        let tau_sub = working.iter().map(|&q| traces[q]).fold(f64::INFINITY, f64::min);
        let slack = tol.feas_tol * (1.0 + tau_sub.abs());

        let mut violated: Vec<usize> = (0..q_total).filter(|&q| !in_set[q] && traces[q] < tau_sub - slack).collect();
        if violated.is_empty() || out.status == SdpStatus::IterLimit {
            let tau = traces.iter().copied().fold(f64::INFINITY, f64::min);
            let objective = tau + trace_re(&prob.objective, &w);
            return Ok(SdpSolution {
                w,
                tau,
                objective,
                status: out.status,
                iterations,
                rounds,
                working_set: working,
            });
        }
        violated.sort_by(|&a, &b| traces[a].total_cmp(&traces[b]).then(a.cmp(&b)));
        for &q in violated.iter().take(batch) {
            in_set[q] = true;
            working.push(q);
        }
        working.sort_unstable();
    }
}

/// `Re Tr(C W)`.
fn trace_re(c: &CMatrix, w: &CMatrix) -> f64 {
    c.iter().zip(w.transpose().iter()).map(|(a, b)| (a * b).re).sum()
}

/// Congruence by `diag(d / W_nn)^{1/2}`: keeps W PSD and fixes its
/// diagonal exactly.
fn normalize_diag(x: &CMatrix, d: f64) -> CMatrix {
    let n = x.nrows();
    let s: Vec<f64> = (0..n).map(|i| (d / x[(i, i)].re.max(1e-300)).sqrt()).collect();
    let mut w = CMatrix::from_fn(n, n, |i, j| x[(i, j)] * (s[i] * s[j]));
    hermitize(&mut w);
    for i in 0..n {
        w[(i, i)] = Complex64::new(d, 0.0);
    }
    w
}

struct IpmOutput {
    x: CMatrix,
    iterations: usize,
    status: SdpStatus,
}

/// Problem data in the standard primal form
///
/// ```text
/// min  Re⟨C̃, X⟩ − τ
/// s.t. Tr(E_n X) = d,  Tr(A_i X) − τ − s_i = 0,  X ⪰ 0,  (τ, s) ≥ 0
/// ```
///
/// where every constraint matrix is given by factor columns, `E_n` being
/// rank one. `τ ≥ 0` loses nothing because every `Tr(A_i X)` is
/// nonnegative.
struct Standard {
    n: usize,
    /// Number of equality rows `E_n`.
    n_eq: usize,
    d: f64,
    /// Factor columns of all constraints side by side.
    f: CMatrix,
    /// Column range of each constraint in `f`; the first `n_eq` are the
    /// equality rows.
    ranges: Vec<(usize, usize)>,
}

impl Standard {
    fn new(s: &CMatrix, d: f64, gains: &[&CMatrix]) -> Self {
        let n = s.nrows();
        let total: usize = n + gains.iter().map(|g| g.ncols()).sum::<usize>();
        let mut f = CMatrix::zeros(n, total);
        f.columns_mut(0, n).copy_from(s);
        let mut ranges: Vec<(usize, usize)> = (0..n).map(|i| (i, i + 1)).collect();
        let mut col = n;
        for g in gains {
            let r = g.ncols();
            f.columns_mut(col, r).copy_from(*g);
            ranges.push((col, col + r));
            col += r;
        }
        Standard { n, n_eq: n, d, f, ranges }
    }

    /// Number of gain constraints.
    fn k(&self) -> usize {
        self.ranges.len() - self.n_eq
    }

    fn m(&self) -> usize {
        self.ranges.len()
    }

    /// Number of LP variables `(τ, s)`.
    fn nl(&self) -> usize {
        if self.k() == 0 {
            0
        } else {
            1 + self.k()
        }
    }

    /// `𝒜(Y)`, the rows `Re Tr(A_i Y)`, also for non-Hermitian `Y`.
    fn apply(&self, y: &CMatrix) -> Vec<f64> {
        let yf = y * &self.f;
        self.ranges
            .iter()
            .map(|&(lo, hi)| (lo..hi).map(|c| self.f.column(c).dotc(&yf.column(c)).re).sum())
            .collect()
    }

    /// `𝒜*(y)`.
    fn adjoint(&self, y: &[f64]) -> CMatrix {
        let mut scaled = self.f.clone();
        for (i, &(lo, hi)) in self.ranges.iter().enumerate() {
            for c in lo..hi {
                scaled.column_mut(c).scale_mut(y[i]);
            }
        }
        let out = &scaled * self.f.adjoint();
        (&out + out.adjoint()) * Complex64::new(0.5, 0.0)
    }

    /// `A_l x` for LP variables `x = (τ, s)`.
    fn apply_lp(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.m()];
        for i in 0..self.k() {
            out[self.n_eq + i] = -x[0] - x[1 + i];
        }
        out
    }

    /// `A_lᵀ y`.
    fn adjoint_lp(&self, y: &[f64]) -> Vec<f64> {
        if self.k() == 0 {
            return Vec::new();
        }
        let mut out = vec![0.0; self.nl()];
        for i in 0..self.k() {
            out[0] -= y[self.n_eq + i];
            out[1 + i] = -y[self.n_eq + i];
        }
        out
    }

    fn b(&self) -> Vec<f64> {
        let mut b = vec![self.d; self.n_eq];
        b.resize(self.m(), 0.0);
        b
    }

    fn c_lp(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.nl()];
        if !c.is_empty() {
            c[0] = -1.0;
        }
        c
    }

    /// Schur complement `𝒜(X 𝒜*(·) Z⁻¹) + A_l D A_lᵀ`. With factors,
    /// `Re Tr(A_i X A_j Z⁻¹) = Re Σ (FᴴXF)_ce · conj((FᴴZ⁻¹F)_ce)` over the
    /// columns of `i` and `j`.
    fn schur(&self, x: &CMatrix, zi: &CMatrix, lp_ratio: &[f64]) -> DMatrix<f64> {
        let m = self.m();
        let g1 = self.f.adjoint() * (x * &self.f);
        let g2 = self.f.adjoint() * (zi * &self.f);
        let mut mat = DMatrix::<f64>::zeros(m, m);
        for (i, &(lo, hi)) in self.ranges.iter().enumerate() {
            for (j, &(lo2, hi2)) in self.ranges.iter().enumerate().skip(i) {
                let mut v = 0.0;
                for c in lo..hi {
                    for e in lo2..hi2 {
                        v += (g1[(c, e)] * g2[(c, e)].conj()).re;
                    }
                }
                mat[(i, j)] = v;
                mat[(j, i)] = v;
            }
        }
        let k = self.k();
        if k > 0 {
            let base = self.n_eq;
            for i in 0..k {
                for j in 0..k {
                    mat[(base + i, base + j)] += lp_ratio[0];
                }
                mat[(base + i, base + i)] += lp_ratio[1 + i];
            }
        }
        mat
    }
}

/// Residual measures of one iterate.
#[derive(Debug, Clone, Copy)]
struct Residuals {
    pinf: f64,
    dinf: f64,
    gap: f64,
}

impl Residuals {
    fn within(&self, tol: &SolverTolerances, factor: f64) -> bool {
        self.pinf <= factor * tol.feas_tol && self.dinf <= factor * tol.feas_tol && self.gap <= factor * tol.gap_tol
    }
}

/// Status to report when the iteration has to stop early.
fn stopped(res: Option<Residuals>, tol: &SolverTolerances) -> SdpStatus {
    match res {
        Some(r) if r.within(tol, NEAR_FACTOR) => SdpStatus::NearOptimal,
        _ => SdpStatus::IterLimit,
    }
}

/// Infeasible-start primal-dual IPM on the standard form with the
/// equality rows `s_nᴴ X s_n = d` taken from the columns of `s`.
fn interior_point(c: &CMatrix, s: &CMatrix, d: f64, gains: &[&CMatrix], tol: &SolverTolerances) -> IpmOutput {
    let sp = Standard::new(s, d, gains);
    let n = sp.n;
    let (m, nl) = (sp.m(), sp.nl());
    let b = sp.b();
    let c_lp = sp.c_lp();

    let c_norm = c.norm();
    let a_norm = sp
        .ranges
        .iter()
        .map(|&(lo, hi)| {
            let cols = sp.f.columns(lo, hi - lo);
            (cols * cols.adjoint()).norm()
        })
        .fold(0.0, f64::max);
    let xi = (n as f64).sqrt().max(1.0);
    let eta = 1.0f64.max(c_norm).max(a_norm);
    let mut x = CMatrix::identity(n, n) * Complex64::new(xi, 0.0);
    let mut z = CMatrix::identity(n, n) * Complex64::new(eta, 0.0);
    let mut xl = vec![xi; nl];
    let mut zl = vec![eta; nl];
    let mut y = vec![0.0; m];

    let b_norm = norm(&b);
    let dual_scale = 1.0 + c_norm + norm(&c_lp);
    let cone_dim = (n + nl) as f64;
    let mut last: Option<Residuals> = None;
    let mut best_gap = f64::INFINITY;
    let mut idle = 0;

    for iter in 0..tol.max_iters {
        let Some(z_chol) = Cholesky::new(z.clone()) else {
            return IpmOutput { x, iterations: iter, status: stopped(last, tol) };
        };
        let zi = z_chol.inverse();

        let ax = sp.apply(&x);
        let alx = sp.apply_lp(&xl);
        let r_p: Vec<f64> = (0..m).map(|i| b[i] - ax[i] - alx[i]).collect();
        let r_d = c - sp.adjoint(&y) - &z;
        let aty = sp.adjoint_lp(&y);
        let r_dl: Vec<f64> = (0..nl).map(|i| c_lp[i] - aty[i] - zl[i]).collect();

        let mu = (trace_re(&x, &z) + dot(&xl, &zl)) / cone_dim;
        let pobj = trace_re(c, &x) + dot(&c_lp, &xl);
        let dobj = dot(&b, &y);
        let scale = 1.0 + pobj.abs() + dobj.abs();
        let res = Residuals {
            pinf: norm(&r_p) / (1.0 + b_norm),
            dinf: (r_d.norm_squared() + dot(&r_dl, &r_dl)).sqrt() / dual_scale,
            gap: ((pobj - dobj).abs()).max(mu * cone_dim) / scale,
        };
        log::trace!(
            "ipm {iter}: pinf {:.2e} dinf {:.2e} gap {:.2e} mu {mu:.2e} pobj {pobj:.8e} dobj {dobj:.8e}",
            res.pinf,
            res.dinf,
            res.gap
        );
        if res.within(tol, 1.0) {
            return IpmOutput { x, iterations: iter, status: SdpStatus::Optimal };
        }
        if res.gap < 0.9 * best_gap {
            best_gap = res.gap;
            idle = 0;
        } else {
            idle += 1;
            if idle >= IDLE_LIMIT {
                return IpmOutput { x, iterations: iter, status: stopped(Some(res), tol) };
            }
        }
        last = Some(res);

        let ratio: Vec<f64> = (0..nl).map(|i| xl[i] / zl[i]).collect();
        let mut schur = sp.schur(&x, &zi, &ratio);
        let chol = match Cholesky::new(schur.clone()) {
            Some(ch) => ch,
            None => {
                let bump = 1e-12 * (1.0 + schur.diagonal().amax());
                for i in 0..m {
                    schur[(i, i)] += bump;
                }
                match Cholesky::new(schur) {
                    Some(ch) => ch,
                    None => return IpmOutput { x, iterations: iter, status: stopped(last, tol) },
                }
            }
        };

        let xz = &x * &z;
        let direction = |rc: &CMatrix, rcl: &[f64]| -> (CMatrix, CMatrix, Vec<f64>, Vec<f64>, Vec<f64>) {
            // rhs = r_p − 𝒜((Rc − X R_d) Z⁻¹) − A_l((rc − x∘r_dl)/z)
            let t = (rc - &x * &r_d) * &zi;
            let at = sp.apply(&t);
            let lp_t: Vec<f64> = (0..nl).map(|i| (rcl[i] - xl[i] * r_dl[i]) / zl[i]).collect();
            let alt = sp.apply_lp(&lp_t);
            let rhs = DVector::from_iterator(m, (0..m).map(|i| r_p[i] - at[i] - alt[i]));
            let back = |dy: &[f64]| {
                let dz = &r_d - sp.adjoint(dy);
                let dx_raw = (rc - &x * &dz) * &zi;
                let dx = (&dx_raw + dx_raw.adjoint()) * Complex64::new(0.5, 0.0);
                let atdy = sp.adjoint_lp(dy);
                let dzl: Vec<f64> = (0..nl).map(|i| r_dl[i] - atdy[i]).collect();
                let dxl: Vec<f64> = (0..nl).map(|i| (rcl[i] - xl[i] * dzl[i]) / zl[i]).collect();
                (dx, dz, dxl, dzl)
            };
            let mut dy: Vec<f64> = chol.solve(&rhs).iter().copied().collect();
            let (mut dx, mut dz, mut dxl, mut dzl) = back(&dy);
            // Refine against the primal equations themselves, which also
            // absorbs rounding in the formed Schur complement.
            for _ in 0..REFINE_STEPS {
                let adx = sp.apply(&dx);
                let aldx = sp.apply_lp(&dxl);
                let res = DVector::from_iterator(m, (0..m).map(|i| r_p[i] - adx[i] - aldx[i]));
                if res.amax() <= f64::EPSILON * (1.0 + rhs.amax()) {
                    break;
                }
                let corr = chol.solve(&res);
                for i in 0..m {
                    dy[i] += corr[i];
                }
                (dx, dz, dxl, dzl) = back(&dy);
            }
            (dx, dz, dxl, dzl, dy)
        };

        // Predictor.
        let rc_aff = -xz.clone();
        let rcl_aff: Vec<f64> = (0..nl).map(|i| -xl[i] * zl[i]).collect();
        let (dx_a, dz_a, dxl_a, dzl_a, _) = direction(&rc_aff, &rcl_aff);
        let ap = max_step(&x, &dx_a, &xl, &dxl_a).min(1.0);
        let ad = max_step(&z, &dz_a, &zl, &dzl_a).min(1.0);
        let x_a = &x + &dx_a * Complex64::new(ap, 0.0);
        let z_a = &z + &dz_a * Complex64::new(ad, 0.0);
        let lp_aff: f64 = (0..nl).map(|i| (xl[i] + ap * dxl_a[i]) * (zl[i] + ad * dzl_a[i])).sum();
        let mu_aff = (trace_re(&x_a, &z_a) + lp_aff) / cone_dim;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        // Corrector.
        let mut rc = -xz - &dx_a * &dz_a;
        for i in 0..n {
            rc[(i, i)] += Complex64::new(sigma * mu, 0.0);
        }
        let rcl: Vec<f64> = (0..nl).map(|i| sigma * mu - xl[i] * zl[i] - dxl_a[i] * dzl_a[i]).collect();
        let (dx, dz, dxl, dzl, dy) = direction(&rc, &rcl);

        let gamma = 0.9 + 0.09 * ap.min(ad);
        let ap = (gamma * max_step(&x, &dx, &xl, &dxl)).min(1.0);
        let ad = (gamma * max_step(&z, &dz, &zl, &dzl)).min(1.0);
        if !(ap.is_finite() && ad.is_finite()) || ap.max(ad) < 1e-10 {
            return IpmOutput { x, iterations: iter, status: stopped(last, tol) };
        }

        x += &dx * Complex64::new(ap, 0.0);
        hermitize(&mut x);
        for i in 0..nl {
            xl[i] += ap * dxl[i];
        }
        z += &dz * Complex64::new(ad, 0.0);
        hermitize(&mut z);
        for i in 0..nl {
            zl[i] += ad * dzl[i];
        }
        for i in 0..m {
            y[i] += ad * dy[i];
        }
    }
    IpmOutput {
        x,
        iterations: tol.max_iters,
        status: stopped(last, tol),
    }
}

fn hermitize(a: &mut CMatrix) {
    let n = a.nrows();
    for i in 0..n {
        a[(i, i)].im = 0.0;
        for j in i + 1..n {
            let v = 0.5 * (a[(i, j)] + a[(j, i)].conj());
            a[(i, j)] = v;
            a[(j, i)] = v.conj();
        }
    }
}

/// Largest `α` keeping `X + αΔX ⪰ 0` and `x + αΔx ≥ 0`.
fn max_step(x: &CMatrix, dx: &CMatrix, xl: &[f64], dxl: &[f64]) -> f64 {
    let mut alpha = f64::INFINITY;
    for (v, d) in xl.iter().zip(dxl) {
        if *d < 0.0 {
            alpha = alpha.min(-v / d);
        }
    }
    let Some(chol) = Cholesky::new(x.clone()) else {
        return 0.0;
    };
    let l = chol.l();
    let Some(t) = l.solve_lower_triangular(dx) else {
        return 0.0;
    };
    let Some(s) = l.solve_lower_triangular(&t.adjoint()) else {
        return 0.0;
    };
    let s = (&s + s.adjoint()) * Complex64::new(0.5, 0.0);
    let lmin = s.symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min);
    if lmin < 0.0 {
        alpha = alpha.min(-1.0 / lmin);
    }
    alpha
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
