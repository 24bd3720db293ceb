//! Beamformer update: semidefinite relaxation with a reweighted log-det
//! penalty pushing the relaxed solution toward rank one.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::AlgoSettings;
use crate::error::{Error, Result};
use crate::kernel::{hermitian_eigen, principal_eigpair, rank_metric, solve_sdp_seeded, CMatrix, SdpProblem, SdpStatus};
use crate::model::{array_response_into, worst_gain_raw, AngularGrid, ArrayConfig, Beamformer};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SdrTermination {
    /// `λ_max / Tr ≥ 1 − δ`.
    RankOne,
    /// Penalty budget exhausted before reaching rank one.
    RankCapHit,
    /// The SDP solver stopped far from optimal.
    SolverLimit,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SdrOutcome {
    pub w: Beamformer,
    /// True sampled worst-case gain of `w`.
    pub tau: f64,
    /// Rank metric of the final relaxed solution.
    pub rank_metric: f64,
    /// Relaxed `τ` of the unpenalized SDP, an upper bound for this `φ`.
    pub relaxed_bound: f64,
    pub termination: SdrTermination,
    /// SDP solves, including the unpenalized one.
    pub sdp_solves: usize,
}

/// `(W + ζI)⁻¹` and `(W + ζI)^{1/2}`.
fn penalty_matrices(w: &CMatrix, zeta: f64) -> Result<(CMatrix, CMatrix)> {
    let (values, vectors) = hermitian_eigen(w)?;
    let n = w.nrows();
    let mut inv = CMatrix::zeros(n, n);
    let mut root = CMatrix::zeros(n, n);
    for (k, &l) in values.iter().enumerate() {
        let l = l.max(0.0) + zeta;
        let v = vectors.column(k);
        let outer = v * v.adjoint();
        inv += &outer * Complex64::new(1.0 / l, 0.0);
        root += outer * Complex64::new(l.sqrt(), 0.0);
    }
    let sym = |a: CMatrix| (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
    Ok((sym(inv), sym(root)))
}

fn recover(w: &CMatrix) -> Result<Beamformer> {
    let (_, v) = principal_eigpair(w)?;
    Ok(Beamformer::from_phases_of(v.as_slice()))
}

/// Phase projections of `RANDOMIZATIONS` draws `ξ ~ CN(0, W)`, scored by
/// true worst-case gain alongside the principal eigenvector.
const RANDOMIZATIONS: usize = 64;
const RANDOM_SEED: u64 = 0x5eed;
/// Penalized solves in a row without rank or candidate progress before the
/// loop gives up.
const STALL_LIMIT: usize = 5;

struct Recovery<'a> {
    grid: &'a AngularGrid,
    psi: f64,
    phi: &'a [f64],
    cfg: &'a ArrayConfig,
    rng: ChaCha8Rng,
    best_w: Option<Beamformer>,
    best_tau: f64,
}

impl Recovery<'_> {
    fn offer(&mut self, w: Beamformer) -> f64 {
        let gain = worst_gain_raw(self.grid, self.psi, self.phi, &w.weights, self.cfg);
        if self.best_w.is_none() || gain > self.best_tau {
            self.best_tau = gain;
            self.best_w = Some(w);
        }
        gain
    }

    /// Offers the eigenvector projection and the randomized candidates of
    /// `w`; returns the eigenvector candidate's gain.
    fn offer_all(&mut self, w: &CMatrix) -> Result<f64> {
        let gain = self.offer(recover(w)?);
        let (values, vectors) = hermitian_eigen(w)?;
        let n = w.nrows();
        let roots: Vec<f64> = values.iter().map(|l| l.max(0.0).sqrt()).collect();
        let mut xi = vec![Complex64::new(0.0, 0.0); n];
        for _ in 0..RANDOMIZATIONS {
            xi.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            for (k, &r) in roots.iter().enumerate() {
                if r == 0.0 {
                    continue;
                }
                let re: f64 = self.rng.sample(StandardNormal);
                let im: f64 = self.rng.sample(StandardNormal);
                let c = Complex64::new(re, im) * (r * std::f64::consts::FRAC_1_SQRT_2);
                for (i, z) in xi.iter_mut().enumerate() {
                    *z += vectors[(i, k)] * c;
                }
            }
            self.offer(Beamformer::from_phases_of(&xi));
        }
        Ok(gain)
    }
}

/// Penalized SDR for the analog beamformer at fixed rotations.
///
/// The first SDP is the plain relaxation. Each later one linearizes
/// `ln det(W + ζI)` at the previous solution, adding `−η·Tr((W_prev + ζI)⁻¹ W)`
/// to the objective with `η` growing by `κ` per iteration. Every relaxed
/// solution yields candidates: the phase projection of its principal
/// eigenvector and of a fixed-seed set of Gaussian draws with covariance
/// `W`. The returned beamformer is the best candidate by true worst-case gain.
pub fn sdr_w_step(
    grid: &AngularGrid,
    psi: f64,
    phi: &[f64],
    cfg: &ArrayConfig,
    settings: &AlgoSettings,
) -> Result<SdrOutcome> {
    let n = cfg.n_antennas;
    let mut a = vec![Complex64::new(0.0, 0.0); n];
    let vectors: Vec<Vec<Complex64>> = grid
        .samples
        .iter()
        .map(|&theta| {
            array_response_into(theta, psi, phi, cfg, &mut a);
            a.clone()
        })
        .collect();
    if grid.is_empty() {
        return Err(Error::Domain("beamformer update over an empty grid".into()));
    }
    if vectors.iter().all(|v| v.iter().all(|z| z.norm_sqr() == 0.0)) {
        return Ok(SdrOutcome {
            w: Beamformer::uniform(n),
            tau: 0.0,
            rank_metric: 1.0,
            relaxed_bound: 0.0,
            termination: SdrTermination::RankOne,
            sdp_solves: 0,
        });
    }

    let diag = 1.0 / n as f64;
    let tol = settings.sdp_tolerances();
    let mut prob = SdpProblem::with_rank_one_gains(n, CMatrix::zeros(n, n), &vectors, diag)?;
    let first = solve_sdp_seeded(&prob, &tol, &[])?;
    let relaxed_bound = first.tau;
    let mut solves = 1;

    let mut pool = Recovery {
        grid,
        psi,
        phi,
        cfg,
        rng: ChaCha8Rng::seed_from_u64(RANDOM_SEED),
        best_w: None,
        best_tau: 0.0,
    };
    let mut metric = rank_metric(&first.w)?;
    if metric >= 1.0 - settings.rank_delta {
        pool.offer(recover(&first.w)?);
    } else {
        pool.offer_all(&first.w)?;
    }
    let mut w_prev = first.w;
    let mut seed = first.working_set;
    let mut status = first.status;
    let mut eta = settings.penalty_init;
    let mut termination = SdrTermination::RankCapHit;
    let mut idle = 0;

    loop {
        if status == SdpStatus::IterLimit {
            termination = SdrTermination::SolverLimit;
            break;
        }
        if metric >= 1.0 - settings.rank_delta {
            termination = SdrTermination::RankOne;
            break;
        }
        if solves > settings.max_penalty_iters || idle >= STALL_LIMIT {
            break;
        }
        let (phi_mat, root) = penalty_matrices(&w_prev, settings.logdet_eps)?;
        prob.objective = phi_mat * Complex64::new(-eta, 0.0);
        prob.preconditioner = Some(root);

        let sol = solve_sdp_seeded(&prob, &tol, &seed)?;
        solves += 1;
        eta *= settings.penalty_growth;
        let before = (metric, pool.best_tau);
        metric = rank_metric(&sol.w)?;
        let gain = if metric >= 1.0 - settings.rank_delta {
            pool.offer(recover(&sol.w)?)
        } else {
            pool.offer_all(&sol.w)?
        };
        log::trace!(
            "penalty {solves}: eta {:.3e} relaxed tau {:.6} rank {metric:.6} eigvec gain {gain:.6} {:?}",
            eta / settings.penalty_growth,
            sol.tau,
            sol.status
        );
        if metric > before.0 + settings.rank_delta || pool.best_tau > before.1 {
            idle = 0;
        } else {
            idle += 1;
        }
        status = sol.status;
        seed = sol.working_set;
        w_prev = sol.w;
    }

    let w = pool.best_w.take().expect("at least one candidate was offered");
    Ok(SdrOutcome {
        w,
        tau: pool.best_tau,
        rank_metric: metric,
        relaxed_bound,
        termination,
        sdp_solves: solves,
    })
}
