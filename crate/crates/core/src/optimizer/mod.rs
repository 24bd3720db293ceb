//! Alternating optimization of boresight rotations and the analog
//! beamformer, wrapped in an exhaustive search over the array rotation.

mod sca;
mod sdr;

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use sca::{sca_gradient, sca_phi_step};
pub use sdr::{sdr_w_step, SdrOutcome, SdrTermination};

use crate::error::{Error, Result};
use crate::kernel::SolverTolerances;
use crate::model::{steering_vector, worst_gain_raw, AngularGrid, ArrayConfig, Beamformer, CoverageRegion};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AlgoSettings {
    /// Relative improvement below which the AO loop stops.
    pub ao_tol: f64,
    /// Relative improvement below which the SCA loop stops.
    pub sca_tol: f64,
    /// Relative gain a beamformer update must add to replace the
    /// incumbent.
    pub sdr_tol: f64,
    /// Initial log-det penalty weight `η⁽⁰⁾`.
    pub penalty_init: f64,
    /// Growth factor `κ` of the penalty weight.
    pub penalty_growth: f64,
    /// Rank-one threshold `δ` on `1 − λ_max/Tr`.
    pub rank_delta: f64,
    /// Log-det smoothing `ζ`.
    pub logdet_eps: f64,
    /// Number `L` of array-rotation grid points.
    pub outer_grid_l: usize,
    pub max_ao_iters: usize,
    pub max_sca_iters: usize,
    pub max_penalty_iters: usize,
    pub solver: SolverTolerances,
}

impl Default for AlgoSettings {
    fn default() -> Self {
        AlgoSettings {
            ao_tol: 1e-5,
            sca_tol: 1e-4,
            sdr_tol: 1e-4,
            penalty_init: 1e-3,
            penalty_growth: 1.2,
            rank_delta: 1e-4,
            logdet_eps: 1e-6,
            outer_grid_l: 100,
            max_ao_iters: 50,
            max_sca_iters: 100,
            max_penalty_iters: 50,
            solver: SolverTolerances::default(),
        }
    }
}

impl AlgoSettings {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("algo.ao_tol", self.ao_tol),
            ("algo.sca_tol", self.sca_tol),
            ("algo.sdr_tol", self.sdr_tol),
            ("algo.penalty_init", self.penalty_init),
            ("algo.rank_delta", self.rank_delta),
            ("algo.logdet_eps", self.logdet_eps),
            ("algo.solver.feas_tol", self.solver.feas_tol),
            ("algo.solver.gap_tol", self.solver.gap_tol),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(name, format!("{v} must be finite and positive")));
            }
        }
        if !(self.penalty_growth.is_finite() && self.penalty_growth > 1.0) {
            return Err(Error::config("algo.penalty_growth", "must be greater than 1"));
        }
        if self.rank_delta >= 1.0 {
            return Err(Error::config("algo.rank_delta", "must be below 1"));
        }
        for (name, v) in [
            ("algo.outer_grid_l", self.outer_grid_l),
            ("algo.max_ao_iters", self.max_ao_iters),
            ("algo.max_sca_iters", self.max_sca_iters),
            ("algo.solver.max_iters", self.solver.max_iters),
        ] {
            if v == 0 {
                return Err(Error::config(name, "must be at least 1"));
            }
        }
        Ok(())
    }

    pub(crate) fn sdp_tolerances(&self) -> SolverTolerances {
        self.solver
    }

    pub(crate) fn lp_tolerances(&self) -> SolverTolerances {
        SolverTolerances {
            max_iters: SolverTolerances::lp().max_iters,
            ..self.solver
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    /// Improvement fell below `ao_tol`.
    Converged,
    /// `max_ao_iters` reached.
    IterCap,
    /// Converged, but the last beamformer update hit the penalty budget.
    RankCapHit,
}

impl Termination {
    pub(crate) fn after(sdr: SdrTermination) -> Self {
        match sdr {
            SdrTermination::RankOne => Termination::Converged,
            _ => Termination::RankCapHit,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IterCounts {
    pub ao: usize,
    pub sca: usize,
    /// SDP solves over all beamformer updates.
    pub sdr: usize,
}

/// Diagnostics of one beamformer update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdrRecord {
    pub rank_metric: f64,
    pub termination: SdrTermination,
    /// Whether the recovered beamformer replaced the incumbent.
    pub accepted: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InnerSolution {
    pub psi: f64,
    pub phi: Vec<f64>,
    pub w: Beamformer,
    pub worst_gain: f64,
    /// Worst-case gain after initialization and after every rotation and
    /// beamformer update.
    pub trace: Vec<f64>,
    pub iters: IterCounts,
    pub sdr_steps: Vec<SdrRecord>,
    pub termination: Termination,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReport {
    pub psi_star: f64,
    pub inner: InnerSolution,
    /// `(ψ_ℓ, best worst-case gain at ψ_ℓ)` in grid order.
    pub per_psi_curve: Vec<(f64, f64)>,
    pub wall_time_ms: f64,
    pub settings: AlgoSettings,
}

/// Every boresight toward the region center, clamped to the rotation box.
pub fn init_phi(region: &CoverageRegion, psi: f64, cfg: &ArrayConfig) -> Vec<f64> {
    let target = (region.center() - psi).clamp(-cfg.phi_max, cfg.phi_max);
    vec![target; cfg.n_antennas]
}

/// Weights steered at the region center.
pub fn init_w(region: &CoverageRegion, psi: f64, cfg: &ArrayConfig) -> Beamformer {
    Beamformer::from_phases_of(&steering_vector(region.center(), psi, cfg))
}

pub(crate) fn improved(new: f64, old: f64, tol: f64) -> bool {
    new - old > tol * old.abs().max(1e-12)
}

/// AO for one array rotation: [`init_phi`] and [`init_w`], then alternate
/// SCA rotation updates (to convergence) and SDR beamformer updates.
pub fn solve_inner(
    region: &CoverageRegion,
    grid: &AngularGrid,
    psi: f64,
    cfg: &ArrayConfig,
    settings: &AlgoSettings,
) -> Result<InnerSolution> {
    let phi = init_phi(region, psi, cfg);
    let w = init_w(region, psi, cfg);
    solve_inner_from(grid, psi, phi, w, cfg, settings)
}

/// [`solve_inner`] from a given starting point.
pub fn solve_inner_from(
    grid: &AngularGrid,
    psi: f64,
    mut phi: Vec<f64>,
    mut w: Beamformer,
    cfg: &ArrayConfig,
    settings: &AlgoSettings,
) -> Result<InnerSolution> {
    cfg.validate()?;
    settings.validate()?;
    if grid.is_empty() {
        return Err(Error::Domain("optimization over an empty grid".into()));
    }
    if phi.len() != cfg.n_antennas || w.len() != cfg.n_antennas {
        return Err(Error::Structure("start point does not match the array size".into()));
    }
    crate::model::RotationState {
        psi,
        phi: phi.clone(),
    }
    .check(cfg)?;

    let mut gain = worst_gain_raw(grid, psi, &phi, &w.weights, cfg);
    let mut trace = vec![gain];
    let mut iters = IterCounts::default();
    let mut sdr_steps = Vec::new();
    let mut termination = Termination::IterCap;

    for _ in 0..settings.max_ao_iters {
        iters.ao += 1;
        let start = gain;

        for _ in 0..settings.max_sca_iters {
            iters.sca += 1;
            let (next, g) = sca_phi_step(grid, psi, &phi, &w, cfg, settings)?;
            let more = improved(g, gain, settings.sca_tol);
            phi = next;
            gain = g;
            if !more {
                break;
            }
        }
        trace.push(gain);

        let out = sdr_w_step(grid, psi, &phi, cfg, settings)?;
        iters.sdr += out.sdp_solves;
        let accepted = improved(out.tau, gain, settings.sdr_tol);
        if accepted {
            w = out.w;
            gain = out.tau;
        }
        sdr_steps.push(SdrRecord {
            rank_metric: out.rank_metric,
            termination: out.termination,
            accepted,
        });
        trace.push(gain);

        if !improved(gain, start, settings.ao_tol) {
            termination = Termination::after(out.termination);
            break;
        }
    }

    let worst_gain = worst_gain_raw(grid, psi, &phi, &w.weights, cfg);
    Ok(InnerSolution {
        psi,
        phi,
        w,
        worst_gain,
        trace,
        iters,
        sdr_steps,
        termination,
    })
}

/// `ψ_ℓ = −ψ_max + (ℓ−1)·2ψ_max/(L−1)`, or `{0}` when `L = 1` or
/// `ψ_max = 0`.
pub fn psi_grid(psi_max: f64, l: usize) -> Vec<f64> {
    if l <= 1 || psi_max == 0.0 {
        return vec![0.0];
    }
    let step = 2.0 * psi_max / (l - 1) as f64;
    (0..l)
        .map(|i| if i + 1 == l { psi_max } else { -psi_max + i as f64 * step })
        .collect()
}

/// Evaluates `inner` at every grid rotation in parallel and keeps the best,
/// preferring the smallest `ψ` on ties.
pub(crate) fn outer_search<F>(psis: &[f64], settings: &AlgoSettings, inner: F) -> Result<SolveReport>
where
    F: Fn(f64) -> Result<InnerSolution> + Sync,
{
    let start = Instant::now();
    let results: Vec<InnerSolution> = psis.par_iter().map(|&psi| inner(psi)).collect::<Result<_>>()?;
    let report = select_best(results, settings);
    Ok(SolveReport {
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
        ..report
    })
}

pub(crate) fn select_best(results: Vec<InnerSolution>, settings: &AlgoSettings) -> SolveReport {
    let per_psi_curve: Vec<(f64, f64)> = results.iter().map(|r| (r.psi, r.worst_gain)).collect();
    let mut best = 0;
    for (i, r) in results.iter().enumerate() {
        let b = &results[best];
        if r.worst_gain > b.worst_gain || (r.worst_gain == b.worst_gain && r.psi < b.psi) {
            best = i;
        }
    }
    let inner = results.into_iter().nth(best).expect("outer grid is never empty");
    SolveReport {
        psi_star: inner.psi,
        inner,
        per_psi_curve,
        wall_time_ms: 0.0,
        settings: settings.clone(),
    }
}

/// Full hierarchical optimization: AO at every array-rotation grid point.
pub fn solve_outer(
    region: &CoverageRegion,
    grid: &AngularGrid,
    cfg: &ArrayConfig,
    settings: &AlgoSettings,
) -> Result<SolveReport> {
    cfg.validate()?;
    settings.validate()?;
    region.validate()?;
    let psis = psi_grid(cfg.psi_max, settings.outer_grid_l);
    outer_search(&psis, settings, |psi| solve_inner(region, grid, psi, cfg, settings))
}
