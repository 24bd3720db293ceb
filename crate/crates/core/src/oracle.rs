//! Ground truth for small instances: exhaustive lattice search, finite
//! differences and a scalar gain evaluator.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    beamforming_gain, element_amplitude, steering_vector, AngularGrid, ArrayConfig, Beamformer, RotationState,
};
use crate::optimizer::sca_gradient;

/// Largest array the exhaustive search accepts.
pub const MAX_BRUTE_FORCE_ANTENNAS: usize = 3;
/// Largest number of lattice configurations the exhaustive search accepts.
pub const MAX_CONFIGURATIONS: u64 = 100_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForceSpec {
    /// Relative phases per antenna after the first, over `[0, 2π)`.
    pub phase_grid_points: usize,
    /// Boresight rotations per antenna over `[−φ_max, φ_max]`.
    pub phi_grid_points: usize,
    /// Array rotations over `[−ψ_max, ψ_max]`.
    pub psi_grid_points: usize,
    pub grid: AngularGrid,
}

/// Step sizes of the searched lattice; zero on a single-point axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpacing {
    pub phase: f64,
    pub phi: f64,
    pub psi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BruteForceResult {
    pub worst_gain: f64,
    pub psi: f64,
    pub phi: Vec<f64>,
    pub w: Beamformer,
    pub spacing: LatticeSpacing,
    pub configurations: u64,
}

/// `points` values over `[−half, half]`, endpoints included; `{0}` when
/// the range or the count degenerates.
fn symmetric_axis(half: f64, points: usize) -> Vec<f64> {
    if points <= 1 || half == 0.0 {
        return vec![0.0];
    }
    let step = 2.0 * half / (points - 1) as f64;
    (0..points)
        .map(|i| if i + 1 == points { half } else { -half + i as f64 * step })
        .collect()
}

fn spacing(axis: &[f64]) -> f64 {
    if axis.len() < 2 {
        0.0
    } else {
        axis[1] - axis[0]
    }
}

impl BruteForceSpec {
    /// Lattice size, or `None` on overflow.
    pub fn configurations(&self, cfg: &ArrayConfig) -> Option<u64> {
        let n = cfg.n_antennas as u32;
        let psi = symmetric_axis(cfg.psi_max, self.psi_grid_points).len() as u64;
        let phi = symmetric_axis(cfg.phi_max, self.phi_grid_points).len() as u64;
        let phase = self.phase_grid_points as u64;
        psi.checked_mul(phi.checked_pow(n)?)?
            .checked_mul(phase.checked_pow(n.saturating_sub(1))?)
    }

    fn validate(&self, cfg: &ArrayConfig) -> Result<u64> {
        cfg.validate()?;
        if cfg.n_antennas > MAX_BRUTE_FORCE_ANTENNAS {
            return Err(Error::config(
                "oracle.n_antennas",
                format!("{} exceeds the exhaustive-search limit of {MAX_BRUTE_FORCE_ANTENNAS}", cfg.n_antennas),
            ));
        }
        for (name, v) in [
            ("oracle.phase_grid_points", self.phase_grid_points),
            ("oracle.phi_grid_points", self.phi_grid_points),
            ("oracle.psi_grid_points", self.psi_grid_points),
        ] {
            if v == 0 {
                return Err(Error::config(name, "must be at least 1"));
            }
        }
        if self.grid.is_empty() {
            return Err(Error::config("oracle.grid", "needs at least one direction"));
        }
        match self.configurations(cfg) {
            Some(c) if c <= MAX_CONFIGURATIONS => Ok(c),
            _ => Err(Error::config(
                "oracle",
                format!("lattice exceeds {MAX_CONFIGURATIONS} configurations"),
            )),
        }
    }
}

/// Best lattice point for one array rotation; ties keep the first index.
fn best_at_psi(
    psi: f64,
    phi_axis: &[f64],
    phases: &[Complex64],
    spec: &BruteForceSpec,
    cfg: &ArrayConfig,
) -> (f64, Vec<usize>, Vec<usize>) {
    let n = cfg.n_antennas;
    let q = spec.grid.len();
    let k = phi_axis.len();
    // resp[(q·n + m)·k + j]: response of antenna m at direction q for rotation j.
    let mut resp = vec![Complex64::new(0.0, 0.0); q * n * k];
    for (qi, &theta) in spec.grid.samples.iter().enumerate() {
        let v = steering_vector(theta, psi, cfg);
        for m in 0..n {
            for (j, &p) in phi_axis.iter().enumerate() {
                resp[(qi * n + m) * k + j] = v[m].conj() * element_amplitude(theta - psi - p, cfg);
            }
        }
    }

    let phi_count = k.pow(n as u32);
    let phase_count = phases.len().pow(n as u32 - 1);
    let mut best = (f64::NEG_INFINITY, vec![0; n], vec![0; n]);
    let mut phi_idx = vec![0usize; n];
    let mut phase_idx = vec![0usize; n];
    for a in 0..phi_count {
        decode(a, k, &mut phi_idx);
        for b in 0..phase_count {
            decode(b, phases.len(), &mut phase_idx[1..]);
            let mut worst = f64::INFINITY;
            for qi in 0..q {
                let mut s = Complex64::new(0.0, 0.0);
                for m in 0..n {
                    s += resp[(qi * n + m) * k + phi_idx[m]] * phases[phase_idx[m]];
                }
                worst = worst.min(s.norm_sqr());
                if worst <= best.0 {
                    break;
                }
            }
            if worst > best.0 {
                best = (worst, phi_idx.clone(), phase_idx.clone());
            }
        }
    }
    best
}

/// Mixed-radix digits of `index`, first digit most significant.
fn decode(mut index: usize, radix: usize, digits: &mut [usize]) {
    for d in digits.iter_mut().rev() {
        *d = index % radix;
        index /= radix;
    }
}

/// Exhaustive max-min search over array rotation, boresight rotations and
/// relative beamformer phases on a uniform lattice.
///
/// The first weight's phase is fixed at zero since the gain ignores a
/// global phase. The returned optimum is exact on the lattice; ties go to
/// the smallest `(ψ, φ, phase)` index.
pub fn brute_force_maxmin(spec: &BruteForceSpec, cfg: &ArrayConfig) -> Result<BruteForceResult> {
    let configurations = spec.validate(cfg)?;
    let n = cfg.n_antennas;
    let psi_axis = symmetric_axis(cfg.psi_max, spec.psi_grid_points);
    let phi_axis = symmetric_axis(cfg.phi_max, spec.phi_grid_points);
    let modulus = cfg.weight_modulus();
    let phase_step = 2.0 * PI / spec.phase_grid_points as f64;
    let phase_values: Vec<f64> = (0..spec.phase_grid_points).map(|i| i as f64 * phase_step).collect();
    let phases: Vec<Complex64> = phase_values.iter().map(|&t| Complex64::from_polar(modulus, t)).collect();

    let per_psi: Vec<_> = psi_axis
        .par_iter()
        .map(|&psi| best_at_psi(psi, &phi_axis, &phases, spec, cfg))
        .collect();
    let mut best = 0;
    for (i, r) in per_psi.iter().enumerate() {
        if r.0 > per_psi[best].0 {
            best = i;
        }
    }
    let (worst_gain, phi_idx, phase_idx) = per_psi[best].clone();
    let weights: Vec<f64> = phase_idx.iter().map(|&i| phase_values[i]).collect();
    Ok(BruteForceResult {
        worst_gain,
        psi: psi_axis[best],
        phi: phi_idx.iter().map(|&i| phi_axis[i]).collect(),
        w: Beamformer::from_phases(&weights),
        spacing: LatticeSpacing {
            phase: if spec.phase_grid_points > 1 && n > 1 { phase_step } else { 0.0 },
            phi: spacing(&phi_axis),
            psi: spacing(&psi_axis),
        },
        configurations,
    })
}

/// Worst relative error of the analytic rotation gradient against central
/// differences of the model gain, over random feasible configurations of
/// the default array.
pub fn fd_gradient_check(seed: u64, trials: usize) -> f64 {
    fd_gradient_check_with(&ArrayConfig::default(), seed, trials)
}

/// Finite-difference step.
const FD_STEP: f64 = 1e-6;
/// Incidence angles stay this far from the pattern edge at `±π/2`.
const EDGE_MARGIN: f64 = 0.01;

/// [`fd_gradient_check`] for a given array. The error of one trial is
/// `‖∇ − ∇_fd‖_∞ / max(‖∇‖_∞, 1e−3)`.
pub fn fd_gradient_check_with(cfg: &ArrayConfig, seed: u64, trials: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = cfg.n_antennas;
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < trials {
        let psi = rng.gen_range(-cfg.psi_max..=cfg.psi_max);
        let phi: Vec<f64> = (0..n).map(|_| rng.gen_range(-cfg.phi_max..=cfg.phi_max)).collect();
        let theta = rng.gen_range(-FRAC_PI_2..=FRAC_PI_2);
        let near_edge = phi.iter().any(|p| {
            let x = (theta - psi - p).abs();
            (x - FRAC_PI_2).abs() < EDGE_MARGIN + FD_STEP
        });
        if near_edge {
            continue;
        }
        let phases: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
        let w = Beamformer::from_phases(&phases);
        worst = worst.max(fd_error(theta, psi, &phi, &w, cfg));
        done += 1;
    }
    worst
}

fn fd_error(theta: f64, psi: f64, phi: &[f64], w: &Beamformer, cfg: &ArrayConfig) -> f64 {
    let analytic = sca_gradient(theta, psi, phi, w, cfg);
    let mut state = RotationState {
        psi,
        phi: phi.to_vec(),
    };
    let mut err: f64 = 0.0;
    let mut scale: f64 = 1e-3;
    for k in 0..phi.len() {
        state.phi[k] = phi[k] + FD_STEP;
        let up = beamforming_gain(theta, &state, w, cfg);
        state.phi[k] = phi[k] - FD_STEP;
        let down = beamforming_gain(theta, &state, w, cfg);
        state.phi[k] = phi[k];
        let fd = (up - down) / (2.0 * FD_STEP);
        err = err.max((analytic[k] - fd).abs());
        scale = scale.max(analytic[k].abs());
    }
    err / scale
}

/// `|Σ_n conj(v_n)·√G_n·w_n|²` by a plain scalar loop.
pub fn direct_gain_oracle(theta: f64, state: &RotationState, w: &Beamformer, cfg: &ArrayConfig) -> f64 {
    let incidence = theta - state.psi;
    let kd = 2.0 * PI * cfg.spacing_wl * incidence.sin();
    let mut re = 0.0;
    let mut im = 0.0;
    for n in 0..cfg.n_antennas {
        let off = incidence - state.phi[n];
        let amp = if off.abs() <= FRAC_PI_2 {
            (cfg.g_max * off.cos().max(0.0).powf(2.0 * cfg.directivity_p)).sqrt()
        } else {
            0.0
        };
        // conj(v_n) = cos(n·kd) − j·sin(n·kd)
        let (s, c) = (n as f64 * kd).sin_cos();
        let (wr, wi) = (w.weights[n].re, w.weights[n].im);
        re += amp * (c * wr + s * wi);
        im += amp * (c * wi - s * wr);
    }
    re * re + im * im
}
