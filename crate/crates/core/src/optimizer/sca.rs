//! Rotation update: linearized max-min LP with a backtracking safeguard.

use num_complex::Complex64;

use super::AlgoSettings;
use crate::error::{Error, Result};
use crate::kernel::{solve_lp, LpProblem, LpStatus};
use crate::model::{
    array_response_into, combine, element_amplitude_dphi, steering_vector, worst_gain_raw, AngularGrid, ArrayConfig,
    Beamformer,
};

const MAX_HALVINGS: usize = 20;

/// Gradient of `g_q(φ) = |aᴴ(θ_q) w|²` with respect to the boresight
/// rotations.
pub fn sca_gradient(theta_q: f64, psi: f64, phi: &[f64], w: &Beamformer, cfg: &ArrayConfig) -> Vec<f64> {
    let mut a = vec![Complex64::new(0.0, 0.0); cfg.n_antennas];
    let mut grad = vec![0.0; cfg.n_antennas];
    gradient_into(theta_q, psi, phi, &w.weights, cfg, &mut a, &mut grad);
    grad
}

fn gradient_into(
    theta: f64,
    psi: f64,
    phi: &[f64],
    w: &[Complex64],
    cfg: &ArrayConfig,
    a: &mut [Complex64],
    grad: &mut [f64],
) -> f64 {
    array_response_into(theta, psi, phi, cfg, a);
    let s = combine(a, w);
    let v = steering_vector(theta, psi, cfg);
    let theta_e = theta - psi;
    for n in 0..phi.len() {
        let d = element_amplitude_dphi(theta_e - phi[n], cfg);
        grad[n] = 2.0 * (s.conj() * v[n].conj() * w[n]).re * d;
    }
    s.norm_sqr()
}

/// One safeguarded SCA step from `phi_i`.
///
/// Returns the new rotations and their true sampled worst-case gain,
/// which is never below the gain at `phi_i`.
pub fn sca_phi_step(
    grid: &AngularGrid,
    psi: f64,
    phi_i: &[f64],
    w: &Beamformer,
    cfg: &ArrayConfig,
    settings: &AlgoSettings,
) -> Result<(Vec<f64>, f64)> {
    let n = cfg.n_antennas;
    let current = worst_gain_raw(grid, psi, phi_i, &w.weights, cfg);

    // Variables: [Δφ_1 … Δφ_N, τ] with Δφ = φ − φⁱ.
    let mut objective = vec![0.0; n + 1];
    objective[n] = 1.0;
    let mut lp = LpProblem::new(objective);
    for (k, &p) in phi_i.iter().enumerate() {
        lp.bounds[k] = ((-cfg.phi_max - p).min(0.0), (cfg.phi_max - p).max(0.0));
    }
    // Δφ = 0 attains τ = min_q g_q, so this bound never cuts the optimum.
    lp.bounds[n] = (current, f64::INFINITY);

    let mut a = vec![Complex64::new(0.0, 0.0); n];
    let mut grad = vec![0.0; n];
    for &theta in &grid.samples {
        let g = gradient_into(theta, psi, phi_i, &w.weights, cfg, &mut a, &mut grad);
        // τ − ∇gᵀΔφ ≤ g
        let mut row: Vec<f64> = grad.iter().map(|d| -d).collect();
        row.push(1.0);
        lp.push(row, g);
    }

    let sol = solve_lp(&lp, &settings.lp_tolerances())?;
    match sol.status {
        LpStatus::Optimal => {}
        LpStatus::Infeasible => return Err(Error::Solver("SCA linear program reported infeasible".into())),
        LpStatus::Unbounded => return Err(Error::Solver("SCA linear program reported unbounded".into())),
        LpStatus::IterLimit => {
            log::warn!("SCA linear program hit its pivot limit; keeping the current rotation");
            return Ok((phi_i.to_vec(), current));
        }
    }
    let predicted = sol.x[n];
    if predicted <= current + 1e-12 * current.abs().max(1.0) {
        return Ok((phi_i.to_vec(), current));
    }

    let step: Vec<f64> = sol.x[..n].to_vec();
    let mut frac = 1.0;
    let mut trial = vec![0.0; n];
    for _ in 0..=MAX_HALVINGS {
        for k in 0..n {
            trial[k] = (phi_i[k] + frac * step[k]).clamp(-cfg.phi_max, cfg.phi_max);
        }
        let gain = worst_gain_raw(grid, psi, &trial, &w.weights, cfg);
        if gain > current {
            return Ok((trial, gain));
        }
        frac *= 0.5;
    }
    Ok((phi_i.to_vec(), current))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{element_gain, sample_region, CoverageRegion};
    use std::f64::consts::PI;

    fn single(n: usize) -> ArrayConfig {
        ArrayConfig {
            n_antennas: n,
            ..ArrayConfig::default()
        }
    }

    #[test]
    fn scalar_gradient() {
        let cfg = single(1);
        let w = Beamformer::uniform(1);
        let g = sca_gradient(PI / 6.0, 0.0, &[0.0], &w, &cfg);
        assert!((g[0] - 2.0 * 3.0f64.sqrt()).abs() < 1e-12, "{}", g[0]);
    }

    #[test]
    fn gradient_vanishes_on_boresight_and_outside_support() {
        let cfg = single(3);
        let w = Beamformer::from_phases(&[0.1, 0.7, -0.4]);
        let g = sca_gradient(0.5, 0.25, &[0.25, 0.25, -1.0], &w, &cfg);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[1], 0.0);
        assert!(g[2] != 0.0);
        let g = sca_gradient(0.3, 0.0, &[0.3 - PI / 2.0 - 0.1, 0.3, 0.3], &w, &cfg);
        assert_eq!(g[0], 0.0);
    }

    #[test]
    fn stationary_point_is_kept() {
        let cfg = single(4);
        let grid = sample_region(&CoverageRegion::direction(0.0).unwrap(), 1).unwrap();
        let w = Beamformer::uniform(4);
        let phi = vec![0.0; 4];
        let (next, tau) = sca_phi_step(&grid, 0.0, &phi, &w, &cfg, &AlgoSettings::default()).unwrap();
        assert_eq!(next, phi);
        assert!((tau - 16.0).abs() < 1e-12);
    }

    #[test]
    fn single_antenna_turns_toward_source() {
        let cfg = single(1);
        let grid = sample_region(&CoverageRegion::direction(PI / 6.0).unwrap(), 1).unwrap();
        let w = Beamformer::uniform(1);
        let (next, tau) = sca_phi_step(&grid, 0.0, &[0.0], &w, &cfg, &AlgoSettings::default()).unwrap();
        assert!(next[0] > 0.0);
        assert!(tau > element_gain(PI / 6.0, &cfg));
        assert!((tau - element_gain(PI / 6.0 - next[0], &cfg)).abs() < 1e-12);
    }

    #[test]
    fn wide_region_step_never_decreases() {
        let cfg = single(6);
        let grid = sample_region(&CoverageRegion::new(vec![(-1.2, 1.2)]).unwrap(), 41).unwrap();
        let w = Beamformer::from_phases(&[0.0, 1.3, -0.2, 2.2, 0.9, -1.7]);
        let mut phi = vec![0.9, -0.9, 0.5, -0.5, 0.0, 1.0];
        let mut last = worst_gain_raw(&grid, 0.2, &phi, &w.weights, &cfg);
        for _ in 0..10 {
            let (next, tau) = sca_phi_step(&grid, 0.2, &phi, &w, &cfg, &AlgoSettings::default()).unwrap();
            assert!(tau >= last);
            assert!(next.iter().all(|p| p.abs() <= cfg.phi_max));
            last = tau;
            phi = next;
        }
    }
}
