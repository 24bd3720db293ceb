//! Benchmark architectures with restricted rotation freedom, and a runner
//! that solves all of them on one grid.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    combine, element_amplitude, steering_vector, worst_gain_raw, AngularGrid, ArrayConfig, Beamformer, CoverageRegion,
};
use crate::optimizer::{
    improved, init_phi, init_w, outer_search, psi_grid, sdr_w_step, solve_inner, solve_inner_from, solve_outer,
    AlgoSettings, InnerSolution, IterCounts, SdrRecord, SolveReport, Termination,
};

/// Coordinate-search resolution for [`solve_ars`].
pub const ARS_STEP: f64 = std::f64::consts::PI / 180.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SchemeId {
    /// Array and per-antenna rotation.
    HR6DMA,
    /// Per-antenna rotation only.
    AntennaRA,
    /// Array rotation only.
    ArrayRA,
    /// No rotation.
    NRA,
    /// Per-antenna rotation by coordinate grid search.
    ARS,
    /// Per-antenna boresights at the region center.
    CSAR,
}

impl SchemeId {
    pub const ALL: [SchemeId; 6] = [
        SchemeId::HR6DMA,
        SchemeId::AntennaRA,
        SchemeId::ArrayRA,
        SchemeId::NRA,
        SchemeId::ARS,
        SchemeId::CSAR,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SchemeId::HR6DMA => "HR6DMA",
            SchemeId::AntennaRA => "AntennaRA",
            SchemeId::ArrayRA => "ArrayRA",
            SchemeId::NRA => "NRA",
            SchemeId::ARS => "ARS",
            SchemeId::CSAR => "CSAR",
        }
    }
}

impl fmt::Display for SchemeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SchemeId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SchemeId::ALL
            .into_iter()
            .find(|id| id.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::config("schemes", format!("unknown scheme `{s}`")))
    }
}

/// One beamformer update at fixed rotations, from the same starting
/// beamformer and with the same acceptance rule as the AO loop.
fn sdr_only(
    region: &CoverageRegion,
    grid: &AngularGrid,
    psi: f64,
    phi: Vec<f64>,
    cfg: &ArrayConfig,
    settings: &AlgoSettings,
) -> Result<InnerSolution> {
    let mut w = init_w(region, psi, cfg);
    let mut gain = worst_gain_raw(grid, psi, &phi, &w.weights, cfg);
    let mut trace = vec![gain];
    let out = sdr_w_step(grid, psi, &phi, cfg, settings)?;
    let accepted = improved(out.tau, gain, settings.sdr_tol);
    if accepted {
        w = out.w;
        gain = out.tau;
    }
    trace.push(gain);
    Ok(InnerSolution {
        psi,
        phi,
        w,
        worst_gain: gain,
        trace,
        iters: IterCounts {
            ao: 1,
            sca: 0,
            sdr: out.sdp_solves,
        },
        sdr_steps: vec![SdrRecord {
            rank_metric: out.rank_metric,
            termination: out.termination,
            accepted,
        }],
        termination: Termination::after(out.termination),
    })
}

fn checked(region: &CoverageRegion, cfg: &ArrayConfig, settings: &AlgoSettings) -> Result<()> {
    region.validate()?;
    cfg.validate()?;
    settings.validate()
}

/// Fixed array with all boresights at broadside; only the beamformer is
/// optimized.
pub fn solve_nra(
    region: &CoverageRegion,
    grid: &AngularGrid,
    cfg: &ArrayConfig,
    settings: &AlgoSettings,
) -> Result<SolveReport> {
    checked(region, cfg, settings)?;
    let n = cfg.n_antennas;
    outer_search(&[0.0], settings, |psi| sdr_only(region, grid, psi, vec![0.0; n], cfg, settings))
}

/// Array rotation over the outer grid with broadside boresights.
pub fn solve_array_ra(
    region: &CoverageRegion,
    grid: &AngularGrid,
    cfg: &ArrayConfig,
    settings: &AlgoSettings,
) -> Result<SolveReport> {
    checked(region, cfg, settings)?;
    let n = cfg.n_antennas;
    let psis = psi_grid(cfg.psi_max, settings.outer_grid_l);
    outer_search(&psis, settings, |psi| sdr_only(region, grid, psi, vec![0.0; n], cfg, settings))
}

/// Per-antenna rotation with the array held at `ψ = 0`.
pub fn solve_antenna_ra(
    region: &CoverageRegion,
    grid: &AngularGrid,
    cfg: &ArrayConfig,
    settings: &AlgoSettings,
) -> Result<SolveReport> {
    checked(region, cfg, settings)?;
    outer_search(&[0.0], settings, |psi| solve_inner(region, grid, psi, cfg, settings))
}

/// Boresights at the region center for every array rotation; only the
/// beamformer is optimized.
pub fn solve_csar(
    region: &CoverageRegion,
    grid: &AngularGrid,
    cfg: &ArrayConfig,
    settings: &AlgoSettings,
) -> Result<SolveReport> {
    checked(region, cfg, settings)?;
    let psis = psi_grid(cfg.psi_max, settings.outer_grid_l);
    outer_search(&psis, settings, |psi| sdr_only(region, grid, psi, init_phi(region, psi, cfg), cfg, settings))
}

/// Candidate rotations for the coordinate search: `[−φ_max, φ_max]` at
/// [`ARS_STEP`], endpoints included.
pub fn ars_grid(phi_max: f64) -> Vec<f64> {
    let m = (2.0 * phi_max / ARS_STEP + 1e-9).floor() as usize;
    let mut out: Vec<f64> = (0..=m).map(|k| -phi_max + k as f64 * ARS_STEP).collect();
    let last = out.len() - 1;
    if phi_max - out[last] > 1e-9 {
        out.push(phi_max);
    } else {
        out[last] = phi_max;
    }
    out
}

fn snap(value: f64, grid: &[f64]) -> f64 {
    let mut best = grid[0];
    for &g in grid {
        if (g - value).abs() < (best - value).abs() {
            best = g;
        }
    }
    best
}

/// Per-direction data for the coordinate sweep.
struct Sweep<'a> {
    theta_e: Vec<f64>,
    steer: Vec<Vec<Complex64>>,
    cfg: &'a ArrayConfig,
}

impl<'a> Sweep<'a> {
    fn new(grid: &AngularGrid, psi: f64, cfg: &'a ArrayConfig) -> Self {
        Sweep {
            theta_e: grid.samples.iter().map(|t| t - psi).collect(),
            steer: grid.samples.iter().map(|&t| steering_vector(t, psi, cfg)).collect(),
            cfg,
        }
    }

    fn combined(&self, phi: &[f64], w: &[Complex64]) -> Vec<Complex64> {
        let mut a = vec![Complex64::new(0.0, 0.0); phi.len()];
        self.theta_e
            .iter()
            .zip(&self.steer)
            .map(|(&te, v)| {
                for n in 0..phi.len() {
                    a[n] = v[n] * element_amplitude(te - phi[n], self.cfg);
                }
                combine(&a, w)
            })
            .collect()
    }

    /// One pass over the antennas. Each `φ_n` moves to the candidate with
    /// the largest worst-case gain, staying put unless strictly better.
    fn pass(&self, phi: &mut [f64], w: &[Complex64], candidates: &[f64]) -> f64 {
        let mut s = self.combined(phi, w);
        let mut current = s.iter().map(|z| z.norm_sqr()).fold(f64::INFINITY, f64::min);
        for n in 0..phi.len() {
            let old: Vec<f64> = self.theta_e.iter().map(|te| element_amplitude(te - phi[n], self.cfg)).collect();
            let coef: Vec<Complex64> = self.steer.iter().map(|v| v[n].conj() * w[n]).collect();
            let mut best = (current, phi[n]);
            for &p in candidates {
                if p == phi[n] {
                    continue;
                }
                let mut worst = f64::INFINITY;
                for q in 0..s.len() {
                    let amp = element_amplitude(self.theta_e[q] - p, self.cfg);
                    let g = (s[q] + coef[q] * (amp - old[q])).norm_sqr();
                    worst = worst.min(g);
                    if worst <= best.0 {
                        break;
                    }
                }
                if worst > best.0 {
                    best = (worst, p);
                }
            }
            if best.1 != phi[n] {
                for q in 0..s.len() {
                    let amp = element_amplitude(self.theta_e[q] - best.1, self.cfg);
                    s[q] += coef[q] * (amp - old[q]);
                }
                phi[n] = best.1;
                current = best.0;
            }
        }
        current
    }
}

fn ars_inner(
    region: &CoverageRegion,
    grid: &AngularGrid,
    psi: f64,
    cfg: &ArrayConfig,
    settings: &AlgoSettings,
) -> Result<InnerSolution> {
    ars_from(grid, psi, &init_phi(region, psi, cfg), init_w(region, psi, cfg), cfg, settings)
}

/// Coordinate-search AO from `phi` snapped to the lattice and `w`.
fn ars_from(
    grid: &AngularGrid,
    psi: f64,
    phi: &[f64],
    mut w: Beamformer,
    cfg: &ArrayConfig,
    settings: &AlgoSettings,
) -> Result<InnerSolution> {
    let candidates = ars_grid(cfg.phi_max);
    let mut phi: Vec<f64> = phi.iter().map(|&p| snap(p, &candidates)).collect();
    let sweep = Sweep::new(grid, psi, cfg);

    let mut gain = worst_gain_raw(grid, psi, &phi, &w.weights, cfg);
    let mut trace = vec![gain];
    let mut iters = IterCounts::default();
    let mut sdr_steps = Vec::new();
    let mut termination = Termination::IterCap;

    for _ in 0..settings.max_ao_iters {
        iters.ao += 1;
        iters.sca += 1;
        let start = gain;
        let mut next = phi.clone();
        sweep.pass(&mut next, &w.weights, &candidates);
        let g = worst_gain_raw(grid, psi, &next, &w.weights, cfg);
        if g > gain {
            phi = next;
            gain = g;
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

    Ok(InnerSolution {
        psi,
        phi,
        w,
        worst_gain: gain,
        trace,
        iters,
        sdr_steps,
        termination,
    })
}

/// Array rotation over the outer grid with per-antenna rotations found by
/// coordinate search on a 1° lattice, alternating with beamformer updates.
pub fn solve_ars(
    region: &CoverageRegion,
    grid: &AngularGrid,
    cfg: &ArrayConfig,
    settings: &AlgoSettings,
) -> Result<SolveReport> {
    checked(region, cfg, settings)?;
    let psis = psi_grid(cfg.psi_max, settings.outer_grid_l);
    outer_search(&psis, settings, |psi| ars_inner(region, grid, psi, cfg, settings))
}

pub fn solve_scheme(
    id: SchemeId,
    region: &CoverageRegion,
    grid: &AngularGrid,
    cfg: &ArrayConfig,
    settings: &AlgoSettings,
) -> Result<SolveReport> {
    match id {
        SchemeId::HR6DMA => solve_outer(region, grid, cfg, settings),
        SchemeId::AntennaRA => solve_antenna_ra(region, grid, cfg, settings),
        SchemeId::ArrayRA => solve_array_ra(region, grid, cfg, settings),
        SchemeId::NRA => solve_nra(region, grid, cfg, settings),
        SchemeId::ARS => solve_ars(region, grid, cfg, settings),
        SchemeId::CSAR => solve_csar(region, grid, cfg, settings),
    }
}

/// Folds a solution into `report` if it beats the current optimum. The
/// curve entry at its rotation is raised, or inserted in order.
fn absorb(report: &mut SolveReport, candidate: InnerSolution) {
    if candidate.worst_gain <= report.inner.worst_gain {
        return;
    }
    let curve = &mut report.per_psi_curve;
    match curve.iter().position(|&(psi, _)| psi >= candidate.psi) {
        Some(i) if curve[i].0 == candidate.psi => curve[i].1 = curve[i].1.max(candidate.worst_gain),
        Some(i) => curve.insert(i, (candidate.psi, candidate.worst_gain)),
        None => curve.push((candidate.psi, candidate.worst_gain)),
    }
    report.psi_star = candidate.psi;
    report.inner = candidate;
}

/// Restarts the freer scheme from `seed` when its own run landed below it.
fn warm_start<F>(report: &mut SolveReport, seed: &InnerSolution, restart: F) -> Result<()>
where
    F: FnOnce(&InnerSolution) -> Result<InnerSolution>,
{
    if report.inner.worst_gain >= seed.worst_gain {
        return Ok(());
    }
    let start = Instant::now();
    let sol = restart(seed)?;
    log::debug!(
        "warm start at psi {:.4}: {:.6} -> {:.6} (own run {:.6})",
        seed.psi,
        seed.worst_gain,
        sol.worst_gain,
        report.inner.worst_gain
    );
    absorb(report, sol);
    report.wall_time_ms += start.elapsed().as_secs_f64() * 1e3;
    Ok(())
}

/// Outcome of a multi-scheme run; a failing scheme does not stop the rest.
#[derive(Debug, Clone, Default)]
pub struct Comparison {
    pub reports: BTreeMap<SchemeId, SolveReport>,
    pub failures: Vec<(SchemeId, Error)>,
}

/// Solves every scheme in `schemes` on the same grid.
///
/// Restricted schemes seed freer ones that land below them, so HR6DMA
/// dominates every other scheme, AntennaRA and ArrayRA dominate NRA, and
/// ARS starts no lower than CSAR's configuration on its lattice.
pub fn run_schemes(
    schemes: &[SchemeId],
    region: &CoverageRegion,
    grid: &AngularGrid,
    cfg: &ArrayConfig,
    settings: &AlgoSettings,
) -> Comparison {
    // Restricted schemes first so they are available as seeds.
    const ORDER: [SchemeId; 6] = [
        SchemeId::NRA,
        SchemeId::ArrayRA,
        SchemeId::CSAR,
        SchemeId::ARS,
        SchemeId::AntennaRA,
        SchemeId::HR6DMA,
    ];
    let mut out = Comparison::default();
    for id in ORDER.into_iter().filter(|id| schemes.contains(id)) {
        match solve_seeded(id, &out.reports, region, grid, cfg, settings) {
            Ok(report) => {
                log::info!("{id}: worst gain {:.6} at psi {:.4}", report.inner.worst_gain, report.psi_star);
                out.reports.insert(id, report);
            }
            Err(e) => {
                log::error!("{id} failed: {e}");
                out.failures.push((id, e));
            }
        }
    }
    out
}

fn solve_seeded(
    id: SchemeId,
    done: &BTreeMap<SchemeId, SolveReport>,
    region: &CoverageRegion,
    grid: &AngularGrid,
    cfg: &ArrayConfig,
    settings: &AlgoSettings,
) -> Result<SolveReport> {
    let mut report = solve_scheme(id, region, grid, cfg, settings)?;
    let nra = done.get(&SchemeId::NRA).map(|r| r.inner.clone());
    let ao = |s: &InnerSolution| solve_inner_from(grid, s.psi, s.phi.clone(), s.w.clone(), cfg, settings);
    match id {
        SchemeId::ArrayRA => {
            if let Some(seed) = nra {
                // Same variables as NRA at ψ = 0, so no AO restart.
                absorb(&mut report, seed);
            }
        }
        SchemeId::AntennaRA => {
            if let Some(seed) = nra {
                warm_start(&mut report, &seed, ao)?;
            }
        }
        SchemeId::ARS => {
            // Boresights at the center are one ARS start, up to lattice snapping.
            if let Some(csar) = done.get(&SchemeId::CSAR) {
                warm_start(&mut report, &csar.inner, |s| ars_from(grid, s.psi, &s.phi, s.w.clone(), cfg, settings))?;
            }
        }
        SchemeId::HR6DMA => {
            let mut best: Option<&InnerSolution> = None;
            for r in done.values() {
                if best.is_none_or(|b| r.inner.worst_gain > b.worst_gain) {
                    best = Some(&r.inner);
                }
            }
            if let Some(seed) = best {
                warm_start(&mut report, seed, ao)?;
            }
        }
        _ => {}
    }
    Ok(report)
}

/// [`run_schemes`], failing on the first scheme error.
pub fn compare_schemes(
    schemes: &[SchemeId],
    region: &CoverageRegion,
    grid: &AngularGrid,
    cfg: &ArrayConfig,
    settings: &AlgoSettings,
) -> Result<BTreeMap<SchemeId, SolveReport>> {
    let out = run_schemes(schemes, region, grid, cfg, settings);
    match out.failures.into_iter().next() {
        Some((_, e)) => Err(e),
        None => Ok(out.reports),
    }
}

/// All six schemes; see [`compare_schemes`].
pub fn compare_all(
    region: &CoverageRegion,
    grid: &AngularGrid,
    cfg: &ArrayConfig,
    settings: &AlgoSettings,
) -> Result<BTreeMap<SchemeId, SolveReport>> {
    compare_schemes(&SchemeId::ALL, region, grid, cfg, settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{element_gain, sample_region};

    fn fast() -> AlgoSettings {
        AlgoSettings {
            outer_grid_l: 5,
            ..AlgoSettings::default()
        }
    }

    fn one(theta: f64) -> (CoverageRegion, AngularGrid) {
        let r = CoverageRegion::direction(theta).unwrap();
        let g = sample_region(&r, 1).unwrap();
        (r, g)
    }

    #[test]
    fn scheme_names_round_trip() {
        for id in SchemeId::ALL {
            assert_eq!(id.as_str().parse::<SchemeId>().unwrap(), id);
        }
        assert_eq!("nra".parse::<SchemeId>().unwrap(), SchemeId::NRA);
        assert!("foo".parse::<SchemeId>().is_err());
        let json = serde_json::to_string(&SchemeId::HR6DMA).unwrap();
        assert_eq!(json, "\"HR6DMA\"");
    }

    #[test]
    fn ars_grid_has_121_points() {
        let g = ars_grid(std::f64::consts::FRAC_PI_3);
        assert_eq!(g.len(), 121);
        assert_eq!(g[0], -std::f64::consts::FRAC_PI_3);
        assert_eq!(g[120], std::f64::consts::FRAC_PI_3);
        assert!((g[60]).abs() < 1e-12);
        assert_eq!(ars_grid(0.0), vec![0.0]);
        let g = ars_grid(0.0123);
        assert_eq!(g.len(), 3);
        assert_eq!(*g.last().unwrap(), 0.0123);
    }

    #[test]
    fn nra_broadside_direction() {
        let cfg = ArrayConfig::default();
        let (r, g) = one(0.0);
        let rep = solve_nra(&r, &g, &cfg, &fast()).unwrap();
        assert!(rep.inner.worst_gain >= 0.99 * 40.0);
        assert_eq!(rep.psi_star, 0.0);
        assert!(rep.inner.phi.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn nra_capped_by_element_gain() {
        let cfg = ArrayConfig::default();
        let (r, g) = one(0.5);
        let rep = solve_nra(&r, &g, &cfg, &fast()).unwrap();
        let cap = 10.0 * element_gain(0.5, &cfg);
        assert!(rep.inner.worst_gain <= cap * (1.0 + 1e-9));
        assert!(rep.inner.worst_gain >= 0.99 * cap);
        assert!(cap < 40.0);
    }

    #[test]
    fn array_ra_reaches_full_gain_off_axis() {
        let cfg = ArrayConfig::default();
        let (r, g) = one(0.4);
        let s = AlgoSettings {
            outer_grid_l: 1,
            ..AlgoSettings::default()
        };
        // Only ψ = 0 on the grid, so no exact alignment.
        let coarse = solve_array_ra(&r, &g, &cfg, &s).unwrap();
        assert!(coarse.inner.worst_gain < 0.99 * 40.0);
        let cfg = ArrayConfig {
            psi_max: 0.4,
            ..cfg
        };
        let rep = solve_array_ra(&r, &g, &cfg, &fast()).unwrap();
        assert_eq!(rep.psi_star, 0.4);
        assert!(rep.inner.worst_gain >= 0.99 * 40.0);
    }

    #[test]
    fn array_ra_without_rotation_is_nra() {
        let cfg = ArrayConfig {
            psi_max: 0.0,
            ..ArrayConfig::default()
        };
        let r = CoverageRegion::new(vec![(-0.2, 0.1)]).unwrap();
        let g = sample_region(&r, 15).unwrap();
        let a = solve_array_ra(&r, &g, &cfg, &fast()).unwrap();
        let b = solve_nra(&r, &g, &cfg, &fast()).unwrap();
        assert_eq!(a.inner.worst_gain, b.inner.worst_gain);
        assert_eq!(a.inner.w, b.inner.w);
    }

    #[test]
    fn antenna_ra_reaches_full_gain_within_reach() {
        let cfg = ArrayConfig::default();
        let (r, g) = one(0.7);
        let rep = solve_antenna_ra(&r, &g, &cfg, &fast()).unwrap();
        assert_eq!(rep.psi_star, 0.0);
        assert!(rep.inner.worst_gain >= 0.99 * 40.0);
    }

    #[test]
    fn ars_snaps_to_nearest_lattice_point() {
        let cfg = ArrayConfig::default();
        let theta = 0.3037;
        let (r, g) = one(theta);
        let rep = solve_ars(&r, &g, &cfg, &fast()).unwrap();
        let lattice = ars_grid(cfg.phi_max);
        let expect = snap(theta - rep.psi_star, &lattice);
        for &p in &rep.inner.phi {
            assert_eq!(p, expect);
        }
    }

    #[test]
    fn ars_single_antenna_is_exhaustive() {
        let cfg = ArrayConfig {
            n_antennas: 1,
            psi_max: 0.0,
            ..ArrayConfig::default()
        };
        let r = CoverageRegion::new(vec![(0.2, 0.9)]).unwrap();
        let g = sample_region(&r, 30).unwrap();
        let rep = solve_ars(&r, &g, &cfg, &fast()).unwrap();
        let best = ars_grid(cfg.phi_max)
            .into_iter()
            .map(|p| g.samples.iter().map(|&t| element_gain(t - p, &cfg)).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max);
        assert!((rep.inner.worst_gain - best).abs() < 1e-12, "{} vs {best}", rep.inner.worst_gain);
    }

    #[test]
    fn sweep_tracks_exact_gain() {
        let cfg = ArrayConfig {
            n_antennas: 4,
            ..ArrayConfig::default()
        };
        let r = CoverageRegion::new(vec![(-0.6, 0.2)]).unwrap();
        let g = sample_region(&r, 20).unwrap();
        let w = crate::model::Beamformer::from_phases(&[0.0, 0.4, -1.1, 2.0]);
        let mut phi = vec![0.1, -0.3, 0.0, 0.5];
        let sweep = Sweep::new(&g, 0.1, &cfg);
        let before = worst_gain_raw(&g, 0.1, &phi, &w.weights, &cfg);
        let reported = sweep.pass(&mut phi, &w.weights, &ars_grid(cfg.phi_max));
        let exact = worst_gain_raw(&g, 0.1, &phi, &w.weights, &cfg);
        assert!((reported - exact).abs() < 1e-10 * exact.max(1.0));
        assert!(exact >= before);
    }

    #[test]
    fn csar_single_direction_matches_hr() {
        let cfg = ArrayConfig::default();
        let (r, g) = one(0.9);
        let s = fast();
        let csar = solve_csar(&r, &g, &cfg, &s).unwrap();
        let hr = solve_outer(&r, &g, &cfg, &s).unwrap();
        assert!((csar.inner.worst_gain - hr.inner.worst_gain).abs() <= 0.01 * hr.inner.worst_gain);
    }

    #[test]
    fn csar_centered_without_rotation_is_nra() {
        let cfg = ArrayConfig {
            psi_max: 0.0,
            ..ArrayConfig::default()
        };
        let r = CoverageRegion::new(vec![(-0.25, 0.25)]).unwrap();
        let g = sample_region(&r, 21).unwrap();
        let a = solve_csar(&r, &g, &cfg, &fast()).unwrap();
        let b = solve_nra(&r, &g, &cfg, &fast()).unwrap();
        assert!(a.inner.phi.iter().all(|&p| p == 0.0));
        assert_eq!(a.inner.worst_gain, b.inner.worst_gain);
    }

    #[test]
    fn absorb_inserts_in_order() {
        let cfg = ArrayConfig::default();
        let (r, g) = one(0.1);
        let mut rep = solve_nra(&r, &g, &cfg, &fast()).unwrap();
        rep.per_psi_curve = vec![(-0.5, 1.0), (0.5, 1.0)];
        rep.inner.worst_gain = 1.0;
        let mut cand = rep.inner.clone();
        cand.psi = 0.2;
        cand.worst_gain = 2.0;
        absorb(&mut rep, cand);
        assert_eq!(rep.per_psi_curve, vec![(-0.5, 1.0), (0.2, 2.0), (0.5, 1.0)]);
        assert_eq!(rep.psi_star, 0.2);
    }

    #[test]
    fn compare_all_dominance() {
        let cfg = ArrayConfig {
            n_antennas: 4,
            ..ArrayConfig::default()
        };
        let r = CoverageRegion::new(vec![(-0.4, 0.1)]).unwrap();
        let g = sample_region(&r, 21).unwrap();
        let all = compare_all(&r, &g, &cfg, &fast()).unwrap();
        assert_eq!(all.len(), 6);
        assert_eq!(all.keys().copied().collect::<Vec<_>>(), SchemeId::ALL.to_vec());
        let gain = |id| all[&id].inner.worst_gain;
        for id in SchemeId::ALL {
            assert!(gain(SchemeId::HR6DMA) >= gain(id) - 1e-6, "{id}");
        }
        assert!(gain(SchemeId::AntennaRA) >= gain(SchemeId::NRA) - 1e-6);
        assert!(gain(SchemeId::ArrayRA) >= gain(SchemeId::NRA) - 1e-6);
    }

    #[test]
    fn frozen_rotations_make_schemes_coincide() {
        let cfg = ArrayConfig {
            n_antennas: 4,
            psi_max: 0.0,
            phi_max: 0.0,
            ..ArrayConfig::default()
        };
        let r = CoverageRegion::new(vec![(-0.3, 0.2)]).unwrap();
        let g = sample_region(&r, 15).unwrap();
        let all = compare_all(&r, &g, &cfg, &fast()).unwrap();
        let base = all[&SchemeId::NRA].inner.worst_gain;
        for (id, rep) in &all {
            assert!((rep.inner.worst_gain - base).abs() <= 1e-6 * base.max(1.0), "{id}: {} vs {base}", rep.inner.worst_gain);
        }
    }
}
