//! Array geometry, element patterns and beamforming gain of a hierarchically
//! rotatable uniform linear array.
//!
//! Angles are radians throughout. Distances are in wavelengths, so the
//! inter-element phase progression is `2π · spacing_wl · sin θ_e` where
//! `θ_e = θ − ψ` is the direction seen in the rotated array frame.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance on `|w_n| = 1/√N`.
pub const MODULUS_TOL: f64 = 1e-12;

/// Physical description of the array and its rotation limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrayConfig {
    pub n_antennas: usize,
    /// Inter-element spacing in wavelengths.
    pub spacing_wl: f64,
    /// Array rotation limit (radians).
    pub psi_max: f64,
    /// Per-antenna rotation limit (radians).
    pub phi_max: f64,
    /// Directivity exponent of the cosine-power element pattern.
    pub directivity_p: f64,
    /// Boresight element gain (linear).
    pub g_max: f64,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        ArrayConfig {
            n_antennas: 10,
            spacing_wl: 0.5,
            psi_max: FRAC_PI_3,
            phi_max: FRAC_PI_3,
            directivity_p: 1.0,
            g_max: 4.0,
        }
    }
}

impl ArrayConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_antennas == 0 {
            return Err(Error::config("array.n_antennas", "must be at least 1"));
        }
        if !(self.spacing_wl.is_finite() && self.spacing_wl > 0.0) {
            return Err(Error::config("array.spacing_wl", "must be finite and positive"));
        }
        for (name, v) in [("array.psi_max", self.psi_max), ("array.phi_max", self.phi_max)] {
            if !(v.is_finite() && (0.0..=FRAC_PI_2).contains(&v)) {
                return Err(Error::config(name, format!("{v} is outside [0, π/2]")));
            }
        }
        if !(self.directivity_p.is_finite() && self.directivity_p >= 0.5) {
            return Err(Error::config("array.directivity_p", "must be at least 0.5"));
        }
        if !(self.g_max.is_finite() && self.g_max > 0.0) {
            return Err(Error::config("array.g_max", "must be finite and positive"));
        }
        Ok(())
    }

    /// `N · G_max`, the coherent-combining ceiling on any beamforming gain.
    pub fn gain_ceiling(&self) -> f64 {
        self.n_antennas as f64 * self.g_max
    }

    /// Boresight gain `2(2p + 1)` that conserves radiated power over the
    /// sphere for a cosine-power pattern with exponent `p`.
    ///
    /// Not used by default: the reference experiments fix `g_max = 4`
    /// with `p = 1`, which is the circle-normalized value instead.
    pub fn spherical_gmax(directivity_p: f64) -> f64 {
        2.0 * (2.0 * directivity_p + 1.0)
    }

    /// Per-entry modulus of a feasible analog beamformer.
    pub fn weight_modulus(&self) -> f64 {
        1.0 / (self.n_antennas as f64).sqrt()
    }
}

/// Array rotation `psi` plus per-antenna boresight rotations `phi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationState {
    pub psi: f64,
    pub phi: Vec<f64>,
}

impl RotationState {
    /// Checked constructor.
    pub fn new(psi: f64, phi: Vec<f64>, cfg: &ArrayConfig) -> Result<Self> {
        let state = RotationState { psi, phi };
        state.check(cfg)?;
        Ok(state)
    }

    /// All boresights share the same rotation.
    pub fn uniform(psi: f64, phi: f64, n: usize) -> Self {
        RotationState {
            psi,
            phi: vec![phi; n],
        }
    }

    pub fn check(&self, cfg: &ArrayConfig) -> Result<()> {
        if self.phi.len() != cfg.n_antennas {
            return Err(Error::Structure(format!(
                "rotation vector has {} entries, array has {}",
                self.phi.len(),
                cfg.n_antennas
            )));
        }
        check_limit("psi", self.psi, cfg.psi_max)?;
        for (n, &p) in self.phi.iter().enumerate() {
            check_limit(&format!("phi[{n}]"), p, cfg.phi_max)?;
        }
        Ok(())
    }
}

fn check_limit(name: &str, value: f64, limit: f64) -> Result<()> {
    // Grid arithmetic can land a few ulps outside the box.
    if !value.is_finite() || value.abs() > limit * (1.0 + 1e-12) + 1e-15 {
        return Err(Error::Constraint(format!(
            "|{name}| = {} exceeds the limit {limit}",
            value.abs()
        )));
    }
    Ok(())
}

/// Phase-only analog beamformer with `|w_n| = 1/√N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Beamformer {
    pub weights: Vec<Complex64>,
}

impl Beamformer {
    /// Validates the constant-modulus constraint.
    pub fn new(weights: Vec<Complex64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Structure("beamformer has no entries".into()));
        }
        let target = 1.0 / (weights.len() as f64).sqrt();
        for (n, w) in weights.iter().enumerate() {
            if ((w.norm() - target) / target).abs() > MODULUS_TOL {
                return Err(Error::Constraint(format!(
                    "|w[{n}]| = {} but must equal 1/sqrt(N) = {target}",
                    w.norm()
                )));
            }
        }
        Ok(Beamformer { weights })
    }

    /// Builds `w_n = e^{j·phase_n} / √N`.
    pub fn from_phases(phases: &[f64]) -> Self {
        let m = 1.0 / (phases.len() as f64).sqrt();
        Beamformer {
            weights: phases.iter().map(|&p| Complex64::from_polar(m, p)).collect(),
        }
    }

    /// Projects arbitrary complex entries onto the feasible set by keeping
    /// their phases. Zero entries map to phase 0.
    pub fn from_phases_of(v: &[Complex64]) -> Self {
        let phases: Vec<f64> = v.iter().map(|z| if z.norm() > 0.0 { z.arg() } else { 0.0 }).collect();
        Self::from_phases(&phases)
    }

    pub fn uniform(n: usize) -> Self {
        Self::from_phases(&vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn conj(&self) -> Self {
        Beamformer {
            weights: self.weights.iter().map(|w| w.conj()).collect(),
        }
    }
}

/// Union of disjoint angular intervals `[α_m, β_m]`.
///
/// An interval with `α_m = β_m` denotes a single direction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageRegion {
    pub intervals: Vec<(f64, f64)>,
}

impl CoverageRegion {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        let region = CoverageRegion { intervals };
        region.validate()?;
        Ok(region)
    }

    /// A single direction.
    pub fn direction(theta: f64) -> Result<Self> {
        Self::new(vec![(theta, theta)])
    }

    /// `[−width/2, width/2]`.
    pub fn symmetric(width: f64) -> Result<Self> {
        Self::new(vec![(-width / 2.0, width / 2.0)])
    }

    pub fn validate(&self) -> Result<()> {
        if self.intervals.is_empty() {
            return Err(Error::config("region.intervals", "at least one interval is required"));
        }
        let mut prev_end = f64::NEG_INFINITY;
        for (m, &(a, b)) in self.intervals.iter().enumerate() {
            let field = format!("region.intervals[{m}]");
            if !(a.is_finite() && b.is_finite()) {
                return Err(Error::config(field, "endpoints must be finite"));
            }
            if b < a {
                return Err(Error::config(field, format!("end {b} is before start {a}")));
            }
            if a < -FRAC_PI_2 || b > FRAC_PI_2 {
                return Err(Error::config(field, "endpoints must lie in [-π/2, π/2]"));
            }
            if a <= prev_end {
                return Err(Error::config(
                    field,
                    "intervals must be sorted and disjoint",
                ));
            }
            prev_end = b;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    /// Mean of the interval midpoints.
    pub fn center(&self) -> f64 {
        let m = self.intervals.len() as f64;
        self.intervals.iter().map(|(a, b)| 0.5 * (a + b)).sum::<f64>() / m
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= theta && theta <= b)
    }
}

/// Deterministic sampling of a [`CoverageRegion`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngularGrid {
    pub samples: Vec<f64>,
    pub per_interval_counts: Vec<usize>,
}

impl AngularGrid {
    /// Grid holding explicitly given directions, one per interval.
    pub fn from_samples(samples: Vec<f64>) -> Self {
        let counts = vec![1; samples.len()];
        AngularGrid {
            samples,
            per_interval_counts: counts,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Transmit-side link parameters for absolute received power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkBudget {
    /// Transmit power in watts.
    pub tx_power: f64,
    /// Channel power gain at the 1 m reference distance.
    pub ref_gain: f64,
    pub distance_m: f64,
    pub pathloss_exp: f64,
    pub wavelength_m: f64,
}

impl Default for LinkBudget {
    fn default() -> Self {
        LinkBudget {
            tx_power: 1.0,
            ref_gain: 1.0,
            distance_m: 1.0,
            pathloss_exp: 2.5,
            wavelength_m: 0.01,
        }
    }
}

impl LinkBudget {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("link.tx_power", self.tx_power),
            ("link.ref_gain", self.ref_gain),
            ("link.distance_m", self.distance_m),
            ("link.pathloss_exp", self.pathloss_exp),
            ("link.wavelength_m", self.wavelength_m),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Cosine-power element gain `g_max · cos^{2p}(x)` on `|x| ≤ π/2`, zero
/// outside.
pub fn element_gain(phi_rel: f64, cfg: &ArrayConfig) -> f64 {
    let a = element_amplitude(phi_rel, cfg);
    a * a
}

/// `√G(x) = √g_max · cos^p(x)`, the amplitude pattern.
pub fn element_amplitude(phi_rel: f64, cfg: &ArrayConfig) -> f64 {
    if phi_rel.abs() > FRAC_PI_2 {
        return 0.0;
    }
    let c = phi_rel.cos().max(0.0);
    cfg.g_max.sqrt() * c.powf(cfg.directivity_p)
}

/// Derivative of `√G(θ_e − φ_n)` with respect to the boresight rotation
/// `φ_n`, evaluated at incidence `x = θ_e − φ_n`:
/// `√g_max · p · cos^{p−1}(x) · sin(x)`.
pub fn element_amplitude_dphi(phi_rel: f64, cfg: &ArrayConfig) -> f64 {
    if phi_rel.abs() >= FRAC_PI_2 {
        return 0.0;
    }
    let c = phi_rel.cos();
    let p = cfg.directivity_p;
    cfg.g_max.sqrt() * p * c.powf(p - 1.0) * phi_rel.sin()
}

/// Element positions in wavelengths, centred on the origin.
pub fn antenna_positions(psi: f64, cfg: &ArrayConfig) -> Result<Vec<[f64; 2]>> {
    check_limit("psi", psi, cfg.psi_max)?;
    let n = cfg.n_antennas as f64;
    let (s, c) = psi.sin_cos();
    Ok((1..=cfg.n_antennas)
        .map(|k| {
            let offset = (2.0 * k as f64 - n - 1.0) / 2.0 * cfg.spacing_wl;
            [offset * c, offset * s]
        })
        .collect())
}

/// Phase progression `2π · spacing · sin(θ − ψ)` between adjacent elements.
#[inline]
fn phase_step(theta: f64, psi: f64, cfg: &ArrayConfig) -> f64 {
    2.0 * PI * cfg.spacing_wl * (theta - psi).sin()
}

/// Steering vector `v_n = exp(+j·2π·spacing·(n−1)·sin θ_e)`.
///
/// With this convention `aᴴw` combines coherently for
/// `w_n ∝ exp(+j·2π·spacing·(n−1)·sin θ_e)`.
pub fn steering_vector(theta: f64, psi: f64, cfg: &ArrayConfig) -> Vec<Complex64> {
    let step = phase_step(theta, psi, cfg);
    (0..cfg.n_antennas)
        .map(|n| Complex64::from_polar(1.0, step * n as f64))
        .collect()
}

/// Array response `a_n = √G(θ_e − φ_n) · v_n(θ_e)`.
pub fn array_response(theta: f64, state: &RotationState, cfg: &ArrayConfig) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); cfg.n_antennas];
    array_response_into(theta, state.psi, &state.phi, cfg, &mut out);
    out
}

pub(crate) fn array_response_into(
    theta: f64,
    psi: f64,
    phi: &[f64],
    cfg: &ArrayConfig,
    out: &mut [Complex64],
) {
    let theta_e = theta - psi;
    let step = phase_step(theta, psi, cfg);
    for (n, (slot, &p)) in out.iter_mut().zip(phi).enumerate() {
        let amp = element_amplitude(theta_e - p, cfg);
        *slot = Complex64::from_polar(amp, step * n as f64);
    }
}

/// `aᴴw` for one direction.
pub(crate) fn combine(a: &[Complex64], w: &[Complex64]) -> Complex64 {
    a.iter().zip(w).map(|(a, w)| a.conj() * w).sum()
}

/// Beamforming gain `|aᴴ(θ; ψ, φ) w|²`.
pub fn beamforming_gain(theta: f64, state: &RotationState, w: &Beamformer, cfg: &ArrayConfig) -> f64 {
    let a = array_response(theta, state, cfg);
    combine(&a, &w.weights).norm_sqr()
}

/// Received power `P_t · ref_gain · r^{−2γ} · gain` in watts.
pub fn received_power(
    theta: f64,
    state: &RotationState,
    w: &Beamformer,
    cfg: &ArrayConfig,
    link: &LinkBudget,
) -> Result<f64> {
    link.validate()?;
    let path = link.ref_gain * link.distance_m.powf(-2.0 * link.pathloss_exp);
    Ok(link.tx_power * path * beamforming_gain(theta, state, w, cfg))
}

/// Samples a region with `total_q` directions.
///
/// Counts are proportional to interval width with largest-remainder
/// rounding; every proper interval keeps at least two samples (its
/// endpoints) and every single-direction interval exactly one.
pub fn sample_region(region: &CoverageRegion, total_q: usize) -> Result<AngularGrid> {
    region.validate()?;
    let counts = allocate_samples(region, total_q)?;
    let mut samples = Vec::with_capacity(counts.iter().sum());
    for (&(a, b), &q) in region.intervals.iter().zip(&counts) {
        if q == 1 {
            samples.push(a);
            continue;
        }
        let span = b - a;
        let last = (q - 1) as f64;
        for k in 0..q {
            // Written so the endpoints come out exactly.
            let t = if k + 1 == q { b } else { a + (k as f64 / last) * span };
            samples.push(t);
        }
    }
    Ok(AngularGrid {
        samples,
        per_interval_counts: counts,
    })
}

fn allocate_samples(region: &CoverageRegion, total_q: usize) -> Result<Vec<usize>> {
    let widths: Vec<f64> = region.intervals.iter().map(|(a, b)| b - a).collect();
    let minimums: Vec<usize> = widths.iter().map(|&w| if w > 0.0 { 2 } else { 1 }).collect();
    let required: usize = minimums.iter().sum();
    if total_q < required {
        return Err(Error::config(
            "total_q",
            format!("{total_q} samples cannot cover {} intervals (need {required})", widths.len()),
        ));
    }
    let proper: Vec<usize> = (0..widths.len()).filter(|&m| widths[m] > 0.0).collect();
    let mut counts = minimums.clone();
    if proper.is_empty() {
        return Ok(counts);
    }
    let points = widths.len() - proper.len();
    let budget = total_q - points;
    let total_width: f64 = proper.iter().map(|&m| widths[m]).sum();

    let quotas: Vec<f64> = proper
        .iter()
        .map(|&m| budget as f64 * widths[m] / total_width)
        .collect();
    for (&m, q) in proper.iter().zip(&quotas) {
        counts[m] = q.floor() as usize;
    }
    let assigned: usize = proper.iter().map(|&m| counts[m]).sum();
    let mut order: Vec<usize> = (0..proper.len()).collect();
    // Largest fractional part first, lower index on ties.
    order.sort_by(|&i, &j| {
        let fi = quotas[i] - quotas[i].floor();
        let fj = quotas[j] - quotas[j].floor();
        fj.total_cmp(&fi).then(i.cmp(&j))
    });
    for &i in order.iter().take(budget - assigned) {
        counts[proper[i]] += 1;
    }
    // Enforce the two-sample minimum by borrowing from the largest counts.
    while let Some(&short) = proper.iter().find(|&&m| counts[m] < 2) {
        let donor = proper
            .iter()
            .copied()
            .filter(|&m| counts[m] > 2)
            .max_by(|&i, &j| counts[i].cmp(&counts[j]).then(j.cmp(&i)))
            .expect("total_q >= required guarantees a donor");
        counts[donor] -= 1;
        counts[short] += 1;
    }
    Ok(counts)
}

/// Smallest gain over the grid and the first index attaining it.
pub fn worst_case_gain(
    grid: &AngularGrid,
    state: &RotationState,
    w: &Beamformer,
    cfg: &ArrayConfig,
) -> Result<(f64, usize)> {
    if grid.is_empty() {
        return Err(Error::Domain("worst-case gain over an empty grid".into()));
    }
    let gains = gains_on_grid(grid, state.psi, &state.phi, &w.weights, cfg);
    Ok(argmin(&gains))
}

/// Gain at every grid sample.
pub fn gains_on_grid(
    grid: &AngularGrid,
    psi: f64,
    phi: &[f64],
    w: &[Complex64],
    cfg: &ArrayConfig,
) -> Vec<f64> {
    let mut a = vec![Complex64::new(0.0, 0.0); cfg.n_antennas];
    grid.samples
        .iter()
        .map(|&theta| {
            array_response_into(theta, psi, phi, cfg, &mut a);
            combine(&a, w).norm_sqr()
        })
        .collect()
}

/// Sampled worst-case gain without the index, for inner loops.
pub(crate) fn worst_gain_raw(
    grid: &AngularGrid,
    psi: f64,
    phi: &[f64],
    w: &[Complex64],
    cfg: &ArrayConfig,
) -> f64 {
    let mut a = vec![Complex64::new(0.0, 0.0); cfg.n_antennas];
    grid.samples.iter().fold(f64::INFINITY, |acc, &theta| {
        array_response_into(theta, psi, phi, cfg, &mut a);
        acc.min(combine(&a, w).norm_sqr())
    })
}

pub(crate) fn argmin(values: &[f64]) -> (f64, usize) {
    let mut best = (values[0], 0);
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v < best.0 {
            best = (v, i);
        }
    }
    best
}

/// `10·log10(x)` floored at −120 dB.
pub fn to_db(linear: f64) -> f64 {
    const FLOOR_DB: f64 = -120.0;
    if linear <= 0.0 {
        return FLOOR_DB;
    }
    (10.0 * linear.log10()).max(FLOOR_DB)
}
