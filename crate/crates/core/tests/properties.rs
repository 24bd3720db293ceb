mod common;

use std::f64::consts::{FRAC_PI_2, PI};

use hrbeam::io::{parse_scenario, RegionSpec, Scenario};
use hrbeam::kernel::{hermitian_eigen, solve_lp, solve_sdp, CMatrix, LpStatus, SdpProblem, SdpStatus, SolverTolerances};
use hrbeam::model::{
    beamforming_gain, element_gain, sample_region, steering_vector, ArrayConfig, Beamformer, CoverageRegion,
    RotationState,
};
use hrbeam::optimizer::{solve_inner, AlgoSettings};
use hrbeam::oracle::direct_gain_oracle;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn cfg_n(n: usize) -> ArrayConfig {
    ArrayConfig {
        n_antennas: n,
        ..ArrayConfig::default()
    }
}

fn rotations(n: usize) -> impl Strategy<Value = (f64, Vec<f64>)> {
    let lim = std::f64::consts::FRAC_PI_3;
    (-lim..=lim, prop::collection::vec(-lim..=lim, n))
}

fn phases(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..2.0 * PI, n)
}

/// Disjoint sorted intervals inside `[−π/2, π/2]`.
fn region() -> impl Strategy<Value = CoverageRegion> {
    prop::collection::vec((0.0..1.0f64, 0.0..1.0f64), 1..4).prop_map(|cuts| {
        let m = cuts.len();
        let slot = PI / m as f64;
        let intervals = cuts
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| {
                let lo = -FRAC_PI_2 + i as f64 * slot + 0.45 * slot * a.min(b);
                let hi = lo + 0.5 * slot * (a - b).abs();
                (lo, hi)
            })
            .collect();
        CoverageRegion::new(intervals).unwrap()
    })
}

proptest! {
    #[test]
    fn element_gain_range_and_evenness(x in -4.0..4.0f64) {
        let cfg = ArrayConfig::default();
        let g = element_gain(x, &cfg);
        prop_assert!((0.0..=cfg.g_max).contains(&g));
        prop_assert_eq!(g, element_gain(-x, &cfg));
        if x.abs() >= FRAC_PI_2 {
            prop_assert_eq!(g, 0.0);
        }
    }

    #[test]
    fn steering_entries_are_unit_modulus(theta in -FRAC_PI_2..FRAC_PI_2, psi in -1.0..1.0f64) {
        for v in steering_vector(theta, psi, &ArrayConfig::default()) {
            prop_assert!((v.norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn gain_is_bounded_and_shift_invariant(
        theta in -FRAC_PI_2..FRAC_PI_2,
        (psi, phi) in rotations(6),
        w in phases(6),
        delta in -0.5..0.5f64,
    ) {
        let cfg = cfg_n(6);
        let w = Beamformer::from_phases(&w);
        let state = RotationState { psi, phi: phi.clone() };
        let g = beamforming_gain(theta, &state, &w, &cfg);
        prop_assert!(g <= 6.0 * cfg.g_max * (1.0 + 1e-12));
        let shifted = RotationState { psi: psi + delta, phi };
        let h = beamforming_gain(theta + delta, &shifted, &w, &cfg);
        prop_assert!((g - h).abs() <= 1e-10 * g.max(1.0), "{} vs {}", g, h);
    }

    #[test]
    fn gain_has_mirror_symmetry(theta in -FRAC_PI_2..FRAC_PI_2, (psi, phi) in rotations(5), w in phases(5)) {
        let cfg = cfg_n(5);
        let w = Beamformer::from_phases(&w);
        let g = beamforming_gain(theta, &RotationState { psi, phi: phi.clone() }, &w, &cfg);
        let mirrored = RotationState { psi: -psi, phi: phi.iter().map(|p| -p).collect() };
        let h = beamforming_gain(-theta, &mirrored, &w.conj(), &cfg);
        prop_assert!((g - h).abs() <= 1e-10 * g.max(1.0));
    }

    #[test]
    fn scalar_oracle_agrees(theta in -1.6..1.6f64, (psi, phi) in rotations(4), w in phases(4)) {
        let cfg = cfg_n(4);
        let w = Beamformer::from_phases(&w);
        let state = RotationState { psi, phi };
        let a = direct_gain_oracle(theta, &state, &w, &cfg);
        let b = beamforming_gain(theta, &state, &w, &cfg);
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn grid_endpoints_and_spacing(region in region(), q in 8usize..200) {
        let grid = sample_region(&region, q).unwrap();
        prop_assert_eq!(grid.samples.len(), grid.per_interval_counts.iter().sum::<usize>());
        prop_assert_eq!(&grid, &sample_region(&region, q).unwrap());
        let mut start = 0;
        for (&(a, b), &c) in region.intervals.iter().zip(&grid.per_interval_counts) {
            let s = &grid.samples[start..start + c];
            prop_assert_eq!(s[0], a);
            if c > 1 {
                prop_assert_eq!(s[c - 1], b);
                let step = (b - a) / (c - 1) as f64;
                for k in 1..c {
                    prop_assert!((s[k] - s[k - 1] - step).abs() <= 1e-12);
                }
            }
            start += c;
        }
    }

    #[test]
    fn lp_beats_sampled_feasible_points(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let prob = common::random_lp(&mut rng);
        let sol = solve_lp(&prob, &SolverTolerances::lp()).unwrap();
        prop_assert_eq!(sol.status, LpStatus::Optimal);
        prop_assert!(prob.max_violation(&sol.x) <= 1e-9);
        let mut found = 0;
        while found < 1000 {
            let x: Vec<f64> = prob.bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)).collect();
            if prob.max_violation(&x) <= 0.0 {
                prop_assert!(prob.value(&x) <= sol.objective + 1e-9);
                found += 1;
            }
        }
    }

    #[test]
    fn scenario_json_round_trip(total_q in 2usize..5000, n in 1usize..16, width in 0.01..2.0f64) {
        let scenario = Scenario {
            array: cfg_n(n),
            region: RegionSpec::from(&CoverageRegion::symmetric(width).unwrap()),
            total_q,
            ..Scenario::default()
        };
        let text = serde_json::to_string(&scenario).unwrap();
        prop_assert_eq!(parse_scenario(&text).unwrap(), scenario);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sdp_solution_is_feasible_and_bounds_the_phase_grid(seed in any::<u64>(), k in 2usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vectors: Vec<Vec<Complex64>> = (0..k).map(|_| common::random_complex(&mut rng, 2)).collect();
        let prob = SdpProblem::with_rank_one_gains(2, CMatrix::zeros(2, 2), &vectors, 0.5).unwrap();
        let tol = SolverTolerances::default();
        let sol = solve_sdp(&prob, &tol).unwrap();
        prop_assert_eq!(sol.status, SdpStatus::Optimal);
        let (values, _) = hermitian_eigen(&sol.w).unwrap();
        prop_assert!(values.iter().all(|&l| l >= -tol.feas_tol));
        for i in 0..2 {
            prop_assert!((sol.w[(i, i)].re - 0.5).abs() <= tol.feas_tol);
        }
        // τ is only optimal to within the duality gap, so the bound is
        // checked with a gap tolerance below feas_tol.
        let tight = SolverTolerances { gap_tol: 1e-9, ..tol };
        let tau = solve_sdp(&prob, &tight).unwrap().tau;
        let grid_best = common::two_antenna_phase_grid(&vectors, 1e-2);
        prop_assert!(tau >= grid_best - tol.feas_tol * grid_best.max(1.0), "{} < {}", tau, grid_best);
    }

    #[test]
    fn eigenpairs_have_small_residuals(seed in any::<u64>(), n in 1usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = common::random_psd(&mut rng, n);
        let (values, vectors) = hermitian_eigen(&w).unwrap();
        for (k, &l) in values.iter().enumerate() {
            let v = vectors.column(k);
            let r = &w * v - v * Complex64::new(l, 0.0);
            prop_assert!(r.norm() <= 1e-8 * w.norm());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn inner_solution_is_feasible_and_consistent(
        center in -0.6..0.6f64,
        width in 0.05..0.8f64,
        psi in -1.0..1.0f64,
        n in 2usize..6,
    ) {
        let cfg = cfg_n(n);
        let region = CoverageRegion::new(vec![(center - width / 2.0, center + width / 2.0)]).unwrap();
        let grid = sample_region(&region, 31).unwrap();
        let sol = solve_inner(&region, &grid, psi, &cfg, &AlgoSettings::default()).unwrap();
        prop_assert!(sol.phi.iter().all(|p| p.abs() <= cfg.phi_max));
        prop_assert!(sol.w.weights.iter().all(|z| (z.norm() - 1.0 / (n as f64).sqrt()).abs() <= 1e-12));
        prop_assert!(sol.trace.windows(2).all(|t| t[1] >= t[0]));
        let state = RotationState { psi, phi: sol.phi.clone() };
        let again = grid
            .samples
            .iter()
            .map(|&t| direct_gain_oracle(t, &state, &sol.w, &cfg))
            .fold(f64::INFINITY, f64::min);
        prop_assert!((again - sol.worst_gain).abs() <= 1e-9 * again.max(1.0));
        prop_assert!(sol.worst_gain <= n as f64 * cfg.g_max);
    }
}
