//! Independent reference solvers shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use hrbeam::kernel::{CMatrix, LpProblem};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;

/// Random bounded LP with a strictly feasible point inside the box.
pub fn random_lp<R: Rng>(rng: &mut R) -> LpProblem {
    let n = rng.gen_range(2..=4);
    let m = rng.gen_range(2..=8);
    let mut prob = LpProblem::new((0..n).map(|_| rng.gen_range(-1.0..1.0)).collect());
    prob.bounds = (0..n)
        .map(|_| {
            let lo = rng.gen_range(-2.0..-0.5);
            (lo, lo + rng.gen_range(1.0..3.0))
        })
        .collect();
    let x0: Vec<f64> = prob.bounds.iter().map(|&(lo, hi)| 0.5 * (lo + hi)).collect();
    for _ in 0..m {
        let row: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let rhs = row.iter().zip(&x0).map(|(a, x)| a * x).sum::<f64>() + rng.gen_range(0.05..1.0);
        prob.push(row, rhs);
    }
    prob
}

/// Maximum of the objective over every vertex of the feasible polytope,
/// found by intersecting each `n`-subset of the constraint and bound
/// hyperplanes. Requires finite bounds.
pub fn lp_vertex_max(prob: &LpProblem) -> Option<f64> {
    let n = prob.dim();
    let mut planes: Vec<(Vec<f64>, f64)> = prob.constraints.iter().map(|c| (c.row.clone(), c.rhs)).collect();
    for (i, &(lo, hi)) in prob.bounds.iter().enumerate() {
        let mut e = vec![0.0; n];
        e[i] = 1.0;
        planes.push((e.clone(), hi));
        planes.push((e, lo));
    }
    let mut best: Option<f64> = None;
    let mut subset: Vec<usize> = (0..n).collect();
    loop {
        let a = DMatrix::from_fn(n, n, |r, c| planes[subset[r]].0[c]);
        let b = DVector::from_fn(n, |r, _| planes[subset[r]].1);
        if let Some(x) = a.lu().solve(&b) {
            let x: Vec<f64> = x.iter().copied().collect();
            let inside = prob.max_violation(&x) <= 1e-9
                && x.iter().zip(&prob.bounds).all(|(v, &(lo, hi))| *v >= lo - 1e-9 && *v <= hi + 1e-9);
            if inside {
                let v = prob.value(&x);
                best = Some(best.map_or(v, |b| b.max(v)));
            }
        }
        if !next_subset(&mut subset, planes.len()) {
            return best;
        }
    }
}

/// Advances to the next `k`-subset of `0..total` in lexicographic order.
fn next_subset(s: &mut [usize], total: usize) -> bool {
    let k = s.len();
    for i in (0..k).rev() {
        if s[i] < total - k + i {
            s[i] += 1;
            for j in i + 1..k {
                s[j] = s[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

pub fn random_complex<R: Rng>(rng: &mut R, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

/// `max_χ min_q |a_qᴴ w|²` over `w = (1/√2)[1, e^{jχ}]` with `χ` on a
/// uniform grid of the given step.
pub fn two_antenna_phase_grid(vectors: &[Vec<Complex64>], step: f64) -> f64 {
    let points = (2.0 * PI / step).ceil() as usize;
    let m = std::f64::consts::FRAC_1_SQRT_2;
    (0..points)
        .map(|i| {
            let w = [Complex64::new(m, 0.0), Complex64::from_polar(m, i as f64 * step)];
            vectors
                .iter()
                .map(|a| (a[0].conj() * w[0] + a[1].conj() * w[1]).norm_sqr())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

/// Random Hermitian positive semidefinite matrix `B Bᴴ`.
pub fn random_psd<R: Rng>(rng: &mut R, n: usize) -> CMatrix {
    let b = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    &b * b.adjoint()
}
