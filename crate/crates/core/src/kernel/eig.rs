use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use super::{CMatrix, CVector};
use crate::error::{Error, Result};

fn check_hermitian(w: &CMatrix, tol: f64) -> Result<()> {
    if !w.is_square() {
        return Err(Error::Structure(format!("matrix is {}x{}, not square", w.nrows(), w.ncols())));
    }
    let scale = w.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let n = w.nrows();
    for i in 0..n {
        for j in i..n {
            if (w[(i, j)] - w[(j, i)].conj()).norm() > tol * scale {
                return Err(Error::Structure(format!("matrix is not Hermitian at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

/// Eigenvalues in descending order with matching unit eigenvectors as
/// columns.
pub fn hermitian_eigen(w: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    check_hermitian(w, 1e-10)?;
    let sym = (w + w.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let n = w.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Largest eigenvalue and its unit eigenvector.
///
/// The vector is made unique up to numerical noise: within a repeated top
/// eigenvalue the direction closest to `e_1` (then `e_2`, ...) is chosen,
/// and the global phase puts the largest-magnitude entry on the
/// nonnegative real axis.
pub fn principal_eigpair(w: &CMatrix) -> Result<(f64, CVector)> {
    let n = w.nrows();
    if n == 0 {
        return Err(Error::Structure("empty matrix".into()));
    }
    let (values, vectors) = hermitian_eigen(w)?;
    let lambda = values[0];
    let scale = values.iter().map(|v| v.abs()).fold(1e-300, f64::max);
    let cluster: Vec<usize> = (0..n).filter(|&k| lambda - values[k] <= 1e-10 * scale).collect();

    let mut v: CVector = vectors.column(0).into_owned();
    if cluster.len() > 1 {
        let basis: Vec<CVector> = cluster.iter().map(|&k| vectors.column(k).into_owned()).collect();
        for axis in 0..n {
            // Projection of e_axis onto the eigenspace.
            let mut proj = CVector::zeros(n);
            for b in &basis {
                proj += b * b[axis].conj();
            }
            let norm = proj.norm();
            if norm > 1e-8 {
                v = proj / Complex64::new(norm, 0.0);
                break;
            }
        }
    }

    let mut lead = 0;
    for k in 1..n {
        if v[k].norm() > v[lead].norm() * (1.0 + 1e-12) {
            lead = k;
        }
    }
    let phase = v[lead].conj() / v[lead].norm();
    v *= phase;
    v[lead] = Complex64::new(v[lead].norm(), 0.0);
    let norm = v.norm();
    v /= Complex64::new(norm, 0.0);

    // Rayleigh quotient is more accurate than the raw eigenvalue.
    let rq = (v.adjoint() * w * &v)[(0, 0)].re;
    Ok((rq, v))
}

/// `λ_max(W) / Tr(W)`, equal to 1 exactly for rank-one PSD matrices.
pub fn rank_metric(w: &CMatrix) -> Result<f64> {
    let (lambda, _) = principal_eigpair(w)?;
    let trace: f64 = (0..w.nrows()).map(|i| w[(i, i)].re).sum();
    if trace <= 0.0 {
        return Ok(0.0);
    }
    Ok(lambda / trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn residual(w: &CMatrix, lambda: f64, v: &CVector) -> f64 {
        (w * v - v * c(lambda, 0.0)).norm()
    }

    #[test]
    fn identity_picks_first_axis() {
        let w = CMatrix::identity(3, 3);
        let (l, v) = principal_eigpair(&w).unwrap();
        assert!((l - 1.0).abs() < 1e-14);
        assert!((v[0] - c(1.0, 0.0)).norm() < 1e-12);
        assert!(v[1].norm() < 1e-12 && v[2].norm() < 1e-12);
    }

    #[test]
    fn diagonal_matrix() {
        let w = CMatrix::from_diagonal(&CVector::from_vec(vec![c(5.0, 0.0), c(2.0, 0.0), c(1.0, 0.0)]));
        let (l, v) = principal_eigpair(&w).unwrap();
        assert!((l - 5.0).abs() < 1e-13);
        assert!((v[0].norm() - 1.0).abs() < 1e-12);
        assert!(v[0].im.abs() < 1e-15 && v[0].re > 0.0);
    }

    #[test]
    fn rank_one_recovers_factor() {
        let phases = [0.3, -1.2, 2.9, 0.7];
        let w0 = CVector::from_iterator(4, phases.iter().map(|&p| Complex64::from_polar(1.0, p)));
        let w = &w0 * w0.adjoint();
        let (l, v) = principal_eigpair(&w).unwrap();
        assert!((l - 4.0).abs() < 1e-12);
        // v = w0/‖w0‖ up to a global phase.
        let overlap = (w0.adjoint() * &v)[(0, 0)].norm() / 2.0;
        assert!((overlap - 1.0).abs() < 1e-12);
        assert!(residual(&w, l, &v) < 1e-8 * w.norm());
        assert!((rank_metric(&w).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut w = CMatrix::identity(2, 2);
        w[(0, 1)] = c(0.0, 1.0);
        w[(1, 0)] = c(0.0, 1.0);
        assert!(matches!(principal_eigpair(&w), Err(Error::Structure(_))));
    }

    #[test]
    fn complex_hermitian_residual() {
        let w = CMatrix::from_row_slice(3, 3, &[
            c(2.0, 0.0), c(0.5, 0.7), c(-0.1, 0.2),
            c(0.5, -0.7), c(1.0, 0.0), c(0.3, -0.4),
            c(-0.1, -0.2), c(0.3, 0.4), c(3.0, 0.0),
        ]);
        let (values, vectors) = hermitian_eigen(&w).unwrap();
        for (k, &l) in values.iter().enumerate() {
            let v = vectors.column(k).into_owned();
            assert!(residual(&w, l, &v) < 1e-12 * w.norm());
        }
        let (l, v) = principal_eigpair(&w).unwrap();
        assert!((l - values[0]).abs() < 1e-12);
        assert!(residual(&w, l, &v) < 1e-8 * w.norm());
    }
}
