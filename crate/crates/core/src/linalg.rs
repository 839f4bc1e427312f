//! Small dense complex linear algebra on top of nalgebra.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::C64;

pub type CMat = DMatrix<C64>;

const SCHUR_EPS: f64 = 1e-15;
const SCHUR_MAX_ITER: usize = 10_000;

/// Eigenvalues of a general complex matrix from the diagonal of its Schur form.
pub fn eigenvalues(m: &CMat) -> Result<Vec<C64>> {
    if !m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::Eigensolver("matrix has non-finite entries".into()));
    }
    let schur = nalgebra::Schur::try_new(m.clone(), SCHUR_EPS, SCHUR_MAX_ITER)
        .ok_or_else(|| Error::Eigensolver("Schur iteration did not converge".into()))?;
    let (_, t) = schur.unpack();
    Ok((0..t.nrows()).map(|i| t[(i, i)]).collect())
}

/// Unit right eigenvector for an (approximate) eigenvalue: the right singular
/// vector of `m - lambda I` with the smallest singular value.
pub fn eigenvector(m: &CMat, lambda: C64) -> DVector<C64> {
    let n = m.nrows();
    let shifted = m - CMat::identity(n, n) * lambda;
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.expect("requested v_t");
    let (imin, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    v_t.row(imin).adjoint().normalize()
}

/// 2-norm condition number `sigma_max / sigma_min`.
pub fn condition_number(m: &CMat) -> f64 {
    let s = m.singular_values();
    let max = s.iter().cloned().fold(0.0, f64::max);
    let min = s.iter().cloned().fold(f64::INFINITY, f64::min);
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Inverse by LU; `None` when the pivot vanishes or the result is not finite.
pub fn inverse(m: &CMat) -> Option<CMat> {
    let inv = m.clone().lu().try_inverse()?;
    inv.iter().all(|z| z.re.is_finite() && z.im.is_finite()).then_some(inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn triangular_spectrum() {
        let m = CMat::from_row_slice(3, 3, &[c(1.0, 1.0), c(2.0, 0.0), c(0.0, 3.0), c(0.0, 0.0), c(-2.0, 0.5), c(1.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(4.0, 0.0)]);
        let mut ev = eigenvalues(&m).unwrap();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        for (got, want) in ev.iter().zip([c(-2.0, 0.5), c(1.0, 1.0), c(4.0, 0.0)]) {
            assert!((got - want).norm() < 1e-12);
        }
    }

    #[test]
    fn eigenvector_satisfies_equation() {
        let m = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)]);
        for lam in eigenvalues(&m).unwrap() {
            let v = eigenvector(&m, lam);
            assert!((&m * &v - &v * lam).norm() < 1e-12);
        }
    }

    #[test]
    fn jordan_block_is_ill_conditioned() {
        let eps = 1e-10;
        let m = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(eps, 0.0), c(0.0, 0.0)]);
        let ev = eigenvalues(&m).unwrap();
        let v = CMat::from_columns(&[eigenvector(&m, ev[0]), eigenvector(&m, ev[1])]);
        assert!(condition_number(&v) > 1e4);
        assert!(condition_number(&CMat::identity(3, 3)) - 1.0 < 1e-14);
    }
}
