//! Dense linear algebra helpers: LAPACK SVD, Cholesky, and a Schur-based
//! solver for k-way Lyapunov systems `L_k(M) x = b`.

use crate::error::{NlbtError, Result};
use crate::kron::{ipow, Mat};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::os::raw::c_char;

type CMat = DMatrix<Complex64>;

/// Full SVD `A = U diag(s) V^T` through LAPACK `dgesdd`.
///
/// Singular vector signs are whatever LAPACK returns; downstream transforms
/// rely on this being reproducible.
pub fn svd(a: &Mat) -> (Mat, Vec<f64>, Mat) {
    let (m, n) = a.shape();
    let k = m.min(n);
    let mut a = a.clone();
    let mut s = vec![0.0; k];
    let mut u = Mat::zeros(m, m);
    let mut vt = Mat::zeros(n, n);
    let mut iwork = vec![0i32; 8 * k.max(1)];
    let mut work = vec![0.0f64; 1];
    let mut info = 0i32;
    let jobz = b'A' as c_char;
    let (mi, ni) = (m as i32, n as i32);
    let (ldu, ldvt) = (mi.max(1), ni.max(1));
    unsafe {
        lapack_sys::dgesdd_(
            &jobz, &mi, &ni, a.as_mut_ptr(), &ldu, s.as_mut_ptr(), u.as_mut_ptr(), &ldu,
            vt.as_mut_ptr(), &ldvt, work.as_mut_ptr(), &-1, iwork.as_mut_ptr(), &mut info,
        );
        let lwork = work[0] as i32;
        work = vec![0.0; lwork.max(1) as usize];
        lapack_sys::dgesdd_(
            &jobz, &mi, &ni, a.as_mut_ptr(), &ldu, s.as_mut_ptr(), u.as_mut_ptr(), &ldu,
            vt.as_mut_ptr(), &ldvt, work.as_mut_ptr(), &lwork, iwork.as_mut_ptr(), &mut info,
        );
    }
    assert_eq!(info, 0, "dgesdd failed with info {info}");
    (u, s, vt.transpose())
}

/// Lower Cholesky factor of a symmetric positive definite matrix.
pub fn cholesky_lower(w: &Mat) -> Option<Mat> {
    let sym = (w + w.transpose()) * 0.5;
    nalgebra::linalg::Cholesky::new(sym).map(|c| c.l())
}

pub fn symmetric_part(w: &Mat) -> Mat {
    (w + w.transpose()) * 0.5
}

/// Reshape a row-major flat vector into a matrix.
pub fn reshape_rows(v: &[f64], rows: usize, cols: usize) -> Mat {
    assert_eq!(v.len(), rows * cols);
    Mat::from_row_slice(rows, cols, v)
}

/// Row-major flattening.
pub fn flatten_rows(m: &Mat) -> Vec<f64> {
    m.transpose().iter().copied().collect()
}

fn contract_mode_c(t: &[Complex64], n: usize, k: usize, mode: usize, m: &CMat) -> Vec<Complex64> {
    let pre = ipow(n, mode);
    let post = ipow(n, k - mode - 1);
    let mut out = vec![Complex64::new(0.0, 0.0); t.len()];
    for p in 0..pre {
        for a in 0..n {
            let src = &t[(p * n + a) * post..(p * n + a + 1) * post];
            for j in 0..n {
                let w = m[(a, j)];
                if w == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let dst = &mut out[(p * n + j) * post..(p * n + j + 1) * post];
                for (o, s) in dst.iter_mut().zip(src) {
                    *o += w * s;
                }
            }
        }
    }
    out
}

/// `M = Q T Q^H` through LAPACK `zgees`.
fn complex_schur(m: &Mat) -> Result<(CMat, CMat)> {
    let n = m.nrows();
    let mut t: CMat = m.map(|x| Complex64::new(x, 0.0));
    let mut q = CMat::zeros(n, n);
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    let mut rwork = vec![0.0f64; n.max(1)];
    let mut bwork = vec![0i32; n.max(1)];
    let mut work = vec![Complex64::new(0.0, 0.0); 1];
    let (jobvs, sort) = (b'V' as c_char, b'N' as c_char);
    let ni = n as i32;
    let ld = ni.max(1);
    let mut sdim = 0i32;
    let mut info = 0i32;
    // Complex64 is repr(C) { re, im }, the same layout as the binding's complex type
    let cp = |v: *mut Complex64| v as *mut lapack_sys::__BindgenComplex<f64>;
    unsafe {
        lapack_sys::zgees_(
            &jobvs, &sort, None, &ni, cp(t.as_mut_ptr()), &ld, &mut sdim, cp(w.as_mut_ptr()), cp(q.as_mut_ptr()),
            &ld, cp(work.as_mut_ptr()), &-1, rwork.as_mut_ptr(), bwork.as_mut_ptr(), &mut info,
        );
        let lwork = (work[0].re as i32).max(1);
        work = vec![Complex64::new(0.0, 0.0); lwork as usize];
        lapack_sys::zgees_(
            &jobvs, &sort, None, &ni, cp(t.as_mut_ptr()), &ld, &mut sdim, cp(w.as_mut_ptr()), cp(q.as_mut_ptr()),
            &ld, cp(work.as_mut_ptr()), &lwork, rwork.as_mut_ptr(), bwork.as_mut_ptr(), &mut info,
        );
    }
    if info != 0 {
        return Err(NlbtError::InvalidArgument(format!("Schur decomposition failed (zgees info {info})")));
    }
    Ok((q, t))
}

/// Complex Schur factorization `M = Q T Q^H` reused across degrees.
pub struct KronSolver {
    n: usize,
    q: CMat,
    t: CMat,
}

impl KronSolver {
    pub fn new(m: &Mat) -> Result<Self> {
        let n = m.nrows();
        let (q, t) = complex_schur(m)?;
        Ok(KronSolver { n, q, t })
    }

    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.n).map(|i| self.t[(i, i)]).collect()
    }

    pub fn spectral_abscissa(&self) -> f64 {
        self.eigenvalues().iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Solve `L_k(M) x = rhs` for a real flat right-hand side of length `n^k`.
    pub fn solve(&self, rhs: &[f64], k: usize) -> Result<Vec<f64>> {
        let n = self.n;
        assert_eq!(rhs.len(), ipow(n, k));
        let mut y: Vec<Complex64> = rhs.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let qconj = self.q.map(|z| z.conj());
        for mode in 0..k {
            y = contract_mode_c(&y, n, k, mode, &qconj);
        }
        let lam = self.eigenvalues();
        let scale = lam.iter().map(|l| l.norm()).fold(0.0, f64::max).max(1e-300);
        let strides: Vec<usize> = (0..k).map(|s| ipow(n, k - 1 - s)).collect();
        let mut d = vec![0usize; k];
        for idx in (0..y.len()).rev() {
            crate::kron::digits(idx, n, k, &mut d);
            let mut diag = Complex64::new(0.0, 0.0);
            let mut acc = y[idx];
            for s in 0..k {
                let i = d[s];
                diag += self.t[(i, i)];
                for l in i + 1..n {
                    acc -= self.t[(i, l)] * y[idx + (l - i) * strides[s]];
                }
            }
            if diag.norm() <= 1e-11 * scale * k as f64 {
                return Err(NlbtError::Resonance { degree: k, value: diag.norm() });
            }
            y[idx] = acc / diag;
        }
        let qt = self.q.transpose();
        for mode in 0..k {
            y = contract_mode_c(&y, n, k, mode, &qt);
        }
        Ok(y.iter().map(|z| z.re).collect())
    }
}

/// Solve `A X + X A^T + Q = 0`.
pub fn lyapunov(a: &Mat, q: &Mat) -> Result<Mat> {
    let n = a.nrows();
    let solver = KronSolver::new(a)?;
    let rhs: Vec<f64> = flatten_rows(q).iter().map(|x| -x).collect();
    let x = solver.solve(&rhs, 2)?;
    Ok(symmetric_part(&reshape_rows(&x, n, n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kron::lyap_k;

    #[test]
    fn svd_reconstructs() {
        let a = Mat::from_row_slice(3, 3, &[1.0, 2.0, 0.5, -1.0, 0.3, 2.0, 0.0, 1.0, -0.7]);
        let (u, s, v) = svd(&a);
        let back = &u * Mat::from_diagonal(&nalgebra::DVector::from_vec(s.clone())) * v.transpose();
        assert!((back - &a).abs().max() < 1e-12);
        assert!(s[0] >= s[1] && s[1] >= s[2]);
    }

    #[test]
    fn complex_schur_is_unitary_triangular() {
        // complex pair plus a real eigenvalue
        let m = Mat::from_row_slice(3, 3, &[-1.0, 2.0, 0.0, -3.0, -1.0, 0.5, 0.1, 0.0, -0.7]);
        let (q, t) = complex_schur(&m).unwrap();
        let back = &q * &t * q.adjoint();
        assert!((back - m.map(|x| Complex64::new(x, 0.0))).iter().all(|z| z.norm() < 1e-13));
        assert!((q.adjoint() * &q - CMat::identity(3, 3)).iter().all(|z| z.norm() < 1e-13));
        for j in 0..3 {
            for i in j + 1..3 {
                assert_eq!(t[(i, j)], Complex64::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn kron_solver_matches_dense_solve() {
        let m = Mat::from_row_slice(3, 3, &[-1.0, 0.4, 0.0, -0.3, -2.0, 1.0, 0.2, 0.0, -0.5]);
        let rhs: Vec<f64> = (0..27).map(|i| (i as f64 * 0.7).sin()).collect();
        let x = KronSolver::new(&m).unwrap().solve(&rhs, 3).unwrap();
        let l = lyap_k(&m, 3);
        let res = &l * nalgebra::DVector::from_vec(x) - nalgebra::DVector::from_vec(rhs);
        assert!(res.amax() < 1e-11);
    }

    #[test]
    fn lyapunov_residual() {
        let a = Mat::from_row_slice(2, 2, &[-1.0, 3.0, 0.0, -2.0]);
        let q = Mat::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 2.0]);
        let x = lyapunov(&a, &q).unwrap();
        let r = &a * &x + &x * a.transpose() + q;
        assert!(r.abs().max() < 1e-12);
    }

    #[test]
    fn resonance_detected() {
        // eigenvalues 1 and -1 sum to zero at degree 2
        let m = Mat::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let err = KronSolver::new(&m).unwrap().solve(&[1.0; 4], 2).unwrap_err();
        assert!(matches!(err, NlbtError::Resonance { degree: 2, .. }));
    }
}
