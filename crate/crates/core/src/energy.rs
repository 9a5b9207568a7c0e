//! Polynomial approximations of the controllability and observability
//! energy functions, `E(x) = ½ sum_k v_k^T x^{⊗k}`.

use crate::error::{NlbtError, Result};
use crate::kron::{ipow, kron_power, kron_vec, symmetrize_vec, Mat};
use crate::linalg::{cholesky_lower, flatten_rows, lyapunov, reshape_rows, KronSolver};
use crate::system::PolySystem;
use nalgebra::DVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnergyKind {
    Controllability,
    Observability,
}

/// Symmetric coefficient vectors `v_k`, `k = 0..=degree`; `v_0`, `v_1` are empty.
#[derive(Clone, Debug, PartialEq)]
pub struct EnergyCoeffs {
    pub n: usize,
    pub v: Vec<Vec<f64>>,
}

impl EnergyCoeffs {
    pub fn degree(&self) -> usize {
        self.v.len() - 1
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut e = 0.0;
        for (k, vk) in self.v.iter().enumerate().skip(2) {
            let xk = kron_power(x, k);
            e += 0.5 * vk.iter().zip(&xk).map(|(a, b)| a * b).sum::<f64>();
        }
        e
    }

    /// `sum_k ½ k V_k x^{⊗(k-1)}` with `V_k` the `n x n^{k-1}` reshape.
    pub fn gradient(&self, x: &[f64]) -> DVector<f64> {
        let n = self.n;
        let mut g = DVector::zeros(n);
        for (k, vk) in self.v.iter().enumerate().skip(2) {
            let xk = DVector::from_vec(kron_power(x, k - 1));
            g += reshape_rows(vk, n, ipow(n, k - 1)) * xk * (0.5 * k as f64);
        }
        g
    }

    pub fn quadratic(&self) -> Mat {
        reshape_rows(&self.v[2], self.n, self.n)
    }

    /// Energies truncated to degree `d`.
    pub fn truncated(&self, d: usize) -> Self {
        EnergyCoeffs { n: self.n, v: self.v[..=d.min(self.degree())].to_vec() }
    }
}

fn check_hurwitz(solver: &KronSolver) -> Result<()> {
    let abscissa = solver.spectral_abscissa();
    if abscissa >= 0.0 {
        return Err(NlbtError::NotHurwitz { abscissa });
    }
    Ok(())
}

/// Row-major flattening of `P^T Q`, i.e. the coefficient vector of
/// `(P x^{⊗a})^T (Q x^{⊗b})` on `x^{⊗(a+b)}`.
fn flat_tn(p: &Mat, q: &Mat) -> Vec<f64> {
    flatten_rows(&(p.transpose() * q))
}

fn axpy(acc: &mut [f64], alpha: f64, x: &[f64]) {
    for (a, b) in acc.iter_mut().zip(x) {
        *a += alpha * b;
    }
}

/// Drift contribution `sum_{i=2}^{k-1} v_i^T L_i(F_{k+1-i})` to the degree-`k`
/// equation, valid for symmetric `v_i`.
fn drift_terms(sys: &PolySystem, v: &[Vec<f64>], k: usize) -> Vec<f64> {
    let n = sys.n;
    let mut rhs = vec![0.0; ipow(n, k)];
    for (i, vi) in v.iter().enumerate().take(k).skip(2) {
        let j = k + 1 - i;
        if j > sys.f.degree() || sys.f.is_zero_block(j) {
            continue;
        }
        let vm = reshape_rows(vi, n, ipow(n, i - 1));
        axpy(&mut rhs, i as f64, &flat_tn(&sys.f.coeffs[j], &vm));
    }
    rhs
}

pub fn gramians(sys: &PolySystem) -> Result<(Mat, Mat)> {
    let a = sys.a();
    let solver = KronSolver::new(&a)?;
    check_hurwitz(&solver)?;
    let b = sys.b();
    let c = sys.c();
    let wc = lyapunov(&a, &(&b * b.transpose()))?;
    let wo = lyapunov(&a.transpose(), &(c.transpose() * &c))?;
    Ok((wc, wo))
}

/// Observability energy to degree `d`.
pub fn observability_energy(sys: &PolySystem, d: usize) -> Result<EnergyCoeffs> {
    if d < 2 {
        return Err(NlbtError::InvalidArgument("energy degree must be at least 2".into()));
    }
    let n = sys.n;
    let a = sys.a();
    let solver = KronSolver::new(&a.transpose())?;
    check_hurwitz(&solver)?;
    let mut v: Vec<Vec<f64>> = vec![Vec::new(), Vec::new()];
    for k in 2..=d {
        let mut rhs = drift_terms(sys, &v, k);
        for p in 1..k {
            let q = k - p;
            if p > sys.h.degree() || q > sys.h.degree() {
                continue;
            }
            axpy(&mut rhs, 1.0, &flat_tn(&sys.h.coeffs[p], &sys.h.coeffs[q]));
        }
        let rhs: Vec<f64> = symmetrize_vec(&rhs, n, k).iter().map(|x| -x).collect();
        let vk = solver.solve(&rhs, k)?;
        v.push(symmetrize_vec(&vk, n, k));
    }
    Ok(EnergyCoeffs { n, v })
}

/// Controllability (past input) energy to degree `d`.
pub fn controllability_energy(sys: &PolySystem, d: usize) -> Result<EnergyCoeffs> {
    if d < 2 {
        return Err(NlbtError::InvalidArgument("energy degree must be at least 2".into()));
    }
    let n = sys.n;
    let a = sys.a();
    check_hurwitz(&KronSolver::new(&a)?)?;
    let b = sys.b();
    let bbt = &b * b.transpose();
    let wc = lyapunov(&a, &bbt)?;
    let l = cholesky_lower(&wc).ok_or(NlbtError::SingularGramian)?;
    let dmin = l.diagonal().iter().fold(f64::INFINITY, |m, x| m.min(x.abs()));
    let dmax = l.diagonal().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if dmin <= 1e-12 * dmax {
        return Err(NlbtError::SingularGramian);
    }
    let linv = l.clone().try_inverse().ok_or(NlbtError::SingularGramian)?;
    let v2 = linv.transpose() * &linv;
    let v2 = (&v2 + v2.transpose()) * 0.5;
    let mut v: Vec<Vec<f64>> = vec![Vec::new(), Vec::new(), flatten_rows(&v2)];
    if d == 2 {
        return Ok(EnergyCoeffs { n, v });
    }
    let closed = &a + &bbt * &v2;
    let solver = KronSolver::new(&closed.transpose())?;
    for k in 3..=d {
        let mut rhs = drift_terms(sys, &v, k);
        // D_q = ½ (q+1) V_{q+1}, the degree-q gradient coefficient, q <= k-2.
        let dq: Vec<Mat> = (0..=k - 2)
            .map(|q| {
                if q == 0 {
                    Mat::zeros(n, 1)
                } else {
                    reshape_rows(&v[q + 1], n, ipow(n, q)) * (0.5 * (q + 1) as f64)
                }
            })
            .collect();
        for gl in &sys.g {
            // s_a: degree-a part of g_l(x)^T grad E(x), without the unknown.
            let s: Vec<Vec<f64>> = (0..k)
                .map(|aa| {
                    let mut sa = vec![0.0; ipow(n, aa)];
                    if aa == 0 {
                        return sa;
                    }
                    for p in 0..=gl.degree().min(aa - 1) {
                        let q = aa - p;
                        if q > k - 2 || gl.is_zero_block(p) {
                            continue;
                        }
                        axpy(&mut sa, 1.0, &flat_tn(&gl.coeffs[p], &dq[q]));
                    }
                    sa
                })
                .collect();
            for aa in 1..k {
                let bb = k - aa;
                if s[aa].iter().all(|&x| x == 0.0) || s[bb].iter().all(|&x| x == 0.0) {
                    continue;
                }
                axpy(&mut rhs, 1.0, &kron_vec(&s[aa], &s[bb]));
            }
        }
        let rhs: Vec<f64> = symmetrize_vec(&rhs, n, k).iter().map(|x| -x).collect();
        let vk = solver.solve(&rhs, k)?;
        v.push(symmetrize_vec(&vk, n, k));
    }
    Ok(EnergyCoeffs { n, v })
}

/// Pointwise residual of the energy PDE at `x`.
pub fn hjb_residual(sys: &PolySystem, e: &EnergyCoeffs, kind: EnergyKind, x: &[f64]) -> f64 {
    let grad = e.gradient(x);
    let drift = grad.dot(&sys.eval_f(x));
    match kind {
        EnergyKind::Controllability => {
            let gt = sys.eval_g(x).transpose() * &grad;
            drift + 0.5 * gt.norm_squared()
        }
        EnergyKind::Observability => drift + 0.5 * sys.eval_h(x).norm_squared(),
    }
}
