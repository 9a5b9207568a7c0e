//! Input-normal / output-diagonal transformation `x = Φ(z)` with
//! `E_c(Φ(z)) = ½|z|^2` and `E_o(Φ(z)) = ½ sum_i z_i^2 σ_i^2(z_i)`.

use crate::energy::EnergyCoeffs;
use crate::error::{NlbtError, Result};
use crate::kron::{canonical_indices, digits, energy_compose_degree, flat_index, ipow, Mat, PolyVectorField};
use crate::linalg::{cholesky_lower, svd};
use nalgebra::DVector;

/// Square-root balancing of the Gramians.
///
/// `t1` is the input-normal factor `L_c U`; `tbar1 = L_c U Σ^{-1/2}` is the
/// linear balancing transformation. `U` comes from the SVD `L_c^T L_o = U Σ V^T`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearBalancing {
    pub t1: Mat,
    pub t1_inv: Mat,
    pub tbar1: Mat,
    pub tbar1_inv: Mat,
    pub hankel: Vec<f64>,
}

/// `σ_i^2(z_i) = sum_j c[i][j] z_i^j`.
#[derive(Clone, Debug, PartialEq)]
pub struct SqSingularValueFns {
    pub c: Vec<Vec<f64>>,
}

impl SqSingularValueFns {
    pub fn eval(&self, i: usize, zi: f64) -> f64 {
        self.c[i].iter().rev().fold(0.0, |acc, &c| acc * zi + c)
    }

    pub fn derivative(&self, i: usize, zi: f64) -> f64 {
        self.c[i]
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (j, &c)| acc * zi + j as f64 * c)
    }

    pub fn n(&self) -> usize {
        self.c.len()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InodTransform {
    pub t: PolyVectorField,
    pub sigma_sq: SqSingularValueFns,
    pub lin: LinearBalancing,
}

pub fn linear_balancing(wc: &Mat, wo: &Mat) -> Result<LinearBalancing> {
    let n = wc.nrows();
    let lc = cholesky_lower(wc).ok_or(NlbtError::SingularGramian)?;
    let lo = cholesky_lower(wo).ok_or(NlbtError::SingularObservability)?;
    let (u, s, v) = svd(&(lc.transpose() * &lo));
    let s1 = s[0];
    for i in 0..n {
        if s[i] <= 1e-10 * s1 {
            return Err(NlbtError::ZeroHankel { i });
        }
        if i + 1 < n && (s[i] - s[i + 1]).abs() <= 1e-10 * s1 {
            return Err(NlbtError::RepeatedHankel { i, j: i + 1 });
        }
    }
    let sv = DVector::from_vec(s.clone());
    let t1 = &lc * &u;
    let t1_inv = Mat::from_diagonal(&sv.map(|x| 1.0 / x)) * v.transpose() * lo.transpose();
    let tbar1 = &t1 * Mat::from_diagonal(&sv.map(|x| x.powf(-0.5)));
    let tbar1_inv = Mat::from_diagonal(&sv.map(|x| x.powf(-0.5))) * v.transpose() * lo.transpose();
    Ok(LinearBalancing { t1, t1_inv, tbar1, tbar1_inv, hankel: s })
}

/// Monomial coefficients: sums over the symmetric orbit of each sorted index.
fn monomial_sums(v: &[f64], n: usize, k: usize) -> Vec<f64> {
    let canon = canonical_indices(n, k);
    let mut out = vec![0.0; v.len()];
    for (i, &c) in canon.iter().enumerate() {
        out[c] += v[i];
    }
    out
}

fn energy_gramian(e: &EnergyCoeffs) -> Mat {
    e.quadratic()
}

/// Compute `Φ` to degree `d` from energies of degree at least `d + 1`.
pub fn compute_inod_transform(ec: &EnergyCoeffs, eo: &EnergyCoeffs, d: usize) -> Result<InodTransform> {
    let n = ec.n;
    if d < 1 {
        return Err(NlbtError::InvalidArgument("transformation degree must be at least 1".into()));
    }
    if ec.degree() < d + 1 || eo.degree() < d + 1 {
        return Err(NlbtError::InvalidArgument(format!(
            "energies of degree {} needed for a degree-{d} transformation",
            d + 1
        )));
    }
    let v2 = energy_gramian(ec);
    let lv = cholesky_lower(&v2).ok_or(NlbtError::SingularGramian)?;
    let lv_inv = lv.try_inverse().ok_or(NlbtError::SingularGramian)?;
    let wc = lv_inv.transpose() * &lv_inv;
    let wo = energy_gramian(eo);
    let lin = linear_balancing(&wc, &wo)?;
    let sig2: Vec<f64> = lin.hankel.iter().map(|s| s * s).collect();

    let mut t = PolyVectorField::zeros(n, n, d);
    t.coeffs[1] = lin.t1.clone();
    let mut c: Vec<Vec<f64>> = sig2.iter().map(|&s| vec![s]).collect();

    for k in 2..=d {
        let q = k + 1;
        let nc = monomial_sums(&energy_compose_degree(&ec.v, &t, q), n, q);
        let no = monomial_sums(&energy_compose_degree(&eo.v, &t, q), n, q);
        let canon_q = canonical_indices(n, q);
        // m[i][beta]: coefficient of the sorted degree-k monomial beta in m_i
        let mut m = vec![vec![0.0; ipow(n, k)]; n];
        let mut dq = vec![0usize; q];
        let mut ck = vec![0.0; n];
        for alpha in 0..canon_q.len() {
            if canon_q[alpha] != alpha {
                continue;
            }
            digits(alpha, n, q, &mut dq);
            let mut support: Vec<usize> = dq.clone();
            support.dedup();
            let beta_of = |i: usize| -> usize {
                let pos = dq.iter().position(|&x| x == i).unwrap();
                let mut b: Vec<usize> = dq.clone();
                b.remove(pos);
                flat_index(&b, n)
            };
            if support.len() == 1 {
                let i = support[0];
                let u = -nc[alpha];
                m[i][beta_of(i)] = u;
                ck[i] = 2.0 * (sig2[i] * u + no[alpha]);
                continue;
            }
            // min-norm solution of [1 .. 1; σ² ..] u = -(nc, no)
            let s = support.len() as f64;
            let s1: f64 = support.iter().map(|&i| sig2[i]).sum();
            let s2: f64 = support.iter().map(|&i| sig2[i] * sig2[i]).sum();
            let det = s * s2 - s1 * s1;
            if det.abs() <= 1e-14 * (s * s2) {
                return Err(NlbtError::RepeatedHankel { i: support[0], j: support[1] });
            }
            let (b1, b2) = (-nc[alpha], -no[alpha]);
            let y1 = (s2 * b1 - s1 * b2) / det;
            let y2 = (-s1 * b1 + s * b2) / det;
            for &i in &support {
                m[i][beta_of(i)] = y1 + sig2[i] * y2;
            }
        }
        let canon_k = canonical_indices(n, k);
        let mut counts = vec![0usize; canon_k.len()];
        for &cc in &canon_k {
            counts[cc] += 1;
        }
        let mk = Mat::from_fn(n, ipow(n, k), |i, col| {
            let b = canon_k[col];
            m[i][b] / counts[b] as f64
        });
        t.coeffs[k] = &lin.t1 * mk;
        for i in 0..n {
            c[i].push(ck[i]);
        }
    }
    Ok(InodTransform { t, sigma_sq: SqSingularValueFns { c }, lin })
}
