//! Scaling transformation `z = φ(z̄)` that turns input-normal/output-diagonal
//! coordinates into balanced ones, and its composition with `Φ`.

use crate::error::{NlbtError, Result};
use crate::inod::SqSingularValueFns;
use crate::kron::{compose, ipow, PolyVectorField};

fn series_mul(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (i, &ai) in a.iter().enumerate().take(len) {
        for (j, &bj) in b.iter().enumerate().take(len - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// `log(s)` for a series with `s[0] = 1`, truncated to `len` terms.
fn series_log(s: &[f64], len: usize) -> Vec<f64> {
    let mut l = vec![0.0; len];
    for k in 1..len {
        let mut acc = k as f64 * s.get(k).copied().unwrap_or(0.0);
        for j in 1..k {
            acc -= j as f64 * l[j] * s.get(k - j).copied().unwrap_or(0.0);
        }
        l[k] = acc / k as f64;
    }
    l
}

/// `exp(l)` for a series with `l[0] = 0`.
fn series_exp(l: &[f64], len: usize) -> Vec<f64> {
    let mut e = vec![0.0; len];
    e[0] = 1.0;
    for k in 1..len {
        let mut acc = 0.0;
        for j in 1..=k {
            acc += j as f64 * l.get(j).copied().unwrap_or(0.0) * e[k - j];
        }
        e[k] = acc / k as f64;
    }
    e
}

/// Coefficients `a_1..a_d` (index 0 unused, zero) of `z (c(z))^{1/4}`
/// where `c = (c_0, c_1, ..)` are the coefficients of `σ_i^2`.
pub fn inverse_scaling_series(c: &[f64], d: usize) -> Result<Vec<f64>> {
    let c0 = c.first().copied().unwrap_or(0.0);
    if c0 <= 0.0 {
        return Err(NlbtError::NonPositiveSigma { state: 0 });
    }
    let s: Vec<f64> = (0..d).map(|j| c.get(j).copied().unwrap_or(0.0) / c0).collect();
    let quarter: Vec<f64> = series_log(&s, d).iter().map(|x| 0.25 * x).collect();
    let root = series_exp(&quarter, d);
    let mut a = vec![0.0; d + 1];
    for k in 1..=d {
        a[k] = c0.powf(0.25) * root[k - 1];
    }
    Ok(a)
}

/// Reversion: given `a_1..a_d` (index 0 ignored), return `A_1..A_d` with
/// `a(A(z)) = z + O(z^{d+1})`.
pub fn series_reversion(a: &[f64]) -> Vec<f64> {
    let d = a.len() - 1;
    assert!(a[1] != 0.0, "series reversion needs a nonzero linear term");
    let len = d + 1;
    let mut big = vec![0.0; len];
    big[1] = 1.0 / a[1];
    for k in 2..=d {
        // coefficient of z^k in a(A(z)) with the current A (A_k = 0)
        let mut pow = big.clone();
        let mut coeff = a[1] * pow[k];
        for j in 2..=k {
            pow = series_mul(&pow, &big, len);
            coeff += a[j] * pow[k];
        }
        big[k] = -coeff / a[1];
    }
    big
}

/// Diagonal polynomial map `z_i = sum_k A_k^{(i)} z̄_i^k` in Kronecker form.
pub fn assemble_scaling_coeffs(per_state: &[Vec<f64>], d: usize) -> PolyVectorField {
    let n = per_state.len();
    let mut p = PolyVectorField::zeros(n, n, d);
    for k in 1..=d {
        let step = if n == 1 { 0 } else { (ipow(n, k) - 1) / (n - 1) };
        for (i, coeffs) in per_state.iter().enumerate() {
            p.coeffs[k][(i, i * step)] = coeffs.get(k).copied().unwrap_or(0.0);
        }
    }
    p
}

/// Per-state scaling series `A^{(i)}` from the singular value functions.
pub fn scaling_series(sig: &SqSingularValueFns, d: usize) -> Result<Vec<Vec<f64>>> {
    (0..sig.n())
        .map(|i| {
            let a = inverse_scaling_series(&sig.c[i], d)
                .map_err(|_| NlbtError::NonPositiveSigma { state: i })?;
            Ok(series_reversion(&a))
        })
        .collect()
}

/// `T̄ = Φ ∘ φ` truncated to degree `d`.
pub fn compose_balancing(t: &PolyVectorField, a_phi: &PolyVectorField, d: usize) -> PolyVectorField {
    compose(t, a_phi, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_sigma_gives_linear_scaling() {
        let a = inverse_scaling_series(&[16.0], 4).unwrap();
        assert!((a[1] - 2.0).abs() < 1e-15);
        assert!(a[2..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn reversion_closed_forms() {
        let a = [0.0, 1.3, -0.4, 0.25];
        let big = series_reversion(&a);
        assert!((big[1] - 1.0 / 1.3).abs() < 1e-15);
        assert!((big[2] - (-a[2] / a[1].powi(3))).abs() < 1e-14);
        let a3 = (2.0 * a[2] * a[2] - a[1] * a[3]) / a[1].powi(5);
        assert!((big[3] - a3).abs() < 1e-14);
    }

    #[test]
    fn scaling_matches_pointwise_fourth_root() {
        let c = [2.0, 0.3, -0.1];
        let a = inverse_scaling_series(&c, 3).unwrap();
        let z: f64 = 1e-2;
        let exact = z * (c[0] + c[1] * z + c[2] * z * z).powf(0.25);
        let poly: f64 = (1..=3).map(|k| a[k] * z.powi(k as i32)).sum();
        assert!((exact - poly).abs() < 1e-9);
    }

    #[test]
    fn diagonal_placement() {
        let p = assemble_scaling_coeffs(&[vec![0.0, 1.0, 2.0], vec![0.0, 3.0, 4.0], vec![0.0, 5.0, 6.0]], 2);
        // z_2^{⊗2} sits at column 4 (1-based 5) for n = 3
        assert_eq!(p.coeffs[2][(1, 4)], 4.0);
        assert_eq!(p.coeffs[2][(2, 8)], 6.0);
        let z = [0.1, 0.2, 0.3];
        let y = p.eval(&z);
        assert!((y[1] - (3.0 * 0.2 + 4.0 * 0.04)).abs() < 1e-15);
    }
}
