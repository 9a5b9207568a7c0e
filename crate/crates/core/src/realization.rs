//! Balanced realization `z̄' = f̄(z̄) + ḡ(z̄) u`, `y = h̄(z̄)` obtained from
//! `∂T̄/∂z̄ · f̄ = f ∘ T̄` by degree matching, its polynomial inverse, and
//! truncation to reduced models.

use crate::error::{NlbtError, Result};
use crate::kron::{compose, mat_times_kron, mat_times_lyap, Mat, PolyVectorField};
use crate::system::PolySystem;

fn invert_linear(tbar: &PolyVectorField) -> Result<Mat> {
    tbar.coeffs[1]
        .clone()
        .try_inverse()
        .ok_or_else(|| NlbtError::InvalidArgument("linear part of the transformation is singular".into()))
}

/// Solve `T̄_1 X_k = C_k - sum_{i>=2} T̄_i L_i(X_{k+1-i})` degree by degree.
/// `known[k]` holds `C_k`; `k0` is the lowest degree of the unknown series.
fn degree_matching(tbar: &PolyVectorField, t1_inv: &Mat, known: &PolyVectorField, k0: usize, d: usize) -> PolyVectorField {
    let n = tbar.rows;
    let mut out = PolyVectorField::zeros(n, tbar.nvars, d);
    for k in k0..=d {
        let mut rhs = known.coeff_or_zero(k);
        for i in 2..=tbar.degree() {
            // contributes at degree (i - 1) + j
            if k + 1 < i + k0 {
                break;
            }
            let j = k + 1 - i;
            if j < k0 || tbar.is_zero_block(i) || out.is_zero_block(j) {
                continue;
            }
            rhs -= mat_times_lyap(&tbar.coeffs[i], &out.coeffs[j], i);
        }
        out.coeffs[k] = t1_inv * rhs;
    }
    out
}

/// Balanced realization with drift and output to degree `d_rom` and input
/// columns to degree `d_rom - 1`.
pub fn balanced_realization(sys: &PolySystem, tbar: &PolyVectorField, d_rom: usize) -> Result<PolySystem> {
    if d_rom < 1 {
        return Err(NlbtError::InvalidArgument("realization degree must be at least 1".into()));
    }
    let t1_inv = invert_linear(tbar)?;
    let f_comp = compose(&sys.f, tbar, d_rom);
    // the recursion leaves column-antisymmetric parts that act as zero
    let f = degree_matching(tbar, &t1_inv, &f_comp, 1, d_rom).symmetrized();
    let g = sys
        .g
        .iter()
        .map(|gl| {
            let comp = compose(gl, tbar, d_rom - 1);
            degree_matching(tbar, &t1_inv, &comp, 0, d_rom - 1).symmetrized()
        })
        .collect();
    let h = compose(&sys.h, tbar, d_rom).symmetrized();
    PolySystem::new(f, g, h)
}

/// Polynomial inverse `z̄ = P(x)` of `x = T̄(z̄)` to degree `d`.
pub fn inverse_transform(tbar: &PolyVectorField, d: usize) -> Result<PolyVectorField> {
    let n = tbar.rows;
    let p1 = invert_linear(tbar)?;
    let mut p = PolyVectorField::zeros(n, n, d);
    p.coeffs[1] = p1.clone();
    for i in 2..=d {
        let partial = p.with_degree(i - 1);
        let s = compose(&partial, tbar, i).coeffs[i].clone();
        let factors: Vec<&Mat> = (0..i).map(|_| &p1).collect();
        p.coeffs[i] = -mat_times_kron(&s, &factors);
    }
    Ok(p)
}

/// Reduced model of order `r` with its initial condition.
#[derive(Clone, Debug, PartialEq)]
pub struct Rom {
    pub sys: PolySystem,
    pub z0: Vec<f64>,
}

/// Keep the leading `r` balanced states of a balanced realization.
pub fn build_rom(balanced: &PolySystem, pinv: &PolyVectorField, r: usize, x0: &[f64]) -> Result<Rom> {
    if r == 0 || r > balanced.n {
        return Err(NlbtError::InvalidArgument(format!("reduced order {r} out of range")));
    }
    let f = balanced.f.select_rows(r).truncate_columns(r);
    let g = balanced.g.iter().map(|g| g.select_rows(r).truncate_columns(r)).collect();
    let h = balanced.h.truncate_columns(r);
    let z0 = pinv.eval(x0).as_slice()[..r].to_vec();
    Ok(Rom { sys: PolySystem::new(f, g, h)?, z0 })
}

/// Manifold map `z̄_r -> T̄([z̄_r; 0])`.
pub fn truncate_transform(tbar: &PolyVectorField, r: usize) -> PolyVectorField {
    tbar.truncate_columns(r)
}

/// `σ_1 / σ_n`, reported as an ill-conditioning diagnostic.
pub fn sigma_condition(hankel: &[f64]) -> f64 {
    hankel[0] / hankel[hankel.len() - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_transform_is_similarity() {
        let a = Mat::from_row_slice(2, 2, &[-1.0, 0.5, 0.0, -3.0]);
        let b = Mat::from_row_slice(2, 1, &[1.0, 2.0]);
        let c = Mat::from_row_slice(1, 2, &[1.0, -1.0]);
        let sys = PolySystem::linear(&a, &b, &c).unwrap();
        let t = Mat::from_row_slice(2, 2, &[2.0, 1.0, 0.5, 1.0]);
        let bal = balanced_realization(&sys, &PolyVectorField::linear(&t), 1).unwrap();
        let ti = t.clone().try_inverse().unwrap();
        assert!((bal.a() - &ti * &a * &t).abs().max() < 1e-13);
        assert!((bal.b() - &ti * &b).abs().max() < 1e-13);
        assert!((bal.c() - &c * &t).abs().max() < 1e-13);
    }

    #[test]
    fn inverse_of_quadratic_map() {
        let mut t = PolyVectorField::zeros(2, 2, 2);
        t.coeffs[1] = Mat::from_row_slice(2, 2, &[1.0, 0.2, -0.3, 1.5]);
        t.coeffs[2] = Mat::from_row_slice(2, 4, &[0.1, 0.0, 0.0, -0.2, 0.0, 0.3, 0.3, 0.0]);
        let p = inverse_transform(&t, 4).unwrap();
        let z = [1e-2, -2e-2];
        let back = p.eval(t.eval(&z).as_slice());
        let err = ((back[0] - z[0]).powi(2) + (back[1] - z[1]).powi(2)).sqrt();
        assert!(err < 1e-9);
    }
}
