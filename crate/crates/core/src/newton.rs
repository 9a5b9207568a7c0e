//! Implicit evaluation of the balancing transformation by Newton iteration,
//! using `Φ` and the singular value functions instead of the composed
//! polynomial `T̄`.

use crate::error::{NlbtError, Result};
use crate::inod::SqSingularValueFns;
use crate::kron::{Mat, PolyVectorField};
use crate::system::PolySystem;
use nalgebra::DVector;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions { tol: 1e-10, max_iter: 50 }
    }
}

fn sigma_sq(sig: &SqSingularValueFns, i: usize, zi: f64) -> Result<f64> {
    let s = sig.eval(i, zi);
    if s <= 0.0 || !s.is_finite() {
        return Err(NlbtError::NonPositiveSigma { state: i });
    }
    Ok(s)
}

/// `z̄_i = z_i (σ_i^2(z_i))^{1/4}`.
pub fn eval_inverse_scaling(sig: &SqSingularValueFns, z: &[f64]) -> Result<Vec<f64>> {
    z.iter()
        .enumerate()
        .map(|(i, &zi)| Ok(zi * sigma_sq(sig, i, zi)?.powf(0.25)))
        .collect()
}

/// Diagonal of the Jacobian of the inverse scaling map.
pub fn inverse_scaling_jacobian(sig: &SqSingularValueFns, z: &[f64]) -> Result<Vec<f64>> {
    z.iter()
        .enumerate()
        .map(|(i, &zi)| {
            let s2 = sigma_sq(sig, i, zi)?;
            let ds2 = sig.derivative(i, zi);
            Ok(s2.powf(0.25) + 0.25 * zi * ds2 * s2.powf(-0.75))
        })
        .collect()
}

/// Solve `z̄ = ν(z)` for `z`, one decoupled scalar equation per state.
pub fn newton_scaling(sig: &SqSingularValueFns, zbar: &[f64], opts: NewtonOptions) -> Result<Vec<f64>> {
    let mut z: Vec<f64> = zbar
        .iter()
        .enumerate()
        .map(|(i, &zb)| Ok(zb / sigma_sq(sig, i, zb)?.powf(0.25)))
        .collect::<Result<_>>()?;
    for _ in 0..opts.max_iter {
        let nu = eval_inverse_scaling(sig, &z)?;
        let res: Vec<f64> = nu.iter().zip(zbar).map(|(a, b)| a - b).collect();
        let rnorm = res.iter().fold(0.0f64, |m, r| m.max(r.abs()));
        if rnorm <= opts.tol {
            return Ok(z);
        }
        let jac = inverse_scaling_jacobian(sig, &z)?;
        for i in 0..z.len() {
            z[i] -= res[i] / jac[i];
        }
    }
    let nu = eval_inverse_scaling(sig, &z)?;
    let residual = nu.iter().zip(zbar).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if residual <= opts.tol {
        return Ok(z);
    }
    Err(NlbtError::NewtonDiverged { iterate: z, residual })
}

/// `x = Φ(φ(z̄))`.
pub fn eval_balancing_newton(
    phi: &PolyVectorField,
    sig: &SqSingularValueFns,
    zbar: &[f64],
    opts: NewtonOptions,
) -> Result<Vec<f64>> {
    let z = newton_scaling(sig, zbar, opts)?;
    Ok(phi.eval(&z).as_slice().to_vec())
}

/// `∂x/∂z̄ = ∂Φ/∂z · diag(∂ν/∂z)^{-1}` at `z = φ(z̄)`.
pub fn balancing_jacobian_newton(
    phi: &PolyVectorField,
    sig: &SqSingularValueFns,
    zbar: &[f64],
    opts: NewtonOptions,
) -> Result<Mat> {
    let z = newton_scaling(sig, zbar, opts)?;
    let dnu = inverse_scaling_jacobian(sig, &z)?;
    let mut j = phi.jacobian(&z);
    for (c, d) in dnu.iter().enumerate() {
        let mut col = j.column_mut(c);
        col /= *d;
    }
    Ok(j)
}

/// Solve `x = T̄(z̄)` for `z̄` starting from `T̄_1^{-1} x`.
pub fn newton_inverse_balancing(
    phi: &PolyVectorField,
    sig: &SqSingularValueFns,
    tbar1_inv: &Mat,
    x: &[f64],
    opts: NewtonOptions,
) -> Result<Vec<f64>> {
    let xv = DVector::from_column_slice(x);
    let mut zbar = tbar1_inv * &xv;
    for _ in 0..opts.max_iter {
        let fx = DVector::from_vec(eval_balancing_newton(phi, sig, zbar.as_slice(), opts)?) - &xv;
        if fx.amax() <= opts.tol {
            return Ok(zbar.as_slice().to_vec());
        }
        let j = balancing_jacobian_newton(phi, sig, zbar.as_slice(), opts)?;
        let step = j.lu().solve(&fx).ok_or(NlbtError::NewtonDiverged {
            iterate: zbar.as_slice().to_vec(),
            residual: fx.amax(),
        })?;
        zbar -= step;
    }
    let fx = DVector::from_vec(eval_balancing_newton(phi, sig, zbar.as_slice(), opts)?) - &xv;
    if fx.amax() <= opts.tol {
        return Ok(zbar.as_slice().to_vec());
    }
    Err(NlbtError::NewtonDiverged { iterate: zbar.as_slice().to_vec(), residual: fx.amax() })
}

/// Balanced-coordinate right-hand side and output evaluated implicitly.
pub fn balanced_rhs_newton(
    sys: &PolySystem,
    phi: &PolyVectorField,
    sig: &SqSingularValueFns,
    zbar: &[f64],
    u: &[f64],
    opts: NewtonOptions,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let x = eval_balancing_newton(phi, sig, zbar, opts)?;
    let j = balancing_jacobian_newton(phi, sig, zbar, opts)?;
    let rhs = sys.rhs(&x, u);
    let dz = j.lu().solve(&rhs).ok_or(NlbtError::NewtonDiverged {
        iterate: zbar.to_vec(),
        residual: f64::INFINITY,
    })?;
    Ok((dz, sys.eval_h(&x)))
}
