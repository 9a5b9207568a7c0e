//! End-to-end balancing and reduction.

use crate::energy::{controllability_energy, observability_energy, EnergyCoeffs};
use crate::error::{NlbtError, Result};
use crate::inod::{compute_inod_transform, InodTransform};
use crate::kron::PolyVectorField;
use crate::realization::{balanced_realization, build_rom, inverse_transform, sigma_condition, Rom};
use crate::scaling::{assemble_scaling_coeffs, compose_balancing, scaling_series};
use crate::system::PolySystem;
use std::time::Instant;

/// Everything computed by [`balance`].
#[derive(Clone, Debug, PartialEq)]
pub struct Balancing {
    pub d_transf: usize,
    pub ec: EnergyCoeffs,
    pub eo: EnergyCoeffs,
    pub inod: InodTransform,
    pub a_phi: PolyVectorField,
    pub tbar: PolyVectorField,
    pub pinv: PolyVectorField,
}

impl Balancing {
    pub fn hankel(&self) -> &[f64] {
        &self.inod.lin.hankel
    }

    pub fn condition(&self) -> f64 {
        sigma_condition(self.hankel())
    }
}

/// Energies to degree `d_transf + 1`, the in/od transformation and scaling,
/// and the balancing transformation `T̄` with its inverse, both of degree
/// `d_transf`.
pub fn balance(sys: &PolySystem, d_transf: usize) -> Result<Balancing> {
    if d_transf < 1 {
        return Err(NlbtError::InvalidArgument("transformation degree must be at least 1".into()));
    }
    let de = d_transf + 1;
    let ec = controllability_energy(sys, de)?;
    let eo = observability_energy(sys, de)?;
    balance_from_energies(ec, eo, d_transf)
}

pub fn balance_from_energies(ec: EnergyCoeffs, eo: EnergyCoeffs, d_transf: usize) -> Result<Balancing> {
    let inod = compute_inod_transform(&ec, &eo, d_transf)?;
    let per_state = scaling_series(&inod.sigma_sq, d_transf)?;
    let a_phi = assemble_scaling_coeffs(&per_state, d_transf);
    let tbar = compose_balancing(&inod.t, &a_phi, d_transf).symmetrized();
    let pinv = inverse_transform(&tbar, d_transf)?;
    Ok(Balancing { d_transf, ec, eo, inod, a_phi, tbar, pinv })
}

/// Balanced realization of degree `d_rom` truncated to `r` states, with
/// the reduced initial condition of `x0`.
pub fn reduce(sys: &PolySystem, bal: &Balancing, r: usize, d_rom: usize, x0: &[f64]) -> Result<Rom> {
    let full = balanced_realization(sys, &bal.tbar, d_rom)?;
    build_rom(&full, &bal.pinv, r, x0)
}

/// Wall-clock seconds per pipeline stage.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StageTimes {
    pub energy: f64,
    pub inod: f64,
    pub balance: f64,
    pub realization: f64,
}

impl StageTimes {
    pub fn total(&self) -> f64 {
        self.energy + self.inod + self.balance + self.realization
    }
}

/// Run the pipeline once and time each stage.
pub fn timed_pipeline(sys: &PolySystem, d_transf: usize, d_rom: usize) -> Result<StageTimes> {
    let t0 = Instant::now();
    let ec = controllability_energy(sys, d_transf + 1)?;
    let eo = observability_energy(sys, d_transf + 1)?;
    let energy = t0.elapsed().as_secs_f64();
    let t1 = Instant::now();
    let inod = compute_inod_transform(&ec, &eo, d_transf)?;
    let inod_t = t1.elapsed().as_secs_f64();
    let t2 = Instant::now();
    let per_state = scaling_series(&inod.sigma_sq, d_transf)?;
    let a_phi = assemble_scaling_coeffs(&per_state, d_transf);
    let tbar = compose_balancing(&inod.t, &a_phi, d_transf).symmetrized();
    let pinv = inverse_transform(&tbar, d_transf)?;
    let balance_t = t2.elapsed().as_secs_f64();
    let t3 = Instant::now();
    let full = balanced_realization(sys, &tbar, d_rom)?;
    std::hint::black_box((&full, &pinv));
    let realization = t3.elapsed().as_secs_f64();
    Ok(StageTimes { energy, inod: inod_t, balance: balance_t, realization })
}

/// Estimated peak bytes for the largest dense block of the pipeline.
pub fn memory_estimate(n: usize, d_transf: usize, d_rom: usize) -> u128 {
    let n = n as u128;
    let de = (d_transf + 1) as u32;
    // energy solve vectors and the widest realization coefficient block
    let energy = 8 * 6 * n.pow(de);
    let real = 8 * 4 * n * n.pow(d_rom.max(d_transf) as u32);
    energy.max(real)
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let k = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kron::Mat;

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 2.0, 4.0, 8.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(4)).collect();
        assert!((loglog_slope(&x, &y) - 4.0).abs() < 1e-12);
    }

    #[test]
    fn linear_system_full_rom_is_similarity() {
        let a = Mat::from_row_slice(2, 2, &[-1.0, 0.3, 0.0, -2.5]);
        let b = Mat::from_row_slice(2, 1, &[1.0, 0.5]);
        let c = Mat::from_row_slice(1, 2, &[1.0, -0.2]);
        let sys = PolySystem::linear(&a, &b, &c).unwrap();
        let bal = balance(&sys, 2).unwrap();
        assert!(bal.tbar.max_abs_from(2) < 1e-12);
        let rom = reduce(&sys, &bal, 2, 2, &[0.1, 0.2]).unwrap();
        let t = &bal.tbar.coeffs[1];
        let ti = t.clone().try_inverse().unwrap();
        assert!((rom.sys.a() - &ti * &a * t).abs().max() < 1e-10);
    }
}
