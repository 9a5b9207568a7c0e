#![allow(dead_code)]

use nlbt::kron::{digits, ipow, Mat};
use nlbt::pipeline::loglog_slope;
use nlbt::sim::{simulate, InputSignal, SimOptions, SimResult};
use nlbt::PolySystem;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

/// Coefficient of `x^e` in `row · x^{⊗k}`, by scanning every multi-index.
pub fn monomial_coeff(row: &[f64], n: usize, k: usize, e: &[u32]) -> f64 {
    let mut d = vec![0usize; k];
    let mut acc = 0.0;
    for (idx, c) in row.iter().enumerate().take(ipow(n, k)) {
        digits(idx, n, k, &mut d);
        let mut cnt = vec![0u32; n];
        for &j in &d {
            cnt[j] += 1;
        }
        if cnt == e {
            acc += c;
        }
    }
    acc
}

/// Asymptotic order of `err(ε)` along a ray, sampled at `ε = 1e-1 .. 1e-3`.
/// `f(ε)` returns the error and the magnitude of the terms it was computed
/// from; points where the error is at rounding level relative to that
/// magnitude are dropped. The slope is fitted over the three smallest
/// remaining `ε`, since larger ones can still be dominated by higher-degree
/// terms. A ray with fewer than two points left counts as exact (`+∞`).
pub fn ray_slope(f: impl Fn(f64) -> (f64, f64)) -> f64 {
    let eps: Vec<f64> = (0..9).map(|i| 10f64.powf(-1.0 - 0.25 * i as f64)).collect();
    let (x, y): (Vec<f64>, Vec<f64>) = eps
        .iter()
        .map(|&e| (e, f(e)))
        .filter(|(_, (err, mag))| *err > 1e-11 * mag)
        .map(|(e, (err, _))| (e, err))
        .unzip();
    let k = x.len();
    if k < 2 {
        return f64::INFINITY;
    }
    let j = k.saturating_sub(3);
    loglog_slope(&x[j..], &y[j..])
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `x` rounds to the printed value `p` at `digits` significant figures.
pub fn sig_figs_match(x: f64, p: f64, digits: i32) -> bool {
    if p == 0.0 {
        return x.abs() < 1e-12;
    }
    let ulp = 10f64.powi(p.abs().log10().floor() as i32 - digits + 1);
    (x - p).abs() <= 0.5 * ulp * (1.0 + 1e-9)
}

pub fn unit_dir(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x / nrm).collect()
}

pub fn scaled(v: &[f64], s: f64) -> Vec<f64> {
    v.iter().map(|x| x * s).collect()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn simulate_poly(sys: &PolySystem, x0: &[f64], input: &InputSignal, t_end: f64, opts: SimOptions) -> SimResult {
    simulate(
        |x, u| sys.rhs(x, u).as_slice().to_vec(),
        |x| sys.eval_h(x).as_slice().to_vec(),
        x0,
        input,
        t_end,
        opts,
    )
}

/// Controllability Gramian by a materialized Kronecker solve of
/// `(I ⊗ A + A ⊗ I) vec(W) = -vec(B B^T)`.
pub fn gramian_kron(a: &Mat, b: &Mat) -> Mat {
    let n = a.nrows();
    let eye = Mat::identity(n, n);
    let k = eye.kronecker(a) + a.kronecker(&eye);
    let q = b * b.transpose();
    let rhs = nalgebra::DVector::from_iterator(n * n, q.iter().map(|x| -x));
    let w = k.lu().solve(&rhs).expect("singular Kronecker system");
    Mat::from_column_slice(n, n, w.as_slice())
}

/// Square-root balanced truncation with nalgebra's SVD; returns the
/// reduced `(A, B, C)` and the Hankel singular values.
pub fn square_root_bt(a: &Mat, b: &Mat, c: &Mat, r: usize) -> (Mat, Mat, Mat, Vec<f64>) {
    let wc = gramian_kron(a, b);
    let wo = gramian_kron(&a.transpose(), &c.transpose());
    let lc = wc.cholesky().expect("Wc not positive definite").l();
    let lo = wo.cholesky().expect("Wo not positive definite").l();
    let svd = (lc.transpose() * &lo).svd(true, true);
    let mut idx: Vec<usize> = (0..a.nrows()).collect();
    idx.sort_by(|&i, &j| svd.singular_values[j].partial_cmp(&svd.singular_values[i]).unwrap());
    let u = svd.u.unwrap();
    let vt = svd.v_t.unwrap();
    let s: Vec<f64> = idx.iter().map(|&i| svd.singular_values[i]).collect();
    let n = a.nrows();
    let mut t = Mat::zeros(n, r);
    let mut ti = Mat::zeros(r, n);
    for (col, &i) in idx.iter().take(r).enumerate() {
        let si = svd.singular_values[i].powf(-0.5);
        t.set_column(col, &(&lc * u.column(i) * si));
        ti.set_row(col, &(vt.row(i) * lo.transpose() * si));
    }
    (&ti * a * &t, &ti * b, c * &t, s)
}

/// Polynomial map with standard normal coefficients scaled by `scale`;
/// degrees `lo..=hi` are populated.
pub fn random_field(rows: usize, nvars: usize, lo: usize, hi: usize, scale: f64, seed: u64) -> nlbt::PolyVectorField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = nlbt::PolyVectorField::zeros(rows, nvars, hi);
    for k in lo..=hi {
        p.coeffs[k] = Mat::from_fn(rows, ipow(nvars, k), |_, _| {
            let v: f64 = StandardNormal.sample(&mut rng);
            scale * v
        });
    }
    p
}
