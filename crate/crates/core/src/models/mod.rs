//! Example systems and synthetic test systems.

pub mod series;

use crate::error::{NlbtError, Result};
use crate::inod::linear_balancing;
use crate::kron::{ipow, Mat, PolyVectorField};
use crate::linalg::lyapunov;
use crate::system::PolySystem;
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use series::{mat_to_series, to_poly_field, Series};
use std::sync::Arc;

pub type ExactRhs = Arc<dyn Fn(&[f64], &[f64]) -> Vec<f64> + Send + Sync>;
pub type ExactOut = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// A polynomial system, optionally with the non-polynomial dynamics it
/// approximates.
#[derive(Clone)]
pub struct Model {
    pub name: String,
    pub sys: PolySystem,
    pub exact_rhs: Option<ExactRhs>,
    pub exact_out: Option<ExactOut>,
}

impl std::fmt::Debug for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Model").field("name", &self.name).field("sys", &self.sys).finish()
    }
}

impl Model {
    fn poly(name: &str, sys: PolySystem) -> Self {
        Model { name: name.to_string(), sys, exact_rhs: None, exact_out: None }
    }

    /// Right-hand side of the reference dynamics.
    pub fn rhs(&self, x: &[f64], u: &[f64]) -> Vec<f64> {
        match &self.exact_rhs {
            Some(f) => f(x, u),
            None => self.sys.rhs(x, u).as_slice().to_vec(),
        }
    }

    pub fn output(&self, x: &[f64]) -> Vec<f64> {
        match &self.exact_out {
            Some(h) => h(x),
            None => self.sys.eval_h(x).as_slice().to_vec(),
        }
    }
}

/// Names accepted by [`by_name`].
pub const ZOO: [&str; 6] = ["2d-illustrative", "pendulum", "3d-illustrative", "3d-constructed", "double-pendulum", "beam"];

/// Zoo lookup; `degree` is the Taylor degree for the non-polynomial models.
pub fn by_name(name: &str, degree: usize) -> Result<Model> {
    match name {
        "2d-illustrative" => two_dim_illustrative(),
        "pendulum" => pendulum(degree),
        "3d-illustrative" => three_dim_illustrative(),
        "3d-constructed" => three_dim_constructed(),
        "double-pendulum" => double_pendulum(degree),
        "beam" => beam_single_element(),
        _ => Err(NlbtError::InvalidArgument(format!("unknown model '{name}'"))),
    }
}

fn x(n: usize, d: usize, i: usize) -> Series {
    Series::var(n, d, i)
}

fn mono(n: usize, d: usize, c: f64, e: &[u32]) -> Series {
    Series::monomial(n, d, c, e)
}

fn sum(terms: &[Series]) -> Series {
    let mut it = terms.iter();
    let first = it.next().expect("empty sum").clone();
    it.fold(first, |acc, t| &acc + t)
}

fn system_from_series(f: &[Series], g: &[Vec<Series>], h: &[Series], n: usize, d: usize) -> Result<PolySystem> {
    let fd = f.iter().map(|s| s.deg).max().unwrap_or(d).max(1);
    let hd = h.iter().map(|s| s.deg).max().unwrap_or(d).max(1);
    let gd = g.iter().flatten().map(|s| s.deg).max().unwrap_or(0);
    let gf = g.iter().map(|col| to_poly_field(col, n, gd)).collect();
    PolySystem::new(to_poly_field(f, n, fd), gf, to_poly_field(h, n, hd))
}

pub fn alpha_2d() -> f64 {
    (3f64.sqrt() + 2f64.sqrt()) * (3f64.sqrt() + 2.0)
}

/// Quadratic two-state example with an exactly quartic energy pair.
pub fn two_dim_illustrative() -> Result<Model> {
    let (n, a) = (2, alpha_2d());
    let s2 = 2f64.sqrt();
    let f = [
        sum(&[x(n, 2, 0).scale(-a * a), x(n, 2, 1).scale(-2.0 * a), mono(n, 2, -(a * a - 2.0), &[0, 2])]),
        x(n, 2, 1).scale(-1.0),
    ];
    let g = [vec![
        &Series::constant(n, 1, s2 * a) + &x(n, 1, 1).scale(-2.0 * s2),
        Series::constant(n, 1, s2),
    ]];
    let h = [sum(&[
        x(n, 2, 0).scale(3f64.sqrt() * a),
        mono(n, 2, 3f64.sqrt() * a, &[0, 2]),
        x(n, 2, 1).scale((a - 2.0 * s2) / 3f64.sqrt()),
    ])];
    Ok(Model::poly("2d-illustrative", system_from_series(&f, &g, &h, n, 2)?))
}

pub const PENDULUM_G_OVER_L: f64 = 0.5;
pub const PENDULUM_K: f64 = 0.1;
pub const PENDULUM_B: f64 = 0.2;

/// Damped pendulum with torque input and angle output; `sin` expanded to
/// degree `d`.
pub fn pendulum(d: usize) -> Result<Model> {
    pendulum_with_gain(d, 1.0)
}

/// Pendulum with the input multiplied by `gain`; `1/(mL^2) = 0.1` is the
/// torque-to-acceleration factor.
pub fn pendulum_with_gain(d: usize, gain: f64) -> Result<Model> {
    let n = 2;
    let d = d.max(1);
    let s = x(n, d, 0).sin();
    let f = [
        x(n, d, 1),
        sum(&[s.scale(-PENDULUM_G_OVER_L), x(n, d, 0).scale(-PENDULUM_K), x(n, d, 1).scale(-PENDULUM_B)]),
    ];
    let g = [vec![Series::zero(n, 0), Series::constant(n, 0, gain)]];
    let h = [x(n, 1, 0)];
    let sys = system_from_series(&f, &g, &h, n, d)?;
    let rhs: ExactRhs = Arc::new(move |x, u| {
        vec![x[1], -PENDULUM_G_OVER_L * x[0].sin() - PENDULUM_K * x[0] - PENDULUM_B * x[1] + gain * u[0]]
    });
    let out: ExactOut = Arc::new(|x| vec![x[0]]);
    Ok(Model { name: "pendulum".into(), sys, exact_rhs: Some(rhs), exact_out: Some(out) })
}

/// Quintic three-state example with the coefficients rounded to three
/// significant figures.
pub fn three_dim_illustrative() -> Result<Model> {
    let (n, d) = (3, 5);
    let m = |c: f64, e: [u32; 3]| mono(n, d, c, &e);
    let f = [
        sum(&[
            m(-0.172, [3, 0, 0]),
            m(-0.172, [2, 0, 0]),
            m(-0.739, [1, 0, 0]),
            m(-0.172, [0, 2, 0]),
            m(1.57, [0, 1, 0]),
            m(-0.172, [0, 0, 1]),
        ]),
        sum(&[
            m(1.72, [3, 0, 0]),
            m(1.72, [2, 0, 0]),
            m(-1.57, [1, 0, 0]),
            m(1.72, [0, 2, 0]),
            m(-6.26, [0, 1, 0]),
            m(1.72, [0, 0, 1]),
        ]),
        sum(&[
            m(0.515, [2, 2, 0]),
            m(-1.72, [0, 1, 0]),
            m(-1.0, [0, 0, 1]),
            m(-0.172, [1, 0, 0]),
            m(0.343, [1, 0, 1]),
            m(-3.43, [0, 1, 1]),
            m(0.343, [1, 2, 0]),
            m(-8.13, [2, 1, 0]),
            m(0.515, [2, 0, 1]),
            m(-3.43, [3, 1, 0]),
            m(0.476, [2, 0, 0]),
            m(1.56, [3, 0, 0]),
            m(11.5, [0, 2, 0]),
            m(0.859, [4, 0, 0]),
            m(-3.43, [0, 3, 0]),
            m(0.515, [5, 0, 0]),
        ]),
    ];
    let gd = 2;
    let g = [vec![
        Series::constant(n, gd, 5.09),
        Series::constant(n, gd, 4.82),
        sum(&[
            Series::constant(n, gd, 0.597),
            mono(n, gd, -15.3, &[2, 0, 0]),
            mono(n, gd, -10.2, &[1, 0, 0]),
            mono(n, gd, -9.64, &[0, 1, 0]),
        ]),
    ]];
    let h = [sum(&[
        m(0.597, [3, 0, 0]),
        m(0.597, [2, 0, 0]),
        m(5.09, [1, 0, 0]),
        m(0.597, [0, 2, 0]),
        m(-4.82, [0, 1, 0]),
        m(0.597, [0, 0, 1]),
    ])];
    Ok(Model::poly("3d-illustrative", system_from_series(&f, &g, &h, n, d)?))
}

/// Linear three-state model whose balanced form underlies the 3D example.
pub fn three_dim_linear_base() -> (Mat, Mat, Mat) {
    let a = Mat::from_row_slice(3, 3, &[-1.0, 0.0, 100.0, 0.0, -2.0, 100.0, 0.0, 0.0, -5.0]);
    (a, Mat::from_element(3, 1, 1.0), Mat::from_element(1, 3, 1.0))
}

/// The 3D example built exactly: balance the linear model, flip the signs of
/// the first two balanced states, and change coordinates by
/// `ẑ = (x1, x2, x3 + x1² + x2² + x1³)`.
pub fn three_dim_constructed() -> Result<Model> {
    let (a, b, c) = three_dim_linear_base();
    let wc = lyapunov(&a, &(&b * b.transpose()))?;
    let wo = lyapunov(&a.transpose(), &(c.transpose() * &c))?;
    let lb = linear_balancing(&wc, &wo)?;
    let s = Mat::from_diagonal(&DVector::from_vec(vec![-1.0, -1.0, 1.0]));
    let ab = &s * &lb.tbar1_inv * &a * &lb.tbar1 * &s;
    let bb = &s * &lb.tbar1_inv * &b;
    let cb = &c * &lb.tbar1 * &s;
    let (n, d) = (3, 5);
    let zhat = [
        x(n, d, 0),
        x(n, d, 1),
        sum(&[x(n, d, 2), mono(n, d, 1.0, &[2, 0, 0]), mono(n, d, 1.0, &[0, 2, 0]), mono(n, d, 1.0, &[3, 0, 0])]),
    ];
    let dz: Vec<Series> = (0..3)
        .map(|i| sum(&[zhat[0].scale(ab[(i, 0)]), zhat[1].scale(ab[(i, 1)]), zhat[2].scale(ab[(i, 2)])]))
        .collect();
    let w1 = &x(n, d, 0).scale(2.0) + &mono(n, d, 3.0, &[2, 0, 0]);
    let w2 = x(n, d, 1).scale(2.0);
    let f = [dz[0].clone(), dz[1].clone(), &(&dz[2] - &(&w1 * &dz[0])) - &(&w2 * &dz[1])];
    let g3 = &(&Series::constant(n, d, bb[(2, 0)]) - &w1.scale(bb[(0, 0)])) - &w2.scale(bb[(1, 0)]);
    let g = [vec![Series::constant(n, 2, bb[(0, 0)]), Series::constant(n, 2, bb[(1, 0)]), g3]];
    let h = [sum(&[zhat[0].scale(cb[(0, 0)]), zhat[1].scale(cb[(0, 1)]), zhat[2].scale(cb[(0, 2)])])];
    Ok(Model::poly("3d-constructed", system_from_series(&f, &g, &h, n, d)?))
}

/// Arithmetic shared by `f64` and truncated series, so one routine gives
/// both the exact dynamics and their Taylor expansion.
pub trait Scalar: Clone {
    fn cst(&self, c: f64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn recip(&self) -> Self;
    fn scale(&self, c: f64) -> Self {
        self.mul(&self.cst(c))
    }
}

impl Scalar for f64 {
    fn cst(&self, c: f64) -> Self {
        c
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn recip(&self) -> Self {
        1.0 / self
    }
}

impl Scalar for Series {
    fn cst(&self, c: f64) -> Self {
        Series::constant(self.nvars, self.deg, c)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn sin(&self) -> Self {
        Series::sin(self)
    }
    fn cos(&self) -> Self {
        Series::cos(self)
    }
    fn recip(&self) -> Self {
        Series::recip(self)
    }
    fn scale(&self, c: f64) -> Self {
        Series::scale(self, c)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DoublePendulumParams {
    pub g: f64,
    pub m1: f64,
    pub m2: f64,
    pub l1: f64,
    pub l2: f64,
    pub mu1: f64,
    pub mu2: f64,
}

impl Default for DoublePendulumParams {
    fn default() -> Self {
        DoublePendulumParams { g: 9.8, m1: 1.0, m2: 1.0, l1: 1.0, l2: 1.0, mu1: 1.0, mu2: 1.0 }
    }
}

/// Drift, input column and output of the double pendulum hanging at rest
/// at the origin.
pub fn double_pendulum_fields<S: Scalar>(x: &[S], p: &DoublePendulumParams) -> ([S; 4], [S; 4], [S; 2]) {
    let (x1, x2, x3, x4) = (&x[0], &x[1], &x[2], &x[3]);
    let c2 = x2.cos();
    let s2 = x2.sin();
    let s1 = x1.sin();
    let s12 = x1.add(x2).sin();
    let m12 = p.m2 * p.l1 * p.l2;
    let m11 = c2.scale(2.0 * m12).add(&x1.cst(p.m1 * p.l1 * p.l1 + p.m2 * p.l1 * p.l1 + p.m2 * p.l2 * p.l2));
    let m21 = c2.scale(m12).add(&x1.cst(p.m2 * p.l2 * p.l2));
    let m22 = x1.cst(p.m2 * p.l2 * p.l2);
    // ∂M/∂x2
    let dm11 = s2.scale(-2.0 * m12);
    let dm21 = s2.scale(-m12);
    // ∂L/∂x1, ∂L/∂x2
    let dl1 = s1.scale(-(p.m1 + p.m2) * p.g * p.l1).sub(&s12.scale(p.m2 * p.g * p.l2));
    let kin = dm11.mul(&x3.mul(x3)).add(&dm21.mul(&x3.mul(x4)).scale(2.0)).scale(0.5);
    let dl2 = kin.sub(&s12.scale(p.m2 * p.g * p.l2));
    // Ṁ q̇ with Ṁ = ∂M/∂x2 · x4
    let mdot1 = dm11.mul(x3).add(&dm21.mul(x4)).mul(x4);
    let mdot2 = dm21.mul(x3).mul(x4);
    let r1 = dl1.sub(&mdot1).sub(&x3.scale(p.mu1));
    let r2 = dl2.sub(&mdot2).sub(&x4.scale(p.mu2));
    let det_inv = m11.mul(&m22).sub(&m21.mul(&m21)).recip();
    let solve = |a: &S, b: &S| -> (S, S) {
        (
            m22.mul(a).sub(&m21.mul(b)).mul(&det_inv),
            m11.mul(b).sub(&m21.mul(a)).mul(&det_inv),
        )
    };
    let (q1, q2) = solve(&r1, &r2);
    let (g1, g2) = solve(&x1.cst(1.0), &x1.cst(0.0));
    let zero = x1.cst(0.0);
    let y1 = s1.scale(p.l1).add(&s12.scale(p.l2));
    let y2 = x1.cos().scale(-p.l1).add(&x1.add(x2).cos().scale(-p.l2)).add(&x1.cst(p.l1 + p.l2));
    ([x3.clone(), x4.clone(), q1, q2], [zero.clone(), zero, g1, g2], [y1, y2])
}

/// Damped double pendulum with torque at the pivot and tip displacement
/// outputs; Taylor degree `d` for the drift and output, `d - 1` for the
/// input column.
pub fn double_pendulum(d: usize) -> Result<Model> {
    if !(1..=7).contains(&d) {
        return Err(NlbtError::InvalidArgument("double pendulum expansion degree must be 1..=7".into()));
    }
    let n = 4;
    let p = DoublePendulumParams::default();
    let xs: Vec<Series> = (0..n).map(|i| x(n, d, i)).collect();
    let (f, g, h) = double_pendulum_fields(&xs, &p);
    let gd = d.saturating_sub(1);
    let g: Vec<Series> = g.iter().map(|s| truncate_series(s, gd)).collect();
    let sys = system_from_series(&f, &[g], &h, n, d)?;
    let rhs: ExactRhs = Arc::new(move |x, u| {
        let (f, g, _) = double_pendulum_fields(x, &p);
        (0..4).map(|i| f[i] + g[i] * u[0]).collect()
    });
    let out: ExactOut = Arc::new(move |x| double_pendulum_fields(x, &p).2.to_vec());
    Ok(Model { name: "double-pendulum".into(), sys, exact_rhs: Some(rhs), exact_out: Some(out) })
}

fn truncate_series(s: &Series, d: usize) -> Series {
    let mut t = Series::zero(s.nvars, d);
    for (e, &c) in &s.terms {
        if e.iter().sum::<u32>() as usize <= d {
            t.terms.insert(e.clone(), c);
        }
    }
    t
}

/// One-element cantilever beam with cubic strain coupling, full-state input
/// and output.
pub fn beam_single_element() -> Result<Model> {
    let (n, d) = (6, 3);
    let m = |c: f64, e: [u32; 6]| mono(n, d, c, &e);
    let f = [
        x(n, d, 3),
        x(n, d, 4),
        x(n, d, 5),
        sum(&[
            m(-7.88e7, [1, 0, 0, 0, 0, 0]),
            m(-7880.0, [0, 0, 0, 1, 0, 0]),
            m(-4.72e7, [0, 2, 0, 0, 0, 0]),
            m(7.88e6, [0, 1, 1, 0, 0, 0]),
            m(-5.25e6, [0, 0, 2, 0, 0, 0]),
        ]),
        sum(&[
            m(1.32e7, [0, 1, 0, 0, 0, 0]),
            m(-1.01e7, [0, 0, 1, 0, 0, 0]),
            m(1320.0, [0, 0, 0, 0, 1, 0]),
            m(-1010.0, [0, 0, 0, 0, 0, 1]),
            m(-2.05e8, [1, 1, 0, 0, 0, 0]),
            m(-2e8, [1, 0, 1, 0, 0, 0]),
            m(-5.91e7, [0, 1, 2, 0, 0, 0]),
            m(-1.01e8, [0, 2, 1, 0, 0, 0]),
            m(-1.01e8, [0, 3, 0, 0, 0, 0]),
            m(-5.06e7, [0, 0, 3, 0, 0, 0]),
        ]),
        sum(&[
            m(1.06e8, [0, 1, 0, 0, 0, 0]),
            m(-7.75e7, [0, 0, 1, 0, 0, 0]),
            m(1.06e4, [0, 0, 0, 0, 1, 0]),
            m(-7750.0, [0, 0, 0, 0, 0, 1]),
            m(-8.5e8, [1, 1, 0, 0, 0, 0]),
            m(-1.46e9, [1, 0, 1, 0, 0, 0]),
            m(-3.54e8, [0, 1, 2, 0, 0, 0]),
            m(-9.11e8, [0, 2, 1, 0, 0, 0]),
            m(-2.02e8, [0, 3, 0, 0, 0, 0]),
            m(-3.57e8, [0, 0, 3, 0, 0, 0]),
        ]),
    ];
    let eye = Mat::identity(n, n);
    let g: Vec<Vec<Series>> = (0..n)
        .map(|l| (0..n).map(|i| Series::constant(n, 0, eye[(i, l)])).collect())
        .collect();
    let h = mat_to_series(&eye, n, 1);
    Ok(Model::poly("beam", system_from_series(&f, &g, &h, n, d)?))
}

fn gaussian_mat(rng: &mut ChaCha8Rng, r: usize, c: usize, scale: f64) -> Mat {
    Mat::from_fn(r, c, |_, _| { let v: f64 = StandardNormal.sample(rng); scale * v })
}

/// Random system with `B = C = I`, a Hurwitz linear part whose symmetric
/// part is at most `-0.5 I`, small drift terms of degree `2..=d`, a small
/// quadratic output term, and distinct Hankel singular values.
pub fn random_stable_poly(n: usize, d: usize, seed: u64) -> Result<Model> {
    if n < 2 || d < 1 {
        return Err(NlbtError::InvalidArgument("random system needs n >= 2 and d >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eye = Mat::identity(n, n);
    for _ in 0..50 {
        let gm = gaussian_mat(&mut rng, n, n, 1.0 / (n as f64).sqrt());
        let s = gm.transpose() * &gm;
        let km = gaussian_mat(&mut rng, n, n, 1.0 / (n as f64).sqrt());
        let k = &km - km.transpose();
        let a = -(&eye * 0.5 + s) + k;
        let wc = lyapunov(&a, &eye)?;
        let wo = lyapunov(&a.transpose(), &eye)?;
        let hankel = match linear_balancing(&wc, &wo) {
            Ok(lb) => lb.hankel,
            Err(_) => continue,
        };
        let min_gap = hankel.windows(2).map(|w| w[0] - w[1]).fold(f64::INFINITY, f64::min);
        if min_gap < 1e-6 * hankel[0] {
            continue;
        }
        let mut f = PolyVectorField::zeros(n, n, d);
        f.coeffs[1] = a;
        for kdeg in 2..=d {
            let scale = 0.1 / (ipow(n, kdeg) as f64).sqrt();
            f.coeffs[kdeg] = gaussian_mat(&mut rng, n, ipow(n, kdeg), scale);
        }
        let mut h = PolyVectorField::zeros(n, n, 2);
        h.coeffs[1] = eye.clone();
        h.coeffs[2] = gaussian_mat(&mut rng, n, n * n, 0.1 / n as f64);
        let g = (0..n)
            .map(|l| {
                let mut gl = PolyVectorField::zeros(n, n, 0);
                gl.coeffs[0][(l, 0)] = 1.0;
                gl
            })
            .collect();
        return Ok(Model::poly(&format!("random-n{n}-d{d}-s{seed}"), PolySystem::new(f, g, h)?));
    }
    Err(NlbtError::InvalidArgument("could not draw a system with distinct Hankel singular values".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_dim_coefficients() {
        let m = two_dim_illustrative().unwrap();
        let a = alpha_2d();
        assert!((m.sys.a()[(0, 0)] + a * a).abs() < 1e-12);
        let b = m.sys.b();
        assert!((b[(0, 0)] - 2f64.sqrt() * a).abs() < 1e-12 && (b[(1, 0)] - 2f64.sqrt()).abs() < 1e-15);
        let x = [0.3, -0.2];
        let h = m.sys.eval_h(&x)[0];
        let want = (3.0 * a * (x[0] + x[1] * x[1]) + (a - 2.0 * 2f64.sqrt()) * x[1]) / 3f64.sqrt();
        assert!((h - want).abs() < 1e-12);
        let g = m.sys.eval_g(&x);
        assert!((g[(0, 0)] - 2f64.sqrt() * (a - 2.0 * x[1])).abs() < 1e-12);
    }

    #[test]
    fn pendulum_linear_part() {
        let m = pendulum(5).unwrap();
        assert!((m.sys.a()[(1, 0)] + 0.6).abs() < 1e-15);
        let x = [0.05, -0.02];
        let exact = m.rhs(&x, &[0.3]);
        let poly = m.sys.rhs(&x, &[0.3]);
        assert!((exact[1] - poly[1]).abs() < 1e-9);
    }

    #[test]
    fn three_dim_rounded_spot_checks() {
        let m = three_dim_illustrative().unwrap();
        let c = m.sys.c();
        assert!((c[(0, 0)] - 5.09).abs() < 1e-15 && (c[(0, 1)] + 4.82).abs() < 1e-15);
        // input column of x3 at x = (1, 0, 0): 0.597 - 15.3 - 10.2
        let g = m.sys.eval_g(&[1.0, 0.0, 0.0]);
        assert!((g[(2, 0)] - (0.597 - 15.3 - 10.2)).abs() < 1e-12);
        assert!(m.sys.eval_f(&[0.0; 3]).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn constructed_matches_rounded_to_three_figures() {
        let a = three_dim_illustrative().unwrap().sys;
        let b = three_dim_constructed().unwrap().sys;
        for k in 1..=5 {
            let (fa, fb) = (a.f.coeff_or_zero(k), b.f.coeff_or_zero(k));
            for (p, q) in fa.iter().zip(fb.iter()) {
                assert!((p - q).abs() <= 5e-3 * q.abs().max(0.1), "degree {k}: {p} vs {q}");
            }
        }
    }

    #[test]
    fn double_pendulum_expansion() {
        let m = double_pendulum(5).unwrap();
        let c = m.sys.c();
        assert!((c[(0, 0)] - 2.0).abs() < 1e-12 && (c[(0, 1)] - 1.0).abs() < 1e-12);
        assert!(c.row(1).iter().all(|v| v.abs() < 1e-14));
        // truncation error shrinks like |x|^6 along a ray
        let err = |s: f64| {
            let x = [0.2 * s, -0.3 * s, 0.1 * s, 0.15 * s];
            let (e, p) = (m.rhs(&x, &[s]), m.sys.rhs(&x, &[s]));
            (0..4).map(|i| (e[i] - p[i]).abs()).fold(0.0, f64::max)
        };
        assert!(err(0.1) < 1e-6);
        assert!(err(0.1) / err(0.05) > 40.0);
        assert!(crate::linalg::KronSolver::new(&m.sys.a()).unwrap().spectral_abscissa() < 0.0);
    }

    #[test]
    fn beam_structure() {
        let m = beam_single_element().unwrap();
        assert_eq!((m.sys.m, m.sys.p), (6, 6));
        let r = m.sys.rhs(&[0.0, 0.0, 0.0, 2.0, 0.0, 0.0], &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!((r[0] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn random_systems_are_reproducible() {
        let a = random_stable_poly(5, 3, 11).unwrap();
        let b = random_stable_poly(5, 3, 11).unwrap();
        assert_eq!(a.sys, b.sys);
        let ab = crate::linalg::KronSolver::new(&a.sys.a()).unwrap().spectral_abscissa();
        assert!(ab <= -0.5 + 1e-9);
    }
}
