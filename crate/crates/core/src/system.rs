//! Input-affine polynomial systems `x' = f(x) + g(x) u`, `y = h(x)`.

use crate::error::{NlbtError, Result};
use crate::kron::{ipow, Mat, PolyVectorField};
use nalgebra::DVector;

/// `g` is kept per input column: `g[l]` is the polynomial `g^{(l)}(x)`.
/// The stacked block `G_k = [G_k^{(1)} .. G_k^{(m)}]` is available through
/// [`PolySystem::stacked_g`].
#[derive(Clone, Debug, PartialEq)]
pub struct PolySystem {
    pub n: usize,
    pub m: usize,
    pub p: usize,
    pub f: PolyVectorField,
    pub g: Vec<PolyVectorField>,
    pub h: PolyVectorField,
}

impl PolySystem {
    pub fn new(f: PolyVectorField, g: Vec<PolyVectorField>, h: PolyVectorField) -> Result<Self> {
        let n = f.rows;
        if f.nvars != n || h.nvars != n {
            return Err(NlbtError::InvalidArgument("state dimension mismatch".into()));
        }
        if g.iter().any(|gi| gi.rows != n || gi.nvars != n) {
            return Err(NlbtError::InvalidArgument("input field dimension mismatch".into()));
        }
        if f.degree() < 1 || h.degree() < 1 {
            return Err(NlbtError::InvalidArgument("drift and output need a linear part".into()));
        }
        if f.coeffs[0].iter().any(|&x| x != 0.0) || h.coeffs[0].iter().any(|&x| x != 0.0) {
            return Err(NlbtError::InvalidArgument("origin must be an equilibrium with zero output".into()));
        }
        Ok(PolySystem { n, m: g.len(), p: h.rows, f, g, h })
    }

    /// Linear time-invariant system.
    pub fn linear(a: &Mat, b: &Mat, c: &Mat) -> Result<Self> {
        let n = a.nrows();
        let g = (0..b.ncols())
            .map(|l| {
                let mut gl = PolyVectorField::zeros(n, n, 0);
                gl.coeffs[0] = Mat::from_column_slice(n, 1, b.column(l).as_slice());
                gl
            })
            .collect();
        Self::new(PolyVectorField::linear(a), g, PolyVectorField::linear(c))
    }

    pub fn a(&self) -> Mat {
        self.f.coeffs[1].clone()
    }

    pub fn b(&self) -> Mat {
        let mut b = Mat::zeros(self.n, self.m);
        for (l, gl) in self.g.iter().enumerate() {
            b.set_column(l, &gl.coeffs[0].column(0));
        }
        b
    }

    pub fn c(&self) -> Mat {
        self.h.coeffs[1].clone()
    }

    pub fn g_degree(&self) -> usize {
        self.g.iter().map(|g| g.degree()).max().unwrap_or(0)
    }

    pub fn degree(&self) -> usize {
        self.f.degree().max(self.h.degree()).max(self.g_degree())
    }

    /// `G_k = [G_k^{(1)} .. G_k^{(m)}]`, shape `n x m n^k`.
    pub fn stacked_g(&self, k: usize) -> Mat {
        let w = ipow(self.n, k);
        let mut out = Mat::zeros(self.n, self.m * w);
        for (l, gl) in self.g.iter().enumerate() {
            out.view_mut((0, l * w), (self.n, w)).copy_from(&gl.coeff_or_zero(k));
        }
        out
    }

    pub fn eval_f(&self, x: &[f64]) -> DVector<f64> {
        self.f.eval(x)
    }

    pub fn eval_g(&self, x: &[f64]) -> Mat {
        let mut out = Mat::zeros(self.n, self.m);
        for (l, gl) in self.g.iter().enumerate() {
            out.set_column(l, &gl.eval(x));
        }
        out
    }

    pub fn eval_h(&self, x: &[f64]) -> DVector<f64> {
        self.h.eval(x)
    }

    pub fn rhs(&self, x: &[f64], u: &[f64]) -> DVector<f64> {
        let mut dx = self.eval_f(x);
        if self.m > 0 {
            dx += self.eval_g(x) * DVector::from_column_slice(u);
        }
        dx
    }

    /// Linear part `(F_1, G_0, H_1)` as its own system.
    pub fn linearization(&self) -> Self {
        Self::linear(&self.a(), &self.b(), &self.c()).expect("linear part is well formed")
    }

    /// Keep degrees up to `d` in `f` and `h`, and up to `d - 1` in `g`.
    pub fn truncated(&self, d: usize) -> Self {
        PolySystem {
            n: self.n,
            m: self.m,
            p: self.p,
            f: self.f.with_degree(d.min(self.f.degree())),
            g: self.g.iter().map(|g| g.with_degree((d - 1).min(g.degree()))).collect(),
            h: self.h.with_degree(d.min(self.h.degree())),
        }
    }
}
