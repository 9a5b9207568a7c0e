//! Truncated multivariate power series, used to expand closed-form model
//! right-hand sides about the origin.

use crate::kron::{flat_index, ipow, Mat, PolyVectorField};
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub nvars: usize,
    pub deg: usize,
    pub terms: BTreeMap<Vec<u32>, f64>,
}

impl Series {
    pub fn zero(nvars: usize, deg: usize) -> Self {
        Series { nvars, deg, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, deg: usize, c: f64) -> Self {
        let mut s = Self::zero(nvars, deg);
        if c != 0.0 {
            s.terms.insert(vec![0; nvars], c);
        }
        s
    }

    pub fn var(nvars: usize, deg: usize, i: usize) -> Self {
        let mut s = Self::zero(nvars, deg);
        if deg >= 1 {
            let mut e = vec![0; nvars];
            e[i] = 1;
            s.terms.insert(e, 1.0);
        }
        s
    }

    /// Single monomial `c * x^e`.
    pub fn monomial(nvars: usize, deg: usize, c: f64, e: &[u32]) -> Self {
        let mut s = Self::zero(nvars, deg);
        if e.iter().sum::<u32>() as usize <= deg {
            s.terms.insert(e.to_vec(), c);
        }
        s
    }

    pub fn const_term(&self) -> f64 {
        self.terms.get(&vec![0; self.nvars]).copied().unwrap_or(0.0)
    }

    pub fn scale(&self, c: f64) -> Self {
        let mut s = self.clone();
        s.terms.values_mut().for_each(|v| *v *= c);
        s
    }

    fn without_const(&self) -> Self {
        let mut s = self.clone();
        s.terms.remove(&vec![0; self.nvars]);
        s
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(x).map(|(&k, &xi)| xi.powi(k as i32)).product::<f64>())
            .sum()
    }

    /// `sum_j coeffs[j] * p^j` for a series `p` without constant term.
    fn power_sum(p: &Self, coeffs: &[f64]) -> Self {
        let mut out = Self::zero(p.nvars, p.deg);
        let mut pj = Self::constant(p.nvars, p.deg, 1.0);
        for &c in coeffs {
            if c != 0.0 {
                out = &out + &pj.scale(c);
            }
            pj = &pj * p;
        }
        out
    }

    fn factorials(deg: usize) -> Vec<f64> {
        let mut f = vec![1.0; deg + 1];
        for j in 1..=deg {
            f[j] = f[j - 1] * j as f64;
        }
        f
    }

    pub fn sin(&self) -> Self {
        let c = self.const_term();
        let p = self.without_const();
        let fact = Self::factorials(self.deg);
        let sin_c: Vec<f64> = (0..=self.deg)
            .map(|j| if j % 2 == 1 { (-1f64).powi((j / 2) as i32) / fact[j] } else { 0.0 })
            .collect();
        let cos_c: Vec<f64> = (0..=self.deg)
            .map(|j| if j % 2 == 0 { (-1f64).powi((j / 2) as i32) / fact[j] } else { 0.0 })
            .collect();
        let sp = Self::power_sum(&p, &sin_c);
        let cp = Self::power_sum(&p, &cos_c);
        &sp.scale(c.cos()) + &cp.scale(c.sin())
    }

    pub fn cos(&self) -> Self {
        let c = self.const_term();
        let p = self.without_const();
        let fact = Self::factorials(self.deg);
        let sin_c: Vec<f64> = (0..=self.deg)
            .map(|j| if j % 2 == 1 { (-1f64).powi((j / 2) as i32) / fact[j] } else { 0.0 })
            .collect();
        let cos_c: Vec<f64> = (0..=self.deg)
            .map(|j| if j % 2 == 0 { (-1f64).powi((j / 2) as i32) / fact[j] } else { 0.0 })
            .collect();
        let sp = Self::power_sum(&p, &sin_c);
        let cp = Self::power_sum(&p, &cos_c);
        &cp.scale(c.cos()) - &sp.scale(c.sin())
    }

    /// `1 / self`; the constant term must be nonzero.
    pub fn recip(&self) -> Self {
        let c = self.const_term();
        assert!(c != 0.0, "series reciprocal needs a nonzero constant term");
        let p = self.without_const().scale(-1.0 / c);
        let coeffs = vec![1.0 / c; self.deg + 1];
        Self::power_sum(&p, &coeffs)
    }
}

impl Add for &Series {
    type Output = Series;
    fn add(self, o: &Series) -> Series {
        let mut s = self.clone();
        for (e, c) in &o.terms {
            *s.terms.entry(e.clone()).or_insert(0.0) += c;
        }
        s.terms.retain(|_, v| *v != 0.0);
        s
    }
}

impl Sub for &Series {
    type Output = Series;
    fn sub(self, o: &Series) -> Series {
        self + &o.scale(-1.0)
    }
}

impl Neg for &Series {
    type Output = Series;
    fn neg(self) -> Series {
        self.scale(-1.0)
    }
}

impl Mul for &Series {
    type Output = Series;
    fn mul(self, o: &Series) -> Series {
        let deg = self.deg.min(o.deg);
        let mut s = Series::zero(self.nvars, deg);
        for (ea, ca) in &self.terms {
            let da: u32 = ea.iter().sum();
            for (eb, cb) in &o.terms {
                let db: u32 = eb.iter().sum();
                if (da + db) as usize > deg {
                    continue;
                }
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                *s.terms.entry(e).or_insert(0.0) += ca * cb;
            }
        }
        s.terms.retain(|_, v| *v != 0.0);
        s
    }
}

/// Kronecker coefficients of a list of scalar series, one per output row.
/// Each monomial is spread evenly over its symmetric columns.
pub fn to_poly_field(rows: &[Series], nvars: usize, deg: usize) -> PolyVectorField {
    let mut p = PolyVectorField::zeros(rows.len(), nvars, deg);
    for (r, s) in rows.iter().enumerate() {
        for (e, &c) in &s.terms {
            let k: usize = e.iter().sum::<u32>() as usize;
            if k > deg {
                continue;
            }
            let mut idx = Vec::with_capacity(k);
            for (i, &mult) in e.iter().enumerate() {
                idx.extend(std::iter::repeat(i).take(mult as usize));
            }
            let col = flat_index(&idx, nvars);
            p.coeffs[k][(r, col)] += c;
        }
    }
    debug_assert!(p.coeffs.iter().enumerate().all(|(k, m)| m.ncols() == ipow(nvars, k)));
    p.symmetrized()
}

/// Column `l` of a state-dependent input matrix as a polynomial field.
pub fn column_field(col: &[Series], nvars: usize, deg: usize) -> PolyVectorField {
    to_poly_field(col, nvars, deg)
}

pub fn mat_to_series(m: &Mat, nvars: usize, deg: usize) -> Vec<Series> {
    (0..m.nrows())
        .map(|i| {
            let mut s = Series::zero(nvars, deg);
            for j in 0..m.ncols() {
                s = &s + &Series::var(nvars, deg, j).scale(m[(i, j)]);
            }
            s
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sin_cos_recip_pointwise() {
        let x = Series::var(2, 9, 0);
        let y = Series::var(2, 9, 1);
        let arg = &(&x + &y.scale(0.5)) + &Series::constant(2, 9, 0.3);
        let pt = [0.05, -0.08];
        let a = 0.3 + pt[0] + 0.5 * pt[1];
        assert!((arg.sin().eval(&pt) - a.sin()).abs() < 1e-13);
        assert!((arg.cos().eval(&pt) - a.cos()).abs() < 1e-13);
        let den = &Series::constant(2, 9, 2.0) + &x.cos();
        assert!((den.recip().eval(&pt) - 1.0 / (2.0 + pt[0].cos())).abs() < 1e-13);
    }

    #[test]
    fn poly_field_matches_series() {
        let x = Series::var(2, 3, 0);
        let y = Series::var(2, 3, 1);
        let s = &(&(&x * &y) * &y).scale(2.0) + &x.scale(-1.0);
        let p = to_poly_field(&[s.clone()], 2, 3);
        let pt = [0.7, -0.4];
        assert!((p.eval(&pt)[0] - s.eval(&pt)).abs() < 1e-14);
    }
}
