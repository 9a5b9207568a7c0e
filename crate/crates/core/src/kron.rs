//! Kronecker-polynomial algebra.
//!
//! A polynomial map `p: R^b -> R^rows` is stored as coefficient matrices
//! `W_k` of shape `rows x b^k` acting on `x^{⊗k}`. Columns follow the
//! lexicographic Kronecker order, leftmost factor most significant. Flat
//! tensors are row-major with the same convention.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

pub type Mat = DMatrix<f64>;

/// Polynomial map given by its Kronecker coefficients, degrees `0..=degree`.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyVectorField {
    pub rows: usize,
    pub nvars: usize,
    pub coeffs: Vec<Mat>,
}

pub fn ipow(b: usize, k: usize) -> usize {
    b.checked_pow(k as u32).expect("dimension overflow")
}

/// `x^{⊗k}`; `k = 0` gives `[1]`.
pub fn kron_power(x: &[f64], k: usize) -> Vec<f64> {
    let mut out = vec![1.0];
    for _ in 0..k {
        out = kron_vec(&out, x);
    }
    out
}

pub fn kron_vec(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for &ai in a {
        out.extend(b.iter().map(|&bj| ai * bj));
    }
    out
}

/// Digits of a flat index in base `b`, most significant first.
pub fn digits(mut idx: usize, b: usize, k: usize, out: &mut [usize]) {
    for slot in (0..k).rev() {
        out[slot] = idx % b;
        idx /= b;
    }
}

pub fn flat_index(d: &[usize], b: usize) -> usize {
    d.iter().fold(0, |acc, &x| acc * b + x)
}

/// Average a flat `k`-tensor over all permutations of its modes.
pub fn symmetrize_vec(v: &[f64], b: usize, k: usize) -> Vec<f64> {
    assert_eq!(v.len(), ipow(b, k));
    if k <= 1 {
        return v.to_vec();
    }
    let canon = canonical_indices(b, k);
    let mut sum = vec![0.0; v.len()];
    let mut cnt = vec![0u32; v.len()];
    for (i, &c) in canon.iter().enumerate() {
        sum[c] += v[i];
        cnt[c] += 1;
    }
    canon.iter().map(|&c| sum[c] / cnt[c] as f64).collect()
}

/// For every flat index, the flat index of its sorted multi-index.
pub fn canonical_indices(b: usize, k: usize) -> Vec<usize> {
    let len = ipow(b, k);
    let mut d = vec![0; k];
    (0..len)
        .map(|i| {
            digits(i, b, k, &mut d);
            d.sort_unstable();
            flat_index(&d, b)
        })
        .collect()
}

/// `result[.., c, ..] = sum_a t[.., a, ..] * m[a, c]` along one mode of a
/// row-major tensor with extents `dims`.
pub fn contract_mode(t: &[f64], dims: &[usize], mode: usize, m: &Mat) -> Vec<f64> {
    let pre: usize = dims[..mode].iter().product();
    let d = dims[mode];
    let post: usize = dims[mode + 1..].iter().product();
    assert_eq!(m.nrows(), d);
    let c = m.ncols();
    let mut out = vec![0.0; pre * c * post];
    for p in 0..pre {
        for a in 0..d {
            let src = &t[(p * d + a) * post..(p * d + a + 1) * post];
            if src.iter().all(|&v| v == 0.0) {
                continue;
            }
            for j in 0..c {
                let w = m[(a, j)];
                if w == 0.0 {
                    continue;
                }
                let dst = &mut out[(p * c + j) * post..(p * c + j + 1) * post];
                for (o, s) in dst.iter_mut().zip(src) {
                    *o += w * s;
                }
            }
        }
    }
    out
}

/// `v^T (F_1 ⊗ ... ⊗ F_j)` for a flat vector `v` of length `prod rows(F_l)`.
pub fn rowvec_times_kron(v: &[f64], factors: &[&Mat]) -> Vec<f64> {
    let mut dims: Vec<usize> = factors.iter().map(|f| f.nrows()).collect();
    assert_eq!(v.len(), dims.iter().product::<usize>());
    let mut t = v.to_vec();
    for (mode, f) in factors.iter().enumerate() {
        t = contract_mode(&t, &dims, mode, f);
        dims[mode] = f.ncols();
    }
    t
}

fn rows_of(w: &Mat) -> Vec<Vec<f64>> {
    (0..w.nrows())
        .map(|i| w.row(i).iter().copied().collect())
        .collect()
}

fn from_rows(rows: Vec<Vec<f64>>, ncols: usize) -> Mat {
    let nrows = rows.len();
    Mat::from_fn(nrows, ncols, |i, j| rows[i][j])
}

/// `W (F_1 ⊗ ... ⊗ F_j)` computed row by row without forming the product.
pub fn mat_times_kron(w: &Mat, factors: &[&Mat]) -> Mat {
    let ncols: usize = factors.iter().map(|f| f.ncols()).product();
    let rows: Vec<Vec<f64>> = rows_of(w)
        .into_par_iter()
        .map(|r| {
            if r.iter().all(|&x| x == 0.0) {
                vec![0.0; ncols]
            } else {
                rowvec_times_kron(&r, factors)
            }
        })
        .collect();
    from_rows(rows, ncols)
}

/// `W L_i(F)` where `L_i(F) = sum_s I ⊗ .. ⊗ F ⊗ .. ⊗ I` with `F` in slot `s`.
pub fn mat_times_lyap(w: &Mat, f: &Mat, i: usize) -> Mat {
    let n = f.nrows();
    assert_eq!(w.ncols(), ipow(n, i));
    let ncols = ipow(n, i - 1) * f.ncols();
    let dims = vec![n; i];
    let rows: Vec<Vec<f64>> = rows_of(w)
        .into_par_iter()
        .map(|r| {
            let mut acc = vec![0.0; ncols];
            if r.iter().all(|&x| x == 0.0) {
                return acc;
            }
            for s in 0..i {
                let part = contract_mode(&r, &dims, s, f);
                for (a, p) in acc.iter_mut().zip(part) {
                    *a += p;
                }
            }
            acc
        })
        .collect();
    from_rows(rows, ncols)
}

/// Materialized k-way Lyapunov operator, shape `p^k x p^{k-1} q`.
pub fn lyap_k(a: &Mat, k: usize) -> Mat {
    let (p, q) = a.shape();
    let mut out = Mat::zeros(ipow(p, k), ipow(p, k - 1) * q);
    for s in 0..k {
        let left = Mat::identity(ipow(p, s), ipow(p, s));
        let right = Mat::identity(ipow(p, k - 1 - s), ipow(p, k - 1 - s));
        out += left.kronecker(a).kronecker(&right);
    }
    out
}

/// Compositions of `q` into `p` positive parts, each at most `maxpart`.
pub fn compositions(p: usize, q: usize, maxpart: usize) -> Vec<Vec<usize>> {
    fn rec(p: usize, q: usize, maxpart: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if p == 0 {
            if q == 0 {
                out.push(cur.clone());
            }
            return;
        }
        if q < p {
            return;
        }
        for first in 1..=maxpart.min(q - (p - 1)) {
            cur.push(first);
            rec(p - 1, q - first, maxpart, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(p, q, maxpart, &mut Vec::new(), &mut out);
    out
}

impl PolyVectorField {
    pub fn zeros(rows: usize, nvars: usize, degree: usize) -> Self {
        let coeffs = (0..=degree)
            .map(|k| Mat::zeros(rows, ipow(nvars, k)))
            .collect();
        PolyVectorField { rows, nvars, coeffs }
    }

    /// Linear map `x -> A x`.
    pub fn linear(a: &Mat) -> Self {
        let mut p = Self::zeros(a.nrows(), a.ncols(), 1);
        p.coeffs[1] = a.clone();
        p
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> Option<&Mat> {
        self.coeffs.get(k)
    }

    /// Coefficient of degree `k`, or a zero block if absent.
    pub fn coeff_or_zero(&self, k: usize) -> Mat {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| Mat::zeros(self.rows, ipow(self.nvars, k)))
    }

    pub fn is_zero_block(&self, k: usize) -> bool {
        self.coeffs.get(k).map_or(true, |m| m.iter().all(|&x| x == 0.0))
    }

    pub fn with_degree(&self, d: usize) -> Self {
        let mut out = Self::zeros(self.rows, self.nvars, d);
        for k in 0..=d.min(self.degree()) {
            out.coeffs[k] = self.coeffs[k].clone();
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> DVector<f64> {
        assert_eq!(x.len(), self.nvars);
        let mut y = DVector::zeros(self.rows);
        let mut xk = vec![1.0];
        for (k, w) in self.coeffs.iter().enumerate() {
            if k > 0 {
                xk = kron_vec(&xk, x);
            }
            if w.iter().all(|&v| v == 0.0) {
                continue;
            }
            y += w * DVector::from_column_slice(&xk);
        }
        y
    }

    /// Exact Jacobian, summing over every slot; symmetry is not required.
    pub fn jacobian(&self, x: &[f64]) -> Mat {
        let b = self.nvars;
        let mut j = Mat::zeros(self.rows, b);
        let xm = Mat::from_column_slice(b, 1, x);
        let eye = Mat::identity(b, b);
        for (k, w) in self.coeffs.iter().enumerate().skip(1) {
            if w.iter().all(|&v| v == 0.0) {
                continue;
            }
            let factors: Vec<&Mat> = (0..k).map(|_| &xm).collect();
            for s in 0..k {
                let mut f = factors.clone();
                f[s] = &eye;
                j += mat_times_kron(w, &f);
            }
        }
        j
    }

    pub fn symmetrized(&self) -> Self {
        let mut out = self.clone();
        for (k, w) in out.coeffs.iter_mut().enumerate().skip(2) {
            let canon = canonical_indices(self.nvars, k);
            let mut counts = vec![0u32; w.ncols()];
            for &c in &canon {
                counts[c] += 1;
            }
            let mut acc = Mat::zeros(w.nrows(), w.ncols());
            for (col, &c) in canon.iter().enumerate() {
                let src = w.column(col).clone_owned();
                let mut dst = acc.column_mut(c);
                dst += src;
            }
            for (col, &c) in canon.iter().enumerate() {
                let v = acc.column(c) / counts[c] as f64;
                w.set_column(col, &v);
            }
        }
        out
    }

    /// Largest absolute coefficient over degrees `k0..`.
    pub fn max_abs_from(&self, k0: usize) -> f64 {
        self.coeffs
            .iter()
            .skip(k0)
            .flat_map(|m| m.iter())
            .fold(0.0f64, |a, &b| a.max(b.abs()))
    }

    /// Keep the columns whose indices are all below `r`, re-indexed in base `r`.
    pub fn truncate_columns(&self, r: usize) -> Self {
        assert!(r <= self.nvars);
        let b = self.nvars;
        let mut out = Self::zeros(self.rows, r, self.degree());
        let mut d = vec![0; self.degree().max(1)];
        for (k, w) in self.coeffs.iter().enumerate() {
            for col in 0..ipow(r, k) {
                digits(col, r, k, &mut d[..k]);
                let src = flat_index(&d[..k], b);
                out.coeffs[k].set_column(col, &w.column(src));
            }
        }
        out
    }

    pub fn select_rows(&self, rows: usize) -> Self {
        let coeffs = self.coeffs.iter().map(|w| w.rows(0, rows).into_owned()).collect();
        PolyVectorField { rows, nvars: self.nvars, coeffs }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        assert_eq!(self.nvars, other.nvars);
        let d = self.degree().max(other.degree());
        let mut out = self.with_degree(d);
        for k in 0..=other.degree() {
            out.coeffs[k] += &other.coeffs[k];
        }
        out
    }
}

/// Materialized tensor sum `sum_{i_1+..+i_p = q} T_{i_1} ⊗ .. ⊗ T_{i_p}`.
pub fn tensor_sum(t: &PolyVectorField, p: usize, q: usize) -> Mat {
    let n = t.rows;
    let mut out = Mat::zeros(ipow(n, p), ipow(t.nvars, q));
    for comp in compositions(p, q, t.degree()) {
        let mut acc = Mat::from_element(1, 1, 1.0);
        for &c in &comp {
            acc = acc.kronecker(&t.coeffs[c]);
        }
        out += acc;
    }
    out
}

/// `P∘T` truncated to degree `d_out`; `T` must have no constant term.
pub fn compose(p: &PolyVectorField, t: &PolyVectorField, d_out: usize) -> PolyVectorField {
    assert_eq!(p.nvars, t.rows);
    let mut out = PolyVectorField::zeros(p.rows, t.nvars, d_out);
    out.coeffs[0] = p.coeffs[0].clone();
    for i in 1..=d_out {
        for j in 1..=i.min(p.degree()) {
            if p.is_zero_block(j) {
                continue;
            }
            for comp in compositions(j, i, t.degree()) {
                if comp.iter().any(|&c| t.is_zero_block(c)) {
                    continue;
                }
                let factors: Vec<&Mat> = comp.iter().map(|&c| &t.coeffs[c]).collect();
                out.coeffs[i] += mat_times_kron(&p.coeffs[j], &factors);
            }
        }
    }
    out
}

/// Degree-`q` coefficient of the scalar polynomial `½ sum_i v_i^T T(z)^{⊗i}`.
pub fn energy_compose_degree(v: &[Vec<f64>], t: &PolyVectorField, q: usize) -> Vec<f64> {
    let mut out = vec![0.0; ipow(t.nvars, q)];
    for (i, vi) in v.iter().enumerate() {
        if i == 0 || i > q || vi.is_empty() || vi.iter().all(|&x| x == 0.0) {
            continue;
        }
        for comp in compositions(i, q, t.degree()) {
            if comp.iter().any(|&c| t.is_zero_block(c)) {
                continue;
            }
            let factors: Vec<&Mat> = comp.iter().map(|&c| &t.coeffs[c]).collect();
            let part = rowvec_times_kron(vi, &factors);
            for (o, x) in out.iter_mut().zip(part) {
                *o += 0.5 * x;
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_kron_power(x: &[f64], k: usize) -> Vec<f64> {
        let n = x.len();
        (0..ipow(n, k))
            .map(|idx| {
                let mut d = vec![0; k];
                digits(idx, n, k, &mut d);
                d.iter().map(|&i| x[i]).product()
            })
            .collect()
    }

    #[test]
    fn kron_power_matches_nested_loops() {
        let x = [0.3, -1.2, 2.0];
        for k in 0..4 {
            assert_eq!(kron_power(&x, k).len(), ipow(3, k));
            for (a, b) in kron_power(&x, k).iter().zip(naive_kron_power(&x, k)) {
                assert!((a - b).abs() < 1e-14);
            }
        }
        assert_eq!(kron_power(&x, 0), vec![1.0]);
    }

    #[test]
    fn lyap_k_two_is_kronecker_sum() {
        let a = Mat::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]);
        let i = Mat::identity(2, 2);
        let expect = a.kronecker(&i) + i.kronecker(&a);
        assert_eq!(lyap_k(&a, 2), expect);
    }

    #[test]
    fn lyap_k_shape_rectangular() {
        let a = Mat::from_element(3, 5, 1.0);
        let l = lyap_k(&a, 3);
        assert_eq!(l.shape(), (27, 9 * 5));
    }

    #[test]
    fn mat_times_lyap_matches_materialized() {
        let f = Mat::from_fn(2, 4, |i, j| (i as f64 + 1.0) * 0.3 - j as f64 * 0.7);
        let w = Mat::from_fn(3, 8, |i, j| ((i * 8 + j) as f64).sin());
        let fast = mat_times_lyap(&w, &f, 3);
        let slow = &w * lyap_k(&f, 3);
        assert!((fast - slow).abs().max() < 1e-12);
    }

    #[test]
    fn mat_times_kron_matches_materialized() {
        let a = Mat::from_fn(2, 3, |i, j| i as f64 - 0.5 * j as f64 + 0.1);
        let b = Mat::from_fn(2, 2, |i, j| (i + 2 * j) as f64 * 0.25 - 1.0);
        let w = Mat::from_fn(2, 4, |i, j| (i as f64 + 1.0) * (j as f64 - 1.5));
        let fast = mat_times_kron(&w, &[&a, &b]);
        let slow = &w * a.kronecker(&b);
        assert!((fast - slow).abs().max() < 1e-12);
    }

    #[test]
    fn compositions_count() {
        assert_eq!(compositions(2, 4, 10).len(), 3);
        assert_eq!(compositions(3, 3, 10), vec![vec![1, 1, 1]]);
        assert_eq!(compositions(2, 4, 2), vec![vec![2, 2]]);
        assert!(compositions(3, 2, 5).is_empty());
    }

    #[test]
    fn symmetrize_preserves_polynomial() {
        let n = 3;
        let v: Vec<f64> = (0..27).map(|i| (i as f64 * 0.37).cos()).collect();
        let s = symmetrize_vec(&v, n, 3);
        let x = [0.2, -0.7, 1.1];
        let xk = kron_power(&x, 3);
        let dot = |a: &[f64]| a.iter().zip(&xk).map(|(p, q)| p * q).sum::<f64>();
        assert!((dot(&v) - dot(&s)).abs() < 1e-12);
        assert!((s[flat_index(&[0, 1, 2], 3)] - s[flat_index(&[2, 1, 0], 3)]).abs() < 1e-15);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let mut p = PolyVectorField::zeros(2, 2, 3);
        for k in 0..=3 {
            p.coeffs[k] = Mat::from_fn(2, ipow(2, k), |i, j| ((i + 3 * j + k) as f64).sin());
        }
        let x = [0.4, -0.3];
        let j = p.jacobian(&x);
        let h = 1e-6;
        for c in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[c] += h;
            xm[c] -= h;
            let fd = (p.eval(&xp) - p.eval(&xm)) / (2.0 * h);
            for r in 0..2 {
                assert!((fd[r] - j[(r, c)]).abs() < 1e-8);
            }
        }
        let js = p.symmetrized().jacobian(&x);
        assert!((j - js).abs().max() < 1e-12);
    }

    #[test]
    fn compose_matches_pointwise_for_exact_degree() {
        // P quadratic, T linear: the composition is exactly quadratic.
        let mut p = PolyVectorField::zeros(1, 2, 2);
        p.coeffs[1] = Mat::from_row_slice(1, 2, &[1.0, -2.0]);
        p.coeffs[2] = Mat::from_row_slice(1, 4, &[0.5, 0.1, 0.2, -1.0]);
        let t = PolyVectorField::linear(&Mat::from_row_slice(2, 2, &[0.3, 1.0, -0.4, 2.0]));
        let c = compose(&p, &t, 2);
        let z = [0.7, -0.2];
        let direct = p.eval(t.eval(&z).as_slice());
        assert!((c.eval(&z) - direct).abs().max() < 1e-13);
    }

    #[test]
    fn tensor_sum_and_compose_agree() {
        let mut t = PolyVectorField::zeros(2, 2, 2);
        t.coeffs[1] = Mat::from_row_slice(2, 2, &[1.0, 0.5, -0.2, 0.8]);
        t.coeffs[2] = Mat::from_fn(2, 4, |i, j| 0.1 * (i as f64 - j as f64));
        let mut p = PolyVectorField::zeros(1, 2, 2);
        p.coeffs[2] = Mat::from_row_slice(1, 4, &[1.0, 2.0, 3.0, 4.0]);
        let c = compose(&p, &t, 4);
        for q in 2..=4 {
            let slow = &p.coeffs[2] * tensor_sum(&t, 2, q);
            assert!((&c.coeffs[q] - slow).abs().max() < 1e-13);
        }
    }

    #[test]
    fn truncate_columns_reindexes() {
        let mut p = PolyVectorField::zeros(1, 3, 2);
        p.coeffs[2] = Mat::from_fn(1, 9, |_, j| j as f64);
        let t = p.truncate_columns(2);
        // columns (0,0),(0,1),(1,0),(1,1) -> base-3 indices 0,1,3,4
        assert_eq!(t.coeffs[2].iter().copied().collect::<Vec<_>>(), vec![0.0, 1.0, 3.0, 4.0]);
    }
}
