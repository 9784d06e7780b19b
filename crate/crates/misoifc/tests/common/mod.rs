//! Reference computations written independently of the library kernels.
#![allow(dead_code)]

use misoifc_core::numerics::{Complex64, ComplexVec, RngStream};

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// `Σ a_k b_k`, no conjugation.
pub fn dot(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).fold(c(0.0, 0.0), |acc, (x, y)| acc + x * y)
}

pub fn norm(v: &[C]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn gaussian_vec(rng: &mut RngStream, n: usize) -> Vec<C> {
    (0..n)
        .map(|_| c(rng.standard_normal(), rng.standard_normal()))
        .collect()
}

pub fn random_unit(rng: &mut RngStream, n: usize) -> Vec<C> {
    let v = gaussian_vec(rng, n);
    let s = norm(&v);
    v.into_iter().map(|x| x / s).collect()
}

/// Uniform-direction unit vector `w` with `g · w = 0`, built by
/// Gram–Schmidt against `conj(g)`.
pub fn random_null_unit(rng: &mut RngStream, g: &[C]) -> Vec<C> {
    let v = gaussian_vec(rng, g.len());
    let gc: Vec<C> = g.iter().map(|x| x.conj()).collect();
    let gg = norm(g).powi(2);
    let coeff = dot(g, &v) / gg;
    let w: Vec<C> = v.iter().zip(&gc).map(|(x, y)| x - coeff * y).collect();
    let s = norm(&w);
    w.into_iter().map(|x| x / s).collect()
}

/// Dense Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<C>>, mut b: Vec<C>) -> Vec<C> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| a[i][col].norm().total_cmp(&a[j][col].norm()))
            .unwrap();
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            for k in col..n {
                let t = a[col][k];
                a[row][k] -= f * t;
            }
            let t = b[col];
            b[row] -= f * t;
        }
    }
    let mut x = vec![c(0.0, 0.0); n];
    for row in (0..n).rev() {
        let mut s = b[row];
        for k in row + 1..n {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    x
}

/// `σ² I + gᴴ g` as a dense matrix; `(gᴴ g)_{ij} = conj(g_i) g_j`.
pub fn regularized_matrix(g: &[C], sigma2: f64) -> Vec<Vec<C>> {
    let n = g.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let d = if i == j { c(sigma2, 0.0) } else { c(0.0, 0.0) };
                    d + g[i].conj() * g[j]
                })
                .collect()
        })
        .collect()
}

/// `(r1, r2)` computed directly from the SINR definitions.
pub fn rates(h1: &[C], g1: &[C], h2: &[C], g2: &[C], w1: &[C], w2: &[C], sigma_n2: f64) -> (f64, f64) {
    let s1 = dot(h1, w1).norm_sqr() / (sigma_n2 + dot(g2, w2).norm_sqr());
    let s2 = dot(h2, w2).norm_sqr() / (sigma_n2 + dot(g1, w1).norm_sqr());
    ((1.0 + s1).log2(), (1.0 + s2).log2())
}

pub fn slice(v: &ComplexVec) -> Vec<C> {
    v.as_slice().to_vec()
}

/// Central difference of `f` at `x` along coordinate `k`.
pub fn central_difference(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64], k: usize, h: f64) -> f64 {
    let mut p = x.to_vec();
    p[k] = x[k] + h;
    let up = f(&p);
    p[k] = x[k] - h;
    let down = f(&p);
    (up - down) / (2.0 * h)
}

/// Worst relative discrepancy, with `floor` guarding near-zero entries.
pub fn max_relative_error(analytic: &[f64], numeric: &[f64], floor: f64) -> f64 {
    analytic
        .iter()
        .zip(numeric)
        .map(|(a, n)| (a - n).abs() / a.abs().max(n.abs()).max(floor))
        .fold(0.0, f64::max)
}
