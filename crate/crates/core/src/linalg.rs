//! Small dense-vector helpers shared by the solvers and estimators.

use crate::fourier::{fft_nd, C64};

/// `Σ conj(a_i) b_i`.
pub(crate) fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// `y += alpha * x`.
pub(crate) fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub(crate) fn scale(alpha: C64, x: &mut [C64]) {
    for xi in x.iter_mut() {
        *xi *= alpha;
    }
}

/// Orthogonalizes `v` against the orthonormal `basis` twice, returning the
/// remaining norm. `v` is normalized when the norm is nonzero.
pub(crate) fn orthonormalize(basis: &[Vec<C64>], v: &mut [C64]) -> f64 {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, v);
            axpy(-c, q, v);
        }
    }
    let r = norm(v);
    if r > 0.0 {
        scale(C64::new(1.0 / r, 0.0), v);
    }
    r
}

/// Per-axis table of a separable Fourier multiplier in FFT storage order:
/// entry `q` holds `f(k)` with `k = q` for `q < n/2` and `k = q - n` otherwise.
pub(crate) fn axis_table(n: usize, f: impl Fn(i64) -> f64) -> Vec<f64> {
    (0..n)
        .map(|q| {
            let k = if q < n / 2 { q as i64 } else { q as i64 - n as i64 };
            f(k)
        })
        .collect()
}

/// Applies the Fourier multiplier `g(Σ_a table[k_a])` to grid values in place.
pub(crate) fn fourier_diagonal(data: &mut [C64], n: usize, d: usize, table: &[f64], g: impl Fn(f64) -> C64) {
    fft_nd(data, n, d, false);
    let inv = 1.0 / data.len() as f64;
    if d == 1 {
        for (x, &e) in data.iter_mut().zip(table) {
            *x *= g(e) * inv;
        }
    } else {
        let mut idx = vec![0usize; d];
        for (flat, x) in data.iter_mut().enumerate() {
            crate::fourier::digits(flat, n, &mut idx);
            let e: f64 = idx.iter().map(|&q| table[q]).sum();
            *x *= g(e) * inv;
        }
    }
    fft_nd(data, n, d, true);
}
