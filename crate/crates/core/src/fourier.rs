//! Discrete Fourier transforms on periodic boxes, in the centered-mode convention
//! used throughout the crate.
//!
//! A box of `n` points per axis with mesh `h` has sites `x_j = (j - n/2) h` and
//! extent `L = n h`. Grid values are expanded as `u(x) = Σ_k c_k e^{2πi k·x/L}`
//! over modes `k ∈ [-n/2, n/2)^d`, stored row-major at position `k + n/2`.

use num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use std::cell::RefCell;
use std::sync::Arc;

pub type C64 = Complex<f64>;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Row-major multi-index of `flat` in an `n^d` array.
pub(crate) fn digits(mut flat: usize, n: usize, out: &mut [usize]) {
    for slot in out.iter_mut().rev() {
        *slot = flat % n;
        flat /= n;
    }
}

pub(crate) fn flatten(idx: &[usize], n: usize) -> usize {
    idx.iter().fold(0, |acc, &i| acc * n + i)
}

/// Unnormalized d-dimensional DFT, in place, along every axis.
pub fn fft_nd(data: &mut [C64], n: usize, d: usize, inverse: bool) {
    debug_assert_eq!(data.len(), n.pow(d as u32));
    let fft = plan(n, inverse);
    if d == 1 {
        fft.process(data);
        return;
    }
    let mut line = vec![C64::new(0.0, 0.0); n];
    let total = data.len();
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        let block = stride * n;
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (t, slot) in line.iter_mut().enumerate() {
                    *slot = data[base + t * stride];
                }
                fft.process(&mut line);
                for (t, v) in line.iter().enumerate() {
                    data[base + t * stride] = *v;
                }
            }
        }
    }
}

/// Position in FFT ordering and sign `(-1)^k` for each centered position `j`.
fn centered_tables(n: usize) -> (Vec<usize>, Vec<f64>) {
    let half = n / 2;
    let index = (0..n).map(|j| (j + half) % n).collect();
    let sign = (0..n)
        .map(|j| if (j + half).is_multiple_of(2) { 1.0 } else { -1.0 })
        .collect();
    (index, sign)
}

/// Grid values to centered Fourier coefficients.
pub fn to_modes(values: &[C64], n: usize, d: usize) -> Vec<C64> {
    let mut work = values.to_vec();
    fft_nd(&mut work, n, d, false);
    let (index, sign) = centered_tables(n);
    let scale = 1.0 / (values.len() as f64);
    let mut out = vec![C64::new(0.0, 0.0); values.len()];
    if d == 1 {
        for j in 0..n {
            out[j] = work[index[j]] * (sign[j] * scale);
        }
        return out;
    }
    let mut dj = vec![0usize; d];
    let mut fi = vec![0usize; d];
    for (flat, slot) in out.iter_mut().enumerate() {
        digits(flat, n, &mut dj);
        let mut s = scale;
        for a in 0..d {
            fi[a] = index[dj[a]];
            s *= sign[dj[a]];
        }
        *slot = work[flatten(&fi, n)] * s;
    }
    out
}

/// Centered Fourier coefficients to grid values.
pub fn from_modes(coeffs: &[C64], n: usize, d: usize) -> Vec<C64> {
    let (index, sign) = centered_tables(n);
    let mut work = vec![C64::new(0.0, 0.0); coeffs.len()];
    if d == 1 {
        for j in 0..n {
            work[index[j]] = coeffs[j] * sign[j];
        }
    } else {
        let mut dj = vec![0usize; d];
        let mut fi = vec![0usize; d];
        for (flat, c) in coeffs.iter().enumerate() {
            digits(flat, n, &mut dj);
            let mut s = 1.0;
            for a in 0..d {
                fi[a] = index[dj[a]];
                s *= sign[dj[a]];
            }
            work[flatten(&fi, n)] = c * s;
        }
    }
    fft_nd(&mut work, n, d, true);
    work
}

/// Centered mode number of position `j` on an axis of `n` points.
pub fn mode_number(j: usize, n: usize) -> i64 {
    j as i64 - (n / 2) as i64
}
