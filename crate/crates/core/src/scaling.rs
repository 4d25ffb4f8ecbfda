//! Band-limited scaling functions and the coset-sum operator `Q_h`.
//!
//! The scaling function is given through its Fourier profile. In one dimension
//! the profile is the Meyer construction
//!
//! ```text
//! m(t) = 1                                   |t| <= 1 - s
//! m(t) = cos(π/2 · ν((|t| - (1 - s)) / (2s - 1)))   1 - s < |t| < s
//! m(t) = 0                                   |t| >= s
//! ```
//!
//! with `s` the support radius and `ν` a smoothstep polynomial satisfying
//! `ν(x) + ν(1 - x) = 1`. That identity turns `m(t)^2 + m(1 - t)^2` into
//! `cos^2 + sin^2`, which is the partition of unity behind the orthonormality of
//! the integer translates. In `d` dimensions the profile is the tensor product.

use crate::error::{invalid, Error, Result};
use crate::fourier::{digits, C64};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Meyer,
}

/// Smoothstep polynomial `ν_k(x) = x^k Σ_{j<k} C(k-1+j, j) (1-x)^j`, clamped to
/// `[0, 1]`. Degree 1 is the linear ramp, degree 4 the classical
/// `x^4 (35 - 84x + 70x^2 - 20x^3)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TransitionPolynomial {
    order: u32,
}

impl TransitionPolynomial {
    pub fn new(order: u32) -> Result<Self> {
        if !(1..=12).contains(&order) {
            return invalid(format!("nu_degree must be in 1..=12, got {order}"));
        }
        Ok(Self { order })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let k = self.order as u64;
        let y = 1.0 - x;
        let mut sum = 0.0;
        let mut binom = 1.0;
        let mut ypow = 1.0;
        for j in 0..k {
            sum += binom * ypow;
            // C(k+j, j+1) from C(k-1+j, j)
            binom = binom * (k + j) as f64 / (j + 1) as f64;
            ypow *= y;
        }
        x.powi(self.order as i32) * sum
    }
}

fn default_amplitude() -> f64 {
    1.0
}

fn is_unit(a: &f64) -> bool {
    *a == 1.0
}

/// A tensor-product Meyer scaling function described by its Fourier profile.
///
/// `amplitude` multiplies `φ̂` and exists so that deliberately broken profiles
/// can be fed to the orthonormality diagnostics; valid scaling functions keep it
/// at 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingFunction {
    pub profile: ProfileKind,
    pub support_radius: f64,
    pub nu_degree: u32,
    pub dimension: usize,
    #[serde(default = "default_amplitude", skip_serializing_if = "is_unit")]
    pub amplitude: f64,
}

impl ScalingFunction {
    /// Classical Meyer profile: support radius 2/3, quartic transition.
    pub fn meyer(dimension: usize) -> Self {
        Self {
            profile: ProfileKind::Meyer,
            support_radius: 2.0 / 3.0,
            nu_degree: 4,
            dimension,
            amplitude: 1.0,
        }
    }

    pub fn with_nu_degree(mut self, nu_degree: u32) -> Self {
        self.nu_degree = nu_degree;
        self
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        self.amplitude = amplitude;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.support_radius > 0.5 && self.support_radius < 1.0) {
            return invalid(format!(
                "support_radius must lie in (1/2, 1), got {}",
                self.support_radius
            ));
        }
        if self.dimension == 0 {
            return invalid("dimension must be positive");
        }
        if !(self.amplitude.is_finite() && self.amplitude > 0.0) {
            return invalid(format!("amplitude must be positive, got {}", self.amplitude));
        }
        TransitionPolynomial::new(self.nu_degree)?;
        Ok(())
    }

    pub fn transition(&self) -> TransitionPolynomial {
        TransitionPolynomial {
            order: self.nu_degree.clamp(1, 12),
        }
    }

    /// Radius of the flat region where `φ̂ = amplitude`.
    pub fn inner_radius(&self) -> f64 {
        1.0 - self.support_radius
    }

    /// One-dimensional profile `m(t)` (without the amplitude).
    pub fn profile_1d(&self, t: f64) -> f64 {
        let t = t.abs();
        let inner = self.inner_radius();
        if t <= inner {
            1.0
        } else if t >= self.support_radius {
            0.0
        } else {
            let x = (t - inner) / (self.support_radius - inner);
            (0.5 * PI * self.transition().eval(x)).cos()
        }
    }

    /// `φ̂(ξ)`; `xi` must have `dimension` components.
    pub fn phi_hat(&self, xi: &[f64]) -> f64 {
        debug_assert_eq!(xi.len(), self.dimension);
        let mut v = self.amplitude;
        for &x in xi {
            if v == 0.0 {
                break;
            }
            v *= self.profile_1d(x);
        }
        v
    }

    /// One-dimensional factor of `φ` in real space,
    /// `φ_1(y) = ∫ m(t) e^{2πi y t} dt = 2 ∫_0^s m(t) cos(2π y t) dt`.
    ///
    /// The flat part is integrated in closed form and the transition band by
    /// composite 16-point Gauss-Legendre with panels proportional to `|y|`.
    pub fn phi_1d(&self, y: f64) -> f64 {
        let inner = self.inner_radius();
        let flat = if y == 0.0 {
            2.0 * inner
        } else {
            (2.0 * PI * y * inner).sin() / (PI * y)
        };
        let width = self.support_radius - inner;
        let panels = ((y.abs() * width * 2.0).ceil() as usize).max(4);
        let (nodes, weights) = gauss_legendre_16();
        let step = width / panels as f64;
        let mut band = 0.0;
        for p in 0..panels {
            let a = inner + p as f64 * step;
            let mid = a + 0.5 * step;
            for (x, w) in nodes.iter().zip(weights.iter()) {
                let t = mid + 0.5 * step * x;
                band += w * 0.5 * step * self.profile_1d(t) * (2.0 * PI * y * t).cos();
            }
        }
        flat + 2.0 * band
    }

    /// `φ(x)` in real space (tensor product of [`Self::phi_1d`]).
    pub fn phi(&self, x: &[f64]) -> f64 {
        x.iter().fold(self.amplitude, |acc, &xi| acc * self.phi_1d(xi))
    }
}

fn gauss_legendre_16() -> (&'static [f64; 16], &'static [f64; 16]) {
    static NODES: std::sync::OnceLock<([f64; 16], [f64; 16])> = std::sync::OnceLock::new();
    let t = NODES.get_or_init(|| {
        let n = 16usize;
        let mut x = [0.0; 16];
        let mut w = [0.0; 16];
        for i in 0..n {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            x[i] = z;
            w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        }
        (x, w)
    });
    (&t.0, &t.1)
}

/// `φ̂(ξ)` for the Meyer-type scaling function `sf`.
pub fn meyer_phi_hat(xi: &[f64], sf: &ScalingFunction) -> f64 {
    sf.phi_hat(xi)
}

/// All shifts `n ∈ {-1, 0, 1}^d`, in row-major order with the central shift in
/// the middle.
pub fn unit_shifts(dimension: usize) -> Vec<Vec<i64>> {
    let count = 3usize.pow(dimension as u32);
    let mut idx = vec![0usize; dimension];
    (0..count)
        .map(|flat| {
            digits(flat, 3, &mut idx);
            idx.iter().map(|&i| i as i64 - 1).collect()
        })
        .collect()
}

/// Largest deviation of `Σ_n |φ̂(ξ + n)|^2` from 1 over a uniform grid of
/// `[0, 1)^d`. The sum runs over `n ∈ {-1, 0, 1}^d`, which is exact because
/// `φ̂` vanishes outside `(-1, 1)^d`.
pub fn partition_defect(sf: &ScalingFunction, grid_points_per_axis: usize) -> Result<f64> {
    if grid_points_per_axis < 2 {
        return invalid("grid_points_per_axis must be at least 2");
    }
    let d = sf.dimension;
    let shifts = unit_shifts(d);
    let total = grid_points_per_axis.pow(d as u32);
    let mut idx = vec![0usize; d];
    let mut xi = vec![0.0; d];
    let mut worst: f64 = 0.0;
    for flat in 0..total {
        digits(flat, grid_points_per_axis, &mut idx);
        let mut sum = 0.0;
        for n in &shifts {
            for a in 0..d {
                xi[a] = idx[a] as f64 / grid_points_per_axis as f64 + n[a] as f64;
            }
            let v = sf.phi_hat(&xi);
            sum += v * v;
        }
        worst = worst.max((sum - 1.0).abs());
    }
    Ok(worst)
}

/// Largest `|⟨φ, φ(· - n)⟩ - δ_{n,0}|` over `|n|_∞ <= n_max`.
///
/// The inner products are evaluated in frequency space as
/// `∫ e^{2πi n·ξ} |φ̂(ξ)|^2 dξ`, by the trapezoid rule on `[-1, 1)` per axis
/// (the integrand is compactly supported, so the rule is spectrally accurate),
/// and combined across axes by the tensor structure.
pub fn orthonormality_defect(
    sf: &ScalingFunction,
    n_max: usize,
    quadrature_points: usize,
) -> Result<f64> {
    if n_max < 1 {
        return invalid("n_max must be at least 1");
    }
    if quadrature_points < 256 || !quadrature_points.is_power_of_two() {
        return invalid(format!(
            "quadrature_points must be a power of two >= 256, got {quadrature_points}"
        ));
    }
    let per_axis = axis_inner_products(sf, n_max, quadrature_points);
    let d = sf.dimension;
    let width = 2 * n_max + 1;
    let total = width.pow(d as u32);
    let amp2 = sf.amplitude * sf.amplitude;
    let mut idx = vec![0usize; d];
    let mut worst: f64 = 0.0;
    for flat in 0..total {
        digits(flat, width, &mut idx);
        let mut value = C64::new(amp2, 0.0);
        let mut is_zero = true;
        for &i in &idx {
            value *= per_axis[i];
            is_zero &= i == n_max;
        }
        let target = if is_zero { 1.0 } else { 0.0 };
        worst = worst.max((value - target).norm());
    }
    Ok(worst)
}

/// `∫ e^{2πi n ξ} m(ξ)^2 dξ` for `n = -n_max..=n_max`.
fn axis_inner_products(sf: &ScalingFunction, n_max: usize, points: usize) -> Vec<C64> {
    let step = 2.0 / points as f64;
    let samples: Vec<(f64, f64)> = (0..points)
        .map(|i| {
            let xi = -1.0 + i as f64 * step;
            let m = sf.profile_1d(xi);
            (xi, m * m)
        })
        .collect();
    (-(n_max as i64)..=n_max as i64)
        .map(|n| {
            samples
                .iter()
                .map(|&(xi, w)| C64::from_polar(w * step, 2.0 * PI * n as f64 * xi))
                .sum()
        })
        .collect()
}

/// Samples of a function on the frequency grid `ξ = (start + i) · spacing`,
/// `i ∈ [0, len)^d`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencySamples {
    pub dimension: usize,
    pub spacing: f64,
    pub start: i64,
    pub len: usize,
    pub values: Vec<C64>,
}

impl FrequencySamples {
    pub fn zeros(dimension: usize, spacing: f64, start: i64, len: usize) -> Self {
        Self {
            dimension,
            spacing,
            start,
            len,
            values: vec![C64::new(0.0, 0.0); len.pow(dimension as u32)],
        }
    }

    pub fn from_fn(
        dimension: usize,
        spacing: f64,
        start: i64,
        len: usize,
        mut f: impl FnMut(&[f64]) -> C64,
    ) -> Self {
        let mut out = Self::zeros(dimension, spacing, start, len);
        let mut idx = vec![0usize; dimension];
        let mut xi = vec![0.0; dimension];
        for (flat, slot) in out.values.iter_mut().enumerate() {
            digits(flat, len, &mut idx);
            for a in 0..dimension {
                xi[a] = (start + idx[a] as i64) as f64 * spacing;
            }
            *slot = f(&xi);
        }
        out
    }

    /// Frequency of the sample at row-major position `flat`.
    pub fn point(&self, flat: usize) -> Vec<f64> {
        let mut idx = vec![0usize; self.dimension];
        digits(flat, self.len, &mut idx);
        idx.iter()
            .map(|&i| (self.start + i as i64) as f64 * self.spacing)
            .collect()
    }

    fn end(&self) -> i64 {
        self.start + self.len as i64
    }

    fn position(&self, index: &[i64]) -> usize {
        index
            .iter()
            .fold(0usize, |acc, &i| acc * self.len + (i - self.start) as usize)
    }

    /// Squared `L^2` norm with the cell-volume weight `spacing^d`.
    pub fn norm_sqr(&self) -> f64 {
        self.spacing.powi(self.dimension as i32) * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    /// `⟨self, other⟩ = spacing^d Σ self · conj(other)`.
    pub fn inner(&self, other: &Self) -> C64 {
        let w = self.spacing.powi(self.dimension as i32);
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum::<C64>()
            * w
    }
}

/// Number of frequency cells per period `h^{-1}`, i.e. `N` with `N · spacing = 1/h`.
fn cells_per_period(spacing: f64, h: f64) -> Result<usize> {
    if !(h > 0.0 && spacing > 0.0) {
        return invalid("mesh and spacing must be positive");
    }
    let ratio = 1.0 / (h * spacing);
    let n = ratio.round();
    if n < 2.0 || (ratio - n).abs() > 1e-9 * ratio || !(n as usize).is_multiple_of(2) {
        return invalid(format!(
            "1/(h·spacing) = {ratio} must be an even integer for the quasi-momentum cell"
        ));
    }
    Ok(n as usize)
}

/// `Q_h f(ζ) = Σ_{n ∈ {-1,0,1}^d} conj(φ̂(hζ + n)) f(ζ + n/h)` on the cell
/// `h^{-1}[-1/2, 1/2)^d`.
///
/// `f` must be sampled on a grid whose spacing divides `1/h` and which covers
/// `h^{-1}[-3/2, 3/2)^d`. The result has the same spacing, `start = -N/2` and
/// `len = N` with `N = 1/(h · spacing)`.
pub fn q_apply(f: &FrequencySamples, sf: &ScalingFunction, h: f64) -> Result<FrequencySamples> {
    if f.dimension != sf.dimension {
        return invalid("dimension mismatch between samples and scaling function");
    }
    let n = cells_per_period(f.spacing, h)?;
    let half = (n / 2) as i64;
    let (lo, hi) = (-3 * half, 3 * half);
    if f.start > lo || f.end() < hi {
        return Err(Error::GridCoverage {
            needed_lo: lo,
            needed_hi: hi,
            have_lo: f.start,
            have_hi: f.end(),
        });
    }
    let d = f.dimension;
    let shifts = unit_shifts(d);
    let mut out = FrequencySamples::zeros(d, f.spacing, -half, n);
    let mut idx = vec![0usize; d];
    let mut src = vec![0i64; d];
    let mut arg = vec![0.0; d];
    for (flat, slot) in out.values.iter_mut().enumerate() {
        digits(flat, n, &mut idx);
        let mut acc = C64::new(0.0, 0.0);
        for shift in &shifts {
            for a in 0..d {
                let m = idx[a] as i64 - half;
                src[a] = m + shift[a] * n as i64;
                arg[a] = m as f64 / n as f64 + shift[a] as f64;
            }
            let weight = sf.phi_hat(&arg);
            if weight != 0.0 {
                acc += f.values[f.position(&src)] * weight;
            }
        }
        *slot = acc;
    }
    Ok(out)
}

/// `Q_h^* g(ξ) = φ̂(hξ) g̃(ξ)` with `g̃` the `h^{-1}`-periodic extension of `g`,
/// sampled on `ξ = (start + i) · spacing`, `i ∈ [0, len)^d`.
pub fn q_star_apply(
    g: &FrequencySamples,
    sf: &ScalingFunction,
    h: f64,
    start: i64,
    len: usize,
) -> Result<FrequencySamples> {
    if g.dimension != sf.dimension {
        return invalid("dimension mismatch between samples and scaling function");
    }
    let n = cells_per_period(g.spacing, h)?;
    let half = (n / 2) as i64;
    if g.start != -half || g.len != n {
        return invalid("g must be sampled on the full quasi-momentum cell");
    }
    let d = g.dimension;
    let mut out = FrequencySamples::zeros(d, g.spacing, start, len);
    let mut idx = vec![0usize; d];
    let mut cell = vec![0i64; d];
    let mut arg = vec![0.0; d];
    for (flat, slot) in out.values.iter_mut().enumerate() {
        digits(flat, len, &mut idx);
        for a in 0..d {
            let k = start + idx[a] as i64;
            cell[a] = (k + half).rem_euclid(n as i64) - half;
            arg[a] = k as f64 / n as f64;
        }
        let weight = sf.phi_hat(&arg);
        if weight != 0.0 {
            *slot = g.values[g.position(&cell)] * weight;
        }
    }
    Ok(out)
}
