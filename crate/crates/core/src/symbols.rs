//! Fourier symbols of the continuum and lattice Laplacians, and exact norms of
//! fibered operators.
//!
//! After conjugation by the Fourier transforms, `(1 - P_h^* P_h)(H_0 - μ)^{-1}`
//! and `P_h^*(H_{0,h} - μ)^{-1} P_h - P_h^* P_h (H_0 - μ)^{-1}` act independently
//! on every coset `{ζ + n/h : n ∈ Z^d}`. Only the shifts `n ∈ {-1, 0, 1}^d` meet
//! the support of `φ̂(h·)`, so each fiber is a `3^d × 3^d` matrix and the
//! operator norm is the supremum over `ζ` of the fiber spectral norms.

use crate::error::{invalid, Result};
use crate::fourier::{digits, C64};
use crate::scaling::{unit_shifts, ScalingFunction};
use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Spectral parameter `μ` of a resolvent, restricted to `C \ [0, ∞)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct ResolventProbe {
    mu: C64,
}

impl ResolventProbe {
    pub fn new(mu: C64) -> Result<Self> {
        if !(mu.re.is_finite() && mu.im.is_finite()) {
            return invalid("mu must be finite");
        }
        if mu.im == 0.0 && mu.re >= 0.0 {
            return invalid(format!("mu = {mu} lies on the non-negative real axis"));
        }
        Ok(Self { mu })
    }

    pub fn real(re: f64) -> Result<Self> {
        Self::new(C64::new(re, 0.0))
    }

    pub fn mu(&self) -> C64 {
        self.mu
    }

    pub fn is_real(&self) -> bool {
        self.mu.im == 0.0
    }
}

impl Default for ResolventProbe {
    fn default() -> Self {
        Self {
            mu: C64::new(-1.0, 0.0),
        }
    }
}

impl TryFrom<[f64; 2]> for ResolventProbe {
    type Error = crate::Error;
    fn try_from(v: [f64; 2]) -> Result<Self> {
        Self::new(C64::new(v[0], v[1]))
    }
}

impl From<ResolventProbe> for [f64; 2] {
    fn from(p: ResolventProbe) -> Self {
        [p.mu.re, p.mu.im]
    }
}

/// `H_0(ξ) = |2πξ|^2`.
pub fn h0_symbol(xi: &[f64]) -> f64 {
    xi.iter().map(|x| (2.0 * PI * x).powi(2)).sum()
}

/// `H_{0,h}(ζ) = 2 h^{-2} Σ_j (1 - cos(2π h ζ_j))`.
pub fn h0h_symbol(zeta: &[f64], h: f64) -> Result<f64> {
    if !(h > 0.0) {
        return invalid(format!("mesh must be positive, got {h}"));
    }
    Ok(h0h_unchecked(zeta, h))
}

pub(crate) fn h0h_unchecked(zeta: &[f64], h: f64) -> f64 {
    let s: f64 = zeta.iter().map(|z| 1.0 - (2.0 * PI * h * z).cos()).sum();
    2.0 * s / (h * h)
}

/// `sup |H_{0,h}(ξ) - H_0(ξ)| / (h^2 |ξ|^4)` over a grid of nonzero frequencies.
pub fn taylor_gap_ratio(h: f64, xi_grid: &[Vec<f64>]) -> Result<f64> {
    if xi_grid.is_empty() {
        return invalid("empty frequency grid");
    }
    let mut worst: f64 = 0.0;
    for xi in xi_grid {
        let r2: f64 = xi.iter().map(|x| x * x).sum();
        if r2 == 0.0 {
            return invalid("grid must exclude ξ = 0");
        }
        let gap = (h0h_symbol(xi, h)? - h0_symbol(xi)).abs();
        worst = worst.max(gap / (h * h * r2 * r2));
    }
    Ok(worst)
}

/// `min H_{0,h}(ξ)/|ξ|^2` over a grid with `hξ ∈ supp φ̂ \ {0}`.
pub fn lower_bound_check(sf: &ScalingFunction, h: f64, xi_grid: &[Vec<f64>]) -> Result<f64> {
    if xi_grid.is_empty() {
        return invalid("empty frequency grid");
    }
    let mut best = f64::INFINITY;
    for xi in xi_grid {
        let r2: f64 = xi.iter().map(|x| x * x).sum();
        let sup = xi.iter().fold(0.0f64, |m, x| m.max((h * x).abs()));
        if r2 == 0.0 || sup > sf.support_radius {
            return invalid(format!("grid point {xi:?} is zero or outside h^-1 supp φ̂"));
        }
        best = best.min(h0h_symbol(xi, h)? / r2);
    }
    Ok(best)
}

/// Which fibered operator a [`FiberMatrix`] represents.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FiberKind {
    /// `(1 - Q_h^* Q_h)(H_0 - μ)^{-1}`.
    Free1,
    /// `Q_h^*(H_{0,h} - μ)^{-1} Q_h - Q_h^* Q_h (H_0 - μ)^{-1}`.
    Free2,
    /// `Q_h^*(H_{0,h} - μ)^{-1} Q_h - (H_0 - μ)^{-1}`, the free resolvent
    /// difference (`Free2` minus `Free1`).
    ResolventDifference,
}

/// The restriction of a fibered operator to the coset of `center`, indexed by
/// shifts `m, n ∈ {-1, 0, 1}^d`.
#[derive(Clone, Debug)]
pub struct FiberMatrix {
    pub center: Vec<f64>,
    pub shifts: Vec<Vec<i64>>,
    pub entries: DMatrix<C64>,
}

impl FiberMatrix {
    pub fn spectral_norm(&self) -> f64 {
        if self.entries.nrows() == 1 {
            return self.entries[(0, 0)].norm();
        }
        self.entries
            .clone()
            .singular_values()
            .iter()
            .fold(0.0, |m, &s| m.max(s))
    }
}

/// Fiber vector `v_n(ζ) = φ̂(hζ + n)`, `n ∈ {-1, 0, 1}^d`. Unit length by the
/// partition identity.
pub fn fiber_vector(zeta: &[f64], h: f64, sf: &ScalingFunction) -> Vec<f64> {
    let shifts = unit_shifts(zeta.len());
    let mut arg = vec![0.0; zeta.len()];
    shifts
        .iter()
        .map(|n| {
            for a in 0..zeta.len() {
                arg[a] = h * zeta[a] + n[a] as f64;
            }
            sf.phi_hat(&arg)
        })
        .collect()
}

fn shifted(zeta: &[f64], n: &[i64], h: f64) -> Vec<f64> {
    zeta.iter().zip(n).map(|(z, &k)| z + k as f64 / h).collect()
}

fn resolvent(energy: f64, mu: C64) -> C64 {
    (C64::new(energy, 0.0) - mu).inv()
}

pub fn fiber_matrix(
    kind: FiberKind,
    zeta: &[f64],
    h: f64,
    probe: &ResolventProbe,
    sf: &ScalingFunction,
) -> FiberMatrix {
    let d = zeta.len();
    let shifts = unit_shifts(d);
    let size = shifts.len();
    let v = fiber_vector(zeta, h, sf);
    let mu = probe.mu();
    let lattice = resolvent(h0h_unchecked(zeta, h), mu);
    let continuum: Vec<C64> = shifts
        .iter()
        .map(|n| resolvent(h0_symbol(&shifted(zeta, n, h)), mu))
        .collect();
    let entries = DMatrix::from_fn(size, size, |i, j| {
        let proj = C64::new(v[i] * v[j], 0.0);
        let delta = if i == j { 1.0 } else { 0.0 };
        match kind {
            FiberKind::Free1 => (C64::new(delta, 0.0) - proj) * continuum[j],
            FiberKind::Free2 => proj * (lattice - continuum[j]),
            FiberKind::ResolventDifference => proj * lattice - continuum[j] * delta,
        }
    });
    FiberMatrix {
        center: zeta.to_vec(),
        shifts,
        entries,
    }
}

pub fn fiber_free1(zeta: &[f64], h: f64, probe: &ResolventProbe, sf: &ScalingFunction) -> FiberMatrix {
    fiber_matrix(FiberKind::Free1, zeta, h, probe, sf)
}

pub fn fiber_free2(zeta: &[f64], h: f64, probe: &ResolventProbe, sf: &ScalingFunction) -> FiberMatrix {
    fiber_matrix(FiberKind::Free2, zeta, h, probe, sf)
}

pub fn fiber_resolvent_difference(
    zeta: &[f64],
    h: f64,
    probe: &ResolventProbe,
    sf: &ScalingFunction,
) -> FiberMatrix {
    fiber_matrix(FiberKind::ResolventDifference, zeta, h, probe, sf)
}

/// Sup of fiber norms over `ζ = (-1/2 + i/G)/h`, `i ∈ [0, G)^d`.
pub fn fiber_norm_sup(
    kind: FiberKind,
    h: f64,
    probe: &ResolventProbe,
    sf: &ScalingFunction,
    grid_points: usize,
) -> Result<f64> {
    if grid_points < 64 {
        return invalid(format!("grid_points must be at least 64, got {grid_points}"));
    }
    if !(h > 0.0) {
        return invalid("mesh must be positive");
    }
    Ok(sup_over_cell(kind, h, probe, sf, grid_points))
}

fn sup_over_cell(kind: FiberKind, h: f64, probe: &ResolventProbe, sf: &ScalingFunction, g: usize) -> f64 {
    let d = sf.dimension;
    let total = g.pow(d as u32);
    (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut idx = vec![0usize; d];
            digits(flat, g, &mut idx);
            let zeta: Vec<f64> = idx.iter().map(|&i| (-0.5 + i as f64 / g as f64) / h).collect();
            fiber_matrix(kind, &zeta, h, probe, sf).spectral_norm()
        })
        .reduce(|| 0.0, f64::max)
}

pub fn fiber_norm_sup_free1(h: f64, probe: &ResolventProbe, sf: &ScalingFunction, grid_points: usize) -> Result<f64> {
    fiber_norm_sup(FiberKind::Free1, h, probe, sf, grid_points)
}

pub fn fiber_norm_sup_free2(h: f64, probe: &ResolventProbe, sf: &ScalingFunction, grid_points: usize) -> Result<f64> {
    fiber_norm_sup(FiberKind::Free2, h, probe, sf, grid_points)
}

pub fn fiber_norm_sup_resolvent_difference(
    h: f64,
    probe: &ResolventProbe,
    sf: &ScalingFunction,
    grid_points: usize,
) -> Result<f64> {
    fiber_norm_sup(FiberKind::ResolventDifference, h, probe, sf, grid_points)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvergedSup {
    pub value: f64,
    pub grid_points: usize,
    pub relative_change: f64,
}

/// Doubles the `ζ`-grid from `start_points` until the sup changes by less than
/// `rel_change` (1% in the experiments), up to `max_points`.
pub fn converged_fiber_sup(
    kind: FiberKind,
    h: f64,
    probe: &ResolventProbe,
    sf: &ScalingFunction,
    start_points: usize,
    rel_change: f64,
    max_points: usize,
) -> Result<ConvergedSup> {
    let mut g = start_points;
    let mut prev = fiber_norm_sup(kind, h, probe, sf, g)?;
    loop {
        let next_g = g * 2;
        let next = fiber_norm_sup(kind, h, probe, sf, next_g)?;
        let change = (next - prev).abs() / next.abs().max(f64::MIN_POSITIVE);
        if change < rel_change || next_g >= max_points {
            return Ok(ConvergedSup {
                value: next,
                grid_points: next_g,
                relative_change: change,
            });
        }
        g = next_g;
        prev = next;
    }
}

/// Max of fiber norms over the quasi-momenta `ζ_m = m/L` of a periodic box with
/// `n` sites per axis: the exact norm of the box realization restricted to the
/// `3^d` contributing shells.
pub fn fiber_norm_max_on_box(
    kind: FiberKind,
    h: f64,
    n: usize,
    probe: &ResolventProbe,
    sf: &ScalingFunction,
) -> f64 {
    sup_over_cell(kind, h, probe, sf, n)
}

/// Empirical constants of the two channel estimates behind the free-2 bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Free2Channels {
    /// `sup |B_h(ξ)| / h^2` over `hξ ∈ supp φ̂`.
    pub central: f64,
    /// `sup |φ̂(hζ) φ̂(hζ+n) B_h(ζ + n/h)| / h^2` over `n ≠ 0`.
    pub off: f64,
    /// `h^2 · min(H_{0,h}, H_0)(ζ + n/h)` over the support of the off-channel weights.
    pub off_energy_floor: f64,
}

/// One-dimensional channel diagnostics on a grid of `grid_points` quasi-momenta.
pub fn free2_channel_constants(
    h: f64,
    probe: &ResolventProbe,
    sf: &ScalingFunction,
    grid_points: usize,
) -> Result<Free2Channels> {
    if sf.dimension != 1 {
        return invalid("channel diagnostics are one-dimensional");
    }
    if grid_points < 64 || !(h > 0.0) {
        return invalid("need grid_points >= 64 and h > 0");
    }
    let mu = probe.mu();
    let b = |xi: f64| resolvent(h0h_unchecked(&[xi], h), mu) - resolvent(h0_symbol(&[xi]), mu);
    let mut out = Free2Channels {
        central: 0.0,
        off: 0.0,
        off_energy_floor: f64::INFINITY,
    };
    // central channel over the full support of φ̂(h·)
    for i in 0..=2 * grid_points {
        let t = sf.support_radius * (i as f64 / grid_points as f64 - 1.0);
        if t != 0.0 {
            out.central = out.central.max(b(t / h).norm() / (h * h));
        }
    }
    for i in 0..grid_points {
        let zeta = (-0.5 + i as f64 / grid_points as f64) / h;
        let w0 = sf.phi_hat(&[h * zeta]);
        for n in [-1i64, 1] {
            let wn = sf.phi_hat(&[h * zeta + n as f64]);
            if w0 * wn == 0.0 {
                continue;
            }
            let xi = zeta + n as f64 / h;
            out.off = out.off.max((b(xi) * (w0 * wn)).norm() / (h * h));
            let e = h0h_unchecked(&[xi], h).min(h0_symbol(&[xi]));
            out.off_energy_floor = out.off_energy_floor.min(e * h * h);
        }
    }
    Ok(out)
}
