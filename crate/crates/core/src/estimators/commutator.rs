use crate::error::{invalid, Result};
use crate::estimators::{op_norm, ConvergenceReport, LinearMap, NormOptions, RateCriterion};
use crate::fourier::{digits, flatten, from_modes, C64};
use crate::lattice::{Embedding, LatticeSpec, PotentialSpec};
use crate::scaling::ScalingFunction;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Sampled `R(δ) = sup_{|x-y|<δ} |G(x) - G(y)|` over the box `[-L/2, L/2)^d`.
///
/// Base points lie on a grid with about `sample_count` points in total; each is
/// paired with points at distances `jδ/8` (`j < 8`) and just below `δ` along
/// every coordinate axis and the main diagonal.
pub fn modulus_of_continuity(
    g: &(dyn Fn(&[f64]) -> f64 + Sync),
    dimension: usize,
    extent: f64,
    delta: f64,
    sample_count: usize,
) -> Result<f64> {
    if !(delta > 0.0) || dimension == 0 || sample_count == 0 {
        return invalid("need delta > 0, dimension >= 1 and sample_count >= 1");
    }
    let per_axis = ((sample_count as f64).powf(1.0 / dimension as f64).ceil() as usize).max(2);
    let step = extent / per_axis as f64;
    let half = 0.5 * extent;
    let mut dirs: Vec<Vec<f64>> = (0..dimension)
        .map(|a| (0..dimension).map(|b| if a == b { 1.0 } else { 0.0 }).collect())
        .collect();
    if dimension > 1 {
        dirs.push(vec![1.0 / (dimension as f64).sqrt(); dimension]);
    }
    let mut dists: Vec<f64> = (1..8).map(|j| delta * j as f64 / 8.0).collect();
    dists.push(delta * (1.0 - 1e-9));
    let total = per_axis.pow(dimension as u32);
    let best = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut idx = vec![0usize; dimension];
            digits(flat, per_axis, &mut idx);
            let x: Vec<f64> = idx.iter().map(|&i| -half + i as f64 * step).collect();
            let gx = g(&x);
            let mut worst: f64 = 0.0;
            let mut y = vec![0.0; dimension];
            for dir in &dirs {
                for &t in &dists {
                    let mut inside = true;
                    for a in 0..dimension {
                        y[a] = x[a] + t * dir[a];
                        inside &= y[a] < half;
                    }
                    if inside {
                        worst = worst.max((g(&y) - gx).abs());
                    }
                }
            }
            worst
        })
        .reduce(|| 0.0, f64::max);
    Ok(best)
}

/// `u ↦ P_h(G u) - G P_h u`, from the fine grid to the lattice.
pub struct CommutatorMap {
    embedding: Embedding,
    g_fine: Vec<f64>,
    g_lattice: Vec<f64>,
}

impl CommutatorMap {
    pub fn new(g: &PotentialSpec, sf: &ScalingFunction, lattice: &LatticeSpec, fine: &LatticeSpec) -> Result<Self> {
        Ok(Self {
            embedding: Embedding::new(sf, *lattice, *fine)?,
            g_fine: g.samples(fine),
            g_lattice: g.samples(lattice),
        })
    }
}

impl LinearMap for CommutatorMap {
    fn dim_in(&self) -> usize {
        self.g_fine.len()
    }
    fn dim_out(&self) -> usize {
        self.g_lattice.len()
    }
    fn weight_in(&self) -> f64 {
        self.embedding.fine().weight()
    }
    fn weight_out(&self) -> f64 {
        self.embedding.lattice().weight()
    }
    fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        let gx: Vec<C64> = x.iter().zip(&self.g_fine).map(|(v, g)| v * g).collect();
        let a = self.embedding.analyze(&gx);
        let b = self.embedding.analyze(x);
        Ok(a.iter()
            .zip(&b)
            .zip(&self.g_lattice)
            .map(|((a, b), g)| a - b * g)
            .collect())
    }
    fn apply_adjoint(&self, y: &[C64]) -> Result<Vec<C64>> {
        let a = self.embedding.synthesize(y);
        let gy: Vec<C64> = y.iter().zip(&self.g_lattice).map(|(v, g)| v * g).collect();
        let b = self.embedding.synthesize(&gy);
        Ok(a.iter()
            .zip(&b)
            .zip(&self.g_fine)
            .map(|((a, b), g)| a * g - b)
            .collect())
    }
}

/// Directly measured `‖G P_h - P_h G‖` on the box.
pub fn commutator_norm(
    g: &PotentialSpec,
    sf: &ScalingFunction,
    lattice: &LatticeSpec,
    fine: &LatticeSpec,
    opts: &NormOptions,
) -> Result<f64> {
    Ok(op_norm(&CommutatorMap::new(g, sf, lattice, fine)?, opts)?.value)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SchurBound {
    /// `sup_z ∫ |K(x, z)| dx`.
    pub k1: f64,
    /// `sup_x h^d Σ_z |K(x, z)|`.
    pub k2: f64,
    /// `sqrt(k1 k2)`.
    pub bound: f64,
    /// `‖φ‖_1 R(δ) + C ⟨δ/h⟩^{-(n-d)}`, with `C = osc(G) C_n |S^{d-1}| 2^{(n-d)/2} / (n-d)`
    /// and `C_n = sup |φ(y)| ⟨y⟩^n`; a valid majorant of `k1` for `δ ≥ h`.
    pub majorant: f64,
    pub modulus: f64,
}

fn sphere_area(d: usize) -> f64 {
    // |S^{d-1}| = 2π^{d/2} / Γ(d/2)
    let mut gamma = if d.is_multiple_of(2) { 1.0 } else { PI.sqrt() };
    let mut x = if d.is_multiple_of(2) { 1.0 } else { 0.5 };
    while x < 0.5 * d as f64 - 1e-12 {
        gamma *= x;
        x += 1.0;
    }
    2.0 * PI.powf(0.5 * d as f64) / gamma
}

/// `(∫|φ_1|, sup |φ_1(t)| ⟨t⟩^n)` by sampling `t ∈ [0, 64]` with step `1/64`.
fn phi_profile_constants(sf: &ScalingFunction, n_decay: f64) -> (f64, f64) {
    let step = 1.0 / 64.0;
    let vals: Vec<(f64, f64)> = (0..=4096)
        .into_par_iter()
        .map(|i| {
            let t = i as f64 * step;
            (t, sf.phi_1d(t).abs())
        })
        .collect();
    let mut l1 = 0.0;
    let mut cn: f64 = 0.0;
    for (i, &(t, v)) in vals.iter().enumerate() {
        let w = if i == 0 || i == vals.len() - 1 { 0.5 } else { 1.0 };
        l1 += 2.0 * w * step * v;
        cn = cn.max(v * (1.0 + t * t).powf(0.5 * n_decay));
    }
    (l1, cn)
}

/// Schur test for the kernel `K(x, z) = h^{-d}(G(z) - G(x)) φ((x - z)/h)` of
/// `G P_h - P_h G` as realized on the box, plus the closed-form majorant.
///
/// The kernel uses the periodized `φ((x - z)/h)` evaluated exactly on the
/// fine grid from its Fourier coefficients, so `sqrt(k1 k2)` bounds the norm
/// of the same discrete operator that [`commutator_norm`] measures.
pub fn schur_commutator_bound(
    g: &PotentialSpec,
    sf: &ScalingFunction,
    lattice: &LatticeSpec,
    fine: &LatticeSpec,
    delta: f64,
    n_decay: f64,
) -> Result<SchurBound> {
    let d = lattice.dimension;
    if !(delta > 0.0) {
        return invalid("delta must be positive");
    }
    if !(n_decay > d as f64) {
        return invalid(format!("decay order must exceed the dimension, got {n_decay}"));
    }
    let r = lattice.refinement_of(fine)?;
    let (n, nf) = (lattice.n, fine.n);
    let l = lattice.extent();
    let h = lattice.h;
    let scale = l.powi(-(d as i32));
    let coeffs: Vec<C64> = (0..fine.len())
        .map(|flat| {
            let mut idx = vec![0usize; d];
            digits(flat, nf, &mut idx);
            let xi: Vec<f64> = idx.iter().map(|&k| h * (k as f64 - (nf / 2) as f64) / l).collect();
            C64::new(scale * sf.phi_hat(&xi), 0.0)
        })
        .collect();
    let table: Vec<f64> = from_modes(&coeffs, nf, d).iter().map(|v| v.re).collect();
    let g_fine = g.samples(fine);
    let g_lat = g.samples(lattice);
    let offset = |m: &[usize], j: &[usize], buf: &mut [usize]| {
        for a in 0..d {
            buf[a] = (j[a] + nf + nf / 2 - r * m[a]) % nf;
        }
        flatten(buf, nf)
    };
    let (wf, wl) = (fine.weight(), lattice.weight());
    let k1 = (0..lattice.len())
        .into_par_iter()
        .map(|m| {
            let (mut mi, mut ji, mut buf) = (vec![0usize; d], vec![0usize; d], vec![0usize; d]);
            digits(m, n, &mut mi);
            let mut s = 0.0;
            for (j, gj) in g_fine.iter().enumerate() {
                digits(j, nf, &mut ji);
                s += (g_lat[m] - gj).abs() * table[offset(&mi, &ji, &mut buf)].abs();
            }
            s * wf
        })
        .reduce(|| 0.0, f64::max);
    let k2 = (0..fine.len())
        .into_par_iter()
        .map(|j| {
            let (mut mi, mut ji, mut buf) = (vec![0usize; d], vec![0usize; d], vec![0usize; d]);
            digits(j, nf, &mut ji);
            let mut s = 0.0;
            for (m, gm) in g_lat.iter().enumerate() {
                digits(m, n, &mut mi);
                s += (gm - g_fine[j]).abs() * table[offset(&mi, &ji, &mut buf)].abs();
            }
            s * wl
        })
        .reduce(|| 0.0, f64::max);
    let gfun = |x: &[f64]| g.eval(x);
    let modulus = modulus_of_continuity(&gfun, d, l, delta, 4096)?;
    let (l1, cn1) = phi_profile_constants(sf, n_decay);
    let amp = sf.amplitude.abs();
    let phi_l1 = amp * l1.powi(d as i32);
    let cn = amp * cn1.powi(d as i32);
    let (gmin, gmax) = g_fine
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let excess = n_decay - d as f64;
    let tail = (gmax - gmin) * cn * sphere_area(d) * 2f64.powf(0.5 * excess) / excess;
    let rho = delta / h;
    let majorant = phi_l1 * modulus + tail * (1.0 + rho * rho).powf(-0.5 * excess);
    Ok(SchurBound {
        k1,
        k2,
        bound: (k1 * k2).sqrt(),
        majorant,
        modulus,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CommutatorRow {
    pub h: f64,
    pub delta: f64,
    pub direct: f64,
    pub schur: SchurBound,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommutatorSweep {
    pub rows: Vec<CommutatorRow>,
}

impl CommutatorSweep {
    pub fn direct_report(&self, experiment: &str, criterion: RateCriterion) -> ConvergenceReport {
        let pairs: Vec<_> = self.rows.iter().map(|r| (r.h, r.direct)).collect();
        ConvergenceReport::new(experiment, &pairs, criterion, f64::MIN_POSITIVE)
    }

    pub fn schur_report(&self, experiment: &str, criterion: RateCriterion) -> ConvergenceReport {
        let pairs: Vec<_> = self.rows.iter().map(|r| (r.h, r.schur.bound)).collect();
        ConvergenceReport::new(experiment, &pairs, criterion, f64::MIN_POSITIVE)
    }

    /// Whether `sqrt(k1 k2)` is at least the measured norm in every row, up to
    /// the relative norm tolerance `tol`.
    pub fn schur_dominates(&self, tol: f64) -> bool {
        self.rows.iter().all(|r| r.schur.bound >= r.direct * (1.0 - tol))
    }
}

/// Measured commutator norms and Schur bounds over `h_list` on the box of side
/// `extent`, with `δ = h^γ` and fine grids refined by `ratio`.
#[allow(clippy::too_many_arguments)]
pub fn commutator_rate(
    g: &PotentialSpec,
    sf: &ScalingFunction,
    h_list: &[f64],
    extent: f64,
    ratio: usize,
    gamma: f64,
    n_decay: f64,
    opts: &NormOptions,
) -> Result<CommutatorSweep> {
    let rows = h_list
        .par_iter()
        .map(|&h| -> Result<CommutatorRow> {
            let lattice = LatticeSpec::with_extent(sf.dimension, extent, h)?;
            let fine = lattice.refine(ratio)?;
            let direct = commutator_norm(g, sf, &lattice, &fine, opts)?;
            let delta = h.powf(gamma);
            let schur = schur_commutator_bound(g, sf, &lattice, &fine, delta, n_decay)?;
            Ok(CommutatorRow { h, delta, direct, schur })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CommutatorSweep { rows })
}
