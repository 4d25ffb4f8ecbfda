use crate::error::{invalid, Error, Result};
use crate::estimators::{
    hausdorff_distance, lowest_eigenpairs, op_norm, ConvergenceReport, EigenOptions, Eigenpairs, LinearMap,
    NormOptions, RateCriterion,
};
use crate::fourier::{digits, C64};
use crate::lattice::{ContinuumHamiltonian, Embedding, HermitianOperator, LatticeHamiltonian, LatticeSpec, PotentialSpec};
use crate::linalg::{axpy, dot};
use crate::scaling::ScalingFunction;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Energy window `(a, b)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 2]", into = "[f64; 2]")]
pub struct SpectralWindow {
    a: f64,
    b: f64,
}

impl SpectralWindow {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return invalid(format!("window needs finite a < b, got ({a}, {b})"));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Rejects eigenvalues within `margin` of an endpoint.
    pub fn check_clear(&self, eigenvalues: &[f64], margin: f64) -> Result<()> {
        for &lam in eigenvalues {
            for endpoint in [self.a, self.b] {
                if (lam - endpoint).abs() <= margin {
                    return Err(Error::WindowTouchesSpectrum {
                        endpoint,
                        eigenvalue: lam,
                        margin,
                    });
                }
            }
        }
        Ok(())
    }
}

impl TryFrom<[f64; 2]> for SpectralWindow {
    type Error = Error;
    fn try_from(v: [f64; 2]) -> Result<Self> {
        Self::new(v[0], v[1])
    }
}

impl From<SpectralWindow> for [f64; 2] {
    fn from(w: SpectralWindow) -> Self {
        [w.a, w.b]
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralOptions {
    pub eigen: EigenOptions,
    pub norm: NormOptions,
    /// Minimal distance between window endpoints and eigenvalues.
    pub margin: f64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            eigen: EigenOptions::default(),
            norm: NormOptions::default(),
            margin: 1e-6,
        }
    }
}

/// Largest `|ψ|` over the outermost layer of sites relative to `max |ψ|`,
/// over all given vectors.
fn boundary_decay(spec: &LatticeSpec, vectors: &[Vec<C64>]) -> f64 {
    let mut idx = vec![0usize; spec.dimension];
    let mut worst: f64 = 0.0;
    for v in vectors {
        let peak = v.iter().fold(0.0f64, |m, x| m.max(x.norm()));
        if peak == 0.0 {
            continue;
        }
        for (flat, x) in v.iter().enumerate() {
            digits(flat, spec.n, &mut idx);
            if idx.iter().any(|&i| i == 0 || i == spec.n - 1) {
                worst = worst.max(x.norm() / peak);
            }
        }
    }
    worst
}

/// All eigenpairs with eigenvalue at most `b`, plus the first one above it
/// (when the dimension allows).
fn eigenpairs_through(op: &dyn HermitianOperator, b: f64, opts: &EigenOptions) -> Result<Eigenpairs> {
    let dim = op.dim();
    let mut k = 4.min(dim);
    loop {
        let pairs = lowest_eigenpairs(op, k, opts)?;
        if pairs.values.last().is_some_and(|&l| l > b) || k == dim {
            return Ok(pairs);
        }
        k = (2 * k).min(dim);
    }
}

fn in_window(pairs: &Eigenpairs, w: &SpectralWindow) -> (Vec<f64>, Vec<Vec<C64>>) {
    pairs
        .values
        .iter()
        .zip(&pairs.vectors)
        .filter(|(l, _)| **l > w.a && **l < w.b)
        .map(|(l, v)| (*l, v.clone()))
        .unzip()
}

struct ProjectionDifference {
    embedding: Embedding,
    lattice_vectors: Vec<Vec<C64>>,
    continuum_vectors: Vec<Vec<C64>>,
}

fn project(vectors: &[Vec<C64>], x: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); x.len()];
    for v in vectors {
        axpy(dot(v, x), v, &mut out);
    }
    out
}

impl LinearMap for ProjectionDifference {
    fn dim_in(&self) -> usize {
        self.embedding.fine().len()
    }
    fn dim_out(&self) -> usize {
        self.embedding.fine().len()
    }
    fn weight_in(&self) -> f64 {
        self.embedding.fine().weight()
    }
    fn weight_out(&self) -> f64 {
        self.embedding.fine().weight()
    }
    fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        let v = self.embedding.analyze(x);
        let mut out = self.embedding.synthesize(&project(&self.lattice_vectors, &v));
        for (o, c) in out.iter_mut().zip(project(&self.continuum_vectors, x)) {
            *o -= c;
        }
        Ok(out)
    }
    fn apply_adjoint(&self, y: &[C64]) -> Result<Vec<C64>> {
        self.apply(y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProjectionDiff {
    /// `‖P_h^* E_{H_h}((a,b)) P_h - E_H((a,b))‖`.
    pub value: f64,
    pub lattice_eigenvalues: Vec<f64>,
    pub continuum_eigenvalues: Vec<f64>,
    /// Relative size of the eigenvectors on the outermost sites of the box.
    pub boundary_decay: f64,
}

impl ProjectionDiff {
    pub fn lattice_rank(&self) -> usize {
        self.lattice_eigenvalues.len()
    }

    pub fn continuum_rank(&self) -> usize {
        self.continuum_eigenvalues.len()
    }
}

/// Difference of the spectral projections of `H_h` (on `lattice`, embedded by
/// `P_h`) and of the continuum reference `H` (on `fine`) for the window.
pub fn spectral_projection_diff(
    pot: &PotentialSpec,
    window: &SpectralWindow,
    lattice: &LatticeSpec,
    fine: &LatticeSpec,
    sf: &ScalingFunction,
    opts: &SpectralOptions,
) -> Result<ProjectionDiff> {
    let embedding = Embedding::new(sf, *lattice, *fine)?;
    let lat_op = LatticeHamiltonian::new(*lattice, pot);
    let cont_op = ContinuumHamiltonian::new(*fine, pot);
    let (lat, cont) = rayon::join(
        || eigenpairs_through(&lat_op, window.b, &opts.eigen),
        || eigenpairs_through(&cont_op, window.b, &opts.eigen),
    );
    let (lat, cont) = (lat?, cont?);
    window.check_clear(&lat.values, opts.margin)?;
    window.check_clear(&cont.values, opts.margin)?;
    let (lattice_eigenvalues, lattice_vectors) = in_window(&lat, window);
    let (continuum_eigenvalues, continuum_vectors) = in_window(&cont, window);
    let boundary = boundary_decay(lattice, &lattice_vectors).max(boundary_decay(fine, &continuum_vectors));
    let map = ProjectionDifference {
        embedding,
        lattice_vectors,
        continuum_vectors,
    };
    let value = op_norm(&map, &opts.norm)?.value;
    Ok(ProjectionDiff {
        value,
        lattice_eigenvalues,
        continuum_eigenvalues,
        boundary_decay: boundary,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HausdorffRow {
    pub h: f64,
    pub distance: f64,
    /// `(λ_k + M)^{-1}` of the lattice operator.
    pub floor: f64,
    pub eigenvalues: Vec<f64>,
    pub boundary_decay: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HausdorffSweep {
    pub m_shift: f64,
    pub k: usize,
    pub continuum_eigenvalues: Vec<f64>,
    /// `(λ_k + M)^{-1}` of the continuum reference: everything above `λ_k` is
    /// compressed into `[0, floor]`.
    pub continuum_floor: f64,
    pub rows: Vec<HausdorffRow>,
}

impl HausdorffSweep {
    pub fn report(&self, experiment: &str, criterion: RateCriterion) -> ConvergenceReport {
        let pairs: Vec<_> = self.rows.iter().map(|r| (r.h, r.distance)).collect();
        ConvergenceReport::new(experiment, &pairs, criterion, f64::MIN_POSITIVE)
    }
}

/// Default shift `M = max(1, 1 - inf V) + 1`.
pub fn default_resolvent_shift(pot: &PotentialSpec) -> f64 {
    1f64.max(1.0 - pot.infimum()) + 1.0
}

fn resolvent_set(values: &[f64], m: f64) -> Vec<f64> {
    let mut out: Vec<f64> = values.iter().map(|l| 1.0 / (l + m)).collect();
    out.push(0.0);
    out
}

/// Hausdorff distances between `{(λ_j + M)^{-1}}_{j ≤ k} ∪ {0}` for `H_h` on
/// boxes of side `extent` and for the continuum reference on `reference`.
/// The point `0` stands in for the image of the spectrum above `λ_k`.
pub fn resolvent_spectrum_hausdorff(
    pot: &PotentialSpec,
    m_shift: Option<f64>,
    h_list: &[f64],
    extent: f64,
    k: usize,
    reference: &LatticeSpec,
    opts: &EigenOptions,
) -> Result<HausdorffSweep> {
    let m = m_shift.unwrap_or_else(|| default_resolvent_shift(pot));
    if !(pot.infimum() + m >= 1.0 - 1e-12) {
        return invalid(format!("shift {m} does not make H + M >= 1"));
    }
    let cont = lowest_eigenpairs(&ContinuumHamiltonian::new(*reference, pot), k, opts)?;
    let cont_set = resolvent_set(&cont.values, m);
    let rows = h_list
        .par_iter()
        .map(|&h| -> Result<HausdorffRow> {
            let spec = LatticeSpec::with_extent(reference.dimension, extent, h)?;
            let pairs = lowest_eigenpairs(&LatticeHamiltonian::new(spec, pot), k, opts)?;
            let distance = hausdorff_distance(&resolvent_set(&pairs.values, m), &cont_set)?;
            Ok(HausdorffRow {
                h,
                distance,
                floor: 1.0 / (pairs.values[k - 1] + m),
                boundary_decay: boundary_decay(&spec, &pairs.vectors),
                eigenvalues: pairs.values,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HausdorffSweep {
        m_shift: m,
        k,
        continuum_floor: 1.0 / (cont.values[k - 1] + m),
        continuum_eigenvalues: cont.values,
        rows,
    })
}
