use crate::error::{invalid, Result};
use crate::fourier::C64;
use crate::lattice::{GridFunction, LatticeSpec, PotentialSpec};
use crate::linalg::{axis_table, fourier_diagonal};
use crate::symbols::h0h_symbol;
use std::f64::consts::PI;

/// A Hermitian operator on the grid functions of a fixed box, Hermitian with
/// respect to the weighted inner product `h^d Σ u conj(v)`.
pub trait HermitianOperator: Sync {
    fn spec(&self) -> &LatticeSpec;

    fn apply(&self, x: &[C64], out: &mut [C64]);

    /// A number not exceeding the smallest eigenvalue.
    fn lower_bound(&self) -> f64;

    /// Approximate `(A - shift)^{-1} r`; the identity unless overridden.
    fn precondition(&self, shift: C64, r: &[C64], out: &mut [C64]) {
        let _ = shift;
        out.copy_from_slice(r);
    }

    fn dim(&self) -> usize {
        self.spec().len()
    }
}

/// Row-major stride of `axis` and its neighbour offsets with wrap-around.
fn for_each_neighbour(spec: &LatticeSpec, mut f: impl FnMut(usize, usize, usize)) {
    let n = spec.n;
    let d = spec.dimension;
    for axis in 0..d {
        let stride = n.pow((d - 1 - axis) as u32);
        for i in 0..spec.len() {
            let c = (i / stride) % n;
            let up = if c + 1 == n { i + stride - n * stride } else { i + stride };
            let down = if c == 0 { i + n * stride - stride } else { i - stride };
            f(i, up, down);
        }
    }
}

pub(crate) fn stencil(spec: &LatticeSpec, x: &[C64], out: &mut [C64]) {
    let inv = 1.0 / (spec.h * spec.h);
    let diag = 2.0 * spec.dimension as f64 * inv;
    for (o, v) in out.iter_mut().zip(x) {
        *o = v * diag;
    }
    for_each_neighbour(spec, |i, up, down| {
        out[i] -= (x[up] + x[down]) * inv;
    });
}

/// `H_{0,h} v(z) = h^{-2} Σ_j (2v(z) - v(z + h e_j) - v(z - h e_j))` on the torus.
pub fn apply_h0h(v: &GridFunction) -> GridFunction {
    let mut out = GridFunction::zeros(v.spec);
    stencil(&v.spec, &v.values, &mut out.values);
    out
}

fn axis_shift(spec: &LatticeSpec, j: usize, forward: bool, v: &[C64]) -> Result<Vec<C64>> {
    if j >= spec.dimension {
        return invalid(format!("axis {j} out of range for dimension {}", spec.dimension));
    }
    let n = spec.n;
    let stride = n.pow((spec.dimension - 1 - j) as u32);
    let inv = 1.0 / spec.h;
    Ok((0..v.len())
        .map(|i| {
            let c = (i / stride) % n;
            if forward {
                let up = if c + 1 == n { i + stride - n * stride } else { i + stride };
                (v[up] - v[i]) * inv
            } else {
                let down = if c == 0 { i + n * stride - stride } else { i - stride };
                (v[down] - v[i]) * inv
            }
        })
        .collect())
}

/// `∇_j v(z) = h^{-1}(v(z + h e_j) - v(z))`.
pub fn forward_diff(v: &GridFunction, j: usize) -> Result<GridFunction> {
    GridFunction::new(v.spec, axis_shift(&v.spec, j, true, &v.values)?)
}

/// `∇_j^* v(z) = h^{-1}(v(z - h e_j) - v(z))`.
pub fn adjoint_diff(v: &GridFunction, j: usize) -> Result<GridFunction> {
    GridFunction::new(v.spec, axis_shift(&v.spec, j, false, &v.values)?)
}

/// `H_h v = H_{0,h} v + V v` with `V` sampled at the sites.
pub fn apply_hh(v: &GridFunction, pot: &PotentialSpec) -> GridFunction {
    let mut out = apply_h0h(v);
    for (i, o) in out.values.iter_mut().enumerate() {
        *o += v.values[i] * pot.eval(&v.spec.site(i));
    }
    out
}

fn min_mean(values: &[f64]) -> (f64, f64) {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (min, mean)
}

/// Multiplication by a real function.
#[derive(Clone, Debug)]
pub struct Multiplication {
    spec: LatticeSpec,
    values: Vec<f64>,
}

impl Multiplication {
    pub fn new(spec: LatticeSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return invalid("multiplier length does not match the grid");
        }
        Ok(Self { spec, values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl HermitianOperator for Multiplication {
    fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    fn apply(&self, x: &[C64], out: &mut [C64]) {
        for ((o, v), m) in out.iter_mut().zip(x).zip(&self.values) {
            *o = v * m;
        }
    }

    fn lower_bound(&self) -> f64 {
        min_mean(&self.values).0
    }

    fn precondition(&self, shift: C64, r: &[C64], out: &mut [C64]) {
        for ((o, v), m) in out.iter_mut().zip(r).zip(&self.values) {
            *o = v / (C64::new(*m, 0.0) - shift);
        }
    }
}

/// `H_h = H_{0,h} + V` on a periodic lattice.
#[derive(Clone, Debug)]
pub struct LatticeHamiltonian {
    spec: LatticeSpec,
    potential: Vec<f64>,
    min_v: f64,
    mean_v: f64,
    symbol: Vec<f64>,
}

impl LatticeHamiltonian {
    pub fn new(spec: LatticeSpec, pot: &PotentialSpec) -> Self {
        Self::from_samples(spec, pot.samples(&spec)).expect("samples match the grid")
    }

    pub fn free(spec: LatticeSpec) -> Self {
        Self::from_samples(spec, vec![0.0; spec.len()]).expect("samples match the grid")
    }

    pub fn from_samples(spec: LatticeSpec, potential: Vec<f64>) -> Result<Self> {
        if potential.len() != spec.len() {
            return invalid("potential length does not match the grid");
        }
        let (min_v, mean_v) = min_mean(&potential);
        let l = spec.extent();
        let symbol = axis_table(spec.n, |k| {
            h0h_symbol(&[k as f64 / l], spec.h).expect("positive mesh")
        });
        Ok(Self {
            spec,
            potential,
            min_v,
            mean_v,
            symbol,
        })
    }

    pub fn potential(&self) -> &[f64] {
        &self.potential
    }
}

impl HermitianOperator for LatticeHamiltonian {
    fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    fn apply(&self, x: &[C64], out: &mut [C64]) {
        stencil(&self.spec, x, out);
        for ((o, v), p) in out.iter_mut().zip(x).zip(&self.potential) {
            *o += v * p;
        }
    }

    fn lower_bound(&self) -> f64 {
        self.min_v
    }

    fn precondition(&self, shift: C64, r: &[C64], out: &mut [C64]) {
        out.copy_from_slice(r);
        let c = C64::new(self.mean_v, 0.0) - shift;
        fourier_diagonal(out, self.spec.n, self.spec.dimension, &self.symbol, |e| (c + e).inv());
    }
}

/// Continuum reference `H = -Δ + V` on a fine periodic grid: the Laplacian acts
/// as the multiplier `|2πξ|^2` on all grid modes, `V` by sampling.
#[derive(Clone, Debug)]
pub struct ContinuumHamiltonian {
    inner: LatticeHamiltonian,
}

impl ContinuumHamiltonian {
    pub fn new(spec: LatticeSpec, pot: &PotentialSpec) -> Self {
        Self::from_samples(spec, pot.samples(&spec)).expect("samples match the grid")
    }

    pub fn from_samples(spec: LatticeSpec, potential: Vec<f64>) -> Result<Self> {
        let mut inner = LatticeHamiltonian::from_samples(spec, potential)?;
        let l = spec.extent();
        inner.symbol = axis_table(spec.n, |k| (2.0 * PI * k as f64 / l).powi(2));
        Ok(Self { inner })
    }

    pub fn potential(&self) -> &[f64] {
        &self.inner.potential
    }
}

impl HermitianOperator for ContinuumHamiltonian {
    fn spec(&self) -> &LatticeSpec {
        &self.inner.spec
    }

    fn apply(&self, x: &[C64], out: &mut [C64]) {
        let s = &self.inner.spec;
        out.copy_from_slice(x);
        fourier_diagonal(out, s.n, s.dimension, &self.inner.symbol, |e| C64::new(e, 0.0));
        for ((o, v), p) in out.iter_mut().zip(x).zip(&self.inner.potential) {
            *o += v * p;
        }
    }

    fn lower_bound(&self) -> f64 {
        self.inner.min_v
    }

    fn precondition(&self, shift: C64, r: &[C64], out: &mut [C64]) {
        self.inner.precondition(shift, r, out)
    }
}
