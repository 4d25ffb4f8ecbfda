use crate::error::{invalid, Error, Result};
use crate::estimators::seeded_rng;
use crate::fourier::C64;
use crate::linalg::{dot, norm, orthonormalize};
use nalgebra::{DMatrix, DVector};
use rand::Rng;

/// A linear map between weighted spaces `C^n` with inner products
/// `w Σ x conj(y)`. `apply_adjoint` must be the adjoint for these weights.
pub trait LinearMap: Sync {
    fn dim_in(&self) -> usize;
    fn dim_out(&self) -> usize;
    fn weight_in(&self) -> f64 {
        1.0
    }
    fn weight_out(&self) -> f64 {
        1.0
    }
    fn apply(&self, x: &[C64]) -> Result<Vec<C64>>;
    fn apply_adjoint(&self, y: &[C64]) -> Result<Vec<C64>>;
}

/// The adjoint of a map, as a map.
pub struct Adjoint<'a, M: ?Sized>(pub &'a M);

impl<M: LinearMap + ?Sized> LinearMap for Adjoint<'_, M> {
    fn dim_in(&self) -> usize {
        self.0.dim_out()
    }
    fn dim_out(&self) -> usize {
        self.0.dim_in()
    }
    fn weight_in(&self) -> f64 {
        self.0.weight_out()
    }
    fn weight_out(&self) -> f64 {
        self.0.weight_in()
    }
    fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        self.0.apply_adjoint(x)
    }
    fn apply_adjoint(&self, y: &[C64]) -> Result<Vec<C64>> {
        self.0.apply(y)
    }
}

/// A dense matrix with unit weights.
#[derive(Clone, Debug)]
pub struct DenseMap(pub DMatrix<C64>);

impl LinearMap for DenseMap {
    fn dim_in(&self) -> usize {
        self.0.ncols()
    }
    fn dim_out(&self) -> usize {
        self.0.nrows()
    }
    fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        Ok((&self.0 * DVector::from_column_slice(x)).data.into())
    }
    fn apply_adjoint(&self, y: &[C64]) -> Result<Vec<C64>> {
        Ok((self.0.adjoint() * DVector::from_column_slice(y)).data.into())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormOptions {
    /// Relative tolerance on the norm.
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    /// Relative mismatch allowed in the adjoint spot check.
    pub adjoint_tol: f64,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            max_iter: 300,
            seed: 0,
            adjoint_tol: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormEstimate {
    pub value: f64,
    pub iterations: usize,
    /// Ritz residual of the top eigenvalue of `A^*A`, relative to that eigenvalue.
    pub residual: f64,
}

fn random_vector(rng: &mut impl Rng, n: usize) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

/// Compares `⟨Ax, y⟩_out` with `⟨x, A^*y⟩_in` on random vectors.
pub fn adjoint_mismatch(map: &dyn LinearMap, seed: u64) -> Result<f64> {
    let mut rng = seeded_rng(seed, 0xad);
    let x = random_vector(&mut rng, map.dim_in());
    let y = random_vector(&mut rng, map.dim_out());
    let ax = map.apply(&x)?;
    let aty = map.apply_adjoint(&y)?;
    let (wi, wo) = (map.weight_in(), map.weight_out());
    let lhs = dot(&y, &ax) * wo;
    let rhs = dot(&aty, &x) * wi;
    let scale = wo * norm(&ax) * norm(&y) + wi * norm(&aty) * norm(&x);
    // maps that vanish to rounding carry no adjoint information
    if scale <= 1e-13 * (wi * wo).sqrt() * norm(&x) * norm(&y) {
        return Ok(0.0);
    }
    Ok((lhs - rhs).norm() / scale)
}

/// `‖A‖ = sqrt(λ_max(A^*A))` by Lanczos iteration on `A^*A` with full
/// reorthogonalization, started from a seeded random vector. Stops when the
/// Ritz residual of the top eigenvalue falls below `tol` times that eigenvalue.
pub fn op_norm(map: &dyn LinearMap, opts: &NormOptions) -> Result<NormEstimate> {
    if !(opts.tol > 0.0) || opts.max_iter == 0 {
        return invalid("norm tolerance and iteration cap must be positive");
    }
    let n = map.dim_in();
    if n == 0 || map.dim_out() == 0 {
        return Ok(NormEstimate {
            value: 0.0,
            iterations: 0,
            residual: 0.0,
        });
    }
    let mismatch = adjoint_mismatch(map, opts.seed)?;
    if mismatch > opts.adjoint_tol {
        return Err(Error::InconsistentAdjoint(mismatch));
    }
    let mut rng = seeded_rng(opts.seed, 0x5eed);
    let mut q = random_vector(&mut rng, n);
    let r0 = norm(&q);
    q.iter_mut().for_each(|v| *v /= r0);
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut theta = 0.0;
    let mut rel = f64::INFINITY;
    let limit = opts.max_iter.min(n);
    for it in 1..=limit {
        let mut w = map.apply_adjoint(&map.apply(&q)?)?;
        let a = dot(&q, &w).re;
        basis.push(q.clone());
        alpha.push(a);
        let b = orthonormalize(&basis, &mut w);
        let k = alpha.len();
        let t = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                alpha[i]
            } else if i == j + 1 {
                beta[j]
            } else if j == i + 1 {
                beta[i]
            } else {
                0.0
            }
        });
        let eig = t.symmetric_eigen();
        let (top, &val) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        theta = val.max(0.0);
        let last = eig.eigenvectors[(k - 1, top)].abs();
        if theta == 0.0 {
            if b == 0.0 {
                return Ok(NormEstimate {
                    value: 0.0,
                    iterations: it,
                    residual: 0.0,
                });
            }
            rel = f64::INFINITY;
        } else {
            rel = b * last / theta;
        }
        if rel <= opts.tol || b <= 1e-14 * theta || k == n {
            return Ok(NormEstimate {
                value: theta.sqrt(),
                iterations: it,
                residual: rel,
            });
        }
        beta.push(b);
        q = w;
    }
    Err(Error::NormNotConverged {
        estimate: theta.sqrt(),
        iterations: limit,
        residual: rel,
    })
}
