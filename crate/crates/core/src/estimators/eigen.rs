use crate::error::{invalid, Error, Result};
use crate::estimators::seeded_rng;
use crate::fourier::C64;
use crate::lattice::{solve_shifted, HermitianOperator, SolverOptions};
use crate::linalg::{norm, orthonormalize};
use nalgebra::DMatrix;
use rand::Rng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenOptions {
    /// Residual target `‖A x - λ x‖ ≤ tol · max(1, |λ|)` for unit `x`.
    pub tol: f64,
    pub seed: u64,
    /// Largest Krylov basis before a restart.
    pub max_basis: usize,
    pub max_restarts: usize,
    /// Dense fallback is allowed up to this dimension.
    pub dense_limit: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            seed: 0,
            max_basis: 240,
            max_restarts: 8,
            dense_limit: 4096,
        }
    }
}

/// Lowest eigenpairs, eigenvalues ascending, eigenvectors of unit Euclidean norm.
#[derive(Clone, Debug)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<C64>>,
    pub residuals: Vec<f64>,
}

/// Rayleigh-Ritz of `op` on the orthonormal `basis` with images `images`.
fn rayleigh_ritz(basis: &[Vec<C64>], images: &[Vec<C64>], k: usize) -> Eigenpairs {
    let m = basis.len();
    let h = DMatrix::from_fn(m, m, |i, j| crate::linalg::dot(&basis[i], &images[j]));
    let h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let n = basis[0].len();
    let mut out = Eigenpairs {
        values: Vec::new(),
        vectors: Vec::new(),
        residuals: Vec::new(),
    };
    for &c in order.iter().take(k) {
        let theta = eig.eigenvalues[c];
        let mut x = vec![C64::new(0.0, 0.0); n];
        let mut ax = vec![C64::new(0.0, 0.0); n];
        for j in 0..m {
            let y = eig.eigenvectors[(j, c)];
            crate::linalg::axpy(y, &basis[j], &mut x);
            crate::linalg::axpy(y, &images[j], &mut ax);
        }
        let xn = norm(&x);
        let r: Vec<C64> = ax.iter().zip(&x).map(|(a, b)| a - b * theta).collect();
        out.residuals.push(norm(&r) / xn);
        x.iter_mut().for_each(|v| *v /= xn);
        out.values.push(theta);
        out.vectors.push(x);
    }
    out
}

fn converged(p: &Eigenpairs, k: usize, tol: f64) -> bool {
    p.values.len() >= k
        && p.values
            .iter()
            .zip(&p.residuals)
            .all(|(l, r)| *r <= tol * l.abs().max(1.0))
}

/// The `k` smallest eigenpairs of a Hermitian operator.
///
/// Block Krylov iteration with the shift-inverted operator `(A - σ)^{-1}`,
/// `σ = lower_bound - 1`, full orthogonalization and Rayleigh-Ritz on `A`
/// itself. The block size exceeds `k`, so degenerate eigenvalues of
/// multiplicity up to the block size are resolved. Falls back to a dense
/// eigendecomposition for dimensions up to `dense_limit`.
pub fn lowest_eigenpairs(op: &dyn HermitianOperator, k: usize, opts: &EigenOptions) -> Result<Eigenpairs> {
    let n = op.dim();
    if k == 0 || k > n {
        return invalid(format!("need 1 <= k <= {n}, got {k}"));
    }
    if !(opts.tol > 0.0) {
        return invalid("eigen tolerance must be positive");
    }
    if n <= 4 * (k + 4) && n <= opts.dense_limit {
        return dense(op, k);
    }
    match krylov(op, k, opts) {
        Ok(p) => Ok(p),
        Err(e) if n <= opts.dense_limit => {
            log::warn!("block Krylov eigensolver failed ({e}); using dense fallback");
            dense(op, k)
        }
        Err(e) => Err(e),
    }
}

fn krylov(op: &dyn HermitianOperator, k: usize, opts: &EigenOptions) -> Result<Eigenpairs> {
    let n = op.dim();
    let block = (k + 4).min(n);
    let sigma = C64::new(op.lower_bound() - 1.0, 0.0);
    // the inverse only generates the search space; Rayleigh-Ritz uses `op` itself
    let solver = SolverOptions::with_tol(1e-8);
    let mut rng = seeded_rng(opts.seed, 0xe16);
    let mut start: Vec<Vec<C64>> = (0..block)
        .map(|_| (0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect())
        .collect();
    let max_basis = opts.max_basis.max(3 * block).min(n);
    let mut last = None;
    for _restart in 0..=opts.max_restarts {
        let mut basis: Vec<Vec<C64>> = Vec::new();
        let mut images: Vec<Vec<C64>> = Vec::new();
        let mut frontier: Vec<Vec<C64>> = Vec::new();
        let add = |mut v: Vec<C64>, basis: &mut Vec<Vec<C64>>, images: &mut Vec<Vec<C64>>| -> bool {
            if orthonormalize(basis, &mut v) <= 1e-10 {
                return false;
            }
            let mut av = vec![C64::new(0.0, 0.0); n];
            op.apply(&v, &mut av);
            basis.push(v.clone());
            images.push(av);
            true
        };
        for v in start.drain(..) {
            if add(v.clone(), &mut basis, &mut images) {
                frontier.push(basis.last().unwrap().clone());
            }
        }
        loop {
            let pairs = rayleigh_ritz(&basis, &images, k.min(basis.len()));
            if converged(&pairs, k, opts.tol) {
                return Ok(pairs);
            }
            let exhausted = frontier.is_empty() || basis.len() + block > max_basis;
            if exhausted {
                last = Some(pairs);
                break;
            }
            let mut next = Vec::new();
            for v in &frontier {
                let (w, _) = solve_shifted(op, sigma, v, &solver)?;
                if add(w, &mut basis, &mut images) {
                    next.push(basis.last().unwrap().clone());
                }
            }
            frontier = next;
        }
        // thick restart from the current Ritz vectors plus fresh directions
        let pairs = rayleigh_ritz(&basis, &images, block.min(basis.len()));
        start = pairs.vectors;
        while start.len() < block {
            start.push((0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect());
        }
        if basis.len() == n {
            break;
        }
    }
    let worst = last
        .map(|p| p.residuals.iter().cloned().fold(0.0, f64::max))
        .unwrap_or(f64::NAN);
    Err(Error::EigenNotConverged(format!(
        "{k} lowest eigenpairs of a {n}-dimensional operator, worst residual {worst:.3e}"
    )))
}

/// Dense matrix of `op` in the standard basis.
pub fn dense_matrix(op: &dyn HermitianOperator) -> DMatrix<C64> {
    let n = op.dim();
    let mut m = DMatrix::<C64>::zeros(n, n);
    let mut e = vec![C64::new(0.0, 0.0); n];
    let mut col = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        e[j] = C64::new(1.0, 0.0);
        op.apply(&e, &mut col);
        m.set_column(j, &nalgebra::DVector::from_column_slice(&col));
        e[j] = C64::new(0.0, 0.0);
    }
    m
}

fn dense(op: &dyn HermitianOperator, k: usize) -> Result<Eigenpairs> {
    let m = dense_matrix(op);
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let n = m.nrows();
    let basis: Vec<Vec<C64>> = (0..n)
        .map(|j| {
            let mut e = vec![C64::new(0.0, 0.0); n];
            e[j] = C64::new(1.0, 0.0);
            e
        })
        .collect();
    let images: Vec<Vec<C64>> = (0..n).map(|j| m.column(j).iter().cloned().collect()).collect();
    Ok(rayleigh_ritz(&basis, &images, k))
}

/// The `k` smallest eigenvalues, ascending.
pub fn lowest_eigenvalues(op: &dyn HermitianOperator, k: usize, tol: f64) -> Result<Vec<f64>> {
    let opts = EigenOptions {
        tol,
        ..EigenOptions::default()
    };
    Ok(lowest_eigenpairs(op, k, &opts)?.values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{LatticeHamiltonian, LatticeSpec, PotentialKind, PotentialSpec};
    use crate::symbols::h0h_symbol;

    #[test]
    fn free_lattice_matches_symbol() {
        let spec = LatticeSpec::new(1, 0.1, 64).unwrap();
        let op = LatticeHamiltonian::free(spec);
        let got = lowest_eigenvalues(&op, 7, 1e-9).unwrap();
        let l = spec.extent();
        let mut expect: Vec<f64> = (-32..32)
            .map(|m| h0h_symbol(&[m as f64 / l], spec.h).unwrap())
            .collect();
        expect.sort_by(f64::total_cmp);
        for (g, e) in got.iter().zip(&expect) {
            assert!((g - e).abs() < 1e-8 * e.max(1.0), "{got:?}");
        }
    }

    #[test]
    fn free_two_dimensional_degeneracy() {
        let spec = LatticeSpec::new(2, 0.25, 16).unwrap();
        let op = LatticeHamiltonian::free(spec);
        let got = lowest_eigenvalues(&op, 5, 1e-9).unwrap();
        let first = h0h_symbol(&[1.0 / spec.extent()], spec.h).unwrap();
        assert!(got[0].abs() < 1e-9);
        for g in &got[1..5] {
            assert!((g - first).abs() < 1e-8, "{got:?}");
        }
    }

    #[test]
    fn ground_state_above_potential_floor() {
        let pot: PotentialSpec = PotentialKind::BoundedUc { wavenumber: 0.25 }.into();
        let spec = LatticeSpec::with_extent(1, 8.0, 1.0 / 32.0).unwrap();
        let op = LatticeHamiltonian::new(spec, &pot);
        let pairs = lowest_eigenpairs(&op, 1, &EigenOptions::default()).unwrap();
        assert!(pairs.values[0] >= 1.0);
        assert!(pairs.residuals[0] <= 1e-8 * pairs.values[0].max(1.0));
    }

    #[test]
    fn krylov_agrees_with_dense() {
        let pot: PotentialSpec = PotentialKind::Quadratic { a: 1.0 }.into();
        let spec = LatticeSpec::with_extent(1, 20.0, 0.1).unwrap();
        let op = LatticeHamiltonian::new(spec, &pot);
        let k = krylov(&op, 6, &EigenOptions::default()).unwrap();
        let d = dense(&op, 6).unwrap();
        for (a, b) in k.values.iter().zip(&d.values) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!(lowest_eigenvalues(&op, 0, 1e-8).is_err());
    }
}
