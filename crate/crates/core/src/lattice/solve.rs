use crate::error::{invalid, Error, Result};
use crate::fourier::C64;
use crate::lattice::{GridFunction, HermitianOperator};
use crate::linalg::{axpy, dot, norm, scale};
use crate::symbols::ResolventProbe;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverOptions {
    /// Relative residual target `‖(A - μ)x - b‖ ≤ tol ‖b‖`.
    pub tol: f64,
    /// Iteration cap; `None` means `10 n^{d/2}` for `n` points per axis.
    pub max_iter: Option<usize>,
    /// GMRES restart length.
    pub restart: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: None,
            restart: 60,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub relative_residual: f64,
    pub method: &'static str,
}

fn true_residual(op: &dyn HermitianOperator, shift: C64, x: &[C64], b: &[C64]) -> Vec<C64> {
    let mut r = vec![C64::new(0.0, 0.0); x.len()];
    op.apply(x, &mut r);
    for ((ri, xi), bi) in r.iter_mut().zip(x).zip(b) {
        *ri = bi - (*ri - shift * xi);
    }
    r
}

fn apply_shifted(op: &dyn HermitianOperator, shift: C64, x: &[C64], out: &mut [C64]) {
    op.apply(x, out);
    axpy(-shift, x, out);
}

/// Solves `(A - shift) x = b`. Preconditioned conjugate gradients when the
/// shift is real and below `A.lower_bound()`, right-preconditioned restarted
/// GMRES otherwise. Fails with [`Error::SolverFailed`] when the true residual
/// misses the target within the iteration cap.
pub fn solve_shifted(
    op: &dyn HermitianOperator,
    shift: C64,
    b: &[C64],
    opts: &SolverOptions,
) -> Result<(Vec<C64>, SolveStats)> {
    if !(opts.tol > 0.0) {
        return invalid("solver tolerance must be positive");
    }
    if b.len() != op.dim() {
        return invalid("right-hand side length does not match the operator");
    }
    let spec = op.spec();
    let cap = opts
        .max_iter
        .unwrap_or_else(|| (10.0 * (spec.n as f64).powf(spec.dimension as f64 / 2.0)).ceil() as usize);
    let bnorm = norm(b);
    if bnorm == 0.0 {
        let stats = SolveStats {
            iterations: 0,
            relative_residual: 0.0,
            method: "none",
        };
        return Ok((vec![C64::new(0.0, 0.0); b.len()], stats));
    }
    if shift.im == 0.0 && shift.re < op.lower_bound() {
        pcg(op, shift, b, bnorm, opts.tol, cap)
    } else {
        gmres(op, shift, b, bnorm, opts.tol, cap, opts.restart.max(2))
    }
}

fn pcg(
    op: &dyn HermitianOperator,
    shift: C64,
    b: &[C64],
    bnorm: f64,
    tol: f64,
    cap: usize,
) -> Result<(Vec<C64>, SolveStats)> {
    let n = b.len();
    let mut x = vec![C64::new(0.0, 0.0); n];
    let mut r = b.to_vec();
    let mut z = vec![C64::new(0.0, 0.0); n];
    let mut ap = vec![C64::new(0.0, 0.0); n];
    let mut it = 0;
    // Outer loop restarts from the true residual if the recurrence drifts.
    loop {
        op.precondition(shift, &r, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z).re;
        while it < cap {
            apply_shifted(op, shift, &p, &mut ap);
            let alpha = rz / dot(&p, &ap).re;
            axpy(C64::new(alpha, 0.0), &p, &mut x);
            axpy(C64::new(-alpha, 0.0), &ap, &mut r);
            it += 1;
            if norm(&r) <= 0.5 * tol * bnorm {
                break;
            }
            op.precondition(shift, &r, &mut z);
            let rz_new = dot(&r, &z).re;
            let beta = rz_new / rz;
            rz = rz_new;
            for (pi, zi) in p.iter_mut().zip(&z) {
                *pi = zi + *pi * beta;
            }
        }
        r = true_residual(op, shift, &x, b);
        let rel = norm(&r) / bnorm;
        if rel <= tol {
            let stats = SolveStats {
                iterations: it,
                relative_residual: rel,
                method: "pcg",
            };
            return Ok((x, stats));
        }
        if it >= cap {
            return Err(Error::SolverFailed {
                method: "pcg",
                iterations: it,
                residual: rel,
            });
        }
    }
}

fn gmres(
    op: &dyn HermitianOperator,
    shift: C64,
    b: &[C64],
    bnorm: f64,
    tol: f64,
    cap: usize,
    restart: usize,
) -> Result<(Vec<C64>, SolveStats)> {
    let n = b.len();
    let m = restart.min(n);
    let zero = C64::new(0.0, 0.0);
    let mut x = vec![zero; n];
    let mut r = b.to_vec();
    let mut it = 0;
    let mut w = vec![zero; n];
    let mut z = vec![zero; n];
    loop {
        let beta = norm(&r);
        let rel = beta / bnorm;
        if rel <= tol {
            let stats = SolveStats {
                iterations: it,
                relative_residual: rel,
                method: "gmres",
            };
            return Ok((x, stats));
        }
        if it >= cap {
            return Err(Error::SolverFailed {
                method: "gmres",
                iterations: it,
                residual: rel,
            });
        }
        let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m + 1);
        let mut v0 = r.clone();
        scale(C64::new(1.0 / beta, 0.0), &mut v0);
        basis.push(v0);
        // Hessenberg columns, rotated in place.
        let mut hess: Vec<Vec<C64>> = Vec::with_capacity(m);
        let mut cs: Vec<(f64, C64)> = Vec::with_capacity(m);
        let mut g = vec![zero; m + 1];
        g[0] = C64::new(beta, 0.0);
        let mut k = 0;
        while k < m && it < cap {
            op.precondition(shift, &basis[k], &mut z);
            apply_shifted(op, shift, &z, &mut w);
            let mut col = vec![zero; k + 2];
            for (j, q) in basis.iter().enumerate() {
                col[j] = dot(q, &w);
                axpy(-col[j], q, &mut w);
            }
            for (j, q) in basis.iter().enumerate() {
                let c = dot(q, &w);
                col[j] += c;
                axpy(-c, q, &mut w);
            }
            let hn = norm(&w);
            col[k + 1] = C64::new(hn, 0.0);
            for (j, &(c, s)) in cs.iter().enumerate() {
                let (a, bb) = (col[j], col[j + 1]);
                col[j] = a * c + s * bb;
                col[j + 1] = -s.conj() * a + bb * c;
            }
            let (a, bb) = (col[k], col[k + 1]);
            let denom = (a.norm_sqr() + bb.norm_sqr()).sqrt();
            let (c, s) = if denom == 0.0 {
                (1.0, zero)
            } else if a.norm() == 0.0 {
                (0.0, bb.conj() / bb.norm())
            } else {
                let c = a.norm() / denom;
                (c, (a / a.norm()) * bb.conj() / denom)
            };
            col[k] = a * c + s * bb;
            col[k + 1] = zero;
            g[k + 1] = -s.conj() * g[k];
            g[k] *= c;
            cs.push((c, s));
            hess.push(col);
            it += 1;
            k += 1;
            if g[k].norm() <= 0.5 * tol * bnorm || hn == 0.0 {
                break;
            }
            let mut next = w.clone();
            scale(C64::new(1.0 / hn, 0.0), &mut next);
            basis.push(next);
        }
        // back substitution for the k-dimensional update
        let mut y = vec![zero; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in i + 1..k {
                s -= hess[j][i] * y[j];
            }
            y[i] = s / hess[i][i];
        }
        let mut update = vec![zero; n];
        for (yj, q) in y.iter().zip(&basis) {
            axpy(*yj, q, &mut update);
        }
        op.precondition(shift, &update, &mut z);
        axpy(C64::new(1.0, 0.0), &z, &mut x);
        r = true_residual(op, shift, &x, b);
    }
}

/// `(op - μ)^{-1} rhs` with relative residual at most `tol`.
pub fn resolvent_solve(
    op: &dyn HermitianOperator,
    probe: &ResolventProbe,
    rhs: &GridFunction,
    tol: f64,
) -> Result<GridFunction> {
    if rhs.spec != *op.spec() {
        return invalid("right-hand side lives on a different grid");
    }
    let (x, _) = solve_shifted(op, probe.mu(), &rhs.values, &SolverOptions::with_tol(tol))?;
    GridFunction::new(rhs.spec, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{ContinuumHamiltonian, LatticeHamiltonian, LatticeSpec, Multiplication, PotentialKind, PotentialSpec};
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(spec: LatticeSpec, rng: &mut ChaCha8Rng) -> GridFunction {
        GridFunction::from_fn(spec, |_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn residual(op: &dyn HermitianOperator, mu: C64, x: &GridFunction, b: &GridFunction) -> f64 {
        norm(&true_residual(op, mu, &x.values, &b.values)) / norm(&b.values)
    }

    #[test]
    fn identity_multiplication() {
        let spec = LatticeSpec::new(1, 0.5, 8).unwrap();
        let op = Multiplication::new(spec, vec![1.0; 8]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = random(spec, &mut rng);
        let x = resolvent_solve(&op, &ResolventProbe::default(), &b, 1e-12).unwrap();
        for (xi, bi) in x.values.iter().zip(&b.values) {
            assert!((xi - bi / 2.0).norm() < 1e-14);
        }
    }

    #[test]
    fn residual_contract_real_and_complex() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pot: PotentialSpec = PotentialKind::Hoelder {
            alpha: 0.5,
            wavenumber: 0.25,
        }
        .into();
        let spec = LatticeSpec::with_extent(1, 4.0, 1.0 / 64.0).unwrap();
        let lat = LatticeHamiltonian::new(spec, &pot);
        let cont = ContinuumHamiltonian::new(spec, &pot);
        for mu in [C64::new(-1.0, 0.0), C64::new(0.0, 1.0), C64::new(5.0, 2.0), C64::new(30.0, 0.5)] {
            let probe = ResolventProbe::new(mu).unwrap();
            for op in [&lat as &dyn HermitianOperator, &cont] {
                let b = random(spec, &mut rng);
                let x = resolvent_solve(op, &probe, &b, 1e-10).unwrap();
                assert!(residual(op, mu, &x, &b) <= 1e-10);
            }
        }
    }

    #[test]
    fn matches_dense_lu() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pot: PotentialSpec = PotentialKind::BoundedUc { wavenumber: 0.25 }.into();
        let spec = LatticeSpec::with_extent(1, 4.0, 1.0 / 16.0).unwrap();
        let op = LatticeHamiltonian::new(spec, &pot);
        let n = spec.len();
        for mu in [C64::new(-1.0, 0.0), C64::new(2.0, 1.0)] {
            let mut a = DMatrix::<C64>::zeros(n, n);
            let mut e = vec![C64::new(0.0, 0.0); n];
            let mut col = vec![C64::new(0.0, 0.0); n];
            for j in 0..n {
                e.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
                e[j] = C64::new(1.0, 0.0);
                op.apply(&e, &mut col);
                for i in 0..n {
                    a[(i, j)] = col[i] - if i == j { mu } else { C64::new(0.0, 0.0) };
                }
            }
            let b = random(spec, &mut rng);
            let dense = a.lu().solve(&DVector::from_vec(b.values.clone())).unwrap();
            let x = resolvent_solve(&op, &ResolventProbe::new(mu).unwrap(), &b, 1e-12).unwrap();
            for (xi, di) in x.values.iter().zip(dense.iter()) {
                assert!((xi - di).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn cap_exhaustion_is_reported() {
        let pot: PotentialSpec = PotentialKind::Growth { a: 1.0, kappa: 2.0 }.into();
        let spec = LatticeSpec::with_extent(1, 16.0, 1.0 / 16.0).unwrap();
        let op = LatticeHamiltonian::new(spec, &pot);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let b = random(spec, &mut rng);
        let opts = SolverOptions {
            tol: 1e-14,
            max_iter: Some(3),
            restart: 60,
        };
        for mu in [C64::new(-1.0, 0.0), C64::new(0.0, 1.0)] {
            match solve_shifted(&op, mu, &b.values, &opts) {
                Err(Error::SolverFailed { iterations, .. }) => assert!(iterations >= 3),
                other => panic!("expected failure, got {other:?}"),
            }
        }
    }

    #[test]
    fn two_dimensional_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pot: PotentialSpec = PotentialKind::BoundedUc { wavenumber: 0.25 }.into();
        let spec = LatticeSpec::with_extent(2, 4.0, 0.125).unwrap();
        let op = LatticeHamiltonian::new(spec, &pot);
        let b = random(spec, &mut rng);
        let probe = ResolventProbe::new(C64::new(1.0, 1.0)).unwrap();
        let x = resolvent_solve(&op, &probe, &b, 1e-10).unwrap();
        assert!(residual(&op, probe.mu(), &x, &b) <= 1e-10);
    }
}
