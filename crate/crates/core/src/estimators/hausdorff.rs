use crate::error::{Error, Result};
use crate::estimators::seeded_rng;
use crate::fourier::C64;
use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

/// `max(sup_x d(x, Y), sup_y d(y, X))` for finite real sets.
pub fn hausdorff_distance(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySet);
    }
    let directed = |a: &[f64], b: &[f64]| {
        a.iter()
            .map(|p| b.iter().map(|q| (p - q).abs()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    Ok(directed(x, y).max(directed(y, x)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HausdorffPropertyOutcome {
    pub trials: usize,
    pub size: usize,
    pub violations: usize,
    /// Largest `d_H(σ(A), σ(B)) - ‖A - B‖` seen.
    pub worst_excess: f64,
    /// Smallest `‖A - B‖ - d_H` seen, as a tightness indicator.
    pub tightest_gap: f64,
    pub pass: bool,
}

fn random_hermitian(rng: &mut impl Rng, n: usize) -> DMatrix<C64> {
    let g = DMatrix::from_fn(n, n, |_, _| {
        C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

/// Checks `d_H(σ(A), σ(B)) ≤ ‖A - B‖` on `trials` random Hermitian pairs of the
/// given size. Trial `t` draws from stream `t` of `seed`; every third trial
/// uses a small perturbation `B = A + εE` to probe the near-equality regime.
pub fn hausdorff_vs_norm_property(trials: usize, size: usize, seed: u64, slack: f64) -> Result<HausdorffPropertyOutcome> {
    if trials < 100 {
        return Err(Error::InvalidArgument(format!("need at least 100 trials, got {trials}")));
    }
    if size == 0 {
        return Err(Error::InvalidArgument("matrix size must be positive".into()));
    }
    let results: Vec<(f64, f64)> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = seeded_rng(seed, t as u64);
            let a = random_hermitian(&mut rng, size);
            let e = random_hermitian(&mut rng, size);
            let eps = if t % 3 == 0 { 1e-3 } else { 1.0 };
            let b = &a + &e * C64::new(eps, 0.0);
            let sa: Vec<f64> = a.symmetric_eigenvalues().iter().cloned().collect();
            let sb: Vec<f64> = b.clone().symmetric_eigenvalues().iter().cloned().collect();
            let dh = hausdorff_distance(&sa, &sb).expect("nonempty spectra");
            let diff = (&a - &b).symmetric_eigenvalues().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            (dh, diff)
        })
        .collect();
    let mut out = HausdorffPropertyOutcome {
        trials,
        size,
        violations: 0,
        worst_excess: f64::NEG_INFINITY,
        tightest_gap: f64::INFINITY,
        pass: true,
    };
    for (dh, nrm) in results {
        let excess = dh - nrm;
        if excess > slack {
            out.violations += 1;
        }
        out.worst_excess = out.worst_excess.max(excess);
        out.tightest_gap = out.tightest_gap.min(-excess);
    }
    out.pass = out.violations == 0;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn examples() {
        assert_eq!(hausdorff_distance(&[1.0, 2.0], &[2.0, 1.0]).unwrap(), 0.0);
        assert!((hausdorff_distance(&[0.0, 1.0], &[0.1, 1.0]).unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(hausdorff_distance(&[0.0], &[0.0, 5.0]).unwrap(), 5.0);
        assert_eq!(hausdorff_distance(&[0.0, 5.0], &[0.0]).unwrap(), 5.0);
        assert!(matches!(hausdorff_distance(&[], &[1.0]), Err(Error::EmptySet)));
    }

    #[test]
    fn metric_axioms_on_random_triples() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..500 {
            let mut set = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-5.0..5.0)).collect() };
            let (a, b, c) = (set(4), set(7), set(2));
            let ab = hausdorff_distance(&a, &b).unwrap();
            assert_eq!(ab, hausdorff_distance(&b, &a).unwrap());
            assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
            let ac = hausdorff_distance(&a, &c).unwrap();
            let cb = hausdorff_distance(&c, &b).unwrap();
            assert!(ab <= ac + cb + 1e-12);
        }
    }

    #[test]
    fn rigid_shift_is_equality() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_hermitian(&mut rng, 6);
        let eps = 0.37;
        let b = &a + DMatrix::<C64>::identity(6, 6) * C64::new(eps, 0.0);
        let sa: Vec<f64> = a.symmetric_eigenvalues().iter().cloned().collect();
        let sb: Vec<f64> = b.symmetric_eigenvalues().iter().cloned().collect();
        assert!((hausdorff_distance(&sa, &sb).unwrap() - eps).abs() < 1e-12);
    }

    #[test]
    fn property_holds_and_is_reproducible() {
        let a = hausdorff_vs_norm_property(120, 8, 7, 1e-10).unwrap();
        let b = hausdorff_vs_norm_property(120, 8, 7, 1e-10).unwrap();
        assert!(a.pass && a.violations == 0);
        assert_eq!(a, b);
        assert!(hausdorff_vs_norm_property(10, 8, 7, 1e-10).is_err());
    }
}
