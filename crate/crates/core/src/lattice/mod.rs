//! Periodic boxes standing in for `hZ^d` and `R^d`, and the operators realized
//! on them.
//!
//! A box with `n` points per axis and mesh `h` has sites `x_j = (j - n/2) h`.
//! The continuum reference lives on a refinement of the same box: mesh `h/r`,
//! `r n` points, lattice site `j` coinciding with fine site `r j`.

mod embedding;
mod operators;
mod potential;
mod relbound;
mod solve;

pub use embedding::{p_h_apply, p_h_star_apply, Embedding};
pub use operators::{
    adjoint_diff, apply_h0h, apply_hh, forward_diff, ContinuumHamiltonian, HermitianOperator,
    LatticeHamiltonian, Multiplication,
};
pub use potential::{PotentialKind, PotentialSpec};
pub use relbound::{uniform_relative_boundedness, RelativeBoundTable};
pub use solve::{resolvent_solve, solve_shifted, SolveStats, SolverOptions};

use crate::error::{invalid, Error, Result};
use crate::fourier::{digits, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeSpec {
    pub dimension: usize,
    pub h: f64,
    pub n: usize,
}

impl LatticeSpec {
    pub fn new(dimension: usize, h: f64, n: usize) -> Result<Self> {
        if dimension == 0 {
            return invalid("dimension must be at least 1");
        }
        if !(h > 0.0 && h.is_finite()) {
            return invalid(format!("mesh must be positive, got {h}"));
        }
        if n < 8 || !n.is_multiple_of(2) {
            return invalid(format!("points per axis must be even and at least 8, got {n}"));
        }
        Ok(Self { dimension, h, n })
    }

    /// Box of side `extent` with mesh `h`; `extent / h` must be an even integer.
    pub fn with_extent(dimension: usize, extent: f64, h: f64) -> Result<Self> {
        let ratio = extent / h;
        let n = ratio.round();
        if !(ratio.is_finite()) || (ratio - n).abs() > 1e-9 * ratio.max(1.0) {
            return invalid(format!("extent {extent} is not a multiple of h = {h}"));
        }
        Self::new(dimension, h, n as usize)
    }

    pub fn extent(&self) -> f64 {
        self.n as f64 * self.h
    }

    /// Number of sites, `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dimension as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Inner-product weight `h^d` per site.
    pub fn weight(&self) -> f64 {
        self.h.powi(self.dimension as i32)
    }

    pub fn refine(&self, ratio: usize) -> Result<Self> {
        if ratio == 0 {
            return invalid("refinement ratio must be positive");
        }
        Self::new(self.dimension, self.h / ratio as f64, self.n * ratio)
    }

    pub fn site(&self, flat: usize) -> Vec<f64> {
        let mut idx = vec![0usize; self.dimension];
        digits(flat, self.n, &mut idx);
        idx.iter()
            .map(|&j| (j as f64 - (self.n / 2) as f64) * self.h)
            .collect()
    }

    /// All site coordinates, row-major.
    pub fn sites(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.site(i)).collect()
    }

    /// Refinement ratio `r` of `fine` over `self`, requiring the same box and `r ≥ 4`.
    pub fn refinement_of(&self, fine: &LatticeSpec) -> Result<usize> {
        if fine.dimension != self.dimension {
            return Err(Error::IncompatibleGrids(format!(
                "dimensions {} and {}",
                self.dimension, fine.dimension
            )));
        }
        if !fine.n.is_multiple_of(self.n) {
            return Err(Error::IncompatibleGrids(format!(
                "{} fine points per axis is not a multiple of {}",
                fine.n, self.n
            )));
        }
        let r = fine.n / self.n;
        if (fine.h * r as f64 - self.h).abs() > 1e-12 * self.h {
            return Err(Error::IncompatibleGrids(format!(
                "box extents differ: {} vs {}",
                self.extent(),
                fine.extent()
            )));
        }
        if r < 4 {
            return Err(Error::IncompatibleGrids(format!(
                "refinement ratio {r} is below 4"
            )));
        }
        Ok(r)
    }
}

/// Complex samples over the sites of a [`LatticeSpec`].
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction {
    pub spec: LatticeSpec,
    pub values: Vec<C64>,
}

impl GridFunction {
    pub fn zeros(spec: LatticeSpec) -> Self {
        Self {
            spec,
            values: vec![C64::new(0.0, 0.0); spec.len()],
        }
    }

    pub fn new(spec: LatticeSpec, values: Vec<C64>) -> Result<Self> {
        if values.len() != spec.len() {
            return invalid(format!(
                "expected {} values, got {}",
                spec.len(),
                values.len()
            ));
        }
        Ok(Self { spec, values })
    }

    pub fn from_fn(spec: LatticeSpec, mut f: impl FnMut(&[f64]) -> C64) -> Self {
        let values = (0..spec.len()).map(|i| f(&spec.site(i))).collect();
        Self { spec, values }
    }

    /// Unit coefficient at site `flat`.
    pub fn delta(spec: LatticeSpec, flat: usize) -> Self {
        let mut g = Self::zeros(spec);
        g.values[flat] = C64::new(1.0, 0.0);
        g
    }

    pub fn norm(&self) -> f64 {
        (self.spec.weight() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    /// `⟨self, other⟩_h = h^d Σ self · conj(other)`.
    pub fn inner(&self, other: &GridFunction) -> C64 {
        self.spec.weight()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b.conj())
                .sum::<C64>()
    }

    /// Little-endian `(re, im)` pairs of 64-bit floats.
    pub fn to_le_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.values.len() * 16);
        for v in &self.values {
            out.extend_from_slice(&v.re.to_le_bytes());
            out.extend_from_slice(&v.im.to_le_bytes());
        }
        out
    }

    pub fn from_le_bytes(spec: LatticeSpec, bytes: &[u8]) -> Result<Self> {
        if bytes.len() != spec.len() * 16 {
            return invalid(format!(
                "expected {} bytes, got {}",
                spec.len() * 16,
                bytes.len()
            ));
        }
        let values = bytes
            .chunks_exact(16)
            .map(|c| {
                let re = f64::from_le_bytes(c[..8].try_into().unwrap());
                let im = f64::from_le_bytes(c[8..].try_into().unwrap());
                C64::new(re, im)
            })
            .collect();
        Ok(Self { spec, values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        assert!(LatticeSpec::new(1, 0.1, 6).is_err());
        assert!(LatticeSpec::new(1, 0.1, 9).is_err());
        assert!(LatticeSpec::new(1, 0.0, 8).is_err());
        assert!(LatticeSpec::new(0, 0.1, 8).is_err());
        let s = LatticeSpec::with_extent(2, 4.0, 0.125).unwrap();
        assert_eq!(s.n, 32);
        assert_eq!(s.len(), 1024);
        assert!((s.weight() - 0.125f64.powi(2)).abs() < 1e-15);
        assert!(LatticeSpec::with_extent(1, 4.0, 0.3).is_err());
    }

    #[test]
    fn sites_and_refinement() {
        let s = LatticeSpec::new(1, 0.5, 8).unwrap();
        assert_eq!(s.site(0), vec![-2.0]);
        assert_eq!(s.site(4), vec![0.0]);
        let f = s.refine(4).unwrap();
        assert_eq!(s.refinement_of(&f).unwrap(), 4);
        for j in 0..8 {
            assert!((f.site(4 * j)[0] - s.site(j)[0]).abs() < 1e-15);
        }
        assert!(s.refinement_of(&s.refine(2).unwrap()).is_err());
        let other = LatticeSpec::new(1, 0.1, 64).unwrap();
        assert!(s.refinement_of(&other).is_err());
        let s2 = LatticeSpec::new(2, 0.5, 8).unwrap();
        assert_eq!(s2.site(9), vec![-1.5, -1.5]);
    }

    #[test]
    fn bytes_roundtrip() {
        let s = LatticeSpec::new(1, 0.5, 8).unwrap();
        let g = GridFunction::from_fn(s, |x| C64::new(x[0], -2.0 * x[0] + 0.25));
        let b = g.to_le_bytes();
        assert_eq!(b.len(), 128);
        assert_eq!(&b[..8], &(-2.0f64).to_le_bytes());
        assert_eq!(GridFunction::from_le_bytes(s, &b).unwrap(), g);
        assert!(GridFunction::from_le_bytes(s, &b[1..]).is_err());
    }
}
