use crate::error::Result;
use crate::estimators::{op_norm, LinearMap, NormOptions};
use crate::fourier::C64;
use crate::lattice::{solve_shifted, LatticeHamiltonian, LatticeSpec, PotentialSpec, SolverOptions};
use crate::symbols::ResolventProbe;
use rayon::prelude::*;
use serde::Serialize;

/// `u ↦ V (H_h - μ)^{-1} u`.
struct PotentialTimesResolvent {
    op: LatticeHamiltonian,
    mu: C64,
    solver: SolverOptions,
}

impl LinearMap for PotentialTimesResolvent {
    fn dim_in(&self) -> usize {
        self.op.potential().len()
    }
    fn dim_out(&self) -> usize {
        self.op.potential().len()
    }
    fn apply(&self, x: &[C64]) -> Result<Vec<C64>> {
        let (mut y, _) = solve_shifted(&self.op, self.mu, x, &self.solver)?;
        for (v, p) in y.iter_mut().zip(self.op.potential()) {
            *v *= p;
        }
        Ok(y)
    }
    fn apply_adjoint(&self, y: &[C64]) -> Result<Vec<C64>> {
        let vy: Vec<C64> = y.iter().zip(self.op.potential()).map(|(v, p)| v * p).collect();
        Ok(solve_shifted(&self.op, self.mu.conj(), &vy, &self.solver)?.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RelativeBoundTable {
    /// `(h, ‖V (H_h - μ)^{-1}‖)`.
    pub rows: Vec<(f64, f64)>,
    /// `max / min` of the norms.
    pub ratio: f64,
}

impl RelativeBoundTable {
    pub fn bounded(&self, max_ratio: f64) -> bool {
        self.ratio <= max_ratio
    }
}

/// `‖V (H_h - μ)^{-1}‖` on boxes of side `extent` for each `h`.
pub fn uniform_relative_boundedness(
    pot: &PotentialSpec,
    probe: &ResolventProbe,
    h_list: &[f64],
    dimension: usize,
    extent: f64,
    solver: &SolverOptions,
    opts: &NormOptions,
) -> Result<RelativeBoundTable> {
    let rows = h_list
        .par_iter()
        .map(|&h| -> Result<(f64, f64)> {
            let spec = LatticeSpec::with_extent(dimension, extent, h)?;
            let map = PotentialTimesResolvent {
                op: LatticeHamiltonian::new(spec, pot),
                mu: probe.mu(),
                solver: *solver,
            };
            Ok((h, op_norm(&map, opts)?.value))
        })
        .collect::<Result<Vec<_>>>()?;
    let max = rows.iter().map(|r| r.1).fold(0.0, f64::max);
    let min = rows.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
    Ok(RelativeBoundTable { rows, ratio: max / min })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::PotentialKind;

    #[test]
    fn constant_potential_norm() {
        let pot: PotentialSpec = PotentialKind::Constant { value: 1.0 }.into();
        let t = uniform_relative_boundedness(
            &pot,
            &ResolventProbe::default(),
            &[0.25, 0.125, 0.0625],
            1,
            4.0,
            &SolverOptions::default(),
            &NormOptions::default(),
        )
        .unwrap();
        for (_, v) in &t.rows {
            // V (H_0h + 1 + 1)^{-1} has norm 1/2 attained on constants
            assert!((v - 0.5).abs() < 1e-6 && *v <= 1.0);
        }
        assert!(t.bounded(10.0));
    }
}
