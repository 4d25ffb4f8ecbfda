use crate::error::Result;
use crate::estimators::{op_norm, LinearMap, NormEstimate, NormOptions};
use crate::fourier::C64;
use crate::lattice::{
    solve_shifted, ContinuumHamiltonian, Embedding, LatticeHamiltonian, LatticeSpec, PotentialSpec, SolverOptions,
};
use crate::scaling::ScalingFunction;
use crate::symbols::ResolventProbe;

/// `u ↦ P_h^*(H_h - μ)^{-1} P_h u - (H - μ)^{-1} u` on the fine grid, with `H`
/// the spectral continuum reference.
pub struct ResolventDifferenceMap {
    embedding: Embedding,
    lattice: LatticeHamiltonian,
    continuum: ContinuumHamiltonian,
    mu: C64,
    solver: SolverOptions,
}

impl ResolventDifferenceMap {
    pub fn new(
        pot: &PotentialSpec,
        probe: &ResolventProbe,
        lattice: &LatticeSpec,
        fine: &LatticeSpec,
        sf: &ScalingFunction,
        solver: SolverOptions,
    ) -> Result<Self> {
        Ok(Self {
            embedding: Embedding::new(sf, *lattice, *fine)?,
            lattice: LatticeHamiltonian::new(*lattice, pot),
            continuum: ContinuumHamiltonian::new(*fine, pot),
            mu: probe.mu(),
            solver,
        })
    }

    fn apply_with(&self, mu: C64, u: &[C64]) -> Result<Vec<C64>> {
        let v = self.embedding.analyze(u);
        let (w, _) = solve_shifted(&self.lattice, mu, &v, &self.solver)?;
        let mut out = self.embedding.synthesize(&w);
        let (r, _) = solve_shifted(&self.continuum, mu, u, &self.solver)?;
        for (o, ri) in out.iter_mut().zip(&r) {
            *o -= ri;
        }
        Ok(out)
    }
}

impl LinearMap for ResolventDifferenceMap {
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
        self.apply_with(self.mu, x)
    }
    fn apply_adjoint(&self, y: &[C64]) -> Result<Vec<C64>> {
        self.apply_with(self.mu.conj(), y)
    }
}

/// `‖P_h^*(H_h - μ)^{-1} P_h - (H - μ)^{-1}‖` on the box of `lattice`, with the
/// continuum reference on `fine`.
pub fn resolvent_diff_norm(
    pot: &PotentialSpec,
    probe: &ResolventProbe,
    lattice: &LatticeSpec,
    fine: &LatticeSpec,
    sf: &ScalingFunction,
    solver: &SolverOptions,
    opts: &NormOptions,
) -> Result<NormEstimate> {
    let map = ResolventDifferenceMap::new(pot, probe, lattice, fine, sf, *solver)?;
    op_norm(&map, opts)
}
