use crate::error::{invalid, Result};
use crate::fourier::{digits, flatten, from_modes, to_modes, C64};
use crate::lattice::{GridFunction, LatticeSpec};
use crate::scaling::{unit_shifts, ScalingFunction};

/// `P_h` and `P_h^*` between a lattice and a refinement of the same box,
/// realized exactly in Fourier space: a plane wave `e^{2πiξ·x}` on the fine
/// grid is mapped to `φ̂(hξ)` times its lattice restriction, and `P_h^*` puts
/// the lattice mode `m` onto the fine modes `m + sN`, `s ∈ {-1, 0, 1}^d`, with
/// weights `φ̂(hξ_{m+sN})`.
#[derive(Clone, Debug)]
pub struct Embedding {
    lattice: LatticeSpec,
    fine: LatticeSpec,
    /// For each lattice mode position, the fine mode positions and weights.
    links: Vec<Vec<(usize, f64)>>,
}

impl Embedding {
    pub fn new(sf: &ScalingFunction, lattice: LatticeSpec, fine: LatticeSpec) -> Result<Self> {
        if sf.dimension != lattice.dimension {
            return invalid("scaling function and lattice dimensions differ");
        }
        lattice.refinement_of(&fine)?;
        let d = lattice.dimension;
        let (n, nf) = (lattice.n as i64, fine.n as i64);
        let shifts = unit_shifts(d);
        let mut idx = vec![0usize; d];
        let mut pos = vec![0usize; d];
        let mut arg = vec![0.0; d];
        let links = (0..lattice.len())
            .map(|flat| {
                digits(flat, lattice.n, &mut idx);
                let mut out = Vec::new();
                'shift: for s in &shifts {
                    for a in 0..d {
                        let k = idx[a] as i64 - n / 2 + s[a] * n;
                        if k < -nf / 2 || k >= nf / 2 {
                            continue 'shift;
                        }
                        pos[a] = (k + nf / 2) as usize;
                        arg[a] = k as f64 / n as f64;
                    }
                    let w = sf.phi_hat(&arg);
                    if w != 0.0 {
                        out.push((flatten(&pos, fine.n), w));
                    }
                }
                out
            })
            .collect();
        Ok(Self { lattice, fine, links })
    }

    pub fn lattice(&self) -> &LatticeSpec {
        &self.lattice
    }

    pub fn fine(&self) -> &LatticeSpec {
        &self.fine
    }

    /// `P_h` on raw fine-grid values.
    pub fn analyze(&self, u: &[C64]) -> Vec<C64> {
        let c = to_modes(u, self.fine.n, self.fine.dimension);
        let coeffs: Vec<C64> = self
            .links
            .iter()
            .map(|l| l.iter().map(|&(p, w)| c[p] * w).sum())
            .collect();
        from_modes(&coeffs, self.lattice.n, self.lattice.dimension)
    }

    /// `P_h^*` on raw lattice values.
    pub fn synthesize(&self, v: &[C64]) -> Vec<C64> {
        let d = to_modes(v, self.lattice.n, self.lattice.dimension);
        let mut c = vec![C64::new(0.0, 0.0); self.fine.len()];
        for (l, dm) in self.links.iter().zip(&d) {
            for &(p, w) in l {
                c[p] = dm * w;
            }
        }
        from_modes(&c, self.fine.n, self.fine.dimension)
    }

    pub fn apply(&self, u: &GridFunction) -> Result<GridFunction> {
        if u.spec != self.fine {
            return invalid("input does not live on the fine grid of this embedding");
        }
        GridFunction::new(self.lattice, self.analyze(&u.values))
    }

    pub fn apply_adjoint(&self, v: &GridFunction) -> Result<GridFunction> {
        if v.spec != self.lattice {
            return invalid("input does not live on the lattice of this embedding");
        }
        GridFunction::new(self.fine, self.synthesize(&v.values))
    }
}

/// `P_h u(z) = h^{-d} ∫ φ((x - z)/h) u(x) dx` for `u` on a refinement of `target`.
pub fn p_h_apply(u: &GridFunction, sf: &ScalingFunction, target: &LatticeSpec) -> Result<GridFunction> {
    Embedding::new(sf, *target, u.spec)?.apply(u)
}

/// `P_h^* v(x) = Σ_z φ((x - z)/h) v(z)`, sampled on `fine`.
pub fn p_h_star_apply(v: &GridFunction, sf: &ScalingFunction, fine: &LatticeSpec) -> Result<GridFunction> {
    Embedding::new(sf, v.spec, *fine)?.apply_adjoint(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn random(spec: LatticeSpec, rng: &mut ChaCha8Rng) -> GridFunction {
        GridFunction::from_fn(spec, |_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    #[test]
    fn isometry_and_projection() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in 1..=2 {
            let sf = ScalingFunction::meyer(d);
            let lat = LatticeSpec::new(d, 0.25, 16).unwrap();
            let fine = lat.refine(4).unwrap();
            let e = Embedding::new(&sf, lat, fine).unwrap();
            for _ in 0..5 {
                let v = random(lat, &mut rng);
                let w = e.apply_adjoint(&v).unwrap();
                assert!((w.norm() - v.norm()).abs() < 1e-10 * v.norm());
                let back = e.apply(&w).unwrap();
                for (a, b) in back.values.iter().zip(&v.values) {
                    assert!((a - b).norm() < 1e-10);
                }
                let u = random(fine, &mut rng);
                let lhs = e.apply(&u).unwrap().inner(&v);
                let rhs = u.inner(&w);
                assert!((lhs - rhs).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn translate_of_phi() {
        let sf = ScalingFunction::meyer(1);
        let lat = LatticeSpec::new(1, 0.5, 16).unwrap();
        let fine = lat.refine(8).unwrap();
        let z0 = 5;
        let w = p_h_star_apply(&GridFunction::delta(lat, z0), &sf, &fine).unwrap();
        let zx = lat.site(z0)[0];
        let l = lat.extent();
        for (j, val) in w.values.iter().enumerate() {
            let x = fine.site(j)[0];
            // periodized φ((x - z0)/h); φ decays like |y|^-5 so a few images suffice
            let expect: f64 = (-20..=20)
                .map(|p| sf.phi_1d((x - zx + p as f64 * l) / lat.h))
                .sum();
            assert!((val.re - expect).abs() < 1e-6 && val.im.abs() < 1e-12, "j={j}");
        }
        let back = p_h_apply(&w, &sf, &lat).unwrap();
        for (j, v) in back.values.iter().enumerate() {
            let target = if j == z0 { 1.0 } else { 0.0 };
            assert!((v - target).norm() <= 1e-8);
        }
        assert!(p_h_star_apply(&GridFunction::zeros(lat), &sf, &fine)
            .unwrap()
            .values
            .iter()
            .all(|v| v.norm() == 0.0));
    }

    #[test]
    fn plane_wave_multiplier() {
        let sf = ScalingFunction::meyer(1);
        let lat = LatticeSpec::new(1, 0.25, 16).unwrap();
        let fine = lat.refine(4).unwrap();
        let l = lat.extent();
        for k in [0i64, 3, -5, 9, -11, 20] {
            let xi = k as f64 / l;
            let u = GridFunction::from_fn(fine, |x| C64::from_polar(1.0, 2.0 * PI * xi * x[0]));
            let v = p_h_apply(&u, &sf, &lat).unwrap();
            let w = sf.phi_hat(&[lat.h * xi]);
            for (j, val) in v.values.iter().enumerate() {
                let expect = C64::from_polar(w, 2.0 * PI * xi * lat.site(j)[0]);
                assert!((val - expect).norm() < 1e-12, "k={k}");
            }
        }
    }

    #[test]
    fn incompatible_grids_rejected() {
        let sf = ScalingFunction::meyer(1);
        let lat = LatticeSpec::new(1, 0.25, 16).unwrap();
        assert!(Embedding::new(&sf, lat, lat.refine(2).unwrap()).is_err());
        assert!(Embedding::new(&sf, lat, LatticeSpec::new(1, 0.05, 64).unwrap()).is_err());
        assert!(Embedding::new(&ScalingFunction::meyer(2), lat, lat.refine(4).unwrap()).is_err());
        let e = Embedding::new(&sf, lat, lat.refine(4).unwrap()).unwrap();
        assert!(e.apply(&GridFunction::zeros(lat)).is_err());
    }
}
