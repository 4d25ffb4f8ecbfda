use crate::error::{invalid, Result};
use crate::lattice::LatticeSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Closed-form potentials. Oscillating kinds use the phase `2π w Σ_j x_j`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialKind {
    Constant { value: f64 },
    /// `2 + sin(2π w Σx)`.
    BoundedUc { wavenumber: f64 },
    /// `2 + |sin(2π w Σx)|^α`, `α ∈ (0, 1]`.
    Hoelder { alpha: f64, wavenumber: f64 },
    /// `a (1 + |x|^2)^{κ/2}`.
    Growth { a: f64, kappa: f64 },
    /// `a |x|^2`.
    Quadratic { a: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialSpec {
    #[serde(flatten)]
    pub kind: PotentialKind,
    /// Overrides the default offset `max(0, 1 - inf V)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
}

impl From<PotentialKind> for PotentialSpec {
    fn from(kind: PotentialKind) -> Self {
        Self { kind, offset: None }
    }
}

impl PotentialSpec {
    pub fn zero() -> Self {
        PotentialKind::Constant { value: 0.0 }.into()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let r2 = || x.iter().map(|t| t * t).sum::<f64>();
        let phase = |w: f64| 2.0 * PI * w * x.iter().sum::<f64>();
        match self.kind {
            PotentialKind::Constant { value } => value,
            PotentialKind::BoundedUc { wavenumber } => 2.0 + phase(wavenumber).sin(),
            PotentialKind::Hoelder { alpha, wavenumber } => 2.0 + phase(wavenumber).sin().abs().powf(alpha),
            PotentialKind::Growth { a, kappa } => a * (1.0 + r2()).powf(0.5 * kappa),
            PotentialKind::Quadratic { a } => a * r2(),
        }
    }

    pub fn infimum(&self) -> f64 {
        match self.kind {
            PotentialKind::Constant { value } => value,
            PotentialKind::BoundedUc { .. } => 1.0,
            PotentialKind::Hoelder { .. } => 2.0,
            PotentialKind::Growth { a, .. } => a,
            PotentialKind::Quadratic { .. } => 0.0,
        }
    }

    /// `M ≥ 0` with `V + M ≥ 1`.
    pub fn offset(&self) -> f64 {
        self.offset.unwrap_or((1.0 - self.infimum()).max(0.0))
    }

    /// Exponent `α` with `|V(x) - V(y)| ≤ C|x - y|^α` on bounded sets.
    pub fn hoelder_exponent(&self) -> f64 {
        match self.kind {
            PotentialKind::Hoelder { alpha, .. } => alpha,
            _ => 1.0,
        }
    }

    /// Checks parameters and, for oscillating kinds, that the period fits the
    /// box of side `extent` so the periodic realization stays continuous.
    pub fn validate(&self, extent: Option<f64>) -> Result<()> {
        let check_w = |w: f64| -> Result<()> {
            if !(w.is_finite() && w >= 0.0) {
                return invalid(format!("wavenumber must be non-negative, got {w}"));
            }
            if let Some(l) = extent {
                let cycles = w * l;
                if (cycles - cycles.round()).abs() > 1e-9 * cycles.max(1.0) {
                    return invalid(format!(
                        "wavenumber {w} is not commensurate with box extent {l}"
                    ));
                }
            }
            Ok(())
        };
        match self.kind {
            PotentialKind::Constant { value } if !value.is_finite() => {
                return invalid("constant potential must be finite")
            }
            PotentialKind::BoundedUc { wavenumber } => check_w(wavenumber)?,
            PotentialKind::Hoelder { alpha, wavenumber } => {
                if !(alpha > 0.0 && alpha <= 1.0) {
                    return invalid(format!("Hölder exponent must lie in (0, 1], got {alpha}"));
                }
                check_w(wavenumber)?
            }
            PotentialKind::Growth { a, kappa } => {
                if !(a > 0.0 && kappa > 0.0 && a.is_finite() && kappa.is_finite()) {
                    return invalid("growth potential needs a > 0 and kappa > 0");
                }
            }
            PotentialKind::Quadratic { a }
                if !(a > 0.0 && a.is_finite()) => {
                    return invalid("quadratic potential needs a > 0");
                }
            _ => {}
        }
        if let Some(m) = self.offset {
            if !(m >= 0.0 && self.infimum() + m >= 1.0 - 1e-12) {
                return invalid(format!("offset {m} does not make V + M >= 1"));
            }
        }
        Ok(())
    }

    pub fn samples(&self, spec: &LatticeSpec) -> Vec<f64> {
        (0..spec.len()).map(|i| self.eval(&spec.site(i))).collect()
    }

    /// Sampled `c_1 = sup (V(y) + M) / (V(x) + M)` over pairs with `|x - y| ≤ 1`
    /// inside the box `[-extent/2, extent/2)^d`.
    pub fn comparability_constant(&self, dimension: usize, extent: f64, pairs: usize, seed: u64) -> f64 {
        let m = self.offset();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let half = 0.5 * extent;
        let mut worst: f64 = 1.0;
        let mut x = vec![0.0; dimension];
        let mut y = vec![0.0; dimension];
        let mut done = 0;
        while done < pairs {
            let mut dir2: f64 = 0.0;
            for a in 0..dimension {
                x[a] = rng.random_range(-half..half);
                y[a] = rng.random_range(-1.0..1.0);
                dir2 += y[a] * y[a];
            }
            if dir2 == 0.0 {
                continue;
            }
            let r: f64 = rng.random_range(0.0..=1.0);
            let s = r / dir2.sqrt();
            let mut inside = true;
            for a in 0..dimension {
                y[a] = x[a] + s * y[a];
                inside &= y[a] >= -half && y[a] < half;
            }
            if !inside {
                continue;
            }
            let (vx, vy) = (self.eval(&x) + m, self.eval(&y) + m);
            worst = worst.max(vy / vx).max(vx / vy);
            done += 1;
        }
        worst
    }
}
