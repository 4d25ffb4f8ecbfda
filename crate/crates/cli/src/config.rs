use lattice_limit_core::estimators::{default_resolvent_shift, SpectralWindow};
use lattice_limit_core::lattice::{LatticeSpec, PotentialSpec};
use lattice_limit_core::scaling::ScalingFunction;
use lattice_limit_core::symbols::ResolventProbe;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    PhiCheck,
    FreeRates,
    CommutatorRates,
    ResolventRates,
    Spectrum,
    Projection,
    Hausdorff,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Self::PhiCheck => "phi-check",
            Self::FreeRates => "free-rates",
            Self::CommutatorRates => "commutator-rates",
            Self::ResolventRates => "resolvent-rates",
            Self::Spectrum => "spectrum",
            Self::Projection => "projection",
            Self::Hausdorff => "hausdorff",
        }
    }

    /// Experiments that sweep `h_list` and fit a trend.
    pub fn is_sweep(self) -> bool {
        !matches!(self, Self::PhiCheck | Self::Hausdorff)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    pub dimension: usize,
    /// Side of the periodic box.
    pub extent: f64,
    /// Fine-to-lattice mesh ratio of the continuum reference.
    pub refinement: usize,
}

impl Default for LatticeConfig {
    fn default() -> Self {
        Self {
            dimension: 1,
            extent: 4.0,
            refinement: 8,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative residual of every linear solve.
    pub solver: f64,
    /// Relative accuracy of operator norm estimates.
    pub norm: f64,
    /// Eigenpair residual, relative to `max(1, |λ|)`.
    pub eigen: f64,
    /// Relative change at which a fiber sup counts as grid converged.
    pub fiber: f64,
    /// Slack on `d_H ≤ ‖A - B‖` in the Hausdorff trials.
    pub hausdorff: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            solver: 1e-8,
            norm: 1e-6,
            eigen: 1e-8,
            fiber: 1e-3,
            hausdorff: 1e-10,
        }
    }
}

fn default_gamma() -> f64 {
    0.9
}
fn default_n_decay() -> f64 {
    4.0
}
fn default_k() -> usize {
    8
}
fn default_trials() -> usize {
    1000
}
fn default_size() -> usize {
    20
}

/// A single experiment. After [`ExperimentConfig::resolve`] every optional
/// field is filled, so the serialized form lists every value used.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    #[serde(default)]
    pub lattice: LatticeConfig,
    #[serde(default)]
    pub potential: Option<PotentialSpec>,
    #[serde(default)]
    pub probe: ResolventProbe,
    #[serde(default)]
    pub h_list: Vec<f64>,
    #[serde(default)]
    pub scaling: Option<ScalingFunction>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Energy window of the projection experiment.
    #[serde(default)]
    pub window: Option<SpectralWindow>,
    /// Number of eigenvalues compared in the spectrum experiment.
    #[serde(default = "default_k")]
    pub k: usize,
    /// Shift `M` of the resolvent spectrum map `λ ↦ (λ + M)^{-1}`.
    #[serde(default)]
    pub m_shift: Option<f64>,
    /// Exponent of the Schur cut-off `δ = h^γ`.
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    /// Kernel decay order used by the Schur majorant.
    #[serde(default = "default_n_decay")]
    pub n_decay: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default = "default_size")]
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

impl std::error::Error for ConfigError {}

/// First line mentioning `"key"`, or 1.
fn line_of(source: &str, key: &str) -> usize {
    let quoted = format!("\"{key}\"");
    source
        .lines()
        .position(|l| l.contains(&quoted))
        .map_or(1, |i| i + 1)
}

impl ExperimentConfig {
    /// Parses, fills defaults and validates.
    pub fn parse(source: &str) -> Result<Self, ConfigError> {
        let mut cfg: Self = serde_json::from_str(source).map_err(|e| ConfigError {
            line: e.line().max(1),
            message: e.to_string(),
        })?;
        cfg.resolve();
        cfg.validate().map_err(|(key, message)| ConfigError {
            line: line_of(source, key),
            message,
        })?;
        Ok(cfg)
    }

    pub fn resolve(&mut self) {
        let d = self.lattice.dimension;
        self.scaling.get_or_insert_with(|| ScalingFunction::meyer(d));
        let pot = *self.potential.get_or_insert_with(PotentialSpec::zero);
        self.m_shift.get_or_insert_with(|| default_resolvent_shift(&pot));
        if self.experiment == Experiment::Projection {
            self.window
                .get_or_insert_with(|| SpectralWindow::new(0.0, 2.0).expect("valid window"));
        }
    }

    pub fn scaling(&self) -> &ScalingFunction {
        self.scaling.as_ref().expect("resolved config")
    }

    pub fn potential(&self) -> &PotentialSpec {
        self.potential.as_ref().expect("resolved config")
    }

    pub fn lattice_at(&self, h: f64) -> lattice_limit_core::Result<LatticeSpec> {
        LatticeSpec::with_extent(self.lattice.dimension, self.lattice.extent, h)
    }

    /// Shared reference grid of the spectral experiments: the finest mesh
    /// divided by the refinement ratio.
    pub fn shared_reference(&self) -> lattice_limit_core::Result<LatticeSpec> {
        let finest = self.h_list.iter().cloned().fold(f64::INFINITY, f64::min);
        self.lattice_at(finest / self.lattice.refinement as f64)
    }

    /// Checks the invariants that serde cannot; errors name the offending key.
    fn validate(&self) -> Result<(), (&'static str, String)> {
        let lat = &self.lattice;
        if lat.dimension == 0 || lat.dimension > 3 {
            return Err(("dimension", format!("dimension must be 1, 2 or 3, got {}", lat.dimension)));
        }
        if !(lat.extent > 0.0 && lat.extent.is_finite()) {
            return Err(("extent", format!("extent must be positive, got {}", lat.extent)));
        }
        if lat.refinement < 4 {
            return Err(("refinement", format!("refinement must be at least 4, got {}", lat.refinement)));
        }
        let sf = self.scaling();
        sf.validate().map_err(|e| ("scaling", e.to_string()))?;
        if sf.dimension != lat.dimension {
            return Err((
                "scaling",
                format!("scaling dimension {} differs from lattice dimension {}", sf.dimension, lat.dimension),
            ));
        }
        self.potential()
            .validate(Some(lat.extent))
            .map_err(|e| ("potential", e.to_string()))?;

        let tol = &self.tolerances;
        for (name, v) in [
            ("solver", tol.solver),
            ("norm", tol.norm),
            ("eigen", tol.eigen),
            ("fiber", tol.fiber),
        ] {
            if !(v > 0.0 && v < 1.0) {
                return Err(("tolerances", format!("tolerance {name} must lie in (0, 1), got {v}")));
            }
        }
        if !(tol.hausdorff >= 0.0) {
            return Err(("tolerances", format!("hausdorff slack must be non-negative, got {}", tol.hausdorff)));
        }

        if self.experiment.is_sweep() {
            if self.h_list.len() < 3 {
                return Err(("h_list", format!("h_list needs at least 3 entries, got {}", self.h_list.len())));
            }
            for (i, &h) in self.h_list.iter().enumerate() {
                if !(h > 0.0 && h.is_finite()) {
                    return Err(("h_list", format!("h_list[{i}] = {h} is not positive")));
                }
            }
            for (i, w) in self.h_list.windows(2).enumerate() {
                if !(w[1] < w[0]) {
                    return Err(("h_list", format!("h_list must be strictly decreasing at index {}", i + 1)));
                }
                if ((w[0] / w[1]) - 2.0).abs() > 1e-9 {
                    return Err(("h_list", format!("h_list must halve at each step, index {}", i + 1)));
                }
            }
            for &h in &self.h_list {
                let spec = self.lattice_at(h).map_err(|e| ("h_list", format!("h = {h}: {e}")))?;
                if self.experiment != Experiment::FreeRates {
                    spec.refine(lat.refinement).map_err(|e| ("h_list", format!("h = {h}: {e}")))?;
                }
            }
            if matches!(self.experiment, Experiment::Spectrum | Experiment::Projection) {
                let reference = self.shared_reference().map_err(|e| ("refinement", e.to_string()))?;
                for &h in &self.h_list {
                    self.lattice_at(h)
                        .and_then(|s| s.refinement_of(&reference))
                        .map_err(|e| ("h_list", format!("h = {h}: {e}")))?;
                }
            }
        }
        match self.experiment {
            Experiment::CommutatorRates => {
                if !(self.gamma > 0.0 && self.gamma < 1.0) {
                    return Err(("gamma", format!("gamma must lie in (0, 1), got {}", self.gamma)));
                }
                if !(self.n_decay > lat.dimension as f64) {
                    return Err(("n_decay", format!("n_decay must exceed the dimension, got {}", self.n_decay)));
                }
            }
            Experiment::Spectrum => {
                if self.k == 0 {
                    return Err(("k", "k must be at least 1".into()));
                }
                let m = self.m_shift.expect("resolved config");
                if !(self.potential().infimum() + m >= 1.0 - 1e-12) {
                    return Err(("m_shift", format!("m_shift {m} does not make H + M >= 1")));
                }
            }
            Experiment::Hausdorff => {
                if self.trials < 100 {
                    return Err(("trials", format!("trials must be at least 100, got {}", self.trials)));
                }
                if self.size == 0 {
                    return Err(("size", "size must be positive".into()));
                }
            }
            _ => {}
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_filled() {
        let cfg = ExperimentConfig::parse(r#"{"experiment": "phi-check", "seed": 1}"#).unwrap();
        assert_eq!(cfg.scaling(), &ScalingFunction::meyer(1));
        assert_eq!(cfg.potential(), &PotentialSpec::zero());
        assert_eq!(cfg.m_shift, Some(2.0));
        let json = serde_json::to_value(&cfg).unwrap();
        assert_eq!(json["tolerances"]["solver"], 1e-8);
        assert_eq!(json["probe"], serde_json::json!([-1.0, 0.0]));
        let again: ExperimentConfig = serde_json::from_value(json).unwrap();
        assert_eq!(again, cfg);
    }

    #[test]
    fn errors_carry_lines() {
        let missing_seed = "{\n  \"experiment\": \"phi-check\"\n}";
        let e = ExperimentConfig::parse(missing_seed).unwrap_err();
        assert!(e.message.contains("seed"), "{e}");

        let src = "{\n  \"experiment\": \"free-rates\",\n  \"seed\": 1,\n  \"h_list\": [0.125, 0.25, 0.0625]\n}";
        let e = ExperimentConfig::parse(src).unwrap_err();
        assert_eq!(e.line, 4);
        assert!(e.message.contains("decreasing"), "{e}");

        let src = "{\n  \"experiment\": \"free-rates\",\n  \"seed\": 1,\n  \"h_list\": [0.125, 0.0625]\n}";
        assert_eq!(ExperimentConfig::parse(src).unwrap_err().line, 4);

        let src = "{\n  \"experiment\": \"nope\",\n  \"seed\": 1\n}";
        assert_eq!(ExperimentConfig::parse(src).unwrap_err().line, 2);

        let src = "{\"experiment\": \"resolvent-rates\", \"seed\": 1,\n\"potential\": {\"kind\": \"hoelder\", \"alpha\": 0.5, \"wavenumber\": 0.3},\n\"h_list\": [0.125, 0.0625, 0.03125]}";
        let e = ExperimentConfig::parse(src).unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("commensurate"), "{e}");
    }

    #[test]
    fn unknown_fields_rejected() {
        let src = "{\"experiment\": \"phi-check\", \"seed\": 1, \"sed\": 2}";
        assert!(ExperimentConfig::parse(src).is_err());
    }
}
