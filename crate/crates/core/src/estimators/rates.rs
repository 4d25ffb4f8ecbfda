use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least squares of `log error` against `log h`.
pub fn rate_fit(pairs: &[(f64, f64)]) -> Result<RateFit> {
    if pairs.len() < 3 {
        return Err(Error::DegenerateFit(format!(
            "need at least 3 pairs, got {}",
            pairs.len()
        )));
    }
    if let Some(p) = pairs
        .iter()
        .find(|(h, e)| !(*h > 0.0 && *e > 0.0 && h.is_finite() && e.is_finite()))
    {
        return Err(Error::DegenerateFit(format!("non-positive entry {p:?}")));
    }
    let n = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx <= 1e-24 {
        return Err(Error::DegenerateFit("all mesh sizes coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let r2 = if ss_tot <= 1e-300 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(RateFit {
        slope,
        intercept,
        r2,
    })
}

/// Pass rule of a [`ConvergenceReport`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum RateCriterion {
    /// `|slope - target| ≤ tol` and `r2 ≥ min_r2`.
    Within { target: f64, tol: f64, min_r2: f64 },
    /// `slope ≥ min_slope` and `r2 ≥ min_r2`.
    AtLeast { min_slope: f64, min_r2: f64 },
    /// Errors non-increasing as `h` decreases, up to a relative `slack`, with the
    /// last error at most `final_max` when given.
    Decreasing { slack: f64, final_max: Option<f64> },
}

/// Outcome of an `h`-sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub experiment: String,
    /// `(h, error)` sorted by decreasing `h`.
    pub pairs: Vec<(f64, f64)>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub r2: Option<f64>,
    pub expected: Option<f64>,
    pub pass: bool,
    /// Indices of errors that were zero and clamped to the floor before fitting.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub clamped: Vec<usize>,
}

impl ConvergenceReport {
    /// Sorts, clamps zero errors to `floor`, fits when at least 3 pairs are
    /// present and applies `criterion`.
    pub fn new(experiment: &str, pairs: &[(f64, f64)], criterion: RateCriterion, floor: f64) -> Self {
        let mut pairs = pairs.to_vec();
        pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
        let mut clamped = Vec::new();
        for (i, p) in pairs.iter_mut().enumerate() {
            if p.1 <= 0.0 {
                p.1 = floor;
                clamped.push(i);
            }
        }
        let fit = rate_fit(&pairs).ok();
        let expected = match criterion {
            RateCriterion::Within { target, .. } => Some(target),
            RateCriterion::AtLeast { min_slope, .. } => Some(min_slope),
            RateCriterion::Decreasing { .. } => None,
        };
        let pass = match (criterion, fit) {
            (RateCriterion::Within { target, tol, min_r2 }, Some(f)) => {
                (f.slope - target).abs() <= tol && f.r2 >= min_r2
            }
            (RateCriterion::AtLeast { min_slope, min_r2 }, Some(f)) => f.slope >= min_slope && f.r2 >= min_r2,
            (RateCriterion::Decreasing { slack, final_max }, _) => {
                !pairs.is_empty()
                    && pairs.windows(2).all(|w| w[1].1 <= w[0].1 * (1.0 + slack))
                    && final_max.is_none_or(|m| pairs.last().is_some_and(|p| p.1 <= m))
            }
            _ => false,
        };
        Self {
            experiment: experiment.to_string(),
            pairs,
            slope: fit.map(|f| f.slope),
            intercept: fit.map(|f| f.intercept),
            r2: fit.map(|f| f.r2),
            expected,
            pass,
            clamped,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dyadic(k: std::ops::RangeInclusive<i32>) -> Vec<f64> {
        k.map(|j| 0.5f64.powi(j)).collect()
    }

    #[test]
    fn exact_power_law() {
        let pairs: Vec<_> = dyadic(3..=8).into_iter().map(|h| (h, 7.0 * h * h)).collect();
        let f = rate_fit(&pairs).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-10);
        assert!((f.intercept - 7f64.ln()).abs() < 1e-10);
        assert!((f.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_errors() {
        let pairs: Vec<_> = dyadic(1..=4).into_iter().map(|h| (h, 0.3)).collect();
        let f = rate_fit(&pairs).unwrap();
        assert!(f.slope.abs() < 1e-12);
    }

    #[test]
    fn noisy_half_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let pairs: Vec<_> = dyadic(2..=12)
            .into_iter()
            .map(|h| (h, h.sqrt() * (1.0 + 0.01 * rng.random_range(-1.0..1.0))))
            .collect();
        let f = rate_fit(&pairs).unwrap();
        assert!((f.slope - 0.5).abs() <= 0.02);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(rate_fit(&[(0.1, 1.0), (0.05, 0.5)]).is_err());
        assert!(rate_fit(&[(0.1, 1.0), (0.05, 0.0), (0.025, 0.1)]).is_err());
        assert!(rate_fit(&[(0.1, 1.0), (0.1, 0.5), (0.1, 0.1)]).is_err());
    }

    #[test]
    fn report_json_shape() {
        let pairs = [(0.25, 0.0625), (0.5, 0.25), (0.125, 0.015625)];
        let crit = RateCriterion::Within {
            target: 2.0,
            tol: 0.1,
            min_r2: 0.99,
        };
        let r = ConvergenceReport::new("free-1", &pairs, crit, 1e-14);
        assert!(r.pass);
        assert_eq!(r.pairs[0].0, 0.5);
        let v: serde_json::Value = serde_json::to_value(&r).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["expected", "experiment", "intercept", "pairs", "pass", "r2", "slope"]);
        assert_eq!(v["pairs"][0], serde_json::json!([0.5, 0.25]));
    }

    #[test]
    fn clamping_and_rules() {
        let r = ConvergenceReport::new(
            "x",
            &[(0.5, 1e-3), (0.25, 0.0), (0.125, 1e-5)],
            RateCriterion::AtLeast {
                min_slope: 0.0,
                min_r2: 0.0,
            },
            1e-12,
        );
        assert_eq!(r.clamped, vec![1]);
        assert_eq!(r.pairs[1].1, 1e-12);
        let dec = RateCriterion::Decreasing {
            slack: 0.05,
            final_max: Some(0.05),
        };
        assert!(ConvergenceReport::new("p", &[(0.2, 0.1), (0.1, 0.04), (0.05, 0.02)], dec, 0.0).pass);
        assert!(!ConvergenceReport::new("p", &[(0.2, 0.1), (0.1, 0.2), (0.05, 0.02)], dec, 0.0).pass);
        assert!(!ConvergenceReport::new("p", &[(0.2, 0.1), (0.1, 0.09)], dec, 0.0).pass);
        let two = ConvergenceReport::new("p", &[(0.2, 0.1), (0.1, 0.01)], dec, 0.0);
        assert!(two.pass && two.slope.is_none());
    }
}
