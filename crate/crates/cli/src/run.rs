use crate::config::{Experiment, ExperimentConfig};
use anyhow::{Context, Result};
use lattice_limit_core::estimators::*;
use lattice_limit_core::lattice::*;
use lattice_limit_core::scaling::{orthonormality_defect, partition_defect};
use lattice_limit_core::symbols::{converged_fiber_sup, FiberKind};
use lattice_limit_core::C64;
use log::info;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

/// One fitted series; `bounds` pairs with `report.pairs` when present.
pub struct Series {
    pub report: ConvergenceReport,
    pub bounds: Option<Vec<f64>>,
}

/// A scalar that must not exceed `limit`.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

impl Check {
    fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.to_string(),
            value,
            limit,
            pass: value <= limit,
        }
    }
}

pub struct Outcome {
    pub series: Vec<Series>,
    pub checks: Vec<Check>,
    pub details: Value,
    pub snapshots: Vec<(String, GridFunction)>,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.series.iter().all(|s| s.report.pass) && self.checks.iter().all(|c| c.pass)
    }
}

fn norm_options(cfg: &ExperimentConfig) -> NormOptions {
    NormOptions {
        tol: cfg.tolerances.norm,
        seed: cfg.seed,
        ..NormOptions::default()
    }
}

fn eigen_options(cfg: &ExperimentConfig) -> EigenOptions {
    EigenOptions {
        tol: cfg.tolerances.eigen,
        seed: cfg.seed,
        ..EigenOptions::default()
    }
}

fn solver_options(cfg: &ExperimentConfig) -> SolverOptions {
    SolverOptions::with_tol(cfg.tolerances.solver)
}

/// Maps `f` over `h_list` in parallel, tagging failures with the mesh.
fn sweep<T: Send>(cfg: &ExperimentConfig, f: impl Fn(f64) -> Result<T> + Sync) -> Result<Vec<T>> {
    cfg.h_list
        .par_iter()
        .map(|&h| f(h).with_context(|| format!("experiment {} failed at h = {h}", cfg.experiment.name())))
        .collect()
}

fn report(name: &str, h: &[f64], errors: &[f64], criterion: RateCriterion, floor: f64) -> ConvergenceReport {
    let pairs: Vec<(f64, f64)> = h.iter().cloned().zip(errors.iter().cloned()).collect();
    ConvergenceReport::new(name, &pairs, criterion, floor)
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    info!("experiment {} with seed {}", cfg.experiment.name(), cfg.seed);
    info!("tolerances {:?}", cfg.tolerances);
    match cfg.experiment {
        Experiment::PhiCheck => phi_check(cfg),
        Experiment::FreeRates => free_rates(cfg),
        Experiment::CommutatorRates => commutator_rates(cfg),
        Experiment::ResolventRates => resolvent_rates(cfg),
        Experiment::Spectrum => spectrum(cfg),
        Experiment::Projection => projection(cfg),
        Experiment::Hausdorff => hausdorff(cfg),
    }
}

fn empty(checks: Vec<Check>, details: Value) -> Outcome {
    Outcome {
        series: Vec::new(),
        checks,
        details,
        snapshots: Vec::new(),
    }
}

fn phi_check(cfg: &ExperimentConfig) -> Result<Outcome> {
    let sf = cfg.scaling();
    let points = [4096, 64, 16][sf.dimension - 1];
    let partition = partition_defect(sf, points)?;
    let orthonormality = orthonormality_defect(sf, 3, 4096)?;
    info!("partition defect {partition:.3e}, orthonormality defect {orthonormality:.3e}");
    Ok(empty(
        vec![
            Check::at_most("partition-defect", partition, 1e-10),
            Check::at_most("orthonormality-defect", orthonormality, 1e-8),
        ],
        json!({ "partition_grid_points": points, "orthonormality_shifts": 3 }),
    ))
}

fn free_rates(cfg: &ExperimentConfig) -> Result<Outcome> {
    let sf = cfg.scaling();
    let (start, max_points) = match sf.dimension {
        1 => (256, 1 << 14),
        2 => (64, 256),
        _ => (64, 64),
    };
    let rows = sweep(cfg, |h| {
        let mut out = Vec::new();
        for kind in [FiberKind::Free1, FiberKind::Free2] {
            out.push(converged_fiber_sup(kind, h, &cfg.probe, sf, start, cfg.tolerances.fiber, max_points)?);
        }
        Ok(out)
    })?;
    let within = RateCriterion::Within {
        target: 2.0,
        tol: 0.1,
        min_r2: 0.99,
    };
    let series = ["free-1", "free-2"]
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let errors: Vec<f64> = rows.iter().map(|r| r[i].value).collect();
            let report = report(name, &cfg.h_list, &errors, within, f64::MIN_POSITIVE);
            info!("{name}: slope {:?}, r2 {:?}", report.slope, report.r2);
            Series { report, bounds: None }
        })
        .collect();
    let details: Vec<Value> = cfg
        .h_list
        .iter()
        .zip(&rows)
        .map(|(h, r)| json!({ "h": h, "free_1": r[0], "free_2": r[1] }))
        .collect();
    Ok(Outcome {
        series,
        checks: Vec::new(),
        details: json!({ "rows": details }),
        snapshots: Vec::new(),
    })
}

fn potential_snapshot(cfg: &ExperimentConfig) -> Result<(String, GridFunction)> {
    let finest = cfg.h_list.iter().cloned().fold(f64::INFINITY, f64::min);
    let spec = cfg.lattice_at(finest)?;
    let pot = cfg.potential();
    Ok((
        "potential".to_string(),
        GridFunction::from_fn(spec, |x| C64::new(pot.eval(x), 0.0)),
    ))
}

fn commutator_rates(cfg: &ExperimentConfig) -> Result<Outcome> {
    let g = cfg.potential();
    let alpha = g.hoelder_exponent();
    let opts = norm_options(cfg);
    let rows = sweep(cfg, |h| {
        let s = commutator_rate(
            g,
            cfg.scaling(),
            &[h],
            cfg.lattice.extent,
            cfg.lattice.refinement,
            cfg.gamma,
            cfg.n_decay,
            &opts,
        )?;
        let row = s.rows[0];
        info!(
            "h = {h}: direct {:.4e}, K1 {:.4e}, K2 {:.4e}, R(delta) {:.4e}, majorant {:.4e}",
            row.direct, row.schur.k1, row.schur.k2, row.schur.modulus, row.schur.majorant
        );
        Ok(row)
    })?;
    let sweep = CommutatorSweep { rows };
    let direct = sweep.direct_report(
        "commutator-direct",
        RateCriterion::AtLeast {
            min_slope: alpha - 0.1,
            min_r2: 0.95,
        },
    );
    let schur = sweep.schur_report(
        "commutator-schur",
        RateCriterion::AtLeast {
            min_slope: alpha * cfg.gamma - 0.05,
            min_r2: 0.95,
        },
    );
    let worst = sweep
        .rows
        .iter()
        .map(|r| r.direct / r.schur.bound)
        .fold(0.0, f64::max);
    let bounds = Some(sweep.rows.iter().map(|r| r.schur.bound).collect());
    Ok(Outcome {
        series: vec![
            Series { report: direct, bounds },
            Series {
                report: schur,
                bounds: None,
            },
        ],
        checks: vec![Check::at_most("direct-over-schur", worst, 1.0)],
        details: json!({ "hoelder_exponent": alpha, "rows": sweep.rows }),
        snapshots: vec![potential_snapshot(cfg)?],
    })
}

fn resolvent_rates(cfg: &ExperimentConfig) -> Result<Outcome> {
    let pot = cfg.potential();
    let alpha = pot.hoelder_exponent();
    let c1 = pot.comparability_constant(cfg.lattice.dimension, cfg.lattice.extent, 10_000, cfg.seed);
    info!("potential offset {}, comparability constant c1 = {c1:.4}", pot.offset());
    let (solver, opts) = (solver_options(cfg), norm_options(cfg));
    let values = sweep(cfg, |h| {
        let lattice = cfg.lattice_at(h)?;
        let fine = lattice.refine(cfg.lattice.refinement)?;
        let e = resolvent_diff_norm(pot, &cfg.probe, &lattice, &fine, cfg.scaling(), &solver, &opts)?;
        info!("h = {h}: resolvent difference {:.4e} after {} iterations", e.value, e.iterations);
        Ok(e.value)
    })?;
    let rep = report(
        "resolvent-difference",
        &cfg.h_list,
        &values,
        RateCriterion::AtLeast {
            min_slope: alpha - 0.1,
            min_r2: 0.95,
        },
        cfg.tolerances.norm,
    );
    let table = uniform_relative_boundedness(
        pot,
        &cfg.probe,
        &cfg.h_list,
        cfg.lattice.dimension,
        cfg.lattice.extent,
        &solver,
        &opts,
    )
    .context("relative boundedness sweep failed")?;
    info!("relative bound max/min {:.4}", table.ratio);
    Ok(Outcome {
        series: vec![Series {
            report: rep,
            bounds: None,
        }],
        checks: vec![Check::at_most("relative-bound-ratio", table.ratio, 10.0)],
        details: json!({
            "hoelder_exponent": alpha,
            "offset": pot.offset(),
            "comparability_constant": c1,
            "relative_bound": table,
        }),
        snapshots: vec![potential_snapshot(cfg)?],
    })
}

fn eigen_snapshots(cfg: &ExperimentConfig, count: usize) -> Result<Vec<(String, GridFunction)>> {
    let finest = cfg.h_list.iter().cloned().fold(f64::INFINITY, f64::min);
    let spec = cfg.lattice_at(finest)?;
    let op = LatticeHamiltonian::new(spec, cfg.potential());
    let pairs = lowest_eigenpairs(&op, count, &eigen_options(cfg))?;
    // unit norm in the weighted inner product
    let scale = spec.weight().sqrt().recip();
    Ok(pairs
        .vectors
        .into_iter()
        .enumerate()
        .map(|(j, v)| {
            let values = v.into_iter().map(|z| z * scale).collect();
            (format!("eigenvector_{j}"), GridFunction::new(spec, values).expect("matching length"))
        })
        .collect())
}

fn spectrum(cfg: &ExperimentConfig) -> Result<Outcome> {
    let reference = cfg.shared_reference()?;
    let s = resolvent_spectrum_hausdorff(
        cfg.potential(),
        cfg.m_shift,
        &cfg.h_list,
        cfg.lattice.extent,
        cfg.k,
        &reference,
        &eigen_options(cfg),
    )
    .with_context(|| format!("experiment spectrum failed on reference mesh {}", reference.h))?;
    info!("M = {}, continuum floor {:.4e}", s.m_shift, s.continuum_floor);
    let rep = s.report(
        "resolvent-spectrum",
        RateCriterion::Decreasing {
            slack: 0.0,
            final_max: None,
        },
    );
    let mut snapshots = eigen_snapshots(cfg, cfg.k.min(4))?;
    snapshots.push(potential_snapshot(cfg)?);
    let boundary = s.rows.iter().map(|r| r.boundary_decay).fold(0.0, f64::max);
    Ok(Outcome {
        series: vec![Series {
            report: rep,
            bounds: None,
        }],
        checks: Vec::new(),
        details: json!({ "reference_h": reference.h, "max_boundary_decay": boundary, "sweep": s }),
        snapshots,
    })
}

fn projection(cfg: &ExperimentConfig) -> Result<Outcome> {
    let reference = cfg.shared_reference()?;
    let window = cfg.window.expect("resolved config");
    let opts = SpectralOptions {
        eigen: eigen_options(cfg),
        norm: norm_options(cfg),
        ..SpectralOptions::default()
    };
    let rows = sweep(cfg, |h| {
        let lattice = cfg.lattice_at(h)?;
        let d = spectral_projection_diff(cfg.potential(), &window, &lattice, &reference, cfg.scaling(), &opts)?;
        info!(
            "h = {h}: projection difference {:.4e}, ranks {}/{}",
            d.value,
            d.lattice_rank(),
            d.continuum_rank()
        );
        Ok(d)
    })?;
    let values: Vec<f64> = rows.iter().map(|d| d.value).collect();
    let rep = report(
        "projection-difference",
        &cfg.h_list,
        &values,
        RateCriterion::Decreasing {
            slack: 0.05,
            final_max: None,
        },
        f64::MIN_POSITIVE,
    );
    let largest = values.iter().cloned().fold(0.0, f64::max);
    let count = rows.iter().map(|d| d.lattice_rank()).max().unwrap_or(0).max(1);
    let mut snapshots = eigen_snapshots(cfg, count)?;
    snapshots.push(potential_snapshot(cfg)?);
    let details: Vec<Value> = cfg
        .h_list
        .iter()
        .zip(&rows)
        .map(|(h, d)| json!({ "h": h, "result": d }))
        .collect();
    Ok(Outcome {
        series: vec![Series {
            report: rep,
            bounds: None,
        }],
        checks: vec![Check::at_most("projection-difference-max", largest, 1.0)],
        details: json!({ "reference_h": reference.h, "window": window, "rows": details }),
        snapshots,
    })
}

fn hausdorff(cfg: &ExperimentConfig) -> Result<Outcome> {
    let o = hausdorff_vs_norm_property(cfg.trials, cfg.size, cfg.seed, cfg.tolerances.hausdorff)?;
    info!(
        "{} trials of size {}: {} violations, worst excess {:.3e}",
        o.trials, o.size, o.violations, o.worst_excess
    );
    Ok(empty(
        vec![Check::at_most("violations", o.violations as f64, 0.0)],
        json!({ "outcome": o }),
    ))
}
