use crate::config::ExperimentConfig;
use crate::run::Outcome;
use anyhow::{Context, Result};
use lattice_limit_core::lattice::GridFunction;
use serde_json::json;
use std::fs;
use std::path::Path;

/// The report document. It holds no timestamps or timings, so identical
/// configurations give byte-identical files.
pub fn report_json(cfg: &ExperimentConfig, outcome: &Outcome) -> Result<String> {
    let reports: Vec<_> = outcome.series.iter().map(|s| &s.report).collect();
    let doc = json!({
        "experiment": cfg.experiment.name(),
        "pass": outcome.pass(),
        "config": cfg,
        "reports": reports,
        "checks": outcome.checks,
        "details": outcome.details,
    });
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

fn write_csv(path: &Path, outcome: &Outcome) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["h", "error", "bound"])?;
    for s in &outcome.series {
        for (i, (h, e)) in s.report.pairs.iter().enumerate() {
            let bound = s.bounds.as_ref().map(|b| b[i].to_string()).unwrap_or_default();
            w.write_record([h.to_string(), e.to_string(), bound])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `<name>.bin` holds little-endian `(re, im)` pairs in site order;
/// `<name>.json` holds `{d, h, N}`.
pub fn write_snapshot(dir: &Path, name: &str, grid: &GridFunction) -> Result<()> {
    fs::write(dir.join(format!("{name}.bin")), grid.to_le_bytes())?;
    let sidecar = json!({ "d": grid.spec.dimension, "h": grid.spec.h, "N": grid.spec.n });
    fs::write(dir.join(format!("{name}.json")), serde_json::to_string_pretty(&sidecar)? + "\n")?;
    Ok(())
}

pub fn write_outputs(dir: &Path, cfg: &ExperimentConfig, outcome: &Outcome) -> Result<()> {
    let grids = dir.join("grids");
    fs::create_dir_all(&grids).with_context(|| format!("cannot create {}", grids.display()))?;
    fs::write(dir.join("report.json"), report_json(cfg, outcome)?)?;
    write_csv(&dir.join("rates.csv"), outcome)?;
    for (name, grid) in &outcome.snapshots {
        write_snapshot(&grids, name, grid)?;
    }
    Ok(())
}
