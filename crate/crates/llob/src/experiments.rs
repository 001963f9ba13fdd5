//! Named experiments: each one produces the data table behind one model
//! figure as CSV, plus a run manifest. Outputs are deterministic — a rerun
//! with the same config and seed writes byte-identical files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;

use crate::book::{evolve_book, bid_ask, BookProfile, Grid1D};
use crate::config::ExperimentConfig;
use crate::csvio::Table;
use crate::decomposition::{
    informational_after, informational_component, mechanical_after, mechanical_during,
    InfoKernel, MechanicalModel,
};
use crate::error::{Error, Result};
use crate::expansion::{execution_cost, first_order_trajectory, leading_trajectory};
use crate::manipulation::random_round_trip_audit;
use crate::relaxation::{decay_trajectory, reversal_trajectory};
use crate::schedule::TradingSchedule;
use crate::shape::scaling_solution;
use crate::solver::{solve_a, solve_price_path, y_ratio};

pub const EXPERIMENTS: &[&str] = &[
    "stationary",
    "impact-sweep",
    "decay",
    "bidask",
    "book-shape",
    "reversal",
    "decomposition",
    "manipulate",
    "expansion-validity",
    "cost",
];

/// Everything a run produces. Only `tables` and the sorted scalar map end
/// up in files; the wall clock stays out of them so reruns stay
/// byte-identical.
#[derive(Debug)]
pub struct ExperimentResult {
    pub experiment: String,
    pub scalars: BTreeMap<String, f64>,
    pub tables: Vec<Table>,
    pub config_echo: Vec<(&'static str, String)>,
    pub artifact_version: &'static str,
    pub runtime: std::time::Duration,
}

pub fn run(name: &str, cfg: &ExperimentConfig) -> Result<ExperimentResult> {
    let start = Instant::now();
    let (scalars, tables) = match name {
        "stationary" => stationary(cfg)?,
        "impact-sweep" => impact_sweep(cfg)?,
        "decay" => decay(cfg)?,
        "bidask" => bidask(cfg)?,
        "book-shape" => book_shape(cfg)?,
        "reversal" => reversal(cfg)?,
        "decomposition" => decomposition(cfg)?,
        "manipulate" => manipulate(cfg)?,
        "expansion-validity" => expansion_validity(cfg)?,
        "cost" => cost(cfg)?,
        other => return Err(Error::UnknownExperiment(other.to_string())),
    };
    Ok(ExperimentResult {
        experiment: name.to_string(),
        scalars,
        tables,
        config_echo: cfg.entries(),
        artifact_version: env!("CARGO_PKG_VERSION"),
        runtime: start.elapsed(),
    })
}

/// Write every table plus `manifest.txt` into `dir` (created if missing).
pub fn write_result(result: &ExperimentResult, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for table in &result.tables {
        written.push(table.write(dir)?);
    }
    let mut manifest = String::new();
    manifest.push_str(&format!("experiment={}\n", result.experiment));
    manifest.push_str(&format!("artifact_version={}\n", result.artifact_version));
    for (k, v) in &result.config_echo {
        manifest.push_str(&format!("config.{k}={v}\n"));
    }
    for (k, v) in &result.scalars {
        manifest.push_str(&format!("result.{k}={v}\n"));
    }
    for table in &result.tables {
        manifest.push_str(&format!("file.{}={} rows\n", table.name, table.rows.len()));
    }
    let path = dir.join("manifest.txt");
    std::fs::write(&path, manifest)?;
    written.push(path);
    Ok(written)
}

type Output = (BTreeMap<String, f64>, Vec<Table>);

fn scalars(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

/// Constant-rate execution: the marched price path with its per-step
/// residuals.
fn stationary(cfg: &ExperimentConfig) -> Result<Output> {
    let params = cfg.params()?;
    let schedule = TradingSchedule::constant(cfg.m0, cfg.t_total);
    let path = solve_price_path(&schedule, &params, &cfg.solver_config()?)?;
    let mut table = Table::new("stationary.csv", &["t", "y", "residual"]);
    for i in 0..path.len() {
        table.push(vec![path.times[i], path.y[i], path.residual[i]]);
    }
    let a = solve_a(cfg.m0 / cfg.j)?;
    let y_end = *path.y.last().unwrap_or(&f64::NAN);
    let s = scalars(&[
        ("A", a),
        ("y_end", y_end),
        ("y_end_over_sqrt_dt", y_end / (params.d * cfg.t_total).sqrt()),
    ]);
    Ok((s, vec![table]))
}

/// Impact amplitude across participation rates; the sweep fans out over
/// the worker pool.
fn impact_sweep(cfg: &ExperimentConfig) -> Result<Output> {
    if cfg.n_points < 2 {
        return Err(Error::Config("n_points must be >= 2".into()));
    }
    let ratios: Vec<f64> = (0..cfg.n_points)
        .map(|k| {
            let f = k as f64 / (cfg.n_points - 1) as f64;
            10f64.powf(cfg.rate_lo + (cfg.rate_hi - cfg.rate_lo) * f)
        })
        .collect();
    let rows: Vec<Result<Vec<f64>>> = ratios
        .par_iter()
        .map(|&r| Ok(vec![r, solve_a(r)?, y_ratio(r)?]))
        .collect();
    let mut table = Table::new("impact_sweep.csv", &["rate_ratio", "A", "y_ratio"]);
    for row in rows {
        table.push(row?);
    }
    let last = table.rows.last().unwrap();
    let s = scalars(&[("y_ratio_at_hi", last[2]), ("rate_hi", last[0])]);
    Ok((s, vec![table]))
}

/// Impact during and after a constant-rate execution, normalized by the
/// peak y(T).
fn decay(cfg: &ExperimentConfig) -> Result<Output> {
    let params = cfg.params()?;
    let solver_cfg = cfg.solver_config()?;
    if cfg.t_max <= cfg.t_total {
        return Err(Error::Config("t_max must exceed t_total".into()));
    }
    let schedule = TradingSchedule::constant(cfg.m0, cfg.t_total);
    let during = solve_price_path(&schedule, &params, &solver_cfg)?;
    let peak = *during.y.last().unwrap();
    // decay grid coarser than the marching step: each post-T point is an
    // independent fixed point
    let decay_cfg =
        crate::solver::SolverConfig { dt: (cfg.t_max - cfg.t_total) / 400.0, ..solver_cfg };
    let after = decay_trajectory(cfg.m0, cfg.t_total, cfg.t_max, &params, &decay_cfg)?;
    let mut table = Table::new("decay.csv", &["t", "impact_normalized"]);
    for i in 0..during.len() {
        table.push(vec![during.times[i], during.y[i] / peak]);
    }
    for i in 0..after.len() {
        table.push(vec![after.times[i], after.y[i] / peak]);
    }
    let s = scalars(&[("y_peak", peak), ("y_final_normalized", after.y.last().unwrap() / peak)]);
    Ok((s, vec![table]))
}

/// Bid/ask quotes of the simulated book while trading and while the book
/// refills afterwards.
fn bidask(cfg: &ExperimentConfig) -> Result<Output> {
    let params = cfg.params()?;
    if cfg.t_max <= cfg.t_total {
        return Err(Error::Config("t_max must exceed t_total".into()));
    }
    let grid = Grid1D::new(cfg.half_width, cfg.n_grid)?;
    let initial = BookProfile::stationary(grid, &params);
    let n_on = (cfg.t_total / cfg.t_max * 100.0).round().max(1.0) as usize;
    let levels: Vec<f64> = (0..100).map(|k| if k < n_on { cfg.m0 } else { 0.0 }).collect();
    let schedule = TradingSchedule::piecewise_constant(&levels, cfg.t_max)?;
    let snapshot_times: Vec<f64> =
        (1..=100).map(|k| cfg.t_max * k as f64 / 100.0).collect();
    let evolution = evolve_book(&initial, &schedule, cfg.dt, &params, &snapshot_times)?;
    let mut table = Table::new("bidask.csv", &["t", "bid", "ask", "mid"]);
    for snap in &evolution.snapshots {
        let (bid, ask) = bid_ask(snap, cfg.q_depth)?;
        table.push(vec![snap.t, bid, ask, 0.5 * (bid + ask)]);
    }
    let (bid_end, ask_end) = bid_ask(evolution.snapshots.last().unwrap(), cfg.q_depth)?;
    let s = scalars(&[("final_spread", ask_end - bid_end)]);
    Ok((s, vec![table]))
}

/// Stationary scaling shape of the order-flow-deformed book.
fn book_shape(cfg: &ExperimentConfig) -> Result<Output> {
    let solution = scaling_solution(cfg.m0 / cfg.j)?;
    let mut table = Table::new("book_shape.csv", &["u", "F", "G", "H"]);
    for i in 0..solution.u.len() {
        table.push(vec![solution.u[i], solution.f[i], solution.g[i], solution.h[i]]);
    }
    let s = scalars(&[
        ("A", solution.a),
        ("F0", solution.f0),
        ("slope_below", solution.slope_below),
        ("slope_above", solution.slope_above),
    ]);
    Ok((s, vec![table]))
}

/// Buy-then-sell round trip: the full price path and the measured return
/// time past the rate flip.
fn reversal(cfg: &ExperimentConfig) -> Result<Output> {
    let params = cfg.params()?;
    let (path, return_time) =
        reversal_trajectory(cfg.m0, cfg.t_total, &params, &cfg.solver_config()?)?;
    let mut table = Table::new("reversal.csv", &["t", "y"]);
    for i in 0..path.len() {
        table.push(vec![path.times[i], path.y[i]]);
    }
    let s = scalars(&[
        ("return_time", return_time),
        ("return_lag", return_time - cfg.t_total),
        ("return_lag_over_t", (return_time - cfg.t_total) / cfg.t_total),
    ]);
    Ok((s, vec![table]))
}

/// Mechanical vs informational impact split for an informed constant-rate
/// order.
fn decomposition(cfg: &ExperimentConfig) -> Result<Output> {
    let params = cfg.params()?;
    let kernel = InfoKernel::new(cfg.gamma_info, cfg.zeta)?;
    if cfg.t_max <= cfg.t_total {
        return Err(Error::Config("t_max must exceed t_total".into()));
    }
    let n = 200usize;
    let times: Vec<f64> = (1..=n).map(|k| cfg.t_max * k as f64 / n as f64).collect();
    let rows: Vec<Result<Vec<f64>>> = times
        .par_iter()
        .map(|&t| {
            let (mech, info) = if t <= cfg.t_total {
                (
                    mechanical_during(cfg.m0, t, &params, MechanicalModel::Full)?,
                    informational_component(&kernel, cfg.m0, t),
                )
            } else {
                (
                    mechanical_after(cfg.m0, cfg.t_total, t, &params, MechanicalModel::Full)?,
                    informational_after(&kernel, cfg.m0, cfg.t_total, t),
                )
            };
            Ok(vec![t, mech, info, mech + info])
        })
        .collect();
    let mut table =
        Table::new("decomposition.csv", &["t", "mechanical", "informational", "total"]);
    for row in rows {
        table.push(row?);
    }
    let last = table.rows.last().unwrap();
    let q = cfg.m0 * cfg.t_total;
    let s = scalars(&[
        ("plateau", kernel.gamma * q),
        ("total_at_t_max", last[3]),
        ("informational_at_t_max", last[2]),
    ]);
    Ok((s, vec![table]))
}

/// Random closed round trips priced with the full solver; a cost below the
/// discretization floor is an invariant breach (exit code 4 at the CLI).
fn manipulate(cfg: &ExperimentConfig) -> Result<Output> {
    let params = cfg.params()?;
    let outcome = random_round_trip_audit(
        cfg.n_trials,
        cfg.seed,
        cfg.t_total,
        &params,
        &cfg.solver_config()?,
    )?;
    let mut table = Table::new("manipulate.csv", &["trial", "cost"]);
    for (i, &c) in outcome.costs.iter().enumerate() {
        table.push(vec![i as f64, c]);
    }
    let mut abs: Vec<f64> = outcome.costs.iter().map(|c| c.abs()).collect();
    abs.sort_by(|a, b| a.total_cmp(b));
    let median = abs[abs.len() / 2];
    if outcome.min_cost < -1e-3 * median {
        return Err(Error::InvariantBreach(format!(
            "round-trip cost {} below the -1e-3*median floor (median |C| = {})",
            outcome.min_cost, median
        )));
    }
    let s = scalars(&[
        ("min_cost", outcome.min_cost),
        ("median_abs_cost", median),
        ("argmin_trial", outcome.argmin_trial as f64),
    ]);
    Ok((s, vec![table]))
}

/// Large-rate expansion orders against the full solver on one constant
/// schedule.
fn expansion_validity(cfg: &ExperimentConfig) -> Result<Output> {
    let params = cfg.params()?;
    let schedule = TradingSchedule::constant(cfg.m0, cfg.t_total);
    let full = solve_price_path(&schedule, &params, &cfg.solver_config()?)?;
    let n = 100usize;
    let lead = leading_trajectory(&schedule, &params, n)?;
    let first = first_order_trajectory(&schedule, &params, n)?;
    let mut table = Table::new(
        "expansion_validity.csv",
        &["t", "y_leading", "y_first_order", "y_full", "gap_leading", "gap_first_order"],
    );
    let mut max_gap1: f64 = 0.0;
    for i in 0..lead.len() {
        let t = lead.times[i];
        if t == 0.0 {
            continue;
        }
        let y_full = full.interpolate(t);
        let g0 = (lead.y[i] - y_full).abs() / y_full;
        let g1 = (first.interpolate(t) - y_full).abs() / y_full;
        max_gap1 = max_gap1.max(g1);
        table.push(vec![t, lead.y[i], first.interpolate(t), y_full, g0, g1]);
    }
    let s = scalars(&[("max_gap_first_order", max_gap1)]);
    Ok((s, vec![table]))
}

/// Execution cost vs traded volume: expansion orders and the closed form
/// C = (2/3) sqrt(2/L) Q^{3/2} (1 - 3 J T / (2 Q)).
fn cost(cfg: &ExperimentConfig) -> Result<Output> {
    let params = cfg.params()?;
    if cfg.n_points < 2 {
        return Err(Error::Config("n_points must be >= 2".into()));
    }
    let mut table = Table::new("cost.csv", &["q", "cost0", "cost1", "closed_form"]);
    for k in 0..cfg.n_points {
        let f = k as f64 / (cfg.n_points - 1) as f64;
        // volumes safely inside the expansion's validity: Q > 3 J T / 2
        let q = cfg.j * cfg.t_total * 10f64.powf(1.0 + 2.0 * f);
        let schedule = TradingSchedule::constant(q / cfg.t_total, cfg.t_total);
        let c0 = execution_cost(&schedule, &params, 0)?;
        let c1 = execution_cost(&schedule, &params, 1)?;
        let closed = 2.0 / 3.0 * (2.0 / params.l).sqrt() * q.powf(1.5)
            * (1.0 - 1.5 * params.j * cfg.t_total / q);
        table.push(vec![q, c0, c1, closed]);
    }
    let last = table.rows.last().unwrap();
    let s = scalars(&[("rel_gap_at_hi", (last[2] - last[3]).abs() / last[3])]);
    Ok((s, vec![table]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> ExperimentConfig {
        ExperimentConfig { dt: 5e-3, n_trials: 40, n_points: 11, ..ExperimentConfig::default() }
    }

    #[test]
    fn unknown_experiment_is_rejected() {
        let err = run("warp-drive", &quick()).unwrap_err();
        assert!(matches!(err, Error::UnknownExperiment(_)));
    }

    #[test]
    fn stationary_emits_solver_columns() {
        let result = run("stationary", &quick()).unwrap();
        assert_eq!(result.tables[0].header, ["t", "y", "residual"]);
        assert!(result.scalars["y_end"] > 0.0);
    }

    #[test]
    fn impact_sweep_brackets_both_limits() {
        let result = run("impact-sweep", &quick()).unwrap();
        let rows = &result.tables[0].rows;
        assert_eq!(rows.len(), 11);
        let first = &rows[0];
        // small rate: A ~ r / sqrt(pi)
        assert!((first[1] / (first[0] / std::f64::consts::PI.sqrt()) - 1.0).abs() < 1e-3);
        // large rate: y_ratio -> sqrt(2)
        assert!((result.scalars["y_ratio_at_hi"] - 2f64.sqrt()).abs() < 5e-3);
    }

    #[test]
    fn decay_curve_is_normalized_and_decreasing_after_t() {
        let result = run("decay", &quick()).unwrap();
        let rows = &result.tables[0].rows;
        let peak = rows
            .iter()
            .map(|r| r[1])
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((peak - 1.0).abs() < 1e-12);
        let tail: Vec<f64> =
            rows.iter().filter(|r| r[0] > 1.0).map(|r| r[1]).collect();
        assert!(tail.windows(2).all(|w| w[1] < w[0] + 1e-12));
    }

    #[test]
    fn reversal_reports_a_lag_past_the_flip() {
        let cfg = ExperimentConfig { dt: 2e-3, ..quick() };
        let result = run("reversal", &cfg).unwrap();
        let lag = result.scalars["return_lag"];
        assert!(lag > 0.0 && lag < cfg.t_total);
    }

    #[test]
    fn decomposition_total_is_the_sum_of_the_parts() {
        let result = run("decomposition", &quick()).unwrap();
        for row in &result.tables[0].rows {
            assert_eq!(row[3], row[1] + row[2]);
        }
    }

    #[test]
    fn manipulate_audit_passes_the_positivity_floor() {
        let result = run("manipulate", &quick()).unwrap();
        assert!(result.scalars["min_cost"] >= -1e-3 * result.scalars["median_abs_cost"]);
    }

    #[test]
    fn cost_first_order_tracks_the_closed_form() {
        let result = run("cost", &quick()).unwrap();
        assert!(result.scalars["rel_gap_at_hi"] < 1e-9);
    }

    #[test]
    fn reruns_render_identical_bytes() {
        let cfg = quick();
        for name in ["impact-sweep", "manipulate", "book-shape"] {
            let a = run(name, &cfg).unwrap();
            let b = run(name, &cfg).unwrap();
            assert_eq!(a.tables[0].render(), b.tables[0].render(), "{name}");
        }
    }

    #[test]
    fn write_result_emits_tables_and_manifest() {
        let dir = std::env::temp_dir().join(format!("llob-exp-test-{}", std::process::id()));
        let result = run("book-shape", &quick()).unwrap();
        let files = write_result(&result, &dir).unwrap();
        assert!(files.iter().any(|p| p.ends_with("book_shape.csv")));
        let manifest =
            std::fs::read_to_string(dir.join("manifest.txt")).unwrap();
        assert!(manifest.contains("experiment=book-shape"));
        assert!(manifest.contains("config.m0=1"));
        std::fs::remove_dir_all(&dir).ok();
    }
}
