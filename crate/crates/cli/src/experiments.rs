//! The five experiments; each returns the tables it produces.

use std::path::PathBuf;

use plsense_core::metrics::{
    estimate_sinr, max_unambiguous_range, measurement_rates, range_resolution, sidelobe_metrics,
};
use plsense_core::{compare_sinr, run_campaign_baseline, Measurement, MeasurementKind, Scheme};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{num, Table};

/// Range resolution against bandwidth for every velocity preset.
pub fn resolution_sweep(cfg: &ExperimentConfig) -> Vec<Table> {
    let mut t = Table::new("resolution.csv", &["preset", "phase_velocity_m_s", "bandwidth_hz", "delta_d_m"]);
    for v in &cfg.sweep.velocities {
        for &b in &cfg.sweep.bandwidth_hz {
            t.push(vec![
                v.name.clone(),
                num(v.phase_velocity),
                num(b),
                num(range_resolution(v.phase_velocity, b)),
            ]);
        }
    }
    vec![t]
}

/// Maximum unambiguous range against the modem count. Counts that do not
/// divide the frame are skipped.
pub fn range_sweep(cfg: &ExperimentConfig) -> Vec<Table> {
    let sys = &cfg.system;
    let mut t = Table::new(
        "range.csv",
        &[
            "preset",
            "phase_velocity_m_s",
            "cp_length",
            "n_plm",
            "window_len",
            "d_max_reflectogram_m",
            "d_max_transferogram_m",
        ],
    );
    for v in &cfg.sweep.velocities {
        for &cp in &cfg.sweep.cp_length {
            for &n in &cfg.sweep.n_plm {
                if !sys.frame_size.is_multiple_of(n) {
                    log::info!("range-sweep: n_plm = {n} does not divide {}; skipped", sys.frame_size);
                    continue;
                }
                let l_rho = sys.frame_size / n;
                let d = |kind| max_unambiguous_range(v.phase_velocity, sys.sample_rate_hz, l_rho, cp, kind);
                t.push(vec![
                    v.name.clone(),
                    num(v.phase_velocity),
                    cp.to_string(),
                    n.to_string(),
                    l_rho.to_string(),
                    num(d(MeasurementKind::Reflectogram)),
                    num(d(MeasurementKind::Transferogram)),
                ]);
            }
        }
    }
    vec![t]
}

/// Measurement rates per scheme. CDMA rows exist only for power-of-two
/// modem counts.
pub fn rates(cfg: &ExperimentConfig) -> Vec<Table> {
    let mut t = Table::new(
        "rates.csv",
        &["scheme", "cp_length", "n_plm", "symbol_duration_s", "n_rho", "n_tau", "n_meas"],
    );
    for &scheme in &cfg.schemes {
        for &cp in &cfg.sweep.cp_length {
            for &n in &cfg.sweep.n_plm {
                if scheme == Scheme::Cdma && !n.is_power_of_two() {
                    continue;
                }
                let params = cfg.system.clone().with_modems(n).with_cp(cp);
                let r = measurement_rates(scheme, &params);
                t.push(vec![
                    scheme.to_string(),
                    cp.to_string(),
                    n.to_string(),
                    num(r.symbol_duration),
                    num(r.n_rho),
                    num(r.n_tau),
                    num(r.n_meas),
                ]);
            }
        }
    }
    vec![t]
}

fn trace_table(path: PathBuf, mut ms: Vec<&Measurement>) -> Table {
    ms.sort_by_key(|m| (m.symbol_index, m.window_index));
    let mut t = Table::new(path, &["symbol_index", "sample_index", "amplitude"]);
    for m in ms {
        let base = m.window_index * m.window.len();
        for (k, v) in m.window.iter().enumerate() {
            t.push(vec![m.symbol_index.to_string(), (base + k).to_string(), num(*v)]);
        }
    }
    t
}

fn pair(src: &[Measurement], observer: usize, injector: usize) -> Vec<&Measurement> {
    src.iter()
        .filter(|m| m.observer == observer && m.injector == injector)
        .collect()
}

fn db_cell<E>(r: Result<plsense_core::Decibels, E>) -> String {
    r.map(|d| d.to_string()).unwrap_or_default()
}

/// Measurement campaigns for every configured scheme.
pub fn simulate(cfg: &ExperimentConfig) -> Result<Vec<Table>, CliError> {
    let scenario = cfg.build_scenario()?;
    let n = cfg.system.n_plm;
    let mut tables = Vec::new();
    for &scheme in &cfg.schemes {
        let result = run_campaign_baseline(scheme, &cfg.system, &scenario, &cfg.noise, cfg.n_symbols, cfg.seed)?;
        let dir = PathBuf::from("simulate").join(scheme.name());
        for i in 0..n {
            for j in 0..n {
                tables.push(trace_table(dir.join(format!("trace_o{i}_i{j}.csv")), pair(&result.measurements, i, j)));
                if !result.reassembled.is_empty() {
                    tables.push(trace_table(
                        dir.join(format!("reassembled_o{i}_i{j}.csv")),
                        pair(&result.reassembled, i, j),
                    ));
                }
            }
        }
        let mut summary = Table::new(
            dir.join("summary.csv"),
            &["observer", "injector", "kind", "count", "sinr_db", "pslr_db", "islr_db"],
        );
        for a in &result.averages {
            let truth = scenario.channel(a.observer, a.injector);
            let side = sidelobe_metrics(&a.window);
            summary.push(vec![
                a.observer.to_string(),
                a.injector.to_string(),
                a.kind.name().to_string(),
                a.count.to_string(),
                db_cell(estimate_sinr(&a.window, truth)),
                db_cell(side.clone().map(|s| s.0)),
                db_cell(side.map(|s| s.1)),
            ]);
        }
        tables.push(summary);
        let mut checks = Table::new(dir.join("checks.csv"), &["check", "passed", "detail"]);
        for c in &result.report.checks {
            checks.push(vec![c.name.to_string(), c.passed.to_string(), c.detail.clone()]);
        }
        tables.push(checks);
    }
    Ok(tables)
}

/// Per-modem Monte-Carlo SINR of every configured scheme.
pub fn compare(cfg: &ExperimentConfig) -> Result<Vec<Table>, CliError> {
    let scenario = cfg.build_scenario()?;
    let mut t = Table::new(
        "sinr.csv",
        &[
            "scheme",
            "modem",
            "trials",
            "mean_sinr_db",
            "ci95_db",
            "signal",
            "impairment",
            "pooled_sinr_db",
        ],
    );
    for &scheme in &cfg.schemes {
        for r in compare_sinr(scheme, &cfg.system, &scenario, &cfg.noise, cfg.trials, cfg.seed)? {
            t.push(vec![
                scheme.to_string(),
                r.modem.to_string(),
                r.trials.to_string(),
                num(r.mean_db),
                num(r.ci95_db),
                num(r.signal),
                num(r.impairment),
                num(r.pooled_db),
            ]);
        }
    }
    Ok(vec![t])
}
