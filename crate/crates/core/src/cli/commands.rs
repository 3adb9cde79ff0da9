use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use serde::Serialize;

use super::{io_error, resolve_scenario, CliError};
use crate::control::{map_indi_to_pi, map_indi_to_pid, DesiredErrorDynamics, EffectorBlendingGain};
use crate::sim::{
    compare_logs, compute_metrics, config_hash, mismatch_sweep, run_scenario, tde_error_sweep,
    Comparison, Metrics, Scenario, SimLog,
};

#[derive(Debug, Clone, Default)]
pub struct RunConfig {
    /// Scenario file or preset name.
    pub scenario: String,
    pub out_dir: PathBuf,
    /// `dotted.path=value` overrides, applied in order.
    pub overrides: Vec<String>,
    pub seed: Option<u64>,
    pub verbosity: u8,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub scenario: String,
    pub config_hash: String,
    pub seed: u64,
    pub metrics: Metrics,
    /// Deviation from the scenario's `compare_with` controller, if set.
    pub equivalence: Option<Comparison>,
    #[serde(skip)]
    pub files: Vec<PathBuf>,
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| io_error(path, e))
}

fn pretty(v: &impl Serialize) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(v).expect("serializable");
    text.push('\n');
    text.into_bytes()
}

fn write_log(dir: &Path, stem: &str, log: &SimLog, files: &mut Vec<PathBuf>) -> Result<(), CliError> {
    let csv = dir.join(format!("{stem}.csv"));
    write_file(&csv, log.to_csv_string().as_bytes())?;
    let json = dir.join(format!("{stem}.json"));
    write_file(&json, &pretty(&log.to_json()))?;
    files.extend([csv, json]);
    Ok(())
}

/// Runs one scenario and writes `log.csv`, `log.json`, `metrics.json` and
/// the resolved `scenario.json`. A `compare_with` controller adds
/// `companion_log.csv`/`.json` and an equivalence entry in the metrics.
pub fn cmd_run(cfg: &RunConfig) -> Result<RunReport, CliError> {
    let s = resolve_scenario(&cfg.scenario, &cfg.overrides, cfg.seed)?;
    log::info!("running `{}` with {}", s.name, s.controller.kind);
    let log = run_scenario(&s)?;
    let companion = match &s.compare_with {
        Some(kind) => Some(run_scenario(&s.with_controller(kind))?),
        None => None,
    };
    let equivalence = companion.as_ref().map(|c| compare_logs(&log, c)).transpose()?;

    let dir = &cfg.out_dir;
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
    let mut files = Vec::new();
    write_log(dir, "log", &log, &mut files)?;
    if let Some(c) = &companion {
        write_log(dir, "companion_log", c, &mut files)?;
    }
    let report = RunReport {
        scenario: s.name.clone(),
        config_hash: config_hash(&s),
        seed: s.noise.seed,
        metrics: compute_metrics(&log),
        equivalence,
        files: Vec::new(),
    };
    let metrics = dir.join("metrics.json");
    write_file(&metrics, &pretty(&report))?;
    let scenario = dir.join("scenario.json");
    write_file(&scenario, &pretty(&s))?;
    files.extend([metrics, scenario]);
    Ok(RunReport { files, ..report })
}

#[derive(Debug, Clone, Default)]
pub struct CompareConfig {
    pub a: String,
    pub b: String,
    pub overrides_a: Vec<String>,
    pub overrides_b: Vec<String>,
    pub seed: Option<u64>,
}

fn check_comparable(a: &Scenario, b: &Scenario) -> Result<(), CliError> {
    let mut diffs = Vec::new();
    if a.plant != b.plant {
        diffs.push("plant");
    }
    if a.reference != b.reference {
        diffs.push("reference");
    }
    if a.noise.seed != b.noise.seed {
        diffs.push("noise.seed");
    }
    if a.sample_period != b.sample_period {
        diffs.push("sample_period");
    }
    if a.duration != b.duration {
        diffs.push("duration");
    }
    if diffs.is_empty() {
        Ok(())
    } else {
        Err(CliError::Config(format!(
            "scenarios are not comparable, they differ in {}",
            diffs.join(", ")
        )))
    }
}

pub fn cmd_compare(cfg: &CompareConfig) -> Result<Comparison, CliError> {
    let a = resolve_scenario(&cfg.a, &cfg.overrides_a, cfg.seed)?;
    let b = resolve_scenario(&cfg.b, &cfg.overrides_b, cfg.seed)?;
    check_comparable(&a, &b)?;
    Ok(compare_logs(&run_scenario(&a)?, &run_scenario(&b)?)?)
}

impl Comparison {
    pub fn to_text(&self) -> String {
        let mut out = format!("{} vs {}\n", self.controller_a, self.controller_b);
        let _ = writeln!(out, "{:<20} {:>14} {:>14}", "signal", "max |diff|", "rms diff");
        for s in &self.signals {
            let _ = writeln!(out, "{:<20} {:>14.6e} {:>14.6e}", s.signal, s.max_abs, s.rms);
        }
        let _ = writeln!(
            out,
            "command deviation {:.3e}, state deviation {:.3e}: {}",
            self.command_deviation,
            self.state_deviation,
            if self.pass { "PASS" } else { "differ" }
        );
        out
    }
}

/// Both sides of the INDI → PI(D) gain map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GainTable {
    pub k_p: Vec<f64>,
    pub k_d: Option<Vec<f64>>,
    pub gbar: Vec<f64>,
    pub ts: f64,
    pub k: Vec<f64>,
    pub t_i: Vec<f64>,
    pub t_d: Option<Vec<f64>>,
}

fn widen(what: &str, v: &[f64], n: usize) -> Result<DVector<f64>, CliError> {
    match v.len() {
        1 => Ok(DVector::from_element(n, v[0])),
        len if len == n => Ok(DVector::from_column_slice(v)),
        len => Err(CliError::Config(format!("{what}: expected 1 or {n} values, got {len}"))),
    }
}

pub fn cmd_gainmap(k_p: &[f64], k_d: Option<&[f64]>, gbar: &[f64], ts: f64) -> Result<GainTable, CliError> {
    let n = k_p.len().max(gbar.len()).max(k_d.map_or(0, <[f64]>::len));
    if n == 0 {
        return Err(CliError::Config("k_p and gbar are required".into()));
    }
    let bad = |e: crate::control::ControlError| CliError::Config(e.to_string());
    let kp = widen("k_p", k_p, n)?;
    let g = EffectorBlendingGain::diagonal(widen("gbar", gbar, n)?).map_err(bad)?;
    let (dynamics, pid) = match k_d {
        Some(kd) => {
            let d = DesiredErrorDynamics::second_order(kp, widen("k_d", kd, n)?).map_err(bad)?;
            let pid = map_indi_to_pid(&d, &g, ts).map_err(bad)?;
            (d, pid)
        }
        None => {
            let d = DesiredErrorDynamics::first_order(kp).map_err(bad)?;
            let pid = map_indi_to_pi(&d, &g, ts).map_err(bad)?;
            (d, pid)
        }
    };
    let v = |x: &DVector<f64>| x.iter().copied().collect::<Vec<_>>();
    Ok(GainTable {
        k_p: v(dynamics.k_p()),
        k_d: dynamics.k_d().map(v),
        gbar: v(g.values()),
        ts,
        k: v(&pid.k),
        t_i: v(&pid.t_i),
        t_d: pid.t_d.as_ref().map(v),
    })
}

impl GainTable {
    pub fn to_text(&self) -> String {
        let mut out = String::from("INDI side\n");
        let _ = writeln!(out, "  k_P  = {:?}", self.k_p);
        if let Some(kd) = &self.k_d {
            let _ = writeln!(out, "  k_D  = {kd:?}");
        }
        let _ = writeln!(out, "  gbar = {:?}", self.gbar);
        let _ = writeln!(out, "  ts   = {}", self.ts);
        out.push_str("PI(D) side\n");
        let _ = writeln!(out, "  K    = {:?}", self.k);
        let _ = writeln!(out, "  T_I  = {:?}", self.t_i);
        if let Some(td) = &self.t_d {
            let _ = writeln!(out, "  T_D  = {td:?}");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SweepKind {
    Tde { sample_periods: Vec<f64> },
    Mismatch {
        f_scales: Vec<f64>,
        g_scale: f64,
        controllers: Vec<String>,
    },
}

#[derive(Debug, Clone)]
pub struct SweepReport {
    pub path: PathBuf,
    pub csv: String,
}

fn sweep_csv<T: Serialize>(s: &Scenario, kind: &str, rows: &[T]) -> Result<String, CliError> {
    let mut out = format!(
        "# indilab-sweep {kind}\n# scenario: {}\n# seed: {}\n# config_hash: {}\n",
        s.name,
        s.noise.seed,
        config_hash(s)
    );
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    let body = w.into_inner().map_err(|e| CliError::Runtime(e.to_string()))?;
    out.push_str(&String::from_utf8(body).expect("csv is utf-8"));
    Ok(out)
}

/// Runs the sweep and writes `<kind>_sweep.csv` into `cfg.out_dir`.
pub fn cmd_sweep(cfg: &RunConfig, kind: &SweepKind) -> Result<SweepReport, CliError> {
    let s = resolve_scenario(&cfg.scenario, &cfg.overrides, cfg.seed)?;
    let (name, csv) = match kind {
        SweepKind::Tde { sample_periods } => {
            for &ts in sample_periods {
                let mut probe = s.clone();
                probe.sample_period = ts;
                probe.sample_count()?;
            }
            ("tde", sweep_csv(&s, "tde", &tde_error_sweep(&s, sample_periods)?)?)
        }
        SweepKind::Mismatch {
            f_scales,
            g_scale,
            controllers,
        } => {
            for c in controllers {
                s.with_controller(c).validate()?;
            }
            let rows = mismatch_sweep(&s, f_scales, *g_scale, controllers)?;
            ("mismatch", sweep_csv(&s, "mismatch", &rows)?)
        }
    };
    fs::create_dir_all(&cfg.out_dir).map_err(|e| io_error(&cfg.out_dir, e))?;
    let path = cfg.out_dir.join(format!("{name}_sweep.csv"));
    write_file(&path, csv.as_bytes())?;
    Ok(SweepReport { path, csv })
}
