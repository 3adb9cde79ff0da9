//! Simulation records and their CSV / JSON forms.
//!
//! CSV layout, one row per sampling instant after `#`-prefixed metadata lines:
//!
//! ```text
//! t, <state>..., <state>_meas..., <out>_ref..., <out>_ref_dot..., nu_<out>...,
//! <in>_cmd..., <in>..., e_<out>..., eps_tdc_<out>..., eps_indi_<out>...
//! ```
//!
//! `nu_*` is left empty for laws without a virtual control.

use std::io::Write;

use nalgebra::DVector;
use serde::Serialize;

/// Bumped whenever the column layout changes.
pub const LOG_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogMeta {
    pub schema: u32,
    pub scenario: String,
    pub controller: String,
    pub plant: String,
    pub seed: u64,
    pub config_hash: String,
    pub sample_period: f64,
    pub state_names: Vec<String>,
    pub output_names: Vec<String>,
    pub input_names: Vec<String>,
    /// Positions of the controlled outputs in the state vector.
    pub output_indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub t: f64,
    /// True plant state.
    pub state: DVector<f64>,
    /// State as the controller saw it.
    pub measured: DVector<f64>,
    pub reference: DVector<f64>,
    pub reference_rate: DVector<f64>,
    pub nu: Option<DVector<f64>>,
    /// δ_c issued at `t` and held until the next sample.
    pub command: DVector<f64>,
    /// Actuator output at `t`.
    pub deflection: DVector<f64>,
    /// Tracking error used by the controller.
    pub error: DVector<f64>,
    /// `H(t − tₛ) − H(t)` on the truth plant.
    pub eps_tdc: DVector<f64>,
    /// `f(t − tₛ) − f(t)` on the truth plant.
    pub eps_indi: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubstepRecord {
    pub t: f64,
    pub state: DVector<f64>,
    pub command: DVector<f64>,
    pub deflection: DVector<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimLog {
    pub meta: LogMeta,
    pub records: Vec<SampleRecord>,
    /// Empty unless requested through `SimOptions`.
    pub substeps: Vec<SubstepRecord>,
    /// Samples at which the truth state was outside the model envelope.
    pub envelope_violations: usize,
}

#[derive(Serialize)]
struct Column<'a> {
    name: &'a str,
    values: &'a [Option<f64>],
}

#[derive(Serialize)]
struct JsonLog<'a> {
    meta: &'a LogMeta,
    envelope_violations: usize,
    columns: Vec<Column<'a>>,
}

impl SimLog {
    /// Column names in CSV order.
    pub fn column_names(&self) -> Vec<String> {
        let m = &self.meta;
        let mut names = vec!["t".to_string()];
        names.extend(m.state_names.iter().cloned());
        names.extend(m.state_names.iter().map(|n| format!("{n}_meas")));
        names.extend(m.output_names.iter().map(|n| format!("{n}_ref")));
        names.extend(m.output_names.iter().map(|n| format!("{n}_ref_dot")));
        names.extend(m.output_names.iter().map(|n| format!("nu_{n}")));
        names.extend(m.input_names.iter().map(|n| format!("{n}_cmd")));
        names.extend(m.input_names.iter().cloned());
        names.extend(m.output_names.iter().map(|n| format!("e_{n}")));
        names.extend(m.output_names.iter().map(|n| format!("eps_tdc_{n}")));
        names.extend(m.output_names.iter().map(|n| format!("eps_indi_{n}")));
        names
    }

    fn row(r: &SampleRecord, channels: usize) -> Vec<Option<f64>> {
        let some = |v: &DVector<f64>| v.iter().map(|x| Some(*x)).collect::<Vec<_>>();
        let nu = match &r.nu {
            Some(nu) => some(nu),
            None => vec![None; channels],
        };
        let mut row = vec![Some(r.t)];
        for part in [
            some(&r.state),
            some(&r.measured),
            some(&r.reference),
            some(&r.reference_rate),
            nu,
            some(&r.command),
            some(&r.deflection),
            some(&r.error),
            some(&r.eps_tdc),
            some(&r.eps_indi),
        ] {
            row.extend(part);
        }
        row
    }

    pub fn rows(&self) -> Vec<Vec<Option<f64>>> {
        let nc = self.meta.output_names.len();
        self.records.iter().map(|r| Self::row(r, nc)).collect()
    }

    /// `(name, values)` for every column.
    pub fn columns(&self) -> Vec<(String, Vec<Option<f64>>)> {
        let rows = self.rows();
        self.column_names()
            .into_iter()
            .enumerate()
            .map(|(j, name)| (name, rows.iter().map(|r| r[j]).collect()))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let m = &self.meta;
        writeln!(out, "# indilab-log {}", m.schema)?;
        writeln!(out, "# scenario: {}", m.scenario)?;
        writeln!(out, "# controller: {}", m.controller)?;
        writeln!(out, "# plant: {}", m.plant)?;
        writeln!(out, "# seed: {}", m.seed)?;
        writeln!(out, "# config_hash: {}", m.config_hash)?;
        writeln!(out, "# sample_period: {}", m.sample_period)?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(self.column_names())?;
        for row in self.rows() {
            w.write_record(row.iter().map(|v| v.map(|x| x.to_string()).unwrap_or_default()))?;
        }
        w.flush()
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn to_json(&self) -> serde_json::Value {
        let names = self.column_names();
        let columns = self.columns();
        let doc = JsonLog {
            meta: &self.meta,
            envelope_violations: self.envelope_violations,
            columns: names
                .iter()
                .zip(&columns)
                .map(|(name, (_, values))| Column { name, values })
                .collect(),
        };
        serde_json::to_value(doc).expect("log serializes")
    }

    /// True controlled outputs, one vector per sample.
    pub fn true_outputs(&self) -> Vec<DVector<f64>> {
        let idx = &self.meta.output_indices;
        self.records
            .iter()
            .map(|r| DVector::from_iterator(idx.len(), idx.iter().map(|&i| r.state[i])))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn log() -> SimLog {
        let v = |x: f64| DVector::from_element(1, x);
        SimLog {
            meta: LogMeta {
                schema: LOG_SCHEMA,
                scenario: "s".into(),
                controller: "PI_INCR".into(),
                plant: "longitudinal".into(),
                seed: 7,
                config_hash: "0123456789abcdef".into(),
                sample_period: 0.01,
                state_names: vec!["alpha".into(), "q".into()],
                output_names: vec!["q".into()],
                input_names: vec!["delta_e".into()],
                output_indices: vec![1],
            },
            records: vec![SampleRecord {
                t: 0.0,
                state: DVector::from_column_slice(&[0.5, 0.25]),
                measured: DVector::from_column_slice(&[0.5, 0.125]),
                reference: v(1.0),
                reference_rate: v(0.0),
                nu: None,
                command: v(-0.1),
                deflection: v(0.0),
                error: v(0.875),
                eps_tdc: v(0.0),
                eps_indi: v(0.0),
            }],
            substeps: vec![],
            envelope_violations: 0,
        }
    }

    #[test]
    fn csv_layout() {
        let text = log().to_csv_string();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# indilab-log 1");
        assert!(lines.contains(&"# seed: 7"));
        assert!(lines.contains(&"# config_hash: 0123456789abcdef"));
        assert_eq!(
            lines[7],
            "t,alpha,q,alpha_meas,q_meas,q_ref,q_ref_dot,nu_q,delta_e_cmd,delta_e,e_q,eps_tdc_q,eps_indi_q"
        );
        assert_eq!(lines[8], "0,0.5,0.25,0.5,0.125,1,0,,-0.1,0,0.875,0,0");
    }

    #[test]
    fn json_is_columnar() {
        let j = log().to_json();
        assert_eq!(j["meta"]["seed"], 7);
        assert_eq!(j["columns"][2]["name"], "q");
        assert_eq!(j["columns"][2]["values"][0], 0.25);
        assert!(j["columns"][7]["values"][0].is_null());
    }

    #[test]
    fn true_outputs_pick_rate_channels() {
        assert_eq!(log().true_outputs()[0][0], 0.25);
    }
}
