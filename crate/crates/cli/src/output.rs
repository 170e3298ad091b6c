//! Artifact serialization. All numbers are written with shortest
//! round-trip formatting so reruns of the same seed produce byte-identical
//! files; `inf`/`NaN` appear verbatim in CSV and as strings in JSON.

use std::path::Path;

use beliefplan_core::evaluate::{BoundReport, DriftTrace};
use beliefplan_core::simplify::EpsilonEstimate;
use serde_json::{Map, Value};

use crate::CliError;

fn fmt_f(v: f64) -> String {
    format!("{v}")
}

fn csv_from_records(header: &[&str], records: Vec<Vec<String>>) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header).expect("header writes");
    for record in records {
        writer.write_record(&record).expect("record writes");
    }
    String::from_utf8(writer.into_inner().expect("flush")).expect("utf8")
}

/// `kind,max,mean,samples,exhaustive,depth,seed` — one row per estimate.
pub fn epsilon_csv(estimates: &[&EpsilonEstimate<f64>]) -> String {
    let records = estimates
        .iter()
        .map(|e| {
            vec![
                e.kind.to_string(),
                fmt_f(e.max),
                fmt_f(e.mean),
                e.samples.to_string(),
                e.exhaustive.to_string(),
                e.depth.to_string(),
                e.seed.to_string(),
            ]
        })
        .collect();
    csv_from_records(
        &["kind", "max", "mean", "samples", "exhaustive", "depth", "seed"],
        records,
    )
}

/// `t,mean_l1,max_l1,se_l1,mean_kl,max_kl,se_kl,episodes`.
pub fn drift_csv(trace: &DriftTrace<f64>) -> String {
    let records = trace
        .rows
        .iter()
        .map(|r| {
            vec![
                r.t.to_string(),
                fmt_f(r.mean_l1),
                fmt_f(r.max_l1),
                fmt_f(r.se_l1),
                fmt_f(r.mean_kl),
                fmt_f(r.max_kl),
                fmt_f(r.se_kl),
                trace.episodes.to_string(),
            ]
        })
        .collect();
    csv_from_records(
        &["t", "mean_l1", "max_l1", "se_l1", "mean_kl", "max_kl", "se_kl", "episodes"],
        records,
    )
}

/// `theorem,t,action,measured,se,bound,slack,pass,vacuous`; `action` is
/// empty on rows that aggregate over actions.
pub fn bounds_csv(reports: &[BoundReport<f64>]) -> String {
    let mut records = Vec::new();
    for report in reports {
        for row in &report.rows {
            records.push(vec![
                report.theorem.to_string(),
                row.t.to_string(),
                row.action.map(|a| a.to_string()).unwrap_or_default(),
                fmt_f(row.measured),
                fmt_f(row.se),
                fmt_f(row.bound),
                fmt_f(row.slack),
                row.pass.to_string(),
                row.vacuous.to_string(),
            ]);
        }
    }
    csv_from_records(
        &["theorem", "t", "action", "measured", "se", "bound", "slack", "pass", "vacuous"],
        records,
    )
}

/// One planning step in a decision trace.
pub struct DecisionRow {
    pub step: usize,
    pub action: usize,
    pub observation: usize,
    pub reward: f64,
    pub nodes: u64,
    pub q: Vec<f64>,
}

/// `step,action,observation,reward,nodes,q_0..q_{A-1}`.
pub fn decisions_csv(rows: &[DecisionRow], num_actions: usize) -> String {
    let mut header: Vec<String> = ["step", "action", "observation", "reward", "nodes"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    for a in 0..num_actions {
        header.push(format!("q_{a}"));
    }
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let records = rows
        .iter()
        .map(|r| {
            let mut record = vec![
                r.step.to_string(),
                r.action.to_string(),
                r.observation.to_string(),
                fmt_f(r.reward),
                r.nodes.to_string(),
            ];
            record.extend(r.q.iter().map(|&q| fmt_f(q)));
            record
        })
        .collect();
    csv_from_records(&header_refs, records)
}

/// JSON value for a float: a number when finite, else `"inf"`, `"-inf"`, or
/// `"nan"` (plain JSON has no spelling for these).
pub fn json_num(v: f64) -> Value {
    if v.is_finite() {
        serde_json::Number::from_f64(v).map(Value::Number).expect("finite")
    } else if v.is_nan() {
        Value::String("nan".into())
    } else if v > 0.0 {
        Value::String("inf".into())
    } else {
        Value::String("-inf".into())
    }
}

/// JSON object for an epsilon estimate.
pub fn epsilon_json(e: &EpsilonEstimate<f64>) -> Value {
    let mut map = Map::new();
    map.insert("kind".into(), Value::String(e.kind.to_string()));
    map.insert("max".into(), json_num(e.max));
    map.insert("mean".into(), json_num(e.mean));
    map.insert("samples".into(), Value::from(e.samples));
    map.insert("exhaustive".into(), Value::from(e.exhaustive));
    map.insert("depth".into(), Value::from(e.depth));
    map.insert("seed".into(), Value::from(e.seed));
    Value::Object(map)
}

/// Pretty JSON with a trailing newline; key order is alphabetical, so the
/// bytes are stable.
pub fn json_text(value: &Value) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("json serializes");
    text.push('\n');
    text
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Invalid(format!("cannot create {}: {e}", dir.display())))?;
    }
    std::fs::write(path, text)
        .map_err(|e| CliError::Invalid(format!("cannot write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_the_formatter() {
        for &v in &[0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.30000000000000004] {
            let text = fmt_f(v);
            assert_eq!(text.parse::<f64>().unwrap(), v, "{text}");
        }
        assert_eq!(fmt_f(f64::INFINITY), "inf");
        assert_eq!(fmt_f(f64::NAN), "NaN");
    }

    #[test]
    fn nonfinite_numbers_become_strings_in_json() {
        assert_eq!(json_num(f64::INFINITY), Value::String("inf".into()));
        assert_eq!(json_num(f64::NEG_INFINITY), Value::String("-inf".into()));
        assert_eq!(json_num(f64::NAN), Value::String("nan".into()));
        assert_eq!(json_num(0.5), serde_json::json!(0.5));
    }

    #[test]
    fn decision_rows_have_per_action_q_columns() {
        let text = decisions_csv(
            &[DecisionRow {
                step: 0,
                action: 1,
                observation: 0,
                reward: -0.5,
                nodes: 42,
                q: vec![0.25, 0.75],
            }],
            2,
        );
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "step,action,observation,reward,nodes,q_0,q_1"
        );
        assert_eq!(lines.next().unwrap(), "0,1,0,-0.5,42,0.25,0.75");
    }
}
