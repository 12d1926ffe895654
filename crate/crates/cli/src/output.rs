//! Output documents and their JSON, CSV and table renderings.

use std::collections::BTreeMap;

use matryoshka::euler::BenchRecord;
use matryoshka::mc::MomentEstimate;
use matryoshka::{MomentTime, MomentVector};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Integer(u64),
    Number(f64),
    Text(String),
    List(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub process: String,
    pub parameters: BTreeMap<String, ParamValue>,
    pub order: usize,
    pub time: MomentTime,
    pub tool_version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload {
    Moments(MomentVector),
    Bench(Vec<BenchRecord>),
    Estimates(Vec<MomentEstimate>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputDocument {
    pub metadata: Metadata,
    pub payload: Payload,
}

/// Shortest decimal that parses back to the same `f64`.
pub fn number(v: f64) -> String {
    format!("{v:?}")
}

fn optional(v: Option<f64>) -> String {
    v.map(number).unwrap_or_default()
}

impl OutputDocument {
    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("documents serialize");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let rows: Vec<Vec<String>> = match &self.payload {
            Payload::Moments(m) => {
                w.write_record(["order", "value"]).unwrap();
                m.values
                    .iter()
                    .enumerate()
                    .map(|(k, v)| vec![(k + 1).to_string(), number(*v)])
                    .collect()
            }
            Payload::Bench(records) => {
                w.write_record([
                    "method",
                    "delta",
                    "run_time_seconds",
                    "abs_error",
                    "rel_error",
                ])
                .unwrap();
                records
                    .iter()
                    .map(|r| {
                        vec![
                            r.method.label().to_string(),
                            optional(r.delta),
                            number(r.run_time_seconds),
                            number(r.abs_error),
                            optional(r.rel_error),
                        ]
                    })
                    .collect()
            }
            Payload::Estimates(est) => {
                w.write_record(["order", "estimate", "std_error"]).unwrap();
                est.iter()
                    .map(|e| vec![e.order.to_string(), number(e.mean), number(e.std_error)])
                    .collect()
            }
        };
        for row in rows {
            w.write_record(&row).unwrap();
        }
        String::from_utf8(w.into_inner().expect("in-memory writer")).expect("ascii output")
    }

    /// Benchmark rows rounded to two significant digits; other payloads fall
    /// back to CSV.
    pub fn to_table(&self) -> String {
        let Payload::Bench(records) = &self.payload else {
            return self.to_csv();
        };
        let header = ["method", "delta", "run time (s)", "abs error", "rel error"];
        let rows: Vec<[String; 5]> = records
            .iter()
            .map(|r| {
                [
                    r.method.label().to_string(),
                    r.delta
                        .map(|d| format!("{d:.0e}"))
                        .unwrap_or_else(|| "-".into()),
                    format!("{:.1e}", r.run_time_seconds),
                    if r.delta.is_some() {
                        format!("{:.1e}", r.abs_error)
                    } else {
                        "-".into()
                    },
                    match (r.delta, r.rel_error) {
                        (Some(_), Some(e)) => format!("{e:.1e}"),
                        _ => "-".into(),
                    },
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for row in &rows {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            padded.join("  ").trim_end().to_string() + "\n"
        };
        let mut out = format!(
            "{} n={} t={}\n",
            self.metadata.process,
            self.metadata.order,
            match self.metadata.time {
                MomentTime::At(t) => number(t),
                MomentTime::Stationary => "stationary".into(),
            }
        );
        out += &line(&header.map(String::from));
        for row in &rows {
            out += &line(row);
        }
        out
    }
}

/// Parses CSV output back into rows of fields.
pub fn read_csv(text: &str) -> csv::Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers()?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|r| r.iter().map(String::from).collect()))
        .collect::<csv::Result<_>>()?;
    Ok((header, rows))
}
