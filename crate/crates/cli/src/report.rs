//! Report records and their CSV/JSON encodings.
//!
//! Both encodings print every value with 17 significant digits, so the two
//! formats parse back to bit-identical floats, and both are deterministic
//! byte-for-byte given the same records.

use std::fmt::Write as _;

/// One report row. `n` is the truncation or representer degree relevant to
/// the record.
#[derive(Clone, Debug)]
pub struct Record {
    pub experiment: String,
    pub space: String,
    pub d: usize,
    pub n: i64,
    pub seed: u64,
    pub metric: String,
    pub value: f64,
    pub detail: String,
}

impl Record {
    pub fn new(
        experiment: &str,
        space: &str,
        d: usize,
        n: i64,
        seed: u64,
        metric: &str,
        value: f64,
        detail: impl Into<String>,
    ) -> Record {
        Record {
            experiment: experiment.to_string(),
            space: space.to_string(),
            d,
            n,
            seed,
            metric: metric.to_string(),
            value,
            detail: detail.into(),
        }
    }
}

pub fn fmt_value(v: f64) -> String {
    format!("{v:.16e}")
}

fn csv_escape(field: &str) -> String {
    if field.contains(',') || field.contains('"') || field.contains('\n') {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

pub fn to_csv(records: &[Record]) -> String {
    let mut out = String::from("experiment,space,d,N,seed,metric,value,detail\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            csv_escape(&r.experiment),
            csv_escape(&r.space),
            r.d,
            r.n,
            r.seed,
            csv_escape(&r.metric),
            fmt_value(r.value),
            csv_escape(&r.detail),
        );
    }
    out
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

pub fn to_json(records: &[Record]) -> String {
    let mut out = String::from("[");
    for (i, r) in records.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(
            out,
            "\n  {{\"experiment\":\"{}\",\"space\":\"{}\",\"d\":{},\"N\":{},\"seed\":{},\"metric\":\"{}\",\"value\":{},\"detail\":\"{}\"}}",
            json_escape(&r.experiment),
            json_escape(&r.space),
            r.d,
            r.n,
            r.seed,
            json_escape(&r.metric),
            fmt_value(r.value),
            json_escape(&r.detail),
        );
    }
    out.push_str("\n]\n");
    out
}
