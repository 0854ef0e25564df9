//! Pairing reports: a value together with its per-term breakdown,
//! serialized deterministically so identical runs emit identical bytes.

use crate::chow::BitVec;
use crate::rat::{format_rat, rat_to_f64, Rat};
use crate::skeleton::Partition;
use serde_json::{Map, Number, Value};

/// A pairing scalar. Exact pipelines carry rationals end to end, limit
/// pipelines carry floats; reports keep the distinction visible.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Exact(Rat),
    Approx(f64),
}

impl Scalar {
    /// The scalar as a float, rounding exact rationals.
    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(r) => rat_to_f64(r),
            Scalar::Approx(x) => *x,
        }
    }

    fn to_value(&self) -> Value {
        match self {
            Scalar::Exact(r) => Value::String(format_rat(r)),
            Scalar::Approx(x) => Number::from_f64(*x).map(Value::Number).unwrap_or(Value::Null),
        }
    }
}

/// One (partition, tuple) contribution: the Fourier degree coefficient,
/// the integral it multiplies, and the resulting contribution to the value.
#[derive(Debug, Clone)]
pub struct PairingTerm {
    pub partition: Partition,
    pub tuple: Vec<BitVec>,
    pub ldeg: Rat,
    pub integral: Scalar,
    pub contribution: Scalar,
}

impl PairingTerm {
    fn to_value(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("contribution".into(), self.contribution.to_value());
        obj.insert("integral".into(), self.integral.to_value());
        obj.insert("ldeg".into(), Value::String(format_rat(&self.ldeg)));
        obj.insert(
            "partition".into(),
            Value::Array(
                self.partition
                    .one_based_blocks()
                    .into_iter()
                    .map(|block| Value::Array(block.into_iter().map(Value::from).collect()))
                    .collect(),
            ),
        );
        obj.insert(
            "tuple".into(),
            Value::Array(
                self.tuple
                    .iter()
                    .map(|v| Value::String(v.to_string()))
                    .collect(),
            ),
        );
        Value::Object(obj)
    }
}

/// A computed pairing: the value, every contributing term in a fixed
/// enumeration order, and enough metadata to reproduce the run.
#[derive(Debug, Clone)]
pub struct PairingReport {
    pub kind: &'static str,
    pub d: usize,
    pub graph: String,
    pub level: Option<u32>,
    pub quadrature: Option<u32>,
    pub value: Scalar,
    pub terms: Vec<PairingTerm>,
}

impl PairingReport {
    /// The pairing value as a float.
    pub fn value_f64(&self) -> f64 {
        self.value.to_f64()
    }

    /// The exact rational value, if this report came from an exact pipeline.
    pub fn exact_value(&self) -> Option<&Rat> {
        match &self.value {
            Scalar::Exact(r) => Some(r),
            Scalar::Approx(_) => None,
        }
    }

    /// JSON with sorted keys and terms in enumeration order; byte-stable
    /// across runs on identical inputs.
    pub fn to_json(&self) -> String {
        let mut meta = Map::new();
        meta.insert("d".into(), Value::from(self.d));
        meta.insert("graph".into(), Value::String(self.graph.clone()));
        meta.insert("kind".into(), Value::String(self.kind.into()));
        if let Some(n) = self.level {
            meta.insert("level".into(), Value::from(n));
        }
        if let Some(m) = self.quadrature {
            meta.insert("quadrature".into(), Value::from(m));
        }
        let mut obj = Map::new();
        obj.insert("meta".into(), Value::Object(meta));
        obj.insert(
            "terms".into(),
            Value::Array(self.terms.iter().map(PairingTerm::to_value).collect()),
        );
        obj.insert("value".into(), self.value.to_value());
        serde_json::to_string_pretty(&Value::Object(obj)).expect("report maps serialize")
    }
}

/// One row of a convergence study: the exact pairing of the level-n
/// standard approximations against the limit value.
#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub n: u32,
    pub exact: Rat,
    pub limit: f64,
    pub gap: f64,
}

/// CSV for a convergence study, header `n,exact,limit,gap`, '.' decimal.
pub fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut out = String::from("n,exact,limit,gap\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.n,
            format_rat(&row.exact),
            row.limit,
            row.gap
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::{rat, rat_int};

    #[test]
    fn report_json_is_sorted_and_tagged() {
        let report = PairingReport {
            kind: "exact",
            d: 1,
            graph: "2v1e".into(),
            level: Some(1),
            quadrature: None,
            value: Scalar::Exact(rat(-1, 1)),
            terms: vec![PairingTerm {
                partition: Partition::discrete(1),
                tuple: vec![BitVec::new(1, 1), BitVec::new(1, 1)],
                ldeg: rat_int(-4),
                integral: Scalar::Exact(rat(1, 4)),
                contribution: Scalar::Exact(rat_int(-1)),
            }],
        };
        let json = report.to_json();
        let meta_pos = json.find("\"meta\"").expect("meta key present");
        let terms_pos = json.find("\"terms\"").expect("terms key present");
        let value_pos = json.rfind("\"value\"").expect("value key present");
        assert!(
            meta_pos < terms_pos && terms_pos < value_pos,
            "top-level keys emitted in sorted order"
        );
        assert!(json.contains("\"-1/1\""), "exact values print as p/q");
        let parsed: serde_json::Value = serde_json::from_str(&json).expect("report JSON parses");
        assert_eq!(
            parsed["terms"][0]["tuple"],
            serde_json::json!(["1", "1"]),
            "tuples serialize as bit strings"
        );
        assert_eq!(
            parsed["terms"][0]["partition"],
            serde_json::json!([[1]]),
            "partitions serialize as one-based blocks"
        );
        assert_eq!(json, report.to_json(), "serialization is reproducible");
    }

    #[test]
    fn convergence_rows_emit_the_documented_header() {
        let rows = vec![ConvergenceRow {
            n: 4,
            exact: rat(3, 2),
            limit: 1.5,
            gap: 0.0,
        }];
        let csv = convergence_csv(&rows);
        assert!(csv.starts_with("n,exact,limit,gap\n"), "header is fixed");
        assert!(csv.contains("4,3/2,1.5,0"), "rows carry p/q exact values");
    }
}
