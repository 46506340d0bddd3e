//! Line-oriented reports.
//!
//! A report is a sequence of records, one per line:
//!
//! ```text
//! instance vertices=8 edges=8 m=2 edge_connectivity=2
//! outcome status=DECOMPOSED copies=4
//! ```
//!
//! The first token is the record kind; the rest are `key=value` pairs in a
//! fixed order. Values containing whitespace are quoted. The same records
//! serialize to a JSON array of objects with a `kind` member.

use std::fmt;

use serde_json::{Map, Value};

use crate::graph::{edge_connectivity, Graph};
use crate::oracle::Violation;
use crate::pseudo::LemmaDenseReport;
use crate::repair::{FailureReport, StageLog};
use crate::tree::LabelledTree;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Record {
    pub kind: String,
    pub fields: Vec<(String, String)>,
}

impl Record {
    pub fn new(kind: impl Into<String>) -> Record {
        Record {
            kind: kind.into(),
            fields: Vec::new(),
        }
    }

    pub fn field(mut self, key: impl Into<String>, value: impl fmt::Display) -> Record {
        self.fields.push((key.into(), value.to_string()));
        self
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.fields
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.kind)?;
        for (k, v) in &self.fields {
            if v.is_empty() || v.chars().any(char::is_whitespace) || v.contains('"') {
                write!(f, " {k}={v:?}")?;
            } else {
                write!(f, " {k}={v}")?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub records: Vec<Record>,
}

impl Report {
    pub fn push(&mut self, r: Record) {
        self.records.push(r);
    }

    pub fn extend(&mut self, rs: impl IntoIterator<Item = Record>) {
        self.records.extend(rs);
    }

    /// First record of the given kind.
    pub fn find(&self, kind: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.kind == kind)
    }

    pub fn to_text(&self) -> String {
        self.records.iter().map(|r| format!("{r}\n")).collect()
    }

    pub fn to_json(&self) -> String {
        let docs: Vec<Value> = self
            .records
            .iter()
            .map(|r| {
                let mut obj = Map::new();
                obj.insert("kind".into(), Value::String(r.kind.clone()));
                for (k, v) in &r.fields {
                    obj.insert(k.clone(), Value::String(v.clone()));
                }
                Value::Object(obj)
            })
            .collect();
        serde_json::to_string_pretty(&Value::Array(docs)).expect("strings always serialize") + "\n"
    }
}

pub fn instance_record(g: &Graph, tree: &LabelledTree) -> Record {
    let conn = edge_connectivity(g).map_or_else(|_| "n/a".to_string(), |k| k.to_string());
    Record::new("instance")
        .field("vertices", g.vertex_count())
        .field("edges", g.edge_count())
        .field("m", tree.edge_count())
        .field("edge_connectivity", conn)
}

pub fn dense_records(g: &Graph, r: &LemmaDenseReport) -> Vec<Record> {
    let mut out = vec![Record::new("dense")
        .field("eps", r.eps)
        .field("delta", r.delta)
        .field("pairs", r.pairs.len())
        .field("degree_violations", r.violations.len())
        .field("conf_i", r.conf_i)
        .field("degree_condition", r.degree_condition)
        .field("conflict_condition", r.conflict_condition)];
    out.extend(r.violations.iter().map(|p| {
        Record::new("dense_violation")
            .field("vertex", g.name(p.vertex))
            .field("t", p.tree_vertex)
            .field("d_h", p.d_h)
            .field("d_i", p.d_i)
    }));
    out
}

pub fn violation_records(violations: &[Violation]) -> Vec<Record> {
    violations
        .iter()
        .map(|v| {
            Record::new("violation")
                .field("kind", v.kind)
                .field("copy", v.copy.map_or_else(|| "-".to_string(), |c| c.to_string()))
                .field("detail", &v.detail)
        })
        .collect()
}

pub fn stage_record(s: &StageLog) -> Record {
    Record::new("stage")
        .field("i", s.stage)
        .field("attempts", s.attempts)
        .field("bad_before", s.bad_before)
        .field("switches", s.switches)
        .field("resamples", s.resamples)
        .field("h_after", s.h_after)
        .field("iso_after", s.iso_after)
        .field("conf_iso", s.conf_iso)
}

pub fn failure_records(g: &Graph, f: &FailureReport) -> Vec<Record> {
    let mut rec = Record::new("failure")
        .field("stage", f.stage)
        .field("reason", &f.reason)
        .field("seeds_tried", f.seeds_tried.len());
    if let Some(p) = &f.pools {
        rec = rec
            .field("vertex", g.name(p.vertex))
            .field("t", p.tree_vertex)
            .field("targets", p.targets)
            .field("eligible", p.eligible);
    }
    let mut out: Vec<Record> = f.stages.iter().map(stage_record).collect();
    out.push(rec);
    out.extend(violation_records(&f.violations));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn record_formatting() {
        let r = Record::new("outcome").field("status", "FAILED").field("reason", "no partner");
        assert_eq!(r.to_string(), "outcome status=FAILED reason=\"no partner\"");
        assert_eq!(r.get("status"), Some("FAILED"));
        let mut rep = Report::default();
        rep.push(r);
        let json: Value = serde_json::from_str(&rep.to_json()).unwrap();
        assert_eq!(json[0]["kind"], "outcome");
        assert_eq!(json[0]["reason"], "no partner");
    }
}
