//! Report serialisation. Suite reports carry no timings so that identical runs
//! produce identical bytes; wall times go to `timing.json`.

use crate::suites::{Check, Outcome};
use serde::Serialize;
use serde_json::{Map, Value};
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Serialize)]
pub struct SuiteReport<'a> {
    pub suite: &'a str,
    pub checks: &'a [Check],
    pub meta: Map<String, Value>,
}

pub fn render(suite: &str, outcome: &Outcome, mut meta: Map<String, Value>) -> String {
    for (k, v) in &outcome.meta {
        meta.insert(k.clone(), v.clone());
    }
    meta.insert("pass".into(), outcome.pass().into());
    let files: Vec<Value> = outcome.files.iter().map(|(n, _)| n.clone().into()).collect();
    meta.insert("files".into(), files.into());
    let report = SuiteReport { suite, checks: &outcome.checks, meta };
    let mut s = serde_json::to_string_pretty(&report).expect("reports serialise");
    s.push('\n');
    s
}

pub fn write_suite(dir: &Path, suite: &str, outcome: &Outcome, meta: Map<String, Value>) -> std::io::Result<()> {
    std::fs::write(dir.join(format!("{suite}.json")), render(suite, outcome, meta))?;
    for (name, bytes) in &outcome.files {
        std::fs::write(dir.join(name), bytes)?;
    }
    Ok(())
}

pub fn write_timing(dir: &Path, seconds: &BTreeMap<String, f64>) -> std::io::Result<()> {
    let mut s = serde_json::to_string_pretty(seconds).expect("timings serialise");
    s.push('\n');
    std::fs::write(dir.join("timing.json"), s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schema_has_suite_checks_meta() {
        let outcome = Outcome {
            checks: vec![Check { name: "a".into(), residual: 1e-12, tol: 1e-10, pass: true }],
            ..Outcome::default()
        };
        let v: Value = serde_json::from_str(&render("lalg", &outcome, Map::new())).unwrap();
        assert_eq!(v["suite"], "lalg");
        assert_eq!(v["checks"][0]["name"], "a");
        assert_eq!(v["checks"][0]["pass"], true);
        assert_eq!(v["meta"]["pass"], true);
        let keys: Vec<&String> = v.as_object().unwrap().keys().collect();
        assert_eq!(keys.len(), 3);
    }
}
