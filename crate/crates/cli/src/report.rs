use std::collections::BTreeMap;

use serde::Serialize;

use crate::checks::CheckRecord;

/// Machine-readable verification report. Contains no timestamps, so a fixed
/// scenario and seed reproduce it byte for byte.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub library: &'static str,
    pub version: &'static str,
    pub suite: String,
    pub grid: usize,
    pub foliation_grid: usize,
    pub dt: f64,
    pub seed: u64,
    pub pass: bool,
    pub checks: Vec<CheckRecord>,
    /// Computed quantities that are not checks (GV, helicity, ...).
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub values: BTreeMap<String, f64>,
    pub notes: Vec<String>,
}

/// Grid and seed parameters shared by every report header.
#[derive(Debug, Clone, Copy)]
pub struct Header {
    pub grid: usize,
    pub foliation_grid: usize,
    pub dt: f64,
    pub seed: u64,
}

impl Report {
    pub fn new(suite: &str, header: Header) -> Self {
        Self {
            library: "casimir-lab",
            version: casimir_lab::VERSION,
            suite: suite.to_string(),
            grid: header.grid,
            foliation_grid: header.foliation_grid,
            dt: header.dt,
            seed: header.seed,
            pass: true,
            checks: Vec::new(),
            values: BTreeMap::new(),
            notes: Vec::new(),
        }
    }

    pub fn extend(&mut self, records: Vec<CheckRecord>, notes: Vec<String>) {
        self.checks.extend(records);
        self.notes.extend(notes);
        self.pass = self.checks.iter().all(|c| c.pass);
    }

    pub fn failing(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.check.as_str()).collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// The `{name: {residual, tolerance, pass}}` layout.
    pub fn to_keyed_json(&self) -> String {
        let map: BTreeMap<&str, serde_json::Value> = self
            .checks
            .iter()
            .map(|c| {
                (
                    c.check.as_str(),
                    serde_json::json!({"residual": c.value, "tolerance": c.tolerance, "pass": c.pass}),
                )
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&map).expect("report serializes");
        s.push('\n');
        s
    }
}
