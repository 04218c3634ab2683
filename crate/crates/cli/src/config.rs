//! JSON scenario files.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde_json::{Map, Value};

use crate::checks::ToleranceTable;
use crate::error::ConfigError;
use crate::fields::{DEFAULT_PROFILE, DEFAULT_SCALE};

/// Smallest grid on which the suites' bandwidth-2 random fields stay within
/// bandwidth ≤ n/8.
pub const MIN_SUITE_GRID: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Rattleback,
    FluidHelicity,
    FluidEuler,
    FoliationGv,
    VerifyAll,
}

impl Kind {
    const NAMES: [(&'static str, Kind); 5] = [
        ("rattleback", Kind::Rattleback),
        ("fluid-helicity", Kind::FluidHelicity),
        ("fluid-euler", Kind::FluidEuler),
        ("foliation-gv", Kind::FoliationGv),
        ("verify-all", Kind::VerifyAll),
    ];

    pub fn name(self) -> &'static str {
        Self::NAMES.iter().find(|(_, k)| *k == self).expect("listed").0
    }

    fn parse(s: &str) -> Option<Self> {
        Self::NAMES.iter().find(|(n, _)| *n == s).map(|(_, k)| *k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    Rk4,
    Rk45,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Outputs {
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub dump_fields: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub kind: Kind,
    pub grid: usize,
    pub foliation_grid: usize,
    pub dt: f64,
    /// Kind-specific default when absent.
    pub t_final: Option<f64>,
    pub seed: u64,
    pub h: f64,
    pub ic: [f64; 3],
    pub method: MethodChoice,
    pub rk45_tol: f64,
    pub profile: String,
    pub scale: String,
    pub field: Option<String>,
    pub tolerances: ToleranceTable,
    pub outputs: Outputs,
}

pub const DEFAULT_SEED: u64 = 271828;

impl Scenario {
    pub fn new(kind: Kind) -> Self {
        Self {
            kind,
            grid: 32,
            foliation_grid: 48,
            dt: 1e-3,
            t_final: None,
            seed: DEFAULT_SEED,
            h: -2.0,
            ic: [0.1, 0.2, 1.0],
            method: MethodChoice::Rk4,
            rk45_tol: 1e-10,
            profile: DEFAULT_PROFILE.to_string(),
            scale: DEFAULT_SCALE.to_string(),
            field: None,
            tolerances: ToleranceTable::default(),
            outputs: Outputs::default(),
        }
    }

    pub fn t_final(&self) -> f64 {
        self.t_final.unwrap_or(match self.kind {
            Kind::Rattleback => 100.0,
            _ => 0.5,
        })
    }

    /// Checks that do not need any field data.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let schema = |field: &str, message: String| ConfigError::Schema {
            field: field.to_string(),
            message,
        };
        for (field, n) in [("grid", self.grid), ("foliation_grid", self.foliation_grid)] {
            if n % 2 != 0 || n < MIN_SUITE_GRID {
                return Err(schema(field, format!("must be even and at least {MIN_SUITE_GRID}, got {n}")));
            }
        }
        for (field, v) in [("dt", self.dt), ("t_final", self.t_final()), ("rk45_tol", self.rk45_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(schema(field, format!("must be positive, got {v}")));
            }
        }
        if !self.h.is_finite() {
            return Err(schema("h", "must be finite".into()));
        }
        if matches!(self.kind, Kind::FluidHelicity | Kind::FluidEuler) && self.field.is_none() {
            return Err(schema("field", format!("required for kind `{}`", self.kind.name())));
        }
        for (field, src) in [("profile", &self.profile), ("scale", &self.scale)] {
            casimir_lab::fieldexpr::parse(src).map_err(|e| schema(field, e.to_string()))?;
        }
        Ok(())
    }
}

const KEYS: &[&str] = &[
    "kind",
    "grid",
    "foliation_grid",
    "dt",
    "t_final",
    "seed",
    "h",
    "ic",
    "method",
    "rk45_tol",
    "profile",
    "scale",
    "field",
    "tolerances",
    "outputs",
];

const OUTPUT_KEYS: &[&str] = &["report", "csv", "dump_fields"];

fn take<T: DeserializeOwned>(map: &mut Map<String, Value>, field: &str) -> Result<Option<T>, ConfigError> {
    match map.remove(field) {
        None => Ok(None),
        Some(v) => serde_json::from_value(v).map(Some).map_err(|e| ConfigError::Schema {
            field: field.to_string(),
            message: e.to_string(),
        }),
    }
}

fn unknown_keys(map: &Map<String, Value>, known: &[&str], prefix: &str) -> Vec<String> {
    map.keys()
        .filter(|k| !known.contains(&k.as_str()))
        .map(|k| format!("{prefix}{k}"))
        .collect()
}

pub fn parse_config(text: &str) -> Result<Scenario, ConfigError> {
    let value: Value = serde_json::from_str(text).map_err(|e| ConfigError::Json(e.to_string()))?;
    let Value::Object(mut map) = value else {
        return Err(ConfigError::Json("top level must be an object".into()));
    };
    let mut unknown = unknown_keys(&map, KEYS, "");
    if let Some(Value::Object(out)) = map.get("outputs") {
        unknown.extend(unknown_keys(out, OUTPUT_KEYS, "outputs."));
    }
    if !unknown.is_empty() {
        return Err(ConfigError::UnknownKeys(unknown));
    }

    let kind_name: String = take(&mut map, "kind")?.ok_or_else(|| ConfigError::Schema {
        field: "kind".into(),
        message: "missing".into(),
    })?;
    let kind = Kind::parse(&kind_name).ok_or_else(|| ConfigError::Schema {
        field: "kind".into(),
        message: format!(
            "unknown kind `{kind_name}`, expected one of {}",
            Kind::NAMES.map(|(n, _)| n).join(", ")
        ),
    })?;
    let mut sc = Scenario::new(kind);
    if let Some(v) = take(&mut map, "grid")? {
        sc.grid = v;
    }
    if let Some(v) = take(&mut map, "foliation_grid")? {
        sc.foliation_grid = v;
    }
    if let Some(v) = take(&mut map, "dt")? {
        sc.dt = v;
    }
    sc.t_final = take(&mut map, "t_final")?;
    if let Some(v) = take(&mut map, "seed")? {
        sc.seed = v;
    }
    if let Some(v) = take(&mut map, "h")? {
        sc.h = v;
    }
    if let Some(v) = take(&mut map, "ic")? {
        sc.ic = v;
    }
    if let Some(m) = take::<String>(&mut map, "method")? {
        sc.method = match m.as_str() {
            "rk4" => MethodChoice::Rk4,
            "rk45" => MethodChoice::Rk45,
            other => {
                return Err(ConfigError::Schema {
                    field: "method".into(),
                    message: format!("unknown method `{other}`, expected rk4 or rk45"),
                })
            }
        };
    }
    if let Some(v) = take(&mut map, "rk45_tol")? {
        sc.rk45_tol = v;
    }
    if let Some(v) = take(&mut map, "profile")? {
        sc.profile = v;
    }
    if let Some(v) = take(&mut map, "scale")? {
        sc.scale = v;
    }
    sc.field = take(&mut map, "field")?;
    if let Some(t) = take::<BTreeMap<String, f64>>(&mut map, "tolerances")? {
        sc.tolerances = ToleranceTable::with_overrides(t).map_err(|names| ConfigError::Schema {
            field: "tolerances".into(),
            message: format!("unknown checks: {}", names.join(", ")),
        })?;
    }
    if let Some(mut out) = take::<Map<String, Value>>(&mut map, "outputs")? {
        sc.outputs = Outputs {
            report: take(&mut out, "report")?,
            csv: take(&mut out, "csv")?,
            dump_fields: take(&mut out, "dump_fields")?,
        };
    }
    sc.validate()?;
    Ok(sc)
}

pub fn load_config(path: &Path) -> Result<Scenario, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|err| ConfigError::Missing {
        path: path.to_path_buf(),
        err,
    })?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_foliation_config_gets_defaults() {
        let sc = parse_config(r#"{"kind":"foliation-gv","profile":"0.3*sin(2*pi*z)"}"#).unwrap();
        assert_eq!(sc.kind, Kind::FoliationGv);
        assert_eq!((sc.grid, sc.foliation_grid, sc.dt), (32, 48, 1e-3));
        assert_eq!(sc.profile, "0.3*sin(2*pi*z)");
        assert_eq!(sc.tolerances.get("foliation.chain_eta"), 1e-9);
    }

    #[test]
    fn bogus_kind_names_the_field() {
        let err = parse_config(r#"{"kind":"bogus"}"#).unwrap_err();
        assert!(matches!(&err, ConfigError::Schema { field, .. } if field == "kind"), "{err}");
    }

    #[test]
    fn unknown_keys_are_all_listed() {
        let err = parse_config(r#"{"kind":"verify-all","gird":32,"outputs":{"reprot":"x"},"zz":1}"#).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("gird") && msg.contains("zz") && msg.contains("outputs.reprot"), "{msg}");
    }

    #[test]
    fn tolerance_overrides_and_schema_errors() {
        let sc = parse_config(r#"{"kind":"verify-all","tolerances":{"fluid.leaf_loops":1e-9}}"#).unwrap();
        assert_eq!(sc.tolerances.get("fluid.leaf_loops"), 1e-9);
        let err = parse_config(r#"{"kind":"verify-all","tolerances":{"nope":1}}"#).unwrap_err();
        assert!(err.to_string().contains("nope"));
        let err = parse_config(r#"{"kind":"verify-all","grid":"big"}"#).unwrap_err();
        assert!(matches!(&err, ConfigError::Schema { field, .. } if field == "grid"));
        let err = parse_config(r#"{"kind":"verify-all","grid":12}"#).unwrap_err();
        assert!(matches!(&err, ConfigError::Schema { field, .. } if field == "grid"));
        let err = parse_config(r#"{"kind":"fluid-euler"}"#).unwrap_err();
        assert!(matches!(&err, ConfigError::Schema { field, .. } if field == "field"));
    }
}
