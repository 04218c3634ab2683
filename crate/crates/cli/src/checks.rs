//! Named checks, their default tolerances and report records.

use std::collections::BTreeMap;

use serde::Serialize;

/// A registered check. `criterion` ties the check to a numbered acceptance
/// criterion when it has one.
#[derive(Debug, Clone, Copy)]
pub struct CheckSpec {
    pub name: &'static str,
    pub criterion: Option<u8>,
    pub tolerance: f64,
}

const fn spec(name: &'static str, criterion: u8, tolerance: f64) -> CheckSpec {
    CheckSpec {
        name,
        criterion: if criterion == 0 { None } else { Some(criterion) },
        tolerance,
    }
}

pub const REGISTRY: &[CheckSpec] = &[
    spec("rattleback.rk4_energy_drift", 1, 1e-8),
    spec("rattleback.rk4_casimir_drift", 1, 1e-8),
    spec("rattleback.rk45_energy_drift", 0, 1e-8),
    spec("rattleback.rk45_casimir_drift", 0, 1e-8),
    spec("rattleback.structure_antisymmetry", 0, 0.0),
    spec("rattleback.jacobi", 0, 1e-13),
    spec("rattleback.bracket_antisymmetry", 0, 1e-13),
    spec("rattleback.casimir_kernel", 0, 1e-12),
    spec("rattleback.p_reflection", 0, 1e-12),
    spec("rattleback.singular_rhs", 2, 0.0),
    spec("rattleback.singular_s_drift", 2, 0.0),
    spec("rattleback.singular_poisson", 2, 0.0),
    spec("rattleback.singular_bracket", 2, 0.0),
    spec("forms.dd_residual", 3, 1e-12),
    spec("forms.contraction_identity", 3, 1e-12),
    spec("fluid.beltrami_helicity", 4, 1e-10),
    spec("fluid.exact_helicity", 0, 1e-12),
    spec("fluid.gauge_helicity_shift", 0, 1e-11),
    spec("fluid.euler_energy_drift", 5, 1e-6),
    spec("fluid.euler_helicity_drift", 5, 1e-6),
    spec("fluid.helicity_gradient", 6, 1e-6),
    spec("fluid.helicity_gradient_gauge", 0, 1e-10),
    spec("fluid.gradient_divergence", 0, 1e-10),
    spec("fluid.coadjoint_adjunction", 0, 1e-9),
    spec("fluid.orthogonality", 7, 1e-10),
    spec("fluid.helicity_density", 7, 1e-10),
    spec("fluid.leaf_loops", 7, 1e-10),
    spec("fluid.vorticity_tangency", 0, 1e-10),
    spec("foliation.integrability", 8, 1e-9),
    spec("foliation.chain_eta", 8, 1e-9),
    spec("foliation.chain_gamma", 8, 1e-9),
    spec("foliation.chain_solvability", 8, 1e-9),
    spec("foliation.gv_graph", 9, 1e-10),
    spec("foliation.gv_spread", 9, 1e-9),
    spec("foliation.chi_tangency", 10, 1e-8),
    spec("foliation.chi_closure", 10, 1e-8),
    spec("foliation.chi_gauge_shift", 10, 1e-10),
    spec("foliation.variation_profile", 11, 1e-6),
    spec("foliation.variation_rescaling", 11, 1e-6),
    spec("foliation.variation_diffeo", 11, 1e-6),
    spec("foliation.tangency_gate", 0, 0.0),
    spec("foliation.transport_gv_drift", 12, 1e-6),
    spec("foliation.degeneracy_pairing", 12, 1e-8),
    spec("foliation.degeneracy_bracket", 12, 1e-8),
    spec("foliation.xi_conditions", 0, 1e-9),
    spec("foliation.restricted_bracket_dual", 0, 1e-10),
];

pub fn lookup(name: &str) -> Option<&'static CheckSpec> {
    REGISTRY.iter().find(|c| c.name == name)
}

/// Default tolerances with per-check overrides.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ToleranceTable {
    overrides: BTreeMap<String, f64>,
}

impl ToleranceTable {
    /// Fails with the list of names that are not registered checks.
    pub fn with_overrides(overrides: BTreeMap<String, f64>) -> Result<Self, Vec<String>> {
        let unknown: Vec<String> = overrides.keys().filter(|k| lookup(k).is_none()).cloned().collect();
        if unknown.is_empty() {
            Ok(Self { overrides })
        } else {
            Err(unknown)
        }
    }

    pub fn get(&self, name: &str) -> f64 {
        self.overrides
            .get(name)
            .copied()
            .unwrap_or_else(|| lookup(name).unwrap_or_else(|| panic!("unregistered check {name}")).tolerance)
    }
}

/// One line of a verification report. Non-finite values serialize as `null`
/// and never pass.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub criterion: Option<u8>,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(name: &str, value: f64, tolerance: f64) -> Self {
        Self {
            check: name.to_string(),
            criterion: lookup(name).and_then(|c| c.criterion),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }
}

/// Collects check records and notes for one suite run.
#[derive(Debug, Default)]
pub struct Recorder {
    tolerances: ToleranceTable,
    pub records: Vec<CheckRecord>,
    pub notes: Vec<String>,
}

impl Recorder {
    pub fn new(tolerances: ToleranceTable) -> Self {
        Self {
            tolerances,
            records: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances.get(name)
    }

    pub fn record(&mut self, name: &str, value: f64) {
        let tol = self.tolerances.get(name);
        log::info!("{name}: {value:e} (tolerance {tol:e})");
        self.records.push(CheckRecord::new(name, value, tol));
    }

    /// Run `f` and record its values under `names`. An error fails every
    /// named check and is kept as a note.
    pub fn group<const N: usize>(
        &mut self,
        names: [&str; N],
        f: impl FnOnce() -> Result<[f64; N], Box<dyn std::error::Error>>,
    ) {
        match f() {
            Ok(values) => {
                for (name, v) in names.iter().zip(values) {
                    self.record(name, v);
                }
            }
            Err(err) => {
                self.notes.push(format!("{}: {err}", names.join(", ")));
                for name in names {
                    self.record(name, f64::NAN);
                }
            }
        }
    }

    pub fn check(&mut self, name: &str, f: impl FnOnce() -> Result<f64, Box<dyn std::error::Error>>) {
        self.group([name], || f().map(|v| [v]));
    }
}
