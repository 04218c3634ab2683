//! Codimension-1 foliations and the Godbillon-Vey invariant.
//!
//! A nonvanishing integrable 1-form `α` (`α∧dα = 0`) defines a foliation by
//! `ker α`. The chain solved here is
//!
//! ```text
//! dα = α∧η,   dη = α∧γ,   χ = 2(η∧γ − dγ),   GV = ∫ η∧dη
//! ```
//!
//! with the pointwise representatives `η = ι_X dα`, `γ = ι_X dη` for the
//! reference field `X = α♯/|α|²` (so `ι_X α = 1`). Since `ι_X(α∧dα) = dα −
//! α∧ι_X dα`, the defect `dα − α∧η` is exactly the contraction of the
//! integrability residual, and likewise for `γ`.
//!
//! Gauge freedom `η → η + fα`, `γ → γ + fη − df + gα` changes `χ` by
//! `−2(ĝ dα + d(ĝα))` with `ĝ = g − f²/2`; pairings of `χ` against
//! directions tangent to the space of integrable forms do not see that term.

use thiserror::Error;

use std::f64::consts::PI;

use crate::forms3::{
    d, integrate3, interior, lie_derivative, transport, wedge, Form, FormsError, Loop, ScalarField, VectorField,
};

#[derive(Debug, Error)]
pub enum FoliationError {
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("inconsistent chain: {0}")]
    Inconsistency(String),
}

/// Acceptance thresholds for a foliated state. Residuals are relative (see
/// [`ChainResiduals`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Minimum pointwise `|α|`.
    pub nonvanish_floor: f64,
    /// `‖α∧dα‖ / (‖α‖‖dα‖)`.
    pub integrability: f64,
    /// Defects of `dα = α∧η`, `dη = α∧γ` and `α∧dη = 0`.
    pub chain: f64,
    /// `α∧χ = 0` and `dχ = η∧χ`.
    pub chi: f64,
    /// Tangency and `d ν = η∧ν` checks on degeneracy fields.
    pub xi: f64,
    /// Step used to check that a variation stays integrable.
    pub tangency_eps: f64,
    /// Allowed integrability residual of `α + ε α̇`.
    pub tangency: f64,
    /// Max `|ι_X α − 1|`.
    pub reference: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            nonvanish_floor: 1e-6,
            integrability: 1e-9,
            chain: 1e-9,
            chi: 1e-8,
            xi: 1e-9,
            tangency_eps: 1e-4,
            tangency: 1e-6,
            reference: 1e-10,
        }
    }
}

/// `num / scale`, with `0/0 = 0`.
fn relative(num: f64, scale: f64) -> f64 {
    if num == 0.0 {
        0.0
    } else if scale == 0.0 {
        f64::INFINITY
    } else {
        num / scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrabilityReport {
    /// `‖α∧dα‖` (L² over the torus).
    pub absolute: f64,
    /// `‖α∧dα‖ / (‖α‖‖dα‖)`.
    pub relative: f64,
    /// Pointwise max of `|α∧dα|`.
    pub max_density: f64,
    /// Pointwise min of `|α|`.
    pub min_norm: f64,
}

impl IntegrabilityReport {
    pub fn is_integrable(&self, tol: f64) -> bool {
        self.relative <= tol
    }
}

pub fn check_integrability(alpha: &Form) -> Result<IntegrabilityReport, FoliationError> {
    expect_one_form(alpha, "check_integrability")?;
    let da = d(alpha)?;
    let density = wedge(alpha, &da)?;
    let absolute = density.l2_norm();
    Ok(IntegrabilityReport {
        absolute,
        relative: relative(absolute, alpha.l2_norm() * da.l2_norm()),
        max_density: density.max_abs(),
        min_norm: alpha.pointwise_norm_sq().min().sqrt(),
    })
}

fn expect_one_form(f: &Form, op: &'static str) -> Result<(), FoliationError> {
    if f.rank() != 1 {
        return Err(FormsError::Rank { op, rank: f.rank() }.into());
    }
    Ok(())
}

/// `X = α♯/|α|²` (flat metric), so that `ι_X α = 1`.
pub fn reference_field(alpha: &Form, floor: f64) -> Result<VectorField, FoliationError> {
    expect_one_form(alpha, "reference_field")?;
    let n2 = alpha.pointwise_norm_sq();
    let min = n2.min().sqrt();
    if !(min >= floor) {
        return Err(FoliationError::Precondition(format!(
            "|α| drops to {min:e}, below the nonvanishing floor {floor:e}"
        )));
    }
    let inv = n2.map(|v| 1.0 / v);
    Ok(VectorField::sharp(alpha)?.times(&inv))
}

fn gate_integrable(alpha: &Form, tol: &Tolerances) -> Result<IntegrabilityReport, FoliationError> {
    let rep = check_integrability(alpha)?;
    if !(rep.min_norm >= tol.nonvanish_floor) {
        return Err(FoliationError::Precondition(format!(
            "|α| drops to {:e}, below the nonvanishing floor {:e}",
            rep.min_norm, tol.nonvanish_floor
        )));
    }
    if !rep.is_integrable(tol.integrability) {
        return Err(FoliationError::Precondition(format!(
            "α∧dα relative residual {:e} exceeds {:e}",
            rep.relative, tol.integrability
        )));
    }
    Ok(rep)
}

/// `η = ι_X dα`, satisfying `dα = α∧η` whenever `α` is integrable.
pub fn solve_eta(alpha: &Form, tol: &Tolerances) -> Result<Form, FoliationError> {
    gate_integrable(alpha, tol)?;
    let x = reference_field(alpha, tol.nonvanish_floor)?;
    let eta = interior(&x, &d(alpha)?)?;
    let defect = eta_defect(alpha, &eta)?;
    if defect > tol.chain {
        return Err(FoliationError::Inconsistency(format!(
            "dα − α∧η relative residual {defect:e}"
        )));
    }
    Ok(eta)
}

fn eta_defect(alpha: &Form, eta: &Form) -> Result<f64, FoliationError> {
    let da = d(alpha)?;
    let res = (&da - &wedge(alpha, eta)?).l2_norm();
    Ok(relative(res, da.l2_norm() + alpha.l2_norm() * eta.l2_norm()))
}

/// `γ = ι_X dη`, satisfying `dη = α∧γ`.
pub fn solve_gamma(alpha: &Form, x_ref: &VectorField, eta: &Form, tol: &Tolerances) -> Result<Form, FoliationError> {
    let gamma = interior(x_ref, &d(eta)?)?;
    let defect = gamma_defect(alpha, eta, &gamma)?;
    if defect > tol.chain {
        return Err(FoliationError::Inconsistency(format!(
            "dη − α∧γ relative residual {defect:e}"
        )));
    }
    Ok(gamma)
}

fn gamma_defect(alpha: &Form, eta: &Form, gamma: &Form) -> Result<f64, FoliationError> {
    let de = d(eta)?;
    let res = (&de - &wedge(alpha, gamma)?).l2_norm();
    Ok(relative(res, de.l2_norm() + alpha.l2_norm() * gamma.l2_norm()))
}

/// `χ = 2(η∧γ − dγ)`.
pub fn chi_from(eta: &Form, gamma: &Form) -> Result<Form, FoliationError> {
    Ok((&wedge(eta, gamma)? - &d(gamma)?).scale(2.0))
}

/// Relative residuals of every defining identity of a foliated state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainResiduals {
    pub integrability: f64,
    /// `‖dα − α∧η‖ / (‖dα‖ + ‖α‖‖η‖)`
    pub eta: f64,
    /// `‖dη − α∧γ‖ / (‖dη‖ + ‖α‖‖γ‖)`
    pub gamma: f64,
    /// `‖α∧dη‖ / (‖α‖‖dη‖)`
    pub solvability: f64,
    /// `‖α∧χ‖ / (‖α‖‖χ‖)`
    pub chi_tangency: f64,
    /// `‖dχ − η∧χ‖ / (‖dχ‖ + ‖η‖‖χ‖)`
    pub chi_closure: f64,
    /// `max |ι_X α − 1|`
    pub reference: f64,
}

impl ChainResiduals {
    fn compute(alpha: &Form, eta: &Form, gamma: &Form, chi: &Form, x_ref: &VectorField) -> Result<Self, FoliationError> {
        let integrability = check_integrability(alpha)?.relative;
        let de = d(eta)?;
        let solvability = relative(wedge(alpha, &de)?.l2_norm(), alpha.l2_norm() * de.l2_norm());
        let chi_tangency = relative(wedge(alpha, chi)?.l2_norm(), alpha.l2_norm() * chi.l2_norm());
        let dchi = d(chi)?;
        let chi_closure = relative(
            (&dchi - &wedge(eta, chi)?).l2_norm(),
            dchi.l2_norm() + eta.l2_norm() * chi.l2_norm(),
        );
        let reference = interior(x_ref, alpha)?.comp(0).map(|v| v - 1.0).max_abs();
        Ok(Self {
            integrability,
            eta: eta_defect(alpha, eta)?,
            gamma: gamma_defect(alpha, eta, gamma)?,
            solvability,
            chi_tangency,
            chi_closure,
            reference,
        })
    }

    /// Names and values, in a fixed order.
    pub fn entries(&self) -> [(&'static str, f64); 7] {
        [
            ("integrability", self.integrability),
            ("eta", self.eta),
            ("gamma", self.gamma),
            ("solvability", self.solvability),
            ("chi_tangency", self.chi_tangency),
            ("chi_closure", self.chi_closure),
            ("reference", self.reference),
        ]
    }

    pub fn within(&self, tol: &Tolerances) -> bool {
        self.integrability <= tol.integrability
            && self.eta <= tol.chain
            && self.gamma <= tol.chain
            && self.solvability <= tol.chain
            && self.chi_tangency <= tol.chi
            && self.chi_closure <= tol.chi
            && self.reference <= tol.reference
    }

    /// Largest of the integrability and η/γ chain residuals.
    pub fn max_chain(&self) -> f64 {
        self.integrability.max(self.eta).max(self.gamma).max(self.solvability)
    }
}

/// A nonvanishing integrable 1-form with its solved chain.
#[derive(Debug, Clone)]
pub struct FoliatedState {
    alpha: Form,
    eta: Form,
    gamma: Form,
    chi: Form,
    x_ref: VectorField,
    residuals: ChainResiduals,
    tolerances: Tolerances,
}

impl FoliatedState {
    /// Solve the chain with default tolerances, rejecting states whose
    /// residuals exceed them.
    pub fn new(alpha: Form) -> Result<Self, FoliationError> {
        Self::with_tolerances(alpha, Tolerances::default())
    }

    pub fn with_tolerances(alpha: Form, tolerances: Tolerances) -> Result<Self, FoliationError> {
        let eta = solve_eta(&alpha, &tolerances)?;
        let x_ref = reference_field(&alpha, tolerances.nonvanish_floor)?;
        let gamma = solve_gamma(&alpha, &x_ref, &eta, &tolerances)?;
        let state = Self::assemble(alpha, eta, gamma, x_ref, tolerances)?;
        state.verify()?;
        Ok(state)
    }

    /// Solve the chain without gating on integrability; only a vanishing `α`
    /// is fatal. Check [`FoliatedState::accepted`] before trusting results.
    pub fn solve_lenient(alpha: Form, tolerances: Tolerances) -> Result<Self, FoliationError> {
        expect_one_form(&alpha, "solve_lenient")?;
        let x_ref = reference_field(&alpha, tolerances.nonvanish_floor)?;
        let eta = interior(&x_ref, &d(&alpha)?)?;
        let gamma = interior(&x_ref, &d(&eta)?)?;
        Self::assemble(alpha, eta, gamma, x_ref, tolerances)
    }

    /// Build from a user-chosen `(η, γ)` gauge, e.g. a hand-derived one.
    pub fn from_parts(alpha: Form, eta: Form, gamma: Form, tolerances: Tolerances) -> Result<Self, FoliationError> {
        expect_one_form(&alpha, "from_parts")?;
        expect_one_form(&eta, "from_parts")?;
        expect_one_form(&gamma, "from_parts")?;
        let x_ref = reference_field(&alpha, tolerances.nonvanish_floor)?;
        let state = Self::assemble(alpha, eta, gamma, x_ref, tolerances)?;
        state.verify()?;
        Ok(state)
    }

    fn assemble(
        alpha: Form,
        eta: Form,
        gamma: Form,
        x_ref: VectorField,
        tolerances: Tolerances,
    ) -> Result<Self, FoliationError> {
        let chi = chi_from(&eta, &gamma)?;
        let residuals = ChainResiduals::compute(&alpha, &eta, &gamma, &chi, &x_ref)?;
        Ok(Self {
            alpha,
            eta,
            gamma,
            chi,
            x_ref,
            residuals,
            tolerances,
        })
    }

    fn verify(&self) -> Result<(), FoliationError> {
        if self.residuals.within(&self.tolerances) {
            return Ok(());
        }
        let t = &self.tolerances;
        let limits = [t.integrability, t.chain, t.chain, t.chain, t.chi, t.chi, t.reference];
        let failing: Vec<String> = self
            .residuals
            .entries()
            .iter()
            .zip(limits)
            .filter(|((_, v), lim)| !(*v <= *lim))
            .map(|((name, v), lim)| format!("{name} = {v:e} > {lim:e}"))
            .collect();
        Err(FoliationError::Inconsistency(failing.join(", ")))
    }

    pub fn accepted(&self) -> bool {
        self.residuals.within(&self.tolerances)
    }

    pub fn alpha(&self) -> &Form {
        &self.alpha
    }

    pub fn eta(&self) -> &Form {
        &self.eta
    }

    pub fn gamma(&self) -> &Form {
        &self.gamma
    }

    pub fn chi(&self) -> &Form {
        &self.chi
    }

    pub fn x_ref(&self) -> &VectorField {
        &self.x_ref
    }

    pub fn residuals(&self) -> &ChainResiduals {
        &self.residuals
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tolerances
    }

    /// `GV = ∫ η∧dη`.
    pub fn godbillon_vey(&self) -> Result<f64, FoliationError> {
        godbillon_vey_of(&self.eta)
    }

    /// Apply `η → η + fα`, `γ → γ + fη − df + gα` and recompute `χ`.
    pub fn gauge_shift(&self, f: &ScalarField, g: &ScalarField) -> Result<GaugeShift, FoliationError> {
        let df = d(&Form::scalar(f.clone()))?;
        let eta = &self.eta + &self.alpha.times(f);
        let gamma = &(&(&self.gamma + &self.eta.times(f)) - &df) + &self.alpha.times(g);
        let state = Self::assemble(self.alpha.clone(), eta, gamma, self.x_ref.clone(), self.tolerances)?;

        let effective = g - &(f * f).scale(0.5);
        let predicted = &self.chi + &chi_shift(&self.alpha, &effective)?;
        let diff = (&state.chi - &predicted).l2_norm();
        let chi_shift_residual = relative(diff, self.chi.l2_norm() + state.chi.l2_norm());
        Ok(GaugeShift {
            state,
            chi_shift_residual,
        })
    }

    /// `∫ α̇∧χ`, the first variation of GV along `α̇`. The direction must keep
    /// `α + ε α̇` integrable at `ε = tangency_eps`.
    pub fn gv_variation(&self, alpha_dot: &Form) -> Result<f64, FoliationError> {
        expect_one_form(alpha_dot, "gv_variation")?;
        let eps = self.tolerances.tangency_eps;
        let moved = &self.alpha + &alpha_dot.scale(eps);
        let rep = check_integrability(&moved)?;
        if !(rep.relative <= self.tolerances.tangency) {
            return Err(FoliationError::Precondition(format!(
                "variation leaves the integrable forms: residual {:e} at ε = {eps:e}",
                rep.relative
            )));
        }
        Ok(integrate3(&wedge(alpha_dot, &self.chi)?)?)
    }

    /// Build the field `V` with `ι_V μ = f dα + d(fα)` and verify that it is
    /// tangent to the leaves and satisfies `d(ι_V μ) = η∧ι_V μ`.
    pub fn xi_generator(&self, f: &ScalarField) -> Result<XiGenerator, FoliationError> {
        let fs = Form::scalar(f.clone());
        let da = d(&self.alpha)?;
        let nu = &da.times(f) + &d(&wedge(&fs, &self.alpha)?)?;
        let v = VectorField::from_two_form(&nu)?;
        let (tangency, condon) = self.degeneracy_conditions(&v)?;
        if tangency > self.tolerances.xi || condon > self.tolerances.xi {
            return Err(FoliationError::Inconsistency(format!(
                "degeneracy field checks failed: tangency {tangency:e}, dν − η∧ν {condon:e}"
            )));
        }
        Ok(XiGenerator {
            f: f.clone(),
            v,
            tangency,
            condon,
        })
    }

    /// Relative residuals of `ι_A α = 0` and `d(ι_A μ) = η∧ι_A μ`.
    pub fn degeneracy_conditions(&self, a: &VectorField) -> Result<(f64, f64), FoliationError> {
        let tangency = relative(interior(a, &self.alpha)?.l2_norm(), self.alpha.l2_norm() * a.l2_norm());
        let nu = a.to_two_form();
        let dnu = d(&nu)?;
        let condon = relative(
            (&dnu - &wedge(&self.eta, &nu)?).l2_norm(),
            dnu.l2_norm() + self.eta.l2_norm() * nu.l2_norm(),
        );
        Ok((tangency, condon))
    }

    /// `⟨α, [a, v]⟩` for `a` satisfying both degeneracy conditions.
    pub fn bracket_degeneracy_check(&self, a: &VectorField, v: &VectorField) -> Result<DegeneracyCheck, FoliationError> {
        let (tangency, condon) = self.degeneracy_conditions(a)?;
        if tangency > self.tolerances.xi || condon > self.tolerances.xi {
            return Err(FoliationError::Precondition(format!(
                "field is not a degeneracy candidate: tangency {tangency:e}, dν − η∧ν {condon:e}"
            )));
        }
        Ok(DegeneracyCheck {
            value: self.restricted_bracket(a, v)?,
            scale: self.alpha.l2_norm() * a.l2_norm() * v.l2_norm(),
        })
    }

    /// `{F, G}_I = ⟨α, [u, v]⟩` for representatives `u`, `v` of the two
    /// functional derivatives.
    pub fn restricted_bracket(&self, u: &VectorField, v: &VectorField) -> Result<f64, FoliationError> {
        pairing(&self.alpha, &u.bracket(v))
    }
}

fn pairing(alpha: &Form, u: &VectorField) -> Result<f64, FoliationError> {
    Ok(integrate3(&wedge(alpha, &u.to_two_form())?)?)
}

/// `GV = ∫ η∧dη` for any solution `η` of `dα = α∧η`.
pub fn godbillon_vey_of(eta: &Form) -> Result<f64, FoliationError> {
    Ok(integrate3(&wedge(eta, &d(eta)?)?)?)
}

/// `−2(g dα + d(gα))`, the change of `χ` under `γ → γ + gα`.
pub fn chi_shift(alpha: &Form, g: &ScalarField) -> Result<Form, FoliationError> {
    let gs = Form::scalar(g.clone());
    let term = &d(alpha)?.times(g) + &d(&wedge(&gs, alpha)?)?;
    Ok(term.scale(-2.0))
}

#[derive(Debug, Clone)]
pub struct GaugeShift {
    pub state: FoliatedState,
    /// Relative mismatch between the recomputed `χ` and `χ − 2(ĝ dα + d(ĝα))`,
    /// `ĝ = g − f²/2`.
    pub chi_shift_residual: f64,
}

/// A constructible element `V` of the degeneracy set, `ι_V μ = f dα + d(fα)`.
#[derive(Debug, Clone)]
pub struct XiGenerator {
    pub f: ScalarField,
    pub v: VectorField,
    pub tangency: f64,
    pub condon: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegeneracyCheck {
    pub value: f64,
    /// `‖α‖‖a‖‖v‖`
    pub scale: f64,
}

impl DegeneracyCheck {
    pub fn relative(&self) -> f64 {
        relative(self.value.abs(), self.scale)
    }
}

/// Centered finite difference of GV along a one-parameter family of
/// integrable forms, `(GV(α(ε)) − GV(α(−ε))) / 2ε`.
pub fn gv_finite_difference<F>(family: F, eps: f64, tolerances: Tolerances) -> Result<f64, FoliationError>
where
    F: Fn(f64) -> Result<Form, FoliationError>,
{
    let plus = FoliatedState::solve_lenient(family(eps)?, tolerances)?.godbillon_vey()?;
    let minus = FoliatedState::solve_lenient(family(-eps)?, tolerances)?.godbillon_vey()?;
    Ok((plus - minus) / (2.0 * eps))
}

/// Graph foliations `α = f·(dz + a(z) dx)`.
#[derive(Debug, Clone)]
pub struct GraphFoliation {
    /// Profile `a`, a function of `z` only.
    pub profile: ScalarField,
    /// Nonvanishing scaling `f`.
    pub scale: ScalarField,
}

impl GraphFoliation {
    pub fn new(profile: ScalarField, scale: ScalarField) -> Self {
        Self { profile, scale }
    }

    pub fn unscaled(profile: ScalarField) -> Self {
        let g = profile.grid();
        Self::new(profile, ScalarField::constant(g, 1.0))
    }

    pub fn alpha(&self) -> Form {
        let g = self.profile.grid();
        Form::one(
            &self.scale * &self.profile,
            ScalarField::zeros(g),
            self.scale.clone(),
        )
    }

    /// Tangent direction `f·b(z) dx` from deforming the profile by `b`.
    pub fn deformation(&self, b: &ScalarField) -> Form {
        let g = self.profile.grid();
        Form::one(&self.scale * b, ScalarField::zeros(g), ScalarField::zeros(g))
    }

    /// The hand gauge `η = a′ dx`, `γ = a″ dx`, valid when `f ≡ 1`.
    pub fn hand_gauge(&self) -> (Form, Form) {
        let g = self.profile.grid();
        let a1 = self.profile.partial(2);
        let a2 = a1.partial(2);
        (
            Form::one(a1, ScalarField::zeros(g), ScalarField::zeros(g)),
            Form::one(a2, ScalarField::zeros(g), ScalarField::zeros(g)),
        )
    }
}

/// A closed loop inside one leaf of `dz + a(z) dx`: `x = x0 + w sin 2πt`,
/// `y = y0 + t`, and `z` follows the leaf equation `dz/dx = −a(z)` from
/// `z(x0) = z0` (fixed-step RK4).
pub fn graph_leaf_loop(
    a: impl Fn(f64) -> f64,
    start: [f64; 3],
    width: f64,
    samples: usize,
) -> Result<Loop, FoliationError> {
    let [x0, y0, z0] = start;
    let leaf_z = |x: f64| {
        let steps = 400;
        let h = (x - x0) / steps as f64;
        let f = |z: f64| -a(z);
        let mut z = z0;
        for _ in 0..steps {
            let k1 = f(z);
            let k2 = f(z + 0.5 * h * k1);
            let k3 = f(z + 0.5 * h * k2);
            let k4 = f(z + h * k3);
            z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        z
    };
    Ok(Loop::from_fn(samples, |t| {
        let x = x0 + width * (2.0 * PI * t).sin();
        [x, y0 + t, leaf_z(x)]
    })?)
}

/// Tangent direction `g·α` from rescaling (same foliation).
pub fn rescaling(alpha: &Form, g: &ScalarField) -> Form {
    alpha.times(g)
}

/// Tangent direction `−L_U α` from transport by the flow of `U`.
pub fn diffeo_direction(alpha: &Form, u: &VectorField) -> Result<Form, FoliationError> {
    Ok(-&lie_derivative(u, alpha)?)
}

/// One transport experiment of the restricted-Casimir suite.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportEntry {
    pub gv_initial: f64,
    pub gv_final: f64,
    /// `|GV(t) − GV(0)|`
    pub drift: f64,
    /// Chain residuals of the transported state.
    pub residuals: ChainResiduals,
    /// The transported form failed the acceptance tolerances.
    pub degraded: bool,
}

/// Transport `α` along each field for time `t`, re-solve the chain, and
/// record the change in GV.
pub fn gv_casimir_suite(
    state: &FoliatedState,
    fields: &[VectorField],
    t: f64,
    dt: f64,
) -> Result<Vec<TransportEntry>, FoliationError> {
    let gv0 = state.godbillon_vey()?;
    fields
        .iter()
        .map(|u| {
            let moved = transport(state.alpha(), u, t, dt)?;
            let next = FoliatedState::solve_lenient(moved, state.tolerances)?;
            let gv = next.godbillon_vey()?;
            Ok(TransportEntry {
                gv_initial: gv0,
                gv_final: gv,
                drift: (gv - gv0).abs(),
                residuals: next.residuals,
                degraded: !next.accepted(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms3::Grid;

    fn grid() -> Grid {
        Grid::new(32).unwrap()
    }

    fn profile(g: Grid) -> ScalarField {
        ScalarField::from_fn(g, |_, _, z| 0.3 * (2.0 * PI * z).sin() + 0.1 * (4.0 * PI * z).cos())
    }

    #[test]
    fn graph_foliation_is_integrable() {
        let g = grid();
        let rep = check_integrability(&GraphFoliation::unscaled(profile(g)).alpha()).unwrap();
        assert!(rep.relative <= 1e-12, "{rep:?}");
        assert!(rep.max_density <= 1e-12);
    }

    #[test]
    fn closed_form_is_integrable_with_zero_eta() {
        let g = grid();
        let alpha = Form::coordinate_one_form(g, 2);
        let rep = check_integrability(&alpha).unwrap();
        assert_eq!(rep.relative, 0.0);
        let st = FoliatedState::new(alpha).unwrap();
        assert_eq!(st.eta().max_abs(), 0.0);
        assert_eq!(st.gamma().max_abs(), 0.0);
        assert_eq!(st.chi().max_abs(), 0.0);
        assert_eq!(st.godbillon_vey().unwrap(), 0.0);
    }

    #[test]
    fn contact_form_is_rejected() {
        let g = grid();
        let alpha = Form::one(
            ScalarField::from_fn(g, |_, _, z| (2.0 * PI * z).sin()),
            ScalarField::from_fn(g, |_, _, z| (2.0 * PI * z).cos()),
            ScalarField::zeros(g),
        );
        let rep = check_integrability(&alpha).unwrap();
        assert!((rep.absolute - 2.0 * PI).abs() < 1e-10);
        assert!((rep.relative - 1.0).abs() < 1e-10);
        assert!(matches!(FoliatedState::new(alpha), Err(FoliationError::Precondition(_))));
    }

    #[test]
    fn vanishing_form_is_rejected() {
        let g = Grid::new(16).unwrap();
        let alpha = Form::one(
            ScalarField::zeros(g),
            ScalarField::zeros(g),
            ScalarField::from_fn(g, |x, _, _| (2.0 * PI * x).sin()),
        );
        assert!(matches!(
            reference_field(&alpha, 1e-6),
            Err(FoliationError::Precondition(_))
        ));
    }

    #[test]
    fn eta_for_graph_profile_matches_hand_formula() {
        // η = a′(dx − a dz)/(1 + a²)
        let g = grid();
        let a = profile(g);
        let st = FoliatedState::new(GraphFoliation::unscaled(a.clone()).alpha()).unwrap();
        let a1 = a.partial(2);
        let denom = a.map(|v| 1.0 + v * v);
        let ex = a1.zip_with(&denom, |p, q| p / q);
        let ez = (&a1 * &a).zip_with(&denom, |p, q| -p / q);
        assert!((st.eta().comp(0) - &ex).max_abs() < 1e-12);
        assert!(st.eta().comp(1).max_abs() < 1e-14);
        assert!((st.eta().comp(2) - &ez).max_abs() < 1e-12);
        assert!(st.residuals().eta <= 1e-11);
    }

    #[test]
    fn gauge_shift_with_f_needs_the_quadratic_correction() {
        let g = grid();
        let st = FoliatedState::new(GraphFoliation::unscaled(profile(g)).alpha()).unwrap();
        let f = ScalarField::from_fn(g, |x, y, _| 0.4 * (2.0 * PI * (x + y)).cos());
        let zero = ScalarField::zeros(g);
        let shifted = st.gauge_shift(&f, &zero).unwrap();
        assert!(shifted.chi_shift_residual <= 1e-10, "{}", shifted.chi_shift_residual);
        // The uncorrected prediction χ − 2(g dα + d(gα)) with g = 0 is off.
        let naive = (shifted.state.chi() - st.chi()).l2_norm() / st.chi().l2_norm();
        assert!(naive > 1e-3, "{naive}");
    }
}
