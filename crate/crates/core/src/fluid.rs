//! Ideal fluids on the 3-torus as a Lie-Poisson system.
//!
//! States are 1-forms `α` (representatives of cosets modulo exact forms),
//! paired with divergence-free fields by `⟨α, u⟩ = ∫ (ι_u α) μ`. The coadjoint
//! action is `[u, α]† = −ι_u dα` and helicity `ℋ = ∫ α∧dα` is a Casimir.

use thiserror::Error;

use crate::foliation::{check_integrability, FoliationError};
use crate::forms3::{d, integrate3, interior, line_integral, rk4, wedge, Form, FormsError, Grid, Loop, ScalarField, VectorField};

#[derive(Debug, Error)]
pub enum FluidError {
    #[error(transparent)]
    Forms(#[from] FormsError),
    #[error(transparent)]
    Foliation(#[from] FoliationError),
    #[error("precondition failed: {0}")]
    Precondition(String),
}

/// Step used by every finite-difference gradient check.
pub const FD_EPS: f64 = 1e-5;

#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    alpha: Form,
}

impl FluidState {
    pub fn new(alpha: Form) -> Result<Self, FluidError> {
        if alpha.rank() != 1 {
            return Err(FormsError::Rank {
                op: "FluidState",
                rank: alpha.rank(),
            }
            .into());
        }
        if !alpha.is_finite() {
            return Err(FluidError::Precondition("non-finite velocity form".into()));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> &Form {
        &self.alpha
    }

    pub fn into_alpha(self) -> Form {
        self.alpha
    }

    pub fn grid(&self) -> Grid {
        self.alpha.grid()
    }

    /// Divergence-free velocity `P(α♯)`.
    pub fn velocity(&self) -> VectorField {
        velocity(&self.alpha)
    }

    /// `W` with `ι_W μ = dα`.
    pub fn vorticity(&self) -> VectorField {
        VectorField::from_two_form(&self.alpha.d().expect("1-form")).expect("2-form")
    }

    pub fn energy(&self) -> f64 {
        energy(&self.alpha)
    }

    pub fn helicity(&self) -> f64 {
        helicity(&self.alpha).expect("1-form")
    }
}

/// A representative of a functional derivative `δF/δα`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalGradient {
    pub field: VectorField,
}

impl FunctionalGradient {
    /// `‖div u‖ / ‖u‖` (0 for the zero field).
    pub fn divergence_residual(&self) -> f64 {
        let norm = self.field.l2_norm();
        if norm == 0.0 {
            return 0.0;
        }
        self.field.divergence().mean_square().sqrt() / norm
    }
}

fn expect_one_form(f: &Form, op: &'static str) -> Result<(), FormsError> {
    if f.rank() != 1 {
        return Err(FormsError::Rank { op, rank: f.rank() });
    }
    Ok(())
}

/// `∫ (ι_u α) μ`.
pub fn pairing(alpha: &Form, u: &VectorField) -> Result<f64, FluidError> {
    expect_one_form(alpha, "pairing")?;
    Ok(interior(u, alpha)?.comp(0).mean())
}

/// `[u, α]† = −ι_u dα`.
pub fn coadjoint(u: &VectorField, alpha: &Form) -> Result<Form, FluidError> {
    expect_one_form(alpha, "coadjoint")?;
    Ok(-&interior(u, &d(alpha)?)?)
}

/// `∫ α∧dα`.
pub fn helicity(alpha: &Form) -> Result<f64, FluidError> {
    expect_one_form(alpha, "helicity")?;
    Ok(integrate3(&wedge(alpha, &d(alpha)?)?)?)
}

/// `δℋ/δα = 2W`.
pub fn helicity_gradient(alpha: &Form) -> Result<FunctionalGradient, FluidError> {
    expect_one_form(alpha, "helicity_gradient")?;
    Ok(FunctionalGradient {
        field: VectorField::from_two_form(&d(alpha)?)?.scale(2.0),
    })
}

/// Lie-Poisson bracket of the linear functionals with derivatives `u`, `v`,
/// computed through the coadjoint action: `⟨[u, α]†, v⟩`.
pub fn lie_poisson_bracket(alpha: &Form, u: &VectorField, v: &VectorField) -> Result<f64, FluidError> {
    pairing(&coadjoint(u, alpha)?, v)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientCheck {
    /// Centered finite difference `(ℋ(α+εδα) − ℋ(α−εδα)) / 2ε`.
    pub lhs: f64,
    /// `∫ δα∧2dα`.
    pub rhs: f64,
    /// `2‖δα‖‖dα‖`
    pub scale: f64,
}

impl GradientCheck {
    pub fn discrepancy(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }

    pub fn relative(&self) -> f64 {
        let diff = self.discrepancy();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.scale
        }
    }
}

pub fn helicity_gradient_check(alpha: &Form, da: &Form) -> Result<GradientCheck, FluidError> {
    expect_one_form(alpha, "helicity_gradient_check")?;
    expect_one_form(da, "helicity_gradient_check")?;
    let plus = helicity(&(alpha + &da.scale(FD_EPS)))?;
    let minus = helicity(&(alpha - &da.scale(FD_EPS)))?;
    let w2 = d(alpha)?.scale(2.0);
    Ok(GradientCheck {
        lhs: (plus - minus) / (2.0 * FD_EPS),
        rhs: integrate3(&wedge(da, &w2)?)?,
        scale: da.l2_norm() * w2.l2_norm(),
    })
}

/// Divergence-free velocity `P(α♯)`.
pub fn velocity(alpha: &Form) -> VectorField {
    VectorField::sharp(alpha).expect("1-form").leray_projection()
}

/// `½⟨α, v⟩`.
pub fn energy(alpha: &Form) -> f64 {
    0.5 * pairing(alpha, &velocity(alpha)).expect("1-form")
}

/// `α̇ = [v, α]† = −ι_v dα`; the exact pressure part is not removed.
pub fn euler_rhs(state: &FluidState) -> Result<Form, FluidError> {
    coadjoint(&state.velocity(), state.alpha())
}

fn euler_rhs_dealiased(alpha: &Form) -> Result<Form, FormsError> {
    let v = velocity(alpha);
    Ok(-&interior(&v, &d(alpha)?)?.dealiased())
}

/// Energy and helicity after every step of an Euler run.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct EulerDiagnostics {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub helicity: Vec<f64>,
}

impl EulerDiagnostics {
    fn push(&mut self, t: f64, alpha: &Form) {
        self.times.push(t);
        self.energy.push(energy(alpha));
        self.helicity.push(helicity(alpha).expect("1-form"));
    }

    fn max_relative_drift(series: &[f64]) -> f64 {
        let Some(&first) = series.first() else {
            return 0.0;
        };
        let drift = series.iter().fold(0.0f64, |m, v| m.max((v - first).abs()));
        if drift == 0.0 {
            0.0
        } else {
            drift / first.abs()
        }
    }

    pub fn energy_drift(&self) -> f64 {
        Self::max_relative_drift(&self.energy)
    }

    /// Relative to `|ℋ(0)|`; absolute when the initial helicity is below
    /// `1e-12`.
    pub fn helicity_drift(&self) -> f64 {
        match self.helicity.first() {
            Some(h0) if h0.abs() < 1e-12 => self.helicity.iter().fold(0.0f64, |m, v| m.max((v - h0).abs())),
            _ => Self::max_relative_drift(&self.helicity),
        }
    }
}

/// RK4 with 2/3-rule dealiasing of the nonlinear term.
pub fn euler_evolve(state: &FluidState, dt: f64, t_final: f64) -> Result<(FluidState, EulerDiagnostics), FluidError> {
    let mut diag = EulerDiagnostics::default();
    diag.push(0.0, state.alpha());
    let alpha = rk4(state.alpha(), t_final, dt, euler_rhs_dealiased, |t, a| diag.push(t, a))?;
    Ok((FluidState { alpha }, diag))
}

/// `⟨α, X⟩` with `ι_X μ = d(h β)`, which vanishes when `α = f β` and `β` is
/// integrable.
pub fn subalgebra_orthogonality(alpha: &Form, beta: &Form, h_fn: &ScalarField) -> Result<f64, FluidError> {
    expect_one_form(alpha, "subalgebra_orthogonality")?;
    let rep = check_integrability(beta)?;
    let tol = crate::foliation::Tolerances::default().integrability;
    if !rep.is_integrable(tol) {
        return Err(FluidError::Precondition(format!(
            "β∧dβ relative residual {:e} exceeds {tol:e}",
            rep.relative
        )));
    }
    let x = VectorField::from_two_form(&d(&beta.times(h_fn))?)?;
    pairing(alpha, &x)
}

/// `∫_γ α` along a closed loop.
pub fn loop_integral(alpha: &Form, curve: &Loop) -> Result<f64, FluidError> {
    Ok(line_integral(alpha, curve)?)
}

/// Pointwise max of `|α∧dα|`.
pub fn helicity_density_check(alpha: &Form) -> Result<f64, FluidError> {
    expect_one_form(alpha, "helicity_density_check")?;
    Ok(wedge(alpha, &d(alpha)?)?.max_abs())
}
