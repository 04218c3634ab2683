//! Time stepping for form-valued evolution equations.

use super::form::{d, interior, Form};
use super::vector::VectorField;
use super::FormsError;

/// Split `t_final` into uniform steps no longer than `dt`.
pub(crate) fn step_plan(t_final: f64, dt: f64) -> Result<(usize, f64), FormsError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(FormsError::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return Err(FormsError::InvalidParameter(format!(
            "t_final must be non-negative, got {t_final}"
        )));
    }
    if t_final == 0.0 {
        return Ok((0, dt));
    }
    let steps = ((t_final / dt) - 1e-9).ceil().max(1.0) as usize;
    Ok((steps, t_final / steps as f64))
}

/// Classical RK4 on a 1-form state. `observe` runs after every accepted step
/// with the new time and state.
pub(crate) fn rk4<F, O>(
    initial: &Form,
    t_final: f64,
    dt: f64,
    rhs: F,
    mut observe: O,
) -> Result<Form, FormsError>
where
    F: Fn(&Form) -> Result<Form, FormsError>,
    O: FnMut(f64, &Form),
{
    let (steps, h) = step_plan(t_final, dt)?;
    let mut state = initial.clone();
    for step in 0..steps {
        let k1 = rhs(&state)?;
        let k2 = rhs(&(&state + &(&k1 * (0.5 * h))))?;
        let k3 = rhs(&(&state + &(&k2 * (0.5 * h))))?;
        let k4 = rhs(&(&state + &(&k3 * h)))?;
        let incr = &(&(&k1 + &(&k2 * 2.0)) + &(&(&k3 * 2.0) + &k4)) * (h / 6.0);
        state = &state + &incr;
        let t = (step + 1) as f64 * h;
        if !state.is_finite() {
            return Err(FormsError::BlowUp { t });
        }
        observe(t, &state);
    }
    Ok(state)
}

/// Right-hand side `−L_u α` with both products projected by the 2/3 rule.
pub fn transport_rhs(alpha: &Form, u: &VectorField) -> Result<Form, FormsError> {
    let flux = interior(u, alpha)?.dealiased();
    let circulation = interior(u, &d(alpha)?)?.dealiased();
    Ok(-&(&d(&flux)? + &circulation))
}

/// Solve `∂α/∂t = −L_u α` up to `t_final` with RK4 in time and spectral
/// derivatives in space.
pub fn transport(alpha: &Form, u: &VectorField, t_final: f64, dt: f64) -> Result<Form, FormsError> {
    if alpha.rank() != 1 {
        return Err(FormsError::Rank {
            op: "transport",
            rank: alpha.rank(),
        });
    }
    if alpha.grid() != u.grid() {
        return Err(FormsError::GridMismatch);
    }
    rk4(alpha, t_final, dt, |a| transport_rhs(a, u), |_, _| {})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms3::{Grid, ScalarField};
    use std::f64::consts::PI;

    #[test]
    fn zero_generator_is_exact_identity() {
        let g = Grid::new(16).unwrap();
        let a = Form::one(
            ScalarField::from_fn(g, |x, y, _| (2.0 * PI * x).sin() * (2.0 * PI * y).cos()),
            ScalarField::from_fn(g, |_, _, z| (6.0 * PI * z).cos()),
            ScalarField::constant(g, 0.2),
        );
        let out = transport(&a, &VectorField::zeros(g), 0.1, 1e-2).unwrap();
        assert_eq!(out, a);
    }

    #[test]
    fn translation_oracle() {
        let g = Grid::new(32).unwrap();
        let f = |x: f64| (2.0 * PI * x).sin() + 0.3 * (4.0 * PI * x).cos();
        let a = Form::one(ScalarField::from_fn(g, |x, _, _| f(x)), ScalarField::zeros(g), ScalarField::zeros(g));
        let t = 0.25;
        let out = transport(&a, &VectorField::coordinate(g, 0), t, 1e-3).unwrap();
        let exact = ScalarField::from_fn(g, |x, _, _| f(x - t));
        assert!((out.comp(0) - &exact).max_abs() < 1e-8);
    }

    #[test]
    fn step_plan_rejects_bad_dt() {
        assert!(step_plan(1.0, 0.0).is_err());
        assert!(step_plan(1.0, -1.0).is_err());
        assert_eq!(step_plan(0.5, 1e-3).unwrap().0, 500);
    }
}
