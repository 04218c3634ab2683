//! Lie-Poisson dynamics on the three-dimensional Bianchi VI_h algebra.
//!
//! Basis `(P, R, S)` with `[P,R] = 0`, `[S,P] = hP`, `[S,R] = R`; a point of
//! the dual is written `(p, r, s)`. The Poisson matrix is
//! `J_ij(ξ) = c^k_ij ξ_k`, so `{F, G} = ∇F · J ∇G` and the equations of motion
//! are `ξ̇ = J(ξ) ∇H` with `H = (p² + r² + s²)/2`.
//!
//! The generic Casimir is `C = p r^{-h}`, defined on the chart `r > 0`. On
//! the line `(0, 0, s)` the Poisson matrix vanishes and every function of
//! `s` becomes a Casimir of the restricted bracket.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum RattlebackError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("casimir p·r^(-h) needs r > 0, got r = {r}")]
    Domain { r: f64 },
    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },
}

pub type Matrix3 = [[f64; 3]; 3];

/// Structure constants `c[k][i][j]`: the `k`-th component of `[e_i, e_j]`.
/// Indices are 0-based in the order `(P, R, S)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraStructure {
    c: [Matrix3; 3],
    h: f64,
}

/// Tolerance for the antisymmetry and Jacobi checks on a constant table.
const TABLE_TOL: f64 = 1e-14;

impl AlgebraStructure {
    /// Wrap an arbitrary table, rejecting non-finite or non-antisymmetric
    /// constants and tables that violate the Jacobi identity.
    pub fn from_constants(c: [Matrix3; 3], h: f64) -> Result<Self, RattlebackError> {
        if !c.iter().flatten().flatten().all(|v| v.is_finite()) {
            return Err(RattlebackError::InvalidParameter("non-finite structure constant".into()));
        }
        let alg = Self { c, h };
        let scale = 1.0 + c.iter().flatten().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        if alg.antisymmetry_residual() > TABLE_TOL * scale {
            return Err(RattlebackError::InvalidParameter("structure constants not antisymmetric".into()));
        }
        if alg.jacobi_residual() > TABLE_TOL * scale * scale {
            return Err(RattlebackError::InvalidParameter("Jacobi identity violated".into()));
        }
        Ok(alg)
    }

    pub fn constant(&self, k: usize, i: usize, j: usize) -> f64 {
        self.c[k][i][j]
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Bracket of two algebra elements in components.
    pub fn bracket(&self, u: [f64; 3], v: [f64; 3]) -> [f64; 3] {
        let mut out = [0.0; 3];
        for (k, o) in out.iter_mut().enumerate() {
            for i in 0..3 {
                for j in 0..3 {
                    *o += self.c[k][i][j] * u[i] * v[j];
                }
            }
        }
        out
    }

    pub fn antisymmetry_residual(&self) -> f64 {
        let mut r = 0.0f64;
        for k in 0..3 {
            for i in 0..3 {
                for j in 0..3 {
                    r = r.max((self.c[k][i][j] + self.c[k][j][i]).abs());
                }
            }
        }
        r
    }

    /// Max over basis triples of `|[[e_i,e_j],e_l] + [[e_j,e_l],e_i] + [[e_l,e_i],e_j]|`.
    pub fn jacobi_residual(&self) -> f64 {
        let e = |a: usize| {
            let mut v = [0.0; 3];
            v[a] = 1.0;
            v
        };
        let mut r = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                for l in 0..3 {
                    let a = self.bracket(self.bracket(e(i), e(j)), e(l));
                    let b = self.bracket(self.bracket(e(j), e(l)), e(i));
                    let c = self.bracket(self.bracket(e(l), e(i)), e(j));
                    for m in 0..3 {
                        r = r.max((a[m] + b[m] + c[m]).abs());
                    }
                }
            }
        }
        r
    }
}

/// Bianchi VI_h in basis order `(P, R, S)`. Any finite `h` is accepted; the
/// rattleback interpretation needs `h < −1`, so other values log a warning.
pub fn bianchi_vi(h: f64) -> Result<AlgebraStructure, RattlebackError> {
    if !h.is_finite() {
        return Err(RattlebackError::InvalidParameter(format!("h must be finite, got {h}")));
    }
    if h >= -1.0 {
        log::warn!("h = {h} is outside the rattleback range h < -1");
    }
    const P: usize = 0;
    const R: usize = 1;
    const S: usize = 2;
    let mut c = [[[0.0; 3]; 3]; 3];
    // [S,P] = hP
    c[P][S][P] = h;
    c[P][P][S] = -h;
    // [S,R] = R
    c[R][S][R] = 1.0;
    c[R][R][S] = -1.0;
    AlgebraStructure::from_constants(c, h)
}

/// A point `(p, r, s)` of the dual space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RattlebackState {
    pub p: f64,
    pub r: f64,
    pub s: f64,
}

impl RattlebackState {
    pub const fn new(p: f64, r: f64, s: f64) -> Self {
        Self { p, r, s }
    }

    pub fn try_new(p: f64, r: f64, s: f64) -> Result<Self, RattlebackError> {
        let st = Self::new(p, r, s);
        if st.is_finite() {
            Ok(st)
        } else {
            Err(RattlebackError::InvalidParameter(format!("non-finite state {st:?}")))
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.p, self.r, self.s]
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn is_finite(&self) -> bool {
        self.p.is_finite() && self.r.is_finite() && self.s.is_finite()
    }
}

/// `J_ij = c^k_ij ξ_k`.
pub fn poisson_matrix(alg: &AlgebraStructure, xi: RattlebackState) -> Matrix3 {
    let x = xi.to_array();
    let mut j = [[0.0; 3]; 3];
    for (a, row) in j.iter_mut().enumerate() {
        for (b, entry) in row.iter_mut().enumerate() {
            *entry = (0..3).map(|k| alg.c[k][a][b] * x[k]).sum();
        }
    }
    j
}

fn mat_vec(m: &Matrix3, v: [f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|i| m[i][0] * v[0] + m[i][1] * v[1] + m[i][2] * v[2])
}

/// `{F, G}(ξ) = ∇F · J(ξ) ∇G` from the two gradients.
pub fn poisson_bracket(alg: &AlgebraStructure, xi: RattlebackState, grad_f: [f64; 3], grad_g: [f64; 3]) -> f64 {
    let jg = mat_vec(&poisson_matrix(alg, xi), grad_g);
    grad_f[0] * jg[0] + grad_f[1] * jg[1] + grad_f[2] * jg[2]
}

/// `J(ξ) ∇H` for an arbitrary Hamiltonian gradient.
pub fn lie_poisson_rhs(alg: &AlgebraStructure, xi: RattlebackState, grad_h: [f64; 3]) -> RattlebackState {
    RattlebackState::from_array(mat_vec(&poisson_matrix(alg, xi), grad_h))
}

/// `(−h p s, −r s, r² + h p²)`.
pub fn rattleback_rhs(xi: RattlebackState, h: f64) -> RattlebackState {
    let RattlebackState { p, r, s } = xi;
    RattlebackState::new(-h * p * s, -r * s, r * r + h * p * p)
}

pub fn hamiltonian(xi: RattlebackState) -> f64 {
    0.5 * (xi.p * xi.p + xi.r * xi.r + xi.s * xi.s)
}

/// `C = p r^{-h}` on the chart `r > 0`.
pub fn casimir(xi: RattlebackState, h: f64) -> Result<f64, RattlebackError> {
    if !(xi.r > 0.0) {
        return Err(RattlebackError::Domain { r: xi.r });
    }
    Ok(xi.p * xi.r.powf(-h))
}

/// `∇C = (r^{-h}, −h p r^{-h-1}, 0)`.
pub fn casimir_gradient(xi: RattlebackState, h: f64) -> Result<[f64; 3], RattlebackError> {
    if !(xi.r > 0.0) {
        return Err(RattlebackError::Domain { r: xi.r });
    }
    Ok([xi.r.powf(-h), -h * xi.p * xi.r.powf(-h - 1.0), 0.0])
}

/// Max-norm of `J(ξ) ∇C`, which vanishes for a Casimir.
pub fn casimir_gradient_check(xi: RattlebackState, h: f64) -> Result<f64, RattlebackError> {
    let alg = bianchi_vi(h)?;
    let jc = mat_vec(&poisson_matrix(&alg, xi), casimir_gradient(xi, h)?);
    Ok(jc.iter().fold(0.0f64, |m, v| m.max(v.abs())))
}

/// Time integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Classical fixed-step fourth-order Runge-Kutta.
    Rk4,
    /// Dormand-Prince 5(4) with the given componentwise relative tolerance.
    Rk45 { tol: f64 },
}

impl Method {
    pub fn rk45() -> Self {
        Method::Rk45 { tol: 1e-10 }
    }
}

/// Sampled solution with per-sample energy and Casimir diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<RattlebackState>,
    pub energy: Vec<f64>,
    /// `None` where the state left the Casimir chart `r > 0`.
    pub casimir: Vec<Option<f64>>,
}

impl Trajectory {
    fn new(h: f64, xi0: RattlebackState) -> Self {
        let mut t = Self {
            times: Vec::new(),
            states: Vec::new(),
            energy: Vec::new(),
            casimir: Vec::new(),
        };
        t.push(0.0, xi0, h);
        t
    }

    fn push(&mut self, time: f64, xi: RattlebackState, h: f64) {
        self.times.push(time);
        self.states.push(xi);
        self.energy.push(hamiltonian(xi));
        self.casimir.push(casimir(xi, h).ok());
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> RattlebackState {
        *self.states.last().expect("trajectory holds the initial state")
    }

    /// `max_t |H(t) − H(0)| / H(0)` (absolute drift when `H(0) = 0`).
    pub fn max_energy_drift(&self) -> f64 {
        relative_drift(&self.energy)
    }

    /// Same as [`Trajectory::max_energy_drift`] for `C`; `None` if any
    /// sample left the chart.
    pub fn max_casimir_drift(&self) -> Option<f64> {
        let vals: Option<Vec<f64>> = self.casimir.iter().copied().collect();
        vals.map(|v| relative_drift(&v))
    }
}

fn relative_drift(vals: &[f64]) -> f64 {
    let v0 = vals[0];
    let scale = if v0 == 0.0 { 1.0 } else { v0.abs() };
    vals.iter().fold(0.0f64, |m, v| m.max((v - v0).abs() / scale))
}

fn axpy(y: [f64; 3], a: f64, k: [f64; 3]) -> [f64; 3] {
    [y[0] + a * k[0], y[1] + a * k[1], y[2] + a * k[2]]
}

fn rhs_array(y: [f64; 3], h: f64) -> [f64; 3] {
    rattleback_rhs(RattlebackState::from_array(y), h).to_array()
}

fn rk4_step(y: [f64; 3], dt: f64, h: f64) -> [f64; 3] {
    let k1 = rhs_array(y, h);
    let k2 = rhs_array(axpy(y, 0.5 * dt, k1), h);
    let k3 = rhs_array(axpy(y, 0.5 * dt, k2), h);
    let k4 = rhs_array(axpy(y, dt, k3), h);
    [0, 1, 2].map(|i| y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

// Dormand-Prince 5(4) tableau (the system is autonomous, so the nodes are unused).
const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// One Dormand-Prince step: fifth-order solution and error estimate.
fn dp_step(y: [f64; 3], dt: f64, h: f64) -> ([f64; 3], [f64; 3]) {
    let mut k = [[0.0; 3]; 7];
    for stage in 0..7 {
        let mut ys = y;
        for (prev, a) in DP_A[stage].iter().enumerate().take(stage) {
            ys = axpy(ys, dt * a, k[prev]);
        }
        k[stage] = rhs_array(ys, h);
    }
    let mut y5 = y;
    let mut err = [0.0; 3];
    for stage in 0..7 {
        y5 = axpy(y5, dt * DP_B5[stage], k[stage]);
        for i in 0..3 {
            err[i] += dt * (DP_B5[stage] - DP_B4[stage]) * k[stage][i];
        }
    }
    (y5, err)
}

/// Integrate the rattleback equations from `xi0` to `t_final`. For RK4, `dt`
/// is the fixed step (the last step is shortened to land on `t_final`); for
/// RK45 it is the initial step guess.
pub fn integrate(
    xi0: RattlebackState,
    h: f64,
    dt: f64,
    t_final: f64,
    method: Method,
) -> Result<Trajectory, RattlebackError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(RattlebackError::InvalidParameter(format!("dt must be positive, got {dt}")));
    }
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(RattlebackError::InvalidParameter(format!(
            "t_final must be positive, got {t_final}"
        )));
    }
    if !xi0.is_finite() || !h.is_finite() {
        return Err(RattlebackError::InvalidParameter("non-finite initial data".into()));
    }
    let mut traj = Trajectory::new(h, xi0);
    let mut y = xi0.to_array();
    match method {
        Method::Rk4 => {
            let steps = ((t_final / dt) - 1e-9).ceil().max(1.0) as usize;
            for n in 1..=steps {
                let t_prev = (n - 1) as f64 * dt;
                let t = if n == steps { t_final } else { n as f64 * dt };
                y = rk4_step(y, t - t_prev, h);
                let xi = RattlebackState::from_array(y);
                if !xi.is_finite() {
                    return Err(RattlebackError::Integration {
                        t,
                        reason: "non-finite state".into(),
                    });
                }
                traj.push(t, xi, h);
            }
        }
        Method::Rk45 { tol } => {
            if !(tol > 0.0) {
                return Err(RattlebackError::InvalidParameter(format!("tolerance must be positive, got {tol}")));
            }
            let mut t = 0.0;
            let mut step = dt.min(t_final);
            let min_step = 1e-14 * t_final.max(1.0);
            while t < t_final {
                let last = t + step >= t_final;
                let this = if last { t_final - t } else { step };
                let (y_new, err) = dp_step(y, this, h);
                // Componentwise relative error, floored at 1e-6 of the state size so that
                // components crossing zero do not stall the step.
                let size = y.iter().chain(&y_new).fold(0.0f64, |m, v| m.max(v.abs()));
                let norm = (0..3)
                    .map(|i| {
                        let sc = tol * (y[i].abs().max(y_new[i].abs()) + 1e-6 * size) + f64::MIN_POSITIVE;
                        (err[i] / sc).powi(2)
                    })
                    .sum::<f64>();
                let norm = (norm / 3.0).sqrt();
                if !norm.is_finite() || y_new.iter().any(|v| !v.is_finite()) {
                    return Err(RattlebackError::Integration {
                        t,
                        reason: "non-finite state".into(),
                    });
                }
                let factor = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
                if norm <= 1.0 {
                    t = if last { t_final } else { t + this };
                    y = y_new;
                    traj.push(t, RattlebackState::from_array(y), h);
                }
                step = this * factor;
                if step < min_step {
                    return Err(RattlebackError::Integration {
                        t,
                        reason: format!("step size underflow ({step:e})"),
                    });
                }
            }
        }
    }
    Ok(traj)
}

/// Outcome of the singular-line checks at `(0, 0, s0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedCasimirReport {
    pub s0: f64,
    pub h: f64,
    /// Max-norm of `rhs(0, 0, s0)`.
    pub rhs_residual: f64,
    /// Max-norm of `J(0, 0, s0)`.
    pub poisson_residual: f64,
    /// Max `|{φ(s), F}|` over test functions `φ` and monomials `F`.
    pub bracket_residual: f64,
    pub pass: bool,
}

/// Gradients of monomials `p^a r^b s^c` with `a + b + c ≤ 3` at `xi`.
pub fn monomial_gradients(xi: RattlebackState) -> Vec<[f64; 3]> {
    let x = xi.to_array();
    let pow = |v: f64, e: i32| if e < 0 { 0.0 } else { v.powi(e) };
    let mut out = Vec::new();
    for a in 0..=3i32 {
        for b in 0..=(3 - a) {
            for c in 0..=(3 - a - b) {
                out.push([
                    a as f64 * pow(x[0], a - 1) * pow(x[1], b) * pow(x[2], c),
                    b as f64 * pow(x[0], a) * pow(x[1], b - 1) * pow(x[2], c),
                    c as f64 * pow(x[0], a) * pow(x[1], b) * pow(x[2], c - 1),
                ]);
            }
        }
    }
    out
}

/// Verify that the singular line is a set of fixed points with trivial
/// bracket, so that any function of `s` is a Casimir there.
pub fn restricted_casimir_report(s0: f64, h: f64) -> Result<RestrictedCasimirReport, RattlebackError> {
    let alg = bianchi_vi(h)?;
    let xi = RattlebackState::new(0.0, 0.0, s0);
    let rhs = rattleback_rhs(xi, h).to_array();
    let rhs_residual = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let j = poisson_matrix(&alg, xi);
    let poisson_residual = j.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    // φ(s) ∈ {s, s², sin s, exp s}: gradients (0, 0, φ'(s)).
    let phis = [1.0, 2.0 * s0, s0.cos(), s0.exp()];
    let mut bracket_residual = 0.0f64;
    for dphi in phis {
        for grad_f in monomial_gradients(xi) {
            let b = poisson_bracket(&alg, xi, [0.0, 0.0, dphi], grad_f);
            bracket_residual = bracket_residual.max(b.abs());
        }
    }
    Ok(RestrictedCasimirReport {
        s0,
        h,
        rhs_residual,
        poisson_residual,
        bracket_residual,
        pass: rhs_residual == 0.0 && poisson_residual == 0.0 && bracket_residual == 0.0,
    })
}
