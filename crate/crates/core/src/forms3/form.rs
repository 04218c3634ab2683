//! Differential k-forms on the 3-torus and the pointwise/spectral operators
//! acting on them.
//!
//! Component bases:
//!
//! | rank | components                       |
//! |------|----------------------------------|
//! | 0    | `1`                              |
//! | 1    | `dx, dy, dz`                     |
//! | 2    | `dy∧dz, dz∧dx, dx∧dy`            |
//! | 3    | `dx∧dy∧dz`                       |
//!
//! With this 2-form ordering the components of `ι_V μ` are exactly
//! `(V¹, V², V³)`.

use std::ops::{Add, Mul, Neg, Sub};

use super::grid::{Grid, ScalarField, Spectrum};
use super::vector::VectorField;
use super::FormsError;

/// A differential form of rank 0..=3 stored as collocated component grids.
#[derive(Debug, Clone, PartialEq)]
pub struct Form {
    rank: usize,
    comps: Vec<ScalarField>,
}

/// Number of components of a k-form in three dimensions.
pub fn component_count(rank: usize) -> usize {
    match rank {
        0 | 3 => 1,
        1 | 2 => 3,
        _ => 0,
    }
}

impl Form {
    /// Build from components; the count must match the rank and all
    /// components must share one grid.
    pub fn new(rank: usize, comps: Vec<ScalarField>) -> Result<Self, FormsError> {
        if rank > 3 {
            return Err(FormsError::Rank { op: "form", rank });
        }
        if comps.len() != component_count(rank) {
            return Err(FormsError::Shape {
                expected: component_count(rank),
                found: comps.len(),
            });
        }
        let g = comps[0].grid();
        if comps.iter().any(|c| c.grid() != g) {
            return Err(FormsError::GridMismatch);
        }
        Ok(Self { rank, comps })
    }

    pub fn zero(grid: Grid, rank: usize) -> Self {
        assert!(rank <= 3, "form rank {rank} out of range");
        Self {
            rank,
            comps: vec![ScalarField::zeros(grid); component_count(rank)],
        }
    }

    pub fn scalar(f: ScalarField) -> Self {
        Self { rank: 0, comps: vec![f] }
    }

    /// `a dx + b dy + c dz`
    pub fn one(a: ScalarField, b: ScalarField, c: ScalarField) -> Self {
        Self {
            rank: 1,
            comps: vec![a, b, c],
        }
    }

    /// `a dy∧dz + b dz∧dx + c dx∧dy`
    pub fn two(a: ScalarField, b: ScalarField, c: ScalarField) -> Self {
        Self {
            rank: 2,
            comps: vec![a, b, c],
        }
    }

    /// `f dx∧dy∧dz`
    pub fn three(f: ScalarField) -> Self {
        Self { rank: 3, comps: vec![f] }
    }

    /// The unit volume form `μ = dx∧dy∧dz`.
    pub fn volume(grid: Grid) -> Self {
        Self::three(ScalarField::constant(grid, 1.0))
    }

    /// The coordinate 1-form `dx^axis`.
    pub fn coordinate_one_form(grid: Grid, axis: usize) -> Self {
        let mut f = Self::zero(grid, 1);
        f.comps[axis] = ScalarField::constant(grid, 1.0);
        f
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn grid(&self) -> Grid {
        self.comps[0].grid()
    }

    pub fn comp(&self, i: usize) -> &ScalarField {
        &self.comps[i]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.comps
    }

    pub fn into_components(self) -> Vec<ScalarField> {
        self.comps
    }

    pub fn map_components(&self, f: impl Fn(&ScalarField) -> ScalarField) -> Self {
        Self {
            rank: self.rank,
            comps: self.comps.iter().map(f).collect(),
        }
    }

    fn zip_components(&self, other: &Self, f: impl Fn(&ScalarField, &ScalarField) -> ScalarField) -> Self {
        assert_eq!(self.rank, other.rank, "rank mismatch in form arithmetic");
        Self {
            rank: self.rank,
            comps: self.comps.iter().zip(&other.comps).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map_components(|c| c.scale(s))
    }

    /// Multiply by a function (wedge with a 0-form).
    pub fn times(&self, f: &ScalarField) -> Self {
        self.map_components(|c| c * f)
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(ScalarField::is_finite)
    }

    /// `sqrt(∫ Σ|components|²)` with the flat metric.
    pub fn l2_norm(&self) -> f64 {
        self.comps.iter().map(ScalarField::mean_square).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, c| m.max(c.max_abs()))
    }

    /// Pointwise squared flat-metric magnitude.
    pub fn pointwise_norm_sq(&self) -> ScalarField {
        let mut acc = ScalarField::zeros(self.grid());
        for c in &self.comps {
            acc += &(c * c);
        }
        acc
    }

    /// Apply the 2/3-rule projection to every component.
    pub fn dealiased(&self) -> Self {
        self.map_components(ScalarField::dealiased)
    }

    pub fn eval_at(&self, point: [f64; 3]) -> Vec<f64> {
        self.comps.iter().map(|c| c.eval_at(point)).collect()
    }

    /// Exterior derivative via Fourier multipliers.
    pub fn d(&self) -> Result<Form, FormsError> {
        d(self)
    }
}

fn spectral_sum(grid: Grid, terms: &[(f64, &Spectrum, usize)]) -> ScalarField {
    let mut acc = Spectrum::zeros(grid);
    for &(c, s, axis) in terms {
        acc.axpy(c, &s.derivative(axis));
    }
    acc.to_field()
}

/// Exterior derivative. Rank 3 has no successor and yields a rank error.
pub fn d(form: &Form) -> Result<Form, FormsError> {
    let g = form.grid();
    match form.rank {
        0 => {
            let [a, b, c] = form.comps[0].gradient();
            Ok(Form::one(a, b, c))
        }
        1 => {
            let s: Vec<Spectrum> = form.comps.iter().map(ScalarField::spectrum).collect();
            Ok(Form::two(
                spectral_sum(g, &[(1.0, &s[2], 1), (-1.0, &s[1], 2)]),
                spectral_sum(g, &[(1.0, &s[0], 2), (-1.0, &s[2], 0)]),
                spectral_sum(g, &[(1.0, &s[1], 0), (-1.0, &s[0], 1)]),
            ))
        }
        2 => {
            let s: Vec<Spectrum> = form.comps.iter().map(ScalarField::spectrum).collect();
            Ok(Form::three(spectral_sum(
                g,
                &[(1.0, &s[0], 0), (1.0, &s[1], 1), (1.0, &s[2], 2)],
            )))
        }
        rank => Err(FormsError::Rank { op: "d", rank }),
    }
}

fn cross(a: &[ScalarField], b: &[ScalarField]) -> [ScalarField; 3] {
    [
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

fn dot(a: &[ScalarField], b: &[ScalarField]) -> ScalarField {
    &a[0] * &b[0] + &a[1] * &b[1] + &a[2] * &b[2]
}

/// Graded pointwise wedge product.
pub fn wedge(a: &Form, b: &Form) -> Result<Form, FormsError> {
    if a.grid() != b.grid() {
        return Err(FormsError::GridMismatch);
    }
    match (a.rank, b.rank) {
        (0, _) => Ok(b.times(&a.comps[0])),
        (_, 0) => Ok(a.times(&b.comps[0])),
        (1, 1) => {
            let [x, y, z] = cross(&a.comps, &b.comps);
            Ok(Form::two(x, y, z))
        }
        (1, 2) | (2, 1) => Ok(Form::three(dot(&a.comps, &b.comps))),
        (j, k) => Err(FormsError::Rank { op: "wedge", rank: j + k }),
    }
}

/// Interior product `ι_v form`.
pub fn interior(v: &VectorField, form: &Form) -> Result<Form, FormsError> {
    if v.grid() != form.grid() {
        return Err(FormsError::GridMismatch);
    }
    let u = v.components();
    let w = &form.comps;
    match form.rank {
        1 => Ok(Form::scalar(dot(u, w))),
        2 => Ok(Form::one(
            &w[1] * &u[2] - &w[2] * &u[1],
            &w[2] * &u[0] - &w[0] * &u[2],
            &w[0] * &u[1] - &w[1] * &u[0],
        )),
        3 => Ok(Form::two(&w[0] * &u[0], &w[0] * &u[1], &w[0] * &u[2])),
        rank => Err(FormsError::Rank { op: "interior", rank }),
    }
}

/// Lie derivative by Cartan's formula `L_v = d ι_v + ι_v d`.
pub fn lie_derivative(v: &VectorField, form: &Form) -> Result<Form, FormsError> {
    match form.rank {
        0 => interior(v, &d(form)?),
        3 => d(&interior(v, form)?),
        _ => Ok(&d(&interior(v, form)?)? + &interior(v, &d(form)?)?),
    }
}

/// `∫_M ω` for a 3-form: the grid mean of its single component.
pub fn integrate3(form: &Form) -> Result<f64, FormsError> {
    if form.rank != 3 {
        return Err(FormsError::Rank {
            op: "integrate3",
            rank: form.rank,
        });
    }
    Ok(form.comps[0].mean())
}

/// The vorticity field `W` with `dα = ι_W μ`.
pub fn vorticity_from(alpha: &Form) -> Result<VectorField, FormsError> {
    if alpha.rank != 1 {
        return Err(FormsError::Rank {
            op: "vorticity_from",
            rank: alpha.rank,
        });
    }
    VectorField::from_two_form(&d(alpha)?)
}

impl Add<&Form> for &Form {
    type Output = Form;
    fn add(self, rhs: &Form) -> Form {
        self.zip_components(rhs, |a, b| a + b)
    }
}

impl Sub<&Form> for &Form {
    type Output = Form;
    fn sub(self, rhs: &Form) -> Form {
        self.zip_components(rhs, |a, b| a - b)
    }
}

impl Add for Form {
    type Output = Form;
    fn add(self, rhs: Form) -> Form {
        &self + &rhs
    }
}

impl Sub for Form {
    type Output = Form;
    fn sub(self, rhs: Form) -> Form {
        &self - &rhs
    }
}

impl Mul<f64> for &Form {
    type Output = Form;
    fn mul(self, rhs: f64) -> Form {
        self.scale(rhs)
    }
}

impl Neg for &Form {
    type Output = Form;
    fn neg(self) -> Form {
        self.scale(-1.0)
    }
}
