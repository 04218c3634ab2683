//! Vector fields on the torus.

use std::ops::{Add, Sub};

use super::form::Form;
use super::grid::{Grid, ScalarField};
use super::FormsError;

/// Three periodic component grids `(u¹, u², u³)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    comps: [ScalarField; 3],
}

impl VectorField {
    pub fn new(x: ScalarField, y: ScalarField, z: ScalarField) -> Result<Self, FormsError> {
        if x.grid() != y.grid() || y.grid() != z.grid() {
            return Err(FormsError::GridMismatch);
        }
        Ok(Self { comps: [x, y, z] })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            comps: [0, 1, 2].map(|_| ScalarField::zeros(grid)),
        }
    }

    /// Constant unit field `∂_axis`.
    pub fn coordinate(grid: Grid, axis: usize) -> Self {
        let mut v = Self::zeros(grid);
        v.comps[axis] = ScalarField::constant(grid, 1.0);
        v
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64, f64) -> [f64; 3]) -> Self {
        let samples: Vec<[f64; 3]> = (0..grid.len())
            .map(|idx| {
                let [x, y, z] = grid.point(idx);
                f(x, y, z)
            })
            .collect();
        Self {
            comps: [0, 1, 2].map(|a| {
                ScalarField::from_vec(grid, samples.iter().map(|s| s[a]).collect()).expect("grid-sized")
            }),
        }
    }

    /// Field whose contraction with `μ` is the given 2-form.
    pub fn from_two_form(form: &Form) -> Result<Self, FormsError> {
        if form.rank() != 2 {
            return Err(FormsError::Rank {
                op: "from_two_form",
                rank: form.rank(),
            });
        }
        Ok(Self {
            comps: [0, 1, 2].map(|a| form.comp(a).clone()),
        })
    }

    /// `ι_V μ`.
    pub fn to_two_form(&self) -> Form {
        let [a, b, c] = self.comps.clone();
        Form::two(a, b, c)
    }

    /// Flat-metric dual 1-form.
    pub fn flat(&self) -> Form {
        let [a, b, c] = self.comps.clone();
        Form::one(a, b, c)
    }

    /// Flat-metric dual of a 1-form.
    pub fn sharp(form: &Form) -> Result<Self, FormsError> {
        if form.rank() != 1 {
            return Err(FormsError::Rank {
                op: "sharp",
                rank: form.rank(),
            });
        }
        Ok(Self {
            comps: [0, 1, 2].map(|a| form.comp(a).clone()),
        })
    }

    pub fn grid(&self) -> Grid {
        self.comps[0].grid()
    }

    pub fn component(&self, axis: usize) -> &ScalarField {
        &self.comps[axis]
    }

    pub fn components(&self) -> &[ScalarField] {
        &self.comps
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            comps: self.comps.clone().map(|c| c.scale(s)),
        }
    }

    pub fn times(&self, f: &ScalarField) -> Self {
        Self {
            comps: self.comps.clone().map(|c| &c * f),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(ScalarField::is_finite)
    }

    pub fn l2_norm(&self) -> f64 {
        self.comps.iter().map(ScalarField::mean_square).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, c| m.max(c.max_abs()))
    }

    pub fn divergence(&self) -> ScalarField {
        let mut acc = self.comps[0].partial(0);
        acc += &self.comps[1].partial(1);
        acc += &self.comps[2].partial(2);
        acc
    }

    /// Lie bracket `[u, v]^i = u^j ∂_j v^i − v^j ∂_j u^i`.
    pub fn bracket(&self, other: &Self) -> Self {
        let gu: Vec<[ScalarField; 3]> = self.comps.iter().map(ScalarField::gradient).collect();
        let gv: Vec<[ScalarField; 3]> = other.comps.iter().map(ScalarField::gradient).collect();
        let comps = [0, 1, 2].map(|i| {
            let mut forward = ScalarField::zeros(self.grid());
            let mut backward = ScalarField::zeros(self.grid());
            for j in 0..3 {
                forward += &(&self.comps[j] * &gv[i][j]);
                backward += &(&other.comps[j] * &gu[i][j]);
            }
            forward - backward
        });
        Self { comps }
    }

    /// Divergence-free part (Leray projection). Modes with zero derivative
    /// wavenumber, including the mean, pass through unchanged.
    pub fn leray_projection(&self) -> Self {
        let g = self.grid();
        let mut s: Vec<_> = self.comps.iter().map(ScalarField::spectrum).collect();
        for idx in 0..g.len() {
            let (i, j, l) = g.unindex(idx);
            let k = [g.deriv_wavenumber(i), g.deriv_wavenumber(j), g.deriv_wavenumber(l)];
            let k2 = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
            if k2 == 0.0 {
                continue;
            }
            let kv = s[0].coeffs()[idx] * k[0] + s[1].coeffs()[idx] * k[1] + s[2].coeffs()[idx] * k[2];
            for (a, sa) in s.iter_mut().enumerate() {
                sa.coeffs_mut()[idx] -= kv * (k[a] / k2);
            }
        }
        let [a, b, c] = [0, 1, 2].map(|a| s[a].to_field());
        Self { comps: [a, b, c] }
    }

    pub fn dealiased(&self) -> Self {
        Self {
            comps: self.comps.clone().map(|c| c.dealiased()),
        }
    }

    pub fn eval_at(&self, point: [f64; 3]) -> [f64; 3] {
        [0, 1, 2].map(|a| self.comps[a].eval_at(point))
    }
}

impl Add<&VectorField> for &VectorField {
    type Output = VectorField;
    fn add(self, rhs: &VectorField) -> VectorField {
        VectorField {
            comps: [0, 1, 2].map(|a| &self.comps[a] + &rhs.comps[a]),
        }
    }
}

impl Sub<&VectorField> for &VectorField {
    type Output = VectorField;
    fn sub(self, rhs: &VectorField) -> VectorField {
        VectorField {
            comps: [0, 1, 2].map(|a| &self.comps[a] - &rhs.comps[a]),
        }
    }
}
