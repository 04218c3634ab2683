//! Periodic collocation grid on the unit 3-torus and the scalar fields that
//! live on it.
//!
//! Nodes sit at `(i/n, j/n, k/n)`. Storage is row-major with `x` slowest and
//! `z` fastest, so the flat index of node `(i, j, k)` is `(i * n + j) * n + k`.
//! All spectral operations go through a cached complex FFT per grid size.

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::FormsError;

/// Neumaier-compensated summation.
pub(crate) fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Uniform periodic grid with `n` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    n: usize,
}

impl Grid {
    /// `n` must be even and at least 4.
    pub fn new(n: usize) -> Result<Self, FormsError> {
        if n < 4 || n % 2 != 0 {
            return Err(FormsError::InvalidGrid(n));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of nodes, `n³`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        i as f64 / self.n as f64
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (i * self.n + j) * self.n + k
    }

    /// Inverse of [`Grid::index`].
    pub fn unindex(&self, idx: usize) -> (usize, usize, usize) {
        let n = self.n;
        (idx / (n * n), (idx / n) % n, idx % n)
    }

    /// Node coordinates for a flat index.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let (i, j, k) = self.unindex(idx);
        [self.coord(i), self.coord(j), self.coord(k)]
    }

    /// Exactness budget: products whose bandwidths sum to `total` are
    /// represented without aliasing when `n >= 2 * total + 2`.
    pub fn supports_bandwidth(&self, total: usize) -> bool {
        self.n >= 2 * total + 2
    }

    /// Largest retained |wavenumber| per axis under the 2/3 rule.
    pub fn dealias_cutoff(&self) -> usize {
        (self.n - 1) / 3
    }

    /// Signed integer mode for FFT index `m`; the Nyquist index maps to `+n/2`.
    pub fn signed_mode(&self, m: usize) -> i64 {
        if m <= self.n / 2 {
            m as i64
        } else {
            m as i64 - self.n as i64
        }
    }

    /// Angular wavenumber used for first derivatives. The Nyquist mode has
    /// no odd-derivative partner on an even grid and is sent to zero.
    pub fn deriv_wavenumber(&self, m: usize) -> f64 {
        if m == self.n / 2 {
            0.0
        } else {
            2.0 * PI * self.signed_mode(m) as f64
        }
    }
}

type Plans = (Arc<dyn Fft<f64>>, Arc<dyn Fft<f64>>);

thread_local! {
    static PLANS: RefCell<HashMap<usize, Plans>> = RefCell::new(HashMap::new());
}

fn plans(n: usize) -> Plans {
    PLANS.with(|cell| {
        let mut map = cell.borrow_mut();
        map.entry(n)
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                (planner.plan_fft_forward(n), planner.plan_fft_inverse(n))
            })
            .clone()
    })
}

/// 1-D FFT of a contiguous buffer whose length is a multiple of `n`.
pub(crate) fn fft1(data: &mut [Complex64], n: usize, inverse: bool) {
    let (fwd, inv) = plans(n);
    if inverse {
        inv.process(data);
        let s = 1.0 / n as f64;
        data.iter_mut().for_each(|c| *c *= s);
    } else {
        fwd.process(data);
    }
}

/// In-place 3-D FFT. The inverse is normalized by `1/n³`.
fn fft3(data: &mut [Complex64], n: usize, inverse: bool) {
    let (fwd, inv) = plans(n);
    let plan = if inverse { inv } else { fwd };
    // z axis is contiguous.
    plan.process(data);

    let mut lines = vec![Complex64::new(0.0, 0.0); data.len()];
    // y axis: stride n.
    for i in 0..n {
        for k in 0..n {
            let line = (i * n + k) * n;
            for j in 0..n {
                lines[line + j] = data[(i * n + j) * n + k];
            }
        }
    }
    plan.process(&mut lines);
    for i in 0..n {
        for k in 0..n {
            let line = (i * n + k) * n;
            for j in 0..n {
                data[(i * n + j) * n + k] = lines[line + j];
            }
        }
    }
    // x axis: stride n².
    for j in 0..n {
        for k in 0..n {
            let line = (j * n + k) * n;
            for i in 0..n {
                lines[line + i] = data[(i * n + j) * n + k];
            }
        }
    }
    plan.process(&mut lines);
    for j in 0..n {
        for k in 0..n {
            let line = (j * n + k) * n;
            for i in 0..n {
                data[(i * n + j) * n + k] = lines[line + i];
            }
        }
    }

    if inverse {
        let s = 1.0 / (n * n * n) as f64;
        data.iter_mut().for_each(|c| *c *= s);
    }
}

/// Fourier coefficients of a scalar field, same index layout as the field.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid,
    data: Vec<Complex64>,
}

impl Spectrum {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            data: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.data
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Real part of the inverse transform.
    pub fn to_field(&self) -> ScalarField {
        let mut buf = self.data.clone();
        fft3(&mut buf, self.grid.n, true);
        ScalarField {
            grid: self.grid,
            data: buf.into_iter().map(|c| c.re).collect(),
        }
    }

    /// Multiply by `i k_axis`.
    pub fn derivative(&self, axis: usize) -> Spectrum {
        let g = self.grid;
        let mut out = self.clone();
        for (idx, c) in out.data.iter_mut().enumerate() {
            let (i, j, l) = g.unindex(idx);
            let k = g.deriv_wavenumber([i, j, l][axis]);
            *c = Complex64::new(-k * c.im, k * c.re);
        }
        out
    }

    /// Zero every mode outside the 2/3-rule box.
    pub fn dealias(&mut self) {
        let g = self.grid;
        let cut = g.dealias_cutoff() as i64;
        for (idx, c) in self.data.iter_mut().enumerate() {
            let (i, j, k) = g.unindex(idx);
            if g.signed_mode(i).abs() > cut || g.signed_mode(j).abs() > cut || g.signed_mode(k).abs() > cut
            {
                *c = Complex64::new(0.0, 0.0);
            }
        }
    }

    /// Fraction of spectral energy carried by modes outside the 2/3-rule box.
    pub fn tail_fraction(&self) -> f64 {
        let g = self.grid;
        let cut = g.dealias_cutoff() as i64;
        let mut total = 0.0;
        let mut tail = 0.0;
        for (idx, c) in self.data.iter().enumerate() {
            let e = c.norm_sqr();
            total += e;
            let (i, j, k) = g.unindex(idx);
            if g.signed_mode(i).abs() > cut || g.signed_mode(j).abs() > cut || g.signed_mode(k).abs() > cut
            {
                tail += e;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }

    pub(crate) fn axpy(&mut self, a: f64, other: &Spectrum) {
        for (c, o) in self.data.iter_mut().zip(&other.data) {
            *c += o * a;
        }
    }
}

/// A real scalar field sampled at grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: Grid, value: f64) -> Self {
        Self {
            grid,
            data: vec![value; grid.len()],
        }
    }

    /// Samples `f(x, y, z)` at every node.
    pub fn from_fn(grid: Grid, f: impl Fn(f64, f64, f64) -> f64) -> Self {
        let data = (0..grid.len())
            .map(|idx| {
                let [x, y, z] = grid.point(idx);
                f(x, y, z)
            })
            .collect();
        Self { grid, data }
    }

    pub fn from_vec(grid: Grid, data: Vec<f64>) -> Result<Self, FormsError> {
        if data.len() != grid.len() {
            return Err(FormsError::Shape {
                expected: grid.len(),
                found: data.len(),
            });
        }
        Ok(Self { grid, data })
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_values(self) -> Vec<f64> {
        self.data
    }

    pub fn at(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.grid.index(i, j, k)]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|v| v * s)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Grid mean, which is the exact integral of the trigonometric
    /// interpolant over the unit torus.
    pub fn mean(&self) -> f64 {
        compensated_sum(self.data.iter().copied()) / self.data.len() as f64
    }

    pub fn mean_square(&self) -> f64 {
        compensated_sum(self.data.iter().map(|v| v * v)) / self.data.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn spectrum(&self) -> Spectrum {
        let mut buf: Vec<Complex64> = self.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        fft3(&mut buf, self.grid.n, false);
        Spectrum {
            grid: self.grid,
            data: buf,
        }
    }

    /// Spectral partial derivative along `axis` (0 = x, 1 = y, 2 = z).
    pub fn partial(&self, axis: usize) -> Self {
        self.spectrum().derivative(axis).to_field()
    }

    pub fn gradient(&self) -> [Self; 3] {
        let s = self.spectrum();
        [0, 1, 2].map(|a| s.derivative(a).to_field())
    }

    /// Project onto the 2/3-rule band.
    pub fn dealiased(&self) -> Self {
        let mut s = self.spectrum();
        s.dealias();
        s.to_field()
    }

    pub fn interpolant(&self) -> Interpolant {
        Interpolant {
            spectrum: self.spectrum(),
        }
    }

    /// Evaluate the trigonometric interpolant at an arbitrary point.
    pub fn eval_at(&self, point: [f64; 3]) -> f64 {
        self.interpolant().eval(point)
    }
}

/// Cached Fourier coefficients for repeated off-grid evaluation.
#[derive(Debug, Clone)]
pub struct Interpolant {
    spectrum: Spectrum,
}

impl Interpolant {
    fn axis_basis(n: usize, x: f64) -> Vec<Complex64> {
        let grid = Grid { n };
        (0..n)
            .map(|m| {
                if m == n / 2 {
                    // Split the Nyquist mode symmetrically so the result stays real.
                    Complex64::new((PI * n as f64 * x).cos(), 0.0)
                } else {
                    let phase = 2.0 * PI * grid.signed_mode(m) as f64 * x;
                    Complex64::new(phase.cos(), phase.sin())
                }
            })
            .collect()
    }

    pub fn eval(&self, point: [f64; 3]) -> f64 {
        let n = self.spectrum.grid.n;
        let bx = Self::axis_basis(n, point[0]);
        let by = Self::axis_basis(n, point[1]);
        let bz = Self::axis_basis(n, point[2]);
        let c = &self.spectrum.data;
        let mut total = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let mut plane = Complex64::new(0.0, 0.0);
            for j in 0..n {
                let row = &c[(i * n + j) * n..(i * n + j + 1) * n];
                let line: Complex64 = row.iter().zip(&bz).map(|(a, b)| a * b).sum();
                plane += line * by[j];
            }
            total += plane * bx[i];
        }
        total.re / (n * n * n) as f64
    }
}

macro_rules! scalar_binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<&ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: &ScalarField) -> ScalarField {
                self.zip_with(rhs, |a, b| a $op b)
            }
        }
        impl $tr<ScalarField> for ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: ScalarField) -> ScalarField {
                (&self).$method(&rhs)
            }
        }
        impl $tr<&ScalarField> for ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: &ScalarField) -> ScalarField {
                (&self).$method(rhs)
            }
        }
        impl $tr<ScalarField> for &ScalarField {
            type Output = ScalarField;
            fn $method(self, rhs: ScalarField) -> ScalarField {
                self.$method(&rhs)
            }
        }
    };
}

scalar_binop!(Add, add, +);
scalar_binop!(Sub, sub, -);
scalar_binop!(Mul, mul, *);

impl Mul<f64> for &ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: f64) -> ScalarField {
        self.scale(rhs)
    }
}

impl Mul<f64> for ScalarField {
    type Output = ScalarField;
    fn mul(self, rhs: f64) -> ScalarField {
        self.scale(rhs)
    }
}

impl Neg for &ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        self.map(|v| -v)
    }
}

impl Neg for ScalarField {
    type Output = ScalarField;
    fn neg(self) -> ScalarField {
        -&self
    }
}

impl AddAssign<&ScalarField> for ScalarField {
    fn add_assign(&mut self, rhs: &ScalarField) {
        self.data.iter_mut().zip(&rhs.data).for_each(|(a, b)| *a += b);
    }
}

impl SubAssign<&ScalarField> for ScalarField {
    fn sub_assign(&mut self, rhs: &ScalarField) {
        self.data.iter_mut().zip(&rhs.data).for_each(|(a, b)| *a -= b);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_odd_and_small() {
        assert!(Grid::new(3).is_err());
        assert!(Grid::new(2).is_err());
        assert!(Grid::new(31).is_err());
        assert!(Grid::new(4).is_ok());
    }

    #[test]
    fn fft_roundtrip() {
        let g = Grid::new(8).unwrap();
        let f = ScalarField::from_fn(g, |x, y, z| (x * 3.0).sin() + y * z);
        let back = f.spectrum().to_field();
        for (a, b) in f.values().iter().zip(back.values()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn derivative_of_sine() {
        let g = Grid::new(32).unwrap();
        let f = ScalarField::from_fn(g, |x, _, _| (2.0 * PI * x).sin());
        let df = f.partial(0);
        let exact = ScalarField::from_fn(g, |x, _, _| 2.0 * PI * (2.0 * PI * x).cos());
        assert!((&df - &exact).max_abs() < 1e-12);
        assert!(f.partial(1).max_abs() < 1e-13);
    }

    #[test]
    fn interpolant_reproduces_nodes_and_analytic_values() {
        let g = Grid::new(16).unwrap();
        let f = ScalarField::from_fn(g, |x, y, z| {
            (2.0 * PI * x).sin() + 0.5 * (4.0 * PI * (y + z)).cos() + (16.0 * PI * z).cos()
        });
        let interp = f.interpolant();
        for &idx in &[0usize, 17, 555, 4095] {
            let p = g.point(idx);
            assert!((interp.eval(p) - f.values()[idx]).abs() < 1e-13);
        }
        let s = ScalarField::from_fn(g, |x, _, _| (2.0 * PI * x).sin());
        assert!((s.eval_at([0.25, 0.3, 0.7]) - 1.0).abs() < 1e-14);
        let c = ScalarField::constant(g, 2.5);
        assert!((c.eval_at([0.123, 0.456, 0.789]) - 2.5).abs() < 1e-14);
    }

    #[test]
    fn dealias_drops_high_modes() {
        let g = Grid::new(12).unwrap();
        assert_eq!(g.dealias_cutoff(), 3);
        let low = ScalarField::from_fn(g, |x, _, _| (6.0 * PI * x).cos());
        let high = ScalarField::from_fn(g, |_, y, _| (8.0 * PI * y).cos());
        assert!((&low.dealiased() - &low).max_abs() < 1e-14);
        assert!(high.dealiased().max_abs() < 1e-14);
        assert!(high.spectrum().tail_fraction() > 0.99);
    }
}
