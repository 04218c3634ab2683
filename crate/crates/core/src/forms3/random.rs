//! Seeded random band-limited fields for property checks.

use rand::Rng;
use rustfft::num_complex::Complex64;

use super::form::{component_count, Form};
use super::grid::{Grid, ScalarField, Spectrum};
use super::vector::VectorField;

/// Random real scalar field whose Fourier support lies in the box
/// `|k_i| ≤ bandwidth`, rescaled to the given RMS amplitude.
pub fn random_scalar<R: Rng + ?Sized>(grid: Grid, bandwidth: usize, amplitude: f64, rng: &mut R) -> ScalarField {
    let n = grid.n();
    let b = bandwidth.min(n / 2 - 1) as i64;
    let mut spec = Spectrum::zeros(grid);
    for idx in 0..grid.len() {
        let (i, j, k) = grid.unindex(idx);
        if [i, j, k].iter().all(|&m| grid.signed_mode(m).abs() <= b) {
            spec.coeffs_mut()[idx] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        }
    }
    // Hermitian symmetrization so the inverse transform is real.
    let raw = spec.coeffs().to_vec();
    for idx in 0..grid.len() {
        let (i, j, k) = grid.unindex(idx);
        let mirror = grid.index((n - i) % n, (n - j) % n, (n - k) % n);
        spec.coeffs_mut()[idx] = (raw[idx] + raw[mirror].conj()) * 0.5;
    }
    let f = spec.to_field();
    let rms = f.mean_square().sqrt();
    if rms == 0.0 {
        f
    } else {
        f.scale(amplitude / rms)
    }
}

pub fn random_form<R: Rng + ?Sized>(grid: Grid, rank: usize, bandwidth: usize, amplitude: f64, rng: &mut R) -> Form {
    let comps = (0..component_count(rank))
        .map(|_| random_scalar(grid, bandwidth, amplitude, rng))
        .collect();
    Form::new(rank, comps).expect("rank in range")
}

/// Random band-limited field rescaled so that `‖v‖` (RMS over all
/// components) equals `amplitude`.
pub fn random_vector_field<R: Rng + ?Sized>(grid: Grid, bandwidth: usize, amplitude: f64, rng: &mut R) -> VectorField {
    let [a, b, c] = [0, 1, 2].map(|_| random_scalar(grid, bandwidth, 1.0, rng));
    VectorField::new(a, b, c).expect("shared grid").scale(amplitude / 3f64.sqrt())
}

/// Random band-limited field with zero spectral divergence, rescaled to the
/// given RMS amplitude.
pub fn random_divergence_free<R: Rng + ?Sized>(
    grid: Grid,
    bandwidth: usize,
    amplitude: f64,
    rng: &mut R,
) -> VectorField {
    let v = random_vector_field(grid, bandwidth, 1.0, rng).leray_projection();
    let rms = v.l2_norm();
    if rms == 0.0 {
        v
    } else {
        v.scale(amplitude / rms)
    }
}
