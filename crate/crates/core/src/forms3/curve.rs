//! Closed parametric curves on the torus and line integrals of 1-forms.

use std::f64::consts::PI;

use rustfft::num_complex::Complex64;

use super::form::Form;
use super::grid::fft1;
use super::FormsError;

/// Closure tolerance on the gap between the last and first sample (mod 1).
pub const CLOSURE_TOL: f64 = 1e-12;

/// A closed curve sampled uniformly in its parameter. Coordinates are
/// stored unwrapped so the curve may wind around the torus.
#[derive(Debug, Clone, PartialEq)]
pub struct Loop {
    points: Vec<[f64; 3]>,
    /// Derivative with respect to the normalized parameter `s ∈ [0, 1)`.
    tangents: Vec<[f64; 3]>,
    winding: [i64; 3],
}

fn wrap_half(d: f64) -> f64 {
    d - d.round()
}

impl Loop {
    /// Build from samples `t_0 < … < t_m` with uniform spacing, where the
    /// final sample closes the curve (equal to the first modulo 1).
    pub fn from_samples(times: &[f64], points: &[[f64; 3]]) -> Result<Self, FormsError> {
        if times.len() != points.len() {
            return Err(FormsError::Curve(format!(
                "{} times but {} points",
                times.len(),
                points.len()
            )));
        }
        if points.len() < 4 {
            return Err(FormsError::Curve("a loop needs at least 4 samples".into()));
        }
        let m = points.len() - 1;
        let period = times[m] - times[0];
        if !(period > 0.0) {
            return Err(FormsError::Curve("curve times must increase".into()));
        }
        let h = period / m as f64;
        for (i, t) in times.iter().enumerate() {
            if ((t - times[0]) - i as f64 * h).abs() > 1e-9 * period {
                return Err(FormsError::Curve(format!("non-uniform parameter spacing at sample {i}")));
            }
        }

        let mut lifted = vec![points[0]; m + 1];
        for i in 1..=m {
            for a in 0..3 {
                lifted[i][a] = lifted[i - 1][a] + wrap_half(points[i][a] - points[i - 1][a]);
            }
        }
        let mut winding = [0i64; 3];
        for a in 0..3 {
            let total = lifted[m][a] - lifted[0][a];
            let w = total.round();
            let gap = (total - w).abs();
            if gap > CLOSURE_TOL {
                return Err(FormsError::OpenCurve { gap });
            }
            winding[a] = w as i64;
        }

        let mut tangents = vec![[0.0; 3]; m];
        for a in 0..3 {
            let w = winding[a] as f64;
            let mut buf: Vec<Complex64> = (0..m)
                .map(|i| Complex64::new(lifted[i][a] - w * i as f64 / m as f64, 0.0))
                .collect();
            fft1(&mut buf, m, false);
            for (q, c) in buf.iter_mut().enumerate() {
                let k = if 2 * q == m {
                    0.0
                } else if 2 * q < m {
                    q as f64
                } else {
                    q as f64 - m as f64
                };
                *c *= Complex64::new(0.0, 2.0 * PI * k);
            }
            fft1(&mut buf, m, true);
            for i in 0..m {
                tangents[i][a] = buf[i].re + w;
            }
        }

        Ok(Self {
            points: lifted[..m].to_vec(),
            tangents,
            winding,
        })
    }

    /// Sample a parametrization `s ↦ γ(s)` on `s = i/m`, `i = 0..=m`.
    pub fn from_fn(samples: usize, f: impl Fn(f64) -> [f64; 3]) -> Result<Self, FormsError> {
        let times: Vec<f64> = (0..=samples).map(|i| i as f64 / samples as f64).collect();
        let points: Vec<[f64; 3]> = times.iter().map(|&s| f(s)).collect();
        Self::from_samples(&times, &points)
    }

    /// Parse CSV with header `t,x,y,z`.
    pub fn from_csv(text: &str) -> Result<Self, FormsError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| FormsError::Curve("empty curve file".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols != ["t", "x", "y", "z"] {
            return Err(FormsError::Curve(format!("expected header t,x,y,z, found {header:?}")));
        }
        let mut times = Vec::new();
        let mut points = Vec::new();
        for (row, line) in lines.enumerate() {
            let vals: Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
            let vals = vals.map_err(|e| FormsError::Curve(format!("row {}: {e}", row + 1)))?;
            if vals.len() != 4 {
                return Err(FormsError::Curve(format!("row {}: expected 4 columns", row + 1)));
            }
            times.push(vals[0]);
            points.push([vals[1], vals[2], vals[3]]);
        }
        Self::from_samples(&times, &points)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn winding(&self) -> [i64; 3] {
        self.winding
    }

    pub fn points(&self) -> &[[f64; 3]] {
        &self.points
    }

    pub fn tangents(&self) -> &[[f64; 3]] {
        &self.tangents
    }
}

/// `∫_γ α`, by the periodic trapezoid rule on the pullback.
pub fn line_integral(alpha: &Form, curve: &Loop) -> Result<f64, FormsError> {
    if alpha.rank() != 1 {
        return Err(FormsError::Rank {
            op: "line_integral",
            rank: alpha.rank(),
        });
    }
    let interps: Vec<_> = alpha.components().iter().map(|c| c.interpolant()).collect();
    let total: f64 = curve
        .points
        .iter()
        .zip(&curve.tangents)
        .map(|(p, t)| (0..3).map(|a| interps[a].eval(*p) * t[a]).sum::<f64>())
        .sum();
    Ok(total / curve.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms3::{Grid, ScalarField};

    #[test]
    fn x_circle_period() {
        let g = Grid::new(8).unwrap();
        let dx = Form::coordinate_one_form(g, 0);
        let c = Loop::from_fn(16, |s| [s, 0.25, 0.5]).unwrap();
        assert_eq!(c.winding(), [1, 0, 0]);
        assert!((line_integral(&dx, &c).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn open_curve_is_rejected() {
        assert!(matches!(
            Loop::from_fn(16, |s| [0.5 * s, 0.0, 0.0]),
            Err(FormsError::OpenCurve { .. })
        ));
    }

    #[test]
    fn csv_parsing() {
        let mut text = String::from("t,x,y,z\n");
        for i in 0..=8 {
            let s = i as f64 / 8.0;
            text.push_str(&format!("{},{},{},{}\n", 2.0 * s, 0.1, s, 0.3));
        }
        let c = Loop::from_csv(&text).unwrap();
        assert_eq!(c.len(), 8);
        let g = Grid::new(8).unwrap();
        let dy = Form::one(ScalarField::zeros(g), ScalarField::constant(g, 2.0), ScalarField::zeros(g));
        assert!((line_integral(&dy, &c).unwrap() - 2.0).abs() < 1e-13);
        assert!(Loop::from_csv("a,b\n").is_err());
    }
}
