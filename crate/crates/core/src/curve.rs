//! Closed test curves and reparameterization to uniform speed.

use std::f64::consts::PI;

use crate::error::{GsqgError, Result};
use crate::field::{spectral_antiderivative, spectral_derivative, FieldKind, PeriodicField, C64};

/// A closed curve `theta -> sum_k c_k e^{2 pi i k theta}` given by finitely
/// many complex Fourier modes, in an arbitrary parameterization.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierCurve {
    pub modes: Vec<(i64, C64)>,
}

impl FourierCurve {
    pub fn new(modes: Vec<(i64, C64)>) -> Self {
        Self { modes }
    }

    pub fn eval(&self, theta: f64) -> C64 {
        self.modes
            .iter()
            .map(|&(k, c)| c * C64::from_polar(1.0, 2.0 * PI * k as f64 * theta))
            .sum()
    }

    pub fn max_mode(&self) -> u64 {
        self.modes.iter().map(|(k, _)| k.unsigned_abs()).max().unwrap_or(0)
    }

    pub fn circle(r: f64) -> Self {
        Self::new(vec![(1, C64::new(r, 0.0))])
    }

    /// `(a cos t, b sin t)`.
    pub fn ellipse(a: f64, b: f64) -> Self {
        Self::new(vec![
            (1, C64::new(0.5 * (a + b), 0.0)),
            (-1, C64::new(0.5 * (a - b), 0.0)),
        ])
    }

    /// `(cos t, sin t (eps + cos^2 t))`: two lobes joined by a neck of width
    /// `~2 eps` around `x = 0`.
    pub fn neck(eps: f64) -> Self {
        // sin t cos^2 t = (sin t + sin 3t) / 4
        let y1 = eps + 0.25;
        let y3 = 0.25;
        // y = y1 sin t + y3 sin 3t, x = cos t; x + i y in exponentials
        Self::new(vec![
            (1, C64::new(0.5 + 0.5 * y1, 0.0)),
            (-1, C64::new(0.5 - 0.5 * y1, 0.0)),
            (3, C64::new(0.5 * y3, 0.0)),
            (-3, C64::new(-0.5 * y3, 0.0)),
        ])
    }
}

/// Resample a closed curve at `n` points equally spaced in arc length, with
/// `s = 0` at `theta = 0`. The arc-length map is built spectrally on a fine
/// grid and inverted by Newton iteration.
pub fn reparameterize_uniform(curve: &FourierCurve, n: usize) -> Result<PeriodicField> {
    let fine = (8 * n).max(16 * curve.max_mode() as usize).max(1024).next_power_of_two();
    let z = PeriodicField::from_fn(fine, FieldKind::Vector, |t| curve.eval(t))?;
    let zt = spectral_derivative(&z, 1)?;
    let speed: Vec<f64> = zt.samples().iter().map(|c| c.norm()).collect();
    let length = speed.iter().sum::<f64>() / fine as f64;
    if !(length > 0.0) {
        return Err(GsqgError::invalid("curve has zero length"));
    }
    let min_speed = speed.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_speed < 1e-8 * length {
        return Err(GsqgError::invalid("curve is not regular: speed vanishes"));
    }
    let excess = PeriodicField::from_real(&speed.iter().map(|s| s / length - 1.0).collect::<Vec<_>>())?;
    let excess = excess.apply_multiplier(|k| if k == 0.0 { 0.0.into() } else { 1.0.into() });
    let wobble = spectral_antiderivative(&excess)?;
    let sigma = |t: f64| t + wobble.eval(t).re;
    let dsigma = |t: f64| 1.0 + excess.eval(t).re;
    let mut theta = 0.0;
    let samples = (0..n)
        .map(|j| {
            let target = j as f64 / n as f64;
            // continuation from the previous node
            let mut t = if j == 0 { 0.0 } else { theta + (1.0 / n as f64) / dsigma(theta) };
            for _ in 0..50 {
                let dt = (sigma(t) - target) / dsigma(t);
                t -= dt;
                if dt.abs() < 1e-15 {
                    break;
                }
            }
            theta = t;
            curve.eval(t)
        })
        .collect();
    PeriodicField::from_samples(samples, FieldKind::Vector)
}

/// Length by adaptive quadrature of the speed of the given curve.
pub fn arc_length(curve: &FourierCurve) -> Result<f64> {
    let speed = |t: f64| {
        curve
            .modes
            .iter()
            .map(|&(k, c)| c * C64::new(0.0, 2.0 * PI * k as f64) * C64::from_polar(1.0, 2.0 * PI * k as f64 * t))
            .sum::<C64>()
            .norm()
    };
    let breaks: Vec<f64> = (1..16).map(|i| i as f64 / 16.0).collect();
    let (v, _) = crate::quadrature::adaptive_scalar(
        speed,
        0.0,
        1.0,
        &breaks,
        crate::quadrature::Tolerance {
            abs: 1e-14,
            rel: 1e-15,
            max_intervals: 10_000,
        },
    )?;
    Ok(v)
}

pub fn circle(r: f64, n: usize) -> Result<PeriodicField> {
    if !(r > 0.0) {
        return Err(GsqgError::invalid("radius must be positive"));
    }
    PeriodicField::from_fn(n, FieldKind::Vector, |s| C64::from_polar(r, 2.0 * PI * s))
}

pub fn ellipse(a: f64, b: f64, n: usize) -> Result<PeriodicField> {
    if !(a > 0.0 && b > 0.0) {
        return Err(GsqgError::invalid("semi-axes must be positive"));
    }
    reparameterize_uniform(&FourierCurve::ellipse(a, b), n)
}

pub fn neck_curve(eps: f64, n: usize) -> Result<PeriodicField> {
    if !(eps > 0.0) {
        return Err(GsqgError::invalid("neck width must be positive"));
    }
    reparameterize_uniform(&FourierCurve::neck(eps), n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arc_chord::speed_deviation;
    use approx::assert_abs_diff_eq;

    #[test]
    fn neck_modes_match_definition() {
        let c = FourierCurve::neck(0.1);
        for t in [0.0, 0.13, 0.4, 0.77] {
            let th = 2.0 * PI * t;
            let expect = C64::new(th.cos(), th.sin() * (0.1 + th.cos().powi(2)));
            assert!((c.eval(t) - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn circle_is_already_uniform() {
        let z = reparameterize_uniform(&FourierCurve::circle(1.0), 64).unwrap();
        let direct = circle(1.0, 64).unwrap();
        for (a, b) in z.samples().iter().zip(direct.samples()) {
            assert!((a - b).norm() < 1e-13);
        }
        let g = spectral_derivative(&z, 1).unwrap();
        assert_abs_diff_eq!(speed_deviation(&g).0, 2.0 * PI, epsilon = 1e-12);
    }

    #[test]
    fn ellipse_uniform_speed_and_length() {
        let z = ellipse(1.0, 0.6, 256).unwrap();
        let g = spectral_derivative(&z, 1).unwrap();
        let (l, dev) = speed_deviation(&g);
        assert!(dev < 1e-10, "{dev}");
        let exact = arc_length(&FourierCurve::ellipse(1.0, 0.6)).unwrap();
        assert_abs_diff_eq!(l, exact, epsilon = 1e-10 * exact);
        // known perimeter of the (1, 0.6) ellipse
        assert_abs_diff_eq!(exact, 5.105_399_772_679_626, epsilon = 1e-11);
    }

    #[test]
    fn reparameterization_is_idempotent() {
        let z = ellipse(1.0, 0.6, 128).unwrap();
        let modes: Vec<(i64, C64)> = z
            .coeffs()
            .iter()
            .enumerate()
            .map(|(j, &c)| (crate::field::mode(j, 128), c))
            .filter(|(k, _)| k.unsigned_abs() < 64)
            .collect();
        let again = reparameterize_uniform(&FourierCurve::new(modes), 128).unwrap();
        for (a, b) in again.coeffs().iter().zip(z.coeffs()) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
