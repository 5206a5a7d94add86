//! The arc-chord function `Gamma(s, s*) = |sin(pi s*)| / (pi |z(s + s*) - z(s)|)`,
//! its `s*` derivative and first-order expansions.
//!
//! Chords are never formed by subtraction: `Dz = I0(z_s) s*` holds exactly for
//! trigonometric polynomials, so `Gamma = 1 / (|I0(z_s)| r(s*))` with
//! `r(s*) = pi s* / sin(pi s*)`, which is free of cancellation on the diagonal.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{GsqgError, Result};
use crate::field::{
    column_transform, ftc_average_2var, ftc_average_on, ftc_phase_prime, sin_rho, sinc,
    spectral_derivative, sstar_of, BiPeriodicField, PeriodicField, C64,
};

#[derive(Clone, Copy, Debug)]
pub struct ArcChordOptions {
    /// Allowed relative deviation of `|z_s|` from its mean.
    pub speed_tol: f64,
    /// Minimum chord as a fraction of the length.
    pub chord_threshold: f64,
}

impl Default for ArcChordOptions {
    fn default() -> Self {
        Self {
            speed_tol: 1e-8,
            chord_threshold: 1e-10,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ArcChordField {
    pub gamma: BiPeriodicField,
    pub gamma_dstar: BiPeriodicField,
    pub length: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ArcChordStats {
    pub min_gamma: f64,
    pub max_gamma: f64,
    pub length: f64,
}

impl ArcChordField {
    /// Wrap an evolved `Gamma`; the length is read off the diagonal and the
    /// `s*` derivative is taken spectrally.
    pub fn from_gamma(gamma: BiPeriodicField) -> Result<Self> {
        let g00 = gamma.get(0, 0).re;
        if !(g00 > 0.0) || !g00.is_finite() {
            return Err(GsqgError::invalid(format!("Gamma(0,0) = {g00} is not positive")));
        }
        if !(gamma.min_re() > 0.0) {
            return Err(GsqgError::invalid("Gamma is not positive"));
        }
        let mut gamma_dstar = gamma.dstar().map(|c| C64::new(c.re, 0.0));
        for j in 0..gamma.n_s() {
            gamma_dstar.set(j, 0, C64::new(0.0, 0.0));
        }
        Ok(Self {
            gamma,
            gamma_dstar,
            length: 1.0 / g00,
        })
    }

    pub fn n_s(&self) -> usize {
        self.gamma.n_s()
    }

    pub fn n_star(&self) -> usize {
        self.gamma.n_star()
    }
}

/// `pi s* / sin(pi s*)` and its derivative in `s*`.
pub fn chord_ratio(ss: f64) -> (f64, f64) {
    let x = PI * ss;
    if x.abs() < 1e-3 {
        let x2 = x * x;
        (
            1.0 + x2 / 6.0 + 7.0 * x2 * x2 / 360.0,
            PI * (x / 3.0 + 7.0 * x * x2 / 90.0),
        )
    } else {
        let (s, c) = x.sin_cos();
        (x / s, PI * (s - x * c) / (s * s))
    }
}

/// Relative deviation `max |(|z_s| - L)| / L` with `L` the mean speed.
pub fn speed_deviation(g: &PeriodicField) -> (f64, f64) {
    let speeds: Vec<f64> = g.samples().iter().map(|c| c.norm()).collect();
    let l = speeds.iter().sum::<f64>() / speeds.len() as f64;
    let dev = speeds.iter().fold(0.0f64, |m, s| m.max((s - l).abs())) / l;
    (l, dev)
}

/// `Gamma` on the square grid.
pub fn build_gamma(z: &PeriodicField) -> Result<ArcChordField> {
    build_gamma_on(z, z.n(), ArcChordOptions::default())
}

/// `Gamma` on an `n x n_star` grid.
pub fn build_gamma_on(
    z: &PeriodicField,
    n_star: usize,
    opts: ArcChordOptions,
) -> Result<ArcChordField> {
    let g = spectral_derivative(z, 1)?;
    let (length, dev) = speed_deviation(&g);
    if dev > opts.speed_tol {
        return Err(GsqgError::InvalidParameterization {
            deviation: dev,
            tolerance: opts.speed_tol,
        });
    }
    let avg = ftc_average_on(&g, n_star);
    let threshold = opts.chord_threshold * length;
    let mut min_chord = f64::INFINITY;
    for j in 0..avg.n_s() {
        for m in 1..n_star {
            min_chord = min_chord.min(avg.get(j, m).norm() * avg.sstar(m).abs());
        }
    }
    if min_chord < threshold {
        return Err(GsqgError::NearSelfIntersection {
            min_chord,
            threshold,
        });
    }
    let mut gamma = avg.map(|c| C64::new(1.0 / c.norm(), 0.0));
    let ratio: Vec<f64> = (0..n_star).map(|m| sinc(PI * sstar_of(m, n_star))).collect();
    gamma.rows_mut().for_each(|(_, row)| {
        row.iter_mut().zip(&ratio).for_each(|(v, r)| v.re *= r);
        row[0] = C64::new(1.0 / length, 0.0);
    });
    let gamma_dstar = dstar_from_curve(&g, &avg, &gamma);
    Ok(ArcChordField {
        gamma,
        gamma_dstar,
        length,
    })
}

/// `d Gamma / d s* = -Gamma^3 Z . dZ` with `Z = I0(z_s) r(s*)`.
fn dstar_from_curve(
    g: &PeriodicField,
    avg: &BiPeriodicField,
    gamma: &BiPeriodicField,
) -> BiPeriodicField {
    let n_star = avg.n_star();
    let davg = column_transform(g, n_star, |k, ss| 2.0 * PI * k * ftc_phase_prime(2.0 * PI * k * ss));
    let mut out = BiPeriodicField::zeros(avg.n_s(), n_star);
    out.rows_mut().for_each(|(j, row)| {
        for (m, v) in row.iter_mut().enumerate().skip(1) {
            let (r, dr) = chord_ratio(sstar_of(m, n_star));
            let a = avg.get(j, m);
            let z = a * r;
            let dz = davg.get(j, m) * r + a * dr;
            let gm = gamma.get(j, m).re;
            *v = C64::new(-gm * gm * gm * crate::field::dot(z, dz), 0.0);
        }
    });
    out
}

/// `d Gamma / d s*` from the unregularized quotient formula, for comparison.
/// Not defined on the diagonal (returned as zero).
pub fn gamma_dstar_closed(z: &PeriodicField, ac: &ArcChordField) -> Result<BiPeriodicField> {
    let g = spectral_derivative(z, 1)?;
    let n_star = ac.n_star();
    let dz = crate::field::finite_diff_on(z, n_star);
    let gs = crate::field::shifted(&g, n_star);
    let mut out = BiPeriodicField::zeros(ac.n_s(), n_star);
    out.rows_mut().for_each(|(j, row)| {
        for (m, v) in row.iter_mut().enumerate().skip(1) {
            let ss = sstar_of(m, n_star);
            let sn = sin_rho(ss);
            let d = dz.get(j, m);
            let num = gs.get(j, m) * sn - d * (PI * ss).cos();
            let gm = ac.gamma.get(j, m).re;
            *v = C64::new(-gm.powi(3) * crate::field::dot(d / sn, num / (sn * sn)), 0.0);
        }
    });
    Ok(out)
}

/// `d Gamma / d s*` for a curve; zero on the diagonal.
pub fn gamma_dstar(z: &PeriodicField, ac: &ArcChordField) -> Result<BiPeriodicField> {
    let g = spectral_derivative(z, 1)?;
    let avg = ftc_average_on(&g, ac.n_star());
    Ok(dstar_from_curve(&g, &avg, &ac.gamma))
}

/// `I0(d Gamma / d s*)`, so that `Gamma = 1/L + I0(d Gamma / d s*) s*`.
pub fn gamma_expansion_remainder(ac: &ArcChordField) -> BiPeriodicField {
    ftc_average_2var(&ac.gamma_dstar)
}

/// `I0(beta Gamma^{beta-1} d Gamma / d s*)`, so that
/// `Gamma^beta = L^{-beta} + I0(...) s*`.
pub fn gamma_beta_expansion(ac: &ArcChordField, beta: f64) -> Result<BiPeriodicField> {
    if !(beta > 1.0 && beta < 2.0) {
        return Err(GsqgError::invalid(format!(
            "beta = {beta} must lie strictly between 1 and 2"
        )));
    }
    Ok(gamma_power_expansion(ac, beta))
}

pub(crate) fn gamma_power_expansion(ac: &ArcChordField, p: f64) -> BiPeriodicField {
    let integrand = ac
        .gamma
        .zip_map(&ac.gamma_dstar, |g, d| C64::new(p * g.re.powf(p - 1.0) * d.re, 0.0));
    ftc_average_2var(&integrand)
}

pub fn arc_chord_stats(ac: &ArcChordField) -> ArcChordStats {
    ArcChordStats {
        min_gamma: ac.gamma.min_re(),
        max_gamma: ac.gamma.max_re(),
        length: ac.length,
    }
}

/// Maximum over the grid of `|Gamma^p - L^{-p} - R s*|` for the expansion
/// remainder `R` of power `p`.
pub fn expansion_residual(ac: &ArcChordField, remainder: &BiPeriodicField, p: f64) -> f64 {
    let lp = ac.length.powf(-p);
    let mut worst: f64 = 0.0;
    for j in 0..ac.n_s() {
        for m in 0..ac.n_star() {
            let ss = ac.gamma.sstar(m);
            let lhs = ac.gamma.get(j, m).re.powf(p) - lp;
            worst = worst.max((lhs - remainder.get(j, m).re * ss).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{ellipse, neck_curve, circle};
    use approx::assert_abs_diff_eq;

    #[test]
    fn circle_gamma_is_constant() {
        for r in [0.5, 1.0, 2.3] {
            let z = circle(r, 32).unwrap();
            let ac = build_gamma(&z).unwrap();
            let l = 2.0 * PI * r;
            assert_abs_diff_eq!(ac.length, l, epsilon = 1e-12);
            for v in ac.gamma.data() {
                assert_abs_diff_eq!(v.re, 1.0 / l, epsilon = 1e-14 / r);
            }
            assert!(ac.gamma_dstar.max_abs() < 1e-12);
            assert!(gamma_expansion_remainder(&ac).max_abs() < 1e-12);
            assert!(gamma_beta_expansion(&ac, 1.5).unwrap().max_abs() < 1e-12);
            let st = arc_chord_stats(&ac);
            assert_abs_diff_eq!(st.min_gamma, st.max_gamma, epsilon = 1e-14);
        }
    }

    #[test]
    fn diagonal_is_inverse_length() {
        let z = ellipse(1.0, 0.6, 128).unwrap();
        let ac = build_gamma(&z).unwrap();
        for j in 0..128 {
            assert_eq!(ac.gamma.get(j, 0).re, 1.0 / ac.length);
            assert_eq!(ac.gamma_dstar.get(j, 0).re, 0.0);
        }
    }

    #[test]
    fn ellipse_gamma_matches_dense_sampling() {
        let z = ellipse(1.0, 0.6, 128).unwrap();
        let ac = build_gamma(&z).unwrap();
        // direct quotient on a 10x finer s* grid using the interpolant
        let mut dense_max: f64 = 0.0;
        let mut grid_max: f64 = 0.0;
        for j in (0..128).step_by(2) {
            let s = j as f64 / 128.0;
            for m in 1..1280 {
                let ss = sstar_of(m, 1280);
                let chord = (z.eval(s + ss) - z.eval(s)).norm();
                let v = (PI * ss).sin().abs() / (PI * chord);
                dense_max = dense_max.max(v);
                if m % 10 == 0 {
                    grid_max = grid_max.max(v);
                }
            }
        }
        assert_abs_diff_eq!(ac.gamma.max_re(), grid_max.max(1.0 / ac.length), epsilon = 1e-8);
        assert!(ac.gamma.max_re() <= dense_max + 1e-12);
        assert!(arc_chord_stats(&ac).min_gamma > 0.0);
    }

    #[test]
    fn dstar_matches_finite_difference() {
        let z = ellipse(1.0, 0.6, 128).unwrap();
        let ac = build_gamma(&z).unwrap();
        let delta = 1e-4;
        let gam = |s: f64, ss: f64| (PI * ss).sin().abs() / (PI * (z.eval(s + ss) - z.eval(s)).norm());
        for j in [0usize, 5, 17, 40] {
            for m in [3usize, 10, 31, 50] {
                let s = j as f64 / 128.0;
                let ss = sstar_of(m, 128);
                let fd = (gam(s, ss + delta) - gam(s, ss - delta)) / (2.0 * delta);
                assert_abs_diff_eq!(ac.gamma_dstar.get(j, m).re, fd, epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn dstar_closed_formula_agrees_away_from_diagonal() {
        let z = ellipse(1.0, 0.6, 128).unwrap();
        let ac = build_gamma(&z).unwrap();
        let closed = gamma_dstar_closed(&z, &ac).unwrap();
        for j in 0..128 {
            for m in 2..127 {
                let a = closed.get(j, m).re;
                let b = ac.gamma_dstar.get(j, m).re;
                assert!((a - b).abs() < 1e-10, "{j} {m} {a} {b}");
            }
        }
    }

    #[test]
    fn expansion_residuals_on_ellipse() {
        let z = ellipse(1.0, 0.6, 256).unwrap();
        let ac = build_gamma(&z).unwrap();
        let rem = gamma_expansion_remainder(&ac);
        assert!(expansion_residual(&ac, &rem, 1.0) < 1e-9);
        let rem_b = gamma_beta_expansion(&ac, 1.5).unwrap();
        assert!(expansion_residual(&ac, &rem_b, 1.5) < 1e-9);
        // the power expansion at p = 1 is the plain remainder
        let rem_1 = gamma_power_expansion(&ac, 1.0);
        for (a, b) in rem_1.data().iter().zip(rem.data()) {
            assert!((a - b).norm() < 1e-14);
        }
        assert!(gamma_beta_expansion(&ac, 2.0).is_err());
    }

    #[test]
    fn non_uniform_speed_rejected() {
        let z = PeriodicField::from_fn(32, crate::field::FieldKind::Vector, |s| {
            let t = 2.0 * PI * s;
            C64::new(t.cos(), 0.6 * t.sin())
        })
        .unwrap();
        assert!(matches!(
            build_gamma(&z),
            Err(GsqgError::InvalidParameterization { .. })
        ));
    }

    #[test]
    fn max_gamma_grows_as_neck_closes() {
        let mut last = 0.0;
        for eps in [0.4, 0.2, 0.1, 0.05] {
            let z = neck_curve(eps, 256).unwrap();
            let opts = ArcChordOptions {
                speed_tol: 1e-6,
                ..ArcChordOptions::default()
            };
            let ac = build_gamma_on(&z, 256, opts).unwrap();
            let mx = arc_chord_stats(&ac).max_gamma;
            assert!(mx > last, "eps {eps}: {mx} <= {last}");
            last = mx;
        }
    }

    #[test]
    fn from_gamma_recovers_length_and_derivative() {
        let z = ellipse(1.0, 0.6, 128).unwrap();
        let ac = build_gamma_on(&z, 256, ArcChordOptions::default()).unwrap();
        let back = ArcChordField::from_gamma(ac.gamma.clone()).unwrap();
        assert_abs_diff_eq!(back.length, ac.length, epsilon = 1e-13);
        let diff = back
            .gamma_dstar
            .zip_map(&ac.gamma_dstar, |a, b| a - b)
            .max_abs();
        assert!(diff < 1e-8, "{diff}");
    }
}
