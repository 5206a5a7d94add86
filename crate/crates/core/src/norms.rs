//! Analytic norms in the Fourier-weight form
//! `||u||_{l,rho} = || e^{2 pi rho |k|} (1 + |k|^l) u_hat(k) ||_{l2}`,
//! the time-weighted norms built on them, and strip-radius estimation.

use std::f64::consts::PI;

use crate::field::{mode, BiPeriodicField, PeriodicField};

/// Largest `log` of a single weighted term before the norm is reported as
/// infinite.
const LOG_BUDGET: f64 = 700.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormParams {
    pub l: u32,
    pub rho: f64,
    pub gamma_weight: f64,
    pub beta_strip: f64,
    pub t_star: f64,
}

impl Default for NormParams {
    fn default() -> Self {
        Self {
            l: 2,
            rho: 0.005,
            gamma_weight: 0.5,
            beta_strip: 0.25,
            t_star: 0.01,
        }
    }
}

impl NormParams {
    pub fn with_rho(&self, rho: f64) -> Self {
        Self { rho, ..*self }
    }

    pub fn with_beta_strip(&self, beta_strip: f64) -> Self {
        Self { beta_strip, ..*self }
    }
}

/// The unknowns `(f, g, h, Gamma)` as one element of the product space.
#[derive(Clone, Debug)]
pub struct StateVector {
    pub f: PeriodicField,
    pub g: PeriodicField,
    pub h: PeriodicField,
    pub gamma: BiPeriodicField,
}

impl StateVector {
    pub fn sub(&self, other: &Self) -> Self {
        Self {
            f: self.f.sub(&other.f),
            g: self.g.sub(&other.g),
            h: self.h.sub(&other.h),
            gamma: self.gamma.zip_map(&other.gamma, |a, b| a - b),
        }
    }
}

fn log_weight(k: f64, rho: f64, l: u32) -> f64 {
    2.0 * PI * rho * k + (1.0 + k.powi(l as i32)).ln()
}

/// Weighted l2 sum from `(|k|, |c_k|)` pairs, accumulated relative to the
/// largest log term so that large weights do not overflow early.
fn weighted_l2(terms: impl Iterator<Item = (f64, f64)>, rho: f64, l: u32) -> f64 {
    let logs: Vec<f64> = terms
        .filter(|&(_, a)| a > 0.0)
        .map(|(k, a)| a.ln() + log_weight(k, rho, l))
        .collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return 0.0;
    }
    if top > LOG_BUDGET {
        return f64::INFINITY;
    }
    let sum: f64 = logs.iter().map(|x| (2.0 * (x - top)).exp()).sum();
    top.exp() * sum.sqrt()
}

pub fn klrho_norm(u: &PeriodicField, p: &NormParams) -> f64 {
    let n = u.n();
    weighted_l2(
        u.coeffs()
            .iter()
            .enumerate()
            .map(|(j, c)| (mode(j, n).unsigned_abs() as f64, c.norm())),
        p.rho,
        p.l,
    )
}

/// Two-variable analogue with weight `e^{2 pi rho (|k1|+|k2|)} (1 + (|k1|+|k2|)^l)`.
pub fn k2lrho_norm(u: &BiPeriodicField, p: &NormParams) -> f64 {
    let (ns, nt) = (u.n_s(), u.n_star());
    let c = u.coeffs_2d();
    weighted_l2(
        c.iter().enumerate().map(|(i, c)| {
            let k1 = mode(i / nt, ns).unsigned_abs();
            let k2 = mode(i % nt, nt).unsigned_abs();
            ((k1 + k2) as f64, c.norm())
        }),
        p.rho,
        p.l,
    )
}

pub fn state_norm(u: &StateVector, p: &NormParams) -> f64 {
    klrho_norm(&u.f, p) + klrho_norm(&u.g, p) + klrho_norm(&u.h, p) + k2lrho_norm(&u.gamma, p)
}

/// Sample points for the inner supremum: 32 values of `rho'` in `(0, top)`
/// whose distances to `top` form a geometric sequence.
fn rho_grid(top: f64, points: usize) -> Vec<f64> {
    (0..points)
        .map(|i| top * (1.0 - 10f64.powf(-4.0 * (i as f64 + 0.5) / points as f64)))
        .collect()
}

/// `sup_{0 < rho' < rho0 - beta t} (1 - beta t / (rho0 - rho'))^gamma ||u||_{rho'}`
/// for a single time, over `points` grid values refined by golden-section search.
fn weighted_sup(u: &StateVector, t: f64, p: &NormParams, points: usize) -> f64 {
    let top = p.rho - p.beta_strip * t;
    if top <= 0.0 {
        return 0.0;
    }
    if t == 0.0 {
        // weight 1 and the norm increases up to rho0
        return state_norm(u, p);
    }
    let phi = |r: f64| {
        let w = 1.0 - p.beta_strip * t / (p.rho - r);
        if w <= 0.0 {
            0.0
        } else {
            w.powf(p.gamma_weight) * state_norm(u, &p.with_rho(r))
        }
    };
    let grid = rho_grid(top, points);
    let vals: Vec<f64> = grid.iter().map(|&r| phi(r)).collect();
    let (best, &vbest) = vals
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty grid");
    if !vbest.is_finite() {
        return vbest;
    }
    let lo = if best == 0 { 0.0 } else { grid[best - 1] };
    let hi = if best + 1 == grid.len() { top } else { grid[best + 1] };
    let refined = golden_max(phi, lo, hi, 60);
    vbest.max(refined)
}

fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, iters: usize) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut best = fc.max(fd);
    for _ in 0..iters {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        best = best.max(fc).max(fd);
    }
    best
}

/// The `(gamma, beta)`-weighted norm of a time-sampled history. Nodes with
/// `t >= T*` are ignored.
pub fn gammabeta_norm(history: &[(f64, StateVector)], p: &NormParams) -> f64 {
    gammabeta_norm_with_grid(history, p, 32)
}

pub fn gammabeta_norm_with_grid(history: &[(f64, StateVector)], p: &NormParams, points: usize) -> f64 {
    history
        .iter()
        .filter(|(t, _)| *t <= p.t_star)
        .map(|(t, u)| weighted_sup(u, *t, p, points))
        .fold(0.0, f64::max)
}

/// `sup_t ||u(t)||_{rho0 - beta t}`.
pub fn y_norm(history: &[(f64, StateVector)], p: &NormParams) -> f64 {
    history
        .iter()
        .filter(|(t, _)| *t <= p.t_star)
        .map(|(t, u)| {
            let r = p.rho - p.beta_strip * t;
            if r < 0.0 {
                0.0
            } else {
                state_norm(u, &p.with_rho(r))
            }
        })
        .fold(0.0, f64::max)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StripEstimate {
    /// `None` when the spectrum does not show a usable decay band.
    pub rho_hat: Option<f64>,
    /// RMS residual of the log-linear fit.
    pub fit_quality: f64,
    pub band: (usize, usize),
}

/// Fit `log |c_k| ~ a - 2 pi rho |k|` over the decaying band of the spectrum.
pub fn strip_radius_estimate(u: &PeriodicField) -> StripEstimate {
    let amps = u.mode_amplitudes();
    let undefined = StripEstimate {
        rho_hat: None,
        fit_quality: f64::NAN,
        band: (0, 0),
    };
    let top = amps.iter().skip(1).cloned().fold(0.0, f64::max);
    if !(top > 0.0) {
        return undefined;
    }
    let floor = 1e-13 * top;
    let above: Vec<usize> = (1..amps.len()).filter(|&k| amps[k] > floor).collect();
    if above.len() < 16 {
        return undefined;
    }
    let start = (1..amps.len()).filter(|&k| amps[k] >= 1e-3 * top).max().unwrap_or(1);
    let end = *above.last().unwrap();
    let pts: Vec<(f64, f64)> = (start..=end)
        .filter(|&k| amps[k] > floor)
        .map(|k| (k as f64, amps[k].ln()))
        .collect();
    if pts.len() < 3 {
        return undefined;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let resid = (pts
        .iter()
        .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    StripEstimate {
        rho_hat: Some(-slope / (2.0 * PI)),
        fit_quality: resid,
        band: (start, end),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CauchyCheck {
    pub lhs: f64,
    pub rhs_bound: f64,
    pub passed: bool,
}

/// `||d_s u||_{rho'} <= (1/e) / (rho - rho') ||u||_rho`.
pub fn cauchy_estimate_check(u: &PeriodicField, rho: f64, rho_prime: f64, p: &NormParams) -> CauchyCheck {
    let du = u.apply_multiplier(|k| num_complex::Complex::new(0.0, 2.0 * PI * k));
    let lhs = klrho_norm(&du, &p.with_rho(rho_prime));
    let rhs_bound = (-1f64).exp() / (rho - rho_prime) * klrho_norm(u, &p.with_rho(rho));
    CauchyCheck {
        lhs,
        rhs_bound,
        passed: lhs <= rhs_bound,
    }
}

/// `b_k = beta (1 - 2^{-k})`.
pub fn bk_sequence(beta_strip: f64, k: u32) -> f64 {
    beta_strip * (1.0 - 0.5f64.powi(k as i32))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{FieldKind, C64};
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn params(rho: f64) -> NormParams {
        NormParams::default().with_rho(rho)
    }

    fn single_mode(n: usize, k: i64) -> PeriodicField {
        let mut c = vec![C64::new(0.0, 0.0); n];
        c[k.rem_euclid(n as i64) as usize] = C64::new(1.0, 0.0);
        PeriodicField::from_coeffs(c, FieldKind::Vector).unwrap()
    }

    /// Random analytic field with decay rate `rate` (strip half-width).
    fn random_analytic(rng: &mut ChaCha8Rng, n: usize, rate: f64) -> PeriodicField {
        let coeffs = (0..n)
            .map(|j| {
                let k = mode(j, n).unsigned_abs() as f64;
                if 2 * mode(j, n).unsigned_abs() as usize == n {
                    return C64::new(0.0, 0.0);
                }
                let a = (-2.0 * PI * rate * k).exp();
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * a
            })
            .collect();
        PeriodicField::from_coeffs(coeffs, FieldKind::Vector).unwrap()
    }

    #[test]
    fn constant_and_single_mode() {
        let one = PeriodicField::from_real(&[1.0; 16]).unwrap();
        assert_relative_eq!(klrho_norm(&one, &params(0.3)), 1.0, epsilon = 1e-15);
        let u = single_mode(16, 1);
        let rho = 0.07;
        assert_relative_eq!(klrho_norm(&u, &params(rho)), 2.0 * (2.0 * PI * rho).exp(), max_relative = 1e-14);
    }

    #[test]
    fn two_variable_cases() {
        let c = BiPeriodicField::from_fn(8, 16, |_, _| C64::new(-0.4, 0.0)).unwrap();
        assert_relative_eq!(k2lrho_norm(&c, &params(0.2)), 0.4, max_relative = 1e-14);
        let m = BiPeriodicField::from_fn(8, 16, |s, t| C64::from_polar(1.0, 2.0 * PI * (s + t))).unwrap();
        let p = params(0.05);
        let expect = (4.0 * PI * 0.05).exp() * (1.0 + 2f64.powi(2));
        assert_relative_eq!(k2lrho_norm(&m, &p), expect, max_relative = 1e-13);
    }

    #[test]
    fn overflow_is_infinite() {
        let u = single_mode(64, 20);
        assert_eq!(klrho_norm(&u, &params(10.0)), f64::INFINITY);
    }

    #[test]
    fn cauchy_single_mode_extremal() {
        let p = params(0.0);
        let (rho, rp) = (0.2, 0.1);
        let k = (1.0 / (2.0 * PI * (rho - rp))).round() as i64;
        let u = single_mode(64, k);
        let c = cauchy_estimate_check(&u, rho, rp, &p);
        assert!(c.passed);
        // near the extremal mode the bound is almost tight
        assert!(c.lhs / c.rhs_bound > 0.95, "{}", c.lhs / c.rhs_bound);
        let one = PeriodicField::from_real(&[2.0; 8]).unwrap();
        assert_eq!(cauchy_estimate_check(&one, rho, rp, &p).lhs, 0.0);
    }

    #[test]
    fn strip_estimates() {
        let n = 256;
        for rate in [0.3, 0.1] {
            let coeffs = (0..n)
                .map(|j| C64::new((-2.0 * PI * rate * mode(j, n).unsigned_abs() as f64).exp(), 0.0))
                .collect();
            let u = PeriodicField::from_coeffs(coeffs, FieldKind::Vector).unwrap();
            let est = strip_radius_estimate(&u);
            let r = est.rho_hat.unwrap();
            assert!((r - rate).abs() < 0.01 * rate, "{r}");
        }
        let bl = PeriodicField::from_fn(64, FieldKind::Vector, |s| {
            C64::from_polar(1.0, 2.0 * PI * s) + 0.3 * C64::from_polar(1.0, -6.0 * PI * s)
        })
        .unwrap();
        assert!(strip_radius_estimate(&bl).rho_hat.is_none());
    }

    #[test]
    fn bk_values() {
        assert_eq!(bk_sequence(0.8, 0), 0.0);
        assert_eq!(bk_sequence(0.8, 1), 0.4);
        let mut prev = 0.0;
        for k in 1..40 {
            let b = bk_sequence(0.8, k);
            assert!(b > prev && b < 0.8);
            prev = b;
        }
    }

    fn random_history(rng: &mut ChaCha8Rng, nodes: usize, t_star: f64) -> Vec<(f64, StateVector)> {
        (0..nodes)
            .map(|i| {
                let t = t_star * i as f64 / (nodes - 1).max(1) as f64;
                let f = random_analytic(rng, 32, 0.2);
                let g = random_analytic(rng, 32, 0.25);
                let h = random_analytic(rng, 32, 0.3);
                let a = random_analytic(rng, 16, 0.2);
                let b = random_analytic(rng, 32, 0.2);
                let gamma = BiPeriodicField::from_fn(16, 32, |s, ss| C64::new((a.eval(s) * b.eval(ss)).re, 0.0)).unwrap();
                (t, StateVector { f, g, h, gamma })
            })
            .collect()
    }

    #[test]
    fn single_node_history() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_history(&mut rng, 1, 0.0);
        let p = NormParams::default();
        let s = state_norm(&h[0].1, &p);
        assert_relative_eq!(y_norm(&h, &p), s, max_relative = 1e-15);
        assert_relative_eq!(gammabeta_norm(&h, &p), s, max_relative = 1e-15);
    }

    #[test]
    fn grid_doubling_is_stable() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let p = NormParams {
            rho: 0.05,
            beta_strip: 2.0,
            ..NormParams::default()
        };
        let h = random_history(&mut rng, 5, 0.01);
        let a = gammabeta_norm_with_grid(&h, &p, 32);
        let b = gammabeta_norm_with_grid(&h, &p, 64);
        assert!((a - b).abs() < 0.01 * b);
    }

    #[test]
    fn scale_inequalities_on_random_histories() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut violations = 0;
        for _ in 0..20 {
            let rho0 = rng.gen_range(0.02..0.08);
            let beta = rng.gen_range(1.0..4.0);
            let t_star = 0.9 * rho0 / beta;
            let p = NormParams {
                l: 2,
                rho: rho0,
                gamma_weight: rng.gen_range(0.1..0.9),
                beta_strip: beta,
                t_star,
            };
            let hist = random_history(&mut rng, 4, t_star);
            let gb = gammabeta_norm(&hist, &p);
            let y = y_norm(&hist, &p);
            let bt = beta * rng.gen_range(0.1..0.9);
            let gbt = gammabeta_norm(&hist, &p.with_beta_strip(bt));
            let factor = (beta / (beta - bt)).powf(p.gamma_weight);
            if !(gb <= y && y <= factor * gbt) {
                violations += 1;
            }
        }
        assert_eq!(violations, 0);
    }

    proptest! {
        #[test]
        fn monotone_in_rho(seed in 0u64..1000, r1 in 0.0f64..0.1, r2 in 0.0f64..0.1) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = random_analytic(&mut rng, 32, 0.15);
            let (lo, hi) = if r1 < r2 { (r1, r2) } else { (r2, r1) };
            prop_assert!(klrho_norm(&u, &params(lo)) <= klrho_norm(&u, &params(hi)));
        }

        #[test]
        fn cauchy_never_violated(seed in 0u64..1000, rho in 0.01f64..0.2, frac in 0.05f64..0.95) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = random_analytic(&mut rng, 64, 0.25);
            let c = cauchy_estimate_check(&u, rho, frac * rho, &NormParams::default());
            prop_assert!(c.passed);
        }
    }
}
