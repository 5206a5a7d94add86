//! Periodic spectral algebra on the circle and the torus.
//!
//! Planar vector fields are stored in complex form `x + i y`; scalar fields
//! carry a zero imaginary part. Fourier coefficients use the FFT ordering
//! (index `j` is mode `j` for `j < n/2`, mode `j - n` above it) and are
//! normalised by `1/n`, so `samples[j] = sum_k coeffs[k] e^{2 pi i k j / n}`.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{GsqgError, Result};
use crate::quadrature::GaussLegendre;

pub type C64 = Complex64;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    })
}

/// Forward transform normalised by `1/n`.
pub fn forward(samples: &[C64]) -> Vec<C64> {
    let n = samples.len();
    let mut buf = samples.to_vec();
    plan(n, false).process(&mut buf);
    let scale = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= scale);
    buf
}

/// Inverse of [`forward`].
pub fn inverse(coeffs: &[C64]) -> Vec<C64> {
    let mut buf = coeffs.to_vec();
    plan(buf.len(), true).process(&mut buf);
    buf
}

/// Signed mode number of FFT index `j` on an `n`-point grid. The Nyquist
/// index maps to `+n/2`.
#[inline]
pub fn mode(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Representative of `m / n` in `(-1/2, 1/2]`.
#[inline]
pub fn sstar_of(m: usize, n: usize) -> f64 {
    if m <= n / 2 {
        m as f64 / n as f64
    } else {
        m as f64 / n as f64 - 1.0
    }
}

/// `sin(x) / x`, accurate at the origin.
#[inline]
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

#[inline]
fn sinc_prime(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        -x / 3.0 + x * x2 / 30.0 - x * x2 * x2 / 840.0
    } else {
        (x * x.cos() - x.sin()) / (x * x)
    }
}

/// `e^{i theta} - 1` without cancellation for small `theta`.
#[inline]
pub fn expm1_i(theta: f64) -> C64 {
    let half = 0.5 * theta;
    let (s, c) = half.sin_cos();
    C64::new(0.0, 2.0 * s) * C64::new(c, s)
}

/// `phi(theta) = int_0^1 e^{i theta (1 - tau)} d tau = (e^{i theta} - 1)/(i theta)`.
#[inline]
pub fn ftc_phase(theta: f64) -> C64 {
    let half = 0.5 * theta;
    C64::from_polar(sinc(half), half)
}

/// Derivative of [`ftc_phase`] with respect to `theta`.
#[inline]
pub fn ftc_phase_prime(theta: f64) -> C64 {
    let half = 0.5 * theta;
    let e = C64::from_polar(1.0, half);
    e * C64::new(0.5 * sinc_prime(half), 0.5 * sinc(half))
}

/// `sin(pi s) / pi`.
#[inline]
pub fn sin_rho(s: f64) -> f64 {
    (PI * s).sin() / PI
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Scalar,
    Vector,
}

/// A 1-periodic function on `T` held as `n` uniform samples `s_j = j/n`
/// together with its Fourier coefficients.
#[derive(Clone, Debug)]
pub struct PeriodicField {
    samples: Vec<C64>,
    coeffs: Vec<C64>,
    kind: FieldKind,
}

impl PeriodicField {
    pub fn from_samples(samples: Vec<C64>, kind: FieldKind) -> Result<Self> {
        check_grid(samples.len())?;
        let mut samples = samples;
        if kind == FieldKind::Scalar {
            samples.iter_mut().for_each(|c| c.im = 0.0);
        }
        let coeffs = forward(&samples);
        Ok(Self {
            samples,
            coeffs,
            kind,
        })
    }

    pub fn from_real(samples: &[f64]) -> Result<Self> {
        Self::from_samples(
            samples.iter().map(|&x| C64::new(x, 0.0)).collect(),
            FieldKind::Scalar,
        )
    }

    pub fn from_coeffs(coeffs: Vec<C64>, kind: FieldKind) -> Result<Self> {
        check_grid(coeffs.len())?;
        let mut samples = inverse(&coeffs);
        if kind == FieldKind::Scalar {
            samples.iter_mut().for_each(|c| c.im = 0.0);
        }
        Ok(Self {
            samples,
            coeffs,
            kind,
        })
    }

    pub fn from_fn(n: usize, kind: FieldKind, f: impl Fn(f64) -> C64) -> Result<Self> {
        check_grid(n)?;
        let samples = (0..n).map(|j| f(j as f64 / n as f64)).collect();
        Self::from_samples(samples, kind)
    }

    pub fn zeros(n: usize, kind: FieldKind) -> Self {
        Self {
            samples: vec![C64::new(0.0, 0.0); n],
            coeffs: vec![C64::new(0.0, 0.0); n],
            kind,
        }
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn samples(&self) -> &[C64] {
        &self.samples
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    /// Real parts of the samples (the values of a scalar field).
    pub fn real(&self) -> Vec<f64> {
        self.samples.iter().map(|c| c.re).collect()
    }

    /// Coefficient of signed mode `k`, zero outside the resolved band.
    pub fn coeff(&self, k: i64) -> C64 {
        let n = self.n() as i64;
        if k.abs() > n / 2 || (k == -n / 2) {
            return C64::new(0.0, 0.0);
        }
        self.coeffs[k.rem_euclid(n) as usize]
    }

    pub fn mean(&self) -> C64 {
        self.coeffs[0]
    }

    /// Trigonometric interpolant at an arbitrary `s`; the Nyquist mode is
    /// split evenly between `+-n/2`.
    pub fn eval(&self, s: f64) -> C64 {
        let n = self.n();
        let mut acc = C64::new(0.0, 0.0);
        for (j, c) in self.coeffs.iter().enumerate() {
            let k = mode(j, n);
            if k > 0 && k as usize * 2 == n {
                acc += c * (PI * n as f64 * s).cos();
            } else {
                acc += c * C64::from_polar(1.0, 2.0 * PI * k as f64 * s);
            }
        }
        if self.kind == FieldKind::Scalar {
            acc.im = 0.0;
        }
        acc
    }

    /// Apply a Fourier multiplier `m(k)`. The Nyquist coefficient receives the
    /// average of `m(n/2)` and `m(-n/2)` so real components stay real.
    pub fn apply_multiplier(&self, m: impl Fn(f64) -> C64) -> Self {
        let n = self.n();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(j, &c)| c * multiplier_at(j, n, &m))
            .collect();
        Self::from_coeffs(coeffs, self.kind).expect("grid already validated")
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        let samples = self.samples.iter().map(|&c| f(c)).collect();
        Self::from_samples(samples, self.kind).expect("grid already validated")
    }

    pub fn zip_map(&self, other: &Self, kind: FieldKind, f: impl Fn(C64, C64) -> C64) -> Self {
        assert_eq!(self.n(), other.n(), "grid mismatch");
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self::from_samples(samples, kind).expect("grid already validated")
    }

    pub fn add(&self, other: &Self) -> Self {
        self.zip_map(other, self.kind, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.zip_map(other, self.kind, |a, b| a - b)
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            samples: self.samples.iter().map(|c| c * factor).collect(),
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
            kind: self.kind,
        }
    }

    /// Pointwise product of a scalar field with `self`.
    pub fn scaled_by(&self, scalar: &Self) -> Self {
        self.zip_map(scalar, self.kind, |a, b| a * b.re)
    }

    /// Pointwise Euclidean dot product of two vector fields.
    pub fn dot(&self, other: &Self) -> Self {
        self.zip_map(other, FieldKind::Scalar, |a, b| C64::new(dot(a, b), 0.0))
    }

    /// `sqrt(int |u|^2 ds)`.
    pub fn l2_norm(&self) -> f64 {
        (self.samples.iter().map(|c| c.norm_sqr()).sum::<f64>() / self.n() as f64).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Zero-pad (or truncate) to an `m`-point grid.
    pub fn resample(&self, m: usize) -> Result<Self> {
        check_grid(m)?;
        let n = self.n();
        let mut out = vec![C64::new(0.0, 0.0); m];
        for (j, &c) in self.coeffs.iter().enumerate() {
            let k = mode(j, n);
            let nyquist_in = 2 * k.unsigned_abs() as usize == n;
            if 2 * k.unsigned_abs() as usize > m {
                continue;
            }
            if 2 * k.unsigned_abs() as usize == m && !nyquist_in {
                // mode lands on the output Nyquist slot: fold the pair
                out[m / 2] += c;
                continue;
            }
            if nyquist_in && m > n {
                out[n / 2] += 0.5 * c;
                out[m - n / 2] += 0.5 * c;
            } else {
                out[k.rem_euclid(m as i64) as usize] += c;
            }
        }
        Self::from_coeffs(out, self.kind)
    }

    /// Modal amplitudes `a_k` for `k = 0..=n/2`, combining `+-k`.
    pub fn mode_amplitudes(&self) -> Vec<f64> {
        let n = self.n();
        let mut amp = vec![0.0; n / 2 + 1];
        for (j, c) in self.coeffs.iter().enumerate() {
            let k = mode(j, n).unsigned_abs() as usize;
            amp[k] += c.norm_sqr();
        }
        amp.iter().map(|a| a.sqrt()).collect()
    }
}

#[inline]
pub(crate) fn multiplier_at(j: usize, n: usize, m: &impl Fn(f64) -> C64) -> C64 {
    let k = mode(j, n);
    if k > 0 && 2 * k as usize == n {
        0.5 * (m(k as f64) + m(-(k as f64)))
    } else {
        m(k as f64)
    }
}

#[inline]
pub fn dot(a: C64, b: C64) -> f64 {
    a.re * b.re + a.im * b.im
}

fn check_grid(n: usize) -> Result<()> {
    if n < 4 || !n.is_power_of_two() {
        return Err(GsqgError::invalid(format!(
            "grid size {n} must be a power of two and at least 4"
        )));
    }
    Ok(())
}

/// `d^order u / ds^order` via the multiplier `(2 pi i k)^order`.
pub fn spectral_derivative(u: &PeriodicField, order: u32) -> Result<PeriodicField> {
    if !(1..=3).contains(&order) {
        return Err(GsqgError::invalid(format!(
            "derivative order {order} outside 1..=3"
        )));
    }
    Ok(u.apply_multiplier(|k| C64::new(0.0, 2.0 * PI * k).powu(order)))
}

/// The antiderivative vanishing at `s = 0`. The input must have zero mean.
pub fn spectral_antiderivative(u: &PeriodicField) -> Result<PeriodicField> {
    let scale = u.max_abs().max(1.0);
    if u.mean().norm() > 1e-12 * scale {
        return Err(GsqgError::invalid(format!(
            "antiderivative of a field with mean {:.3e} is not periodic",
            u.mean().norm()
        )));
    }
    let n = u.n();
    let mut coeffs: Vec<C64> = u
        .coeffs()
        .iter()
        .enumerate()
        .map(|(j, &c)| {
            let k = mode(j, n);
            if k == 0 || 2 * k.unsigned_abs() as usize == n {
                C64::new(0.0, 0.0)
            } else {
                c / C64::new(0.0, 2.0 * PI * k as f64)
            }
        })
        .collect();
    let at_origin: C64 = coeffs.iter().sum();
    coeffs[0] = -at_origin;
    let mut out = PeriodicField::from_coeffs(coeffs, u.kind())?;
    // pin the anchor exactly
    let mut samples = out.samples.clone();
    samples[0] = C64::new(0.0, 0.0);
    out.samples = samples;
    Ok(out)
}

/// A function on `T^2` sampled on `n_s x n_star` points `(s_j, s*_m)` with
/// `s*` taken in `(-1/2, 1/2]`. Row-major in `s`.
#[derive(Clone, Debug)]
pub struct BiPeriodicField {
    n_s: usize,
    n_star: usize,
    data: Vec<C64>,
}

impl BiPeriodicField {
    pub fn zeros(n_s: usize, n_star: usize) -> Self {
        Self {
            n_s,
            n_star,
            data: vec![C64::new(0.0, 0.0); n_s * n_star],
        }
    }

    pub fn from_data(n_s: usize, n_star: usize, data: Vec<C64>) -> Result<Self> {
        check_grid(n_s)?;
        check_grid(n_star)?;
        if data.len() != n_s * n_star {
            return Err(GsqgError::invalid("data length does not match grid"));
        }
        Ok(Self { n_s, n_star, data })
    }

    /// Sample `f(s, s*)` on the grid.
    pub fn from_fn(n_s: usize, n_star: usize, f: impl Fn(f64, f64) -> C64 + Sync) -> Result<Self> {
        check_grid(n_s)?;
        check_grid(n_star)?;
        let mut data = vec![C64::new(0.0, 0.0); n_s * n_star];
        data.par_chunks_mut(n_star).enumerate().for_each(|(j, row)| {
            let s = j as f64 / n_s as f64;
            for (m, v) in row.iter_mut().enumerate() {
                *v = f(s, sstar_of(m, n_star));
            }
        });
        Ok(Self { n_s, n_star, data })
    }

    pub fn n_s(&self) -> usize {
        self.n_s
    }

    pub fn n_star(&self) -> usize {
        self.n_star
    }

    pub fn sstar(&self, m: usize) -> f64 {
        sstar_of(m, self.n_star)
    }

    #[inline]
    pub fn get(&self, j: usize, m: usize) -> C64 {
        self.data[j * self.n_star + m]
    }

    #[inline]
    pub fn set(&mut self, j: usize, m: usize, v: C64) {
        self.data[j * self.n_star + m] = v;
    }

    pub fn row(&self, j: usize) -> &[C64] {
        &self.data[j * self.n_star..(j + 1) * self.n_star]
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn rows_mut(&mut self) -> impl IndexedParallelIterator<Item = (usize, &mut [C64])> {
        self.data.par_chunks_mut(self.n_star).enumerate()
    }

    pub fn map(&self, f: impl Fn(C64) -> C64 + Sync) -> Self {
        Self {
            n_s: self.n_s,
            n_star: self.n_star,
            data: self.data.par_iter().map(|&c| f(c)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(C64, C64) -> C64 + Sync) -> Self {
        assert_eq!((self.n_s, self.n_star), (other.n_s, other.n_star));
        Self {
            n_s: self.n_s,
            n_star: self.n_star,
            data: self
                .data
                .par_iter()
                .zip(other.data.par_iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn min_re(&self) -> f64 {
        self.data.iter().map(|c| c.re).fold(f64::INFINITY, f64::min)
    }

    pub fn max_re(&self) -> f64 {
        self.data.iter().map(|c| c.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Two-dimensional Fourier coefficients, `[k_s][k_star]` in FFT order,
    /// normalised by `1/(n_s n_star)`.
    pub fn coeffs_2d(&self) -> Vec<C64> {
        let (ns, nt) = (self.n_s, self.n_star);
        let mut rows: Vec<C64> = self
            .data
            .par_chunks(nt)
            .flat_map_iter(forward)
            .collect();
        let cols: Vec<Vec<C64>> = (0..nt)
            .into_par_iter()
            .map(|m| forward(&(0..ns).map(|j| rows[j * nt + m]).collect::<Vec<_>>()))
            .collect();
        for (m, col) in cols.iter().enumerate() {
            for (j, &c) in col.iter().enumerate() {
                rows[j * nt + m] = c;
            }
        }
        rows
    }

    /// Apply a multiplier in the `s*` variable row by row.
    fn star_multiplier(&self, m: impl Fn(f64) -> C64 + Sync) -> Self {
        let nt = self.n_star;
        let mult: Vec<C64> = (0..nt).map(|j| multiplier_at(j, nt, &m)).collect();
        let data = self
            .data
            .par_chunks(nt)
            .flat_map_iter(|row| {
                let mut c = forward(row);
                c.iter_mut().zip(&mult).for_each(|(a, b)| *a *= b);
                inverse(&c)
            })
            .collect();
        Self {
            n_s: self.n_s,
            n_star: nt,
            data,
        }
    }

    /// Spectral `d/ds*`.
    pub fn dstar(&self) -> Self {
        self.star_multiplier(|k| C64::new(0.0, 2.0 * PI * k))
    }

    /// Exponential filter `exp(-alpha (|k|/kmax)^p)` in both variables.
    pub fn filtered(&self, alpha: f64, order: f64) -> Self {
        let ks = self.n_s / 2;
        let kt = self.n_star / 2;
        let sig = |k: f64, kmax: usize| (-alpha * (k.abs() / kmax as f64).powf(order)).exp();
        let c = self.coeffs_2d();
        let mut out = Self::zeros(self.n_s, self.n_star);
        let mut filtered = c;
        for j in 0..self.n_s {
            let fs = sig(mode(j, self.n_s) as f64, ks);
            for m in 0..self.n_star {
                filtered[j * self.n_star + m] *= fs * sig(mode(m, self.n_star) as f64, kt);
            }
        }
        // inverse: columns then rows
        let (ns, nt) = (self.n_s, self.n_star);
        let cols: Vec<Vec<C64>> = (0..nt)
            .into_par_iter()
            .map(|m| inverse(&(0..ns).map(|j| filtered[j * nt + m]).collect::<Vec<_>>()))
            .collect();
        for (m, col) in cols.iter().enumerate() {
            for (j, &v) in col.iter().enumerate() {
                filtered[j * nt + m] = v;
            }
        }
        out.data = filtered
            .par_chunks(nt)
            .flat_map_iter(|row| inverse(row))
            .collect();
        out
    }
}

/// Evaluate the column family `s_j -> T_{s*_m} u (s_j)` where `T_{s*}` is the
/// Fourier multiplier `mult(k, s*)`; one inverse transform per column.
pub fn column_transform(
    u: &PeriodicField,
    n_star: usize,
    mult: impl Fn(f64, f64) -> C64 + Sync,
) -> BiPeriodicField {
    let n = u.n();
    let coeffs = u.coeffs();
    let cols: Vec<Vec<C64>> = (0..n_star)
        .into_par_iter()
        .map(|m| {
            let ss = sstar_of(m, n_star);
            let c: Vec<C64> = coeffs
                .iter()
                .enumerate()
                .map(|(j, &c)| c * multiplier_at(j, n, &|k| mult(k, ss)))
                .collect();
            inverse(&c)
        })
        .collect();
    let mut out = BiPeriodicField::zeros(n, n_star);
    for (m, col) in cols.iter().enumerate() {
        for (j, &v) in col.iter().enumerate() {
            let v = if u.kind() == FieldKind::Scalar {
                C64::new(v.re, 0.0)
            } else {
                v
            };
            out.set(j, m, v);
        }
    }
    out
}

/// `u(s + s*)` on the grid.
pub fn shifted(u: &PeriodicField, n_star: usize) -> BiPeriodicField {
    column_transform(u, n_star, |k, ss| C64::from_polar(1.0, 2.0 * PI * k * ss))
}

/// Finite difference `D u(s, s*) = u(s + s*) - u(s)` on the square grid.
pub fn finite_diff(u: &PeriodicField) -> BiPeriodicField {
    finite_diff_on(u, u.n())
}

/// [`finite_diff`] with an independent `s*` resolution.
pub fn finite_diff_on(u: &PeriodicField, n_star: usize) -> BiPeriodicField {
    column_transform(u, n_star, |k, ss| expm1_i(2.0 * PI * k * ss))
}

/// The averaging operator `I0(u)(s, s*) = int_0^1 u(s + (1 - tau) s*) d tau`.
pub fn ftc_average(u: &PeriodicField) -> BiPeriodicField {
    ftc_average_on(u, u.n())
}

pub fn ftc_average_on(u: &PeriodicField, n_star: usize) -> BiPeriodicField {
    column_transform(u, n_star, |k, ss| ftc_phase(2.0 * PI * k * ss))
}

/// `I0(u)(s, s*) s*`, which equals `D U` for any antiderivative `U` of `u`.
pub fn ftc_chord_on(u: &PeriodicField, n_star: usize) -> BiPeriodicField {
    column_transform(u, n_star, |k, ss| ftc_phase(2.0 * PI * k * ss) * ss)
}

/// `I0(u)` by composite Gauss quadrature in `tau` with trigonometric
/// interpolation for the shifted values.
pub fn ftc_average_quadrature(u: &PeriodicField, n_star: usize, rule: &TauRule) -> BiPeriodicField {
    let mut out = BiPeriodicField::zeros(u.n(), n_star);
    for (tau, w) in rule.nodes() {
        let shifted = column_transform(u, n_star, |k, ss| {
            C64::from_polar(1.0, 2.0 * PI * k * (1.0 - tau) * ss)
        });
        out.data
            .iter_mut()
            .zip(&shifted.data)
            .for_each(|(o, v)| *o += w * v);
    }
    out
}

/// Extended averaging operator `I0(F)(s, s*) = int_0^1 F(s, (1 - tau) s*) d tau`
/// for grid data periodic in `s*`, exact for trigonometric polynomials.
pub fn ftc_average_2var(f: &BiPeriodicField) -> BiPeriodicField {
    let nt = f.n_star();
    // phase[m_out][k]
    let phase: Vec<Vec<C64>> = (0..nt)
        .map(|mo| {
            let ss = sstar_of(mo, nt);
            (0..nt)
                .map(|j| multiplier_at(j, nt, &|k| ftc_phase(2.0 * PI * k * ss)))
                .collect()
        })
        .collect();
    let data = f
        .data
        .par_chunks(nt)
        .flat_map_iter(|row| {
            let c = forward(row);
            phase
                .iter()
                .map(|ph| ph.iter().zip(&c).map(|(a, b)| a * b).sum::<C64>())
                .collect::<Vec<_>>()
        })
        .collect();
    BiPeriodicField {
        n_s: f.n_s(),
        n_star: nt,
        data,
    }
}

/// `I0(F)` for a closure `F(s, s*)` by composite Gauss quadrature in `tau`.
pub fn ftc_average_2var_fn(
    n_s: usize,
    n_star: usize,
    rule: &TauRule,
    f: impl Fn(f64, f64) -> C64 + Sync,
) -> Result<BiPeriodicField> {
    let nodes = rule.nodes();
    BiPeriodicField::from_fn(n_s, n_star, |s, ss| {
        nodes
            .iter()
            .map(|&(tau, w)| w * f(s, (1.0 - tau) * ss))
            .sum()
    })
}

/// Composite Gauss-Legendre rule on `[0, 1]` for the `tau` average.
#[derive(Clone, Debug)]
pub struct TauRule {
    nodes: Vec<(f64, f64)>,
}

impl TauRule {
    pub fn new(panels: usize, order: usize) -> Self {
        let gl = GaussLegendre::new(order);
        let h = 1.0 / panels as f64;
        let nodes = (0..panels)
            .flat_map(|p| {
                let a = p as f64 * h;
                gl.nodes()
                    .iter()
                    .zip(gl.weights())
                    .map(move |(&x, &w)| (a + 0.5 * h * (x + 1.0), 0.5 * h * w))
                    .collect::<Vec<_>>()
            })
            .collect();
        Self { nodes }
    }

    pub fn nodes(&self) -> Vec<(f64, f64)> {
        self.nodes.clone()
    }
}

impl Default for TauRule {
    fn default() -> Self {
        Self::new(16, 8)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn circle(n: usize, r: f64) -> PeriodicField {
        PeriodicField::from_fn(n, FieldKind::Vector, |s| C64::from_polar(r, 2.0 * PI * s)).unwrap()
    }

    #[test]
    fn derivative_of_constant_vanishes() {
        let u = PeriodicField::from_real(&[3.0; 16]).unwrap();
        let d = spectral_derivative(&u, 1).unwrap();
        assert!(d.max_abs() < 1e-14);
    }

    #[test]
    fn derivative_of_sine() {
        let u = PeriodicField::from_fn(32, FieldKind::Scalar, |s| (2.0 * PI * s).sin().into()).unwrap();
        let d = spectral_derivative(&u, 1).unwrap();
        for (j, v) in d.samples().iter().enumerate() {
            let s = j as f64 / 32.0;
            assert_abs_diff_eq!(v.re, 2.0 * PI * (2.0 * PI * s).cos(), epsilon = 1e-12);
        }
    }

    #[test]
    fn second_derivative_of_mode_three() {
        let u = PeriodicField::from_fn(32, FieldKind::Scalar, |s| (6.0 * PI * s).cos().into()).unwrap();
        let d = spectral_derivative(&u, 2).unwrap();
        let expect = -(6.0 * PI) * (6.0 * PI);
        assert_abs_diff_eq!(d.coeff(3).re, 0.5 * expect, epsilon = 1e-10);
        assert_abs_diff_eq!(d.coeff(-3).re, 0.5 * expect, epsilon = 1e-10);
        assert!(d.coeff(1).norm() < 1e-12);
    }

    #[test]
    fn derivative_order_checked() {
        let u = PeriodicField::zeros(8, FieldKind::Scalar);
        assert!(spectral_derivative(&u, 0).is_err());
        assert!(spectral_derivative(&u, 4).is_err());
    }

    #[test]
    fn non_power_of_two_rejected() {
        assert!(PeriodicField::from_real(&[0.0; 12]).is_err());
    }

    #[test]
    fn finite_diff_of_constant_and_exponential() {
        let c = PeriodicField::from_samples(vec![C64::new(1.0, -2.0); 16], FieldKind::Vector).unwrap();
        assert!(finite_diff(&c).max_abs() < 1e-14);

        let u = circle(16, 1.0);
        let d = finite_diff(&u);
        for j in 0..16 {
            for m in 0..16 {
                let s = j as f64 / 16.0;
                let ss = d.sstar(m);
                let expect = C64::from_polar(1.0, 2.0 * PI * s) * (C64::from_polar(1.0, 2.0 * PI * ss) - 1.0);
                assert!((d.get(j, m) - expect).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn circle_chord_length() {
        let r = 1.7;
        let d = finite_diff(&circle(32, r));
        for j in 0..32 {
            for m in 0..32 {
                let expect = 2.0 * r * (PI * d.sstar(m)).sin().abs();
                assert_abs_diff_eq!(d.get(j, m).norm(), expect, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn finite_diff_diagonal_is_exactly_zero() {
        let u = PeriodicField::from_fn(32, FieldKind::Vector, |s| {
            C64::new((2.0 * PI * s).cos() + 0.1 * (6.0 * PI * s).sin(), (2.0 * PI * s).sin())
        })
        .unwrap();
        let d = finite_diff(&u);
        for j in 0..32 {
            assert_eq!(d.get(j, 0), C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn ftc_average_constant_and_diagonal() {
        let c = PeriodicField::from_real(&[2.5; 16]).unwrap();
        let a = ftc_average(&c);
        assert!(a.data().iter().all(|v| (v.re - 2.5).abs() < 1e-14));

        let u = circle(16, 1.0);
        let a = ftc_average(&u);
        for j in 0..16 {
            assert!((a.get(j, 0) - u.samples()[j]).norm() < 1e-14);
        }
    }

    #[test]
    fn ftc_average_of_exponential_matches_tau_quadrature() {
        let u = circle(16, 1.0);
        let spectral = ftc_average(&u);
        let quad = ftc_average_quadrature(&u, 16, &TauRule::default());
        for j in 0..16 {
            let s = j as f64 / 16.0;
            for m in 1..16 {
                let ss = spectral.sstar(m);
                let closed = C64::from_polar(1.0, 2.0 * PI * s)
                    * (C64::from_polar(1.0, 2.0 * PI * ss) - 1.0)
                    / C64::new(0.0, 2.0 * PI * ss);
                assert!((spectral.get(j, m) - closed).norm() < 1e-14);
                assert!((quad.get(j, m) - closed).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn ftc_identity_for_analytic_curve() {
        let n = 128;
        let z = PeriodicField::from_fn(n, FieldKind::Vector, |s| {
            let t = 2.0 * PI * s;
            C64::new(t.cos() + 0.2 * (2.0 * t).cos(), 0.7 * t.sin() + 0.05 * (3.0 * t).sin())
        })
        .unwrap();
        let zs = spectral_derivative(&z, 1).unwrap();
        let d = finite_diff(&z);
        let i0 = ftc_average(&zs);
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for m in 0..n {
                worst = worst.max((d.get(j, m) - i0.get(j, m) * i0.sstar(m)).norm());
            }
        }
        assert!(worst <= 1e-10 * zs.max_abs(), "worst {worst}");
    }

    #[test]
    fn extended_average_agrees_with_one_variable_form() {
        let n = 32;
        let u = PeriodicField::from_fn(n, FieldKind::Vector, |s| {
            C64::new((2.0 * PI * s).cos(), (4.0 * PI * s).sin() * 0.3)
        })
        .unwrap();
        let f = shifted(&u, n);
        let ext = ftc_average_2var(&f);
        let one = ftc_average(&u);
        for (a, b) in ext.data().iter().zip(one.data()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn extended_average_constant_and_linear() {
        let f = BiPeriodicField::from_fn(8, 16, |_, _| C64::new(0.75, 0.0)).unwrap();
        let out = ftc_average_2var(&f);
        assert!(out.data().iter().all(|v| (v.re - 0.75).abs() < 1e-14));

        let lin = ftc_average_2var_fn(8, 16, &TauRule::default(), |_, ss| C64::new(ss, 0.0)).unwrap();
        for j in 0..8 {
            for m in 0..16 {
                assert_abs_diff_eq!(lin.get(j, m).re, 0.5 * lin.sstar(m), epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn antiderivative_examples() {
        let n = 32;
        let c = PeriodicField::from_fn(n, FieldKind::Scalar, |s| (2.0 * PI * s).cos().into()).unwrap();
        let a = spectral_antiderivative(&c).unwrap();
        for j in 0..n {
            let s = j as f64 / n as f64;
            assert_abs_diff_eq!(a.samples()[j].re, (2.0 * PI * s).sin() / (2.0 * PI), epsilon = 1e-14);
        }
        let sn = PeriodicField::from_fn(n, FieldKind::Scalar, |s| (2.0 * PI * s).sin().into()).unwrap();
        let a = spectral_antiderivative(&sn).unwrap();
        assert_eq!(a.samples()[0].re, 0.0);
        for j in 0..n {
            let s = j as f64 / n as f64;
            assert_abs_diff_eq!(a.samples()[j].re, (1.0 - (2.0 * PI * s).cos()) / (2.0 * PI), epsilon = 1e-14);
        }
        let z = PeriodicField::zeros(n, FieldKind::Scalar);
        assert!(spectral_antiderivative(&z).unwrap().max_abs() == 0.0);
    }

    #[test]
    fn antiderivative_rejects_mean() {
        let u = PeriodicField::from_real(&[1.0; 16]).unwrap();
        assert!(spectral_antiderivative(&u).is_err());
    }

    #[test]
    fn resample_preserves_interpolant() {
        let u = PeriodicField::from_fn(16, FieldKind::Vector, |s| {
            C64::new((2.0 * PI * s).cos() + 0.3 * (14.0 * PI * s).sin(), (16.0 * PI * s).cos())
        })
        .unwrap();
        let up = u.resample(64).unwrap();
        for j in 0..64 {
            let s = j as f64 / 64.0;
            assert!((up.samples()[j] - u.eval(s)).norm() < 1e-13);
        }
        let back = up.resample(16).unwrap();
        for (a, b) in back.samples().iter().zip(u.samples()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn analytic_field(amps: &[f64], phases: &[f64], n: usize) -> PeriodicField {
            PeriodicField::from_fn(n, FieldKind::Scalar, |s| {
                let v: f64 = amps
                    .iter()
                    .zip(phases)
                    .enumerate()
                    .map(|(k, (a, p))| a * (0.5f64).powi(k as i32) * (2.0 * PI * (k + 1) as f64 * s + p).cos())
                    .sum();
                v.into()
            })
            .unwrap()
        }

        proptest! {
            #[test]
            fn transform_round_trip(vals in prop::collection::vec(-10.0f64..10.0, 64)) {
                let u = PeriodicField::from_real(&vals).unwrap();
                let back = inverse(u.coeffs());
                let scale = vals.iter().fold(1e-300f64, |m, v| m.max(v.abs()));
                for (a, b) in back.iter().zip(&vals) {
                    prop_assert!((a.re - b).abs() <= 1e-13 * scale);
                }
            }

            #[test]
            fn real_fields_are_conjugate_symmetric(vals in prop::collection::vec(-1.0f64..1.0, 32)) {
                let u = PeriodicField::from_real(&vals).unwrap();
                for k in 1..16i64 {
                    prop_assert!((u.coeff(k) - u.coeff(-k).conj()).norm() < 1e-14);
                }
            }

            #[test]
            fn derivative_inverts_antiderivative(
                amps in prop::collection::vec(-1.0f64..1.0, 8),
                phases in prop::collection::vec(0.0f64..6.28, 8),
            ) {
                let u = analytic_field(&amps, &phases, 64);
                let a = spectral_antiderivative(&u).unwrap();
                let back = spectral_derivative(&a, 1).unwrap();
                for (x, y) in back.samples().iter().zip(u.samples()) {
                    prop_assert!((x - y).norm() < 1e-12);
                }
            }
        }
    }
}
