//! The dispersive operator `H_beta`, its Fourier symbol, the exact solver for
//! `d/dt - L^{-beta} H_beta`, and the kernel tables used for product
//! integration against `|sin(pi s)/pi|^{-beta}`.

use std::f64::consts::PI;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use log::{debug, warn};
use rayon::prelude::*;

use crate::error::{GsqgError, Result};
use crate::field::{forward, mode, C64, PeriodicField};
use crate::quadrature::{adaptive, grading_for, Tolerance};

/// Absolute tolerance for the kernel integrals.
pub const KERNEL_TOL: f64 = 1e-12;

pub fn check_beta(beta: f64) -> Result<()> {
    if !(beta > 1.0 && beta < 2.0) {
        return Err(GsqgError::invalid(format!(
            "beta = {beta} must lie strictly between 1 and 2"
        )));
    }
    Ok(())
}

/// `F(k) = int_{-1/2}^{1/2} (cos(2 pi k s) - 1) / |sin(pi s)/pi|^beta ds`.
pub fn renormalized_kernel(beta: f64, k: i64, tol: f64) -> Result<f64> {
    check_beta(beta)?;
    let k = k.unsigned_abs();
    if k == 0 {
        return Ok(0.0);
    }
    let q = grading_for(beta) as i32;
    let qf = q as f64;
    let kf = k as f64;
    // zeros of sin(pi k s) mapped to the graded variable
    let breaks: Vec<f64> = (1..k).map(|j| (j as f64 / kf).powf(1.0 / qf)).collect();
    let est = adaptive(
        |v, out: &mut [f64]| {
            let s = 0.5 * v.powi(q);
            let jac = 0.5 * qf * v.powi(q - 1);
            let num = (PI * kf * s).sin();
            out[0] = if s > 0.0 {
                jac * num * num / (PI * s).sin().powf(beta)
            } else {
                0.0
            };
        },
        1,
        0.0,
        1.0,
        &breaks,
        Tolerance {
            abs: tol / (4.0 * PI.powf(beta)),
            rel: 1e-15,
            max_intervals: 20 * k as usize + 2000,
        },
    )?;
    Ok(-4.0 * PI.powf(beta) * est.value[0])
}

/// Fourier data of `H_beta` for `|k| <= n_modes`.
#[derive(Clone, Debug)]
pub struct SymbolTable {
    beta: f64,
    /// `F(k)` for `k = 0..=n_modes`; `F` is even.
    f_of_k: Vec<f64>,
    /// `mu_k` for `k = 0..=n_modes`; the multiplier is `i mu_k`, odd in `k`.
    mu: Vec<f64>,
}

impl SymbolTable {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n_modes(&self) -> usize {
        self.f_of_k.len() - 1
    }

    pub fn kernel(&self, k: i64) -> f64 {
        self.f_of_k[k.unsigned_abs() as usize]
    }

    pub fn mu(&self, k: i64) -> f64 {
        let m = self.mu[k.unsigned_abs() as usize];
        if k < 0 {
            -m
        } else {
            m
        }
    }

    /// Full multiplier of `H_beta` at mode `k`.
    pub fn multiplier(&self, k: i64) -> C64 {
        C64::new(0.0, self.mu(k))
    }

    fn from_kernel(beta: f64, f_of_k: Vec<f64>) -> Self {
        let mu = f_of_k
            .iter()
            .enumerate()
            .map(|(k, f)| -2.0 * PI * k as f64 * f)
            .collect();
        Self { beta, f_of_k, mu }
    }
}

/// Compute (or load from `GSQG_CACHE_DIR`) the symbol table.
pub fn build_symbol(beta: f64, n_modes: usize) -> Result<SymbolTable> {
    check_beta(beta)?;
    let cache = std::env::var_os("GSQG_CACHE_DIR").map(PathBuf::from);
    if let Some(dir) = &cache {
        match read_cache(dir, beta, n_modes) {
            Ok(Some(t)) => return Ok(t),
            Ok(None) => {}
            Err(e) => warn!("ignoring unreadable symbol cache: {e}"),
        }
    }
    let f_of_k = (0..=n_modes as i64)
        .into_par_iter()
        .map(|k| renormalized_kernel(beta, k, KERNEL_TOL))
        .collect::<Result<Vec<_>>>()?;
    let table = SymbolTable::from_kernel(beta, f_of_k);
    if let Some(dir) = &cache {
        if let Err(e) = write_cache(dir, &table) {
            warn!("could not write symbol cache: {e}");
        }
    }
    Ok(table)
}

fn cache_path(dir: &Path, beta: f64, n_modes: usize) -> PathBuf {
    dir.join(format!("symbol_{:016x}_{n_modes}.txt", beta.to_bits()))
}

fn cache_header(beta: f64, n_modes: usize) -> String {
    format!("# gsqg-symbol v1 beta={beta:e} n={n_modes} tol={KERNEL_TOL:e}")
}

fn read_cache(dir: &Path, beta: f64, n_modes: usize) -> Result<Option<SymbolTable>> {
    let path = cache_path(dir, beta, n_modes);
    if !path.exists() {
        return Ok(None);
    }
    let text = fs::read_to_string(&path).map_err(|e| GsqgError::io(&path, e))?;
    let mut lines = text.lines();
    if lines.next() != Some(cache_header(beta, n_modes).as_str()) {
        return Ok(None);
    }
    let bad = |reason: &str| GsqgError::Format {
        path: path.clone(),
        reason: reason.to_string(),
    };
    let mut f = Vec::with_capacity(n_modes + 1);
    for (i, line) in lines.enumerate() {
        let mut it = line.split_whitespace();
        let k: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad("missing mode"))?;
        let v: f64 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad("missing value"))?;
        if k != i {
            return Err(bad("modes out of order"));
        }
        f.push(v);
    }
    if f.len() != n_modes + 1 {
        return Err(bad("truncated table"));
    }
    debug!("loaded symbol table from {}", path.display());
    Ok(Some(SymbolTable::from_kernel(beta, f)))
}

fn write_cache(dir: &Path, table: &SymbolTable) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| GsqgError::io(dir, e))?;
    let path = cache_path(dir, table.beta, table.n_modes());
    let mut out = cache_header(table.beta, table.n_modes());
    out.push('\n');
    for (k, v) in table.f_of_k.iter().enumerate() {
        out.push_str(&format!("{k} {v:e}\n"));
    }
    let tmp = path.with_extension("tmp");
    let mut file = fs::File::create(&tmp).map_err(|e| GsqgError::io(&tmp, e))?;
    file.write_all(out.as_bytes())
        .map_err(|e| GsqgError::io(&tmp, e))?;
    fs::rename(&tmp, &path).map_err(|e| GsqgError::io(&path, e))
}

/// `H_beta(h) = -int (h_s(s + s*) - h_s(s)) / |sin(pi s*)/pi|^beta ds*`, applied
/// as the multiplier `i mu_k`. The Nyquist mode is annihilated.
pub fn apply_hbeta(h: &PeriodicField, sym: &SymbolTable) -> Result<PeriodicField> {
    let n = h.n();
    if n / 2 > sym.n_modes() {
        return Err(GsqgError::invalid("symbol table too short for field"));
    }
    let coeffs = h
        .coeffs()
        .iter()
        .enumerate()
        .map(|(j, &c)| {
            let k = mode(j, n);
            if 2 * k.unsigned_abs() as usize == n {
                C64::new(0.0, 0.0)
            } else {
                c * sym.multiplier(k)
            }
        })
        .collect();
    PeriodicField::from_coeffs(coeffs, h.kind())
}

/// `int_0^1 e^{z x} (1 - x) dx` and `int_0^1 e^{z x} x dx`.
fn linear_phi(z: C64) -> (C64, C64) {
    if z.norm() < 0.5 {
        let mut p0 = C64::new(0.0, 0.0);
        let mut p1 = C64::new(0.0, 0.0);
        let mut zn_over_fact = C64::new(1.0, 0.0);
        for n in 0..24 {
            let nf = n as f64;
            p0 += zn_over_fact / ((nf + 1.0) * (nf + 2.0));
            p1 += zn_over_fact / (nf + 2.0);
            zn_over_fact *= z / (nf + 1.0);
        }
        (p0, p1)
    } else {
        let ez = z.exp();
        let phi1 = (ez - 1.0) / z;
        let p1 = (ez - phi1) / z;
        (phi1 - p1, p1)
    }
}

/// Rescaled time `t0(t_i) - t0(t_0)` at each node by the trapezoid rule on
/// `L^{-beta}`.
pub fn rescaled_times(times: &[f64], lengths: &[f64], beta: f64) -> Vec<f64> {
    let mut out = vec![0.0; times.len()];
    for i in 1..times.len() {
        let w0 = lengths[i - 1].powf(-beta);
        let w1 = lengths[i].powf(-beta);
        out[i] = out[i - 1] + 0.5 * (times[i] - times[i - 1]) * (w0 + w1);
    }
    out
}

/// Solve `d/dt f = L(t)^{-beta} H_beta f + g` from `times[0]` to the last
/// node. `lengths` samples `L` at the nodes; `forcing` (if any) samples `g`
/// at the nodes and is interpolated linearly in between, with each panel
/// integrated exactly against the phase.
pub fn semigroup_solve(
    f0: &PeriodicField,
    times: &[f64],
    lengths: &[f64],
    forcing: Option<&[PeriodicField]>,
    sym: &SymbolTable,
) -> Result<PeriodicField> {
    if times.is_empty() || times.len() != lengths.len() {
        return Err(GsqgError::invalid("time and length samples must match"));
    }
    if lengths.iter().any(|&l| !(l > 0.0)) {
        return Err(GsqgError::invalid("lengths must be positive"));
    }
    if let Some(g) = forcing {
        if g.len() != times.len() || g.iter().any(|x| x.n() != f0.n()) {
            return Err(GsqgError::invalid("forcing samples must match time nodes"));
        }
    }
    let n = f0.n();
    if n / 2 > sym.n_modes() {
        return Err(GsqgError::invalid("symbol table too short for field"));
    }
    let t0 = rescaled_times(times, lengths, sym.beta());
    let total = *t0.last().unwrap();
    let coeffs = (0..n)
        .map(|j| {
            let k = mode(j, n);
            let mu = if 2 * k.unsigned_abs() as usize == n {
                0.0
            } else {
                sym.mu(k)
            };
            let mut c = C64::from_polar(1.0, mu * total) * f0.coeffs()[j];
            if let Some(g) = forcing {
                for i in 0..times.len() - 1 {
                    let h = times[i + 1] - times[i];
                    let a = mu * (total - t0[i]);
                    let b = mu * (total - t0[i + 1]);
                    let (p0, p1) = linear_phi(C64::new(0.0, b - a));
                    c += h
                        * C64::from_polar(1.0, a)
                        * (p0 * g[i].coeffs()[j] + p1 * g[i + 1].coeffs()[j]);
                }
            }
            c
        })
        .collect();
    PeriodicField::from_coeffs(coeffs, f0.kind())
}

/// Quadrature weights `w_j` on the `m`-point grid `s*_j in (-1/2, 1/2]` with
/// `sum_j w_j A(s*_j) = int A / |sin(pi s*)/pi|^beta ds*` for trigonometric
/// polynomials `A` of degree `< m/2` vanishing at `s* = 0`.
#[derive(Clone, Debug)]
pub struct ProductWeights {
    weights: Vec<f64>,
}

impl ProductWeights {
    pub fn new(sym: &SymbolTable, m: usize) -> Result<Self> {
        if m / 2 > sym.n_modes() {
            return Err(GsqgError::invalid("symbol table too short for weights"));
        }
        let spec: Vec<C64> = (0..m)
            .map(|j| C64::new(sym.kernel(mode(j, m)), 0.0))
            .collect();
        // F is even, so the forward transform is real
        let weights = forward(&spec).iter().map(|c| c.re).collect();
        Ok(Self { weights })
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Apply to one row of samples; the `s* = 0` sample is ignored.
    pub fn integrate(&self, row: &[C64]) -> C64 {
        row.iter()
            .zip(&self.weights)
            .skip(1)
            .map(|(a, w)| a * w)
            .sum()
    }
}

/// Moments `W_k(m) = int e^{2 pi i m s*} s*^{k+1} / |sin(pi s*)/pi|^{beta+k} ds*`
/// of the finite measures `d mu_k` for `k in {0, 2, 4}`.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    beta: f64,
    n_points: usize,
    /// `[k_index][m + n_points]`
    moments: Vec<Vec<C64>>,
}

pub const MOMENT_POWERS: [u32; 3] = [0, 2, 4];

impl QuadratureRule {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    /// Moment of `d mu_power` at frequency `m`, `|m| <= n_points`.
    pub fn moment(&self, power: u32, m: i64) -> C64 {
        let idx = MOMENT_POWERS
            .iter()
            .position(|&p| p == power)
            .expect("power must be 0, 2 or 4");
        self.moments[idx][(m + self.n_points as i64) as usize]
    }
}

/// Sine moment `int_0^{1/2} sin(2 pi m s) s^{k+1} / sin_rho(s)^{beta+k} ds`.
pub fn sine_moment(beta: f64, power: u32, m: i64, tol: f64) -> Result<f64> {
    let ma = m.unsigned_abs();
    if ma == 0 {
        return Ok(0.0);
    }
    let q = grading_for(beta) as i32;
    let qf = q as f64;
    let mf = ma as f64;
    let kf = power as f64;
    let breaks: Vec<f64> = (1..2 * ma)
        .map(|j| (j as f64 / (2.0 * mf)).powf(1.0 / qf))
        .collect();
    let est = adaptive(
        |v, out: &mut [f64]| {
            let s = 0.5 * v.powi(q);
            let jac = 0.5 * qf * v.powi(q - 1);
            out[0] = if s > 0.0 {
                let sn = (PI * s).sin() / PI;
                jac * (2.0 * PI * mf * s).sin() * s.powf(kf + 1.0) / sn.powf(beta + kf)
            } else {
                0.0
            };
        },
        1,
        0.0,
        1.0,
        &breaks,
        Tolerance {
            abs: 0.5 * tol,
            rel: 1e-15,
            max_intervals: 40 * ma as usize + 2000,
        },
    )?;
    Ok(m.signum() as f64 * est.value[0])
}

/// Tabulate the moments for `|m| <= n_points`.
pub fn build_quadrature(beta: f64, n_points: usize) -> Result<QuadratureRule> {
    check_beta(beta)?;
    let moments = MOMENT_POWERS
        .iter()
        .map(|&p| {
            let pos = (1..=n_points as i64)
                .into_par_iter()
                .map(|m| sine_moment(beta, p, m, KERNEL_TOL))
                .collect::<Result<Vec<_>>>()?;
            let mut row = vec![C64::new(0.0, 0.0); 2 * n_points + 1];
            for (i, v) in pos.iter().enumerate() {
                // the integrand is even, the cosine part odd
                row[n_points + 1 + i] = C64::new(0.0, 2.0 * v);
                row[n_points - 1 - i] = C64::new(0.0, -2.0 * v);
            }
            Ok(row)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QuadratureRule {
        beta,
        n_points,
        moments,
    })
}
