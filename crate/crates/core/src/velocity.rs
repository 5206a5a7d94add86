//! The velocity integral `zeta`, its first two `s` derivatives and the
//! tangential correction `lambda`, in two independent forms:
//!
//! * regularized: integrands written with `Gamma` and `I0`, integrated
//!   against `|sin(pi s*)/pi|^{-beta}` by product integration on the `s*` grid;
//! * raw: the difference-quotient integrands, integrated by graded adaptive
//!   Gauss-Kronrod quadrature pointwise in `s`.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::arc_chord::{chord_ratio, gamma_power_expansion, speed_deviation, ArcChordField};
use crate::error::{GsqgError, Result};
use crate::field::{
    dot, finite_diff_on, ftc_average_on, shifted, spectral_antiderivative,
    spectral_derivative, sstar_of, FieldKind, PeriodicField, C64,
};
use crate::quadrature::{adaptive, grading_for, Tolerance};
use crate::symbol::{apply_hbeta, build_symbol, check_beta, ProductWeights, SymbolTable};

/// Kernel tables for one `(beta, n)` pair. The `s*` grid has `n_star` points.
#[derive(Clone, Debug)]
pub struct VelocityKernels {
    beta: f64,
    n: usize,
    n_star: usize,
    sym: SymbolTable,
    weights: ProductWeights,
}

impl VelocityKernels {
    /// Tables for an `n`-point curve with a twice oversampled `s*` grid.
    pub fn new(beta: f64, n: usize) -> Result<Self> {
        Self::with_star(beta, n, 2 * n)
    }

    pub fn with_star(beta: f64, n: usize, n_star: usize) -> Result<Self> {
        check_beta(beta)?;
        let sym = build_symbol(beta, (n_star / 2).max(n / 2))?;
        let weights = ProductWeights::new(&sym, n_star)?;
        Ok(Self {
            beta,
            n,
            n_star,
            sym,
            weights,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_star(&self) -> usize {
        self.n_star
    }

    pub fn symbol(&self) -> &SymbolTable {
        &self.sym
    }

    pub fn weights(&self) -> &ProductWeights {
        &self.weights
    }
}

#[derive(Clone, Debug)]
pub struct ZetaSsParts {
    /// `L^{-beta} H_beta(h)`.
    pub convolution_part: PeriodicField,
    pub smooth_part: PeriodicField,
}

#[derive(Clone, Debug)]
pub struct VelocityBundle {
    pub zeta: PeriodicField,
    pub zeta_s: PeriodicField,
    pub zeta_ss: PeriodicField,
    pub zeta_ss_parts: ZetaSsParts,
    /// `z_s . zeta_s` without third derivatives.
    pub zs_dot_zeta_s: PeriodicField,
    pub lambda: PeriodicField,
    pub lambda_s: PeriodicField,
    pub lambda_ss: PeriodicField,
    /// `L'/L`, the mean of `z_s . zeta_s / L^2`.
    pub mu: f64,
    /// Grid standard deviation of `lambda_s + z_s . zeta_s / L^2` with
    /// `zeta_s` taken from its own formula.
    pub mu_std: f64,
    pub length: f64,
}

/// Integrals that need no `lambda`: the pieces shared by the evolution.
struct Integrals {
    zeta: Vec<C64>,
    zeta_s: Vec<C64>,
    zs_dot_zeta_s: Vec<f64>,
    zeta_ss_smooth: Vec<C64>,
    lambda_ss_l2: Vec<f64>,
}

fn check_inputs(g: &PeriodicField, h: &PeriodicField, ac: &ArcChordField, k: &VelocityKernels) -> Result<()> {
    let n = g.n();
    if h.n() != n || ac.n_s() != n {
        return Err(GsqgError::invalid("g, h and Gamma must share the s grid"));
    }
    if ac.n_star() != k.n_star() {
        return Err(GsqgError::invalid(format!(
            "Gamma has {} s* points but the kernels expect {}",
            ac.n_star(),
            k.n_star()
        )));
    }
    if n / 2 > k.symbol().n_modes() {
        return Err(GsqgError::invalid("symbol table too short for the curve"));
    }
    Ok(())
}

fn integrals(
    g: &PeriodicField,
    h: &PeriodicField,
    ac: &ArcChordField,
    k: &VelocityKernels,
) -> Result<Integrals> {
    check_inputs(g, h, ac, k)?;
    let beta = k.beta;
    let n = g.n();
    let n_star = k.n_star;
    let hs = spectral_derivative(h, 1)?;
    let ig = ftc_average_on(g, n_star);
    let ih = ftc_average_on(h, n_star);
    let ihs = ftc_average_on(&hs, n_star);
    let iy = ftc_average_on(&hs.dot(h), n_star);
    let h_plus = shifted(h, n_star);
    let hs_plus = shifted(&hs, n_star);
    let dhs = finite_diff_on(&hs, n_star);
    let jfield = gamma_power_expansion(ac, beta);
    let cols: Vec<(f64, f64)> = (0..n_star)
        .map(|m| {
            let ss = sstar_of(m, n_star);
            let r = chord_ratio(ss).0;
            (ss, r * r)
        })
        .collect();
    let w = &k.weights;
    let rows: Vec<[C64; 5]> = (0..n)
        .into_par_iter()
        .map(|j| {
            let gj = g.samples()[j];
            let hj = h.samples()[j];
            let mut a = vec![[C64::new(0.0, 0.0); 5]; n_star];
            for (m, out) in a.iter_mut().enumerate().skip(1) {
                let (ss, r2) = cols[m];
                let gm = ac.gamma.get(j, m).re;
                let gb = gm.powf(beta);
                let gb2 = gb * gm * gm;
                let gb4 = gb2 * gm * gm;
                let (vg, vh, vhs) = (ig.get(j, m), ih.get(j, m), ihs.get(j, m));
                let p = dot(vg, vh) * r2;
                let q = (vh.norm_sqr() + dot(vg, vhs)) * r2;
                let bb2 = beta * (beta + 2.0);
                out[0] = -gb * vh * ss;
                out[1] = (-gb * vhs + beta * gb2 * p * vh) * ss;
                out[2] = C64::new((gb * dot(vh, h_plus.get(j, m)) + beta * gb2 * dot(vh, gj) * p) * ss, 0.0);
                out[3] = -jfield.get(j, m).re * ss * dhs.get(j, m)
                    + (2.0 * beta * gb2 * p * vhs + beta * gb2 * q * vh - bb2 * gb4 * p * p * vh) * ss;
                let lss = gb * (-2.0 * iy.get(j, m).re - dot(hs_plus.get(j, m), vh))
                    - 2.0 * beta * gb2 * dot(vhs, gj) * p
                    - beta * gb2 * dot(vh, gj) * q
                    + bb2 * gb4 * dot(vh, gj) * p * p
                    + gb * dot(vhs, hj)
                    - beta * gb2 * dot(vh, hj) * p;
                out[4] = C64::new(lss * ss, 0.0);
            }
            let mut res = [C64::new(0.0, 0.0); 5];
            for (i, r) in res.iter_mut().enumerate() {
                let row: Vec<C64> = a.iter().map(|v| v[i]).collect();
                *r = w.integrate(&row);
            }
            res
        })
        .collect();
    Ok(Integrals {
        zeta: rows.iter().map(|r| r[0]).collect(),
        zeta_s: rows.iter().map(|r| r[1]).collect(),
        zs_dot_zeta_s: rows.iter().map(|r| r[2].re).collect(),
        zeta_ss_smooth: rows.iter().map(|r| r[3]).collect(),
        lambda_ss_l2: rows.iter().map(|r| r[4].re).collect(),
    })
}

fn vector(v: Vec<C64>) -> Result<PeriodicField> {
    PeriodicField::from_samples(v, FieldKind::Vector)
}

fn scalar(v: &[f64]) -> Result<PeriodicField> {
    PeriodicField::from_real(v)
}

/// All regularized quantities for `g = z_s`, `h = z_ss` and `Gamma`.
/// `L` is taken as `1 / Gamma(0, 0)`.
pub fn evaluate(
    g: &PeriodicField,
    h: &PeriodicField,
    ac: &ArcChordField,
    k: &VelocityKernels,
) -> Result<VelocityBundle> {
    let it = integrals(g, h, ac, k)?;
    let l = ac.length;
    let l2 = l * l;
    let zeta = vector(it.zeta)?;
    let zeta_s = vector(it.zeta_s)?;
    let zs_dot_zeta_s = scalar(&it.zs_dot_zeta_s)?;
    let smooth = vector(it.zeta_ss_smooth)?;
    let conv = apply_hbeta(h, &k.sym)?.scale(l.powf(-k.beta));
    let zeta_ss = conv.add(&smooth);
    let a: Vec<f64> = it.zs_dot_zeta_s.iter().map(|v| v / l2).collect();
    let mu = a.iter().sum::<f64>() / a.len() as f64;
    let lambda_s = scalar(&a.iter().map(|v| mu - v).collect::<Vec<_>>())?;
    let lambda = spectral_antiderivative(&lambda_s)?;
    let lambda_ss = scalar(&it.lambda_ss_l2.iter().map(|v| v / l2).collect::<Vec<_>>())?;
    let check: Vec<f64> = lambda_s
        .real()
        .iter()
        .zip(g.samples().iter().zip(zeta_s.samples()))
        .map(|(ls, (gg, zs))| ls + dot(*gg, *zs) / l2)
        .collect();
    let mean = check.iter().sum::<f64>() / check.len() as f64;
    let var = check.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / check.len() as f64;
    Ok(VelocityBundle {
        zeta,
        zeta_s,
        zeta_ss,
        zeta_ss_parts: ZetaSsParts {
            convolution_part: conv,
            smooth_part: smooth,
        },
        zs_dot_zeta_s,
        lambda,
        lambda_s,
        lambda_ss,
        mu,
        mu_std: var.sqrt(),
        length: l,
    })
}

/// Regularized `zeta = -int Gamma^beta I0(z_ss) s* / |sin_rho s*|^beta ds*`.
pub fn zeta_regularized(
    g: &PeriodicField,
    h: &PeriodicField,
    ac: &ArcChordField,
    k: &VelocityKernels,
) -> Result<PeriodicField> {
    Ok(evaluate(g, h, ac, k)?.zeta)
}

/// `(zeta_s regularized, zeta_s raw)`.
pub fn zeta_s_dual(
    z: &PeriodicField,
    ac: &ArcChordField,
    k: &VelocityKernels,
    tol: f64,
) -> Result<(PeriodicField, PeriodicField)> {
    let g = spectral_derivative(z, 1)?;
    let h = spectral_derivative(z, 2)?;
    let reg = evaluate(&g, &h, ac, k)?.zeta_s;
    let raw = raw_bundle(z, k.beta, tol)?.zeta_s;
    Ok((reg, raw))
}

/// `z_s . zeta_s` from `g`, `h` and `Gamma` alone.
pub fn zs_dot_zeta_s(
    g: &PeriodicField,
    h: &PeriodicField,
    ac: &ArcChordField,
    k: &VelocityKernels,
) -> Result<PeriodicField> {
    scalar(&integrals(g, h, ac, k)?.zs_dot_zeta_s)
}

/// Raw difference-quotient evaluations used as the independent oracle.
#[derive(Clone, Debug)]
pub struct RawBundle {
    pub zeta: PeriodicField,
    pub zeta_s: PeriodicField,
    pub zeta_ss: PeriodicField,
    pub zs_dot_zeta_s: PeriodicField,
    pub lambda_s: PeriodicField,
    pub lambda_ss: PeriodicField,
    pub length: f64,
}

/// Difference fields `D z, D z_s, D z_ss, D z_sss` at one `s` for arbitrary
/// `s*`, summed mode by mode with `e^{i theta} - 1` formed without
/// cancellation.
struct DiffEvaluator {
    half: usize,
    /// `[field][k]` for `k = 1..=half`: coefficient pairs `(+k, -k)` already
    /// multiplied by `e^{+-2 pi i k s}`.
    pairs: [Vec<(C64, C64)>; 4],
}

impl DiffEvaluator {
    fn new(fields: [&PeriodicField; 4], j: usize) -> Self {
        let n = fields[0].n();
        let half = n / 2;
        let s = j as f64 / n as f64;
        let pairs = fields.map(|f| {
            (1..=half)
                .map(|k| {
                    let e = C64::from_polar(1.0, 2.0 * PI * k as f64 * s);
                    if k == half {
                        let c = 0.5 * f.coeffs()[half];
                        (c * e, c * e.conj())
                    } else {
                        (f.coeffs()[k] * e, f.coeffs()[n - k] * e.conj())
                    }
                })
                .collect()
        });
        Self { half, pairs }
    }

    fn eval(&self, ss: f64) -> [C64; 4] {
        let w = C64::from_polar(1.0, PI * ss);
        let mut wk = C64::new(1.0, 0.0);
        let mut out = [C64::new(0.0, 0.0); 4];
        for k in 0..self.half {
            wk *= w;
            let e = C64::new(0.0, 2.0 * wk.im) * wk;
            let ec = e.conj();
            for (o, p) in out.iter_mut().zip(&self.pairs) {
                let (a, b) = p[k];
                *o += a * e + b * ec;
            }
        }
        out
    }
}

/// Raw `zeta`, `zeta_s`, `zeta_ss` at every grid point by graded adaptive
/// quadrature to relative tolerance `tol`, plus the derived `lambda` pieces.
pub fn raw_bundle(z: &PeriodicField, beta: f64, tol: f64) -> Result<RawBundle> {
    check_beta(beta)?;
    let n = z.n();
    let g = spectral_derivative(z, 1)?;
    let h = spectral_derivative(z, 2)?;
    let hs = spectral_derivative(z, 3)?;
    let (length, _) = speed_deviation(&g);
    let q = grading_for(beta) as i32;
    let qf = q as f64;
    let scale = length.powf(1.0 - beta);
    let rows: Vec<[C64; 3]> = (0..n)
        .into_par_iter()
        .map(|j| {
            let ev = DiffEvaluator::new([z, &g, &h, &hs], j);
            let integrand = |v: f64, out: &mut [f64]| {
                out.iter_mut().for_each(|o| *o = 0.0);
                let x = 0.5 * v.powi(q);
                if x == 0.0 {
                    return;
                }
                let jac = 0.5 * qf * v.powi(q - 1);
                for ss in [x, -x] {
                    let [d0, d1, d2, d3] = ev.eval(ss);
                    let terms = raw_integrands(d0, d1, d2, d3, beta);
                    for (i, t) in terms.iter().enumerate() {
                        out[2 * i] += jac * t.re;
                        out[2 * i + 1] += jac * t.im;
                    }
                }
            };
            let est = adaptive(
                integrand,
                6,
                0.0,
                1.0,
                &[0.25, 0.5, 0.75],
                Tolerance {
                    abs: 1e-13 * scale,
                    rel: tol,
                    max_intervals: 20_000,
                },
            )?;
            let v = est.value;
            Ok([
                C64::new(v[0], v[1]),
                C64::new(v[2], v[3]),
                C64::new(v[4], v[5]),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    let zeta = vector(rows.iter().map(|r| r[0]).collect())?;
    let zeta_s = vector(rows.iter().map(|r| r[1]).collect())?;
    let zeta_ss = vector(rows.iter().map(|r| r[2]).collect())?;
    let l2 = length * length;
    let zs_dot_zeta_s = g.dot(&zeta_s);
    let a: Vec<f64> = zs_dot_zeta_s.real().iter().map(|v| v / l2).collect();
    let mean = a.iter().sum::<f64>() / n as f64;
    let lambda_s = scalar(&a.iter().map(|v| mean - v).collect::<Vec<_>>())?;
    let lambda_ss: Vec<f64> = (0..n)
        .map(|j| -(dot(g.samples()[j], zeta_ss.samples()[j]) + dot(h.samples()[j], zeta_s.samples()[j])) / l2)
        .collect();
    Ok(RawBundle {
        zeta,
        zeta_s,
        zeta_ss,
        zs_dot_zeta_s,
        lambda_s,
        lambda_ss: scalar(&lambda_ss)?,
        length,
    })
}

/// The three raw integrands (before the minus sign is absorbed).
fn raw_integrands(d0: C64, d1: C64, d2: C64, d3: C64, beta: f64) -> [C64; 3] {
    let r2 = d0.norm_sqr();
    let rb = r2.powf(-0.5 * beta);
    let rb2 = rb / r2;
    let rb4 = rb2 / r2;
    let a = dot(d0, d1);
    let zeta = -d1 * rb;
    let zeta_s = -(d2 * rb - beta * a * rb2 * d1);
    let zeta_ss = -(d3 * rb - 2.0 * beta * a * rb2 * d2 - beta * (d1.norm_sqr() + dot(d0, d2)) * rb2 * d1
        + beta * (beta + 2.0) * a * a * rb4 * d1);
    [zeta, zeta_s, zeta_ss]
}

/// Raw `zeta = -int D z_s / |D z|^beta ds*`.
pub fn zeta_direct(z: &PeriodicField, beta: f64) -> Result<PeriodicField> {
    Ok(raw_bundle(z, beta, 1e-12)?.zeta)
}

/// The scalar `c` with `zeta = c z_s` on a circle of radius `r`.
pub fn circle_zeta_factor(r: f64, beta: f64) -> Result<f64> {
    check_beta(beta)?;
    // -int (cos 2 pi x - 1) / (2 r |sin pi x|)^beta dx, 2 pi r c = 2 pi r ...
    // with z_s = 2 pi i z and D z_s = z_s (e^{2 pi i x} - 1): the real part
    // survives and gives c = -int (cos 2 pi x - 1) / (2 r |sin pi x|)^beta dx
    let q = grading_for(beta) as i32;
    let (v, _) = crate::quadrature::adaptive_scalar(
        |u| {
            let x = 0.5 * u.powi(q);
            if x == 0.0 {
                return 0.0;
            }
            let jac = 0.5 * q as f64 * u.powi(q - 1);
            let s = (PI * x).sin();
            2.0 * jac * 2.0 * s * s / (2.0 * r * s).powf(beta)
        },
        0.0,
        1.0,
        &[],
        Tolerance::absolute(1e-14),
    )?;
    Ok(v)
}

/// Relative discrepancy `max |a - b| / max |b|`.
pub fn relative_error(a: &PeriodicField, b: &PeriodicField) -> f64 {
    let diff = a
        .samples()
        .iter()
        .zip(b.samples())
        .fold(0.0f64, |m, (x, y)| m.max((x - y).norm()));
    diff / b.max_abs().max(f64::MIN_POSITIVE)
}

/// Outward unit normal `-i z_s / |z_s|` for a counter-clockwise curve.
pub fn unit_normal(g: &PeriodicField) -> Vec<C64> {
    g.samples()
        .iter()
        .map(|c| C64::new(c.im, -c.re) / c.norm())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arc_chord::{build_gamma_on, ArcChordOptions};
    use crate::curve::{circle, ellipse};
    use approx::assert_abs_diff_eq;

    fn setup(z: &PeriodicField, beta: f64) -> (PeriodicField, PeriodicField, ArcChordField, VelocityKernels) {
        let n = z.n();
        let k = VelocityKernels::new(beta, n).unwrap();
        let ac = build_gamma_on(z, 2 * n, ArcChordOptions::default()).unwrap();
        let g = spectral_derivative(z, 1).unwrap();
        let h = spectral_derivative(z, 2).unwrap();
        (g, h, ac, k)
    }

    #[test]
    fn circle_velocity_is_tangential() {
        let r = 1.3;
        let beta = 1.5;
        let z = circle(r, 32).unwrap();
        let (g, h, ac, k) = setup(&z, beta);
        let b = evaluate(&g, &h, &ac, &k).unwrap();
        let c = circle_zeta_factor(r, beta).unwrap();
        for j in 0..32 {
            assert!((b.zeta.samples()[j] - c * g.samples()[j]).norm() < 1e-11);
            assert!((b.zeta_s.samples()[j] - c * h.samples()[j]).norm() < 1e-10);
        }
        assert!(b.lambda.max_abs() < 1e-12);
        assert!(b.lambda_s.max_abs() < 1e-12);
        assert!(b.lambda_ss.max_abs() < 1e-11);
        assert!(b.zs_dot_zeta_s.max_abs() < 1e-11);
        assert!(b.mu.abs() < 1e-12);
        let hs = spectral_derivative(&h, 1).unwrap();
        for j in 0..32 {
            assert!((b.zeta_ss.samples()[j] - c * hs.samples()[j]).norm() < 1e-8 * hs.max_abs());
        }
    }

    #[test]
    fn circle_raw_matches_scalar_oracle() {
        let r = 0.8;
        let beta = 1.25;
        let z = circle(r, 16).unwrap();
        let g = spectral_derivative(&z, 1).unwrap();
        let raw = zeta_direct(&z, beta).unwrap();
        let c = circle_zeta_factor(r, beta).unwrap();
        for j in 0..16 {
            assert!((raw.samples()[j] - c * g.samples()[j]).norm() < 1e-10 * g.max_abs());
        }
    }

    #[test]
    fn raw_is_translation_invariant() {
        let z = ellipse(1.0, 0.6, 64).unwrap();
        let shifted = z.map(|c| c + C64::new(3.0, -2.0));
        let a = raw_bundle(&z, 1.5, 1e-10).unwrap();
        let b = raw_bundle(&shifted, 1.5, 1e-10).unwrap();
        assert!(relative_error(&b.zeta, &a.zeta) < 1e-12);
    }

    #[test]
    fn regularized_matches_raw_on_ellipse() {
        let z = ellipse(1.0, 0.6, 128).unwrap();
        let (g, h, ac, k) = setup(&z, 1.5);
        let reg = evaluate(&g, &h, &ac, &k).unwrap();
        let raw = raw_bundle(&z, 1.5, 1e-11).unwrap();
        assert!(relative_error(&reg.zeta, &raw.zeta) < 1e-8);
        assert!(relative_error(&reg.zeta_s, &raw.zeta_s) < 1e-8);
        assert!(relative_error(&reg.zeta_ss, &raw.zeta_ss) < 1e-6);
        assert!(relative_error(&reg.zs_dot_zeta_s, &raw.zs_dot_zeta_s) < 1e-6);
        assert!(relative_error(&reg.lambda_s, &raw.lambda_s) < 1e-6);
        assert!(relative_error(&reg.lambda_ss, &raw.lambda_ss) < 1e-6);
    }

    #[test]
    fn derivative_consistency() {
        let z = ellipse(1.0, 0.6, 128).unwrap();
        let (g, h, ac, k) = setup(&z, 1.75);
        let b = evaluate(&g, &h, &ac, &k).unwrap();
        let dz = spectral_derivative(&b.zeta, 1).unwrap();
        assert!(relative_error(&dz, &b.zeta_s) < 1e-7);
        let dzs = spectral_derivative(&b.zeta_s, 1).unwrap();
        assert!(relative_error(&b.zeta_ss, &dzs) < 1e-6);
        let dl = spectral_derivative(&b.lambda, 1).unwrap();
        assert!(relative_error(&dl, &b.lambda_s) < 1e-8);
        let dls = spectral_derivative(&b.lambda_s, 1).unwrap();
        assert!(relative_error(&dls, &b.lambda_ss) < 1e-6);
        assert_eq!(b.lambda.samples()[0].re, 0.0);
        let l2 = b.length * b.length;
        assert!(b.mu_std <= 1e-8 * b.zs_dot_zeta_s.max_abs() / l2, "{} {}", b.mu_std, b.mu);
        let gz = g.dot(&b.zeta_s);
        assert!(relative_error(&b.zs_dot_zeta_s, &gz) < 1e-8);
    }

    #[test]
    fn homogeneity_under_scaling() {
        let beta = 1.5;
        let z = ellipse(1.0, 0.6, 128).unwrap();
        let base = {
            let (g, h, ac, k) = setup(&z, beta);
            evaluate(&g, &h, &ac, &k).unwrap().zeta
        };
        for a in [0.5, 2.0, 3.7] {
            let za = z.scale(a);
            let (g, h, ac, k) = setup(&za, beta);
            let scaled = evaluate(&g, &h, &ac, &k).unwrap().zeta;
            let expect = base.scale(a.powf(1.0 - beta));
            assert!(relative_error(&scaled, &expect) < 1e-12);
        }
    }

    #[test]
    fn circle_factor_positive_sign() {
        // cos - 1 <= 0 so the integral of -(cos - 1) / ... is positive
        assert!(circle_zeta_factor(1.0, 1.5).unwrap() > 0.0);
        assert_abs_diff_eq!(
            circle_zeta_factor(2.0, 1.5).unwrap(),
            circle_zeta_factor(1.0, 1.5).unwrap() * 2f64.powf(-1.5),
            epsilon = 1e-13
        );
    }
}
