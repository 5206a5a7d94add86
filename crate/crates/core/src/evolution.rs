//! Time integration of the system for `(f, g, h, Gamma) = (z, z_s, z_ss, Gamma)`
//! and the Picard iteration of its integrated form.
//!
//! The most singular term `L^{-beta} H_beta(h)` is handled exactly by the
//! semigroup; everything else is explicit.

use serde::{Deserialize, Serialize};

use crate::arc_chord::{build_gamma_on, chord_ratio, speed_deviation, ArcChordField, ArcChordOptions};
use crate::error::{GsqgError, Result};
use crate::field::{
    dot, ftc_average_on, sin_rho, spectral_derivative, BiPeriodicField, PeriodicField, C64,
};
use crate::norms::{gammabeta_norm, strip_radius_estimate, NormParams, StateVector};
use crate::symbol::{apply_hbeta, semigroup_solve};
use crate::velocity::{evaluate, VelocityBundle, VelocityKernels};

#[derive(Clone, Debug)]
pub struct FrontState {
    pub f: PeriodicField,
    pub g: PeriodicField,
    pub h: PeriodicField,
    pub gamma: ArcChordField,
    pub time: f64,
    /// `1 / Gamma(0, 0)`.
    pub length: f64,
}

impl FrontState {
    /// State for a uniform-speed curve with `Gamma` on an `n x n_star` grid.
    pub fn from_curve(z: &PeriodicField, n_star: usize, opts: ArcChordOptions) -> Result<Self> {
        let ac = build_gamma_on(z, n_star, opts)?;
        Ok(Self {
            f: z.clone(),
            g: spectral_derivative(z, 1)?,
            h: spectral_derivative(z, 2)?,
            length: ac.length,
            gamma: ac,
            time: 0.0,
        })
    }

    fn assemble(f: PeriodicField, g: PeriodicField, h: PeriodicField, gamma: BiPeriodicField, time: f64) -> Result<Self> {
        let gamma = ArcChordField::from_gamma(gamma)?;
        Ok(Self {
            f,
            g,
            h,
            length: gamma.length,
            gamma,
            time,
        })
    }

    pub fn n(&self) -> usize {
        self.f.n()
    }

    pub fn vector(&self) -> StateVector {
        StateVector {
            f: self.f.clone(),
            g: self.g.clone(),
            h: self.h.clone(),
            gamma: self.gamma.gamma.clone(),
        }
    }

    pub fn from_vector(u: &StateVector, time: f64) -> Result<Self> {
        Self::assemble(u.f.clone(), u.g.clone(), u.h.clone(), u.gamma.clone(), time)
    }

    /// Grid standard deviation of `|g|` over its mean.
    pub fn speed_std(&self) -> f64 {
        let s: Vec<f64> = self.g.samples().iter().map(|c| c.norm()).collect();
        let m = s.iter().sum::<f64>() / s.len() as f64;
        (s.iter().map(|x| (x - m).powi(2)).sum::<f64>() / s.len() as f64).sqrt() / m
    }

    /// `int |f_s| ds`, the length of the curve itself.
    pub fn curve_length(&self) -> f64 {
        let d = spectral_derivative(&self.f, 1).expect("valid grid");
        d.samples().iter().map(|c| c.norm()).sum::<f64>() / d.n() as f64
    }

    /// `||f_s - g|| / ||g||`.
    pub fn drift_fg(&self) -> f64 {
        let d = spectral_derivative(&self.f, 1).expect("valid grid");
        d.sub(&self.g).l2_norm() / self.g.l2_norm()
    }

    /// `||g_s - h|| / ||h||`.
    pub fn drift_gh(&self) -> f64 {
        let d = spectral_derivative(&self.g, 1).expect("valid grid");
        d.sub(&self.h).l2_norm() / self.h.l2_norm()
    }

    pub fn min_gamma(&self) -> f64 {
        self.gamma.gamma.min_re()
    }

    pub fn max_gamma(&self) -> f64 {
        self.gamma.gamma.max_re()
    }

    /// Smallest chord estimate `|sin_rho(s*)| / Gamma` relative to `L`.
    pub fn min_chord_ratio(&self) -> f64 {
        let gm = &self.gamma.gamma;
        let mut best = f64::INFINITY;
        for m in 1..gm.n_star() {
            let sr = sin_rho(gm.sstar(m)).abs();
            for j in 0..gm.n_s() {
                best = best.min(sr / gm.get(j, m).re);
            }
        }
        best / self.length
    }

    fn is_finite(&self) -> bool {
        let ok = |u: &PeriodicField| u.samples().iter().all(|c| c.re.is_finite() && c.im.is_finite());
        ok(&self.f) && ok(&self.g) && ok(&self.h) && self.gamma.gamma.data().iter().all(|c| c.re.is_finite())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Filter {
    Off,
    /// `exp(-alpha (|k|/k_max)^order)`.
    Exp { order: f64, alpha: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PicardConfig {
    pub nodes: usize,
    pub max_iter: usize,
    pub t_star: f64,
    pub gamma_weight: f64,
    pub beta_strip: f64,
    pub rho0: f64,
    pub radius: f64,
    pub l: u32,
    /// Stop once a difference falls below this fraction of the first one.
    pub tol: f64,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            nodes: 17,
            max_iter: 8,
            t_star: 0.01,
            gamma_weight: 0.5,
            beta_strip: 0.25,
            rho0: 0.005,
            radius: 100.0,
            l: 2,
            tol: 1e-10,
        }
    }
}

impl PicardConfig {
    pub fn norm_params(&self) -> NormParams {
        NormParams {
            l: self.l,
            rho: self.rho0,
            gamma_weight: self.gamma_weight,
            beta_strip: self.beta_strip,
            t_star: self.t_star,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvolutionConfig {
    pub beta: f64,
    pub n_points: usize,
    pub dt: f64,
    pub t_final: f64,
    /// Use the physical constant `C_beta` instead of 1.
    pub exact_constant: bool,
    /// Relative tolerance of the raw-quadrature oracle.
    pub quadrature_tol: f64,
    pub filter: Filter,
    /// Re-derive `g, h` from `f` every this many steps (0 = never).
    pub resync_every: usize,
    /// Stop when the smallest chord drops below this multiple of `L`.
    pub arc_chord_stop: f64,
    /// Uniform-speed tolerance for the initial curve.
    pub speed_tol: f64,
    /// Replace the velocity by zero.
    pub zero_velocity: bool,
    /// Advance the dispersive part of `f` and `g` with the same semigroup as
    /// `h`; otherwise `f` and `g` use plain Heun.
    pub exponential_fg: bool,
    pub picard: PicardConfig,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        Self {
            beta: 1.5,
            n_points: 128,
            dt: 1e-3,
            t_final: 0.1,
            exact_constant: false,
            quadrature_tol: 1e-11,
            filter: Filter::Off,
            resync_every: 0,
            arc_chord_stop: 1e-3,
            speed_tol: 1e-8,
            zero_velocity: false,
            exponential_fg: true,
            picard: PicardConfig::default(),
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        crate::symbol::check_beta(self.beta)?;
        if !(self.dt > 0.0) || !(self.t_final > 0.0) {
            return Err(GsqgError::invalid("dt and t_final must be positive"));
        }
        if self.n_points < 8 || !self.n_points.is_power_of_two() {
            return Err(GsqgError::invalid("n_points must be a power of two >= 8"));
        }
        if self.picard.nodes < 2 || !(self.picard.t_star > 0.0) {
            return Err(GsqgError::invalid("picard needs >= 2 nodes and positive T*"));
        }
        if self.picard.l < 2 {
            return Err(GsqgError::invalid("norm order l must be >= 2"));
        }
        Ok(())
    }

    pub fn c_beta(&self) -> f64 {
        if self.exact_constant {
            c_beta_exact(self.beta)
        } else {
            1.0
        }
    }

    pub fn arc_chord_options(&self) -> ArcChordOptions {
        ArcChordOptions {
            speed_tol: self.speed_tol,
            ..ArcChordOptions::default()
        }
    }
}

/// `Gamma(beta/2) / (pi 2^{2-beta} Gamma((2-beta)/2))`.
pub fn c_beta_exact(beta: f64) -> f64 {
    statrs::function::gamma::gamma(0.5 * beta) / (std::f64::consts::PI * 2f64.powf(2.0 - beta) * statrs::function::gamma::gamma(1.0 - 0.5 * beta))
}

/// Right-hand sides with `C_beta = 1`. `e3` omits `L^{-beta} H_beta(h)`.
#[derive(Clone, Debug)]
pub struct Rhs {
    pub e1: PeriodicField,
    pub e2: PeriodicField,
    pub e3: PeriodicField,
    pub e4: BiPeriodicField,
    pub velocity: VelocityBundle,
}

pub fn rhs_assemble(state: &FrontState, k: &VelocityKernels) -> Result<Rhs> {
    let v = evaluate(&state.g, &state.h, &state.gamma, k)?;
    let hs = spectral_derivative(&state.h, 1)?;
    let e1 = v.zeta.add(&state.g.scaled_by(&v.lambda));
    let e2 = v
        .zeta_s
        .add(&state.g.scaled_by(&v.lambda_s))
        .add(&state.h.scaled_by(&v.lambda));
    let e3 = v
        .zeta_ss_parts
        .smooth_part
        .add(&state.g.scaled_by(&v.lambda_ss))
        .add(&state.h.scaled_by(&v.lambda_s).scale(2.0))
        .add(&hs.scaled_by(&v.lambda));
    let e4 = gamma_rate(&state.gamma.gamma, &state.g, &e2);
    Ok(Rhs { e1, e2, e3, e4, velocity: v })
}

/// `Gamma_t = -Gamma^3 (s*/sin_rho s*)^2 I0(g) . I0(g_t)`.
pub fn gamma_rate(gamma: &BiPeriodicField, g: &PeriodicField, gt: &PeriodicField) -> BiPeriodicField {
    let nt = gamma.n_star();
    let ig = ftc_average_on(g, nt);
    let it = ftc_average_on(gt, nt);
    let r2: Vec<f64> = (0..nt).map(|m| chord_ratio(gamma.sstar(m)).0.powi(2)).collect();
    let data = (0..gamma.n_s() * nt)
        .map(|i| {
            let (j, m) = (i / nt, i % nt);
            let gm = gamma.get(j, m).re;
            C64::new(-gm.powi(3) * r2[m] * dot(ig.get(j, m), it.get(j, m)), 0.0)
        })
        .collect();
    BiPeriodicField::from_data(gamma.n_s(), nt, data).expect("shape matches")
}

fn axpy(a: &PeriodicField, t: f64, b: &PeriodicField) -> PeriodicField {
    a.add(&b.scale(t))
}

fn axpy2(a: &BiPeriodicField, t: f64, b: &BiPeriodicField) -> BiPeriodicField {
    a.zip_map(b, |x, y| x + t * y)
}

fn apply_filter(u: &PeriodicField, filter: Filter) -> PeriodicField {
    match filter {
        Filter::Off => u.clone(),
        Filter::Exp { order, alpha } => {
            let kmax = (u.n() / 2) as f64;
            u.apply_multiplier(|k| C64::new((-alpha * (k.abs() / kmax).powf(order)).exp(), 0.0))
        }
    }
}

/// One ETD-RK2 step of signed size `dt`. Returns the new state and the
/// right-hand side evaluated at the old one.
pub fn step_with_rhs(
    state: &FrontState,
    dt: f64,
    cfg: &EvolutionConfig,
    k: &VelocityKernels,
) -> Result<(FrontState, Option<Rhs>)> {
    if cfg.zero_velocity {
        let mut next = state.clone();
        next.time += dt;
        return Ok((next, None));
    }
    let tau = cfg.c_beta() * dt;
    let sym = k.symbol();
    let r0 = rhs_assemble(state, k)?;
    let l0 = state.length;
    let beta = k.beta();
    // Smooth remainders of E1, E2 once the dispersive part is split off.
    let split = |s: &FrontState, r: &Rhs| -> Result<(PeriodicField, PeriodicField)> {
        let w = s.length.powf(-beta);
        Ok((
            r.e1.sub(&apply_hbeta(&s.f, sym)?.scale(w)),
            r.e2.sub(&apply_hbeta(&s.g, sym)?.scale(w)),
        ))
    };
    let exp_fg = cfg.exponential_fg;
    let (n1_0, n2_0) = if exp_fg { split(state, &r0)? } else { (r0.e1.clone(), r0.e2.clone()) };
    let euler = |u: &PeriodicField, n: &PeriodicField, e: &PeriodicField| -> Result<PeriodicField> {
        if exp_fg {
            semigroup_solve(u, &[0.0, tau], &[l0, l0], Some(&[n.clone(), n.clone()]), sym)
        } else {
            Ok(axpy(u, tau, e))
        }
    };
    let h1 = semigroup_solve(&state.h, &[0.0, tau], &[l0, l0], Some(&[r0.e3.clone(), r0.e3.clone()]), sym)?;
    let mid = FrontState::assemble(
        euler(&state.f, &n1_0, &r0.e1)?,
        euler(&state.g, &n2_0, &r0.e2)?,
        h1,
        axpy2(&state.gamma.gamma, tau, &r0.e4),
        state.time + dt,
    )
    .map_err(|e| failure(state.time, format!("predictor: {e}")))?;
    let r1 = rhs_assemble(&mid, k)?;
    let half = 0.5 * tau;
    let lpath = [l0, mid.length];
    let (mut f, mut g) = if exp_fg {
        let (n1_1, n2_1) = split(&mid, &r1)?;
        (
            semigroup_solve(&state.f, &[0.0, tau], &lpath, Some(&[n1_0, n1_1]), sym)?,
            semigroup_solve(&state.g, &[0.0, tau], &lpath, Some(&[n2_0, n2_1]), sym)?,
        )
    } else {
        (
            state.f.add(&r0.e1.add(&r1.e1).scale(half)),
            state.g.add(&r0.e2.add(&r1.e2).scale(half)),
        )
    };
    let mut h = semigroup_solve(&state.h, &[0.0, tau], &lpath, Some(&[r0.e3.clone(), r1.e3.clone()]), sym)?;
    let mut gamma = state.gamma.gamma.zip_map(&r0.e4.zip_map(&r1.e4, |a, b| a + b), |x, y| x + half * y);
    if let Filter::Exp { order, alpha } = cfg.filter {
        f = apply_filter(&f, cfg.filter);
        g = apply_filter(&g, cfg.filter);
        h = apply_filter(&h, cfg.filter);
        gamma = gamma.filtered(alpha, order).map(|c| C64::new(c.re, 0.0));
    }
    let next = FrontState::assemble(f, g, h, gamma, state.time + dt)
        .map_err(|e| failure(state.time, e.to_string()))?;
    if !next.is_finite() {
        return Err(failure(state.time, "non-finite state".into()));
    }
    Ok((next, Some(r0)))
}

fn failure(time: f64, reason: String) -> GsqgError {
    GsqgError::IntegrationFailure { time, reason }
}

pub fn step(state: &FrontState, cfg: &EvolutionConfig, k: &VelocityKernels) -> Result<FrontState> {
    Ok(step_with_rhs(state, cfg.dt, cfg, k)?.0)
}

/// Per-step diagnostics, one row per recorded state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub t: f64,
    /// `1 / Gamma(0, 0)`.
    pub length: f64,
    /// Arc length of the curve `f`; `dldt_measured` differentiates this.
    pub curve_length: f64,
    pub dldt_measured: f64,
    pub dldt_formula: f64,
    pub min_gamma: f64,
    pub max_gamma: f64,
    pub speed_std: f64,
    pub rho_hat: f64,
    pub drift_fg: f64,
    pub drift_gh: f64,
    pub lambda0: f64,
}

#[derive(Debug)]
pub struct RunOutput {
    pub final_state: FrontState,
    pub diagnostics: Vec<DiagnosticsRow>,
    /// Step failure or arc-chord stop that ended the run early.
    pub stopped: Option<GsqgError>,
}

fn diagnostics_row(s: &FrontState, rhs: Option<&Rhs>, c: f64) -> DiagnosticsRow {
    let (mu, lambda0) = rhs
        .map(|r| (r.velocity.mu, r.velocity.lambda.samples()[0].re))
        .unwrap_or((0.0, 0.0));
    DiagnosticsRow {
        t: s.time,
        length: s.length,
        curve_length: s.curve_length(),
        dldt_measured: f64::NAN,
        dldt_formula: c * s.length * mu,
        min_gamma: s.min_gamma(),
        max_gamma: s.max_gamma(),
        speed_std: s.speed_std(),
        rho_hat: strip_radius_estimate(&s.f).rho_hat.unwrap_or(f64::NAN),
        drift_fg: s.drift_fg(),
        drift_gh: s.drift_gh(),
        lambda0,
    }
}

/// Three-point derivative at `x[i]` on a possibly non-uniform grid.
fn three_point_derivative(x: [f64; 3], y: [f64; 3], at: usize) -> f64 {
    let [x0, x1, x2] = x;
    let t = x[at];
    y[0] * ((t - x1) + (t - x2)) / ((x0 - x1) * (x0 - x2))
        + y[1] * ((t - x0) + (t - x2)) / ((x1 - x0) * (x1 - x2))
        + y[2] * ((t - x0) + (t - x1)) / ((x2 - x0) * (x2 - x1))
}

/// Fill `dldt_measured` by second-order differences of the recorded arc
/// length.
pub fn measure_length_rate(rows: &mut [DiagnosticsRow]) {
    let n = rows.len();
    if n < 3 {
        return;
    }
    for i in 0..n {
        let c = i.clamp(1, n - 2);
        let x = [rows[c - 1].t, rows[c].t, rows[c + 1].t];
        let y = [rows[c - 1].curve_length, rows[c].curve_length, rows[c + 1].curve_length];
        rows[i].dldt_measured = three_point_derivative(x, y, i + 1 - c);
    }
}

/// Advance to `cfg.t_final`, calling `on_snapshot` every `snapshot_every`
/// steps (and at both ends). Failures end the run but keep the trajectory.
pub fn run(
    initial: FrontState,
    cfg: &EvolutionConfig,
    k: &VelocityKernels,
    snapshot_every: usize,
    mut on_snapshot: impl FnMut(&FrontState) -> Result<()>,
) -> Result<RunOutput> {
    cfg.validate()?;
    let c = cfg.c_beta();
    let mut state = initial;
    let mut rows = Vec::new();
    let mut stopped = None;
    let mut steps = 0usize;
    on_snapshot(&state)?;
    let eps = 1e-12 * cfg.t_final;
    while state.time < cfg.t_final - eps {
        let dt = cfg.dt.min(cfg.t_final - state.time);
        let result = step_with_rhs(&state, dt, cfg, k).and_then(|(next, r)| {
            let ratio = next.min_chord_ratio();
            if ratio < cfg.arc_chord_stop {
                return Err(GsqgError::NearSelfIntersection {
                    min_chord: ratio * next.length,
                    threshold: cfg.arc_chord_stop * next.length,
                });
            }
            Ok((next, r))
        });
        match result {
            Ok((mut next, r0)) => {
                rows.push(diagnostics_row(&state, r0.as_ref(), c));
                steps += 1;
                if cfg.resync_every > 0 && steps % cfg.resync_every == 0 {
                    next.g = spectral_derivative(&next.f, 1)?;
                    next.h = spectral_derivative(&next.f, 2)?;
                }
                state = next;
                if snapshot_every > 0 && steps % snapshot_every == 0 {
                    on_snapshot(&state)?;
                }
            }
            Err(e) => {
                log::warn!("run stopped at t = {}: {e}", state.time);
                stopped = Some(e);
                break;
            }
        }
    }
    let last = if cfg.zero_velocity { None } else { rhs_assemble(&state, k).ok() };
    rows.push(diagnostics_row(&state, last.as_ref(), c));
    if snapshot_every == 0 || steps % snapshot_every != 0 {
        on_snapshot(&state)?;
    }
    measure_length_rate(&mut rows);
    Ok(RunOutput {
        final_state: state,
        diagnostics: rows,
        stopped,
    })
}

#[derive(Clone, Debug)]
pub struct PicardReport {
    pub times: Vec<f64>,
    /// Final iterate (full variables, not shifted).
    pub solution: Vec<StateVector>,
    /// `||u_{n+1} - u_n||` in the `(gamma, beta)` norm, `n = 0, 1, ...`.
    pub difference_norms: Vec<f64>,
    /// `(gamma, beta)` norms of the shifted iterates `u_n - u_0`, `n >= 1`.
    pub gamma_beta_norms: Vec<f64>,
    pub contraction_ratios: Vec<f64>,
    pub fixed_point_residual: f64,
    pub diverged: bool,
    /// Whether every shifted iterate stayed inside the ball of radius `R`.
    pub within_radius: bool,
}

/// Apply the integrated operator `F` to a history sampled on `times`.
pub fn picard_map(
    u0: &FrontState,
    history: &[StateVector],
    times: &[f64],
    cfg: &EvolutionConfig,
    k: &VelocityKernels,
) -> Result<Vec<StateVector>> {
    let c = cfg.c_beta();
    let mut rhs = Vec::with_capacity(history.len());
    let mut lengths = Vec::with_capacity(history.len());
    for (u, &t) in history.iter().zip(times) {
        let s = FrontState::from_vector(u, t)?;
        lengths.push(s.length);
        rhs.push(rhs_assemble(&s, k)?);
    }
    let scaled: Vec<f64> = times.iter().map(|t| c * t).collect();
    let e3: Vec<PeriodicField> = rhs.iter().map(|r| r.e3.clone()).collect();
    let mut out = Vec::with_capacity(history.len());
    let mut acc = u0.vector();
    for i in 0..history.len() {
        if i > 0 {
            let w = 0.5 * (scaled[i] - scaled[i - 1]);
            let (a, b) = (&rhs[i - 1], &rhs[i]);
            acc.f = acc.f.add(&a.e1.add(&b.e1).scale(w));
            acc.g = acc.g.add(&a.e2.add(&b.e2).scale(w));
            acc.gamma = acc.gamma.zip_map(&a.e4.zip_map(&b.e4, |x, y| x + y), |x, y| x + w * y);
        }
        let h = semigroup_solve(&u0.h, &scaled[..=i], &lengths[..=i], Some(&e3[..=i]), k.symbol())?;
        out.push(StateVector {
            f: acc.f.clone(),
            g: acc.g.clone(),
            h,
            gamma: acc.gamma.clone(),
        });
    }
    Ok(out)
}

/// Picard iteration from the constant history `u_0(t) = u0` (zero in the
/// shifted variables) on `cfg.picard.nodes` uniform nodes in `[0, T*]`.
pub fn picard_iterate(u0: &FrontState, cfg: &EvolutionConfig, k: &VelocityKernels) -> Result<PicardReport> {
    cfg.validate()?;
    let pc = cfg.picard;
    let p = pc.norm_params();
    let times: Vec<f64> = (0..pc.nodes)
        .map(|i| pc.t_star * i as f64 / (pc.nodes - 1) as f64)
        .collect();
    let base = u0.vector();
    let shifted_norm = |hist: &[StateVector], other: &[StateVector]| {
        let d: Vec<(f64, StateVector)> = times
            .iter()
            .zip(hist.iter().zip(other))
            .map(|(&t, (a, b))| (t, a.sub(b)))
            .collect();
        gammabeta_norm(&d, &p)
    };
    let constant: Vec<StateVector> = vec![base.clone(); pc.nodes];
    let mut current = constant.clone();
    let mut diffs = Vec::new();
    let mut norms = Vec::new();
    let mut ratios = Vec::new();
    let mut diverged = false;
    let mut above_one = 0;
    for _ in 0..pc.max_iter {
        let next = picard_map(u0, &current, &times, cfg, k)?;
        let d = shifted_norm(&next, &current);
        norms.push(shifted_norm(&next, &constant));
        if let Some(&prev) = diffs.last() {
            let r: f64 = d / prev;
            ratios.push(r);
            above_one = if r > 1.0 { above_one + 1 } else { 0 };
        }
        diffs.push(d);
        current = next;
        if above_one >= 3 {
            diverged = true;
            break;
        }
        if d <= pc.tol * diffs[0] {
            break;
        }
    }
    let residual = {
        let again = picard_map(u0, &current, &times, cfg, k)?;
        shifted_norm(&again, &current)
    };
    let within_radius = norms.iter().all(|&n| n <= pc.radius);
    Ok(PicardReport {
        times,
        solution: current,
        difference_norms: diffs,
        gamma_beta_norms: norms,
        contraction_ratios: ratios,
        fixed_point_residual: residual,
        diverged,
        within_radius,
    })
}

/// Relative shape change between two curves: mode amplitudes are invariant
/// under rotation and shifts of the parameter.
pub fn shape_deviation(a: &PeriodicField, b: &PeriodicField) -> f64 {
    let (x, y) = (a.coeffs(), b.coeffs());
    let scale = y.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    x.iter().zip(y).fold(0.0f64, |m, (p, q)| m.max((p.norm() - q.norm()).abs())) / scale
}

/// Maximum relative deviation of `|z_s|` from its mean.
pub fn speed_dev(state: &FrontState) -> f64 {
    speed_deviation(&state.g).1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{circle, ellipse};

    fn circle_state(r: f64, n: usize) -> FrontState {
        FrontState::from_curve(&circle(r, n).unwrap(), 2 * n, ArcChordOptions::default()).unwrap()
    }

    fn ellipse_state(n: usize) -> FrontState {
        FrontState::from_curve(&ellipse(1.0, 0.6, n).unwrap(), 2 * n, ArcChordOptions::default()).unwrap()
    }

    fn cfg(beta: f64, n: usize, dt: f64, t_final: f64) -> EvolutionConfig {
        EvolutionConfig {
            beta,
            n_points: n,
            dt,
            t_final,
            ..EvolutionConfig::default()
        }
    }

    fn state_error(a: &FrontState, b: &FrontState) -> f64 {
        a.f.sub(&b.f).max_abs() / b.f.max_abs()
    }

    #[test]
    fn exact_constant_value() {
        // C_1 = 1 / (2 pi) from the SQG case, approached as beta -> 1
        assert!((c_beta_exact(1.0 + 1e-9) - 0.5 / std::f64::consts::PI).abs() < 1e-8);
        assert!(c_beta_exact(1.5) > 0.0);
    }

    #[test]
    fn circle_rhs_is_tangential() {
        let s = circle_state(1.0, 32);
        let k = VelocityKernels::new(1.5, 32).unwrap();
        let r = rhs_assemble(&s, &k).unwrap();
        for j in 0..32 {
            let g = s.g.samples()[j];
            let e = r.e1.samples()[j];
            assert!(dot(C64::new(g.im, -g.re), e).abs() < 1e-12 * e.norm().max(1.0));
        }
        assert!(r.e4.max_abs() < 1e-10);
    }

    #[test]
    fn translation_leaves_rates_unchanged() {
        let s = ellipse_state(128);
        let mut t = s.clone();
        t.f = t.f.map(|c| c + C64::new(2.0, -1.0));
        let k = VelocityKernels::new(1.5, 128).unwrap();
        let (a, b) = (rhs_assemble(&s, &k).unwrap(), rhs_assemble(&t, &k).unwrap());
        assert_eq!(a.e2.samples(), b.e2.samples());
        assert_eq!(a.e3.samples(), b.e3.samples());
        assert_eq!(a.e4.data(), b.e4.data());
    }

    #[test]
    fn e2_matches_derivative_of_e1() {
        let s = ellipse_state(128);
        let k = VelocityKernels::new(1.5, 128).unwrap();
        let r = rhs_assemble(&s, &k).unwrap();
        let d1 = spectral_derivative(&r.e1, 1).unwrap();
        assert!(d1.sub(&r.e2).max_abs() < 1e-7 * r.e2.max_abs());
        let conv = r.velocity.zeta_ss_parts.convolution_part.clone();
        let d2 = spectral_derivative(&r.e2, 1).unwrap();
        let full = r.e3.add(&conv);
        assert!(d2.sub(&full).max_abs() < 1e-6 * full.max_abs());
    }

    #[test]
    fn gamma_rate_matches_rebuilt_gamma() {
        // Gamma of z + eps z_t versus Gamma + eps Gamma_t
        let s = ellipse_state(128);
        let k = VelocityKernels::new(1.5, 128).unwrap();
        let r = rhs_assemble(&s, &k).unwrap();
        let eps = 1e-6;
        let plus = build_gamma_on(&axpy(&s.f, eps, &r.e1), 256, ArcChordOptions { speed_tol: 1e-4, ..Default::default() }).unwrap();
        let minus = build_gamma_on(&axpy(&s.f, -eps, &r.e1), 256, ArcChordOptions { speed_tol: 1e-4, ..Default::default() }).unwrap();
        let fd = plus.gamma.zip_map(&minus.gamma, |a, b| (a - b) / (2.0 * eps));
        let diff = fd.zip_map(&r.e4, |a, b| a - b).max_abs();
        assert!(diff < 1e-6 * r.e4.max_abs(), "{diff} {}", r.e4.max_abs());
    }

    #[test]
    fn zero_velocity_is_fixed() {
        let s = ellipse_state(64_usize.max(128));
        let mut c = cfg(1.5, 128, 1e-3, 1e-2);
        c.zero_velocity = true;
        let k = VelocityKernels::new(1.5, 128).unwrap();
        let out = run(s.clone(), &c, &k, 0, |_| Ok(())).unwrap();
        assert_eq!(out.final_state.f.samples(), s.f.samples());
        assert_eq!(out.final_state.gamma.gamma.data(), s.gamma.gamma.data());
    }

    #[test]
    fn circle_is_steady() {
        let s = circle_state(1.0, 32);
        let c = cfg(1.5, 32, 1e-4, 0.5);
        let k = VelocityKernels::new(1.5, 32).unwrap();
        let out = run(s.clone(), &c, &k, 0, |_| Ok(())).unwrap();
        assert!(out.stopped.is_none());
        assert!(shape_deviation(&out.final_state.f, &s.f) < 1e-6);
        let l0 = 2.0 * std::f64::consts::PI;
        let worst = out.diagnostics.iter().fold(0.0f64, |m, r| m.max((r.length - l0).abs() / l0));
        assert!(worst < 1e-8, "{worst}");
        for r in &out.diagnostics {
            assert!(r.dldt_formula.abs() < 1e-6 && r.dldt_measured.abs() < 1e-6, "{r:?}");
        }
    }

    #[test]
    fn time_reversal_returns() {
        let s = ellipse_state(128);
        let c = cfg(1.5, 128, 2e-3, 1.0);
        let k = VelocityKernels::new(1.5, 128).unwrap();
        let mut errs = Vec::new();
        for dt in [4e-3, 2e-3] {
            let mut u = s.clone();
            for _ in 0..5 {
                u = step_with_rhs(&u, dt, &c, &k).unwrap().0;
            }
            for _ in 0..5 {
                u = step_with_rhs(&u, -dt, &c, &k).unwrap().0;
            }
            errs.push(state_error(&u, &s));
        }
        // O(dt^2) over a fixed number of steps, or better
        assert!(errs[1] < 1e-4 && errs[1] < errs[0] / 3.0, "{errs:?}");
    }

    #[test]
    fn picard_first_iterate_is_initial_drift() {
        let s = ellipse_state(128);
        let mut c = cfg(1.5, 128, 1e-3, 0.1);
        c.picard.nodes = 5;
        c.picard.t_star = 0.004;
        let k = VelocityKernels::new(1.5, 128).unwrap();
        let times: Vec<f64> = (0..5).map(|i| 0.001 * i as f64).collect();
        let constant = vec![s.vector(); 5];
        let u1 = picard_map(&s, &constant, &times, &c, &k).unwrap();
        let r = rhs_assemble(&s, &k).unwrap();
        for (i, u) in u1.iter().enumerate() {
            let expect = axpy(&s.f, times[i], &r.e1);
            assert!(u.f.sub(&expect).max_abs() < 1e-14);
        }
    }
}
