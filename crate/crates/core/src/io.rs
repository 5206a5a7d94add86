//! Initial curves, run configuration and output files.
//!
//! Formats:
//! * Fourier curve file: header `# gsqg-fourier v1`, then `k re im` lines
//!   (complex mode `k` of `x + i y` in the parameter `theta in [0, 1)`).
//! * Snapshot: JSON with `"schema": 1`, coefficients as `[re, im]` pairs and
//!   `Gamma` as row-major real samples.
//! * Diagnostics: CSV with columns `t, L, dLdt_measured, dLdt_formula,
//!   min_gamma, max_gamma, speed_std, rho_hat, drift_fg, drift_gh, lambda0`.
//! * Plot data: CSV `t, j, x, y` with the curve samples at snapshot times.

use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::arc_chord::ArcChordOptions;
use crate::curve::{circle, ellipse, reparameterize_uniform, FourierCurve};
use crate::error::{GsqgError, Result};
use crate::evolution::{DiagnosticsRow, EvolutionConfig, Filter, FrontState};
use crate::field::{mode, BiPeriodicField, FieldKind, PeriodicField, C64};
use crate::norms::strip_radius_estimate;

pub const FOURIER_HEADER: &str = "# gsqg-fourier v1";
pub const SNAPSHOT_SCHEMA: u32 = 1;
pub const DIAGNOSTICS_COLUMNS: [&str; 11] = [
    "t",
    "L",
    "dLdt_measured",
    "dLdt_formula",
    "min_gamma",
    "max_gamma",
    "speed_std",
    "rho_hat",
    "drift_fg",
    "drift_gh",
    "lambda0",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum InitialCurve {
    Circle { r: f64 },
    Ellipse { a: f64, b: f64 },
    File { path: PathBuf },
}

impl fmt::Display for InitialCurve {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Circle { r } => write!(f, "circle:{r}"),
            Self::Ellipse { a, b } => write!(f, "ellipse:{a},{b}"),
            Self::File { path } => write!(f, "file:{}", path.display()),
        }
    }
}

impl FromStr for InitialCurve {
    type Err = GsqgError;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| GsqgError::invalid(format!("initial curve `{s}`: expected kind:args")))?;
        let nums = |n: usize| -> Result<Vec<f64>> {
            let v: Vec<f64> = rest
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| GsqgError::invalid(format!("initial curve `{s}`: {e}")))?;
            if v.len() != n {
                return Err(GsqgError::invalid(format!("initial curve `{s}`: expected {n} numbers")));
            }
            Ok(v)
        };
        match kind {
            "circle" => Ok(Self::Circle { r: nums(1)?[0] }),
            "ellipse" => {
                let v = nums(2)?;
                Ok(Self::Ellipse { a: v[0], b: v[1] })
            }
            "file" => Ok(Self::File { path: rest.into() }),
            _ => Err(GsqgError::invalid(format!("unknown initial curve kind `{kind}`"))),
        }
    }
}

impl TryFrom<String> for InitialCurve {
    type Error = GsqgError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<InitialCurve> for String {
    fn from(c: InitialCurve) -> Self {
        c.to_string()
    }
}

/// `off` or `exp:order,alpha`.
pub fn parse_filter(s: &str) -> Result<Filter> {
    if s == "off" {
        return Ok(Filter::Off);
    }
    let rest = s
        .strip_prefix("exp:")
        .ok_or_else(|| GsqgError::invalid(format!("filter `{s}`: expected off or exp:p,alpha")))?;
    let (p, a) = rest
        .split_once(',')
        .ok_or_else(|| GsqgError::invalid(format!("filter `{s}`: expected exp:p,alpha")))?;
    let parse = |x: &str| {
        x.trim()
            .parse::<f64>()
            .map_err(|e| GsqgError::invalid(format!("filter `{s}`: {e}")))
    };
    Ok(Filter::Exp {
        order: parse(p)?,
        alpha: parse(a)?,
    })
}

pub fn read_fourier_file(path: &Path) -> Result<FourierCurve> {
    let text = fs::read_to_string(path).map_err(|e| GsqgError::io(path, e))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(FOURIER_HEADER) {
        return Err(GsqgError::Format {
            path: path.into(),
            reason: format!("missing header `{FOURIER_HEADER}`"),
        });
    }
    let mut modes = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |reason: String| GsqgError::Format {
            path: path.into(),
            reason: format!("line {}: {reason}", i + 2),
        };
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(bad("expected `k re im`".into()));
        }
        let k: i64 = parts[0].parse().map_err(|e| bad(format!("{e}")))?;
        let re: f64 = parts[1].parse().map_err(|e| bad(format!("{e}")))?;
        let im: f64 = parts[2].parse().map_err(|e| bad(format!("{e}")))?;
        modes.push((k, C64::new(re, im)));
    }
    if modes.is_empty() {
        return Err(GsqgError::Format {
            path: path.into(),
            reason: "no modes".into(),
        });
    }
    Ok(FourierCurve::new(modes))
}

pub fn write_fourier_file(curve: &FourierCurve, path: &Path) -> Result<()> {
    let mut out = String::from(FOURIER_HEADER);
    out.push('\n');
    for (k, c) in &curve.modes {
        out.push_str(&format!("{k} {:?} {:?}\n", c.re, c.im));
    }
    fs::write(path, out).map_err(|e| GsqgError::io(path, e))
}

/// Uniform-speed state for the requested curve with `Gamma` on an
/// `n x 2n` grid.
pub fn make_initial(spec: &InitialCurve, n: usize, opts: ArcChordOptions) -> Result<FrontState> {
    let z = match spec {
        InitialCurve::Circle { r } => circle(*r, n)?,
        InitialCurve::Ellipse { a, b } => ellipse(*a, *b, n)?,
        InitialCurve::File { path } => {
            let curve = read_fourier_file(path)?;
            let z = reparameterize_uniform(&curve, n)?;
            let amps = z.mode_amplitudes();
            let top = amps.iter().cloned().fold(0.0, f64::max);
            if amps[n / 2 - 1] > 1e-10 * top {
                log::warn!("initial curve is not resolved at n = {n}: tail amplitude {:e}", amps[n / 2 - 1] / top);
            }
            z
        }
    };
    FrontState::from_curve(&z, 2 * n, opts)
}

fn pairs(u: &PeriodicField) -> Vec<[f64; 2]> {
    u.coeffs().iter().map(|c| [c.re, c.im]).collect()
}

fn unpairs(v: &[[f64; 2]], kind: FieldKind) -> Result<PeriodicField> {
    PeriodicField::from_coeffs(v.iter().map(|p| C64::new(p[0], p[1])).collect(), kind)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotDiagnostics {
    pub min_gamma: f64,
    pub max_gamma: f64,
    pub speed_std: f64,
    pub rho_hat: Option<f64>,
    pub drift_fg: f64,
    pub drift_gh: f64,
    pub lambda0: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub schema: u32,
    pub t: f64,
    pub length: f64,
    pub beta: f64,
    pub n: usize,
    pub n_star: usize,
    pub f: Vec<[f64; 2]>,
    pub g: Vec<[f64; 2]>,
    pub h: Vec<[f64; 2]>,
    pub gamma: Vec<f64>,
    pub diagnostics: SnapshotDiagnostics,
}

impl Snapshot {
    /// `lambda0` is `lambda(0)` from the velocity at this state.
    pub fn from_state(s: &FrontState, beta: f64, lambda0: f64) -> Self {
        Self {
            schema: SNAPSHOT_SCHEMA,
            t: s.time,
            length: s.length,
            beta,
            n: s.n(),
            n_star: s.gamma.n_star(),
            f: pairs(&s.f),
            g: pairs(&s.g),
            h: pairs(&s.h),
            gamma: s.gamma.gamma.data().iter().map(|c| c.re).collect(),
            diagnostics: SnapshotDiagnostics {
                min_gamma: s.min_gamma(),
                max_gamma: s.max_gamma(),
                speed_std: s.speed_std(),
                rho_hat: strip_radius_estimate(&s.f).rho_hat,
                drift_fg: s.drift_fg(),
                drift_gh: s.drift_gh(),
                lambda0,
            },
        }
    }

    pub fn to_state(&self) -> Result<FrontState> {
        if self.schema != SNAPSHOT_SCHEMA {
            return Err(GsqgError::invalid(format!("unsupported snapshot schema {}", self.schema)));
        }
        let gamma = BiPeriodicField::from_data(
            self.n,
            self.n_star,
            self.gamma.iter().map(|&x| C64::new(x, 0.0)).collect(),
        )?;
        let u = crate::norms::StateVector {
            f: unpairs(&self.f, FieldKind::Vector)?,
            g: unpairs(&self.g, FieldKind::Vector)?,
            h: unpairs(&self.h, FieldKind::Vector)?,
            gamma,
        };
        FrontState::from_vector(&u, self.t)
    }
}

pub fn write_snapshot(s: &Snapshot, dir: &Path, index: usize) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| GsqgError::io(dir, e))?;
    let path = dir.join(format!("snapshot_{index:05}.json"));
    let file = fs::File::create(&path).map_err(|e| GsqgError::io(&path, e))?;
    serde_json::to_writer(BufWriter::new(file), s).map_err(|e| GsqgError::Format {
        path: path.clone(),
        reason: e.to_string(),
    })?;
    Ok(path)
}

pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    let text = fs::read_to_string(path).map_err(|e| GsqgError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| GsqgError::Format {
        path: path.into(),
        reason: e.to_string(),
    })
}

fn csv_error(path: &Path, e: csv::Error) -> GsqgError {
    GsqgError::Format {
        path: path.into(),
        reason: e.to_string(),
    }
}

pub fn write_diagnostics(rows: &[DiagnosticsRow], dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| GsqgError::io(dir, e))?;
    let path = dir.join("diagnostics.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
    w.write_record(DIAGNOSTICS_COLUMNS).map_err(|e| csv_error(&path, e))?;
    for r in rows {
        let vals = [
            r.t,
            r.length,
            r.dldt_measured,
            r.dldt_formula,
            r.min_gamma,
            r.max_gamma,
            r.speed_std,
            r.rho_hat,
            r.drift_fg,
            r.drift_gh,
            r.lambda0,
        ];
        w.write_record(vals.iter().map(|v| v.to_string()))
            .map_err(|e| csv_error(&path, e))?;
    }
    w.flush().map_err(|e| GsqgError::io(&path, e))?;
    Ok(path)
}

/// Curve samples `(t, j, x, y)` for every stored snapshot.
pub fn emit_plot_data(trajectory: &[(f64, PeriodicField)], dir: &Path) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| GsqgError::io(dir, e))?;
    let path = dir.join("curve_points.csv");
    let file = fs::File::create(&path).map_err(|e| GsqgError::io(&path, e))?;
    let mut w = BufWriter::new(file);
    let io = |e| GsqgError::io(&path, e);
    writeln!(w, "t,j,x,y").map_err(io)?;
    for (t, z) in trajectory {
        for (j, c) in z.samples().iter().enumerate() {
            writeln!(w, "{t},{j},{},{}", c.re, c.im).map_err(io)?;
        }
    }
    w.flush().map_err(io)?;
    Ok(path)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Evolve,
    Picard,
    Verify,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub evolution: EvolutionConfig,
    pub initial: InitialCurve,
    pub output_dir: PathBuf,
    pub snapshot_every: usize,
    pub mode: Mode,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            evolution: EvolutionConfig::default(),
            initial: InitialCurve::Ellipse { a: 1.0, b: 0.6 },
            output_dir: PathBuf::from("gsqg-out"),
            snapshot_every: 10,
            mode: Mode::Evolve,
            seed: 0,
        }
    }
}

/// A TOML config file; every key is optional.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub beta: Option<f64>,
    pub n: Option<usize>,
    pub dt: Option<f64>,
    pub t_final: Option<f64>,
    pub initial: Option<InitialCurve>,
    pub out: Option<PathBuf>,
    pub mode: Option<Mode>,
    pub snapshot_every: Option<usize>,
    pub filter: Option<String>,
    pub seed: Option<u64>,
    pub exact_constant: Option<bool>,
    pub resync_every: Option<usize>,
    pub arc_chord_stop: Option<f64>,
    pub quadrature_tol: Option<f64>,
    pub picard: Option<crate::evolution::PicardConfig>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| GsqgError::io(path, e))?;
        toml::from_str(&text).map_err(|e| GsqgError::Format {
            path: path.into(),
            reason: e.to_string(),
        })
    }

    /// Layer `self` over `base`; `Some` values win.
    pub fn apply(&self, base: RunConfig) -> Result<RunConfig> {
        let mut c = base;
        let e = &mut c.evolution;
        if let Some(v) = self.beta {
            e.beta = v;
        }
        if let Some(v) = self.n {
            e.n_points = v;
        }
        if let Some(v) = self.dt {
            e.dt = v;
        }
        if let Some(v) = self.t_final {
            e.t_final = v;
        }
        if let Some(v) = &self.filter {
            e.filter = parse_filter(v)?;
        }
        if let Some(v) = self.exact_constant {
            e.exact_constant = v;
        }
        if let Some(v) = self.resync_every {
            e.resync_every = v;
        }
        if let Some(v) = self.arc_chord_stop {
            e.arc_chord_stop = v;
        }
        if let Some(v) = self.quadrature_tol {
            e.quadrature_tol = v;
        }
        if let Some(v) = self.picard {
            e.picard = v;
        }
        if let Some(v) = &self.initial {
            c.initial = v.clone();
        }
        if let Some(v) = &self.out {
            c.output_dir = v.clone();
        }
        if let Some(v) = self.mode {
            c.mode = v;
        }
        if let Some(v) = self.snapshot_every {
            c.snapshot_every = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        Ok(c)
    }
}

/// Curve modes of a sampled field, in a form accepted by [`write_fourier_file`].
pub fn fourier_curve_of(z: &PeriodicField) -> FourierCurve {
    let n = z.n();
    FourierCurve::new(
        z.coeffs()
            .iter()
            .enumerate()
            .map(|(j, &c)| (mode(j, n), c))
            .collect(),
    )
}
