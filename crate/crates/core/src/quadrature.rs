//! One-dimensional quadrature: adaptive Gauss-Kronrod (7/15) for vector
//! valued integrands and fixed Gauss-Legendre rules.

use std::f64::consts::PI;

use crate::error::{GsqgError, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Settings for [`adaptive`].
#[derive(Clone, Copy, Debug)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-12,
            rel: 0.0,
            max_intervals: 4000,
        }
    }
}

impl Tolerance {
    pub fn absolute(abs: f64) -> Self {
        Self {
            abs,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct Estimate {
    pub value: Vec<f64>,
    pub error: f64,
    pub intervals: usize,
}

struct Panel {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: f64,
}

fn gk15<F: Fn(f64, &mut [f64])>(f: &F, a: f64, b: f64, dim: usize, buf: &mut [f64]) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kron = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];
    f(c, buf);
    for d in 0..dim {
        kron[d] = WGK[7] * buf[d];
        gauss[d] = WG[3] * buf[d];
    }
    for i in 0..7 {
        let dx = h * XGK[i];
        for x in [c - dx, c + dx] {
            f(x, buf);
            for d in 0..dim {
                kron[d] += WGK[i] * buf[d];
                if i % 2 == 1 {
                    gauss[d] += WG[i / 2] * buf[d];
                }
            }
        }
    }
    let mut error: f64 = 0.0;
    for d in 0..dim {
        kron[d] *= h;
        gauss[d] *= h;
        error = error.max((kron[d] - gauss[d]).abs());
    }
    Panel {
        a,
        b,
        value: kron,
        error,
    }
}

/// Globally adaptive GK15 over `[a, b]` split first at `breaks`. The integrand
/// writes `dim` components into its output slice.
pub fn adaptive<F: Fn(f64, &mut [f64])>(
    f: F,
    dim: usize,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<Estimate> {
    let mut pts = vec![a];
    pts.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    pts.push(b);
    pts.sort_by(f64::total_cmp);
    let mut buf = vec![0.0; dim];
    let mut panels: Vec<Panel> = pts
        .windows(2)
        .map(|w| gk15(&f, w[0], w[1], dim, &mut buf))
        .collect();
    loop {
        let mut total = vec![0.0; dim];
        let mut err = 0.0;
        let mut worst = 0;
        for (i, p) in panels.iter().enumerate() {
            total.iter_mut().zip(&p.value).for_each(|(t, v)| *t += v);
            err += p.error;
            if p.error > panels[worst].error {
                worst = i;
            }
        }
        let scale = total.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let target = tol.abs.max(tol.rel * scale);
        if err <= target {
            return Ok(Estimate {
                value: total,
                error: err,
                intervals: panels.len(),
            });
        }
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if panels.len() + 2 > tol.max_intervals || mid <= p.a || mid >= p.b {
            return Err(GsqgError::QuadratureFailure {
                achieved: err,
                requested: target,
            });
        }
        panels.push(gk15(&f, p.a, mid, dim, &mut buf));
        panels.push(gk15(&f, mid, p.b, dim, &mut buf));
    }
}

/// Scalar convenience wrapper over [`adaptive`].
pub fn adaptive_scalar(
    f: impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    breaks: &[f64],
    tol: Tolerance,
) -> Result<(f64, f64)> {
    let est = adaptive(|x, out: &mut [f64]| out[0] = f(x), 1, a, b, breaks, tol)?;
    Ok((est.value[0], est.error))
}

/// Integral over `(0, 1/2]` of an integrand with an algebraic singularity at
/// the origin, using the substitution `x = v^q / 2` with `v in (0, 1]`.
pub fn graded_half<F: Fn(f64, &mut [f64])>(
    f: F,
    dim: usize,
    grading: u32,
    tol: Tolerance,
) -> Result<Estimate> {
    let q = grading as i32;
    let qf = grading as f64;
    adaptive(
        |v, out: &mut [f64]| {
            let x = 0.5 * v.powi(q);
            let jac = 0.5 * qf * v.powi(q - 1);
            f(x, out);
            out.iter_mut().for_each(|o| *o *= jac);
        },
        dim,
        0.0,
        1.0,
        &[],
        tol,
    )
}

/// Grading exponent for integrands behaving like `|x|^{1 - beta}` at 0.
pub fn grading_for(beta: f64) -> u32 {
    (3.0 / (2.0 - beta)).ceil().max(2.0) as u32
}

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..(n + 1) / 2 {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(c + h * x))
            .sum::<f64>()
            * h
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
