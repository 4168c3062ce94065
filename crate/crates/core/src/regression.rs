//! Epsilon-insensitive support vector regression with an RBF kernel, plus an
//! ordinary least-squares line used as a baseline.
//!
//! The SVR dual is solved over the combined coefficients
//! `beta_i = alpha_i - alpha_i*`:
//!
//! ```text
//! minimize   W(beta) = 1/2 beta' K beta - y' beta + eps * sum |beta_i|
//! subject to sum beta_i = 0,  -C <= beta_i <= C
//! ```
//!
//! Each SMO step moves a pair `(i, j)` along `beta_i += t, beta_j -= t`,
//! which keeps the equality constraint. Along that line `W` is a convex
//! piecewise quadratic in `t`, minimized exactly.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Kernel width, either fixed or derived from the training inputs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Gamma {
    /// `1 / (n_features * var(x))`.
    Scale,
    Value(f64),
}

impl Gamma {
    pub fn resolve(self, xs: &[f64]) -> f64 {
        match self {
            Gamma::Value(g) => g,
            Gamma::Scale => {
                let n = xs.len() as f64;
                let mean = xs.iter().sum::<f64>() / n;
                let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
                if var > 0.0 {
                    1.0 / var
                } else {
                    1.0
                }
            }
        }
    }
}

impl FromStr for Gamma {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("scale") {
            return Ok(Gamma::Scale);
        }
        match s.parse::<f64>() {
            Ok(g) if g > 0.0 && g.is_finite() => Ok(Gamma::Value(g)),
            _ => Err(format!("gamma must be \"scale\" or a positive number, got {s:?}")),
        }
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Gamma::Scale => f.write_str("scale"),
            Gamma::Value(g) => write!(f, "{g}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SvrHyperparams {
    /// Box constraint.
    pub c: f64,
    /// Half-width of the insensitive tube, in target units.
    pub epsilon_tube: f64,
    pub gamma: Gamma,
    /// Largest KKT violation accepted at termination.
    pub tolerance: f64,
    pub max_passes: usize,
}

impl Default for SvrHyperparams {
    fn default() -> Self {
        Self {
            c: 1.0,
            epsilon_tube: 0.01,
            gamma: Gamma::Scale,
            tolerance: 1e-3,
            max_passes: 200,
        }
    }
}

impl SvrHyperparams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::config(format!("SVR C must be positive, got {}", self.c)));
        }
        if !(self.epsilon_tube >= 0.0 && self.epsilon_tube.is_finite()) {
            return Err(Error::config(format!(
                "SVR epsilon tube must be non-negative, got {}",
                self.epsilon_tube
            )));
        }
        if let Gamma::Value(g) = self.gamma {
            if !(g > 0.0 && g.is_finite()) {
                return Err(Error::config(format!("SVR gamma must be positive, got {g}")));
            }
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::config("SVR tolerance must be positive"));
        }
        if self.max_passes == 0 {
            return Err(Error::config("SVR max_passes must be at least 1"));
        }
        Ok(())
    }
}

/// `exp(-gamma * ||x - y||^2)`.
pub fn rbf_kernel(x: &[f64], y: &[f64], gamma: f64) -> f64 {
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    (-gamma * d2).exp()
}

#[inline]
fn rbf_scalar(x: f64, y: f64, gamma: f64) -> f64 {
    (-gamma * (x - y) * (x - y)).exp()
}

/// Fitted SVR: `f(x) = sum_i coeff_i k(s_i, x) + bias`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SvrModel {
    pub gamma: f64,
    pub bias: f64,
    pub support_inputs: Vec<f64>,
    pub dual_coeffs: Vec<f64>,
    pub converged: bool,
}

impl SvrModel {
    pub fn predict(&self, x: f64) -> f64 {
        predict_svr(self, x)
    }
}

pub fn predict_svr(model: &SvrModel, x: f64) -> f64 {
    model
        .support_inputs
        .iter()
        .zip(&model.dual_coeffs)
        .map(|(&s, &a)| a * rbf_scalar(s, x, model.gamma))
        .sum::<f64>()
        + model.bias
}

/// Result of the dual solver, one coefficient per training point.
#[derive(Clone, Debug)]
pub struct DualSolution {
    pub coeffs: Vec<f64>,
    pub bias: f64,
    /// `W(beta)` in the minimization form above.
    pub objective: f64,
    /// Largest remaining KKT violation.
    pub violation: f64,
    pub passes: usize,
    pub converged: bool,
}

/// Feasible interval for the bias implied by point `i`'s KKT conditions.
fn bias_bounds(beta: f64, grad: f64, c: f64, eps: f64) -> (f64, f64) {
    let below = -grad - eps;
    let above = -grad + eps;
    if beta >= c {
        (f64::NEG_INFINITY, below)
    } else if beta > 0.0 {
        (below, below)
    } else if beta == 0.0 {
        (below, above)
    } else if beta > -c {
        (above, above)
    } else {
        (above, f64::INFINITY)
    }
}

struct Smo<'a> {
    kernel: &'a [f64],
    n: usize,
    c: f64,
    eps: f64,
    beta: Vec<f64>,
    grad: Vec<f64>,
}

impl Smo<'_> {
    fn k(&self, i: usize, j: usize) -> f64 {
        self.kernel[i * self.n + j]
    }

    fn bounds(&self, i: usize) -> (f64, f64) {
        bias_bounds(self.beta[i], self.grad[i], self.c, self.eps)
    }

    /// Index of the largest lower bound and of the smallest upper bound.
    fn extremes(&self) -> (usize, f64, usize, f64) {
        let (mut lo_idx, mut lo) = (0, f64::NEG_INFINITY);
        let (mut hi_idx, mut hi) = (0, f64::INFINITY);
        for i in 0..self.n {
            let (l, h) = self.bounds(i);
            if l > lo {
                lo = l;
                lo_idx = i;
            }
            if h < hi {
                hi = h;
                hi_idx = i;
            }
        }
        (lo_idx, lo, hi_idx, hi)
    }

    /// Exact minimizer of W along `beta_i += t, beta_j -= t`.
    fn pair_step(&self, i: usize, j: usize) -> f64 {
        let (bi, bj, c, eps) = (self.beta[i], self.beta[j], self.c, self.eps);
        let eta = self.k(i, i) + self.k(j, j) - 2.0 * self.k(i, j);
        let g = self.grad[i] - self.grad[j];
        let t_lo = (-c - bi).max(bj - c);
        let t_hi = (c - bi).min(bj + c);
        let phi = |t: f64| 0.5 * eta * t * t + g * t + eps * ((bi + t).abs() + (bj - t).abs());

        let mut knots = vec![t_lo, t_hi];
        for b in [-bi, bj] {
            if b > t_lo && b < t_hi {
                knots.push(b);
            }
        }
        knots.sort_by(f64::total_cmp);

        let mut best_t = 0.0_f64;
        let mut best = phi(0.0);
        let mut consider = |t: f64| {
            let v = phi(t);
            if v < best || (v == best && t.abs() < best_t.abs()) {
                best = v;
                best_t = t;
            }
        };
        for w in knots.windows(2) {
            let (a, b) = (w[0], w[1]);
            consider(a);
            consider(b);
            if eta > 1e-12 && b > a {
                let mid = 0.5 * (a + b);
                let si = (bi + mid).signum();
                let sj = (bj - mid).signum();
                let t = (-(g + eps * (si - sj)) / eta).clamp(a, b);
                consider(t);
            }
        }
        best_t
    }

    fn apply(&mut self, i: usize, j: usize, t: f64) {
        let snap = |v: f64, c: f64| {
            if (v - c).abs() <= 1e-12 * c {
                c
            } else if (v + c).abs() <= 1e-12 * c {
                -c
            } else {
                v
            }
        };
        self.beta[i] = snap(self.beta[i] + t, self.c);
        self.beta[j] = snap(self.beta[j] - t, self.c);
        for k in 0..self.n {
            self.grad[k] += t * (self.kernel[k * self.n + i] - self.kernel[k * self.n + j]);
        }
    }

    fn objective(&self, ys: &[f64]) -> f64 {
        // grad_i + y_i = (K beta)_i
        let quad: f64 = self.beta.iter().zip(&self.grad).zip(ys).map(|((b, g), y)| b * (g + y)).sum();
        0.5 * quad - ys.iter().zip(&self.beta).map(|(y, b)| y * b).sum::<f64>()
            + self.eps * self.beta.iter().map(|b| b.abs()).sum::<f64>()
    }

    fn bias(&self) -> f64 {
        let free: Vec<f64> = (0..self.n)
            .filter(|&i| self.beta[i] != 0.0 && self.beta[i].abs() < self.c)
            .map(|i| -self.grad[i] - self.eps * self.beta[i].signum())
            .collect();
        if !free.is_empty() {
            return free.iter().sum::<f64>() / free.len() as f64;
        }
        let (_, lo, _, hi) = self.extremes();
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => 0.5 * (lo + hi),
            (true, false) => lo,
            (false, true) => hi,
            (false, false) => 0.0,
        }
    }
}

/// Solves the epsilon-SVR dual for a precomputed `n x n` kernel matrix.
///
/// Each pass walks the points in index order; a point whose KKT conditions
/// are violated by more than `tolerance` is paired with the partner that
/// violates most against it. The solve ends after a pass with no violating
/// point, or after `max_passes`.
pub fn solve_svr_dual(
    kernel: &[f64],
    ys: &[f64],
    c: f64,
    eps: f64,
    tolerance: f64,
    max_passes: usize,
) -> DualSolution {
    let n = ys.len();
    assert_eq!(kernel.len(), n * n, "kernel must be n x n");
    let mut smo = Smo {
        kernel,
        n,
        c,
        eps,
        beta: vec![0.0; n],
        grad: ys.iter().map(|y| -y).collect(),
    };

    let mut passes = 0;
    let mut converged = false;
    while passes < max_passes {
        passes += 1;
        let mut moved = false;
        for i in 0..n {
            let (lo_idx, lo_max, hi_idx, hi_min) = smo.extremes();
            if lo_max - hi_min <= tolerance {
                break;
            }
            let (lo_i, hi_i) = smo.bounds(i);
            let up = lo_i - hi_min;
            let down = lo_max - hi_i;
            let partner = if up >= down && up > tolerance {
                hi_idx
            } else if down > tolerance {
                lo_idx
            } else {
                continue;
            };
            if partner == i {
                continue;
            }
            let t = smo.pair_step(i, partner);
            if t != 0.0 {
                smo.apply(i, partner, t);
                moved = true;
            }
        }
        let (_, lo, _, hi) = smo.extremes();
        if lo - hi <= tolerance {
            converged = true;
            break;
        }
        if !moved {
            break;
        }
    }

    let (_, lo, _, hi) = smo.extremes();
    DualSolution {
        bias: smo.bias(),
        objective: smo.objective(ys),
        violation: (lo - hi).max(0.0),
        passes,
        converged,
        coeffs: smo.beta,
    }
}

/// Fits an epsilon-SVR of `ys` on the scalar inputs `xs`.
///
/// An unconverged solve still yields a usable model with `converged = false`.
pub fn fit_svr(xs: &[f64], ys: &[f64], hp: &SvrHyperparams) -> Result<SvrModel> {
    hp.validate()?;
    if xs.len() != ys.len() {
        return Err(Error::input(format!("{} inputs but {} targets", xs.len(), ys.len())));
    }
    if xs.len() < 2 {
        return Err(Error::input("SVR needs at least 2 training pairs"));
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::input("SVR training data must be finite"));
    }
    let gamma = hp.gamma.resolve(xs);
    let n = xs.len();
    let mut kernel = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            kernel[i * n + j] = rbf_scalar(xs[i], xs[j], gamma);
        }
    }
    let sol = solve_svr_dual(&kernel, ys, hp.c, hp.epsilon_tube, hp.tolerance, hp.max_passes);
    if !sol.converged {
        log::warn!(
            "SVR did not reach tolerance {} within {} passes (violation {:.3e})",
            hp.tolerance,
            hp.max_passes,
            sol.violation
        );
    }
    let (support_inputs, dual_coeffs) = xs
        .iter()
        .zip(&sol.coeffs)
        .filter(|(_, &b)| b != 0.0)
        .map(|(&x, &b)| (x, b))
        .unzip();
    Ok(SvrModel {
        gamma,
        bias: sol.bias,
        support_inputs,
        dual_coeffs,
        converged: sol.converged,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub slope: f64,
    pub intercept: f64,
}

impl LinearModel {
    pub fn predict(&self, x: f64) -> f64 {
        predict_linear(self, x)
    }
}

/// Ordinary least squares line through `(xs, ys)`.
pub fn fit_linear(xs: &[f64], ys: &[f64]) -> Result<LinearModel> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::input("linear fit needs at least 2 aligned points"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all inputs are identical".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let model = LinearModel {
        slope,
        intercept: my - slope * mx,
    };
    if model.slope.is_finite() && model.intercept.is_finite() {
        Ok(model)
    } else {
        Err(Error::Numeric("linear fit"))
    }
}

pub fn predict_linear(model: &LinearModel, x: f64) -> f64 {
    model.slope * x + model.intercept
}
