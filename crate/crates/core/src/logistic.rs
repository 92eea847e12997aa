//! Binary logistic regression fitted by damped Newton iterations.
//!
//! The objective is the negative log-likelihood plus an L2 penalty on the
//! coefficients (never on the intercept):
//!
//! ```text
//! L(b) = sum_i softplus(z_i) - y_i z_i + lambda/2 * |b_1..b_d|^2,   z_i = b_0 + b . x_i
//! ```
//!
//! Each iteration solves the Newton system by Cholesky factorization and
//! halves the step until the objective does not increase. Once the expected
//! decrease is below the rounding noise of the objective, a full step is
//! taken whenever it shrinks the gradient.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Dense row-major matrix of observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Contract(format!(
                "{} values for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(Error::Contract(format!(
                    "row {i} has {} columns, expected {cols}",
                    r.len()
                )));
            }
            data.extend_from_slice(r);
        }
        Ok(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// L2 penalty on the coefficients.
    pub lambda: f64,
    /// Stop once the gradient norm is at most this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            lambda: 1e-6,
            tol: 1e-8,
            max_iter: 100,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(Error::Config(format!(
                "lambda must be >= 0, got {}",
                self.lambda
            )));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

/// How the solver stopped. Anything but `Converged` is a warning: the
/// parameters are still the best found.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitStatus {
    Converged,
    /// Ran out of iterations before the gradient met the tolerance.
    MaxIterations,
    /// No step length decreased the objective any further.
    Stalled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub iterations: usize,
    pub gradient_norm: f64,
    pub lambda: f64,
    pub status: FitStatus,
    /// Objective value at the start and after every accepted step.
    pub objective_trace: Vec<f64>,
}

impl LogisticModel {
    /// A model with the given parameters and no fit history.
    pub fn from_parameters(intercept: f64, coefficients: Vec<f64>) -> Self {
        LogisticModel {
            intercept,
            coefficients,
            iterations: 0,
            gradient_norm: f64::NAN,
            lambda: 0.0,
            status: FitStatus::Converged,
            objective_trace: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }

    /// `[intercept, coefficients...]`
    pub fn parameters(&self) -> Vec<f64> {
        let mut p = Vec::with_capacity(self.dim() + 1);
        p.push(self.intercept);
        p.extend_from_slice(&self.coefficients);
        p
    }

    pub fn linear_score(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::Contract(format!(
                "input has dimension {}, model expects {}",
                x.len(),
                self.dim()
            )));
        }
        Ok(self.intercept + dot(&self.coefficients, x))
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        self.linear_score(x).map(sigmoid)
    }
}

/// Largest f64 below one.
const ONE_MINUS: f64 = 1.0 - f64::EPSILON / 2.0;

/// Logistic function, kept strictly inside (0, 1) for every finite input.
pub fn sigmoid(z: f64) -> f64 {
    if z < -500.0 {
        return f64::MIN_POSITIVE;
    }
    if z > 500.0 {
        return ONE_MINUS;
    }
    let p = if z >= 0.0 {
        1.0 / (1.0 + libm::exp(-z))
    } else {
        let e = libm::exp(z);
        e / (1.0 + e)
    };
    p.clamp(f64::MIN_POSITIVE, ONE_MINUS)
}

/// log(1 + e^z) without overflow.
fn softplus(z: f64) -> f64 {
    z.max(0.0) + libm::log1p(libm::exp(-z.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

fn check_inputs(x: &Matrix, y: &[bool]) -> Result<()> {
    if x.rows() != y.len() {
        return Err(Error::Contract(format!(
            "{} rows but {} labels",
            x.rows(),
            y.len()
        )));
    }
    if x.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("design matrix has non-finite entries".into()));
    }
    Ok(())
}

fn check_params(params: &[f64], x: &Matrix) -> Result<()> {
    if params.len() != x.cols() + 1 {
        return Err(Error::Contract(format!(
            "{} parameters for {} columns plus intercept",
            params.len(),
            x.cols()
        )));
    }
    if params.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("parameters must be finite".into()));
    }
    Ok(())
}

fn linear(params: &[f64], row: &[f64]) -> f64 {
    params[0] + dot(&params[1..], row)
}

fn objective_unchecked(params: &[f64], x: &Matrix, y: &[bool], lambda: f64) -> f64 {
    let nll: f64 = (0..x.rows())
        .map(|i| {
            let z = linear(params, x.row(i));
            if y[i] {
                softplus(-z)
            } else {
                softplus(z)
            }
        })
        .sum();
    nll + 0.5 * lambda * params[1..].iter().map(|b| b * b).sum::<f64>()
}

fn gradient_unchecked(params: &[f64], x: &Matrix, y: &[bool], lambda: f64) -> Vec<f64> {
    let mut g = vec![0.0; params.len()];
    for (i, &yi) in y.iter().enumerate() {
        let row = x.row(i);
        let z = linear(params, row);
        // p - 1 computed as -sigmoid(-z) to keep precision for confident positives
        let r = if yi { -sigmoid(-z) } else { sigmoid(z) };
        g[0] += r;
        for (gj, xj) in g[1..].iter_mut().zip(row) {
            *gj += r * xj;
        }
    }
    for (gj, b) in g[1..].iter_mut().zip(&params[1..]) {
        *gj += lambda * b;
    }
    g
}

/// Penalized negative log-likelihood at `params = [intercept, coefficients...]`.
pub fn objective(params: &[f64], x: &Matrix, y: &[bool], lambda: f64) -> Result<f64> {
    check_inputs(x, y)?;
    check_params(params, x)?;
    Ok(objective_unchecked(params, x, y, lambda))
}

/// Gradient of [`objective`] with respect to `params`.
pub fn gradient(params: &[f64], x: &Matrix, y: &[bool], lambda: f64) -> Result<Vec<f64>> {
    check_inputs(x, y)?;
    check_params(params, x)?;
    Ok(gradient_unchecked(params, x, y, lambda))
}

fn hessian(params: &[f64], x: &Matrix, lambda: f64) -> Vec<f64> {
    let m = params.len();
    let mut h = vec![0.0; m * m];
    let mut aug = vec![1.0; m];
    for i in 0..x.rows() {
        let row = x.row(i);
        aug[1..].copy_from_slice(row);
        let p = sigmoid(linear(params, row));
        let w = p * (1.0 - p);
        for a in 0..m {
            let wa = w * aug[a];
            for b in 0..=a {
                h[a * m + b] += wa * aug[b];
            }
        }
    }
    for a in 0..m {
        for b in 0..a {
            h[b * m + a] = h[a * m + b];
        }
    }
    for j in 1..m {
        h[j * m + j] += lambda;
    }
    h
}

/// Solves `h x = g` for symmetric positive definite `h` in place; returns
/// `None` when a pivot is numerically zero.
fn cholesky_solve(h: &[f64], g: &[f64]) -> Option<Vec<f64>> {
    let m = g.len();
    let scale = (0..m).map(|i| h[i * m + i].abs()).fold(0.0, f64::max);
    let floor = scale * f64::EPSILON * m as f64;
    let mut l = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..=i {
            let s = h[i * m + j] - (0..j).map(|k| l[i * m + k] * l[j * m + k]).sum::<f64>();
            if i == j {
                if s.is_nan() || s <= floor {
                    return None;
                }
                l[i * m + i] = libm::sqrt(s);
            } else {
                l[i * m + j] = s / l[j * m + j];
            }
        }
    }
    let mut z = vec![0.0; m];
    for i in 0..m {
        z[i] = (g[i] - (0..i).map(|k| l[i * m + k] * z[k]).sum::<f64>()) / l[i * m + i];
    }
    let mut out = vec![0.0; m];
    for i in (0..m).rev() {
        out[i] = (z[i] - (i + 1..m).map(|k| l[k * m + i] * out[k]).sum::<f64>()) / l[i * m + i];
    }
    out.iter().all(|v| v.is_finite()).then_some(out)
}

const MAX_HALVINGS: usize = 60;
/// Relative size of objective changes treated as rounding noise.
pub const ROUNDING_SLACK: f64 = 1e-12;

/// Fits from the all-zero starting point.
pub fn fit(x: &Matrix, y: &[bool], cfg: &SolverConfig) -> Result<LogisticModel> {
    fit_from(x, y, cfg, &vec![0.0; x.cols() + 1])
}

/// Fits starting from `start = [intercept, coefficients...]`.
pub fn fit_from(
    x: &Matrix,
    y: &[bool],
    cfg: &SolverConfig,
    start: &[f64],
) -> Result<LogisticModel> {
    cfg.validate()?;
    check_inputs(x, y)?;
    check_params(start, x)?;
    if y.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "need at least 2 observations, got {}",
            y.len()
        )));
    }
    let positives = y.iter().filter(|&&v| v).count();
    if positives == 0 || positives == y.len() {
        return Err(Error::DegenerateFit(
            "all labels belong to one class".into(),
        ));
    }

    let lambda = cfg.lambda;
    let mut params = start.to_vec();
    let mut f = objective_unchecked(&params, x, y, lambda);
    let mut trace = vec![f];
    let mut grad = gradient_unchecked(&params, x, y, lambda);
    let mut iterations = 0;
    let mut status = FitStatus::MaxIterations;

    while iterations < cfg.max_iter {
        if norm(&grad) <= cfg.tol {
            status = FitStatus::Converged;
            break;
        }
        let mut h = hessian(&params, x, lambda);
        let step = match cholesky_solve(&h, &grad) {
            Some(s) => s,
            None => {
                let m = params.len();
                for j in 0..m {
                    h[j * m + j] += 1e-10;
                }
                cholesky_solve(&h, &grad).ok_or_else(|| Error::Solver {
                    iterations,
                    reason: "Newton system is singular even after ridge".into(),
                })?
            }
        };

        let mut t = 1.0;
        let mut accepted = None;
        // Newton decrement below the objective's rounding noise: the sum of
        // losses cannot tell better from worse, the gradient still can.
        let decrement = 0.5 * dot(&grad, &step);
        if decrement <= ROUNDING_SLACK * f.abs().max(1.0) {
            let candidate: Vec<f64> = params.iter().zip(&step).map(|(p, s)| p - s).collect();
            let fc = objective_unchecked(&candidate, x, y, lambda);
            if fc <= f + ROUNDING_SLACK * f.abs().max(1.0)
                && norm(&gradient_unchecked(&candidate, x, y, lambda)) < norm(&grad)
            {
                accepted = Some((candidate, fc));
            }
        }
        for _ in 0..MAX_HALVINGS {
            if accepted.is_some() {
                break;
            }
            let candidate: Vec<f64> = params.iter().zip(&step).map(|(p, s)| p - t * s).collect();
            let fc = objective_unchecked(&candidate, x, y, lambda);
            if fc <= f {
                accepted = Some((candidate, fc));
                break;
            }
            t *= 0.5;
        }
        let Some((candidate, fc)) = accepted else {
            status = FitStatus::Stalled;
            break;
        };
        params = candidate;
        f = fc;
        trace.push(f);
        grad = gradient_unchecked(&params, x, y, lambda);
        iterations += 1;
    }

    let gradient_norm = norm(&grad);
    if gradient_norm <= cfg.tol {
        status = FitStatus::Converged;
    }
    if params.iter().any(|v| !v.is_finite()) {
        return Err(Error::Solver {
            iterations,
            reason: "parameters diverged".into(),
        });
    }
    Ok(LogisticModel {
        intercept: params[0],
        coefficients: params[1..].to_vec(),
        iterations,
        gradient_norm,
        lambda,
        status,
        objective_trace: trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line() -> (Matrix, Vec<bool>) {
        let x = Matrix::from_rows(&[vec![-1.0], vec![1.0], vec![-1.0], vec![1.0]]).unwrap();
        (x, vec![false, true, false, true])
    }

    #[test]
    fn separable_sign() {
        let (x, y) = line();
        let m = fit(&x, &y, &SolverConfig::default()).unwrap();
        assert!(m.coefficients[0] > 0.0);
        for (i, &yi) in y.iter().enumerate() {
            assert_eq!(m.predict(x.row(i)).unwrap() > 0.5, yi);
        }
        assert_eq!(m.status, FitStatus::Converged);
    }

    #[test]
    fn separable_without_penalty_returns_parameters() {
        let (x, y) = line();
        let cfg = SolverConfig {
            lambda: 0.0,
            max_iter: 5,
            ..SolverConfig::default()
        };
        let m = fit(&x, &y, &cfg).unwrap();
        assert_eq!(m.status, FitStatus::MaxIterations);
        assert_eq!(m.iterations, 5);
        assert!(m.coefficients[0] > 0.0);
        assert!(m.coefficients[0].is_finite());
    }

    #[test]
    fn degenerate_and_invalid_inputs() {
        let (x, _) = line();
        assert!(matches!(
            fit(&x, &[true; 4], &SolverConfig::default()),
            Err(Error::DegenerateFit(_))
        ));
        let bad = Matrix::from_rows(&[vec![f64::NAN], vec![1.0]]).unwrap();
        assert!(matches!(
            fit(&bad, &[true, false], &SolverConfig::default()),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            fit(&x, &[true, false], &SolverConfig::default()),
            Err(Error::Contract(_))
        ));
        let cfg = SolverConfig {
            tol: 0.0,
            ..SolverConfig::default()
        };
        assert!(matches!(
            fit(&x, &[true, false, true, false], &cfg),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn predict_values() {
        let zero = LogisticModel::from_parameters(0.0, vec![0.0, 0.0]);
        assert_eq!(zero.predict(&[3.0, -7.0]).unwrap(), 0.5);
        let m = LogisticModel::from_parameters(libm::log(3.0), vec![0.0]);
        assert!((m.predict(&[1.0]).unwrap() - 0.75).abs() < 1e-15);
        assert!(matches!(m.predict(&[1.0, 2.0]), Err(Error::Contract(_))));

        let low = sigmoid(-1000.0);
        assert!(low > 0.0 && low <= 1e-300);
        let high = sigmoid(1000.0);
        assert!(high < 1.0 && high > 0.5);
        assert!(sigmoid(-600.0) > 0.0);
    }

    #[test]
    fn penalty_enters_gradient_linearly() {
        let (x, y) = line();
        let params = [0.3, -0.7];
        let g1 = gradient(&params, &x, &y, 0.5).unwrap();
        let g2 = gradient(&params, &x, &y, 1.0).unwrap();
        assert_eq!(g1[0], g2[0]);
        assert!((g2[1] - g1[1] - 0.5 * params[1]).abs() < 1e-15);
    }

    #[test]
    fn singular_hessian_gets_ridge() {
        // a constant zero column makes the unpenalized Hessian singular
        let x = Matrix::from_rows(&[
            vec![0.0, 1.0],
            vec![0.0, 2.0],
            vec![0.0, 3.0],
            vec![0.0, 4.0],
        ])
        .unwrap();
        let y = [false, true, false, true];
        let cfg = SolverConfig {
            lambda: 0.0,
            ..SolverConfig::default()
        };
        let m = fit(&x, &y, &cfg).unwrap();
        assert!(m.parameters().iter().all(|v| v.is_finite()));
        assert_eq!(m.status, FitStatus::Converged);
    }
}
