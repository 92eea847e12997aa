//! Student-t tail probabilities through the regularized incomplete beta function.

use crate::{Error, Result};

/// Regularized incomplete beta `I_x(a, b)` for `a, b > 0`, `x` in [0, 1].
///
/// Modified Lentz evaluation of the continued fraction, using the symmetry
/// `I_x(a, b) = 1 - I_{1-x}(b, a)` where the fraction converges faster.
pub fn regularized_incomplete_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) || !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(alloc::format!(
            "incomplete beta needs a, b > 0 and 0 <= x <= 1 (x={x}, a={a}, b={b})"
        )));
    }
    if x == 0.0 || x == 1.0 {
        return Ok(x);
    }
    let ln_front = libm::lgamma(a + b) - libm::lgamma(a) - libm::lgamma(b)
        + a * libm::log(x)
        + b * libm::log1p(-x);
    let front = libm::exp(ln_front);
    if x < (a + 1.0) / (a + b + 2.0) {
        Ok(front * beta_fraction(x, a, b) / a)
    } else {
        Ok(1.0 - front * beta_fraction(1.0 - x, b, a) / b)
    }
}

fn beta_fraction(x: f64, a: f64, b: f64) -> f64 {
    const TINY: f64 = 1e-300;
    const EPS: f64 = 1e-16;
    let (qab, qap, qam) = (a + b, a + 1.0, a - 1.0);
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=500 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

fn check_df(df: f64) -> Result<()> {
    if !(df >= 1.0 && df.is_finite()) {
        return Err(Error::Domain(alloc::format!(
            "degrees of freedom must be >= 1, got {df}"
        )));
    }
    Ok(())
}

/// `P(|T| >= |t|)` for Student's t with `df` degrees of freedom.
pub fn student_t_two_sided_p(t: f64, df: f64) -> Result<f64> {
    check_df(df)?;
    if !t.is_finite() {
        return Err(Error::Domain(alloc::format!(
            "t statistic must be finite, got {t}"
        )));
    }
    let x = df / (df + t * t);
    regularized_incomplete_beta(x, df / 2.0, 0.5)
}

/// Two-sided critical value: the `t` with `P(|T| >= t) = alpha`.
pub fn student_t_critical(alpha: f64, df: f64) -> Result<f64> {
    check_df(df)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(alloc::format!(
            "alpha must lie in (0, 1), got {alpha}"
        )));
    }
    let mut hi = 1.0;
    while student_t_two_sided_p(hi, df)? > alpha {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if student_t_two_sided_p(mid, df)? > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
