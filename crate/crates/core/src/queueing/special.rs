//! Gaussian tail and the SINR tail integral over the serving distance.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use errorfunctions::RealErrorFunctions;

use crate::error::{invalid, Error, Result};
use crate::quad;

/// Standard normal tail probability, `erfc(x / sqrt 2) / 2`.
pub fn q_function(x: f64) -> f64 {
    0.5 * RealErrorFunctions::erfc(x * FRAC_1_SQRT_2)
}

/// `g(a, b) = sqrt(pi / a) exp(b^2 / 4a) Q(b / sqrt(2a))`, the value of
/// `int_0^inf exp(-a s^2 - b s) ds`.
///
/// With `x = b / (2 sqrt a)` the exponential and the tail collapse into the
/// scaled complementary error function, `g = sqrt(pi / a) erfcx(x) / 2`,
/// which neither overflows nor underflows for large `b^2 / 4a`.
pub fn g_closed_form(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(invalid("a", format!("must be positive (got {a})")));
    }
    if !(b >= 0.0) {
        return Err(invalid("b", format!("must be nonnegative (got {b})")));
    }
    let x = b / (2.0 * a.sqrt());
    Ok(0.5 * (PI / a).sqrt() * RealErrorFunctions::erfcx(x))
}

/// `int_0^inf exp(-a s^(alpha/2)) exp(-b s) ds`.
///
/// Uses the closed form for `alpha = 4`; other exponents go through
/// adaptive quadrature, truncated where the `exp(-b s)` tail is below
/// `1e-13` of the integral.
pub fn sinr_tail_integral(a: f64, b: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 2.0) {
        return Err(invalid("alpha", format!("alpha must exceed 2 (got {alpha})")));
    }
    if alpha == 4.0 {
        return g_closed_form(a, b);
    }
    if !(a > 0.0) {
        return Err(invalid("a", format!("must be positive (got {a})")));
    }
    if !(b > 0.0) {
        return Err(invalid("b", format!("must be positive (got {b})")));
    }
    let k = alpha / 2.0;
    let f = |s: f64| (-a * s.powf(k) - b * s).exp();
    // Characteristic scale: the smaller of 1/b and the point where a s^k = 1.
    let scale = (1.0 / b).min(a.powf(-1.0 / k));
    let upper = 40.0 / b;
    let mut total = 0.0;
    let mut lo = 0.0;
    let mut hi = scale;
    while lo < upper {
        let end = hi.min(upper);
        let seg = quad::integrate(f, lo, end, 1e-300, 1e-13, 400)?;
        total += seg.value;
        lo = end;
        hi = end * 4.0;
    }
    // remaining tail is bounded by exp(-a upper^k - b upper) / b
    let tail_bound = (-a * upper.powf(k) - b * upper).exp() / b;
    if tail_bound > 1e-12 * total.max(f64::MIN_POSITIVE) && total > 0.0 {
        return Err(Error::Quadrature(format!(
            "tail bound {tail_bound:e} not negligible against {total:e}"
        )));
    }
    Ok(total)
}
