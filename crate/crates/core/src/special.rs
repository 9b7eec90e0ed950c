//! Standard-normal CDF helpers used inside densities (skew-normal) and the
//! copula integrand. They rest on `libm::erfc` and switch to a Mills-ratio
//! continued fraction where `erfc` would underflow.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

/// `log(sqrt(2 pi))`
pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Below this `z`, `Phi(z)` is taken from the continued fraction.
const CF_SWITCH: f64 = -30.0;

pub fn ln_norm_pdf(z: f64) -> f64 {
    -0.5 * z * z - LN_SQRT_2PI
}

/// Standard normal CDF.
pub fn norm_cdf(z: f64) -> f64 {
    if z < CF_SWITCH {
        ln_norm_cdf(z).exp()
    } else {
        0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
    }
}

/// Natural log of the standard normal CDF, accurate far into the lower tail.
pub fn ln_norm_cdf(z: f64) -> f64 {
    if z < CF_SWITCH {
        ln_norm_pdf(z) + mills_ratio(-z).ln()
    } else if z > 5.0 {
        // Phi(z) = 1 - Phi(-z) with Phi(-z) tiny
        (-0.5 * libm::erfc(z * FRAC_1_SQRT_2)).ln_1p()
    } else {
        (0.5 * libm::erfc(-z * FRAC_1_SQRT_2)).ln()
    }
}

/// Mills ratio `(1 - Phi(t)) / phi(t)` for large positive `t`, by the
/// Laplace continued fraction evaluated with modified Lentz.
fn mills_ratio(t: f64) -> f64 {
    // R(t) = 1 / (t + 1 / (t + 2 / (t + 3 / (t + ...))))
    let tiny = 1e-300;
    let mut f = t;
    let mut c = t;
    let mut d = 0.0;
    for n in 1..200 {
        let an = n as f64;
        d = t + an * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = t + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `1 / sqrt(2 pi)`
pub fn inv_sqrt_2pi() -> f64 {
    1.0 / (2.0 * PI).sqrt()
}
