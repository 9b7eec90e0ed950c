//! The five parametric families with Generalised Gamma-type tails: their
//! tail constants, their (log-)densities, and the leading tail model.
//!
//! Variance-Gamma and Skew-Slash densities are evaluated from their
//! normal variance-mean mixture definitions by one-dimensional quadrature,
//! never from closed forms or asymptotics.

use std::f64::consts::{LN_2, PI};
use std::fmt;

use crate::error::{Error, Result};
use crate::gg_tail::GGTailParams;
pub use crate::gg_tail::TailKind;
use crate::quadrature::Quadrature;
use crate::special::{ln_gamma, ln_norm_cdf, ln_norm_pdf, LN_SQRT_2PI};

/// Below this `|x|` the tail model is used outside its intended regime.
pub const TAIL_MODEL_SOFT_THRESHOLD: f64 = 2.0;

/// A supported distribution with its parameters.
///
/// Location and scale are fixed at 0 and 1 throughout.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DistributionSpec {
    Normal,
    /// Density `2 phi(x) Phi(lambda x)`, `lambda != 0`.
    SkewNormal { lambda: f64 },
    /// Shape `alpha`, rate `beta`.
    Gamma { alpha: f64, beta: f64 },
    /// `X | Y ~ N(theta Y, Y)` with `Y ~ Gamma(1/nu, rate 1/nu)`.
    VarianceGamma { theta: f64, nu: f64 },
    /// `X | Y ~ N(theta / Y, 1 / Y)` with `Y ~ Beta(lambda, 1)`, `theta > 0`.
    SkewSlash { theta: f64, lambda: f64 },
}

impl DistributionSpec {
    pub fn skew_normal(lambda: f64) -> Result<Self> {
        DistributionSpec::SkewNormal { lambda }.validated()
    }

    pub fn gamma(alpha: f64, beta: f64) -> Result<Self> {
        DistributionSpec::Gamma { alpha, beta }.validated()
    }

    pub fn variance_gamma(theta: f64, nu: f64) -> Result<Self> {
        DistributionSpec::VarianceGamma { theta, nu }.validated()
    }

    pub fn skew_slash(theta: f64, lambda: f64) -> Result<Self> {
        DistributionSpec::SkewSlash { theta, lambda }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        match *self {
            DistributionSpec::Normal => Ok(()),
            DistributionSpec::SkewNormal { lambda } => {
                if lambda == 0.0 {
                    bad("skew-normal lambda = 0 is the standard normal; use Normal".into())
                } else if !lambda.is_finite() {
                    bad(format!("skew-normal lambda = {lambda} must be finite"))
                } else {
                    Ok(())
                }
            }
            DistributionSpec::Gamma { alpha, beta } => {
                if alpha > 0.0 && beta > 0.0 && alpha.is_finite() && beta.is_finite() {
                    Ok(())
                } else {
                    bad(format!("gamma needs alpha > 0 and beta > 0, got ({alpha}, {beta})"))
                }
            }
            DistributionSpec::VarianceGamma { theta, nu } => {
                if nu > 0.0 && nu.is_finite() && theta.is_finite() {
                    Ok(())
                } else {
                    bad(format!("variance-gamma needs nu > 0 and finite theta, got ({theta}, {nu})"))
                }
            }
            DistributionSpec::SkewSlash { theta, lambda } => {
                if theta > 0.0 && lambda > 0.0 && theta.is_finite() && lambda.is_finite() {
                    Ok(())
                } else {
                    bad(format!("skew-slash needs theta > 0 and lambda > 0, got ({theta}, {lambda})"))
                }
            }
        }
    }

    pub fn family(&self) -> &'static str {
        match self {
            DistributionSpec::Normal => "normal",
            DistributionSpec::SkewNormal { .. } => "skew-normal",
            DistributionSpec::Gamma { .. } => "gamma",
            DistributionSpec::VarianceGamma { .. } => "variance-gamma",
            DistributionSpec::SkewSlash { .. } => "skew-slash",
        }
    }

    /// Tails for which a Generalised Gamma-type model is derived.
    pub fn supports(&self, side: TailKind) -> bool {
        matches!(
            (self, side),
            (DistributionSpec::Normal, _)
                | (DistributionSpec::SkewNormal { .. }, TailKind::Lower)
                | (DistributionSpec::Gamma { .. }, TailKind::Upper)
                | (DistributionSpec::VarianceGamma { .. }, TailKind::Lower)
                | (DistributionSpec::SkewSlash { .. }, TailKind::Lower)
        )
    }

    /// Infimum of the support (`0` for the Gamma, `-inf` otherwise).
    pub fn support_min(&self) -> f64 {
        match self {
            DistributionSpec::Gamma { .. } => 0.0,
            _ => f64::NEG_INFINITY,
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            DistributionSpec::Normal => write!(f, "normal"),
            DistributionSpec::SkewNormal { lambda } => write!(f, "skew-normal(lambda={lambda})"),
            DistributionSpec::Gamma { alpha, beta } => write!(f, "gamma(alpha={alpha},beta={beta})"),
            DistributionSpec::VarianceGamma { theta, nu } => {
                write!(f, "variance-gamma(theta={theta},nu={nu})")
            }
            DistributionSpec::SkewSlash { theta, lambda } => {
                write!(f, "skew-slash(theta={theta},lambda={lambda})")
            }
        }
    }
}

/// Tail constants `(a, b, c, d, e)` for a supported `(dist, side)` pair.
pub fn tail_params(dist: &DistributionSpec, side: TailKind) -> Result<GGTailParams> {
    dist.validate()?;
    if !dist.supports(side) {
        return Err(Error::UnsupportedTail { dist: dist.to_string(), side });
    }
    let sqrt_2pi = (2.0 * PI).sqrt();
    match *dist {
        DistributionSpec::Normal => GGTailParams::new(1.0 / sqrt_2pi, -1.0, 0.5, 2.0, 2.0, side),
        DistributionSpec::SkewNormal { lambda } => {
            let q = 1.0 + lambda * lambda;
            if lambda > 0.0 {
                GGTailParams::new(1.0 / (PI * lambda * q), -2.0, q / 2.0, 2.0, 2.0, side)
            } else {
                GGTailParams::new(2.0 / sqrt_2pi, -1.0, 0.5, 2.0, 2.0, side)
            }
        }
        DistributionSpec::Gamma { alpha, beta } => {
            let a = ((alpha - 1.0) * beta.ln() - ln_gamma(alpha)).exp();
            GGTailParams::new(a, alpha - 1.0, beta, 1.0, 1.0, side)
        }
        DistributionSpec::VarianceGamma { theta, nu } => {
            let s2 = 2.0 / nu + theta * theta;
            let c = s2.sqrt() + theta;
            let ln_denominator =
                (1.0 / nu) * nu.ln() + ln_gamma(1.0 / nu) + s2.ln() / (2.0 * nu) + c.ln();
            GGTailParams::new((-ln_denominator).exp(), 1.0 / nu - 1.0, c, 1.0, 1.0, side)
        }
        DistributionSpec::SkewSlash { theta, lambda } => GGTailParams::new(
            lambda * theta.powf(lambda - 1.0) / 2.0,
            -(lambda + 1.0),
            2.0 * theta,
            1.0,
            1.0,
            side,
        ),
    }
}

/// Quadrature settings for the mixture densities.
pub fn default_density_quadrature() -> Quadrature {
    Quadrature { abs_tol: 0.0, rel_tol: 1e-13, max_panels: 400 }
}

/// Natural log of the density at `x`.
pub fn log_pdf(dist: &DistributionSpec, x: f64) -> Result<f64> {
    log_pdf_with(dist, x, &default_density_quadrature())
}

/// [`log_pdf`] with explicit quadrature settings for the mixture families.
pub fn log_pdf_with(dist: &DistributionSpec, x: f64, quad: &Quadrature) -> Result<f64> {
    dist.validate()?;
    if x.is_nan() || (x.is_infinite() && !matches!(dist, DistributionSpec::Gamma { .. })) {
        return Err(Error::Support { dist: dist.to_string(), x });
    }
    match *dist {
        DistributionSpec::Normal => Ok(ln_norm_pdf(x)),
        DistributionSpec::SkewNormal { lambda } => Ok(LN_2 + ln_norm_pdf(x) + ln_norm_cdf(lambda * x)),
        DistributionSpec::Gamma { alpha, beta } => {
            if !(x > 0.0) || x.is_infinite() {
                return Err(Error::Support { dist: dist.to_string(), x });
            }
            Ok(alpha * beta.ln() - ln_gamma(alpha) + (alpha - 1.0) * x.ln() - beta * x)
        }
        DistributionSpec::VarianceGamma { theta, nu } => vg_log_pdf(x, theta, nu, quad),
        DistributionSpec::SkewSlash { theta, lambda } => skew_slash_log_pdf(x, theta, lambda, quad),
    }
}

/// Log of the integral over the real line of `exp(h(s))`, where `h` is a
/// smooth unimodal log-integrand with mode `mode` and curvature scale `width`,
/// restricted to `s >= s_min`.
fn log_integral_unimodal<H: Fn(f64) -> f64>(
    h: H,
    mode: f64,
    width: f64,
    s_min: f64,
    quad: &Quadrature,
) -> Result<f64> {
    let peak = h(mode);
    let g = |s: f64| (h(s) - peak).exp();
    let right = quad.integrate_to_infinity(g, mode, width)?.value;
    let left = if s_min.is_finite() {
        quad.integrate(g, s_min, mode)?.value
    } else {
        quad.integrate_from_neg_infinity(g, mode, width)?.value
    };
    Ok(peak + (left + right).ln())
}

/// Variance-Gamma log-density as a mixture over `y = e^s`.
fn vg_log_pdf(x: f64, theta: f64, nu: f64, quad: &Quadrature) -> Result<f64> {
    let k = 1.0 / nu;
    let constant = -LN_SQRT_2PI + k * k.ln() - ln_gamma(k) + x * theta;
    let quad_coef = theta * theta / 2.0 + k;
    // log of phi((x - theta y)/sqrt(y)) y^(-1/2) * gamma_pdf(y) * y, with y = e^s
    let h = |s: f64| {
        let y = s.exp();
        let spread = if x == 0.0 { 0.0 } else { x * x / (2.0 * y) };
        constant - spread - quad_coef * y + (k - 0.5) * s
    };
    let lin = k - 0.5;
    let disc = (lin * lin + 2.0 * quad_coef * x * x).sqrt();
    let z = if lin >= 0.0 {
        (lin + disc) / (2.0 * quad_coef)
    } else {
        // rationalised root to avoid cancellation
        x * x / (disc - lin)
    };
    if !(z > 0.0) {
        // x = 0 with nu >= 2: the density is infinite at the origin
        return Ok(f64::INFINITY);
    }
    let width = 1.0 / (x * x / (2.0 * z) + quad_coef * z).sqrt();
    log_integral_unimodal(h, z.ln(), width, f64::NEG_INFINITY, quad)
}

/// Skew-Slash log-density as a mixture over the precision `w = 1/Y = e^s`, `s >= 0`.
fn skew_slash_log_pdf(x: f64, theta: f64, lambda: f64, quad: &Quadrature) -> Result<f64> {
    let constant = lambda.ln() - LN_SQRT_2PI + x * theta;
    let lin = lambda + 0.5;
    let h = |s: f64| {
        let w = s.exp();
        constant - x * x / (2.0 * w) - theta * theta * w / 2.0 - lin * s
    };
    let t2 = theta * theta;
    let z = if x == 0.0 {
        0.0
    } else {
        // positive root of (theta^2/2) z^2 + lin z - x^2/2, rationalised
        x * x / (lin + (lin * lin + t2 * x * x).sqrt())
    };
    let mode = z.max(1.0).ln();
    let zm = mode.exp();
    let width = 1.0 / (x * x / (2.0 * zm) + t2 * zm / 2.0).sqrt();
    log_integral_unimodal(h, mode, width.min(10.0), 0.0, quad)
}

/// Logarithm of the leading tail factor `a |x|^b exp(-c |x|^d)`.
pub fn ln_tail_cdf_model(dist: &DistributionSpec, side: TailKind, x: f64) -> Result<f64> {
    let params = tail_params(dist, side)?;
    let in_tail = match side {
        TailKind::Lower => x < 0.0,
        TailKind::Upper => x > 0.0,
    };
    if !in_tail || !x.is_finite() {
        return Err(Error::Domain(format!("x = {x} is not in the {side} tail")));
    }
    if x.abs() < TAIL_MODEL_SOFT_THRESHOLD {
        log::warn!("tail model for {dist} evaluated at x = {x}, outside the deep tail");
    }
    Ok(params.ln_model(x))
}

/// Leading tail model mass (no error factor). Not a true CDF.
pub fn tail_cdf_model(dist: &DistributionSpec, side: TailKind, x: f64) -> Result<f64> {
    Ok(ln_tail_cdf_model(dist, side, x)?.exp())
}
