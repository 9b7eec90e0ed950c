//! Lower-tail dependence of the bivariate Gaussian copula.
//!
//! With correlation `rho` and `theta = (1 - rho) / (1 + rho)`:
//!
//! ```text
//! lambda(u)   = 2 Phi(Phi^-1(u) sqrt(theta))
//!             ~ u^theta 2 sqrt((1 + rho) / (1 - rho)) (-4 pi log u)^(-rho / (1 + rho))
//! lambda_L(u) = C(u, u) / u ~ lambda(u) / (theta + 1)
//! ```
//!
//! `Phi` and `Phi^-1` come from the Normal oracle and the copula diagonal
//! `C(u, u)` from one-dimensional quadrature of a conditional probability.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::analysis::UGrid;
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::oracle::{Oracle, OracleConfig};
use crate::quadrature::Quadrature;
use crate::special::{ln_norm_cdf, ln_norm_pdf};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CopulaParams {
    rho: f64,
}

impl CopulaParams {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho.abs() < 1.0) {
            return Err(Error::InvalidParams(format!("correlation rho = {rho} must lie in (-1, 1)")));
        }
        Ok(CopulaParams { rho })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Regular-variation index `(1 - rho) / (1 + rho)` of `lambda(u)`.
    pub fn theta(&self) -> f64 {
        (1.0 - self.rho) / (1.0 + self.rho)
    }
}

/// Evaluator sharing one Normal oracle across grid points.
#[derive(Debug, Clone)]
pub struct GaussianCopula {
    params: CopulaParams,
    normal: Oracle,
    quad: Quadrature,
}

fn check_level(u: f64) -> Result<()> {
    if u > 0.0 && u < 0.5 {
        Ok(())
    } else {
        Err(Error::Domain(format!("u = {u} not in (0, 1/2)")))
    }
}

impl GaussianCopula {
    pub fn new(params: CopulaParams, cfg: &OracleConfig) -> Result<Self> {
        let normal = Oracle::new(DistributionSpec::Normal, *cfg)?;
        let quad = Quadrature { abs_tol: cfg.abs_tol, rel_tol: cfg.rel_tol, max_panels: 2000 };
        Ok(GaussianCopula { params, normal, quad })
    }

    pub fn params(&self) -> &CopulaParams {
        &self.params
    }

    /// `2 Phi(Phi^-1(u) sqrt(theta))`
    pub fn lambda(&self, u: f64) -> Result<f64> {
        check_level(u)?;
        let x = self.normal.quantile(u)?.x;
        Ok(2.0 * self.normal.log_cdf(x * self.params.theta().sqrt())?.exp())
    }

    /// The slowly varying law `u^theta L(u)`; needs `u < 1/e`.
    pub fn lambda_asymptotic(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u.ln() < -1.0) {
            return Err(Error::Domain(format!("asymptotic law needs 0 < u < 1/e, got {u}")));
        }
        let rho = self.params.rho;
        let ln_l = std::f64::consts::LN_2 + 0.5 * ((1.0 + rho) / (1.0 - rho)).ln()
            - rho / (1.0 + rho) * (-4.0 * PI * u.ln()).ln();
        Ok((self.params.theta() * u.ln() + ln_l).exp())
    }

    /// `C(u, u) = int_{-inf}^x phi(t) Phi((x - rho t) / sqrt(1 - rho^2)) dt`, `x = Phi^-1(u)`.
    pub fn diagonal(&self, u: f64) -> Result<f64> {
        check_level(u)?;
        let x = self.normal.quantile(u)?.x;
        let rho = self.params.rho;
        let s = (1.0 - rho * rho).sqrt();
        let ln_f = |t: f64| ln_norm_pdf(t) + ln_norm_cdf((x - rho * t) / s);
        self.integrate_log(ln_f, x)
    }

    /// `C(u, u)` conditioning on the larger coordinate instead:
    /// `2 int_{-inf}^x phi(t) Phi(t sqrt(theta)) dt`.
    pub fn diagonal_by_maximum(&self, u: f64) -> Result<f64> {
        check_level(u)?;
        let x = self.normal.quantile(u)?.x;
        let r = self.params.theta().sqrt();
        let ln_f = |t: f64| ln_norm_pdf(t) + ln_norm_cdf(r * t);
        Ok(2.0 * self.integrate_log(ln_f, x)?)
    }

    /// `int_{-inf}^x exp(ln_f(t)) dt` with the integrand normalised at `x`.
    fn integrate_log<F: Fn(f64) -> f64>(&self, ln_f: F, x: f64) -> Result<f64> {
        let reference = ln_f(x);
        let h = 1e-3 * x.abs().max(1.0);
        let slope = (reference - ln_f(x - h)) / h;
        let scale = if slope > 0.0 { (1.0 / slope).clamp(1e-2, 10.0) } else { 1.0 };
        let est = self.quad.integrate_from_neg_infinity(|t| (ln_f(t) - reference).exp(), x, scale)?;
        Ok((reference + est.value.ln()).exp())
    }

    /// `C(u, u) / u`
    pub fn lambda_l(&self, u: f64) -> Result<f64> {
        Ok(self.diagonal(u)? / u)
    }

    pub fn report_row(&self, u: f64) -> CopulaRow {
        let row = || -> Result<CopulaRow> {
            let lambda = self.lambda(u)?;
            let lambda_asym = self.lambda_asymptotic(u)?;
            let lambda_l = self.lambda_l(u)?;
            Ok(CopulaRow {
                u,
                lambda,
                lambda_asym,
                lambda_l,
                ratio1: lambda / lambda_asym,
                ratio2: lambda_l * (self.params.theta() + 1.0) / lambda,
                error: None,
            })
        };
        row().unwrap_or_else(|e| CopulaRow {
            u,
            lambda: f64::NAN,
            lambda_asym: f64::NAN,
            lambda_l: f64::NAN,
            ratio1: f64::NAN,
            ratio2: f64::NAN,
            error: Some(e.to_string()),
        })
    }
}

pub fn lambda_u(p: &CopulaParams, u: f64, cfg: &OracleConfig) -> Result<f64> {
    GaussianCopula::new(*p, cfg)?.lambda(u)
}

pub fn lambda_asymptotic(p: &CopulaParams, u: f64) -> Result<f64> {
    GaussianCopula::new(*p, &OracleConfig::default())?.lambda_asymptotic(u)
}

pub fn lambda_l_u(p: &CopulaParams, u: f64, cfg: &OracleConfig) -> Result<f64> {
    GaussianCopula::new(*p, cfg)?.lambda_l(u)
}

/// `max(0, 2u - 1) <= c <= u`
pub fn within_frechet_bounds(u: f64, c: f64) -> bool {
    c >= (2.0 * u - 1.0).max(0.0) && c <= u
}

#[derive(Debug, Clone, PartialEq)]
pub struct CopulaRow {
    pub u: f64,
    pub lambda: f64,
    pub lambda_asym: f64,
    pub lambda_l: f64,
    /// `lambda / lambda_asym`
    pub ratio1: f64,
    /// `lambda_l (theta + 1) / lambda`
    pub ratio2: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CopulaReport {
    pub params: CopulaParams,
    pub rows: Vec<CopulaRow>,
}

impl CopulaReport {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }
}

/// All three quantities and their ratios along `grid`.
pub fn copula_report(p: &CopulaParams, grid: &UGrid, cfg: &OracleConfig) -> Result<CopulaReport> {
    let copula = GaussianCopula::new(*p, cfg)?;
    let rows: Vec<CopulaRow> = grid.masses().par_iter().map(|&u| copula.report_row(u)).collect();
    let report = CopulaReport { params: *p, rows };
    let failed = report.failed_rows();
    if failed as f64 > crate::analysis::MAX_FAILED_FRACTION * report.rows.len() as f64 {
        return Err(Error::TooManyFailures { failed, total: report.rows.len() });
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn copula(rho: f64) -> GaussianCopula {
        GaussianCopula::new(CopulaParams::new(rho).unwrap(), &OracleConfig::default()).unwrap()
    }

    #[test]
    fn params() {
        assert!(CopulaParams::new(1.0).is_err());
        assert!(CopulaParams::new(-1.0).is_err());
        assert!(CopulaParams::new(f64::NAN).is_err());
        assert_relative_eq!(CopulaParams::new(-0.3).unwrap().theta(), 1.3 / 0.7, max_relative = 1e-15);
        assert_eq!(CopulaParams::new(0.0).unwrap().theta(), 1.0);
    }

    #[test]
    fn independence() {
        let c = copula(0.0);
        assert_relative_eq!(c.lambda(0.01).unwrap(), 0.02, max_relative = 1e-11);
        assert_relative_eq!(c.lambda_l(0.01).unwrap(), 0.01, max_relative = 1e-11);
        assert_relative_eq!(c.lambda_asymptotic(0.01).unwrap(), 0.02, max_relative = 1e-14);
    }

    #[test]
    fn reference_values() {
        // 40-digit evaluations of the same definitions
        let c = copula(0.5);
        assert_relative_eq!(c.lambda(1e-4).unwrap(), 0.031_779_338_758_610_189, max_relative = 1e-11);
        assert_relative_eq!(c.lambda_l(1e-3).unwrap(), 0.054_259_168_194_567_1, max_relative = 1e-11);
    }

    #[test]
    fn asymptotic_law_value() {
        let c = copula(0.5);
        let u: f64 = 1e-4;
        let expected = u.powf(1.0 / 3.0) * 2.0 * 3f64.sqrt() * (4.0 * PI * 9.210_340_371_976_184).powf(-1.0 / 3.0);
        assert_relative_eq!(c.lambda_asymptotic(u).unwrap(), expected, max_relative = 1e-13);
        assert!(c.lambda_asymptotic(0.4).is_err());
    }

    #[test]
    fn lambda_tends_to_one_as_rho_grows() {
        let u = 1e-3;
        let l1 = copula(0.9).lambda(u).unwrap();
        let l2 = copula(0.999999).lambda(u).unwrap();
        assert!(l2 > l1 && l2 < 1.0);
        assert!(1.0 - l2 < 5e-3);
    }

    #[test]
    fn rejects_levels_outside_lower_half() {
        let c = copula(0.5);
        assert!(matches!(c.lambda(0.7), Err(Error::Domain(_))));
        assert!(matches!(c.lambda_l(0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn frechet_bounds() {
        assert!(within_frechet_bounds(0.1, 0.05));
        assert!(!within_frechet_bounds(0.1, 0.11));
        assert!(!within_frechet_bounds(0.8, 0.5));
    }

    #[test]
    fn row_failure_is_recorded() {
        let row = copula(0.5).report_row(0.45);
        assert!(row.error.is_some());
        assert!(row.lambda.is_nan());
    }
}
