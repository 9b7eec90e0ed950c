//! High-accuracy reference CDF and quantiles.
//!
//! Tail masses come from adaptive quadrature of the density, normalised by
//! the density at the evaluation point and returned as logarithms, so the
//! lower tail stays usable down to `exp(-700)` and beyond. Quantiles are found
//! by Brent's method on `log mass(x) - log v`. The tail approximant is used
//! at most to seed the initial bracket; with
//! [`OracleConfig::seed_bracket`] off the search is purely geometric.

use crate::distributions::{log_pdf_with, tail_params, DistributionSpec, TailKind};
use crate::error::{Error, Result};
use crate::gg_tail::TailMass;
use crate::quadrature::Quadrature;
use crate::root::brent;

const MAX_WIDENINGS: usize = 60;

/// Tolerances for the reference computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleConfig {
    /// Absolute tolerance of the normalised tail integrals.
    pub abs_tol: f64,
    /// Relative tolerance of the tail integrals.
    pub rel_tol: f64,
    /// Bound on `|mass(x) - v| / v` for a returned quantile.
    pub root_tol: f64,
    pub max_iter: usize,
    /// Seed the quantile bracket from the tail approximant when one exists.
    pub seed_bracket: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { abs_tol: 1e-14, rel_tol: 1e-12, root_tol: 1e-12, max_iter: 200, seed_bracket: true }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("abs_tol", self.abs_tol), ("rel_tol", self.rel_tol), ("root_tol", self.root_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParams(format!("oracle {name} = {v} must be positive")));
            }
        }
        if self.max_iter < 10 {
            return Err(Error::InvalidParams(format!("oracle max_iter = {} must be >= 10", self.max_iter)));
        }
        Ok(())
    }
}

/// A reference quantile and how well it solves `mass(x) = v`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantileResult {
    pub x: f64,
    /// `|mass(x) - v| / v` for the tail mass `v` on the solved side.
    pub achieved_residual: f64,
    pub iterations: usize,
    /// Number of times the initial bracket had to be enlarged.
    pub widenings: usize,
}

/// Reference evaluator for one distribution.
#[derive(Debug, Clone)]
pub struct Oracle {
    dist: DistributionSpec,
    cfg: OracleConfig,
    quad: Quadrature,
    density_quad: Quadrature,
    split: f64,
}

impl Oracle {
    pub fn new(dist: DistributionSpec, cfg: OracleConfig) -> Result<Self> {
        dist.validate()?;
        cfg.validate()?;
        let quad = Quadrature { abs_tol: cfg.abs_tol, rel_tol: cfg.rel_tol, max_panels: 2000 };
        let density_quad = Quadrature { abs_tol: 0.0, rel_tol: (0.1 * cfg.rel_tol).max(1e-14), max_panels: 400 };
        let mut oracle = Oracle { dist, cfg, quad, density_quad, split: 0.0 };
        oracle.split = oracle.find_split()?;
        Ok(oracle)
    }

    pub fn dist(&self) -> &DistributionSpec {
        &self.dist
    }

    pub fn config(&self) -> &OracleConfig {
        &self.cfg
    }

    pub fn log_pdf(&self, x: f64) -> Result<f64> {
        log_pdf_with(&self.dist, x, &self.density_quad)
    }

    /// Point separating the two tail integrations: near the mode, so the
    /// normalised integrands stay bounded.
    fn find_split(&self) -> Result<f64> {
        let (lo, hi) = match self.dist {
            DistributionSpec::Normal => return Ok(0.0),
            DistributionSpec::Gamma { alpha, beta } => return Ok(alpha / beta),
            DistributionSpec::SkewNormal { .. } => (-2.0, 2.0),
            DistributionSpec::VarianceGamma { theta, nu } => {
                let w = 3.0 * (1.0 + theta.abs() * (1.0 + nu));
                (-w, w)
            }
            DistributionSpec::SkewSlash { theta, .. } => (-3.0, 3.0 + 3.0 * theta),
        };
        // golden-section maximisation of the log-density
        let g = 0.5 * (5f64.sqrt() - 1.0);
        let (mut a, mut b) = (lo, hi);
        let mut x1 = b - g * (b - a);
        let mut x2 = a + g * (b - a);
        let mut f1 = self.log_pdf(x1)?;
        let mut f2 = self.log_pdf(x2)?;
        while b - a > 1e-6 {
            if f1 < f2 {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + g * (b - a);
                f2 = self.log_pdf(x2)?;
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - g * (b - a);
                f1 = self.log_pdf(x1)?;
            }
        }
        let mut split = 0.5 * (a + b);
        if !self.log_pdf(split)?.is_finite() {
            split -= 1e-3;
        }
        Ok(split)
    }

    /// Inverse decay length of the density at `x`, looking into the tail
    /// on `side`, used to scale the infinite-interval map.
    fn decay_scale(&self, x: f64, ref_log_pdf: f64, side: TailKind) -> Result<f64> {
        let h = 1e-3 * x.abs().max(1.0);
        let probe = match side {
            TailKind::Lower => x - h,
            TailKind::Upper => x + h,
        };
        if probe <= self.dist.support_min() {
            return Ok(1.0);
        }
        let slope = (ref_log_pdf - self.log_pdf(probe)?) / h;
        Ok(if slope > 0.0 { (1.0 / slope).clamp(1e-2, 10.0) } else { 1.0 })
    }

    /// `log P(X <= x)` integrating directly from the left end of the support.
    fn direct_lower(&self, x: f64) -> Result<f64> {
        if let DistributionSpec::Gamma { alpha, beta } = self.dist {
            if alpha < 1.0 {
                // t = x s^(1/alpha) removes the integrable singularity at 0:
                // P(X <= x) = (beta x)^alpha / Gamma(alpha + 1) * int_0^1 exp(-beta x s^(1/alpha)) ds
                let est = self.quad.integrate(|s| (-beta * x * s.powf(1.0 / alpha)).exp(), 0.0, 1.0)?;
                return Ok(alpha * (beta * x).ln() - crate::special::ln_gamma(alpha + 1.0) + est.value.ln());
            }
            let reference = self.log_pdf(x)?;
            let est = self.quad.integrate(
                |t| if t > 0.0 { (self.log_pdf(t).unwrap_or(f64::NAN) - reference).exp() } else { 0.0 },
                0.0,
                x,
            )?;
            return Ok(reference + est.value.ln());
        }
        let reference = self.log_pdf(x)?;
        let scale = self.decay_scale(x, reference, TailKind::Lower)?;
        let est = self.quad.integrate_from_neg_infinity(
            |t| (self.log_pdf(t).unwrap_or(f64::NAN) - reference).exp(),
            x,
            scale,
        )?;
        Ok(reference + est.value.ln())
    }

    /// `log P(X > x)` integrating out to `+inf`.
    fn direct_upper(&self, x: f64) -> Result<f64> {
        let reference = self.log_pdf(x)?;
        let scale = self.decay_scale(x, reference, TailKind::Upper)?;
        let est = self.quad.integrate_to_infinity(
            |t| (self.log_pdf(t).unwrap_or(f64::NAN) - reference).exp(),
            x,
            scale,
        )?;
        Ok(reference + est.value.ln())
    }

    /// `log P(X <= x)`.
    pub fn log_cdf(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::Support { dist: self.dist.to_string(), x });
        }
        if x <= self.dist.support_min() {
            return Ok(f64::NEG_INFINITY);
        }
        if x == f64::INFINITY {
            return Ok(0.0);
        }
        if x <= self.split {
            self.direct_lower(x)
        } else {
            Ok((-self.direct_upper(x)?.exp()).ln_1p())
        }
    }

    /// `log P(X > x)`.
    pub fn log_sf(&self, x: f64) -> Result<f64> {
        if x.is_nan() {
            return Err(Error::Support { dist: self.dist.to_string(), x });
        }
        if x <= self.dist.support_min() {
            return Ok(0.0);
        }
        if x == f64::INFINITY {
            return Ok(f64::NEG_INFINITY);
        }
        if x >= self.split {
            self.direct_upper(x)
        } else {
            Ok((-self.direct_lower(x)?.exp()).ln_1p())
        }
    }

    /// Log of the probability beyond `x` on `side`.
    pub fn log_tail_mass(&self, side: TailKind, x: f64) -> Result<f64> {
        match side {
            TailKind::Lower => self.log_cdf(x),
            TailKind::Upper => self.log_sf(x),
        }
    }

    /// `P(X <= x)`; fails with [`Error::Underflow`] when not representable.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        exp_checked(self.log_cdf(x)?)
    }

    /// `P(X > x)`; fails with [`Error::Underflow`] when not representable.
    pub fn sf(&self, x: f64) -> Result<f64> {
        exp_checked(self.log_sf(x)?)
    }

    fn seed_bracket(&self, side: TailKind, mass: TailMass) -> Option<(f64, f64)> {
        if !self.cfg.seed_bracket {
            return None;
        }
        let params = tail_params(&self.dist, side).ok()?;
        let y = params.approximant(mass).ok()?;
        let p = params.order(mass).ok()?.value;
        let (x1, x2) = (y * (1.0 + 10.0 * p), y * (1.0 - 10.0 * p));
        let (lo, hi) = if x1 < x2 { (x1, x2) } else { (x2, x1) };
        if lo <= self.dist.support_min() || !(lo < hi) {
            return None;
        }
        Some((lo, hi))
    }

    /// Solves `P(X beyond x on side) = v` for the tail mass `v`.
    pub fn tail_quantile(&self, side: TailKind, mass: TailMass) -> Result<QuantileResult> {
        let ln_target = mass.ln();
        // increasing in x on either side
        let g = |x: f64| -> Result<f64> {
            let lm = self.log_tail_mass(side, x)?;
            Ok(match side {
                TailKind::Lower => lm - ln_target,
                TailKind::Upper => ln_target - lm,
            })
        };

        let (mut lo, mut hi) = self
            .seed_bracket(side, mass)
            .unwrap_or((self.split - 1.0, self.split + 1.0));
        if lo <= self.dist.support_min() {
            lo = self.dist.support_min() + 0.5 * (hi - self.dist.support_min());
        }
        let mut widenings = 0;
        let (mut glo, mut ghi) = (g(lo)?, g(hi)?);
        while glo > 0.0 || ghi < 0.0 {
            if widenings >= MAX_WIDENINGS {
                return Err(Error::BracketFailure { ln_target, widenings });
            }
            widenings += 1;
            let width = hi - lo;
            if glo > 0.0 {
                hi = lo;
                ghi = glo;
                let min = self.dist.support_min();
                lo = if lo - 2.0 * width > min { lo - 2.0 * width } else { min + 0.5 * (lo - min) };
                glo = g(lo)?;
            } else {
                lo = hi;
                glo = ghi;
                hi += 2.0 * width;
                ghi = g(hi)?;
            }
        }

        let root = brent(g, lo, hi, glo, ghi, 0.25 * self.cfg.root_tol, self.cfg.max_iter)?;
        let achieved_residual = root.fx.exp_m1().abs();
        if achieved_residual > self.cfg.root_tol {
            return Err(Error::NotConverged { x: root.x, residual: achieved_residual, tol: self.cfg.root_tol });
        }
        Ok(QuantileResult { x: root.x, achieved_residual, iterations: root.iterations, widenings })
    }

    /// Quantile at probability level `u`, solved on the lower side for
    /// `u <= 1/2` and on the upper side with `v = 1 - u` otherwise.
    pub fn quantile(&self, u: f64) -> Result<QuantileResult> {
        let side = if u <= 0.5 { TailKind::Lower } else { TailKind::Upper };
        self.tail_quantile(side, TailMass::from_level(side, u)?)
    }
}

fn exp_checked(log_value: f64) -> Result<f64> {
    if log_value == f64::NEG_INFINITY {
        // outside the support
        Ok(0.0)
    } else if log_value < f64::MIN_POSITIVE.ln() {
        Err(Error::Underflow { log_value })
    } else {
        Ok(log_value.exp())
    }
}

pub fn cdf(dist: &DistributionSpec, x: f64, cfg: &OracleConfig) -> Result<f64> {
    Oracle::new(*dist, *cfg)?.cdf(x)
}

pub fn log_cdf(dist: &DistributionSpec, x: f64, cfg: &OracleConfig) -> Result<f64> {
    Oracle::new(*dist, *cfg)?.log_cdf(x)
}

pub fn quantile(dist: &DistributionSpec, u: f64, cfg: &OracleConfig) -> Result<QuantileResult> {
    Oracle::new(*dist, *cfg)?.quantile(u)
}

pub fn tail_quantile(
    dist: &DistributionSpec,
    side: TailKind,
    mass: TailMass,
    cfg: &OracleConfig,
) -> Result<QuantileResult> {
    Oracle::new(*dist, *cfg)?.tail_quantile(side, mass)
}
