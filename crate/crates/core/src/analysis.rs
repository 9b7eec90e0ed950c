//! Error curves of the approximants against the oracle, fitted convergence
//! orders, the expansion ladder, and the Voutier baseline for the Normal.

use rayon::prelude::*;

use crate::distributions::{tail_params, DistributionSpec};
use crate::error::{Error, Result};
use crate::gg_tail::{ApproxMethod, GGTailParams, TailKind, TailMass};
use crate::oracle::{Oracle, OracleConfig, QuantileResult};

/// Rows with `rel_err` below this multiple of the oracle tolerance are
/// treated as oracle noise.
pub const ORACLE_LIMIT_FACTOR: f64 = 100.0;

/// Largest tolerated share of failed rows in a curve.
pub const MAX_FAILED_FRACTION: f64 = 0.2;

/// Smallest tail mass accepted without the extended flag.
pub const STANDARD_FLOOR: f64 = 1e-15;

/// Smallest tail mass accepted with the extended flag.
pub const EXTENDED_FLOOR: f64 = 1e-300;

/// Tail masses at which to compare, ordered from the body into the tail.
#[derive(Debug, Clone, PartialEq)]
pub struct UGrid {
    masses: Vec<f64>,
}

impl Default for UGrid {
    /// 41 points, geometric from `1e-2` to `1e-12`.
    fn default() -> Self {
        UGrid::geometric(1e-2, 1e-12, 41, false).expect("default grid is valid")
    }
}

impl UGrid {
    /// 99 points, geometric from `1e-2` to `1e-100`.
    pub fn extended() -> Self {
        UGrid::geometric(1e-2, 1e-100, 99, true).expect("extended grid is valid")
    }

    /// `points` tail masses spaced geometrically from `start` down to `end`.
    pub fn geometric(start: f64, end: f64, points: usize, extended: bool) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidParams(format!("grid needs at least 2 points, got {points}")));
        }
        if !(start > end) {
            return Err(Error::InvalidParams(format!(
                "grid must run into the tail: start {start:e} must exceed end {end:e}"
            )));
        }
        check_mass(start, extended)?;
        check_mass(end, extended)?;
        let (l0, l1) = (start.ln(), end.ln());
        let step = (l1 - l0) / (points - 1) as f64;
        let mut masses: Vec<f64> = (0..points).map(|i| (l0 + step * i as f64).exp()).collect();
        masses[0] = start;
        masses[points - 1] = end;
        Ok(UGrid { masses })
    }

    /// An explicit list, sorted from the body into the tail.
    pub fn from_list(list: &[f64], extended: bool) -> Result<Self> {
        if list.is_empty() {
            return Err(Error::InvalidParams("empty tail-mass list".into()));
        }
        for &v in list {
            check_mass(v, extended)?;
        }
        let mut masses = list.to_vec();
        masses.sort_by(|a, b| b.total_cmp(a));
        masses.dedup();
        Ok(UGrid { masses })
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }
}

fn check_mass(v: f64, extended: bool) -> Result<()> {
    let floor = if extended { EXTENDED_FLOOR } else { STANDARD_FLOOR };
    if !(v > 0.0 && v < 0.5) {
        return Err(Error::InvalidParams(format!("tail mass {v:e} not in (0, 0.5)")));
    }
    if v < floor {
        return Err(Error::InvalidParams(if extended {
            format!("tail mass {v:e} below {floor:e}")
        } else {
            format!("tail mass {v:e} below {floor:e} needs the extended grid")
        }));
    }
    Ok(())
}

/// Voutier's rational approximation to the Normal lower-tail quantile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaselineVoutier {
    pub c3: f64,
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    pub d0: f64,
    pub d1: f64,
}

impl Default for BaselineVoutier {
    #[allow(clippy::excessive_precision)]
    fn default() -> Self {
        BaselineVoutier {
            c3: -1.000182518730158122,
            c0: 16.682320830719986527,
            c1: 4.120411523939115059,
            c2: 0.029814187308200211,
            d0: 7.173787663925508066,
            d1: 8.759693508958633869,
        }
    }
}

impl BaselineVoutier {
    pub const NAME: &'static str = "voutier";
    /// Upper end of the validity range.
    pub const U_MAX: f64 = 0.0465;
    /// `log` of the lower end, `-37^2 / 2`.
    pub const LN_U_MIN: f64 = -684.5;

    /// Lower-tail quantile at tail mass `v`.
    pub fn eval_mass(&self, mass: TailMass) -> Result<f64> {
        let ln_u = mass.ln();
        if !(ln_u > Self::LN_U_MIN && ln_u < Self::U_MAX.ln()) {
            return Err(Error::OutOfRange {
                name: Self::NAME,
                u: mass.prob(),
                lo: Self::LN_U_MIN.exp(),
                hi: Self::U_MAX,
            });
        }
        let s = (-2.0 * ln_u).sqrt();
        Ok(self.c3 * s + self.c2 + (self.c1 * s + self.c0) / (s * s + self.d1 * s + self.d0))
    }

    /// Lower-tail quantile at level `u`.
    pub fn eval(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::OutOfRange { name: Self::NAME, u, lo: Self::LN_U_MIN.exp(), hi: Self::U_MAX });
        }
        self.eval_mass(TailMass::from_prob(u)?)
    }
}

/// Evaluates `method` at tail mass `mass`, returning the approximation and
/// its predicted relative-error order.
pub fn evaluate_method(
    dist: &DistributionSpec,
    params: &GGTailParams,
    method: &ApproxMethod,
    mass: TailMass,
) -> Result<(f64, f64)> {
    match method {
        ApproxMethod::LeadingTerm => Ok((params.leading(mass), params.order_leading(mass)?)),
        ApproxMethod::FullApproximant => Ok((params.approximant(mass)?, params.order(mass)?.value)),
        ApproxMethod::Expansion(k) => {
            let k = *k as usize;
            let y = params.expansion(mass, k)?;
            let lead = params.leading(mass).abs();
            Ok((y, params.omitted_term(mass, k)? / lead))
        }
        ApproxMethod::Baseline(name) => {
            if name != BaselineVoutier::NAME {
                return Err(Error::InvalidParams(format!("unknown baseline '{name}'")));
            }
            if *dist != DistributionSpec::Normal {
                return Err(Error::InvalidParams(format!("the voutier baseline applies to the normal only, not {dist}")));
            }
            let y = params.side().sign() * -BaselineVoutier::default().eval_mass(mass)?;
            Ok((y, params.order(mass)?.value))
        }
    }
}

/// Reference quantiles for every grid point, computed concurrently and
/// returned in grid order.
pub fn reference_quantiles(oracle: &Oracle, side: TailKind, grid: &UGrid) -> Vec<Result<QuantileResult>> {
    grid.masses()
        .par_iter()
        .map(|&v| oracle.tail_quantile(side, TailMass::from_prob(v)?))
        .collect()
}

/// One grid point of an [`ErrorCurve`]. Numeric fields are NaN when
/// `error` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorRow {
    /// Probability level (`1 - tail_mass` on the upper side).
    pub u: f64,
    pub tail_mass: f64,
    pub h_ref: f64,
    pub y_approx: f64,
    pub rel_err: f64,
    pub pred: f64,
    pub ratio: f64,
    pub oracle_limited: bool,
    pub error: Option<String>,
}

impl ErrorRow {
    fn failed(side: TailKind, v: f64, h_ref: f64, err: &Error) -> Self {
        ErrorRow {
            u: level(side, v),
            tail_mass: v,
            h_ref,
            y_approx: f64::NAN,
            rel_err: f64::NAN,
            pred: f64::NAN,
            ratio: f64::NAN,
            oracle_limited: false,
            error: Some(err.to_string()),
        }
    }

    /// Usable for order fitting and boundedness checks.
    pub fn is_fittable(&self) -> bool {
        self.error.is_none() && !self.oracle_limited && self.rel_err > 0.0 && self.pred > 0.0
    }
}

fn level(side: TailKind, v: f64) -> f64 {
    match side {
        TailKind::Lower => v,
        TailKind::Upper => 1.0 - v,
    }
}

/// Relative error of one method along a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurve {
    pub dist: DistributionSpec,
    pub side: TailKind,
    pub method: ApproxMethod,
    pub rows: Vec<ErrorRow>,
}

impl ErrorCurve {
    pub fn failed_rows(&self) -> usize {
        self.rows.iter().filter(|r| r.error.is_some()).count()
    }

    pub fn fittable_rows(&self) -> impl Iterator<Item = &ErrorRow> {
        self.rows.iter().filter(|r| r.is_fittable())
    }

    /// `(min, max)` of the ratio column over fittable rows.
    pub fn ratio_range(&self) -> Option<(f64, f64)> {
        self.fittable_rows().fold(None, |acc, r| match acc {
            None => Some((r.ratio, r.ratio)),
            Some((lo, hi)) => Some((lo.min(r.ratio), hi.max(r.ratio))),
        })
    }
}

fn check_failures(failed: usize, total: usize) -> Result<()> {
    if failed as f64 > MAX_FAILED_FRACTION * total as f64 {
        Err(Error::TooManyFailures { failed, total })
    } else {
        Ok(())
    }
}

/// Builds an error curve from precomputed reference quantiles, so several
/// methods can share one oracle pass.
pub fn error_curve_from_reference(
    dist: &DistributionSpec,
    side: TailKind,
    method: &ApproxMethod,
    grid: &UGrid,
    reference: &[Result<QuantileResult>],
    cfg: &OracleConfig,
) -> Result<ErrorCurve> {
    if reference.len() != grid.len() {
        return Err(Error::InvalidParams(format!(
            "{} reference values for {} grid points",
            reference.len(),
            grid.len()
        )));
    }
    let params = tail_params(dist, side)?;
    if let ApproxMethod::Expansion(k) = method {
        if *k as usize > params.max_expansion_terms() {
            return Err(Error::InvalidParams(format!(
                "{dist} {side} tail has only {} expansion terms",
                params.max_expansion_terms()
            )));
        }
    }
    let noise = ORACLE_LIMIT_FACTOR * cfg.root_tol;
    let rows: Vec<ErrorRow> = grid
        .masses()
        .iter()
        .zip(reference)
        .map(|(&v, h)| {
            let h = match h {
                Ok(q) => q.x,
                Err(e) => return ErrorRow::failed(side, v, f64::NAN, e),
            };
            let evaluated = TailMass::from_prob(v).and_then(|m| evaluate_method(dist, &params, method, m));
            match evaluated {
                Ok((y, pred)) => {
                    let rel_err = (y / h - 1.0).abs();
                    ErrorRow {
                        u: level(side, v),
                        tail_mass: v,
                        h_ref: h,
                        y_approx: y,
                        rel_err,
                        pred,
                        ratio: rel_err / pred,
                        oracle_limited: rel_err < noise,
                        error: None,
                    }
                }
                Err(e) => ErrorRow::failed(side, v, h, &e),
            }
        })
        .collect();
    let curve = ErrorCurve { dist: *dist, side, method: method.clone(), rows };
    check_failures(curve.failed_rows(), curve.rows.len())?;
    Ok(curve)
}

/// Relative error of `method` against the oracle at every grid point.
pub fn build_error_curve(
    dist: &DistributionSpec,
    side: TailKind,
    method: &ApproxMethod,
    grid: &UGrid,
    cfg: &OracleConfig,
) -> Result<ErrorCurve> {
    tail_params(dist, side)?;
    let oracle = Oracle::new(*dist, *cfg)?;
    let reference = reference_quantiles(&oracle, side, grid);
    error_curve_from_reference(dist, side, method, grid, &reference, cfg)
}

/// Error curves for several methods sharing one set of reference quantiles.
pub fn compare(
    dist: &DistributionSpec,
    side: TailKind,
    methods: &[ApproxMethod],
    grid: &UGrid,
    cfg: &OracleConfig,
) -> Result<Vec<ErrorCurve>> {
    tail_params(dist, side)?;
    let oracle = Oracle::new(*dist, *cfg)?;
    let reference = reference_quantiles(&oracle, side, grid);
    methods
        .iter()
        .map(|m| error_curve_from_reference(dist, side, m, grid, &reference, cfg))
        .collect()
}

/// Least-squares line through `(log pred, log rel_err)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Fits the observed error order against the predicted one over the
/// fittable rows of `curve`.
pub fn fit_order(curve: &ErrorCurve) -> Result<OrderFit> {
    let points: Vec<(f64, f64)> = curve.fittable_rows().map(|r| (r.pred, r.rel_err)).collect();
    fit_log_log(&points)
}

/// Fits `log y = slope * log x + intercept`.
pub fn fit_log_log(points: &[(f64, f64)]) -> Result<OrderFit> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    let n = pts.len();
    if n < 5 {
        return Err(Error::InsufficientData(format!("{n} usable rows, need at least 5")));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::InsufficientData("predicted order is constant over the rows".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r_squared = if syy > 0.0 { (1.0 - ss_res / syy).clamp(0.0, 1.0) } else { 1.0 };
    Ok(OrderFit { slope, intercept, r_squared, points: n })
}

/// One column of the expansion ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderColumn {
    pub k: usize,
    /// `|h_ref - expansion_k| / |term_{k+1}|` per grid point, NaN on failure.
    pub ratios: Vec<f64>,
    pub max_ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ladder {
    pub dist: DistributionSpec,
    pub side: TailKind,
    pub tail_masses: Vec<f64>,
    pub columns: Vec<LadderColumn>,
}

/// Residual of each partial sum measured in units of the next term.
pub fn expansion_ladder(dist: &DistributionSpec, side: TailKind, grid: &UGrid, cfg: &OracleConfig) -> Result<Ladder> {
    let params = tail_params(dist, side)?;
    if params.degenerate_b() {
        return Err(Error::InvalidParams(format!("{dist} has b = 0; the ladder needs b != 0")));
    }
    let oracle = Oracle::new(*dist, *cfg)?;
    let reference = reference_quantiles(&oracle, side, grid);
    let failed = reference.iter().filter(|r| r.is_err()).count();
    check_failures(failed, grid.len())?;

    let columns = (1..=params.effective_expansion_terms())
        .map(|k| {
            let ratios: Vec<f64> = grid
                .masses()
                .iter()
                .zip(&reference)
                .map(|(&v, h)| {
                    let h = match h {
                        Ok(q) => q.x,
                        Err(_) => return f64::NAN,
                    };
                    let ratio = || -> Result<f64> {
                        let m = TailMass::from_prob(v)?;
                        Ok((h - params.expansion(m, k)?).abs() / params.omitted_term(m, k)?)
                    };
                    ratio().unwrap_or(f64::NAN)
                })
                .collect();
            let max_ratio = ratios.iter().copied().filter(|r| !r.is_nan()).fold(f64::NAN, f64::max);
            LadderColumn { k, ratios, max_ratio }
        })
        .collect();
    Ok(Ladder { dist: *dist, side, tail_masses: grid.masses().to_vec(), columns })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(points: &[(f64, f64)]) -> ErrorCurve {
        let rows = points
            .iter()
            .map(|&(pred, rel_err)| ErrorRow {
                u: 0.0,
                tail_mass: 0.0,
                h_ref: -1.0,
                y_approx: -1.0,
                rel_err,
                pred,
                ratio: rel_err / pred,
                oracle_limited: false,
                error: None,
            })
            .collect();
        ErrorCurve { dist: DistributionSpec::Normal, side: TailKind::Lower, method: ApproxMethod::FullApproximant, rows }
    }

    #[test]
    fn grid_shapes() {
        let g = UGrid::default();
        assert_eq!(g.len(), 41);
        assert_eq!(g.masses()[0], 1e-2);
        assert_eq!(g.masses()[40], 1e-12);
        assert!((g.masses()[4] / 1e-3 - 1.0).abs() < 1e-12);
        assert!(g.masses().windows(2).all(|w| w[0] > w[1]));
        assert_eq!(UGrid::extended().masses()[98], 1e-100);
    }

    #[test]
    fn grid_rejections() {
        assert!(UGrid::geometric(1e-12, 1e-2, 10, false).is_err());
        assert!(UGrid::geometric(1e-2, 1e-12, 1, false).is_err());
        assert!(UGrid::geometric(0.7, 1e-3, 5, false).is_err());
        assert!(UGrid::geometric(1e-2, 1e-50, 5, false).is_err());
        assert!(UGrid::geometric(1e-2, 1e-50, 5, true).is_ok());
        let l = UGrid::from_list(&[1e-5, 1e-3, 1e-4, 1e-3], false).unwrap();
        assert_eq!(l.masses(), &[1e-3, 1e-4, 1e-5]);
    }

    #[test]
    fn proportional_errors_fit_slope_one() {
        let pts: Vec<(f64, f64)> = (1..=10).map(|i| (10f64.powi(-i), 3.0 * 10f64.powi(-i))).collect();
        let fit = fit_order(&synthetic(&pts)).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
        assert!((fit.intercept - 3f64.ln()).abs() < 1e-10);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn constant_errors_fit_slope_zero() {
        let pts: Vec<(f64, f64)> = (1..=10).map(|i| (10f64.powi(-i), 1e-3)).collect();
        let fit = fit_order(&synthetic(&pts)).unwrap();
        assert!(fit.slope.abs() < 1e-12);
    }

    #[test]
    fn fit_needs_five_rows() {
        let pts: Vec<(f64, f64)> = (1..=4).map(|i| (10f64.powi(-i), 10f64.powi(-i))).collect();
        assert!(matches!(fit_order(&synthetic(&pts)), Err(Error::InsufficientData(_))));
        let mut c = synthetic(&(1..=6).map(|i| (10f64.powi(-i), 10f64.powi(-i))).collect::<Vec<_>>());
        c.rows[0].oracle_limited = true;
        c.rows[1].error = Some("x".into());
        assert!(matches!(fit_order(&c), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn voutier_range_is_enforced() {
        let v = BaselineVoutier::default();
        assert!(matches!(v.eval(0.05), Err(Error::OutOfRange { .. })));
        assert!(matches!(v.eval(0.5), Err(Error::OutOfRange { .. })));
        let below = TailMass::from_ln(-700.0).unwrap();
        assert!(matches!(v.eval_mass(below), Err(Error::OutOfRange { .. })));
        assert!(v.eval(0.04).is_ok());
        assert!(v.eval_mass(TailMass::from_ln(-684.0).unwrap()).is_ok());
    }

    #[test]
    fn voutier_values() {
        let v = BaselineVoutier::default();
        // formula evaluated at 30 digits
        assert!((v.eval(1e-3).unwrap() + 3.090_241_545_203_685).abs() < 1e-14);
        assert!((v.eval(1e-10).unwrap() + 6.361_327_929_386_446).abs() < 1e-14);
        // against Phi^-1(1e-3) = -3.090232306167814 and Phi^-1(1e-10) = -6.361340902404056
        assert!((v.eval(1e-3).unwrap() + 3.090_232_306_167_814).abs() < 2.5e-5);
        assert!((v.eval(1e-10).unwrap() + 6.361_340_902_404_056).abs() < 2.5e-5);
    }

    #[test]
    fn baseline_restricted_to_normal() {
        let sn = DistributionSpec::skew_normal(1.0).unwrap();
        let p = tail_params(&sn, TailKind::Lower).unwrap();
        let m = TailMass::from_prob(1e-5).unwrap();
        let voutier = ApproxMethod::Baseline("voutier".into());
        assert!(evaluate_method(&sn, &p, &voutier, m).is_err());
        let p = tail_params(&DistributionSpec::Normal, TailKind::Upper).unwrap();
        let (y, _) = evaluate_method(&DistributionSpec::Normal, &p, &voutier, m).unwrap();
        assert!((y - 4.264_913_869_351_507).abs() < 1e-14);
    }

    #[test]
    fn omitted_term_skips_zeros() {
        let exp1 = tail_params(&DistributionSpec::gamma(1.0, 1.0).unwrap(), TailKind::Upper).unwrap();
        let m = TailMass::from_prob(1e-6).unwrap();
        // b = 0 and a = c = 1: every correction term vanishes
        assert_eq!(exp1.omitted_term(m, 1).unwrap(), exp1.expansion_remainder(m).unwrap());
        assert_eq!(exp1.effective_expansion_terms(), 3);
    }

    #[test]
    fn too_many_failures() {
        assert!(check_failures(2, 10).is_ok());
        assert!(matches!(check_failures(3, 10), Err(Error::TooManyFailures { failed: 3, total: 10 })));
    }
}
