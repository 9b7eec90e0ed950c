//! Generalised Gamma-type tail model and its closed-form quantile approximants.
//!
//! A CDF has a Generalised Gamma-type lower tail when
//!
//! ```text
//! g(x) = a |x|^b exp(-c |x|^d) (1 + O(|x|^-e)),     x -> -inf
//! ```
//!
//! and the mirrored upper tail `1 - g(x)` of the same form as `x -> +inf`.
//! Inverting the leading factor recursively gives the approximant
//!
//! ```text
//! y(u) = -{ (-b/(cd)) log[ (cd/|b|)(u/a)^(d/b) / |log((cd/|b|) u^(d/b))| ] }^(1/d)
//! ```
//!
//! whose relative error against the true quantile is
//! `O(log|log u| / (log u)^2)` when `d <= e` and `O(|log u|^-(e/d + 1))`
//! otherwise. Upper-tail formulas are obtained with `u -> 1 - u` and a sign
//! flip.
//!
//! Every formula is evaluated from the logarithm of the tail mass
//! ([`TailMass`]) so that probabilities far below `f64::MIN_POSITIVE` are
//! still usable, e.g. when composing with the exact tail model at `|x| = 50`.

use std::fmt;

use crate::error::{Error, Result};

/// Which tail of a distribution is being modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TailKind {
    Lower,
    Upper,
}

impl TailKind {
    pub fn name(self) -> &'static str {
        match self {
            TailKind::Lower => "lower",
            TailKind::Upper => "upper",
        }
    }

    /// `-1` for the lower tail, `+1` for the upper tail.
    pub fn sign(self) -> f64 {
        match self {
            TailKind::Lower => -1.0,
            TailKind::Upper => 1.0,
        }
    }
}

impl fmt::Display for TailKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Probability mass beyond a quantile, held as its natural logarithm.
///
/// For the lower tail this is `u`, for the upper tail `1 - u`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct TailMass {
    ln: f64,
}

impl TailMass {
    /// Tail mass of probability level `u` on `side`. Requires `0 < u < 1`.
    pub fn from_level(side: TailKind, u: f64) -> Result<Self> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("probability level u = {u} not in (0, 1)")));
        }
        let v = match side {
            TailKind::Lower => u,
            TailKind::Upper => 1.0 - u,
        };
        Ok(TailMass { ln: v.ln() })
    }

    /// Tail mass given directly as a probability in (0, 1).
    pub fn from_prob(v: f64) -> Result<Self> {
        Self::from_level(TailKind::Lower, v)
    }

    /// Tail mass given by its logarithm, which must be negative.
    pub fn from_ln(ln_v: f64) -> Result<Self> {
        if !(ln_v < 0.0) || ln_v.is_infinite() {
            return Err(Error::Domain(format!("log tail mass {ln_v} must be finite and negative")));
        }
        Ok(TailMass { ln: ln_v })
    }

    pub fn ln(self) -> f64 {
        self.ln
    }

    /// The mass as a plain probability (may underflow to zero).
    pub fn prob(self) -> f64 {
        self.ln.exp()
    }

    /// Probability level `u` on `side` (`1 - v` for the upper tail).
    pub fn level(self, side: TailKind) -> f64 {
        match side {
            TailKind::Lower => self.prob(),
            TailKind::Upper => -self.ln.exp_m1(),
        }
    }

    /// `|log v| > 1`, the weakest condition under which `log|log v|` is
    /// positive and every displayed expansion term is real.
    fn require_asymptotic(self) -> Result<()> {
        if -self.ln > 1.0 {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "tail mass exp({}) is not below 1/e; asymptotic formulas need |log v| > 1",
                self.ln
            )))
        }
    }
}

/// The five tail constants `(a, b, c, d, e)` and the tail they describe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GGTailParams {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
    e: f64,
    side: TailKind,
}

impl GGTailParams {
    pub fn new(a: f64, b: f64, c: f64, d: f64, e: f64, side: TailKind) -> Result<Self> {
        for (name, value) in [("a", a), ("c", c), ("d", d), ("e", e)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::InvalidParams(format!("{name} = {value} must be positive and finite")));
            }
        }
        if !b.is_finite() {
            return Err(Error::InvalidParams(format!("b = {b} must be finite")));
        }
        Ok(GGTailParams { a, b, c, d, e, side })
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn b(&self) -> f64 {
        self.b
    }
    pub fn c(&self) -> f64 {
        self.c
    }
    pub fn d(&self) -> f64 {
        self.d
    }
    pub fn e(&self) -> f64 {
        self.e
    }
    pub fn side(&self) -> TailKind {
        self.side
    }

    /// `b = 0`: the power factor is absent and the tail inverts exactly.
    pub fn degenerate_b(&self) -> bool {
        self.b == 0.0
    }

    /// Same constants describing the other tail.
    pub fn mirrored(&self) -> Self {
        let side = match self.side {
            TailKind::Lower => TailKind::Upper,
            TailKind::Upper => TailKind::Lower,
        };
        GGTailParams { side, ..*self }
    }

    /// Number of expansion terms available: four when `d <= e`, three otherwise.
    pub fn max_expansion_terms(&self) -> usize {
        if self.d <= self.e {
            4
        } else {
            3
        }
    }

    fn require_side(&self, side: TailKind) -> Result<()> {
        if self.side == side {
            Ok(())
        } else {
            Err(Error::InvalidParams(format!(
                "parameters describe the {} tail, {} tail requested",
                self.side, side
            )))
        }
    }

    /// Logarithm of the exact tail model `a |x|^b exp(-c |x|^d)`.
    pub fn ln_model(&self, x: f64) -> f64 {
        let ax = x.abs();
        self.a.ln() + self.b * ax.ln() - self.c * ax.powf(self.d)
    }

    /// The full approximant `y` at the given tail mass, signed for the tail.
    pub fn approximant(&self, mass: TailMass) -> Result<f64> {
        let ln_v = mass.ln();
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let magnitude = if self.degenerate_b() {
            let t = -(ln_v - a.ln()) / c;
            if !(t > 0.0) {
                return Err(Error::Domain(format!(
                    "tail mass exp({ln_v}) is not below a = {a}; exact inversion undefined"
                )));
            }
            t.powf(1.0 / d)
        } else {
            let log_k = (c * d / b.abs()).ln();
            let r = d / b;
            let numerator = log_k + r * (ln_v - a.ln());
            let inner = log_k + r * ln_v;
            if inner == 0.0 {
                return Err(Error::Domain(format!("inner logarithm vanishes at log u = {ln_v}")));
            }
            let bracket = (-b / (c * d)) * (numerator - inner.abs().ln());
            if !(bracket > 0.0) || !bracket.is_finite() {
                return Err(Error::Domain(format!(
                    "approximant bracket {bracket} is not positive at log u = {ln_v}; u is outside the asymptotic regime"
                )));
            }
            bracket.powf(1.0 / d)
        };
        Ok(self.side.sign() * magnitude)
    }

    /// Dominant term `(-(1/c) log v)^(1/d)`, signed for the tail.
    pub fn leading(&self, mass: TailMass) -> f64 {
        self.side.sign() * (-mass.ln() / self.c).powf(1.0 / self.d)
    }

    /// The displayed expansion terms, signed for the tail. Entries past
    /// [`max_expansion_terms`](Self::max_expansion_terms) are zero.
    pub fn expansion_terms(&self, mass: TailMass) -> Result<[f64; 4]> {
        mass.require_asymptotic()?;
        let ln_v = mass.ln();
        let (a, b, c, d) = (self.a, self.b, self.c, self.d);
        let w = -ln_v / c;
        let loglog = (-ln_v).ln();
        let scale1 = c * d * d * w.powf(1.0 - 1.0 / d);
        // b * log(a^(d/b) / c), written so that b = 0 stays finite
        let b_log_ratio = d * a.ln() - b * c.ln();
        let sign = self.side.sign();
        let mut terms = [
            w.powf(1.0 / d),
            b * loglog / scale1,
            b_log_ratio / scale1,
            0.0,
        ];
        if self.max_expansion_terms() == 4 {
            terms[3] = b * b * (0.5 / d - 0.5) * loglog * loglog / (c * c * d.powi(3) * w.powf(2.0 - 1.0 / d));
        }
        Ok(terms.map(|t| sign * t))
    }

    /// Partial sum of the first `k` expansion terms.
    pub fn expansion(&self, mass: TailMass, k: usize) -> Result<f64> {
        let max = self.max_expansion_terms();
        if k == 0 || k > max {
            return Err(Error::InvalidParams(format!(
                "expansion order k = {k} outside 1..={max} (d = {}, e = {})",
                self.d, self.e
            )));
        }
        let terms = self.expansion_terms(mass)?;
        let mut kept: Vec<f64> = terms[..k].to_vec();
        kept.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
        Ok(kept.into_iter().sum())
    }

    /// Magnitude of the order symbol that closes the expansion:
    /// `log|log v| / |log v|^(2 - 1/d)` when `d <= e`,
    /// `|log v|^-(e/d + 1 - 1/d)` otherwise.
    pub fn expansion_remainder(&self, mass: TailMass) -> Result<f64> {
        mass.require_asymptotic()?;
        let l = -mass.ln();
        let d = self.d;
        Ok(if self.d <= self.e {
            l.ln() / l.powf(2.0 - 1.0 / d)
        } else {
            l.powf(-(self.e / d + 1.0 - 1.0 / d))
        })
    }

    /// Number of expansion terms that are not identically zero. The
    /// squared log-log term vanishes for `d = 1`.
    pub fn effective_expansion_terms(&self) -> usize {
        if self.max_expansion_terms() == 4 && self.d != 1.0 {
            4
        } else {
            3
        }
    }

    /// Magnitude of the first non-zero term left out of the `k`-term partial
    /// sum, or of the closing order symbol when none is left.
    pub fn omitted_term(&self, mass: TailMass, k: usize) -> Result<f64> {
        let terms = self.expansion_terms(mass)?;
        let n = self.effective_expansion_terms();
        match terms.iter().take(n).skip(k).find(|t| **t != 0.0) {
            Some(t) => Ok(t.abs()),
            None => self.expansion_remainder(mass),
        }
    }

    /// Relative-error order of the full approximant.
    pub fn order(&self, mass: TailMass) -> Result<OrderPrediction> {
        mass.require_asymptotic()?;
        let class = if self.d <= self.e {
            OrderClass::LogLogOverLogSq
        } else {
            OrderClass::PowerOfInverseLog(self.e / self.d + 1.0)
        };
        Ok(OrderPrediction { class, value: class.evaluate(mass) })
    }

    /// Relative-error order `log|log v| / |log v|` of the leading term alone.
    pub fn order_leading(&self, mass: TailMass) -> Result<f64> {
        mass.require_asymptotic()?;
        let l = -mass.ln();
        Ok(l.ln() / l)
    }
}

/// The two shapes the relative-error order can take.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderClass {
    /// `log|log v| / (log v)^2`
    LogLogOverLogSq,
    /// `|log v|^-p`
    PowerOfInverseLog(f64),
}

impl OrderClass {
    pub fn evaluate(&self, mass: TailMass) -> f64 {
        let l = -mass.ln();
        match *self {
            OrderClass::LogLogOverLogSq => l.ln() / (l * l),
            OrderClass::PowerOfInverseLog(p) => l.powf(-p),
        }
    }
}

/// A predicted relative-error order evaluated at one tail mass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderPrediction {
    pub class: OrderClass,
    pub value: f64,
}

/// Selects which approximant to evaluate.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ApproxMethod {
    LeadingTerm,
    FullApproximant,
    /// Partial sum of the first `k` displayed expansion terms, `1 <= k <= 4`.
    Expansion(u8),
    /// A named published approximation (only `"voutier"` is known).
    Baseline(String),
}

impl ApproxMethod {
    /// Short stable label, also accepted by [`str::parse`].
    pub fn label(&self) -> String {
        match self {
            ApproxMethod::LeadingTerm => "leading".to_string(),
            ApproxMethod::FullApproximant => "full".to_string(),
            ApproxMethod::Expansion(k) => format!("expansion{k}"),
            ApproxMethod::Baseline(name) => name.clone(),
        }
    }
}

impl fmt::Display for ApproxMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl std::str::FromStr for ApproxMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "leading" | "leading-term" => Ok(ApproxMethod::LeadingTerm),
            "full" | "approximant" => Ok(ApproxMethod::FullApproximant),
            "voutier" => Ok(ApproxMethod::Baseline(s)),
            _ => {
                let k = s
                    .strip_prefix("expansion")
                    .and_then(|k| k.trim_start_matches(':').parse::<u8>().ok())
                    .ok_or_else(|| Error::InvalidParams(format!("unknown method '{s}'")))?;
                if (1..=4).contains(&k) {
                    Ok(ApproxMethod::Expansion(k))
                } else {
                    Err(Error::InvalidParams(format!("expansion order {k} outside 1..=4")))
                }
            }
        }
    }
}

/// Lower-tail approximant `y(u)`.
pub fn gg_lower_approx(params: &GGTailParams, u: f64) -> Result<f64> {
    params.require_side(TailKind::Lower)?;
    params.approximant(TailMass::from_level(TailKind::Lower, u)?)
}

/// Upper-tail approximant, a function of `1 - u`.
pub fn gg_upper_approx(params: &GGTailParams, u: f64) -> Result<f64> {
    params.require_side(TailKind::Upper)?;
    params.approximant(TailMass::from_level(TailKind::Upper, u)?)
}

pub fn gg_lower_expansion(params: &GGTailParams, u: f64, k: usize) -> Result<f64> {
    params.require_side(TailKind::Lower)?;
    params.expansion(TailMass::from_level(TailKind::Lower, u)?, k)
}

pub fn gg_upper_expansion(params: &GGTailParams, u: f64, k: usize) -> Result<f64> {
    params.require_side(TailKind::Upper)?;
    params.expansion(TailMass::from_level(TailKind::Upper, u)?, k)
}

pub fn leading_term(params: &GGTailParams, u: f64) -> Result<f64> {
    let mass = TailMass::from_level(params.side, u)?;
    Ok(params.leading(mass))
}

pub fn predicted_order(params: &GGTailParams, u: f64) -> Result<OrderPrediction> {
    params.order(TailMass::from_level(params.side, u)?)
}

pub fn predicted_order_leading(params: &GGTailParams, u: f64) -> Result<f64> {
    params.order_leading(TailMass::from_level(params.side, u)?)
}
