#![allow(dead_code)]

use tailquant::{DistributionSpec, TailKind};

/// The parameter set used across the integration suites.
pub fn supported_pairs() -> Vec<(DistributionSpec, TailKind)> {
    vec![
        (DistributionSpec::Normal, TailKind::Lower),
        (DistributionSpec::Normal, TailKind::Upper),
        (DistributionSpec::skew_normal(1.0).unwrap(), TailKind::Lower),
        (DistributionSpec::skew_normal(-1.0).unwrap(), TailKind::Lower),
        (DistributionSpec::gamma(2.0, 1.0).unwrap(), TailKind::Upper),
        (DistributionSpec::variance_gamma(0.5, 0.5).unwrap(), TailKind::Lower),
        (DistributionSpec::skew_slash(1.0, 1.0).unwrap(), TailKind::Lower),
    ]
}

/// 40-digit standard normal quantiles, `(u, Phi^-1(u))`.
pub const NORMAL_QUANTILES: [(f64, f64); 3] = [
    (1e-4, -3.719_016_485_455_680_6),
    (1e-8, -5.612_001_244_174_789),
    (1e-12, -7.034_483_825_301_132),
];
