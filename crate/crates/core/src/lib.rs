//! Closed-form approximations to extreme-tail quantile functions of
//! distributions with Generalised Gamma-type tails, an independent
//! quadrature/root-finding reference to measure them against, and the
//! Gaussian-copula tail-dependence quantities they feed into.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod distributions;
pub mod error;
pub mod gg_tail;
pub mod oracle;
pub mod quadrature;
pub mod root;
pub mod special;
pub mod tail_dependence;

pub use analysis::{
    build_error_curve, compare, expansion_ladder, fit_order, BaselineVoutier, ErrorCurve, ErrorRow, Ladder,
    OrderFit, UGrid,
};
pub use distributions::{log_pdf, tail_cdf_model, tail_params, DistributionSpec};
pub use error::{Error, Result};
pub use gg_tail::{
    gg_lower_approx, gg_lower_expansion, gg_upper_approx, gg_upper_expansion, leading_term,
    predicted_order, predicted_order_leading, ApproxMethod, GGTailParams, OrderClass, OrderPrediction,
    TailKind, TailMass,
};
pub use oracle::{Oracle, OracleConfig, QuantileResult};
pub use tail_dependence::{copula_report, CopulaParams, CopulaReport, CopulaRow, GaussianCopula};
