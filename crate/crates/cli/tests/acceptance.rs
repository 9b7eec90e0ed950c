//! Acceptance criteria, one verdict line each. Exits non-zero if any
//! criterion fails.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use tailquant::analysis::{BaselineVoutier, UGrid};
use tailquant::distributions::ln_tail_cdf_model;
use tailquant::{
    build_error_curve, compare, copula_report, expansion_ladder, fit_order, tail_params, ApproxMethod,
    CopulaParams, DistributionSpec, Oracle, OracleConfig, TailKind, TailMass,
};

const ROUND_TRIP_TOL: f64 = 1e-10;
const ROUND_TRIP_RUNTIME: Duration = Duration::from_secs(60);
const RATIO_SPREAD_MAX: f64 = 10.0;
const RATIO_MAX: f64 = 100.0;
const SLOPE_RANGE: (f64, f64) = (0.7, 1.3);
const R_SQUARED_MIN: f64 = 0.9;
const LEADING_GAP_MIN: f64 = 3.0;
const LEADING_GAP_FROM: f64 = 1e-4;
const LADDER_MAX: f64 = 100.0;
const VOUTIER_ABS_TOL: f64 = 1e-6;
const COPULA_EXACT_TOL: f64 = 1e-9;
const COPULA_RHOS: [f64; 3] = [0.25, 0.5, 0.75];
const FIDELITY_RANGE: (f64, f64) = (5.0, 20.0);
const FIDELITY_POINTS: usize = 31;
const FIDELITY_SPREAD_MAX: f64 = 10.0;

type Check = fn() -> Verdict;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn from_failures(failures: Vec<String>, ok: String) -> Self {
        if failures.is_empty() {
            Verdict { pass: true, detail: ok }
        } else {
            Verdict { pass: false, detail: failures.join("; ") }
        }
    }
}

fn pairs() -> Vec<(DistributionSpec, TailKind)> {
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

fn cfg() -> OracleConfig {
    OracleConfig::default()
}

fn label(dist: &DistributionSpec, side: TailKind) -> String {
    format!("{dist} {side}")
}

fn oracle_round_trip() -> Verdict {
    let start = Instant::now();
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for (dist, side) in pairs() {
        let o = Oracle::new(dist, cfg()).unwrap();
        for &v in UGrid::default().masses() {
            let m = TailMass::from_prob(v).unwrap();
            let rel = o
                .tail_quantile(side, m)
                .and_then(|q| o.log_tail_mass(side, q.x))
                .map(|ln_back| (ln_back - m.ln()).exp_m1().abs());
            match rel {
                Ok(r) if r <= ROUND_TRIP_TOL => worst = worst.max(r),
                Ok(r) => failures.push(format!("{} u = {v:e}: {r:e}", label(&dist, side))),
                Err(e) => failures.push(format!("{} u = {v:e}: {e}", label(&dist, side))),
            }
        }
    }
    let elapsed = start.elapsed();
    if elapsed > ROUND_TRIP_RUNTIME {
        failures.push(format!("took {elapsed:?}"));
    }
    Verdict::from_failures(failures, format!("worst residual {worst:.2e}, {:.2} s", elapsed.as_secs_f64()))
}

fn ratio_boundedness() -> Verdict {
    let mut failures = Vec::new();
    let mut spreads = Vec::new();
    for (dist, side) in pairs() {
        let curve = match build_error_curve(&dist, side, &ApproxMethod::FullApproximant, &UGrid::default(), &cfg()) {
            Ok(c) => c,
            Err(e) => {
                failures.push(format!("{}: {e}", label(&dist, side)));
                continue;
            }
        };
        match curve.ratio_range() {
            Some((lo, hi)) if hi / lo < RATIO_SPREAD_MAX && hi < RATIO_MAX => spreads.push(hi / lo),
            Some((lo, hi)) => failures.push(format!("{}: ratio in [{lo:.3}, {hi:.3}]", label(&dist, side))),
            None => failures.push(format!("{}: no usable rows", label(&dist, side))),
        }
    }
    let widest = spreads.iter().copied().fold(0.0, f64::max);
    Verdict::from_failures(failures, format!("widest max/min {widest:.2}"))
}

fn order_fit() -> Verdict {
    let mut failures = Vec::new();
    let mut fits = Vec::new();
    for (dist, side) in pairs() {
        let fit = build_error_curve(&dist, side, &ApproxMethod::FullApproximant, &UGrid::default(), &cfg())
            .and_then(|c| fit_order(&c));
        match fit {
            Ok(f) if (SLOPE_RANGE.0..=SLOPE_RANGE.1).contains(&f.slope) && f.r_squared >= R_SQUARED_MIN => {
                fits.push(format!("{}: {:.3}", label(&dist, side), f.slope))
            }
            Ok(f) => failures.push(format!("{}: slope {:.4}, r2 {:.4}", label(&dist, side), f.slope, f.r_squared)),
            Err(e) => failures.push(format!("{}: {e}", label(&dist, side))),
        }
    }
    Verdict::from_failures(failures, fits.join(", "))
}

fn leading_term_gap() -> Verdict {
    let methods = [ApproxMethod::LeadingTerm, ApproxMethod::FullApproximant];
    let curves =
        match compare(&DistributionSpec::Normal, TailKind::Lower, &methods, &UGrid::default(), &cfg()) {
            Ok(c) => c,
            Err(e) => return Verdict { pass: false, detail: e.to_string() },
        };
    let mut failures = Vec::new();
    let mut min_gap = f64::INFINITY;
    for (lead, full) in curves[0].rows.iter().zip(&curves[1].rows) {
        if lead.tail_mass > LEADING_GAP_FROM {
            continue;
        }
        let gap = lead.rel_err / full.rel_err;
        min_gap = min_gap.min(gap);
        if !(gap >= LEADING_GAP_MIN) {
            failures.push(format!("u = {:e}: gap {gap:.3}", lead.u));
        }
    }
    match curves[0].ratio_range() {
        Some((lo, hi)) if hi / lo < RATIO_SPREAD_MAX => {}
        Some((lo, hi)) => failures.push(format!("leading ratio in [{lo:.3}, {hi:.3}]")),
        None => failures.push("no usable leading-term rows".into()),
    }
    Verdict::from_failures(failures, format!("smallest gap {min_gap:.2}"))
}

fn expansion_ladder_bound() -> Verdict {
    let ladder = match expansion_ladder(&DistributionSpec::Normal, TailKind::Lower, &UGrid::default(), &cfg()) {
        Ok(l) => l,
        Err(e) => return Verdict { pass: false, detail: e.to_string() },
    };
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    for k in 1..=4 {
        match ladder.columns.iter().find(|c| c.k == k) {
            Some(c) if c.ratios.iter().all(|r| *r <= LADDER_MAX) => summary.push(format!("k={k}: {:.2}", c.max_ratio)),
            Some(c) => failures.push(format!("k={k}: max {:.3}", c.max_ratio)),
            None => failures.push(format!("k={k}: missing")),
        }
    }
    Verdict::from_failures(failures, summary.join(", "))
}

fn voutier_baseline() -> Verdict {
    let grid = UGrid::default();
    let inside: Vec<f64> = grid
        .masses()
        .iter()
        .copied()
        .filter(|&u| u < BaselineVoutier::U_MAX && u.ln() > BaselineVoutier::LN_U_MIN)
        .collect();
    let grid = UGrid::from_list(&inside, false).unwrap();
    let curve = match build_error_curve(
        &DistributionSpec::Normal,
        TailKind::Lower,
        &ApproxMethod::Baseline(BaselineVoutier::NAME.into()),
        &grid,
        &cfg(),
    ) {
        Ok(c) => c,
        Err(e) => return Verdict { pass: false, detail: e.to_string() },
    };
    let mut worst = (0.0f64, 0.0);
    for r in &curve.rows {
        let abs = (r.y_approx - r.h_ref).abs();
        if !(abs <= worst.0) {
            worst = (abs, r.u);
        }
    }
    let failing = curve.rows.iter().filter(|r| !((r.y_approx - r.h_ref).abs() <= VOUTIER_ABS_TOL)).count();
    let detail = format!("max |y_V - h| = {:.3e} at u = {:e}, {failing} of {} points above {VOUTIER_ABS_TOL:e}", worst.0, worst.1, curve.rows.len());
    Verdict { pass: failing == 0, detail }
}

fn copula_exact_case() -> Verdict {
    let report = match copula_report(&CopulaParams::new(0.0).unwrap(), &UGrid::default(), &cfg()) {
        Ok(r) => r,
        Err(e) => return Verdict { pass: false, detail: e.to_string() },
    };
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    for r in &report.rows {
        let errs = [r.lambda / (2.0 * r.u) - 1.0, r.lambda_l / r.u - 1.0, r.lambda_asym / (2.0 * r.u) - 1.0];
        let e = errs.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if !(e <= COPULA_EXACT_TOL) {
            failures.push(format!("u = {:e}: {e:e}", r.u));
        } else {
            worst = worst.max(e);
        }
    }
    Verdict::from_failures(failures, format!("worst relative error {worst:.2e}"))
}

fn copula_convergence() -> Verdict {
    let grid = UGrid::from_list(&[1e-3, 1e-8], false).unwrap();
    let mut failures = Vec::new();
    let mut summary = Vec::new();
    for rho in COPULA_RHOS {
        let report = match copula_report(&CopulaParams::new(rho).unwrap(), &grid, &cfg()) {
            Ok(r) => r,
            Err(e) => {
                failures.push(format!("rho = {rho}: {e}"));
                continue;
            }
        };
        let (shallow, deep) = (&report.rows[0], &report.rows[1]);
        let d1 = ((shallow.ratio1 - 1.0).abs(), (deep.ratio1 - 1.0).abs());
        let d2 = ((shallow.ratio2 - 1.0).abs(), (deep.ratio2 - 1.0).abs());
        if d1.1 < d1.0 && d2.1 < d2.0 {
            summary.push(format!("rho={rho}: {:.3e}->{:.3e}, {:.3e}->{:.3e}", d1.0, d1.1, d2.0, d2.1));
        } else {
            failures.push(format!("rho = {rho}: ratio1 {:.3e}->{:.3e}, ratio2 {:.3e}->{:.3e}", d1.0, d1.1, d2.0, d2.1));
        }
    }
    Verdict::from_failures(failures, summary.join(", "))
}

fn model_fidelity() -> Verdict {
    let mut failures = Vec::new();
    let mut spreads = Vec::new();
    for (dist, side) in pairs() {
        let o = Oracle::new(dist, cfg()).unwrap();
        let e = tail_params(&dist, side).unwrap().e();
        let (lo_x, hi_x) = FIDELITY_RANGE;
        let scaled: Result<Vec<f64>, _> = (0..FIDELITY_POINTS)
            .map(|i| {
                let ax = lo_x + (hi_x - lo_x) * i as f64 / (FIDELITY_POINTS - 1) as f64;
                let x = side.sign() * ax;
                let truth = o.log_tail_mass(side, x)?;
                let model = ln_tail_cdf_model(&dist, side, x)?;
                Ok::<f64, tailquant::Error>((truth - model).exp_m1().abs() * ax.powf(e))
            })
            .collect();
        match scaled {
            Ok(k) => {
                let (lo, hi) = k.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
                if lo > 0.0 && hi / lo < FIDELITY_SPREAD_MAX {
                    spreads.push(hi / lo);
                } else {
                    failures.push(format!("{}: scaled error in [{lo:.3e}, {hi:.3e}]", label(&dist, side)));
                }
            }
            Err(err) => failures.push(format!("{}: {err}", label(&dist, side))),
        }
    }
    let widest = spreads.iter().copied().fold(0.0, f64::max);
    Verdict::from_failures(failures, format!("widest max/min {widest:.2}"))
}

fn cli_determinism() -> Verdict {
    let specs: [&[&str]; 5] = [
        &["quantile", "--dist", "normal", "--side", "lower", "--u", "1e-6", "--method", "full"],
        &["compare", "--dist", "normal", "--side", "lower", "--grid", "1e-3:1e-12:40", "--methods", "leading,full,expansion4,voutier"],
        &["taildep", "--rho", "0", "--grid", "1e-2:1e-8:13"],
        &["error-curve", "--dist", "variance-gamma", "--theta", "0.5", "--nu", "0.5", "--method", "expansion2"],
        &["ladder", "--dist", "gamma", "--alpha", "2", "--beta", "1", "--side", "upper"],
    ];
    let run = |args: &[&str], threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_tailquant")).args(args).env("TAILQUANT_THREADS", threads).output()
    };
    let mut failures = Vec::new();
    for args in specs {
        let name = args[0];
        match ["4", "4", "1"].iter().map(|t| run(args, t)).collect::<Result<Vec<_>, _>>() {
            Err(e) => failures.push(format!("{name}: {e}")),
            Ok(o) => {
                if !o.iter().all(|x| x.status.success()) {
                    failures.push(format!("{name}: non-zero exit"));
                } else if o[0].stdout != o[1].stdout {
                    failures.push(format!("{name}: repeated runs differ"));
                } else if o[0].stdout != o[2].stdout {
                    failures.push(format!("{name}: output depends on thread count"));
                }
            }
        }
    }
    Verdict::from_failures(failures, format!("{} specs byte-identical across runs", specs.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, Check); 10] = [
        ("oracle round trip", oracle_round_trip),
        ("ratio boundedness", ratio_boundedness),
        ("order fit", order_fit),
        ("leading-term gap", leading_term_gap),
        ("expansion ladder", expansion_ladder_bound),
        ("voutier baseline", voutier_baseline),
        ("copula exact case", copula_exact_case),
        ("copula convergence", copula_convergence),
        ("model fidelity", model_fidelity),
        ("cli determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {:>2} {name:<20} {status}  {}", i + 1, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
