mod common;

use tailquant::distributions::ln_tail_cdf_model;
use tailquant::{tail_params, DistributionSpec, Oracle, OracleConfig, TailKind};

/// `|F(x) / model(x) - 1| |x|^e` over `|x|` in [5, 20].
fn scaled_model_error(dist: DistributionSpec, side: TailKind) -> Vec<f64> {
    let o = Oracle::new(dist, OracleConfig::default()).unwrap();
    let e = tail_params(&dist, side).unwrap().e();
    (0..=30)
        .map(|i| {
            let ax = 5.0 + 0.5 * i as f64;
            let x = side.sign() * ax;
            let truth = o.log_tail_mass(side, x).unwrap();
            let model = ln_tail_cdf_model(&dist, side, x).unwrap();
            (truth - model).exp_m1().abs() * ax.powf(e)
        })
        .collect()
}

#[test]
fn correction_factor_has_the_stated_order() {
    let cases = [
        (DistributionSpec::Normal, TailKind::Lower),
        (DistributionSpec::Normal, TailKind::Upper),
        (DistributionSpec::skew_normal(1.0).unwrap(), TailKind::Lower),
        (DistributionSpec::skew_normal(-1.0).unwrap(), TailKind::Lower),
        (DistributionSpec::skew_normal(2.5).unwrap(), TailKind::Lower),
        (DistributionSpec::gamma(2.0, 1.0).unwrap(), TailKind::Upper),
        (DistributionSpec::gamma(0.5, 2.0).unwrap(), TailKind::Upper),
        (DistributionSpec::variance_gamma(0.5, 0.5).unwrap(), TailKind::Lower),
        (DistributionSpec::variance_gamma(-0.4, 2.0).unwrap(), TailKind::Lower),
        (DistributionSpec::skew_slash(1.0, 2.0).unwrap(), TailKind::Lower),
        (DistributionSpec::skew_slash(0.5, 0.5).unwrap(), TailKind::Lower),
    ];
    for (dist, side) in cases {
        let k = scaled_model_error(dist, side);
        let (lo, hi) = k.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        assert!(lo > 0.0 && hi / lo < 10.0, "{dist} {side}: K in [{lo}, {hi}]");
    }
}

#[test]
fn skew_slash_unit_shape_model_is_exact() {
    // the |x|^-1 correction vanishes for lambda = 1
    let dist = DistributionSpec::skew_slash(1.0, 1.0).unwrap();
    let k = scaled_model_error(dist, TailKind::Lower);
    assert!(k[0] > 0.0);
    assert!(k[10..].iter().all(|&v| v < 1e-9), "{k:?}");
}

#[test]
fn skew_normal_negative_shape_doubles_normal_amplitude() {
    let n = tail_params(&DistributionSpec::Normal, TailKind::Lower).unwrap();
    for lambda in [-0.2, -1.0, -7.0] {
        let s = tail_params(&DistributionSpec::skew_normal(lambda).unwrap(), TailKind::Lower).unwrap();
        assert!((s.a() / n.a() - 2.0).abs() < 1e-15);
        assert_eq!((s.b(), s.c(), s.d(), s.e()), (n.b(), n.c(), n.d(), n.e()));
    }
}
