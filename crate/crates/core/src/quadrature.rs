//! Globally adaptive Gauss-Kronrod (10/21-point) integration.
//!
//! The panel with the largest error estimate is bisected until the summed
//! error meets `max(abs_tol, rel_tol * |I|)`. Panel values are accumulated
//! with Neumaier summation, so results are reproducible bit for bit for a
//! given integrand and tolerance. Infinite limits are handled by mapping
//! `t = x0 +/- scale * s / (1 - s)` onto `s` in `[0, 1)`.

use crate::error::{Error, Result};

// Kronrod abscissae (positive half, descending) and weights; Gauss 10-point
// weights for the odd-indexed Kronrod nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Integration tolerances and subdivision budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature { abs_tol: 1e-14, rel_tol: 1e-12, max_panels: 2000 }
    }
}

/// Integral estimate with its error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    splittable: bool,
}

/// Compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let eval = |x: f64| -> Result<f64> {
        let y = f(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::QuadratureFailure(format!("integrand is {y} at t = {x}")))
        }
    };

    let fc = eval(center)?;
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = eval(center - dx)?;
        let f2 = eval(center + dx)?;
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }

    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    let splittable = (b - a).abs() > 1e3 * f64::EPSILON * (a.abs() + b.abs()).max(f64::MIN_POSITIVE);
    Ok(Panel { a, b, value, error, splittable })
}

impl Quadrature {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Quadrature { abs_tol, rel_tol, ..Default::default() }
    }

    /// `int_a^b f(t) dt` over a finite interval.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<Estimate> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::QuadratureFailure(format!("non-finite limits [{a}, {b}]")));
        }
        if a == b {
            return Ok(Estimate { value: 0.0, error: 0.0, panels: 0 });
        }
        let mid = 0.5 * (a + b);
        let mut panels = vec![gk21(&f, a, mid)?, gk21(&f, mid, b)?];
        loop {
            let mut value = NeumaierSum::default();
            let mut error = NeumaierSum::default();
            for p in &panels {
                value.add(p.value);
                error.add(p.error);
            }
            let (value, error) = (value.total(), error.total());
            let tol = self.abs_tol.max(self.rel_tol * value.abs());
            if error <= tol {
                return Ok(Estimate { value, error, panels: panels.len() });
            }
            if panels.len() >= self.max_panels {
                return Err(Error::QuadratureFailure(format!(
                    "error estimate {error:e} above tolerance {tol:e} after {} panels",
                    panels.len()
                )));
            }
            let worst = panels
                .iter()
                .enumerate()
                .filter(|(_, p)| p.splittable)
                .max_by(|(_, p), (_, q)| p.error.total_cmp(&q.error))
                .map(|(i, _)| i)
                .ok_or_else(|| {
                    Error::QuadratureFailure(format!(
                        "error estimate {error:e} above tolerance {tol:e} at round-off limit"
                    ))
                })?;
            let p = panels.swap_remove(worst);
            let m = 0.5 * (p.a + p.b);
            panels.push(gk21(&f, p.a, m)?);
            panels.push(gk21(&f, m, p.b)?);
        }
    }

    /// `int_x0^inf f(t) dt`; `scale` should be comparable to the decay length.
    pub fn integrate_to_infinity<F: Fn(f64) -> f64>(&self, f: F, x0: f64, scale: f64) -> Result<Estimate> {
        self.integrate(
            |s| {
                let t = x0 + scale * s / (1.0 - s);
                if t.is_infinite() {
                    return 0.0;
                }
                let jac = scale / ((1.0 - s) * (1.0 - s));
                let y = f(t);
                if y == 0.0 {
                    0.0
                } else {
                    y * jac
                }
            },
            0.0,
            1.0,
        )
    }

    /// `int_-inf^x0 f(t) dt`.
    pub fn integrate_from_neg_infinity<F: Fn(f64) -> f64>(
        &self,
        f: F,
        x0: f64,
        scale: f64,
    ) -> Result<Estimate> {
        self.integrate_to_infinity(|r| f(2.0 * x0 - r), x0, scale)
    }
}
