//! Adaptive Gauss–Kronrod (10/21) integration on finite intervals, and a
//! decade-panel scheme for half-lines with a caller-supplied analytic tail.

use serde::{Deserialize, Serialize};

use crate::error::{domain, LabError, Result};

/// Tolerances and limits shared by every quadrature-backed evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
    pub tail_cutoff_decades: u32,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_subdivisions: 2000,
            tail_cutoff_decades: 12,
        }
    }
}

impl QuadratureSpec {
    pub fn new(rel_tol: f64, abs_tol: f64, max_subdivisions: usize, tail_cutoff_decades: u32) -> Result<Self> {
        let spec = QuadratureSpec { rel_tol, abs_tol, max_subdivisions, tail_cutoff_decades };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return domain("quadrature tolerances must be positive");
        }
        if self.max_subdivisions < 10 {
            return domain("max_subdivisions must be at least 10");
        }
        Ok(())
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Result<Self> {
        self.rel_tol = rel_tol;
        self.validate()?;
        Ok(self)
    }

    pub fn with_abs_tol(mut self, abs_tol: f64) -> Result<Self> {
        self.abs_tol = abs_tol;
        self.validate()?;
        Ok(self)
    }
}

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

/// One 21-point Kronrod panel. Returns `(estimate, error)`.
///
/// The error uses the usual `resasc` scaling and a roundoff floor.
pub fn gk21<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[10];
    let mut res_g = 0.0;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
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
    let result = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (result, err)
}

struct Panel {
    a: f64,
    b: f64,
    est: f64,
    err: f64,
}

/// Globally adaptive integration of `f` over the finite interval `[a, b]`.
///
/// Bisects the panel with the largest error until the summed error meets
/// `max(abs_tol, rel_tol·|I|)`. Failing to converge within
/// `max_subdivisions` panels is a [`LabError::Numeric`].
pub fn integrate<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return domain(format!("finite interval required, got [{a}, {b}]"));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate(f, b, a, spec).map(|v| -v);
    }
    let (est, err) = gk21(f, a, b);
    let mut panels = vec![Panel { a, b, est, err }];
    loop {
        let total: f64 = panels.iter().map(|p| p.est).sum();
        let total_err: f64 = panels.iter().map(|p| p.err).sum();
        if !total.is_finite() {
            return Err(LabError::Numeric(format!("non-finite integrand on [{a}, {b}]")));
        }
        if total_err <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
            return Ok(total);
        }
        if panels.len() >= spec.max_subdivisions {
            return Err(LabError::Numeric(format!(
                "no convergence on [{a}, {b}] after {} subdivisions (estimate {total:e}, error {total_err:e})",
                panels.len()
            )));
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.err.total_cmp(&y.1.err))
            .map(|(i, _)| i)
            .expect("nonempty");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            return Err(LabError::Numeric(format!(
                "panel [{}, {}] cannot be bisected further",
                p.a, p.b
            )));
        }
        let (e1, r1) = gk21(f, p.a, mid);
        let (e2, r2) = gk21(f, mid, p.b);
        panels.push(Panel { a: p.a, b: mid, est: e1, err: r1 });
        panels.push(Panel { a: mid, b: p.b, est: e2, err: r2 });
    }
}

/// Integral of `f` over `[a, ∞)`.
///
/// Panels are `[a, a+1]`, `[a+1, a+10]`, ... up to `a + 10^D` with
/// `D = tail_cutoff_decades`; `tail(a + 10^D)` supplies the remainder.
pub fn integrate_half_line<F, T>(f: &F, a: f64, spec: &QuadratureSpec, tail: T) -> Result<f64>
where
    F: Fn(f64) -> f64 + ?Sized,
    T: FnOnce(f64) -> f64,
{
    let mut lo = a;
    let mut total = 0.0;
    for k in 0..=spec.tail_cutoff_decades {
        let hi = a + 10f64.powi(k as i32);
        total += integrate(f, lo, hi, spec)?;
        lo = hi;
    }
    Ok(total + tail(lo))
}

/// Maximum of a unimodal-ish function on `[a, b]`: coarse grid then
/// golden-section refinement around the best grid point.
pub fn grid_golden_max<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64, grid: usize) -> (f64, f64) {
    let grid = grid.max(2);
    let step = (b - a) / (grid - 1) as f64;
    let mut best_i = 0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..grid {
        let x = if i + 1 == grid { b } else { a + step * i as f64 };
        let v = f(x);
        if v > best {
            best = v;
            best_i = i;
        }
    }
    let mut lo = (a + step * best_i as f64 - step).max(a);
    let mut hi = (a + step * best_i as f64 + step).min(b);
    let best_x = a + step * best_i as f64;
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..80 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    let (x, v) = if f1 > f2 { (x1, f1) } else { (x2, f2) };
    if v > best {
        (x, v)
    } else {
        (best_x, best)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact_on_one_panel() {
        // K21 integrates degree 31 exactly.
        let (v, _) = gk21(&|x: f64| x.powi(20) + 3.0 * x.powi(7), -1.0, 2.0);
        let want = (2f64.powi(21) + 1.0) / 21.0 + 3.0 * (2f64.powi(8) - 1.0) / 8.0;
        assert!(((v - want) / want).abs() < 1e-14);
    }

    #[test]
    fn endpoint_power_singularity() {
        let spec = QuadratureSpec::default();
        let v = integrate(&|x: f64| x.powf(-0.5), 0.0, 1.0, &spec).unwrap();
        assert!((v - 2.0).abs() < 1e-9);
        let v = integrate(&|x: f64| -x.ln(), 0.0, 1.0, &spec).unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn half_line_with_tail() {
        let spec = QuadratureSpec::default();
        // ∫_0^∞ (2+u)^{-2} du = 1/2
        let v = integrate_half_line(&|u: f64| (2.0 + u).powi(-2), 0.0, &spec, |u| 1.0 / (2.0 + u)).unwrap();
        assert!(((v - 0.5) / 0.5).abs() < 1e-10);
        let v = integrate_half_line(&|u: f64| (-u).exp(), 0.0, &spec, |_| 0.0).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn subdivision_limit_is_numeric_error() {
        let spec = QuadratureSpec::new(1e-14, 1e-300, 10, 12).unwrap();
        let r = integrate(&|x: f64| (1.0 / x).sin(), 1e-6, 1.0, &spec);
        assert!(matches!(r, Err(LabError::Numeric(_))));
    }

    #[test]
    fn spec_validation() {
        assert!(QuadratureSpec::new(0.0, 1e-14, 100, 12).is_err());
        assert!(QuadratureSpec::new(1e-10, 1e-14, 5, 12).is_err());
        assert!(QuadratureSpec::default().validate().is_ok());
    }

    #[test]
    fn golden_max_finds_interior_peak() {
        let (x, v) = grid_golden_max(&|x: f64| -(x - 0.3).powi(2) + 1.0, 0.0, 1.0, 17);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((v - 1.0).abs() < 1e-14);
    }
}
