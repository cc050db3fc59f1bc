//! The functionals `‖f‖_{p,q}` (built on `f*`) and `‖f‖_{(p,q)}` (built on
//! `f**`), tail-norm probes and analytic convergence classification.
//!
//! For finite `q` both are `(∫_0^∞ (t^{1/p} g(t))^q dt/t)^{1/q}` with
//! `g = f*` or `g = f**`; for `q = ∞` the integral is replaced by the
//! supremum. Step profiles are summed in closed form. Log-power profiles are
//! integrated in `u = ln(T/t)`, which turns the head singularity into a
//! polynomially decaying tail; divergence of the analytic families is decided
//! by [`classify_convergence`], never by quadrature.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{domain, LabError, Result};
use crate::foundations::{Domain, Exponent, ExponentPair};
use crate::gallery::GalleryItem;
use crate::quadrature::{grid_golden_max, integrate, integrate_half_line, QuadratureSpec};
use crate::rearrangement::{
    log_power_average, rearrange, AnalyticProfile, Profile, RadialProfile, SampledField, StepProfile,
};

const EXPONENT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum DivergenceReason {
    /// `t^{1/p} f*(t)` is not `q`-integrable (or unbounded) as `t → 0`.
    HeadDivergence,
    /// Not integrable as `t → ∞`.
    TailDivergence,
    /// Log-power family with `qα ≤ 1`.
    LogExponentTest,
}

impl DivergenceReason {
    pub fn as_str(self) -> &'static str {
        match self {
            DivergenceReason::HeadDivergence => "HEAD_DIVERGENCE",
            DivergenceReason::TailDivergence => "TAIL_DIVERGENCE",
            DivergenceReason::LogExponentTest => "LOG_EXPONENT_TEST",
        }
    }
}

impl fmt::Display for DivergenceReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A norm that is either a finite nonnegative number or `+∞` with a reason.
/// Serializes as `{"finite": x}` or `{"infinite": "REASON"}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormValue {
    Finite(f64),
    Infinite(DivergenceReason),
}

impl NormValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            NormValue::Finite(v) => Some(v),
            NormValue::Infinite(_) => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, NormValue::Finite(_))
    }

    /// `+∞` for infinite values.
    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }

    fn root(self, q: f64) -> NormValue {
        match self {
            NormValue::Finite(v) => NormValue::Finite(v.powf(1.0 / q)),
            inf => inf,
        }
    }
}

impl fmt::Display for NormValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormValue::Finite(v) => write!(f, "{v}"),
            NormValue::Infinite(r) => write!(f, "INFINITE({r})"),
        }
    }
}

/// Outcome of the analytic convergence test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Convergence {
    FiniteExpected,
    InfiniteExpected(DivergenceReason),
}

/// Exact classification of `‖f‖_{p,q}` for the closed-form families.
///
/// Step profiles are always finite. Radial profiles carry no closed form and
/// are [`LabError::Unsupported`].
pub fn classify_convergence(f_star: &Profile, pq: &ExponentPair) -> Result<Convergence> {
    match f_star {
        Profile::Step(_) => Ok(Convergence::FiniteExpected),
        Profile::Analytic(a) => Ok(classify_analytic(a, pq.p(), pq.q())),
        Profile::Radial(_) => Err(LabError::Unsupported(
            "no analytic convergence test for numeric radial profiles".into(),
        )),
    }
}

pub(crate) fn classify_analytic(a: &AnalyticProfile, p: f64, q: Exponent) -> Convergence {
    use Convergence::*;
    if a.is_zero() {
        return FiniteExpected;
    }
    match *a {
        AnalyticProfile::Indicator { .. } => FiniteExpected,
        AnalyticProfile::Power { beta, .. } => {
            let e = 1.0 / p - beta;
            if e > EXPONENT_TOL || (e >= -EXPONENT_TOL && q.is_infinite()) {
                FiniteExpected
            } else {
                InfiniteExpected(DivergenceReason::HeadDivergence)
            }
        }
        AnalyticProfile::LogPower { p: pf, alpha, .. } => {
            let gamma = 1.0 / p - 1.0 / pf;
            if gamma > EXPONENT_TOL {
                FiniteExpected
            } else if gamma < -EXPONENT_TOL {
                InfiniteExpected(DivergenceReason::HeadDivergence)
            } else {
                match q {
                    Exponent::Infinity => FiniteExpected,
                    Exponent::Finite(q) if q * alpha > 1.0 => FiniteExpected,
                    Exponent::Finite(_) => InfiniteExpected(DivergenceReason::LogExponentTest),
                }
            }
        }
    }
}

fn check_nonincreasing(f_star: &Profile) -> Result<()> {
    if let Profile::Radial(r) = f_star {
        crate::rearrangement::spot_check_nonincreasing(&|s| r.radial_value(s), r.inner(), r.outer())?;
    }
    Ok(())
}

/// Probe of `t^{1/p} f*(t)` deep in the head (`t = T e^{-w}`, `w = 100, 200,
/// 300`) for profiles unbounded at the origin: divergent at every `q` when it
/// grows, and at finite `q` when it does not decay.
fn radial_head_diverges(f_star: &Profile, p: f64, q: Exponent) -> bool {
    let r = match f_star {
        Profile::Radial(r) if r.inner() == 0.0 => r,
        _ => return false,
    };
    let h = radial_weighted(r, p);
    let (h1, h2, h3) = (h(100.0), h(200.0), h(300.0));
    if !(h1.is_finite() && h2.is_finite() && h3.is_finite()) {
        return true;
    }
    let grows = h3 > h2 * (1.0 + 1e-9) && h2 > h1 * (1.0 + 1e-9);
    let flat = h3 > 0.0 && h3 >= h2 * (1.0 - 1e-9);
    grows || (flat && !q.is_infinite())
}

/// `‖f‖_{p,q}` computed from the rearrangement `f*`.
pub fn quasinorm(f_star: &Profile, pq: &ExponentPair, quad: &QuadratureSpec) -> Result<NormValue> {
    quad.validate()?;
    check_nonincreasing(f_star)?;
    if radial_head_diverges(f_star, pq.p(), pq.q()) {
        return Ok(NormValue::Infinite(DivergenceReason::HeadDivergence));
    }
    match pq.q() {
        Exponent::Infinity => sup_functional(f_star, pq.p(), quad),
        Exponent::Finite(q) => Ok(power_integral(f_star, pq.p(), q, quad)?.root(q)),
    }
}

/// `‖f‖_{L^s} = (∫_0^∞ (f*)^s)^{1/s}` for `1 ≤ s < ∞`.
pub fn lebesgue_norm(f_star: &Profile, s: f64, quad: &QuadratureSpec) -> Result<NormValue> {
    if !(s.is_finite() && s >= 1.0) {
        return domain(format!("Lebesgue exponent must satisfy 1 <= s < inf, got {s}"));
    }
    Ok(power_integral(f_star, s, s, quad)?.root(s))
}

/// `∫_0^∞ (t^{1/p} f*(t))^q dt/t` for finite `q`.
pub(crate) fn power_integral(f_star: &Profile, p: f64, q: f64, quad: &QuadratureSpec) -> Result<NormValue> {
    match f_star {
        Profile::Step(s) => Ok(NormValue::Finite(step_power_integral(s, p, q))),
        Profile::Analytic(a) => analytic_power_integral(a, p, q, quad),
        Profile::Radial(r) => radial_power_integral(r, p, q, quad),
    }
}

/// `Σ v_i^q (p/q)(t_i^{q/p} - t_{i-1}^{q/p})`.
pub fn step_power_integral(s: &StepProfile, p: f64, q: f64) -> f64 {
    let e = q / p;
    s.steps().map(|(a, b, v)| v.powf(q) * (b.powf(e) - a.powf(e)) / e).sum()
}

fn analytic_power_integral(a: &AnalyticProfile, p: f64, q: f64, quad: &QuadratureSpec) -> Result<NormValue> {
    if let Convergence::InfiniteExpected(r) = classify_analytic(a, p, Exponent::Finite(q)) {
        return Ok(NormValue::Infinite(r));
    }
    if a.is_zero() {
        return Ok(NormValue::Finite(0.0));
    }
    Ok(NormValue::Finite(match *a {
        AnalyticProfile::Indicator { height, support_end } => height.powf(q) * (p / q) * support_end.powf(q / p),
        AnalyticProfile::Power { c, beta, support_end } => {
            let e = 1.0 / p - beta;
            c.powf(q) * support_end.powf(q * e) / (q * e)
        }
        AnalyticProfile::LogPower { p: pf, alpha, scale, log_cut, coef } => {
            let gamma = 1.0 / p - 1.0 / pf;
            let c = pf * alpha;
            if gamma.abs() <= EXPONENT_TOL {
                let f = |u: f64| (c + u).powf(-q * alpha);
                let tail = |u: f64| (c + u).powf(1.0 - q * alpha) / (q * alpha - 1.0);
                coef.powf(q) * integrate_half_line(&f, log_cut, quad, tail)?
            } else {
                let ln_scale = scale.ln();
                let f = |u: f64| (q * (coef.ln() + gamma * (ln_scale - u)) - q * alpha * (c + u).ln()).exp();
                integrate_half_line(&f, log_cut, quad, |_| 0.0)?
            }
        }
    }))
}

fn radial_power_integral(r: &RadialProfile, p: f64, q: f64, quad: &QuadratureSpec) -> Result<NormValue> {
    let f = radial_weighted(r, p);
    let g = |w: f64| {
        let v = f(w);
        if v == 0.0 {
            0.0
        } else {
            v.powf(q)
        }
    };
    let v = integrate_half_line(&g, 0.0, quad, |_| 0.0)?;
    if !v.is_finite() {
        return Ok(NormValue::Infinite(DivergenceReason::HeadDivergence));
    }
    Ok(NormValue::Finite(v))
}

/// `w ↦ t^{1/p} f*(t)` at `t = T e^{-w}`, zero once `t` underflows.
fn radial_weighted(r: &RadialProfile, p: f64) -> impl Fn(f64) -> f64 + '_ {
    let ln_end = r.support_end().ln();
    let n = r.dim() as f64;
    move |w: f64| {
        let ln_t = ln_end - w;
        if ln_t / p < -700.0 || ln_t < -700.0 {
            return 0.0;
        }
        let s = if r.inner() == 0.0 {
            r.outer() * (-w / n).exp()
        } else {
            r.radius_at(ln_t.exp())
        };
        let v = r.radial_value(s);
        if v == 0.0 {
            0.0
        } else {
            (ln_t / p).exp() * v
        }
    }
}

fn sup_functional(f_star: &Profile, p: f64, quad: &QuadratureSpec) -> Result<NormValue> {
    match f_star {
        Profile::Step(s) => Ok(NormValue::Finite(
            s.steps().map(|(_, b, v)| v * b.powf(1.0 / p)).fold(0.0, f64::max),
        )),
        Profile::Analytic(a) => {
            if let Convergence::InfiniteExpected(r) = classify_analytic(a, p, Exponent::Infinity) {
                return Ok(NormValue::Infinite(r));
            }
            Ok(NormValue::Finite(match *a {
                AnalyticProfile::Indicator { height, support_end } => height * support_end.powf(1.0 / p),
                AnalyticProfile::Power { c, beta, support_end } => c * support_end.powf(1.0 / p - beta),
                AnalyticProfile::LogPower { p: pf, alpha, scale, log_cut, coef } => {
                    // t^{1/p} f* is nonincreasing in u; the sup is the endpoint value.
                    let gamma = 1.0 / p - 1.0 / pf;
                    let g = if gamma.abs() <= EXPONENT_TOL { 0.0 } else { gamma };
                    coef * (g * (scale.ln() - log_cut)).exp() * (pf * alpha + log_cut).powf(-alpha)
                }
            }))
        }
        Profile::Radial(r) => {
            let _ = quad;
            let f = radial_weighted(r, p);
            let (_, v) = grid_golden_max(&f, 0.0, 700.0_f64.min(700.0 * p), 4001);
            if v.is_finite() {
                Ok(NormValue::Finite(v.max(0.0)))
            } else {
                Ok(NormValue::Infinite(DivergenceReason::HeadDivergence))
            }
        }
    }
}

/// `‖f‖_{(p,q)}`, the same functional applied to `f**`.
///
/// `f**` carries the tail `(∫_0^∞ f*)/t` past the support; that part is
/// integrated in closed form.
pub fn starstar_norm(f_star: &Profile, pq: &ExponentPair, quad: &QuadratureSpec) -> Result<NormValue> {
    quad.validate()?;
    check_nonincreasing(f_star)?;
    if radial_head_diverges(f_star, pq.p(), pq.q()) {
        return Ok(NormValue::Infinite(DivergenceReason::HeadDivergence));
    }
    let p = pq.p();
    let pc = pq.p_conjugate();
    match f_star {
        Profile::Step(s) => Ok(NormValue::Finite(step_starstar(s, p, pq.q(), quad)?)),
        Profile::Analytic(a) => analytic_starstar(a, p, pq.q(), quad),
        Profile::Radial(r) => {
            let ln_end = r.support_end().ln();
            let n = r.dim() as f64;
            // t^{1/p - 1} ∫_0^t f*
            let head = |w: f64| -> Result<f64> {
                let ln_t = ln_end - w;
                if ln_t < -700.0 {
                    return Ok(0.0);
                }
                let mass = if r.inner() == 0.0 {
                    r.mass_below(r.outer() * (-w / n).exp(), quad)?
                } else {
                    // In the measure variable: radius_at(t) rounds to inner for tiny t.
                    let spec = QuadratureSpec { rel_tol: quad.rel_tol.min(1e-12), ..*quad };
                    integrate(&|tau: f64| r.value(tau), 0.0, ln_t.exp(), &spec)?
                };
                Ok(((1.0 / p - 1.0) * ln_t).exp() * mass)
            };
            let total_mass = r.mass_below(r.outer(), quad)?;
            match pq.q() {
                Exponent::Infinity => {
                    let err = std::cell::RefCell::new(None);
                    let f = |w: f64| match head(w) {
                        Ok(v) => v,
                        Err(e) => {
                            *err.borrow_mut() = Some(e);
                            f64::NAN
                        }
                    };
                    let (_, v) = grid_golden_max(&f, 0.0, 700.0, 1401);
                    if let Some(e) = err.into_inner() {
                        return Err(e);
                    }
                    Ok(NormValue::Finite(v))
                }
                Exponent::Finite(q) => {
                    let err = std::cell::RefCell::new(None);
                    let f = |w: f64| match head(w) {
                        Ok(v) => v.powf(q),
                        Err(e) => {
                            *err.borrow_mut() = Some(e);
                            0.0
                        }
                    };
                    let h = integrate_half_line(&f, 0.0, quad, |_| 0.0)?;
                    if let Some(e) = err.into_inner() {
                        return Err(e);
                    }
                    let tail = (total_mass * ((1.0 / p - 1.0) * ln_end).exp()).powf(q) * pc / q;
                    Ok(NormValue::Finite((h + tail).powf(1.0 / q)))
                }
            }
        }
    }
}

fn step_starstar(s: &StepProfile, p: f64, q: Exponent, quad: &QuadratureSpec) -> Result<f64> {
    if s.is_zero() {
        return Ok(0.0);
    }
    let pc = p / (p - 1.0);
    // cumulative integral at each breakpoint
    let mut cum = Vec::with_capacity(s.values().len() + 1);
    cum.push(0.0);
    for (a, b, v) in s.steps() {
        let last = *cum.last().expect("nonempty");
        cum.push(last + v * (b - a));
    }
    let end = *s.breakpoints().last().expect("nonempty");
    let total = *cum.last().expect("nonempty");
    match q {
        // On each step t^{1/p}(v + D/t) is maximal at an endpoint, and the
        // tail A t^{1/p-1} decreases, so the sup is attained at a breakpoint.
        Exponent::Infinity => Ok(s
            .breakpoints()
            .iter()
            .zip(&cum)
            .skip(1)
            .map(|(&t, &c)| c * t.powf(1.0 / p - 1.0))
            .fold(0.0, f64::max)),
        Exponent::Finite(q) => {
            let spec = QuadratureSpec { rel_tol: quad.rel_tol.min(1e-13), abs_tol: 1e-300, ..*quad };
            let e = q / p;
            let mut acc = 0.0;
            for (i, (a, b, v)) in s.steps().enumerate() {
                let d = cum[i] - v * a;
                if a == 0.0 || d <= 0.0 {
                    acc += v.powf(q) * (b.powf(e) - a.powf(e)) / e;
                } else {
                    // t = e^x
                    let f = |x: f64| (v + d * (-x).exp()).powf(q) * (e * x).exp();
                    acc += integrate(&f, a.ln(), b.ln(), &spec)?;
                }
            }
            let tail = (total * end.powf(1.0 / p - 1.0)).powf(q) * pc / q;
            Ok((acc + tail).powf(1.0 / q))
        }
    }
}

fn analytic_starstar(a: &AnalyticProfile, p: f64, q: Exponent, quad: &QuadratureSpec) -> Result<NormValue> {
    if a.is_zero() {
        return Ok(NormValue::Finite(0.0));
    }
    let pc = p / (p - 1.0);
    match *a {
        AnalyticProfile::Indicator { height, support_end } => Ok(NormValue::Finite(match q {
            Exponent::Infinity => height * support_end.powf(1.0 / p),
            Exponent::Finite(q) => height * support_end.powf(1.0 / p) * (p * pc / q).powf(1.0 / q),
        })),
        AnalyticProfile::Power { c, beta, support_end } => {
            if beta >= 1.0 {
                return Ok(NormValue::Infinite(DivergenceReason::HeadDivergence));
            }
            if let Convergence::InfiniteExpected(r) = classify_analytic(a, p, q) {
                return Ok(NormValue::Infinite(r));
            }
            let e = (1.0 / p - beta).max(0.0);
            let head_sup = c * support_end.powf(e) / (1.0 - beta);
            Ok(NormValue::Finite(match q {
                Exponent::Infinity => head_sup,
                Exponent::Finite(q) => {
                    let head = (c / (1.0 - beta)).powf(q) * support_end.powf(q * e) / (q * e);
                    let mass = c * support_end.powf(1.0 - beta) / (1.0 - beta);
                    let tail = (mass * support_end.powf(1.0 / p - 1.0)).powf(q) * pc / q;
                    (head + tail).powf(1.0 / q)
                }
            }))
        }
        AnalyticProfile::LogPower { p: pf, alpha, scale, log_cut, coef } => {
            let gamma = 1.0 / p - 1.0 / pf;
            if gamma < -EXPONENT_TOL {
                return Ok(NormValue::Infinite(DivergenceReason::HeadDivergence));
            }
            let gamma = gamma.max(0.0);
            let gamma = if gamma <= EXPONENT_TOL { 0.0 } else { gamma };
            let ln_scale = scale.ln();
            // t^{1/p} f**(t) at t = scale·e^{-u}
            let weighted = |u: f64| -> Result<f64> {
                Ok(coef * (gamma * (ln_scale - u)).exp() * log_power_average(pf, alpha, u, quad)?)
            };
            let at_end = weighted(log_cut)?;
            match q {
                Exponent::Infinity => Ok(NormValue::Finite(at_end)),
                Exponent::Finite(q) => {
                    if gamma == 0.0 && q * alpha <= 1.0 {
                        return Ok(NormValue::Infinite(DivergenceReason::LogExponentTest));
                    }
                    let err = std::cell::RefCell::new(None);
                    let f = |u: f64| match weighted(u) {
                        Ok(v) => v.powf(q),
                        Err(e) => {
                            *err.borrow_mut() = Some(e);
                            0.0
                        }
                    };
                    let pcf = pf / (pf - 1.0);
                    let c = pf * alpha;
                    let tail_fn = |u: f64| {
                        if gamma == 0.0 {
                            (coef * pcf).powf(q) * (c + u).powf(1.0 - q * alpha) / (q * alpha - 1.0)
                        } else {
                            0.0
                        }
                    };
                    let head = integrate_half_line(&f, log_cut, quad, tail_fn)?;
                    if let Some(e) = err.into_inner() {
                        return Err(e);
                    }
                    let tail = at_end.powf(q) * pc / q;
                    Ok(NormValue::Finite((head + tail).powf(1.0 / q)))
                }
            }
        }
    }
}

/// Truncated-head integral `∫_{εT}^{T} (t^{1/p} f*(t))^q dt/t`, `T` the
/// support end, evaluated by quadrature whatever the classification says.
pub fn truncated_head_integral(f_star: &Profile, p: f64, q: f64, eps: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return domain(format!("head cutoff must lie in (0,1), got {eps}"));
    }
    let end = f_star.support_end();
    if end <= 0.0 {
        return Ok(0.0);
    }
    let ln_end = end.ln();
    let f = |w: f64| {
        let t = (ln_end - w).exp();
        let v = f_star.value(t * (1.0 - 1e-15));
        if v == 0.0 {
            0.0
        } else {
            ((ln_end - w) / p).exp().powf(q) * v.powf(q)
        }
    };
    let length = (1.0 / eps).ln();
    let mut lo = 0.0;
    let mut acc = 0.0;
    let mut hi = 1.0f64.min(length);
    while lo < length {
        acc += integrate(&f, lo, hi, quad)?;
        lo = hi;
        hi = (hi * 4.0).min(length);
    }
    Ok(acc)
}

/// Cellwise Euclidean magnitude of a vector field given by its components.
pub fn vector_magnitude(fields: &[SampledField]) -> Result<SampledField> {
    let first = fields.first().ok_or_else(|| LabError::Domain("no components given".into()))?;
    for (k, f) in fields.iter().enumerate().skip(1) {
        if f.domain() != first.domain() || f.len() != first.len() {
            return domain(format!("component {k} does not share the first component's partition"));
        }
        for (a, b) in f.cells().iter().zip(first.cells()) {
            if a.weight != b.weight || a.span != b.span {
                return domain(format!("component {k} does not share the first component's partition"));
            }
        }
    }
    let cells = (0..first.len())
        .map(|i| {
            let mag = fields.iter().fold(0.0f64, |acc, f| acc.hypot(f.cells()[i].magnitude));
            crate::rearrangement::Cell { magnitude: mag, ..first.cells()[i] }
        })
        .collect();
    SampledField::new(first.domain().clone(), cells)
}

/// What a tail-norm probe restricts.
#[derive(Debug, Clone, Copy)]
pub enum TailTarget<'a> {
    Field(&'a SampledField),
    Item(&'a GalleryItem),
}

/// `‖f·χ_{E_k}‖_{p,q}` along a nested sequence of sets.
pub fn tail_norm(
    target: TailTarget<'_>,
    pq: &ExponentPair,
    shrinking_sets: &[Domain],
    quad: &QuadratureSpec,
) -> Result<Vec<NormValue>> {
    for w in shrinking_sets.windows(2) {
        if !w[0].contains(&w[1]) {
            return domain("restriction sets must be nested and decreasing");
        }
    }
    shrinking_sets
        .iter()
        .map(|set| match target {
            TailTarget::Field(f) => {
                let restricted = f.restrict(set)?;
                if restricted.cells().iter().all(|c| c.magnitude == 0.0) {
                    return Ok(NormValue::Finite(0.0));
                }
                quasinorm(&rearrange(&restricted)?.into(), pq, quad)
            }
            TailTarget::Item(item) => match set {
                Domain::Ball(b) if b.center().iter().all(|&x| x == 0.0) => {
                    let prof = item.function_profile_within(b.radius().ln())?;
                    quasinorm(&prof, pq, quad)
                }
                _ => Err(LabError::Unsupported("gallery tail norms need origin-centred balls".into())),
            },
        })
        .collect()
}
