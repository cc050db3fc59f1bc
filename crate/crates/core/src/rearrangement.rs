//! Distribution functions, nonincreasing rearrangements and maximal functions.
//!
//! A rearrangement is carried by a [`Profile`]: a finite step function, one of
//! the closed-form families in [`AnalyticProfile`], or the exact rearrangement
//! of a radially decreasing function on a ball or annulus ([`RadialProfile`]).

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, precondition, LabError, Result};
use crate::foundations::{unit_ball_volume, BallDomain, Domain, Interval1D};
use crate::quadrature::{integrate, QuadratureSpec};

/// One cell of a sampled field: a piece of the domain of measure `weight`
/// on which `|f|` equals `magnitude`.
///
/// `span` locates the cell: radial shell `(inner, outer)` on a ball, or the
/// sub-interval `(a, b)` on an interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub weight: f64,
    pub magnitude: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<(f64, f64)>,
}

impl Cell {
    pub fn new(weight: f64, magnitude: f64) -> Self {
        Cell { weight, magnitude, span: None }
    }

    pub fn with_span(weight: f64, magnitude: f64, span: (f64, f64)) -> Self {
        Cell { weight, magnitude, span: Some(span) }
    }
}

/// A function represented by the magnitudes it takes on measured cells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampledField {
    domain: Domain,
    cells: Vec<Cell>,
}

impl SampledField {
    pub fn new(dom: Domain, cells: Vec<Cell>) -> Result<Self> {
        for (i, c) in cells.iter().enumerate() {
            if !(c.weight.is_finite() && c.weight > 0.0) {
                return domain(format!("cell {i}: weight must be positive and finite, got {}", c.weight));
            }
            if !(c.magnitude.is_finite() && c.magnitude >= 0.0) {
                return domain(format!("cell {i}: magnitude must be finite and >= 0, got {}", c.magnitude));
            }
            if let Some((lo, hi)) = c.span {
                if !(lo <= hi) {
                    return domain(format!("cell {i}: span ({lo}, {hi}) is reversed"));
                }
            }
        }
        Ok(SampledField { domain: dom, cells })
    }

    /// Field on the interval `(0, Σ w)` with unlocated cells.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        let total: f64 = pairs.iter().map(|p| p.0).sum();
        let dom = if total > 0.0 && total.is_finite() {
            Interval1D::new(0.0, total)?
        } else {
            Interval1D::new(0.0, 1.0)?
        };
        Self::new(dom.into(), pairs.iter().map(|&(w, m)| Cell::new(w, m)).collect())
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn total_measure(&self) -> f64 {
        self.cells.iter().map(|c| c.weight).sum()
    }

    /// Whether the cells account for the whole domain (relative 1e-9).
    pub fn covers_domain(&self) -> bool {
        let m = self.domain.measure();
        ((self.total_measure() - m) / m).abs() <= 1e-9
    }

    /// Cellwise `g(|f|)`; `g` must map `[0,∞)` into `[0,∞)`.
    pub fn map_magnitudes(&self, g: impl Fn(f64) -> f64) -> Result<SampledField> {
        let cells = self
            .cells
            .iter()
            .map(|c| Cell { magnitude: g(c.magnitude), ..*c })
            .collect();
        SampledField::new(self.domain.clone(), cells)
    }

    pub fn powf(&self, a: f64) -> Result<SampledField> {
        if !(a > 0.0) {
            return domain(format!("power must be positive, got {a}"));
        }
        self.map_magnitudes(|m| m.powf(a))
    }

    /// `f·χ_E` for `E` a sub-ball (origin-centred, on ball domains) or a
    /// sub-interval. Cells cut by `∂E` keep the fraction of their measure
    /// inside `E`.
    pub fn restrict(&self, subset: &Domain) -> Result<SampledField> {
        if !self.domain.contains(subset) {
            return domain("restriction set is not contained in the field's domain");
        }
        let mut cells = Vec::with_capacity(self.cells.len());
        for c in &self.cells {
            let (lo, hi) = c
                .span
                .ok_or_else(|| LabError::Unsupported("restriction needs located cells".into()))?;
            let frac = match (&self.domain, subset) {
                (Domain::Ball(b), Domain::Ball(e)) => {
                    if e.center().iter().any(|&x| x != 0.0) || b.center().iter().any(|&x| x != 0.0) {
                        return Err(LabError::Unsupported("restriction to off-centre balls".into()));
                    }
                    let n = b.dim() as i32;
                    let top = hi.min(e.radius());
                    if top <= lo {
                        0.0
                    } else if hi <= e.radius() {
                        1.0
                    } else {
                        (top.powi(n) - lo.powi(n)) / (hi.powi(n) - lo.powi(n))
                    }
                }
                (Domain::Interval(_), Domain::Interval(e)) => {
                    let a = lo.max(e.a());
                    let b = hi.min(e.b());
                    if b <= a {
                        0.0
                    } else if hi > lo {
                        (b - a) / (hi - lo)
                    } else {
                        1.0
                    }
                }
                _ => return Err(LabError::Unsupported("mixed domain kinds in restriction".into())),
            };
            if frac > 0.0 {
                cells.push(Cell { weight: c.weight * frac, ..*c });
            }
        }
        SampledField::new(subset.clone(), cells)
    }
}

/// Measure of `{|f| > t}`.
pub trait DistributionFunction {
    fn distribution(&self, t: f64) -> Result<f64>;
}

/// `λ(t)`, the measure of the super-level set `{|f| > t}`.
pub fn distribution_function<D: DistributionFunction + ?Sized>(f: &D, t: f64) -> Result<f64> {
    f.distribution(t)
}

fn check_level(t: f64) -> Result<()> {
    if t.is_nan() || t < 0.0 {
        return domain(format!("level must be >= 0, got {t}"));
    }
    Ok(())
}

impl DistributionFunction for SampledField {
    fn distribution(&self, t: f64) -> Result<f64> {
        check_level(t)?;
        Ok(self.cells.iter().filter(|c| c.magnitude > t).map(|c| c.weight).sum())
    }
}

/// Nonincreasing right-continuous step function on `[0, ∞)`, zero after the
/// last breakpoint. `values[i]` holds on `[breakpoints[i], breakpoints[i+1])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawStepProfile")]
pub struct StepProfile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

#[derive(Deserialize)]
struct RawStepProfile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl TryFrom<RawStepProfile> for StepProfile {
    type Error = LabError;

    fn try_from(raw: RawStepProfile) -> Result<Self> {
        StepProfile::new(raw.breakpoints, raw.values)
    }
}

impl StepProfile {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.first() != Some(&0.0) {
            return domain("step profile must start at breakpoint 0");
        }
        if breakpoints.len() != values.len() + 1 {
            return domain(format!(
                "{} breakpoints need {} values, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                values.len()
            ));
        }
        for w in breakpoints.windows(2) {
            if !(w[1] > w[0] && w[1].is_finite()) {
                return domain(format!("breakpoints must be finite and strictly increasing near {}", w[0]));
            }
        }
        for (i, v) in values.iter().enumerate() {
            if !(v.is_finite() && *v >= 0.0) {
                return domain(format!("value {i} must be finite and >= 0, got {v}"));
            }
        }
        for w in values.windows(2) {
            if w[1] > w[0] {
                return precondition(format!("step values must be nonincreasing: {} < {}", w[0], w[1]));
            }
        }
        Ok(StepProfile { breakpoints, values })
    }

    pub fn zero() -> Self {
        StepProfile { breakpoints: vec![0.0], values: Vec::new() }
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn steps(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.breakpoints[i], self.breakpoints[i + 1], v))
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Right end of the support.
    pub fn support_end(&self) -> f64 {
        match self.values.iter().rposition(|&v| v > 0.0) {
            Some(i) => self.breakpoints[i + 1],
            None => 0.0,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        if t < 0.0 {
            return f64::NAN;
        }
        // First breakpoint strictly greater than t.
        let idx = self.breakpoints.partition_point(|&b| b <= t);
        if idx == 0 || idx > self.values.len() {
            0.0
        } else {
            self.values[idx - 1]
        }
    }

    /// `∫_0^t f*`.
    pub fn cumulative(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        for (a, b, v) in self.steps() {
            if t <= a {
                break;
            }
            acc += v * (b.min(t) - a);
        }
        acc
    }

    pub fn powf(&self, a: f64) -> StepProfile {
        StepProfile {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| v.powf(a)).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> StepProfile {
        StepProfile {
            breakpoints: self.breakpoints.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    /// The profile as a field on `(0, support_end)` with one cell per step.
    pub fn to_field(&self) -> Result<SampledField> {
        let end = *self.breakpoints.last().expect("nonempty");
        if end <= 0.0 {
            return domain("the empty step profile has no field representation");
        }
        let cells = self.steps().map(|(a, b, v)| Cell::with_span(b - a, v, (a, b))).collect();
        SampledField::new(Interval1D::new(0.0, end)?.into(), cells)
    }
}

impl DistributionFunction for StepProfile {
    fn distribution(&self, t: f64) -> Result<f64> {
        check_level(t)?;
        let k = self.values.partition_point(|&v| v > t);
        Ok(self.breakpoints[k])
    }
}

/// Nonincreasing rearrangement of a sampled field.
///
/// Magnitudes are sorted in descending order; equal magnitudes merge into a
/// single step and zero cells are dropped.
pub fn rearrange(f: &SampledField) -> Result<StepProfile> {
    if f.is_empty() {
        return domain("cannot rearrange an empty field");
    }
    let mut cells: Vec<(f64, f64)> = f
        .cells()
        .iter()
        .filter(|c| c.magnitude > 0.0)
        .map(|c| (c.magnitude, c.weight))
        .collect();
    cells.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut breakpoints = vec![0.0];
    let mut values: Vec<f64> = Vec::new();
    let mut acc = 0.0;
    let mut i = 0;
    while i < cells.len() {
        let level = cells[i].0;
        let mut w = 0.0;
        while i < cells.len() && cells[i].0 == level {
            w += cells[i].1;
            i += 1;
        }
        acc += w;
        breakpoints.push(acc);
        values.push(level);
    }
    StepProfile::new(breakpoints, values)
}

/// `G(u) = ∫_0^∞ e^{-σ/p'} (pα + u + σ)^{-α} dσ`; `t^{1/p} f**(t) = G(ln(T/t))`
/// on the support of a log-power profile.
pub(crate) fn log_power_average(p: f64, alpha: f64, u: f64, quad: &QuadratureSpec) -> Result<f64> {
    let pc = p / (p - 1.0);
    let c = p * alpha + u;
    let spec = QuadratureSpec { rel_tol: quad.rel_tol.min(1e-12), ..*quad };
    let g = |s: f64| (-s / pc).exp() * (c + s).powf(-alpha);
    // e^{-48} is below double precision relative to the head.
    let upper = 48.0 * pc;
    let mid = (4.0 * pc).min(upper);
    Ok(integrate(&g, 0.0, mid, &spec)? + integrate(&g, mid, upper, &spec)?)
}

/// Closed-form decreasing profiles on `[0, T)`, zero after `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AnalyticProfile {
    /// `c·t^{-β}`.
    Power { c: f64, beta: f64, support_end: f64 },
    /// `coef·t^{-1/p}·(pα + ln(scale/t))^{-α}` on `[0, scale·e^{-log_cut})`.
    ///
    /// With `log_cut = 0` this is `t^{-1/p} ln^{-α}(T e^{pα}/t)` on `[0, T)`.
    /// A positive `log_cut` restricts the profile to a smaller head without
    /// forming the (possibly subnormal) support end.
    LogPower { p: f64, alpha: f64, scale: f64, log_cut: f64, coef: f64 },
    /// `h`.
    Indicator { height: f64, support_end: f64 },
}

impl AnalyticProfile {
    pub fn power(c: f64, beta: f64, support_end: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return domain(format!("power coefficient must be finite and >= 0, got {c}"));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return domain(format!("power exponent must be finite and >= 0, got {beta}"));
        }
        check_support(support_end)?;
        Ok(AnalyticProfile::Power { c, beta, support_end })
    }

    pub fn log_power(p: f64, alpha: f64, support_end: f64) -> Result<Self> {
        if !(p.is_finite() && p > 1.0) {
            return domain(format!("log-power exponent must satisfy 1 < p < inf, got {p}"));
        }
        if !(alpha.is_finite() && alpha > 0.0) {
            return domain(format!("log exponent must be positive, got {alpha}"));
        }
        check_support(support_end)?;
        Ok(AnalyticProfile::LogPower { p, alpha, scale: support_end, log_cut: 0.0, coef: 1.0 })
    }

    pub fn indicator(height: f64, support_end: f64) -> Result<Self> {
        if !(height.is_finite() && height >= 0.0) {
            return domain(format!("indicator height must be finite and >= 0, got {height}"));
        }
        check_support(support_end)?;
        Ok(AnalyticProfile::Indicator { height, support_end })
    }

    /// Restriction of a log-power profile to `[0, scale·e^{-cut})`.
    pub fn with_log_cut(self, cut: f64) -> Result<Self> {
        match self {
            AnalyticProfile::LogPower { p, alpha, scale, coef, .. } if cut >= 0.0 && cut.is_finite() => {
                Ok(AnalyticProfile::LogPower { p, alpha, scale, log_cut: cut, coef })
            }
            AnalyticProfile::LogPower { .. } => domain(format!("log cut must be finite and >= 0, got {cut}")),
            _ => Err(LabError::Unsupported("log cut applies to log-power profiles only".into())),
        }
    }

    /// `c·f*`.
    pub fn scaled(self, k: f64) -> Result<Self> {
        if !(k.is_finite() && k >= 0.0) {
            return domain(format!("scale factor must be finite and >= 0, got {k}"));
        }
        Ok(match self {
            AnalyticProfile::Power { c, beta, support_end } => AnalyticProfile::Power { c: c * k, beta, support_end },
            AnalyticProfile::LogPower { p, alpha, scale, log_cut, coef } => {
                AnalyticProfile::LogPower { p, alpha, scale, log_cut, coef: coef * k }
            }
            AnalyticProfile::Indicator { height, support_end } => {
                AnalyticProfile::Indicator { height: height * k, support_end }
            }
        })
    }

    pub fn support_end(&self) -> f64 {
        match *self {
            AnalyticProfile::Power { support_end, .. } | AnalyticProfile::Indicator { support_end, .. } => support_end,
            AnalyticProfile::LogPower { scale, log_cut, .. } => scale * (-log_cut).exp(),
        }
    }

    pub fn ln_support_end(&self) -> f64 {
        match *self {
            AnalyticProfile::LogPower { scale, log_cut, .. } => scale.ln() - log_cut,
            _ => self.support_end().ln(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            AnalyticProfile::Power { c, .. } => c == 0.0,
            AnalyticProfile::LogPower { coef, .. } => coef == 0.0,
            AnalyticProfile::Indicator { height, .. } => height == 0.0,
        }
    }

    /// `f*(t)`; `+∞` at `t = 0` for unbounded families.
    pub fn value(&self, t: f64) -> f64 {
        if t < 0.0 {
            return f64::NAN;
        }
        match *self {
            AnalyticProfile::Power { c, beta, support_end } => {
                if t >= support_end {
                    0.0
                } else if t == 0.0 {
                    if beta > 0.0 && c > 0.0 {
                        f64::INFINITY
                    } else {
                        c
                    }
                } else {
                    c * t.powf(-beta)
                }
            }
            AnalyticProfile::Indicator { height, support_end } => {
                if t < support_end {
                    height
                } else {
                    0.0
                }
            }
            AnalyticProfile::LogPower { p, alpha, scale, log_cut, coef } => {
                if t == 0.0 {
                    return if coef > 0.0 { f64::INFINITY } else { 0.0 };
                }
                let u = scale.ln() - t.ln();
                if u <= log_cut {
                    return 0.0;
                }
                coef * (-t.ln() / p).exp() * (p * alpha + u).powf(-alpha)
            }
        }
    }

    /// `∫_0^t f*`, `+∞` when the head is not integrable.
    pub fn cumulative(&self, t: f64, quad: &QuadratureSpec) -> Result<f64> {
        if t.is_nan() || t < 0.0 {
            return domain(format!("t must be >= 0, got {t}"));
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        Ok(match *self {
            AnalyticProfile::Indicator { height, support_end } => height * t.min(support_end),
            AnalyticProfile::Power { c, beta, support_end } => {
                if c == 0.0 {
                    0.0
                } else if beta >= 1.0 {
                    f64::INFINITY
                } else {
                    c * t.min(support_end).powf(1.0 - beta) / (1.0 - beta)
                }
            }
            AnalyticProfile::LogPower { p, alpha, scale, log_cut, coef } => {
                if coef == 0.0 {
                    return Ok(0.0);
                }
                let u = (scale.ln() - t.ln()).max(log_cut);
                let ln_t = scale.ln() - u;
                coef * (ln_t * (1.0 - 1.0 / p)).exp() * log_power_average(p, alpha, u, quad)?
            }
        })
    }
}

fn check_support(t: f64) -> Result<()> {
    if !(t.is_finite() && t > 0.0) {
        return domain(format!("support end must be positive and finite, got {t}"));
    }
    Ok(())
}

impl DistributionFunction for AnalyticProfile {
    fn distribution(&self, tau: f64) -> Result<f64> {
        check_level(tau)?;
        if self.is_zero() {
            return Ok(0.0);
        }
        let end = self.support_end();
        Ok(match *self {
            AnalyticProfile::Indicator { height, .. } => {
                if tau < height {
                    end
                } else {
                    0.0
                }
            }
            AnalyticProfile::Power { c, beta, .. } => {
                if tau == 0.0 {
                    end
                } else if beta == 0.0 {
                    if tau < c {
                        end
                    } else {
                        0.0
                    }
                } else {
                    (c / tau).powf(1.0 / beta).min(end)
                }
            }
            AnalyticProfile::LogPower { p, alpha, scale, log_cut, coef } => {
                if tau == 0.0 {
                    return Ok(end);
                }
                // ln f* = ln coef - (ln scale - u)/p - α ln(pα + u), increasing in u.
                let target = tau.ln() - coef.ln() + scale.ln() / p;
                let g = |u: f64| u / p - alpha * (p * alpha + u).ln();
                if g(log_cut) >= target {
                    return Ok(end);
                }
                let mut lo = log_cut;
                let mut hi = log_cut.max(1.0);
                while g(hi) < target {
                    lo = hi;
                    hi *= 2.0;
                    if !hi.is_finite() {
                        return Err(LabError::Numeric("level search diverged".into()));
                    }
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if mid <= lo || mid >= hi {
                        break;
                    }
                    if g(mid) < target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                scale * (-hi).exp()
            }
        })
    }
}

/// Exact rearrangement of `x ↦ φ(|x|)` on the annulus `inner < |x| < outer`
/// in `ℝ^n` (zero elsewhere), for `φ` nonincreasing on `(inner, outer)`:
/// `f*(t) = φ((inner^n + t/Ω_n)^{1/n})` on `[0, Ω_n(outer^n - inner^n))`.
#[derive(Clone)]
pub struct RadialProfile {
    n: usize,
    inner: f64,
    outer: f64,
    omega: f64,
    phi: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialProfile")
            .field("n", &self.n)
            .field("inner", &self.inner)
            .field("outer", &self.outer)
            .finish_non_exhaustive()
    }
}

impl RadialProfile {
    pub fn new(n: usize, inner: f64, outer: f64, phi: Arc<dyn Fn(f64) -> f64 + Send + Sync>) -> Result<Self> {
        let omega = unit_ball_volume(n)?;
        if !(inner >= 0.0 && outer > inner && outer.is_finite()) {
            return domain(format!("annulus needs 0 <= inner < outer, got ({inner}, {outer})"));
        }
        Ok(RadialProfile { n, inner, outer, omega, phi })
    }

    /// Rearrangement of `t ↦ φ(t)` on the half-line interval `(inner, outer)`.
    pub fn one_sided(inner: f64, outer: f64, phi: Arc<dyn Fn(f64) -> f64 + Send + Sync>) -> Result<Self> {
        let mut r = RadialProfile::new(1, inner, outer, phi)?;
        r.omega = 1.0;
        Ok(r)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn inner(&self) -> f64 {
        self.inner
    }

    pub fn outer(&self) -> f64 {
        self.outer
    }

    pub fn radial_value(&self, s: f64) -> f64 {
        (self.phi)(s)
    }

    pub fn support_end(&self) -> f64 {
        let n = self.n as i32;
        self.omega * (self.outer.powi(n) - self.inner.powi(n))
    }

    /// Radius at which the annulus `inner < |x| < s` has measure `t`.
    pub fn radius_at(&self, t: f64) -> f64 {
        let n = self.n as f64;
        if self.inner == 0.0 {
            (t / self.omega).powf(1.0 / n)
        } else {
            (self.inner.powf(n) + t / self.omega).powf(1.0 / n)
        }
    }

    /// Measure of `inner < |x| < s`.
    pub fn measure_below(&self, s: f64) -> f64 {
        let n = self.n as i32;
        self.omega * (s.powi(n) - self.inner.powi(n))
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn value(&self, t: f64) -> f64 {
        if t < 0.0 {
            return f64::NAN;
        }
        if t >= self.support_end() {
            return 0.0;
        }
        (self.phi)(self.radius_at(t))
    }

    /// `∫_{inner<|x|<s} φ(|x|) dx`.
    pub fn mass_below(&self, s: f64, quad: &QuadratureSpec) -> Result<f64> {
        let s = s.min(self.outer);
        if s <= self.inner {
            return Ok(0.0);
        }
        let n = self.n as i32;
        let area = self.n as f64 * self.omega;
        let spec = QuadratureSpec { rel_tol: quad.rel_tol.min(1e-12), ..*quad };
        if self.inner > 0.0 {
            let g = |rho: f64| (self.phi)(rho) * rho.powi(n - 1);
            return Ok(area * integrate(&g, self.inner, s, &spec)?);
        }
        // ρ = s·e^{-w}
        let g = |w: f64| {
            let rho = s * (-w).exp();
            if rho == 0.0 {
                return 0.0;
            }
            let v = (self.phi)(rho) * rho.powi(n);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        };
        let upper = 745.0 / self.n as f64;
        let mut total = 0.0;
        let mut lo = 0.0;
        for hi in [1.0, 4.0, 16.0, 64.0, upper] {
            total += integrate(&g, lo, hi, &spec)?;
            lo = hi;
        }
        Ok(area * total)
    }
}

impl DistributionFunction for RadialProfile {
    fn distribution(&self, tau: f64) -> Result<f64> {
        check_level(tau)?;
        // Largest s with φ(s) > τ, by bisection on the monotone φ.
        let (mut lo, mut hi) = (self.inner, self.outer);
        if (self.phi)(hi * (1.0 - 1e-15)) > tau {
            return Ok(self.support_end());
        }
        let probe = if self.inner > 0.0 { self.inner } else { self.outer * 1e-300 };
        if (self.phi)(probe) <= tau {
            return Ok(0.0);
        }
        lo = lo.max(probe);
        for _ in 0..2000 {
            let mid = if lo > 0.0 && hi / lo > 4.0 { (lo * hi).sqrt() } else { 0.5 * (lo + hi) };
            if mid <= lo || mid >= hi {
                break;
            }
            if (self.phi)(mid) > tau {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(self.measure_below(lo))
    }
}

/// A rearranged profile in any of its representations.
#[derive(Debug, Clone)]
pub enum Profile {
    Step(StepProfile),
    Analytic(AnalyticProfile),
    Radial(RadialProfile),
}

impl Profile {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Profile::Step(s) => s.value(t),
            Profile::Analytic(a) => a.value(t),
            Profile::Radial(r) => r.value(t),
        }
    }

    pub fn support_end(&self) -> f64 {
        match self {
            Profile::Step(s) => s.support_end(),
            Profile::Analytic(a) => a.support_end(),
            Profile::Radial(r) => r.support_end(),
        }
    }

    pub fn cumulative(&self, t: f64, quad: &QuadratureSpec) -> Result<f64> {
        match self {
            Profile::Step(s) => Ok(s.cumulative(t)),
            Profile::Analytic(a) => a.cumulative(t, quad),
            Profile::Radial(r) => r.mass_below(r.radius_at(t.min(r.support_end())), quad),
        }
    }
}

impl DistributionFunction for Profile {
    fn distribution(&self, t: f64) -> Result<f64> {
        match self {
            Profile::Step(s) => s.distribution(t),
            Profile::Analytic(a) => a.distribution(t),
            Profile::Radial(r) => r.distribution(t),
        }
    }
}

impl From<StepProfile> for Profile {
    fn from(s: StepProfile) -> Self {
        Profile::Step(s)
    }
}

impl From<AnalyticProfile> for Profile {
    fn from(a: AnalyticProfile) -> Self {
        Profile::Analytic(a)
    }
}

impl From<RadialProfile> for Profile {
    fn from(r: RadialProfile) -> Self {
        Profile::Radial(r)
    }
}

/// `f**(t) = (1/t)∫_0^t f*`; `+∞` when the head of `f*` is not integrable.
pub fn maximal_profile(f_star: &Profile, t: f64, quad: &QuadratureSpec) -> Result<f64> {
    if !(t > 0.0) {
        return domain(format!("maximal function needs t > 0, got {t}"));
    }
    Ok(f_star.cumulative(t, quad)? / t)
}

/// Radial profiles with a known rearrangement.
#[derive(Clone)]
pub enum RadialFunction {
    /// `(Ω_n s^n)^{-1/p} (pα + n ln(r/s))^{-α}` for the ball of radius `r`.
    LogPower { alpha: f64, p: f64 },
    /// `coef·s^{-exponent}`.
    Power { coef: f64, exponent: f64 },
    Constant(f64),
    /// Any nonincreasing `φ`; monotonicity is spot-checked.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for RadialFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadialFunction::LogPower { alpha, p } => write!(f, "LogPower {{ alpha: {alpha}, p: {p} }}"),
            RadialFunction::Power { coef, exponent } => write!(f, "Power {{ coef: {coef}, exponent: {exponent} }}"),
            RadialFunction::Constant(c) => write!(f, "Constant({c})"),
            RadialFunction::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// 64 radii, geometric from `r·1e-8` up to just below `r`.
pub(crate) fn monotonicity_grid(inner: f64, r: f64) -> Vec<f64> {
    let lo = if inner > 0.0 { inner } else { r * 1e-8 };
    (0..64)
        .map(|j| {
            let s = lo * (r / lo).powf(j as f64 / 63.0);
            s.min(r * (1.0 - 1e-12)).max(lo)
        })
        .collect()
}

pub(crate) fn spot_check_nonincreasing(phi: &dyn Fn(f64) -> f64, inner: f64, r: f64) -> Result<()> {
    let grid = monotonicity_grid(inner, r);
    let vals: Vec<f64> = grid.iter().map(|&s| phi(s)).collect();
    for (i, w) in vals.windows(2).enumerate() {
        if w[1].is_nan() || w[1] > w[0] * (1.0 + 1e-12) + 1e-300 {
            return precondition(format!(
                "radial function increases between s={} and s={}",
                grid[i], grid[i + 1]
            ));
        }
    }
    Ok(())
}

/// Rearrangement of `x ↦ φ(|x|)` on the ball `B(0, r) ⊂ ℝ^n`.
pub fn rearrange_radial(phi: &RadialFunction, n: usize, r: f64) -> Result<Profile> {
    let omega = unit_ball_volume(n)?;
    if !(r.is_finite() && r > 0.0) {
        return domain(format!("radius must be positive, got {r}"));
    }
    let measure = omega * r.powi(n as i32);
    Ok(match phi {
        RadialFunction::LogPower { alpha, p } => AnalyticProfile::log_power(*p, *alpha, measure)?.into(),
        RadialFunction::Power { coef, exponent } => {
            let beta = exponent / n as f64;
            AnalyticProfile::power(coef * omega.powf(beta), beta, measure)?.into()
        }
        RadialFunction::Constant(c) => AnalyticProfile::indicator(c.abs(), measure)?.into(),
        RadialFunction::Custom(f) => {
            spot_check_nonincreasing(f.as_ref(), 0.0, r)?;
            RadialProfile::new(n, 0.0, r, f.clone())?.into()
        }
    })
}

/// Which value a radial shell takes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShellSampling {
    /// `φ(outer radius)`.
    Outer,
    /// `φ` at the radius splitting the shell's measure in half.
    MeasureMidpoint,
}

/// Discretizes `x ↦ φ(|x|)` on `ball` into an inner core `|x| < r·core_ratio`
/// and `shells` geometric shells out to the radius.
pub fn radial_field(
    phi: &dyn Fn(f64) -> f64,
    ball: &BallDomain,
    shells: usize,
    core_ratio: f64,
    sampling: ShellSampling,
) -> Result<SampledField> {
    if shells == 0 {
        return domain("need at least one shell");
    }
    if !(core_ratio > 0.0 && core_ratio < 1.0) {
        return domain(format!("core ratio must lie in (0,1), got {core_ratio}"));
    }
    let n = ball.dim();
    let omega = unit_ball_volume(n)?;
    let r = ball.radius();
    let nf = n as f64;
    let core = r * core_ratio;
    let sample = |lo: f64, hi: f64| -> f64 {
        let s = match sampling {
            ShellSampling::Outer => hi,
            ShellSampling::MeasureMidpoint => (0.5 * (lo.powf(nf) + hi.powf(nf))).powf(1.0 / nf),
        };
        phi(s).abs()
    };
    let mut cells = Vec::with_capacity(shells + 1);
    cells.push(Cell::with_span(omega * core.powf(nf), sample(0.0, core), (0.0, core)));
    let ln_ratio = (1.0 / core_ratio).ln();
    let mut lo = core;
    for j in 1..=shells {
        let hi = if j == shells { r } else { core * (ln_ratio * j as f64 / shells as f64).exp() };
        // Ω(hi^n - lo^n) without cancellation.
        let w = omega * hi.powf(nf) * (-(nf * (lo / hi).ln()).exp_m1());
        cells.push(Cell::with_span(w, sample(lo, hi), (lo, hi)));
        lo = hi;
    }
    SampledField::new(ball.clone().into(), cells)
}

/// Orders two profiles' values at `t`.
pub fn compare_at(a: &Profile, b: &Profile, t: f64) -> Option<Ordering> {
    a.value(t).partial_cmp(&b.value(t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn example_field() -> SampledField {
        SampledField::from_pairs(&[(1.0, 2.0), (2.0, 1.0), (0.5, 3.0)]).unwrap()
    }

    #[test]
    fn field_distribution_example() {
        assert_eq!(distribution_function(&example_field(), 1.5).unwrap(), 1.5);
        assert!(distribution_function(&example_field(), -1.0).is_err());
    }

    #[test]
    fn rearrange_example() {
        let s = rearrange(&example_field()).unwrap();
        assert_eq!(s.breakpoints(), &[0.0, 0.5, 1.5, 3.5]);
        assert_eq!(s.values(), &[3.0, 2.0, 1.0]);
        assert_eq!(s.value(3.5), 0.0);
        assert_eq!(s.value(0.5), 2.0);
    }

    #[test]
    fn rearrange_single_cell_and_idempotence() {
        let f = SampledField::from_pairs(&[(0.75, 4.0)]).unwrap();
        let s = rearrange(&f).unwrap();
        assert_eq!(s.breakpoints(), &[0.0, 0.75]);
        assert_eq!(s.values(), &[4.0]);
        let again = rearrange(&rearrange(&example_field()).unwrap().to_field().unwrap()).unwrap();
        assert_eq!(again, rearrange(&example_field()).unwrap());
    }

    #[test]
    fn rearrange_merges_ties_and_drops_zeros() {
        let f = SampledField::from_pairs(&[(1.0, 2.0), (0.25, 0.0), (0.5, 2.0), (1.0, 1.0)]).unwrap();
        let s = rearrange(&f).unwrap();
        assert_eq!(s.breakpoints(), &[0.0, 1.5, 2.5]);
        assert_eq!(s.values(), &[2.0, 1.0]);
        assert_eq!(s.support_end(), 2.5);
    }

    #[test]
    fn rearrange_empty_is_domain_error() {
        let f = SampledField::new(Interval1D::new(0.0, 1.0).unwrap().into(), vec![]).unwrap();
        assert!(matches!(rearrange(&f), Err(LabError::Domain(_))));
    }

    #[test]
    fn invalid_cells_rejected() {
        assert!(SampledField::from_pairs(&[(0.0, 1.0)]).is_err());
        assert!(SampledField::from_pairs(&[(1.0, -1.0)]).is_err());
        assert!(SampledField::from_pairs(&[(1.0, f64::INFINITY)]).is_err());
    }

    #[test]
    fn indicator_distribution() {
        let p = AnalyticProfile::indicator(3.0, 5.0).unwrap();
        assert_eq!(p.distribution(2.0).unwrap(), 5.0);
        assert_eq!(p.distribution(3.0).unwrap(), 0.0);
    }

    #[test]
    fn power_distribution_matches_ball_formula() {
        // |x|^{-n/p} on B(0,r): λ(t) = min(Ω_n t^{-p}, Ω_n r^n)
        for (n, p, r) in [(1usize, 2.0, 1.0), (2, 3.0, 0.5), (3, 1.5, 2.0)] {
            let prof = rearrange_radial(&RadialFunction::Power { coef: 1.0, exponent: n as f64 / p }, n, r).unwrap();
            let omega = unit_ball_volume(n).unwrap();
            for t in [0.1f64, 0.5, 1.0, 2.0, 7.0, 40.0] {
                let want = (omega * t.powf(-p)).min(omega * r.powi(n as i32));
                let got = prof.distribution(t).unwrap();
                assert!(((got - want) / want).abs() < 1e-12, "n={n} p={p} t={t}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn radial_shortcuts() {
        match rearrange_radial(&RadialFunction::LogPower { alpha: 0.5, p: 3.0 }, 2, 1.0).unwrap() {
            Profile::Analytic(AnalyticProfile::LogPower { p, alpha, scale, log_cut, coef }) => {
                assert_eq!((p, alpha, log_cut, coef), (3.0, 0.5, 0.0, 1.0));
                assert!((scale - PI).abs() < 1e-14);
            }
            other => panic!("unexpected {other:?}"),
        }
        match rearrange_radial(&RadialFunction::Power { coef: 1.0, exponent: 0.5 }, 1, 1.0).unwrap() {
            Profile::Analytic(AnalyticProfile::Power { c, beta, support_end }) => {
                assert!((c - 2f64.sqrt()).abs() < 1e-15);
                assert_eq!(beta, 0.5);
                assert!((support_end - 2.0).abs() < 1e-14);
            }
            other => panic!("unexpected {other:?}"),
        }
        match rearrange_radial(&RadialFunction::Constant(2.5), 3, 1.0).unwrap() {
            Profile::Analytic(AnalyticProfile::Indicator { height, support_end }) => {
                assert_eq!(height, 2.5);
                assert!((support_end - 4.0 * PI / 3.0).abs() < 1e-14);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn custom_radial_monotonicity_spot_check() {
        let bad = RadialFunction::Custom(Arc::new(|s: f64| s));
        assert!(matches!(rearrange_radial(&bad, 2, 1.0), Err(LabError::Precondition(_))));
        let good = RadialFunction::Custom(Arc::new(|s: f64| 1.0 - s * s));
        let prof = rearrange_radial(&good, 2, 1.0).unwrap();
        // t = π s^2
        let t = PI * 0.25;
        assert!((prof.value(t) - 0.75).abs() < 1e-14);
    }

    #[test]
    fn maximal_examples() {
        let quad = QuadratureSpec::default();
        let ind: Profile = AnalyticProfile::indicator(1.0, 2.0).unwrap().into();
        assert_eq!(maximal_profile(&ind, 4.0, &quad).unwrap(), 0.5);
        assert_eq!(maximal_profile(&ind, 1.3, &quad).unwrap(), 1.0);
        assert!(maximal_profile(&ind, 0.0, &quad).is_err());
        let pw: Profile = AnalyticProfile::power(2.0, 0.25, 10.0).unwrap().into();
        let t: f64 = 3.0;
        let want = 2.0 * t.powf(-0.25) / 0.75;
        assert!((maximal_profile(&pw, t, &quad).unwrap() - want).abs() < 1e-13);
        let div: Profile = AnalyticProfile::power(1.0, 1.0, 1.0).unwrap().into();
        assert_eq!(maximal_profile(&div, 0.5, &quad).unwrap(), f64::INFINITY);
    }

    #[test]
    fn log_power_maximal_matches_direct_quadrature() {
        let quad = QuadratureSpec::default();
        let prof = AnalyticProfile::log_power(2.0, 1.0, 1.0).unwrap();
        let t: f64 = 0.3;
        let got = prof.cumulative(t, &quad).unwrap();
        // s = t e^{-w}
        let g = |w: f64| {
            let s = t * (-w).exp();
            if s == 0.0 {
                0.0
            } else {
                prof.value(s) * s
            }
        };
        let want = crate::quadrature::integrate_half_line(&g, 0.0, &quad, |_| 0.0).unwrap();
        assert!(((got - want) / want).abs() < 1e-9, "{got} vs {want}");
    }

    #[test]
    fn log_power_distribution_inverts_value() {
        let prof = AnalyticProfile::log_power(3.0, 0.5, 2.0).unwrap();
        for t in [1e-9, 1e-3, 0.1, 1.0, 1.9] {
            let v = prof.value(t);
            let lam = prof.distribution(v * (1.0 + 1e-12)).unwrap();
            assert!(lam <= t && lam > t * (1.0 - 1e-6), "t={t} lam={lam}");
        }
        assert_eq!(prof.distribution(0.0).unwrap(), 2.0);
    }

    #[test]
    fn step_profile_json_validation() {
        let s: StepProfile = serde_json::from_str(r#"{"breakpoints":[0,1,2],"values":[2,1]}"#).unwrap();
        assert_eq!(s.values(), &[2.0, 1.0]);
        assert!(serde_json::from_str::<StepProfile>(r#"{"breakpoints":[0,1,1],"values":[2,1]}"#).is_err());
        assert!(serde_json::from_str::<StepProfile>(r#"{"breakpoints":[0,1,2],"values":[1,2]}"#).is_err());
        assert!(serde_json::from_str::<StepProfile>(r#"{"breakpoints":[1,2],"values":[1]}"#).is_err());
        let back: StepProfile = serde_json::from_str(&serde_json::to_string(&s).unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn restriction_keeps_inner_measure() {
        let ball = BallDomain::new(2, 1.0).unwrap();
        let f = radial_field(&|s: f64| 1.0 / s, &ball, 64, 1e-3, ShellSampling::Outer).unwrap();
        assert!(f.covers_domain());
        let half = BallDomain::new(2, 0.5).unwrap();
        let g = f.restrict(&half.clone().into()).unwrap();
        assert!(((g.total_measure() - half.volume()) / half.volume()).abs() < 1e-12);
    }
}
