//! Named counterexample functions with evaluators, gradients and exact
//! rearrangements.
//!
//! Every item is radial about the origin. Its radial profile `s ↦ φ(s)` is
//! the base family evaluated at `max(s, cut)` minus a constant `shift`, where
//! `cut` is the truncation radius (0 when untruncated).

mod antiderivative;
pub mod id;
pub mod transforms;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, LabError, Result};
use crate::foundations::{unit_ball_volume, BallDomain, Domain, Exponent, ExponentPair, Interval1D};
use crate::norms::{quasinorm, DivergenceReason, NormValue};
use crate::quadrature::QuadratureSpec;
use crate::rearrangement::{spot_check_nonincreasing, AnalyticProfile, Profile, RadialProfile};

pub(crate) use antiderivative::Antiderivative;
pub use antiderivative::{lower_envelope_constant, LowerEnvelope};
pub use id::parse_item;
pub use transforms::{extend_by_zero, lattice, LatticeOp, SignedCell, SignedField};

/// Identity of a gallery item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "tag", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GalleryTag {
    /// `t ↦ t^{-1/p} ln^{-α}(T e^{pα}/t)` on `(0, T)`, `T = Ω_n r^n`.
    USlice { r: f64, alpha: f64, p: f64, n: usize },
    /// The slice composed with `x ↦ Ω_n|x|^n` on `B(0, r)`.
    URadial { r: f64, alpha: f64, n: usize, p: f64 },
    /// `x ↦ ∫_{|x|}^r u_rad`, whose gradient magnitude is `u_rad(|x|)`.
    VAntiderivative { r: f64, alpha: f64, n: usize, p: f64 },
    /// `|x|^{-n/p}` on `B(0, r)`.
    PowerSingularity { r: f64, n: usize, p: f64 },
    /// `ln|x|` when `p = n`, else `|x|^{1-n/p}`, on `B(0, radius)`.
    UpFamily { n: usize, p: f64, radius: f64 },
    Truncation { parent: Box<GalleryTag>, k: u32 },
    Shifted { parent: Box<GalleryTag>, constant: f64 },
}

/// `(Ω_n s^n)^{-1/p} (pα + n ln(r/s))^{-α}` on `(0, r]`.
#[derive(Debug, Clone, Copy)]
struct LogRadial {
    r: f64,
    alpha: f64,
    n: usize,
    p: f64,
    omega: f64,
}

impl LogRadial {
    fn value(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return f64::INFINITY;
        }
        let nf = self.n as f64;
        let sigma = (self.r / s).ln();
        (-(self.omega.ln() + nf * s.ln()) / self.p).exp() * (self.p * self.alpha + nf * sigma).powf(-self.alpha)
    }

    fn derivative(&self, s: f64) -> f64 {
        let nf = self.n as f64;
        let sigma = (self.r / s).ln();
        -(nf / s) * self.value(s) * (1.0 / self.p - self.alpha / (self.p * self.alpha + nf * sigma))
    }
}

#[derive(Debug, Clone)]
enum Base {
    Slice { p: f64, alpha: f64, end: f64 },
    URadial(LogRadial),
    V(Arc<Antiderivative>),
    Power { n: usize, p: f64 },
    Up { n: usize, p: f64 },
}

impl Base {
    fn value(&self, s: f64) -> f64 {
        match self {
            Base::Slice { p, alpha, end } => {
                if s <= 0.0 {
                    return f64::INFINITY;
                }
                (-s.ln() / p).exp() * (p * alpha + (end / s).ln()).powf(-alpha)
            }
            Base::URadial(u) => u.value(s),
            Base::V(v) => v.value(s),
            Base::Power { n, p } => s.powf(-(*n as f64) / p),
            Base::Up { n, p } => {
                let nf = *n as f64;
                if *p == nf {
                    s.ln()
                } else {
                    s.powf(1.0 - nf / p)
                }
            }
        }
    }

    fn derivative(&self, s: f64) -> f64 {
        match self {
            Base::Slice { p, alpha, end } => {
                let c = p * alpha + (end / s).ln();
                -self.value(s) / s * (1.0 / p - alpha / c)
            }
            Base::URadial(u) => u.derivative(s),
            Base::V(v) => -v.gradient(s),
            Base::Power { n, p } => {
                let e = *n as f64 / p;
                -e * s.powf(-e - 1.0)
            }
            Base::Up { n, p } => {
                let nf = *n as f64;
                up_constant(nf, *p) * s.powf(-nf / p)
            }
        }
    }
}

/// `C(n,p)`: 1 when `p = n`, else `1 - n/p`.
pub fn up_constant(n: f64, p: f64) -> f64 {
    if p == n {
        1.0
    } else {
        1.0 - n / p
    }
}

/// `c(n,p,r)`, the value of `u_p` on the sphere of radius `r`.
pub fn up_boundary_constant(n: usize, p: f64, r: f64) -> f64 {
    let nf = n as f64;
    if p == nf {
        r.ln()
    } else {
        r.powf(1.0 - nf / p)
    }
}

/// A radial counterexample function on an origin-centred ball (an interval
/// when `n = 1`; `(0, T)` for the slice).
#[derive(Debug, Clone)]
pub struct GalleryItem {
    tag: GalleryTag,
    base: Base,
    n: usize,
    radius: f64,
    omega: f64,
    cut: f64,
    shift: f64,
}

fn check_radius(r: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return domain(format!("radius must be positive and finite, got {r}"));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain(format!("alpha must lie in (0,1], got {alpha}"));
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p > 1.0) {
        return domain(format!("p must satisfy 1 < p < inf, got {p}"));
    }
    Ok(())
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return domain("dimension must be at least 1");
    }
    Ok(())
}

/// The log-power function on `B(0, r) ⊂ ℝ^n`.
pub fn make_u_radial(r: f64, alpha: f64, n: usize, p: f64) -> Result<GalleryItem> {
    check_radius(r)?;
    check_alpha(alpha)?;
    check_dim(n)?;
    check_p(p)?;
    let omega = unit_ball_volume(n)?;
    Ok(GalleryItem {
        tag: GalleryTag::URadial { r, alpha, n, p },
        base: Base::URadial(LogRadial { r, alpha, n, p, omega }),
        n,
        radius: r,
        omega,
        cut: 0.0,
        shift: 0.0,
    })
}

/// The one-dimensional log-power profile on `(0, Ω_n r^n)`.
pub fn make_u_slice(r: f64, alpha: f64, p: f64, n: usize) -> Result<GalleryItem> {
    check_radius(r)?;
    check_alpha(alpha)?;
    check_dim(n)?;
    check_p(p)?;
    let end = unit_ball_volume(n)? * r.powi(n as i32);
    Ok(GalleryItem {
        tag: GalleryTag::USlice { r, alpha, p, n },
        base: Base::Slice { p, alpha, end },
        n: 1,
        radius: end,
        omega: 1.0,
        cut: 0.0,
        shift: 0.0,
    })
}

/// The antiderivative `v = f_rad(|x|)` of the radial log-power profile.
pub fn make_v(r: f64, alpha: f64, n: usize, p: f64) -> Result<GalleryItem> {
    check_radius(r)?;
    check_alpha(alpha)?;
    check_dim(n)?;
    check_p(p)?;
    let v = Antiderivative::new(r, alpha, n, p)?;
    Ok(GalleryItem {
        tag: GalleryTag::VAntiderivative { r, alpha, n, p },
        omega: v.omega(),
        base: Base::V(Arc::new(v)),
        n,
        radius: r,
        cut: 0.0,
        shift: 0.0,
    })
}

/// `|x|^{-n/p}` on `B(0, r)`.
pub fn make_power_singularity(r: f64, n: usize, p: f64) -> Result<GalleryItem> {
    check_radius(r)?;
    check_dim(n)?;
    check_p(p)?;
    Ok(GalleryItem {
        tag: GalleryTag::PowerSingularity { r, n, p },
        base: Base::Power { n, p },
        n,
        radius: r,
        omega: unit_ball_volume(n)?,
        cut: 0.0,
        shift: 0.0,
    })
}

/// `u_p` on the unit ball.
pub fn make_up(n: usize, p: f64) -> Result<GalleryItem> {
    make_up_on(n, p, 1.0)
}

/// `u_p` on `B(0, radius)`.
pub fn make_up_on(n: usize, p: f64, radius: f64) -> Result<GalleryItem> {
    check_dim(n)?;
    check_p(p)?;
    check_radius(radius)?;
    Ok(GalleryItem {
        tag: GalleryTag::UpFamily { n, p, radius },
        base: Base::Up { n, p },
        n,
        radius,
        omega: unit_ball_volume(n)?,
        cut: 0.0,
        shift: 0.0,
    })
}

/// `u_{r,p} = u_p - c(n,p,r)` on `B(0, r)`, zero on the boundary sphere.
pub fn make_shifted_up(n: usize, p: f64, r: f64) -> Result<GalleryItem> {
    shifted(&make_up_on(n, p, r)?, up_boundary_constant(n, p, r))
}

/// `item - constant`.
pub fn shifted(item: &GalleryItem, constant: f64) -> Result<GalleryItem> {
    if !constant.is_finite() {
        return domain(format!("shift must be finite, got {constant}"));
    }
    Ok(GalleryItem {
        tag: GalleryTag::Shifted { parent: Box::new(item.tag.clone()), constant },
        shift: item.shift + constant,
        ..item.clone()
    })
}

/// Freezes `item` inside the radius `1/(k+1)` (the `u_p` families) or
/// `R/(k+1)` (everything else, `R` the domain radius).
pub fn truncate(item: &GalleryItem, k: u32) -> Result<GalleryItem> {
    if k < 1 {
        return domain("truncation index must be at least 1");
    }
    if item.cut > 0.0 {
        return Err(LabError::Unsupported("item is already truncated".into()));
    }
    let cut = match item.base {
        Base::Up { .. } => 1.0 / (k as f64 + 1.0),
        _ => item.radius / (k as f64 + 1.0),
    };
    Ok(GalleryItem {
        tag: GalleryTag::Truncation { parent: Box::new(item.tag.clone()), k },
        cut,
        ..item.clone()
    })
}

impl GalleryItem {
    pub fn tag(&self) -> &GalleryTag {
        &self.tag
    }

    pub fn id(&self) -> String {
        id::format_tag(&self.tag)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Domain radius; the support end `T` for the slice.
    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn truncation_radius(&self) -> f64 {
        self.cut
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn is_slice(&self) -> bool {
        matches!(self.base, Base::Slice { .. })
    }

    pub fn domain(&self) -> Domain {
        if self.is_slice() {
            Interval1D::new(0.0, self.radius).expect("positive support").into()
        } else if self.n == 1 {
            Interval1D::new(-self.radius, self.radius).expect("positive radius").into()
        } else {
            BallDomain::new(self.n, self.radius).expect("positive radius").into()
        }
    }

    /// Measure of the domain.
    pub fn measure(&self) -> f64 {
        self.omega * self.radius.powi(self.n as i32)
    }

    /// Radial variable of a point: `|x|`, or `x` itself for the slice.
    pub fn radial_coordinate(&self, x: &[f64]) -> f64 {
        if self.is_slice() {
            x[0]
        } else {
            x.iter().map(|v| v * v).sum::<f64>().sqrt()
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.value_radial(self.radial_coordinate(x))
    }

    /// The item on the whole space, set to zero outside its domain.
    pub fn extended_value(&self, x: &[f64]) -> f64 {
        let s = self.radial_coordinate(x);
        if s > self.radius || s < 0.0 {
            0.0
        } else {
            self.value_radial(s)
        }
    }

    pub fn value_radial(&self, s: f64) -> f64 {
        self.base.value(s.max(self.cut)) - self.shift
    }

    /// `dφ/ds`; zero inside the truncation radius.
    pub fn radial_derivative(&self, s: f64) -> f64 {
        if s < self.cut {
            0.0
        } else {
            self.base.derivative(s)
        }
    }

    pub fn gradient_magnitude(&self, x: &[f64]) -> f64 {
        self.radial_derivative(self.radial_coordinate(x)).abs()
    }

    /// Whether the gradient magnitude is the radial log-power profile.
    pub(crate) fn tag_is_v(&self) -> bool {
        matches!(self.base, Base::V(_))
    }

    fn is_plain(&self) -> bool {
        self.cut == 0.0 && self.shift == 0.0
    }

    fn numeric_profile(
        &self,
        inner: f64,
        outer: f64,
        phi: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    ) -> Result<Option<Profile>> {
        if spot_check_nonincreasing(phi.as_ref(), inner, outer).is_err() {
            return Ok(None);
        }
        let prof = if self.is_slice() {
            RadialProfile::one_sided(inner, outer, phi)?
        } else {
            RadialProfile::new(self.n, inner, outer, phi)?
        };
        Ok(Some(prof.into()))
    }

    /// Exact rearrangement of `|item|` over its domain, or `None` when the
    /// magnitude is not radially nonincreasing.
    pub fn function_profile(&self) -> Result<Option<Profile>> {
        self.profile_within_radius(self.radius.ln())
    }

    /// Exact rearrangement of `|item|·χ_{B(0,ρ)}`, `ρ = e^{ln_rho} ≤ R`.
    ///
    /// Closed-form families accept radii below the floating-point range.
    pub fn function_profile_within(&self, ln_rho: f64) -> Result<Profile> {
        self.profile_within_radius(ln_rho)?.ok_or_else(|| {
            LabError::Unsupported(format!("{} has no exact rearrangement", self.id()))
        })
    }

    fn profile_within_radius(&self, ln_rho: f64) -> Result<Option<Profile>> {
        let ln_r = self.radius.ln();
        if ln_rho.is_nan() || ln_rho > ln_r + 1e-12 {
            return domain(format!("restriction radius e^{ln_rho} exceeds the domain radius"));
        }
        let ln_rho = ln_rho.min(ln_r);
        let nf = self.n as f64;
        let ln_measure = self.omega.ln() + nf * ln_rho;
        if self.is_plain() {
            match self.base {
                Base::Slice { p, alpha, end } => {
                    return Ok(Some(AnalyticProfile::log_power(p, alpha, end)?.with_log_cut(ln_r - ln_rho)?.into()));
                }
                Base::URadial(u) => {
                    let full = AnalyticProfile::log_power(u.p, u.alpha, self.measure())?;
                    return Ok(Some(full.with_log_cut(nf * (ln_r - ln_rho))?.into()));
                }
                Base::Power { p, .. } => {
                    let c = self.omega.powf(1.0 / p);
                    return Ok(Some(AnalyticProfile::power(c, 1.0 / p, ln_measure.exp())?.into()));
                }
                Base::Up { p, .. } if p < nf => {
                    let b = (nf / p - 1.0) / nf;
                    return Ok(Some(AnalyticProfile::power(self.omega.powf(b), b, ln_measure.exp())?.into()));
                }
                _ => {}
            }
        }
        let rho = ln_rho.exp();
        if !(rho > 0.0) {
            return Err(LabError::Unsupported("restriction radius underflows".into()));
        }
        let item = self.clone();
        self.numeric_profile(0.0, rho, Arc::new(move |s| item.value_radial(s).abs()))
    }

    /// Exact rearrangement of the gradient magnitude, or `None` when it is
    /// not radially nonincreasing.
    pub fn gradient_profile(&self) -> Result<Option<Profile>> {
        let nf = self.n as f64;
        let measure = self.measure();
        if self.cut == 0.0 {
            match self.base {
                Base::V(ref v) => return Ok(Some(AnalyticProfile::log_power(v.p, v.alpha, measure)?.into())),
                Base::Power { p, .. } => {
                    let beta = 1.0 / p + 1.0 / nf;
                    let c = nf / p * self.omega.powf(beta);
                    return Ok(Some(AnalyticProfile::power(c, beta, measure)?.into()));
                }
                Base::Up { p, .. } => {
                    let c = up_constant(nf, p).abs() * self.omega.powf(1.0 / p);
                    return Ok(Some(AnalyticProfile::power(c, 1.0 / p, measure)?.into()));
                }
                _ => {}
            }
        }
        let item = self.clone();
        let cut = self.cut.min(self.radius);
        if cut >= self.radius {
            return Ok(Some(AnalyticProfile::indicator(0.0, measure)?.into()));
        }
        self.numeric_profile(cut, self.radius, Arc::new(move |s| item.radial_derivative(s).abs()))
    }

    /// `‖item‖_{p,q}` where a closed form is known.
    pub fn closed_form_norm(&self, pq: &ExponentPair) -> Option<NormValue> {
        if !self.is_plain() {
            return None;
        }
        match self.base {
            Base::Slice { p, alpha, .. } => log_power_norm(p, alpha, pq),
            Base::URadial(u) => log_power_norm(u.p, u.alpha, pq),
            Base::Power { p, .. } if p == pq.p() => Some(match pq.q() {
                Exponent::Infinity => NormValue::Finite(self.omega.powf(1.0 / p)),
                Exponent::Finite(_) => NormValue::Infinite(DivergenceReason::HeadDivergence),
            }),
            _ => None,
        }
    }

    /// `‖∇item‖_{p,q}` where a closed form is known.
    pub fn closed_form_gradient_norm(&self, pq: &ExponentPair) -> Option<NormValue> {
        if self.cut != 0.0 {
            return None;
        }
        match self.base {
            Base::V(ref v) => log_power_norm(v.p, v.alpha, pq),
            Base::Up { n, p } if p == pq.p() => Some(match pq.q() {
                Exponent::Infinity => NormValue::Finite(up_constant(n as f64, p).abs() * self.omega.powf(1.0 / p)),
                Exponent::Finite(_) => NormValue::Infinite(DivergenceReason::HeadDivergence),
            }),
            _ => None,
        }
    }

    /// Value at the origin for the antiderivative family (`+∞` when `p ≤ n`)
    /// and the bound `(pα)^{-α} Ω_n^{-1/p} (1-n/p)^{-1} r^{1-n/p}` when `p > n`.
    pub fn origin_value_and_bound(&self) -> Option<(f64, Option<f64>)> {
        match self.base {
            Base::V(ref v) if self.is_plain() => Some((v.value_at_origin(), v.origin_bound())),
            _ => None,
        }
    }

    /// The `v` family's value from quadrature alone, bypassing closed forms.
    pub fn quadrature_value_radial(&self, s: f64) -> Option<f64> {
        match self.base {
            Base::V(ref v) => Some(v.quadrature_value(s.max(self.cut)) - self.shift),
            _ => None,
        }
    }

    /// Exponents `(α, p)` of the log-power factor, for the families built on it.
    pub fn log_power_parameters(&self) -> Option<(f64, f64)> {
        match self.base {
            Base::Slice { p, alpha, .. } => Some((alpha, p)),
            Base::URadial(u) => Some((u.alpha, u.p)),
            Base::V(ref v) => Some((v.alpha, v.p)),
            _ => None,
        }
    }
}

impl fmt::Display for GalleryItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// `(pα)^{-α}` at `q = ∞`, `((pα)^{1-qα}/(qα-1))^{1/q}` when `qα > 1`.
pub fn log_power_norm(p: f64, alpha: f64, pq: &ExponentPair) -> Option<NormValue> {
    if p != pq.p() {
        return None;
    }
    let c = p * alpha;
    Some(match pq.q() {
        Exponent::Infinity => NormValue::Finite(c.powf(-alpha)),
        Exponent::Finite(q) if q * alpha > 1.0 => {
            NormValue::Finite((c.powf(1.0 - q * alpha) / (q * alpha - 1.0)).powf(1.0 / q))
        }
        Exponent::Finite(_) => NormValue::Infinite(DivergenceReason::LogExponentTest),
    })
}

/// Whether a catalog entry concerns the item or its gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormTarget {
    Function,
    Gradient,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub item: String,
    pub target: NormTarget,
    pub p: f64,
    pub q: Exponent,
    pub value: NormValue,
}

/// Closed-form norms over a fixed set of items and exponents.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ClosedFormCatalog {
    pub entries: Vec<CatalogEntry>,
}

/// Outcome of reproducing one catalog entry through the profile pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogCheck {
    pub entry: CatalogEntry,
    pub computed: NormValue,
    pub rel_error: f64,
    pub agrees: bool,
}

impl ClosedFormCatalog {
    pub fn from_items(items: &[GalleryItem], exponents: &[ExponentPair]) -> Self {
        let mut entries = Vec::new();
        for item in items {
            for pq in exponents {
                if let Some(v) = item.closed_form_norm(pq) {
                    entries.push(CatalogEntry { item: item.id(), target: NormTarget::Function, p: pq.p(), q: pq.q(), value: v });
                }
                if let Some(v) = item.closed_form_gradient_norm(pq) {
                    entries.push(CatalogEntry { item: item.id(), target: NormTarget::Gradient, p: pq.p(), q: pq.q(), value: v });
                }
            }
        }
        ClosedFormCatalog { entries }
    }

    /// The items listed by the CLI, each at its own `p` and `q ∈ {1,2,4,8,∞}`.
    pub fn standard() -> Result<Self> {
        let items = standard_items()?;
        let mut entries = Vec::new();
        for item in &items {
            let p = match item.tag {
                GalleryTag::USlice { p, .. }
                | GalleryTag::URadial { p, .. }
                | GalleryTag::VAntiderivative { p, .. }
                | GalleryTag::PowerSingularity { p, .. }
                | GalleryTag::UpFamily { p, .. } => p,
                _ => continue,
            };
            let exps: Vec<ExponentPair> = [1.0, 2.0, 4.0, 8.0, f64::INFINITY]
                .iter()
                .map(|&q| ExponentPair::new(p, q))
                .collect::<Result<_>>()?;
            entries.extend(ClosedFormCatalog::from_items(std::slice::from_ref(item), &exps).entries);
        }
        Ok(ClosedFormCatalog { entries })
    }

    /// Recomputes every entry through rearrangement and quadrature.
    pub fn verify(&self, quad: &QuadratureSpec, rel_tol: f64) -> Result<Vec<CatalogCheck>> {
        self.entries
            .iter()
            .map(|e| {
                let item = parse_item(&e.item)?;
                let pq = ExponentPair::new(e.p, e.q)?;
                let prof = match e.target {
                    NormTarget::Function => item.function_profile()?,
                    NormTarget::Gradient => item.gradient_profile()?,
                }
                .ok_or_else(|| LabError::Internal(format!("{} lost its profile", e.item)))?;
                let computed = quasinorm(&prof, &pq, quad)?;
                let (rel_error, agrees) = match (e.value, computed) {
                    (NormValue::Finite(a), NormValue::Finite(b)) => {
                        let rel = if a == 0.0 { b.abs() } else { ((a - b) / a).abs() };
                        (rel, rel <= rel_tol)
                    }
                    (NormValue::Infinite(a), NormValue::Infinite(b)) => (0.0, a == b),
                    _ => (f64::INFINITY, false),
                };
                Ok(CatalogCheck { entry: e.clone(), computed, rel_error, agrees })
            })
            .collect()
    }
}

/// One representative of every family, as listed by the CLI.
pub fn standard_items() -> Result<Vec<GalleryItem>> {
    let up = make_up(2, 2.0)?;
    let v = make_v(1.0, 1.0, 2, 4.0)?;
    Ok(vec![
        make_u_slice(1.0, 0.5, 2.0, 1)?,
        make_u_radial(1.0, 1.0, 2, 2.0)?,
        make_u_radial(1.0, 0.5, 2, 3.0)?,
        make_v(1.0, 1.0, 2, 2.0)?,
        v.clone(),
        make_power_singularity(1.0, 1, 2.0)?,
        make_power_singularity(1.0, 2, 2.0)?,
        make_up(2, 4.0)?,
        up.clone(),
        truncate(&up, 7)?,
        truncate(&v, 3)?,
        make_shifted_up(3, 2.0, 1.0)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norms::starstar_norm;
    use crate::rearrangement::{radial_field, rearrange, ShellSampling};
    use std::f64::consts::{E, PI};

    fn pq(p: f64, q: f64) -> ExponentPair {
        ExponentPair::new(p, q).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn u_radial_examples() {
        let u = make_u_radial(1.0, 1.0, 2, 2.0).unwrap();
        assert_eq!(u.closed_form_norm(&pq(2.0, f64::INFINITY)), Some(NormValue::Finite(0.5)));
        let u = make_u_radial(1.0, 0.5, 1, 2.0).unwrap();
        assert_eq!(u.closed_form_norm(&pq(2.0, 4.0)), Some(NormValue::Finite(1.0)));
        let u = make_u_radial(1.3, 1.0, 3, 2.5).unwrap();
        assert_eq!(
            u.closed_form_norm(&pq(2.5, 1.0)),
            Some(NormValue::Infinite(DivergenceReason::LogExponentTest))
        );
        assert!(make_u_radial(1.0, 1.5, 2, 2.0).is_err());
        assert!(make_u_radial(1.0, 0.0, 2, 2.0).is_err());
    }

    #[test]
    fn u_radial_matches_slice_composition() {
        let u = make_u_radial(0.7, 0.5, 3, 2.0).unwrap();
        let slice = make_u_slice(0.7, 0.5, 2.0, 3).unwrap();
        let omega = unit_ball_volume(3).unwrap();
        for s in [0.69, 0.3, 1e-3, 1e-9] {
            let a = u.value(&[s, 0.0, 0.0]);
            let b = slice.value(&[omega * s.powi(3)]);
            assert!(rel(a, b) < 1e-13, "{a} vs {b}");
        }
    }

    #[test]
    fn analytic_gradients_match_finite_differences() {
        let items = [
            make_u_radial(1.0, 0.5, 2, 3.0).unwrap(),
            make_v(1.0, 0.75, 2, 3.0).unwrap(),
            make_v(1.0, 1.0, 3, 3.0).unwrap(),
            make_power_singularity(1.0, 2, 2.0).unwrap(),
            make_up(2, 2.0).unwrap(),
            make_up(3, 2.0).unwrap(),
            make_up(1, 4.0).unwrap(),
            make_u_slice(1.0, 0.5, 2.0, 1).unwrap(),
        ];
        for item in &items {
            for s in [0.9, 0.5, 0.1, 0.01] {
                let h = s * 1e-5;
                let fd = (item.value_radial(s + h) - item.value_radial(s - h)) / (2.0 * h);
                let an = item.radial_derivative(s);
                assert!(rel(fd, an) < 1e-6, "{} at {s}: {fd} vs {an}", item.id());
            }
        }
    }

    #[test]
    fn v_examples() {
        let v = make_v(1.0, 1.0, 2, 2.0).unwrap();
        let s = (-(E - 1.0)).exp();
        assert!((v.value(&[s, 0.0]) - 1.0 / (2.0 * PI.sqrt())).abs() < 1e-15);
        let v = make_v(1.0, 0.5, 2, 2.0).unwrap();
        assert!(v.value(&[1.0 - 1e-12, 0.0]) < 1e-5);
        assert_eq!(v.value(&[1.0, 0.0]), 0.0);
        assert_eq!(v.value(&[0.0, 0.0]), f64::INFINITY);
        let v = make_v(1.0, 1.0, 1, 2.0).unwrap();
        let (at0, bound) = v.origin_value_and_bound().unwrap();
        assert!(at0.is_finite() && at0 <= bound.unwrap());
    }

    #[test]
    fn v_gradient_is_the_radial_log_power() {
        let v = make_v(1.0, 0.5, 2, 3.0).unwrap();
        let u = make_u_radial(1.0, 0.5, 2, 3.0).unwrap();
        for s in [0.8, 0.2, 1e-4] {
            assert!(rel(v.gradient_magnitude(&[s, 0.0]), u.value(&[0.0, s])) < 1e-14);
        }
    }

    #[test]
    fn power_singularity_examples() {
        let u = make_power_singularity(1.0, 2, 2.0).unwrap();
        let quad = QuadratureSpec::default();
        let inf = pq(2.0, f64::INFINITY);
        assert!(rel(u.closed_form_norm(&inf).unwrap().as_f64(), PI.sqrt()) < 1e-15);
        let within = u.function_profile_within(0.1f64.ln()).unwrap();
        assert!(rel(quasinorm(&within, &inf, &quad).unwrap().as_f64(), PI.sqrt()) < 1e-14);
        let u1 = make_power_singularity(1.0, 1, 2.0).unwrap();
        assert_eq!(
            u1.closed_form_norm(&pq(2.0, 2.0)),
            Some(NormValue::Infinite(DivergenceReason::HeadDivergence))
        );
    }

    #[test]
    fn up_examples() {
        let up = make_up(2, 4.0).unwrap();
        let g = up.closed_form_gradient_norm(&pq(4.0, f64::INFINITY)).unwrap().as_f64();
        assert!((g - 0.5 * PI.powf(0.25)).abs() < 1e-15);
        let prof = up.gradient_profile().unwrap().unwrap();
        let q = quasinorm(&prof, &pq(4.0, f64::INFINITY), &QuadratureSpec::default()).unwrap().as_f64();
        assert!(rel(q, g) < 1e-15);
        let up2 = make_up(2, 2.0).unwrap();
        for s in [0.1, 0.5] {
            assert!(rel(up2.gradient_magnitude(&[s, 0.0]), 1.0 / s) < 1e-15);
        }
        for (n, p, r) in [(2, 4.0, 0.5), (2, 2.0, 0.7), (3, 2.0, 2.0)] {
            let shifted = make_shifted_up(n, p, r).unwrap();
            assert!(shifted.value_radial(r).abs() < 1e-15);
        }
    }

    #[test]
    fn shifted_up_sign_depends_on_p_versus_n() {
        for s in [1e-3, 0.3, 0.9] {
            assert!(make_shifted_up(3, 2.0, 1.0).unwrap().value_radial(s) > 0.0);
            assert!(make_shifted_up(2, 2.0, 1.0).unwrap().value_radial(s) < 0.0);
            assert!(make_shifted_up(2, 4.0, 1.0).unwrap().value_radial(s) < 0.0);
        }
    }

    #[test]
    fn truncation_examples() {
        let up = make_up(2, 2.0).unwrap();
        for k in [1u32, 4, 7] {
            let t = truncate(&up, k).unwrap();
            let c = 1.0 / (k as f64 + 1.0);
            assert_eq!(t.value(&[c * 0.3, 0.0]), c.ln());
            assert_eq!(t.gradient_magnitude(&[c * 0.3, 0.0]), 0.0);
            for s in [0.01, 0.2, 0.9] {
                assert!(t.value_radial(s).abs() <= up.value_radial(s).abs());
                assert!(t.gradient_magnitude(&[s, 0.0]) <= up.gradient_magnitude(&[s, 0.0]));
            }
        }
        let v = make_v(2.0, 0.5, 2, 3.0).unwrap();
        assert_eq!(truncate(&v, 3).unwrap().truncation_radius(), 0.5);
        assert!(truncate(&v, 0).is_err());
        assert!(truncate(&truncate(&v, 1).unwrap(), 2).is_err());
        let t = truncate(&v, 100_000).unwrap();
        for s in [0.01, 0.5, 1.5] {
            assert_eq!(t.value_radial(s), v.value_radial(s));
        }
    }

    #[test]
    fn truncated_gradient_norm_is_dominated() {
        let quad = QuadratureSpec::default();
        let v = make_v(1.0, 0.5, 2, 3.0).unwrap();
        let t = truncate(&v, 5).unwrap();
        for q in [3.0, 4.0, f64::INFINITY] {
            let e = pq(3.0, q);
            let a = quasinorm(&t.gradient_profile().unwrap().unwrap(), &e, &quad).unwrap().as_f64();
            let b = quasinorm(&v.gradient_profile().unwrap().unwrap(), &e, &quad).unwrap().as_f64();
            assert!(a <= b, "q={q}: {a} > {b}");
        }
    }

    #[test]
    fn catalog_reproduces_through_pipeline() {
        let cat = ClosedFormCatalog::standard().unwrap();
        assert!(cat.entries.len() > 20);
        for c in cat.verify(&QuadratureSpec::default(), 1e-8).unwrap() {
            assert!(c.agrees, "{:?}", c);
        }
    }

    #[test]
    fn radial_profiles_match_shell_discretization() {
        let quad = QuadratureSpec::default();
        let v = make_v(1.0, 1.0, 2, 3.0).unwrap();
        let prof = v.function_profile().unwrap().unwrap();
        let ball = BallDomain::new(2, 1.0).unwrap();
        let field = radial_field(&|s| v.value_radial(s), &ball, 20_000, 1e-8, ShellSampling::MeasureMidpoint).unwrap();
        let step: Profile = rearrange(&field).unwrap().into();
        for q in [3.0, f64::INFINITY] {
            let a = quasinorm(&prof, &pq(3.0, q), &quad).unwrap().as_f64();
            let b = quasinorm(&step, &pq(3.0, q), &quad).unwrap().as_f64();
            assert!(rel(a, b) < 1e-3, "q={q}: {a} vs {b}");
            let a2 = starstar_norm(&prof, &pq(3.0, q), &quad).unwrap().as_f64();
            assert!(a <= a2 && a2 <= 1.5 * a);
        }
    }

    #[test]
    fn tag_serializes_with_nested_parent() {
        let t = truncate(&make_up(2, 2.0).unwrap(), 7).unwrap();
        let json = serde_json::to_string(t.tag()).unwrap();
        assert!(json.contains("\"tag\":\"TRUNCATION\""));
        assert!(json.contains("\"tag\":\"UP_FAMILY\""));
        let back: GalleryTag = serde_json::from_str(&json).unwrap();
        assert_eq!(&back, t.tag());
    }
}
