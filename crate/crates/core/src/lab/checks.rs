//! Hölder, embedding, sandwich, inclusion and absolute-continuity checks.

use num_rational::BigRational;
use num_traits::{FromPrimitive, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, precondition, LabError, Result};
use crate::foundations::{unit_ball_volume, BallDomain, Domain, Exponent, ExponentPair, Interval1D};
use crate::gallery::{make_power_singularity, make_u_radial, make_v, GalleryItem};
use crate::lab::report::{CheckReport, Params, Verdict};
use crate::norms::{lebesgue_norm, quasinorm, starstar_norm, tail_norm, truncated_head_integral, NormValue, TailTarget};
use crate::quadrature::QuadratureSpec;
use crate::rearrangement::{radial_field, rearrange, AnalyticProfile, Profile, SampledField, ShellSampling};

/// Slack of quadrature-backed checks, relative to the compared magnitude.
pub fn quadrature_slack(quad: &QuadratureSpec) -> f64 {
    10.0 * quad.rel_tol
}

/// Relative float slack of checks built from exact step sums.
pub const STEP_SLACK: f64 = 1e-12;

fn q_param(q: Exponent) -> String {
    match q {
        Exponent::Infinity => "inf".into(),
        Exponent::Finite(v) => crate::lab::report::format_number(v),
    }
}

fn pq_params(pq: &ExponentPair) -> Params {
    Params::new().num("p", pq.p()).text("q", q_param(pq.q()))
}

fn rational(x: f64) -> Result<BigRational> {
    BigRational::from_f64(x).ok_or_else(|| LabError::Domain(format!("{x} is not a finite number")))
}

fn same_partition(f: &SampledField, g: &SampledField) -> bool {
    f.domain() == g.domain()
        && f.len() == g.len()
        && f.cells().iter().zip(g.cells()).all(|(a, b)| a.weight == b.weight && a.span == b.span)
}

/// Exact decreasing rearrangement: `(breakpoint, value)` steps.
fn rational_rearrangement(f: &SampledField) -> Result<Vec<(BigRational, BigRational)>> {
    let mut cells: Vec<(f64, f64)> = f.cells().iter().map(|c| (c.magnitude, c.weight)).collect();
    cells.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut acc = BigRational::zero();
    let mut out = Vec::with_capacity(cells.len());
    for (m, w) in cells {
        if m == 0.0 {
            break;
        }
        acc += rational(w)?;
        out.push((acc.clone(), rational(m)?));
    }
    Ok(out)
}

/// `∫_0^∞ f* g*` from two exact step rearrangements.
fn rational_product_integral(a: &[(BigRational, BigRational)], b: &[(BigRational, BigRational)]) -> BigRational {
    let (mut i, mut j) = (0, 0);
    let mut left = BigRational::zero();
    let mut total = BigRational::zero();
    while i < a.len() && j < b.len() {
        let right = if a[i].0 <= b[j].0 { a[i].0.clone() } else { b[j].0.clone() };
        total += (&right - &left) * &a[i].1 * &b[j].1;
        if a[i].0 == right {
            i += 1;
        }
        if b[j].0 == right {
            j += 1;
        }
        left = right;
    }
    total
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// `∫|fg| ≤ ∫ f*g* ≤ ‖f‖_{p,q}‖g‖_{p',q'}` on one partition.
///
/// The first two quantities are exact rationals; `margin` is the second
/// link and the Hardy–Littlewood link is recorded as `hl_margin`.
pub fn check_holder(f: &SampledField, g: &SampledField, pq: &ExponentPair, quad: &QuadratureSpec) -> Result<CheckReport> {
    if !same_partition(f, g) {
        return domain("Hölder check needs two fields on one partition");
    }
    let params = pq_params(pq).num("cells", f.len() as f64);
    let fa = quasinorm(&rearrange(f)?.into(), pq, quad)?;
    let gb = quasinorm(&rearrange(g)?.into(), &pq.conjugate(), quad)?;
    let (fa, gb) = match (fa, gb) {
        (NormValue::Finite(a), NormValue::Finite(b)) => (a, b),
        _ => return Ok(CheckReport::skipped("holder", params, "infinite norm on a factor")),
    };
    let mut direct = BigRational::zero();
    for (a, b) in f.cells().iter().zip(g.cells()) {
        direct += rational(a.weight)? * rational(a.magnitude)? * rational(b.magnitude)?;
    }
    let middle = rational_product_integral(&rational_rearrangement(f)?, &rational_rearrangement(g)?);
    let hl = &middle - &direct;
    let rhs = fa * gb;
    let mid = to_f64(&middle);
    Ok(CheckReport::with_margin("holder", params, to_f64(&direct), rhs, rhs - mid, STEP_SLACK * rhs, f.len() as u64)
        .detail("middle", mid)
        .detail("hl_margin", to_f64(&hl))
        .require(!hl.is_negative(), "rearranged product integral below the direct one"))
}

/// `‖f‖_{p1,q1} ≤ ‖f‖_{p2,q2}·‖χ_Ω‖_{p3,q3}`.
pub fn check_general_holder(
    f: &SampledField,
    e1: &ExponentPair,
    e2: &ExponentPair,
    e3: &ExponentPair,
    quad: &QuadratureSpec,
) -> Result<CheckReport> {
    let (p1, p2, p3) = (e1.p(), e2.p(), e3.p());
    if ((1.0 / p1) - (1.0 / p2 + 1.0 / p3)).abs() > 1e-12 / p1 {
        return precondition(format!("1/{p1} != 1/{p2} + 1/{p3}"));
    }
    let (q1, q2, q3) = (e1.q(), e2.q(), e3.q());
    let harmonic = !q1.is_infinite()
        && !q2.is_infinite()
        && !q3.is_infinite()
        && (q1.reciprocal() - q2.reciprocal() - q3.reciprocal()).abs() <= 1e-12 * q1.reciprocal();
    let second_inf = q1 == q2 && q3.is_infinite();
    let first_inf = q1 == q3 && q2.is_infinite();
    if !(harmonic || second_inf || first_inf) {
        return precondition(format!("secondary exponents ({q1}, {q2}, {q3}) are not compatible"));
    }
    let params = Params::new()
        .num("p1", p1)
        .text("q1", q_param(q1))
        .num("p2", p2)
        .text("q2", q_param(q2))
        .num("p3", p3)
        .text("q3", q_param(q3));
    let prof: Profile = rearrange(f)?.into();
    let lhs = quasinorm(&prof, e1, quad)?;
    let mid = quasinorm(&prof, e2, quad)?;
    let (lhs, mid) = match (lhs, mid) {
        (NormValue::Finite(a), NormValue::Finite(b)) => (a, b),
        _ => return Ok(CheckReport::skipped("general_holder", params, "infinite norm")),
    };
    let omega = f.domain().measure();
    let chi = match q3 {
        Exponent::Infinity => omega.powf(1.0 / p3),
        Exponent::Finite(q) => (p3 / q).powf(1.0 / q) * omega.powf(1.0 / p3),
    };
    let rhs = mid * chi;
    Ok(CheckReport::compare("general_holder", params, lhs, rhs, STEP_SLACK * rhs, f.len() as u64))
}

/// `C(p,q,ε)` of the `L^{p-ε}` embedding; `ε ∈ (0, p-1]`.
pub fn embedding_constant(p: f64, q: Exponent, eps: f64) -> Result<f64> {
    if !(p.is_finite() && p > 1.0) {
        return domain(format!("p must satisfy 1 < p < inf, got {p}"));
    }
    if !(eps > 0.0 && eps <= p - 1.0) {
        return precondition(format!("epsilon must lie in (0, p-1], got {eps}"));
    }
    let s = p - eps;
    Ok(match q {
        Exponent::Infinity => p.powf(1.0 / s) * eps.powf(-1.0 / s),
        Exponent::Finite(q) => {
            if q <= p {
                return precondition(format!("need q > p, got p={p}, q={q}"));
            }
            (p * (q - p + eps) / q).powf(1.0 / s - 1.0 / q) * eps.powf(1.0 / q - 1.0 / s)
        }
    })
}

/// `‖f‖_{L^{p-ε}} ≤ C(p,q,ε)|Ω|^{ε/(p(p-ε))}‖f‖_{p,q}` for `f*` supported in
/// a set of measure `measure`.
pub fn check_embedding_eps(
    f_star: &Profile,
    pq: &ExponentPair,
    eps: f64,
    measure: f64,
    quad: &QuadratureSpec,
) -> Result<CheckReport> {
    let p = pq.p();
    if let Exponent::Finite(q) = pq.q() {
        if q <= p {
            return precondition(format!("need p < q, got p={p}, q={q}"));
        }
    }
    let c = embedding_constant(p, pq.q(), eps)?;
    if !(measure.is_finite() && measure > 0.0) || f_star.support_end() > measure * (1.0 + 1e-12) {
        return domain("profile support exceeds the declared measure");
    }
    let params = pq_params(pq).num("eps", eps).num("measure", measure);
    let norm = match quasinorm(f_star, pq, quad)? {
        NormValue::Finite(v) => v,
        NormValue::Infinite(r) => return Ok(CheckReport::skipped("embedding_eps", params, format!("norm is infinite ({r})"))),
    };
    let rhs = c * measure.powf(eps / (p * (p - eps))) * norm;
    let lhs = lebesgue_norm(f_star, p - eps, quad)?.as_f64();
    Ok(CheckReport::compare("embedding_eps", params, lhs, rhs, quadrature_slack(quad) * rhs, 1).detail("constant", c))
}

/// `‖f‖_{p,q} ≤ ‖f‖_{(p,q)} ≤ p'‖f‖_{p,q}`; `lhs` is the middle term,
/// `rhs = p'‖f‖_{p,q}` and `margin` the smaller of the two gaps.
pub fn check_equivalence(f_star: &Profile, pq: &ExponentPair, quad: &QuadratureSpec) -> Result<CheckReport> {
    let params = pq_params(pq);
    let a = match quasinorm(f_star, pq, quad)? {
        NormValue::Finite(v) => v,
        NormValue::Infinite(r) => return Ok(CheckReport::skipped("equivalence", params, format!("quasinorm is infinite ({r})"))),
    };
    let b = starstar_norm(f_star, pq, quad)?.as_f64();
    let upper = pq.p_conjugate() * a;
    let margin = (b - a).min(upper - b);
    let slack = quadrature_slack(quad) * b.abs();
    Ok(CheckReport::with_margin("equivalence", params, b, upper, margin, slack, 1).detail("quasinorm", a))
}

/// Finite/infinite split separating `L^{p,q1}` from `L^{p,q2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessBundle {
    pub p: f64,
    pub q1: Exponent,
    pub q2: Exponent,
    pub alpha: f64,
    pub n: usize,
    pub r: f64,
    pub function_id: String,
    pub gradient_id: String,
    pub function_q1: NormValue,
    pub function_q2: NormValue,
    pub gradient_q1: NormValue,
    pub gradient_q2: NormValue,
    pub closed_form_q2: Option<NormValue>,
    /// `∫_{εT}^T (t^{1/p}f*)^{q1} dt/t` at `ε = 1e-6, 1e-9, 1e-12`.
    pub head_integrals: Vec<f64>,
}

/// Head cutoffs of the divergence growth study.
pub const HEAD_CUTOFFS: [f64; 3] = [1e-6, 1e-9, 1e-12];

/// Each refinement of the head cutoff must grow the integral by this factor.
pub const HEAD_GROWTH: f64 = 1.1;

impl WitnessBundle {
    /// `q2` norms finite and `q1` norms infinite, function and gradient.
    pub fn splits(&self) -> bool {
        self.function_q2.is_finite()
            && !self.function_q1.is_finite()
            && self.gradient_q2.is_finite()
            && !self.gradient_q1.is_finite()
    }

    /// Relative distance of the computed `q2` norm from its closed form.
    pub fn closed_form_error(&self) -> f64 {
        match (self.function_q2, self.closed_form_q2) {
            (NormValue::Finite(a), Some(NormValue::Finite(b))) => ((a - b) / b).abs(),
            _ => f64::INFINITY,
        }
    }

    pub fn head_growth_ok(&self) -> bool {
        head_growth_ok(&self.head_integrals)
    }

    pub fn reports(&self) -> Vec<CheckReport> {
        let params = Params::new().num("p", self.p).text("q1", q_param(self.q1)).text("q2", q_param(self.q2));
        let err = self.closed_form_error();
        let split = CheckReport::compare("inclusion.witness", params.clone(), err, 1e-8, 0.0, 4)
            .detail("alpha", self.alpha)
            .detail("function_q2", self.function_q2.as_f64())
            .detail("gradient_q2", self.gradient_q2.as_f64())
            .require(self.splits(), "finite/infinite split not observed");
        let growth = head_growth_report("inclusion.head_growth", params, &self.head_integrals);
        vec![split, growth]
    }
}

pub fn head_growth_ok(values: &[f64]) -> bool {
    values.windows(2).all(|w| w[1] > HEAD_GROWTH * w[0])
}

/// `lhs` is the smallest growth factor over the refinements, `rhs` the
/// required factor.
pub fn head_growth_report(check_id: &str, params: Params, values: &[f64]) -> CheckReport {
    let worst = values.windows(2).map(|w| w[1] / w[0]).fold(f64::INFINITY, f64::min);
    let mut r = CheckReport::with_margin(check_id, params, worst, HEAD_GROWTH, worst - HEAD_GROWTH, 0.0, values.len() as u64);
    if !(worst > HEAD_GROWTH) {
        r.verdict = Verdict::Fail;
    }
    for (e, v) in HEAD_CUTOFFS.iter().zip(values) {
        r = r.detail(&format!("head_{e:e}"), *v);
    }
    r
}

/// Truncated-head integrals at [`HEAD_CUTOFFS`].
pub fn head_integrals(f_star: &Profile, p: f64, q: f64, quad: &QuadratureSpec) -> Result<Vec<f64>> {
    HEAD_CUTOFFS.iter().map(|&e| truncated_head_integral(f_star, p, q, e, quad)).collect()
}

/// `α = 1/q1`, the boundary case of `q1 ≤ 1/α < q2`.
pub fn witness_alpha(q1: f64, q2: Exponent) -> Result<f64> {
    if !(q1.is_finite() && q1 >= 1.0) {
        return domain(format!("q1 must satisfy 1 <= q1 < inf, got {q1}"));
    }
    if let Exponent::Finite(v) = q2 {
        if v <= q1 {
            return domain(format!("need q1 < q2, got q1={q1}, q2={v}"));
        }
    }
    let alpha = 1.0 / q1;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(LabError::Internal(format!("no admissible alpha for q1={q1}")));
    }
    Ok(alpha)
}

/// The log-power witness on `B(0, r) ⊂ ℝ^n` and its antiderivative.
pub fn witness_strict_inclusion(
    p: f64,
    q1: f64,
    q2: Exponent,
    n: usize,
    r: f64,
    quad: &QuadratureSpec,
) -> Result<WitnessBundle> {
    let alpha = witness_alpha(q1, q2)?;
    let u = make_u_radial(r, alpha, n, p)?;
    let v = make_v(r, alpha, n, p)?;
    let e1 = ExponentPair::new(p, q1)?;
    let e2 = ExponentPair::new(p, q2)?;
    let fp = u.function_profile()?.ok_or_else(|| LabError::Internal("witness lost its profile".into()))?;
    let gp = v.gradient_profile()?.ok_or_else(|| LabError::Internal("witness gradient lost its profile".into()))?;
    Ok(WitnessBundle {
        p,
        q1: Exponent::Finite(q1),
        q2,
        alpha,
        n,
        r,
        function_id: u.id(),
        gradient_id: v.id(),
        function_q1: quasinorm(&fp, &e1, quad)?,
        function_q2: quasinorm(&fp, &e2, quad)?,
        gradient_q1: quasinorm(&gp, &e1, quad)?,
        gradient_q2: quasinorm(&gp, &e2, quad)?,
        closed_form_q2: u.closed_form_norm(&e2),
        head_integrals: head_integrals(&fp, p, q1, quad)?,
    })
}

/// What an absolute-continuity probe restricts.
#[derive(Debug, Clone, Copy)]
pub enum AcTarget<'a> {
    Item(&'a GalleryItem),
    Field(&'a SampledField),
}

/// Relative tolerance of the constant-sequence outcome.
pub const AC_CONSTANT_TOL: f64 = 1e-9;
/// Fraction of the first entry the decreasing outcome must fall below.
pub const AC_DECAY: f64 = 1e-3;

fn shrinking_domain(dom: &Domain, k: u32) -> Result<Domain> {
    let scale = 0.5f64.powi(k as i32);
    Ok(match dom {
        Domain::Ball(b) => BallDomain::with_center(b.dim(), b.radius() * scale, b.center().to_vec())?.into(),
        Domain::Interval(i) => {
            let c = if i.a() < 0.0 && i.b() > 0.0 { 0.0 } else { 0.5 * (i.a() + i.b()) };
            let h = (i.b() - c).min(c - i.a()) * scale;
            if c == 0.0 && i.a() == 0.0 {
                Interval1D::new(0.0, i.b() * scale)?.into()
            } else {
                Interval1D::new(c - h, c + h)?.into()
            }
        }
    })
}

/// `‖f·χ_{E_k}‖_{p,q}` for `E_k = B(0, r/2^k)`, `k = 1..=k_max`.
pub fn ac_sequence(target: AcTarget<'_>, pq: &ExponentPair, k_max: u32, quad: &QuadratureSpec) -> Result<Vec<NormValue>> {
    if k_max == 0 {
        return domain("need at least one restriction set");
    }
    match target {
        AcTarget::Item(item) => {
            let ln_r = item.radius().ln();
            (1..=k_max)
                .map(|k| quasinorm(&item.function_profile_within(ln_r - k as f64 * std::f64::consts::LN_2)?, pq, quad))
                .collect()
        }
        AcTarget::Field(f) => {
            let sets = (1..=k_max).map(|k| shrinking_domain(f.domain(), k)).collect::<Result<Vec<_>>>()?;
            tail_norm(TailTarget::Field(f), pq, &sets, quad)
        }
    }
}

/// Classifies the restriction-norm sequence: `margin ≥ 0` iff it decays
/// below `1e-3` of its first entry or stays constant within `1e-9`.
pub fn check_ac_norm(target: AcTarget<'_>, label: &str, pq: &ExponentPair, k_max: u32, quad: &QuadratureSpec) -> Result<CheckReport> {
    let params = pq_params(pq).text("target", label).num("k_max", k_max as f64);
    let seq = ac_sequence(target, pq, k_max, quad)?;
    if seq.iter().any(|v| !v.is_finite()) {
        return Ok(CheckReport::skipped("ac_norm", params, "restriction norm is infinite"));
    }
    let vals: Vec<f64> = seq.iter().map(|v| v.as_f64()).collect();
    let first = vals[0];
    let last = *vals.last().expect("nonempty");
    let decay_margin = AC_DECAY * first - last;
    let spread = if first == 0.0 {
        vals.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    } else {
        vals.iter().fold(0.0f64, |m, v| m.max(((v - first) / first).abs()))
    };
    let constant_margin = AC_CONSTANT_TOL - spread;
    let outcome = if constant_margin >= 0.0 {
        "constant"
    } else if decay_margin >= 0.0 {
        "decreasing"
    } else {
        "neither"
    };
    let margin = if first == 0.0 { constant_margin } else { decay_margin.max(constant_margin * first) };
    Ok(CheckReport::with_margin("ac_norm", params, last, first, margin, 0.0, vals.len() as u64)
        .detail("first", first)
        .detail("last", last)
        .detail("spread", spread)
        .note(outcome))
}

/// A bounded radial test function for the distance bound.
#[derive(Clone, Copy)]
pub struct TestFunction {
    pub name: &'static str,
    pub f: fn(f64) -> f64,
}

/// `0`, `10`, `1 + s²`, `3 cos s`, `e^{-s}`.
pub fn standard_test_functions() -> [TestFunction; 5] {
    [
        TestFunction { name: "zero", f: |_| 0.0 },
        TestFunction { name: "ten", f: |_| 10.0 },
        TestFunction { name: "one_plus_square", f: |s| 1.0 + s * s },
        TestFunction { name: "three_cos", f: |s| 3.0 * s.cos() },
        TestFunction { name: "exp_neg", f: |s| (-s).exp() },
    ]
}

/// Shell count of the distance discretization.
pub const DISTANCE_SHELLS: usize = 2000;
/// Core radius of the distance discretization, relative to the ball.
pub const DISTANCE_CORE: f64 = 1e-12;
/// Relative slack of the distance bound.
pub const DISTANCE_SLACK: f64 = 1e-2;

/// `‖u_r - v‖_{L^{p,∞}(B(0,a))} ≥ Ω_n^{1/p}` for every `a` in `radii`.
///
/// `lhs = Ω_n^{1/p}`, `rhs` the smallest computed distance. Shells take the
/// value at their outer radius.
pub fn check_distance_bound(v: &TestFunction, r: f64, n: usize, p: f64, radii: &[f64], quad: &QuadratureSpec) -> Result<CheckReport> {
    let item = make_power_singularity(r, n, p)?;
    if radii.is_empty() {
        return domain("need at least one radius");
    }
    let target = unit_ball_volume(n)?.powf(1.0 / p);
    let pq = ExponentPair::new(p, Exponent::Infinity)?;
    let params = Params::new().num("r", r).num("n", n as f64).num("p", p).text("v", v.name);
    let mut report_details = Vec::new();
    let mut worst = f64::INFINITY;
    for &a in radii {
        if !(a > 0.0 && a <= r) {
            return domain(format!("restriction radius {a} outside (0, {r}]"));
        }
        let ball = BallDomain::new(n, a)?;
        let f = v.f;
        let phi = |s: f64| (item.value_radial(s) - f(s)).abs();
        let field = radial_field(&phi, &ball, DISTANCE_SHELLS, DISTANCE_CORE, ShellSampling::Outer)?;
        let d = quasinorm(&rearrange(&field)?.into(), &pq, quad)?.as_f64();
        report_details.push((a, d));
        worst = worst.min(d);
    }
    let mut rep = CheckReport::compare(
        "distance_bound",
        params,
        target,
        worst,
        DISTANCE_SLACK * target,
        (radii.len() * (DISTANCE_SHELLS + 1)) as u64,
    );
    for (a, d) in report_details {
        rep = rep.detail(&format!("alpha={}", crate::lab::report::format_number(a)), d);
    }
    Ok(rep)
}

/// `ρ = ‖u‖_{p,q} / (|Ω|^{1/n}‖∇u‖_{p,q})`, or `None` when the gradient
/// norm is infinite. A zero item gives `ρ = 0`.
pub fn poincare_ratio(item: &GalleryItem, pq: &ExponentPair, quad: &QuadratureSpec) -> Result<Option<f64>> {
    let grad = match item.gradient_profile()? {
        Some(g) => g,
        None => return Err(LabError::Unsupported(format!("{} has no exact gradient rearrangement", item.id()))),
    };
    let gn = match quasinorm(&grad, pq, quad)? {
        NormValue::Finite(v) => v,
        NormValue::Infinite(_) => return Ok(None),
    };
    let prof = item
        .function_profile()?
        .ok_or_else(|| LabError::Unsupported(format!("{} has no exact rearrangement", item.id())))?;
    let un = quasinorm(&prof, pq, quad)?.as_f64();
    if un == 0.0 {
        return Ok(Some(0.0));
    }
    let n = if item.is_slice() { 1.0 } else { item.dim() as f64 };
    Ok(Some(un / (item.measure().powf(1.0 / n) * gn)))
}

/// Relative tolerance of the `r ↦ 2r` invariance of `ρ`.
pub const POINCARE_SCALE_TOL: f64 = 1e-3;

/// The same item on the ball of twice the radius, for the families whose
/// ratio is dilation invariant.
pub fn doubled(item: &GalleryItem) -> Result<Option<GalleryItem>> {
    use crate::gallery::GalleryTag;
    fn scale_tag(tag: &GalleryTag) -> Option<GalleryTag> {
        match tag {
            GalleryTag::VAntiderivative { r, alpha, n, p } => {
                Some(GalleryTag::VAntiderivative { r: 2.0 * r, alpha: *alpha, n: *n, p: *p })
            }
            GalleryTag::Truncation { parent, k } => match parent.as_ref() {
                GalleryTag::UpFamily { .. } => None,
                other => scale_tag(other).map(|t| GalleryTag::Truncation { parent: Box::new(t), k: *k }),
            },
            GalleryTag::Shifted { parent, .. } => match parent.as_ref() {
                GalleryTag::UpFamily { n, p, radius } => {
                    let r = 2.0 * radius;
                    Some(GalleryTag::Shifted {
                        parent: Box::new(GalleryTag::UpFamily { n: *n, p: *p, radius: r }),
                        constant: crate::gallery::up_boundary_constant(*n, *p, r),
                    })
                }
                _ => None,
            },
            _ => None,
        }
    }
    match scale_tag(item.tag()) {
        Some(t) => Ok(Some(crate::gallery::id::parse_item(&crate::gallery::id::format_tag(&t))?)),
        None => Ok(None),
    }
}

/// Ratios over a family of boundary-vanishing items: every ratio finite and
/// invariant under `r ↦ 2r` where a doubled item exists.
///
/// `lhs` is the largest relative change under doubling, `rhs` the tolerance;
/// `max_ratio` records the empirical lower bound for the constant.
pub fn check_poincare_ratio(items: &[GalleryItem], pq: &ExponentPair, quad: &QuadratureSpec) -> Result<CheckReport> {
    let params = pq_params(pq).num("items", items.len() as f64);
    let mut max_ratio = 0.0f64;
    let mut worst_change = 0.0f64;
    let mut finite = true;
    let mut skipped = Vec::new();
    let mut details = Vec::new();
    let mut counted = 0u64;
    for item in items {
        let rho = match poincare_ratio(item, pq, quad)? {
            Some(v) => v,
            None => {
                skipped.push(item.id());
                continue;
            }
        };
        counted += 1;
        finite &= rho.is_finite();
        max_ratio = max_ratio.max(rho);
        details.push((item.id(), rho));
        if let Some(big) = doubled(item)? {
            if let Some(rho2) = poincare_ratio(&big, pq, quad)? {
                let change = if rho == 0.0 { rho2.abs() } else { ((rho2 - rho) / rho).abs() };
                worst_change = worst_change.max(change);
                details.push((format!("{}@2r", item.id()), rho2));
            }
        }
    }
    if counted == 0 {
        return Ok(CheckReport::skipped("poincare_ratio", params, "every gradient norm is infinite"));
    }
    let mut rep = CheckReport::compare("poincare_ratio", params, worst_change, POINCARE_SCALE_TOL, 0.0, counted)
        .detail("max_ratio", max_ratio)
        .require(finite, "ratio not finite");
    for (id, rho) in details {
        rep = rep.detail(&id, rho);
    }
    if !skipped.is_empty() {
        rep = rep.note(format!("skipped (infinite gradient norm): {}", skipped.join(" ")));
    }
    Ok(rep)
}

/// Indicator profile `h·χ_{[0,T)}`.
pub fn indicator_profile(height: f64, measure: f64) -> Result<Profile> {
    Ok(AnalyticProfile::indicator(height, measure)?.into())
}
