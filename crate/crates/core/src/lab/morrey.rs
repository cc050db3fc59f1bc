//! Morrey-type Hölder bounds: the explicit one-dimensional inequality and
//! the seminorm stability and blow-up studies in higher dimension.

use rayon::prelude::*;

use crate::error::{domain, LabError, Result};
use crate::foundations::{conjugate_exponent, unit_ball_volume, BallDomain, Domain, Exponent, ExponentPair, Interval1D};
use crate::gallery::GalleryItem;
use crate::lab::checks::quadrature_slack;
use crate::lab::report::{format_number, CheckReport, Params};
use crate::lab::sampler::{holder_quotient_max, PairSampler, Point, SampleStrategy};
use crate::norms::{power_integral, quasinorm, NormValue};
use crate::quadrature::{grid_golden_max, integrate, QuadratureSpec};
use crate::rearrangement::{AnalyticProfile, Profile};

/// `C(p,q) = ‖χ_{(0,1)}‖_{p',q'} = (p'/q')^{1/q'}`.
pub fn morrey_1d_constant(pq: &ExponentPair) -> f64 {
    let pc = pq.p_conjugate();
    match conjugate_exponent(pq.q()).expect("validated q") {
        Exponent::Infinity => 1.0,
        Exponent::Finite(qc) => (pc / qc).powf(1.0 / qc),
    }
}

/// A stretch `[start, end)` of the radial variable covered `m` times by the
/// subinterval.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Piece {
    start: f64,
    end: f64,
    m: f64,
}

/// Pieces of `(min(x,y), max(x,y))` in `ρ = |t|`, clipped to `ρ ≥ cut`.
fn pieces(x: f64, y: f64, cut: f64) -> Vec<Piece> {
    let (a, b) = (x.abs(), y.abs());
    let (lo, hi) = (a.min(b), a.max(b));
    let raw = if x.min(y) < 0.0 && x.max(y) > 0.0 {
        vec![Piece { start: 0.0, end: lo, m: 2.0 }, Piece { start: lo, end: hi, m: 1.0 }]
    } else {
        vec![Piece { start: lo, end: hi, m: 1.0 }]
    };
    raw.into_iter()
        .map(|p| Piece { start: p.start.max(cut), ..p })
        .filter(|p| p.end > p.start)
        .collect()
}

/// Width of the log-variable window for a piece whose rearranged head
/// starts at `t = 0`; the integrand decays like `e^{-wq/p}` there.
fn head_window(p: f64, q: f64) -> f64 {
    92.0 * p / q
}

/// `‖u'‖_{L^{p,q}((x,y))}` from the exact rearrangement of `|u'|` restricted
/// to the subinterval. `|u'|` is radially nonincreasing off the truncation
/// core and vanishes inside it.
pub fn subinterval_gradient_norm(item: &GalleryItem, pq: &ExponentPair, x: f64, y: f64, quad: &QuadratureSpec) -> Result<NormValue> {
    let cut = item.truncation_radius();
    let parts = pieces(x, y, cut);
    let p = pq.p();
    let fine = quad.with_rel_tol(quad.rel_tol.min(1e-12))?.with_abs_tol(1e-300)?;
    let g = |rho: f64| item.radial_derivative(rho).abs();
    let mut offset = 0.0;
    let mut acc = 0.0f64;
    for piece in parts {
        let t_end = offset + piece.m * (piece.end - piece.start);
        if piece.start == 0.0 {
            let (alpha, pv) = item.log_power_parameters().filter(|_| item.tag_is_v()).ok_or_else(|| {
                LabError::Unsupported(format!("{} has no closed-form head at the origin", item.id()))
            })?;
            let omega = unit_ball_volume(1)?;
            let r = item.radius();
            let head: Profile = AnalyticProfile::log_power(pv, alpha, piece.m * r)?
                .with_log_cut((r / piece.end).ln())?
                .scaled((omega / piece.m).powf(-1.0 / pv))?
                .into();
            let v = match pq.q() {
                Exponent::Infinity => quasinorm(&head, pq, &fine)?,
                Exponent::Finite(q) => power_integral(&head, p, q, &fine)?,
            };
            match v {
                NormValue::Finite(v) => match pq.q() {
                    Exponent::Infinity => acc = acc.max(v),
                    Exponent::Finite(_) => acc += v,
                },
                inf => return Ok(inf),
            }
            offset = t_end;
            continue;
        }
        let (t0, m, start) = (offset, piece.m, piece.start);
        let window = match pq.q() {
            Exponent::Finite(q) if t0 == 0.0 => head_window(p, q),
            Exponent::Infinity if t0 == 0.0 => head_window(p, 1.0),
            _ => (t_end / t0).ln(),
        };
        let ln_end = t_end.ln();
        let weighted = |w: f64| {
            let t = (ln_end - w).exp();
            let rho = (start + (t - t0) / m).max(start);
            let gv = g(rho);
            if gv == 0.0 {
                0.0
            } else {
                ((ln_end - w) / p + gv.ln()).exp()
            }
        };
        match pq.q() {
            Exponent::Infinity => {
                let (_, v) = grid_golden_max(&weighted, 0.0, window, 257);
                acc = acc.max(v);
            }
            Exponent::Finite(q) => {
                let f = |w: f64| weighted(w).powf(q);
                acc += integrate(&f, 0.0, window, &fine)?;
            }
        }
        offset = t_end;
    }
    Ok(NormValue::Finite(match pq.q() {
        Exponent::Infinity => acc,
        Exponent::Finite(q) => acc.powf(1.0 / q),
    }))
}

/// `|u(x) - u(y)|`; close radii integrate `|u'|` to avoid cancellation.
fn radial_increment(item: &GalleryItem, a: f64, b: f64, quad: &QuadratureSpec) -> Result<f64> {
    let (lo, hi) = (a.min(b), a.max(b));
    if hi - lo > 1e-3 * hi {
        return Ok((item.value_radial(lo) - item.value_radial(hi)).abs());
    }
    let lo = lo.max(item.truncation_radius());
    if hi <= lo {
        return Ok(0.0);
    }
    let fine = quad.with_rel_tol(1e-13)?.with_abs_tol(1e-300)?;
    integrate(&|s: f64| item.radial_derivative(s).abs(), lo, hi, &fine)
}

/// `|u(x) - u(y)| ≤ C(p,q)|x-y|^{1/p'}‖u'‖_{L^{p,q}((x,y))}` over the
/// sampler's pairs.
///
/// `lhs` is the largest ratio of the two sides, `rhs = 1`.
pub fn check_morrey_1d(item: &GalleryItem, pq: &ExponentPair, sampler: &PairSampler, quad: &QuadratureSpec) -> Result<CheckReport> {
    if item.dim() != 1 {
        return domain(format!("{} is not one-dimensional", item.id()));
    }
    let c = morrey_1d_constant(pq);
    let params = Params::new()
        .text("item", item.id())
        .num("p", pq.p())
        .text("q", match pq.q() {
            Exponent::Infinity => "inf".to_string(),
            Exponent::Finite(q) => format_number(q),
        })
        .num("seed", sampler.seed as f64);
    let full = match item.gradient_profile()? {
        Some(g) => quasinorm(&g, pq, quad)?,
        None => subinterval_gradient_norm(item, pq, -item.radius(), item.radius(), quad)?,
    };
    if !full.is_finite() {
        return Ok(CheckReport::skipped("morrey_1d", params, "derivative norm is infinite"));
    }
    let pairs = sampler.pairs()?;
    let pc = pq.p_conjugate();
    let ratios: Vec<Option<(f64, f64, f64)>> = pairs
        .par_iter()
        .map(|(xv, yv)| -> Result<Option<(f64, f64, f64)>> {
            let (x, y) = (xv[0], yv[0]);
            if x == y {
                return Ok(None);
            }
            let du = radial_increment(item, x.abs(), y.abs(), quad)?;
            if !du.is_finite() {
                return Ok(None);
            }
            let n = subinterval_gradient_norm(item, pq, x, y, quad)?.as_f64();
            let bound = c * (x - y).abs().powf(1.0 / pc) * n;
            let ratio = if bound > 0.0 {
                du / bound
            } else if du == 0.0 {
                0.0
            } else {
                f64::INFINITY
            };
            Ok(Some((ratio, x, y)))
        })
        .collect::<Result<_>>()?;
    let evaluated: Vec<(f64, f64, f64)> = ratios.into_iter().flatten().collect();
    if evaluated.is_empty() {
        return domain("every sampled pair was degenerate");
    }
    let worst = evaluated.iter().copied().fold((f64::NEG_INFINITY, 0.0, 0.0), |m, r| if r.0 > m.0 { r } else { m });
    Ok(CheckReport::compare("morrey_1d", params, worst.0, 1.0, quadrature_slack(quad), evaluated.len() as u64)
        .detail("constant", c)
        .detail("gradient_norm", full.as_f64())
        .detail("worst_x", worst.1)
        .detail("worst_y", worst.2))
}

/// Allowed relative drift of the seminorm estimate under sample doubling.
pub const MORREY_DRIFT: f64 = 0.05;
/// Blow-up threshold relative to the estimate on the whole domain.
pub const BLOWUP_FACTOR: f64 = 10.0;
/// Exponent of the blow-up probe.
pub const BLOWUP_BETA: f64 = 0.5;
/// Inner radius of each annulus relative to its outer radius.
pub const BLOWUP_ANNULUS: f64 = 1.0 / 256.0;
/// Number of decades the annuli move toward the origin.
pub const BLOWUP_DECADES: u32 = 4;

fn gradient_norm(item: &GalleryItem, pq: &ExponentPair, quad: &QuadratureSpec) -> Result<NormValue> {
    if let Some(v) = item.closed_form_gradient_norm(pq) {
        return Ok(v);
    }
    let g = item
        .gradient_profile()?
        .ok_or_else(|| LabError::Unsupported(format!("{} has no exact gradient rearrangement", item.id())))?;
    quasinorm(&g, pq, quad)
}

fn origin(n: usize) -> Point {
    vec![0.0; n]
}

fn shrunk_domain(item: &GalleryItem, rho: f64) -> Result<Domain> {
    Ok(if item.dim() == 1 {
        Interval1D::new(-rho, rho)?.into()
    } else {
        BallDomain::new(item.dim(), rho)?.into()
    })
}

/// For `n < p`: the `β = 1 - n/p` seminorm estimate at `N` and `2N` pairs
/// drifts by less than 5%; `lhs` is the drift, `rhs = 0.05`. The ratio of
/// the estimate to `‖∇u‖_{p,q}` is recorded.
///
/// For `p ≤ n`: the `β = 1/2` estimate over annuli `[ρ/256, ρ]`, `ρ` from
/// `R` down to `R·1e-4`, exceeds 10 times its value at `ρ = R`; `lhs` is
/// the threshold, `rhs` the largest estimate.
pub fn check_morrey_nd(item: &GalleryItem, pq: &ExponentPair, count: usize, seed: u64, quad: &QuadratureSpec) -> Result<CheckReport> {
    let n = item.dim();
    let p = pq.p();
    if count == 0 {
        return domain("need at least one pair");
    }
    let params = Params::new()
        .text("item", item.id())
        .num("p", p)
        .text("q", match pq.q() {
            Exponent::Infinity => "inf".to_string(),
            Exponent::Finite(q) => format_number(q),
        })
        .num("seed", seed as f64);
    let u = |x: &[f64]| item.value(x);
    if (n as f64) < p {
        let beta = 1.0 - n as f64 / p;
        let mut sampler = PairSampler::new(item.domain(), 2 * count, SampleStrategy::RadialGeometric, seed);
        sampler.include_center = u(&origin(n)).is_finite();
        let pairs = sampler.pairs()?;
        let e1 = holder_quotient_max(&u, beta, &pairs[..count])?;
        let e2 = holder_quotient_max(&u, beta, &pairs)?;
        let drift = if e2 == 0.0 { 0.0 } else { (e2 - e1).abs() / e2 };
        let gn = gradient_norm(item, pq, quad)?;
        let ratio = match gn {
            NormValue::Finite(g) if g > 0.0 => e2 / g,
            _ => f64::NAN,
        };
        return Ok(CheckReport::compare("morrey_nd", params.num("beta", beta), drift, MORREY_DRIFT, 0.0, 2 * count as u64)
            .detail("estimate", e1)
            .detail("estimate_2n", e2)
            .detail("gradient_norm", gn.as_f64())
            .detail("ratio", ratio)
            .require(e2.is_finite(), "seminorm estimate not finite"));
    }
    let r = item.radius();
    let mut estimates = Vec::with_capacity(BLOWUP_DECADES as usize + 1);
    for j in 0..=BLOWUP_DECADES {
        let rho = r * 10f64.powi(-(j as i32));
        let sampler = PairSampler::new(shrunk_domain(item, rho)?, count, SampleStrategy::Uniform, seed.wrapping_add(j as u64));
        let inner = rho * BLOWUP_ANNULUS;
        let pairs: Vec<(Point, Point)> = sampler
            .pairs()?
            .into_iter()
            .filter(|(x, y)| item.radial_coordinate(x) >= inner && item.radial_coordinate(y) >= inner)
            .collect();
        estimates.push((rho, holder_quotient_max(&u, BLOWUP_BETA, &pairs)?));
    }
    let baseline = estimates[0].1;
    let peak = estimates.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
    let mut rep = CheckReport::compare(
        "morrey_nd.blowup",
        params.num("beta", BLOWUP_BETA),
        BLOWUP_FACTOR * baseline,
        peak,
        0.0,
        (count * estimates.len()) as u64,
    );
    for (rho, e) in estimates {
        rep = rep.detail(&format!("rho={rho:e}"), e);
    }
    Ok(rep)
}
