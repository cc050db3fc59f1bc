//! Radial antiderivative of the log-power gradient profile.
//!
//! In `σ = ln(r/s)` the integrand becomes
//! `Ω_n^{-1/p} r^{1-n/p} e^{-σ(1-n/p)} (pα + nσ)^{-α}`, smooth on `[0, ∞)`.
//! Values come from cumulative integrals on a uniform σ-grid plus one
//! Kronrod panel for the remainder.

use crate::error::{domain, Result};
use crate::foundations::unit_ball_volume;
use crate::quadrature::{gk21, integrate, integrate_half_line, QuadratureSpec};

const GRID_CELLS: usize = 4096;
const SIGMA_MAX: f64 = 64.0;

#[derive(Debug, Clone)]
pub(crate) struct Antiderivative {
    pub r: f64,
    pub alpha: f64,
    pub n: usize,
    pub p: f64,
    omega: f64,
    prefactor: f64,
    decay: f64,
    cumulative: Vec<f64>,
    at_origin: Option<f64>,
}

impl Antiderivative {
    pub fn new(r: f64, alpha: f64, n: usize, p: f64) -> Result<Self> {
        let omega = unit_ball_volume(n)?;
        let nf = n as f64;
        let mut a = Antiderivative {
            r,
            alpha,
            n,
            p,
            omega,
            prefactor: omega.powf(-1.0 / p) * r.powf(1.0 - nf / p),
            decay: 1.0 - nf / p,
            cumulative: Vec::with_capacity(GRID_CELLS + 1),
            at_origin: None,
        };
        let h = SIGMA_MAX / GRID_CELLS as f64;
        let f = |s: f64| a.integrand(s);
        let mut acc = 0.0;
        let mut cum = Vec::with_capacity(GRID_CELLS + 1);
        cum.push(0.0);
        for j in 0..GRID_CELLS {
            acc += gk21(&f, h * j as f64, h * (j + 1) as f64).0;
            cum.push(acc);
        }
        let at_origin = if nf < p {
            let spec = QuadratureSpec { rel_tol: 1e-13, abs_tol: 1e-300, ..QuadratureSpec::default() };
            Some(acc + integrate_half_line(&f, SIGMA_MAX, &spec, |_| 0.0)?)
        } else {
            None
        };
        a.cumulative = cum;
        a.at_origin = at_origin;
        Ok(a)
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    fn integrand(&self, sigma: f64) -> f64 {
        let c = self.p * self.alpha + self.n as f64 * sigma;
        self.prefactor * (-sigma * self.decay).exp() * c.powf(-self.alpha)
    }

    /// `u_rad(s) = (Ω_n s^n)^{-1/p} (pα + n ln(r/s))^{-α}`.
    pub fn gradient(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return f64::INFINITY;
        }
        if s > self.r {
            return 0.0;
        }
        let nf = self.n as f64;
        let sigma = (self.r / s).ln();
        (-(self.omega.ln() + nf * s.ln()) / self.p).exp() * (self.p * self.alpha + nf * sigma).powf(-self.alpha)
    }

    /// `f_rad(s) = ∫_s^r u_rad` through the cached quadrature.
    pub fn quadrature_value(&self, s: f64) -> f64 {
        if s >= self.r {
            return 0.0;
        }
        if s <= 0.0 {
            return self.at_origin.unwrap_or(f64::INFINITY);
        }
        let sigma = (self.r / s).ln();
        let h = SIGMA_MAX / GRID_CELLS as f64;
        let f = |x: f64| self.integrand(x);
        if sigma < SIGMA_MAX {
            let j = ((sigma / h) as usize).min(GRID_CELLS - 1);
            let lo = h * j as f64;
            return self.cumulative[j] + gk21(&f, lo, sigma).0;
        }
        let spec = QuadratureSpec { rel_tol: 1e-13, abs_tol: 1e-300, ..QuadratureSpec::default() };
        let rest = integrate(&f, SIGMA_MAX, sigma, &spec).unwrap_or(f64::NAN);
        self.cumulative[GRID_CELLS] + rest
    }

    /// Closed form when `p = n`.
    pub fn closed_form(&self, s: f64) -> Option<f64> {
        let nf = self.n as f64;
        if (self.p - nf).abs() > 1e-15 {
            return None;
        }
        if s >= self.r {
            return Some(0.0);
        }
        if s <= 0.0 {
            return Some(f64::INFINITY);
        }
        let pre = self.omega.powf(-1.0 / nf);
        let l = (self.r / s).ln();
        if self.alpha == 1.0 {
            Some(pre / nf * l.ln_1p())
        } else {
            let a = self.alpha;
            Some(pre * nf.powf(-a) / (1.0 - a) * ((a + l).powf(1.0 - a) - a.powf(1.0 - a)))
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        self.closed_form(s).unwrap_or_else(|| self.quadrature_value(s))
    }

    /// Upper bound on `f_rad(0)` when `p > n`:
    /// `(pα)^{-α} Ω_n^{-1/p} (1 - n/p)^{-1} r^{1-n/p}`.
    pub fn origin_bound(&self) -> Option<f64> {
        if self.decay <= 0.0 {
            return None;
        }
        Some((self.p * self.alpha).powf(-self.alpha) * self.prefactor / self.decay)
    }

    pub fn value_at_origin(&self) -> f64 {
        self.at_origin.unwrap_or(f64::INFINITY)
    }
}

/// Critical point and minimum of `h(t) = t^{-1/p₁} ln^{-α}(Ω_n r^n e^{pα}/t)`
/// for `1 < p < n`, `p₁ = np/(n-p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerEnvelope {
    pub p1: f64,
    pub t_crit: f64,
    pub m: f64,
    /// Minimum of `h` over a 10^4-point geometric grid of `(0, Ω_n r^n)`.
    pub grid_min: f64,
    /// `h(t) ≥ m` on the grid and `u_rad(s) ≥ m (Ω_n s^n)^{-1/n}` on a radial grid.
    pub verified: bool,
}

pub fn lower_envelope_constant(r: f64, alpha: f64, n: usize, p: f64) -> Result<LowerEnvelope> {
    let nf = n as f64;
    if !(p > 1.0 && p < nf) {
        return domain(format!("lower envelope needs 1 < p < n, got p={p}, n={n}"));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain(format!("alpha must lie in (0,1], got {alpha}"));
    }
    if !(r > 0.0 && r.is_finite()) {
        return domain(format!("radius must be positive, got {r}"));
    }
    let omega = unit_ball_volume(n)?;
    let measure = omega * r.powi(n as i32);
    let p1 = nf * p / (nf - p);
    let h = |t: f64| t.powf(-1.0 / p1) * (measure * (p * alpha).exp() / t).ln().powf(-alpha);
    let t_crit = measure * (p * alpha - p1 * alpha).exp();
    let m = h(t_crit);
    let points = 10_000;
    let lo = measure * 1e-12;
    let mut grid_min = f64::INFINITY;
    let mut verified = true;
    for i in 0..points {
        let t = lo * (measure / lo).powf(i as f64 / (points - 1) as f64) * (1.0 - 1e-12);
        let v = h(t);
        grid_min = grid_min.min(v);
        if v < m * (1.0 - 1e-12) {
            verified = false;
        }
    }
    let rad = Antiderivative::new(r, alpha, n, p)?;
    for i in 0..1000 {
        let s = r * 1e-6f64.powf(i as f64 / 999.0) * (1.0 - 1e-12);
        let bound = m * (omega * s.powi(n as i32)).powf(-1.0 / nf);
        if rad.gradient(s) < bound * (1.0 - 1e-12) {
            verified = false;
        }
    }
    Ok(LowerEnvelope { p1, t_crit, m, grid_min, verified })
}
