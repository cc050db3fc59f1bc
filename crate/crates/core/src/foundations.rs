//! Exponent arithmetic and Euclidean ball geometry.
//!
//! Everything here is a plain value type: cheap to copy or clone, immutable
//! once built, and shared freely by the other modules.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, LabError, Result};

/// A Lebesgue-type exponent in `[1, ∞]`.
///
/// `Infinity` is a distinct state rather than `f64::INFINITY`: a secondary
/// exponent of `∞` selects the supremum functional, not a limit of integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Exponent {
    Finite(f64),
    Infinity,
}

impl Exponent {
    pub fn finite(self) -> Option<f64> {
        match self {
            Exponent::Finite(v) => Some(v),
            Exponent::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinity)
    }

    /// `1/q`, with `1/∞ = 0`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Exponent::Finite(v) => 1.0 / v,
            Exponent::Infinity => 0.0,
        }
    }
}

impl PartialOrd for Exponent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Exponent::Infinity, Exponent::Infinity) => Some(Ordering::Equal),
            (Exponent::Infinity, Exponent::Finite(_)) => Some(Ordering::Greater),
            (Exponent::Finite(_), Exponent::Infinity) => Some(Ordering::Less),
            (Exponent::Finite(a), Exponent::Finite(b)) => a.partial_cmp(b),
        }
    }
}

impl From<f64> for Exponent {
    fn from(v: f64) -> Self {
        if v.is_infinite() && v > 0.0 {
            Exponent::Infinity
        } else {
            Exponent::Finite(v)
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(v) => write!(f, "{v}"),
            Exponent::Infinity => write!(f, "inf"),
        }
    }
}

impl FromStr for Exponent {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t {
            "inf" | "Inf" | "INF" | "infinity" | "∞" => Ok(Exponent::Infinity),
            _ => t
                .parse::<f64>()
                .map(Exponent::from)
                .map_err(|_| LabError::Parse(format!("not an exponent: {s:?}"))),
        }
    }
}

/// Hölder conjugate on `[1, ∞]`: `1 ↦ ∞`, `p ↦ p/(p-1)`, `∞ ↦ 1`.
pub fn conjugate_exponent(p: Exponent) -> Result<Exponent> {
    match p {
        Exponent::Infinity => Ok(Exponent::Finite(1.0)),
        Exponent::Finite(v) if v.is_nan() || v < 1.0 => {
            domain(format!("conjugate exponent needs p >= 1, got {v}"))
        }
        Exponent::Finite(1.0) => Ok(Exponent::Infinity),
        Exponent::Finite(v) => Ok(Exponent::Finite(v / (v - 1.0))),
    }
}

/// Validated Lorentz exponent pair `(p, q)` with `1 < p < ∞` and `1 ≤ q ≤ ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPair {
    p: f64,
    q: Exponent,
}

impl ExponentPair {
    pub fn new(p: f64, q: impl Into<Exponent>) -> Result<Self> {
        let q = q.into();
        if !(p.is_finite() && p > 1.0) {
            return domain(format!("primary exponent must satisfy 1 < p < inf, got {p}"));
        }
        if let Exponent::Finite(v) = q {
            if v.is_nan() || v < 1.0 {
                return domain(format!("secondary exponent must satisfy 1 <= q <= inf, got {v}"));
            }
        }
        Ok(ExponentPair { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> Exponent {
        self.q
    }

    /// `p' = p/(p-1)`.
    pub fn p_conjugate(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// `(p', q')`. Always a valid pair since `p'` is again in `(1, ∞)`.
    pub fn conjugate(&self) -> ExponentPair {
        let q = conjugate_exponent(self.q).expect("validated q");
        ExponentPair { p: self.p_conjugate(), q }
    }
}

impl fmt::Display for ExponentPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.p, self.q)
    }
}

// Lanczos approximation, g = 7, nine coefficients.
const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Γ(x) for real `x`, via Lanczos with reflection for `x < 1/2`.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS_COEF[0];
        for (i, c) in LANCZOS_COEF.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}

/// `Ω_n`, the Lebesgue measure of the unit ball in `ℝ^n`.
pub fn unit_ball_volume(n: usize) -> Result<f64> {
    if n == 0 {
        return domain("dimension must be at least 1");
    }
    let half = n as f64 / 2.0;
    Ok(PI.powf(half) / gamma(half + 1.0))
}

/// `ω_{n-1} = n Ω_n`, the surface measure of the unit sphere in `ℝ^n` (n ≥ 2).
pub fn unit_sphere_area(n: usize) -> Result<f64> {
    if n < 2 {
        return domain("sphere area is defined here for n >= 2");
    }
    Ok(n as f64 * unit_ball_volume(n)?)
}

/// Open ball `B(center, radius)` in `ℝ^n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallDomain {
    n: usize,
    radius: f64,
    center: Vec<f64>,
}

impl BallDomain {
    /// Origin-centred ball.
    pub fn new(n: usize, radius: f64) -> Result<Self> {
        Self::with_center(n, radius, vec![0.0; n])
    }

    pub fn with_center(n: usize, radius: f64, center: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return domain("dimension must be at least 1");
        }
        if !(radius.is_finite() && radius > 0.0) {
            return domain(format!("radius must be positive and finite, got {radius}"));
        }
        if center.len() != n {
            return domain(format!("center has {} coordinates, expected {n}", center.len()));
        }
        Ok(BallDomain { n, radius, center })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    pub fn volume(&self) -> f64 {
        unit_ball_volume(self.n).expect("n >= 1") * self.radius.powi(self.n as i32)
    }

    /// Distance from the centre.
    pub fn radial(&self, x: &[f64]) -> f64 {
        x.iter()
            .zip(&self.center)
            .map(|(a, c)| (a - c) * (a - c))
            .sum::<f64>()
            .sqrt()
    }

    pub fn contains_ball(&self, other: &BallDomain) -> bool {
        if self.n != other.n {
            return false;
        }
        let d = self.radial(&other.center);
        d + other.radius <= self.radius * (1.0 + 1e-12)
    }
}

/// Interval `(a, b)` of the real line. At most one endpoint may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval1D {
    a: f64,
    b: f64,
}

impl Interval1D {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if a.is_nan() || b.is_nan() || a >= b {
            return domain(format!("interval needs a < b, got ({a}, {b})"));
        }
        if a.is_infinite() && b.is_infinite() {
            return domain("interval may be unbounded on one side only");
        }
        Ok(Interval1D { a, b })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn is_bounded(&self) -> bool {
        self.a.is_finite() && self.b.is_finite()
    }

    pub fn contains_interval(&self, other: &Interval1D) -> bool {
        self.a <= other.a && other.b <= self.b
    }
}

/// The domains every construction in this crate lives on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    Ball(BallDomain),
    Interval(Interval1D),
}

impl Domain {
    pub fn measure(&self) -> f64 {
        match self {
            Domain::Ball(b) => b.volume(),
            Domain::Interval(i) => i.length(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Ball(b) => b.dim(),
            Domain::Interval(_) => 1,
        }
    }

    /// Whether `other` is a subset of `self`.
    pub fn contains(&self, other: &Domain) -> bool {
        match (self, other) {
            (Domain::Ball(a), Domain::Ball(b)) => a.contains_ball(b),
            (Domain::Interval(a), Domain::Interval(b)) => a.contains_interval(b),
            (Domain::Interval(a), Domain::Ball(b)) if b.dim() == 1 => {
                let c = b.center()[0];
                a.a() <= c - b.radius() && c + b.radius() <= a.b()
            }
            (Domain::Ball(a), Domain::Interval(b)) if a.dim() == 1 => {
                let c = a.center()[0];
                c - a.radius() <= b.a() && b.b() <= c + a.radius()
            }
            _ => false,
        }
    }
}

impl From<BallDomain> for Domain {
    fn from(b: BallDomain) -> Self {
        Domain::Ball(b)
    }
}

impl From<Interval1D> for Domain {
    fn from(i: Interval1D) -> Self {
        Domain::Interval(i)
    }
}
