//! Deterministic point-pair sampling and Hölder seminorm estimation.
//!
//! A sampler draws every pair from one ChaCha stream in a fixed order, so
//! the first `N` pairs of a request for `M ≥ N` pairs are the `N` pairs of a
//! request for `N`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::foundations::Domain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SampleStrategy {
    Uniform,
    /// Ray pairs at radii `R·2^{-j}`, `j = 0..40`, then random pairs with
    /// log-uniform radii over the same range.
    RadialGeometric,
    /// Pairs with one point on the boundary or within `R·1e-3` of the centre.
    Endpoint,
}

/// Largest `j` in the radial grid `R·2^{-j}`.
pub const RADIAL_LEVELS: u32 = 40;

pub type Point = Vec<f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSampler {
    pub domain: Domain,
    pub count: usize,
    pub strategy: SampleStrategy,
    pub seed: u64,
    /// Whether pairs `(x, centre)` are emitted; disable for evaluators
    /// singular at the centre.
    pub include_center: bool,
}

/// The geometry a sampler draws from: a ball (an interval when `n = 1`)
/// around `center`, or a one-sided interval `[center, center + radius)`.
#[derive(Debug, Clone)]
struct Frame {
    center: Vec<f64>,
    radius: f64,
    one_sided: bool,
}

impl Frame {
    fn of(dom: &Domain) -> Result<Frame> {
        match dom {
            Domain::Ball(b) => Ok(Frame { center: b.center().to_vec(), radius: b.radius(), one_sided: false }),
            Domain::Interval(i) => {
                if !i.is_bounded() {
                    return domain("sampling needs a bounded interval");
                }
                let (a, b) = (i.a(), i.b());
                if a == 0.0 {
                    Ok(Frame { center: vec![0.0], radius: b, one_sided: true })
                } else {
                    Ok(Frame { center: vec![0.5 * (a + b)], radius: 0.5 * (b - a), one_sided: false })
                }
            }
        }
    }

    fn dim(&self) -> usize {
        self.center.len()
    }

    fn direction(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let n = self.dim();
        if n == 1 {
            let s = if self.one_sided || rng.gen::<bool>() { 1.0 } else { -1.0 };
            return vec![s];
        }
        loop {
            let v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                return v.into_iter().map(|x| x / norm).collect();
            }
        }
    }

    fn at(&self, dir: &[f64], rho: f64) -> Point {
        self.center.iter().zip(dir).map(|(c, d)| c + rho * d).collect()
    }

    /// Radius of a uniform point.
    fn uniform_radius(&self, rng: &mut ChaCha8Rng) -> f64 {
        self.radius * rng.gen::<f64>().powf(1.0 / self.dim() as f64)
    }

    fn first_axis(&self) -> Vec<f64> {
        let mut e = vec![0.0; self.dim()];
        e[0] = 1.0;
        e
    }
}

impl PairSampler {
    pub fn new(domain: Domain, count: usize, strategy: SampleStrategy, seed: u64) -> Self {
        PairSampler { domain, count, strategy, seed, include_center: true }
    }

    pub fn without_center(mut self) -> Self {
        self.include_center = false;
        self
    }

    pub fn with_count(&self, count: usize) -> Self {
        PairSampler { count, ..self.clone() }
    }

    pub fn pairs(&self) -> Result<Vec<(Point, Point)>> {
        let frame = Frame::of(&self.domain)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut out = Vec::with_capacity(self.count);
        let r = frame.radius;
        match self.strategy {
            SampleStrategy::Uniform => {
                while out.len() < self.count {
                    let (d1, d2) = (frame.direction(&mut rng), frame.direction(&mut rng));
                    let (r1, r2) = (frame.uniform_radius(&mut rng), frame.uniform_radius(&mut rng));
                    out.push((frame.at(&d1, r1), frame.at(&d2, r2)));
                }
            }
            SampleStrategy::RadialGeometric => {
                let e = frame.first_axis();
                let radii: Vec<f64> = (0..=RADIAL_LEVELS).map(|j| r * 0.5f64.powi(j as i32)).collect();
                'grid: for (i, &a) in radii.iter().enumerate() {
                    if self.include_center {
                        if out.len() == self.count {
                            break 'grid;
                        }
                        out.push((frame.at(&e, a), frame.center.clone()));
                    }
                    for &b in &radii[i + 1..] {
                        if out.len() == self.count {
                            break 'grid;
                        }
                        out.push((frame.at(&e, a), frame.at(&e, b)));
                    }
                }
                let mut k = 0usize;
                while out.len() < self.count {
                    let d = frame.direction(&mut rng);
                    let u1 = rng.gen::<f64>() * RADIAL_LEVELS as f64;
                    let u2 = rng.gen::<f64>() * RADIAL_LEVELS as f64;
                    let (a, b) = (r * 2f64.powf(-u1), r * 2f64.powf(-u2));
                    let x = frame.at(&d, a);
                    let y = match k % 4 {
                        0 if self.include_center => frame.center.clone(),
                        1 if !frame.one_sided => frame.at(&d.iter().map(|v| -v).collect::<Vec<_>>(), b),
                        2 => frame.at(&frame.direction(&mut rng), b),
                        _ => frame.at(&d, b),
                    };
                    out.push((x, y));
                    k += 1;
                }
            }
            SampleStrategy::Endpoint => {
                let mut k = 0usize;
                while out.len() < self.count {
                    let d = frame.direction(&mut rng);
                    let x = if k.is_multiple_of(2) {
                        frame.at(&d, r)
                    } else {
                        frame.at(&d, r * 10f64.powf(-3.0 - 9.0 * rng.gen::<f64>()))
                    };
                    let y = match k % 3 {
                        0 if self.include_center => frame.center.clone(),
                        1 => frame.at(&d, r * rng.gen::<f64>()),
                        _ => {
                            let d2 = frame.direction(&mut rng);
                            frame.at(&d2, frame.uniform_radius(&mut rng))
                        }
                    };
                    out.push((x, y));
                    k += 1;
                }
            }
        }
        Ok(out)
    }
}

fn distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// `max |u(x) - u(y)| / |x - y|^β` over the given pairs, skipping
/// coincident points and points where `u` is not finite.
pub fn holder_quotient_max(u: &dyn Fn(&[f64]) -> f64, beta: f64, pairs: &[(Point, Point)]) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return domain(format!("Hölder exponent must lie in (0,1), got {beta}"));
    }
    let mut best: Option<f64> = None;
    for (x, y) in pairs {
        let d = distance(x, y);
        if d == 0.0 {
            continue;
        }
        let (a, b) = (u(x), u(y));
        if !(a.is_finite() && b.is_finite()) {
            continue;
        }
        let q = (a - b).abs() / d.powf(beta);
        best = Some(best.map_or(q, |m: f64| m.max(q)));
    }
    best.ok_or_else(|| crate::error::LabError::Domain("every sampled pair was degenerate".into()))
}

/// Lower estimate of `[u]_{0,β;D}` from the sampler's pairs.
pub fn estimate_holder_seminorm(u: &dyn Fn(&[f64]) -> f64, beta: f64, sampler: &PairSampler) -> Result<f64> {
    holder_quotient_max(u, beta, &sampler.pairs()?)
}
