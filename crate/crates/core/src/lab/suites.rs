//! Named verification matrices over the gallery and randomized step fields.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::foundations::{BallDomain, Exponent, ExponentPair, Interval1D};
use crate::gallery::{
    make_power_singularity, make_shifted_up, make_u_radial, make_up, make_v, standard_items, truncate, GalleryItem,
};
use crate::lab::checks::{
    check_ac_norm, check_distance_bound, check_embedding_eps, check_equivalence, check_general_holder, check_holder,
    check_poincare_ratio, indicator_profile, standard_test_functions, witness_strict_inclusion, AcTarget, AC_DECAY,
};
use crate::lab::morrey::{check_morrey_1d, check_morrey_nd};
use crate::lab::report::{merge_reports, CheckReport};
use crate::lab::sampler::{PairSampler, SampleStrategy};
use crate::quadrature::QuadratureSpec;
use crate::rearrangement::{radial_field, rearrange, Cell, SampledField, ShellSampling};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Holder,
    Equivalence,
    Inclusion,
    Ac,
    Morrey1d,
    Morreynd,
    Poincare,
    All,
}

impl Suite {
    pub const EACH: [Suite; 7] = [
        Suite::Holder,
        Suite::Equivalence,
        Suite::Inclusion,
        Suite::Ac,
        Suite::Morrey1d,
        Suite::Morreynd,
        Suite::Poincare,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Holder => "holder",
            Suite::Equivalence => "equivalence",
            Suite::Inclusion => "inclusion",
            Suite::Ac => "ac",
            Suite::Morrey1d => "morrey1d",
            Suite::Morreynd => "morreynd",
            Suite::Poincare => "poincare",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::EACH
            .iter()
            .chain(std::iter::once(&Suite::All))
            .find(|x| x.name() == s)
            .copied()
            .ok_or_else(|| LabError::Parse(format!("unknown suite '{s}'")))
    }
}

/// Trials per exponent pair in the Hölder chain matrix.
pub const HOLDER_TRIALS: usize = 1000;
/// Fields per exponent triple in the general Hölder matrix.
pub const GENERAL_HOLDER_TRIALS: usize = 500;
/// Cells of a random step field.
pub const RANDOM_CELLS: usize = 50;
/// Pairs per function in the one-dimensional Morrey matrix.
pub const MORREY_1D_PAIRS: usize = 10_000;
/// Pairs per estimate in the n-dimensional Morrey studies.
pub const MORREY_ND_PAIRS: usize = 5_000;

/// Independent stream `stream` of the run seeded by `seed`.
pub fn trial_rng(seed: u64, salt: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(stream);
    rng
}

/// Random dyadic weights `k/64`, `k ∈ 1..=64`.
pub fn random_weights(rng: &mut ChaCha8Rng, cells: usize) -> Vec<f64> {
    (0..cells).map(|_| rng.gen_range(1..=64) as f64 / 64.0).collect()
}

/// A step field on `(0, Σw)` with magnitudes `j/16`, `j ∈ 0..=64`; every
/// product and partial sum of its data is exact in binary floating point.
pub fn random_step_field(rng: &mut ChaCha8Rng, weights: &[f64]) -> Result<SampledField> {
    let total: f64 = weights.iter().sum();
    let cells = weights.iter().map(|&w| Cell::new(w, rng.gen_range(0..=64) as f64 / 16.0)).collect();
    SampledField::new(Interval1D::new(0.0, total)?.into(), cells)
}

fn pq(p: f64, q: impl Into<Exponent>) -> Result<ExponentPair> {
    ExponentPair::new(p, q)
}

fn par_collect<T: Sync, F>(items: &[T], f: F) -> Result<Vec<CheckReport>>
where
    F: Fn(&T) -> Result<Vec<CheckReport>> + Sync + Send,
{
    let nested: Vec<Vec<CheckReport>> = items.par_iter().map(f).collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

/// Exponent pairs of the Hölder chain matrix.
pub fn holder_exponents() -> Result<Vec<ExponentPair>> {
    vec![pq(2.0, 1.0), pq(2.0, 2.0), pq(2.0, Exponent::Infinity), pq(3.0, 2.0)].into_iter().collect()
}

/// Exponent triples of the general Hölder matrix, one per compatibility
/// pattern.
pub fn general_holder_triples() -> Result<Vec<[ExponentPair; 3]>> {
    let inf = Exponent::Infinity;
    Ok(vec![
        [pq(2.0, 2.0)?, pq(4.0, 4.0)?, pq(4.0, 4.0)?],
        [pq(2.0, 3.0)?, pq(4.0, 3.0)?, pq(4.0, inf)?],
        [pq(2.0, 3.0)?, pq(4.0, inf)?, pq(4.0, 3.0)?],
        [pq(1.5, 1.0)?, pq(3.0, 2.0)?, pq(3.0, 2.0)?],
    ])
}

fn holder_suite(seed: u64, quad: &QuadratureSpec) -> Result<Vec<CheckReport>> {
    let mut out = Vec::new();
    for (e, pair) in holder_exponents()?.iter().enumerate() {
        let trials: Vec<u64> = (0..HOLDER_TRIALS as u64).collect();
        out.extend(par_collect(&trials, |&i| {
            let mut rng = trial_rng(seed, 1 + e as u64, i);
            let w = random_weights(&mut rng, RANDOM_CELLS);
            let f = random_step_field(&mut rng, &w)?;
            let g = random_step_field(&mut rng, &w)?;
            let mut r = check_holder(&f, &g, pair, quad)?;
            r.params.insert("trial".into(), format!("{i:04}"));
            Ok(vec![r])
        })?);
    }
    let unit = SampledField::new(Interval1D::new(0.0, 1.0)?.into(), vec![Cell::new(1.0, 1.0)])?;
    out.push(check_holder(&unit, &unit, &pq(2.0, 2.0)?, quad)?.note("indicator equality case"));
    for (e, triple) in general_holder_triples()?.iter().enumerate() {
        let trials: Vec<u64> = (0..GENERAL_HOLDER_TRIALS as u64).collect();
        out.extend(par_collect(&trials, |&i| {
            let mut rng = trial_rng(seed, 100 + e as u64, i);
            let w = random_weights(&mut rng, RANDOM_CELLS);
            let f = random_step_field(&mut rng, &w)?;
            let mut r = check_general_holder(&f, &triple[0], &triple[1], &triple[2], quad)?;
            r.params.insert("trial".into(), format!("{i:04}"));
            Ok(vec![r])
        })?);
    }
    out.extend(embedding_matrix(seed, quad)?);
    Ok(out)
}

/// Embedding checks on gallery profiles, indicators and random fields.
pub fn embedding_matrix(seed: u64, quad: &QuadratureSpec) -> Result<Vec<CheckReport>> {
    let inf = Exponent::Infinity;
    let mut jobs: Vec<(String, crate::rearrangement::Profile, f64, ExponentPair, f64)> = Vec::new();
    for n in 1..=3 {
        for p in [1.5, 2.0, 3.0] {
            let u = make_power_singularity(1.0, n, p)?;
            for eps in [0.25 * (p - 1.0), 0.5 * (p - 1.0), p - 1.0] {
                jobs.push((u.id(), u.function_profile()?.expect("closed form"), u.measure(), pq(p, inf)?, eps));
            }
        }
    }
    for (alpha, p) in [(1.0, 2.0), (0.5, 3.0), (0.25, 4.0)] {
        let u = make_u_radial(1.0, alpha, 2, p)?;
        let v = make_v(1.0, alpha, 2, p)?;
        for q in [Exponent::Finite(2.0 * p), Exponent::Finite(8.0 * p), inf] {
            for eps in [0.5 * (p - 1.0), p - 1.0] {
                jobs.push((u.id(), u.function_profile()?.expect("closed form"), u.measure(), pq(p, q)?, eps));
                jobs.push((format!("grad {}", v.id()), v.gradient_profile()?.expect("closed form"), v.measure(), pq(p, q)?, eps));
            }
        }
    }
    for (h, m) in [(1.0, 1.0), (2.5, 0.25), (0.5, 3.0)] {
        for eps in [0.5, 1.0] {
            jobs.push((format!("indicator({h},{m})"), indicator_profile(h, m)?, m, pq(2.0, 3.0)?, eps));
            jobs.push((format!("indicator({h},{m})"), indicator_profile(h, m)?, m, pq(2.0, inf)?, eps));
        }
    }
    for i in 0..20u64 {
        let mut rng = trial_rng(seed, 200, i);
        let w = random_weights(&mut rng, RANDOM_CELLS);
        let f = random_step_field(&mut rng, &w)?;
        let m = f.domain().measure();
        jobs.push((format!("random#{i}"), rearrange(&f)?.into(), m, pq(2.0, 4.0)?, 0.5));
    }
    par_collect(&jobs, |(label, prof, m, e, eps)| {
        let mut r = check_embedding_eps(prof, e, *eps, *m, quad)?;
        r.params.insert("f".into(), label.clone());
        Ok(vec![r])
    })
}

/// Exponents `q` of the sandwich matrix.
pub const SANDWICH_Q: [f64; 5] = [1.0, 2.0, 4.0, 8.0, f64::INFINITY];

/// The `p` an item is built around.
pub fn item_p(item: &GalleryItem) -> Option<f64> {
    use crate::gallery::GalleryTag::*;
    fn tag_p(tag: &crate::gallery::GalleryTag) -> Option<f64> {
        match tag {
            USlice { p, .. } | URadial { p, .. } | VAntiderivative { p, .. } | PowerSingularity { p, .. } | UpFamily { p, .. } => {
                Some(*p)
            }
            Truncation { parent, .. } | Shifted { parent, .. } => tag_p(parent),
        }
    }
    tag_p(item.tag())
}

fn equivalence_suite(seed: u64, quad: &QuadratureSpec) -> Result<Vec<CheckReport>> {
    let items = standard_items()?;
    let mut out = par_collect(&items, |item| {
        let p = item_p(item).expect("gallery item");
        let mut reps = Vec::new();
        for (what, prof) in [("function", item.function_profile()?), ("gradient", item.gradient_profile()?)] {
            let Some(prof) = prof else { continue };
            for q in SANDWICH_Q {
                let mut r = check_equivalence(&prof, &pq(p, q)?, quad)?;
                r.params.insert("item".into(), item.id());
                r.params.insert("of".into(), what.into());
                reps.push(r);
            }
        }
        Ok(reps)
    })?;
    for (h, m) in [(1.0, 1.0), (3.0, 0.5), (0.0, 1.0)] {
        for p in [1.5, 2.0, 3.0] {
            for q in SANDWICH_Q {
                let mut r = check_equivalence(&indicator_profile(h, m)?, &pq(p, q)?, quad)?;
                r.params.insert("item".into(), format!("indicator(h={h},m={m})"));
                out.push(r);
            }
        }
    }
    let trials: Vec<u64> = (0..100).collect();
    out.extend(par_collect(&trials, |&i| {
        let mut rng = trial_rng(seed, 300, i);
        let w = random_weights(&mut rng, RANDOM_CELLS);
        let prof = rearrange(&random_step_field(&mut rng, &w)?)?.into();
        let mut reps = Vec::new();
        for (p, q) in [(1.5, 1.0), (2.0, 2.0), (3.0, f64::INFINITY)] {
            let mut r = check_equivalence(&prof, &pq(p, q)?, quad)?;
            r.params.insert("item".into(), format!("random#{i}"));
            reps.push(r);
        }
        Ok(reps)
    })?);
    Ok(out)
}

/// Primary exponents of the inclusion and witness grids.
pub const WITNESS_P: [f64; 4] = [1.5, 2.0, 3.0, 4.0];

/// `(q1, q2)` pairs of the inclusion and witness grids.
pub fn witness_q_pairs() -> [(f64, Exponent); 4] {
    [
        (1.0, Exponent::Finite(2.0)),
        (1.0, Exponent::Finite(4.0)),
        (2.0, Exponent::Finite(4.0)),
        (2.0, Exponent::Infinity),
    ]
}

fn inclusion_suite(quad: &QuadratureSpec) -> Result<Vec<CheckReport>> {
    let grid: Vec<(f64, f64, Exponent)> =
        WITNESS_P.iter().flat_map(|&p| witness_q_pairs().into_iter().map(move |(a, b)| (p, a, b))).collect();
    par_collect(&grid, |&(p, q1, q2)| Ok(witness_strict_inclusion(p, q1, q2, 2, 1.0, quad)?.reports()))
}

/// Smallest `k` with `‖u_{r,α,n,p}χ_{B(0,r/2^k)}‖_{p,q}` below `1e-3` of
/// its `k = 1` value, from the closed form `(pα + nk ln 2)^{(1-qα)/q}`.
pub fn log_power_decay_index(alpha: f64, n: usize, p: f64, q: f64) -> Option<u32> {
    let e = (q * alpha - 1.0) / q;
    if e <= 0.0 {
        return None;
    }
    let step = n as f64 * std::f64::consts::LN_2;
    let l1 = p * alpha + step;
    let target = l1 * AC_DECAY.powf(-1.0 / e);
    Some(((target - p * alpha) / step).ceil() as u32)
}

fn ac_suite(quad: &QuadratureSpec) -> Result<Vec<CheckReport>> {
    let inf = Exponent::Infinity;
    let mut jobs: Vec<(GalleryItem, ExponentPair, u32)> = Vec::new();
    for n in 1..=3 {
        for p in [1.5, 2.0, 3.0] {
            jobs.push((make_power_singularity(1.0, n, p)?, pq(p, inf)?, 60));
        }
        for (alpha, p, q) in [(1.0, 2.0, 8.0), (1.0, 3.0, 6.0)] {
            let k = log_power_decay_index(alpha, n, p, q).expect("qα > 1") + 1;
            jobs.push((make_u_radial(1.0, alpha, n, p)?, pq(p, q)?, k));
        }
        jobs.push((make_u_radial(1.0, 1.0, n, 2.0)?, pq(2.0, inf)?, 4000));
    }
    let mut out = par_collect(&jobs, |(item, e, k)| Ok(vec![check_ac_norm(AcTarget::Item(item), &item.id(), e, *k, quad)?]))?;
    for n in 1..=3 {
        let f = radial_field(&|_| 1.0, &BallDomain::new(n, 1.0)?, 400, 1e-9, ShellSampling::Outer)?;
        for p in [1.5, 3.0] {
            // Norm on the k-th set is proportional to 2^{-nk/p}.
            let k = (p * 1e3f64.log2() / n as f64).ceil() as u32 + 2;
            out.push(check_ac_norm(AcTarget::Field(&f), &format!("indicator(n={n})"), &pq(p, 2.0)?, k, quad)?);
        }
    }
    let fns = standard_test_functions();
    let mut grid = Vec::new();
    for n in 1..=3 {
        for p in [1.5, 2.0, 3.0] {
            for v in 0..fns.len() {
                grid.push((n, p, v));
            }
        }
    }
    out.extend(par_collect(&grid, |&(n, p, v)| {
        Ok(vec![check_distance_bound(&fns[v], 1.0, n, p, &[0.5, 0.25, 0.125], quad)?])
    })?);
    Ok(out)
}

/// `(p, q, α)` of the one-dimensional Morrey matrix.
pub fn morrey_1d_exponents() -> [(f64, Exponent, f64); 4] {
    [
        (2.0, Exponent::Finite(2.0), 1.0),
        (2.0, Exponent::Finite(4.0), 0.5),
        (3.0, Exponent::Infinity, 0.5),
        (1.5, Exponent::Finite(3.0), 0.5),
    ]
}

/// The three one-dimensional functions checked at `(p, α)`.
pub fn morrey_1d_items(p: f64, alpha: f64) -> Result<Vec<GalleryItem>> {
    let v = make_v(1.0, alpha, 1, p)?;
    Ok(vec![v.clone(), truncate(&v, 3)?, truncate(&make_up(1, p)?, 3)?])
}

fn morrey1d_suite(seed: u64, quad: &QuadratureSpec) -> Result<Vec<CheckReport>> {
    let mut jobs = Vec::new();
    for (p, q, alpha) in morrey_1d_exponents() {
        for item in morrey_1d_items(p, alpha)? {
            jobs.push((item, pq(p, q)?));
        }
    }
    par_collect(&jobs, |(item, e)| {
        let sampler = PairSampler::new(item.domain(), MORREY_1D_PAIRS, SampleStrategy::RadialGeometric, seed);
        Ok(vec![check_morrey_1d(item, e, &sampler, quad)?])
    })
}

fn morreynd_suite(seed: u64, quad: &QuadratureSpec) -> Result<Vec<CheckReport>> {
    let inf = Exponent::Infinity;
    let jobs: Vec<(GalleryItem, ExponentPair)> = vec![
        (make_up(2, 4.0)?, pq(4.0, inf)?),
        (make_up(3, 6.0)?, pq(6.0, inf)?),
        (make_v(1.0, 1.0, 2, 4.0)?, pq(4.0, 4.0)?),
        (make_v(1.0, 1.0, 2, 4.0)?, pq(4.0, inf)?),
        (make_v(1.0, 0.5, 3, 6.0)?, pq(6.0, inf)?),
        (make_v(1.0, 1.0, 2, 2.0)?, pq(2.0, 2.0)?),
        (make_v(1.0, 0.5, 2, 2.0)?, pq(2.0, inf)?),
        (make_v(1.0, 1.0, 3, 3.0)?, pq(3.0, 3.0)?),
        (make_v(1.0, 1.0, 3, 2.0)?, pq(2.0, 2.0)?),
    ];
    par_collect(&jobs, |(item, e)| Ok(vec![check_morrey_nd(item, e, MORREY_ND_PAIRS, seed, quad)?]))
}

/// Boundary-vanishing items for the ratio study, all built around `p = 3`.
pub fn poincare_items() -> Result<Vec<GalleryItem>> {
    let v = make_v(1.0, 1.0, 2, 3.0)?;
    Ok(vec![
        v.clone(),
        make_v(1.0, 0.5, 2, 3.0)?,
        make_v(1.0, 1.0, 3, 3.0)?,
        make_v(1.0, 0.5, 1, 3.0)?,
        truncate(&v, 3)?,
        make_shifted_up(1, 3.0, 1.0)?,
        make_shifted_up(2, 3.0, 1.0)?,
        make_shifted_up(3, 3.0, 1.0)?,
        make_shifted_up(2, 4.0, 1.0)?,
    ])
}

fn poincare_suite(quad: &QuadratureSpec) -> Result<Vec<CheckReport>> {
    let items = poincare_items()?;
    let exps = [pq(3.0, 4.0)?, pq(3.0, 8.0)?, pq(3.0, Exponent::Infinity)?];
    par_collect(&exps, |e| Ok(vec![check_poincare_ratio(&items, e, quad)?]))
}

/// Runs a suite; reports are sorted by `(check_id, params)`.
pub fn run_suite(suite: Suite, seed: u64, quad: &QuadratureSpec) -> Result<Vec<CheckReport>> {
    quad.validate()?;
    let reports = match suite {
        Suite::Holder => holder_suite(seed, quad)?,
        Suite::Equivalence => equivalence_suite(seed, quad)?,
        Suite::Inclusion => inclusion_suite(quad)?,
        Suite::Ac => ac_suite(quad)?,
        Suite::Morrey1d => morrey1d_suite(seed, quad)?,
        Suite::Morreynd => morreynd_suite(seed, quad)?,
        Suite::Poincare => poincare_suite(quad)?,
        Suite::All => {
            let mut all = Vec::new();
            for s in Suite::EACH {
                all.extend(run_suite(s, seed, quad)?);
            }
            all
        }
    };
    Ok(merge_reports(reports))
}
