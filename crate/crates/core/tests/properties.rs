use lorentz_core::foundations::{conjugate_exponent, BallDomain, Exponent, ExponentPair, Interval1D};
use lorentz_core::gallery::log_power_norm;
use lorentz_core::lab::{check_equivalence, check_holder, estimate_holder_seminorm, PairSampler, SampleStrategy};
use lorentz_core::norms::quasinorm;
use lorentz_core::quadrature::QuadratureSpec;
use lorentz_core::rearrangement::{
    distribution_function, maximal_profile, rearrange, AnalyticProfile, Cell, Profile, SampledField,
};
use proptest::prelude::*;

/// Dyadic cells `(k/64, j/16)`; sums and products stay exact.
fn cells() -> impl Strategy<Value = Vec<(u32, u32)>> {
    prop::collection::vec((1u32..=64, 0u32..=64), 1..40)
}

fn field(raw: &[(u32, u32)]) -> SampledField {
    let cells: Vec<Cell> = raw.iter().map(|&(w, m)| Cell::new(w as f64 / 64.0, m as f64 / 16.0)).collect();
    let total: f64 = cells.iter().map(|c| c.weight).sum();
    SampledField::new(Interval1D::new(0.0, total).unwrap().into(), cells).unwrap()
}

fn exponent() -> impl Strategy<Value = Exponent> {
    prop_oneof![(1.0f64..12.0).prop_map(Exponent::Finite), Just(Exponent::Infinity)]
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn rearrangement_is_equimeasurable(raw in cells(), level in 0u32..=80) {
        let f = field(&raw);
        let s = rearrange(&f).unwrap();
        let t = level as f64 / 16.0;
        prop_assert_eq!(distribution_function(&f, t).unwrap(), distribution_function(&s, t).unwrap());
    }

    #[test]
    fn rearrangement_commutes_with_powers(raw in cells(), a in prop::sample::select(vec![0.5, 2.0, 3.0])) {
        let f = field(&raw);
        prop_assert_eq!(rearrange(&f.powf(a).unwrap()).unwrap(), rearrange(&f).unwrap().powf(a));
    }

    #[test]
    fn rearrangement_preserves_domination(raw in cells(), bumps in prop::collection::vec(0u32..=8, 40)) {
        let f = field(&raw);
        let g_cells: Vec<Cell> = f.cells().iter().zip(&bumps).map(|(c, &b)| Cell::new(c.weight, c.magnitude + b as f64 / 16.0)).collect();
        let g = SampledField::new(f.domain().clone(), g_cells).unwrap();
        let (fs, gs) = (rearrange(&f).unwrap(), rearrange(&g).unwrap());
        for &t in fs.breakpoints().iter().chain(gs.breakpoints()) {
            prop_assert!(fs.value(t) <= gs.value(t));
        }
    }

    #[test]
    fn maximal_function_dominates_rearrangement(raw in cells(), u in 0.001f64..1.0) {
        let s: Profile = rearrange(&field(&raw)).unwrap().into();
        let t = u * s.support_end().max(1e-3) * 1.5;
        let quad = QuadratureSpec::default();
        prop_assert!(maximal_profile(&s, t, &quad).unwrap() >= s.value(t));
    }

    #[test]
    fn quasinorm_is_homogeneous(raw in cells(), c in 1u32..=16, p in 1.1f64..6.0, q in exponent()) {
        let f = field(&raw);
        let scaled = f.map_magnitudes(|m| m * c as f64).unwrap();
        let quad = QuadratureSpec::default();
        let pq = ExponentPair::new(p, q).unwrap();
        let a = quasinorm(&rearrange(&f).unwrap().into(), &pq, &quad).unwrap().as_f64();
        let b = quasinorm(&rearrange(&scaled).unwrap().into(), &pq, &quad).unwrap().as_f64();
        prop_assert!((b - c as f64 * a).abs() <= 1e-12 * b.max(1e-300));
    }

    #[test]
    fn conjugation_is_an_involution(p in 1.0f64..100.0) {
        let back = conjugate_exponent(conjugate_exponent(Exponent::Finite(p)).unwrap()).unwrap();
        let v = back.finite().unwrap();
        prop_assert!((v - p).abs() <= 1e-12 * p);
    }

    #[test]
    fn holder_chain_on_random_pairs(raw in prop::collection::vec((1u32..=64, 0u32..=64, 0u32..=64), 1..40), p in 1.2f64..5.0, q in exponent()) {
        let f = field(&raw.iter().map(|&(w, a, _)| (w, a)).collect::<Vec<_>>());
        let g = field(&raw.iter().map(|&(w, _, b)| (w, b)).collect::<Vec<_>>());
        let quad = QuadratureSpec::default();
        let rep = check_holder(&f, &g, &ExponentPair::new(p, q).unwrap(), &quad).unwrap();
        prop_assert!(rep.passed(), "{:?}", rep);
    }

    #[test]
    fn sandwich_on_random_fields(raw in cells(), p in 1.2f64..5.0, q in exponent()) {
        let quad = QuadratureSpec::default();
        let rep = check_equivalence(&rearrange(&field(&raw)).unwrap().into(), &ExponentPair::new(p, q).unwrap(), &quad).unwrap();
        prop_assert!(rep.passed(), "{:?}", rep);
    }

    #[test]
    fn log_power_quadrature_matches_closed_form(p in 1.2f64..5.0, alpha in 0.2f64..1.0, extra in 0.1f64..6.0) {
        let q = (1.0 + extra) / alpha;
        let pq = ExponentPair::new(p, q).unwrap();
        let prof: Profile = AnalyticProfile::log_power(p, alpha, 2.0).unwrap().into();
        let got = quasinorm(&prof, &pq, &QuadratureSpec::default()).unwrap().as_f64();
        let want = log_power_norm(p, alpha, &pq).unwrap().as_f64();
        prop_assert!(((got - want) / want).abs() <= 1e-8, "{got} vs {want}");
    }

    #[test]
    fn seminorm_estimate_grows_with_sample_count(seed in any::<u64>(), small in 10usize..500) {
        let u = |x: &[f64]| (3.0 * x[0]).sin() * x[1].cos();
        let s = PairSampler::new(BallDomain::new(2, 1.0).unwrap().into(), 1000, SampleStrategy::Uniform, seed);
        let a = estimate_holder_seminorm(&u, 0.6, &s.with_count(small)).unwrap();
        let b = estimate_holder_seminorm(&u, 0.6, &s).unwrap();
        prop_assert!(a <= b);
    }
}
