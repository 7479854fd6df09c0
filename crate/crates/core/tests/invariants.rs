//! Property tests for structural invariants on small samples.

use std::sync::Arc;

use faer::Mat;
use proptest::prelude::*;

use spinbic::c64;
use spinbic::calculus::{
    correlation_operator, correlation_triple_sum, AlmostAnalyticExtension, CalculusSettings, DensityFunction,
};
use spinbic::config::RunConfig;
use spinbic::geometry::{build_bulk_sample, core_region, Axis, LatticeSample, LatticeSpec, SwitchProfile};
use spinbic::models::{bhz, kane_mele, realize_bulk, spinful_haldane, BulkModel, ModelSpec};
use spinbic::operator::{pv_trace_x1, region_trace, Hermiticity, LatticeOperator};
use spinbic::smoothstep::Smoothstep;

/// `Θ H Θ⁻¹` with `Θ = iσ_y K` acting on the spin index of every site.
fn time_reversed(h: &LatticeOperator) -> Mat<c64> {
    let m = h.matrix();
    let n = h.dim();
    // iσ_y maps (up, down) to (down, -up).
    let partner = |k: usize| (k ^ 1, if k % 2 == 0 { -1.0 } else { 1.0 });
    Mat::from_fn(n, n, |i, j| {
        let (pi, si) = partner(i);
        let (pj, sj) = partner(j);
        m[(pi, pj)].conj() * (si * sj)
    })
}

fn models() -> impl Strategy<Value = BulkModel> {
    prop_oneof![
        (0.05..0.4f64, 0.0..std::f64::consts::PI, -0.5..0.5f64)
            .prop_map(|(t2, phi, mass)| spinful_haldane(1.0, t2, phi, mass).unwrap()),
        (0.05..0.3f64, 0.0..0.3f64, 0.0..0.5f64).prop_map(|(so, r, v)| kane_mele(1.0, so, r, v).unwrap()),
        (0.5..1.5f64, -2.0..0.5f64, 0.0..0.5f64).prop_map(|(b, m, br)| bhz(1.0, b, m, br).unwrap()),
    ]
}

fn small_sample(model: &BulkModel) -> Arc<LatticeSample> {
    build_bulk_sample(model.lattice(), [2.0, 2.0]).unwrap().into_shared()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn realized_hamiltonians_are_hermitian_and_time_reversal_symmetric(model in models()) {
        let h = realize_bulk(&model, small_sample(&model)).unwrap();
        prop_assert!(h.is_hermitian());
        let m = h.matrix();
        let n = h.dim();
        let herm = (0..n).flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| (m[(i, j)] - m[(j, i)].conj()).norm())
            .fold(0.0, f64::max);
        prop_assert!(herm < 1e-14);
        if model.time_reversal_symmetric() {
            let back = time_reversed(&h);
            prop_assert!(spinbic::linalg::max_abs_diff(back.as_ref(), m.as_ref()) < 1e-12);
        }
    }

    #[test]
    fn spectral_engine_matches_the_triple_sum(
        seed in any::<u64>(),
        center in -0.5..0.5f64,
    ) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let s = build_bulk_sample(&LatticeSpec::square(), [1.0, 1.0]).unwrap().into_shared();
        let n = s.dim();
        let g = Mat::from_fn(n, n, |_, _| c64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
        let h = Mat::from_fn(n, n, |i, j| (g[(i, j)] + g[(j, i)].conj()) * 0.5);
        let h = LatticeOperator::new(s.clone(), h, Hermiticity::Hermitian).unwrap();
        let diag = |rng: &mut rand_chacha::ChaCha8Rng| {
            let v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            LatticeOperator::diagonal(s.clone(), &v)
        };
        let (a, b) = (diag(&mut rng), diag(&mut rng));
        let rho = DensityFunction::new([center - 0.3, center + 0.3], -6.0).unwrap();
        let ext = AlmostAnalyticExtension::new(rho.clone(), 6).unwrap();
        let fast = correlation_operator(&h, &a, &b, &ext, &CalculusSettings::default()).unwrap();
        let slow = correlation_triple_sum(&h, &a, &b, &rho, 1e-7).unwrap();
        prop_assert!(fast.max_abs_diff(&slow) < 1e-9 * slow.max_abs().max(1.0));
    }

    #[test]
    fn pv_trace_of_compact_support_is_the_trace(seed in any::<u64>(), radius in 0.0..4.0f64, step in 1u32..3) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let s = build_bulk_sample(&LatticeSpec::square(), [6.0, 3.0]).unwrap().into_shared();
        let core = core_region(&s, [0.0, 0.0]).unwrap();
        let n = s.dim();
        let inside: Vec<bool> = (0..n).map(|k| s.site(k / 2).pos[0].abs() <= radius).collect();
        let m = Mat::from_fn(n, n, |i, j| {
            if inside[i] && inside[j] { c64::new(rng.random_range(-1.0..1.0), 0.0) } else { c64::new(0.0, 0.0) }
        });
        let a = LatticeOperator::new(s.clone(), m, Hermiticity::General).unwrap();
        let trail = pv_trace_x1(&a, step as f64, None, &core).unwrap();
        let full = region_trace(&a, &core).unwrap();
        let covering = (radius / step as f64).floor() as usize + 1;
        for partial in trail.partial_sums.iter().skip(covering - 1) {
            prop_assert!((partial - full).norm() < 1e-12 * full.norm().max(1.0));
        }
    }

    #[test]
    fn smoothstep_is_a_monotone_switch(order in 1usize..20, t in -0.5..1.5f64, dt in 0.0..0.5f64) {
        let s = Smoothstep::new(order);
        let (a, b) = (s.value(t), s.value(t + dt));
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b >= a - 1e-15);
        prop_assert!((s.value(t) + s.value(1.0 - t) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn switch_profiles_are_monotone_along_their_axis(
        center in -3.0..3.0f64,
        width in 0.5..4.0f64,
        x in -8.0..8.0f64,
        dx in 0.0..2.0f64,
        y in -5.0..5.0f64,
    ) {
        for p in [SwitchProfile::heaviside(Axis::X2, center), SwitchProfile::smooth(Axis::X2, center, width)] {
            let (a, b) = (p.value([y, x]), p.value([y, x + dx]));
            prop_assert!((0.0..=1.0).contains(&a));
            prop_assert!(b >= a);
        }
    }

    #[test]
    fn density_functions_stay_in_the_unit_interval(lo in -2.0..0.0f64, width in 0.2..2.0f64, x in -10.0..10.0f64) {
        let rho = DensityFunction::new([lo, lo + width], lo - 3.0).unwrap();
        let v = rho.value(x);
        prop_assert!((0.0..=1.0).contains(&v));
        if x > lo + width {
            prop_assert_eq!(v, 0.0);
        }
    }

    #[test]
    fn config_hash_tracks_content(breaking in 0.0..1.0f64, seed in any::<u64>()) {
        let mut cfg = RunConfig::default();
        cfg.seed = seed;
        cfg.model = Some(ModelSpec::new("bhz", &[("breaking", breaking)]));
        let back = RunConfig::from_toml(&cfg.to_toml().unwrap()).unwrap();
        prop_assert_eq!(back.hash(), cfg.hash());
        let mut other = cfg.clone();
        other.model = Some(ModelSpec::new("bhz", &[("breaking", breaking + 0.5)]));
        prop_assert_ne!(other.hash(), cfg.hash());
    }
}
