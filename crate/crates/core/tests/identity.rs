//! End-to-end checks of the conductances on small samples.

use std::f64::consts::FRAC_PI_3;

use spinbic::calculus::{AlmostAnalyticExtension, CalculusSettings, DensityFunction, Engine};
use spinbic::conductance::{
    bulk_spin_conductance, chern_k_space, chern_real_space, density_for, kubo_spin_conductance, torque_conductance,
    verify_bic, BicSetup, ConductanceSettings, SpectralSystem,
};
use spinbic::geometry::{build_bulk_sample, Axis, DefectSpec, SwitchProfile};
use spinbic::models::{
    atomic_insulator, band_gap, bhz, honeycomb_lattice, kane_mele, realize_bulk, spinful_haldane, two_orbital_lattice,
    BulkModel, DeltaRule, JunctionModel, SpinSector,
};

fn haldane() -> BulkModel {
    spinful_haldane(1.0, 0.2, FRAC_PI_3, 0.2).unwrap()
}

fn switches() -> (SwitchProfile, SwitchProfile) {
    (SwitchProfile::heaviside(Axis::X1, 0.0), SwitchProfile::heaviside(Axis::X2, 0.0))
}

struct Bulk {
    sys: SpectralSystem,
    ext: AlmostAnalyticExtension,
}

fn bulk(model: &BulkModel, extent: f64) -> Bulk {
    let cs = ConductanceSettings::default();
    let gap = band_gap(model, cs.k_grid, None).unwrap();
    let sample = build_bulk_sample(model.lattice(), [extent, extent]).unwrap().into_shared();
    let h = realize_bulk(model, sample).unwrap();
    let rho = density_for(gap, &[&h], &cs).unwrap();
    let ext = AlmostAnalyticExtension::new(rho, 6).unwrap();
    Bulk { sys: SpectralSystem::new(h, cs.core_margin).unwrap(), ext }
}

#[test]
fn k_space_spin_chern_numbers() {
    let c = |m: &BulkModel, s| chern_k_space(m, s, None, 24).unwrap().value;
    let h = haldane();
    assert_eq!((c(&h, SpinSector::Up), c(&h, SpinSector::Down), c(&h, SpinSector::Full)), (1, -1, 0));
    let km = kane_mele(1.0, 0.2, 0.0, 0.1).unwrap();
    assert_eq!(c(&km, SpinSector::Up), -c(&km, SpinSector::Down));
    assert_eq!(c(&km, SpinSector::Up).abs(), 1);
    let trivial = kane_mele(1.0, 0.2, 0.0, 1.5).unwrap();
    assert_eq!(c(&trivial, SpinSector::Up), 0);
    let bhz0 = bhz(1.0, 1.0, -1.0, 0.0).unwrap();
    assert_eq!(c(&bhz0, SpinSector::Up).abs(), 1);
    assert!(chern_k_space(&bhz(1.0, 1.0, -1.0, 0.2).unwrap(), SpinSector::Up, None, 24).is_err());
}

#[test]
fn bulk_conductance_agrees_with_kubo_and_real_space_chern() {
    let model = haldane();
    let b = bulk(&model, 6.0);
    let (l1, l2) = switches();
    let settings = CalculusSettings::default();
    let cs = ConductanceSettings::default();
    let sigma = bulk_spin_conductance(&b.sys, &l1, &l2, &b.ext, &settings, &cs).unwrap();
    let p = b.sys.projection_below(b.ext.density().midgap());
    let kubo = kubo_spin_conductance(&p, &l1, &l2, b.sys.core()).unwrap();
    let up = chern_real_space(&p, &l1, &l2, b.sys.core(), SpinSector::Up).unwrap();
    let down = chern_real_space(&p, &l1, &l2, b.sys.core(), SpinSector::Down).unwrap();
    assert!((sigma.value - 1.0).abs() < 1e-2, "σ = {}", sigma.value);
    assert!((kubo.value - 1.0).abs() < 1e-2, "kubo = {}", kubo.value);
    assert!((0.5 * (up.value - down.value) - sigma.value).abs() < 1e-2);
    assert!(sigma.imag.abs() < 1e-10 && kubo.imag.abs() < 1e-10);
    // Spin is conserved, so the torque subtraction changes nothing.
    assert_eq!(sigma.value, sigma.uncorrected_value());
}

#[test]
fn conductance_ignores_switch_shape_and_density_profile() {
    let model = bhz(1.0, 1.0, -1.0, 0.2).unwrap();
    let b = bulk(&model, 6.0);
    let (l1, l2) = switches();
    let settings = CalculusSettings::default();
    let cs = ConductanceSettings::default();
    let base = bulk_spin_conductance(&b.sys, &l1, &l2, &b.ext, &settings, &cs).unwrap().value;
    let smooth = SwitchProfile::smooth(Axis::X1, 0.0, 2.0);
    let other = bulk_spin_conductance(&b.sys, &smooth, &l2, &b.ext, &settings, &cs).unwrap().value;
    assert!((base - other).abs() < 1e-3, "{base} vs {other}");
    let d = b.ext.density();
    let rho = DensityFunction::with_profile(d.gap(), d.floor(), 8, [0.2, 0.2]).unwrap();
    let ext = AlmostAnalyticExtension::new(rho, 6).unwrap();
    let other = bulk_spin_conductance(&b.sys, &l1, &l2, &ext, &settings, &cs).unwrap().value;
    assert!((base - other).abs() < 1e-3, "{base} vs {other}");
}

#[test]
fn spin_conserving_bulk_torque_vanishes_exactly() {
    let model = haldane();
    let b = bulk(&model, 4.0);
    let (_, l2) = switches();
    let t = torque_conductance(&b.sys, &l2, 1.0, &b.ext, &CalculusSettings::default(), &ConductanceSettings::default())
        .unwrap();
    assert!(t.trail.strip_traces.iter().all(|(_, v)| v.norm() == 0.0));
}

#[test]
fn identity_holds_for_a_spin_conserving_junction() {
    let jm = JunctionModel::new(haldane(), atomic_insulator(honeycomb_lattice(), 2.0).unwrap(), 1.0);
    let (l1, l2) = switches();
    let setup = BicSetup { extent: [7.0, 7.0], defects: DefectSpec::default(), lambda1: l1, lambda2: l2 };
    let r = verify_bic(&jm, &setup, &CalculusSettings::default(), &ConductanceSettings::default()).unwrap();
    assert_eq!(r.sigma_torque.value, 0.0);
    assert_eq!(r.sigma_plus.value, 0.0);
    assert!((r.sigma_minus.value - 1.0).abs() < 1e-2);
    assert!(r.bic_residual < 5e-2, "residual {}", r.bic_residual);
}

#[test]
fn identity_residual_is_moderate_for_a_perturbed_spin_mixing_junction() {
    let left = bhz(1.0, 1.0, -1.0, 0.2).unwrap();
    let right = atomic_insulator(two_orbital_lattice(), 2.0).unwrap();
    let jm = JunctionModel::new(left, right, 1.0).with_delta(DeltaRule { amplitude: 0.2, nu: 1.0, seed: 4 });
    let (l1, l2) = switches();
    let setup = BicSetup { extent: [6.0, 6.0], defects: DefectSpec::default(), lambda1: l1, lambda2: l2 };
    let r = verify_bic(&jm, &setup, &CalculusSettings::default(), &ConductanceSettings::default()).unwrap();
    assert!(r.sigma_torque.value.abs() > 1e-3, "spin mixing gives interface torque");
    assert!(r.bic_residual < 0.3, "residual {}", r.bic_residual);
}

#[test]
fn cross_checked_engines_agree_on_a_small_bulk() {
    let model = bhz(1.0, 1.0, -1.0, 0.3).unwrap();
    let b = bulk(&model, 1.5);
    let (_, l2) = switches();
    let settings = CalculusSettings { engine: Engine::CrossCheck, quad_tol: 1e-7, ..Default::default() };
    let cs = ConductanceSettings { core_margin: [0.0, 0.0], ..Default::default() };
    assert!(torque_conductance(&b.sys, &l2, 1.0, &b.ext, &settings, &cs).is_ok());
}
