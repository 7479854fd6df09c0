//! Spin conductances of bulk and interface Hamiltonians and the bulk-interface identity.
//!
//! Every conductance is reported in units of `1/2π`:
//!
//! * bulk: `σ = Tr^pv Σ^{Λ2, Λ1 S}`
//! * interface torque: `Tr^pv Σ_e^{Λ2, S}`
//! * interface drift: `πi Tr({[H_e, Λ2], S} ρ'(H_e))`
//! * Kubo: `2πi Tr(P [[P, S Λ1], [P, Λ2]])`
//!
//! so a quantum spin Hall insulator with spin Chern numbers `±1` reads `±1`.

mod chern;
mod fit;

use std::sync::Arc;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::c64;
use crate::calculus::{
    correlation_diagonals, correlation_operator, AlmostAnalyticExtension, CalculusSettings, DensityFunction, Engine,
    SpectralData,
};
use crate::error::{bail, Result};
use crate::geometry::{
    build_bulk_sample, build_junction_sample, core_region, DefectSpec, LatticeSample, Region, SwitchProfile,
};
use crate::models::{realize_bulk, realize_junction, JunctionModel, SpinSector};
use crate::operator::{
    multiplier_values, pv_trace_x1_diagonal, spin_of_state, Hermiticity, LatticeOperator, PvTraceTrail, SparseOperator,
};

pub use chern::{chern_k_space, double_commutator_trace, ChernResult};
pub use fit::{fit_exponential_decay, ExponentialFit};

/// Windows, steps and tolerances shared by the conductance computations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConductanceSettings {
    /// Fraction of each half-width left out at the open boundary.
    pub core_margin: [f64; 2],
    /// Principal-value strips are `k` lattice periods wide.
    pub step_multiplier: usize,
    /// Largest accepted spread of the last quarter of a principal-value trail.
    pub pv_tol: f64,
    /// k-grid used for gaps and Chern numbers.
    pub k_grid: usize,
    pub density_order: usize,
    /// Fractions of the gap kept free of the `ρ` transition at the bottom and top.
    pub density_margins: [f64; 2],
    /// Energy of the Fermi projection; midgap when absent.
    pub fermi: Option<f64>,
    /// Subtract the bulk torque strip traces, which vanish in infinite volume,
    /// from principal-value trails.
    pub torque_subtraction: bool,
}

impl Default for ConductanceSettings {
    fn default() -> Self {
        Self {
            core_margin: [0.25, 0.25],
            step_multiplier: 1,
            pv_tol: 5e-2,
            k_grid: 48,
            density_order: DensityFunction::DEFAULT_ORDER,
            density_margins: [DensityFunction::DEFAULT_MARGIN; 2],
            fermi: None,
            torque_subtraction: true,
        }
    }
}

/// A real conductance with the imaginary part left by finite arithmetic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Value {
    pub value: f64,
    pub imag: f64,
}

impl From<c64> for Value {
    fn from(z: c64) -> Self {
        Self { value: z.re, imag: z.im }
    }
}

/// Principal-value conductance with its trail of partial sums.
#[derive(Debug, Clone, Serialize)]
pub struct PvValue {
    pub value: f64,
    pub imag: f64,
    /// The trail plateaued within `pv_tol`.
    pub converged: bool,
    pub trail: PvTraceTrail,
    /// The plain trail when `trail` carries the torque subtraction.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uncorrected: Option<PvTraceTrail>,
}

impl PvValue {
    fn from_trail(trail: PvTraceTrail, cs: &ConductanceSettings) -> Self {
        Self {
            value: trail.limit.re,
            imag: trail.limit.im,
            converged: trail.cauchy_gap <= cs.pv_tol,
            trail,
            uncorrected: None,
        }
    }

    fn corrected(plain: PvTraceTrail, reference: &PvTraceTrail, cs: &ConductanceSettings) -> Result<Self> {
        let mut v = Self::from_trail(plain.subtract(reference)?, cs);
        v.uncorrected = Some(plain);
        Ok(v)
    }

    /// Limit of the plain trail.
    pub fn uncorrected_value(&self) -> f64 {
        self.uncorrected.as_ref().map_or(self.value, |t| t.limit.re)
    }
}

/// Hamiltonian with its eigendecomposition and core window.
#[derive(Debug, Clone)]
pub struct SpectralSystem {
    h: LatticeOperator,
    sparse: SparseOperator,
    spec: SpectralData,
    core: Region,
    rows: Vec<usize>,
}

impl SpectralSystem {
    pub fn new(h: LatticeOperator, core_margin: [f64; 2]) -> Result<Self> {
        if h.hermiticity() != Hermiticity::Hermitian {
            bail!(Conductance, "Hamiltonian must be hermitian");
        }
        let core = core_region(h.sample(), core_margin)?;
        let rows: Vec<usize> = (0..h.dim()).filter(|&k| core.contains_state(k)).collect();
        if rows.is_empty() {
            bail!(Conductance, "core window is empty");
        }
        let spec = SpectralData::new(&h)?;
        let sparse = h.to_sparse();
        Ok(Self { h, sparse, spec, core, rows })
    }

    pub fn hamiltonian(&self) -> &LatticeOperator {
        &self.h
    }

    pub fn sample(&self) -> &Arc<LatticeSample> {
        self.h.sample()
    }

    pub fn spectral(&self) -> &SpectralData {
        &self.spec
    }

    pub fn core(&self) -> &Region {
        &self.core
    }

    /// States of the core window.
    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    /// `max |[H, S]|`.
    pub fn spin_torque_norm(&self) -> f64 {
        self.sparse.iter().map(|(i, j, v)| (v * (spin_of_state(j) - spin_of_state(i))).norm()).fold(0.0, f64::max)
    }

    /// Spectral projection onto energies below `mu`.
    pub fn projection_below(&self, mu: f64) -> LatticeOperator {
        let m = self.spec.apply(|l| if l < mu { 1.0 } else { 0.0 });
        LatticeOperator::hermitian_unchecked(self.sample().clone(), m)
    }
}

/// Gershgorin lower bound on the spectrum.
pub fn spectral_floor(h: &LatticeOperator) -> f64 {
    let m = h.matrix();
    (0..h.dim())
        .map(|i| {
            let off: f64 = (0..h.dim()).filter(|&j| j != i).map(|j| m[(i, j)].norm()).sum();
            m[(i, i)].re - off
        })
        .fold(f64::INFINITY, f64::min)
}

/// Density function for a gap, placed below the spectra of all `hs`.
pub fn density_for(gap: [f64; 2], hs: &[&LatticeOperator], cs: &ConductanceSettings) -> Result<DensityFunction> {
    let floor = hs.iter().map(|h| spectral_floor(h)).fold(gap[0] - 1.0, f64::min);
    DensityFunction::with_profile(gap, floor, cs.density_order, cs.density_margins)
}

fn spin_values(dim: usize) -> Vec<f64> {
    (0..dim).map(spin_of_state).collect()
}

/// Diagonal of `Σ^{A,B}` for diagonal `A`, `B`, on the core states and zero elsewhere.
pub fn correlation_core_diagonal(
    sys: &SpectralSystem,
    a: &[f64],
    b: &[f64],
    ext: &AlmostAnalyticExtension,
    settings: &CalculusSettings,
) -> Result<Vec<c64>> {
    Ok(correlation_core_diagonals(sys, a, &[b], ext, settings)?.pop().unwrap())
}

/// [`correlation_core_diagonal`] for several `B` and one `A`.
pub fn correlation_core_diagonals(
    sys: &SpectralSystem,
    a: &[f64],
    bs: &[&[f64]],
    ext: &AlmostAnalyticExtension,
    settings: &CalculusSettings,
) -> Result<Vec<Vec<c64>>> {
    let n = sys.h.dim();
    if a.len() != n || bs.iter().any(|b| b.len() != n) {
        bail!(Conductance, "multiplier lengths differ from the Hamiltonian dimension {n}");
    }
    let spectral =
        || correlation_diagonals(&sys.spec, &sys.sparse, a, bs, ext.density(), &sys.rows, settings.dd_cluster_eps);
    let quadrature = || -> Result<Vec<Vec<c64>>> {
        let s = sys.sample().clone();
        let oa = LatticeOperator::diagonal(s.clone(), a);
        let q = CalculusSettings { engine: Engine::Quadrature, ..settings.clone() };
        bs.iter()
            .map(|b| {
                let ob = LatticeOperator::diagonal(s.clone(), b);
                let sigma = correlation_operator(&sys.h, &oa, &ob, ext, &q)?;
                Ok(sys.rows.iter().map(|&k| sigma.get(k, k)).collect())
            })
            .collect()
    };
    let on_rows = match settings.engine {
        Engine::Spectral => spectral(),
        Engine::Quadrature => quadrature()?,
        Engine::CrossCheck => {
            let (x, y) = (spectral(), quadrature()?);
            let diff = x.iter().flatten().zip(y.iter().flatten()).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max);
            if diff > settings.cross_check_tol {
                bail!(Conductance, "engines disagree by {diff:e} on the correlation diagonal");
            }
            x
        }
    };
    Ok(on_rows
        .into_iter()
        .map(|d| {
            let mut out = vec![c64::new(0.0, 0.0); n];
            for (&k, v) in sys.rows.iter().zip(d) {
                out[k] = v;
            }
            out
        })
        .collect())
}

fn trail_of(sys: &SpectralSystem, diagonal: &[c64], step: f64) -> Result<PvTraceTrail> {
    pv_trace_x1_diagonal(diagonal, sys.sample(), step, None, &sys.core)
}

fn pv_value(sys: &SpectralSystem, diagonal: &[c64], step: f64, cs: &ConductanceSettings) -> Result<PvValue> {
    Ok(PvValue::from_trail(trail_of(sys, diagonal, step)?, cs))
}

struct BulkParts {
    sigma: PvValue,
    /// Core diagonal of `Σ^{Λ2, S}` when the torque subtraction is on.
    torque: Option<Vec<c64>>,
}

fn bulk_parts(
    sys: &SpectralSystem,
    lambda1: &SwitchProfile,
    lambda2: &SwitchProfile,
    ext: &AlmostAnalyticExtension,
    settings: &CalculusSettings,
    cs: &ConductanceSettings,
) -> Result<BulkParts> {
    lambda1.validate()?;
    lambda2.validate()?;
    if cs.step_multiplier == 0 {
        bail!(Conductance, "step multiplier must be positive");
    }
    let sample = sys.sample();
    let l2 = multiplier_values(sample, |x| lambda2.value(x));
    let l1 = multiplier_values(sample, |x| lambda1.value(x));
    let s = spin_values(sys.h.dim());
    let l1s: Vec<f64> = l1.iter().zip(&s).map(|(v, s)| v * s).collect();
    let step = (cs.step_multiplier as u32 * sample.lattices()[0].a1) as f64;
    if !cs.torque_subtraction {
        let diag = correlation_core_diagonal(sys, &l2, &l1s, ext, settings)?;
        return Ok(BulkParts { sigma: pv_value(sys, &diag, step, cs)?, torque: None });
    }
    let mut diags = correlation_core_diagonals(sys, &l2, &[&l1s, &s], ext, settings)?;
    let torque = diags.pop().unwrap();
    let sigma_diag = diags.pop().unwrap();
    // Σ^{Λ2, S} Θ with Θ the indicator of x1 > 0, constant on every strip.
    let theta = multiplier_values(sample, |x| if x[0] > 0.0 { 1.0 } else { 0.0 });
    let reference: Vec<c64> = torque.iter().zip(&theta).map(|(t, th)| t * th).collect();
    let sigma = PvValue::corrected(trail_of(sys, &sigma_diag, step)?, &trail_of(sys, &reference, step)?, cs)?;
    Ok(BulkParts { sigma, torque: Some(torque) })
}

/// Bulk spin conductance `Tr^pv Σ^{Λ2, Λ1 S}` with strips `k a1` wide.
///
/// With `torque_subtraction` the trail is that of `Σ^{Λ2, Λ1 S} - Σ^{Λ2, S} Θ`,
/// `Θ` the indicator of `x1 > 0`. Strip traces of `Σ^{Λ2, S}` vanish in infinite
/// volume, so the limit is the same, while the open-boundary error carried by
/// strips far from the jump of `Λ1` cancels.
pub fn bulk_spin_conductance(
    sys: &SpectralSystem,
    lambda1: &SwitchProfile,
    lambda2: &SwitchProfile,
    ext: &AlmostAnalyticExtension,
    settings: &CalculusSettings,
    cs: &ConductanceSettings,
) -> Result<PvValue> {
    Ok(bulk_parts(sys, lambda1, lambda2, ext, settings, cs)?.sigma)
}

/// Torque conductance `Tr^pv Σ^{Λ2, S}` with strips `step` wide.
///
/// In a bulk sample the strip traces are the mesoscopic torque averages, which vanish.
pub fn torque_conductance(
    sys: &SpectralSystem,
    lambda2: &SwitchProfile,
    step: f64,
    ext: &AlmostAnalyticExtension,
    settings: &CalculusSettings,
    cs: &ConductanceSettings,
) -> Result<PvValue> {
    lambda2.validate()?;
    let l2 = multiplier_values(sys.sample(), |x| lambda2.value(x));
    let s = spin_values(sys.h.dim());
    let diag = correlation_core_diagonal(sys, &l2, &s, ext, settings)?;
    pv_value(sys, &diag, step, cs)
}

/// Drift conductance `πi Tr_core({[H_e, Λ2], S} ρ'(H_e))`.
///
/// The prefactor is the one for which `Tr Σ^{Λ2, S 1_Ω} = -σ_drift` whenever
/// `ρ'(H_e)` is supported inside `Ω`; it counts the symmetrized spin current
/// `{J, S}/2` of in-gap modes.
pub fn drift_conductance(sys: &SpectralSystem, lambda2: &SwitchProfile, rho: &DensityFunction) -> Result<Value> {
    lambda2.validate()?;
    let l2 = multiplier_values(sys.sample(), |x| lambda2.value(x));
    let spec = &sys.spec;
    let v = spec.vectors();
    let weights: Vec<(usize, f64)> =
        spec.values().iter().enumerate().map(|(a, &l)| (a, rho.derivative(l, 1))).filter(|(_, w)| *w != 0.0).collect();
    let mut acc = c64::new(0.0, 0.0);
    for &k in &sys.rows {
        for (j, h) in sys.sparse.row(k) {
            let x = h * ((l2[j] - l2[k]) * (spin_of_state(j) + spin_of_state(k)));
            if x == c64::new(0.0, 0.0) {
                continue;
            }
            let mut rho_jk = c64::new(0.0, 0.0);
            for &(a, w) in &weights {
                rho_jk += v[(j, a)] * v[(k, a)].conj() * w;
            }
            acc += x * rho_jk;
        }
    }
    Ok((acc * c64::new(0.0, std::f64::consts::PI)).into())
}

fn check_projection(p: &LatticeOperator) -> Result<()> {
    if !p.is_hermitian() {
        bail!(Conductance, "projection must be hermitian");
    }
    let pp = crate::linalg::mul(p.matrix().as_ref(), p.matrix().as_ref());
    let defect = crate::linalg::max_abs_diff(pp.as_ref(), p.matrix().as_ref());
    if defect > 1e-8 {
        bail!(Conductance, "operator is not a projection (|P² - P| = {defect:e})");
    }
    Ok(())
}

/// Kubo spin conductance `2πi Tr_core(P [[P, S Λ1], [P, Λ2]])`.
pub fn kubo_spin_conductance(
    p: &LatticeOperator,
    lambda1: &SwitchProfile,
    lambda2: &SwitchProfile,
    core: &Region,
) -> Result<Value> {
    check_projection(p)?;
    let sample = p.sample();
    let l1 = multiplier_values(sample, |x| lambda1.value(x));
    let sl1: Vec<f64> = l1.iter().enumerate().map(|(k, v)| v * spin_of_state(k)).collect();
    let l2 = multiplier_values(sample, |x| lambda2.value(x));
    let rows: Vec<usize> = (0..p.dim()).filter(|&k| core.contains_state(k)).collect();
    let t = double_commutator_trace(p.matrix(), &sl1, &l2, &rows);
    Ok((t * c64::new(0.0, std::f64::consts::TAU)).into())
}

/// Real-space Chern number `2πi Tr_core(P [[P, Λ1], [P, Λ2]])`, optionally per spin.
///
/// A spin sector requires `[P, S] = 0`; the sector projection is then `P 1_s`.
pub fn chern_real_space(
    p: &LatticeOperator,
    lambda1: &SwitchProfile,
    lambda2: &SwitchProfile,
    core: &Region,
    sector: SpinSector,
) -> Result<Value> {
    check_projection(p)?;
    let n = p.dim();
    let keep = |k: usize| match sector {
        SpinSector::Full => true,
        SpinSector::Up => spin_of_state(k) > 0.0,
        SpinSector::Down => spin_of_state(k) < 0.0,
    };
    let m = p.matrix();
    let pm = if sector == SpinSector::Full {
        m.clone()
    } else {
        let mut leak: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                if keep(i) != keep(j) {
                    leak = leak.max(m[(i, j)].norm());
                }
            }
        }
        if leak > 1e-8 {
            bail!(Conductance, "projection mixes spins (|[P, S]| ~ {leak:e}); sectors are undefined");
        }
        Mat::from_fn(n, n, |i, j| if keep(i) && keep(j) { m[(i, j)] } else { c64::new(0.0, 0.0) })
    };
    let sample = p.sample();
    let l1 = multiplier_values(sample, |x| lambda1.value(x));
    let l2 = multiplier_values(sample, |x| lambda2.value(x));
    let rows: Vec<usize> = (0..n).filter(|&k| core.contains_state(k) && keep(k)).collect();
    let t = double_commutator_trace(&pm, &l1, &l2, &rows);
    Ok((t * c64::new(0.0, std::f64::consts::TAU)).into())
}

fn gcd(a: u32, b: u32) -> u32 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Strip width for the interface torque: least common multiple of the two `a1`.
pub fn common_step(sample: &LatticeSample) -> f64 {
    let a: Vec<u32> = sample.lattices().iter().map(|l| l.a1).collect();
    a.iter().fold(1u32, |acc, &x| acc / gcd(acc, x) * x) as f64
}

/// Everything entering the bulk-interface identity.
#[derive(Debug, Clone, Serialize)]
pub struct ConductanceReport {
    pub sigma_plus: PvValue,
    pub sigma_minus: PvValue,
    pub sigma_drift: Value,
    pub sigma_torque: PvValue,
    /// `|σ_drift + σ_torque - (σ₊ - σ₋)|`.
    pub bic_residual: f64,
    /// The residual from the plain trails.
    pub bic_residual_uncorrected: f64,
    pub gap: [f64; 2],
    pub density: DensityFunction,
    pub extent: [f64; 2],
    pub dims: BicDims,
    /// `max |[H, S]|` of the right bulk, left bulk and junction.
    pub spin_torque_norms: [f64; 3],
    pub engine: Engine,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct BicDims {
    pub plus: usize,
    pub minus: usize,
    pub junction: usize,
}

/// Inputs of a bulk-interface check besides the models.
#[derive(Debug, Clone)]
pub struct BicSetup {
    pub extent: [f64; 2],
    pub defects: DefectSpec,
    pub lambda1: SwitchProfile,
    pub lambda2: SwitchProfile,
}

struct JunctionPart {
    drift: Value,
    torque: PvValue,
    dim: usize,
    torque_norm: f64,
}

/// Computes `σ₊`, `σ₋`, `σ_drift`, `σ_torque` on samples of the same extent.
///
/// The right model is `H₊` (`x1 > 0`) and the left model `H₋`.
pub fn verify_bic(
    jm: &JunctionModel,
    setup: &BicSetup,
    settings: &CalculusSettings,
    cs: &ConductanceSettings,
) -> Result<ConductanceReport> {
    let gap = jm.common_gap(cs.k_grid)?;
    let plus_sample = build_bulk_sample(jm.right.lattice(), setup.extent)?.into_shared();
    let minus_sample = build_bulk_sample(jm.left.lattice(), setup.extent)?.into_shared();
    let junction_sample =
        build_junction_sample(jm.left.lattice(), jm.right.lattice(), setup.extent, jm.half_width, &setup.defects)?
            .into_shared();
    let h_plus = realize_bulk(&jm.right, plus_sample)?;
    let h_minus = realize_bulk(&jm.left, minus_sample)?;
    let h_e = realize_junction(jm, junction_sample)?;
    let rho = density_for(gap, &[&h_plus, &h_minus, &h_e], cs)?;
    let ext = AlmostAnalyticExtension::new(rho.clone(), settings.taylor_order)?;

    let step = common_step(h_e.sample());

    // Bulk conductance, bulk torque trail with the junction strips, dimension, torque norm.
    let bulk = |h: LatticeOperator| -> Result<(PvValue, Option<PvTraceTrail>, usize, f64)> {
        let dim = h.dim();
        let sys = SpectralSystem::new(h, cs.core_margin)?;
        let parts = bulk_parts(&sys, &setup.lambda1, &setup.lambda2, &ext, settings, cs)?;
        let torque = parts.torque.map(|d| trail_of(&sys, &d, step)).transpose()?;
        Ok((parts.sigma, torque, dim, sys.spin_torque_norm()))
    };
    let junction = |h: LatticeOperator| -> Result<JunctionPart> {
        let dim = h.dim();
        let sys = SpectralSystem::new(h, cs.core_margin)?;
        let drift = drift_conductance(&sys, &setup.lambda2, &rho)?;
        let torque = torque_conductance(&sys, &setup.lambda2, step, &ext, settings, cs)?;
        Ok(JunctionPart { drift, torque, dim, torque_norm: sys.spin_torque_norm() })
    };
    let ((plus, minus), junc) = rayon::join(|| rayon::join(|| bulk(h_plus), || bulk(h_minus)), || junction(h_e));
    let (plus, minus, mut junc) = (plus?, minus?, junc?);
    if let (Some(tp), Some(tm)) = (&plus.1, &minus.1) {
        // Left strips take the left bulk as reference, right strips the right bulk.
        let strips = tm.strip_traces.iter().zip(&tp.strip_traces).map(|(m, p)| if m.0 < 0 { *m } else { *p }).collect();
        let reference = PvTraceTrail::from_strips(step, strips, tp.partial_sums.len());
        junc.torque = PvValue::corrected(junc.torque.trail, &reference, cs)?;
    }
    let residual = |d: f64, t: f64, p: f64, m: f64| (d + t - (p - m)).abs();
    let bic_residual = residual(junc.drift.value, junc.torque.value, plus.0.value, minus.0.value);
    let bic_residual_uncorrected = residual(
        junc.drift.value,
        junc.torque.uncorrected_value(),
        plus.0.uncorrected_value(),
        minus.0.uncorrected_value(),
    );
    Ok(ConductanceReport {
        sigma_plus: plus.0,
        sigma_minus: minus.0,
        sigma_drift: junc.drift,
        sigma_torque: junc.torque,
        bic_residual,
        bic_residual_uncorrected,
        gap,
        density: rho,
        extent: setup.extent,
        dims: BicDims { plus: plus.2, minus: minus.2, junction: junc.dim },
        spin_torque_norms: [plus.3, minus.3, junc.torque_norm],
        engine: settings.engine,
    })
}
