//! Criteria on small random instances.

use std::sync::Arc;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use spinbic::c64;
use spinbic::calculus::{
    correlation_operator, off_diagonal_part, AlmostAnalyticExtension, CalculusSettings, DensityFunction, Engine,
};
use spinbic::geometry::{build_bulk_sample, core_region, LatticeSample, LatticeSpec};
use spinbic::linalg::{hermitian_eigen, mul};
use spinbic::operator::{pv_trace_x1, region_trace, Hermiticity, LatticeOperator};

use crate::Verdict;

fn sample(rng: &mut impl Rng) -> Arc<LatticeSample> {
    // 6 to 30 states.
    let shapes = [[0.5, 1.0], [0.5, 2.0], [1.0, 1.0], [0.5, 5.0], [1.0, 2.0]];
    let e = shapes[rng.random_range(0..shapes.len())];
    build_bulk_sample(&LatticeSpec::square(), e).unwrap().into_shared()
}

fn gaussian(rng: &mut impl Rng) -> c64 {
    c64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn random_hermitian(n: usize, rng: &mut impl Rng) -> Mat<c64> {
    let g = Mat::from_fn(n, n, |_, _| gaussian(rng));
    let scale = 1.0 / (2.0 * n as f64).sqrt();
    Mat::from_fn(n, n, |i, j| (g[(i, j)] + g[(j, i)].conj()) * scale)
}

/// `V diag(λ) V*` with a Haar-like `V` and `λ` drawn from `[-3, -1] ∪ [1, 3]`.
fn random_gapped(n: usize, rng: &mut impl Rng) -> Mat<c64> {
    let (_, v) = hermitian_eigen(random_hermitian(n, rng).as_ref()).unwrap();
    let d = Mat::from_fn(n, n, |i, j| {
        if i != j {
            return c64::new(0.0, 0.0);
        }
        let mag = rng.random_range(1.0..3.0);
        c64::new(if i % 2 == 0 { -mag } else { mag }, 0.0)
    });
    let h = mul(mul(v.as_ref(), d.as_ref()).as_ref(), v.adjoint());
    Mat::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5)
}

fn random_diagonal(s: &Arc<LatticeSample>, rng: &mut impl Rng) -> LatticeOperator {
    let v: Vec<f64> = (0..s.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
    LatticeOperator::diagonal(s.clone(), &v)
}

fn engines() -> (CalculusSettings, CalculusSettings) {
    let spectral = CalculusSettings { engine: Engine::Spectral, ..Default::default() };
    let quadrature = CalculusSettings { engine: Engine::Quadrature, ..Default::default() };
    (spectral, quadrature)
}

pub fn engine_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let (spectral, quadrature) = engines();
    let mut worst: f64 = 0.0;
    let mut largest = 0;
    for _ in 0..50 {
        let s = sample(&mut rng);
        let h = LatticeOperator::new(s.clone(), random_hermitian(s.dim(), &mut rng), Hermiticity::Hermitian).unwrap();
        let (a, b) = (random_diagonal(&s, &mut rng), random_diagonal(&s, &mut rng));
        let center = rng.random_range(-0.5..0.5);
        let rho = DensityFunction::new([center - 0.4, center + 0.4], -4.0).unwrap();
        let ext = AlmostAnalyticExtension::new(rho, spectral.taylor_order).unwrap();
        let x = correlation_operator(&h, &a, &b, &ext, &spectral).unwrap();
        let y = correlation_operator(&h, &a, &b, &ext, &quadrature).unwrap();
        worst = worst.max(x.max_abs_diff(&y));
        largest = largest.max(s.dim());
    }
    Verdict::new(worst <= 1e-6, format!("max entrywise difference {worst:.2e} over 50 matrices, dim <= {largest}"))
}

pub fn off_diagonality() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(202);
    let (spectral, quadrature) = engines();
    let mut worst = [0.0f64; 2];
    for _ in 0..20 {
        let s = sample(&mut rng);
        let h = LatticeOperator::new(s.clone(), random_gapped(s.dim(), &mut rng), Hermiticity::Hermitian).unwrap();
        let (vals, v) = hermitian_eigen(h.matrix().as_ref()).unwrap();
        let below = vals.iter().filter(|&&l| l < 0.0).count();
        let proj = |lower: bool| {
            let n = s.dim();
            let keep = Mat::from_fn(n, n, |i, j| {
                let inside = if lower { i < below } else { i >= below };
                if i == j && inside {
                    c64::new(1.0, 0.0)
                } else {
                    c64::new(0.0, 0.0)
                }
            });
            mul(mul(v.as_ref(), keep.as_ref()).as_ref(), v.adjoint())
        };
        let (p, q) = (proj(true), proj(false));
        let a = random_diagonal(&s, &mut rng);
        let rho = DensityFunction::new([-1.0, 1.0], -4.0).unwrap();
        let ext = AlmostAnalyticExtension::new(rho, spectral.taylor_order).unwrap();
        for (k, settings) in [&spectral, &quadrature].into_iter().enumerate() {
            let od = off_diagonal_part(&h, &a, &ext, settings).unwrap();
            for proj in [&p, &q] {
                let block = mul(mul(proj.as_ref(), od.matrix().as_ref()).as_ref(), proj.as_ref());
                worst[k] = worst[k].max(spinbic::linalg::max_abs(block.as_ref()));
            }
        }
    }
    Verdict::new(
        worst.iter().all(|&w| w <= 1e-8),
        format!(
            "max |P A^OD P|, |P' A^OD P'| over 20 gapped instances: spectral {:.2e}, quadrature {:.2e}",
            worst[0], worst[1]
        ),
    )
}

pub fn pv_trace() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst: f64 = 0.0;
    let mut cases = 0;
    for extent in [4.0, 6.0, 9.0] {
        let s = build_bulk_sample(&LatticeSpec::square(), [extent, extent]).unwrap().into_shared();
        let core = core_region(&s, [0.0, 0.0]).unwrap();
        for _ in 0..5 {
            // Dense operator supported on |x1| <= r.
            let r = rng.random_range(0.0..extent - 1.0);
            let inside: Vec<bool> = (0..s.dim()).map(|k| s.site(k / 2).pos[0].abs() <= r).collect();
            let n = s.dim();
            let m =
                Mat::from_fn(n, n, |i, j| if inside[i] && inside[j] { gaussian(&mut rng) } else { c64::new(0.0, 0.0) });
            let a = LatticeOperator::new(s.clone(), m, Hermiticity::General).unwrap();
            let full = region_trace(&a, &core).unwrap();
            let covering = (r.floor() as usize + 1).min(extent as usize);
            let trail = pv_trace_x1(&a, 1.0, None, &core).unwrap();
            for partial in trail.partial_sums.iter().skip(covering - 1) {
                worst = worst.max((partial - full).norm() / full.norm().max(1.0));
            }
            cases += 1;
        }
    }
    Verdict::new(
        worst <= 1e-12,
        format!(
            "largest relative gap between windows covering the support and the trace {worst:.1e} ({cases} operators)"
        ),
    )
}
