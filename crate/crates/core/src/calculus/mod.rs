//! Density functions, almost-analytic extensions and the resolvent integrals
//! built from them.
//!
//! Integrals over the complex plane are normalized so that
//! `g(H) = (1/πi) ∫ ∂g̃/∂z̄ (H - z)^{-1} dm(z)` holds exactly; in Lebesgue
//! coordinates this means `dm = i dx dy`.

mod correlation;
mod density;
mod extension;
mod quadrature;
mod spectral;

pub use correlation::{
    correlation_diagonal, correlation_diagonals, correlation_operator, correlation_triple_sum, off_diagonal_part,
    CalculusSettings, Engine,
};
pub use density::DensityFunction;
pub use extension::AlmostAnalyticExtension;
pub use quadrature::{gauss_legendre, hs_apply, QuadNode, QuadratureGrid};
pub use spectral::{divided_difference_1, divided_difference_2, spectral_function, SpectralData};
