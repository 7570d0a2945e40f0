//! Dirichlet spectra of planar domains, heat-trace asymptotics and spectral
//! corner detection: a domain has a corner iff the constant heat-trace
//! coefficient exceeds χ/6.

pub mod analytic_spectra;
pub mod asymptotic_fit;
pub mod bessel;
pub mod classifier;
pub mod cli;
pub mod error;
pub mod fem;
pub mod geometry;
pub mod heat_trace;
pub mod io;
pub mod linalg;
pub mod quadrature;
pub mod scalar;
pub mod spectrum;
pub mod verify;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision instantiations of the generic types.
pub type Domain = geometry::DomainSpec<f64>;
pub type Loop = geometry::BoundaryLoop<f64>;
pub type Segment = geometry::Segment<f64>;
pub type Point = geometry::Vec2<f64>;
pub type Corner = geometry::Corner<f64>;
pub type Spectrum = spectrum::Spectrum<f64>;
pub type TraceSamples = heat_trace::TraceSamples<f64>;
pub type TheoreticalCoefficients = heat_trace::TheoreticalCoefficients<f64>;
pub type AsymptoticFit = asymptotic_fit::AsymptoticFit<f64>;
pub type Verdict = classifier::Verdict<f64>;
pub type ClassifierConfig = classifier::ClassifierConfig<f64>;
pub type WindowConfig = asymptotic_fit::WindowConfig<f64>;
