//! Heat traces from spectra, and the small-time expansion coefficients from geometry.
//!
//! For a domain with corners `θ_j` the trace behaves like
//! `|Ω|/(4πt) − |∂Ω|/(8√(πt)) + a₀ + O(√t)` with
//! `a₀ = (1/12π)∫k ds + Σ (π² − θ_j²)/(24πθ_j)`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{self, Corner, DomainSpec, DEFAULT_ANGLE_TOL};
use crate::quadrature;
use crate::scalar::{CompensatedSum, Real};
use crate::spectrum::Spectrum;

/// Multiplier on the Weyl-density tail estimate.
pub const TAIL_SAFETY_FACTOR: f64 = 2.0;

/// Fraction of the partial sum above which a sample's tail bound is flagged.
pub const TAIL_FLAG_FRACTION: f64 = 0.1;

fn check_angle<T: Real>(theta: T) -> Result<()> {
    if theta > T::zero() && theta < T::TAU() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "opening angle must lie in (0, 2π); cusps and slits are unsupported (got {theta})"
        )))
    }
}

/// Local contribution `(π² − θ²)/(24πθ)` of a corner with opening angle `θ`.
pub fn corner_term<T: Real>(theta: T) -> Result<T> {
    check_angle(theta)?;
    let pi = T::PI();
    Ok((pi * pi - theta * theta) / (T::lit(24.0) * pi * theta))
}

/// Per-corner weight `(π² + θ²)/(24πθ)` of the reduced a₀ formula.
pub fn reduced_corner_weight<T: Real>(theta: T) -> Result<T> {
    check_angle(theta)?;
    let pi = T::PI();
    Ok((pi * pi + theta * theta) / (T::lit(24.0) * pi * theta))
}

/// `a₀ = (2χ − n)/12 + Σ (π² + θ_j²)/(24πθ_j)`, valid whenever every curved
/// part of the boundary is accounted for by Gauss–Bonnet.
pub fn a0_from_angles<T: Real>(chi: i64, thetas: &[T]) -> Result<T> {
    let mut acc = CompensatedSum::new();
    acc.add(T::lit((2 * chi - thetas.len() as i64) as f64) / T::lit(12.0));
    for &t in thetas {
        acc.add(reduced_corner_weight(t)?);
    }
    Ok(acc.value())
}

/// Trace of the infinite-wedge heat kernel over a finite wedge, without the
/// exponentially small remainder (bounded conservatively by `e^{−diam²/(16t)}`).
pub fn wedge_trace<T: Real>(area: T, side_length: T, theta: T, t: T) -> Result<T> {
    let c = corner_term(theta)?;
    if !(t > T::zero()) {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    let pi = T::PI();
    Ok(area / (T::lit(4.0) * pi * t) - side_length / (T::lit(8.0) * (pi * t).sqrt()) + c)
}

/// Conservative size of the remainder dropped by [`wedge_trace`].
pub fn wedge_remainder_bound<T: Real>(diameter: T, t: T) -> T {
    (-(diameter * diameter) / (T::lit(16.0) * t)).exp()
}

/// Boundary correction `−L/(8√(πt))` of the half-plane kernel.
///
/// Cross-checks the closed form against quadrature of the image-charge
/// diagonal term `−e^{−x²/t}/(4πt)` over `x ∈ (0, ∞)`.
pub fn halfplane_boundary_correction<T: Real>(t: T, length: T) -> Result<T> {
    if !(t > T::zero() && length > T::zero()) {
        return Err(Error::Domain(format!("t and L must be positive (t={t}, L={length})")));
    }
    let pi = T::PI();
    let closed = -T::one() / (T::lit(8.0) * (pi * t).sqrt());
    // x = √t·u; the integrand is below e^{-100} beyond u = 10.
    let sqrt_t = t.sqrt();
    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(16.0));
    let numeric = quadrature::integrate(
        |u: T| -(-(u * u)).exp() / (T::lit(4.0) * pi * t) * sqrt_t,
        T::zero(),
        T::lit(10.0),
        tol,
    )?;
    let check_tol = T::lit(1e-8).max(T::epsilon() * T::lit(1e3));
    if ((numeric - closed) / closed).abs() > check_tol {
        return Err(Error::numeric(
            "half-plane correction self-test",
            format!("quadrature {numeric} disagrees with closed form {closed}"),
        ));
    }
    Ok(closed * length)
}

/// Expansion coefficients computed from geometry alone.
#[derive(Clone, Debug, PartialEq)]
pub struct TheoreticalCoefficients<T> {
    /// `|Ω|/4π`
    pub a_minus1: T,
    /// `−|∂Ω|/(8√π)`
    pub a_minus_half: T,
    pub a0: T,
    pub area: T,
    pub perimeter: T,
    pub euler_characteristic: i64,
    pub corners: Vec<Corner<T>>,
    /// `corner_term(θ_j)` for each detected corner.
    pub corner_terms: Vec<T>,
    /// `(1/12π)∫k ds`
    pub curvature_contribution: T,
}

impl<T: Real> TheoreticalCoefficients<T> {
    /// Three-term expansion `a₋₁/t + a₋½/√t + a₀`.
    pub fn expansion(&self, t: T) -> T {
        self.a_minus1 / t + self.a_minus_half / t.sqrt() + self.a0
    }
}

/// Computes `a₋₁`, `a₋½` and `a₀` by two independent routes and checks they agree.
pub fn theoretical_coefficients<T: Real>(domain: &DomainSpec<T>) -> Result<TheoreticalCoefficients<T>> {
    let area = geometry::area(domain)?;
    let perimeter = geometry::perimeter(domain)?;
    let corners = geometry::detect_corners(domain, T::lit(DEFAULT_ANGLE_TOL))?;
    let curvature = geometry::curvature_integral(domain)?;
    let pi = T::PI();
    let chi = domain.euler_characteristic();

    let curvature_contribution = curvature / (T::lit(12.0) * pi);
    let corner_terms = corners.iter().map(|c| corner_term(c.theta)).collect::<Result<Vec<_>>>()?;
    let mut direct = CompensatedSum::new();
    direct.add(curvature_contribution);
    for &c in &corner_terms {
        direct.add(c);
    }
    let direct = direct.value();

    // Gauss–Bonnet route: χ/6 + Σ [(π² + θ²)/(24πθ) − 1/12].
    let thetas: Vec<T> = corners.iter().map(|c| c.theta).collect();
    let reduced = a0_from_angles(chi, &thetas)?;

    let tol = T::lit(1e-10).max(T::epsilon().sqrt() * T::lit(4.0));
    if (direct - reduced).abs() > tol * (T::one() + direct.abs()) {
        return Err(Error::Consistency(format!(
            "a0 routes disagree: curvature route {direct}, Gauss-Bonnet route {reduced}"
        )));
    }
    Ok(TheoreticalCoefficients {
        a_minus1: area / (T::lit(4.0) * pi),
        a_minus_half: -perimeter / (T::lit(8.0) * pi.sqrt()),
        a0: direct,
        area,
        perimeter,
        euler_characteristic: chi,
        corners,
        corner_terms,
        curvature_contribution,
    })
}

/// Heat-trace partial sums on a grid, each with a truncation estimate.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceSamples<T> {
    pub grid: Vec<T>,
    pub values: Vec<T>,
    pub tail_bounds: Vec<T>,
    /// Samples whose tail bound exceeds 10% of the partial sum.
    pub flagged: Vec<bool>,
    pub cutoff: T,
    pub safety_factor: T,
    /// Area used in the tail estimate.
    pub area_used: T,
}

impl<T: Real> TraceSamples<T> {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Samples with `t_min ≤ t ≤ t_max`.
    pub fn window(&self, t_min: T, t_max: T) -> Self {
        let keep: Vec<usize> = (0..self.grid.len()).filter(|&i| self.grid[i] >= t_min && self.grid[i] <= t_max).collect();
        let pick = |v: &[T]| keep.iter().map(|&i| v[i]).collect::<Vec<T>>();
        Self {
            grid: pick(&self.grid),
            values: pick(&self.values),
            tail_bounds: pick(&self.tail_bounds),
            flagged: keep.iter().map(|&i| self.flagged[i]).collect(),
            cutoff: self.cutoff,
            safety_factor: self.safety_factor,
            area_used: self.area_used,
        }
    }
}

/// `Σ_{λ ≤ Λ} e^{−λt}` summed in ascending order with compensation.
pub fn partial_trace<T: Real>(eigenvalues: &[T], t: T) -> T {
    let mut acc = CompensatedSum::new();
    let limit = T::lit(745.0);
    for &l in eigenvalues {
        let x = l * t;
        if x > limit {
            break;
        }
        acc.add((-x).exp());
    }
    acc.value()
}

/// Evaluates the truncated heat trace on `grid`.
///
/// The tail beyond the cutoff `Λ` is estimated by the Weyl density,
/// `safety·|Ω|e^{−Λt}/(4πt)`, plus a rounding floor. `|Ω|` comes from
/// `area_hint`, the spectrum's own hint, or the Weyl count `4πK/Λ`.
pub fn evaluate_trace<T: Real>(spectrum: &Spectrum<T>, grid: &[T], area_hint: Option<T>) -> Result<TraceSamples<T>> {
    let eig = spectrum.complete_part();
    if eig.is_empty() {
        return Err(Error::EmptySpectrum("no eigenvalues below the completeness cutoff".into()));
    }
    if let Some(&t) = grid.iter().find(|&&t| !(t > T::zero())) {
        return Err(Error::Domain(format!("trace grid must be positive, got {t}")));
    }
    let cutoff = spectrum.cutoff();
    let four_pi = T::lit(4.0) * T::PI();
    let area = area_hint
        .or(spectrum.area_hint())
        .unwrap_or_else(|| four_pi * T::from_count(eig.len()) / cutoff);
    let safety = T::lit(TAIL_SAFETY_FACTOR);
    let values: Vec<T> = grid.par_iter().map(|&t| partial_trace(eig, t)).collect();
    let floor = T::epsilon() * T::lit(8.0);
    let tail_bounds: Vec<T> = grid
        .iter()
        .zip(&values)
        .map(|(&t, &h)| safety * area * (-cutoff * t).exp() / (four_pi * t) + floor * h)
        .collect();
    let flagged = tail_bounds
        .iter()
        .zip(&values)
        .map(|(&b, &h)| b > T::lit(TAIL_FLAG_FRACTION) * h)
        .collect();
    Ok(TraceSamples {
        grid: grid.to_vec(),
        values,
        tail_bounds,
        flagged,
        cutoff,
        safety_factor: safety,
        area_used: area,
    })
}

/// `n` geometrically spaced points from `t_min` to `t_max` inclusive.
pub fn geometric_grid<T: Real>(t_min: T, t_max: T, n: usize) -> Vec<T> {
    if n == 1 {
        return vec![t_min];
    }
    let ratio = (t_max / t_min).ln() / T::from_count(n - 1);
    (0..n)
        .map(|i| {
            if i == n - 1 {
                t_max
            } else {
                t_min * (ratio * T::from_count(i)).exp()
            }
        })
        .collect()
}
