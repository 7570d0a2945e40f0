//! Spectral corner detection: compare the fitted `a₀` with `χ/6`.
//!
//! A boundary with corners has `a₀ > χ/6` strictly; a smooth one has
//! `a₀ = χ/6`. The rule is one-sided: corners are declared only when
//! `â₀` clears the threshold by `decision_z` uncertainties; smooth only
//! when `â₀` is within `decision_z` uncertainties of `χ/6` in both the
//! full and the halved window; anything else is indeterminate.

use std::fmt;

use num_traits::{FromPrimitive, Num};
use rayon::prelude::*;

use crate::asymptotic_fit::{fit_spectrum, half_window_fit, AsymptoticFit, ModelTerms, VerdictRecord, WindowConfig};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spectrum::Spectrum;

pub const DEFAULT_DECISION_Z: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Decision {
    HasCorners,
    Smooth,
    Indeterminate,
}

impl Decision {
    /// CLI exit code.
    pub fn exit_code(self) -> i32 {
        match self {
            Self::Smooth => 0,
            Self::HasCorners => 10,
            Self::Indeterminate => 20,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::HasCorners => "has_corners",
            Self::Smooth => "smooth",
            Self::Indeterminate => "indeterminate",
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClassifierConfig<T> {
    /// Assumed Euler characteristic (1 − number of holes).
    pub chi: i64,
    pub decision_z: T,
    pub window: WindowConfig<T>,
}

impl<T: Real> Default for ClassifierConfig<T> {
    fn default() -> Self {
        Self { chi: 1, decision_z: T::lit(DEFAULT_DECISION_Z), window: WindowConfig::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict<T> {
    pub decision: Decision,
    pub a0_estimate: T,
    /// `√(σ_stat² + shift²)`, shift being the half-window change of `â₀`.
    pub uncertainty: T,
    pub statistical_uncertainty: T,
    pub window_shift: T,
    pub threshold: T,
    /// `(â₀ − χ/6)/uncertainty`.
    pub margin: T,
    pub assumed_chi: i64,
    pub decision_z: T,
    pub window_robust: bool,
    pub a0_half_window: T,
    pub fit: AsymptoticFit<T>,
}

impl<T: Real> Verdict<T> {
    pub fn record(&self) -> VerdictRecord {
        VerdictRecord {
            decision: self.decision.to_string(),
            a0_estimate: self.a0_estimate.as_f64(),
            uncertainty: self.uncertainty.as_f64(),
            threshold: self.threshold.as_f64(),
            margin: self.margin.as_f64(),
            assumed_chi: self.assumed_chi,
            decision_z: self.decision_z.as_f64(),
            window_robust: self.window_robust,
            a0_half_window: self.a0_half_window.as_f64(),
        }
    }
}

fn check_chi(chi: i64) -> Result<()> {
    if chi > 1 {
        return Err(Error::Domain(format!("assumed Euler characteristic {chi} > 1; planar domains have χ ≤ 1")));
    }
    Ok(())
}

/// Applies the decision rule to a full-window fit and its half-window twin.
pub fn decide<T: Real>(fit: AsymptoticFit<T>, half: &AsymptoticFit<T>, chi: i64, decision_z: T) -> Result<Verdict<T>> {
    check_chi(chi)?;
    if !(decision_z > T::zero()) {
        return Err(Error::Domain(format!("decision_z must be positive, got {decision_z}")));
    }
    let threshold = T::from_i64(chi).expect("small integer") / T::lit(6.0);
    let a0 = fit.a0();
    let sigma = fit.a0_uncertainty();
    let shift = (half.a0() - a0).abs();
    let floor = T::epsilon() * T::lit(64.0) * (T::one() + a0.abs());
    let uncertainty = (sigma * sigma + shift * shift).sqrt().max(floor);
    let margin = (a0 - threshold) / uncertainty;
    let band = decision_z * uncertainty;
    let window_robust = (half.a0() - threshold).abs() <= band;
    let decision = if margin > decision_z {
        Decision::HasCorners
    } else if margin.abs() <= decision_z && window_robust {
        Decision::Smooth
    } else {
        Decision::Indeterminate
    };
    Ok(Verdict {
        decision,
        a0_estimate: a0,
        uncertainty,
        statistical_uncertainty: sigma,
        window_shift: shift,
        threshold,
        margin,
        assumed_chi: chi,
        decision_z,
        window_robust,
        a0_half_window: half.a0(),
        fit,
    })
}

/// Blind-fit classification of a spectrum.
pub fn classify<T: Real>(spectrum: &Spectrum<T>, config: &ClassifierConfig<T>) -> Result<Verdict<T>> {
    check_chi(config.chi)?;
    let terms = ModelTerms::blind();
    let pipeline = fit_spectrum(spectrum, &config.window, &terms)?;
    let half = half_window_fit(spectrum, &pipeline, &terms)?;
    decide(pipeline.fit, &half, config.chi, config.decision_z)
}

/// Classifies many spectra in parallel; results keep the input order.
pub fn classify_batch<T: Real>(spectra: &[Spectrum<T>], config: &ClassifierConfig<T>) -> Vec<Result<Verdict<T>>> {
    spectra.par_iter().map(|s| classify(s, config)).collect()
}

/// `f(x) = Σ (1/x_k + x_k)`; with `x_k = θ_k/π` this is the corner part of `24·a₀`.
pub fn f_corner<F: Num + Clone + PartialOrd + fmt::Debug>(x: &[F]) -> Result<F> {
    let mut acc = F::zero();
    for v in x {
        if !(v.clone() > F::zero()) {
            return Err(Error::Domain(format!("f_corner needs positive arguments, got {v:?}")));
        }
        acc = acc + F::one() / v.clone() + v.clone();
    }
    Ok(acc)
}

/// `a₀ = f(x)/24 − n/12 + χ/6` for corner angles `θ_k = π·x_k`.
///
/// Exact in any field, e.g. `Ratio<i64>` for rational angle fractions.
pub fn a0_identity<F: Num + Clone + PartialOrd + FromPrimitive + fmt::Debug>(chi: i64, x: &[F]) -> Result<F> {
    let c = |v: i64| F::from_i64(v).expect("representable integer");
    let n = c(x.len() as i64);
    Ok(f_corner(x)? / c(24) - n / c(12) + c(chi) / c(6))
}

/// The strict lower bound `a₀ > 1/6` for a simply connected domain with
/// `n ≥ 1` corners. `None` for `n = 0`, where `a₀ = χ/6` exactly.
pub fn a0_lower_bound<F: Num + FromPrimitive>(n: usize) -> Option<F> {
    (n >= 1).then(|| F::one() / F::from_u8(6).expect("representable integer"))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsospectralComparison<T> {
    pub isospectral: bool,
    /// Largest `|λ_k(a) − λ_k(b)|/λ_k(a)` over the compared modes.
    pub max_deviation: T,
    /// 1-based mode index attaining it.
    pub worst_mode: usize,
}

/// Compares the first `count` eigenvalues of two spectra.
pub fn isospectral_compare<T: Real>(a: &Spectrum<T>, b: &Spectrum<T>, count: usize, rel_tol: T) -> Result<IsospectralComparison<T>> {
    let (ea, eb) = (a.complete_part(), b.complete_part());
    if count == 0 || ea.len() < count || eb.len() < count {
        return Err(Error::Mismatch(format!(
            "cannot compare {count} modes: complete counts are {} ({}) and {} ({})",
            ea.len(),
            a.domain_label(),
            eb.len(),
            b.domain_label()
        )));
    }
    let mut max_deviation = T::zero();
    let mut worst_mode = 1;
    for k in 0..count {
        let d = (ea[k] - eb[k]).abs() / ea[k];
        if d > max_deviation {
            max_deviation = d;
            worst_mode = k + 1;
        }
    }
    Ok(IsospectralComparison { isospectral: max_deviation <= rel_tol, max_deviation, worst_mode })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic_spectra::{disk_spectrum, equilateral_triangle_spectrum, rectangle_spectrum, sector_spectrum};
    use crate::asymptotic_fit::{fit_expansion, Coefficients};
    use crate::heat_trace::{geometric_grid, TraceSamples};
    use num_rational::Ratio;
    use std::f64::consts::PI;

    fn classify_default(s: &Spectrum<f64>) -> Verdict<f64> {
        classify(s, &ClassifierConfig::default()).unwrap()
    }

    #[test]
    fn square_has_corners() {
        let v = classify_default(&rectangle_spectrum(1.0, 1.0, 2e5).unwrap());
        assert_eq!(v.decision, Decision::HasCorners);
        assert!((v.a0_estimate - 0.25).abs() < 0.01);
        assert!(v.margin > 3.0);
        assert_eq!(v.record().decision, "has_corners");
    }

    #[test]
    fn disk_is_never_cornered() {
        let v = classify_default(&disk_spectrum(1.0, 1e5).unwrap());
        assert_ne!(v.decision, Decision::HasCorners, "{v:?}");
        assert!(v.margin.abs() <= 3.0, "margin {}", v.margin);
    }

    #[test]
    fn quarter_disk_has_corners() {
        let v = classify_default(&sector_spectrum(PI / 2.0, 1.0, 1e5).unwrap());
        assert_eq!(v.decision, Decision::HasCorners);
        assert!((v.a0_estimate - 11.0 / 48.0).abs() < 0.01);
    }

    #[test]
    fn triangle_has_corners() {
        let v = classify_default(&equilateral_triangle_spectrum(1.0, 1e5).unwrap());
        assert_eq!(v.decision, Decision::HasCorners);
    }

    #[test]
    fn dilation_leaves_verdict_unchanged() {
        let s = rectangle_spectrum(1.0, 1.0, 2e5).unwrap();
        let v1 = classify_default(&s);
        let v2 = classify_default(&s.dilated(2.0));
        assert_eq!(v1.decision, v2.decision);
        assert!((v1.a0_estimate - v2.a0_estimate).abs() < 1e-9, "{} vs {}", v1.a0_estimate, v2.a0_estimate);
    }

    #[test]
    fn chi_above_one_is_invalid() {
        let s = rectangle_spectrum(1.0, 1.0, 1e4).unwrap();
        let cfg = ClassifierConfig { chi: 2, ..ClassifierConfig::default() };
        assert!(matches!(classify(&s, &cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn insufficient_spectrum_propagates() {
        let s = disk_spectrum(1.0, 1e3).unwrap().first_n(10).unwrap();
        assert!(matches!(classify_default_err(&s), Err(Error::InsufficientSpectrum { .. })));
    }

    fn classify_default_err(s: &Spectrum<f64>) -> Result<Verdict<f64>> {
        classify(s, &ClassifierConfig::default())
    }

    fn noisy_samples(a0: f64, grid: &[f64]) -> TraceSamples<f64> {
        let c = Coefficients { a_minus1: 1.0 / (4.0 * PI), a_minus_half: -0.5 / PI.sqrt(), a0, a_half: 0.0, a_one: None };
        // Fixed pseudo-noise pattern, identical for every δ.
        let values: Vec<f64> = grid
            .iter()
            .enumerate()
            .map(|(i, &t)| c.evaluate(t) * (1.0 + 1e-6 * ((i as f64) * 2.39996).sin()))
            .collect();
        TraceSamples {
            tail_bounds: vec![0.0; grid.len()],
            flagged: vec![false; grid.len()],
            grid: grid.to_vec(),
            values,
            cutoff: 1e9,
            safety_factor: 2.0,
            area_used: 1.0,
        }
    }

    #[test]
    fn threshold_flips_monotonically() {
        let full = geometric_grid(6e-5, 0.025, 60);
        let half = geometric_grid(6e-5, 0.0125, 60);
        let verdict = |delta: f64| {
            let a0 = 1.0 / 6.0 + delta;
            let f = fit_expansion(&noisy_samples(a0, &full), &ModelTerms::blind()).unwrap();
            let h = fit_expansion(&noisy_samples(a0, &half), &ModelTerms::blind()).unwrap();
            decide(f, &h, 1, 3.0).unwrap()
        };
        let u = verdict(0.0).uncertainty;
        assert!(u > 0.0);
        let rank = |d: Decision| match d {
            Decision::Indeterminate => 0,
            Decision::Smooth => 1,
            Decision::HasCorners => 2,
        };
        let mut seen = Vec::new();
        for i in -40..=40 {
            let delta = i as f64 * 0.1 * u;
            let v = verdict(delta);
            let expect = if delta > 3.0 * u * 1.001 {
                Some(Decision::HasCorners)
            } else if delta.abs() < 3.0 * u * 0.999 {
                Some(Decision::Smooth)
            } else if delta < -3.0 * u * 1.001 {
                Some(Decision::Indeterminate)
            } else {
                None
            };
            if let Some(e) = expect {
                assert_eq!(v.decision, e, "δ = {delta:e}, u = {u:e}, margin {}", v.margin);
            }
            if delta >= 0.0 {
                seen.push(rank(v.decision));
            }
        }
        assert!(seen.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn f_corner_examples() {
        assert_eq!(f_corner(&[1.0f64; 5]).unwrap(), 10.0);
        assert_eq!(f_corner(&[0.5f64]).unwrap(), 2.5);
        let third = Ratio::new(1i64, 3);
        assert_eq!(f_corner(&[third; 3]).unwrap(), Ratio::from_integer(10));
        assert!(f_corner(&[1.0, 0.0]).is_err());
        assert!(f_corner(&[-0.5f64]).is_err());
    }

    #[test]
    fn exact_a0_identity() {
        let r = |n, d| Ratio::new(n, d);
        assert_eq!(a0_identity(1, &[r(1i64, 2); 4]).unwrap(), r(1, 4));
        assert_eq!(a0_identity(1, &[r(1i64, 3); 3]).unwrap(), r(1, 3));
        assert_eq!(a0_identity(1, &[r(1i64, 1); 4]).unwrap(), r(1, 6));
        // L-shape: five right angles and one reflex corner.
        let l = [r(1i64, 2), r(1, 2), r(1, 2), r(3, 2), r(1, 2), r(1, 2)];
        assert_eq!(a0_identity(1, &l).unwrap(), r(5, 18));
        // Gauss–Bonnet folds the arc's curvature into the identity, so it
        // also covers the quarter disk: 1/24 + 1/8 + 1/16 = 11/48.
        assert_eq!(a0_identity(1, &[r(1i64, 2); 3]).unwrap(), r(11, 48));
    }

    #[test]
    fn lower_bound() {
        for n in 1..10 {
            assert_eq!(a0_lower_bound::<Ratio<i64>>(n), Some(Ratio::new(1, 6)));
        }
        assert_eq!(a0_lower_bound::<f64>(0), None);
    }

    #[test]
    fn isospectral_examples() {
        let sq = rectangle_spectrum(1.0, 1.0, 2000.0).unwrap();
        let same = isospectral_compare(&sq, &sq, 50, 1e-12).unwrap();
        assert!(same.isospectral);
        assert_eq!(same.max_deviation, 0.0);
        let disk = disk_spectrum(1.0, 2000.0).unwrap();
        let diff = isospectral_compare(&sq, &disk, 20, 1e-2).unwrap();
        assert!(!diff.isospectral);
        let d1 = (2.0 * PI * PI - 5.783185962946784f64).abs() / (2.0 * PI * PI);
        assert!(diff.max_deviation >= d1);
        assert!(isospectral_compare(&sq, &disk, 100_000, 1e-2).is_err());
    }

    #[test]
    fn batch_preserves_order() {
        let spectra = vec![rectangle_spectrum(1.0, 1.0, 2e5).unwrap(), disk_spectrum(1.0, 1e5).unwrap()];
        let out = classify_batch(&spectra, &ClassifierConfig::default());
        assert_eq!(out[0].as_ref().unwrap().decision, Decision::HasCorners);
        assert_ne!(out[1].as_ref().unwrap().decision, Decision::HasCorners);
    }
}
