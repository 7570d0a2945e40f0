//! Windowed weighted least-squares extraction of heat-trace coefficients.
//!
//! The model is `h(t) ≈ a₋₁/t + a₋½/√t + a₀ + a½√t` (optionally `+ a₁t`),
//! fitted with relative-error weights `1/h(t)²`. Uncertainties are the
//! residual-scaled covariance of the weighted normal equations: statistical
//! only, excluding truncation bias.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::heat_trace::{evaluate_trace, geometric_grid, partial_trace, TheoreticalCoefficients, TraceSamples};
use crate::linalg::{least_squares, normal_inverse, symmetric_eigenvalues, Dense};
use crate::scalar::Real;
use crate::spectrum::Spectrum;

pub const DEFAULT_KAPPA: f64 = 12.0;
pub const DEFAULT_GRID_POINTS: usize = 60;
/// `t_max ≤ 0.5/λ₁`: beyond this the first mode dominates the trace.
pub const LAMBDA1_FRACTION: f64 = 0.5;
/// `t_max ≤ 0.05·|Ω|` with `|Ω|` from the Weyl count `4πK/Λ`.
pub const AREA_FRACTION: f64 = 0.05;
/// The constant term must stay visible: `(1/6)/h(t_max) ≥ 10⁻³`.
pub const A0_VISIBILITY: f64 = 1e-3;
/// Smallest usable `t_max/t_min`.
pub const MIN_WINDOW_RATIO: f64 = 8.0;
pub const MIN_SAMPLES: usize = 10;
/// Largest tolerated `tail bound / h` inside the window.
pub const MAX_TAIL_FRACTION: f64 = 0.01;
pub const MAX_CONDITION: f64 = 1e12;
pub const UNCERTAINTY_NOTE: &str = "statistical, excludes truncation bias";
pub const REPORT_SCHEMA: u32 = 1;

/// Window selection parameters; overrides bypass the heuristics.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WindowConfig<T> {
    pub kappa: T,
    pub points: usize,
    pub t_min: Option<T>,
    pub t_max: Option<T>,
}

impl<T: Real> Default for WindowConfig<T> {
    fn default() -> Self {
        Self { kappa: T::lit(DEFAULT_KAPPA), points: DEFAULT_GRID_POINTS, t_min: None, t_max: None }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FitWindow<T> {
    pub t_min: T,
    pub t_max: T,
    pub grid: Vec<T>,
}

/// Picks the fitting window `[κ/Λ, min(0.5/λ₁, 0.05·|Ω|)]` for `spectrum`.
pub fn choose_window<T: Real>(spectrum: &Spectrum<T>, config: &WindowConfig<T>) -> Result<FitWindow<T>> {
    if !(config.kappa > T::zero()) {
        return Err(Error::Domain(format!("kappa must be positive, got {}", config.kappa)));
    }
    if config.points < MIN_SAMPLES {
        return Err(Error::Domain(format!("window needs at least {MIN_SAMPLES} grid points, got {}", config.points)));
    }
    let eig = spectrum.complete_part();
    if eig.is_empty() {
        return Err(Error::EmptySpectrum("no eigenvalues below the completeness cutoff".into()));
    }
    let cutoff = spectrum.cutoff();
    let weyl_area = T::lit(4.0) * T::PI() * T::from_count(eig.len()) / cutoff;
    let heuristic_max = (T::lit(LAMBDA1_FRACTION) / spectrum.first()).min(T::lit(AREA_FRACTION) * weyl_area);
    let t_max = config.t_max.unwrap_or(heuristic_max);
    let t_min = config.t_min.unwrap_or(config.kappa / cutoff);
    if !(t_min > T::zero() && t_max > T::zero()) {
        return Err(Error::Domain(format!("window bounds must be positive, got [{t_min}, {t_max}]")));
    }
    if t_max < t_min * T::lit(MIN_WINDOW_RATIO) {
        let required = config.kappa * T::lit(MIN_WINDOW_RATIO) / t_max;
        return Err(Error::InsufficientSpectrum {
            reason: format!(
                "fit window [{:.3e}, {:.3e}] is narrower than a factor {MIN_WINDOW_RATIO} ({} eigenvalues up to {:.4e})",
                t_min.as_f64(),
                t_max.as_f64(),
                eig.len(),
                cutoff.as_f64()
            ),
            required_cutoff: required.as_f64(),
        });
    }
    let h_max = partial_trace(eig, t_max);
    if T::lit(1.0 / 6.0) < T::lit(A0_VISIBILITY) * h_max {
        return Err(Error::Fit(format!(
            "constant term is below {A0_VISIBILITY} of h(t_max) = {:.4e}; the domain is too elongated for this window",
            h_max.as_f64()
        )));
    }
    Ok(FitWindow { t_min, t_max, grid: geometric_grid(t_min, t_max, config.points) })
}

/// Which coefficients are free.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FitMode<T> {
    Blind,
    /// `a₋₁` and `a₋½` pinned to known geometry.
    Assisted { a_minus1: T, a_minus_half: T },
}

impl<T: Real> FitMode<T> {
    /// Pins the Weyl and Pleijel terms to `area` and `perimeter`.
    pub fn assisted(area: T, perimeter: T) -> Self {
        let four_pi = T::lit(4.0) * T::PI();
        Self::Assisted {
            a_minus1: area / four_pi,
            a_minus_half: -perimeter / (T::lit(8.0) * T::PI().sqrt()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Blind => "blind",
            Self::Assisted { .. } => "assisted",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelTerms<T> {
    pub mode: FitMode<T>,
    /// Adds a `t` term (sensitivity studies only).
    pub include_t: bool,
}

impl<T: Real> ModelTerms<T> {
    pub fn blind() -> Self {
        Self { mode: FitMode::Blind, include_t: false }
    }

    pub fn assisted(area: T, perimeter: T) -> Self {
        Self { mode: FitMode::assisted(area, perimeter), include_t: false }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Coefficients<T> {
    pub a_minus1: T,
    pub a_minus_half: T,
    pub a0: T,
    pub a_half: T,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a_one: Option<T>,
}

impl<T: Real> Coefficients<T> {
    pub fn evaluate(&self, t: T) -> T {
        let s = t.sqrt();
        self.a_minus1 / t + self.a_minus_half / s + self.a0 + self.a_half * s + self.a_one.map_or(T::zero(), |a| a * t)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticFit<T> {
    pub coefficients: Coefficients<T>,
    /// One standard deviation; pinned coefficients report zero.
    pub uncertainty: Coefficients<T>,
    pub t_min: T,
    pub t_max: T,
    pub samples: usize,
    pub max_rel_residual: T,
    pub rms_rel_residual: T,
    /// Condition number of the column-equilibrated weighted normal matrix.
    pub condition: T,
    pub mode: FitMode<T>,
}

impl<T: Real> AsymptoticFit<T> {
    pub fn a0(&self) -> T {
        self.coefficients.a0
    }

    pub fn a0_uncertainty(&self) -> T {
        self.uncertainty.a0
    }

    /// `4π·â₋₁`.
    pub fn area_estimate(&self) -> T {
        T::lit(4.0) * T::PI() * self.coefficients.a_minus1
    }

    /// `−8√π·â₋½`.
    pub fn perimeter_estimate(&self) -> T {
        -T::lit(8.0) * T::PI().sqrt() * self.coefficients.a_minus_half
    }

    pub fn model(&self, t: T) -> T {
        self.coefficients.evaluate(t)
    }
}

/// Fits the expansion to `samples` (all of them; window beforehand).
pub fn fit_expansion<T: Real>(samples: &TraceSamples<T>, terms: &ModelTerms<T>) -> Result<AsymptoticFit<T>> {
    let n = samples.len();
    if n < MIN_SAMPLES {
        return Err(Error::Fit(format!("{n} samples in the window, need at least {MIN_SAMPLES}")));
    }
    for i in 0..n {
        let (t, h, b) = (samples.grid[i], samples.values[i], samples.tail_bounds[i]);
        if !(h > T::zero()) || !h.is_finite() {
            return Err(Error::Fit(format!("nonpositive trace value {h} at t = {t}")));
        }
        if b > T::lit(MAX_TAIL_FRACTION) * h {
            return Err(Error::Fit(format!(
                "tail bound {:.3e} exceeds {MAX_TAIL_FRACTION} of h = {:.3e} at t = {:.3e}; raise t_min or the cutoff",
                b.as_f64(),
                h.as_f64(),
                t.as_f64()
            )));
        }
    }
    let t_min = samples.grid.iter().copied().fold(T::infinity(), T::min);
    let t_max = samples.grid.iter().copied().fold(T::neg_infinity(), T::max);
    if !(t_min < t_max) {
        return Err(Error::Fit("window collapses to a point".into()));
    }

    // Basis in τ = t/t_max; physical coefficients are rescaled afterwards.
    // Exponents of τ: −1, −½, 0, ½, 1.
    let all_powers = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let pinned = matches!(terms.mode, FitMode::Assisted { .. });
    let first = if pinned { 2 } else { 0 };
    let last = if terms.include_t { 5 } else { 4 };
    let powers = &all_powers[first..last];
    let p = powers.len();

    let mut design = Dense::zeros(n, p);
    let mut rhs = Vec::with_capacity(n);
    for i in 0..n {
        let t = samples.grid[i];
        let h = samples.values[i];
        let tau = t / t_max;
        let mut y = h;
        if let FitMode::Assisted { a_minus1, a_minus_half } = terms.mode {
            y -= a_minus1 / t + a_minus_half / t.sqrt();
        }
        let w = h.recip();
        for (j, &e) in powers.iter().enumerate() {
            design[(i, j)] = tau.powf(T::lit(e)) * w;
        }
        rhs.push(y * w);
    }
    // Column equilibration.
    let scales: Vec<T> = (0..p).map(|j| design.col(j).iter().map(|&v| v * v).sum::<T>().sqrt()).collect();
    for (j, &s) in scales.iter().enumerate() {
        for v in design.col_mut(j) {
            *v /= s;
        }
    }
    let ls = least_squares(design, rhs)?;
    let inv = normal_inverse(&ls.r);
    let mut normal: Dense<T> = Dense::zeros(p, p);
    for i in 0..p {
        for j in 0..p {
            normal[(i, j)] = (0..p).map(|k| ls.r[(k, i)] * ls.r[(k, j)]).sum();
        }
    }
    let ev = symmetric_eigenvalues(&normal);
    let condition = if ev[0] > T::zero() { ev[p - 1] / ev[0] } else { T::infinity() };
    if !(condition <= T::lit(MAX_CONDITION)) {
        return Err(Error::Fit(format!(
            "normal equations have condition {:.3e} > {MAX_CONDITION:e}; widen the window",
            condition.as_f64()
        )));
    }
    let dof = if n > p { T::from_count(n - p) } else { T::one() };
    let sigma2 = ls.residual_norm_sq / dof;

    // Back to physical units: c_j τ^e = (c_j t_max^{−e}) t^e.
    let mut values = [T::zero(); 5];
    let mut sigmas = [T::zero(); 5];
    for (j, &e) in powers.iter().enumerate() {
        let unit = t_max.powf(T::lit(-e)) / scales[j];
        values[first + j] = ls.solution[j] * unit;
        sigmas[first + j] = (sigma2 * inv[(j, j)]).max(T::zero()).sqrt() * unit.abs();
    }
    if let FitMode::Assisted { a_minus1, a_minus_half } = terms.mode {
        values[0] = a_minus1;
        values[1] = a_minus_half;
    }
    let coefficients = Coefficients {
        a_minus1: values[0],
        a_minus_half: values[1],
        a0: values[2],
        a_half: values[3],
        a_one: terms.include_t.then_some(values[4]),
    };
    let uncertainty = Coefficients {
        a_minus1: sigmas[0],
        a_minus_half: sigmas[1],
        a0: sigmas[2],
        a_half: sigmas[3],
        a_one: terms.include_t.then_some(sigmas[4]),
    };
    let mut max_rel = T::zero();
    let mut sum_sq = T::zero();
    for i in 0..n {
        let r = ((samples.values[i] - coefficients.evaluate(samples.grid[i])) / samples.values[i]).abs();
        max_rel = max_rel.max(r);
        sum_sq += r * r;
    }
    Ok(AsymptoticFit {
        coefficients,
        uncertainty,
        t_min,
        t_max,
        samples: n,
        max_rel_residual: max_rel,
        rms_rel_residual: (sum_sq / T::from_count(n)).sqrt(),
        condition,
        mode: terms.mode,
    })
}

/// Window, trace samples and fit for one spectrum.
#[derive(Clone, Debug)]
pub struct Pipeline<T> {
    pub window: FitWindow<T>,
    pub samples: TraceSamples<T>,
    pub fit: AsymptoticFit<T>,
}

/// Chooses the window, evaluates the trace and fits.
pub fn fit_spectrum<T: Real>(spectrum: &Spectrum<T>, window: &WindowConfig<T>, terms: &ModelTerms<T>) -> Result<Pipeline<T>> {
    let window = choose_window(spectrum, window)?;
    let samples = evaluate_trace(spectrum, &window.grid, None)?;
    let fit = fit_expansion(&samples, terms)?;
    Ok(Pipeline { window, samples, fit })
}

/// The same fit on `[t_min, t_max/2]`, for window-robustness checks.
pub fn half_window_fit<T: Real>(spectrum: &Spectrum<T>, pipeline: &Pipeline<T>, terms: &ModelTerms<T>) -> Result<AsymptoticFit<T>> {
    let half = pipeline.window.t_max * T::lit(0.5);
    let grid = geometric_grid(pipeline.window.t_min, half, pipeline.window.grid.len());
    let samples = evaluate_trace(spectrum, &grid, None)?;
    fit_expansion(&samples, terms)
}

/// Serializable summary of a fit, optionally compared with theory and
/// carrying a classifier verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitReport {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    #[serde(default)]
    pub inputs: BTreeMap<String, String>,
    pub window: WindowRecord,
    pub fit: FitRecord,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowRecord {
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitRecord {
    pub mode: String,
    pub coefficients: Coefficients<f64>,
    pub uncertainty: Coefficients<f64>,
    pub uncertainty_kind: String,
    pub max_rel_residual: f64,
    pub rms_rel_residual: f64,
    pub condition: f64,
    pub area_estimate: f64,
    pub perimeter_estimate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonRecord {
    pub a_minus1: f64,
    pub a_minus_half: f64,
    pub a0: f64,
    pub area: f64,
    pub perimeter: f64,
    pub euler_characteristic: i64,
    pub corner_count: usize,
    /// `(fitted − theoretical)/uncertainty`; absent for pinned coefficients.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_a_minus1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_a_minus_half: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_a0: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictRecord {
    pub decision: String,
    pub a0_estimate: f64,
    pub uncertainty: f64,
    pub threshold: f64,
    pub margin: f64,
    pub assumed_chi: i64,
    pub decision_z: f64,
    pub window_robust: bool,
    pub a0_half_window: f64,
}

fn z_score(fitted: f64, theory: f64, sigma: f64) -> Option<f64> {
    (sigma > 0.0).then(|| (fitted - theory) / sigma)
}

/// Builds the report for `fit`; the comparison block appears only when
/// `theoretical` is given.
pub fn fit_report<T: Real>(fit: &AsymptoticFit<T>, theoretical: Option<&TheoreticalCoefficients<T>>) -> FitReport {
    let c = |x: &Coefficients<T>| Coefficients {
        a_minus1: x.a_minus1.as_f64(),
        a_minus_half: x.a_minus_half.as_f64(),
        a0: x.a0.as_f64(),
        a_half: x.a_half.as_f64(),
        a_one: x.a_one.map(|v| v.as_f64()),
    };
    let coefficients = c(&fit.coefficients);
    let uncertainty = c(&fit.uncertainty);
    let comparison = theoretical.map(|th| ComparisonRecord {
        a_minus1: th.a_minus1.as_f64(),
        a_minus_half: th.a_minus_half.as_f64(),
        a0: th.a0.as_f64(),
        area: th.area.as_f64(),
        perimeter: th.perimeter.as_f64(),
        euler_characteristic: th.euler_characteristic,
        corner_count: th.corners.len(),
        z_a_minus1: z_score(coefficients.a_minus1, th.a_minus1.as_f64(), uncertainty.a_minus1),
        z_a_minus_half: z_score(coefficients.a_minus_half, th.a_minus_half.as_f64(), uncertainty.a_minus_half),
        z_a0: z_score(coefficients.a0, th.a0.as_f64(), uncertainty.a0),
    });
    FitReport {
        schema: REPORT_SCHEMA,
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        inputs: BTreeMap::new(),
        window: WindowRecord { t_min: fit.t_min.as_f64(), t_max: fit.t_max.as_f64(), samples: fit.samples },
        fit: FitRecord {
            mode: fit.mode.name().to_string(),
            coefficients,
            uncertainty,
            uncertainty_kind: UNCERTAINTY_NOTE.to_string(),
            max_rel_residual: fit.max_rel_residual.as_f64(),
            rms_rel_residual: fit.rms_rel_residual.as_f64(),
            condition: fit.condition.as_f64(),
            area_estimate: fit.area_estimate().as_f64(),
            perimeter_estimate: fit.perimeter_estimate().as_f64(),
        },
        comparison,
        verdict: None,
    }
}

impl FitReport {
    pub fn with_input(mut self, name: impl Into<String>, digest: impl Into<String>) -> Self {
        self.inputs.insert(name.into(), digest.into());
        self
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::numeric("report serialization", e.to_string()))
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let report: Self = toml::from_str(text).map_err(|e| Error::parse("report", e.to_string()))?;
        if report.schema != REPORT_SCHEMA {
            return Err(Error::parse("report", format!("unsupported schema {}", report.schema)));
        }
        Ok(report)
    }
}
