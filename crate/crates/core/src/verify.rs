//! The bundled corpus and the self-verification table behind `verify`.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analytic_spectra::{detect_reference_family, disk_spectrum, rectangle_spectrum};
use crate::asymptotic_fit::{fit_spectrum, half_window_fit, ModelTerms, WindowConfig};
use crate::classifier::{a0_identity, classify, decide, f_corner, isospectral_compare, ClassifierConfig, Decision};
use crate::error::{Error, Result};
use crate::fem::{assemble, fem_spectrum, mesh_domain, solve_lowest, EigenOptions, FemOptions, MeshOptions};
use crate::geometry::{area, detect_corners, gauss_bonnet_check, perimeter, shapes, DomainSpec, Segment, DEFAULT_ANGLE_TOL};
use crate::heat_trace::theoretical_coefficients;
use crate::io::{domain_to_toml, parse_domain};
use crate::spectrum::Spectrum;

/// Domain files shipped with the crate, by name.
pub const CORPUS: &[(&str, &str)] = &[
    ("square", include_str!("../../../corpus/square.toml")),
    ("rectangle-2x1", include_str!("../../../corpus/rectangle-2x1.toml")),
    ("disk", include_str!("../../../corpus/disk.toml")),
    ("quarter-disk", include_str!("../../../corpus/quarter-disk.toml")),
    ("half-disk", include_str!("../../../corpus/half-disk.toml")),
    ("equilateral-triangle", include_str!("../../../corpus/equilateral-triangle.toml")),
    ("l-shape", include_str!("../../../corpus/l-shape.toml")),
    ("square-with-hole", include_str!("../../../corpus/square-with-hole.toml")),
    ("ellipse", include_str!("../../../corpus/ellipse.toml")),
    ("bezier-lens", include_str!("../../../corpus/bezier-lens.toml")),
    ("gww-drum-a", include_str!("../../../corpus/gww-drum-a.toml")),
    ("gww-drum-b", include_str!("../../../corpus/gww-drum-b.toml")),
];

pub fn corpus_domain(name: &str) -> Result<DomainSpec<f64>> {
    let (_, text) = CORPUS
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::Domain(format!("no corpus domain named {name:?}")))?;
    parse_domain(text, name)
}

/// Spectral cutoff used for each analytic corpus domain.
pub fn corpus_cutoff(name: &str) -> f64 {
    match name {
        "square" | "equilateral-triangle" => 2e5,
        _ => 1e5,
    }
}

/// FEM settings of the L-shape cross-check (finest mesh size, mode count).
pub const LSHAPE_FEM_H: f64 = 0.015;
pub const LSHAPE_FEM_COUNT: usize = 500;

/// FEM settings of the isospectral drum check.
pub const DRUM_FEM_H: f64 = 0.02;
pub const DRUM_MODES: usize = 20;

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyConfig {
    /// Runs rows whose group or full name starts with this string.
    pub filter: Option<String>,
    pub seed: u64,
    /// Fault injection: added to every fitted `â₀` before classification.
    pub a0_shift: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { filter: None, seed: 2024, a0_shift: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub group: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Row {
    pub fn id(&self) -> String {
        format!("{}/{}", self.group, self.name)
    }
}

struct Ctx {
    config: VerifyConfig,
    spectra: RefCell<BTreeMap<String, Spectrum<f64>>>,
}

impl Ctx {
    fn analytic(&self, name: &str) -> Result<Spectrum<f64>> {
        if let Some(s) = self.spectra.borrow().get(name) {
            return Ok(s.clone());
        }
        let domain = corpus_domain(name)?;
        let family = detect_reference_family(&domain).ok_or_else(|| Error::Domain(format!("{name} has no closed-form spectrum")))?;
        let s = family.spectrum(corpus_cutoff(name))?;
        self.spectra.borrow_mut().insert(name.into(), s.clone());
        Ok(s)
    }

    fn lshape_fem(&self) -> Result<Spectrum<f64>> {
        if let Some(s) = self.spectra.borrow().get("l-shape") {
            return Ok(s.clone());
        }
        let s = fem_spectrum(&corpus_domain("l-shape")?, &FemOptions::new(LSHAPE_FEM_H, LSHAPE_FEM_COUNT))?.spectrum;
        self.spectra.borrow_mut().insert("l-shape".into(), s.clone());
        Ok(s)
    }

    fn spectrum(&self, name: &str) -> Result<Spectrum<f64>> {
        if name == "l-shape" {
            self.lshape_fem()
        } else {
            self.analytic(name)
        }
    }
}

type Check = fn(&Ctx, &str) -> Result<(bool, String)>;

fn exact_segments(d: &DomainSpec<f64>) -> bool {
    d.loops().iter().flat_map(|l| &l.segments).all(|s| !matches!(s, Segment::Parametric(_)))
}

fn gauss_bonnet(_: &Ctx, name: &str) -> Result<(bool, String)> {
    let d = corpus_domain(name)?;
    let r = gauss_bonnet_check(&d)?;
    let tol = if exact_segments(&d) { 1e-8 } else { 1e-7 };
    Ok((r <= tol, format!("residual {r:.2e} (tolerance {tol:.0e})")))
}

fn corners(_: &Ctx, name: &str) -> Result<(bool, String)> {
    let d = corpus_domain(name)?;
    let mut got: Vec<f64> = detect_corners(&d, DEFAULT_ANGLE_TOL)?.iter().map(|c| c.theta / PI).collect();
    got.sort_by(f64::total_cmp);
    let want: &[f64] = match name {
        "square" | "rectangle-2x1" => &[0.5; 4],
        "l-shape" => &[0.5, 0.5, 0.5, 0.5, 0.5, 1.5],
        "equilateral-triangle" => &[1.0 / 3.0; 3],
        "quarter-disk" => &[0.5; 3],
        "half-disk" => &[0.5, 0.5],
        "gww-drum-a" | "gww-drum-b" => &[0.25, 0.25, 0.5, 0.5, 0.75, 0.75, 1.5, 1.5],
        "disk" | "ellipse" => &[],
        _ => return Err(Error::Domain(format!("no corner table for {name}"))),
    };
    let ok = got.len() == want.len() && got.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12);
    Ok((ok, format!("θ/π = {got:.6?}")))
}

fn area_perimeter(_: &Ctx, name: &str) -> Result<(bool, String)> {
    let d = corpus_domain(name)?;
    let (a, p) = (area(&d)?, perimeter(&d)?);
    let (wa, wp) = match name {
        "square" => (1.0, 4.0),
        "disk" => (PI, 2.0 * PI),
        "quarter-disk" => (PI / 4.0, 2.0 + FRAC_PI_2),
        "square-with-hole" => (0.75, 6.0),
        _ => return Err(Error::Domain(format!("no area table for {name}"))),
    };
    let ok = (a - wa).abs() <= 1e-12 * wa && (p - wp).abs() <= 1e-12 * wp;
    Ok((ok, format!("area {a:.15} perimeter {p:.15}")))
}

fn corpus_round_trip(_: &Ctx, _: &str) -> Result<(bool, String)> {
    let mut bad = Vec::new();
    for (name, _) in CORPUS {
        let d = corpus_domain(name)?;
        if parse_domain(&domain_to_toml(&d)?, name)? != d {
            bad.push(*name);
        }
    }
    Ok((bad.is_empty(), format!("{} files, mismatches {bad:?}", CORPUS.len())))
}

fn weyl_count(_: &Ctx, _: &str) -> Result<(bool, String)> {
    let cutoff = 2e5;
    let n = rectangle_spectrum(1.0, 1.0, cutoff)?.len();
    // Lattice points m, n ≥ 1 with π²(m² + n²) ≤ Λ, counted column by column.
    let r2 = cutoff / (PI * PI);
    let lattice: usize = (1..).take_while(|&m| (m * m) as f64 <= r2).map(|m| ((r2 - (m * m) as f64).sqrt().floor()) as usize).sum();
    let weyl = cutoff / (4.0 * PI) - 4.0 * cutoff.sqrt() / (4.0 * PI);
    Ok((n == lattice, format!("{n} eigenvalues below 2e5, lattice count {lattice}, two-term Weyl {weyl:.1}")))
}

fn monotonicity(_: &Ctx, _: &str) -> Result<(bool, String)> {
    let nested = [((1.0, 1.0), (1.2, 1.1)), ((2.0, 1.0), (2.0, 1.5)), ((1.0, 0.5), (3.0, 0.5))];
    let mut violations = 0;
    for ((ai, bi), (ao, bo)) in nested {
        let inner = rectangle_spectrum(ai, bi, 2e4)?;
        let outer = rectangle_spectrum(ao, bo, 2e4)?;
        if inner.len() < 200 || outer.len() < 200 {
            return Err(Error::Consistency("fewer than 200 modes below the cutoff".into()));
        }
        violations += (0..200).filter(|&k| outer.eigenvalues()[k] > inner.eigenvalues()[k]).count();
    }
    Ok((violations == 0, format!("{} nested pairs, 200 modes each, {violations} violations", nested.len())))
}

fn disk_first_zero(_: &Ctx, _: &str) -> Result<(bool, String)> {
    let l = disk_spectrum(1.0, 10.0)?.first();
    let j01 = 2.404_825_557_695_773_f64;
    Ok(((l - j01 * j01).abs() <= 1e-12 * l, format!("λ₁ = {l:.15}")))
}

fn a0_truth(name: &str) -> f64 {
    match name {
        "square" | "rectangle-2x1" => 0.25,
        "disk" => 1.0 / 6.0,
        "quarter-disk" => 11.0 / 48.0,
        "half-disk" => 5.0 / 24.0,
        "equilateral-triangle" => 1.0 / 3.0,
        "l-shape" => 5.0 / 18.0,
        _ => f64::NAN,
    }
}

fn a0_recovery(ctx: &Ctx, name: &str) -> Result<(bool, String)> {
    let s = ctx.analytic(name)?;
    let fit = fit_spectrum(&s, &WindowConfig::default(), &ModelTerms::blind())?.fit;
    let err = (fit.a0() - a0_truth(name)).abs();
    Ok((err <= 0.01, format!("â₀ = {:.5} ± {:.1e}, error {err:.2e} (tolerance 1e-2)", fit.a0(), fit.a0_uncertainty())))
}

fn weyl_coefficients(ctx: &Ctx, name: &str) -> Result<(bool, String)> {
    let d = corpus_domain(name)?;
    let fit = fit_spectrum(&ctx.analytic(name)?, &WindowConfig::default(), &ModelTerms::blind())?.fit;
    let ea = (fit.area_estimate() / area(&d)? - 1.0).abs();
    let ep = (fit.perimeter_estimate() / perimeter(&d)? - 1.0).abs();
    Ok((ea <= 5e-3 && ep <= 1e-2, format!("area error {ea:.2e}, perimeter error {ep:.2e}")))
}

fn fem_square(_: &Ctx, _: &str) -> Result<(bool, String)> {
    let mesh = mesh_domain(&shapes::rectangle(1.0, 1.0)?, &MeshOptions::new(0.02))?;
    let l = solve_lowest(&assemble(&mesh)?, &EigenOptions::new(10))?.values[0];
    let rel = l / (2.0 * PI * PI) - 1.0;
    Ok(((0.0..=3e-3).contains(&rel), format!("λ₁ʰ/2π² − 1 = {rel:.2e}")))
}

fn fem_lshape(ctx: &Ctx, _: &str) -> Result<(bool, String)> {
    let s = ctx.lshape_fem()?;
    let fit = fit_spectrum(&s, &WindowConfig::default(), &ModelTerms::assisted(3.0, 8.0))?.fit;
    let err = (fit.a0() - 5.0 / 18.0).abs();
    Ok((err <= 0.05, format!("{} modes to Λ = {:.1}, assisted â₀ = {:.5}, error {err:.2e} (tolerance 5e-2)", s.complete_part().len(), s.cutoff(), fit.a0())))
}

fn isospectral_drums(_: &Ctx, _: &str) -> Result<(bool, String)> {
    let opts = FemOptions::new(DRUM_FEM_H, DRUM_MODES);
    let a = fem_spectrum(&corpus_domain("gww-drum-a")?, &opts)?.spectrum;
    let b = fem_spectrum(&corpus_domain("gww-drum-b")?, &opts)?.spectrum;
    let c = isospectral_compare(&a, &b, DRUM_MODES, 1e-2)?;
    Ok((c.isospectral, format!("{DRUM_MODES} modes, max deviation {:.1e} at mode {}", c.max_deviation, c.worst_mode)))
}

fn classifier_row(ctx: &Ctx, name: &str) -> Result<(bool, String)> {
    let s = ctx.spectrum(name)?;
    let terms = ModelTerms::blind();
    let pipeline = fit_spectrum(&s, &WindowConfig::default(), &terms)?;
    let mut half = half_window_fit(&s, &pipeline, &terms)?;
    let mut fit = pipeline.fit;
    fit.coefficients.a0 += ctx.config.a0_shift;
    half.coefficients.a0 += ctx.config.a0_shift;
    let v = decide(fit, &half, 1, 3.0)?;
    let ok = match name {
        "disk" => v.decision != Decision::HasCorners,
        _ => v.decision == Decision::HasCorners,
    };
    Ok((ok, format!("{} (â₀ = {:.5}, margin {:.1})", v.decision, v.a0_estimate, v.margin)))
}

fn scale_invariance(ctx: &Ctx, _: &str) -> Result<(bool, String)> {
    let s = ctx.analytic("square")?;
    let cfg = ClassifierConfig::default();
    let (a, b) = (classify(&s, &cfg)?, classify(&s.dilated(2.0), &cfg)?);
    let ok = a.decision == b.decision && (a.a0_estimate - b.a0_estimate).abs() <= 1e-9;
    Ok((ok, format!("â₀ {:.9} vs {:.9} after dilation by 2", a.a0_estimate, b.a0_estimate)))
}

fn random_polygons(ctx: &Ctx) -> Vec<DomainSpec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.config.seed);
    (0..500)
        .map(|_| {
            let n = rng.gen_range(3..=12);
            shapes::random_star_polygon(&mut rng, n).expect("star polygons are simple")
        })
        .collect()
}

fn corner_bound(ctx: &Ctx, _: &str) -> Result<(bool, String)> {
    let mut violations = 0;
    let mut min_gap = f64::INFINITY;
    for d in random_polygons(ctx) {
        let th = theoretical_coefficients(&d)?;
        let x: Vec<f64> = th.corners.iter().map(|c| c.theta / PI).collect();
        let f = f_corner(&x)?;
        let any_off = x.iter().any(|&xk| xk != 1.0);
        if !(th.a0 > 1.0 / 6.0) || (any_off && !(f > 2.0 * x.len() as f64)) {
            violations += 1;
        }
        min_gap = min_gap.min(th.a0 - 1.0 / 6.0);
    }
    Ok((violations == 0, format!("500 polygons (seed {}), {violations} violations, min a₀ − 1/6 = {min_gap:.3e}", ctx.config.seed)))
}

fn identity(ctx: &Ctx, _: &str) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for d in random_polygons(ctx) {
        let th = theoretical_coefficients(&d)?;
        let x: Vec<f64> = th.corners.iter().map(|c| c.theta / PI).collect();
        worst = worst.max((a0_identity(1, &x)? - th.a0).abs());
    }
    Ok((worst <= 1e-12, format!("max |identity − a₀| = {worst:.2e}")))
}

fn table() -> Vec<(&'static str, String, Check)> {
    let mut t: Vec<(&'static str, String, Check)> = Vec::new();
    for (name, _) in CORPUS {
        t.push(("geometry", format!("gauss-bonnet/{name}"), gauss_bonnet));
    }
    for name in ["square", "l-shape", "equilateral-triangle", "quarter-disk", "half-disk", "disk", "ellipse", "gww-drum-a", "gww-drum-b"] {
        t.push(("geometry", format!("corners/{name}"), corners));
    }
    for name in ["square", "disk", "quarter-disk", "square-with-hole"] {
        t.push(("geometry", format!("area-perimeter/{name}"), area_perimeter));
    }
    t.push(("geometry", "corpus-round-trip".into(), corpus_round_trip));
    t.push(("analytic", "weyl-count/square".into(), weyl_count));
    t.push(("analytic", "monotonicity/rectangles".into(), monotonicity));
    t.push(("analytic", "first-zero/disk".into(), disk_first_zero));
    for name in ["square", "disk", "quarter-disk", "equilateral-triangle"] {
        t.push(("fit", format!("a0/{name}"), a0_recovery));
        t.push(("fit", format!("area-perimeter/{name}"), weyl_coefficients));
    }
    t.push(("fem", "lambda1/square".into(), fem_square));
    t.push(("fem", "a0-assisted/l-shape".into(), fem_lshape));
    t.push(("fem", "isospectral/gww-drums".into(), isospectral_drums));
    for name in ["square", "rectangle-2x1", "equilateral-triangle", "quarter-disk", "half-disk", "l-shape", "disk"] {
        t.push(("classifier", name.to_string(), classifier_row));
    }
    t.push(("properties", "scale-invariance/square".into(), scale_invariance));
    t.push(("properties", "corner-bound/random-polygons".into(), corner_bound));
    t.push(("properties", "a0-identity/random-polygons".into(), identity));
    t
}

/// Names of every row, in execution order.
pub fn row_ids() -> Vec<String> {
    table().into_iter().map(|(g, n, _)| format!("{g}/{n}")).collect()
}

/// A filter is a comma-separated list of groups or row-id prefixes.
pub fn filter_matches(filter: &str, id: &str) -> bool {
    let group = id.split('/').next().unwrap_or(id);
    filter.split(',').map(str::trim).filter(|f| !f.is_empty()).any(|f| group == f || id.starts_with(f))
}

fn selected(filter: &Option<String>, id: &str) -> bool {
    filter.as_deref().is_none_or(|f| filter_matches(f, id))
}

/// Runs the selected rows. Errors inside a row count as failures.
pub fn run(config: &VerifyConfig) -> Vec<Row> {
    let ctx = Ctx { config: config.clone(), spectra: RefCell::new(BTreeMap::new()) };
    let mut rows = Vec::new();
    for (group, name, check) in table() {
        let id = format!("{group}/{name}");
        if !selected(&config.filter, &id) {
            continue;
        }
        let arg = name.rsplit('/').next().expect("nonempty").to_string();
        let start = Instant::now();
        let (passed, detail) = match check(&ctx, &arg) {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        rows.push(Row { group, name, passed, detail, seconds: start.elapsed().as_secs_f64() });
    }
    rows
}

/// Human-readable table followed by a machine-readable failure line.
pub fn render(rows: &[Row]) -> String {
    use std::fmt::Write;
    let width = rows.iter().map(|r| r.id().len()).max().unwrap_or(0);
    let mut out = String::new();
    for r in rows {
        let _ = writeln!(out, "{} {:<width$} {:>8.2}s  {}", if r.passed { "PASS" } else { "FAIL" }, r.id(), r.seconds, r.detail);
    }
    let failed: Vec<String> = rows.iter().filter(|r| !r.passed).map(Row::id).collect();
    let _ = writeln!(out, "summary: {} passed, {} failed", rows.len() - failed.len(), failed.len());
    let _ = writeln!(out, "failures: {}", failed.join(","));
    out
}
