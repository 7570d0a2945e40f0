// One line per acceptance criterion; exits nonzero if any fails.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use spectral_corners::analytic_spectra::{
    disk_spectrum, equilateral_triangle_spectrum, rectangle_spectrum, sector_spectrum,
};
use spectral_corners::asymptotic_fit::{fit_spectrum, ModelTerms};
use spectral_corners::classifier::{classify, Decision};
use spectral_corners::fem::{fem_spectrum, FemOptions};
use spectral_corners::geometry::{gauss_bonnet_check, shapes, Segment};
use spectral_corners::heat_trace::theoretical_coefficients;
use spectral_corners::io::read_domain;
use spectral_corners::{AsymptoticFit, ClassifierConfig, Domain, Spectrum, WindowConfig};

type Outcome = Result<(bool, String), String>;

struct Recovery {
    name: &'static str,
    spectrum: Spectrum,
    fit: AsymptoticFit,
    elapsed: Duration,
}

fn blind(name: &'static str, build: impl FnOnce() -> spectral_corners::Result<Spectrum>) -> Result<Recovery, String> {
    let start = Instant::now();
    let spectrum = build().map_err(|e| format!("{name}: {e}"))?;
    let fit = fit_spectrum(&spectrum, &WindowConfig::default(), &ModelTerms::blind()).map_err(|e| format!("{name}: {e}"))?.fit;
    Ok(Recovery { name, spectrum, fit, elapsed: start.elapsed() })
}

fn recovery(r: &Result<Recovery, String>, truth: f64, limit: Duration) -> Outcome {
    let r = r.as_ref().map_err(Clone::clone)?;
    let err = (r.fit.a0() - truth).abs();
    let ok = err <= 0.01 && r.elapsed <= limit;
    Ok((
        ok,
        format!(
            "{}: {} eigenvalues, â₀ = {:.5} (truth {truth:.5}, error {err:.1e} ≤ 1e-2), {:.2} s ≤ {} s",
            r.name,
            r.spectrum.len(),
            r.fit.a0(),
            r.elapsed.as_secs_f64(),
            limit.as_secs()
        ),
    ))
}

// Lattice count of π²(m² + n²) ≤ Λ for the unit square, as an independent check on completeness.
fn square_lattice_count(cutoff: f64) -> usize {
    let r2 = cutoff / (PI * PI);
    let mut count = 0;
    let mut m = 1usize;
    while (m * m) as f64 <= r2 {
        let mut n = 1usize;
        while ((m * m + n * n) as f64) <= r2 {
            count += 1;
            n += 1;
        }
        m += 1;
    }
    count
}

fn criterion5(lshape: &Result<(Spectrum, Duration), String>) -> Outcome {
    let (s, elapsed) = lshape.as_ref().map_err(Clone::clone)?;
    // L-shape of unit 1: three unit squares, perimeter 8.
    let fit = fit_spectrum(s, &WindowConfig::default(), &ModelTerms::assisted(3.0, 8.0)).map_err(|e| e.to_string())?.fit;
    let err = (fit.a0() - 5.0 / 18.0).abs();
    let ok = err <= 0.05 && *elapsed <= Duration::from_secs(600);
    Ok((
        ok,
        format!(
            "l-shape FEM: {} complete modes to Λ = {:.0}, assisted â₀ = {:.5} (truth 5/18, error {err:.1e} ≤ 5e-2), {:.0} s ≤ 600 s",
            s.complete_part().len(),
            s.cutoff(),
            fit.a0(),
            elapsed.as_secs_f64()
        ),
    ))
}

fn criterion6(recoveries: &[&Result<Recovery, String>], lshape: &Result<(Spectrum, Duration), String>) -> Outcome {
    let mut spectra: Vec<(&str, Spectrum, bool)> = Vec::new();
    for r in recoveries {
        let r = r.as_ref().map_err(Clone::clone)?;
        spectra.push((r.name, r.spectrum.clone(), r.name != "disk"));
    }
    let extra = [
        ("rectangle-2x1", rectangle_spectrum(2.0, 1.0, 1e5)),
        ("half-disk", sector_spectrum(PI, 1.0, 1e5)),
    ];
    for (name, s) in extra {
        spectra.push((name, s.map_err(|e| e.to_string())?, true));
    }
    spectra.push(("l-shape", lshape.as_ref().map_err(Clone::clone)?.0.clone(), true));
    let cfg = ClassifierConfig::default();
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, s, cornered) in &spectra {
        let v = classify(s, &cfg).map_err(|e| format!("{name}: {e}"))?;
        let right = if *cornered { v.decision == Decision::HasCorners } else { v.decision != Decision::HasCorners };
        ok &= right;
        parts.push(format!("{name} {}{}", v.decision, if right { "" } else { " (wrong)" }));
    }
    Ok((ok, parts.join(", ")))
}

// Interior angles of a counterclockwise polygon, from its vertices alone.
fn polygon_angles(d: &Domain) -> Vec<f64> {
    let v: Vec<_> = d.loops()[0].segments.iter().map(Segment::start).collect();
    let n = v.len();
    (0..n)
        .map(|i| {
            let a = v[i] - v[(i + n - 1) % n];
            let b = v[(i + 1) % n] - v[i];
            PI - a.cross(b).atan2(a.dot(b))
        })
        .collect()
}

fn criterion7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut violations = 0;
    let mut mismatch = 0.0f64;
    let mut min_gap = f64::INFINITY;
    for _ in 0..500 {
        let n = rng.gen_range(3..=12);
        let d = shapes::random_star_polygon(&mut rng, n).map_err(|e| e.to_string())?;
        let x: Vec<f64> = polygon_angles(&d).iter().map(|t| t / PI).collect();
        let f: f64 = x.iter().map(|&x| 1.0 / x + x).sum();
        let oracle = f / 24.0 - n as f64 / 12.0 + 1.0 / 6.0;
        let a0 = theoretical_coefficients(&d).map_err(|e| e.to_string())?.a0;
        mismatch = mismatch.max((a0 - oracle).abs());
        min_gap = min_gap.min(a0 - 1.0 / 6.0);
        let off = x.iter().any(|&x| x != 1.0);
        if !(a0 > 1.0 / 6.0) || (off && !(f > 2.0 * n as f64)) {
            violations += 1;
        }
    }
    Ok((
        violations == 0 && mismatch <= 1e-12,
        format!("500 random polygons: {violations} violations, min a₀ − 1/6 = {min_gap:.2e}, max |a₀ − angle oracle| = {mismatch:.1e}"),
    ))
}

fn criterion8() -> Outcome {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus");
    let mut paths: Vec<PathBuf> = std::fs::read_dir(&dir)
        .map_err(|e| format!("{}: {e}", dir.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    let mut worst = 0.0f64;
    let mut checked = 0;
    for p in &paths {
        let d = read_domain(p).map_err(|e| e.to_string())?;
        if d.loops().iter().flat_map(|l| &l.segments).any(|s| matches!(s, Segment::Parametric(_))) {
            continue;
        }
        worst = worst.max(gauss_bonnet_check(&d).map_err(|e| e.to_string())?);
        checked += 1;
    }
    Ok((checked >= 7 && worst <= 1e-8, format!("{checked} exact-segment corpus domains, max residual {worst:.1e} ≤ 1e-8")))
}

fn criterion9() -> Outcome {
    let nested = [((1.0, 1.0), (1.2, 1.1)), ((2.0, 1.0), (2.0, 1.5)), ((1.0, 0.5), (3.0, 0.5)), ((0.7, 0.7), (0.7001, 0.9))];
    let mut violations = 0;
    let mut checked = 0;
    for ((ai, bi), (ao, bo)) in nested {
        let inner = rectangle_spectrum(ai, bi, 3e4).map_err(|e| e.to_string())?;
        let outer = rectangle_spectrum(ao, bo, 3e4).map_err(|e| e.to_string())?;
        if inner.len() < 200 || outer.len() < 200 {
            return Err("fewer than 200 modes below the cutoff".into());
        }
        violations += (0..200).filter(|&k| outer.eigenvalues()[k] > inner.eigenvalues()[k]).count();
        checked += 1;
    }
    Ok((violations == 0, format!("{checked} nested rectangle pairs, 200 modes each, {violations} violations")))
}

fn criterion10(recoveries: &[(&Result<Recovery, String>, f64, f64)]) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (r, area, perimeter) in recoveries {
        let r = r.as_ref().map_err(Clone::clone)?;
        let ea = (r.fit.area_estimate() / area - 1.0).abs();
        let ep = (r.fit.perimeter_estimate() / perimeter - 1.0).abs();
        ok &= ea <= 5e-3 && ep <= 1e-2;
        parts.push(format!("{} area {ea:.1e} perimeter {ep:.1e}", r.name));
    }
    Ok((ok, format!("relative errors (≤ 5e-3, ≤ 1e-2): {}", parts.join(", "))))
}

fn report(id: usize, outcome: Outcome) -> bool {
    let (ok, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    println!("criterion {id:>2}: {} — {detail}", if ok { "PASS" } else { "FAIL" });
    ok
}

fn main() {
    let square = blind("square", || {
        let s = rectangle_spectrum(1.0, 1.0, 2e5)?;
        let lattice = square_lattice_count(2e5);
        if s.len() != lattice {
            return Err(spectral_corners::Error::Consistency(format!("{} eigenvalues, lattice count {lattice}", s.len())));
        }
        Ok(s)
    });
    let disk = blind("disk", || disk_spectrum(1.0, 1e5));
    let quarter = blind("quarter-disk", || sector_spectrum(PI / 2.0, 1.0, 1e5));
    let triangle = blind("equilateral-triangle", || equilateral_triangle_spectrum(1.0, 2e5));

    let mut all = true;
    all &= report(1, recovery(&square, 0.25, Duration::from_secs(10)));
    all &= report(2, recovery(&disk, 1.0 / 6.0, Duration::from_secs(60)));
    all &= report(3, recovery(&quarter, 11.0 / 48.0, Duration::from_secs(60)));
    all &= report(4, recovery(&triangle, 1.0 / 3.0, Duration::from_secs(60)));

    let start = Instant::now();
    let lshape = shapes::l_shape(1.0)
        .and_then(|d| fem_spectrum(&d, &FemOptions::new(0.015, 500)))
        .map(|r| (r.spectrum, start.elapsed()))
        .map_err(|e| e.to_string());
    all &= report(5, criterion5(&lshape));
    all &= report(6, criterion6(&[&square, &triangle, &quarter, &disk], &lshape));
    all &= report(7, criterion7());
    all &= report(8, criterion8());
    all &= report(9, criterion9());
    all &= report(
        10,
        criterion10(&[
            (&square, 1.0, 4.0),
            (&disk, PI, 2.0 * PI),
            (&quarter, PI / 4.0, 2.0 + PI / 2.0),
            (&triangle, 3f64.sqrt() / 4.0, 3.0),
        ]),
    );
    if !all {
        std::process::exit(1);
    }
}
