//! Exact Dirichlet spectra of reference domains.
//!
//! Every constructor lists all eigenvalues up to the requested cutoff with
//! multiplicity, so the result is complete below the cutoff.

use rayon::prelude::*;

use crate::bessel;
use crate::error::{Error, Result};
use crate::geometry::{DomainSpec, Segment, Vec2};
use crate::scalar::Real;
use crate::spectrum::{Spectrum, SpectrumSource};

fn check_positive<T: Real>(name: &str, v: T) -> Result<()> {
    if v > T::zero() && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive and finite, got {v}")))
    }
}

fn sort_values<T: Real>(v: &mut [T]) {
    v.par_sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite eigenvalue"));
}

fn finish<T: Real>(mut values: Vec<T>, cutoff: T, label: String, area: T) -> Result<Spectrum<T>> {
    if values.is_empty() {
        return Err(Error::EmptySpectrum(format!("cutoff {cutoff} lies below the first eigenvalue of {label}")));
    }
    sort_values(&mut values);
    Ok(Spectrum::new(values, cutoff, SpectrumSource::Analytic, label)?.with_area_hint(area))
}

/// `π²(m²/a² + n²/b²)` for `m, n ≥ 1`.
pub fn rectangle_spectrum<T: Real>(a: T, b: T, cutoff: T) -> Result<Spectrum<T>> {
    check_positive("side a", a)?;
    check_positive("side b", b)?;
    let pi2 = T::PI() * T::PI();
    let mut values = Vec::new();
    let mut m = 1usize;
    loop {
        let mm = T::from_count(m * m) / (a * a);
        if pi2 * (mm + (b * b).recip()) > cutoff {
            break;
        }
        let mut n = 1usize;
        loop {
            let lam = pi2 * (mm + T::from_count(n * n) / (b * b));
            if lam > cutoff {
                break;
            }
            values.push(lam);
            n += 1;
        }
        m += 1;
    }
    finish(values, cutoff, format!("rectangle {a}x{b}"), a * b)
}

/// Disk of radius `r`: `(j_{ν,k}/r)²`, orders `ν ≥ 1` counted twice.
pub fn disk_spectrum<T: Real>(r: T, cutoff: T) -> Result<Spectrum<T>> {
    check_positive("radius", r)?;
    check_positive("cutoff", cutoff)?;
    let x_max = r * cutoff.sqrt();
    let top = x_max.floor().to_usize().unwrap_or(0);
    let orders: Vec<T> = (0..=top).map(T::from_count).collect();
    let zeros = bessel::zeros_for_orders(&orders, x_max)?;
    let mut values = Vec::new();
    for (nu, zs) in zeros.iter().enumerate() {
        for &j in zs {
            let lam = (j / r) * (j / r);
            if lam <= cutoff {
                values.push(lam);
                if nu > 0 {
                    values.push(lam);
                }
            }
        }
    }
    finish(values, cutoff, format!("disk r={r}"), T::PI() * r * r)
}

/// Circular sector of opening `theta` and radius `r`: `(j_{mπ/θ,k}/r)²`, `m, k ≥ 1`.
pub fn sector_spectrum<T: Real>(theta: T, r: T, cutoff: T) -> Result<Spectrum<T>> {
    if !(theta > T::zero() && theta < T::TAU()) {
        return Err(Error::Domain(format!("sector opening must lie in (0, 2π), got {theta}")));
    }
    check_positive("radius", r)?;
    check_positive("cutoff", cutoff)?;
    let x_max = r * cutoff.sqrt();
    let step = T::PI() / theta;
    let mut orders = Vec::new();
    let mut m = 1usize;
    while step * T::from_count(m) < x_max {
        orders.push(step * T::from_count(m));
        m += 1;
    }
    let zeros = bessel::zeros_for_orders(&orders, x_max)?;
    let values = zeros
        .iter()
        .flatten()
        .map(|&j| (j / r) * (j / r))
        .filter(|&l| l <= cutoff)
        .collect();
    finish(values, cutoff, format!("sector theta={theta} r={r}"), theta * r * r * T::lit(0.5))
}

/// Equilateral triangle of side `side`.
///
/// Eigenvalues are `16π²/(9·side²)·(m² + mn + n²)` over all ordered pairs
/// `m, n ≥ 1`; each ordered pair carries one eigenfunction, so `m ≠ n` levels
/// are doubly degenerate and `m = n` levels simple.
pub fn equilateral_triangle_spectrum<T: Real>(side: T, cutoff: T) -> Result<Spectrum<T>> {
    check_positive("side", side)?;
    let scale = T::lit(16.0) * T::PI() * T::PI() / (T::lit(9.0) * side * side);
    let mut values = Vec::new();
    let mut m = 1usize;
    while scale * T::from_count(m * m + m + 1) <= cutoff {
        let mut n = 1usize;
        loop {
            let lam = scale * T::from_count(m * m + m * n + n * n);
            if lam > cutoff {
                break;
            }
            values.push(lam);
            n += 1;
        }
        m += 1;
    }
    let area = side * side * T::lit(3f64.sqrt() / 4.0);
    finish(values, cutoff, format!("equilateral triangle side={side}"), area)
}

/// `|Ω|λ_k / (4πk)` for every listed eigenvalue.
pub fn weyl_ratio<T: Real>(spectrum: &Spectrum<T>, area: T) -> Vec<T> {
    let four_pi = T::lit(4.0) * T::PI();
    spectrum
        .eigenvalues()
        .iter()
        .enumerate()
        .map(|(i, &l)| area * l / (four_pi * T::from_count(i + 1)))
        .collect()
}

/// Domains with a closed-form spectrum, up to rigid motion.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ReferenceFamily<T> {
    Rectangle { a: T, b: T },
    Disk { r: T },
    Sector { theta: T, r: T },
    EquilateralTriangle { side: T },
}

impl<T: Real> ReferenceFamily<T> {
    pub fn spectrum(&self, cutoff: T) -> Result<Spectrum<T>> {
        match *self {
            ReferenceFamily::Rectangle { a, b } => rectangle_spectrum(a, b, cutoff),
            ReferenceFamily::Disk { r } => disk_spectrum(r, cutoff),
            ReferenceFamily::Sector { theta, r } => sector_spectrum(theta, r, cutoff),
            ReferenceFamily::EquilateralTriangle { side } => equilateral_triangle_spectrum(side, cutoff),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ReferenceFamily::Rectangle { .. } => "rectangle",
            ReferenceFamily::Disk { .. } => "disk",
            ReferenceFamily::Sector { .. } => "sector",
            ReferenceFamily::EquilateralTriangle { .. } => "equilateral-triangle",
        }
    }
}

/// Recognizes a reference family from exact segment kinds and symmetry
/// checks at relative tolerance `1e-12`; anything ambiguous yields `None`.
pub fn detect_reference_family<T: Real>(domain: &DomainSpec<T>) -> Option<ReferenceFamily<T>> {
    let [boundary] = domain.loops() else {
        return None;
    };
    let segs = &boundary.segments;
    let tol = T::lit(1e-12);
    let close = |x: T, y: T| (x - y).abs() <= tol * x.abs().max(y.abs());
    let near = |p: Vec2<T>, q: Vec2<T>, scale: T| p.distance(q) <= tol * scale;
    let lines: Option<Vec<(Vec2<T>, Vec2<T>)>> = segs
        .iter()
        .map(|s| match *s {
            Segment::Line { from, to } => Some((from, to)),
            _ => None,
        })
        .collect();
    if let Some(lines) = lines {
        let len: Vec<T> = lines.iter().map(|(p, q)| p.distance(*q)).collect();
        let dir: Vec<Vec2<T>> = lines.iter().map(|(p, q)| (*q - *p).normalized()).collect();
        return match lines.len() {
            3 if close(len[0], len[1]) && close(len[1], len[2]) => Some(ReferenceFamily::EquilateralTriangle { side: len[0] }),
            4 if (0..4).all(|i| dir[i].dot(dir[(i + 1) % 4]).abs() <= tol) && close(len[0], len[2]) && close(len[1], len[3]) => {
                Some(ReferenceFamily::Rectangle { a: len[0], b: len[1] })
            }
            _ => None,
        };
    }
    let arcs: Option<Vec<(Vec2<T>, T, T)>> = segs
        .iter()
        .map(|s| match *s {
            Segment::Arc { center, radius, .. } => s.arc_angles().map(|(_, sweep)| (center, radius, sweep)),
            _ => None,
        })
        .collect();
    if let Some(arcs) = arcs {
        let (c, r, _) = arcs[0];
        let same = arcs.iter().all(|&(c2, r2, _)| r2 > T::zero() && close(r, r2) && near(c, c2, r));
        let turn = arcs.iter().fold(T::zero(), |acc, &(_, _, s)| acc + s);
        return (same && close(turn, T::TAU())).then_some(ReferenceFamily::Disk { r });
    }
    if segs.len() == 3 {
        for k in 0..3 {
            let (l1, arc, l2) = (&segs[k], &segs[(k + 1) % 3], &segs[(k + 2) % 3]);
            if let (Segment::Line { from: apex, to: p }, Segment::Arc { from, to, center, radius }, Segment::Line { from: q, to: apex2 }) =
                (l1, arc, l2)
            {
                let (_, sweep) = arc.arc_angles()?;
                let ok = *radius > T::zero()
                    && near(*apex, *center, *radius)
                    && near(*apex2, *center, *radius)
                    && near(*p, *from, *radius)
                    && near(*q, *to, *radius)
                    && sweep < T::TAU();
                return ok.then_some(ReferenceFamily::Sector { theta: sweep, r: *radius });
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn unit_square_low_modes() {
        let s = rectangle_spectrum(1.0f64, 1.0, 200.0).unwrap();
        let e = s.eigenvalues();
        assert!((e[0] - 2.0 * PI * PI).abs() < 1e-12);
        assert!((e[1] - 5.0 * PI * PI).abs() < 1e-12);
        assert_eq!(e[1], e[2]);
        let r = rectangle_spectrum(2.0f64, 1.0, 100.0).unwrap();
        assert!((r.first() - 1.25 * PI * PI).abs() < 1e-12);
    }

    #[test]
    fn rectangle_count_matches_brute_force_lattice() {
        for &(a, b, cutoff) in &[(1.0, 1.0, 2e4), (2.0, 1.0, 5e3), (1.3, 0.7, 9e3)] {
            let s = rectangle_spectrum(a, b, cutoff).unwrap();
            let mut count = 0;
            for m in 1..400 {
                for n in 1..400 {
                    let lam = PI * PI * ((m * m) as f64 / (a * a) + (n * n) as f64 / (b * b));
                    if lam <= cutoff {
                        count += 1;
                    }
                }
            }
            assert_eq!(s.len(), count);
        }
    }

    #[test]
    fn empty_below_first_eigenvalue() {
        assert!(matches!(rectangle_spectrum(1.0, 1.0, 10.0), Err(Error::EmptySpectrum(_))));
        assert!(disk_spectrum(1.0, 5.0).is_err());
    }

    #[test]
    fn disk_low_modes_and_scaling() {
        let d = disk_spectrum(1.0f64, 100.0).unwrap();
        let e = d.eigenvalues();
        assert!((e[0] - 5.783_185_962_946_784).abs() < 1e-10);
        assert!((e[1] - 14.681_970_642_123_9).abs() < 1e-9);
        assert_eq!(e[1], e[2]);
        let d2 = disk_spectrum(2.0f64, 25.0).unwrap();
        assert_eq!(d2.len(), d.len());
        for (a, b) in d2.eigenvalues().iter().zip(e) {
            assert!((a - b / 4.0).abs() < 1e-12 * b);
        }
    }

    #[test]
    fn sector_low_modes() {
        let q = sector_spectrum(PI / 2.0, 1.0f64, 100.0).unwrap();
        assert!((q.first() - 26.374_616_427_163_4).abs() < 1e-9);
        let h = sector_spectrum(PI, 1.0, 100.0).unwrap();
        assert!((h.first() - 14.681_970_642_123_9).abs() < 1e-9);
        let t = sector_spectrum(2.0 * PI / 3.0, 1.0, 100.0).unwrap();
        assert!((t.first() - 4.493_409_457_909_064f64.powi(2)).abs() < 1e-10);
    }

    #[test]
    fn triangle_low_modes() {
        let t = equilateral_triangle_spectrum(1.0f64, 400.0).unwrap();
        let e = t.eigenvalues();
        assert!((e[0] - 16.0 * PI * PI / 3.0).abs() < 1e-11);
        assert_eq!(e[1], e[2]);
        assert!((e[1] - 16.0 * PI * PI * 7.0 / 9.0).abs() < 1e-11);
        let t2 = equilateral_triangle_spectrum(2.0f64, 100.0).unwrap();
        for (a, b) in t2.eigenvalues().iter().zip(e) {
            assert!((a - b / 4.0).abs() < 1e-12 * b);
        }
    }

    #[test]
    fn weyl_ratios() {
        let sq = rectangle_spectrum(1.0f64, 1.0, 1.3e5).unwrap();
        let r = weyl_ratio(&sq, 1.0);
        assert!(r.iter().all(|&x| x > 0.0));
        assert!((r[9_999] - 1.0).abs() < 0.02);
        let d = disk_spectrum(1.0f64, 1.5e4).unwrap();
        let r = weyl_ratio(&d, PI);
        assert!((r[999] - 1.0).abs() < 0.05);
    }

    #[test]
    fn nested_rectangles_are_monotone() {
        let inner = rectangle_spectrum(1.0, 1.0, 3e4).unwrap();
        let outer = rectangle_spectrum(1.2, 1.1, 3e4).unwrap();
        for k in 0..200 {
            assert!(outer.eigenvalues()[k] <= inner.eigenvalues()[k]);
        }
    }

    #[test]
    fn f32_rectangle() {
        let s = rectangle_spectrum(1.0f32, 1.0, 100.0).unwrap();
        assert!((s.first() - 2.0 * std::f32::consts::PI.powi(2)).abs() < 1e-4);
    }

    #[test]
    fn reference_families_are_detected_up_to_rigid_motion() {
        use crate::geometry::shapes;
        let moved = |d: DomainSpec<f64>| d.transformed(0.7, 1.0, Vec2::new(3.0, -2.0)).unwrap();
        let fam = |d: DomainSpec<f64>| detect_reference_family(&moved(d));
        match fam(shapes::rectangle(2.0, 1.0).unwrap()) {
            Some(ReferenceFamily::Rectangle { a, b }) => assert!((a - 2.0).abs() < 1e-12 && (b - 1.0).abs() < 1e-12),
            other => panic!("{other:?}"),
        }
        assert!(matches!(fam(shapes::disk(1.5).unwrap()), Some(ReferenceFamily::Disk { r }) if (r - 1.5).abs() < 1e-12));
        match fam(shapes::sector(std::f64::consts::FRAC_PI_2, 1.0).unwrap()) {
            Some(ReferenceFamily::Sector { theta, r }) => {
                assert!((theta - std::f64::consts::FRAC_PI_2).abs() < 1e-12 && (r - 1.0).abs() < 1e-12)
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(fam(shapes::sector(std::f64::consts::PI, 1.0).unwrap()), Some(ReferenceFamily::Sector { .. })));
        assert!(matches!(fam(shapes::equilateral_triangle(1.0).unwrap()), Some(ReferenceFamily::EquilateralTriangle { .. })));
        for other in [
            shapes::l_shape(1.0).unwrap(),
            shapes::ellipse(2.0, 1.0).unwrap(),
            shapes::regular_polygon(5, 1.0).unwrap(),
            shapes::square_with_square_hole(1.0, 0.5).unwrap(),
            DomainSpec::polygon("kite", &[Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(2.5, 1.0), Vec2::new(0.5, 1.0)]).unwrap(),
        ] {
            assert_eq!(detect_reference_family(&other), None, "{}", other.label());
        }
    }
}
