//! Piecewise-linear finite elements for the Dirichlet Laplacian.

pub mod assembly;
pub(crate) mod delaunay;
pub mod eigensolver;
pub mod mesh;
pub mod sparse;

pub use assembly::{assemble, assemble_full, element_mass, element_stiffness, DiscreteOperatorPair};
pub use eigensolver::{solve_lowest, EigenOptions, EigenSolution, SolveDiagnostics};
pub use mesh::{mesh_domain, Mesh, MeshOptions, DEFAULT_GRADING};

use crate::error::{Error, Result};
use crate::geometry::DomainSpec;
use crate::spectrum::{Spectrum, SpectrumSource};

/// Largest tolerated drift of the discrete Weyl ratio before modes count as pollution.
pub const POLLUTION_TOLERANCE: f64 = 0.05;
/// Modes below this index are too few for a meaningful Weyl comparison.
pub const POLLUTION_MIN_MODES: usize = 20;

/// Number of leading modes that pass the pollution rule.
///
/// For each `k` the two-term Weyl count `N(λ) = |Ω|λ/4π − |∂Ω|√λ/4π` is
/// compared with `k` after averaging `N(λ_j) − j + ½` over `j ∈ [k/2, k]`
/// (the raw count fluctuates by O(√k)); modes are complete up to the
/// first `k` where the averaged drift exceeds 5% of `k`.
pub fn pollution_complete_count(values: &[f64], area: f64, perimeter: f64) -> usize {
    let four_pi = 4.0 * std::f64::consts::PI;
    let drift: Vec<f64> = values
        .iter()
        .enumerate()
        .map(|(i, &l)| area * l / four_pi - perimeter * l.sqrt() / four_pi - (i as f64 + 1.0) + 0.5)
        .collect();
    let mut prefix = vec![0.0; drift.len() + 1];
    for (i, d) in drift.iter().enumerate() {
        prefix[i + 1] = prefix[i] + d;
    }
    for k in POLLUTION_MIN_MODES..=values.len() {
        let lo = k / 2;
        let mean = (prefix[k] - prefix[lo]) / (k - lo) as f64;
        if mean.abs() > POLLUTION_TOLERANCE * k as f64 {
            return k - 1;
        }
    }
    values.len()
}

/// Richardson combination `(4λ_{h/2} − λ_h)/3` of two nested-mesh spectra,
/// cancelling the `h²` term of the piecewise-linear error. Modes are paired
/// by index and the result re-sorted; the heat trace only sees the multiset.
pub fn richardson_extrapolate(coarse: &[f64], fine: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = coarse.iter().zip(fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect();
    out.sort_by(f64::total_cmp);
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FemOptions {
    /// `mesh.h` is the size of the finest mesh solved on.
    pub mesh: MeshOptions,
    pub eigen: EigenOptions,
    /// Solve on a mesh of size `2h` and on its red refinement, then
    /// extrapolate. Extrapolated values are no longer upper bounds.
    pub richardson: bool,
}

impl FemOptions {
    pub fn new(h: f64, count: usize) -> Self {
        Self { mesh: MeshOptions::new(h), eigen: EigenOptions::new(count), richardson: true }
    }

    pub fn plain(h: f64, count: usize) -> Self {
        Self { richardson: false, ..Self::new(h, count) }
    }
}

#[derive(Clone, Debug)]
pub struct FemResult {
    pub spectrum: Spectrum<f64>,
    /// The finest mesh.
    pub mesh: Mesh,
    /// Solution on the finest mesh.
    pub solution: EigenSolution,
    /// Eigenvalues on the coarse mesh when extrapolating.
    pub coarse_values: Option<Vec<f64>>,
    /// Leading modes passing the pollution rule.
    pub complete_count: usize,
}

/// Meshes, assembles and solves for the lowest `options.eigen.count` modes.
pub fn fem_spectrum(domain: &DomainSpec<f64>, options: &FemOptions) -> Result<FemResult> {
    let (mesh, coarse_values) = if options.richardson {
        let coarse = mesh_domain(domain, &MeshOptions { h: 2.0 * options.mesh.h, ..options.mesh })?;
        let values = solve_lowest(&assemble(&coarse)?, &options.eigen)?.values;
        (coarse.refine_uniform(), Some(values))
    } else {
        (mesh_domain(domain, &options.mesh)?, None)
    };
    let ops = assemble(&mesh)?;
    let solution = solve_lowest(&ops, &options.eigen)?;
    let values = match &coarse_values {
        Some(c) => richardson_extrapolate(c, &solution.values),
        None => solution.values.clone(),
    };
    let complete_count = pollution_complete_count(&values, ops.area, ops.perimeter);
    if complete_count == 0 {
        return Err(Error::InsufficientSpectrum {
            reason: "every computed FEM mode fails the pollution rule; refine the mesh".into(),
            required_cutoff: values[0],
        });
    }
    let cutoff = values[complete_count - 1];
    let spectrum = Spectrum::new(values, cutoff, SpectrumSource::Fem, domain.label())?
        .with_area_hint(mesh.domain_area)
        .with_annotation("h", options.mesh.h)
        .with_annotation("grading", options.mesh.grading)
        .with_annotation("extrapolation", if options.richardson { "richardson" } else { "none" })
        .with_annotation("vertices", mesh.vertices.len())
        .with_annotation("triangles", mesh.triangles.len())
        .with_annotation("mesh_area", format!("{:.12e}", ops.area))
        .with_annotation("mesh_perimeter", format!("{:.12e}", ops.perimeter))
        .with_annotation("area_error", format!("{:.3e}", ops.area - mesh.domain_area))
        .with_annotation("perimeter_error", format!("{:.3e}", ops.perimeter - mesh.domain_perimeter))
        .with_annotation("complete_modes", complete_count)
        .with_annotation("max_residual", format!("{:.3e}", solution.residuals.iter().copied().fold(0.0, f64::max)));
    Ok(FemResult { spectrum, mesh, solution, coarse_values, complete_count })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic_spectra::{disk_spectrum, equilateral_triangle_spectrum, rectangle_spectrum};
    use crate::geometry::shapes;
    use std::f64::consts::PI;

    fn lowest(domain: &DomainSpec<f64>, h: f64, count: usize) -> EigenSolution {
        let mesh = mesh_domain(domain, &MeshOptions::new(h)).unwrap();
        let ops = assemble(&mesh).unwrap();
        let mut opts = EigenOptions::new(count);
        opts.keep_vectors = true;
        solve_lowest(&ops, &opts).unwrap()
    }

    #[test]
    fn square_first_eigenvalue() {
        let sq = shapes::rectangle(1.0, 1.0).unwrap();
        let sol = lowest(&sq, 0.02, 10);
        let exact = rectangle_spectrum(1.0, 1.0, 200.0).unwrap();
        let rel = sol.values[0] / (2.0 * PI * PI) - 1.0;
        assert!((0.0..=3e-3).contains(&rel), "{rel}");
        for (k, (&fem, &ex)) in sol.values.iter().zip(exact.eigenvalues()).enumerate() {
            assert!(fem >= ex, "mode {k}: {fem} < {ex}");
        }
    }

    #[test]
    fn eigenvectors_are_m_orthonormal_with_small_residuals() {
        let mesh = mesh_domain(&shapes::disk(1.0).unwrap(), &MeshOptions::new(0.1)).unwrap();
        let ops = assemble(&mesh).unwrap();
        let mut opts = EigenOptions::new(40);
        opts.keep_vectors = true;
        opts.slice = 16;
        let sol = solve_lowest(&ops, &opts).unwrap();
        let x = sol.vectors.as_ref().unwrap();
        for i in 0..x.len() {
            for j in 0..x.len() {
                let g = ops.mass.inner(&x[i], &x[j]);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - want).abs() <= 1e-8, "({i},{j}): {g}");
            }
        }
        for (r, l) in sol.residuals.iter().zip(&sol.values) {
            assert!(*r <= 1e-8 * l.max(1.0));
        }
        assert!(sol.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn disk_first_eigenvalue() {
        let sol = lowest(&shapes::disk(1.0).unwrap(), 0.02, 5);
        let j01 = disk_spectrum(1.0, 10.0).unwrap().first();
        let rel = sol.values[0] / j01 - 1.0;
        assert!(rel.abs() <= 0.01, "{rel}");
    }

    #[test]
    fn refinement_decreases_and_converges_quadratically() {
        let sq = shapes::rectangle(1.0, 1.0).unwrap();
        let exact = 2.0 * PI * PI;
        let coarse = lowest(&sq, 0.1, 6);
        let mid = lowest(&sq, 0.05, 6);
        let fine = lowest(&sq, 0.025, 6);
        for k in 0..6 {
            assert!(coarse.values[k] >= mid.values[k] && mid.values[k] >= fine.values[k], "mode {k}");
        }
        let r1 = (coarse.values[0] - exact) / (mid.values[0] - exact);
        let r2 = (mid.values[0] - exact) / (fine.values[0] - exact);
        assert!((2.5..=6.0).contains(&r1) && (2.5..=6.0).contains(&r2), "{r1} {r2}");
    }

    #[test]
    fn triangle_cross_check() {
        let tri = shapes::equilateral_triangle(1.0).unwrap();
        let sol = lowest(&tri, 0.02, 20);
        let exact = equilateral_triangle_spectrum(1.0, 3000.0).unwrap();
        for (k, (&fem, &ex)) in sol.values.iter().zip(exact.eigenvalues()).enumerate() {
            let rel = fem / ex - 1.0;
            assert!((0.0..0.02).contains(&rel), "mode {k}: {fem} vs {ex}");
        }
    }

    #[test]
    fn pollution_rule_on_exact_and_polluted_data() {
        let exact = rectangle_spectrum(1.0, 1.0, 2e4).unwrap();
        let v = exact.eigenvalues();
        assert_eq!(pollution_complete_count(v, 1.0, 4.0), v.len());
        let polluted: Vec<f64> = v.iter().enumerate().map(|(k, &l)| if k >= 300 { l * 1.5 } else { l }).collect();
        let c = pollution_complete_count(&polluted, 1.0, 4.0);
        assert!((300..420).contains(&c), "{c}");
    }

    #[test]
    fn red_refinement_preserves_the_polygon_and_angles() {
        let mesh = mesh_domain(&shapes::l_shape(1.0).unwrap(), &MeshOptions::new(0.2)).unwrap();
        let fine = mesh.refine_uniform();
        fine.validate().unwrap();
        assert_eq!(fine.triangles.len(), 4 * mesh.triangles.len());
        assert!((fine.area() - mesh.area()).abs() < 1e-12);
        assert!((fine.boundary_length() - mesh.boundary_length()).abs() < 1e-12);
        let worst = |m: &Mesh| (0..m.triangles.len()).map(|t| m.min_angle_deg(t)).fold(180.0, f64::min);
        assert!((worst(&fine) - worst(&mesh)).abs() < 1e-9);
    }

    #[test]
    fn richardson_cancels_the_leading_error() {
        let sq = shapes::rectangle(1.0, 1.0).unwrap();
        let exact = rectangle_spectrum(1.0, 1.0, 400.0).unwrap();
        let plain = fem_spectrum(&sq, &FemOptions::plain(0.05, 12)).unwrap();
        let extrap = fem_spectrum(&sq, &FemOptions::new(0.05, 12)).unwrap();
        let err = |s: &Spectrum<f64>| {
            s.eigenvalues().iter().zip(exact.eigenvalues()).map(|(a, b)| (a / b - 1.0).abs()).fold(0.0, f64::max)
        };
        let (e_plain, e_extrap) = (err(&plain.spectrum), err(&extrap.spectrum));
        assert!(e_extrap < 0.1 * e_plain, "{e_extrap} vs {e_plain}");
        assert_eq!(extrap.spectrum.annotation("extrapolation"), Some("richardson"));
        assert_eq!(richardson_extrapolate(&[4.0, 2.0], &[1.0, 1.5]), vec![0.0, 4.0 / 3.0]);
    }

    #[test]
    fn fem_spectrum_carries_provenance() {
        let res = fem_spectrum(&shapes::rectangle(1.0, 1.0).unwrap(), &FemOptions::plain(0.05, 30)).unwrap();
        assert_eq!(res.spectrum.source(), SpectrumSource::Fem);
        assert_eq!(res.spectrum.annotation("h"), Some("0.05"));
        assert!(res.complete_count <= 30);
        assert!(mesh_domain(&shapes::rectangle(1.0, 1.0).unwrap(), &MeshOptions::new(0.5)).is_ok());
        assert!(matches!(solve_lowest(&assemble(&res.mesh).unwrap(), &EigenOptions::new(0)), Err(Error::Domain(_))));
    }
}
