//! Piecewise-linear stiffness and mass matrices.

use rayon::prelude::*;

use super::mesh::Mesh;
use super::sparse::CsrMatrix;
use crate::error::{Error, Result};
use crate::geometry::Vec2;

/// Stiffness and mass matrices over the free (interior) vertices.
#[derive(Clone, Debug)]
pub struct DiscreteOperatorPair {
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    /// Row sums of the mass matrix (lumped mass), used for residual norms.
    pub lumped_mass: Vec<f64>,
    /// Mesh vertex of each unknown.
    pub dof_vertex: Vec<usize>,
    /// Area of the discrete domain.
    pub area: f64,
    /// Length of the discrete boundary.
    pub perimeter: f64,
}

impl DiscreteOperatorPair {
    pub fn dim(&self) -> usize {
        self.stiffness.n
    }
}

/// Element stiffness `(∇φᵢ·∇φⱼ)·area` for a CCW triangle.
pub fn element_stiffness(p: [Vec2<f64>; 3]) -> Result<[[f64; 3]; 3]> {
    let area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]);
    if !(area > 0.0) {
        return Err(Error::Assembly(format!("singular element with area {area:e} at ({}, {})", p[0].x, p[0].y)));
    }
    let b = [p[1].y - p[2].y, p[2].y - p[0].y, p[0].y - p[1].y];
    let c = [p[2].x - p[1].x, p[0].x - p[2].x, p[1].x - p[0].x];
    let mut k = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = (b[i] * b[j] + c[i] * c[j]) / (4.0 * area);
        }
    }
    Ok(k)
}

/// Consistent element mass `area/12·(1 + δᵢⱼ)`.
pub fn element_mass(p: [Vec2<f64>; 3]) -> Result<[[f64; 3]; 3]> {
    let area = 0.5 * (p[1] - p[0]).cross(p[2] - p[0]);
    if !(area > 0.0) {
        return Err(Error::Assembly(format!("singular element with area {area:e} at ({}, {})", p[0].x, p[0].y)));
    }
    let mut m = [[area / 12.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = area / 6.0;
    }
    Ok(m)
}

fn assemble_on(mesh: &Mesh, dof_of: &[Option<usize>], n: usize) -> Result<(CsrMatrix, CsrMatrix)> {
    let elements: Vec<([[f64; 3]; 3], [[f64; 3]; 3])> = mesh
        .triangles
        .par_iter()
        .map(|t| {
            let p = t.map(|i| mesh.vertices[i]);
            Ok((element_stiffness(p)?, element_mass(p)?))
        })
        .collect::<Result<_>>()?;
    let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
    for t in &mesh.triangles {
        for &a in t {
            if let Some(i) = dof_of[a] {
                for &b in t {
                    if let Some(j) = dof_of[b] {
                        rows[i].push(j);
                    }
                }
            }
        }
    }
    for r in rows.iter_mut() {
        r.sort_unstable();
        r.dedup();
    }
    let mut k = CsrMatrix::from_pattern(&rows);
    let mut m = k.clone();
    for (t, (ke, me)) in mesh.triangles.iter().zip(&elements) {
        for (a, &va) in t.iter().enumerate() {
            let Some(i) = dof_of[va] else { continue };
            for (b, &vb) in t.iter().enumerate() {
                let Some(j) = dof_of[vb] else { continue };
                let pos = k.position(i, j).expect("pattern covers element");
                k.values[pos] += ke[a][b];
                m.values[pos] += me[a][b];
            }
        }
    }
    Ok((k, m))
}

/// Assembles over all vertices, before Dirichlet elimination.
pub fn assemble_full(mesh: &Mesh) -> Result<(CsrMatrix, CsrMatrix)> {
    let n = mesh.vertices.len();
    let dof_of: Vec<Option<usize>> = (0..n).map(Some).collect();
    assemble_on(mesh, &dof_of, n)
}

/// Assembles `K` and `M` with boundary vertices eliminated.
pub fn assemble(mesh: &Mesh) -> Result<DiscreteOperatorPair> {
    let mut dof_of = vec![None; mesh.vertices.len()];
    let mut dof_vertex = Vec::new();
    for (v, &on_boundary) in mesh.boundary.iter().enumerate() {
        if !on_boundary {
            dof_of[v] = Some(dof_vertex.len());
            dof_vertex.push(v);
        }
    }
    if dof_vertex.is_empty() {
        return Err(Error::Assembly("mesh has no interior vertices; reduce h".into()));
    }
    let (stiffness, mass) = assemble_on(mesh, &dof_of, dof_vertex.len())?;
    let lumped_mass = mass.row_sums();
    Ok(DiscreteOperatorPair { stiffness, mass, lumped_mass, dof_vertex, area: mesh.area(), perimeter: mesh.boundary_length() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fem::mesh::{mesh_domain, MeshOptions};
    use crate::geometry::shapes;

    #[test]
    fn reference_triangle_matrices() {
        let p = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
        let m = element_mass(p).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let want = 0.5 / 12.0 * if i == j { 2.0 } else { 1.0 };
                assert!((m[i][j] - want).abs() < 1e-16);
            }
        }
        let k = element_stiffness(p).unwrap();
        let want = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            assert!(k[i].iter().sum::<f64>().abs() < 1e-15);
            for j in 0..3 {
                assert!((k[i][j] - want[i][j]).abs() < 1e-15);
            }
        }
        let flat = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(2.0, 0.0)];
        assert!(matches!(element_stiffness(flat), Err(Error::Assembly(_))));
    }

    #[test]
    fn constants_are_in_the_kernel_before_elimination() {
        let mesh = mesh_domain(&shapes::disk(1.0).unwrap(), &MeshOptions::new(0.2)).unwrap();
        let (k, m) = assemble_full(&mesh).unwrap();
        assert!(k.row_sums().iter().all(|s| s.abs() < 1e-12));
        let total: f64 = m.values.iter().sum();
        assert!((total - mesh.area()).abs() < 1e-12);
    }

    #[test]
    fn rayleigh_quotient_bounds_the_first_eigenvalue() {
        let mesh = mesh_domain(&shapes::rectangle(1.0, 1.0).unwrap(), &MeshOptions::new(0.1)).unwrap();
        let ops = assemble(&mesh).unwrap();
        let u: Vec<f64> = ops
            .dof_vertex
            .iter()
            .map(|&v| {
                let p = mesh.vertices[v];
                (std::f64::consts::PI * p.x).sin() * (std::f64::consts::PI * p.y).sin()
            })
            .collect();
        let rq = ops.stiffness.inner(&u, &u) / ops.mass.inner(&u, &u);
        assert!(rq >= 2.0 * std::f64::consts::PI.powi(2));
    }
}
