//! Graded Delaunay-refinement meshing of a [`DomainSpec`].

use std::collections::VecDeque;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::delaunay::{circumcenter, Locate, TriError, Triangulation};
use crate::error::{Error, Result};
use crate::geometry::Segment;
use crate::geometry::{detect_corners, Corner, DomainSpec, Vec2, DEFAULT_ANGLE_TOL};

/// Default grading exponent at reentrant corners.
pub const DEFAULT_GRADING: f64 = 0.5;
pub const DEFAULT_MIN_ANGLE_DEG: f64 = 25.0;
/// Grading acts within this fraction of the domain diameter of a corner.
pub const DEFAULT_GRADING_RADIUS: f64 = 0.25;
const MAX_VERTICES: usize = 4_000_000;
const SAMPLE_TABLE: usize = 4000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MeshOptions {
    /// Target element size away from corners.
    pub h: f64,
    /// Size near a reentrant corner scales like `h·(r/R)^{1−grading}`;
    /// 1 disables grading.
    pub grading: f64,
    pub min_angle_deg: f64,
    pub grading_radius_fraction: f64,
}

impl MeshOptions {
    pub fn new(h: f64) -> Self {
        Self {
            h,
            grading: DEFAULT_GRADING,
            min_angle_deg: DEFAULT_MIN_ANGLE_DEG,
            grading_radius_fraction: DEFAULT_GRADING_RADIUS,
        }
    }

    pub fn with_grading(mut self, grading: f64) -> Self {
        self.grading = grading;
        self
    }
}

/// A conforming triangulation of a domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub vertices: Vec<Vec2<f64>>,
    /// CCW vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<bool>,
    /// Boundary edges in loop direction.
    pub boundary_edges: Vec<[usize; 2]>,
    pub h: f64,
    pub grading: f64,
    /// Area and perimeter of the exact domain, for chord-error reporting.
    pub domain_area: f64,
    pub domain_perimeter: f64,
}

impl Mesh {
    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.vertices[i]);
        0.5 * (b - a).cross(c - a)
    }

    pub fn area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn boundary_length(&self) -> f64 {
        self.boundary_edges.iter().map(|&[a, b]| self.vertices[a].distance(self.vertices[b])).sum()
    }

    pub fn interior_count(&self) -> usize {
        self.boundary.iter().filter(|&&b| !b).count()
    }

    /// Smallest interior angle of triangle `t`, in degrees.
    pub fn min_angle_deg(&self, t: usize) -> f64 {
        let p = self.triangles[t].map(|i| self.vertices[i]);
        (0..3)
            .map(|i| {
                let u = p[(i + 1) % 3] - p[i];
                let w = p[(i + 2) % 3] - p[i];
                u.cross(w).abs().atan2(u.dot(w)).to_degrees()
            })
            .fold(f64::INFINITY, f64::min)
    }

    pub fn longest_edge(&self, t: usize) -> f64 {
        let p = self.triangles[t].map(|i| self.vertices[i]);
        (0..3).map(|i| p[i].distance(p[(i + 1) % 3])).fold(0.0, f64::max)
    }

    /// Checks conformity, orientation and boundary flags.
    pub fn validate(&self) -> Result<()> {
        use std::collections::HashMap;
        let mut edges: HashMap<(usize, usize), usize> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            if !(self.triangle_area(t) > 0.0) {
                return Err(Error::Mesh { loop_index: 0, segment: 0, reason: format!("triangle {t} has nonpositive area") });
            }
            for i in 0..3 {
                let (a, b) = (tri[i], tri[(i + 1) % 3]);
                *edges.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        let mut on_boundary = vec![false; self.vertices.len()];
        let mut open = 0;
        for (&(a, b), &count) in &edges {
            if count > 2 {
                return Err(Error::Mesh { loop_index: 0, segment: 0, reason: format!("edge ({a}, {b}) shared by {count} triangles") });
            }
            if count == 1 {
                open += 1;
                on_boundary[a] = true;
                on_boundary[b] = true;
            }
        }
        if open != self.boundary_edges.len() || on_boundary != self.boundary {
            return Err(Error::Mesh { loop_index: 0, segment: 0, reason: "boundary flags disagree with the triangulation".into() });
        }
        Ok(())
    }

    /// Red refinement: every triangle split into four through its edge
    /// midpoints. Boundary midpoints stay on the chords, so the refined mesh
    /// discretizes the same polygon and the family supports Richardson
    /// extrapolation in `h`.
    pub fn refine_uniform(&self) -> Mesh {
        use std::collections::HashMap;
        let mut vertices = self.vertices.clone();
        let mut boundary = self.boundary.clone();
        let boundary_set: std::collections::HashSet<(usize, usize)> =
            self.boundary_edges.iter().map(|&[a, b]| (a.min(b), a.max(b))).collect();
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, vertices: &mut Vec<Vec2<f64>>, boundary: &mut Vec<bool>| -> usize {
            let key = (a.min(b), a.max(b));
            *mid.entry(key).or_insert_with(|| {
                vertices.push((vertices[a] + vertices[b]) * 0.5);
                boundary.push(boundary_set.contains(&key));
                vertices.len() - 1
            })
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[a, b, c] in &self.triangles {
            let ab = midpoint(a, b, &mut vertices, &mut boundary);
            let bc = midpoint(b, c, &mut vertices, &mut boundary);
            let ca = midpoint(c, a, &mut vertices, &mut boundary);
            triangles.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        let boundary_edges = self
            .boundary_edges
            .iter()
            .flat_map(|&[a, b]| {
                let m = mid[&(a.min(b), a.max(b))];
                [[a, m], [m, b]]
            })
            .collect();
        Mesh { vertices, triangles, boundary, boundary_edges, h: 0.5 * self.h, ..self.clone() }
    }

    /// Plain-text `vertices`/`triangles` table.
    pub fn to_table(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "# mesh h={} grading={} vertices={} triangles={}", self.h, self.grading, self.vertices.len(), self.triangles.len());
        let _ = writeln!(out, "vertices");
        for (i, v) in self.vertices.iter().enumerate() {
            let _ = writeln!(out, "{i} {:.17e} {:.17e} {}", v.x, v.y, u8::from(self.boundary[i]));
        }
        let _ = writeln!(out, "triangles");
        for (i, t) in self.triangles.iter().enumerate() {
            let _ = writeln!(out, "{i} {} {} {}", t[0], t[1], t[2]);
        }
        out
    }
}

struct SizeField {
    h: f64,
    corners: Vec<(Vec2<f64>, f64)>,
    radius: f64,
}

impl SizeField {
    fn new(h: f64, grading: f64, corners: &[Corner<f64>], radius: f64) -> Self {
        let graded = if grading < 1.0 {
            corners.iter().filter(|c| c.theta > PI).map(|c| (c.vertex, grading)).collect()
        } else {
            Vec::new()
        };
        Self { h, corners: graded, radius }
    }

    fn at(&self, p: Vec2<f64>) -> f64 {
        let mut s = self.h;
        for &(c, g) in &self.corners {
            let floor = (self.h / self.radius).min(1.0).powf((1.0 - g) / g);
            let r = p.distance(c) / self.radius;
            s = s.min(self.h * r.powf(1.0 - g).max(floor));
        }
        s
    }

    fn smallest(&self) -> f64 {
        self.corners
            .iter()
            .map(|&(_, g)| self.h * (self.h / self.radius).min(1.0).powf((1.0 - g) / g))
            .fold(self.h, f64::min)
    }
}

#[derive(Clone, Copy, Debug)]
struct Piece {
    a: u32,
    b: u32,
    loop_index: usize,
    segment: usize,
    s0: f64,
    s1: f64,
    alive: bool,
}

fn radius_of_curvature(seg: &Segment<f64>, s: f64) -> f64 {
    match seg {
        Segment::Line { .. } => f64::INFINITY,
        Segment::Arc { radius, .. } => radius.abs(),
        Segment::Parametric(curve) => {
            let d1 = curve.d1(s);
            let d2 = curve.d2(s);
            let k = d1.cross(d2).abs();
            if k == 0.0 {
                f64::INFINITY
            } else {
                d1.norm().powi(3) / k
            }
        }
    }
}

/// Parameters of the sample points on a segment, graded by `size`.
fn sample_segment(seg: &Segment<f64>, size: &SizeField, h: f64, diam: f64) -> Vec<f64> {
    let n = SAMPLE_TABLE;
    let us: Vec<f64> = (0..=n).map(|i| 0.5 * (1.0 - (PI * i as f64 / n as f64).cos())).collect();
    let local = |s: f64| {
        let p = seg.point(s);
        let chord = h * (8.0 * radius_of_curvature(seg, s) / diam).sqrt();
        size.at(p).min(chord)
    };
    let mut cum = vec![0.0; n + 1];
    for i in 0..n {
        let mid = 0.5 * (us[i] + us[i + 1]);
        let speed = seg.derivative(mid).norm();
        cum[i + 1] = cum[i] + (us[i + 1] - us[i]) * speed / local(mid);
    }
    let total = cum[n];
    let pieces = (total.ceil() as usize).max(1);
    let mut out = vec![0.0];
    let mut j = 0;
    for k in 1..pieces {
        let target = total * k as f64 / pieces as f64;
        while cum[j + 1] < target {
            j += 1;
        }
        let f = (target - cum[j]) / (cum[j + 1] - cum[j]);
        out.push(us[j] + f * (us[j + 1] - us[j]));
    }
    out.push(1.0);
    out
}

fn p2(v: Vec2<f64>) -> [f64; 2] {
    [v.x, v.y]
}

fn v2(p: [f64; 2]) -> Vec2<f64> {
    Vec2::new(p[0], p[1])
}

struct Mesher<'a> {
    domain: &'a DomainSpec<f64>,
    tr: Triangulation,
    pieces: Vec<Piece>,
    size: SizeField,
    min_piece: f64,
    cos_limit: f64,
    input_vertex: Vec<bool>,
}

impl<'a> Mesher<'a> {
    fn mesh_error(&self, piece: &Piece, reason: impl Into<String>) -> Error {
        Error::Mesh { loop_index: piece.loop_index, segment: piece.segment, reason: reason.into() }
    }

    fn tri_error(&self, piece: Option<&Piece>, e: TriError) -> Error {
        match piece {
            Some(p) => self.mesh_error(p, e.to_string()),
            None => Error::Mesh { loop_index: 0, segment: 0, reason: e.to_string() },
        }
    }

    fn segment(&self, piece: &Piece) -> &Segment<f64> {
        &self.domain.loops()[piece.loop_index].segments[piece.segment]
    }

    fn piece_length(&self, piece: &Piece) -> f64 {
        v2(self.tr.pts[piece.a as usize]).distance(v2(self.tr.pts[piece.b as usize]))
    }

    /// Splits a boundary piece at its parametric midpoint on the curve.
    fn split(&mut self, id: usize, constrained: bool) -> Result<[usize; 2]> {
        let piece = self.pieces[id];
        if self.piece_length(&piece) < self.min_piece {
            return Err(self.mesh_error(&piece, format!("boundary piece shorter than {:.3e} needs splitting; feature too small for h", self.min_piece)));
        }
        let sm = 0.5 * (piece.s0 + piece.s1);
        let p = p2(self.segment(&piece).point(sm));
        if constrained {
            self.tr.remove_constraint(piece.a, piece.b);
        }
        let hint = self.tr.edge_triangle(piece.a, piece.b).map(|(t, _)| t).unwrap_or(self.tr.triangle_at(piece.a));
        let m = match self.tr.insert(p, hint, Some((piece.a, piece.b))) {
            Ok(m) => m,
            Err(e) => return Err(self.tri_error(Some(&piece), e)),
        };
        self.input_vertex.push(false);
        self.pieces[id].alive = false;
        let left = Piece { b: m, s1: sm, alive: true, ..piece };
        let right = Piece { a: m, s0: sm, alive: true, ..piece };
        self.pieces.push(left);
        self.pieces.push(right);
        let (l, r) = (self.pieces.len() - 2, self.pieces.len() - 1);
        if constrained {
            self.tr.add_constraint(piece.a, m, l as u32);
            self.tr.add_constraint(m, piece.b, r as u32);
        }
        if self.tr.pts.len() > MAX_VERTICES {
            return Err(self.mesh_error(&piece, "vertex budget exhausted"));
        }
        Ok([l, r])
    }

    /// Apex of the inside triangle on piece `id` encroaches its diametral circle.
    fn encroached(&self, id: usize) -> bool {
        let piece = &self.pieces[id];
        let Some((t, opp)) = self.tr.edge_triangle(piece.a, piece.b) else {
            return false;
        };
        let tri = &self.tr.tris[t as usize];
        if !tri.inside {
            return false;
        }
        let c = v2(self.tr.pts[tri.v[opp] as usize]);
        let a = v2(self.tr.pts[piece.a as usize]);
        let b = v2(self.tr.pts[piece.b as usize]);
        (a - c).dot(b - c) < 0.0
    }

    fn is_bad(&self, t: u32) -> bool {
        let tri = &self.tr.tris[t as usize];
        if !tri.alive || !tri.inside {
            return false;
        }
        let p = tri.v.map(|i| v2(self.tr.pts[i as usize]));
        // len2[i]: squared length of the edge opposite vertex i.
        let len2 = [(p[1] - p[2]).dot(p[1] - p[2]), (p[2] - p[0]).dot(p[2] - p[0]), (p[0] - p[1]).dot(p[0] - p[1])];
        let area2 = (p[1] - p[0]).cross(p[2] - p[0]).abs();
        let circumradius = (len2[0] * len2[1] * len2[2]).sqrt() / (2.0 * area2);
        let centroid = (p[0] + p[1] + p[2]) * (1.0 / 3.0);
        if circumradius * 3f64.sqrt() > self.size.at(centroid) {
            return true;
        }
        // The smallest angle sits opposite the shortest edge.
        let s = (0..3).min_by(|&i, &j| len2[i].total_cmp(&len2[j])).expect("three edges");
        let x = p[(s + 1) % 3] - p[s];
        let y = p[(s + 2) % 3] - p[s];
        if x.dot(y) / (x.norm() * y.norm()) <= self.cos_limit {
            return false;
        }
        // Small input angles between two boundary pieces cannot be fixed.
        let [apex, a, b] = [tri.v[s], tri.v[(s + 1) % 3], tri.v[(s + 2) % 3]];
        !(self.input_vertex[apex as usize] && self.tr.is_constraint(apex, a) && self.tr.is_constraint(apex, b))
    }

    fn run(&mut self) -> Result<()> {
        // Phase 1: recover every boundary piece as a Delaunay edge.
        let mut pending: VecDeque<usize> = (0..self.pieces.len()).collect();
        while let Some(id) = pending.pop_front() {
            let piece = self.pieces[id];
            if !piece.alive || self.tr.edge_triangle(piece.a, piece.b).is_some() {
                continue;
            }
            let [l, r] = self.split(id, false)?;
            pending.push_back(l);
            pending.push_back(r);
        }
        // Later insertions may have destroyed earlier edges.
        loop {
            let missing: Vec<usize> = (0..self.pieces.len())
                .filter(|&i| self.pieces[i].alive && self.tr.edge_triangle(self.pieces[i].a, self.pieces[i].b).is_none())
                .collect();
            if missing.is_empty() {
                break;
            }
            for id in missing {
                if self.pieces[id].alive {
                    self.split(id, false)?;
                }
            }
        }
        for id in 0..self.pieces.len() {
            if self.pieces[id].alive {
                let p = self.pieces[id];
                self.tr.add_constraint(p.a, p.b, id as u32);
            }
        }
        let seeds: Vec<u32> = self
            .pieces
            .iter()
            .filter(|p| p.alive)
            .filter_map(|p| self.tr.edge_triangle(p.a, p.b).map(|(t, _)| t))
            .collect();
        self.tr.flood_inside(&seeds);

        // Phase 2: Ruppert refinement.
        let mut seg_queue: VecDeque<usize> = (0..self.pieces.len()).filter(|&i| self.pieces[i].alive).collect();
        let mut tri_queue: VecDeque<(u32, [u32; 3])> = self.tr.live_triangles().filter(|(_, t)| t.inside).map(|(i, t)| (i, t.v)).collect();
        loop {
            if let Some(id) = seg_queue.pop_front() {
                if self.pieces[id].alive && self.encroached(id) {
                    let piece = self.pieces[id];
                    if self.piece_length(&piece) < 2.0 * self.min_piece {
                        continue;
                    }
                    let new = self.split(id, true)?;
                    seg_queue.extend(new);
                    self.requeue_created(&mut tri_queue, &mut seg_queue);
                }
                continue;
            }
            let Some((t, vs)) = tri_queue.pop_front() else {
                break;
            };
            let tri = self.tr.tris[t as usize];
            if !tri.alive || tri.v != vs || !self.is_bad(t) {
                continue;
            }
            let [a, b, c] = vs.map(|i| self.tr.pts[i as usize]);
            let cc = circumcenter(a, b, c);
            let located = self.tr.locate(cc, t, true).map_err(|e| self.tri_error(None, e))?;
            let t0 = match located {
                Locate::Blocked(x, y) => {
                    let id = self.tr.constraint_id(x, y).expect("constraint") as usize;
                    if self.try_split_for(id, &mut seg_queue, &mut tri_queue)? {
                        tri_queue.push_back((t, vs));
                    }
                    continue;
                }
                Locate::Found(t0) => t0,
            };
            if !self.tr.tris[t0 as usize].inside {
                continue;
            }
            let cav = self.tr.cavity(cc, t0, None);
            let encroached: Vec<usize> = cav
                .edges
                .iter()
                .filter_map(|&(x, y, _, _)| self.tr.constraint_id(x, y))
                .map(|id| id as usize)
                .filter(|&id| {
                    let p = &self.pieces[id];
                    let pa = v2(self.tr.pts[p.a as usize]);
                    let pb = v2(self.tr.pts[p.b as usize]);
                    let q = v2(cc);
                    (pa - q).dot(pb - q) < 0.0
                })
                .collect();
            if !encroached.is_empty() {
                let mut any = false;
                for id in encroached {
                    any |= self.try_split_for(id, &mut seg_queue, &mut tri_queue)?;
                }
                if any {
                    tri_queue.push_back((t, vs));
                }
                continue;
            }
            match self.tr.insert_in_cavity(cc, cav) {
                Ok(_) => {
                    self.input_vertex.push(false);
                    if self.tr.pts.len() > MAX_VERTICES {
                        return Err(Error::Mesh { loop_index: 0, segment: 0, reason: "vertex budget exhausted".into() });
                    }
                    self.requeue_created(&mut tri_queue, &mut seg_queue);
                }
                Err(TriError::Duplicate(..)) | Err(TriError::Degenerate(..)) => continue,
                Err(e) => return Err(self.tri_error(None, e)),
            }
        }
        Ok(())
    }

    fn try_split_for(&mut self, id: usize, seg_queue: &mut VecDeque<usize>, tri_queue: &mut VecDeque<(u32, [u32; 3])>) -> Result<bool> {
        if !self.pieces[id].alive || self.piece_length(&self.pieces[id]) < 2.0 * self.min_piece {
            return Ok(false);
        }
        let new = self.split(id, true)?;
        seg_queue.extend(new);
        self.requeue_created(tri_queue, seg_queue);
        Ok(true)
    }

    fn requeue_created(&mut self, tri_queue: &mut VecDeque<(u32, [u32; 3])>, seg_queue: &mut VecDeque<usize>) {
        for &t in &self.tr.created {
            let tri = self.tr.tris[t as usize];
            if tri.inside {
                tri_queue.push_back((t, tri.v));
                for i in 0..3 {
                    if let Some(id) = self.tr.constraint_id(tri.v[(i + 1) % 3], tri.v[(i + 2) % 3]) {
                        seg_queue.push_back(id as usize);
                    }
                }
            }
        }
    }

    fn finish(self, options: &MeshOptions) -> Result<Mesh> {
        let n = self.tr.pts.len();
        let mut map = vec![usize::MAX; n];
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for (_, t) in self.tr.live_triangles() {
            if !t.inside {
                continue;
            }
            if t.v.iter().any(|&v| v < Triangulation::SUPER) {
                return Err(Error::Mesh { loop_index: 0, segment: 0, reason: "domain triangle touches the enclosing super-triangle".into() });
            }
            let mut ids = [0usize; 3];
            for (k, &v) in t.v.iter().enumerate() {
                if map[v as usize] == usize::MAX {
                    map[v as usize] = vertices.len();
                    vertices.push(v2(self.tr.pts[v as usize]));
                }
                ids[k] = map[v as usize];
            }
            triangles.push(ids);
        }
        let mut boundary = vec![false; vertices.len()];
        let mut boundary_edges = Vec::new();
        for p in self.pieces.iter().filter(|p| p.alive) {
            let (a, b) = (map[p.a as usize], map[p.b as usize]);
            if a == usize::MAX || b == usize::MAX {
                return Err(self.mesh_error(p, "boundary piece is not attached to the mesh"));
            }
            boundary[a] = true;
            boundary[b] = true;
            boundary_edges.push([a, b]);
        }
        let mesh = Mesh {
            vertices,
            triangles,
            boundary,
            boundary_edges,
            h: options.h,
            grading: options.grading,
            domain_area: crate::geometry::area(self.domain)?,
            domain_perimeter: crate::geometry::perimeter(self.domain)?,
        };
        mesh.validate()?;
        Ok(mesh)
    }
}

/// Triangulates `domain` with target size `options.h`, grading the size
/// towards reentrant corners.
pub fn mesh_domain(domain: &DomainSpec<f64>, options: &MeshOptions) -> Result<Mesh> {
    let h = options.h;
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Domain(format!("mesh size must be positive, got {h}")));
    }
    if !(options.grading > 0.0 && options.grading <= 1.0) {
        return Err(Error::Domain(format!("grading exponent must lie in (0, 1], got {}", options.grading)));
    }
    if !(options.min_angle_deg > 0.0 && options.min_angle_deg <= 30.0) {
        return Err(Error::Domain(format!("minimum angle must lie in (0°, 30°], got {}", options.min_angle_deg)));
    }
    let diam = domain.diameter_estimate();
    let corners = detect_corners(domain, DEFAULT_ANGLE_TOL)?;
    let size = SizeField::new(h, options.grading, &corners, options.grading_radius_fraction * diam);
    let (lo, hi) = domain.bounding_box();
    let mut tr = Triangulation::new(p2(lo), p2(hi));
    let mut pieces = Vec::new();
    let mut input_vertex = vec![false; 3];
    for (li, lp) in domain.loops().iter().enumerate() {
        let mut loop_vertices: Vec<Vec<(u32, f64)>> = Vec::new();
        let first = {
            let p = p2(lp.segments[0].start());
            let hint = tr.last();
            let v = tr.insert(p, hint, None).map_err(|e| Error::Mesh { loop_index: li, segment: 0, reason: e.to_string() })?;
            input_vertex.push(true);
            v
        };
        let mut prev = first;
        for (si, seg) in lp.segments.iter().enumerate() {
            let params = sample_segment(seg, &size, h, diam);
            let mut ids = vec![(prev, 0.0)];
            for (k, &s) in params.iter().enumerate().skip(1) {
                let last = k == params.len() - 1;
                let v = if last && si == lp.segments.len() - 1 {
                    first
                } else {
                    let p = p2(seg.point(s));
                    let hint = tr.last();
                    let v = tr.insert(p, hint, None).map_err(|e| Error::Mesh { loop_index: li, segment: si, reason: e.to_string() })?;
                    input_vertex.push(last);
                    v
                };
                ids.push((v, s));
            }
            prev = ids.last().expect("nonempty").0;
            loop_vertices.push(ids);
        }
        for (si, ids) in loop_vertices.iter().enumerate() {
            for w in ids.windows(2) {
                pieces.push(Piece { a: w[0].0, b: w[1].0, loop_index: li, segment: si, s0: w[0].1, s1: w[1].1, alive: true });
            }
        }
    }
    let min_piece = (size.smallest() * 1e-3).max(diam * 1e-12);
    let cos_limit = options.min_angle_deg.to_radians().cos();
    let mut mesher = Mesher { domain, tr, pieces, size, min_piece, cos_limit, input_vertex };
    mesher.run()?;
    mesher.finish(options)
}
