//! Planar domains with piecewise-smooth boundary and their geometric invariants.
//!
//! Outer loops run counterclockwise and holes clockwise, so the domain always
//! lies to the left of the direction of travel. Interior corner angles and the
//! sign of the boundary curvature both follow from that convention.

mod segment;
pub mod shapes;
mod vec2;

pub use segment::{Curve, Segment, QUADRATURE_REL_TOL};
pub use vec2::{turning_angle, Vec2};

use crate::error::{Error, Result};
use crate::scalar::{CompensatedSum, Real};

/// Default tolerance separating corners from smooth junctions.
pub const DEFAULT_ANGLE_TOL: f64 = 1e-6;

/// Closed, positively oriented chain of segments.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryLoop<T> {
    pub segments: Vec<Segment<T>>,
}

impl<T: Real> BoundaryLoop<T> {
    pub fn new(segments: Vec<Segment<T>>) -> Self {
        Self { segments }
    }

    /// Closed polygonal loop through `vertices`.
    pub fn polygon(vertices: &[Vec2<T>]) -> Self {
        let n = vertices.len();
        Self::new(
            (0..n)
                .map(|i| Segment::line(vertices[i], vertices[(i + 1) % n]))
                .collect(),
        )
    }

    pub fn signed_area(&self) -> Result<T> {
        let mut acc = CompensatedSum::new();
        for s in &self.segments {
            acc.add(s.area_contribution()?);
        }
        Ok(acc.value())
    }

    pub fn length(&self) -> Result<T> {
        let mut acc = CompensatedSum::new();
        for s in &self.segments {
            acc.add(s.length()?);
        }
        Ok(acc.value())
    }

    pub fn reversed(&self) -> Self {
        Self::new(self.segments.iter().rev().map(Segment::reversed).collect())
    }

    /// Polyline approximation; the last point repeats the first.
    pub fn polyline(&self) -> Vec<Vec2<T>> {
        let mut pts = Vec::new();
        for s in &self.segments {
            let samples = s.sample(s.default_pieces());
            pts.extend_from_slice(&samples[..samples.len() - 1]);
        }
        pts.push(pts[0]);
        pts
    }
}

/// A validated planar domain: first loop outer boundary, remaining loops holes.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainSpec<T> {
    label: String,
    loops: Vec<BoundaryLoop<T>>,
}

/// Boundary vertex where the one-sided tangents meet at an angle other than π.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Corner<T> {
    pub vertex: Vec2<T>,
    /// Opening angle measured through the interior, in `(0, 2π)`.
    pub theta: T,
    pub loop_index: usize,
    /// Segment ending at the vertex.
    pub incoming: usize,
    /// Segment starting at the vertex.
    pub outgoing: usize,
    pub tangent_in: Vec2<T>,
    pub tangent_out: Vec2<T>,
}

fn invalid(loop_index: usize, segment: usize, reason: impl Into<String>) -> Error {
    Error::InvalidDomain {
        loop_index,
        segment,
        reason: reason.into(),
    }
}

impl<T: Real> DomainSpec<T> {
    /// Validates the loops and builds a domain.
    pub fn new(label: impl Into<String>, loops: Vec<BoundaryLoop<T>>) -> Result<Self> {
        let domain = Self {
            label: label.into(),
            loops,
        };
        domain.validate()?;
        Ok(domain)
    }

    /// Simply connected polygon from counterclockwise vertices.
    pub fn polygon(label: impl Into<String>, vertices: &[Vec2<T>]) -> Result<Self> {
        Self::new(label, vec![BoundaryLoop::polygon(vertices)])
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn loops(&self) -> &[BoundaryLoop<T>] {
        &self.loops
    }

    pub fn hole_count(&self) -> usize {
        self.loops.len() - 1
    }

    /// Euler characteristic `1 − #holes`.
    pub fn euler_characteristic(&self) -> i64 {
        1 - self.hole_count() as i64
    }

    /// Axis-aligned bounding box from the default polylines.
    pub fn bounding_box(&self) -> (Vec2<T>, Vec2<T>) {
        let mut lo = Vec2::new(T::infinity(), T::infinity());
        let mut hi = Vec2::new(T::neg_infinity(), T::neg_infinity());
        for p in self.loops[0].polyline() {
            lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        (lo, hi)
    }

    pub fn diameter_estimate(&self) -> T {
        let (lo, hi) = self.bounding_box();
        lo.distance(hi)
    }

    /// Image under `p ↦ R(angle)·(scale·p) + shift`; orientation is preserved.
    pub fn transformed(&self, angle: T, scale: T, shift: Vec2<T>) -> Result<Self> {
        let loops = self
            .loops
            .iter()
            .map(|l| BoundaryLoop::new(l.segments.iter().map(|s| s.transformed(angle, scale, shift)).collect()))
            .collect();
        Self::new(self.label.clone(), loops)
    }

    pub fn scaled(&self, scale: T) -> Result<Self> {
        self.transformed(T::zero(), scale, Vec2::zero())
    }

    fn validate(&self) -> Result<()> {
        if self.loops.is_empty() {
            return Err(invalid(0, 0, "domain has no boundary loops"));
        }
        let scale = self
            .loops
            .iter()
            .flat_map(|l| l.segments.iter())
            .map(|s| s.start().x.abs().max(s.start().y.abs()))
            .fold(T::one(), T::max);
        let close_tol = T::epsilon() * T::lit(64.0) * scale;
        let rel_tol = T::lit(1e-9).max(T::epsilon() * T::lit(1e3));

        for (li, lp) in self.loops.iter().enumerate() {
            if lp.segments.is_empty() {
                return Err(invalid(li, 0, "loop has no segments"));
            }
            for (si, s) in lp.segments.iter().enumerate() {
                let len = s.length()?;
                if !(len > close_tol) {
                    return Err(invalid(li, si, "degenerate segment of zero length"));
                }
                if let Segment::Arc { from, to, center, radius } = *s {
                    let r = radius.abs();
                    if !(r > T::zero()) {
                        return Err(invalid(li, si, "arc radius must be nonzero"));
                    }
                    if ((from.distance(center) - r) / r).abs() > rel_tol || ((to.distance(center) - r) / r).abs() > rel_tol {
                        return Err(invalid(li, si, "arc endpoints are not at the stated radius from the center"));
                    }
                }
                if s.derivative(T::zero()).norm() == T::zero() || s.derivative(T::one()).norm() == T::zero() {
                    return Err(invalid(li, si, "segment has a vanishing end tangent"));
                }
                let next = &lp.segments[(si + 1) % lp.segments.len()];
                if s.end().distance(next.start()) > close_tol {
                    return Err(invalid(li, si, "segment end does not match the next segment start (loop not closed)"));
                }
                // Cusps and slits (interior angle 0 or 2π) violate the Lipschitz hypothesis.
                let phi = turning_angle(s.tangent_end(), next.tangent_start());
                if T::PI() - phi.abs() < T::lit(1e-9).max(T::epsilon() * T::lit(16.0)) {
                    return Err(invalid(li, (si + 1) % lp.segments.len(), "cusp or slit at segment junction"));
                }
            }
            let area = lp.signed_area()?;
            if li == 0 && !(area > T::zero()) {
                return Err(invalid(li, 0, "outer loop must be counterclockwise"));
            }
            if li > 0 && !(area < T::zero()) {
                return Err(invalid(li, 0, "hole loops must be clockwise"));
            }
        }
        self.check_simple()?;
        let outer = self.loops[0].polyline();
        for (li, lp) in self.loops.iter().enumerate().skip(1) {
            let p = lp.segments[0].point(T::lit(0.5));
            if !point_in_polyline(p, &outer) {
                return Err(invalid(li, 0, "hole lies outside the outer loop"));
            }
            for (lj, other) in self.loops.iter().enumerate().skip(1) {
                if lj != li && point_in_polyline(p, &other.polyline()) {
                    return Err(invalid(li, 0, "hole lies inside another hole"));
                }
            }
        }
        Ok(())
    }

    /// Pairwise intersection test of the boundary polylines.
    fn check_simple(&self) -> Result<()> {
        struct Piece<T> {
            a: Vec2<T>,
            b: Vec2<T>,
            lp: usize,
            seg: usize,
            idx: usize,
        }
        let mut pieces = Vec::new();
        let mut loop_len = Vec::new();
        for (li, lp) in self.loops.iter().enumerate() {
            let mut idx = 0;
            for (si, s) in lp.segments.iter().enumerate() {
                let pts = s.sample(s.default_pieces());
                for w in pts.windows(2) {
                    pieces.push(Piece { a: w[0], b: w[1], lp: li, seg: si, idx });
                    idx += 1;
                }
            }
            loop_len.push(idx);
        }
        for i in 0..pieces.len() {
            for j in (i + 1)..pieces.len() {
                let (p, q) = (&pieces[i], &pieces[j]);
                if p.lp == q.lp {
                    let n = loop_len[p.lp];
                    let d = q.idx - p.idx;
                    if d == 1 || d == n - 1 || n <= 2 {
                        continue;
                    }
                }
                if segments_intersect(p.a, p.b, q.a, q.b) {
                    return Err(invalid(
                        q.lp,
                        q.seg,
                        format!("boundary intersects itself (loop {}, segment {})", p.lp, p.seg),
                    ));
                }
            }
        }
        Ok(())
    }
}

fn orient<T: Real>(a: Vec2<T>, b: Vec2<T>, c: Vec2<T>) -> T {
    (b - a).cross(c - a)
}

fn on_segment<T: Real>(a: Vec2<T>, b: Vec2<T>, p: Vec2<T>) -> bool {
    p.x >= a.x.min(b.x) && p.x <= a.x.max(b.x) && p.y >= a.y.min(b.y) && p.y <= a.y.max(b.y)
}

/// Closed-segment intersection test, including collinear overlap.
pub(crate) fn segments_intersect<T: Real>(a: Vec2<T>, b: Vec2<T>, c: Vec2<T>, d: Vec2<T>) -> bool {
    let d1 = orient(c, d, a);
    let d2 = orient(c, d, b);
    let d3 = orient(a, b, c);
    let d4 = orient(a, b, d);
    let z = T::zero();
    if ((d1 > z && d2 < z) || (d1 < z && d2 > z)) && ((d3 > z && d4 < z) || (d3 < z && d4 > z)) {
        return true;
    }
    (d1 == z && on_segment(c, d, a))
        || (d2 == z && on_segment(c, d, b))
        || (d3 == z && on_segment(a, b, c))
        || (d4 == z && on_segment(a, b, d))
}

/// Even-odd point-in-polygon test on a closed polyline.
pub(crate) fn point_in_polyline<T: Real>(p: Vec2<T>, poly: &[Vec2<T>]) -> bool {
    let mut inside = false;
    for w in poly.windows(2) {
        let (a, b) = (w[0], w[1]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

/// All junctions whose tangent turning differs from zero by more than
/// `angle_tol`, i.e. whose interior angle differs from π.
pub fn detect_corners<T: Real>(domain: &DomainSpec<T>, angle_tol: T) -> Result<Vec<Corner<T>>> {
    if !(angle_tol > T::zero()) {
        return Err(Error::Domain("angle_tol must be positive".into()));
    }
    let mut corners = Vec::new();
    for (li, lp) in domain.loops.iter().enumerate() {
        let n = lp.segments.len();
        for si in 0..n {
            let incoming = &lp.segments[si];
            let outgoing_idx = (si + 1) % n;
            let outgoing = &lp.segments[outgoing_idx];
            if incoming.length()? == T::zero() {
                return Err(invalid(li, si, "degenerate segment of zero length"));
            }
            let tangent_in = incoming.tangent_end();
            let tangent_out = outgoing.tangent_start();
            let phi = turning_angle(tangent_in, tangent_out);
            if phi.abs() > angle_tol {
                corners.push(Corner {
                    vertex: outgoing.start(),
                    theta: T::PI() - phi,
                    loop_index: li,
                    incoming: si,
                    outgoing: outgoing_idx,
                    tangent_in,
                    tangent_out,
                });
            }
        }
    }
    Ok(corners)
}

/// Area enclosed by the domain (holes subtracted).
pub fn area<T: Real>(domain: &DomainSpec<T>) -> Result<T> {
    let mut acc = CompensatedSum::new();
    for lp in &domain.loops {
        acc.add(lp.signed_area()?);
    }
    Ok(acc.value())
}

/// Total boundary length over all loops.
pub fn perimeter<T: Real>(domain: &DomainSpec<T>) -> Result<T> {
    let mut acc = CompensatedSum::new();
    for lp in &domain.loops {
        acc.add(lp.length()?);
    }
    Ok(acc.value())
}

/// `∫ k ds` over the boundary with corner points removed.
pub fn curvature_integral<T: Real>(domain: &DomainSpec<T>) -> Result<T> {
    let mut acc = CompensatedSum::new();
    for s in domain.loops.iter().flat_map(|l| l.segments.iter()) {
        acc.add(s.turning()?);
    }
    Ok(acc.value())
}

/// Gauss–Bonnet residual `|∫k ds − (Σθ_j + π(2χ − n))|`.
pub fn gauss_bonnet_check<T: Real>(domain: &DomainSpec<T>) -> Result<T> {
    let corners = detect_corners(domain, T::lit(DEFAULT_ANGLE_TOL))?;
    let curvature = curvature_integral(domain)?;
    let mut rhs = CompensatedSum::new();
    for c in &corners {
        rhs.add(c.theta);
    }
    let chi = T::lit(domain.euler_characteristic() as f64);
    let n = T::from_count(corners.len());
    rhs.add(T::PI() * (T::lit(2.0) * chi - n));
    Ok((curvature - rhs.value()).abs())
}

#[cfg(test)]
mod tests {
    use super::shapes;
    use super::*;
    use std::f64::consts::PI;

    const TOL: f64 = 1e-6;

    fn thetas(d: &DomainSpec<f64>) -> Vec<f64> {
        let mut t: Vec<f64> = detect_corners(d, TOL).unwrap().iter().map(|c| c.theta).collect();
        t.sort_by(f64::total_cmp);
        t
    }

    #[test]
    fn unit_square_corners_and_measures() {
        let sq = shapes::rectangle(1.0, 1.0).unwrap();
        let t = thetas(&sq);
        assert_eq!(t.len(), 4);
        assert!(t.iter().all(|&x| (x - PI / 2.0).abs() < 1e-15));
        assert!((area(&sq).unwrap() - 1.0).abs() < 1e-15);
        assert!((perimeter(&sq).unwrap() - 4.0).abs() < 1e-15);
        assert_eq!(curvature_integral(&sq).unwrap(), 0.0);
        assert!(gauss_bonnet_check(&sq).unwrap() < 1e-14);
    }

    #[test]
    fn disk_has_no_corners() {
        let d = shapes::disk(1.0).unwrap();
        assert!(thetas(&d).is_empty());
        assert!((area(&d).unwrap() - PI).abs() < 1e-14);
        assert!((perimeter(&d).unwrap() - 2.0 * PI).abs() < 1e-14);
        assert!((curvature_integral(&d).unwrap() - 2.0 * PI).abs() < 1e-14);
        assert!(gauss_bonnet_check(&d).unwrap() < 1e-14);
    }

    #[test]
    fn l_shape_has_one_reflex_corner() {
        let l = shapes::l_shape(1.0).unwrap();
        let t = thetas(&l);
        assert_eq!(t.len(), 6);
        assert!(t[..5].iter().all(|&x| (x - PI / 2.0).abs() < 1e-15));
        assert!((t[5] - 1.5 * PI).abs() < 1e-15);
        assert!(gauss_bonnet_check(&l).unwrap() < 1e-14);
    }

    #[test]
    fn quarter_disk() {
        let q = shapes::sector(PI / 2.0, 1.0).unwrap();
        assert!((perimeter(&q).unwrap() - (2.0 + PI / 2.0)).abs() < 1e-14);
        assert!((area(&q).unwrap() - PI / 4.0).abs() < 1e-15);
        assert!((curvature_integral(&q).unwrap() - PI / 2.0).abs() < 1e-15);
        assert_eq!(thetas(&q).len(), 3);
        assert!(gauss_bonnet_check(&q).unwrap() < 1e-14);
    }

    #[test]
    fn half_disk_center_is_not_a_corner() {
        let h = shapes::sector(PI, 1.0).unwrap();
        let t = thetas(&h);
        assert_eq!(t.len(), 2);
        assert!(gauss_bonnet_check(&h).unwrap() < 1e-14);
    }

    #[test]
    fn square_with_hole() {
        let d = shapes::square_with_square_hole(1.0f64, 0.5).unwrap();
        assert_eq!(d.euler_characteristic(), 0);
        assert!((area(&d).unwrap() - 0.75).abs() < 1e-15);
        let t = thetas(&d);
        assert_eq!(t.len(), 8);
        // Hole corners are reflex as seen from the domain.
        assert_eq!(t.iter().filter(|&&x| x > PI).count(), 4);
        assert!(gauss_bonnet_check(&d).unwrap() < 1e-14);
    }

    #[test]
    fn ellipse_is_smooth_and_satisfies_gauss_bonnet() {
        let e = shapes::ellipse(2.0, 1.0).unwrap();
        assert!(thetas(&e).is_empty());
        assert!((area(&e).unwrap() - 2.0 * PI).abs() < 1e-10);
        assert!(gauss_bonnet_check(&e).unwrap() < 1e-9);
    }

    #[test]
    fn rejects_open_loop_and_bad_orientation() {
        let open = BoundaryLoop::new(vec![
            Segment::line(Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)),
            Segment::line(Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0)),
            Segment::line(Vec2::new(1.0, 1.0), Vec2::new(0.1, 0.0)),
        ]);
        assert!(matches!(DomainSpec::new("open", vec![open]), Err(Error::InvalidDomain { .. })));
        let cw = BoundaryLoop::polygon(&[Vec2::new(0.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(1.0, 1.0), Vec2::new(1.0, 0.0)]);
        assert!(DomainSpec::new("cw", vec![cw]).is_err());
    }

    #[test]
    fn rejects_self_intersection_and_slits() {
        let bowtie = [Vec2::new(0.0, 0.0), Vec2::new(2.0, 0.0), Vec2::new(0.0, 2.0), Vec2::new(2.0, 2.0), Vec2::new(1.0, -1.0)];
        assert!(DomainSpec::polygon("bowtie", &bowtie).is_err());
        let slit = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 1.0), Vec2::new(0.5, 0.5), Vec2::new(1.0, 1.0), Vec2::new(0.0, 1.0)];
        assert!(DomainSpec::polygon("slit", &slit).is_err());
    }

    #[test]
    fn rejects_degenerate_segment() {
        let pts = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)];
        assert!(DomainSpec::polygon("dup", &pts).is_err());
    }

    #[test]
    fn removing_hole_increases_area_and_chi() {
        let d = shapes::square_with_square_hole(1.0f64, 0.5).unwrap();
        let filled = DomainSpec::new("filled", vec![d.loops()[0].clone()]).unwrap();
        assert!(area(&filled).unwrap() > area(&d).unwrap());
        assert_eq!(filled.euler_characteristic(), d.euler_characteristic() + 1);
    }

    #[test]
    fn generic_over_f32() {
        let sq = shapes::rectangle(1.0f32, 1.0).unwrap();
        assert_eq!(detect_corners(&sq, 1e-4f32).unwrap().len(), 4);
        assert!((area(&sq).unwrap() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn random_star_polygons_are_valid() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for n in 3..40 {
            let d = shapes::random_star_polygon(&mut rng, n).unwrap();
            assert!(area(&d).unwrap() > 0.0);
            assert!(gauss_bonnet_check(&d).unwrap() < 1e-10);
        }
        assert!(shapes::random_star_polygon(&mut rng, 2).is_err());
    }
}
