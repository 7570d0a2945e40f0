//! Constructors for the reference domains used throughout the crate.

use super::{BoundaryLoop, Curve, DomainSpec, Segment, Vec2};
use crate::error::Result;
use crate::scalar::Real;

fn v<T: Real>(x: f64, y: f64) -> Vec2<T> {
    Vec2::new(T::lit(x), T::lit(y))
}

/// `[0, a] × [0, b]`.
pub fn rectangle<T: Real>(a: T, b: T) -> Result<DomainSpec<T>> {
    let z = T::zero();
    DomainSpec::polygon(
        format!("rectangle {a}x{b}"),
        &[Vec2::new(z, z), Vec2::new(a, z), Vec2::new(a, b), Vec2::new(z, b)],
    )
}

/// Disk of radius `r` centered at the origin, built from four quarter arcs.
pub fn disk<T: Real>(r: T) -> Result<DomainSpec<T>> {
    let c = Vec2::zero();
    let pts: Vec<Vec2<T>> = (0..4)
        .map(|k| Vec2::from_angle(T::FRAC_PI_2() * T::from_count(k)) * r)
        .collect();
    let segs = (0..4).map(|k| Segment::arc(pts[k], pts[(k + 1) % 4], c, r)).collect();
    DomainSpec::new(format!("disk r={r}"), vec![BoundaryLoop::new(segs)])
}

/// Circular sector of opening `theta` and radius `r` with apex at the origin.
pub fn sector<T: Real>(theta: T, r: T) -> Result<DomainSpec<T>> {
    let o = Vec2::zero();
    let a = Vec2::new(r, T::zero());
    let b = Vec2::from_angle(theta) * r;
    DomainSpec::new(
        format!("sector theta={theta} r={r}"),
        vec![BoundaryLoop::new(vec![
            Segment::line(o, a),
            Segment::arc(a, b, o, r),
            Segment::line(b, o),
        ])],
    )
}

/// L-shaped hexagon made of three `unit × unit` squares; reflex corner at `(unit, unit)`.
pub fn l_shape<T: Real>(unit: T) -> Result<DomainSpec<T>> {
    let pts: Vec<Vec2<T>> = [(0.0, 0.0), (2.0, 0.0), (2.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.0, 2.0)]
        .iter()
        .map(|&(x, y)| v::<T>(x, y) * unit)
        .collect();
    DomainSpec::polygon(format!("l-shape unit={unit}"), &pts)
}

/// Equilateral triangle with one side on the x-axis.
pub fn equilateral_triangle<T: Real>(side: T) -> Result<DomainSpec<T>> {
    let h = side * T::lit(3f64.sqrt() / 2.0);
    let z = T::zero();
    DomainSpec::polygon(
        format!("equilateral triangle side={side}"),
        &[Vec2::new(z, z), Vec2::new(side, z), Vec2::new(side * T::lit(0.5), h)],
    )
}

/// Regular `n`-gon inscribed in a circle of radius `circumradius`.
pub fn regular_polygon<T: Real>(n: usize, circumradius: T) -> Result<DomainSpec<T>> {
    let pts: Vec<Vec2<T>> = (0..n)
        .map(|k| Vec2::from_angle(T::TAU() * T::from_count(k) / T::from_count(n)) * circumradius)
        .collect();
    DomainSpec::polygon(format!("regular {n}-gon"), &pts)
}

/// Square of side `outer` centered at the origin with a centered square hole of side `inner`.
pub fn square_with_square_hole<T: Real>(outer: T, inner: T) -> Result<DomainSpec<T>> {
    let square = |s: T| {
        let h = s * T::lit(0.5);
        [Vec2::new(-h, -h), Vec2::new(h, -h), Vec2::new(h, h), Vec2::new(-h, h)]
    };
    let outer_loop = BoundaryLoop::polygon(&square(outer));
    let hole = BoundaryLoop::polygon(&square(inner)).reversed();
    DomainSpec::new(format!("square {outer} with hole {inner}"), vec![outer_loop, hole])
}

/// Ellipse with semi-axes `a`, `b` as a single parametric segment.
pub fn ellipse<T: Real>(a: T, b: T) -> Result<DomainSpec<T>> {
    let seg = Segment::Parametric(Curve::Ellipse {
        center: Vec2::zero(),
        semi_axes: (a, b),
        rotation: T::zero(),
        start_angle: T::zero(),
        end_angle: T::TAU(),
    });
    DomainSpec::new(format!("ellipse {a}x{b}"), vec![BoundaryLoop::new(vec![seg])])
}

/// Random simple polygon with `n ≥ 3` vertices, star-shaped about the origin:
/// one vertex per angular sector `[2πk/n, 2π(k+1)/n)` at a radius in `[0.3, 1]`.
pub fn random_star_polygon<R: rand::Rng + ?Sized>(rng: &mut R, n: usize) -> Result<DomainSpec<f64>> {
    if n < 3 {
        return Err(crate::error::Error::Domain(format!("a polygon needs at least 3 vertices, got {n}")));
    }
    let pts: Vec<Vec2<f64>> = (0..n)
        .map(|k| {
            let phi = std::f64::consts::TAU * (k as f64 + 0.1 + 0.8 * rng.gen::<f64>()) / n as f64;
            Vec2::from_angle(phi) * rng.gen_range(0.3..1.0)
        })
        .collect();
    DomainSpec::polygon(format!("random {n}-gon"), &pts)
}
