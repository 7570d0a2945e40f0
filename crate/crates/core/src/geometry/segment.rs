use crate::error::Result;
use crate::quadrature;
use crate::scalar::Real;

use super::vec2::Vec2;

/// Default relative tolerance for quadrature on parametric segments.
pub const QUADRATURE_REL_TOL: f64 = 1e-10;

pub(crate) fn quad_tol<T: Real>() -> T {
    T::lit(QUADRATURE_REL_TOL).max(T::epsilon() * T::lit(100.0))
}

/// Smooth parametric curve families with closed-form derivatives.
#[derive(Clone, Debug, PartialEq)]
pub enum Curve<T> {
    /// `center + R(rotation)·(a cos φ, b sin φ)` for φ from `start_angle` to `end_angle`.
    Ellipse {
        center: Vec2<T>,
        semi_axes: (T, T),
        rotation: T,
        start_angle: T,
        end_angle: T,
    },
    /// Cubic Bézier curve.
    Bezier { control: [Vec2<T>; 4] },
}

impl<T: Real> Curve<T> {
    fn ellipse_angle(start: T, end: T, s: T) -> T {
        start + s * (end - start)
    }

    pub fn point(&self, s: T) -> Vec2<T> {
        match *self {
            Curve::Ellipse { center, semi_axes: (a, b), rotation, start_angle, end_angle } => {
                let phi = Self::ellipse_angle(start_angle, end_angle, s);
                center + Vec2::new(a * phi.cos(), b * phi.sin()).rotated(rotation)
            }
            Curve::Bezier { control: [p0, p1, p2, p3] } => {
                let u = T::one() - s;
                let three = T::lit(3.0);
                p0 * (u * u * u) + p1 * (three * u * u * s) + p2 * (three * u * s * s) + p3 * (s * s * s)
            }
        }
    }

    /// First derivative with respect to the unit parameter `s`.
    pub fn d1(&self, s: T) -> Vec2<T> {
        match *self {
            Curve::Ellipse { semi_axes: (a, b), rotation, start_angle, end_angle, .. } => {
                let phi = Self::ellipse_angle(start_angle, end_angle, s);
                let dphi = end_angle - start_angle;
                Vec2::new(-a * phi.sin(), b * phi.cos()).rotated(rotation) * dphi
            }
            Curve::Bezier { control: [p0, p1, p2, p3] } => {
                let u = T::one() - s;
                let three = T::lit(3.0);
                let six = T::lit(6.0);
                (p1 - p0) * (three * u * u) + (p2 - p1) * (six * u * s) + (p3 - p2) * (three * s * s)
            }
        }
    }

    pub fn d2(&self, s: T) -> Vec2<T> {
        match *self {
            Curve::Ellipse { semi_axes: (a, b), rotation, start_angle, end_angle, .. } => {
                let phi = Self::ellipse_angle(start_angle, end_angle, s);
                let dphi = end_angle - start_angle;
                Vec2::new(-a * phi.cos(), -b * phi.sin()).rotated(rotation) * (dphi * dphi)
            }
            Curve::Bezier { control: [p0, p1, p2, p3] } => {
                let six = T::lit(6.0);
                let u = T::one() - s;
                (p2 - p1 * T::lit(2.0) + p0) * (six * u) + (p3 - p2 * T::lit(2.0) + p1) * (six * s)
            }
        }
    }
}

/// One smooth piece of a boundary loop.
#[derive(Clone, Debug, PartialEq)]
pub enum Segment<T> {
    Line { from: Vec2<T>, to: Vec2<T> },
    /// Circular arc around `center`; positive `radius` runs counterclockwise.
    /// Coinciding endpoints denote a full circle.
    Arc { from: Vec2<T>, to: Vec2<T>, center: Vec2<T>, radius: T },
    Parametric(Curve<T>),
}

impl<T: Real> Segment<T> {
    pub fn line(from: Vec2<T>, to: Vec2<T>) -> Self {
        Segment::Line { from, to }
    }

    pub fn arc(from: Vec2<T>, to: Vec2<T>, center: Vec2<T>, radius: T) -> Self {
        Segment::Arc { from, to, center, radius }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Segment::Line { .. } => "line",
            Segment::Arc { .. } => "arc",
            Segment::Parametric(_) => "parametric",
        }
    }

    pub fn start(&self) -> Vec2<T> {
        match self {
            Segment::Line { from, .. } | Segment::Arc { from, .. } => *from,
            Segment::Parametric(c) => c.point(T::zero()),
        }
    }

    pub fn end(&self) -> Vec2<T> {
        match self {
            Segment::Line { to, .. } | Segment::Arc { to, .. } => *to,
            Segment::Parametric(c) => c.point(T::one()),
        }
    }

    /// Start angle and signed sweep of an arc. Sweep lies in `(0, 2π]` for
    /// counterclockwise arcs and `[-2π, 0)` for clockwise ones.
    pub fn arc_angles(&self) -> Option<(T, T)> {
        let Segment::Arc { from, to, center, radius } = *self else {
            return None;
        };
        let two_pi = T::TAU();
        let a0 = (from - center).angle();
        let a1 = (to - center).angle();
        let mut ccw = a1 - a0;
        while ccw <= T::zero() {
            ccw += two_pi;
        }
        while ccw > two_pi {
            ccw -= two_pi;
        }
        // Angles within rounding of a full turn collapse to the full circle.
        let full_tol = T::epsilon().sqrt();
        if from.distance(to) <= full_tol * radius.abs() {
            ccw = two_pi;
        }
        let sweep = if radius > T::zero() {
            ccw
        } else {
            let cw = two_pi - ccw;
            -(if cw <= T::zero() { two_pi } else { cw })
        };
        Some((a0, sweep))
    }

    /// Point at unit parameter `s ∈ [0, 1]`.
    pub fn point(&self, s: T) -> Vec2<T> {
        match *self {
            Segment::Line { from, to } => from + (to - from) * s,
            Segment::Arc { center, radius, .. } => {
                let (a0, sweep) = self.arc_angles().expect("arc");
                center + Vec2::from_angle(a0 + s * sweep) * radius.abs()
            }
            Segment::Parametric(ref c) => c.point(s),
        }
    }

    /// Velocity with respect to the unit parameter.
    pub fn derivative(&self, s: T) -> Vec2<T> {
        match *self {
            Segment::Line { from, to } => to - from,
            Segment::Arc { radius, .. } => {
                let (a0, sweep) = self.arc_angles().expect("arc");
                Vec2::from_angle(a0 + s * sweep).perp() * (radius.abs() * sweep)
            }
            Segment::Parametric(ref c) => c.d1(s),
        }
    }

    pub fn tangent_start(&self) -> Vec2<T> {
        self.derivative(T::zero()).normalized()
    }

    pub fn tangent_end(&self) -> Vec2<T> {
        self.derivative(T::one()).normalized()
    }

    pub fn length(&self) -> Result<T> {
        match *self {
            Segment::Line { from, to } => Ok(from.distance(to)),
            Segment::Arc { radius, .. } => Ok(radius.abs() * self.arc_angles().expect("arc").1.abs()),
            Segment::Parametric(ref c) => {
                quadrature::integrate(|s| c.d1(s).norm(), T::zero(), T::one(), quad_tol())
            }
        }
    }

    /// Contribution `½∮(x dy − y dx)` to the signed enclosed area.
    pub fn area_contribution(&self) -> Result<T> {
        let half = T::lit(0.5);
        match *self {
            Segment::Line { from, to } => Ok(half * from.cross(to)),
            Segment::Arc { from, to, center, radius } => {
                let sweep = self.arc_angles().expect("arc").1;
                Ok(half * (center.cross(to - from) + radius * radius * sweep))
            }
            Segment::Parametric(ref c) => {
                // Integrate relative to the chord midpoint to limit cancellation.
                let origin = (c.point(T::zero()) + c.point(T::one())) * half;
                let rel = quadrature::integrate(
                    |s| half * (c.point(s) - origin).cross(c.d1(s)),
                    T::zero(),
                    T::one(),
                    quad_tol(),
                )?;
                Ok(rel + half * origin.cross(c.point(T::one()) - c.point(T::zero())))
            }
        }
    }

    /// Signed curvature integral `∫ k ds` (total tangent turning) over the open segment.
    pub fn turning(&self) -> Result<T> {
        match *self {
            Segment::Line { .. } => Ok(T::zero()),
            Segment::Arc { .. } => Ok(self.arc_angles().expect("arc").1),
            Segment::Parametric(ref c) => quadrature::integrate(
                |s| {
                    let v = c.d1(s);
                    v.cross(c.d2(s)) / v.dot(v)
                },
                T::zero(),
                T::one(),
                quad_tol(),
            ),
        }
    }

    /// Number of chords used by polyline approximations at default resolution.
    pub(crate) fn default_pieces(&self) -> usize {
        match self {
            Segment::Line { .. } => 1,
            Segment::Arc { .. } => {
                let sweep = self.arc_angles().expect("arc").1.abs().as_f64();
                ((sweep / (std::f64::consts::PI / 32.0)).ceil() as usize).max(4)
            }
            Segment::Parametric(_) => 64,
        }
    }

    /// Polyline through `pieces + 1` equally spaced parameter values.
    pub fn sample(&self, pieces: usize) -> Vec<Vec2<T>> {
        (0..=pieces)
            .map(|i| self.point(T::from_count(i) / T::from_count(pieces)))
            .collect()
    }

    /// Applies `p ↦ R(angle)·(scale·p) + shift`.
    pub fn transformed(&self, angle: T, scale: T, shift: Vec2<T>) -> Self {
        let map = |p: Vec2<T>| (p * scale).rotated(angle) + shift;
        match *self {
            Segment::Line { from, to } => Segment::Line { from: map(from), to: map(to) },
            Segment::Arc { from, to, center, radius } => Segment::Arc {
                from: map(from),
                to: map(to),
                center: map(center),
                radius: radius * scale,
            },
            Segment::Parametric(Curve::Ellipse { center, semi_axes: (a, b), rotation, start_angle, end_angle }) => {
                Segment::Parametric(Curve::Ellipse {
                    center: map(center),
                    semi_axes: (a * scale, b * scale),
                    rotation: rotation + angle,
                    start_angle,
                    end_angle,
                })
            }
            Segment::Parametric(Curve::Bezier { control }) => Segment::Parametric(Curve::Bezier {
                control: control.map(map),
            }),
        }
    }

    /// Same curve traversed backwards.
    pub fn reversed(&self) -> Self {
        match *self {
            Segment::Line { from, to } => Segment::Line { from: to, to: from },
            Segment::Arc { from, to, center, radius } => Segment::Arc { from: to, to: from, center, radius: -radius },
            Segment::Parametric(Curve::Ellipse { center, semi_axes, rotation, start_angle, end_angle }) => {
                Segment::Parametric(Curve::Ellipse {
                    center,
                    semi_axes,
                    rotation,
                    start_angle: end_angle,
                    end_angle: start_angle,
                })
            }
            Segment::Parametric(Curve::Bezier { control: [a, b, c, d] }) => {
                Segment::Parametric(Curve::Bezier { control: [d, c, b, a] })
            }
        }
    }
}
