//! Poincaré-ball model of hyperbolic 3-space.
//!
//! Points of ℍ³ are vectors of Euclidean norm < 1, points of the sphere at
//! infinity are unit vectors. Mean curvature is always the *average* of the
//! principal curvatures, so a geodesic sphere of radius r has H = coth r and
//! the area of an equidistant family grows like dA/dV = 2H.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Points closer than this to the unit sphere are treated as being at infinity.
pub const INFINITY_GUARD: f64 = 1e-9;

pub type Vec3 = [f64; 3];

pub(crate) fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm(a: Vec3) -> f64 {
    dot(a, a).sqrt()
}

fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn scale(s: f64, a: Vec3) -> Vec3 {
    [s * a[0], s * a[1], s * a[2]]
}

/// A point of ℍ³ in the ball model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacePoint {
    coords: Vec3,
}

impl SpacePoint {
    pub fn new(coords: Vec3) -> Result<Self> {
        let n = norm(coords);
        if !n.is_finite() || n >= 1.0 {
            return Err(Error::AtInfinity { norm: n, limit: 1.0 });
        }
        Ok(Self { coords })
    }

    pub fn origin() -> Self {
        Self { coords: [0.0; 3] }
    }

    /// The point at hyperbolic distance `t` from the origin in direction `dir`.
    pub fn along(dir: BoundaryPoint, t: f64) -> Self {
        Self { coords: scale((0.5 * t).tanh(), dir.dir) }
    }

    /// Converts upper-half-space coordinates (x, y, z), z > 0, to the ball.
    ///
    /// The point (0, 0, 1) maps to the origin and the vertical axis to the
    /// segment between the poles.
    pub fn from_upper_half_space(p: Vec3) -> Result<Self> {
        if !(p[2] > 0.0) {
            return Err(Error::invalid(format!("upper half-space needs z > 0, got {}", p[2])));
        }
        let d = p[0] * p[0] + p[1] * p[1] + (p[2] + 1.0) * (p[2] + 1.0);
        let q = [2.0 * p[0] / d, 2.0 * p[1] / d, (dot(p, p) - 1.0) / d];
        Self::new(q)
    }

    pub fn coords(&self) -> Vec3 {
        self.coords
    }

    pub fn euclidean_norm(&self) -> f64 {
        norm(self.coords)
    }

    /// Hyperbolic distance to the origin.
    pub fn distance_from_origin(&self) -> f64 {
        2.0 * self.euclidean_norm().atanh()
    }

    pub fn distance(&self, other: &SpacePoint) -> f64 {
        let d = sub(self.coords, other.coords);
        let a = 1.0 - dot(self.coords, self.coords);
        let b = 1.0 - dot(other.coords, other.coords);
        (1.0 + 2.0 * dot(d, d) / (a * b)).acosh()
    }
}

/// A point of the sphere at infinity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    dir: Vec3,
}

impl BoundaryPoint {
    pub fn new(dir: Vec3) -> Result<Self> {
        let n = norm(dir);
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::invalid(format!("boundary point must be a unit vector, |b| = {n}")));
        }
        Ok(Self { dir })
    }

    pub fn normalized(dir: Vec3) -> Result<Self> {
        let n = norm(dir);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::invalid("cannot normalize a zero direction"));
        }
        Ok(Self { dir: scale(1.0 / n, dir) })
    }

    /// Polar angle measured from the north pole (0, 0, 1).
    pub fn from_polar(theta: f64, phi: f64) -> Self {
        Self {
            dir: [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()],
        }
    }

    pub fn north() -> Self {
        Self { dir: [0.0, 0.0, 1.0] }
    }

    pub fn dir(&self) -> Vec3 {
        self.dir
    }

    pub fn antipode(&self) -> Self {
        Self { dir: scale(-1.0, self.dir) }
    }
}

/// Busemann function B_b(x) = log((1 − |x|²) / |x − b|²).
///
/// Normalized so that B_b(0) = 0 and B_b grows at unit rate along the
/// geodesic from the origin towards b.
pub fn busemann(x: &SpacePoint, b: &BoundaryPoint) -> Result<f64> {
    let n = x.euclidean_norm();
    if n >= 1.0 - INFINITY_GUARD {
        return Err(Error::AtInfinity { norm: n, limit: 1.0 - INFINITY_GUARD });
    }
    let d = sub(x.coords, b.dir);
    Ok((1.0 - n * n).ln() - dot(d, d).ln())
}

/// The horosphere {B_b = s} as a Euclidean sphere (center, radius).
///
/// It is internally tangent to the unit sphere at b.
pub fn horosphere(b: &BoundaryPoint, level: f64) -> (Vec3, f64) {
    let e = level.exp();
    let center = scale(e / (1.0 + e), b.dir);
    (center, 1.0 / (1.0 + e))
}

/// sinh(y) − y without cancellation for small y.
pub(crate) fn sinh_minus_id(y: f64) -> f64 {
    if y.abs() < 0.5 {
        let y2 = y * y;
        let mut term = y * y2 / 6.0;
        let mut sum = term;
        let mut k = 3.0;
        while term.abs() > 1e-18 * sum.abs() {
            term *= y2 / ((k + 1.0) * (k + 2.0));
            sum += term;
            k += 2.0;
        }
        sum
    } else {
        y.sinh() - y
    }
}

/// Closed-form data of the geodesic ball of radius r.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallGeometry {
    pub radius: f64,
    pub area: f64,
    pub volume: f64,
    pub mean_curvature: f64,
}

impl BallGeometry {
    /// W = volume − ½·H·area, which equals −2πr.
    pub fn w_volume(&self) -> f64 {
        self.volume - 0.5 * self.mean_curvature * self.area
    }

    /// ∫H dA − 2·volume, which equals 4πr.
    pub fn minkowski_lhs(&self) -> f64 {
        self.mean_curvature * self.area - 2.0 * self.volume
    }
}

pub fn ball_closed_form(r: f64) -> Result<BallGeometry> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::invalid(format!("ball radius must be positive, got {r}")));
    }
    let sh = r.sinh();
    Ok(BallGeometry {
        radius: r,
        area: 4.0 * PI * sh * sh,
        volume: PI * sinh_minus_id(2.0 * r),
        mean_curvature: 1.0 / r.tanh(),
    })
}

/// One side of the equidistant family over a totally geodesic surface.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquidistantGeometry {
    pub distance: f64,
    pub area: f64,
    pub volume: f64,
    pub mean_curvature: f64,
}

/// Leaf at distance r from a totally geodesic seed of area `seed_area`.
pub fn equidistant_plane_closed_form(r: f64, seed_area: f64) -> Result<EquidistantGeometry> {
    if !(seed_area > 0.0) {
        return Err(Error::invalid(format!("seed area must be positive, got {seed_area}")));
    }
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::invalid(format!("distance must be non-negative, got {r}")));
    }
    let ch = r.cosh();
    Ok(EquidistantGeometry {
        distance: r,
        area: seed_area * ch * ch,
        volume: seed_area * (0.5 * r + 0.25 * (2.0 * r).sinh()),
        mean_curvature: r.tanh(),
    })
}

/// Tube about a geodesic with slope parameter a.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeGeometry {
    pub slope: f64,
    pub radius: f64,
    /// Diagonal of the induced metric in the (log-height, angle) chart.
    pub metric_diag: (f64, f64),
    /// Principal curvatures coth R and tanh R.
    pub shape_diag: (f64, f64),
    pub mean_curvature: f64,
}

pub fn tube_closed_form(a: f64) -> Result<TubeGeometry> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::invalid(format!("tube slope must be positive, got {a}")));
    }
    let s = (a * a + 1.0).sqrt();
    let a2 = a * a;
    Ok(TubeGeometry {
        slope: a,
        radius: ((1.0 + s) / a).ln(),
        metric_diag: ((1.0 + a2) / a2, 1.0 / a2),
        shape_diag: (s, 1.0 / s),
        mean_curvature: 0.5 * (s + 1.0 / s),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn busemann_vanishes_at_origin() {
        let b = BoundaryPoint::from_polar(0.7, 2.1);
        assert_eq!(busemann(&SpacePoint::origin(), &b).unwrap(), 0.0);
    }

    #[test]
    fn busemann_along_ray() {
        let b = BoundaryPoint::from_polar(1.2, -0.4);
        for t in [0.1, 1.0, 3.0, 7.5] {
            let toward = SpacePoint::along(b, t);
            let away = SpacePoint::along(b.antipode(), t);
            assert!((busemann(&toward, &b).unwrap() - t).abs() < 1e-10);
            assert!((busemann(&away, &b).unwrap() + t).abs() < 1e-10);
        }
    }

    #[test]
    fn busemann_rejects_points_at_infinity() {
        let b = BoundaryPoint::north();
        let x = SpacePoint::new([0.0, 0.0, 1.0 - 1e-10]).unwrap();
        assert!(matches!(busemann(&x, &b), Err(Error::AtInfinity { .. })));
        assert!(SpacePoint::new([1.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn boundary_point_requires_unit_norm() {
        assert!(BoundaryPoint::new([1.0, 1e-5, 0.0]).is_err());
        assert!(BoundaryPoint::new([0.6, 0.8, 0.0]).is_ok());
    }

    #[test]
    fn upper_half_space_conversion() {
        let o = SpacePoint::from_upper_half_space([0.0, 0.0, 1.0]).unwrap();
        assert!(o.euclidean_norm() < 1e-15);
        // vertical geodesic: (0,0,e^t) is at distance |t| from (0,0,1)
        let p = SpacePoint::from_upper_half_space([0.0, 0.0, 2.0f64.exp()]).unwrap();
        assert!((p.distance_from_origin() - 2.0).abs() < 1e-12);
        let q = SpacePoint::from_upper_half_space([0.3, -0.2, 0.5]).unwrap();
        let r = SpacePoint::from_upper_half_space([1.1, 0.4, 2.0]).unwrap();
        // upper half-space distance formula
        let dx: f64 = 0.8f64.powi(2) + 0.6f64.powi(2) + 1.5f64.powi(2);
        let expected = (1.0 + dx / (2.0 * 0.5 * 2.0)).acosh();
        assert!((q.distance(&r) - expected).abs() < 1e-12);
    }

    #[test]
    fn ball_at_unit_radius() {
        let g = ball_closed_form(1.0).unwrap();
        assert!((g.area - 17.355387).abs() < 1e-6);
        assert!((g.volume - 5.110933).abs() < 1e-6);
        assert!((g.mean_curvature - 1.313035).abs() < 1e-6);
        assert!((g.w_volume() + 2.0 * PI).abs() < 1e-12);
        assert!((g.minkowski_lhs() - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn ball_degenerates_smoothly() {
        let g = ball_closed_form(1e-6).unwrap();
        assert!(g.area < 1e-10);
        assert!(g.volume > 0.0 && g.volume < 1e-16);
        // volume ≈ (4/3)π r³ for small r
        assert!((g.volume / (4.0 / 3.0 * PI * 1e-18) - 1.0).abs() < 1e-9);
        assert!(ball_closed_form(0.0).is_err());
        assert!(ball_closed_form(-1.0).is_err());
    }

    #[test]
    fn sinh_minus_id_is_continuous_at_switch() {
        let y = 0.5 - 1e-12;
        assert!((sinh_minus_id(y) - (y.sinh() - y)).abs() < 1e-15);
    }

    #[test]
    fn equidistant_seed_and_slope() {
        let g = equidistant_plane_closed_form(0.0, 4.0 * PI).unwrap();
        assert_eq!(g.area, 4.0 * PI);
        assert_eq!(g.volume, 0.0);
        assert_eq!(g.mean_curvature, 0.0);

        let h = 1e-5;
        let a0 = 4.0 * PI;
        let p = equidistant_plane_closed_form(1.0 + h, a0).unwrap();
        let m = equidistant_plane_closed_form(1.0 - h, a0).unwrap();
        let c = equidistant_plane_closed_form(1.0, a0).unwrap();
        let dv_dr = (p.volume - m.volume) / (2.0 * h);
        assert!((dv_dr - c.area).abs() < 1e-6);
        let da_dv = (p.area - m.area) / (p.volume - m.volume);
        assert!((da_dv - 2.0 * 1.0f64.tanh()).abs() < 1e-8);
        assert!(equidistant_plane_closed_form(1.0, 0.0).is_err());
    }

    #[test]
    fn tube_at_unit_slope() {
        let t = tube_closed_form(1.0).unwrap();
        assert!((t.radius - 0.881374).abs() < 1e-6);
        assert!((t.radius - (1.0 + 2f64.sqrt()).ln()).abs() < 1e-15);
        assert!((t.shape_diag.0 - 2f64.sqrt()).abs() < 1e-15);
        assert!((t.shape_diag.1 - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((t.mean_curvature - 1.06066).abs() < 1e-5);
        assert!(t.mean_curvature > 1.0);
        assert!(tube_closed_form(1e8).unwrap().radius < 1e-7);
        assert!(tube_closed_form(0.0).is_err());
    }

    #[test]
    fn tube_shape_operator_is_coth_tanh() {
        for a in [0.2, 1.0, 3.5] {
            let t = tube_closed_form(a).unwrap();
            assert!((t.shape_diag.0 - 1.0 / t.radius.tanh()).abs() < 1e-12);
            assert!((t.shape_diag.1 - t.radius.tanh()).abs() < 1e-12);
        }
    }
}
