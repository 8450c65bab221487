//! Equidistant (normal) flow of horospherically convex surfaces.
//!
//! A surface with principal curvatures k_i flows to the parallel surface at
//! distance r with
//!
//! ```text
//! k_i^r = (sinh r + cosh r·k_i) / (cosh r + sinh r·k_i),
//! dA_r  = (cosh r + sinh r·k_1)(cosh r + sinh r·k_2) dA.
//! ```
//!
//! Everything here fixes the Euler characteristic of the leaves to χ = 2.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::GaussLegendre;
use crate::surfaces::{GeometricTotals, RadialSurface, SurfacePointData};

/// Euler characteristic of every leaf handled by this module.
pub const CHI: f64 = 2.0;

/// Radii used to estimate limits at infinity.
pub const TAIL_RADII: [f64; 3] = [6.0, 7.0, 8.0];

/// Gauss–Legendre nodes for the volume swept by the flow.
const VOLUME_NODES: usize = 32;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlowState {
    pub r: f64,
    pub points: Vec<SurfacePointData>,
    pub totals: GeometricTotals,
    pub enclosed_volume: f64,
}

impl FlowState {
    pub fn w_volume(&self) -> f64 {
        self.totals.w_volume()
    }

    /// Flows this leaf a further distance `s`, treating it as a new seed.
    pub fn flow(&self, s: f64) -> Result<FlowState> {
        flow_data(&self.points, self.enclosed_volume, s).map(|mut st| {
            st.r += self.r;
            st
        })
    }

    pub fn hconvexity_margin(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.k1.min(p.k2) + 1.0)
            .fold(f64::INFINITY, f64::min)
    }
}

fn require_hconvex(surface: &RadialSurface) -> Result<()> {
    let margin = surface.hconvexity_margin();
    if margin > 0.0 {
        Ok(())
    } else {
        Err(Error::NotHConvex { margin })
    }
}

fn stretch(k: f64, ch: f64, sh: f64) -> f64 {
    ch + sh * k
}

/// Flowed curvature written as 1 + (k − 1)e^{−r}/D to keep k^r − 1 accurate.
fn flowed_curvature(k: f64, r: f64, d: f64) -> f64 {
    1.0 + (k - 1.0) * (-r).exp() / d
}

fn swept_area(points: &[SurfacePointData], s: f64) -> f64 {
    let (ch, sh) = (s.cosh(), s.sinh());
    points
        .iter()
        .map(|p| stretch(p.k1, ch, sh) * stretch(p.k2, ch, sh) * p.da)
        .sum()
}

fn flow_data(points: &[SurfacePointData], volume: f64, r: f64) -> Result<FlowState> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::invalid(format!("flow distance must be non-negative, got {r}")));
    }
    let margin = points.iter().map(|p| p.k1.min(p.k2) + 1.0).fold(f64::INFINITY, f64::min);
    if !(margin > 0.0) {
        return Err(Error::NotHConvex { margin });
    }
    if r == 0.0 {
        return Ok(FlowState {
            r,
            points: points.to_vec(),
            totals: GeometricTotals::from_points(points, volume),
            enclosed_volume: volume,
        });
    }
    let (ch, sh) = (r.cosh(), r.sinh());
    let em = (-r).exp();
    let mut out = Vec::with_capacity(points.len());
    let mut h_defect = 0.0;
    for p in points {
        let d1 = stretch(p.k1, ch, sh);
        let d2 = stretch(p.k2, ch, sh);
        let da = d1 * d2 * p.da;
        h_defect += 0.5 * em * ((p.k1 - 1.0) * d2 + (p.k2 - 1.0) * d1) * p.da;
        out.push(SurfacePointData::from_curvatures(
            flowed_curvature(p.k1, r, d1),
            flowed_curvature(p.k2, r, d2),
            da,
        ));
    }
    let gl = GaussLegendre::new(VOLUME_NODES);
    let enclosed = volume + gl.integrate(0.0, r, |s| swept_area(points, s));
    let mut totals = GeometricTotals::from_points(&out, enclosed);
    totals.int_h_minus_1 = h_defect;
    Ok(FlowState { r, points: out, totals, enclosed_volume: enclosed })
}

/// The parallel surface at distance `r` outside `surface`.
pub fn flow(surface: &RadialSurface, r: f64) -> Result<FlowState> {
    require_hconvex(surface)?;
    flow_data(surface.pointdata(), surface.enclosed_volume(), r)
}

/// W-volume plus rπχ along the flow; every value should be the same.
pub fn w_invariance_report(surface: &RadialSurface, r_grid: &[f64]) -> Result<(Vec<f64>, f64)> {
    require_hconvex(surface)?;
    let values = r_grid
        .iter()
        .map(|&r| flow(surface, r).map(|st| st.w_volume() + r * PI * CHI))
        .collect::<Result<Vec<_>>>()?;
    Ok((values.clone(), spread(&values)))
}

pub(crate) fn spread(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if values.is_empty() {
        0.0
    } else {
        hi - lo
    }
}

/// Two-point Richardson step assuming the error is proportional to e^{−2r}.
fn richardson_e2(r1: f64, v1: f64, r2: f64, v2: f64) -> f64 {
    let q = (-2.0 * (r2 - r1)).exp();
    (v2 - q * v1) / (1.0 - q)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HDefect {
    /// ∫(H_r − 1) dA_r at r = r_max.
    pub value: f64,
    /// Value extrapolated to r = ∞.
    pub limit: f64,
}

/// ∫(H_r − 1) dA_r at `r_max` and its limit, which should be πχ = 2π.
pub fn h_defect_limit(surface: &RadialSurface, r_max: f64) -> Result<HDefect> {
    if !(r_max >= 1.0) {
        return Err(Error::invalid(format!("r_max must be at least 1, got {r_max}")));
    }
    let a = flow(surface, r_max - 1.0)?.totals.int_h_minus_1;
    let b = flow(surface, r_max)?.totals.int_h_minus_1;
    Ok(HDefect { value: b, limit: richardson_e2(r_max - 1.0, a, r_max, b) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryMetricArea {
    /// ½|Σ| + ½∫H + (π/2)χ.
    pub beta: f64,
    /// lim e^{−2r}·area_r estimated from the flow.
    pub flow_limit: f64,
    pub deviation: f64,
}

/// Area of the metric at infinity induced by the foliation.
pub fn boundary_metric_area(surface: &RadialSurface) -> Result<BoundaryMetricArea> {
    let t = surface.totals();
    let beta = 0.5 * t.area + 0.5 * t.int_h + 0.5 * PI * CHI;
    let samples = TAIL_RADII
        .iter()
        .map(|&r| flow(surface, r).map(|st| (r, (-2.0 * r).exp() * st.totals.area)))
        .collect::<Result<Vec<_>>>()?;
    let (r1, v1) = samples[1];
    let (r2, v2) = samples[2];
    let flow_limit = richardson_e2(r1, v1, r2, v2);
    Ok(BoundaryMetricArea { beta, flow_limit, deviation: (flow_limit - beta).abs() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VrLimit {
    pub raw_limit: f64,
    pub v_r: f64,
    /// Disagreement of the two tail extrapolations.
    pub tail_spread: f64,
}

/// Tolerance on the tail spread of [`vr_limit`].
pub const VR_TAIL_TOLERANCE: f64 = 1e-6;

/// vol_r − ½area_r + πχ·log√(2·area_r/(π|χ|)), the quantity whose limit is V_R + (π/2)χ.
fn vr_integrand(st: &FlowState) -> f64 {
    let area = st.totals.area;
    st.enclosed_volume - 0.5 * area + PI * CHI * (2.0 * area / (PI * CHI)).sqrt().ln()
}

pub fn vr_limit(surface: &RadialSurface) -> Result<VrLimit> {
    let v = TAIL_RADII
        .iter()
        .map(|&r| flow(surface, r).map(|st| vr_integrand(&st)))
        .collect::<Result<Vec<_>>>()?;
    let [r0, r1, r2] = TAIL_RADII;
    let e01 = richardson_e2(r0, v[0], r1, v[1]);
    let e12 = richardson_e2(r1, v[1], r2, v[2]);
    // Second Richardson level removes the e^{−4r} term.
    let q = (-4.0 * (r2 - r1)).exp();
    let raw_limit = (e12 - q * e01) / (1.0 - q);
    let tail_spread = (e12 - e01).abs();
    if tail_spread > VR_TAIL_TOLERANCE {
        return Err(Error::NonConvergence(format!(
            "renormalized volume tail spread {tail_spread:.3e} exceeds {VR_TAIL_TOLERANCE:.1e}"
        )));
    }
    Ok(VrLimit { raw_limit, v_r: raw_limit - 0.5 * PI * CHI, tail_spread })
}

/// 2|Ω_r| − |Σ_r| from the flow and from the closed form in the seed data.
///
/// The closed form is
/// `2|Ω| + e^{−2r}∫(H − 1) − ∫H − πχe^{−2r} − πχ(2r − 1)`.
pub fn cheeger_identity(surface: &RadialSurface, r: f64) -> Result<(f64, f64)> {
    let st = flow(surface, r)?;
    let t = surface.totals();
    let lhs = 2.0 * st.enclosed_volume - st.totals.area;
    let e = (-2.0 * r).exp();
    let rhs = 2.0 * t.volume + e * t.int_h_minus_1 - t.int_h - PI * CHI * e - PI * CHI * (2.0 * r - 1.0);
    Ok((lhs, rhs))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinkowskiReport {
    pub lhs: f64,
    pub rhs_log: f64,
    pub rhs_combined: f64,
    pub slack_log: f64,
    pub slack_combined: f64,
}

/// Both Minkowski-type inequalities for an h-convex surface.
///
/// * `lhs = ∫H − 2|Ω| ≥ 2π log(1 + (1/2π)∫(H + 1))`
/// * `∫H ≥ 2|Ω| + 2π log(1 + |Σ|/2π + √(|Σ|²/4π² + |Σ|/π))`
pub fn minkowski_report(surface: &RadialSurface) -> Result<MinkowskiReport> {
    require_hconvex(surface)?;
    let t = surface.totals();
    Ok(minkowski_from_totals(&t))
}

pub fn minkowski_from_totals(t: &GeometricTotals) -> MinkowskiReport {
    let lhs = t.minkowski_lhs();
    let rhs_log = 2.0 * PI * (1.0 + (t.int_h + t.area) / (2.0 * PI)).ln();
    let a = t.area;
    let root = (a * a / (4.0 * PI * PI) + a / PI).sqrt();
    let rhs_combined = 2.0 * t.volume + 2.0 * PI * (1.0 + a / (2.0 * PI) + root).ln();
    MinkowskiReport {
        lhs,
        rhs_log,
        rhs_combined,
        slack_log: lhs - rhs_log,
        slack_combined: t.int_h - rhs_combined,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NestedReport {
    pub inner: f64,
    pub outer: f64,
    pub holds: bool,
}

pub const NESTED_TOLERANCE: f64 = 1e-9;

/// Compares ∫H − 2|Ω| for an inner region contained in an outer one.
///
/// Requires r_in ≤ r_out at every node and K_int ≥ 0 on the inner surface.
pub fn nested_monotonicity_check(inner: &RadialSurface, outer: &RadialSurface) -> Result<NestedReport> {
    if inner.len() != outer.len() {
        return Err(Error::precondition("inner and outer surfaces use different node counts"));
    }
    if let Some(i) = (0..inner.len()).find(|&i| inner.radius()[i] > outer.radius()[i]) {
        return Err(Error::precondition(format!("inner surface leaves the outer region at node {i}")));
    }
    let kmin = inner.pointdata().iter().map(|p| p.k_int).fold(f64::INFINITY, f64::min);
    if kmin < 0.0 {
        return Err(Error::precondition(format!("inner surface has K_int = {kmin:.3e} < 0")));
    }
    require_hconvex(outer)?;
    let a = inner.totals().minkowski_lhs();
    let b = outer.totals().minkowski_lhs();
    Ok(NestedReport { inner: a, outer: b, holds: a <= b + NESTED_TOLERANCE })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyp3::ball_closed_form;
    use crate::surfaces::DEFAULT_NODES;

    fn perturbed(eps: f64) -> RadialSurface {
        RadialSurface::from_fn(DEFAULT_NODES, 2, |th| 1.0 + eps * (2.0 * th).cos()).unwrap()
    }

    #[test]
    fn balls_flow_to_balls() {
        let st = flow(&RadialSurface::sphere(1.0).unwrap(), 1.0).unwrap();
        let g = ball_closed_form(2.0).unwrap();
        assert!((st.totals.area - g.area).abs() < 1e-8 * g.area);
        assert!((st.enclosed_volume - g.volume).abs() < 1e-8 * g.volume);
        assert!((st.totals.int_h - g.mean_curvature * g.area).abs() < 1e-8 * g.area);
    }

    #[test]
    fn zero_flow_is_identity() {
        let s = perturbed(0.1);
        let st = flow(&s, 0.0).unwrap();
        assert_eq!(st.points, s.pointdata());
        assert_eq!(st.totals, s.totals());
    }

    #[test]
    fn w_invariance_on_sphere() {
        let (v, spread) = w_invariance_report(&RadialSurface::sphere(1.0).unwrap(), &[0.0, 1.0, 2.0, 4.0]).unwrap();
        assert!(spread < 1e-8);
        assert!((v[0] + 2.0 * PI).abs() < 1e-9);
        let (_, s0) = w_invariance_report(&perturbed(0.05), &[0.0]).unwrap();
        assert_eq!(s0, 0.0);
    }

    #[test]
    fn cheeger_closed_form_matches_flow() {
        for s in [RadialSurface::sphere(1.0).unwrap(), perturbed(0.1)] {
            for r in [0.5, 2.0, 5.0] {
                let (lhs, rhs) = cheeger_identity(&s, r).unwrap();
                assert!((lhs - rhs).abs() < 1e-6, "r={r}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn h_defect_tends_to_two_pi() {
        let d = h_defect_limit(&RadialSurface::sphere(1.0).unwrap(), 8.0).unwrap();
        assert!((d.value - 2.0 * PI).abs() < 1e-5);
        assert!((d.limit - 2.0 * PI).abs() < 1e-9);
        let s = perturbed(0.1);
        let d = h_defect_limit(&s, 8.0).unwrap();
        assert!((d.limit - 2.0 * PI).abs() < 1e-4);
        assert!((0.5 * s.totals().int_k_int - 2.0 * PI).abs() < 1e-8);
    }

    #[test]
    fn boundary_area_of_sphere() {
        let b = boundary_metric_area(&RadialSurface::sphere(0.7).unwrap()).unwrap();
        assert!((b.beta - PI * 1.4f64.exp()).abs() < 1e-9);
        assert!(b.deviation < 1e-6);
        let b = boundary_metric_area(&RadialSurface::sphere(1e-4).unwrap()).unwrap();
        assert!((b.beta - PI).abs() < 1e-3);
    }

    #[test]
    fn vr_of_balls_vanishes() {
        for r0 in [0.3, 1.0, 2.0] {
            let v = vr_limit(&RadialSurface::sphere(r0).unwrap()).unwrap();
            assert!((v.raw_limit - PI).abs() < 1e-6, "r0={r0}: {}", v.raw_limit);
            assert!(v.v_r.abs() < 1e-6);
        }
        let v = vr_limit(&perturbed(0.05)).unwrap();
        assert!(v.v_r <= 0.0);
    }

    #[test]
    fn minkowski_equality_on_sphere() {
        let m = minkowski_report(&RadialSurface::sphere(1.0).unwrap()).unwrap();
        assert!((m.lhs - 4.0 * PI).abs() < 1e-10);
        assert!((m.rhs_log - 4.0 * PI).abs() < 1e-10);
        assert!(m.slack_log.abs() < 1e-8 && m.slack_combined.abs() < 1e-8);
        let m = minkowski_report(&perturbed(0.1)).unwrap();
        assert!(m.slack_log > 0.0);
    }

    #[test]
    fn nested_spheres() {
        let a = RadialSurface::sphere(1.0).unwrap();
        let b = RadialSurface::sphere(2.0).unwrap();
        let n = nested_monotonicity_check(&a, &b).unwrap();
        assert!((n.inner - 4.0 * PI).abs() < 1e-9 && (n.outer - 8.0 * PI).abs() < 1e-9);
        assert!(n.holds);
        assert!(nested_monotonicity_check(&b, &a).is_err());
        let same = nested_monotonicity_check(&a, &a).unwrap();
        assert_eq!(same.inner, same.outer);
    }

    #[test]
    fn rejects_non_hconvex() {
        let s = RadialSurface::from_fn(DEFAULT_NODES, 4, |th| 1.0 + 0.9 * (4.0 * th).cos()).unwrap();
        assert!(matches!(flow(&s, 1.0), Err(Error::NotHConvex { .. })));
    }
}
