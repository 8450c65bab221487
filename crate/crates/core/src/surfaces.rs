//! Rotationally symmetric star-shaped surfaces r = r(θ) about the origin.
//!
//! Samples live on Gauss–Legendre nodes in x = cos θ, listed with θ
//! increasing. The radius is expanded in Legendre polynomials and
//! differentiated spectrally; curvatures are taken from the Euclidean profile
//! in the ball and corrected by the conformal factor of the hyperbolic metric.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyp3::sinh_minus_id;
use crate::quadrature::{GaussLegendre, LegendreTable};

/// Default number of polar nodes.
pub const DEFAULT_NODES: usize = 128;

/// Largest accepted round-trip residual of the Legendre fit.
pub const FIT_TOLERANCE: f64 = 1e-8;

/// Pointwise second-order data at one polar node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfacePointData {
    pub k1: f64,
    pub k2: f64,
    pub h: f64,
    pub k_int: f64,
    pub traceless_norm_sq: f64,
    /// Quadrature weight of the node, including the azimuthal 2π.
    pub da: f64,
}

impl SurfacePointData {
    pub fn from_curvatures(k1: f64, k2: f64, da: f64) -> Self {
        Self {
            k1,
            k2,
            h: 0.5 * (k1 + k2),
            k_int: -1.0 + k1 * k2,
            traceless_norm_sq: 0.5 * (k1 - k2) * (k1 - k2),
            da,
        }
    }
}

/// Integrated quantities of a closed surface and the region it bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricTotals {
    pub area: f64,
    pub volume: f64,
    pub int_h: f64,
    pub int_h_minus_1: f64,
    pub int_k_int: f64,
    pub euler: f64,
}

impl GeometricTotals {
    pub fn from_points(points: &[SurfacePointData], volume: f64) -> Self {
        let mut area = 0.0;
        let mut int_h = 0.0;
        let mut int_h_minus_1 = 0.0;
        let mut int_k_int = 0.0;
        for p in points {
            area += p.da;
            int_h += p.h * p.da;
            int_h_minus_1 += (p.h - 1.0) * p.da;
            int_k_int += p.k_int * p.da;
        }
        Self {
            area,
            volume,
            int_h,
            int_h_minus_1,
            int_k_int,
            euler: int_k_int / (2.0 * PI),
        }
    }

    /// |Ω| − ½∫H.
    pub fn w_volume(&self) -> f64 {
        self.volume - 0.5 * self.int_h
    }

    /// ∫H − 2|Ω|.
    pub fn minkowski_lhs(&self) -> f64 {
        self.int_h - 2.0 * self.volume
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RadialSurface {
    theta: Vec<f64>,
    cos_theta: Vec<f64>,
    weights: Vec<f64>,
    radius: Vec<f64>,
    /// dr/dθ at each node.
    radius_theta: Vec<f64>,
    coeffs: Vec<f64>,
    band_limit: usize,
    points: Vec<SurfacePointData>,
}

/// Polar angles of the `n` nodes, increasing.
pub fn polar_nodes(n: usize) -> Vec<f64> {
    let gl = GaussLegendre::new(n);
    gl.nodes().iter().rev().map(|x| x.acos()).collect()
}

impl RadialSurface {
    /// Builds a surface from radii sampled at [`polar_nodes`]`(samples.len())`.
    pub fn build(radius_samples: &[f64], band_limit: usize) -> Result<Self> {
        let n = radius_samples.len();
        if n < 4 {
            return Err(Error::invalid(format!("need at least 4 polar nodes, got {n}")));
        }
        if band_limit > n / 2 {
            return Err(Error::invalid(format!(
                "band limit {band_limit} exceeds half the node count {n}"
            )));
        }
        if let Some((i, r)) = radius_samples
            .iter()
            .enumerate()
            .find(|(_, r)| !(**r > 0.0) || !r.is_finite())
        {
            return Err(Error::invalid(format!("radius at node {i} must be positive, got {r}")));
        }
        let gl = GaussLegendre::new(n);
        let cos_theta: Vec<f64> = gl.nodes().iter().rev().copied().collect();
        let weights: Vec<f64> = gl.weights().iter().rev().copied().collect();
        let theta: Vec<f64> = cos_theta.iter().map(|x| x.acos()).collect();
        let tables: Vec<LegendreTable> =
            cos_theta.iter().map(|&x| LegendreTable::new(band_limit, x)).collect();

        let mut coeffs = vec![0.0; band_limit + 1];
        for (l, c) in coeffs.iter_mut().enumerate() {
            let s: f64 = (0..n).map(|i| weights[i] * radius_samples[i] * tables[i].p[l]).sum();
            *c = 0.5 * (2.0 * l as f64 + 1.0) * s;
        }
        let mut residual: f64 = 0.0;
        for i in 0..n {
            let fit: f64 = coeffs.iter().zip(&tables[i].p).map(|(c, p)| c * p).sum();
            residual = residual.max((fit - radius_samples[i]).abs());
        }
        if residual > FIT_TOLERANCE {
            return Err(Error::UnderResolved { residual, tolerance: FIT_TOLERANCE });
        }

        let mut radius_theta = vec![0.0; n];
        let mut points = Vec::with_capacity(n);
        for i in 0..n {
            let t = &tables[i];
            let r1: f64 = coeffs.iter().zip(&t.dp).map(|(c, p)| c * p).sum();
            let r2: f64 = coeffs.iter().zip(&t.d2p).map(|(c, p)| c * p).sum();
            let r = radius_samples[i];
            let x = cos_theta[i];
            let sin = theta[i].sin();
            radius_theta[i] = -sin * r1;
            let (k1, k2) = hyperbolic_curvatures(r, r1, r2, x, sin);
            let sh = r.sinh();
            let rt = radius_theta[i];
            let da = 2.0 * PI * weights[i] * sh * (sh * sh + rt * rt).sqrt();
            points.push(SurfacePointData::from_curvatures(k1, k2, da));
        }
        Ok(Self {
            theta,
            cos_theta,
            weights,
            radius: radius_samples.to_vec(),
            radius_theta,
            coeffs,
            band_limit,
            points,
        })
    }

    /// Samples `f(θ)` on `n` nodes and builds the surface.
    pub fn from_fn(n: usize, band_limit: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        let samples: Vec<f64> = polar_nodes(n).into_iter().map(f).collect();
        Self::build(&samples, band_limit)
    }

    pub fn sphere(r0: f64) -> Result<Self> {
        Self::from_fn(DEFAULT_NODES, 0, |_| r0)
    }

    /// r(θ) = Σ c_l P_l(cos θ).
    pub fn from_legendre(coeffs: &[f64]) -> Result<Self> {
        let lmax = coeffs.len().saturating_sub(1);
        Self::from_fn(DEFAULT_NODES, lmax, |th| {
            let t = LegendreTable::new(lmax, th.cos());
            coeffs.iter().zip(&t.p).map(|(c, p)| c * p).sum()
        })
    }

    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn theta_grid(&self) -> &[f64] {
        &self.theta
    }

    pub fn cos_theta(&self) -> &[f64] {
        &self.cos_theta
    }

    /// Gauss–Legendre weights in cos θ (without the 2π).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn radius(&self) -> &[f64] {
        &self.radius
    }

    pub fn radius_theta(&self) -> &[f64] {
        &self.radius_theta
    }

    pub fn legendre_coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn band_limit(&self) -> usize {
        self.band_limit
    }

    pub fn pointdata(&self) -> &[SurfacePointData] {
        &self.points
    }

    /// Volume of the star-shaped region, ∫_{S²}∫₀^{r} sinh²ρ dρ dω.
    pub fn enclosed_volume(&self) -> f64 {
        2.0 * PI
            * self
                .weights
                .iter()
                .zip(&self.radius)
                .map(|(w, &r)| w * 0.25 * sinh_minus_id(2.0 * r))
                .sum::<f64>()
    }

    pub fn totals(&self) -> GeometricTotals {
        GeometricTotals::from_points(&self.points, self.enclosed_volume())
    }

    /// min over nodes of min(k1, k2) + 1; positive iff horospherically convex.
    pub fn hconvexity_margin(&self) -> f64 {
        self.points
            .iter()
            .map(|p| p.k1.min(p.k2) + 1.0)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn w_volume(&self) -> f64 {
        self.totals().w_volume()
    }

    pub fn max_radius(&self) -> f64 {
        self.radius.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_radius(&self) -> f64 {
        self.radius.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

pub fn totals(surface: &RadialSurface) -> GeometricTotals {
    surface.totals()
}

pub fn hconvexity_margin(surface: &RadialSurface) -> f64 {
    surface.hconvexity_margin()
}

pub fn w_volume(surface: &RadialSurface) -> f64 {
    surface.w_volume()
}

/// Principal curvatures (meridian, parallel) of the radial graph.
///
/// `r1`, `r2` are the first two derivatives of r with respect to x = cos θ.
fn hyperbolic_curvatures(r: f64, r1: f64, r2: f64, x: f64, sin: f64) -> (f64, f64) {
    // Euclidean polar profile s(θ) = tanh(r/2) of the surface in the ball.
    let s = (0.5 * r).tanh();
    let sech2 = 1.0 - s * s;
    let s1 = 0.5 * sech2 * r1;
    let s2 = 0.5 * sech2 * (r2 - s * r1 * r1);
    let sp = -sin * s1;
    let spp = -x * s1 + sin * sin * s2;
    let q = s * s + sp * sp;
    let kappa1 = (s * s + 2.0 * sp * sp - s * spp) / (q * q.sqrt());
    let kappa2 = (s + s1 * x) / (s * (s * s + sin * sin * s1 * s1).sqrt());
    let conformal = 0.5 * (1.0 - s * s);
    let normal_term = s * s / q.sqrt();
    (conformal * kappa1 + normal_term, conformal * kappa2 + normal_term)
}
