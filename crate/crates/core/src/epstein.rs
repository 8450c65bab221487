//! Horosphere envelopes of zonal conformal factors.
//!
//! For a boundary point b and a level s(b) = t + ω(b) the horosphere
//! {B_b = s(b)} is a Euclidean sphere tangent to the unit sphere at b. The
//! envelope of this family is a surface whose equidistant foliation has metric
//! at infinity proportional to e^{2(t+ω)} times the round metric. With ω
//! depending only on the polar angle, the envelope is a surface of revolution
//! and each point is found by Newton's method in the meridian half-plane.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::LegendreTable;
use crate::sphere::{polyakov_diff, ConformalFactor};
use crate::surfaces::{polar_nodes, RadialSurface, DEFAULT_NODES};

/// Largest m ≠ 0 coefficient mass accepted as "zonal".
pub const ZONAL_TOLERANCE: f64 = 1e-12;

const NEWTON_TOL: f64 = 1e-14;
const NEWTON_MAX_ITER: usize = 50;

#[derive(Clone, Debug)]
pub struct EnvelopeProblem {
    omega: ConformalFactor,
    legendre: Vec<f64>,
    pub offset: f64,
}

impl EnvelopeProblem {
    pub fn new(omega: ConformalFactor, offset: f64) -> Result<Self> {
        let mass = omega.non_zonal_mass();
        if mass > ZONAL_TOLERANCE {
            return Err(Error::invalid(format!(
                "envelope needs a zonal conformal factor, non-zonal mass {mass:.3e}"
            )));
        }
        if !offset.is_finite() {
            return Err(Error::invalid("offset must be finite"));
        }
        let legendre = omega.zonal_legendre();
        Ok(Self { omega, legendre, offset })
    }

    pub fn omega(&self) -> &ConformalFactor {
        &self.omega
    }

    /// (ω, dω/dθ, d²ω/dθ²) at polar angle θ, scaled by `amp`.
    fn profile(&self, theta: f64, amp: f64) -> (f64, f64, f64) {
        let lmax = self.legendre.len() - 1;
        let x = theta.cos();
        let sin = theta.sin();
        let t = LegendreTable::new(lmax, x);
        let mut w = 0.0;
        let mut w1 = 0.0;
        let mut w2 = 0.0;
        for (l, c) in self.legendre.iter().enumerate() {
            w += c * t.p[l];
            w1 += c * t.dp[l];
            w2 += c * t.d2p[l];
        }
        (amp * w, -amp * sin * w1, amp * (-x * w1 + sin * sin * w2))
    }
}

/// Meridian-plane vectors (X, Z): X is distance from the axis, Z the height.
type V2 = [f64; 2];

fn d2(a: V2, b: V2) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn boundary(theta: f64) -> (V2, V2) {
    ([theta.sin(), theta.cos()], [theta.cos(), -theta.sin()])
}

/// Tangency residuals F1 = B_b(x) − s and F2 = ∂F1/∂θ_b, with their Jacobian.
struct Tangency {
    f: [f64; 2],
    dx: [V2; 2],
    dtheta: [f64; 2],
}

fn tangency(x: V2, theta_b: f64, level: (f64, f64, f64)) -> Tangency {
    let (s, s1, s2) = level;
    let (b, bp) = boundary(theta_b);
    let xx = d2(x, x);
    let p = 1.0 - xx;
    let q = xx - 2.0 * d2(x, b) + 1.0;
    let xbp = d2(x, bp);
    let f1 = p.ln() - q.ln() - s;
    let f2 = 2.0 * xbp / q - s1;
    let df1 = [
        -2.0 * x[0] / p - 2.0 * (x[0] - b[0]) / q,
        -2.0 * x[1] / p - 2.0 * (x[1] - b[1]) / q,
    ];
    let df2 = [
        2.0 * bp[0] / q - 4.0 * xbp * (x[0] - b[0]) / (q * q),
        2.0 * bp[1] / q - 4.0 * xbp * (x[1] - b[1]) / (q * q),
    ];
    let dt2 = -2.0 * d2(x, b) / q + 4.0 * xbp * xbp / (q * q) - s2;
    Tangency { f: [f1, f2], dx: [df1, df2], dtheta: [f2, dt2] }
}

/// Point of the meridian envelope at the fixed boundary angle `theta_b`.
///
/// Solves F1 = F2 = 0 for x by Newton's method.
pub fn tangency_point(problem: &EnvelopeProblem, theta_b: f64) -> Result<V2> {
    let (w, w1, w2) = problem.profile(theta_b, 1.0);
    let level = (problem.offset + w, w1, w2);
    let (b, _) = boundary(theta_b);
    let r = (0.5 * level.0).tanh();
    let mut x = [r * b[0], r * b[1]];
    for _ in 0..NEWTON_MAX_ITER {
        let tg = tangency(x, theta_b, level);
        let [[a, bb], [c, d]] = tg.dx;
        let det = a * d - bb * c;
        let dx0 = (tg.f[0] * d - bb * tg.f[1]) / det;
        let dx1 = (a * tg.f[1] - c * tg.f[0]) / det;
        x = [x[0] - dx0, x[1] - dx1];
        if d2(x, x) >= 1.0 {
            return Err(Error::NonConvergence(format!("tangency Newton left the ball at θ_b = {theta_b}")));
        }
        if dx0.abs().max(dx1.abs()) < NEWTON_TOL {
            return Ok(x);
        }
    }
    Err(Error::NonConvergence(format!("tangency Newton did not converge at θ_b = {theta_b}")))
}

/// Closed-form envelope point for a given boundary angle.
///
/// With s = t + ω and ω' = dω/dθ_b, D = 4/((1+e^s)² + ω'²) and
/// x = (1 − (1+e^s)D/2)·b + (ω'D/2)·b'.
pub fn tangency_point_closed_form(problem: &EnvelopeProblem, theta_b: f64) -> V2 {
    let (w, w1, _) = problem.profile(theta_b, 1.0);
    let e = (problem.offset + w).exp();
    let d = 4.0 / ((1.0 + e) * (1.0 + e) + w1 * w1);
    let u = 0.5 * (1.0 + e) * d;
    let beta = 0.5 * w1 * d;
    let (b, bp) = boundary(theta_b);
    [(1.0 - u) * b[0] + beta * bp[0], (1.0 - u) * b[1] + beta * bp[1]]
}

/// Envelope point at polar angle `theta` and its boundary angle.
fn solve_node(problem: &EnvelopeProblem, theta: f64, amp: f64, guess: (V2, f64)) -> Option<(V2, f64)> {
    let (mut x, mut tb) = guess;
    let (ct, st) = (theta.cos(), theta.sin());
    for _ in 0..NEWTON_MAX_ITER {
        let (w, w1, w2) = problem.profile(tb, amp);
        let tg = tangency(x, tb, (problem.offset + w, w1, w2));
        let f3 = x[0] * ct - x[1] * st;
        let jac = [
            [tg.dx[0][0], tg.dx[0][1], tg.dtheta[0]],
            [tg.dx[1][0], tg.dx[1][1], tg.dtheta[1]],
            [ct, -st, 0.0],
        ];
        let step = solve3(jac, [tg.f[0], tg.f[1], f3])?;
        x = [x[0] - step[0], x[1] - step[1]];
        tb -= step[2];
        if !(d2(x, x) < 1.0) {
            return None;
        }
        if step.iter().fold(0.0f64, |m, v| m.max(v.abs())) < NEWTON_TOL {
            return Some((x, tb));
        }
    }
    None
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    if !(d.abs() > 1e-300) {
        return None;
    }
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let mut m = a;
        for i in 0..3 {
            m[i][k] = b[i];
        }
        *o = det(m) / d;
    }
    Some(out)
}

fn constant_guess(problem: &EnvelopeProblem, theta: f64, amp: f64) -> (V2, f64) {
    let (w, _, _) = problem.profile(theta, amp);
    let r = (0.5 * (problem.offset + w)).tanh();
    let (b, _) = boundary(theta);
    ([r * b[0], r * b[1]], theta)
}

/// Envelope point above polar angle `theta`, with continuation in amplitude.
fn envelope_node(problem: &EnvelopeProblem, theta: f64) -> Result<(V2, f64)> {
    let guess = constant_guess(problem, theta, 1.0);
    if let Some(sol) = solve_node(problem, theta, 1.0, guess) {
        return Ok(sol);
    }
    let mut sol = constant_guess(problem, theta, 0.0);
    let mut amp: f64 = 0.0;
    let mut step = 0.25;
    while amp < 1.0 {
        let next = (amp + step).min(1.0);
        match solve_node(problem, theta, next, sol) {
            Some(s) => {
                sol = s;
                amp = next;
            }
            None => {
                step *= 0.5;
                if step < 1e-4 {
                    return Err(Error::NonConvergence(format!("envelope Newton failed at θ = {theta:.6}")));
                }
            }
        }
    }
    Ok(sol)
}

#[derive(Clone, Debug)]
pub struct Envelope {
    pub surface: RadialSurface,
    /// Boundary angle θ_b whose horosphere touches the surface at each node.
    pub boundary_angles: Vec<f64>,
}

/// Envelope surface on [`DEFAULT_NODES`] polar nodes.
pub fn envelope(problem: &EnvelopeProblem) -> Result<RadialSurface> {
    envelope_detailed(problem, DEFAULT_NODES).map(|e| e.surface)
}

pub fn envelope_detailed(problem: &EnvelopeProblem, nodes: usize) -> Result<Envelope> {
    let thetas = polar_nodes(nodes);
    let sols = thetas
        .par_iter()
        .map(|&th| envelope_node(problem, th))
        .collect::<Result<Vec<_>>>()?;
    let radius: Vec<f64> = sols.iter().map(|(x, _)| 2.0 * d2(*x, *x).sqrt().atanh()).collect();
    let surface = RadialSurface::build(&radius, nodes / 2)?;
    let margin = surface.hconvexity_margin();
    if !(margin > 0.0) {
        return Err(Error::NotHConvex { margin });
    }
    Ok(Envelope { surface, boundary_angles: sols.into_iter().map(|(_, t)| t).collect() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DualityReport {
    pub geometric: f64,
    pub polyakov: f64,
    pub discrepancy: f64,
}

/// W-volume difference of the envelopes of ω and 0 against the Polyakov difference of ω.
pub fn duality_report(problem: &EnvelopeProblem) -> Result<DualityReport> {
    let zero = EnvelopeProblem::new(ConformalFactor::zero(0), problem.offset)?;
    let geometric = envelope(problem)?.w_volume() - envelope(&zero)?.w_volume();
    let polyakov = polyakov_diff(&problem.omega);
    Ok(DualityReport { geometric, polyakov, discrepancy: (geometric - polyakov).abs() })
}

pub fn duality_check(problem: &EnvelopeProblem) -> Result<f64> {
    duality_report(problem).map(|r| r.discrepancy)
}
