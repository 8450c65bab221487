//! Isoperimetric profiles of model ends, Hawking mass and the brane functional.
//!
//! The Fuchsian model has a totally geodesic core surface S of area
//! A₀ = −2πχ(S), and its equidistant leaves at distance r on both sides give
//!
//! ```text
//! I(r) = 2A₀cosh²r,   V(r) = A₀(r + sinh(2r)/2),   dI/dV = 2 tanh r.
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the tail spread of profile limits.
pub const TAIL_TOLERANCE: f64 = 1e-4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsoProfile {
    v: Vec<f64>,
    i: Vec<f64>,
    d_plus: Vec<f64>,
    d_minus: Vec<f64>,
    chi_boundary: i64,
    core_volume: f64,
}

/// Derivative at `x[0]` of the quadratic through three points.
fn three_point(x: [f64; 3], f: [f64; 3]) -> f64 {
    let (x0, x1, x2) = (x[0], x[1], x[2]);
    f[0] * (1.0 / (x0 - x1) + 1.0 / (x0 - x2))
        + f[1] * (x0 - x2) / ((x1 - x0) * (x1 - x2))
        + f[2] * (x0 - x1) / ((x2 - x0) * (x2 - x1))
}

impl IsoProfile {
    /// Profile with one-sided derivatives from three-point differences.
    pub fn from_samples(v: Vec<f64>, i: Vec<f64>, chi_boundary: i64, core_volume: f64) -> Result<Self> {
        let n = v.len();
        if n < 3 {
            return Err(Error::invalid("a profile needs at least 3 samples"));
        }
        // Derivative at sample k of the quadratic through the window starting at `start`.
        let window = |k: usize, start: usize| {
            let mut others = (start..start + 3).filter(|&j| j != k);
            let (a, b) = (others.next().unwrap(), others.next().unwrap());
            three_point([v[k], v[a], v[b]], [i[k], i[a], i[b]])
        };
        let d_plus = (0..n).map(|k| window(k, k.min(n - 3))).collect();
        let d_minus = (0..n).map(|k| window(k, k.saturating_sub(2).min(n - 3))).collect();
        Self::with_derivatives(v, i, d_plus, d_minus, chi_boundary, core_volume)
    }

    pub fn with_derivatives(
        v: Vec<f64>,
        i: Vec<f64>,
        d_plus: Vec<f64>,
        d_minus: Vec<f64>,
        chi_boundary: i64,
        core_volume: f64,
    ) -> Result<Self> {
        let n = v.len();
        if i.len() != n || d_plus.len() != n || d_minus.len() != n {
            return Err(Error::invalid("profile columns have different lengths"));
        }
        if chi_boundary >= 0 {
            return Err(Error::invalid(format!("χ(∂M) must be negative, got {chi_boundary}")));
        }
        if !(core_volume >= 0.0) {
            return Err(Error::invalid(format!("core volume must be nonnegative, got {core_volume}")));
        }
        if let Some(k) = (1..n).find(|&k| !(v[k] > v[k - 1])) {
            return Err(Error::invalid(format!("volumes must increase strictly (sample {k})")));
        }
        if let Some(k) = (1..n).find(|&k| i[k] < i[k - 1]) {
            return Err(Error::invalid(format!("profile decreases at sample {k}")));
        }
        if let Some(k) = (0..n).find(|&k| !(i[k] > 0.0) || !i[k].is_finite()) {
            return Err(Error::invalid(format!("profile must be positive (sample {k})")));
        }
        Ok(Self { v, i, d_plus, d_minus, chi_boundary, core_volume })
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn volumes(&self) -> &[f64] {
        &self.v
    }

    pub fn areas(&self) -> &[f64] {
        &self.i
    }

    pub fn d_plus(&self) -> &[f64] {
        &self.d_plus
    }

    pub fn d_minus(&self) -> &[f64] {
        &self.d_minus
    }

    pub fn chi_boundary(&self) -> i64 {
        self.chi_boundary
    }

    pub fn core_volume(&self) -> f64 {
        self.core_volume
    }

    /// Same volumes with I ↦ I + shift (derivatives unchanged).
    pub fn shifted(&self, shift: f64) -> Result<Self> {
        let i = self.i.iter().map(|x| x + shift).collect();
        Self::with_derivatives(
            self.v.clone(),
            i,
            self.d_plus.clone(),
            self.d_minus.clone(),
            self.chi_boundary,
            self.core_volume,
        )
    }

    pub fn with_core_volume(&self, core_volume: f64) -> Result<Self> {
        let mut out = self.clone();
        if !(core_volume >= 0.0) {
            return Err(Error::invalid("core volume must be nonnegative"));
        }
        out.core_volume = core_volume;
        Ok(out)
    }
}

/// Distance r of the Fuchsian leaf enclosing volume `v`.
pub fn fuchsian_leaf_distance(core_area: f64, v: f64) -> f64 {
    if v <= 0.0 {
        return 0.0;
    }
    let target = v / core_area;
    let g = |r: f64| r + 0.5 * (2.0 * r).sinh() - target;
    // g is increasing and convex; bracket then Newton with bisection fallback.
    let mut lo = 0.0;
    let mut hi = (0.5 * (4.0 * target + 1.0).ln()).max(target.min(1.0));
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    let mut r = 0.5 * (lo + hi);
    for _ in 0..200 {
        let f = g(r);
        if f > 0.0 {
            hi = r;
        } else {
            lo = r;
        }
        let step = f / (1.0 + (2.0 * r).cosh());
        let mut next = r - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - r).abs() <= 1e-15 * r.max(1e-300) {
            return next;
        }
        r = next;
    }
    r
}

/// Closed-form profile of the Fuchsian end with χ(S) = `chi_surface`.
pub fn fuchsian_profile(chi_surface: i64, v_grid: &[f64]) -> Result<IsoProfile> {
    if chi_surface > -2 {
        return Err(Error::invalid(format!("χ(S) must be at most −2, got {chi_surface}")));
    }
    if let Some(v) = v_grid.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::invalid(format!("volume grid must be nonnegative, got {v}")));
    }
    let a0 = -2.0 * PI * chi_surface as f64;
    let r: Vec<f64> = v_grid.iter().map(|&v| fuchsian_leaf_distance(a0, v)).collect();
    let i = r.iter().map(|r| 2.0 * a0 * r.cosh().powi(2)).collect();
    let d: Vec<f64> = r.iter().map(|r| 2.0 * r.tanh()).collect();
    IsoProfile::with_derivatives(v_grid.to_vec(), i, d.clone(), d, 2 * chi_surface, 0.0)
}

/// `n` volumes spaced geometrically between `lo` and `hi`.
pub fn geometric_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let q = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(|k| if k + 1 == n { hi } else { lo * (q * k as f64).exp() }).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HawkingTrace {
    pub v: Vec<f64>,
    /// m_H from the right derivative I′₊.
    pub m_h: Vec<f64>,
    /// m_H from the left derivative I′₋.
    pub m_h_minus: Vec<f64>,
    pub monotone_ok: bool,
    pub sign_ok: bool,
}

/// Slack allowed in the monotonicity flag.
pub const MONOTONE_TOLERANCE: f64 = 1e-6;
/// Slack allowed in the sign flag.
pub const SIGN_TOLERANCE: f64 = 1e-8;

/// √I·(2πχ + I(1 − I′/2)(1 + I′/2)), the factored form of √I·(2πχ + I − ¼I′²I).
fn hawking(chi: f64, i: f64, d: f64) -> f64 {
    i.sqrt() * (2.0 * PI * chi + i * (1.0 - 0.5 * d) * (1.0 + 0.5 * d))
}

pub fn hawking_mass(profile: &IsoProfile) -> HawkingTrace {
    let chi = profile.chi_boundary as f64;
    let m_h: Vec<f64> = (0..profile.len()).map(|k| hawking(chi, profile.i[k], profile.d_plus[k])).collect();
    let m_h_minus = (0..profile.len()).map(|k| hawking(chi, profile.i[k], profile.d_minus[k])).collect();
    let monotone_ok = m_h.windows(2).all(|w| w[1] >= w[0] - MONOTONE_TOLERANCE);
    let sign_ok = m_h.iter().all(|m| *m <= SIGN_TOLERANCE);
    HawkingTrace { v: profile.v.clone(), m_h, m_h_minus, monotone_ok, sign_ok }
}

impl HawkingTrace {
    /// m_H(I′₊) − m_H(I′₋) at sample `k`; positive when the mass jumps up.
    pub fn jump_at(&self, k: usize) -> f64 {
        self.m_h[k] - self.m_h_minus[k]
    }
}

/// Sample index whose volume is closest to `target`, in log scale.
fn nearest(v: &[f64], target: f64) -> usize {
    let mut best = 0;
    for k in 0..v.len() {
        if (v[k].ln() - target.ln()).abs() < (v[best].ln() - target.ln()).abs() {
            best = k;
        }
    }
    best
}

/// First unknown of a small dense linear system, by Gaussian elimination with partial pivoting.
fn solve_first(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> f64 {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&x, &y| a[x][c].abs().total_cmp(&a[y][c].abs())).unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            let pivot = a[c].clone();
            for (x, p) in a[r][c..].iter_mut().zip(&pivot[c..]) {
                *x -= f * p;
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|j| a[r][j] * x[j]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x[0]
}

/// Fit of y = Σ c_j basis_j(V) through the samples `idx`; returns the constant term.
fn fit_limit(v: &[f64], y: &[f64], idx: &[usize], basis: fn(f64) -> Vec<f64>) -> f64 {
    let rows = idx.iter().map(|&k| basis(v[k])).collect();
    solve_first(rows, idx.iter().map(|&k| y[k]).collect())
}

/// 1, 1/V, 1/V², ln V/V²: the leading terms of the Fuchsian tail, whose
/// leaf distance enters through e^{−2r} ≈ A₀/(4V)·(1 + O(ln V/V)).
fn tail_basis(v: f64) -> Vec<f64> {
    vec![1.0, 1.0 / v, 1.0 / (v * v), v.ln() / (v * v)]
}

/// 1, 1/V, ln V/V, ln²V/V², ln V/V²: I/V to second order in 1/V, where the
/// leaf volume carries the distance r ≈ ½ ln(4V/A₀).
fn ratio_basis(v: f64) -> Vec<f64> {
    let l = v.ln();
    vec![1.0, 1.0 / v, l / v, l * l / (v * v), l / (v * v)]
}

/// Samples nearest to V_n·scale / 2^j, j < count.
fn tail_indices(v: &[f64], scale: f64, count: usize) -> Result<Vec<usize>> {
    let vn = v[v.len() - 1] * scale;
    let idx: Vec<usize> = (0..count).map(|j| nearest(v, vn / f64::powi(2.0, j as i32))).collect();
    if idx.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::NonConvergence("profile tail is too coarsely sampled".into()));
    }
    Ok(idx)
}

/// Extrapolated limit of y and the spread against a second, shifted set of tail samples.
fn tail_limit(v: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let a = fit_limit(v, y, &tail_indices(v, 1.0, 4)?, tail_basis);
    let b = fit_limit(v, y, &tail_indices(v, std::f64::consts::FRAC_1_SQRT_2, 4)?, tail_basis);
    Ok((a, (a - b).abs()))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfileVr {
    pub raw_limit: f64,
    pub v_r: f64,
    pub tail_spread: f64,
}

/// lim V + |Ω₀| − ½I + πχ·log√(2I/(π|χ|)) and v_r = raw − (π/2)χ.
pub fn vr_from_profile(profile: &IsoProfile) -> Result<ProfileVr> {
    let chi = profile.chi_boundary as f64;
    let y: Vec<f64> = (0..profile.len())
        .map(|k| {
            let i = profile.i[k];
            profile.v[k] + profile.core_volume - 0.5 * i + PI * chi * (2.0 * i / (PI * chi.abs())).sqrt().ln()
        })
        .collect();
    let (raw_limit, tail_spread) = tail_limit(&profile.v, &y)?;
    if tail_spread > TAIL_TOLERANCE {
        return Err(Error::NonConvergence(format!(
            "profile limit tail spread {tail_spread:.3e} exceeds {TAIL_TOLERANCE:.1e}"
        )));
    }
    Ok(ProfileVr { raw_limit, v_r: raw_limit - 0.5 * PI * chi, tail_spread })
}

/// ½·lim_V (I_TG(V) − I_M(V)) on a common volume grid.
pub fn profile_difference(profile_tg: &IsoProfile, profile_m: &IsoProfile) -> Result<f64> {
    if profile_tg.v != profile_m.v {
        return Err(Error::precondition("profiles must share the volume grid"));
    }
    let d: Vec<f64> = profile_tg.i.iter().zip(&profile_m.i).map(|(a, b)| 0.5 * (a - b)).collect();
    let (limit, spread) = tail_limit(&profile_tg.v, &d)?;
    if spread > TAIL_TOLERANCE {
        return Err(Error::NonConvergence(format!(
            "profile difference tail spread {spread:.3e} exceeds {TAIL_TOLERANCE:.1e}"
        )));
    }
    Ok(limit)
}

/// F_H = volume − area/(2H) for 0 < H < 1.
pub fn brane_value(area: f64, volume: f64, h: f64) -> Result<f64> {
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::invalid(format!("brane functional needs 0 < H < 1, got {h}")));
    }
    Ok(volume - area / (2.0 * h))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BraneCritical {
    /// Distance of the critical Fuchsian leaf.
    pub r: f64,
    pub value: f64,
    /// F(r+δ) − 2F(r) + F(r−δ); negative at a maximum.
    pub second_difference: f64,
}

/// Critical leaf of F_H along the Fuchsian family, located from dF/dr = I(1 − tanh r/H).
pub fn brane_critical_leaf(chi_surface: i64, h: f64) -> Result<BraneCritical> {
    if chi_surface > -2 {
        return Err(Error::invalid(format!("χ(S) must be at most −2, got {chi_surface}")));
    }
    if !(h > 0.0 && h < 1.0) {
        return Err(Error::invalid(format!("brane functional needs 0 < H < 1, got {h}")));
    }
    let a0 = -2.0 * PI * chi_surface as f64;
    let leaf = |r: f64| {
        let area = 2.0 * a0 * r.cosh().powi(2);
        let vol = a0 * (r + 0.5 * (2.0 * r).sinh());
        brane_value(area, vol, h).expect("H checked above")
    };
    let slope = |r: f64| 1.0 - r.tanh() / h;
    let (mut lo, mut hi) = (0.0, 1.0);
    while slope(hi) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if slope(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let r = 0.5 * (lo + hi);
    let d = 1e-3;
    Ok(BraneCritical { r, value: leaf(r), second_difference: leaf(r + d) - 2.0 * leaf(r) + leaf(r - d) })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoliationFlags {
    /// Smallest sampled volume beyond which I′ > I/V holds at every sample.
    pub v_star: Option<f64>,
    pub inequality_ok: bool,
    /// I/V at the last sample.
    pub ratio_last: f64,
    /// I/V extrapolated with the model L + (a + b·ln V)/V.
    pub ratio_limit: f64,
    pub limit_ok: bool,
}

pub fn foliation_profile_checks(profile: &IsoProfile) -> Result<FoliationFlags> {
    let n = profile.len();
    let holds: Vec<bool> = (0..n).map(|k| profile.d_plus[k] > profile.i[k] / profile.v[k]).collect();
    let mut first = n;
    while first > 0 && holds[first - 1] {
        first -= 1;
    }
    let v_star = (first < n).then(|| profile.v[first]);
    let ratio: Vec<f64> = (0..n).map(|k| profile.i[k] / profile.v[k]).collect();
    let idx = tail_indices(&profile.v, 1.0, 5)?;
    let ratio_limit = fit_limit(&profile.v, &ratio, &idx, ratio_basis);
    Ok(FoliationFlags {
        v_star,
        inequality_ok: v_star.is_some(),
        ratio_last: ratio[n - 1],
        ratio_limit,
        limit_ok: (ratio_limit - 2.0).abs() < TAIL_TOLERANCE,
    })
}
