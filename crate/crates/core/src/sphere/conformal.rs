//! Conformal metrics h = e^{2ω}·h₀ on the unit round sphere.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::harmonics::{evaluate, idx, ncoeffs, SphereGrid};
use crate::error::{Error, Result};
use crate::hyp3::{dot, BoundaryPoint};
use crate::quadrature::GaussLegendre;

/// Largest accepted grid/coefficient round-trip residual.
pub const ROUND_TRIP_TOLERANCE: f64 = 1e-10;

/// Default band limit of Möbius factors.
pub const MOBIUS_BAND_LIMIT: usize = 24;

/// Tolerance on the area constraint ∫(e^{2ω} − 1) dvol₀ = 0.
pub const AREA_TOLERANCE: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct ConformalFactor {
    lmax: usize,
    coeffs: Vec<Complex64>,
    values: Vec<f64>,
    grid: Arc<SphereGrid>,
}

/// On-disk form: real and imaginary parts interleaved, l ascending, m = 0..=l.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ConformalFactorFile {
    #[serde(rename = "L")]
    pub l: usize,
    pub coeffs: Vec<f64>,
}

impl ConformalFactor {
    pub fn from_coeffs(lmax: usize, mut coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != ncoeffs(lmax) {
            return Err(Error::invalid(format!(
                "band limit {lmax} needs {} coefficients, got {}",
                ncoeffs(lmax),
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::invalid("non-finite conformal coefficient"));
        }
        for l in 0..=lmax {
            coeffs[idx(l, 0)].im = 0.0;
        }
        let grid = Arc::new(SphereGrid::for_band_limit(lmax));
        Ok(Self::on_grid(lmax, coeffs, grid))
    }

    pub(crate) fn on_grid(lmax: usize, coeffs: Vec<Complex64>, grid: Arc<SphereGrid>) -> Self {
        let values = grid.synthesize(&coeffs, lmax);
        Self { lmax, coeffs, values, grid }
    }

    /// Projects f(θ, φ) to band limit `lmax`, failing if it is not resolved.
    pub fn from_fn(lmax: usize, f: impl Fn(f64, f64) -> f64 + Sync) -> Result<Self> {
        Self::from_fn_with_tolerance(lmax, ROUND_TRIP_TOLERANCE, f)
    }

    pub fn from_fn_with_tolerance(
        lmax: usize,
        tolerance: f64,
        f: impl Fn(f64, f64) -> f64 + Sync,
    ) -> Result<Self> {
        let grid = Arc::new(SphereGrid::for_band_limit(lmax));
        let samples = grid.sample(f);
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("conformal factor has non-finite samples"));
        }
        let mut coeffs = grid.analyze(&samples, lmax);
        for l in 0..=lmax {
            coeffs[idx(l, 0)].im = 0.0;
        }
        let out = Self::on_grid(lmax, coeffs, grid);
        let residual = out
            .values
            .iter()
            .zip(&samples)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if residual > tolerance {
            return Err(Error::UnderResolved { residual, tolerance });
        }
        Ok(out)
    }

    pub fn zero(lmax: usize) -> Self {
        Self::from_coeffs(lmax, vec![Complex64::new(0.0, 0.0); ncoeffs(lmax)]).expect("zero field")
    }

    pub fn constant(c: f64) -> Self {
        Self::zero(0).add_constant(c)
    }

    /// ω(θ) = Σ_l c_l P_l(cos θ) with unnormalized Legendre polynomials.
    pub fn zonal(legendre: &[f64]) -> Self {
        let lmax = legendre.len().saturating_sub(1);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); ncoeffs(lmax)];
        for (l, c) in legendre.iter().enumerate() {
            coeffs[idx(l, 0)] = Complex64::new(c * (4.0 * PI / (2.0 * l as f64 + 1.0)).sqrt(), 0.0);
        }
        Self::from_coeffs(lmax, coeffs).expect("finite zonal coefficients")
    }

    /// Random field of degree ≤ `lmax` with sup-norm `amplitude`, area-normalized.
    pub fn random(lmax: usize, amplitude: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); ncoeffs(lmax)];
        for l in 1..=lmax {
            let decay = 1.0 / l as f64;
            for m in 0..=l {
                let re = rng.gen_range(-1.0..1.0) * decay;
                let im = if m == 0 { 0.0 } else { rng.gen_range(-1.0..1.0) * decay };
                coeffs[idx(l, m)] = Complex64::new(re, im);
            }
        }
        let raw = Self::from_coeffs(lmax, coeffs).expect("finite random coefficients");
        let sup = raw.sup_norm();
        let scaled = if sup > 0.0 { raw.scaled(amplitude / sup) } else { raw };
        scaled.area_normalized()
    }

    pub fn lmax(&self) -> usize {
        self.lmax
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, l: usize, m: usize) -> Complex64 {
        self.coeffs[idx(l, m)]
    }

    /// Grid samples of ω.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid(&self) -> &SphereGrid {
        &self.grid
    }

    pub(crate) fn shared_grid(&self) -> Arc<SphereGrid> {
        self.grid.clone()
    }

    pub fn eval(&self, theta: f64, phi: f64) -> f64 {
        evaluate(&self.coeffs, self.lmax, theta, phi)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Sum of |a_lm|² over m ≠ 0 (counting ±m).
    pub fn non_zonal_mass(&self) -> f64 {
        let mut s = 0.0;
        for l in 1..=self.lmax {
            for m in 1..=l {
                s += 2.0 * self.coeffs[idx(l, m)].norm_sqr();
            }
        }
        s
    }

    /// Unnormalized Legendre coefficients c_l of the zonal part.
    pub fn zonal_legendre(&self) -> Vec<f64> {
        (0..=self.lmax)
            .map(|l| self.coeffs[idx(l, 0)].re * ((2.0 * l as f64 + 1.0) / (4.0 * PI)).sqrt())
            .collect()
    }

    pub fn add_constant(&self, c: f64) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs[0] += Complex64::new(c * (4.0 * PI).sqrt(), 0.0);
        Self::on_grid(self.lmax, coeffs, self.grid.clone())
    }

    pub fn scaled(&self, s: f64) -> Self {
        let coeffs = self.coeffs.iter().map(|c| c * s).collect();
        Self::on_grid(self.lmax, coeffs, self.grid.clone())
    }

    /// Same field truncated or zero-padded to band limit `lmax`.
    pub fn with_band_limit(&self, lmax: usize) -> Self {
        if lmax == self.lmax {
            return self.clone();
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); ncoeffs(lmax)];
        for l in 0..=lmax.min(self.lmax) {
            for m in 0..=l {
                coeffs[idx(l, m)] = self.coeffs[idx(l, m)];
            }
        }
        Self::from_coeffs(lmax, coeffs).expect("finite coefficients")
    }

    pub fn add(&self, other: &ConformalFactor) -> Self {
        let lmax = self.lmax.max(other.lmax);
        let a = self.with_band_limit(lmax);
        let b = other.with_band_limit(lmax);
        let coeffs = a.coeffs.iter().zip(&b.coeffs).map(|(x, y)| x + y).collect();
        Self::on_grid(lmax, coeffs, a.grid.clone())
    }

    /// ∫ e^{2ω} dvol₀.
    pub fn area(&self) -> f64 {
        let e: Vec<f64> = self.values.iter().map(|w| (2.0 * w).exp()).collect();
        self.grid.integrate(&e)
    }

    /// Shifts ω by the constant that makes the area 4π.
    pub fn area_normalized(&self) -> Self {
        self.add_constant(-0.5 * (self.area() / (4.0 * PI)).ln())
    }

    /// ∫ω dvol₀.
    pub fn mean_integral(&self) -> f64 {
        self.coeffs[0].re * (4.0 * PI).sqrt()
    }

    /// ∫|∇ω|² dvol₀ from the coefficients.
    pub fn dirichlet_energy(&self) -> f64 {
        let mut s = 0.0;
        for l in 1..=self.lmax {
            let ll = (l * (l + 1)) as f64;
            s += ll * self.coeffs[idx(l, 0)].norm_sqr();
            for m in 1..=l {
                s += 2.0 * ll * self.coeffs[idx(l, m)].norm_sqr();
            }
        }
        s
    }

    /// Grid values of Δ₀ω.
    pub fn laplacian_values(&self) -> Vec<f64> {
        let c = laplacian_coeffs(&self.coeffs, self.lmax);
        self.grid.synthesize(&c, self.lmax)
    }

    /// Grid values of |∇ω|²_{h₀} via ½Δ(ω²) − ωΔω.
    pub fn gradient_sq_values(&self) -> Vec<f64> {
        let l2 = 2 * self.lmax;
        let sq: Vec<f64> = self.values.iter().map(|w| w * w).collect();
        let sq_coeffs = self.grid.analyze(&sq, l2);
        let lap_sq = self.grid.synthesize(&laplacian_coeffs(&sq_coeffs, l2), l2);
        let lap = self.laplacian_values();
        (0..self.values.len())
            .map(|i| 0.5 * lap_sq[i] - self.values[i] * lap[i])
            .collect()
    }

    pub fn to_file(&self) -> ConformalFactorFile {
        let mut coeffs = Vec::with_capacity(2 * self.coeffs.len());
        for c in &self.coeffs {
            coeffs.push(c.re);
            coeffs.push(c.im);
        }
        ConformalFactorFile { l: self.lmax, coeffs }
    }

    pub fn from_file(file: &ConformalFactorFile) -> Result<Self> {
        if file.coeffs.len() != 2 * ncoeffs(file.l) {
            return Err(Error::invalid(format!(
                "band limit {} needs {} interleaved values, got {}",
                file.l,
                2 * ncoeffs(file.l),
                file.coeffs.len()
            )));
        }
        let coeffs = file.coeffs.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect();
        Self::from_coeffs(file.l, coeffs)
    }
}

pub(crate) fn laplacian_coeffs(coeffs: &[Complex64], lmax: usize) -> Vec<Complex64> {
    let mut out = coeffs.to_vec();
    for l in 0..=lmax {
        let ll = (l * (l + 1)) as f64;
        for m in 0..=l {
            out[idx(l, m)] *= -ll;
        }
    }
    out
}

/// Gauss curvature of e^{2ω}h₀ on the grid of ω.
#[derive(Clone, Debug)]
pub struct CurvatureField {
    pub values: Vec<f64>,
    /// ∫K dvol_h.
    pub total: f64,
    pub area: f64,
    /// Area-weighted mean ∫K dvol_h / area.
    pub mean: f64,
}

impl CurvatureField {
    pub fn max_deviation(&self) -> f64 {
        self.values.iter().map(|k| (k - self.mean).abs()).fold(0.0, f64::max)
    }
}

/// K = e^{−2ω}(1 − Δ₀ω).
pub fn curvature(omega: &ConformalFactor) -> CurvatureField {
    let lap = omega.laplacian_values();
    let values: Vec<f64> = omega
        .values
        .iter()
        .zip(&lap)
        .map(|(w, l)| (-2.0 * w).exp() * (1.0 - l))
        .collect();
    let weighted: Vec<f64> = values.iter().zip(&omega.values).map(|(k, w)| k * (2.0 * w).exp()).collect();
    let total = omega.grid.integrate(&weighted);
    let area = omega.area();
    CurvatureField { values, total, area, mean: total / area }
}

/// W(e^{2ω}h₀) − W(h₀) = −¼∫(|∇ω|² + 2ω) dvol₀.
pub fn polyakov_diff(omega: &ConformalFactor) -> f64 {
    -0.25 * (omega.dirichlet_energy() + 2.0 * omega.mean_integral())
}

/// W(e^{2ω}h₁) − W(h₁) for h₁ = e^{2·base}h₀, on the grid.
///
/// Uses conformal invariance of the Dirichlet energy and Scal_{h₁} = 2K₁.
pub fn polyakov_diff_relative(base: &ConformalFactor, omega: &ConformalFactor) -> f64 {
    let lmax = base.lmax.max(omega.lmax);
    let base = base.with_band_limit(lmax);
    let omega = omega.with_band_limit(lmax);
    let k = curvature(&base);
    let grad = omega.gradient_sq_values();
    let integrand: Vec<f64> = (0..grad.len())
        .map(|i| grad[i] + 2.0 * k.values[i] * (2.0 * base.values[i]).exp() * omega.values[i])
        .collect();
    -0.25 * omega.grid.integrate(&integrand)
}

/// δW at e^{2ω}h₀ in the direction δh = 2·delta·h, by grid quadrature.
pub fn w_first_variation(omega: &ConformalFactor, delta: &ConformalFactor) -> f64 {
    let lmax = omega.lmax.max(delta.lmax);
    let omega = omega.with_band_limit(lmax);
    let delta = delta.with_band_limit(lmax);
    let k = curvature(&omega);
    let lap = delta.laplacian_values();
    let integrand: Vec<f64> = (0..lap.len())
        .map(|i| {
            let e = (2.0 * omega.values[i]).exp();
            // δK = −2Kδ − Δ_h δ with Δ_h = e^{−2ω}Δ₀
            (-2.0 * k.values[i] * delta.values[i] - lap[i] / e) * e
        })
        .collect();
    0.25 * omega.grid.integrate(&integrand)
}

/// ∫₀¹ δW(e^{2tω}h₀)(2ω) dt by Gauss–Legendre in t, the path form of [`polyakov_diff`].
pub fn polyakov_path_integral(omega: &ConformalFactor, nodes: usize) -> f64 {
    GaussLegendre::new(nodes).integrate(0.0, 1.0, |t| w_first_variation(&omega.scaled(t), omega))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorollaryGap {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    /// ∫ω dvol₀, nonpositive under the area constraint.
    pub mean_integral: f64,
}

/// |∫2ω| against ∫|∇ω|² for an area-normalized ω.
pub fn corollary_gap(omega: &ConformalFactor) -> Result<CorollaryGap> {
    let defect = omega.area() - 4.0 * PI;
    if defect.abs() > AREA_TOLERANCE {
        return Err(Error::precondition(format!(
            "area constraint violated: ∫(e^{{2ω}} − 1) = {defect:.3e}"
        )));
    }
    let lhs = (2.0 * omega.mean_integral()).abs();
    let rhs = omega.dirichlet_energy();
    Ok(CorollaryGap { lhs, rhs, gap: rhs - lhs, mean_integral: omega.mean_integral() })
}

/// Conformal factor of the Möbius dilation by `t` along `axis`.
///
/// e^{2ω} is the Jacobian of the boundary map of the hyperbolic translation
/// of length t, so the pulled-back metric is round with area 4π.
pub fn mobius_factor(t: f64, axis: BoundaryPoint) -> Result<ConformalFactor> {
    mobius_factor_with(t, axis, MOBIUS_BAND_LIMIT)
}

pub fn mobius_factor_with(t: f64, axis: BoundaryPoint, lmax: usize) -> Result<ConformalFactor> {
    if !(t.abs() < 4.0) {
        return Err(Error::invalid(format!("Möbius parameter must satisfy |t| < 4, got {t}")));
    }
    let (ch, sh) = (t.cosh(), t.sinh());
    let a = axis.dir();
    ConformalFactor::from_fn(lmax, |th, ph| {
        let b = BoundaryPoint::from_polar(th, ph).dir();
        -(ch + sh * dot(a, b)).ln()
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WmonoCheck {
    /// W(h₀) − W(h₁) ≥ 0.
    pub difference: f64,
    pub holds: bool,
    pub equality: bool,
}

/// For ω ≥ 0, W(e^{2ω}h₀) ≤ W(h₀), with equality only for ω ≡ 0.
pub fn wmono_check(omega: &ConformalFactor) -> Result<WmonoCheck> {
    let min = omega.min_value();
    if min < -1e-12 {
        return Err(Error::precondition(format!("ω must be nonnegative, min = {min:.3e}")));
    }
    let p = polyakov_diff(omega);
    let equality = p > -1e-10;
    let holds = p <= 0.0 && (!equality || omega.sup_norm() < 1e-8);
    Ok(WmonoCheck { difference: -p, holds, equality })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_and_homothetic_curvature() {
        let k = curvature(&ConformalFactor::zero(4));
        assert!(k.values.iter().all(|v| (v - 1.0).abs() < 1e-14));
        let k = curvature(&ConformalFactor::constant(0.4));
        assert!(k.values.iter().all(|v| (v - (-0.8f64).exp()).abs() < 1e-14));
    }

    #[test]
    fn gauss_bonnet_random() {
        let w = ConformalFactor::random(8, 0.3, 7);
        assert!((curvature(&w).total - 4.0 * PI).abs() < 1e-6);
        assert!((w.area() - 4.0 * PI).abs() < 1e-12);
        assert!((w.sup_norm() - 0.3).abs() < 0.3);
    }

    #[test]
    fn polyakov_of_constants() {
        assert_eq!(polyakov_diff(&ConformalFactor::zero(3)), 0.0);
        assert!((polyakov_diff(&ConformalFactor::constant(0.3)) + 2.0 * PI * 0.3).abs() < 1e-14);
        let v = w_first_variation(&ConformalFactor::zero(2), &ConformalFactor::constant(0.7));
        assert!((v + 2.0 * PI * 0.7).abs() < 1e-12);
    }

    #[test]
    fn gradient_identity_against_energy() {
        let w = ConformalFactor::random(6, 0.2, 3);
        let g = w.gradient_sq_values();
        assert!((w.grid().integrate(&g) - w.dirichlet_energy()).abs() < 1e-12);
    }

    #[test]
    fn zonal_coefficients_round_trip() {
        let w = ConformalFactor::zonal(&[0.1, 0.0, 0.2]);
        let c = w.zonal_legendre();
        assert!((c[0] - 0.1).abs() < 1e-15 && (c[2] - 0.2).abs() < 1e-15);
        let x: f64 = 0.4;
        let direct = 0.1 + 0.2 * 0.5 * (3.0 * x * x - 1.0);
        assert!((w.eval(x.acos(), 1.0) - direct).abs() < 1e-14);
        assert_eq!(w.non_zonal_mass(), 0.0);
    }

    #[test]
    fn mobius_identity() {
        let w = mobius_factor(0.5, BoundaryPoint::north()).unwrap();
        assert!(curvature(&w).max_deviation() < 1e-7);
        assert!((w.area() - 4.0 * PI).abs() < 1e-8);
        assert!(mobius_factor(0.0, BoundaryPoint::north()).unwrap().sup_norm() < 1e-15);
        assert!(mobius_factor(4.5, BoundaryPoint::north()).is_err());
        assert!(matches!(
            mobius_factor(3.5, BoundaryPoint::north()),
            Err(Error::UnderResolved { .. })
        ));
    }

    #[test]
    fn corollary_rejects_unnormalized() {
        assert!(corollary_gap(&ConformalFactor::constant(0.1)).is_err());
        let g = corollary_gap(&ConformalFactor::zero(2)).unwrap();
        assert_eq!((g.lhs, g.rhs, g.gap), (0.0, 0.0, 0.0));
    }

    #[test]
    fn wmono_cases() {
        let c = wmono_check(&ConformalFactor::zero(2)).unwrap();
        assert!(c.holds && c.equality);
        let c = wmono_check(&ConformalFactor::constant(0.3)).unwrap();
        assert!((c.difference - 2.0 * PI * 0.3).abs() < 1e-14 && c.holds);
        assert!(wmono_check(&ConformalFactor::constant(-0.1)).is_err());
    }

    #[test]
    fn file_round_trip() {
        let w = ConformalFactor::random(3, 0.1, 1);
        let back = ConformalFactor::from_file(&w.to_file()).unwrap();
        assert_eq!(back.coeffs(), w.coeffs());
    }
}
