//! Spherical-harmonic transforms on a Gauss–Legendre × uniform-longitude grid.
//!
//! A real field is stored through its coefficients a_lm, m ≥ 0:
//!
//! ```text
//! f(θ, φ) = Σ_l [ a_l0 P̄_l0(cos θ) + 2 Σ_{m≥1} Re(a_lm P̄_lm(cos θ) e^{imφ}) ]
//! ```
//!
//! where P̄_lm e^{imφ} is orthonormal on the unit sphere.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::quadrature::GaussLegendre;

/// Position of (l, m) in a packed triangular coefficient vector.
pub fn idx(l: usize, m: usize) -> usize {
    l * (l + 1) / 2 + m
}

pub fn ncoeffs(lmax: usize) -> usize {
    (lmax + 1) * (lmax + 2) / 2
}

/// Orthonormal associated Legendre functions P̄_lm(x), 0 ≤ m ≤ l ≤ lmax.
pub fn normalized_legendre(lmax: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; ncoeffs(lmax)];
    let sin = (1.0 - x * x).max(0.0).sqrt();
    let mut pmm = 1.0 / (4.0 * PI).sqrt();
    for m in 0..=lmax {
        if m > 0 {
            let mf = m as f64;
            pmm *= ((2.0 * mf + 1.0) / (2.0 * mf)).sqrt() * sin;
        }
        out[idx(m, m)] = pmm;
        if m == lmax {
            break;
        }
        let mut p_prev = pmm;
        let mut p = (2.0 * m as f64 + 3.0).sqrt() * x * pmm;
        out[idx(m + 1, m)] = p;
        for l in (m + 2)..=lmax {
            let (lf, mf) = (l as f64, m as f64);
            let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
            let b = (((lf - 1.0).powi(2) - mf * mf) / (4.0 * (lf - 1.0).powi(2) - 1.0)).sqrt();
            let next = a * (x * p - b * p_prev);
            p_prev = p;
            p = next;
            out[idx(l, m)] = p;
        }
    }
    out
}

/// Sampling grid with precomputed Legendre and Fourier tables.
#[derive(Clone, Debug)]
pub struct SphereGrid {
    nlat: usize,
    nlon: usize,
    table_lmax: usize,
    /// cos θ_j, θ increasing.
    cos_theta: Vec<f64>,
    weights: Vec<f64>,
    /// P̄ tables per latitude, packed.
    plm: Vec<Vec<f64>>,
    /// cos(mφ_k), sin(mφ_k) for m ≤ table_lmax.
    cos_mphi: Vec<Vec<f64>>,
    sin_mphi: Vec<Vec<f64>>,
}

impl SphereGrid {
    /// Grid that integrates products of two degree-`table_lmax` fields exactly.
    pub fn new(nlat: usize, nlon: usize, table_lmax: usize) -> Self {
        assert!(nlat > table_lmax, "grid too coarse for the table degree");
        assert!(nlon > 2 * table_lmax, "too few longitudes for the table degree");
        let gl = GaussLegendre::new(nlat);
        let cos_theta: Vec<f64> = gl.nodes().iter().rev().copied().collect();
        let weights: Vec<f64> = gl.weights().iter().rev().copied().collect();
        let plm = cos_theta.iter().map(|&x| normalized_legendre(table_lmax, x)).collect();
        let mut cos_mphi = Vec::with_capacity(table_lmax + 1);
        let mut sin_mphi = Vec::with_capacity(table_lmax + 1);
        for m in 0..=table_lmax {
            let (c, s): (Vec<f64>, Vec<f64>) = (0..nlon)
                .map(|k| {
                    let a = m as f64 * 2.0 * PI * k as f64 / nlon as f64;
                    (a.cos(), a.sin())
                })
                .unzip();
            cos_mphi.push(c);
            sin_mphi.push(s);
        }
        Self { nlat, nlon, table_lmax, cos_theta, weights, plm, cos_mphi, sin_mphi }
    }

    /// Default grid for fields of band limit `lmax`, able to analyze their squares.
    pub fn for_band_limit(lmax: usize) -> Self {
        let nlat = (2 * lmax + 2).max(32);
        Self::new(nlat, 2 * nlat, 2 * lmax)
    }

    pub fn nlat(&self) -> usize {
        self.nlat
    }

    pub fn nlon(&self) -> usize {
        self.nlon
    }

    pub fn len(&self) -> usize {
        self.nlat * self.nlon
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn table_lmax(&self) -> usize {
        self.table_lmax
    }

    pub fn theta(&self, j: usize) -> f64 {
        self.cos_theta[j].acos()
    }

    pub fn cos_theta(&self) -> &[f64] {
        &self.cos_theta
    }

    pub fn phi(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.nlon as f64
    }

    /// Quadrature weight of grid point (j, k) on the unit sphere.
    pub fn weight(&self, j: usize) -> f64 {
        self.weights[j] * 2.0 * PI / self.nlon as f64
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        (0..self.nlat)
            .map(|j| self.weight(j) * values[j * self.nlon..(j + 1) * self.nlon].iter().sum::<f64>())
            .sum()
    }

    /// Grid values of f(θ, φ).
    pub fn sample(&self, f: impl Fn(f64, f64) -> f64 + Sync) -> Vec<f64> {
        (0..self.len())
            .map(|i| f(self.theta(i / self.nlon), self.phi(i % self.nlon)))
            .collect()
    }

    /// Coefficients up to degree `lmax` by quadrature.
    pub fn analyze(&self, values: &[f64], lmax: usize) -> Vec<Complex64> {
        assert!(lmax <= self.table_lmax);
        assert_eq!(values.len(), self.len());
        let step = 2.0 * PI / self.nlon as f64;
        let per_lat: Vec<Vec<Complex64>> = (0..self.nlat)
            .into_par_iter()
            .map(|j| {
                let row = &values[j * self.nlon..(j + 1) * self.nlon];
                let w = self.weights[j];
                let fm: Vec<Complex64> = (0..=lmax)
                    .map(|m| {
                        let (c, s) = (&self.cos_mphi[m], &self.sin_mphi[m]);
                        let mut re = 0.0;
                        let mut im = 0.0;
                        for k in 0..self.nlon {
                            re += row[k] * c[k];
                            im -= row[k] * s[k];
                        }
                        Complex64::new(re, im) * step
                    })
                    .collect();
                let p = &self.plm[j];
                let mut out = vec![Complex64::new(0.0, 0.0); ncoeffs(lmax)];
                for l in 0..=lmax {
                    for m in 0..=l {
                        out[idx(l, m)] = fm[m] * (w * p[idx(l, m)]);
                    }
                }
                out
            })
            .collect();
        let mut acc = vec![Complex64::new(0.0, 0.0); ncoeffs(lmax)];
        for row in per_lat {
            for (a, b) in acc.iter_mut().zip(row) {
                *a += b;
            }
        }
        acc
    }

    /// Grid values of the field with coefficients `coeffs` (degree `lmax`).
    pub fn synthesize(&self, coeffs: &[Complex64], lmax: usize) -> Vec<f64> {
        assert!(lmax <= self.table_lmax);
        assert_eq!(coeffs.len(), ncoeffs(lmax));
        let rows: Vec<Vec<f64>> = (0..self.nlat)
            .into_par_iter()
            .map(|j| {
                let p = &self.plm[j];
                let mut gm = vec![Complex64::new(0.0, 0.0); lmax + 1];
                for l in 0..=lmax {
                    for m in 0..=l {
                        gm[m] += coeffs[idx(l, m)] * p[idx(l, m)];
                    }
                }
                (0..self.nlon)
                    .map(|k| {
                        let mut v = gm[0].re;
                        for (m, g) in gm.iter().enumerate().take(lmax + 1).skip(1) {
                            v += 2.0 * (g.re * self.cos_mphi[m][k] - g.im * self.sin_mphi[m][k]);
                        }
                        v
                    })
                    .collect()
            })
            .collect();
        rows.concat()
    }
}

/// Evaluates a coefficient vector at one point.
pub fn evaluate(coeffs: &[Complex64], lmax: usize, theta: f64, phi: f64) -> f64 {
    let p = normalized_legendre(lmax, theta.cos());
    let mut v = 0.0;
    for l in 0..=lmax {
        v += coeffs[idx(l, 0)].re * p[idx(l, 0)];
        for m in 1..=l {
            let e = Complex64::from_polar(1.0, m as f64 * phi);
            v += 2.0 * (coeffs[idx(l, m)] * e).re * p[idx(l, m)];
        }
    }
    v
}
