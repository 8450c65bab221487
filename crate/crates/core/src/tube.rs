//! Jacobi spectrum of a tube about a geodesic, cut between two geodesic planes
//! at distance λ (Neumann) or closed up by a loxodromic quotient of length λ
//! (periodic).
//!
//! In the coordinates φ(r, θ) = (e^r cos θ, e^r sin θ, a e^r) of the upper
//! half-space the Jacobi operator is
//!
//! ```text
//! L = c ∂_rr + a² ∂_θθ + V₀,   c = a²/(1 + a²),   V₀ = a² + 1/(a² + 1) − 1,
//! ```
//!
//! and eigenvalues follow the convention Lφ = −λφ, so the tube is stable when
//! the second eigenvalue is nonnegative. The constant mode gives
//! −V₀ = −a⁴/(a² + 1) < 0.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyp3::tube_closed_form;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    /// Free boundary on the two planes: ∂_rφ = 0 at r = 0 and r = λ.
    Neumann,
    /// φ(r + λ, θ) = φ(r, θ).
    Periodic,
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryCondition::Neumann => "neumann",
            BoundaryCondition::Periodic => "periodic",
        })
    }
}

impl FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "neumann" => Ok(BoundaryCondition::Neumann),
            "periodic" => Ok(BoundaryCondition::Periodic),
            other => Err(Error::invalid(format!("unknown boundary condition {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeSpec {
    a: f64,
    lambda: f64,
    bc: BoundaryCondition,
}

impl TubeSpec {
    pub fn new(a: f64, lambda: f64, bc: BoundaryCondition) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::invalid(format!("tube slope must be positive, got {a}")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(format!("domain length must be positive, got {lambda}")));
        }
        Ok(Self { a, lambda, bc })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    /// Coefficient a²/(1 + a²) of ∂_rr.
    pub fn radial_coefficient(&self) -> f64 {
        let a2 = self.a * self.a;
        a2 / (1.0 + a2)
    }

    /// Zeroth-order term V₀ = a² + 1/(a² + 1) − 1, written as a⁴/(a² + 1).
    pub fn potential(&self) -> f64 {
        let a2 = self.a * self.a;
        a2 * a2 / (a2 + 1.0)
    }

    /// Eigenvalue of −∂_rr on the radial mode m.
    pub fn radial_mu(&self, m: usize) -> f64 {
        let k = match self.bc {
            BoundaryCondition::Neumann => m as f64 * PI / self.lambda,
            BoundaryCondition::Periodic => 2.0 * PI * m as f64 / self.lambda,
        };
        k * k
    }

    /// Analytic eigenvalue of the (m, n) mode.
    pub fn mode_eigenvalue(&self, m: usize, n: usize) -> f64 {
        let n = n as f64;
        self.radial_coefficient() * self.radial_mu(m) + self.a * self.a * n * n - self.potential()
    }

    /// Number of independent eigenfunctions in the (m, n) mode.
    pub fn multiplicity(&self, m: usize, n: usize) -> usize {
        let radial = if m > 0 && self.bc == BoundaryCondition::Periodic { 2 } else { 1 };
        let angular = if n > 0 { 2 } else { 1 };
        radial * angular
    }
}

/// The constant-mode eigenvalue −a⁴/(a² + 1).
pub fn first_eigenvalue(spec: &TubeSpec) -> f64 {
    spec.mode_eigenvalue(0, 0)
}

/// Lowest eigenvalue among non-constant modes. Since a² − V₀ > 0 it is always
/// min(mode (1,0), mode (0,1)).
pub fn second_eigenvalue(spec: &TubeSpec) -> f64 {
    spec.mode_eigenvalue(1, 0).min(spec.mode_eigenvalue(0, 1))
}

pub fn is_stable(spec: &TubeSpec) -> bool {
    second_eigenvalue(spec) >= 0.0
}

/// λ_{m,n} for 0 ≤ m ≤ m_max, 0 ≤ n ≤ n_max, repeated by multiplicity and sorted.
pub fn jacobi_eigenvalues(spec: &TubeSpec, m_max: usize, n_max: usize) -> Result<Vec<f64>> {
    if m_max < 1 || n_max < 1 {
        return Err(Error::invalid("mode ranges must include m = 1 and n = 1"));
    }
    let mut out = Vec::new();
    for m in 0..=m_max {
        for n in 0..=n_max {
            let e = spec.mode_eigenvalue(m, n);
            out.extend(std::iter::repeat_n(e, spec.multiplicity(m, n)));
        }
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Symmetric tridiagonal matrix given by its diagonal and squared off-diagonal.
///
/// A nonsymmetric tridiagonal with positive products b_i c_i is similar to
/// the symmetric one with off-diagonal √(b_i c_i), so only the products are kept.
struct Tridiagonal {
    diag: Vec<f64>,
    off_sq: Vec<f64>,
}

impl Tridiagonal {
    /// Number of eigenvalues strictly below x (Sturm count via LDLᵀ pivots).
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = 1.0;
        for i in 0..self.diag.len() {
            let prev = if i == 0 { 0.0 } else { self.off_sq[i - 1] / q };
            q = self.diag[i] - x - prev;
            if q == 0.0 {
                q = -f64::EPSILON * (self.diag[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off_sq[i - 1].sqrt() } else { 0.0 };
            let right = if i + 1 < n { self.off_sq[i].sqrt() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    /// The lowest `k` eigenvalues by bisection.
    fn lowest(&self, k: usize) -> Vec<f64> {
        let k = k.min(self.diag.len());
        let (lo0, hi0) = self.gershgorin();
        (0..k)
            .map(|j| {
                let (mut lo, mut hi) = (lo0, hi0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.count_below(mid) > j {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                    if hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()).max(1.0) {
                        break;
                    }
                }
                0.5 * (lo + hi)
            })
            .collect()
    }
}

/// Radial FD operators for −c∂_rr + s, one or two matrices depending on the boundary condition.
fn radial_matrices(spec: &TubeSpec, grid_n: usize, shift: f64) -> Vec<Tridiagonal> {
    let c = spec.radial_coefficient();
    let h = spec.lambda / grid_n as f64;
    let k = c / (h * h);
    match spec.bc {
        BoundaryCondition::Neumann => {
            // Cell-centred grid; ghost cells mirror the boundary cells.
            let mut diag = vec![2.0 * k + shift; grid_n];
            diag[0] = k + shift;
            diag[grid_n - 1] = k + shift;
            vec![Tridiagonal { diag, off_sq: vec![k * k; grid_n - 1] }]
        }
        BoundaryCondition::Periodic => {
            // Nodes r_j = jh on the circle of length λ. Reflection r ↦ −r splits the
            // circulant into even functions (nodes 0..=N/2, ends coupled twice) and
            // odd functions (interior nodes, zero at 0 and λ/2).
            let half = grid_n / 2;
            let mut off_even = vec![k * k; half];
            off_even[0] = 2.0 * k * k;
            off_even[half - 1] = 2.0 * k * k;
            let even = Tridiagonal { diag: vec![2.0 * k + shift; half + 1], off_sq: off_even };
            let odd = Tridiagonal { diag: vec![2.0 * k + shift; half - 1], off_sq: vec![k * k; half - 2] };
            vec![even, odd]
        }
    }
}

/// Lowest `count` eigenvalues of the second-order finite-difference Jacobi
/// operator with `grid_n` radial cells; angular modes are exact.
pub fn jacobi_eigenvalues_fd(spec: &TubeSpec, grid_n: usize, count: usize) -> Result<Vec<f64>> {
    if grid_n < 64 {
        return Err(Error::invalid(format!("finite-difference grid needs at least 64 cells, got {grid_n}")));
    }
    if spec.bc == BoundaryCondition::Periodic && grid_n % 2 == 1 {
        return Err(Error::invalid("periodic finite-difference grid must have an even size"));
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let a2 = spec.a * spec.a;
    let mut out: Vec<f64> = Vec::new();
    for n in 0.. {
        let shift = a2 * (n * n) as f64 - spec.potential();
        // −∂_rr is nonnegative, so no mode-n eigenvalue lies below the shift.
        if out.len() >= count && shift > out[count - 1] {
            break;
        }
        let reps = if n > 0 { 2 } else { 1 };
        for mat in radial_matrices(spec, grid_n, shift) {
            for e in mat.lowest(count) {
                out.extend(std::iter::repeat_n(e, reps));
            }
        }
        out.sort_by(f64::total_cmp);
        out.truncate(count);
    }
    Ok(out)
}

/// Richardson combination (4·λ(2N) − λ(N))/3 of two FD spectra, cancelling the h² term.
pub fn jacobi_eigenvalues_fd_extrapolated(spec: &TubeSpec, grid_n: usize, count: usize) -> Result<Vec<f64>> {
    let coarse = jacobi_eigenvalues_fd(spec, grid_n, count)?;
    let fine = jacobi_eigenvalues_fd(spec, 2 * grid_n, count)?;
    Ok(coarse.iter().zip(&fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityThreshold {
    pub lambda: f64,
    pub bc: BoundaryCondition,
    /// Largest stable slope.
    pub a_max: f64,
    /// Smallest stable tube radius.
    pub r_min: f64,
}

/// a_max = π/λ (Neumann) or 2π/λ (periodic), and R_min the radius of the tube with slope a_max.
pub fn stability_threshold(lambda: f64, bc: BoundaryCondition) -> Result<StabilityThreshold> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!("domain length must be positive, got {lambda}")));
    }
    let a_max = match bc {
        BoundaryCondition::Neumann => PI / lambda,
        BoundaryCondition::Periodic => 2.0 * PI / lambda,
    };
    let r_min = tube_closed_form(a_max)?.radius;
    Ok(StabilityThreshold { lambda, bc, a_max, r_min })
}
