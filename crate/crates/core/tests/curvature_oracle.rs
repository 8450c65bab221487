//! Principal curvatures of radial surfaces against a finite-difference
//! computation in the hyperboloid model of H³ ⊂ R^{3,1}.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use renvol::surfaces::RadialSurface;

type V4 = [f64; 4];

/// Minkowski product with signature (−, +, +, +).
fn mdot(a: V4, b: V4) -> f64 {
    -a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
}

fn legendre_series(c: &[f64], x: f64) -> f64 {
    let (mut p0, mut p1) = (1.0, x);
    let mut s = c[0];
    if c.len() > 1 {
        s += c[1] * x;
    }
    for (l, cl) in c.iter().enumerate().skip(2) {
        let lf = l as f64;
        let p2 = ((2.0 * lf - 1.0) * x * p1 - (lf - 1.0) * p0) / lf;
        s += cl * p2;
        p0 = p1;
        p1 = p2;
    }
    s
}

fn embed(c: &[f64], theta: f64, phi: f64) -> V4 {
    let r = legendre_series(c, theta.cos());
    let (sh, ch) = (r.sinh(), r.cosh());
    [ch, sh * theta.sin() * phi.cos(), sh * theta.sin() * phi.sin(), sh * theta.cos()]
}

fn comb(terms: &[(f64, V4)]) -> V4 {
    let mut out = [0.0; 4];
    for (w, v) in terms {
        for i in 0..4 {
            out[i] += w * v[i];
        }
    }
    out
}

/// First and second derivatives along one coordinate by fourth-order central differences.
fn derivs(f: impl Fn(f64) -> V4, x: f64, h: f64) -> (V4, V4) {
    let (m2, m1, p1, p2) = (f(x - 2.0 * h), f(x - h), f(x + h), f(x + 2.0 * h));
    let c = f(x);
    let d1 = comb(&[(1.0 / 12.0 / h, m2), (-8.0 / 12.0 / h, m1), (8.0 / 12.0 / h, p1), (-1.0 / 12.0 / h, p2)]);
    let hh = 12.0 * h * h;
    let d2 = comb(&[(-1.0 / hh, m2), (16.0 / hh, m1), (-30.0 / hh, c), (16.0 / hh, p1), (-1.0 / hh, p2)]);
    (d1, d2)
}

/// Euclidean generalized cross product: orthogonal (dot product) to a, b and c.
fn cross3(a: V4, b: V4, c: V4) -> V4 {
    let det3 = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let mut out = [0.0; 4];
    for (i, o) in out.iter_mut().enumerate() {
        let cols: Vec<usize> = (0..4).filter(|&j| j != i).collect();
        let minor = [
            [a[cols[0]], a[cols[1]], a[cols[2]]],
            [b[cols[0]], b[cols[1]], b[cols[2]]],
            [c[cols[0]], c[cols[1]], c[cols[2]]],
        ];
        *o = if i % 2 == 0 { det3(minor) } else { -det3(minor) };
    }
    out
}

/// (k_meridian, k_parallel) at (θ, φ = 0.3), outward normal.
fn oracle_curvatures(c: &[f64], theta: f64) -> (f64, f64) {
    let phi = 0.3;
    let h = 1e-3;
    let x = embed(c, theta, phi);
    let (xt, xtt) = derivs(|t| embed(c, t, phi), theta, h);
    let (xp, xpp) = derivs(|p| embed(c, theta, p), phi, h);
    let e = cross3(x, xt, xp);
    // Lowering the time index turns Euclidean orthogonality into Minkowski orthogonality.
    let mut n = [-e[0], e[1], e[2], e[3]];
    let norm = mdot(n, n).sqrt();
    n.iter_mut().for_each(|v| *v /= norm);
    // Outward: positive pairing with the unit radial direction (sinh r, cosh r·u).
    let r = legendre_series(c, theta.cos());
    let radial = [r.sinh(), r.cosh() * theta.sin() * phi.cos(), r.cosh() * theta.sin() * phi.sin(), r.cosh() * theta.cos()];
    if mdot(n, radial) < 0.0 {
        n.iter_mut().for_each(|v| *v = -*v);
    }
    let k_meridian = -mdot(xtt, n) / mdot(xt, xt);
    let k_parallel = -mdot(xpp, n) / mdot(xp, xp);
    (k_meridian, k_parallel)
}

#[test]
fn sphere_oracle_is_coth() {
    let (k1, k2) = oracle_curvatures(&[1.3], 0.9);
    let coth = 1.0 / 1.3f64.tanh();
    assert!((k1 - coth).abs() < 1e-7 && (k2 - coth).abs() < 1e-7, "{k1} {k2} vs {coth}");
}

#[test]
fn spectral_curvatures_match_hyperboloid_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for case in 0..5 {
        let lmax = rng.gen_range(2..=6);
        let r0 = rng.gen_range(0.5..2.0);
        let mut c = vec![r0];
        for l in 1..=lmax {
            c.push(rng.gen_range(-0.06..0.06) / l as f64);
        }
        let s = RadialSurface::from_legendre(&c).unwrap();
        let mut worst: f64 = 0.0;
        for (i, &th) in s.theta_grid().iter().enumerate() {
            if th.sin() < 0.1 {
                continue;
            }
            let (k1, k2) = oracle_curvatures(&c, th);
            let p = s.pointdata()[i];
            worst = worst.max((p.k1 - k1).abs()).max((p.k2 - k2).abs());
        }
        assert!(worst < 1e-5, "case {case}: worst curvature error {worst:.3e}");
    }
}
