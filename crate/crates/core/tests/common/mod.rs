//! Independent reference implementations used by the integration tests.
//!
//! Nothing here calls into the solver: the vector field, the start at the
//! origin, the time stepping and the quadrature rules are all written out
//! again from scratch.

#![allow(dead_code)]

use std::f64::consts::PI;

/// `[r, u, u', V, V']`.
pub type State = [f64; 5];

/// Radius where the reference integrator leaves the power series.
pub const SERIES_RADIUS: f64 = 1e-2;

fn field(n: f64, p: f64, r: f64, y: &[f64; 4]) -> [f64; 4] {
    let d = (n - 1.0) / r;
    [y[1], (y[2] - 1.0) * y[0] - d * y[1], y[3], y[0].abs().powf(p) - d * y[3]]
}

/// Fourth-order power series at the origin.
pub fn series(u0: f64, n: f64, p: f64, r: f64) -> State {
    let a2 = -u0 / (2.0 * n);
    let b2 = u0.powf(p) / (2.0 * n);
    let a4 = (b2 * u0 - a2) / (4.0 * (n + 2.0));
    let b4 = p * u0.powf(p - 1.0) * a2 / (4.0 * (n + 2.0));
    let (r2, r3, r4) = (r * r, r * r * r, r * r * r * r);
    [r, u0 + a2 * r2 + a4 * r4, 2.0 * a2 * r + 4.0 * a4 * r3, b2 * r2 + b4 * r4, 2.0 * b2 * r + 4.0 * b4 * r3]
}

fn rk4_step(n: f64, p: f64, r: f64, y: &[f64; 4], h: f64) -> [f64; 4] {
    let add = |a: &[f64; 4], k: &[f64; 4], s: f64| [a[0] + s * k[0], a[1] + s * k[1], a[2] + s * k[2], a[3] + s * k[3]];
    let k1 = field(n, p, r, y);
    let k2 = field(n, p, r + 0.5 * h, &add(y, &k1, 0.5 * h));
    let k3 = field(n, p, r + 0.5 * h, &add(y, &k2, 0.5 * h));
    let k4 = field(n, p, r + h, &add(y, &k3, h));
    let mut out = *y;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Classical RK4 with step `h`, landing exactly on each requested radius
/// (sorted ascending). Radii inside the series region use the series.
pub fn rk4_at(u0: f64, n: u32, p: f64, h: f64, radii: &[f64]) -> Vec<State> {
    let n = f64::from(n);
    let s = series(u0, n, p, SERIES_RADIUS);
    let (mut r, mut y) = (s[0], [s[1], s[2], s[3], s[4]]);
    let mut out = Vec::with_capacity(radii.len());
    for &target in radii {
        if target <= SERIES_RADIUS {
            out.push(series(u0, n, p, target));
            continue;
        }
        while r < target {
            let step = h.min(target - r);
            y = rk4_step(n, p, r, &y, step);
            r = if step < h { target } else { r + h };
        }
        out.push([r, y[0], y[1], y[2], y[3]]);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tag {
    N,
    P,
    Undetermined,
}

/// Brute-force verdict: march with RK4 until `u` changes sign (N) or `u'`
/// changes sign upward while `u > 0` (P). If both happen in one step the
/// earlier linearly interpolated crossing wins, ties going to N.
pub fn rk4_classify(u0: f64, n: u32, p: f64, h: f64, r_max: f64) -> (Tag, f64) {
    let nf = f64::from(n);
    let s = series(u0, nf, p, SERIES_RADIUS);
    let (mut r, mut y) = (s[0], [s[1], s[2], s[3], s[4]]);
    while r < r_max {
        let z = rk4_step(nf, p, r, &y, h);
        let cross_u = y[0] > 0.0 && z[0] <= 0.0;
        let cross_up = y[1] < 0.0 && z[1] >= 0.0 && z[0] > 0.0;
        let ru = r + h * y[0] / (y[0] - z[0]);
        let rp = r + h * (-y[1]) / (z[1] - y[1]);
        match (cross_u, cross_up) {
            (true, true) => return if ru <= rp { (Tag::N, ru) } else { (Tag::P, rp) },
            (true, false) => return (Tag::N, ru),
            (false, true) => return (Tag::P, rp),
            _ => {}
        }
        y = z;
        r += h;
    }
    (Tag::Undetermined, r)
}

/// Bisection on the brute-force verdict, lower end 0.2 and upper end found
/// by doubling from 1.
pub fn rk4_bisect(n: u32, p: f64, h: f64, tol: f64) -> f64 {
    let verdict = |u0: f64| rk4_classify(u0, n, p, h, 320.0).0;
    let mut lo = 0.2;
    assert_eq!(verdict(lo), Tag::N);
    let mut hi = 1.0;
    while verdict(hi) != Tag::P {
        hi *= 2.0;
        assert!(hi < 1e6);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        match verdict(mid) {
            Tag::N => lo = mid,
            Tag::P => hi = mid,
            Tag::Undetermined => panic!("reference classification undetermined at {mid}"),
        }
    }
    0.5 * (lo + hi)
}

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton's method on `P_m`.
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    (0..m)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            loop {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=m {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    let (mut q0, mut q1) = (1.0, x);
                    for k in 2..=m {
                        let k = k as f64;
                        let q2 = ((2.0 * k - 1.0) * x * q1 - (k - 1.0) * q0) / k;
                        q0 = q1;
                        q1 = q2;
                    }
                    let dq = m as f64 * (x * q1 - q0) / (x * x - 1.0);
                    return (x, 2.0 / ((1.0 - x * x) * dq * dq));
                }
            }
        })
        .collect()
}

/// Composite Gauss–Legendre over `[a, b]` split at `cuts`.
pub fn composite<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cuts: &[f64], panels: usize, rule: &[(f64, f64)]) -> f64 {
    let mut edges = vec![a];
    edges.extend(cuts.iter().copied().filter(|&c| c > a && c < b));
    edges.push(b);
    let mut total = 0.0;
    for w in edges.windows(2) {
        let h = (w[1] - w[0]) / panels as f64;
        for k in 0..panels {
            let c = w[0] + (k as f64 + 0.5) * h;
            total += rule.iter().map(|&(x, wt)| wt * f(c + 0.5 * h * x)).sum::<f64>() * 0.5 * h;
        }
    }
    total
}

/// `(Φ_3 * f)(x)` for `|x| = r`, integrating over `y = x + ρω` in spherical
/// coordinates centred at `x`: `(1/4π) ∫ ρ dρ ∫_{S²} f(|x + ρω|) dω`, with
/// the azimuth done exactly. `edge` is a radius where `f` jumps.
pub fn direct_potential_3d<F: Fn(f64) -> f64>(f: &F, r: f64, support: f64, edge: Option<f64>) -> f64 {
    let rule = gauss_legendre(12);
    let rho_max = r + support;
    let inner = |rho: f64| {
        let g = |mu: f64| f((r * r + rho * rho + 2.0 * r * rho * mu).max(0.0).sqrt());
        let cut = edge
            .filter(|_| r * rho > 0.0)
            .map(|e| (e * e - r * r - rho * rho) / (2.0 * r * rho))
            .filter(|c| c.abs() < 1.0);
        composite(g, -1.0, 1.0, cut.as_slice(), 8, &rule)
    };
    let cuts: Vec<f64> = edge.map(|e| vec![(e - r).abs(), e + r]).unwrap_or_default();
    0.5 * composite(|rho| rho * inner(rho), 0.0, rho_max, &cuts, 200, &rule)
}

/// `(Φ_2 * f)(x)` for `|x| = r` with `Φ_2 = -ln|x| / 2π`, integrating over
/// `y = x + ρ(cos φ, sin φ)`.
pub fn direct_potential_2d<F: Fn(f64) -> f64>(f: &F, r: f64, support: f64, edge: Option<f64>) -> f64 {
    let rule = gauss_legendre(12);
    let rho_max = r + support;
    let inner = |rho: f64| {
        let g = |phi: f64| f((r * r + rho * rho + 2.0 * r * rho * phi.cos()).max(0.0).sqrt());
        let cut = edge
            .filter(|_| r * rho > 0.0)
            .map(|e| (e * e - r * r - rho * rho) / (2.0 * r * rho))
            .filter(|c| c.abs() < 1.0)
            .map(f64::acos);
        composite(g, 0.0, PI, cut.as_slice(), 8, &rule)
    };
    let mut cuts: Vec<f64> = edge.map(|e| vec![(e - r).abs(), e + r]).unwrap_or_default();
    cuts.extend([1e-3, 1e-2, 0.1, 1.0]);
    cuts.sort_by(f64::total_cmp);
    -(1.0 / PI) * composite(|rho| rho * rho.ln() * inner(rho), 0.0, rho_max, &cuts, 200, &rule)
}
