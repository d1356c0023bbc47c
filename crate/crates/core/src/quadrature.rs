//! Adaptive Gauss–Kronrod 7-15 quadrature.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

const MAX_DEPTH: u32 = 40;

/// One 15-point Kronrod estimate with its embedded 7-point Gauss error bound.
pub fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let x = h * XGK[j];
        let pair = f(c - x) + f(c + x);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Integrates `f` over `[a, b]` to absolute accuracy `abs_tol` by recursive
/// bisection.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Quadrature(format!("non-finite interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    if b < a {
        return integrate(f, b, a, abs_tol).map(|v| -v);
    }
    let (value, err) = gauss_kronrod(&f, a, b);
    refine(&f, a, b, value, err, abs_tol, 0)
}

fn refine<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, value: f64, err: f64, tol: f64, depth: u32) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::Quadrature(format!("non-finite integrand on [{a}, {b}]")));
    }
    if err <= tol || err <= 50.0 * f64::EPSILON * value.abs() {
        return Ok(value);
    }
    let m = 0.5 * (a + b);
    if depth >= MAX_DEPTH || m <= a || m >= b {
        return Err(Error::Quadrature(format!("no convergence on [{a}, {b}], error estimate {err:e}")));
    }
    let (lv, le) = gauss_kronrod(f, a, m);
    let (rv, re) = gauss_kronrod(f, m, b);
    Ok(refine(f, a, m, lv, le, 0.5 * tol, depth + 1)? + refine(f, m, b, rv, re, 0.5 * tol, depth + 1)?)
}

/// Integrals of `f` over consecutive intervals `[x[i], x[i+1]]`, each to
/// `abs_tol`.
pub fn piecewise<F: Fn(f64) -> f64>(f: &F, x: &[f64], abs_tol: f64) -> Result<Vec<f64>> {
    x.windows(2).map(|w| integrate(f, w[0], w[1], abs_tol)).collect()
}
