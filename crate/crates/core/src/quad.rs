//! One-dimensional quadrature rules.
//!
//! The tanh-sinh rule passes integrands the distances to both panel ends
//! alongside the abscissa, so power-law endpoint singularities can be
//! evaluated without cancellation.

/// Result of an adaptive rule.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quad {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Fixed-order Gauss-Legendre on `[a, b]`.
pub fn gauss_legendre_integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let (x, w) = gauss_legendre(n);
    let (m, h) = (0.5 * (a + b), 0.5 * (b - a));
    x.iter().zip(&w).map(|(xi, wi)| wi * f(m + h * xi)).sum::<f64>() * h
}

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
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    let fc = f(c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Globally adaptive Gauss-Kronrod (7/15) with bisection of the worst panel.
pub fn adaptive_gk(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64, rel_tol: f64, max_panels: usize) -> Quad {
    adaptive_gk_breaks(f, &[a, b], abs_tol, rel_tol, max_panels)
}

/// [`adaptive_gk`] starting from the panels delimited by `breaks`.
pub fn adaptive_gk_breaks(
    f: impl Fn(f64) -> f64,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_panels: usize,
) -> Quad {
    let mut panels: Vec<(f64, f64, f64, f64)> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (v, e) = gk15(&f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();
    let mut evals = 15 * panels.len();
    loop {
        let value: f64 = panels.iter().map(|p| p.2).sum();
        let error: f64 = panels.iter().map(|p| p.3).sum();
        if error <= abs_tol.max(rel_tol * value.abs()) || panels.len() >= max_panels {
            return Quad { value, error, evals };
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let (a, b, _, _) = panels.swap_remove(worst);
        let m = 0.5 * (a + b);
        if !(m > a && m < b) {
            return Quad { value, error, evals };
        }
        let (v1, e1) = gk15(&f, a, m);
        let (v2, e2) = gk15(&f, m, b);
        evals += 30;
        panels.push((a, m, v1, e1));
        panels.push((m, b, v2, e2));
    }
}

/// Tanh-sinh (double exponential) rule on `[a, b]`.
///
/// `f(x, da, db)` receives the abscissa and its exact distances
/// `x - a`, `b - x`. Refinement halves the step until two successive levels
/// agree to `tol` relative (absolute below magnitude one).
pub fn tanh_sinh(f: impl Fn(f64, f64, f64) -> f64, a: f64, b: f64, tol: f64) -> Quad {
    use std::f64::consts::FRAC_PI_2;
    let half = 0.5 * (b - a);
    let t_max = 6.5;
    let node = |t: f64| -> Option<f64> {
        let u = FRAC_PI_2 * t.sinh();
        // distances to the ends as fractions of 2·half
        let e = (-2.0 * u.abs()).exp();
        let near = e / (1.0 + e);
        let far = 1.0 / (1.0 + e);
        let (da, db) = if u >= 0.0 {
            (2.0 * half * far, 2.0 * half * near)
        } else {
            (2.0 * half * near, 2.0 * half * far)
        };
        if da <= 0.0 || db <= 0.0 {
            return None;
        }
        let x = if u >= 0.0 { b - db } else { a + da };
        // dx/dt = half · (π/2) cosh t / cosh^2 u = half·(π/2) cosh t · 4e/(1+e)^2
        let w = half * FRAC_PI_2 * t.cosh() * 4.0 * e / ((1.0 + e) * (1.0 + e));
        let v = f(x, da, db);
        if !v.is_finite() {
            return None;
        }
        Some(w * v)
    };

    let mut h = 1.0;
    let mut evals = 0usize;
    let mut sum = node(0.0).unwrap_or(0.0);
    evals += 1;
    let mut k = 1;
    loop {
        let t = k as f64 * h;
        if t > t_max {
            break;
        }
        sum += node(t).unwrap_or(0.0) + node(-t).unwrap_or(0.0);
        evals += 2;
        k += 1;
    }
    let mut estimate = sum * h;
    let mut prev_err = f64::INFINITY;
    for level in 1..12 {
        h *= 0.5;
        let mut k = 1;
        loop {
            let t = k as f64 * h;
            if t > t_max {
                break;
            }
            sum += node(t).unwrap_or(0.0) + node(-t).unwrap_or(0.0);
            evals += 2;
            k += 2;
        }
        let next = sum * h;
        let err = (next - estimate).abs();
        estimate = next;
        if level >= 3 && err <= tol * estimate.abs().max(1.0) {
            return Quad {
                value: estimate,
                error: err,
                evals,
            };
        }
        prev_err = err;
    }
    Quad {
        value: estimate,
        error: prev_err,
        evals,
    }
}

/// Root of a function known to change sign on `[lo, hi]`.
pub fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = f(mid);
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(6);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let int: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(10)).sum();
        assert!((int - 2.0 / 11.0).abs() < 1e-14);
        let odd = gauss_legendre_integrate(|x| x.powi(3) + 1.0, 0.0, 2.0, 3);
        assert!((odd - 6.0).abs() < 1e-13);
    }

    #[test]
    fn kronrod_handles_kinks() {
        let q = adaptive_gk(|x| (x - 0.3).abs(), -1.0, 1.0, 1e-12, 1e-12, 500);
        assert!((q.value - (0.845 + 0.245)).abs() < 1e-10, "{q:?}");
    }

    #[test]
    fn tanh_sinh_endpoint_singularities() {
        // ∫_0^1 x^{-0.9} dx = 10
        let q = tanh_sinh(|_, da, _| da.powf(-0.9), 0.0, 1.0, 1e-13);
        assert!((q.value - 10.0).abs() < 1e-8, "{q:?}");
        // ∫_{-1}^{1} sqrt((1-x)/(1+x)) dx = π
        let q = tanh_sinh(|_, da, db| (db / da).sqrt(), -1.0, 1.0, 1e-13);
        assert!((q.value - PI).abs() < 1e-10, "{q:?}");
        let q = tanh_sinh(|x, _, _| x.exp(), 0.0, 1.0, 1e-13);
        assert!((q.value - (1f64.exp() - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn bisection() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0);
        assert!((r - 2f64.sqrt()).abs() < 1e-14);
    }
}
