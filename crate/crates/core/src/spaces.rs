//! Discrete Fourier-Lebesgue norms.
//!
//! All norms are Riemann sums over the frequency lattice of the weighted
//! `L^{r'}` integrals, with measure `(Δξ)^3` in space and `(Δξ)^3 Δτ` in
//! space-time and no `2π` factors.
//!
//! Under the global `e^{-itτ}` time convention the free wave `e^{+itD}u_0`
//! concentrates on `τ = |ξ|`, so the `X^{r,+}` weight is `⟨τ - |ξ|⟩` and the
//! `X^{r,-}` weight is `⟨τ + |ξ|⟩`.

use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{symbols, Field, Repr, SpacetimeField, Spectrum};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }
}

/// `r' = r / (r - 1)`.
pub fn dual_exponent(r: f64) -> f64 {
    r / (r - 1.0)
}

/// Validates `r ∈ (1, 2]` and returns `r'`.
pub fn check_lebesgue(r: f64) -> Result<f64> {
    if !(r > 1.0 && r <= 2.0) {
        return Err(Error::Parameter(format!("r = {r} must lie in (1, 2]")));
    }
    Ok(dual_exponent(r))
}

/// Exponents of `Ĥ^r_s` and `X^{r,±}_{s,b}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormParams {
    pub r: f64,
    pub rprime: f64,
    pub s: f64,
    pub b: f64,
    pub sign: Sign,
}

impl NormParams {
    pub fn new(r: f64, s: f64, b: f64, sign: Sign) -> Result<Self> {
        let rprime = check_lebesgue(r)?;
        if !(s.is_finite() && b.is_finite()) {
            return Err(Error::Parameter("s and b must be finite".into()));
        }
        Ok(Self { r, rprime, s, b, sign })
    }

    pub fn with_s(self, s: f64) -> Self {
        Self { s, ..self }
    }

    pub fn with_b(self, b: f64) -> Self {
        Self { b, ..self }
    }
}

/// Default modulation exponents for experiments: `1/r + 0.05`, `0.55` and
/// `0.75`, each kept inside `(1/r, 1)`.
pub fn default_b_samples(r: f64) -> Vec<f64> {
    let lo = 1.0 / r;
    let mut out: Vec<f64> = [lo + 0.05, 0.55, 0.75]
        .into_iter()
        .map(|b| b.clamp(lo + 0.01, 0.99))
        .collect();
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum WindowShape {
    Rectangular,
    RaisedCosine,
}

/// Time cut-off used to realise restriction norms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WindowSpec {
    pub shape: WindowShape,
    pub flat_fraction: f64,
    pub support: f64,
}

impl WindowSpec {
    pub fn new(shape: WindowShape, flat_fraction: f64, support: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&flat_fraction) {
            return Err(Error::Parameter(format!(
                "flat fraction {flat_fraction} outside [0, 1]"
            )));
        }
        if !(support.is_finite() && support > 0.0) {
            return Err(Error::Parameter(format!("window support {support} must be positive")));
        }
        Ok(Self {
            shape,
            flat_fraction,
            support,
        })
    }

    /// The canonical raised-cosine window with flat fraction 0.5.
    pub fn canonical(support: f64) -> Result<Self> {
        Self::new(WindowShape::RaisedCosine, 0.5, support)
    }

    pub fn flat_core(&self) -> f64 {
        match self.shape {
            WindowShape::Rectangular => self.support,
            WindowShape::RaisedCosine => self.flat_fraction * self.support,
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        let a = t.abs();
        if a > self.support {
            return 0.0;
        }
        match self.shape {
            WindowShape::Rectangular => 1.0,
            WindowShape::RaisedCosine => {
                let core = self.flat_core();
                if a <= core {
                    1.0
                } else {
                    0.5 * (1.0 + (PI * (a - core) / (self.support - core)).cos())
                }
            }
        }
    }

    /// Frequency scale beyond which the window's transform is negligible for
    /// support-property checks.
    pub fn frequency_width(&self) -> f64 {
        let taper = match self.shape {
            WindowShape::Rectangular => self.support,
            WindowShape::RaisedCosine => (self.support - self.flat_core()).max(1e-12),
        };
        4.0 * PI / taper.min(self.support)
    }
}

fn weighted_sum(values: impl Iterator<Item = (f64, f64)>, rprime: f64) -> f64 {
    // (weight, |F|) pairs; sum of (w|F|)^{r'}
    values
        .map(|(w, a)| {
            let x = w * a;
            if x == 0.0 {
                0.0
            } else {
                x.powf(rprime)
            }
        })
        .sum()
}

/// `‖⟨ξ⟩^s F‖_{L^{r'}_ξ}`, the `Ĥ^r_s` norm of the function with transform `F`.
pub fn sobolev_hat_norm(spec: &Spectrum, r: f64, s: f64) -> Result<f64> {
    let rp = check_lebesgue(r)?;
    spec.expect_repr(Repr::Frequency)?;
    let g = spec.grid();
    let sum = weighted_sum(
        spec.data()
            .iter()
            .enumerate()
            .map(|(i, v)| (symbols::japanese(g.freq_vec(i)).powf(s), v.norm())),
        rp,
    );
    Ok((sum * g.dxi().powi(3)).powf(1.0 / rp))
}

/// `(Σ |w(ξ, τ) F(ξ, τ)|^{r'} (Δξ)^3 Δτ)^{1/r'}` for a space-time spectrum.
pub fn weighted_lr_norm(spec: &SpacetimeField, r: f64, weight: impl Fn([f64; 3], f64) -> f64) -> Result<f64> {
    let rp = check_lebesgue(r)?;
    spec.expect_repr(Repr::Frequency)?;
    let g = spec.grid();
    let s = g.spatial();
    let n3 = s.len();
    let xis: Vec<[f64; 3]> = (0..n3).map(|i| s.freq_vec(i)).collect();
    let mut sum = 0.0;
    for m in 0..g.m() {
        let tau = g.tau(m);
        let row = &spec.data()[m * n3..(m + 1) * n3];
        sum += weighted_sum(row.iter().zip(&xis).map(|(v, xi)| (weight(*xi, tau), v.norm())), rp);
    }
    Ok((sum * s.dxi().powi(3) * g.dtau()).powf(1.0 / rp))
}

/// The `L̂^r_{xt}` norm.
pub fn lr_xt_norm(spec: &SpacetimeField, r: f64) -> Result<f64> {
    weighted_lr_norm(spec, r, |_, _| 1.0)
}

/// Modulation weight `⟨τ - sign·|ξ|⟩`.
pub fn modulation(xi: [f64; 3], tau: f64, sign: Sign) -> f64 {
    let d = tau - sign.value() * symbols::norm(xi);
    (1.0 + d * d).sqrt()
}

/// `‖u‖_{X^{r,±}_{s,b}}`; `u` may be in any representation.
pub fn xsb_norm(u: &SpacetimeField, p: &NormParams) -> Result<f64> {
    let spec = u.to_frequency()?;
    let (s, b, sign) = (p.s, p.b, p.sign);
    weighted_lr_norm(&spec, p.r, |xi, tau| {
        symbols::japanese(xi).powf(s) * modulation(xi, tau, sign).powf(b)
    })
}

/// `‖u‖_{X_{s,b}} + ‖∂_t u‖_{X_{s-1,b}}`.
pub fn z_norm(u: &SpacetimeField, du_dt: &SpacetimeField, p: &NormParams) -> Result<f64> {
    u.check_grid(du_dt)?;
    Ok(xsb_norm(u, p)? + xsb_norm(du_dt, &p.with_s(p.s - 1.0))?)
}

fn check_window(u: &SpacetimeField, delta: f64, w: &WindowSpec) -> Result<()> {
    let t = u.grid().half_time();
    if w.support > t {
        return Err(Error::Parameter(format!(
            "window support {} exceeds the time box {t}",
            w.support
        )));
    }
    if !(delta > 0.0 && delta <= w.flat_core() + 1e-12) {
        return Err(Error::Parameter(format!(
            "restriction radius {delta} must be positive and within the flat core {}",
            w.flat_core()
        )));
    }
    Ok(())
}

/// Restricts `u` with the window: the result agrees with `u` on `[-δ, δ]`.
pub fn windowed(u: &SpacetimeField, delta: f64, w: &WindowSpec) -> Result<SpacetimeField> {
    check_window(u, delta, w)?;
    let base = match u.repr() {
        Repr::Frequency => u.time_inverse()?,
        _ => u.clone(),
    };
    base.apply_time_weight(|t| w.value(t))
}

/// Upper bound for the `X^{r,±}_{s,b}(δ)` restriction norm: the full norm of
/// the windowed extension `w·u`.
pub fn restricted_norm(u: &SpacetimeField, delta: f64, w: &WindowSpec, p: &NormParams) -> Result<f64> {
    xsb_norm(&windowed(u, delta, w)?, p)
}

/// `sup_t ‖u(t)‖_{Ĥ^r_s}` over time indices with `|t| ≤ radius`.
pub fn sup_time_norm(u: &SpacetimeField, r: f64, s: f64, radius: f64) -> Result<f64> {
    let mixed = u.to_mixed()?;
    let g = mixed.grid();
    let mut best: f64 = 0.0;
    for m in 0..g.m() {
        if g.time(m).abs() <= radius + 1e-12 {
            let slice: Field = mixed.slice_field(m)?;
            best = best.max(sobolev_hat_norm(&slice, r, s)?);
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{forward_transform, SpacetimeGrid, SpatialGrid, C64};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_st(g: SpacetimeGrid, seed: u64) -> SpacetimeField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..g.len())
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        SpacetimeField::from_parts(g, Repr::Configuration, data).unwrap()
    }

    fn small_grid() -> SpacetimeGrid {
        SpacetimeGrid::new(SpatialGrid::new(6, 2.0).unwrap(), 8, 2.0).unwrap()
    }

    #[test]
    fn exponent_bookkeeping() {
        for r in [1.1, 1.5, 2.0] {
            let rp = dual_exponent(r);
            assert!((1.0 / r + 1.0 / rp - 1.0).abs() < 1e-12);
            assert!(rp >= 2.0);
            assert!((dual_exponent(dual_exponent(r)) - r).abs() < 1e-12);
        }
        assert!(NormParams::new(1.0, 0.0, 0.0, Sign::Plus).is_err());
        assert!(NormParams::new(2.5, 0.0, 0.0, Sign::Plus).is_err());
        assert!(NormParams::new(2.0, 0.0, 0.0, Sign::Plus).is_ok());
    }

    #[test]
    fn default_b_samples_stay_admissible() {
        for r in [1.2, 1.5, 2.0] {
            for b in default_b_samples(r) {
                assert!(b > 1.0 / r && b < 1.0, "r={r} b={b}");
            }
        }
        assert_eq!(default_b_samples(2.0), vec![0.55, 0.75]);
    }

    #[test]
    fn window_shape() {
        let w = WindowSpec::canonical(2.0).unwrap();
        assert_eq!(w.flat_core(), 1.0);
        assert_eq!(w.value(0.9), 1.0);
        assert_eq!(w.value(-1.0), 1.0);
        assert!((w.value(1.5) - 0.5).abs() < 1e-15);
        assert_eq!(w.value(2.1), 0.0);
        for i in 0..100 {
            let v = w.value(-3.0 + 0.06 * i as f64);
            assert!((0.0..=1.0).contains(&v));
        }
    }

    #[test]
    fn sobolev_norm_examples() {
        let g = SpatialGrid::new(8, 3.0).unwrap();
        let zero = Field::zeros(g, Repr::Frequency);
        assert_eq!(sobolev_hat_norm(&zero, 1.5, 1.0).unwrap(), 0.0);

        let k = g.index_of_wave_number([1, 2, -1]).unwrap();
        let mut one = zero.clone();
        one.data_mut()[k] = C64::new(0.0, -2.5);
        let (r, s) = (1.4, 0.7);
        let rp = dual_exponent(r);
        let want = symbols::japanese(g.freq_vec(k)).powf(s) * 2.5 * g.dxi().powf(3.0 / rp);
        let got = sobolev_hat_norm(&one, r, s).unwrap();
        assert!((got - want).abs() < 1e-12 * want);
        assert!(sobolev_hat_norm(&one, 0.9, s).is_err());
    }

    #[test]
    fn gaussian_l2_norm() {
        let g = SpatialGrid::new(32, 12.0).unwrap();
        let spec = Field::from_spectrum_fn(g, |xi| {
            C64::new((-(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]) / 2.0).exp(), 0.0)
        });
        let got = sobolev_hat_norm(&spec, 2.0, 0.0).unwrap();
        assert!((got - PI.powf(0.75)).abs() < 1e-4, "{got}");
    }

    #[test]
    fn lr_xt_examples() {
        let g = small_grid();
        let zero = SpacetimeField::zeros(g, Repr::Frequency);
        assert_eq!(lr_xt_norm(&zero, 1.5).unwrap(), 0.0);

        let u = random_st(g, 3);
        let spec = u.forward().unwrap();
        // Plancherel: ∫|F|^2 = (2π)^4 ∫|u|^2.
        let want = (2.0 * PI).powi(2) * u.l2_norm();
        let got = lr_xt_norm(&spec, 2.0).unwrap();
        assert!((got - want).abs() < 1e-10 * want);

        for r in [1.3, 2.0] {
            let base = lr_xt_norm(&spec, r).unwrap();
            for sign in [Sign::Plus, Sign::Minus] {
                let p = NormParams::new(r, 0.0, 0.0, sign).unwrap();
                assert_eq!(xsb_norm(&spec, &p).unwrap(), base);
            }
        }
    }

    #[test]
    fn free_wave_has_tensor_structure() {
        // u(t) = ψ(t) e^{itD} u0 with b = 0 factorises as ‖u0‖·c_ψ.
        let s = SpatialGrid::new(16, 8.0).unwrap();
        let g = SpacetimeGrid::new(s, 64, 8.0).unwrap();
        let w = WindowSpec::canonical(7.5).unwrap();
        let u0 = Field::from_spectrum_fn(s, |xi| {
            C64::new((-(xi[0].powi(2) + xi[1].powi(2) + xi[2].powi(2))).exp(), 0.0)
        });
        let mut u = SpacetimeField::zeros(g, Repr::Mixed);
        for m in 0..g.m() {
            let t = g.time(m);
            let psi = w.value(t);
            for (i, v) in u.slice_mut(m).iter_mut().enumerate() {
                let xi = s.freq_vec(i);
                *v = u0.data()[i] * C64::from_polar(psi, t * symbols::norm(xi));
            }
        }
        for r in [1.5, 2.0] {
            let rp = dual_exponent(r);
            // c_ψ by quadrature of ψ̂ on a fine τ grid (independent of the lattice).
            let c_psi = window_lr_norm_oracle(&w, rp);
            let p = NormParams::new(r, 0.5, 0.0, Sign::Plus).unwrap();
            let got = xsb_norm(&u, &p).unwrap();
            let want = sobolev_hat_norm(&u0, r, 0.5).unwrap() * c_psi;
            assert!((got - want).abs() / want < 0.03, "r={r}: {got} vs {want}");
        }
    }

    /// `(∫|ψ̂(τ)|^{r'} dτ)^{1/r'}` by composite Simpson in t and τ.
    fn window_lr_norm_oracle(w: &WindowSpec, rp: f64) -> f64 {
        let nt = 4000;
        let a = w.support;
        let ht = 2.0 * a / nt as f64;
        let psi_hat = |tau: f64| {
            let mut acc = 0.0;
            for j in 0..=nt {
                let t = -a + j as f64 * ht;
                let c = if j == 0 || j == nt {
                    1.0
                } else if j % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                acc += c * w.value(t) * (tau * t).cos();
            }
            acc * ht / 3.0
        };
        let (tmax, ntau) = (40.0, 4000);
        let h = 2.0 * tmax / ntau as f64;
        let mut acc = 0.0;
        for j in 0..=ntau {
            let tau = -tmax + j as f64 * h;
            let c = if j == 0 || j == ntau {
                1.0
            } else if j % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += c * psi_hat(tau).abs().powf(rp);
        }
        (acc * h / 3.0).powf(1.0 / rp)
    }

    #[test]
    fn negative_modulation_exponent_is_dominated() {
        let g = small_grid();
        for seed in 0..3 {
            let u = random_st(g, seed);
            let spec = u.forward().unwrap();
            for r in [1.25, 2.0] {
                let s = 0.8;
                let jsu = spec.apply_spatial_multiplier(symbols::bessel(s)).unwrap();
                let bound = lr_xt_norm(&jsu, r).unwrap();
                for bp in [-0.7, -0.1, 0.0] {
                    for sign in [Sign::Plus, Sign::Minus] {
                        let p = NormParams::new(r, s, bp, sign).unwrap();
                        assert!(xsb_norm(&u, &p).unwrap() <= bound * (1.0 + 1e-12));
                    }
                }
            }
        }
    }

    #[test]
    fn z_norm_examples() {
        let g = small_grid();
        let p = NormParams::new(1.5, 1.0, 0.7, Sign::Minus).unwrap();
        let zero = SpacetimeField::zeros(g, Repr::Configuration);
        assert_eq!(z_norm(&zero, &zero, &p).unwrap(), 0.0);
        let u = random_st(g, 11);
        assert_eq!(z_norm(&u, &zero, &p).unwrap(), xsb_norm(&u, &p).unwrap());
        let other = SpacetimeField::zeros(
            SpacetimeGrid::new(SpatialGrid::new(6, 2.0).unwrap(), 10, 2.0).unwrap(),
            Repr::Configuration,
        );
        assert!(z_norm(&u, &other, &p).is_err());
    }

    #[test]
    fn restricted_norm_contract() {
        let g = small_grid();
        let u = random_st(g, 2);
        let p = NormParams::new(2.0, 0.5, 0.6, Sign::Plus).unwrap();
        let wide = WindowSpec::canonical(2.5).unwrap();
        assert!(restricted_norm(&u, 0.5, &wide, &p).is_err());
        let w = WindowSpec::canonical(2.0).unwrap();
        assert!(restricted_norm(&u, 1.5, &w, &p).is_err());
        let a = restricted_norm(&u, 1.0, &w, &p).unwrap();
        let b = restricted_norm(&u.scaled(C64::new(0.0, -3.0)), 1.0, &w, &p).unwrap();
        assert!((b - 3.0 * a).abs() < 1e-12 * b);

        // supported inside the core: windowing is the identity
        let inside = u.apply_time_weight(|t| if t.abs() <= 0.5 { 1.0 } else { 0.0 }).unwrap();
        let direct = xsb_norm(&inside, &p).unwrap();
        let restricted = restricted_norm(&inside, 1.0, &w, &p).unwrap();
        assert!((direct - restricted).abs() < 1e-12 * direct);
    }

    #[test]
    fn shrinking_delta_never_increases() {
        // Free-wave family, window family scaled with δ.
        let s = SpatialGrid::new(8, 4.0).unwrap();
        let g = SpacetimeGrid::new(s, 64, 4.0).unwrap();
        let u0 = Field::from_spectrum_fn(s, |xi| {
            C64::new((-(xi[0].powi(2) + xi[1].powi(2) + xi[2].powi(2)) / 2.0).exp(), 0.0)
        });
        let mut u = SpacetimeField::zeros(g, Repr::Mixed);
        for m in 0..g.m() {
            let t = g.time(m);
            for (i, v) in u.slice_mut(m).iter_mut().enumerate() {
                *v = u0.data()[i] * C64::from_polar(1.0, t * symbols::norm(s.freq_vec(i)));
            }
        }
        let p = NormParams::new(2.0, 1.0, 0.0, Sign::Plus).unwrap();
        let mut prev = f64::INFINITY;
        for delta in [1.8, 1.4, 1.0, 0.6] {
            let w = WindowSpec::canonical(2.0 * delta).unwrap();
            let v = restricted_norm(&u, delta, &w, &p).unwrap();
            assert!(v <= prev * (1.0 + 1e-3), "δ={delta}: {v} > {prev}");
            prev = v;
        }
    }

    #[test]
    fn embedding_constant_is_stable() {
        // sup_t ‖u(t)‖_{Ĥ^r_s} ≤ C ‖u‖_{X^r_{s,b}} for b > 1/r on randomised
        // windowed waves; the fitted C stays within ±20% across the family.
        let s = SpatialGrid::new(8, 4.0).unwrap();
        let g = SpacetimeGrid::new(s, 32, 4.0).unwrap();
        let w = WindowSpec::canonical(3.5).unwrap();
        for r in [1.5, 2.0] {
            let b = 1.0 / r + 0.1;
            let p = NormParams::new(r, 0.5, b, Sign::Plus).unwrap();
            let mut ratios = Vec::new();
            for seed in 0..6 {
                let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
                let u0: Vec<C64> = (0..s.len())
                    .map(|i| {
                        let xi = s.freq_vec(i);
                        let env = (-(xi[0].powi(2) + xi[1].powi(2) + xi[2].powi(2)) / 4.0).exp();
                        env * C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                    })
                    .collect();
                let eps: f64 = rng.gen_range(0.0..0.2);
                let mut u = SpacetimeField::zeros(g, Repr::Mixed);
                for m in 0..g.m() {
                    let t = g.time(m);
                    let psi = w.value(t);
                    for (i, v) in u.slice_mut(m).iter_mut().enumerate() {
                        let xi = s.freq_vec(i);
                        let phase = t * symbols::norm(xi) + eps * (0.7 * t).sin();
                        *v = u0[i] * C64::from_polar(psi, phase);
                    }
                }
                let sup = sup_time_norm(&u, r, 0.5, g.half_time()).unwrap();
                ratios.push(sup / xsb_norm(&u, &p).unwrap());
            }
            let c = ratios.iter().cloned().fold(0.0, f64::max);
            for q in &ratios {
                assert!(*q <= c && *q >= 0.8 * c, "r={r}: ratios {ratios:?}");
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn norms_are_homogeneous_and_subadditive(
            seed in 0u64..1000,
            re in -3.0f64..3.0,
            im in -3.0f64..3.0,
            r in 1.05f64..2.0,
            s in -1.0f64..2.0,
            b in -0.5f64..1.0,
        ) {
            let g = small_grid();
            let u = random_st(g, seed);
            let v = random_st(g, seed + 7919);
            let alpha = C64::new(re, im);
            let p = NormParams::new(r, s, b, Sign::Plus).unwrap();
            let nu = xsb_norm(&u, &p).unwrap();
            let nau = xsb_norm(&u.scaled(alpha), &p).unwrap();
            prop_assert!((nau - alpha.norm() * nu).abs() <= 1e-12 * nau.max(1e-300));
            let sum = u.combine(C64::new(1.0, 0.0), &v, C64::new(1.0, 0.0)).unwrap();
            let nv = xsb_norm(&v, &p).unwrap();
            prop_assert!(xsb_norm(&sum, &p).unwrap() <= nu + nv + 1e-10);

            let f = forward_transform(&u.slice_field(0).unwrap()).unwrap();
            let nf = sobolev_hat_norm(&f, r, s).unwrap();
            let naf = sobolev_hat_norm(&f.scaled(alpha), r, s).unwrap();
            prop_assert!((naf - alpha.norm() * nf).abs() <= 1e-12 * naf.max(1e-300));
        }
    }
}
