//! Free evolutions and the Duhamel integral.
//!
//! A [`Flow`] with phase `μ(ξ)` acts by `e^{itμ(ξ)}` on the spectrum:
//! half-wave flows use `μ = ±|ξ|`, Bessel flows `μ = ∓⟨ξ⟩`. The Duhamel
//! integral `w = -i∫₀ᵗ E(t-s) g(s) ds` of a flow solves `i∂_t w + μ w = g`
//! with `w(0) = 0`; for the Bessel flow this is `(i∂_t ∓ J)w = g`.

use crate::grid::{symbols, Field, Repr, SpacetimeField, SpacetimeGrid, Spectrum, C64};
use crate::par;
use crate::spaces::Sign;
use crate::{Error, Result};

/// Generator of the free flow.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvolutionKind {
    /// `D = |∇|`, flow `e^{±itD}`.
    HalfWave,
    /// `J = ⟨∇⟩`, flow `e^{∓itJ}`.
    Bessel,
}

/// A free flow without a time argument.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Flow {
    pub kind: EvolutionKind,
    pub sign: Sign,
}

impl Flow {
    pub fn new(kind: EvolutionKind, sign: Sign) -> Self {
        Self { kind, sign }
    }

    pub fn half_wave(sign: Sign) -> Self {
        Self::new(EvolutionKind::HalfWave, sign)
    }

    pub fn bessel(sign: Sign) -> Self {
        Self::new(EvolutionKind::Bessel, sign)
    }

    /// Phase rate `μ(ξ)`, so that the flow multiplier is `e^{itμ}`.
    pub fn phase_rate(&self, xi: [f64; 3]) -> f64 {
        match self.kind {
            EvolutionKind::HalfWave => self.sign.value() * symbols::norm(xi),
            EvolutionKind::Bessel => -self.sign.value() * symbols::japanese(xi),
        }
    }

    pub fn multiplier(&self, xi: [f64; 3], t: f64) -> C64 {
        C64::from_polar(1.0, t * self.phase_rate(xi))
    }

    pub fn at(self, t: f64) -> EvolutionSpec {
        EvolutionSpec { flow: self, t }
    }
}

/// A flow evaluated at time `t`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolutionSpec {
    pub flow: Flow,
    pub t: f64,
}

impl EvolutionSpec {
    pub fn new(kind: EvolutionKind, sign: Sign, t: f64) -> Self {
        Flow::new(kind, sign).at(t)
    }
}

/// Applies the flow multiplier to a spectrum.
pub fn evolve(spec: &Spectrum, e: &EvolutionSpec) -> Result<Spectrum> {
    spec.expect_repr(Repr::Frequency)?;
    let grid = *spec.grid();
    let data = spec
        .data()
        .iter()
        .enumerate()
        .map(|(k, v)| v * e.flow.multiplier(grid.freq_vec(k), e.t))
        .collect();
    Spectrum::from_parts(grid, Repr::Frequency, data)
}

/// Free solution `u(t_m) = E(t_m + e.t)u₀` in mixed `(t, ξ)` representation.
pub fn free_mixed(u0: &Spectrum, g: &SpacetimeGrid, e: &EvolutionSpec) -> Result<SpacetimeField> {
    u0.expect_repr(Repr::Frequency)?;
    if !u0.grid().same_as(g.spatial()) {
        return Err(Error::GridMismatch(
            "initial datum is not on the spatial grid of the space-time lattice".into(),
        ));
    }
    let slices = par::map_range(g.m(), |m| evolve(u0, &e.flow.at(g.time(m) + e.t)).map(Field::into_data));
    let mut data = Vec::with_capacity(g.len());
    for s in slices {
        data.extend(s?);
    }
    SpacetimeField::from_parts(*g, Repr::Mixed, data)
}

/// Free solution in configuration representation. `e.t` shifts the initial time.
pub fn free_spacetime(u0: &Spectrum, g: &SpacetimeGrid, e: &EvolutionSpec) -> Result<SpacetimeField> {
    free_mixed(u0, g, e)?.spatial_inverse()
}

/// Duhamel integral of the Bessel flow of the given sign; solves
/// `(i∂_t ∓ J)w = g`, `w(0) = 0`. Output has the representation of `gf`.
pub fn duhamel(gf: &SpacetimeField, sign: Sign) -> Result<SpacetimeField> {
    duhamel_flow(gf, Flow::bessel(sign))
}

/// Duhamel integral for an arbitrary flow, by the exponential trapezoidal
/// rule swept forward and backward from the time origin.
pub fn duhamel_flow(gf: &SpacetimeField, flow: Flow) -> Result<SpacetimeField> {
    let repr = gf.repr();
    let mixed = gf.to_mixed()?;
    let g = *gf.grid();
    let sg = g.spatial();
    let nsp = sg.len();
    let dt = g.dt();
    let step_fwd: Vec<C64> = (0..nsp).map(|k| flow.multiplier(sg.freq_vec(k), dt)).collect();
    let step_bwd: Vec<C64> = step_fwd.iter().map(|z| z.conj()).collect();

    let src = mixed.data();
    let mut out = vec![C64::new(0.0, 0.0); g.len()];
    let origin = g.origin();
    let sweep = |out: &mut [C64], from: usize, to: usize, step: &[C64], h: f64| {
        let coef = C64::new(0.0, -0.5 * h);
        for k in 0..nsp {
            let (w, gi, gj) = (out[from * nsp + k], src[from * nsp + k], src[to * nsp + k]);
            out[to * nsp + k] = step[k] * w + coef * (step[k] * gi + gj);
        }
    };
    for m in origin..g.m() - 1 {
        sweep(&mut out, m, m + 1, &step_fwd, dt);
    }
    for m in (1..=origin).rev() {
        sweep(&mut out, m, m - 1, &step_bwd, -dt);
    }
    let w = SpacetimeField::from_parts(g, Repr::Mixed, out)?;
    match repr {
        Repr::Mixed => Ok(w),
        Repr::Configuration => w.to_configuration(),
        Repr::Frequency => w.to_frequency(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{forward_transform, SpatialGrid};
    use crate::quad::gauss_legendre_integrate;
    use std::f64::consts::PI;

    fn gaussian_spectrum(grid: &SpatialGrid) -> Spectrum {
        Spectrum::from_spectrum_fn(*grid, |xi| {
            let r2 = xi.iter().map(|v| v * v).sum::<f64>();
            C64::new((2.0 * PI).powf(1.5) * (-0.5 * r2).exp(), 0.0)
        })
    }

    #[test]
    fn identity_group_and_unitarity() {
        let grid = SpatialGrid::new(8, 4.0).unwrap();
        let f = gaussian_spectrum(&grid);
        for kind in [EvolutionKind::HalfWave, EvolutionKind::Bessel] {
            for sign in [Sign::Plus, Sign::Minus] {
                let fl = Flow::new(kind, sign);
                let id = evolve(&f, &fl.at(0.0)).unwrap();
                assert_eq!(id.data(), f.data());
                let two = evolve(&evolve(&f, &fl.at(0.7)).unwrap(), &fl.at(-1.9)).unwrap();
                let one = evolve(&f, &fl.at(-1.2)).unwrap();
                for (a, b) in two.data().iter().zip(one.data()) {
                    assert!((a - b).norm() < 1e-12);
                }
                for (a, b) in one.data().iter().zip(f.data()) {
                    assert!((a.norm() - b.norm()).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn single_mode_phase() {
        let grid = SpatialGrid::new(8, PI).unwrap();
        let k = grid.index_of_wave_number([1, 2, 0]).unwrap();
        let mut f = Spectrum::zeros(grid, Repr::Frequency);
        f.data_mut()[k] = C64::new(1.0, 0.0);
        let out = evolve(&f, &EvolutionSpec::new(EvolutionKind::HalfWave, Sign::Plus, 0.4)).unwrap();
        let expect = C64::from_polar(1.0, 0.4 * 5f64.sqrt());
        assert!((out.data()[k] - expect).norm() < 1e-15);
        let out = evolve(&f, &EvolutionSpec::new(EvolutionKind::Bessel, Sign::Plus, 0.4)).unwrap();
        let expect = C64::from_polar(1.0, -0.4 * 6f64.sqrt());
        assert!((out.data()[k] - expect).norm() < 1e-15);
    }

    #[test]
    fn wrong_representation_is_rejected() {
        let grid = SpatialGrid::new(4, 1.0).unwrap();
        let f = Field::zeros(grid, Repr::Configuration);
        assert!(evolve(&f, &EvolutionSpec::new(EvolutionKind::HalfWave, Sign::Plus, 1.0)).is_err());
    }

    #[test]
    fn radial_gaussian_half_wave_matches_radial_integral() {
        let grid = SpatialGrid::new(64, 12.0).unwrap();
        let st = SpacetimeGrid::new(grid, 4, 2.0).unwrap();
        let u0 = gaussian_spectrum(&grid);
        let u = free_spacetime(&u0, &st, &EvolutionSpec::new(EvolutionKind::HalfWave, Sign::Plus, 0.0)).unwrap();
        // time index 3 is t = 1
        assert!((st.time(3) - 1.0).abs() < 1e-15);
        let slice = u.slice(3);
        let t = 1.0;
        let oracle = |r: f64| -> C64 {
            let pref = 4.0 * PI / (2.0 * PI).powf(1.5);
            let kernel = |rho: f64, part: usize| {
                let sinc = if r * rho < 1e-12 {
                    1.0
                } else {
                    (rho * r).sin() / (rho * r)
                };
                let ph = t * rho;
                rho * rho * (-0.5 * rho * rho).exp() * sinc * if part == 0 { ph.cos() } else { ph.sin() }
            };
            let re = gauss_legendre_integrate(|p| kernel(p, 0), 0.0, 14.0, 400);
            let im = gauss_legendre_integrate(|p| kernel(p, 1), 0.0, 14.0, 400);
            C64::new(re, im) * pref
        };
        let mut worst = 0.0f64;
        for idx in [
            [32, 32, 32],
            [33, 32, 32],
            [36, 33, 31],
            [40, 32, 32],
            [30, 28, 35],
            [44, 40, 32],
        ] {
            let x = grid.point(grid.flat(idx));
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            worst = worst.max((slice[grid.flat(idx)] - oracle(r)).norm());
        }
        assert!(worst < 1e-4, "worst deviation {worst}");
    }

    #[test]
    fn free_solution_conserves_spectrum_and_vanishes_for_zero_data() {
        let grid = SpatialGrid::new(8, 4.0).unwrap();
        let st = SpacetimeGrid::new(grid, 8, 1.0).unwrap();
        let e = EvolutionSpec::new(EvolutionKind::Bessel, Sign::Minus, 0.0);
        let zero = free_spacetime(&Spectrum::zeros(grid, Repr::Frequency), &st, &e).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
        let u0 = gaussian_spectrum(&grid);
        let u = free_mixed(&u0, &st, &e).unwrap();
        for m in 0..8 {
            for (a, b) in u.slice(m).iter().zip(u0.data()) {
                assert!((a.norm() - b.norm()).abs() < 1e-12);
            }
        }
        let back = free_spacetime(&u0, &st, &e).unwrap();
        let at0 = forward_transform(&back.slice_field(st.origin()).unwrap()).unwrap();
        for (a, b) in at0.data().iter().zip(u0.data()) {
            assert!((a - b).norm() < 1e-9);
        }
    }

    fn unit_mode_grid(m: usize) -> (SpacetimeGrid, usize) {
        let grid = SpatialGrid::new(4, PI).unwrap();
        let k = grid.index_of_wave_number([1, 0, 1]).unwrap();
        (SpacetimeGrid::new(grid, m, 2.0).unwrap(), k)
    }

    #[test]
    fn resonant_forcing_is_integrated_exactly() {
        let (st, k) = unit_mode_grid(32);
        let lam = 3f64.sqrt();
        for sign in [Sign::Plus, Sign::Minus] {
            let mu = -sign.value() * lam;
            let mut g = SpacetimeField::zeros(st, Repr::Mixed);
            for m in 0..st.m() {
                g.slice_mut(m)[k] = C64::from_polar(1.0, mu * st.time(m));
            }
            let w = duhamel(&g, sign).unwrap();
            for m in 0..st.m() {
                let t = st.time(m);
                let expect = C64::new(0.0, -t) * C64::from_polar(1.0, mu * t);
                assert!((w.slice(m)[k] - expect).norm() < 1e-12);
            }
            assert_eq!(w.slice(st.origin())[k], C64::new(0.0, 0.0));
        }
    }

    fn nonresonant_error(m: usize) -> f64 {
        let (st, k) = unit_mode_grid(m);
        let lam = 3f64.sqrt();
        let omega = 2.3;
        let mut g = SpacetimeField::zeros(st, Repr::Mixed);
        for i in 0..st.m() {
            g.slice_mut(i)[k] = C64::from_polar(1.0, omega * st.time(i));
        }
        let w = duhamel(&g, Sign::Plus).unwrap();
        // (i∂_t - λ)w = e^{iωt}, w(0) = 0
        let exact =
            |t: f64| C64::from_polar(1.0, -lam * t) * (C64::from_polar(1.0, (lam + omega) * t) - 1.0) / -(lam + omega);
        (0..st.m())
            .map(|i| (w.slice(i)[k] - exact(st.time(i))).norm())
            .fold(0.0, f64::max)
    }

    #[test]
    fn duhamel_is_second_order() {
        let e1 = nonresonant_error(32);
        let e2 = nonresonant_error(64);
        let e3 = nonresonant_error(128);
        for ratio in [e1 / e2, e2 / e3] {
            assert!((ratio - 4.0).abs() < 0.4, "ratios {} {}", e1 / e2, e2 / e3);
        }
    }

    fn variation_of_constants_residual(m: usize) -> f64 {
        let grid = SpatialGrid::new(8, 4.0).unwrap();
        let st = SpacetimeGrid::new(grid, m, 1.0).unwrap();
        let u0 = gaussian_spectrum(&grid);
        let g = SpacetimeField::from_config_fn(st, |t, x| {
            C64::new((-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp() * t.cos(), 0.0)
        });
        let flow = Flow::bessel(Sign::Plus);
        let one = C64::new(1.0, 0.0);
        let u = free_mixed(&u0, &st, &flow.at(0.0))
            .unwrap()
            .combine(one, &duhamel(&g, Sign::Plus).unwrap().to_mixed().unwrap(), one)
            .unwrap();
        let gm = g.to_mixed().unwrap();
        let sg = st.spatial();
        let dt = st.dt();
        let mut worst = 0.0f64;
        // residual of (i∂_t - J)u = g on |t| ≤ 1/2
        for i in 0..st.m() {
            if st.time(i).abs() > 0.5 + 1e-12 {
                continue;
            }
            for k in 0..sg.len() {
                let du = (u.slice(i + 1)[k] - u.slice(i - 1)[k]) / (2.0 * dt);
                let res = C64::new(0.0, 1.0) * du + flow.phase_rate(sg.freq_vec(k)) * u.slice(i)[k] - gm.slice(i)[k];
                worst = worst.max(res.norm());
            }
        }
        worst
    }

    #[test]
    fn variation_of_constants_residual_is_second_order() {
        let (r1, r2, r3) = (
            variation_of_constants_residual(32),
            variation_of_constants_residual(64),
            variation_of_constants_residual(128),
        );
        assert!(
            (r1 / r2 - 4.0).abs() < 0.5 && (r2 / r3 - 4.0).abs() < 0.5,
            "{r1} {r2} {r3}"
        );
    }

    #[test]
    fn duhamel_linear_and_zero_for_zero_forcing() {
        let (st, _) = unit_mode_grid(16);
        let z = duhamel(&SpacetimeField::zeros(st, Repr::Configuration), Sign::Minus).unwrap();
        assert_eq!(z.max_abs(), 0.0);
        assert_eq!(z.repr(), Repr::Configuration);
        let a = SpacetimeField::from_config_fn(st, |t, x| C64::new(x[0].sin() * t, x[2].cos()));
        let b = SpacetimeField::from_config_fn(st, |t, x| C64::new((t * x[1]).cos(), 0.0));
        let lhs = duhamel(
            &a.combine(C64::new(2.0, 0.0), &b, C64::new(0.0, -1.5)).unwrap(),
            Sign::Minus,
        )
        .unwrap();
        let rhs = duhamel(&a, Sign::Minus)
            .unwrap()
            .combine(
                C64::new(2.0, 0.0),
                &duhamel(&b, Sign::Minus).unwrap(),
                C64::new(0.0, -1.5),
            )
            .unwrap();
        assert!(
            lhs.combine(C64::new(1.0, 0.0), &rhs, C64::new(-1.0, 0.0))
                .unwrap()
                .max_abs()
                < 1e-12
        );
    }
}
