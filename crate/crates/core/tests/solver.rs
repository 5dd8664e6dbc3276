use std::f64::consts::PI;

use qwlab::grid::symbols;
use qwlab::propagator::{free_mixed, Flow};
use qwlab::solver::*;
use qwlab::spaces::{sobolev_hat_norm, sup_time_norm, Sign};
use qwlab::verify::DataFamily;
use qwlab::{Field, Repr, SpacetimeField, SpacetimeGrid, SpatialGrid, C64};

const ONE: C64 = C64::new(1.0, 0.0);

fn main_grid() -> SpatialGrid {
    SpatialGrid::new(32, 16.0).unwrap()
}

fn small_gaussian(grid: &SpatialGrid, amplitude: f64) -> CauchyData {
    let u0 = DataFamily::gaussian([0.0, 0.0, 0.0], 0.5).with_amplitude(amplitude);
    let u1 = DataFamily::gaussian([0.3, 0.0, 0.0], 0.4).with_amplitude(0.5 * amplitude);
    CauchyData::from_families(grid, &u0, Some(&u1), 2.0, 2.5).unwrap()
}

fn solve(data: &CauchyData, ns: &NonlinearitySpec, m: usize, delta: f64) -> SolveReport {
    let cfg = SolveConfig::new(*data.u0.grid(), m, delta, data.r, data.s).unwrap();
    let (fp, fm) = to_first_order(data).unwrap();
    solve_local(&fp, &fm, ns, &cfg).unwrap()
}

#[test]
fn zero_data_stay_zero() {
    let g = SpatialGrid::new(8, 4.0).unwrap();
    let z = Field::zeros(g, Repr::Frequency);
    let cfg = SolveConfig::new(g, 16, 0.25, 2.0, 1.5).unwrap();
    let rep = solve_local(&z, &z, &NonlinearitySpec::new(2, Derivative::T).unwrap(), &cfg).unwrap();
    assert_eq!(rep.status, PicardStatus::Converged);
    assert_eq!(rep.solution.u_plus.max_abs() + rep.solution.u_minus.max_abs(), 0.0);
    assert_eq!(rep.residual.unwrap().l2, 0.0);
}

/// `∂_{x1}(w²)` for a two-mode `w` against the product written out by hand.
#[test]
fn two_mode_product_matches_hand_convolution() {
    let g = SpatialGrid::new(12, PI).unwrap();
    let st = SpacetimeGrid::new(g, 4, 1.0).unwrap();
    let (k1, k2) = ([1.0, 0.0, 1.0], [-1.0, 1.0, 0.0]);
    let (a, b) = (C64::new(0.3, 0.1), C64::new(-0.2, 0.4));
    let plane = |k: [f64; 3], x: [f64; 3]| C64::from_polar(1.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
    let w = SpacetimeField::from_config_fn(st, |_, x| a * plane(k1, x) + b * plane(k2, x));
    let zero = SpacetimeField::zeros(st, Repr::Configuration);
    let ns = NonlinearitySpec::new(1, Derivative::X1).unwrap();
    let got = nonlinear_term(&w, &zero, &ns).unwrap().to_configuration().unwrap();
    let s = [k1[0] + k2[0], k1[1] + k2[1], k1[2] + k2[2]];
    let expect = |x: [f64; 3]| {
        let i = C64::new(0.0, 1.0);
        a * a * i * (2.0 * k1[0]) * plane([2.0 * k1[0], 2.0 * k1[1], 2.0 * k1[2]], x)
            + 2.0 * a * b * i * s[0] * plane(s, x)
            + b * b * i * (2.0 * k2[0]) * plane([2.0 * k2[0], 2.0 * k2[1], 2.0 * k2[2]], x)
    };
    let mut worst: f64 = 0.0;
    for m in 0..st.m() {
        for (i, v) in got.slice(m).iter().enumerate() {
            worst = worst.max((v - expect(g.point(i))).norm());
        }
    }
    assert!(worst < 1e-12, "{worst}");
}

#[test]
fn right_sides_are_antisymmetric() {
    let data = small_gaussian(&SpatialGrid::new(8, 4.0).unwrap(), 0.3);
    let cfg = SolveConfig::new(*data.u0.grid(), 8, 0.25, 2.0, 2.5).unwrap();
    let (fp, fm) = to_first_order(&data).unwrap();
    let up = free_mixed(&fp, &cfg.grid, &Flow::bessel(Sign::Plus).at(0.0)).unwrap();
    let um = free_mixed(&fm, &cfg.grid, &Flow::bessel(Sign::Minus).at(0.0)).unwrap();
    for (k, d) in [(1, Derivative::T), (2, Derivative::X3), (2, Derivative::T)] {
        let (gp, gm) = rhs_eval(&up, &um, &NonlinearitySpec::new(k, d).unwrap()).unwrap();
        assert!(gp.max_abs() > 0.0);
        assert_eq!(gp.combine(ONE, &gm, ONE).unwrap().max_abs(), 0.0);
    }
}

#[test]
fn free_components_conserve_the_data_norm() {
    let data = small_gaussian(&main_grid(), 1.0);
    let (fp, fm) = to_first_order(&data).unwrap();
    let st = SpacetimeGrid::new(main_grid(), 16, 1.0).unwrap();
    for (f, sign) in [(&fp, Sign::Plus), (&fm, Sign::Minus)] {
        let u = free_mixed(f, &st, &Flow::bessel(sign).at(0.0)).unwrap();
        let n0 = sobolev_hat_norm(f, 2.0, 2.5).unwrap();
        for m in 0..st.m() {
            let n = sobolev_hat_norm(&u.slice_field(m).unwrap(), 2.0, 2.5).unwrap();
            assert!((n - n0).abs() <= 1e-10 * n0);
        }
    }
}

/// Without the quadratic term the system is the free wave equation, whose
/// solution `cos(t|ξ|)u₀ + sin(t|ξ|)/|ξ|·u₁` is the oracle.
fn linear_error(m: usize) -> f64 {
    let g = SpatialGrid::new(16, 8.0).unwrap();
    let data = small_gaussian(&g, 1.0);
    let ns = NonlinearitySpec::new(1, Derivative::X1).unwrap().with_strength(0.0);
    let rep = solve(&data, &ns, m, 0.5);
    assert_eq!(rep.status, PicardStatus::Converged);
    let cfg = SolveConfig::new(g, m, 0.5, 2.0, 2.5).unwrap();
    let (u, _) = reconstruct(&rep.solution.u_plus, &rep.solution.u_minus).unwrap();
    let mut exact = SpacetimeField::zeros(cfg.grid, Repr::Mixed);
    for j in 0..cfg.grid.m() {
        let t = cfg.grid.time(j);
        for k in 0..g.len() {
            let d = symbols::norm(g.freq_vec(k));
            let sinc = if d == 0.0 { t } else { (t * d).sin() / d };
            exact.slice_mut(j)[k] = (t * d).cos() * data.u0.data()[k] + sinc * data.u1.data()[k];
        }
    }
    sup_time_norm(&u.combine(ONE, &exact, -ONE).unwrap(), 2.0, 2.5, 0.5).unwrap()
}

#[test]
fn linear_run_reproduces_the_free_wave_at_second_order() {
    let (e1, e2) = (linear_error(32), linear_error(64));
    assert!(e1 < 1e-3, "{e1}");
    assert!((e1 / e2 - 4.0).abs() < 0.5, "{e1} {e2}");
}

#[test]
fn small_data_contract_for_both_nonlinearities() {
    let data = small_gaussian(&main_grid(), 1e-2);
    for (k, d) in [(1, Derivative::X1), (2, Derivative::T)] {
        let rep = solve(&data, &NonlinearitySpec::new(k, d).unwrap(), 64, 0.25);
        assert_eq!(rep.status, PicardStatus::Converged, "{:?}", rep.steps);
        let rho = rep.solution.max_rho(1).unwrap();
        assert!(rho < 0.5, "k = {k}: {:?}", rep.steps);
        let res = rep.residual.as_ref().unwrap();
        assert!(res.relative.unwrap() < 1e-3, "{res:?}");
        let p = rep.persistence.as_ref().unwrap();
        assert!(p.max_jump < 0.05, "{p:?}");
        assert!(
            rep.reconstruction_defect.unwrap() < 1e-3,
            "{:?}",
            rep.reconstruction_defect
        );
        let x = rep.x_norms.unwrap();
        assert!(x.iter().all(|v| v.is_finite() && *v > 0.0));
        match rep.z_norms {
            Some(z) => {
                assert_eq!(k, 2);
                assert!(z.iter().zip(&x).all(|(z, x)| z.is_finite() && z >= x));
            }
            None => assert_eq!(k, 1),
        }
    }
}

#[test]
fn solution_does_not_depend_on_the_budget() {
    let g = SpatialGrid::new(16, 8.0).unwrap();
    let data = small_gaussian(&g, 0.05);
    let (fp, fm) = to_first_order(&data).unwrap();
    let ns = NonlinearitySpec::new(1, Derivative::X2).unwrap();
    let cfg = SolveConfig::new(g, 32, 0.25, 2.0, 2.5).unwrap().with_budget(40, 1e-8);
    let a = picard_iterate(&fp, &fm, &ns, &cfg).unwrap();
    let b = picard_iterate(&fp, &fm, &ns, &cfg.clone().with_budget(80, 1e-13)).unwrap();
    assert!(b.iterations() > a.iterations());
    let size = sup_time_norm(&a.u_plus, 2.0, 2.5, 0.25).unwrap();
    let d = sup_time_norm(&a.u_plus.combine(ONE, &b.u_plus, -ONE).unwrap(), 2.0, 2.5, 0.25).unwrap();
    assert!(d <= 1e-8 * size, "{d} vs {size}");
}

#[test]
fn large_data_are_reported_as_divergent() {
    let g = SpatialGrid::new(16, 8.0).unwrap();
    let data = small_gaussian(&g, 2e4);
    let rep = solve(&data, &NonlinearitySpec::new(2, Derivative::X1).unwrap(), 64, 1.0);
    assert_eq!(rep.status, PicardStatus::Diverged, "{:?}", rep.steps);
    assert!(rep.residual.is_none());
}

#[test]
fn manufactured_residual_is_second_order() {
    let cfg = SolveConfig::new(main_grid(), 64, 0.25, 2.0, 2.5).unwrap();
    for (k, d) in [(1, Derivative::X1), (2, Derivative::T)] {
        let st = manufactured_study(&NonlinearitySpec::new(k, d).unwrap(), &cfg, 0.05, &[64, 128], 3.0).unwrap();
        assert!(st.passed, "{st:?}");
        assert!(st.ratios[0] < 5.0, "{st:?}");
        assert!(st.rows[1].error < st.rows[0].error);
    }
}

#[test]
fn lipschitz_ratio_is_stable_and_identical_pairs_are_skipped() {
    let g = SpatialGrid::new(16, 8.0).unwrap();
    let cfg = SolveConfig::new(g, 32, 0.25, 2.0, 2.5).unwrap();
    let ns = NonlinearitySpec::new(1, Derivative::X1).unwrap();
    let st = lipschitz_study(&ns, &cfg, 8, 0.05, 1.5, 1e-3, 7).unwrap();
    assert!(st.passed, "{st:?}");
    assert_eq!(st.coarse.rows.len(), 8);
    let pair = random_pairs(&g, 1, 0.05, 1.5, 0.0, 2.0, 2.5, 1).unwrap();
    let rep = flow_lipschitz_probe(&pair, &ns, &cfg).unwrap();
    assert!(rep.rows[0].ratio.is_none() && !rep.rows[0].flagged);
}

#[test]
fn delta_shrinks_as_data_grow() {
    let g = SpatialGrid::new(16, 8.0).unwrap();
    let data = small_gaussian(&g, 0.5);
    let cfg = SolveConfig::new(g, 32, 0.25, 2.0, 2.5).unwrap();
    let ns = NonlinearitySpec::new(1, Derivative::X1).unwrap();
    let (rows, monotone) = delta_table(&data, &[1.0, 2.0, 4.0, 8.0], &ns, &cfg, 0.5).unwrap();
    assert!(monotone, "{rows:?}");
    assert!(rows.last().unwrap().choice.delta < rows[0].choice.delta, "{rows:?}");
}
