//! Ratio sweeps for the individual bilinear estimates.

use std::cell::RefCell;

use serde::Serialize;

use super::{Criterion, EstimateReport, Sample, VerifyParams};
use crate::bilinear::{
    bilinear_symbol_products, calibrate, embed_spectrum, product_transform_direct, surface_mass, SignPair,
    SurfaceOptions, DEFAULT_C1,
};
use crate::dyadic::RegionMasks;
use crate::grid::{symbols, Repr, SpacetimeField, SpacetimeGrid, SpatialGrid, Spectrum, C64};
use crate::par;
use crate::propagator::{free_spacetime, Flow};
use crate::quad::adaptive_gk_breaks;
use crate::spaces::{check_lebesgue, sobolev_hat_norm, weighted_lr_norm, xsb_norm, NormParams, Sign, WindowSpec};
use crate::{Error, Result};

/// Spread allowed for "bounded" ratio ladders.
pub const BOUNDED_SPREAD: f64 = 3.0;
/// Minimum fitted slope and `R²` counted as growth.
pub const GROWTH_SLOPE: f64 = 0.25;
pub const GROWTH_R2: f64 = 0.9;

struct Pair {
    u0: Spectrum,
    v0: Spectrum,
    grid: SpacetimeGrid,
    window: WindowSpec,
}

fn pair_at(p: &VerifyParams, lambda: f64) -> Result<Pair> {
    let grid = p.lattice.grid_for(lambda)?;
    let radius = p.family.extent().max(p.partner_family().extent()) * lambda;
    p.lattice.check_headroom(&grid, radius)?;
    Ok(Pair {
        u0: p.family.spectrum(grid.spatial(), lambda)?,
        v0: p.partner_family().spectrum(grid.spatial(), lambda)?,
        window: p.lattice.window_for(&grid)?,
        grid,
    })
}

fn sweep<F>(xs: &[f64], f: F) -> Result<Vec<Sample>>
where
    F: Fn(f64) -> Result<Sample> + Sync + Send,
{
    if xs.is_empty() {
        return Err(Error::Parameter("empty sweep".into()));
    }
    par::map(xs, |x| f(*x)).into_iter().collect()
}

/// `J^s`.
fn j(s: f64) -> impl Fn([f64; 3], f64) -> f64 {
    move |xi, _| symbols::japanese(xi).powf(s)
}

/// `J^{s-1}∂_t`.
fn j_dt(s: f64) -> impl Fn([f64; 3], f64) -> f64 {
    move |xi, tau| symbols::japanese(xi).powf(s - 1.0) * tau.abs()
}

/// `J^{s-1}∂_x`, with `∂_x` the gradient magnitude `|ξ|`.
fn j_dx(s: f64) -> impl Fn([f64; 3], f64) -> f64 {
    move |xi, _| symbols::japanese(xi).powf(s - 1.0) * symbols::norm(xi)
}

fn data_norms(u0: &Spectrum, v0: &Spectrum, r: f64, s1: f64, s2: f64) -> Result<f64> {
    Ok(sobolev_hat_norm(u0, r, s1)? * sobolev_hat_norm(v0, r, s2)?)
}

fn elliptic_sample(p: &VerifyParams, lambda: f64) -> Result<Sample> {
    let d = pair_at(p, lambda)?;
    let f = product_transform_direct(&d.u0, &d.v0, SignPair::PLUS_PLUS, &d.grid, &d.window)?;
    let lhs = weighted_lr_norm(&f, p.r, j(p.sigma))? + weighted_lr_norm(&f, p.r, j_dt(p.sigma))?;
    Ok(Sample::new(
        lambda,
        lhs,
        data_norms(&d.u0, &d.v0, p.r, p.sigma, p.sigma)?,
    ))
}

/// `‖J^σ(u₊v₊)‖ + ‖J^{σ-1}∂_t(u₊v₊)‖` against `‖u₀‖_{Ĥ^r_σ}‖v₀‖_{Ĥ^r_σ}`.
pub fn check_elliptic_lemma(p: &VerifyParams) -> Result<EstimateReport> {
    check_lebesgue(p.r)?;
    p.require_above_threshold()?;
    let samples = sweep(&p.lambdas, |l| elliptic_sample(p, l))?;
    EstimateReport::summarize(
        format!("elliptic r={} sigma={}", p.r, p.sigma),
        "lambda",
        samples,
        Criterion::Bounded {
            max_spread: BOUNDED_SPREAD,
        },
    )
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HyperbolicReports {
    /// Near region `|ξ₁| + |ξ₂| ≤ c₁|ξ|`.
    pub p: EstimateReport,
    /// Far region.
    pub q: EstimateReport,
    /// Largest `max|P + Q - full| / max|full|` over the ladder.
    pub partition_defect: f64,
}

/// Splits `u₊v₋` with the near/far masks. The near part is measured with
/// `J^σ` and `J^{σ-1}∂_t`, the far part with `J^{σ-1}∂_x` and `J^{σ-1}∂_t`.
pub fn check_hyperbolic_lemmas(p: &VerifyParams) -> Result<HyperbolicReports> {
    check_lebesgue(p.r)?;
    p.require_above_threshold()?;
    let masks = RegionMasks::default();
    let near = |a: [f64; 3], b: [f64; 3]| masks.p(a, b);
    let far = |a: [f64; 3], b: [f64; 3]| masks.q(a, b);
    let rows = par::map(&p.lambdas, |&lambda| -> Result<(Sample, Sample, f64)> {
        let d = pair_at(p, lambda)?;
        let sp = SignPair::PLUS_MINUS;
        let parts = bilinear_symbol_products(&d.u0, &d.v0, sp, &[&near, &far], &d.grid, &d.window)?;
        let full = product_transform_direct(&d.u0, &d.v0, sp, &d.grid, &d.window)?;
        let (fp, fq) = (&parts[0], &parts[1]);
        let scale = full.max_abs();
        let defect = fp
            .data()
            .iter()
            .zip(fq.data())
            .zip(full.data())
            .map(|((a, b), c)| (a + b - c).norm())
            .fold(0.0, f64::max);
        let rhs = data_norms(&d.u0, &d.v0, p.r, p.sigma, p.sigma)?;
        let lp = weighted_lr_norm(fp, p.r, j(p.sigma))? + weighted_lr_norm(fp, p.r, j_dt(p.sigma))?;
        let lq = weighted_lr_norm(fq, p.r, j_dx(p.sigma))? + weighted_lr_norm(fq, p.r, j_dt(p.sigma))?;
        let rel = if scale > 0.0 { defect / scale } else { defect };
        Ok((Sample::new(lambda, lp, rhs), Sample::new(lambda, lq, rhs), rel))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let partition_defect = rows.iter().map(|r| r.2).fold(0.0, f64::max);
    let (sp, sq): (Vec<Sample>, Vec<Sample>) = rows.into_iter().map(|r| (r.0, r.1)).unzip();
    let bounded = Criterion::Bounded {
        max_spread: BOUNDED_SPREAD,
    };
    Ok(HyperbolicReports {
        p: EstimateReport::summarize(
            format!("hyperbolic-near r={} sigma={}", p.r, p.sigma),
            "lambda",
            sp,
            bounded,
        )?,
        q: EstimateReport::summarize(
            format!("hyperbolic-far r={} sigma={}", p.r, p.sigma),
            "lambda",
            sq,
            bounded,
        )?,
        partition_defect,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KeyReports {
    /// Free waves against data norms; ratios must stay bounded.
    pub free: EstimateReport,
    /// Windowed waves against their `X^{r,±}_{σ,b}` norms on a separate
    /// ladder; the fitted slope must not exceed `0.1`.
    pub full: Option<EstimateReport>,
}

/// Windowed free half-wave `ψ(t)e^{±itD}u₀` on `grid`.
fn windowed_wave(u0: &Spectrum, sign: Sign, grid: &SpacetimeGrid, w: &WindowSpec) -> Result<SpacetimeField> {
    let u0 = embed_spectrum(u0, grid.spatial())?;
    free_spacetime(&u0, grid, &Flow::half_wave(sign).at(0.0))?.apply_time_weight(|t| w.value(t))
}

fn key_lhs(p: &VerifyParams, f: &SpacetimeField) -> Result<f64> {
    Ok(weighted_lr_norm(f, p.r, j_dx(p.sigma))? + weighted_lr_norm(f, p.r, j_dt(p.sigma))?)
}

/// Free-wave key-estimate sample at one scale.
pub(super) fn free_key_sample(p: &VerifyParams, lambda: f64) -> Result<Sample> {
    let d = pair_at(p, lambda)?;
    let f = product_transform_direct(&d.u0, &d.v0, p.signs, &d.grid, &d.window)?;
    Ok(Sample::new(
        lambda,
        key_lhs(p, &f)?,
        data_norms(&d.u0, &d.v0, p.r, p.sigma, p.sigma)?,
    ))
}

fn full_key_sample(p: &VerifyParams, lambda: f64) -> Result<Sample> {
    let d = pair_at(p, lambda)?;
    let s = p.signs;
    let gp = d.grid.padded();
    let prod = windowed_wave(&d.u0, s.u, &gp, &d.window)?
        .multiply(&windowed_wave(&d.v0, s.v, &gp, &d.window)?)?
        .forward()?;
    let nu = xsb_norm(
        &windowed_wave(&d.u0, s.u, &d.grid, &d.window)?,
        &NormParams::new(p.r, p.sigma, p.b, s.u)?,
    )?;
    let nv = xsb_norm(
        &windowed_wave(&d.v0, s.v, &d.grid, &d.window)?,
        &NormParams::new(p.r, p.sigma, p.b, s.v)?,
    )?;
    Ok(Sample::new(lambda, key_lhs(p, &prod)?, nu * nv))
}

/// `‖J^{σ-1}∂_x(u v)‖ + ‖J^{σ-1}∂_t(u v)‖` for the sign pair of `p`.
///
/// The free form uses free waves against data norms over `p.lambdas`. The
/// full form, run when `full_lambdas` is non-empty, uses windowed waves
/// against their restriction-space norms. Its window shrinks like `1/λ`, so
/// the ratio carries a window factor that only settles into the power law
/// `λ^{2/r-σ-2(b-1/r)}` once `λ` is well above the inverse window length.
pub fn check_key_estimate(p: &VerifyParams, full_lambdas: &[f64]) -> Result<KeyReports> {
    check_lebesgue(p.r)?;
    p.require_above_threshold()?;
    p.require_b()?;
    let tag = format!("r={} sigma={} b={} signs={}", p.r, p.sigma, p.b, p.signs.name());
    let free = EstimateReport::summarize(
        format!("key-free {tag}"),
        "lambda",
        sweep(&p.lambdas, |l| free_key_sample(p, l))?,
        Criterion::Bounded {
            max_spread: BOUNDED_SPREAD,
        },
    )?;
    let full = if full_lambdas.is_empty() {
        None
    } else {
        let mut rep = EstimateReport::summarize(
            format!("key-full {tag}"),
            "lambda",
            sweep(full_lambdas, |l| full_key_sample(p, l))?,
            Criterion::SlopeAtMost { max_slope: 0.1 },
        )?;
        rep.prediction = Some(p.threshold() - p.sigma - 2.0 * (p.b - 1.0 / p.r));
        Some(rep)
    };
    Ok(KeyReports { free, full })
}

/// Growth of the elliptic ratio with `λ`. Below the threshold the expected
/// exponent is `2/r - σ` and the report requires growth close to it; at or
/// above the threshold it requires a slope of at most `0.1`.
pub fn sharpness_probe(p: &VerifyParams) -> Result<EstimateReport> {
    check_lebesgue(p.r)?;
    if p.lambdas.len() < 3 {
        return Err(Error::Fit(format!(
            "sharpness needs at least 3 scales, got {}",
            p.lambdas.len()
        )));
    }
    let predicted = p.threshold() - p.sigma;
    let criterion = if predicted > 0.0 {
        Criterion::Growth {
            min_slope: (predicted - 0.1).max(GROWTH_SLOPE),
            min_r2: GROWTH_R2,
        }
    } else {
        Criterion::SlopeAtMost { max_slope: 0.1 }
    };
    let samples = sweep(&p.lambdas, |l| elliptic_sample(p, l))?;
    let mut report = EstimateReport::summarize(
        format!("sharpness r={} sigma={}", p.r, p.sigma),
        "lambda",
        samples,
        criterion,
    )?;
    report.prediction = Some(predicted);
    Ok(report)
}

/// `‖J^σ(u v)‖` against data norms for data supported in `|ξ| ≤ 1`, one
/// sample per seed of the family (the first scale of `p` is used).
pub fn check_lowfreq_young(p: &VerifyParams, seeds: &[u64]) -> Result<EstimateReport> {
    check_lebesgue(p.r)?;
    let lambda = *p
        .lambdas
        .first()
        .ok_or_else(|| Error::Parameter("no scale given".into()))?;
    let xs: Vec<f64> = seeds.iter().map(|s| *s as f64).collect();
    let samples = sweep(&xs, |x| {
        let seed = x as u64;
        let q = VerifyParams {
            family: p.family.with_seed(seed),
            partner: p.partner.map(|f| f.with_seed(seed.wrapping_add(1 << 32))),
            ..p.clone()
        };
        let d = pair_at(&q, lambda)?;
        for spec in [&d.u0, &d.v0] {
            let g = spec.grid();
            if let Some(k) = (0..g.len()).find(|&k| spec.data()[k].norm() > 0.0 && symbols::norm(g.freq_vec(k)) > 1.0) {
                return Err(Error::Parameter(format!(
                    "low-frequency data must be supported in |ξ| ≤ 1, found |ξ| = {}",
                    symbols::norm(g.freq_vec(k))
                )));
            }
        }
        let f = product_transform_direct(&d.u0, &d.v0, p.signs, &d.grid, &d.window)?;
        let lhs = weighted_lr_norm(&f, p.r, j(p.sigma))?;
        Ok(Sample::new(x, lhs, data_norms(&d.u0, &d.v0, p.r, p.sigma, p.sigma)?))
    })?;
    EstimateReport::summarize(
        format!("lowfreq r={} sigma={}", p.r, p.sigma),
        "seed",
        samples,
        Criterion::Bounded { max_spread: 2.0 },
    )
}

/// `‖u₊v₋‖_{L²}` against `‖J^{σ₁}u₀‖_{L²}‖J^{σ₂}v₀‖_{L²}`. For
/// `σ₁ + σ₂ > 1` the ratios must be bounded; otherwise the fitted slope must
/// match `1 - σ₁ - σ₂` within `0.1`.
pub fn check_strichartz_l2(sigma1: f64, sigma2: f64, p: &VerifyParams) -> Result<EstimateReport> {
    if !(sigma1 >= 0.0 && sigma2 >= 0.0) {
        return Err(Error::Parameter(format!(
            "Strichartz exponents must be nonnegative, got {sigma1}, {sigma2}"
        )));
    }
    let total = sigma1 + sigma2;
    let samples = sweep(&p.lambdas, |lambda| {
        let d = pair_at(p, lambda)?;
        let f = product_transform_direct(&d.u0, &d.v0, SignPair::PLUS_MINUS, &d.grid, &d.window)?;
        let lhs = weighted_lr_norm(&f, 2.0, |_, _| 1.0)?;
        Ok(Sample::new(lambda, lhs, data_norms(&d.u0, &d.v0, 2.0, sigma1, sigma2)?))
    })?;
    let predicted = 1.0 - total;
    let criterion = if total > 1.0 {
        Criterion::Bounded {
            max_spread: BOUNDED_SPREAD,
        }
    } else {
        Criterion::SlopeNear {
            target: predicted,
            tol: 0.1,
        }
    };
    let mut report = EstimateReport::summarize(
        format!("strichartz sigma1={sigma1} sigma2={sigma2}"),
        "lambda",
        samples,
        criterion,
    )?;
    report.prediction = Some(predicted);
    Ok(report)
}

/// Far-region weighted surface mass sweep.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QScalingParams {
    pub r: f64,
    pub s1: f64,
    pub s2: f64,
    /// `τ/|ξ|`, in `(-1, 1)`.
    pub a: f64,
    pub xi_norms: Vec<f64>,
    /// Shell half-thickness.
    pub h: f64,
    pub c1: f64,
}

impl QScalingParams {
    pub fn new(r: f64, s1: f64, s2: f64) -> Self {
        Self {
            r,
            s1,
            s2,
            a: 0.3,
            xi_norms: vec![1.0, 2.0, 4.0, 8.0, 16.0],
            h: 0.01,
            c1: DEFAULT_C1,
        }
    }
}

/// Measures `∫ dS/|∇P₋| ρ₁^{-s₁r} ρ₂^{-s₂r}` over the far hyperboloid sheet
/// `ρ₁ + ρ₂ > c₁|ξ|` at `τ = a|ξ|` for each `|ξ|` and fits the exponent,
/// expected `2 - (s₁+s₂)r`.
pub fn q_region_scaling(q: &QScalingParams) -> Result<EstimateReport> {
    let QScalingParams {
        r, s1, s2, a, c1, h, ..
    } = *q;
    let predicted = 2.0 - (s1 + s2) * r;
    if predicted >= -1.0 {
        return Err(Error::Divergent(format!(
            "far-region mass diverges unless (s1+s2)r > 3, got {}",
            (s1 + s2) * r
        )));
    }
    if !(a.abs() < 1.0) {
        return Err(Error::Parameter(format!("a = {a} must lie in (-1, 1)")));
    }
    let samples = sweep(&q.xi_norms, |d| {
        let f = |x: f64, y: f64| {
            if x + y > c1 * d {
                x.powf(-s1 * r) * y.powf(-s2 * r)
            } else {
                0.0
            }
        };
        let m = surface_mass(
            [0.0, 0.0, d],
            a * d,
            SignPair::PLUS_MINUS,
            f,
            &SurfaceOptions::with_thickness(h),
        )?;
        Ok(Sample::new(d, m.value(), 1.0))
    })?;
    let mut report = EstimateReport::summarize(
        format!("q-scaling r={r} s1={s1} s2={s2}"),
        "xi",
        samples,
        Criterion::SlopeNear {
            target: predicted,
            tol: 0.1,
        },
    )?;
    report.prediction = Some(predicted);
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossValidationRow {
    pub xi: [f64; 3],
    pub tau: f64,
    pub direct: f64,
    pub predicted: f64,
    pub rel_err: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossValidation {
    pub rows: Vec<CrossValidationRow>,
    /// Measured surface constant of the ellipsoids.
    pub c_cal: f64,
    pub max_rel_err: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Compares the lattice transform of `ψ·u₊v₊` for the radial Gaussian
/// `û₀ = v̂₀ = e^{-|ξ|²/2w²}` with the coarea prediction
/// `(2π)^{-3} ∫ S(τ') ψ̂(τ - τ') dτ'`, where `S` is the surface mass of
/// `û₀(ξ/2-η)v̂₀(ξ/2+η)` on the ellipsoid `P₊ = τ'` and `ψ̂` the discrete
/// transform of the window. Probes snap to the nearest lattice point.
pub fn surface_cross_validation(width: f64, probes: &[([f64; 3], f64)], tolerance: f64) -> Result<CrossValidation> {
    if !(width > 0.0) || probes.is_empty() {
        return Err(Error::Parameter("need a positive width and at least one probe".into()));
    }
    // Δξ = 0.4 resolves the data to 12 widths at w = 1; the window of
    // half-width 4 keeps the product away from the spatial box edge.
    let dxi = 0.4 * width;
    let n = 24;
    let half_len = std::f64::consts::PI / dxi;
    let support = 4.0 / width;
    let grid = SpacetimeGrid::new(SpatialGrid::new(n, half_len)?, 32, support)?;
    let window = WindowSpec::canonical(support)?;
    let g = |rho: f64| (-0.5 * (rho / width).powi(2)).exp();
    let u0 = Spectrum::from_spectrum_fn(*grid.spatial(), |xi| C64::new(g(symbols::norm(xi)), 0.0));
    let f = product_transform_direct(&u0, &u0, SignPair::PLUS_PLUS, &grid, &window)?;
    f.expect_repr(Repr::Frequency)?;
    let gp = *f.grid();
    let sp = gp.spatial();

    let psi_hat = |sigma: f64| -> f64 {
        (0..gp.m())
            .map(|m| {
                let t = gp.time(m);
                window.value(t) * (t * sigma).cos()
            })
            .sum::<f64>()
            * gp.dt()
    };
    let opts = SurfaceOptions::with_thickness(0.01 * width);
    let rows = par::map(probes, |&(xi, tau)| -> Result<CrossValidationRow> {
        let w = [0, 1, 2].map(|a| (xi[a] / sp.dxi()).round() as i64);
        let k = sp
            .index_of_wave_number(w)
            .ok_or_else(|| Error::Parameter(format!("probe {xi:?} is outside the lattice")))?;
        let m = ((tau / gp.dtau()).round() as i64 + (gp.m() / 2) as i64).clamp(0, gp.m() as i64 - 1) as usize;
        let (xi, tau) = (sp.freq_vec(k), gp.tau(m));
        let direct = f.data()[m * sp.len() + k];
        let d = symbols::norm(xi);
        let err = RefCell::new(None);
        let integrand = |tp: f64| match surface_mass(xi, tp, SignPair::PLUS_PLUS, |a, b| g(a) * g(b), &opts) {
            Ok(s) => s.value() * psi_hat(tau - tp),
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                0.0
            }
        };
        // the Gaussian factor is below 1e-20 once τ' exceeds |ξ| + 14w
        let breaks: Vec<f64> = (0..=14).map(|i| d + i as f64 * width).collect();
        let integral = adaptive_gk_breaks(integrand, &breaks, 1e-12, 1e-7, 400).value;
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        let predicted = integral / (2.0 * std::f64::consts::PI).powi(3);
        let rel_err = (direct - C64::new(predicted, 0.0)).norm() / predicted.abs();
        Ok(CrossValidationRow {
            xi,
            tau,
            direct: direct.norm(),
            predicted,
            rel_err,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let cal_probes: Vec<([f64; 3], f64)> = rows
        .iter()
        .map(|r| (r.xi, r.tau))
        .filter(|(x, t)| *t > symbols::norm(*x))
        .collect();
    let c_cal = if cal_probes.is_empty() {
        f64::NAN
    } else {
        calibrate(&cal_probes, &opts)?.c_cal
    };
    let max_rel_err = rows.iter().map(|r| r.rel_err).fold(0.0, f64::max);
    Ok(CrossValidation {
        rows,
        c_cal,
        max_rel_err,
        tolerance,
        passed: max_rel_err <= tolerance,
    })
}
