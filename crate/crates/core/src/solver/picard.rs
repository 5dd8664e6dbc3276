use serde::Serialize;

use super::{
    diagnostic_sign, nonlinear_term, reconstruct, rhs_eval_forced, time_derivative, NonlinearitySpec, SolveConfig,
};
use crate::grid::{symbols, Repr, SpacetimeField, Spectrum, C64};
use crate::propagator::{duhamel, free_mixed, Flow};
use crate::spaces::{restricted_norm, sobolev_hat_norm, sup_time_norm, windowed, z_norm, NormParams, Sign};
use crate::{Error, Result};

const ONE: C64 = C64::new(1.0, 0.0);

/// Distances between consecutive iterates `u⁽ⁿ⁺¹⁾` and `u⁽ⁿ⁾`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepDiagnostic {
    pub n: usize,
    /// `max_± sup_{|t|≤δ} ‖u_±⁽ⁿ⁺¹⁾(t) − u_±⁽ⁿ⁾(t)‖_{Ĥ^r_s}`.
    pub sup_distance: f64,
    /// `max_±` of the restricted `X^{r,∓}_{s,b}(δ)` norm of the step.
    pub restricted_distance: f64,
    /// `ρₙ = dₙ₊₁/dₙ` of the sup distances, once the next step exists.
    pub rho: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PicardStatus {
    Converged,
    BudgetExhausted,
    /// The step grew three times in a row.
    Diverged,
}

#[derive(Clone, Debug)]
pub struct PicardOutcome {
    /// Last iterates and the right sides evaluated on them, in mixed form.
    pub u_plus: SpacetimeField,
    pub u_minus: SpacetimeField,
    pub g_plus: SpacetimeField,
    pub g_minus: SpacetimeField,
    pub steps: Vec<StepDiagnostic>,
    pub status: PicardStatus,
}

impl PicardOutcome {
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }

    /// Largest `ρₙ` over `n ≥ from`.
    pub fn max_rho(&self, from: usize) -> Option<f64> {
        self.steps.iter().skip(from).filter_map(|s| s.rho).reduce(f64::max)
    }
}

fn check_data(fp: &Spectrum, fm: &Spectrum, cfg: &SolveConfig) -> Result<()> {
    for f in [fp, fm] {
        f.expect_repr(Repr::Frequency)?;
        if !f.grid().same_as(cfg.grid.spatial()) {
            return Err(Error::GridMismatch("data are not on the solver grid".into()));
        }
    }
    Ok(())
}

fn params(cfg: &SolveConfig, component: Sign) -> Result<NormParams> {
    NormParams::new(cfg.r, cfg.s, cfg.b, diagnostic_sign(component))
}

fn step_distances(next: &[SpacetimeField; 2], prev: &[SpacetimeField; 2], cfg: &SolveConfig) -> Result<(f64, f64)> {
    let mut sup: f64 = 0.0;
    let mut res: f64 = 0.0;
    for ((a, b), sign) in next.iter().zip(prev).zip([Sign::Plus, Sign::Minus]) {
        let d = a.combine(ONE, b, -ONE)?;
        sup = sup.max(sup_time_norm(&d, cfg.r, cfg.s, cfg.delta)?);
        res = res.max(restricted_norm(&d, cfg.delta, &cfg.window, &params(cfg, sign)?)?);
    }
    Ok((sup, res))
}

/// Picard iteration for the system: `u_±⁽⁰⁾ = e^{∓itJ}f_±` and
/// `u_±⁽ⁿ⁺¹⁾ = e^{∓itJ}f_± + Duhamel(ψ·g_±(u⁽ⁿ⁾))` with the window `ψ` of
/// `cfg`, which is 1 on `[-δ, δ]`.
pub fn picard_iterate(fp: &Spectrum, fm: &Spectrum, ns: &NonlinearitySpec, cfg: &SolveConfig) -> Result<PicardOutcome> {
    picard_iterate_forced(fp, fm, ns, cfg, None)
}

/// [`picard_iterate`] for `□u = B_k(u, u) + F`.
pub fn picard_iterate_forced(
    fp: &Spectrum,
    fm: &Spectrum,
    ns: &NonlinearitySpec,
    cfg: &SolveConfig,
    forcing: Option<&SpacetimeField>,
) -> Result<PicardOutcome> {
    cfg.validate()?;
    ns.validate()?;
    check_data(fp, fm, cfg)?;
    let free = [
        free_mixed(fp, &cfg.grid, &Flow::bessel(Sign::Plus).at(0.0))?,
        free_mixed(fm, &cfg.grid, &Flow::bessel(Sign::Minus).at(0.0))?,
    ];
    // the right side is cut off outside the window; on [-δ, δ] the iterates
    // are unchanged and beyond the support they continue as free waves
    let cut = |g: &SpacetimeField| g.apply_time_weight(|t| cfg.window.value(t));
    let mut u = free.clone();
    let mut steps: Vec<StepDiagnostic> = Vec::new();
    let mut status = PicardStatus::BudgetExhausted;
    let mut growth = 0;
    for n in 0..cfg.max_iter {
        let (gp, gm) = rhs_eval_forced(&u[0], &u[1], ns, forcing)?;
        let (gp, gm) = (cut(&gp)?, cut(&gm)?);
        let next = [
            free[0].combine(ONE, &duhamel(&gp, Sign::Plus)?, ONE)?,
            free[1].combine(ONE, &duhamel(&gm, Sign::Minus)?, ONE)?,
        ];
        let (sup, res) = step_distances(&next, &u, cfg)?;
        let prev = steps.last().map(|s| s.sup_distance);
        if let Some(last) = steps.last_mut() {
            last.rho = (last.sup_distance > 0.0).then(|| sup / last.sup_distance);
        }
        steps.push(StepDiagnostic {
            n,
            sup_distance: sup,
            restricted_distance: res,
            rho: None,
        });
        u = next;
        if !sup.is_finite() {
            status = PicardStatus::Diverged;
            break;
        }
        growth = if prev.is_some_and(|p| sup > p) { growth + 1 } else { 0 };
        if growth >= 3 {
            status = PicardStatus::Diverged;
            break;
        }
        let size = sup_time_norm(&u[0], cfg.r, cfg.s, cfg.delta)?.max(sup_time_norm(&u[1], cfg.r, cfg.s, cfg.delta)?);
        if sup <= cfg.tol * size || size == 0.0 {
            status = PicardStatus::Converged;
            break;
        }
    }
    let [up, um] = u;
    let (gp, gm) = rhs_eval_forced(&up, &um, ns, forcing)?;
    Ok(PicardOutcome {
        u_plus: up,
        u_minus: um,
        g_plus: gp,
        g_minus: gm,
        steps,
        status,
    })
}

/// `‖□u − B_k(u, u) − F‖` in space-time `L²` over interior slices of `[-δ, δ]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Residual {
    pub l2: f64,
    /// `l2` over `‖∂_t²u‖ + ‖Δu‖ + ‖B_k(u, u)‖ + ‖F‖`; absent when all vanish.
    pub relative: Option<f64>,
    pub slices: usize,
}

/// `t ↦ ‖u_±(t)‖_{Ĥ^r_s}` on `[-δ, δ]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Persistence {
    pub times: Vec<f64>,
    pub plus: Vec<f64>,
    pub minus: Vec<f64>,
    /// Largest change between adjacent samples, relative to the curve maximum.
    pub max_jump: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolveReport {
    pub status: PicardStatus,
    pub steps: Vec<StepDiagnostic>,
    pub residual: Option<Residual>,
    pub persistence: Option<Persistence>,
    /// Restricted `X^{r,∓}_{s,b}(δ)` norms of `u_±`.
    pub x_norms: Option<[f64; 2]>,
    /// Restricted `Z^{r,∓}_{s,b}(δ)` norms of `u_±`, for `k = 2`.
    pub z_norms: Option<[f64; 2]>,
    /// Largest deviation of the lattice derivative of `u` from
    /// `J(u₊ − u₋)/(2i)`, relative to the latter.
    pub reconstruction_defect: Option<f64>,
    #[serde(skip)]
    pub solution: PicardOutcome,
}

// slices whose five-point stencil stays inside `[-δ, δ]`, where the
// cut-off right side equals the true one
fn interior(cfg: &SolveConfig) -> Vec<usize> {
    let g = &cfg.grid;
    let reach = cfg.delta - 2.0 * g.dt() + 1e-12;
    (2..g.m().saturating_sub(2))
        .filter(|&m| g.time(m).abs() <= reach)
        .collect()
}

fn residual(
    out: &PicardOutcome,
    u: &SpacetimeField,
    ns: &NonlinearitySpec,
    cfg: &SolveConfig,
    forcing: Option<&SpacetimeField>,
) -> Result<Residual> {
    let b = nonlinear_term(&out.u_plus, &out.u_minus, ns)?;
    let f = forcing.map(|f| f.to_mixed()).transpose()?;
    let g = &cfg.grid;
    let sg = g.spatial();
    let n3 = sg.len();
    let h2 = g.dt() * g.dt();
    let xi2: Vec<f64> = (0..n3).map(|k| symbols::norm(sg.freq_vec(k)).powi(2)).collect();
    let (mut res, mut terms) = (0.0, [0.0; 4]);
    let slices = interior(cfg);
    for &m in &slices {
        let s = |j: usize| u.slice(j);
        for (k, &x2) in xi2.iter().enumerate() {
            let utt =
                (-s(m + 2)[k] + 16.0 * s(m + 1)[k] - 30.0 * s(m)[k] + 16.0 * s(m - 1)[k] - s(m - 2)[k]) / (12.0 * h2);
            let lap = x2 * s(m)[k];
            let bk = 0.25 * b.slice(m)[k];
            let force = f.as_ref().map_or(C64::new(0.0, 0.0), |f| f.slice(m)[k]);
            res += (utt + lap - bk - force).norm_sqr();
            for (t, v) in terms.iter_mut().zip([utt, lap, bk, force]) {
                *t += v.norm_sqr();
            }
        }
    }
    let w = g.dt() * sg.dxi().powi(3) / (2.0 * std::f64::consts::PI).powi(3);
    let l2 = (res * w).sqrt();
    let r2: f64 = terms.iter().map(|t| (t * w).sqrt()).sum();
    Ok(Residual {
        l2,
        relative: (r2 > 0.0).then(|| l2 / r2),
        slices: slices.len(),
    })
}

fn persistence(out: &PicardOutcome, cfg: &SolveConfig) -> Result<Persistence> {
    let g = &cfg.grid;
    let (mut times, mut plus, mut minus) = (Vec::new(), Vec::new(), Vec::new());
    for m in 0..g.m() {
        if g.time(m).abs() <= cfg.delta + 1e-12 {
            times.push(g.time(m));
            plus.push(sobolev_hat_norm(&out.u_plus.slice_field(m)?, cfg.r, cfg.s)?);
            minus.push(sobolev_hat_norm(&out.u_minus.slice_field(m)?, cfg.r, cfg.s)?);
        }
    }
    let top = plus.iter().chain(&minus).copied().fold(0.0, f64::max);
    let jump = [&plus, &minus]
        .iter()
        .flat_map(|c| c.windows(2).map(|w| (w[1] - w[0]).abs()))
        .fold(0.0, f64::max);
    Ok(Persistence {
        times,
        plus,
        minus,
        max_jump: if top > 0.0 { jump / top } else { 0.0 },
    })
}

fn reconstruction_defect(u: &SpacetimeField, ut: &SpacetimeField, cfg: &SolveConfig) -> f64 {
    let h = cfg.grid.dt();
    let (mut worst, mut top): (f64, f64) = (0.0, 0.0);
    for m in interior(cfg) {
        let s = |j: usize| u.slice(j);
        for (k, v) in ut.slice(m).iter().enumerate() {
            let d = (-s(m + 2)[k] + 8.0 * s(m + 1)[k] - 8.0 * s(m - 1)[k] + s(m - 2)[k]) / (12.0 * h);
            worst = worst.max((d - v).norm());
            top = top.max(v.norm());
        }
    }
    if top > 0.0 {
        worst / top
    } else {
        worst
    }
}

/// Picard iteration to tolerance plus consistency diagnostics. A
/// non-contracting run is reported through `status` without diagnostics.
pub fn solve_local(fp: &Spectrum, fm: &Spectrum, ns: &NonlinearitySpec, cfg: &SolveConfig) -> Result<SolveReport> {
    solve_local_forced(fp, fm, ns, cfg, None)
}

/// [`solve_local`] for `□u = B_k(u, u) + F`.
pub fn solve_local_forced(
    fp: &Spectrum,
    fm: &Spectrum,
    ns: &NonlinearitySpec,
    cfg: &SolveConfig,
    forcing: Option<&SpacetimeField>,
) -> Result<SolveReport> {
    let out = picard_iterate_forced(fp, fm, ns, cfg, forcing)?;
    if out.status == PicardStatus::Diverged {
        return Ok(SolveReport {
            status: out.status,
            steps: out.steps.clone(),
            residual: None,
            persistence: None,
            x_norms: None,
            z_norms: None,
            reconstruction_defect: None,
            solution: out,
        });
    }
    let (u, ut) = reconstruct(&out.u_plus, &out.u_minus)?;
    let res = residual(&out, &u, ns, cfg, forcing)?;
    let mut x = [0.0; 2];
    let mut z = [0.0; 2];
    for (i, (f, g, sign)) in [
        (&out.u_plus, &out.g_plus, Sign::Plus),
        (&out.u_minus, &out.g_minus, Sign::Minus),
    ]
    .into_iter()
    .enumerate()
    {
        let p = params(cfg, sign)?;
        x[i] = restricted_norm(f, cfg.delta, &cfg.window, &p)?;
        if ns.k == 2 {
            let dt = time_derivative(f, g, sign)?;
            z[i] = z_norm(
                &windowed(f, cfg.delta, &cfg.window)?,
                &windowed(&dt, cfg.delta, &cfg.window)?,
                &p,
            )?;
        }
    }
    Ok(SolveReport {
        status: out.status,
        steps: out.steps.clone(),
        residual: Some(res),
        persistence: Some(persistence(&out, cfg)?),
        x_norms: Some(x),
        z_norms: (ns.k == 2).then_some(z),
        reconstruction_defect: Some(reconstruction_defect(&u, &ut, cfg)),
        solution: out,
    })
}
