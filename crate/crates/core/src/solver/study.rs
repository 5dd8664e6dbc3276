use serde::Serialize;

use super::{
    nonlinear_term, picard_iterate, solve_local_forced, to_first_order, CauchyData, NonlinearitySpec, PicardStatus,
    SolveConfig, SolveReport,
};
use crate::grid::{symbols, Field, Repr, SpacetimeField, SpatialGrid, Spectrum, C64};
use crate::par;
use crate::spaces::{restricted_norm, sobolev_hat_norm, sup_time_norm, NormParams, Sign};
use crate::verify::DataFamily;
use crate::{Error, Result};

const ONE: C64 = C64::new(1.0, 0.0);

fn data_norm(fp: &Spectrum, fm: &Spectrum, r: f64, s: f64) -> Result<f64> {
    Ok(sobolev_hat_norm(fp, r, s)?.max(sobolev_hat_norm(fm, r, s)?))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaChoice {
    pub delta: f64,
    /// `ρ₁` at the chosen `δ`; absent for data without a nonzero step.
    pub rho1: Option<f64>,
    pub halvings: usize,
    pub data_norm: f64,
}

/// `δ₀ = min(1, 0.5/(1 + max ‖f_±‖_{Ĥ^r_s}))`, halved until `ρ₁ < rho_max`.
/// Fails once `δ` drops below `min_delta`.
pub fn select_delta(
    fp: &Spectrum,
    fm: &Spectrum,
    ns: &NonlinearitySpec,
    base: &SolveConfig,
    rho_max: f64,
    min_delta: f64,
) -> Result<DeltaChoice> {
    let norm = data_norm(fp, fm, base.r, base.s)?;
    let mut delta = (0.5 / (1.0 + norm)).min(1.0);
    let mut halvings = 0;
    loop {
        let cfg = base.with_delta(delta)?.with_budget(3, f64::MIN_POSITIVE);
        let out = picard_iterate(fp, fm, ns, &cfg)?;
        let rho1 = out.steps.get(1).and_then(|s| s.rho);
        let zero = out.steps.first().is_some_and(|s| s.sup_distance == 0.0);
        if zero || rho1.is_some_and(|r| r < rho_max) {
            return Ok(DeltaChoice {
                delta,
                rho1,
                halvings,
                data_norm: norm,
            });
        }
        delta *= 0.5;
        halvings += 1;
        if delta < min_delta {
            return Err(Error::Divergent(format!(
                "no δ ≥ {min_delta} gives ρ₁ < {rho_max} (last ρ₁ = {rho1:?})"
            )));
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaRow {
    pub scale: f64,
    pub choice: DeltaChoice,
}

/// `δ` selected for the data scaled by each factor; `δ` should not grow
/// with the data size.
pub fn delta_table(
    data: &CauchyData,
    scales: &[f64],
    ns: &NonlinearitySpec,
    base: &SolveConfig,
    rho_max: f64,
) -> Result<(Vec<DeltaRow>, bool)> {
    let (fp, fm) = to_first_order(data)?;
    let rows = par::map(scales, |&a| -> Result<DeltaRow> {
        let c = C64::new(a, 0.0);
        Ok(DeltaRow {
            scale: a,
            choice: select_delta(&fp.scaled(c), &fm.scaled(c), ns, base, rho_max, 1e-4)?,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut sorted: Vec<&DeltaRow> = rows.iter().collect();
    sorted.sort_by(|a, b| a.choice.data_norm.total_cmp(&b.choice.data_norm));
    let monotone = sorted.windows(2).all(|w| w[1].choice.delta <= w[0].choice.delta);
    Ok((rows, monotone))
}

/// Two sets of first-order data `(f₊, f₋)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DataPair {
    pub first: [Spectrum; 2],
    pub second: [Spectrum; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LipschitzRow {
    pub index: usize,
    pub data_distance: f64,
    /// `max_± sup_{|t|≤δ}` distance of the solutions in `Ĥ^r_s`.
    pub solution_distance: Option<f64>,
    pub ratio: Option<f64>,
    /// Same ratio with restricted `X^{r,∓}_{s,b}(δ)` solution distances.
    pub x_ratio: Option<f64>,
    /// One of the two solves did not converge.
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LipschitzReport {
    pub rows: Vec<LipschitzRow>,
    pub max_ratio: Option<f64>,
    pub max_x_ratio: Option<f64>,
    pub flagged: usize,
}

/// Ratio of solution distance to data distance for each pair. Identical
/// pairs are skipped; pairs whose solves fail to converge are flagged.
pub fn flow_lipschitz_probe(pairs: &[DataPair], ns: &NonlinearitySpec, cfg: &SolveConfig) -> Result<LipschitzReport> {
    let indexed: Vec<(usize, &DataPair)> = pairs.iter().enumerate().collect();
    let rows = par::map(&indexed, |&(index, p)| -> Result<LipschitzRow> {
        let dp = p.first[0].combine(ONE, &p.second[0], -ONE)?;
        let dm = p.first[1].combine(ONE, &p.second[1], -ONE)?;
        let data_distance = data_norm(&dp, &dm, cfg.r, cfg.s)?;
        let mut row = LipschitzRow {
            index,
            data_distance,
            solution_distance: None,
            ratio: None,
            x_ratio: None,
            flagged: false,
        };
        if data_distance == 0.0 {
            return Ok(row);
        }
        let a = picard_iterate(&p.first[0], &p.first[1], ns, cfg)?;
        let b = picard_iterate(&p.second[0], &p.second[1], ns, cfg)?;
        if a.status != PicardStatus::Converged || b.status != PicardStatus::Converged {
            row.flagged = true;
            return Ok(row);
        }
        let (mut sup, mut x): (f64, f64) = (0.0, 0.0);
        for (u, v, sign) in [
            (&a.u_plus, &b.u_plus, Sign::Plus),
            (&a.u_minus, &b.u_minus, Sign::Minus),
        ] {
            let d = u.combine(ONE, v, -ONE)?;
            sup = sup.max(sup_time_norm(&d, cfg.r, cfg.s, cfg.delta)?);
            let p = NormParams::new(cfg.r, cfg.s, cfg.b, super::diagnostic_sign(sign))?;
            x = x.max(restricted_norm(&d, cfg.delta, &cfg.window, &p)?);
        }
        row.solution_distance = Some(sup);
        row.ratio = Some(sup / data_distance);
        row.x_ratio = Some(x / data_distance);
        Ok(row)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let max = |f: fn(&LipschitzRow) -> Option<f64>| rows.iter().filter_map(f).reduce(f64::max);
    Ok(LipschitzReport {
        max_ratio: max(|r| r.ratio),
        max_x_ratio: max(|r| r.x_ratio),
        flagged: rows.iter().filter(|r| r.flagged).count(),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LipschitzStudy {
    pub eps: f64,
    pub coarse: LipschitzReport,
    /// Same pairs with the perturbation halved.
    pub fine: LipschitzReport,
    /// `fine.max_ratio / coarse.max_ratio`.
    pub stability: Option<f64>,
    pub passed: bool,
}

fn mix_seed(seed: u64, i: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(i.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Random base data `u₀, u₁` of the given amplitude and a unit-norm random
/// perturbation direction per pair, all band-limited to `|ξ| ≤ width`.
#[allow(clippy::too_many_arguments)]
pub fn random_pairs(
    grid: &SpatialGrid,
    count: usize,
    amplitude: f64,
    width: f64,
    eps: f64,
    r: f64,
    s: f64,
    seed: u64,
) -> Result<Vec<DataPair>> {
    (0..count as u64)
        .map(|i| {
            let fam = |j: u64| DataFamily::random([0.0; 3], width, mix_seed(seed, 3 * i + j));
            let d = CauchyData::from_families(
                grid,
                &fam(0).with_amplitude(amplitude),
                Some(&fam(1).with_amplitude(amplitude)),
                r,
                s,
            )?;
            let (fp, fm) = to_first_order(&d)?;
            let h = fam(2).spectrum(grid, 1.0)?;
            let hn = sobolev_hat_norm(&h, r, s)?;
            if hn == 0.0 {
                return Err(Error::Parameter("perturbation direction vanishes on this grid".into()));
            }
            let step = C64::new(eps / hn, 0.0);
            Ok(DataPair {
                second: [fp.combine(ONE, &h, step)?, fm.combine(ONE, &h, -step)?],
                first: [fp, fm],
            })
        })
        .collect()
}

/// Lipschitz ratios of `count` random pairs at perturbation size `eps` and
/// `eps/2`; passes when the maximal ratio changes by at most 30%.
#[allow(clippy::too_many_arguments)]
pub fn lipschitz_study(
    ns: &NonlinearitySpec,
    cfg: &SolveConfig,
    count: usize,
    amplitude: f64,
    width: f64,
    eps: f64,
    seed: u64,
) -> Result<LipschitzStudy> {
    let g = cfg.grid.spatial();
    let coarse = flow_lipschitz_probe(
        &random_pairs(g, count, amplitude, width, eps, cfg.r, cfg.s, seed)?,
        ns,
        cfg,
    )?;
    let fine = flow_lipschitz_probe(
        &random_pairs(g, count, amplitude, width, 0.5 * eps, cfg.r, cfg.s, seed)?,
        ns,
        cfg,
    )?;
    let stability = match (coarse.max_ratio, fine.max_ratio) {
        (Some(a), Some(b)) if a > 0.0 => Some(b / a),
        _ => None,
    };
    Ok(LipschitzStudy {
        eps,
        passed: stability.is_some_and(|s| (s - 1.0).abs() <= 0.3) && coarse.flagged == 0 && fine.flagged == 0,
        coarse,
        fine,
        stability,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ManufacturedRow {
    pub m: usize,
    pub dt: f64,
    pub residual: f64,
    /// `sup_{|t|≤δ} ‖u − u_exact‖_{Ĥ^r_s}`.
    pub error: f64,
    pub iterations: usize,
    pub status: PicardStatus,
    pub reconstruction_defect: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ManufacturedStudy {
    pub rows: Vec<ManufacturedRow>,
    /// Residual ratios between consecutive refinements.
    pub ratios: Vec<f64>,
    pub passed: bool,
}

/// The exact solution `u = A cos(k·x) cos(ωt + φ)` with `ω = 1.3`, `φ = 0.3`
/// and wave numbers `k = (1, 1, 0)` on the grid, together with the forcing
/// `F = □u − B_k(u, u)` that makes it exact for the discrete nonlinearity.
pub fn manufactured_solution(
    ns: &NonlinearitySpec,
    cfg: &SolveConfig,
    amplitude: f64,
) -> Result<(SpacetimeField, SpacetimeField, [Spectrum; 2])> {
    let (omega, phi) = (1.3, 0.3);
    let sg = *cfg.grid.spatial();
    let k = [sg.dxi(), sg.dxi(), 0.0];
    let wave = |x: [f64; 3]| (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]).cos();
    let u = SpacetimeField::from_config_fn(cfg.grid, |t, x| {
        C64::new(amplitude * wave(x) * (omega * t + phi).cos(), 0.0)
    })
    .to_mixed()?;
    let ut = SpacetimeField::from_config_fn(cfg.grid, |t, x| {
        C64::new(-amplitude * omega * wave(x) * (omega * t + phi).sin(), 0.0)
    })
    .to_mixed()?;
    let n3 = sg.len();
    let jinv: Vec<C64> = (0..n3)
        .map(|i| C64::new(0.0, 1.0 / symbols::japanese(sg.freq_vec(i))))
        .collect();
    let mut up = u.clone();
    let mut um = u.clone();
    for (i, v) in ut.data().iter().enumerate() {
        up.data_mut()[i] += jinv[i % n3] * v;
        um.data_mut()[i] -= jinv[i % n3] * v;
    }
    let b = nonlinear_term(&up, &um, ns)?;
    let kk = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
    let mut f = u.scaled(C64::new(kk - omega * omega, 0.0));
    for (v, bv) in f.data_mut().iter_mut().zip(b.data()) {
        *v -= 0.25 * bv;
    }
    let o = cfg.grid.origin();
    let data = [up.slice_field(o)?, um.slice_field(o)?];
    Ok((u, f, data))
}

/// Solves the manufactured problem at each time resolution `ms`; passes when
/// every refinement by doubling reduces the residual at least `min_ratio`-fold.
pub fn manufactured_study(
    ns: &NonlinearitySpec,
    base: &SolveConfig,
    amplitude: f64,
    ms: &[usize],
    min_ratio: f64,
) -> Result<ManufacturedStudy> {
    let mut rows = Vec::new();
    for &m in ms {
        let cfg = base.with_m(m)?;
        let (exact, forcing, [fp, fm]) = manufactured_solution(ns, &cfg, amplitude)?;
        let rep: SolveReport = solve_local_forced(&fp, &fm, ns, &cfg, Some(&forcing))?;
        let out = &rep.solution;
        let half = C64::new(0.5, 0.0);
        let u = out.u_plus.combine(half, &out.u_minus, half)?;
        let error = sup_time_norm(&u.combine(ONE, &exact, -ONE)?, cfg.r, cfg.s, cfg.delta)?;
        rows.push(ManufacturedRow {
            m,
            dt: cfg.grid.dt(),
            residual: rep.residual.as_ref().map_or(f64::NAN, |r| r.l2),
            error,
            iterations: out.iterations(),
            status: rep.status,
            reconstruction_defect: rep.reconstruction_defect,
        });
    }
    let ratios: Vec<f64> = rows.windows(2).map(|w| w[0].residual / w[1].residual).collect();
    let passed = !ratios.is_empty()
        && ratios.iter().all(|r| *r >= min_ratio)
        && rows.iter().all(|r| r.status == PicardStatus::Converged);
    Ok(ManufacturedStudy { rows, ratios, passed })
}

/// Zero spectrum on the solver grid.
pub fn zero_data(grid: &SpatialGrid) -> Spectrum {
    Field::zeros(*grid, Repr::Frequency)
}
