//! Local search for data maximizing the free-wave key-estimate ratio.

use serde::Serialize;

use super::checks::free_key_sample;
use super::{DataFamily, FamilyKind, LatticeSpec, VerifyParams};
use crate::bilinear::SignPair;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NelderMeadOptions {
    pub max_evals: usize,
    /// Spread of simplex values at convergence; relative for `|f| > 1`, absolute below.
    pub ftol: f64,
    /// Simplex diameter at convergence, in box-normalized coordinates.
    pub xtol: f64,
    /// Initial edge length in box-normalized coordinates.
    pub initial_step: f64,
}

impl Default for NelderMeadOptions {
    fn default() -> Self {
        Self {
            max_evals: 120,
            ftol: 1e-6,
            xtol: 1e-3,
            initial_step: 0.25,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NelderMeadOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    /// Best value after each iteration.
    pub trace: Vec<f64>,
    pub evals: usize,
    pub converged: bool,
}

/// Maximizes `f` over the box `[lo, hi]` with a Nelder-Mead simplex in
/// box-normalized coordinates; trial points are clamped to the box and
/// degenerate axes (`lo = hi`) stay fixed.
pub fn nelder_mead<F>(
    mut f: F,
    x0: &[f64],
    lo: &[f64],
    hi: &[f64],
    opts: &NelderMeadOptions,
) -> Result<NelderMeadOutcome>
where
    F: FnMut(&[f64]) -> Result<f64>,
{
    let dim = x0.len();
    if lo.len() != dim || hi.len() != dim || (0..dim).any(|i| !(lo[i] <= hi[i])) {
        return Err(Error::Parameter("search box does not match the start point".into()));
    }
    let free: Vec<usize> = (0..dim).filter(|&i| hi[i] > lo[i]).collect();
    let to_x = |u: &[f64]| -> Vec<f64> {
        let mut x: Vec<f64> = (0..dim).map(|i| x0[i].clamp(lo[i], hi[i])).collect();
        for (j, &i) in free.iter().enumerate() {
            x[i] = lo[i] + u[j].clamp(0.0, 1.0) * (hi[i] - lo[i]);
        }
        x
    };
    let evals = std::cell::Cell::new(0usize);
    let mut eval = |u: &[f64]| -> Result<f64> {
        evals.set(evals.get() + 1);
        // minimize the negated objective
        Ok(-f(&to_x(u))?)
    };
    let u0: Vec<f64> = free
        .iter()
        .map(|&i| (x0[i].clamp(lo[i], hi[i]) - lo[i]) / (hi[i] - lo[i]))
        .collect();
    let n = free.len();
    if n == 0 {
        let v = -eval(&u0)?;
        return Ok(NelderMeadOutcome {
            x: to_x(&u0),
            value: v,
            trace: vec![v],
            evals: evals.get(),
            converged: true,
        });
    }
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    simplex.push((u0.clone(), eval(&u0)?));
    for j in 0..n {
        let mut u = u0.clone();
        // step inward when the start sits on the upper face
        u[j] = if u[j] + opts.initial_step <= 1.0 {
            u[j] + opts.initial_step
        } else {
            u[j] - opts.initial_step
        };
        u[j] = u[j].clamp(0.0, 1.0);
        let v = eval(&u)?;
        simplex.push((u, v));
    }
    let clamp = |u: Vec<f64>| -> Vec<f64> { u.into_iter().map(|v| v.clamp(0.0, 1.0)).collect() };
    let mut trace = Vec::new();
    let mut converged = false;
    while evals.get() < opts.max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        trace.push(-simplex[0].1);
        let (best, worst) = (simplex[0].1, simplex[n].1);
        let diameter = simplex
            .iter()
            .flat_map(|a| simplex.iter().map(move |b| (a, b)))
            .map(|(a, b)| a.0.iter().zip(&b.0).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if (worst - best).abs() <= opts.ftol * best.abs().max(1.0) && diameter <= opts.xtol {
            converged = true;
            break;
        }
        let centroid: Vec<f64> = (0..n)
            .map(|k| simplex[..n].iter().map(|p| p.0[k]).sum::<f64>() / n as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            clamp(
                (0..n)
                    .map(|k| centroid[k] + t * (simplex[n].0[k] - centroid[k]))
                    .collect(),
            )
        };
        let xr = along(-1.0);
        let fr = eval(&xr)?;
        if fr < simplex[0].1 {
            let xe = along(-2.0);
            let fe = eval(&xe)?;
            simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
        } else if fr < simplex[n - 1].1 {
            simplex[n] = (xr, fr);
        } else {
            let (xc, fc) = if fr < worst {
                let xc = along(-0.5);
                let fc = eval(&xc)?;
                (xc, fc)
            } else {
                let xc = along(0.5);
                let fc = eval(&xc)?;
                (xc, fc)
            };
            if fc < worst.min(fr) {
                simplex[n] = (xc, fc);
            } else {
                let b = simplex[0].0.clone();
                for p in simplex.iter_mut().skip(1) {
                    let u: Vec<f64> = b.iter().zip(&p.0).map(|(x, y)| x + 0.5 * (y - x)).collect();
                    let v = eval(&u)?;
                    *p = (u, v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let value = -simplex[0].1;
    if trace.last() != Some(&value) {
        trace.push(value);
    }
    Ok(NelderMeadOutcome {
        x: to_x(&simplex[0].0),
        value,
        trace,
        evals: evals.get(),
        converged,
    })
}

/// Search over `(|ξ₀|, w, α)`: center `(0, 0, |ξ₀|)`, width `w`, and
/// anisotropy `(1, 1, α)`, all in units of `λ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtremizeParams {
    pub r: f64,
    pub sigma: f64,
    pub signs: SignPair,
    pub lambda: f64,
    pub lattice: LatticeSpec,
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub kinds: Vec<FamilyKind>,
    /// Supplies the start point and the seed of random data.
    pub seed_family: DataFamily,
    pub options: NelderMeadOptions,
}

impl ExtremizeParams {
    pub fn new(r: f64, sigma: f64, seed_family: DataFamily) -> Self {
        Self {
            r,
            sigma,
            signs: SignPair::PLUS_PLUS,
            lambda: 4.0,
            lattice: LatticeSpec::default(),
            lo: [0.3, 0.1, 0.5],
            hi: [1.0, 0.3, 2.0],
            kinds: FamilyKind::ALL.to_vec(),
            seed_family,
            options: NelderMeadOptions::default(),
        }
    }

    /// The family at a parameter point.
    pub fn family_at(&self, kind: FamilyKind, x: &[f64]) -> DataFamily {
        DataFamily {
            kind,
            center: [0.0, 0.0, x[0]],
            width: x[1],
            anisotropy: [1.0, 1.0, x[2]],
            ..self.seed_family
        }
    }

    /// Free-wave ratio `‖J^{σ-1}∂_x(uv)‖ + ‖J^{σ-1}∂_t(uv)‖` over the data
    /// norms, with `u₀ = v₀` drawn from the family; zero when the data miss
    /// the lattice.
    pub fn objective(&self, kind: FamilyKind, x: &[f64]) -> Result<f64> {
        let p = VerifyParams {
            signs: self.signs,
            lambdas: vec![self.lambda],
            lattice: self.lattice,
            ..VerifyParams::new(self.r, self.sigma, self.family_at(kind, x))
        };
        // data missing every lattice point have no ratio and never win
        Ok(free_key_sample(&p, self.lambda)?.ratio.unwrap_or(0.0))
    }

    fn start(&self) -> [f64; 3] {
        let f = self.seed_family;
        let c = (f.center[0].powi(2) + f.center[1].powi(2) + f.center[2].powi(2)).sqrt();
        [c, f.width, f.anisotropy[2]]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Restart {
    pub kind: FamilyKind,
    pub start: [f64; 3],
    pub best: [f64; 3],
    pub value: f64,
    pub trace: Vec<f64>,
    pub evals: usize,
    pub converged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtremizerResult {
    pub best_kind: FamilyKind,
    pub best: [f64; 3],
    pub best_ratio: f64,
    pub restarts: Vec<Restart>,
    /// Every restart met the simplex tolerances within budget.
    pub converged: bool,
}

/// Runs one Nelder-Mead search per family kind from the seed point and
/// keeps the best. Budget exhaustion is reported through `converged`.
pub fn extremizer_search(p: &ExtremizeParams) -> Result<ExtremizerResult> {
    if p.kinds.is_empty() {
        return Err(Error::Parameter("no family kinds to search".into()));
    }
    let start = p.start();
    let mut restarts = Vec::with_capacity(p.kinds.len());
    for &kind in &p.kinds {
        let out = nelder_mead(|x| p.objective(kind, x), &start, &p.lo, &p.hi, &p.options)?;
        restarts.push(Restart {
            kind,
            start: [0, 1, 2].map(|i| start[i].clamp(p.lo[i], p.hi[i])),
            best: [out.x[0], out.x[1], out.x[2]],
            value: out.value,
            trace: out.trace,
            evals: out.evals,
            converged: out.converged,
        });
    }
    let top = restarts
        .iter()
        .max_by(|a, b| a.value.total_cmp(&b.value))
        .cloned()
        .ok_or_else(|| Error::Parameter("no restarts".into()))?;
    Ok(ExtremizerResult {
        best_kind: top.kind,
        best: top.best,
        best_ratio: top.value,
        converged: restarts.iter().all(|r| r.converged),
        restarts,
    })
}
