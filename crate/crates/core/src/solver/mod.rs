//! Picard solver for the first-order system
//!
//! ```text
//! (i∂_t ∓ J)u_± = ∓¼J⁻¹B_k(w, w) ∓ ½J⁻¹w,   w = u₊ + u₋,
//! u_±(0) = f_± = u₀ ± iJ⁻¹u₁,
//! ```
//!
//! equivalent to `□u = B_k(u, u)` with `u = w/2`. Fields live on a space-time
//! lattice whose time origin is the data time; products are evaluated
//! pseudospectrally with the 2/3 rule.

mod picard;
mod study;

use serde::{Deserialize, Serialize};

use crate::grid::{
    forward_transform, inverse_transform, symbols, Field, Repr, SpacetimeField, SpacetimeGrid, SpatialGrid, Spectrum,
    C64,
};
use crate::par;
use crate::spaces::{check_lebesgue, sobolev_hat_norm, Sign, WindowSpec};
use crate::verify::DataFamily;
use crate::{Error, Result};

pub use picard::{
    picard_iterate, picard_iterate_forced, solve_local, solve_local_forced, Persistence, PicardOutcome, PicardStatus,
    Residual, SolveReport, StepDiagnostic,
};
pub use study::{
    delta_table, flow_lipschitz_probe, lipschitz_study, manufactured_solution, manufactured_study, random_pairs,
    select_delta, zero_data, DataPair, DeltaChoice, DeltaRow, LipschitzReport, LipschitzRow, LipschitzStudy,
    ManufacturedRow, ManufacturedStudy,
};

const ZERO: C64 = C64::new(0.0, 0.0);

/// Position and velocity data with the intended data space `Ĥ^r_s`.
#[derive(Clone, Debug, PartialEq)]
pub struct CauchyData {
    pub u0: Spectrum,
    pub u1: Spectrum,
    pub r: f64,
    pub s: f64,
}

impl CauchyData {
    pub fn new(u0: Spectrum, u1: Spectrum, r: f64, s: f64) -> Result<Self> {
        check_lebesgue(r)?;
        u0.expect_repr(Repr::Frequency)?;
        u1.expect_repr(Repr::Frequency)?;
        if !u0.grid().same_as(u1.grid()) {
            return Err(Error::GridMismatch("u0 and u1 live on different grids".into()));
        }
        for (name, f, reg) in [("u0", &u0, s), ("u1", &u1, s - 1.0)] {
            let n = sobolev_hat_norm(f, r, reg)?;
            if !n.is_finite() {
                return Err(Error::Parameter(format!("{name} has non-finite norm")));
            }
        }
        Ok(Self { u0, u1, r, s })
    }

    /// Data drawn from families at unit scale; `u1` vanishes when absent.
    pub fn from_families(grid: &SpatialGrid, u0: &DataFamily, u1: Option<&DataFamily>, r: f64, s: f64) -> Result<Self> {
        let a = u0.spectrum(grid, 1.0)?;
        let b = match u1 {
            Some(f) => f.spectrum(grid, 1.0)?,
            None => Field::zeros(*grid, Repr::Frequency),
        };
        Self::new(a, b, r, s)
    }
}

fn check_pair(a: &Spectrum, b: &Spectrum) -> Result<()> {
    a.expect_repr(Repr::Frequency)?;
    b.expect_repr(Repr::Frequency)?;
    if !a.grid().same_as(b.grid()) {
        return Err(Error::GridMismatch("spectra live on different grids".into()));
    }
    Ok(())
}

/// `f_± = u₀ ± iJ⁻¹u₁`.
pub fn to_first_order(d: &CauchyData) -> Result<(Spectrum, Spectrum)> {
    check_pair(&d.u0, &d.u1)?;
    let g = *d.u0.grid();
    let (mut p, mut m) = (d.u0.clone(), d.u0.clone());
    for (k, v1) in d.u1.data().iter().enumerate() {
        let t = C64::new(0.0, 1.0) * v1 / symbols::japanese(g.freq_vec(k));
        p.data_mut()[k] += t;
        m.data_mut()[k] -= t;
    }
    Ok((p, m))
}

/// `(u₀, u₁) = ((f₊ + f₋)/2, J(f₊ − f₋)/(2i))`.
pub fn from_first_order(fp: &Spectrum, fm: &Spectrum) -> Result<(Spectrum, Spectrum)> {
    check_pair(fp, fm)?;
    let g = *fp.grid();
    let mut u0 = fp.clone();
    let mut u1 = fp.clone();
    for (k, (a, b)) in fp.data().iter().zip(fm.data()).enumerate() {
        u0.data_mut()[k] = 0.5 * (a + b);
        u1.data_mut()[k] = symbols::japanese(g.freq_vec(k)) * (a - b) / C64::new(0.0, 2.0);
    }
    Ok((u0, u1))
}

/// Which derivative enters the nonlinearity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Derivative {
    T,
    X1,
    X2,
    X3,
}

impl Derivative {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "t" => Some(Self::T),
            "x1" => Some(Self::X1),
            "x2" => Some(Self::X2),
            "x3" => Some(Self::X3),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::T => "t",
            Self::X1 => "x1",
            Self::X2 => "x2",
            Self::X3 => "x3",
        }
    }
}

/// `B₁(u,v) = ∂(uv)` or `B₂(u,v) = ∂u·∂v`, scaled by `strength` (zero drops
/// the nonlinear term).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NonlinearitySpec {
    pub k: u8,
    pub derivative: Derivative,
    #[serde(default = "one")]
    pub strength: f64,
}

fn one() -> f64 {
    1.0
}

impl NonlinearitySpec {
    pub fn new(k: u8, derivative: Derivative) -> Result<Self> {
        let s = Self {
            k,
            derivative,
            strength: 1.0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_strength(self, strength: f64) -> Self {
        Self { strength, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !matches!(self.k, 1 | 2) {
            return Err(Error::Parameter(format!(
                "nonlinearity index k = {} must be 1 or 2",
                self.k
            )));
        }
        if !self.strength.is_finite() {
            return Err(Error::Parameter("nonlinearity strength must be finite".into()));
        }
        Ok(())
    }
}

/// Time lattice, restriction window and iteration budget of one solve.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveConfig {
    pub delta: f64,
    pub window: WindowSpec,
    pub max_iter: usize,
    /// Iteration stops once the sup-in-time step falls below `tol` times the
    /// size of the iterate.
    pub tol: f64,
    #[serde(skip)]
    pub grid: SpacetimeGrid,
    /// Data space `Ĥ^r_s` and modulation index of the diagnostic norms.
    pub r: f64,
    pub s: f64,
    pub b: f64,
}

impl SolveConfig {
    /// Time box `[-2δ, 2δ)` with `m` samples and the canonical window of
    /// support `2δ`, whose flat core is `[-δ, δ]`.
    pub fn new(spatial: SpatialGrid, m: usize, delta: f64, r: f64, s: f64) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(Error::Parameter(format!("δ = {delta} must be positive")));
        }
        let cfg = Self {
            delta,
            window: WindowSpec::canonical(2.0 * delta)?,
            max_iter: 40,
            tol: 1e-10,
            grid: SpacetimeGrid::new(spatial, m, 2.0 * delta)?,
            r,
            s,
            b: (1.0 / r + 0.05).min(0.99),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_b(self, b: f64) -> Result<Self> {
        let c = Self { b, ..self };
        c.validate()?;
        Ok(c)
    }

    pub fn with_budget(self, max_iter: usize, tol: f64) -> Self {
        Self { max_iter, tol, ..self }
    }

    /// Same settings at another `δ`.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Ok(Self {
            b: self.b,
            max_iter: self.max_iter,
            tol: self.tol,
            ..Self::new(*self.grid.spatial(), self.grid.m(), delta, self.r, self.s)?
        })
    }

    /// Same settings with `m` time samples.
    pub fn with_m(&self, m: usize) -> Result<Self> {
        Ok(Self {
            grid: SpacetimeGrid::new(*self.grid.spatial(), m, self.grid.half_time())?,
            ..self.clone()
        })
    }

    pub fn validate(&self) -> Result<()> {
        check_lebesgue(self.r)?;
        if !(self.b > 1.0 / self.r && self.b < 1.0) {
            return Err(Error::Parameter(format!(
                "b = {} must lie in (1/r, 1) = ({}, 1)",
                self.b,
                1.0 / self.r
            )));
        }
        let core = self.window.flat_core();
        if !(self.delta <= core + 1e-12 && self.window.support <= self.grid.half_time() + 1e-12) {
            return Err(Error::Parameter(format!(
                "need δ = {} ≤ flat core {core} ≤ support {} ≤ T = {}",
                self.delta,
                self.window.support,
                self.grid.half_time()
            )));
        }
        if self.max_iter == 0 || !(self.tol > 0.0) {
            return Err(Error::Parameter(
                "iteration budget and tolerance must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// The X-space sign in which a flow component has vanishing modulation.
///
/// `u_±` runs with `e^{∓itJ}` and so concentrates near `τ = ∓⟨ξ⟩`, which is
/// the zero set of the `X^{r,∓}` weight `⟨τ ± |ξ|⟩` up to `⟨ξ⟩ − |ξ|`.
pub fn diagnostic_sign(component: Sign) -> Sign {
    component.flip()
}

/// 2/3-rule mask: keeps modes with `|k_j| < N/3` on every axis.
pub fn dealias_mask(grid: &SpatialGrid) -> Vec<bool> {
    let cut = grid.n() as f64 / 3.0;
    (0..grid.len())
        .map(|i| {
            let idx = grid.unravel(i);
            idx.iter().all(|&j| (grid.wave_number(j) as f64).abs() < cut)
        })
        .collect()
}

/// Per-slice data shared by the right side and its derivative identities.
struct Slices<'a> {
    grid: &'a SpatialGrid,
    mask: Vec<bool>,
    jap: Vec<f64>,
}

impl<'a> Slices<'a> {
    fn new(grid: &'a SpatialGrid) -> Self {
        Self {
            mask: dealias_mask(grid),
            jap: (0..grid.len()).map(|k| symbols::japanese(grid.freq_vec(k))).collect(),
            grid,
        }
    }

    fn masked(&self, data: Vec<C64>) -> Vec<C64> {
        data.into_iter()
            .zip(&self.mask)
            .map(|(v, &keep)| if keep { v } else { ZERO })
            .collect()
    }

    fn to_config(&self, spec: Vec<C64>) -> Result<Vec<C64>> {
        Ok(inverse_transform(&Field::from_parts(*self.grid, Repr::Frequency, spec)?)?.into_data())
    }

    fn to_spec(&self, conf: Vec<C64>) -> Result<Vec<C64>> {
        Ok(forward_transform(&Field::from_parts(*self.grid, Repr::Configuration, conf)?)?.into_data())
    }

    /// Spatial derivative `iξ_j` of a spectrum.
    fn dx(&self, spec: &[C64], j: usize) -> Vec<C64> {
        spec.iter()
            .enumerate()
            .map(|(k, v)| C64::new(0.0, self.grid.freq_vec(k)[j]) * v)
            .collect()
    }

    /// `∂_t w = −iJ(u₊ − u₋)`, from the system and `g₊ = −g₋`.
    fn dt(&self, up: &[C64], um: &[C64]) -> Vec<C64> {
        up.iter()
            .zip(um)
            .zip(&self.jap)
            .map(|((a, b), j)| C64::new(0.0, -j) * (a - b))
            .collect()
    }

    /// Dealiased `B_k(w, w)` for one time slice, as a spectrum.
    fn bilinear(&self, up: &[C64], um: &[C64], ns: &NonlinearitySpec) -> Result<Vec<C64>> {
        let w: Vec<C64> = self.masked(up.iter().zip(um).map(|(a, b)| a + b).collect());
        let deriv = |w: &[C64]| match ns.derivative {
            Derivative::T => self.masked(self.dt(up, um)),
            Derivative::X1 => self.dx(w, 0),
            Derivative::X2 => self.dx(w, 1),
            Derivative::X3 => self.dx(w, 2),
        };
        let product = |a: Vec<C64>, b: Vec<C64>| -> Result<Vec<C64>> {
            let (ca, cb) = (self.to_config(a)?, self.to_config(b)?);
            Ok(self.masked(self.to_spec(ca.iter().zip(&cb).map(|(x, y)| x * y).collect())?))
        };
        let out = match (ns.k, ns.derivative) {
            (1, Derivative::T) => product(w.clone(), deriv(&w))?.into_iter().map(|v| 2.0 * v).collect(),
            (1, d) => {
                let sq = product(w.clone(), w)?;
                let j = d as usize - 1;
                self.dx(&sq, j)
            }
            _ => {
                let dw = deriv(&w);
                product(dw.clone(), dw)?
            }
        };
        Ok(out.into_iter().map(|v| ns.strength * v).collect())
    }
}

fn mixed_pair(up: &SpacetimeField, um: &SpacetimeField) -> Result<(SpacetimeField, SpacetimeField)> {
    up.check_grid(um)?;
    Ok((up.to_mixed()?, um.to_mixed()?))
}

/// `B_k(w, w)` with `w = u₊ + u₋`, in mixed `(t, ξ)` form.
pub fn nonlinear_term(up: &SpacetimeField, um: &SpacetimeField, ns: &NonlinearitySpec) -> Result<SpacetimeField> {
    ns.validate()?;
    let (up, um) = mixed_pair(up, um)?;
    let g = *up.grid();
    let sl = Slices::new(g.spatial());
    let slices = par::map_range(g.m(), |m| sl.bilinear(up.slice(m), um.slice(m), ns));
    let mut data = Vec::with_capacity(g.len());
    for s in slices {
        data.extend(s?);
    }
    SpacetimeField::from_parts(g, Repr::Mixed, data)
}

/// Right sides `(g₊, g₋)` of the system in mixed form.
pub fn rhs_eval(
    up: &SpacetimeField,
    um: &SpacetimeField,
    ns: &NonlinearitySpec,
) -> Result<(SpacetimeField, SpacetimeField)> {
    rhs_eval_forced(up, um, ns, None)
}

/// [`rhs_eval`] for `□u = B_k(u, u) + F`; `forcing` is `F` in any form.
pub fn rhs_eval_forced(
    up: &SpacetimeField,
    um: &SpacetimeField,
    ns: &NonlinearitySpec,
    forcing: Option<&SpacetimeField>,
) -> Result<(SpacetimeField, SpacetimeField)> {
    let (upm, umm) = mixed_pair(up, um)?;
    let b = nonlinear_term(&upm, &umm, ns)?;
    let f = match forcing {
        Some(f) => {
            upm.check_grid(f)?;
            Some(f.to_mixed()?)
        }
        None => None,
    };
    let g = *upm.grid();
    let sg = g.spatial();
    let n3 = sg.len();
    let jap: Vec<f64> = (0..n3).map(|k| symbols::japanese(sg.freq_vec(k))).collect();
    let mut gp = b.into_data();
    for (i, v) in gp.iter_mut().enumerate() {
        let w = upm.data()[i] + umm.data()[i];
        let force = f.as_ref().map_or(ZERO, |f| f.data()[i]);
        *v = -(0.25 * *v + 0.5 * w + force) / jap[i % n3];
    }
    let gm: Vec<C64> = gp.iter().map(|v| -v).collect();
    Ok((
        SpacetimeField::from_parts(g, Repr::Mixed, gp)?,
        SpacetimeField::from_parts(g, Repr::Mixed, gm)?,
    ))
}

/// `∂_t u_± = −i(±J u_± + g_±)` in mixed form.
pub fn time_derivative(u: &SpacetimeField, g: &SpacetimeField, sign: Sign) -> Result<SpacetimeField> {
    u.check_grid(g)?;
    let (u, g) = (u.to_mixed()?, g.to_mixed()?);
    let sg = *u.grid().spatial();
    let n3 = sg.len();
    let data = u
        .data()
        .iter()
        .zip(g.data())
        .enumerate()
        .map(|(i, (a, b))| C64::new(0.0, -1.0) * (sign.value() * symbols::japanese(sg.freq_vec(i % n3)) * a + b))
        .collect();
    SpacetimeField::from_parts(*u.grid(), Repr::Mixed, data)
}

/// Solution `u = (u₊ + u₋)/2` and velocity `∂_t u = J(u₊ − u₋)/(2i)`.
pub fn reconstruct(up: &SpacetimeField, um: &SpacetimeField) -> Result<(SpacetimeField, SpacetimeField)> {
    let (up, um) = mixed_pair(up, um)?;
    let half = C64::new(0.5, 0.0);
    let u = up.combine(half, &um, half)?;
    let sg = *up.grid().spatial();
    let n3 = sg.len();
    let data = up
        .data()
        .iter()
        .zip(um.data())
        .enumerate()
        .map(|(i, (a, b))| symbols::japanese(sg.freq_vec(i % n3)) * (a - b) / C64::new(0.0, 2.0))
        .collect();
    Ok((u, SpacetimeField::from_parts(*up.grid(), Repr::Mixed, data)?))
}
