//! Local solver runs and the flow-map Lipschitz study.

use std::path::{Path, PathBuf};

use qwlab::io::Stored;
use qwlab::solver::{
    delta_table, from_first_order, lipschitz_study, manufactured_study, reconstruct, solve_local, to_first_order,
    CauchyData, Derivative, LipschitzReport, NonlinearitySpec, PicardStatus, SolveConfig,
};
use qwlab::verify::DataFamily;
use qwlab::{forward_transform, Repr, SpatialGrid, Spectrum};
use serde::{Deserialize, Serialize};

use super::{check_positive, ensure, Command};
use crate::config::Common;
use crate::error::CliError;
use crate::outcome::{num, opt, Outcome, Table};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridCfg {
    pub n: usize,
    /// Spatial half-length.
    pub l: f64,
    /// Time samples on `[-2δ, 2δ)`.
    pub m: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationCfg {
    pub k: u8,
    pub derivative: Derivative,
    pub strength: f64,
    pub r: f64,
    pub s: f64,
    /// Defaults to `min(1/r + 0.05, 0.99)`.
    #[serde(default)]
    pub b: Option<f64>,
    pub delta: f64,
    pub max_iter: usize,
    pub tol: f64,
}

impl EquationCfg {
    fn new(k: u8, derivative: Derivative, delta: f64) -> Self {
        Self {
            k,
            derivative,
            strength: 1.0,
            r: 2.0,
            s: 2.5,
            b: None,
            delta,
            max_iter: 40,
            tol: 1e-10,
        }
    }

    fn nonlinearity(&self) -> Result<NonlinearitySpec, CliError> {
        let ns = NonlinearitySpec::new(self.k, self.derivative)?.with_strength(self.strength);
        ns.validate()?;
        Ok(ns)
    }

    fn solve_config(&self, grid: &GridCfg, spatial: SpatialGrid) -> Result<SolveConfig, CliError> {
        let mut cfg = SolveConfig::new(spatial, grid.m, self.delta, self.r, self.s)?;
        if let Some(b) = self.b {
            cfg = cfg.with_b(b)?;
        }
        Ok(cfg.with_budget(self.max_iter, self.tol))
    }

    /// Fills in `b` so the echoed configuration is complete.
    fn materialize(&mut self, cfg: &SolveConfig) {
        self.b = Some(cfg.b);
    }
}

fn small_data(amplitude: f64) -> (DataFamily, DataFamily) {
    (
        DataFamily::gaussian([0.0, 0.0, 0.0], 0.5).with_amplitude(amplitude),
        DataFamily::gaussian([0.3, 0.0, 0.0], 0.4).with_amplitude(0.5 * amplitude),
    )
}

/// Cauchy data from families at unit scale or from field containers. A
/// container path takes precedence over the family of the same slot.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataCfg {
    #[serde(default)]
    pub u0: Option<DataFamily>,
    #[serde(default)]
    pub u1: Option<DataFamily>,
    #[serde(default)]
    pub u0_path: Option<PathBuf>,
    #[serde(default)]
    pub u1_path: Option<PathBuf>,
}

fn load_spectrum(path: &Path) -> Result<Spectrum, CliError> {
    let f = qwlab::io::read_field(path).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    Ok(match f.repr() {
        Repr::Frequency => f,
        _ => forward_transform(&f)?,
    })
}

impl DataCfg {
    fn families(amplitude: f64) -> Self {
        let (u0, u1) = small_data(amplitude);
        Self {
            u0: Some(u0),
            u1: Some(u1),
            u0_path: None,
            u1_path: None,
        }
    }

    /// Builds the data; `grid` is replaced by the grid of loaded files.
    fn load(&mut self, grid: &mut GridCfg, r: f64, s: f64) -> Result<CauchyData, CliError> {
        let u0 = self.u0_path.as_deref().map(load_spectrum).transpose()?;
        let u1 = self.u1_path.as_deref().map(load_spectrum).transpose()?;
        if let Some(f) = u0.as_ref().or(u1.as_ref()) {
            grid.n = f.grid().n();
            grid.l = f.grid().half_len();
        }
        let spatial = SpatialGrid::new(grid.n, grid.l)?;
        let from = |path: Option<Spectrum>, fam: &mut Option<DataFamily>| -> Result<Spectrum, CliError> {
            if let Some(f) = path {
                *fam = None;
                return Ok(f);
            }
            match fam {
                Some(f) => {
                    f.validate()?;
                    Ok(f.spectrum(&spatial, 1.0)?)
                }
                None => Ok(qwlab::Field::zeros(spatial, Repr::Frequency)),
            }
        };
        let a = from(u0, &mut self.u0)?;
        let b = from(u1, &mut self.u1)?;
        Ok(CauchyData::new(a, b, r, s)?)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Contraction factors from this iterate on must stay below `rho_max`.
    pub rho_from: usize,
    pub rho_max: f64,
    pub residual: f64,
    pub reconstruction: f64,
    pub persistence: f64,
    pub roundtrip: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rho_from: 1,
            rho_max: 0.5,
            residual: 1e-3,
            reconstruction: 1e-3,
            persistence: 0.05,
            roundtrip: 1e-12,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManufacturedCfg {
    pub enabled: bool,
    pub amplitude: f64,
    /// Time resolutions, each double the previous.
    pub ms: Vec<usize>,
    /// Required residual reduction per doubling.
    pub min_ratio: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveCmd {
    pub grid: GridCfg,
    pub equation: EquationCfg,
    pub data: DataCfg,
    pub tolerances: Tolerances,
    pub manufactured: ManufacturedCfg,
    /// Also write the data and the solution `u` as field containers.
    pub write_fields: bool,
    #[serde(skip)]
    loaded: Option<(CauchyData, SolveConfig)>,
}

impl Default for SolveCmd {
    fn default() -> Self {
        Self {
            grid: GridCfg { n: 32, l: 16.0, m: 64 },
            equation: EquationCfg::new(1, Derivative::X1, 0.25),
            data: DataCfg::families(1e-2),
            tolerances: Tolerances::default(),
            manufactured: ManufacturedCfg {
                enabled: true,
                amplitude: 0.05,
                ms: vec![64, 128],
                min_ratio: 3.0,
            },
            write_fields: true,
            loaded: None,
        }
    }
}

fn max_rel_diff(a: &Spectrum, b: &Spectrum) -> f64 {
    let top = a.max_abs();
    let d = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max);
    if top > 0.0 {
        d / top
    } else {
        d
    }
}

impl Command for SolveCmd {
    fn columns() -> &'static [&'static str] {
        &["n", "sup_distance", "restricted_distance", "rho"]
    }

    fn prepare(&mut self, _: &Common) -> Result<(), CliError> {
        self.equation.nonlinearity()?;
        let data = self.data.load(&mut self.grid, self.equation.r, self.equation.s)?;
        let cfg = self.equation.solve_config(&self.grid, *data.u0.grid())?;
        self.equation.materialize(&cfg);
        let t = &self.tolerances;
        check_positive(
            "tolerances",
            &[t.rho_max, t.residual, t.reconstruction, t.persistence, t.roundtrip],
            5,
        )?;
        let mf = &self.manufactured;
        if mf.enabled {
            ensure(mf.ms.len() >= 2, || {
                "manufactured.ms needs at least two resolutions".into()
            })?;
            ensure(mf.amplitude > 0.0 && mf.min_ratio > 0.0, || {
                "manufactured amplitude and min_ratio must be positive".into()
            })?;
            for &m in &mf.ms {
                cfg.with_m(m)?;
            }
        }
        self.loaded = Some((data, cfg));
        Ok(())
    }

    fn execute(&self, _: &Common, out: &mut Outcome) -> Result<(), CliError> {
        let (data, cfg) = self.loaded.as_ref().expect("prepared");
        let ns = self.equation.nonlinearity()?;
        let t = &self.tolerances;
        let (fp, fm) = to_first_order(data)?;
        let (u0, u1) = from_first_order(&fp, &fm)?;
        let roundtrip = max_rel_diff(&data.u0, &u0).max(max_rel_diff(&data.u1, &u1));
        out.check(
            "first-order roundtrip",
            roundtrip <= t.roundtrip,
            Some(roundtrip),
            format!("<= {}", t.roundtrip),
        );

        let rep = solve_local(&fp, &fm, &ns, cfg)?;
        for s in &rep.steps {
            out.table.push(vec![
                s.n.to_string(),
                num(s.sup_distance),
                num(s.restricted_distance),
                opt(s.rho),
            ]);
        }
        out.check(
            "picard converged",
            rep.status == PicardStatus::Converged,
            Some(rep.solution.iterations() as f64),
            format!("distance <= {} within {} iterations", cfg.tol, cfg.max_iter),
        );
        let rho = rep.solution.max_rho(t.rho_from);
        out.check(
            format!("contraction factor from iterate {}", t.rho_from),
            rep.status == PicardStatus::Converged && rho.is_none_or(|r| r < t.rho_max),
            rho,
            format!("< {}", t.rho_max),
        );
        let res = rep.residual.as_ref().and_then(|r| r.relative);
        out.check(
            "wave residual",
            res.is_some_and(|r| r < t.residual),
            res,
            format!("relative < {}", t.residual),
        );
        out.check(
            "reconstruction identity",
            rep.reconstruction_defect.is_some_and(|d| d < t.reconstruction),
            rep.reconstruction_defect,
            format!("< {}", t.reconstruction),
        );
        let jump = rep.persistence.as_ref().map(|p| p.max_jump);
        out.check(
            "persistence in the data space",
            jump.is_some_and(|j| j < t.persistence),
            jump,
            format!("relative jump < {}", t.persistence),
        );
        if let Some(p) = &rep.persistence {
            let mut tab = Table::new(&["t", "norm_plus", "norm_minus"]);
            for ((t, a), b) in p.times.iter().zip(&p.plus).zip(&p.minus) {
                tab.push(vec![num(*t), num(*a), num(*b)]);
            }
            out.extra.push(("persistence".into(), tab));
        }
        out.detail("status", rep.status)?;
        out.detail("iterations", rep.solution.iterations())?;
        out.detail("residual", &rep.residual)?;
        out.detail("x_norms", rep.x_norms)?;
        out.detail("z_norms", rep.z_norms)?;
        out.detail("roundtrip", roundtrip)?;

        if self.manufactured.enabled {
            let mf = &self.manufactured;
            let st = manufactured_study(&ns, cfg, mf.amplitude, &mf.ms, mf.min_ratio)?;
            let mut tab = Table::new(&[
                "m",
                "dt",
                "residual",
                "error",
                "iterations",
                "status",
                "reconstruction_defect",
            ]);
            for r in &st.rows {
                tab.push(vec![
                    r.m.to_string(),
                    num(r.dt),
                    num(r.residual),
                    num(r.error),
                    r.iterations.to_string(),
                    serde_json::to_value(r.status)?.as_str().unwrap_or_default().to_string(),
                    opt(r.reconstruction_defect),
                ]);
            }
            out.extra.push(("manufactured".into(), tab));
            let worst = st.ratios.iter().cloned().fold(f64::INFINITY, f64::min);
            out.check(
                "manufactured residual order",
                st.passed,
                worst.is_finite().then_some(worst),
                format!("reduction per doubling >= {}", mf.min_ratio),
            );
            out.detail("manufactured_ratios", &st.ratios)?;
        }

        if self.write_fields {
            out.fields.push(("u0".into(), Stored::Spatial(data.u0.clone())));
            out.fields.push(("u1".into(), Stored::Spatial(data.u1.clone())));
            if rep.status == PicardStatus::Converged {
                let (u, _) = reconstruct(&rep.solution.u_plus, &rep.solution.u_minus)?;
                out.fields.push(("solution".into(), Stored::Spacetime(u)));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeltaTableCfg {
    pub enabled: bool,
    pub scales: Vec<f64>,
    pub rho_max: f64,
    pub u0: DataFamily,
    pub u1: DataFamily,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LipschitzCmd {
    pub grid: GridCfg,
    pub equation: EquationCfg,
    pub pairs: usize,
    /// Amplitude and width of the random data of each pair.
    pub amplitude: f64,
    pub width: f64,
    /// Perturbation size; the study repeats at half of it.
    pub eps: f64,
    pub delta_table: DeltaTableCfg,
}

impl Default for LipschitzCmd {
    fn default() -> Self {
        let (u0, u1) = small_data(0.5);
        Self {
            grid: GridCfg { n: 16, l: 8.0, m: 32 },
            equation: EquationCfg::new(1, Derivative::X1, 0.25),
            pairs: 8,
            amplitude: 0.05,
            width: 1.5,
            eps: 1e-3,
            delta_table: DeltaTableCfg {
                enabled: true,
                scales: vec![1.0, 2.0, 4.0, 8.0],
                rho_max: 0.5,
                u0,
                u1,
            },
        }
    }
}

impl LipschitzCmd {
    fn config(&self) -> Result<SolveConfig, CliError> {
        self.equation
            .solve_config(&self.grid, SpatialGrid::new(self.grid.n, self.grid.l)?)
    }
}

fn pair_rows(table: &mut Table, level: &str, eps: f64, r: &LipschitzReport) {
    for row in &r.rows {
        table.push(vec![
            level.into(),
            num(eps),
            row.index.to_string(),
            num(row.data_distance),
            opt(row.solution_distance),
            opt(row.ratio),
            opt(row.x_ratio),
            row.flagged.to_string(),
        ]);
    }
}

impl Command for LipschitzCmd {
    fn columns() -> &'static [&'static str] {
        &[
            "level",
            "eps",
            "pair",
            "data_distance",
            "solution_distance",
            "ratio",
            "x_ratio",
            "flagged",
        ]
    }

    fn prepare(&mut self, _: &Common) -> Result<(), CliError> {
        self.equation.nonlinearity()?;
        let cfg = self.config()?;
        self.equation.materialize(&cfg);
        ensure(self.pairs > 0, || "pairs must be positive".into())?;
        check_positive("amplitude, width, eps", &[self.amplitude, self.width, self.eps], 3)?;
        let d = &self.delta_table;
        if d.enabled {
            check_positive("delta_table.scales", &d.scales, 2)?;
            ensure(d.rho_max > 0.0 && d.rho_max < 1.0, || {
                "delta_table.rho_max must lie in (0, 1)".into()
            })?;
            d.u0.validate()?;
            d.u1.validate()?;
        }
        Ok(())
    }

    fn execute(&self, common: &Common, out: &mut Outcome) -> Result<(), CliError> {
        let cfg = self.config()?;
        let ns = self.equation.nonlinearity()?;
        let st = lipschitz_study(&ns, &cfg, self.pairs, self.amplitude, self.width, self.eps, common.seed)?;
        pair_rows(&mut out.table, "coarse", self.eps, &st.coarse);
        pair_rows(&mut out.table, "fine", 0.5 * self.eps, &st.fine);
        out.check(
            "lipschitz ratio stable under halving eps",
            st.passed,
            st.stability,
            "|fine/coarse - 1| <= 0.3, no flagged pairs",
        );
        out.detail("coarse_max_ratio", st.coarse.max_ratio)?;
        out.detail("fine_max_ratio", st.fine.max_ratio)?;
        out.detail("flagged", st.coarse.flagged + st.fine.flagged)?;

        let d = &self.delta_table;
        if d.enabled {
            let spatial = *cfg.grid.spatial();
            let data = CauchyData::from_families(&spatial, &d.u0, Some(&d.u1), cfg.r, cfg.s)?;
            let (rows, monotone) = delta_table(&data, &d.scales, &ns, &cfg, d.rho_max)?;
            let mut tab = Table::new(&["scale", "data_norm", "delta", "rho1", "halvings"]);
            for r in &rows {
                let c = &r.choice;
                tab.push(vec![
                    num(r.scale),
                    num(c.data_norm),
                    num(c.delta),
                    opt(c.rho1),
                    c.halvings.to_string(),
                ]);
            }
            out.extra.push(("delta".into(), tab));
            let last = rows.last().map(|r| r.choice.delta);
            out.check(
                "delta nonincreasing in data size",
                monotone,
                last,
                "delta(scale) nonincreasing",
            );
        }
        Ok(())
    }
}
