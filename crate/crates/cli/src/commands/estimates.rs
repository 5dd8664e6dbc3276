//! Ratio sweeps for the bilinear estimates and the extremizer search.

use qwlab::spaces::check_lebesgue;
use qwlab::verify::{
    check_key_estimate, check_lowfreq_young, check_strichartz_l2, extremizer_search, sharpness_probe, DataFamily,
    EstimateReport, ExtremizeParams, FamilyKind, NelderMeadOptions, VerifyParams,
};
use serde::{Deserialize, Serialize};

use super::{check_families, check_positive, ensure, gaussian, parse_signs, Command, LatticeCfg};
use crate::config::Common;
use crate::error::CliError;
use crate::outcome::{num, opt, Outcome, Table};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Case {
    pub r: f64,
    pub sigma: f64,
    /// Defaults to `1/r + 0.05`.
    #[serde(default)]
    pub b: Option<f64>,
}

impl Case {
    fn new(r: f64, sigma: f64, b: f64) -> Self {
        Self { r, sigma, b: Some(b) }
    }

    fn b(&self) -> f64 {
        self.b.unwrap_or(1.0 / self.r + 0.05)
    }

    fn check(&mut self, above_threshold: bool) -> Result<(), CliError> {
        check_lebesgue(self.r)?;
        ensure(!above_threshold || self.sigma > 2.0 / self.r, || {
            format!("sigma = {} must exceed 2/r = {}", self.sigma, 2.0 / self.r)
        })?;
        let b = self.b();
        ensure(b > 1.0 / self.r && b < 1.0, || {
            format!("b = {b} must lie in (1/r, 1) for r = {}", self.r)
        })?;
        self.b = Some(b);
        Ok(())
    }
}

fn sample_rows(table: &mut Table, prefix: &[String], r: &EstimateReport) {
    for s in &r.samples {
        let mut row = prefix.to_vec();
        row.extend([num(s.x), num(s.lhs), num(s.rhs), opt(s.ratio)]);
        table.push(row);
    }
}

fn family_tag(i: usize, f: &DataFamily) -> String {
    format!("{i}:{}", f.kind.name())
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KeyCmd {
    pub lambdas: Vec<f64>,
    /// Ladder for the windowed form; empty skips it.
    pub full_lambdas: Vec<f64>,
    pub signs: Vec<String>,
    pub lattice: LatticeCfg,
    pub cases: Vec<Case>,
    pub families: Vec<DataFamily>,
}

impl Default for KeyCmd {
    fn default() -> Self {
        Self {
            lambdas: vec![2.0, 4.0, 8.0, 16.0],
            full_lambdas: Vec::new(),
            signs: vec!["++".into(), "+-".into()],
            lattice: LatticeCfg::default(),
            cases: vec![Case::new(2.0, 1.25, 0.55), Case::new(1.5, 1.4, 0.72)],
            families: vec![gaussian(), DataFamily::shell(1.0, 0.15)],
        }
    }
}

impl Command for KeyCmd {
    fn columns() -> &'static [&'static str] {
        &[
            "r", "sigma", "b", "signs", "family", "form", "lambda", "lhs", "rhs", "ratio",
        ]
    }

    fn prepare(&mut self, _: &Common) -> Result<(), CliError> {
        ensure(!self.cases.is_empty(), || "cases must not be empty".into())?;
        for c in &mut self.cases {
            c.check(true)?;
        }
        parse_signs(&self.signs)?;
        check_families(&self.families)?;
        check_positive("lambdas", &self.lambdas, 2)?;
        check_positive("full_lambdas", &self.full_lambdas, 0)?;
        ensure(self.full_lambdas.is_empty() || self.full_lambdas.len() >= 3, || {
            "full_lambdas needs at least 3 entries for a slope fit".into()
        })?;
        let fams: Vec<&DataFamily> = self.families.iter().collect();
        self.lattice.validate(&self.lambdas, &fams)?;
        self.lattice.validate(&self.full_lambdas, &fams)
    }

    fn execute(&self, _: &Common, out: &mut Outcome) -> Result<(), CliError> {
        for c in &self.cases {
            for sp in parse_signs(&self.signs)? {
                for (i, fam) in self.families.iter().enumerate() {
                    let p = VerifyParams::new(c.r, c.sigma, *fam)
                        .with_b(c.b())
                        .with_signs(sp)
                        .with_lambdas(self.lambdas.clone())
                        .with_lattice(self.lattice.spec());
                    let k = check_key_estimate(&p, &self.full_lambdas)?;
                    let tag = family_tag(i, fam);
                    let name = format!(
                        "key r={} sigma={} b={} signs={} family={tag}",
                        c.r,
                        c.sigma,
                        c.b(),
                        sp.name()
                    );
                    let prefix = |form: &str| {
                        vec![
                            num(c.r),
                            num(c.sigma),
                            num(c.b()),
                            sp.name(),
                            tag.clone(),
                            form.to_string(),
                        ]
                    };
                    sample_rows(&mut out.table, &prefix("free"), &k.free);
                    out.estimate(&name, &k.free);
                    if let Some(full) = &k.full {
                        sample_rows(&mut out.table, &prefix("full"), full);
                        out.estimate(&format!("{name} windowed"), full);
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SharpnessCmd {
    pub r: f64,
    /// Regularities probed; below `2/r` growth is required, at or above it
    /// the ratio must stay flat.
    pub sigmas: Vec<f64>,
    pub lambdas: Vec<f64>,
    pub lattice: LatticeCfg,
    pub families: Vec<DataFamily>,
}

impl Default for SharpnessCmd {
    fn default() -> Self {
        Self {
            r: 2.0,
            sigmas: vec![0.5, 1.25],
            lambdas: vec![2.0, 4.0, 8.0, 16.0],
            lattice: LatticeCfg::default(),
            families: vec![gaussian()],
        }
    }
}

impl Command for SharpnessCmd {
    fn columns() -> &'static [&'static str] {
        &["r", "sigma", "family", "lambda", "lhs", "rhs", "ratio"]
    }

    fn prepare(&mut self, _: &Common) -> Result<(), CliError> {
        check_lebesgue(self.r)?;
        ensure(
            !self.sigmas.is_empty() && self.sigmas.iter().all(|s| s.is_finite()),
            || "sigmas must be a non-empty list of numbers".into(),
        )?;
        check_families(&self.families)?;
        check_positive("lambdas", &self.lambdas, 3)?;
        self.lattice
            .validate(&self.lambdas, &self.families.iter().collect::<Vec<_>>())
    }

    fn execute(&self, _: &Common, out: &mut Outcome) -> Result<(), CliError> {
        for &sigma in &self.sigmas {
            for (i, fam) in self.families.iter().enumerate() {
                let p = VerifyParams::new(self.r, sigma, *fam)
                    .with_lambdas(self.lambdas.clone())
                    .with_lattice(self.lattice.spec());
                let rep = sharpness_probe(&p)?;
                let tag = family_tag(i, fam);
                sample_rows(&mut out.table, &[num(self.r), num(sigma), tag.clone()], &rep);
                out.estimate(&format!("sharpness r={} sigma={sigma} family={tag}", self.r), &rep);
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LowfreqCmd {
    pub r: f64,
    pub sigma: f64,
    pub signs: Vec<String>,
    /// Frequency scale of the data; the data must stay in `|ξ| ≤ 1`.
    pub lambda: f64,
    /// Random draws, seeded `seed, seed + 1, …`.
    pub samples: usize,
    pub lattice: LatticeCfg,
    pub family: DataFamily,
}

impl Default for LowfreqCmd {
    fn default() -> Self {
        Self {
            r: 2.0,
            sigma: 1.25,
            signs: vec!["++".into(), "+-".into()],
            lambda: 1.0,
            samples: 8,
            lattice: LatticeCfg {
                half_len: Some(3.0 * std::f64::consts::PI),
                ..LatticeCfg::default()
            },
            family: DataFamily::random([0.0; 3], 1.0, 0),
        }
    }
}

impl Command for LowfreqCmd {
    fn columns() -> &'static [&'static str] {
        &["r", "sigma", "signs", "seed", "lhs", "rhs", "ratio"]
    }

    fn prepare(&mut self, _: &Common) -> Result<(), CliError> {
        check_lebesgue(self.r)?;
        parse_signs(&self.signs)?;
        check_families(std::slice::from_ref(&self.family))?;
        check_positive("lambda", &[self.lambda], 1)?;
        ensure(self.samples >= 2, || "samples must be at least 2".into())?;
        self.lattice.validate(&[self.lambda], &[&self.family])
    }

    fn execute(&self, common: &Common, out: &mut Outcome) -> Result<(), CliError> {
        let seeds: Vec<u64> = (0..self.samples as u64).map(|i| common.seed.wrapping_add(i)).collect();
        for sp in parse_signs(&self.signs)? {
            let p = VerifyParams::new(self.r, self.sigma, self.family)
                .with_signs(sp)
                .with_lambdas(vec![self.lambda])
                .with_lattice(self.lattice.spec());
            let rep = check_lowfreq_young(&p, &seeds)?;
            sample_rows(&mut out.table, &[num(self.r), num(self.sigma), sp.name()], &rep);
            out.estimate(
                &format!("lowfreq r={} sigma={} signs={}", self.r, self.sigma, sp.name()),
                &rep,
            );
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StrichartzCmd {
    /// `(σ₁, σ₂)` pairs; bounded when `σ₁ + σ₂ > 1`, else a slope check.
    pub pairs: Vec<[f64; 2]>,
    pub lambdas: Vec<f64>,
    pub lattice: LatticeCfg,
    pub families: Vec<DataFamily>,
}

impl Default for StrichartzCmd {
    fn default() -> Self {
        Self {
            pairs: vec![[0.55, 0.55], [0.4, 0.4]],
            lambdas: vec![2.0, 4.0, 8.0, 16.0],
            lattice: LatticeCfg::default(),
            families: vec![gaussian()],
        }
    }
}

impl Command for StrichartzCmd {
    fn columns() -> &'static [&'static str] {
        &["sigma1", "sigma2", "family", "lambda", "lhs", "rhs", "ratio"]
    }

    fn prepare(&mut self, _: &Common) -> Result<(), CliError> {
        ensure(!self.pairs.is_empty(), || "pairs must not be empty".into())?;
        if let Some(p) = self.pairs.iter().find(|p| !(p[0] >= 0.0 && p[1] >= 0.0)) {
            return Err(CliError::config(format!(
                "Strichartz exponents {p:?} must be nonnegative"
            )));
        }
        check_families(&self.families)?;
        check_positive("lambdas", &self.lambdas, 3)?;
        self.lattice
            .validate(&self.lambdas, &self.families.iter().collect::<Vec<_>>())
    }

    fn execute(&self, _: &Common, out: &mut Outcome) -> Result<(), CliError> {
        for &[s1, s2] in &self.pairs {
            for (i, fam) in self.families.iter().enumerate() {
                // r and σ are not used by the L² check
                let p = VerifyParams::new(2.0, s1.max(s2), *fam)
                    .with_lambdas(self.lambdas.clone())
                    .with_lattice(self.lattice.spec());
                let rep = check_strichartz_l2(s1, s2, &p)?;
                let tag = family_tag(i, fam);
                sample_rows(&mut out.table, &[num(s1), num(s2), tag.clone()], &rep);
                out.estimate(&format!("strichartz sigma1={s1} sigma2={s2} family={tag}"), &rep);
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtremizeCmd {
    pub r: f64,
    pub sigma: f64,
    pub signs: String,
    pub lambda: f64,
    pub lattice: LatticeCfg,
    /// Box for `(|ξ₀|, width, anisotropy)`, in units of `λ`.
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub kinds: Vec<FamilyKind>,
    /// Start point; its seed is replaced by the run seed.
    pub start: DataFamily,
    pub max_evals: usize,
    pub ftol: f64,
    pub xtol: f64,
    pub initial_step: f64,
}

impl Default for ExtremizeCmd {
    fn default() -> Self {
        let p = ExtremizeParams::new(2.0, 1.25, DataFamily::gaussian([0.0, 0.0, 0.5], 0.15));
        let o = NelderMeadOptions::default();
        Self {
            r: p.r,
            sigma: p.sigma,
            signs: "++".into(),
            lambda: p.lambda,
            lattice: LatticeCfg::default(),
            lo: p.lo,
            // Gaussian bumps at the far corner reach 2λ, inside the band of
            // the default 16-point lattice
            hi: [0.8, 0.2, 2.0],
            kinds: p.kinds,
            start: p.seed_family,
            max_evals: o.max_evals,
            ftol: o.ftol,
            xtol: o.xtol,
            initial_step: o.initial_step,
        }
    }
}

impl ExtremizeCmd {
    fn params(&self, seed: u64) -> Result<ExtremizeParams, CliError> {
        let signs = parse_signs(std::slice::from_ref(&self.signs))?[0];
        Ok(ExtremizeParams {
            signs,
            lambda: self.lambda,
            lattice: self.lattice.spec(),
            lo: self.lo,
            hi: self.hi,
            kinds: self.kinds.clone(),
            options: NelderMeadOptions {
                max_evals: self.max_evals,
                ftol: self.ftol,
                xtol: self.xtol,
                initial_step: self.initial_step,
            },
            ..ExtremizeParams::new(self.r, self.sigma, self.start.with_seed(seed))
        })
    }
}

impl Command for ExtremizeCmd {
    fn columns() -> &'static [&'static str] {
        &[
            "kind",
            "start_center",
            "start_width",
            "start_anisotropy",
            "center",
            "width",
            "anisotropy",
            "ratio",
            "evals",
            "converged",
        ]
    }

    fn prepare(&mut self, common: &Common) -> Result<(), CliError> {
        check_lebesgue(self.r)?;
        ensure(self.sigma > 2.0 / self.r, || {
            format!("sigma = {} must exceed 2/r", self.sigma)
        })?;
        ensure(!self.kinds.is_empty(), || "kinds must not be empty".into())?;
        ensure((0..3).all(|i| self.lo[i] > 0.0 && self.lo[i] <= self.hi[i]), || {
            format!("box {:?}..{:?} must be positive and ordered", self.lo, self.hi)
        })?;
        ensure(
            self.max_evals > 0 && self.ftol > 0.0 && self.xtol > 0.0 && self.initial_step > 0.0,
            || "optimizer budget and tolerances must be positive".into(),
        )?;
        check_families(std::slice::from_ref(&self.start))?;
        check_positive("lambda", &[self.lambda], 1)?;
        // the largest data in the box: center and width at their upper ends
        let p = self.params(common.seed)?;
        let corner: Vec<DataFamily> = p.kinds.iter().map(|k| p.family_at(*k, &self.hi)).collect();
        self.lattice
            .validate(&[self.lambda], &corner.iter().collect::<Vec<_>>())
    }

    fn execute(&self, common: &Common, out: &mut Outcome) -> Result<(), CliError> {
        let res = extremizer_search(&self.params(common.seed)?)?;
        let mut trace = Table::new(&["kind", "step", "best"]);
        for r in &res.restarts {
            out.table.push(vec![
                r.kind.name().into(),
                num(r.start[0]),
                num(r.start[1]),
                num(r.start[2]),
                num(r.best[0]),
                num(r.best[1]),
                num(r.best[2]),
                num(r.value),
                r.evals.to_string(),
                r.converged.to_string(),
            ]);
            for (i, v) in r.trace.iter().enumerate() {
                trace.push(vec![r.kind.name().into(), i.to_string(), num(*v)]);
            }
            let monotone = r.trace.windows(2).all(|w| w[1] >= w[0]);
            out.check(
                format!("extremize {} best value never decreases", r.kind.name()),
                monotone,
                Some(r.value),
                "trace nondecreasing",
            );
        }
        out.check(
            "extremize best ratio positive and finite",
            res.best_ratio.is_finite() && res.best_ratio > 0.0,
            Some(res.best_ratio),
            "0 < ratio < inf",
        );
        out.extra.push(("trace".into(), trace));
        out.detail("best_kind", res.best_kind)?;
        out.detail("best", res.best)?;
        out.detail("best_ratio", res.best_ratio)?;
        out.detail("converged", res.converged)?;
        Ok(())
    }
}
