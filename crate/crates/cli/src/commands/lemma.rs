//! `lemma` suites: the elliptic and hyperbolic product lemmas, far-region
//! mass scaling, dyadic shell masses and the surface cross-validation.

use qwlab::bilinear::SurfaceOptions;
use qwlab::dyadic::{shell_surface_mass, DyadicIndex};
use qwlab::spaces::check_lebesgue;
use qwlab::verify::{
    check_elliptic_lemma, check_hyperbolic_lemmas, fit_log2, q_region_scaling, surface_cross_validation, DataFamily,
    QScalingParams, VerifyParams,
};
use serde::{Deserialize, Serialize};

use super::{check_families, check_positive, ensure, gaussian, parse_signs, Command, LatticeCfg};
use crate::config::Common;
use crate::error::CliError;
use crate::outcome::{num, opt, Outcome};

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Regularity {
    pub r: f64,
    pub sigma: f64,
}

impl Regularity {
    fn check(&self) -> Result<(), CliError> {
        check_lebesgue(self.r)?;
        ensure(self.sigma > 2.0 / self.r, || {
            format!("sigma = {} must exceed 2/r = {}", self.sigma, 2.0 / self.r)
        })
    }
}

fn default_cases() -> Vec<Regularity> {
    vec![Regularity { r: 2.0, sigma: 1.25 }, Regularity { r: 1.5, sigma: 1.4 }]
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EllipticCmd {
    pub cases: Vec<Regularity>,
    pub lambdas: Vec<f64>,
    pub lattice: LatticeCfg,
    pub families: Vec<DataFamily>,
}

impl Default for EllipticCmd {
    fn default() -> Self {
        Self {
            cases: default_cases(),
            lambdas: vec![2.0, 4.0, 8.0, 16.0],
            lattice: LatticeCfg::default(),
            families: vec![gaussian()],
        }
    }
}

impl Command for EllipticCmd {
    fn columns() -> &'static [&'static str] {
        &["r", "sigma", "family", "lambda", "lhs", "rhs", "ratio"]
    }

    fn prepare(&mut self, _: &Common) -> Result<(), CliError> {
        ensure(!self.cases.is_empty(), || "cases must not be empty".into())?;
        self.cases.iter().try_for_each(Regularity::check)?;
        check_families(&self.families)?;
        check_positive("lambdas", &self.lambdas, 2)?;
        self.lattice
            .validate(&self.lambdas, &self.families.iter().collect::<Vec<_>>())
    }

    fn execute(&self, _: &Common, out: &mut Outcome) -> Result<(), CliError> {
        for c in &self.cases {
            for (i, fam) in self.families.iter().enumerate() {
                let p = VerifyParams::new(c.r, c.sigma, *fam)
                    .with_lambdas(self.lambdas.clone())
                    .with_lattice(self.lattice.spec());
                let rep = check_elliptic_lemma(&p)?;
                let tag = format!("{i}:{}", fam.kind.name());
                for s in &rep.samples {
                    out.table.push(vec![
                        num(c.r),
                        num(c.sigma),
                        tag.clone(),
                        num(s.x),
                        num(s.lhs),
                        num(s.rhs),
                        opt(s.ratio),
                    ]);
                }
                out.estimate(&format!("elliptic r={} sigma={} family={tag}", c.r, c.sigma), &rep);
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HyperbolicCmd {
    pub cases: Vec<Regularity>,
    pub lambdas: Vec<f64>,
    pub lattice: LatticeCfg,
    pub families: Vec<DataFamily>,
    /// Data of the second wave; the first family when absent.
    pub partner: Option<DataFamily>,
    /// Largest relative defect of near + far against the full product.
    pub partition_tol: f64,
}

impl Default for HyperbolicCmd {
    fn default() -> Self {
        Self {
            cases: default_cases(),
            lambdas: vec![2.0, 4.0, 8.0, 16.0],
            lattice: LatticeCfg::default(),
            families: vec![gaussian()],
            partner: None,
            partition_tol: 1e-10,
        }
    }
}

impl Command for HyperbolicCmd {
    fn columns() -> &'static [&'static str] {
        &["r", "sigma", "family", "region", "lambda", "lhs", "rhs", "ratio"]
    }

    fn prepare(&mut self, _: &Common) -> Result<(), CliError> {
        ensure(!self.cases.is_empty(), || "cases must not be empty".into())?;
        self.cases.iter().try_for_each(Regularity::check)?;
        check_families(&self.families)?;
        let mut all: Vec<&DataFamily> = self.families.iter().collect();
        if let Some(p) = &self.partner {
            check_families(std::slice::from_ref(p))?;
            all.push(p);
        }
        ensure(self.partition_tol > 0.0, || "partition_tol must be positive".into())?;
        check_positive("lambdas", &self.lambdas, 2)?;
        self.lattice.validate(&self.lambdas, &all)
    }

    fn execute(&self, _: &Common, out: &mut Outcome) -> Result<(), CliError> {
        for c in &self.cases {
            for (i, fam) in self.families.iter().enumerate() {
                let mut p = VerifyParams::new(c.r, c.sigma, *fam)
                    .with_lambdas(self.lambdas.clone())
                    .with_lattice(self.lattice.spec());
                if let Some(partner) = self.partner {
                    p = p.with_partner(partner);
                }
                let h = check_hyperbolic_lemmas(&p)?;
                let tag = format!("{i}:{}", fam.kind.name());
                let name = format!("hyperbolic r={} sigma={} family={tag}", c.r, c.sigma);
                for (region, rep) in [("near", &h.p), ("far", &h.q)] {
                    for s in &rep.samples {
                        out.table.push(vec![
                            num(c.r),
                            num(c.sigma),
                            tag.clone(),
                            region.into(),
                            num(s.x),
                            num(s.lhs),
                            num(s.rhs),
                            opt(s.ratio),
                        ]);
                    }
                    out.estimate(&format!("{name} {region}"), rep);
                }
                out.check(
                    format!("{name} near + far = full"),
                    h.partition_defect <= self.partition_tol,
                    Some(h.partition_defect),
                    format!("defect <= {}", self.partition_tol),
                );
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FarSet {
    pub r: f64,
    pub s1: f64,
    pub s2: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FarCmd {
    pub sets: Vec<FarSet>,
    /// `τ/|ξ|` of the probed level sets.
    pub a: f64,
    pub xi_norms: Vec<f64>,
    /// Shell half-thickness.
    pub h: f64,
    pub c1: f64,
}

impl Default for FarCmd {
    fn default() -> Self {
        let q = QScalingParams::new(2.0, 0.9, 0.8);
        Self {
            sets: vec![
                FarSet {
                    r: 2.0,
                    s1: 0.9,
                    s2: 0.8,
                },
                FarSet {
                    r: 1.5,
                    s1: 1.4,
                    s2: 1.2,
                },
            ],
            a: q.a,
            xi_norms: q.xi_norms,
            h: q.h,
            c1: q.c1,
        }
    }
}

impl Command for FarCmd {
    fn columns() -> &'static [&'static str] {
        &["r", "s1", "s2", "xi", "mass"]
    }

    fn prepare(&mut self, _: &Common) -> Result<(), CliError> {
        ensure(!self.sets.is_empty(), || "sets must not be empty".into())?;
        for s in &self.sets {
            check_lebesgue(s.r)?;
            ensure((s.s1 + s.s2) * s.r > 3.0, || {
                format!(
                    "far-region mass diverges unless (s1+s2)r > 3, got {}",
                    (s.s1 + s.s2) * s.r
                )
            })?;
        }
        ensure(self.a.abs() < 1.0, || format!("a = {} must lie in (-1, 1)", self.a))?;
        ensure(self.c1 > 1.0, || format!("c1 = {} must exceed 1", self.c1))?;
        check_positive("h", &[self.h], 1)?;
        check_positive("xi_norms", &self.xi_norms, 3)
    }

    fn execute(&self, _: &Common, out: &mut Outcome) -> Result<(), CliError> {
        for s in &self.sets {
            let q = QScalingParams {
                a: self.a,
                xi_norms: self.xi_norms.clone(),
                h: self.h,
                c1: self.c1,
                ..QScalingParams::new(s.r, s.s1, s.s2)
            };
            let rep = q_region_scaling(&q)?;
            for x in &rep.samples {
                out.table
                    .push(vec![num(s.r), num(s.s1), num(s.s2), num(x.x), num(x.lhs)]);
            }
            out.estimate(&format!("far-region mass r={} s1={} s2={}", s.r, s.s1, s.s2), &rep);
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShellProbe {
    pub signs: String,
    pub xi: [f64; 3],
    pub tau: f64,
    /// Whether the fitted slope is asserted or only reported.
    #[serde(default = "yes")]
    pub assert: bool,
}

fn yes() -> bool {
    true
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShellCmd {
    pub probes: Vec<ShellProbe>,
    /// Dyadic shells `k_min..=k_max`.
    pub k_min: u32,
    pub k_max: u32,
    pub h: f64,
    pub target: f64,
    pub tol: f64,
}

impl Default for ShellCmd {
    fn default() -> Self {
        Self {
            probes: vec![
                ShellProbe {
                    signs: "++".into(),
                    xi: [0.0, 0.0, 1000.0],
                    tau: 1001.0,
                    assert: true,
                },
                ShellProbe {
                    signs: "+-".into(),
                    xi: [0.0, 0.0, 1000.0],
                    tau: -999.0,
                    assert: false,
                },
            ],
            k_min: 2,
            k_max: 6,
            h: 0.05,
            target: 2.0,
            tol: 0.1,
        }
    }
}

impl Command for ShellCmd {
    fn columns() -> &'static [&'static str] {
        &["probe", "signs", "k", "mass", "mass_2h", "stability"]
    }

    fn prepare(&mut self, _: &Common) -> Result<(), CliError> {
        ensure(!self.probes.is_empty(), || "probes must not be empty".into())?;
        for p in &self.probes {
            parse_signs(std::slice::from_ref(&p.signs))?;
            ensure(p.xi.iter().chain([&p.tau]).all(|v| v.is_finite()), || {
                "probe coordinates must be finite".into()
            })?;
        }
        ensure(self.k_max >= self.k_min + 2, || {
            "a slope fit needs at least 3 shells".into()
        })?;
        ensure(self.k_max < 60, || "k_max must stay below 60".into())?;
        check_positive("h", &[self.h], 1)?;
        check_positive("tol", &[self.tol], 1)
    }

    fn execute(&self, _: &Common, out: &mut Outcome) -> Result<(), CliError> {
        let opts = SurfaceOptions::with_thickness(self.h);
        for (i, p) in self.probes.iter().enumerate() {
            let sp = parse_signs(std::slice::from_ref(&p.signs))?[0];
            let ks: Vec<u32> = (self.k_min..=self.k_max).collect();
            let masses = qwlab::par::map(&ks, |&k| shell_surface_mass(p.xi, p.tau, sp, DyadicIndex(k), &opts))
                .into_iter()
                .collect::<qwlab::Result<Vec<_>>>()?;
            for (k, m) in ks.iter().zip(&masses) {
                out.table.push(vec![
                    i.to_string(),
                    sp.name(),
                    k.to_string(),
                    num(m.value()),
                    num(m.at_h),
                    num(m.stability()),
                ]);
            }
            let xs: Vec<f64> = ks.iter().map(|k| 2f64.powi(*k as i32)).collect();
            let ys: Vec<f64> = masses.iter().map(|m| m.value()).collect();
            let name = format!("shell mass probe {i} signs={}", sp.name());
            match fit_log2(&xs, &ys) {
                Ok(fit) => {
                    out.fits.push(crate::outcome::FitEntry {
                        label: name.clone(),
                        slope: fit.slope,
                        intercept: fit.intercept,
                        r2: fit.r2,
                        ci95: fit.ci95,
                        points: fit.points,
                        prediction: p.assert.then_some(self.target),
                    });
                    if p.assert {
                        out.check(
                            name,
                            (fit.slope - self.target).abs() <= self.tol,
                            Some(fit.slope),
                            format!("|slope - {}| <= {}", self.target, self.tol),
                        );
                    }
                }
                Err(e) if !p.assert => out.detail(&format!("probe {i}"), format!("no fit: {e}"))?,
                Err(e) => return Err(e.into()),
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceProbe {
    pub xi: [f64; 3],
    pub tau: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurfaceCmd {
    /// Width of the radial Gaussian data.
    pub width: f64,
    pub probes: Vec<SurfaceProbe>,
    pub tolerance: f64,
}

impl Default for SurfaceCmd {
    fn default() -> Self {
        let probe = |xi, tau| SurfaceProbe { xi, tau };
        Self {
            width: 1.0,
            probes: vec![
                probe([0.8, 0.0, 0.0], 2.4),
                probe([0.8, 0.0, 0.0], 3.1),
                probe([0.0, 1.2, 0.4], 3.1),
            ],
            tolerance: 0.05,
        }
    }
}

impl Command for SurfaceCmd {
    fn columns() -> &'static [&'static str] {
        &["xi1", "xi2", "xi3", "tau", "direct", "predicted", "rel_err"]
    }

    fn prepare(&mut self, _: &Common) -> Result<(), CliError> {
        check_positive("width", &[self.width], 1)?;
        check_positive("tolerance", &[self.tolerance], 1)?;
        ensure(!self.probes.is_empty(), || "probes must not be empty".into())
    }

    fn execute(&self, _: &Common, out: &mut Outcome) -> Result<(), CliError> {
        let probes: Vec<([f64; 3], f64)> = self.probes.iter().map(|p| (p.xi, p.tau)).collect();
        let cv = surface_cross_validation(self.width, &probes, self.tolerance)?;
        for r in &cv.rows {
            out.table.push(vec![
                num(r.xi[0]),
                num(r.xi[1]),
                num(r.xi[2]),
                num(r.tau),
                num(r.direct),
                num(r.predicted),
                num(r.rel_err),
            ]);
        }
        out.check(
            "surface formula against lattice transform",
            cv.passed,
            Some(cv.max_rel_err),
            format!("max rel err <= {}", self.tolerance),
        );
        out.detail("c_cal", cv.c_cal)?;
        Ok(())
    }
}
