//! Tables of the one-dimensional reduction integrals.

use qwlab::bilinear::{reduction_integral, ReductionSpec, Region, DEFAULT_C1};
use qwlab::spaces::check_lebesgue;
use serde::{Deserialize, Serialize};

use super::{ensure, Command};
use crate::config::Common;
use crate::error::CliError;
use crate::outcome::{num, opt, Outcome};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionName {
    Elliptic,
    HyperbolicNear,
    HyperbolicFar,
}

impl RegionName {
    fn region(self) -> Region {
        match self {
            RegionName::Elliptic => Region::Elliptic,
            RegionName::HyperbolicNear => Region::HyperbolicNear,
            RegionName::HyperbolicFar => Region::HyperbolicFar,
        }
    }
}

fn default_c1() -> f64 {
    DEFAULT_C1
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Case {
    pub region: RegionName,
    pub a: f64,
    pub p: f64,
    pub q: f64,
    #[serde(default = "default_c1")]
    pub c1: f64,
    /// Known value, checked to `tol`.
    #[serde(default)]
    pub expect: Option<f64>,
    #[serde(default)]
    pub tol: f64,
}

impl Case {
    fn spec(&self) -> ReductionSpec {
        ReductionSpec::new(self.a, self.p, self.q, self.region.region()).with_c1(self.c1)
    }
}

/// Exponents from data regularity: `s₁ = f·2/r`, `s₂ = 2/r − s₁`, so
/// `p + q = 0` and the elliptic integral tends to 2 as `a` grows.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegularitySweep {
    pub enabled: bool,
    pub r: Vec<f64>,
    pub s1_fractions: Vec<f64>,
    pub a: Vec<f64>,
    pub region: RegionName,
    pub c1: f64,
    /// Allowed relative change between the two largest `a` when `p + q = 0`.
    pub limit_tol: f64,
}

impl Default for RegularitySweep {
    fn default() -> Self {
        Self {
            enabled: true,
            r: vec![1.2, 1.5, 2.0],
            s1_fractions: vec![0.3, 0.5, 0.7],
            a: vec![1.0, 2.0, 10.0, 100.0, 1000.0],
            region: RegionName::Elliptic,
            c1: DEFAULT_C1,
            limit_tol: 0.01,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReduceCmd {
    pub cases: Vec<Case>,
    pub regularity: RegularitySweep,
}

impl Default for ReduceCmd {
    fn default() -> Self {
        let case = |region, a, p, q, expect, tol| Case {
            region,
            a,
            p,
            q,
            c1: DEFAULT_C1,
            expect: Some(expect),
            tol,
        };
        Self {
            cases: vec![
                case(RegionName::Elliptic, 1.0, 0.0, 0.0, 2.0, 0.0),
                case(RegionName::Elliptic, 2.0, 0.0, 0.0, 2.0, 0.0),
                case(RegionName::Elliptic, 10.0, 0.0, 0.0, 2.0, 0.0),
                case(RegionName::Elliptic, 1.0, -0.5, 0.5, std::f64::consts::PI, 1e-6),
                case(RegionName::HyperbolicFar, 0.0, -1.0, -1.0, 0.5, 1e-8),
            ],
            regularity: RegularitySweep::default(),
        }
    }
}

impl Command for ReduceCmd {
    fn columns() -> &'static [&'static str] {
        &[
            "source", "region", "r", "s1", "s2", "a", "p", "q", "c1", "value", "expect",
        ]
    }

    fn prepare(&mut self, _: &Common) -> Result<(), CliError> {
        ensure(!self.cases.is_empty() || self.regularity.enabled, || {
            "nothing to tabulate".into()
        })?;
        for c in &self.cases {
            c.spec().validate()?;
            ensure(c.tol >= 0.0, || format!("tol = {} must be nonnegative", c.tol))?;
        }
        let s = &self.regularity;
        if s.enabled {
            ensure(!s.r.is_empty() && !s.s1_fractions.is_empty() && !s.a.is_empty(), || {
                "regularity lists must not be empty".into()
            })?;
            ensure(s.limit_tol > 0.0, || "limit_tol must be positive".into())?;
            for &r in &s.r {
                check_lebesgue(r)?;
                for &f in &s.s1_fractions {
                    let s1 = f * 2.0 / r;
                    for &a in &s.a {
                        ReductionSpec::from_regularity(r, s1, 2.0 / r - s1, a, s.region.region())
                            .with_c1(s.c1)
                            .validate()?;
                    }
                }
            }
        }
        Ok(())
    }

    fn execute(&self, _: &Common, out: &mut Outcome) -> Result<(), CliError> {
        for c in &self.cases {
            let v = reduction_integral(&c.spec())?;
            out.table.push(vec![
                "case".into(),
                c.region.region().name().into(),
                String::new(),
                String::new(),
                String::new(),
                num(c.a),
                num(c.p),
                num(c.q),
                num(c.c1),
                num(v),
                opt(c.expect),
            ]);
            if let Some(e) = c.expect {
                out.check(
                    format!("reduction {} a={} p={} q={}", c.region.region().name(), c.a, c.p, c.q),
                    (v - e).abs() <= c.tol,
                    Some(v),
                    format!("|value - {e}| <= {}", c.tol),
                );
            }
        }
        let s = &self.regularity;
        if !s.enabled {
            return Ok(());
        }
        let mut a_sorted = s.a.clone();
        a_sorted.sort_by(f64::total_cmp);
        for &r in &s.r {
            for &f in &s.s1_fractions {
                let s1 = f * 2.0 / r;
                let s2 = 2.0 / r - s1;
                let specs: Vec<ReductionSpec> = a_sorted
                    .iter()
                    .map(|&a| ReductionSpec::from_regularity(r, s1, s2, a, s.region.region()).with_c1(s.c1))
                    .collect();
                let values = qwlab::par::map(&specs, reduction_integral)
                    .into_iter()
                    .collect::<qwlab::Result<Vec<f64>>>()?;
                for (sp, v) in specs.iter().zip(&values) {
                    out.table.push(vec![
                        "regularity".into(),
                        sp.region.name().into(),
                        num(r),
                        num(s1),
                        num(s2),
                        num(sp.a),
                        num(sp.p),
                        num(sp.q),
                        num(sp.c1),
                        num(*v),
                        String::new(),
                    ]);
                }
                let name = format!("reduction r={r} s1={s1:.6} s2={s2:.6}");
                let sup = values.iter().cloned().fold(0.0, f64::max);
                out.check(
                    format!("{name} sup finite"),
                    values.iter().all(|v| v.is_finite()),
                    Some(sup),
                    "finite",
                );
                let (p, q) = (specs[0].p, specs[0].q);
                if (p + q).abs() < 1e-12 && values.len() >= 2 {
                    let (hi, lo) = (values[values.len() - 1], values[values.len() - 2]);
                    let change = (lo / hi - 1.0).abs();
                    out.check(
                        format!("{name} large-a limit settled"),
                        change < s.limit_tol,
                        Some(change),
                        format!("relative change between the two largest a < {}", s.limit_tol),
                    );
                }
            }
        }
        Ok(())
    }
}
