//! One-dimensional reductions `∫ |a+x|^p |a-x|^q dx` of surface integrals
//! over the interaction ellipsoids and hyperboloids.

use serde::Serialize;

use crate::quad::tanh_sinh;
use crate::{Error, Result};

/// Default region constant separating near and far hyperbolic parts.
pub const DEFAULT_C1: f64 = 2.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Region {
    /// `x ∈ [-1, 1]`.
    Elliptic,
    /// `x ∈ [1, c₁]`.
    HyperbolicNear,
    /// `x ∈ [c₁, ∞)`.
    HyperbolicFar,
}

impl Region {
    pub fn name(self) -> &'static str {
        match self {
            Region::Elliptic => "elliptic",
            Region::HyperbolicNear => "hyperbolic-near",
            Region::HyperbolicFar => "hyperbolic-far",
        }
    }
}

/// Exponents of the data weights that produced `p` and `q`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentLabel {
    pub r: f64,
    pub s1: f64,
    pub s2: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ReductionSpec {
    pub a: f64,
    pub p: f64,
    pub q: f64,
    pub region: Region,
    pub c1: f64,
    pub label: Option<ExponentLabel>,
}

impl ReductionSpec {
    pub fn new(a: f64, p: f64, q: f64, region: Region) -> Self {
        Self {
            a,
            p,
            q,
            region,
            c1: DEFAULT_C1,
            label: None,
        }
    }

    /// `p = 1 - s₁r`, `q = 1 - s₂r`.
    pub fn from_regularity(r: f64, s1: f64, s2: f64, a: f64, region: Region) -> Self {
        Self {
            label: Some(ExponentLabel { r, s1, s2 }),
            ..Self::new(a, 1.0 - s1 * r, 1.0 - s2 * r, region)
        }
    }

    pub fn with_c1(self, c1: f64) -> Self {
        Self { c1, ..self }
    }

    /// Checks the parameter constraints. Exponents must exceed `-1` only where
    /// the corresponding singular point `x = ∓a` lies in the closed region.
    pub fn validate(&self) -> Result<()> {
        let Self { a, p, q, c1, .. } = *self;
        for (name, v) in [("a", a), ("p", p), ("q", q), ("c1", c1)] {
            if !v.is_finite() {
                return Err(Error::Parameter(format!("{name} = {v} is not finite")));
            }
        }
        let (lo, hi) = match self.region {
            Region::Elliptic => {
                if a < 1.0 {
                    return Err(Error::Parameter(format!(
                        "elliptic region requires a >= 1, got a = {a}"
                    )));
                }
                (-1.0, 1.0)
            }
            Region::HyperbolicNear | Region::HyperbolicFar => {
                if a.abs() > 1.0 {
                    return Err(Error::Parameter(format!(
                        "hyperbolic regions require |a| <= 1, got a = {a}"
                    )));
                }
                if c1 <= 1.0 {
                    return Err(Error::Parameter(format!("region constant c1 must exceed 1, got {c1}")));
                }
                if self.region == Region::HyperbolicNear {
                    (1.0, c1)
                } else {
                    (c1, f64::INFINITY)
                }
            }
        };
        let inside = |x: f64| x >= lo && x <= hi;
        if inside(-a) && p <= -1.0 {
            return Err(Error::Parameter(format!(
                "p > -1 required for the singularity at x = {}, got p = {p}",
                -a
            )));
        }
        if inside(a) && q <= -1.0 {
            return Err(Error::Parameter(format!(
                "q > -1 required for the singularity at x = {a}, got q = {q}"
            )));
        }
        if self.region == Region::HyperbolicFar && p + q >= -1.0 {
            return Err(Error::Divergent(format!(
                "far integral diverges at infinity: p + q = {} >= -1",
                p + q
            )));
        }
        Ok(())
    }
}

fn power(base: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else {
        base.powf(e)
    }
}

/// `∫_region |a+x|^p |a-x|^q dx`.
///
/// Under the constraints the only possible singular points are panel ends, so
/// each region is a single tanh-sinh panel whose integrand is evaluated from
/// exact endpoint distances.
pub fn reduction_integral(spec: &ReductionSpec) -> Result<f64> {
    spec.validate()?;
    let ReductionSpec { a, p, q, c1, .. } = *spec;
    let tol = 1e-14;
    if p == 0.0 && q == 0.0 {
        match spec.region {
            Region::Elliptic => return Ok(2.0),
            Region::HyperbolicNear => return Ok(c1 - 1.0),
            Region::HyperbolicFar => {}
        }
    }
    let value = match spec.region {
        Region::Elliptic => {
            // a + x = (a - 1) + (x + 1), a - x = (a - 1) + (1 - x)
            let g = a - 1.0;
            tanh_sinh(|_, da, db| power(g + da, p) * power(g + db, q), -1.0, 1.0, tol).value
        }
        Region::HyperbolicNear => {
            // x + a = (1 + a) + (x - 1), x - a = (1 - a) + (x - 1)
            let (gp, gm) = (1.0 + a, 1.0 - a);
            tanh_sinh(|_, da, _| power(gp + da, p) * power(gm + da, q), 1.0, c1, tol).value
        }
        Region::HyperbolicFar => {
            // x = c₁/t, dx = c₁/t² dt
            tanh_sinh(
                |_, t, _| {
                    let x = c1 / t;
                    power(x + a, p) * power(x - a, q) * c1 / (t * t)
                },
                0.0,
                1.0,
                tol,
            )
            .value
        }
    };
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive_gk;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn closed_forms() {
        for a in [1.0, 1.5, 30.0] {
            let v = reduction_integral(&ReductionSpec::new(a, 0.0, 0.0, Region::Elliptic)).unwrap();
            assert_eq!(v, 2.0);
        }
        let v = reduction_integral(&ReductionSpec::new(1.0, -0.5, 0.5, Region::Elliptic)).unwrap();
        assert!((v - PI).abs() < 1e-6, "{v}");
        let v = reduction_integral(&ReductionSpec::new(0.0, -1.0, -1.0, Region::HyperbolicFar)).unwrap();
        assert!((v - 0.5).abs() < 1e-8, "{v}");
    }

    #[test]
    fn elliptic_polynomial_case() {
        // p = q = 1: ∫(a² - x²) = 2a² - 2/3
        let a = 1.7;
        let v = reduction_integral(&ReductionSpec::new(a, 1.0, 1.0, Region::Elliptic)).unwrap();
        assert!((v - (2.0 * a * a - 2.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn near_region_against_graded_mesh() {
        // substitution x = 1 + s^{1/(1+p)} removes the endpoint singularity
        let (a, p, q, c1) = (-1.0, -0.7, 0.3, 2.0);
        let v = reduction_integral(&ReductionSpec::new(a, p, q, Region::HyperbolicNear).with_c1(c1)).unwrap();
        let e = 1.0 / (1.0 + p);
        let top = (c1 - 1.0_f64).powf(1.0 + p);
        let oracle = adaptive_gk(
            |s| {
                let d = s.powf(e);
                let dx = e * s.powf(e - 1.0);
                d.powf(p) * (2.0 + d).powf(q) * dx
            },
            0.0,
            top,
            1e-13,
            1e-13,
            2000,
        )
        .value;
        assert!((v - oracle).abs() < 1e-9, "{v} vs {oracle}");
    }

    #[test]
    fn large_a_limit() {
        let v = reduction_integral(&ReductionSpec::new(100.0, 0.6, -0.6, Region::Elliptic)).unwrap();
        assert!((v / 2.0 - 1.0).abs() < 0.01);
    }

    #[test]
    fn violations_are_named() {
        let e = reduction_integral(&ReductionSpec::new(0.5, 0.0, 0.0, Region::Elliptic)).unwrap_err();
        assert!(e.to_string().contains("a >= 1"));
        let e = reduction_integral(&ReductionSpec::new(1.0, -1.0, 0.0, Region::Elliptic)).unwrap_err();
        assert!(e.to_string().contains("p > -1"));
        let e =
            reduction_integral(&ReductionSpec::new(-1.0, 0.0, 0.0, Region::HyperbolicNear).with_c1(1.0)).unwrap_err();
        assert!(e.to_string().contains("c1"));
        let e = reduction_integral(&ReductionSpec::new(0.2, -0.5, -0.4, Region::HyperbolicFar)).unwrap_err();
        assert!(matches!(e, Error::Divergent(_)));
        let e = reduction_integral(&ReductionSpec::new(1.5, 0.0, 0.0, Region::HyperbolicNear)).unwrap_err();
        assert!(e.to_string().contains("|a| <= 1"));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn elliptic_symmetry(p in -0.95f64..3.0, q in -0.95f64..3.0, a in 1.0f64..20.0) {
            let x = reduction_integral(&ReductionSpec::new(a, p, q, Region::Elliptic)).unwrap();
            let y = reduction_integral(&ReductionSpec::new(a, q, p, Region::Elliptic)).unwrap();
            prop_assert!((x - y).abs() <= 1e-9 * x.abs().max(1.0));
        }

        #[test]
        fn far_region_power_law(p in -0.9f64..0.5, g in 0.05f64..1.5, c1 in 1.2f64..4.0) {
            // a = 0: ∫_{c₁}^∞ x^{p+q} dx = c₁^{p+q+1} / (-(p+q+1))
            let q = -1.0 - g - p;
            let v = reduction_integral(&ReductionSpec::new(0.0, p, q, Region::HyperbolicFar).with_c1(c1))
                .unwrap();
            let exact = c1.powf(-g) / g;
            prop_assert!((v - exact).abs() <= 1e-8 * exact.max(1.0), "{} vs {}", v, exact);
        }
    }
}
