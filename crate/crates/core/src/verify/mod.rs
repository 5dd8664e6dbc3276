//! Numerical checks of the bilinear estimates for products of free waves.
//!
//! Each check evaluates a ratio `LHS/RHS` for data concentrated at a ladder of
//! frequency scales `λ`, then summarizes it as a spread (bounded ratios) or as
//! a fitted `log₂`-slope against `λ` (growth).

mod checks;
mod extremize;
mod family;

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::bilinear::SignPair;
use crate::{Error, Result};

pub use checks::{
    check_elliptic_lemma, check_hyperbolic_lemmas, check_key_estimate, check_lowfreq_young, check_strichartz_l2,
    q_region_scaling, sharpness_probe, surface_cross_validation, CrossValidation, CrossValidationRow,
    HyperbolicReports, KeyReports, QScalingParams,
};
pub use extremize::{
    extremizer_search, nelder_mead, ExtremizeParams, ExtremizerResult, NelderMeadOptions, NelderMeadOutcome, Restart,
};
pub use family::{DataFamily, FamilyKind, LatticeMode, LatticeSpec, GAUSSIAN_CUTOFF};

/// Inputs shared by the estimate checks.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyParams {
    pub r: f64,
    pub sigma: f64,
    pub b: f64,
    pub signs: SignPair,
    pub family: DataFamily,
    /// Data for the second factor; the first family when absent.
    pub partner: Option<DataFamily>,
    pub lambdas: Vec<f64>,
    pub lattice: LatticeSpec,
}

impl VerifyParams {
    /// Defaults: `b = 1/r + 0.05`, signs `(+,+)`, `λ ∈ {2, 4, 8, 16}`.
    pub fn new(r: f64, sigma: f64, family: DataFamily) -> Self {
        Self {
            r,
            sigma,
            b: 1.0 / r + 0.05,
            signs: SignPair::PLUS_PLUS,
            family,
            partner: None,
            lambdas: vec![2.0, 4.0, 8.0, 16.0],
            lattice: LatticeSpec::default(),
        }
    }

    pub fn with_b(self, b: f64) -> Self {
        Self { b, ..self }
    }

    pub fn with_signs(self, signs: SignPair) -> Self {
        Self { signs, ..self }
    }

    pub fn with_partner(self, partner: DataFamily) -> Self {
        Self {
            partner: Some(partner),
            ..self
        }
    }

    pub fn with_lambdas(self, lambdas: Vec<f64>) -> Self {
        Self { lambdas, ..self }
    }

    pub fn with_lattice(self, lattice: LatticeSpec) -> Self {
        Self { lattice, ..self }
    }

    /// The regularity threshold `2/r`.
    pub fn threshold(&self) -> f64 {
        2.0 / self.r
    }

    pub fn partner_family(&self) -> DataFamily {
        self.partner.unwrap_or(self.family)
    }

    fn require_above_threshold(&self) -> Result<()> {
        if self.sigma <= self.threshold() {
            return Err(Error::Parameter(format!(
                "σ = {} must exceed the threshold 2/r = {}",
                self.sigma,
                self.threshold()
            )));
        }
        Ok(())
    }

    fn require_b(&self) -> Result<()> {
        if !(self.b > 1.0 / self.r) {
            return Err(Error::Parameter(format!(
                "b = {} must exceed 1/r = {}",
                self.b,
                1.0 / self.r
            )));
        }
        Ok(())
    }
}

/// One point of a ratio sweep; `ratio` is `None` when the right side vanishes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub x: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: Option<f64>,
}

impl Sample {
    pub fn new(x: f64, lhs: f64, rhs: f64) -> Self {
        let ratio = (rhs > 0.0).then(|| lhs / rhs);
        Self { x, lhs, rhs, ratio }
    }
}

/// Least-squares line `log₂ y = slope·log₂ x + intercept`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Half-width of the 95% confidence interval of the slope.
    pub ci95: f64,
    pub points: usize,
}

/// Fits `log₂ y` against `log₂ x`. Needs at least three positive points.
pub fn fit_log2(xs: &[f64], ys: &[f64]) -> Result<SlopeFit> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.log2(), y.log2()))
        .collect();
    let n = pts.len();
    if n < 3 {
        return Err(Error::Fit(format!(
            "a slope fit needs at least 3 positive samples, got {n}"
        )));
    }
    let nf = n as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("all abscissae coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let r2 = if syy > 0.0 { 1.0 - sse / syy } else { 1.0 };
    let dof = nf - 2.0;
    let se = (sse / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::Fit(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(SlopeFit {
        slope,
        intercept,
        r2,
        ci95: t * se,
        points: n,
    })
}

/// Pass rule attached to a report.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Criterion {
    /// `max/min ≤ max_spread` over the defined ratios.
    Bounded { max_spread: f64 },
    /// Fitted slope `≥ min_slope` with `R² ≥ min_r2`.
    Growth { min_slope: f64, min_r2: f64 },
    /// Fitted slope `≤ max_slope`.
    SlopeAtMost { max_slope: f64 },
    /// `|slope - target| ≤ tol`.
    SlopeNear { target: f64, tol: f64 },
}

impl Criterion {
    pub fn needs_fit(&self) -> bool {
        !matches!(self, Criterion::Bounded { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstimateReport {
    pub label: String,
    /// Name of the swept quantity in `Sample::x`.
    pub x_name: String,
    pub samples: Vec<Sample>,
    pub skipped: usize,
    pub max_ratio: Option<f64>,
    pub min_ratio: Option<f64>,
    pub median_ratio: Option<f64>,
    pub spread: Option<f64>,
    pub fit: Option<SlopeFit>,
    /// Expected exponent, where theory predicts one.
    pub prediction: Option<f64>,
    pub criterion: Criterion,
    pub passed: bool,
}

impl EstimateReport {
    pub fn summarize(
        label: impl Into<String>,
        x_name: &str,
        samples: Vec<Sample>,
        criterion: Criterion,
    ) -> Result<Self> {
        let mut ratios: Vec<f64> = samples.iter().filter_map(|s| s.ratio).collect();
        if ratios.iter().any(|r| *r < 0.0 || !r.is_finite()) {
            return Err(Error::Fit(format!("invalid ratio in {ratios:?}")));
        }
        let skipped = samples.len() - ratios.len();
        ratios.sort_by(f64::total_cmp);
        let (max_ratio, min_ratio) = (ratios.last().copied(), ratios.first().copied());
        let median_ratio = (!ratios.is_empty()).then(|| {
            let n = ratios.len();
            if n % 2 == 1 {
                ratios[n / 2]
            } else {
                0.5 * (ratios[n / 2 - 1] + ratios[n / 2])
            }
        });
        let spread = match (max_ratio, min_ratio) {
            (Some(a), Some(b)) if b > 0.0 => Some(a / b),
            _ => None,
        };
        let fit = if criterion.needs_fit() {
            let (xs, ys): (Vec<f64>, Vec<f64>) = samples.iter().filter_map(|s| s.ratio.map(|r| (s.x, r))).unzip();
            Some(fit_log2(&xs, &ys)?)
        } else {
            None
        };
        let passed = match (criterion, &fit) {
            (Criterion::Bounded { max_spread }, _) => spread.is_some_and(|s| s <= max_spread),
            (Criterion::Growth { min_slope, min_r2 }, Some(f)) => f.slope >= min_slope && f.r2 >= min_r2,
            (Criterion::SlopeAtMost { max_slope }, Some(f)) => f.slope <= max_slope,
            (Criterion::SlopeNear { target, tol }, Some(f)) => (f.slope - target).abs() <= tol,
            _ => false,
        };
        Ok(Self {
            label: label.into(),
            x_name: x_name.into(),
            samples,
            skipped,
            max_ratio,
            min_ratio,
            median_ratio,
            spread,
            fit,
            prediction: None,
            criterion,
            passed,
        })
    }
}
