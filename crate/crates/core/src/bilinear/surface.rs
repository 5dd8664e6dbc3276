//! Surface masses `∫_{P_±(η)=τ} dS_η/|∇P_±(η)| F(|ξ/2-η|, |ξ/2+η|)`.
//!
//! The level-set integral is estimated as the thickened volume average
//! `(1/2h) ∫_{|P_±(η)-τ|<h} F dη`, computed in cylindrical coordinates around
//! the axis through the foci `±ξ/2`. For fixed axial coordinate `z` the
//! function `P_±` is monotone in the radial coordinate, and the radius at
//! which it attains a level has a closed form (prolate ellipsoid or
//! two-sheeted hyperboloid of revolution), so the shell is a single
//! interval in the radius.

use std::f64::consts::PI;

use serde::Serialize;

use super::reduction::{reduction_integral, ReductionSpec, Region};
use super::SignPair;
use crate::quad::{adaptive_gk, adaptive_gk_breaks};
use crate::{Error, Result};

/// The constant relating the surface integral to the reduction:
/// `∫ dS/|∇P| ρ₁^{p-1}ρ₂^{q-1} = π (|ξ|/2)^{p+q} ∫ |a+x|^p |a-x|^q dx`.
pub const SURFACE_CONSTANT: f64 = PI;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Surface {
    Elliptic,
    Hyperbolic,
}

/// Accuracy controls for [`surface_mass`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceOptions {
    /// Half-thickness of the level-set shell.
    pub h: f64,
    /// Relative tolerance of the nested quadrature.
    pub rel_tol: f64,
    /// Known range of `ρ₁` outside of which `F` vanishes.
    pub rho1_support: Option<(f64, f64)>,
}

impl SurfaceOptions {
    pub fn with_thickness(h: f64) -> Self {
        Self {
            h,
            rel_tol: 1e-6,
            rho1_support: None,
        }
    }

    /// Thickness `1.5·Δξ` of a lattice with frequency spacing `dxi`.
    pub fn for_lattice(dxi: f64) -> Self {
        Self::with_thickness(1.5 * dxi)
    }

    pub fn rho1_support(self, lo: f64, hi: f64) -> Self {
        Self {
            rho1_support: Some((lo, hi)),
            ..self
        }
    }
}

/// Thickened estimates at `h` and `h/2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SurfaceMass {
    pub at_h: f64,
    pub at_half_h: f64,
    /// The level set does not meet the admissible region.
    pub empty: bool,
}

impl SurfaceMass {
    fn empty() -> Self {
        Self {
            at_h: 0.0,
            at_half_h: 0.0,
            empty: true,
        }
    }

    pub fn value(&self) -> f64 {
        self.at_half_h
    }

    /// Relative change under halving the thickness.
    pub fn stability(&self) -> f64 {
        if self.at_half_h == 0.0 {
            0.0
        } else {
            (self.at_h - self.at_half_h).abs() / self.at_half_h.abs()
        }
    }
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Radius at which `P` reaches level `v` on the slice `z > 0` (hyperbolic) or
/// any `z` (elliptic); `0` below the range of `P`, `∞` above it.
fn level_radius(surface: Surface, d: f64, z: f64, v: f64) -> f64 {
    match surface {
        Surface::Elliptic => {
            let p0 = (2.0 * z.abs()).max(d);
            if v <= p0 {
                return 0.0;
            }
            let a = 0.5 * v;
            let b2 = a * a - 0.25 * d * d;
            (b2 * (1.0 - (z / a) * (z / a))).max(0.0).sqrt()
        }
        Surface::Hyperbolic => {
            // z > 0: P increases in ρ from -min(2z, d) towards 0
            let p0 = -(2.0 * z).min(d);
            if v <= p0 {
                return 0.0;
            }
            if v >= 0.0 {
                return f64::INFINITY;
            }
            let a = -0.5 * v;
            let b2 = 0.25 * d * d - a * a;
            (b2 * ((z / a) * (z / a) - 1.0)).max(0.0).sqrt()
        }
    }
}

struct Shell<'a, F> {
    surface: Surface,
    d: f64,
    f: &'a F,
    tol: f64,
    /// Support of the distance to the focus at `z = focus`, in slice coordinates.
    support: Option<(f64, f64, f64)>,
    swap: bool,
}

impl<F: Fn(f64, f64) -> f64> Shell<'_, F> {
    fn integrand(&self, z: f64, rho: f64) -> f64 {
        let h = 0.5 * self.d;
        let r1 = (z - h).hypot(rho);
        let r2 = (z + h).hypot(rho);
        let v = if self.swap { (self.f)(r2, r1) } else { (self.f)(r1, r2) };
        2.0 * PI * rho * v
    }

    /// `∫ 2πρ F dρ` over the radial shell at axial position `z`.
    fn radial(&self, z: f64, v1: f64, v2: f64) -> f64 {
        let mut lo = level_radius(self.surface, self.d, z, v1);
        let mut hi = level_radius(self.surface, self.d, z, v2);
        if let Some((focus, rlo, rhi)) = self.support {
            let dz = (z - focus).abs();
            if dz >= rhi {
                return 0.0;
            }
            hi = hi.min((rhi * rhi - dz * dz).sqrt());
            if rlo > dz {
                let inner = (rlo * rlo - dz * dz).sqrt();
                lo = lo.max(inner);
            }
        }
        if !(hi > lo) {
            return 0.0;
        }
        if hi.is_finite() {
            adaptive_gk(|r| self.integrand(z, r), lo, hi, 1e-300, self.tol, 400).value
        } else {
            // ρ = lo + s·scale/(1-s)
            let scale = lo.max(self.d).max(1e-300);
            adaptive_gk(
                |s| {
                    if s >= 1.0 {
                        return 0.0;
                    }
                    let r = lo + scale * s / (1.0 - s);
                    self.integrand(z, r) * scale / ((1.0 - s) * (1.0 - s))
                },
                0.0,
                1.0,
                1e-300,
                self.tol,
                400,
            )
            .value
        }
    }

    /// Integral over `z ∈ [z_lo, z_hi]` (possibly unbounded above).
    fn axial(&self, v1: f64, v2: f64, z_lo: f64, z_hi: f64, extra: &[f64]) -> Result<f64> {
        let mut z_hi = z_hi;
        let mut z_lo = z_lo;
        let mut breaks: Vec<f64> = extra.to_vec();
        if let Some((focus, rlo, rhi)) = self.support {
            z_lo = z_lo.max(focus - rhi);
            z_hi = z_hi.min(focus + rhi);
            breaks.extend([focus - rlo, focus + rlo, focus]);
        }
        if !(z_hi > z_lo) {
            return Ok(0.0);
        }
        let finite_top = if z_hi.is_finite() {
            z_hi
        } else {
            let top = breaks
                .iter()
                .copied()
                .chain([z_lo, self.d])
                .filter(|b| b.is_finite())
                .fold(0.0f64, |m, b| m.max(b.abs()));
            2.0 * top + 1.0
        };
        breaks.push(z_lo);
        breaks.push(finite_top);
        breaks.retain(|b| *b >= z_lo && *b <= finite_top);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let body = |z: f64| self.radial(z, v1, v2);
        let core = adaptive_gk_breaks(body, &breaks, 1e-300, self.tol, 800).value;
        if z_hi.is_finite() {
            return Ok(core);
        }
        // z = top·e^s in windows of unit length
        let mut tail = 0.0;
        let mut s0 = 0.0;
        for _ in 0..60 {
            let w = adaptive_gk(
                |s| {
                    let z = finite_top * s.exp();
                    self.radial(z, v1, v2) * z
                },
                s0,
                s0 + 1.0,
                1e-300,
                self.tol,
                200,
            )
            .value;
            tail += w;
            s0 += 1.0;
            if w.abs() <= 1e-3 * self.tol * (core + tail).abs() {
                return Ok(core + tail);
            }
        }
        Err(Error::Divergent(
            "surface integrand does not decay along the hyperboloid".into(),
        ))
    }
}

fn thickened<F: Fn(f64, f64) -> f64>(
    surface: Surface,
    d: f64,
    tau: f64,
    h: f64,
    f: &F,
    opts: &SurfaceOptions,
) -> Result<f64> {
    let (v1, v2) = (tau - h, tau + h);
    let half = 0.5 * d;
    let mut total = 0.0;
    match surface {
        Surface::Elliptic => {
            let shell = Shell {
                surface,
                d,
                f,
                tol: opts.rel_tol,
                support: opts.rho1_support.map(|(lo, hi)| (half, lo, hi)),
                swap: false,
            };
            let extent = 0.5 * v2;
            let extra = [-0.5 * v1, 0.5 * v1, -half, half, 0.0];
            total += shell.axial(v1, v2, -extent, extent, &extra)?;
        }
        Surface::Hyperbolic => {
            // z > 0 directly; z < 0 by reflection z → -z, which exchanges
            // ρ₁ and ρ₂ and negates P.
            for (swap, l1, l2) in [(false, v1, v2), (true, -v2, -v1)] {
                let support = opts.rho1_support.map(|(lo, hi)| {
                    let focus = if swap { -half } else { half };
                    (focus, lo, hi)
                });
                let shell = Shell {
                    surface,
                    d,
                    f,
                    tol: opts.rel_tol,
                    support,
                    swap,
                };
                let z_lo = if l2 < 0.0 { -0.5 * l2 } else { 0.0 };
                let extra = [-0.5 * l1, -0.5 * l2, half];
                total += shell.axial(l1, l2, z_lo, f64::INFINITY, &extra)?;
            }
        }
    }
    Ok(total / (2.0 * h))
}

/// Thickened-shell estimate of the surface integral of `F(ρ₁, ρ₂)` over the
/// level set `P(η) = τ` selected by the sign pair.
///
/// Pairs with a leading minus are reduced to `(+,±)` by `τ → -τ` together with
/// the exchange of the two factors.
pub fn surface_mass<F>(xi: [f64; 3], tau: f64, sp: SignPair, f: F, opts: &SurfaceOptions) -> Result<SurfaceMass>
where
    F: Fn(f64, f64) -> f64,
{
    if !(opts.h > 0.0 && opts.h.is_finite()) {
        return Err(Error::Parameter(format!(
            "shell thickness must be positive, got {}",
            opts.h
        )));
    }
    if !tau.is_finite() || xi.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("non-finite probe point".into()));
    }
    let d = norm(xi);
    let tau = sp.u.value() * tau;
    let surface = sp.surface();
    let admissible = match surface {
        Surface::Elliptic => tau > d,
        Surface::Hyperbolic => tau.abs() < d,
    };
    if !admissible {
        return Ok(SurfaceMass::empty());
    }
    let at_h = thickened(surface, d, tau, opts.h, &f, opts)?;
    let at_half_h = thickened(surface, d, tau, 0.5 * opts.h, &f, opts)?;
    Ok(SurfaceMass {
        at_h,
        at_half_h,
        empty: false,
    })
}

/// `(|ξ|/2)^{p+q} ∫ |a+x|^p |a-x|^q dx`: the surface integral of
/// `ρ₁^{p-1} ρ₂^{q-1}` divided by the surface constant.
pub fn scaled_reduction(xi_norm: f64, tau: f64, p: f64, q: f64, region: Region, c1: f64) -> Result<f64> {
    let spec = ReductionSpec::new(tau / xi_norm, p, q, region).with_c1(c1);
    Ok((0.5 * xi_norm).powf(p + q) * reduction_integral(&spec)?)
}

/// Result of measuring the surface constant with `F ≡ 1` on the ellipsoids.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Calibration {
    pub c_cal: f64,
    pub ratios: Vec<f64>,
    pub spread: f64,
}

/// Measures `surface_mass / scaled_reduction` for `F ≡ 1` at each elliptic
/// probe; `c_cal` is the mean ratio.
pub fn calibrate(probes: &[([f64; 3], f64)], opts: &SurfaceOptions) -> Result<Calibration> {
    if probes.is_empty() {
        return Err(Error::Parameter("calibration needs at least one probe".into()));
    }
    let mut ratios = Vec::with_capacity(probes.len());
    for &(xi, tau) in probes {
        let m = surface_mass(xi, tau, SignPair::PLUS_PLUS, |_, _| 1.0, opts)?;
        if m.empty {
            return Err(Error::Parameter(format!(
                "calibration probe ({xi:?}, {tau}) is not elliptic"
            )));
        }
        let red = scaled_reduction(norm(xi), tau, 1.0, 1.0, Region::Elliptic, 2.0)?;
        ratios.push(m.value() / red);
    }
    let c_cal = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let spread = ratios.iter().map(|r| (r / c_cal - 1.0).abs()).fold(0.0, f64::max);
    Ok(Calibration { c_cal, ratios, spread })
}
