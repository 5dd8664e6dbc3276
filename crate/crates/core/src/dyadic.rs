//! Dyadic frequency shells, sharp Littlewood-Paley projections and the
//! frequency-pair masks used to split bilinear interactions.

use serde::Serialize;

use crate::bilinear::{surface_mass, SignPair, SurfaceMass, SurfaceOptions, DEFAULT_C1};
use crate::grid::{Repr, SpatialGrid, Spectrum, C64};
use crate::Result;

/// Shell `k`: `|ξ| ≤ 1` for `k = 0`, `2^{k-1} < |ξ| ≤ 2^k` otherwise.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct DyadicIndex(pub u32);

impl DyadicIndex {
    /// Radial bounds `(lo, hi]` of the shell (`lo = 0` closed for `k = 0`).
    pub fn bounds(self) -> (f64, f64) {
        match self.0 {
            0 => (0.0, 1.0),
            k => (2f64.powi(k as i32 - 1), 2f64.powi(k as i32)),
        }
    }

    pub fn contains(self, r: f64) -> bool {
        let (lo, hi) = self.bounds();
        if self.0 == 0 {
            r <= hi
        } else {
            r > lo && r <= hi
        }
    }

    /// The shell containing radius `r`.
    pub fn of(r: f64) -> Self {
        if r <= 1.0 {
            return Self(0);
        }
        let mut k = r.log2().ceil().max(1.0) as u32;
        // guard against rounding at exact powers of two
        while !Self(k).contains(r) {
            if r > Self(k).bounds().1 {
                k += 1;
            } else {
                k -= 1;
            }
        }
        Self(k)
    }

    /// Largest shell meeting the lattice.
    pub fn nyquist(grid: &SpatialGrid) -> Self {
        let corner = grid.nyquist() * 3f64.sqrt();
        Self::of(corner)
    }
}

/// Output of [`lp_projection`].
#[derive(Clone, Debug)]
pub struct Projection {
    pub spectrum: Spectrum,
    /// The shell contains no lattice frequency.
    pub empty: bool,
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

/// Sharp projection onto shell `k`.
pub fn lp_projection(spec: &Spectrum, k: DyadicIndex) -> Result<Projection> {
    spec.expect_repr(Repr::Frequency)?;
    let g = *spec.grid();
    let mut empty = true;
    let data = spec
        .data()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            if k.contains(norm(g.freq_vec(i))) {
                empty = false;
                *v
            } else {
                C64::new(0.0, 0.0)
            }
        })
        .collect();
    Ok(Projection {
        spectrum: Spectrum::from_parts(g, Repr::Frequency, data)?,
        empty,
    })
}

/// Frequency-pair masks for `ξ₁` (first factor) and `ξ₂` (second factor).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegionMasks {
    pub c1: f64,
}

impl Default for RegionMasks {
    fn default() -> Self {
        Self { c1: DEFAULT_C1 }
    }
}

/// The standard mask set with region constant `c₁ = 2`.
pub fn region_masks() -> RegionMasks {
    RegionMasks::default()
}

impl RegionMasks {
    /// `|ξ₁| ≥ |ξ₂|/2`.
    pub fn geq(&self, xi1: [f64; 3], xi2: [f64; 3]) -> bool {
        norm(xi1) >= 0.5 * norm(xi2)
    }

    pub fn ll(&self, xi1: [f64; 3], xi2: [f64; 3]) -> bool {
        !self.geq(xi1, xi2)
    }

    /// `|ξ₁| + |ξ₂| ≤ c₁|ξ₁ + ξ₂|`.
    pub fn p(&self, xi1: [f64; 3], xi2: [f64; 3]) -> bool {
        let s = [xi1[0] + xi2[0], xi1[1] + xi2[1], xi1[2] + xi2[2]];
        norm(xi1) + norm(xi2) <= self.c1 * norm(s)
    }

    pub fn q(&self, xi1: [f64; 3], xi2: [f64; 3]) -> bool {
        !self.p(xi1, xi2)
    }

    /// `ξ₁` in shell `k` and `|ξ₁| < |ξ₂|/2`.
    pub fn shell_ll(&self, k: DyadicIndex, xi1: [f64; 3], xi2: [f64; 3]) -> bool {
        k.contains(norm(xi1)) && self.ll(xi1, xi2)
    }
}

/// Surface mass of the part of the level set where `ρ₁ = |ξ/2-η|` lies in
/// shell `k` and `ρ₁ < ρ₂/2`.
pub fn shell_surface_mass(
    xi: [f64; 3],
    tau: f64,
    sp: SignPair,
    k: DyadicIndex,
    opts: &SurfaceOptions,
) -> Result<SurfaceMass> {
    let (lo, hi) = k.bounds();
    let f = |r1: f64, r2: f64| {
        if k.contains(r1) && r1 < 0.5 * r2 {
            1.0
        } else {
            0.0
        }
    };
    surface_mass(xi, tau, sp, f, &opts.rho1_support(lo, hi))
}
