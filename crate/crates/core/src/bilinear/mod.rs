//! Products of free half-waves.
//!
//! The space-time transform of `u_± v_±` lives on the level sets of
//! `P_±(η) = |ξ/2-η| ± |ξ/2+η|`, ellipsoids for equal signs and hyperboloids
//! for opposite ones. This module computes that transform directly on the
//! lattice, as a masked frequency convolution, as a surface integral, and
//! through its one-dimensional reduction.

mod product;
mod reduction;
mod surface;

use serde::Serialize;

use crate::spaces::Sign;

pub use product::{
    bilinear_symbol_product, bilinear_symbol_products, embed_spectrum, product_transform_direct, support_leakage, Mask,
    MAX_DIRECT_N,
};
pub use reduction::{reduction_integral, ExponentLabel, ReductionSpec, Region, DEFAULT_C1};
pub use surface::{
    calibrate, scaled_reduction, surface_mass, Calibration, Surface, SurfaceMass, SurfaceOptions, SURFACE_CONSTANT,
};

/// Signs of the two free waves `u_{s_u}`, `v_{s_v}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct SignPair {
    pub u: Sign,
    pub v: Sign,
}

impl SignPair {
    pub const PLUS_PLUS: SignPair = SignPair {
        u: Sign::Plus,
        v: Sign::Plus,
    };
    pub const PLUS_MINUS: SignPair = SignPair {
        u: Sign::Plus,
        v: Sign::Minus,
    };

    pub fn new(u: Sign, v: Sign) -> Self {
        Self { u, v }
    }

    pub fn surface(self) -> Surface {
        if self.u == self.v {
            Surface::Elliptic
        } else {
            Surface::Hyperbolic
        }
    }

    pub fn name(self) -> String {
        format!("{}{}", self.u.symbol(), self.v.symbol())
    }

    /// Parses `"++"`, `"+-"`, `"-+"` or `"--"`.
    pub fn parse(s: &str) -> Option<Self> {
        let sign = |c| match c {
            '+' => Some(Sign::Plus),
            '-' => Some(Sign::Minus),
            _ => None,
        };
        let mut it = s.trim().chars();
        let (a, b) = (it.next()?, it.next()?);
        if it.next().is_some() {
            return None;
        }
        Some(Self::new(sign(a)?, sign(b)?))
    }
}
