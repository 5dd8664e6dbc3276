//! Test data concentrated at a frequency scale `λ`, and the lattices that
//! carry them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::grid::{symbols, Repr, SpacetimeGrid, SpatialGrid, Spectrum, C64};
use crate::spaces::WindowSpec;
use crate::{Error, Result};

/// Gaussian profiles are cut off at this many widths.
pub const GAUSSIAN_CUTOFF: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    /// Anisotropic Gaussian around `λ·center`.
    GaussianBump,
    /// Radial Gaussian profile around the sphere `|ξ| = λ|center|`.
    ShellConcentrated,
    /// Indicator of the box `|ξ_i - λc_i| ≤ λ·width·anisotropy_i`.
    KnappBox,
    /// Uniform random complex amplitudes in the ellipsoid around `λ·center`.
    RandomBandlimited,
}

impl FamilyKind {
    pub const ALL: [FamilyKind; 4] = [
        FamilyKind::GaussianBump,
        FamilyKind::ShellConcentrated,
        FamilyKind::KnappBox,
        FamilyKind::RandomBandlimited,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FamilyKind::GaussianBump => "gaussian-bump",
            FamilyKind::ShellConcentrated => "shell-concentrated",
            FamilyKind::KnappBox => "knapp-box",
            FamilyKind::RandomBandlimited => "random-bandlimited",
        }
    }
}

/// Data descriptor; `center` and `width` are in units of `λ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataFamily {
    pub kind: FamilyKind,
    pub center: [f64; 3],
    pub width: f64,
    #[serde(default = "unit_anisotropy")]
    pub anisotropy: [f64; 3],
    #[serde(default = "unit_amplitude")]
    pub amplitude: f64,
    #[serde(default)]
    pub seed: u64,
}

fn unit_anisotropy() -> [f64; 3] {
    [1.0; 3]
}

fn unit_amplitude() -> f64 {
    1.0
}

fn norm(v: [f64; 3]) -> f64 {
    symbols::norm(v)
}

impl DataFamily {
    pub fn new(kind: FamilyKind, center: [f64; 3], width: f64) -> Self {
        Self {
            kind,
            center,
            width,
            anisotropy: unit_anisotropy(),
            amplitude: 1.0,
            seed: 0,
        }
    }

    pub fn gaussian(center: [f64; 3], width: f64) -> Self {
        Self::new(FamilyKind::GaussianBump, center, width)
    }

    pub fn shell(radius: f64, width: f64) -> Self {
        Self::new(FamilyKind::ShellConcentrated, [0.0, 0.0, radius], width)
    }

    pub fn knapp(center: [f64; 3], width: f64, anisotropy: [f64; 3]) -> Self {
        Self {
            anisotropy,
            ..Self::new(FamilyKind::KnappBox, center, width)
        }
    }

    pub fn random(center: [f64; 3], width: f64, seed: u64) -> Self {
        Self {
            seed,
            ..Self::new(FamilyKind::RandomBandlimited, center, width)
        }
    }

    pub fn with_kind(self, kind: FamilyKind) -> Self {
        Self { kind, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    pub fn with_amplitude(self, amplitude: f64) -> Self {
        Self { amplitude, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.center.iter().chain(&self.anisotropy).all(|v| v.is_finite())
            && self.width.is_finite()
            && self.amplitude.is_finite();
        if !finite {
            return Err(Error::Parameter("family parameters must be finite".into()));
        }
        if self.width <= 0.0 {
            return Err(Error::Parameter(format!(
                "family width must be positive, got {}",
                self.width
            )));
        }
        if self.anisotropy.iter().any(|a| *a <= 0.0) {
            return Err(Error::Parameter(format!(
                "anisotropy must be positive, got {:?}",
                self.anisotropy
            )));
        }
        Ok(())
    }

    /// Radius, in units of `λ`, of a ball containing the support.
    pub fn extent(&self) -> f64 {
        let c = norm(self.center);
        let amax = self.anisotropy.iter().cloned().fold(0.0, f64::max);
        match self.kind {
            FamilyKind::GaussianBump => c + GAUSSIAN_CUTOFF * self.width * amax,
            FamilyKind::ShellConcentrated => c + GAUSSIAN_CUTOFF * self.width,
            FamilyKind::KnappBox => c + self.width * norm(self.anisotropy),
            FamilyKind::RandomBandlimited => c + self.width * amax,
        }
    }

    /// Frequency-side profile at scale `λ`. The result vanishes at and beyond
    /// the Nyquist radius and on the unpaired `-N/2` planes.
    pub fn spectrum(&self, grid: &SpatialGrid, lambda: f64) -> Result<Spectrum> {
        self.validate()?;
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Parameter(format!("scale λ = {lambda} must be positive")));
        }
        let (c, w, a) = (self.center, self.width, self.anisotropy);
        let amp = self.amplitude;
        let nyq = grid.nyquist();
        let edge = -((grid.n() / 2) as i64);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut data = Vec::with_capacity(grid.len());
        for k in 0..grid.len() {
            let xi = grid.freq_vec(k);
            let idx = grid.unravel(k);
            let y = [0, 1, 2].map(|i| (xi[i] / lambda - c[i]) / (w * a[i]));
            let value = match self.kind {
                FamilyKind::GaussianBump => {
                    let q = y.iter().map(|v| v * v).sum::<f64>();
                    if q <= GAUSSIAN_CUTOFF * GAUSSIAN_CUTOFF {
                        C64::new(amp * (-0.5 * q).exp(), 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                }
                FamilyKind::ShellConcentrated => {
                    let d = (norm(xi) / lambda - norm(c)) / w;
                    if d.abs() <= GAUSSIAN_CUTOFF {
                        C64::new(amp * (-0.5 * d * d).exp(), 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                }
                FamilyKind::KnappBox => {
                    if y.iter().all(|v| v.abs() <= 1.0) {
                        C64::new(amp, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                }
                FamilyKind::RandomBandlimited => {
                    if y.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
                        let re: f64 = rng.gen_range(-1.0..1.0);
                        let im: f64 = rng.gen_range(-1.0..1.0);
                        C64::new(amp * re, amp * im)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                }
            };
            let outside = norm(xi) >= nyq || idx.iter().any(|i| grid.wave_number(*i) == edge);
            data.push(if outside { C64::new(0.0, 0.0) } else { value });
        }
        Spectrum::from_parts(*grid, Repr::Frequency, data)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LatticeMode {
    /// Frequency spacing `λ/cells_per_lambda`, so every scale sees the same
    /// discrete problem up to dilation.
    Covariant,
    /// One lattice of half-length `half_len` for all scales.
    Fixed { half_len: f64 },
}

/// Space-time lattice family for a `λ` ladder. The time box equals the space
/// box and carries the canonical window of full support.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub n: usize,
    pub m: usize,
    pub cells_per_lambda: f64,
    pub mode: LatticeMode,
}

impl Default for LatticeSpec {
    fn default() -> Self {
        Self {
            n: 16,
            m: 32,
            cells_per_lambda: 3.0,
            mode: LatticeMode::Covariant,
        }
    }
}

impl LatticeSpec {
    pub fn covariant(n: usize, m: usize) -> Self {
        Self {
            n,
            m,
            ..Self::default()
        }
    }

    pub fn fixed(n: usize, m: usize, half_len: f64) -> Self {
        Self {
            n,
            m,
            cells_per_lambda: 3.0,
            mode: LatticeMode::Fixed { half_len },
        }
    }

    pub fn grid_for(&self, lambda: f64) -> Result<SpacetimeGrid> {
        let half_len = match self.mode {
            LatticeMode::Covariant => {
                if !(self.cells_per_lambda > 0.0 && lambda > 0.0) {
                    return Err(Error::Parameter(format!(
                        "covariant lattice needs positive λ and cells per λ, got {lambda}, {}",
                        self.cells_per_lambda
                    )));
                }
                std::f64::consts::PI * self.cells_per_lambda / lambda
            }
            LatticeMode::Fixed { half_len } => half_len,
        };
        SpacetimeGrid::new(SpatialGrid::new(self.n, half_len)?, self.m, half_len)
    }

    pub fn window_for(&self, grid: &SpacetimeGrid) -> Result<WindowSpec> {
        WindowSpec::canonical(grid.half_time())
    }

    /// Fails unless data of radius `radius` fit below the spatial Nyquist
    /// radius and products of two such waves fit in the temporal band.
    pub fn check_headroom(&self, grid: &SpacetimeGrid, radius: f64) -> Result<()> {
        let nyq = grid.spatial().nyquist();
        let tau_max = 0.5 * grid.m() as f64 * grid.dtau();
        if radius > nyq {
            return Err(Error::Headroom(format!(
                "data radius {radius:.4} exceeds the Nyquist radius {nyq:.4}"
            )));
        }
        if 2.0 * radius > tau_max {
            return Err(Error::Headroom(format!(
                "product frequencies up to {:.4} exceed the temporal band {tau_max:.4}",
                2.0 * radius
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn families() -> Vec<DataFamily> {
        vec![
            DataFamily::gaussian([0.0, 0.0, 1.0], 0.35),
            DataFamily::shell(1.0, 0.2),
            DataFamily::knapp([0.0, 0.0, 1.0], 0.3, [1.0, 1.0, 0.5]),
            DataFamily::random([0.0, 0.0, 1.0], 0.5, 3),
        ]
    }

    #[test]
    fn spectra_are_band_limited() {
        let lat = LatticeSpec::default();
        for lambda in [2.0, 16.0] {
            let g = lat.grid_for(lambda).unwrap();
            let sg = g.spatial();
            for fam in families() {
                lat.check_headroom(&g, fam.extent() * lambda).unwrap();
                let s = fam.spectrum(sg, lambda).unwrap();
                assert!(s.max_abs() > 0.0);
                for (k, v) in s.data().iter().enumerate() {
                    let xi = sg.freq_vec(k);
                    if norm(xi) >= sg.nyquist() || norm(xi) > fam.extent() * lambda * (1.0 + 1e-12) {
                        assert_eq!(*v, C64::new(0.0, 0.0), "{:?}", fam.kind);
                    }
                    if sg.unravel(k).iter().any(|i| sg.wave_number(*i) == -8) {
                        assert_eq!(*v, C64::new(0.0, 0.0));
                    }
                }
            }
        }
    }

    #[test]
    fn covariant_lattices_are_dilations() {
        let lat = LatticeSpec::default();
        for fam in families() {
            let a = fam.spectrum(lat.grid_for(2.0).unwrap().spatial(), 2.0).unwrap();
            let b = fam.spectrum(lat.grid_for(8.0).unwrap().spatial(), 8.0).unwrap();
            for (x, y) in a.data().iter().zip(b.data()) {
                assert!((x - y).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn random_family_is_seeded() {
        let g = SpatialGrid::new(8, 3.0).unwrap();
        let f = DataFamily::random([0.0; 3], 0.5, 11);
        let a = f.spectrum(&g, 2.0).unwrap();
        assert_eq!(a.data(), f.spectrum(&g, 2.0).unwrap().data());
        assert_ne!(a.data(), f.with_seed(12).spectrum(&g, 2.0).unwrap().data());
    }

    #[test]
    fn headroom_and_parameter_errors() {
        let lat = LatticeSpec::default();
        let g = lat.grid_for(4.0).unwrap();
        let e = lat.check_headroom(&g, 3.0 * 4.0).unwrap_err();
        assert!(matches!(e, Error::Headroom(_)));
        assert!(DataFamily::gaussian([0.0; 3], 0.0).spectrum(g.spatial(), 1.0).is_err());
        assert!(DataFamily::gaussian([0.0; 3], 0.1).spectrum(g.spatial(), -1.0).is_err());
    }
}
