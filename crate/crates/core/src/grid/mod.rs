//! Space and space-time lattices with continuum-normalised Fourier transforms.
//!
//! The periodic box `[-L, L)^3` stands in for `R^3`. Frequencies live on the
//! lattice `ξ = jπ/L`, `j ∈ {-N/2, …, N/2 - 1}`, stored in ascending order so
//! that flat index `k` corresponds to wave number `k - N/2` on every axis.
//! Space-time arrays are time-major: `[m][i0][i1][i2]`.

pub(crate) mod fft;

use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use fft::Direction;

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpatialGrid {
    n: usize,
    half_len: f64,
}

impl SpatialGrid {
    pub fn new(n: usize, half_len: f64) -> Result<Self> {
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "points per axis must be even and >= 4, got {n}"
            )));
        }
        if !(half_len.is_finite() && half_len > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half side length must be positive, got {half_len}"
            )));
        }
        Ok(Self { n, half_len })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_len(&self) -> f64 {
        self.half_len
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.half_len / self.n as f64
    }

    pub fn dxi(&self) -> f64 {
        PI / self.half_len
    }

    /// Number of lattice sites, `N^3`.
    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Largest representable positive frequency along an axis.
    pub fn nyquist(&self) -> f64 {
        (self.n / 2) as f64 * self.dxi()
    }

    pub fn coord(&self, i: usize) -> f64 {
        -self.half_len + i as f64 * self.dx()
    }

    /// Signed wave number of ascending index `k`.
    pub fn wave_number(&self, k: usize) -> i64 {
        k as i64 - (self.n / 2) as i64
    }

    pub fn freq(&self, k: usize) -> f64 {
        self.wave_number(k) as f64 * self.dxi()
    }

    pub fn unravel(&self, flat: usize) -> [usize; 3] {
        let n = self.n;
        [flat / (n * n), (flat / n) % n, flat % n]
    }

    pub fn flat(&self, idx: [usize; 3]) -> usize {
        (idx[0] * self.n + idx[1]) * self.n + idx[2]
    }

    pub fn point(&self, flat: usize) -> [f64; 3] {
        let [a, b, c] = self.unravel(flat);
        [self.coord(a), self.coord(b), self.coord(c)]
    }

    pub fn freq_vec(&self, flat: usize) -> [f64; 3] {
        let [a, b, c] = self.unravel(flat);
        [self.freq(a), self.freq(b), self.freq(c)]
    }

    /// Flat index of an integer wave-number triple, if it lies on the lattice.
    pub fn index_of_wave_number(&self, w: [i64; 3]) -> Option<usize> {
        let half = (self.n / 2) as i64;
        let mut idx = [0usize; 3];
        for a in 0..3 {
            let k = w[a] + half;
            if k < 0 || k >= self.n as i64 {
                return None;
            }
            idx[a] = k as usize;
        }
        Some(self.flat(idx))
    }

    /// Grid with the same frequency spacing and twice the band, large enough
    /// to hold the full (non-periodic) convolution of two spectra on `self`.
    pub fn padded(&self) -> SpatialGrid {
        SpatialGrid {
            n: 2 * self.n,
            half_len: self.half_len,
        }
    }

    pub fn same_as(&self, other: &SpatialGrid) -> bool {
        self.n == other.n && self.half_len == other.half_len
    }

    fn shape(&self) -> [usize; 3] {
        [self.n; 3]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpacetimeGrid {
    spatial: SpatialGrid,
    m: usize,
    half_time: f64,
}

impl SpacetimeGrid {
    pub fn new(spatial: SpatialGrid, m: usize, half_time: f64) -> Result<Self> {
        if m < 4 || !m.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "time points must be even and >= 4, got {m}"
            )));
        }
        if !(half_time.is_finite() && half_time > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half time window must be positive, got {half_time}"
            )));
        }
        Ok(Self { spatial, m, half_time })
    }

    pub fn spatial(&self) -> &SpatialGrid {
        &self.spatial
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn half_time(&self) -> f64 {
        self.half_time
    }

    pub fn dt(&self) -> f64 {
        2.0 * self.half_time / self.m as f64
    }

    pub fn dtau(&self) -> f64 {
        PI / self.half_time
    }

    pub fn time(&self, m: usize) -> f64 {
        -self.half_time + m as f64 * self.dt()
    }

    pub fn tau(&self, k: usize) -> f64 {
        (k as f64 - (self.m / 2) as f64) * self.dtau()
    }

    /// Index of the time origin, placed at the lattice centre.
    pub fn origin(&self) -> usize {
        self.m / 2
    }

    pub fn len(&self) -> usize {
        self.m * self.spatial.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Same time lattice over [`SpatialGrid::padded`].
    pub fn padded(&self) -> SpacetimeGrid {
        SpacetimeGrid {
            spatial: self.spatial.padded(),
            ..*self
        }
    }

    pub fn same_as(&self, other: &SpacetimeGrid) -> bool {
        self.spatial.same_as(&other.spatial) && self.m == other.m && self.half_time == other.half_time
    }

    fn shape(&self) -> [usize; 4] {
        let n = self.spatial.n;
        [self.m, n, n, n]
    }
}

/// Which variables an array is expressed in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Repr {
    /// `(x)` or `(t, x)`.
    Configuration,
    /// `(ξ)` or `(τ, ξ)`.
    Frequency,
    /// `(t, ξ)`: space-time arrays only.
    Mixed,
}

impl Repr {
    pub fn name(self) -> &'static str {
        match self {
            Repr::Configuration => "configuration",
            Repr::Frequency => "frequency",
            Repr::Mixed => "mixed",
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Repr::Configuration => 0,
            Repr::Frequency => 1,
            Repr::Mixed => 2,
        }
    }

    pub fn from_code(c: u8) -> Option<Self> {
        match c {
            0 => Some(Repr::Configuration),
            1 => Some(Repr::Frequency),
            2 => Some(Repr::Mixed),
            _ => None,
        }
    }
}

fn expect(found: Repr, expected: Repr) -> Result<()> {
    if found == expected {
        Ok(())
    } else {
        Err(Error::Representation {
            expected: expected.name(),
            found: found.name(),
        })
    }
}

/// Complex samples over a [`SpatialGrid`], in configuration or frequency form.
#[derive(Clone, Debug, PartialEq)]
pub struct Field {
    grid: SpatialGrid,
    repr: Repr,
    data: Vec<C64>,
}

/// A [`Field`] in frequency representation.
pub type Spectrum = Field;

impl Field {
    pub fn zeros(grid: SpatialGrid, repr: Repr) -> Self {
        Self {
            grid,
            repr,
            data: vec![ZERO; grid.len()],
        }
    }

    pub fn from_parts(grid: SpatialGrid, repr: Repr, data: Vec<C64>) -> Result<Self> {
        if repr == Repr::Mixed {
            return Err(Error::Representation {
                expected: "configuration or frequency",
                found: repr.name(),
            });
        }
        if data.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                data.len()
            )));
        }
        Ok(Self { grid, repr, data })
    }

    /// Samples `f` at the configuration lattice.
    pub fn from_config_fn(grid: SpatialGrid, f: impl Fn([f64; 3]) -> C64) -> Self {
        let data = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self {
            grid,
            repr: Repr::Configuration,
            data,
        }
    }

    /// Samples `f` at the frequency lattice.
    pub fn from_spectrum_fn(grid: SpatialGrid, f: impl Fn([f64; 3]) -> C64) -> Self {
        let data = (0..grid.len()).map(|i| f(grid.freq_vec(i))).collect();
        Self {
            grid,
            repr: Repr::Frequency,
            data,
        }
    }

    pub fn grid(&self) -> &SpatialGrid {
        &self.grid
    }

    pub fn repr(&self) -> Repr {
        self.repr
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn expect_repr(&self, repr: Repr) -> Result<()> {
        expect(self.repr, repr)
    }

    pub fn scaled(&self, alpha: C64) -> Self {
        Self {
            data: self.data.iter().map(|v| alpha * v).collect(),
            ..self.clone()
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: C64, other: &Field, b: C64) -> Result<Self> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch("fields live on different grids".into()));
        }
        expect(other.repr, self.repr)?;
        let data = self.data.iter().zip(&other.data).map(|(x, y)| a * x + b * y).collect();
        Ok(Self { data, ..self.clone() })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Discrete `L^2` norm with the Riemann weight of the representation.
    pub fn l2_norm(&self) -> f64 {
        let w = match self.repr {
            Repr::Frequency => (self.grid.dxi() / (2.0 * PI)).powi(3),
            _ => self.grid.dx().powi(3),
        };
        (w * self.data.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }
}

/// `F(ξ) = (Δx)^3 Σ_x f(x) e^{-i⟨x, ξ⟩}`.
pub fn forward_transform(f: &Field) -> Result<Spectrum> {
    f.expect_repr(Repr::Configuration)?;
    let mut data = f.data.clone();
    let dx = f.grid.dx();
    fft::transform_axes(
        &mut data,
        &f.grid.shape(),
        &[(0, dx), (1, dx), (2, dx)],
        Direction::Forward,
    );
    Ok(Field {
        grid: f.grid,
        repr: Repr::Frequency,
        data,
    })
}

/// Exact inverse of [`forward_transform`].
pub fn inverse_transform(spec: &Spectrum) -> Result<Field> {
    spec.expect_repr(Repr::Frequency)?;
    let mut data = spec.data.clone();
    let dx = spec.grid.dx();
    fft::transform_axes(
        &mut data,
        &spec.grid.shape(),
        &[(0, dx), (1, dx), (2, dx)],
        Direction::Inverse,
    );
    Ok(Field {
        grid: spec.grid,
        repr: Repr::Configuration,
        data,
    })
}

/// Pointwise `m(ξ)·F(ξ)`.
pub fn apply_multiplier(spec: &Spectrum, m: impl Fn([f64; 3]) -> C64) -> Result<Spectrum> {
    spec.expect_repr(Repr::Frequency)?;
    let mut out = spec.clone();
    for (i, v) in out.data.iter_mut().enumerate() {
        let xi = spec.grid.freq_vec(i);
        let w = m(xi);
        if !(w.re.is_finite() && w.im.is_finite()) {
            return Err(Error::NonFiniteMultiplier {
                xi,
                value: format!("{w}"),
            });
        }
        *v *= w;
    }
    Ok(out)
}

/// Standard Fourier multipliers.
pub mod symbols {
    use super::C64;

    pub fn norm(xi: [f64; 3]) -> f64 {
        (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt()
    }

    /// `⟨ξ⟩ = (1 + |ξ|^2)^{1/2}`.
    pub fn japanese(xi: [f64; 3]) -> f64 {
        (1.0 + xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt()
    }

    /// `J_x^s`, symbol `⟨ξ⟩^s`.
    pub fn bessel(s: f64) -> impl Fn([f64; 3]) -> C64 + Copy {
        move |xi| C64::new(japanese(xi).powf(s), 0.0)
    }

    /// `D_x^s`, symbol `|ξ|^s`.
    pub fn riesz(s: f64) -> impl Fn([f64; 3]) -> C64 + Copy {
        move |xi| C64::new(norm(xi).powf(s), 0.0)
    }

    /// `∂_{x_j}`, symbol `iξ_j`.
    pub fn partial(j: usize) -> impl Fn([f64; 3]) -> C64 + Copy {
        move |xi| C64::new(0.0, xi[j])
    }
}

/// Complex samples over a [`SpacetimeGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct SpacetimeField {
    grid: SpacetimeGrid,
    repr: Repr,
    data: Vec<C64>,
}

/// A [`SpacetimeField`] in `(τ, ξ)` representation.
pub type SpacetimeSpectrum = SpacetimeField;

impl SpacetimeField {
    pub fn zeros(grid: SpacetimeGrid, repr: Repr) -> Self {
        Self {
            grid,
            repr,
            data: vec![ZERO; grid.len()],
        }
    }

    pub fn from_parts(grid: SpacetimeGrid, repr: Repr, data: Vec<C64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "expected {} samples, got {}",
                grid.len(),
                data.len()
            )));
        }
        Ok(Self { grid, repr, data })
    }

    /// Samples `f(t, x)` on the configuration lattice.
    pub fn from_config_fn(grid: SpacetimeGrid, f: impl Fn(f64, [f64; 3]) -> C64) -> Self {
        let s = grid.spatial;
        let n3 = s.len();
        let data = (0..grid.len()).map(|i| f(grid.time(i / n3), s.point(i % n3))).collect();
        Self {
            grid,
            repr: Repr::Configuration,
            data,
        }
    }

    /// Stacks per-time slices (all in the same representation).
    pub fn from_slices(grid: SpacetimeGrid, slices: &[Field]) -> Result<Self> {
        if slices.len() != grid.m {
            return Err(Error::GridMismatch(format!(
                "expected {} time slices, got {}",
                grid.m,
                slices.len()
            )));
        }
        let repr = match slices[0].repr {
            Repr::Configuration => Repr::Configuration,
            _ => Repr::Mixed,
        };
        let mut data = Vec::with_capacity(grid.len());
        for s in slices {
            if !s.grid.same_as(&grid.spatial) || s.repr != slices[0].repr {
                return Err(Error::GridMismatch("inconsistent time slices".into()));
            }
            data.extend_from_slice(&s.data);
        }
        Ok(Self { grid, repr, data })
    }

    pub fn grid(&self) -> &SpacetimeGrid {
        &self.grid
    }

    pub fn repr(&self) -> Repr {
        self.repr
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<C64> {
        self.data
    }

    pub fn expect_repr(&self, repr: Repr) -> Result<()> {
        expect(self.repr, repr)
    }

    pub fn check_grid(&self, other: &SpacetimeField) -> Result<()> {
        if self.grid.same_as(&other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch("space-time fields live on different grids".into()))
        }
    }

    /// Samples at time index `m` (configuration or mixed form only).
    pub fn slice(&self, m: usize) -> &[C64] {
        let n3 = self.grid.spatial.len();
        &self.data[m * n3..(m + 1) * n3]
    }

    pub fn slice_mut(&mut self, m: usize) -> &mut [C64] {
        let n3 = self.grid.spatial.len();
        &mut self.data[m * n3..(m + 1) * n3]
    }

    /// Time slice `m` as a spatial field.
    pub fn slice_field(&self, m: usize) -> Result<Field> {
        let repr = match self.repr {
            Repr::Configuration => Repr::Configuration,
            Repr::Mixed => Repr::Frequency,
            Repr::Frequency => {
                return Err(Error::Representation {
                    expected: "configuration or mixed",
                    found: "frequency",
                })
            }
        };
        Field::from_parts(self.grid.spatial, repr, self.slice(m).to_vec())
    }

    pub fn scaled(&self, alpha: C64) -> Self {
        Self {
            data: self.data.iter().map(|v| alpha * v).collect(),
            ..self.clone()
        }
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: C64, other: &SpacetimeField, b: C64) -> Result<Self> {
        self.check_grid(other)?;
        expect(other.repr, self.repr)?;
        let data = self.data.iter().zip(&other.data).map(|(x, y)| a * x + b * y).collect();
        Ok(Self { data, ..self.clone() })
    }

    /// Pointwise product in configuration form.
    pub fn multiply(&self, other: &SpacetimeField) -> Result<Self> {
        self.check_grid(other)?;
        self.expect_repr(Repr::Configuration)?;
        other.expect_repr(Repr::Configuration)?;
        let data = self.data.iter().zip(&other.data).map(|(x, y)| x * y).collect();
        Ok(Self { data, ..self.clone() })
    }

    /// Multiplies every time slice by `w(t)` (configuration or mixed form).
    pub fn apply_time_weight(&self, w: impl Fn(f64) -> f64) -> Result<Self> {
        if self.repr == Repr::Frequency {
            return Err(Error::Representation {
                expected: "configuration or mixed",
                found: "frequency",
            });
        }
        let mut out = self.clone();
        for m in 0..self.grid.m {
            let wt = w(self.grid.time(m));
            out.slice_mut(m).iter_mut().for_each(|v| *v *= wt);
        }
        Ok(out)
    }

    fn spatial_axes(&self) -> [(usize, f64); 3] {
        let dx = self.grid.spatial.dx();
        [(1, dx), (2, dx), (3, dx)]
    }

    fn transformed(&self, axes: &[(usize, f64)], dir: Direction, repr: Repr) -> Self {
        let mut data = self.data.clone();
        fft::transform_axes(&mut data, &self.grid.shape(), axes, dir);
        Self {
            grid: self.grid,
            repr,
            data,
        }
    }

    /// `(t, x) → (t, ξ)`.
    pub fn spatial_forward(&self) -> Result<Self> {
        self.expect_repr(Repr::Configuration)?;
        Ok(self.transformed(&self.spatial_axes(), Direction::Forward, Repr::Mixed))
    }

    /// `(t, ξ) → (t, x)`.
    pub fn spatial_inverse(&self) -> Result<Self> {
        self.expect_repr(Repr::Mixed)?;
        Ok(self.transformed(&self.spatial_axes(), Direction::Inverse, Repr::Configuration))
    }

    /// `(t, ξ) → (τ, ξ)` with `𝓕_t u(τ) = Δt Σ_t u(t) e^{-itτ}`.
    pub fn time_forward(&self) -> Result<Self> {
        self.expect_repr(Repr::Mixed)?;
        Ok(self.transformed(&[(0, self.grid.dt())], Direction::Forward, Repr::Frequency))
    }

    /// `(τ, ξ) → (t, ξ)`.
    pub fn time_inverse(&self) -> Result<Self> {
        self.expect_repr(Repr::Frequency)?;
        Ok(self.transformed(&[(0, self.grid.dt())], Direction::Inverse, Repr::Mixed))
    }

    /// Full space-time transform `(t, x) → (τ, ξ)`.
    pub fn forward(&self) -> Result<Self> {
        self.expect_repr(Repr::Configuration)?;
        let mut axes = vec![(0, self.grid.dt())];
        axes.extend_from_slice(&self.spatial_axes());
        Ok(self.transformed(&axes, Direction::Forward, Repr::Frequency))
    }

    /// Full inverse `(τ, ξ) → (t, x)`.
    pub fn inverse(&self) -> Result<Self> {
        self.expect_repr(Repr::Frequency)?;
        let mut axes = vec![(0, self.grid.dt())];
        axes.extend_from_slice(&self.spatial_axes());
        Ok(self.transformed(&axes, Direction::Inverse, Repr::Configuration))
    }

    /// Brings the field to `(τ, ξ)` from any representation.
    pub fn to_frequency(&self) -> Result<Self> {
        match self.repr {
            Repr::Frequency => Ok(self.clone()),
            Repr::Mixed => self.time_forward(),
            Repr::Configuration => self.forward(),
        }
    }

    /// Brings the field to `(t, ξ)` from any representation.
    pub fn to_mixed(&self) -> Result<Self> {
        match self.repr {
            Repr::Mixed => Ok(self.clone()),
            Repr::Frequency => self.time_inverse(),
            Repr::Configuration => self.spatial_forward(),
        }
    }

    /// Brings the field to `(t, x)` from any representation.
    pub fn to_configuration(&self) -> Result<Self> {
        match self.repr {
            Repr::Configuration => Ok(self.clone()),
            Repr::Mixed => self.spatial_inverse(),
            Repr::Frequency => self.inverse(),
        }
    }

    /// Multiplies by a spatial symbol `m(ξ)` (mixed or frequency form).
    pub fn apply_spatial_multiplier(&self, m: impl Fn([f64; 3]) -> C64) -> Result<Self> {
        if self.repr == Repr::Configuration {
            return Err(Error::Representation {
                expected: "mixed or frequency",
                found: "configuration",
            });
        }
        let s = self.grid.spatial;
        let symbol: Vec<C64> = (0..s.len()).map(|i| m(s.freq_vec(i))).collect();
        if let Some(i) = symbol.iter().position(|w| !(w.re.is_finite() && w.im.is_finite())) {
            return Err(Error::NonFiniteMultiplier {
                xi: s.freq_vec(i),
                value: format!("{}", symbol[i]),
            });
        }
        let mut out = self.clone();
        for chunk in out.data.chunks_mut(s.len()) {
            for (v, w) in chunk.iter_mut().zip(&symbol) {
                *v *= w;
            }
        }
        Ok(out)
    }

    /// Multiplies by a space-time symbol `m(ξ, τ)` (frequency form).
    pub fn apply_multiplier(&self, m: impl Fn([f64; 3], f64) -> C64) -> Result<Self> {
        self.expect_repr(Repr::Frequency)?;
        let s = self.grid.spatial;
        let n3 = s.len();
        let mut out = self.clone();
        for (i, v) in out.data.iter_mut().enumerate() {
            let xi = s.freq_vec(i % n3);
            let w = m(xi, self.grid.tau(i / n3));
            if !(w.re.is_finite() && w.im.is_finite()) {
                return Err(Error::NonFiniteMultiplier {
                    xi,
                    value: format!("{w}"),
                });
            }
            *v *= w;
        }
        Ok(out)
    }

    /// Discrete space-time `L^2` norm with the weight of the representation.
    pub fn l2_norm(&self) -> f64 {
        let s = self.grid.spatial;
        let w = match self.repr {
            Repr::Configuration => s.dx().powi(3) * self.grid.dt(),
            Repr::Mixed => (s.dxi() / (2.0 * PI)).powi(3) * self.grid.dt(),
            Repr::Frequency => (s.dxi() / (2.0 * PI)).powi(3) * self.grid.dtau() / (2.0 * PI),
        };
        (w * self.data.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: SpatialGrid, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..grid.len())
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        Field::from_parts(grid, Repr::Configuration, data).unwrap()
    }

    fn rel_err(a: &[C64], b: &[C64]) -> f64 {
        let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
        let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
        (num / den.max(1e-300)).sqrt()
    }

    #[test]
    fn grid_rejects_bad_sizes() {
        assert!(SpatialGrid::new(5, 1.0).is_err());
        assert!(SpatialGrid::new(2, 1.0).is_err());
        assert!(SpatialGrid::new(8, 0.0).is_err());
        let g = SpatialGrid::new(8, 1.0).unwrap();
        assert!(SpacetimeGrid::new(g, 7, 1.0).is_err());
        assert!(SpacetimeGrid::new(g, 8, -1.0).is_err());
    }

    #[test]
    fn spacing_product() {
        let g = SpatialGrid::new(12, 3.7).unwrap();
        let expect = 2.0 * PI / 12.0;
        assert!((g.dx() * g.dxi() - expect).abs() < 1e-15);
        assert_eq!(g.wave_number(0), -6);
        assert_eq!(g.wave_number(11), 5);
    }

    #[test]
    fn zero_maps_to_zero() {
        let g = SpatialGrid::new(8, 2.0).unwrap();
        let f = Field::zeros(g, Repr::Configuration);
        assert_eq!(forward_transform(&f).unwrap().max_abs(), 0.0);
        let s = Field::zeros(g, Repr::Frequency);
        assert_eq!(inverse_transform(&s).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn plane_wave_lands_on_one_mode() {
        let g = SpatialGrid::new(8, 2.0).unwrap();
        let target = g.index_of_wave_number([1, -2, 3]).unwrap();
        let xi0 = g.freq_vec(target);
        let f = Field::from_config_fn(g, |x| {
            C64::from_polar(1.0, x[0] * xi0[0] + x[1] * xi0[1] + x[2] * xi0[2])
        });
        let spec = forward_transform(&f).unwrap();
        let vol = (2.0 * g.half_len()).powi(3);
        for (i, v) in spec.data().iter().enumerate() {
            let want = if i == target { vol } else { 0.0 };
            assert!((v - C64::new(want, 0.0)).norm() < 1e-10 * vol, "mode {i}");
        }
        let back = inverse_transform(&spec).unwrap();
        assert!(rel_err(back.data(), f.data()) < 1e-12);
    }

    #[test]
    fn gaussian_transform_matches_closed_form() {
        let g = SpatialGrid::new(32, 8.0).unwrap();
        let f = Field::from_config_fn(g, |x| {
            C64::new((-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / 2.0).exp(), 0.0)
        });
        let spec = forward_transform(&f).unwrap();
        let cutoff = g.n() as f64 * g.dxi() / 4.0;
        let mut worst: f64 = 0.0;
        for (i, v) in spec.data().iter().enumerate() {
            let xi = g.freq_vec(i);
            let r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
            if r2.sqrt() <= cutoff {
                let want = (2.0 * PI).powf(1.5) * (-r2 / 2.0).exp();
                worst = worst.max((v.re - want).abs() / want + v.im.abs() / want);
            }
        }
        assert!(worst < 1e-6, "worst relative error {worst}");
    }

    #[test]
    fn roundtrip_and_parseval() {
        let g = SpatialGrid::new(10, 1.3).unwrap();
        for seed in 0..4 {
            let f = random_field(g, seed);
            let spec = forward_transform(&f).unwrap();
            let back = inverse_transform(&spec).unwrap();
            assert!(rel_err(back.data(), f.data()) < 1e-12);
            let (a, b) = (f.l2_norm(), spec.l2_norm());
            assert!((a - b).abs() / a < 1e-10);
        }
    }

    #[test]
    fn transforms_are_linear() {
        let g = SpatialGrid::new(8, 1.0).unwrap();
        let (f, h) = (random_field(g, 1), random_field(g, 2));
        let (a, b) = (C64::new(0.3, -1.2), C64::new(-2.0, 0.5));
        let lhs = forward_transform(&f.combine(a, &h, b).unwrap()).unwrap();
        let rhs = forward_transform(&f)
            .unwrap()
            .combine(a, &forward_transform(&h).unwrap(), b)
            .unwrap();
        assert!(rel_err(lhs.data(), rhs.data()) < 1e-12);
    }

    #[test]
    fn wrong_representation_is_rejected() {
        let g = SpatialGrid::new(4, 1.0).unwrap();
        let f = Field::zeros(g, Repr::Frequency);
        assert!(matches!(forward_transform(&f), Err(Error::Representation { .. })));
        assert!(inverse_transform(&Field::zeros(g, Repr::Configuration)).is_err());
        assert!(apply_multiplier(&Field::zeros(g, Repr::Configuration), |_| C64::new(1.0, 0.0)).is_err());
    }

    #[test]
    fn multipliers() {
        let g = SpatialGrid::new(8, PI).unwrap();
        let spec = forward_transform(&random_field(g, 5)).unwrap();
        let same = apply_multiplier(&spec, |_| C64::new(1.0, 0.0)).unwrap();
        assert_eq!(same, spec);
        let there = apply_multiplier(&spec, symbols::bessel(1.0)).unwrap();
        let back = apply_multiplier(&there, symbols::bessel(-1.0)).unwrap();
        assert!(rel_err(back.data(), spec.data()) < 1e-12);
        // Δξ = 1 here, so (1,1,1) has |ξ| = √3 and ⟨ξ⟩ = 2.
        let j = symbols::bessel(1.0);
        assert_eq!(j([0.0; 3]).re, 1.0);
        assert!((j([1.0, 1.0, 1.0]).re - 2.0).abs() < 1e-15);
        // composition is the product of symbols
        let m1 = symbols::riesz(0.5);
        let m2 = symbols::partial(1);
        let twice = apply_multiplier(&apply_multiplier(&spec, m1).unwrap(), m2).unwrap();
        let once = apply_multiplier(&spec, |xi| m1(xi) * m2(xi)).unwrap();
        assert!(rel_err(twice.data(), once.data()) < 1e-15);
    }

    #[test]
    fn non_finite_multiplier_names_frequency() {
        let g = SpatialGrid::new(4, 1.0).unwrap();
        let spec = Field::zeros(g, Repr::Frequency);
        let err = apply_multiplier(&spec, symbols::riesz(-1.0)).unwrap_err();
        match err {
            Error::NonFiniteMultiplier { xi, .. } => assert_eq!(xi, [0.0; 3]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn spacetime_roundtrip_and_parseval() {
        let g = SpacetimeGrid::new(SpatialGrid::new(6, 2.0).unwrap(), 8, 1.5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let data = (0..g.len())
            .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let u = SpacetimeField::from_parts(g, Repr::Configuration, data).unwrap();
        let spec = u.forward().unwrap();
        let staged = u.spatial_forward().unwrap().time_forward().unwrap();
        assert!(rel_err(spec.data(), staged.data()) < 1e-13);
        let back = spec.inverse().unwrap();
        assert!(rel_err(back.data(), u.data()) < 1e-12);
        assert!((spec.l2_norm() - u.l2_norm()).abs() / u.l2_norm() < 1e-10);
    }

    #[test]
    fn time_convention_sign() {
        // e^{+iωt} with ω on the τ lattice concentrates at τ = +ω.
        let s = SpatialGrid::new(4, 1.0).unwrap();
        let g = SpacetimeGrid::new(s, 16, PI).unwrap();
        let k0 = g.origin() + 3;
        let w = g.tau(k0);
        let u = SpacetimeField::from_config_fn(g, |t, _| C64::from_polar(1.0, w * t));
        let spec = u.forward().unwrap();
        let centre = s.index_of_wave_number([0, 0, 0]).unwrap();
        let n3 = s.len();
        let peak = (0..g.m())
            .max_by(|&a, &b| {
                spec.data()[a * n3 + centre]
                    .norm()
                    .total_cmp(&spec.data()[b * n3 + centre].norm())
            })
            .unwrap();
        assert_eq!(peak, k0);
    }
}
