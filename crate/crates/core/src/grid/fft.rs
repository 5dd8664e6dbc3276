//! Continuum-normalised lattice transforms built on rustfft.
//!
//! An axis with `n` samples at spacing `d` carries the physical lattice
//! `x_i = -n d / 2 + i d` and the frequency lattice
//! `ξ_k = (k - n/2) 2π / (n d)`, both stored in ascending order. The forward
//! map is `F(ξ_k) = d Σ_i f(x_i) e^{-i x_i ξ_k}` and the inverse carries the
//! weight `Δξ / 2π = 1 / (n d)`. On this centred layout the phase
//! `e^{-i x_i ξ_k}` factors into `(-1)^{i + k + n/2}` times the plain DFT
//! kernel, so no index shifting is needed.

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::sync::Arc;

use crate::par;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Direction {
    Forward,
    Inverse,
}

fn parity(i: usize) -> f64 {
    if i.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Transforms `data` (row-major with the given `shape`) along one axis.
pub(crate) fn transform_axis(data: &mut [Complex64], shape: &[usize], axis: usize, spacing: f64, dir: Direction) {
    let n = shape[axis];
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    debug_assert_eq!(outer * n * inner, data.len());

    let fft: Arc<dyn Fft<f64>> = {
        let mut planner = FftPlanner::new();
        match dir {
            Direction::Forward => planner.plan_fft(n, FftDirection::Forward),
            Direction::Inverse => planner.plan_fft(n, FftDirection::Inverse),
        }
    };
    let half = n / 2;
    let (pre, post): (Vec<f64>, Vec<f64>) = match dir {
        Direction::Forward => (
            (0..n).map(parity).collect(),
            (0..n).map(|k| parity(k + half) * spacing).collect(),
        ),
        Direction::Inverse => {
            let w = 1.0 / (n as f64 * spacing);
            (
                (0..n).map(|k| parity(k + half)).collect(),
                (0..n).map(|i| parity(i) * w).collect(),
            )
        }
    };
    let scratch_len = fft.get_inplace_scratch_len();
    let process = |scratch: &mut Vec<Complex64>, line: &mut [Complex64]| {
        for (v, p) in line.iter_mut().zip(&pre) {
            *v *= *p;
        }
        fft.process_with_scratch(line, scratch);
        for (v, p) in line.iter_mut().zip(&post) {
            *v *= *p;
        }
    };
    let init = || vec![Complex64::new(0.0, 0.0); scratch_len];

    if inner == 1 {
        par::for_each_chunk_init(data, n, init, process);
        return;
    }

    let block = n * inner;
    let mut tmp = vec![Complex64::new(0.0, 0.0); block];
    for o in 0..outer {
        let src = &mut data[o * block..(o + 1) * block];
        for i in 0..n {
            for j in 0..inner {
                tmp[j * n + i] = src[i * inner + j];
            }
        }
        par::for_each_chunk_init(&mut tmp, n, init, process);
        for i in 0..n {
            for j in 0..inner {
                src[i * inner + j] = tmp[j * n + i];
            }
        }
    }
}

/// Applies [`transform_axis`] over several axes.
pub(crate) fn transform_axes(data: &mut [Complex64], shape: &[usize], axes: &[(usize, f64)], dir: Direction) {
    for &(axis, spacing) in axes {
        transform_axis(data, shape, axis, spacing, dir);
    }
}
