//! Uniform sample grids and FFT fitting.
//!
//! A grid of shape `(M_0, …, M_{2n−1})` holds the points `u_j = i_j / M_j`,
//! stored row-major with axis 0 slowest. An axis with `M_j = 1` is sampled at
//! `u_j = 0` only, which is exact for fields independent of that coordinate.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::{FourierError, Result, TorusField, MAX_DIM};

/// What the fit threw away.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitReport {
    /// `Σ|c|²` over bins outside the cutoff box (including Nyquist bins).
    pub discarded_energy: f64,
    /// `Σ|c|²` over all bins.
    pub total_energy: f64,
    /// Set when the discarded energy is not negligible, so the fit may be aliased.
    pub alias_risk: bool,
}

/// Relative discarded energy above which a fit is flagged.
pub const ALIAS_WARN_FRACTION: f64 = 1e-20;

/// Grid shape resolving `cutoff` on the given active axes: `2N+2` there, 1 elsewhere.
pub fn shape_for(active: &[bool], cutoff: usize) -> Vec<usize> {
    active
        .iter()
        .map(|&a| if a { 2 * cutoff + 2 } else { 1 })
        .collect()
}

/// Coordinates of the flat grid index `idx`.
pub fn grid_point(shape: &[usize], mut idx: usize, out: &mut [f64]) {
    for j in (0..shape.len()).rev() {
        let i = idx % shape[j];
        idx /= shape[j];
        out[j] = i as f64 / shape[j] as f64;
    }
}

/// All grid points, row-major.
pub fn grid_points(shape: &[usize]) -> Vec<Vec<f64>> {
    let total: usize = shape.iter().product();
    (0..total)
        .map(|idx| {
            let mut p = vec![0.0; shape.len()];
            grid_point(shape, idx, &mut p);
            p
        })
        .collect()
}

fn fft_nd(data: &mut [Complex64], shape: &[usize], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let total: usize = shape.iter().product();
    for axis in 0..shape.len() {
        let m = shape[axis];
        if m == 1 {
            continue;
        }
        let fft = if inverse {
            planner.plan_fft_inverse(m)
        } else {
            planner.plan_fft_forward(m)
        };
        let stride: usize = shape[axis + 1..].iter().product();
        let mut line = vec![Complex64::default(); m];
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        for outer in 0..total / (m * stride) {
            for inner in 0..stride {
                let base = outer * m * stride + inner;
                for k in 0..m {
                    line[k] = data[base + k * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for k in 0..m {
                    data[base + k * stride] = line[k];
                }
            }
        }
    }
}

/// Exact values of `field` at every grid point (aliasing folds modes into bins
/// but does not change point values).
pub fn sample_on_grid(field: &TorusField, shape: &[usize]) -> Result<Vec<Complex64>> {
    let dim = field.dim();
    if shape.len() != dim || shape.iter().any(|&m| m == 0) {
        return Err(FourierError::DimensionMismatch(format!(
            "grid shape {shape:?} for torus dimension {dim}"
        )));
    }
    let total: usize = shape.iter().product();
    let mut data = vec![Complex64::default(); total];
    for (m, c) in field.iter() {
        let mut idx = 0usize;
        for j in 0..dim {
            let mj = shape[j] as i64;
            idx = idx * shape[j] + (m[j] as i64).rem_euclid(mj) as usize;
        }
        data[idx] += c;
    }
    fft_nd(&mut data, shape, true);
    Ok(data)
}

fn bin_frequency(bin: usize, m: usize) -> Option<i64> {
    if 2 * bin < m {
        Some(bin as i64)
    } else if 2 * bin > m {
        Some(bin as i64 - m as i64)
    } else {
        None
    }
}

/// Fit a truncated series to grid samples. Coefficients with
/// `|c| ≤ prune_rel · max|c|` are dropped.
pub fn fit_from_samples(
    n: usize,
    cutoff: usize,
    shape: &[usize],
    samples: &[Complex64],
    real_valued: bool,
    prune_rel: f64,
) -> Result<(TorusField, FitReport)> {
    let dim = 2 * n;
    if shape.len() != dim || dim > MAX_DIM {
        return Err(FourierError::DimensionMismatch(format!(
            "grid shape {shape:?} for torus dimension {dim}"
        )));
    }
    let total: usize = shape.iter().product();
    if samples.len() != total {
        return Err(FourierError::DimensionMismatch(format!(
            "{} samples for grid of {total} points",
            samples.len()
        )));
    }
    if shape.iter().any(|&m| m > 1 && m < 2 * cutoff + 1) {
        return Err(FourierError::AliasRisk {
            shape: shape.to_vec(),
            cutoff,
        });
    }
    let mut data = samples.to_vec();
    fft_nd(&mut data, shape, false);
    let norm = 1.0 / total as f64;
    let mut field = TorusField::zero(n, cutoff, false);
    let mut discarded = 0.0;
    let mut energy = 0.0;
    let mut kept = Vec::new();
    let mut bins = vec![0usize; dim];
    for (idx, v) in data.iter().enumerate() {
        let c = v * norm;
        let e = c.norm_sqr();
        energy += e;
        let mut rem = idx;
        for j in (0..dim).rev() {
            bins[j] = rem % shape[j];
            rem /= shape[j];
        }
        let mut m = [0i32; MAX_DIM];
        let mut inside = true;
        for j in 0..dim {
            match bin_frequency(bins[j], shape[j]) {
                Some(k) if k.unsigned_abs() as usize <= cutoff => m[j] = k as i32,
                _ => inside = false,
            }
        }
        if inside {
            kept.push((m, c));
        } else {
            discarded += e;
        }
    }
    let cmax = kept.iter().map(|(_, c)| c.norm()).fold(0.0, f64::max);
    let tol = prune_rel * cmax;
    for (m, c) in kept {
        if c.norm() > tol {
            field.set(&m[..dim], c)?;
        }
    }
    if real_valued {
        field.symmetrize_real();
    }
    let alias_risk = discarded > ALIAS_WARN_FRACTION * energy.max(f64::MIN_POSITIVE);
    Ok((
        field,
        FitReport {
            discarded_energy: discarded,
            total_energy: energy,
            alias_risk,
        },
    ))
}

/// Real samples of a real field through the exact FFT synthesis.
pub fn sample_real(field: &TorusField, shape: &[usize]) -> Result<Vec<f64>> {
    Ok(sample_on_grid(field, shape)?
        .into_iter()
        .map(|c| c.re)
        .collect())
}

/// Fit real samples.
pub fn fit_real(
    n: usize,
    cutoff: usize,
    shape: &[usize],
    samples: &[f64],
    prune_rel: f64,
) -> Result<(TorusField, FitReport)> {
    let c: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    fit_from_samples(n, cutoff, shape, &c, true, prune_rel)
}

/// `exp(2πi k u)` for `k = −K..=K`, computed directly per entry.
pub fn phase_table(u: f64, k_max: usize) -> Vec<Complex64> {
    let frac = u - u.floor();
    (0..=2 * k_max)
        .map(|i| {
            let k = i as f64 - k_max as f64;
            let s = k * frac;
            let th = 2.0 * PI * (s - s.round());
            Complex64::new(th.cos(), th.sin())
        })
        .collect()
}
