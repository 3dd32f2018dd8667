//! Sample grids sized to the axes a set of fields actually depends on.

use heiskam_fourier::grid::grid_point;

use crate::field::TorusClassVectorField;

/// Uniform grid on 𝕋²ⁿ with `M_j` points on axis `j` (1 on inactive axes).
#[derive(Debug, Clone, PartialEq)]
pub struct SampleGrid {
    n: usize,
    shape: Vec<usize>,
}

impl SampleGrid {
    pub fn from_shape(n: usize, shape: Vec<usize>) -> Self {
        assert_eq!(shape.len(), 2 * n);
        Self { n, shape }
    }

    /// `factor·(cutoff+1)` points (rounded up to even) on every axis where one of
    /// `fields` depends on the variable.
    pub fn for_fields(fields: &[&TorusClassVectorField], cutoff: usize, factor: usize) -> Self {
        let n = fields[0].n();
        let mut act = vec![false; 2 * n];
        for f in fields {
            for (a, b) in act.iter_mut().zip(f.active_axes()) {
                *a |= b;
            }
        }
        Self::for_axes(n, &act, cutoff, factor)
    }

    pub fn for_axes(n: usize, active: &[bool], cutoff: usize, factor: usize) -> Self {
        let m = factor * (cutoff + 1);
        let m = m + m % 2;
        Self {
            n,
            shape: active.iter().map(|&a| if a { m } else { 1 }).collect(),
        }
    }

    /// Odd grid with `m` points on the given axes, for dense checks off the fitting grid.
    pub fn dense(n: usize, active: &[bool], m: usize) -> Self {
        Self {
            n,
            shape: active.iter().map(|&a| if a { m } else { 1 }).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn total(&self) -> usize {
        self.shape.iter().product()
    }

    /// Largest cutoff a fit on this grid resolves.
    pub fn max_cutoff(&self) -> usize {
        self.shape
            .iter()
            .filter(|&&m| m > 1)
            .map(|&m| (m - 1) / 2)
            .min()
            .unwrap_or(usize::MAX)
    }

    /// Coordinates of the flat index `idx`.
    pub fn point(&self, idx: usize, out: &mut [f64]) {
        grid_point(&self.shape, idx, out);
    }

    pub fn active(&self) -> Vec<bool> {
        self.shape.iter().map(|&m| m > 1).collect()
    }
}
