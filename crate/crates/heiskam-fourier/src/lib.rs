//! Truncated Fourier series on the torus 𝕋²ⁿ.
//!
//! A [`TorusField`] is a finite sum `Σ c_m exp(2πi m·u)` over lattice vectors
//! `m ∈ ℤ²ⁿ` with `|m|_∞ ≤ N`. Coefficients are stored sparsely in
//! lexicographic order, so band-limited inputs with a handful of modes cost
//! only what they contain. Dense work (sampling, fitting) goes through
//! [`grid`], which runs FFTs only along the axes a field depends on.

pub mod eval;
pub mod grid;
pub mod json;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use heiskam_diophantine::{FrequencyPair, Kappa};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use eval::Evaluator;
pub use grid::{fit_from_samples, sample_on_grid, FitReport};

/// Largest supported torus dimension 2n.
pub const MAX_DIM: usize = 8;
/// Default cutoff for tests.
pub const DEFAULT_TEST_CUTOFF: usize = 32;
/// Default cutoff for KAM runs.
pub const DEFAULT_KAM_CUTOFF: usize = 64;
/// Mean below which a field counts as zero-mean.
pub const ZERO_MEAN_TOL: f64 = 1e-14;
/// Relative tolerance of the conjugate-symmetry invariant.
pub const CONJUGATE_SYMMETRY_TOL: f64 = 1e-14;

/// A lattice vector padded to [`MAX_DIM`] entries; only the first 2n are used.
pub type Mode = [i32; MAX_DIM];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FourierError {
    #[error("field has nonzero mean {mean:e}")]
    NonZeroMean { mean: f64 },
    #[error("mode {m:?} lies outside the cutoff box |m|_inf <= {cutoff}")]
    OutsideCutoff { m: Vec<i32>, cutoff: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("sample grid cannot resolve cutoff {cutoff} (shape {shape:?})")]
    AliasRisk { shape: Vec<usize>, cutoff: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("malformed field JSON: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, FourierError>;

/// Build a [`Mode`] from a slice.
pub fn mode(m: &[i32]) -> Mode {
    let mut out = [0i32; MAX_DIM];
    out[..m.len()].copy_from_slice(m);
    out
}

fn neg_mode(m: &Mode) -> Mode {
    let mut out = *m;
    for x in out.iter_mut() {
        *x = -*x;
    }
    out
}

/// `m·m` over the first `dim` entries.
pub fn mode_norm_sq(m: &Mode, dim: usize) -> f64 {
    m[..dim].iter().map(|&x| (x as f64) * (x as f64)).sum()
}

/// `|m|_∞` over the first `dim` entries.
pub fn mode_sup(m: &Mode, dim: usize) -> usize {
    m[..dim]
        .iter()
        .map(|x| x.unsigned_abs() as usize)
        .max()
        .unwrap_or(0)
}

/// Truncated Fourier series on 𝕋²ⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct TorusField {
    n: usize,
    cutoff: usize,
    real_valued: bool,
    coeffs: BTreeMap<Mode, Complex64>,
}

/// Named taper shapes for smoothing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaperShape {
    Hard,
    RaisedCosine,
    Exponential,
}

/// Smoothing operator `S_t`: a taper in `|m|_∞` equal to 1 below `t/2` and 0
/// from `t` on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingProfile {
    pub cutoff_shape: TaperShape,
    pub t: f64,
}

impl SmoothingProfile {
    pub fn raised_cosine(t: f64) -> Self {
        Self {
            cutoff_shape: TaperShape::RaisedCosine,
            t,
        }
    }

    /// Taper value at radius `r = |m|_∞`.
    pub fn taper(&self, r: f64) -> f64 {
        let half = 0.5 * self.t;
        if r <= half {
            return 1.0;
        }
        if r >= self.t {
            return 0.0;
        }
        let x = (r - half) / half;
        match self.cutoff_shape {
            TaperShape::Hard => 0.0,
            TaperShape::RaisedCosine => 0.5 * (1.0 + (PI * x).cos()),
            TaperShape::Exponential => (-x * x / (1.0 - x * x)).exp(),
        }
    }
}

impl TorusField {
    /// The zero field.
    pub fn zero(n: usize, cutoff: usize, real_valued: bool) -> Self {
        assert!(
            n >= 1 && 2 * n <= MAX_DIM,
            "torus half-dimension must be in 1..=4"
        );
        Self {
            n,
            cutoff,
            real_valued,
            coeffs: BTreeMap::new(),
        }
    }

    /// The constant field `c`.
    pub fn constant(n: usize, cutoff: usize, c: Complex64) -> Self {
        let mut f = Self::zero(n, cutoff, c.im == 0.0);
        f.coeffs.insert([0; MAX_DIM], c);
        f
    }

    /// `c·exp(2πi m·u)`; real-valued only for `m = 0` with real `c`.
    pub fn single_mode(n: usize, cutoff: usize, m: &[i32], c: Complex64) -> Result<Self> {
        let mut f = Self::zero(n, cutoff, false);
        f.set(m, c)?;
        if m.iter().all(|&x| x == 0) && c.im == 0.0 {
            f.real_valued = true;
        }
        Ok(f)
    }

    /// Build from `(m, c)` pairs; repeated modes are summed.
    pub fn from_entries<I>(n: usize, cutoff: usize, real_valued: bool, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<i32>, Complex64)>,
    {
        let mut f = Self::zero(n, cutoff, real_valued);
        for (m, c) in entries {
            f.add_at(&m, c)?;
        }
        Ok(f)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Torus dimension 2n.
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn is_real_valued(&self) -> bool {
        self.real_valued
    }

    /// Declare the field real-valued after symmetrizing its coefficients.
    pub fn into_real(mut self) -> Self {
        self.symmetrize_real();
        self
    }

    /// Replace coefficients by `(c_m + conj c_{−m})/2`, the spectrum of the real part.
    pub fn symmetrize_real(&mut self) {
        let keys: Vec<Mode> = self.coeffs.keys().copied().collect();
        let mut out = BTreeMap::new();
        for k in keys
            .iter()
            .chain(keys.iter().map(neg_mode).collect::<Vec<_>>().iter())
        {
            if out.contains_key(k) {
                continue;
            }
            let a = self.coeffs.get(k).copied().unwrap_or_default();
            let b = self.coeffs.get(&neg_mode(k)).copied().unwrap_or_default();
            out.insert(*k, 0.5 * (a + b.conj()));
        }
        self.coeffs = out;
        self.real_valued = true;
    }

    /// Largest violation of `c_{−m} = conj(c_m)` relative to the largest coefficient.
    pub fn conjugate_symmetry_defect(&self) -> f64 {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        self.coeffs
            .iter()
            .map(|(m, c)| {
                let d = self.coeffs.get(&neg_mode(m)).copied().unwrap_or_default();
                (c - d.conj()).norm()
            })
            .fold(0.0, f64::max)
            / scale
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn check_mode(&self, m: &[i32]) -> Result<Mode> {
        if m.len() != self.dim() {
            return Err(FourierError::DimensionMismatch(format!(
                "mode of length {} for torus dimension {}",
                m.len(),
                self.dim()
            )));
        }
        let md = mode(m);
        if mode_sup(&md, self.dim()) > self.cutoff {
            return Err(FourierError::OutsideCutoff {
                m: m.to_vec(),
                cutoff: self.cutoff,
            });
        }
        Ok(md)
    }

    /// Set the coefficient at `m`.
    pub fn set(&mut self, m: &[i32], c: Complex64) -> Result<()> {
        let md = self.check_mode(m)?;
        self.coeffs.insert(md, c);
        Ok(())
    }

    /// Add `c` to the coefficient at `m`.
    pub fn add_at(&mut self, m: &[i32], c: Complex64) -> Result<()> {
        let md = self.check_mode(m)?;
        *self.coeffs.entry(md).or_default() += c;
        Ok(())
    }

    /// Coefficient at `m` (zero when absent or outside the box).
    pub fn get(&self, m: &[i32]) -> Complex64 {
        if m.len() != self.dim() {
            return Complex64::default();
        }
        self.coeffs.get(&mode(m)).copied().unwrap_or_default()
    }

    pub fn get_mode(&self, m: &Mode) -> Complex64 {
        self.coeffs.get(m).copied().unwrap_or_default()
    }

    /// Coefficients in lexicographic order of `m`.
    pub fn iter(&self) -> impl Iterator<Item = (&Mode, &Complex64)> {
        self.coeffs.iter()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Mean (the `m = 0` coefficient).
    pub fn mean(&self) -> Complex64 {
        self.get_mode(&[0; MAX_DIM])
    }

    /// Copy with the mean removed.
    pub fn without_mean(&self) -> Self {
        let mut out = self.clone();
        out.coeffs.remove(&[0; MAX_DIM]);
        out
    }

    /// Drop coefficients with `|c| ≤ tol`.
    pub fn prune(&mut self, tol: f64) {
        self.coeffs.retain(|_, c| c.norm() > tol);
    }

    /// Copy restricted to `|m|_∞ ≤ cutoff` with the new cutoff recorded.
    pub fn truncated(&self, cutoff: usize) -> Self {
        let dim = self.dim();
        Self {
            n: self.n,
            cutoff,
            real_valued: self.real_valued,
            coeffs: self
                .coeffs
                .iter()
                .filter(|(m, _)| mode_sup(m, dim) <= cutoff)
                .map(|(m, c)| (*m, *c))
                .collect(),
        }
    }

    /// Same coefficients under a larger (or equal) cutoff.
    pub fn with_cutoff(&self, cutoff: usize) -> Result<Self> {
        let dim = self.dim();
        if let Some((m, _)) = self.coeffs.iter().find(|(m, _)| mode_sup(m, dim) > cutoff) {
            return Err(FourierError::OutsideCutoff {
                m: m[..dim].to_vec(),
                cutoff,
            });
        }
        let mut out = self.clone();
        out.cutoff = cutoff;
        Ok(out)
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(FourierError::DimensionMismatch(format!(
                "half-dimensions {} and {}",
                self.n, other.n
            )));
        }
        Ok(())
    }

    /// `self + a·other`; the cutoff of the result is the larger of the two.
    pub fn add_scaled(&self, a: Complex64, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        let mut out = self.clone();
        out.cutoff = self.cutoff.max(other.cutoff);
        for (m, c) in &other.coeffs {
            *out.coeffs.entry(*m).or_default() += a * c;
        }
        out.real_valued = self.real_valued && other.real_valued && a.im == 0.0;
        Ok(out)
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.add_scaled(Complex64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add_scaled(Complex64::new(-1.0, 0.0), other)
    }

    /// `a·self`.
    pub fn scale(&self, a: Complex64) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c *= a;
        }
        out.real_valued = self.real_valued && a.im == 0.0;
        out
    }

    pub fn scale_real(&self, a: f64) -> Self {
        self.scale(Complex64::new(a, 0.0))
    }

    /// Coefficient-wise multiplier `c_m ↦ μ(m)·c_m`.
    pub fn map_multiplier<F>(&self, mut mu: F) -> Self
    where
        F: FnMut(&Mode) -> Complex64,
    {
        let mut out = self.clone();
        for (m, c) in out.coeffs.iter_mut() {
            *c *= mu(m);
        }
        out
    }

    /// Keep the coefficients for which `keep(m)` holds.
    pub fn filter_modes<F>(&self, mut keep: F) -> Self
    where
        F: FnMut(&Mode) -> bool,
    {
        let mut out = self.clone();
        out.coeffs.retain(|m, _| keep(m));
        out
    }

    /// `(Σ_m (1 + 4π² m·m)^s |c_m|²)^{1/2}`.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let dim = self.dim();
        self.coeffs
            .iter()
            .map(|(m, c)| (1.0 + 4.0 * PI * PI * mode_norm_sq(m, dim)).powf(s) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Multiplication by `exp(2πi m·κ⃗)`, i.e. composition with translation by κ⃗.
    pub fn apply_translation_multiplier(&self, kappa: &[f64]) -> Result<Self> {
        if kappa.len() != self.dim() {
            return Err(FourierError::DimensionMismatch(format!(
                "translation of length {} on torus of dimension {}",
                kappa.len(),
                self.dim()
            )));
        }
        let dim = self.dim();
        Ok(self.map_multiplier(|m| {
            let s: f64 = (0..dim).map(|j| m[j] as f64 * kappa[j]).sum();
            let theta = 2.0 * PI * (s - s.round());
            Complex64::new(theta.cos(), theta.sin())
        }))
    }

    /// `L_κ f = f∘(translation by κ⃗) − f` through the small divisors `ζ(m, κ)`.
    pub fn coboundary_multiplier(&self, kappa: Kappa, pair: &FrequencyPair) -> Result<Self> {
        let mean = self.mean().norm();
        if mean > ZERO_MEAN_TOL {
            return Err(FourierError::NonZeroMean { mean });
        }
        Ok(self.coboundary_unchecked(kappa, pair))
    }

    /// `L_κ` without the zero-mean precondition (the mean is annihilated anyway).
    pub fn coboundary_unchecked(&self, kappa: Kappa, pair: &FrequencyPair) -> Self {
        let dim = self.dim();
        self.map_multiplier(|m| pair.zeta(&m[..dim], kappa))
    }

    /// `S_t f`: the taper applied coefficient-wise with the mean kept.
    pub fn smoothing_apply(&self, prof: &SmoothingProfile) -> Self {
        let dim = self.dim();
        let mut out = self.map_multiplier(|m| {
            if m.iter().all(|&x| x == 0) {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(prof.taper(mode_sup(m, dim) as f64), 0.0)
            }
        });
        out.coeffs.retain(|_, c| *c != Complex64::default());
        out
    }

    /// Exact Fourier sum at a point of ℝ²ⁿ.
    pub fn evaluate(&self, point: &[f64]) -> Complex64 {
        let dim = self.dim();
        assert_eq!(point.len(), dim, "point dimension");
        let mut acc = Complex64::default();
        for (m, c) in &self.coeffs {
            let s: f64 = (0..dim).map(|j| m[j] as f64 * point[j]).sum();
            let theta = 2.0 * PI * (s - s.floor());
            acc += c * Complex64::new(theta.cos(), theta.sin());
        }
        acc
    }

    /// Axes along which some stored mode is nonzero.
    pub fn active_axes(&self) -> Vec<bool> {
        let dim = self.dim();
        let mut act = vec![false; dim];
        for m in self.coeffs.keys() {
            for j in 0..dim {
                if m[j] != 0 {
                    act[j] = true;
                }
            }
        }
        act
    }

    /// `max |m_j|` per axis over stored modes.
    pub fn axis_extent(&self) -> Vec<usize> {
        let dim = self.dim();
        let mut ext = vec![0usize; dim];
        for m in self.coeffs.keys() {
            for j in 0..dim {
                ext[j] = ext[j].max(m[j].unsigned_abs() as usize);
            }
        }
        ext
    }

    /// Squared ℓ² distance helper used by tests and reports.
    pub fn l2_distance(&self, other: &Self) -> f64 {
        let mut keys: Vec<&Mode> = self.coeffs.keys().chain(other.coeffs.keys()).collect();
        keys.sort();
        keys.dedup();
        keys.iter()
            .map(|m| (self.get_mode(m) - other.get_mode(m)).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// JSON dump `{n, cutoff, real_valued, entries: [[[m…], re, im], …]}` with
    /// entries in lexicographic order of `m` and 17 significant digits.
    pub fn to_json(&self) -> String {
        json::field_to_json(self)
    }

    /// Parse the JSON dump.
    pub fn from_json(s: &str) -> Result<Self> {
        json::field_from_json(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taper_is_monotone_and_pinned() {
        for shape in [
            TaperShape::Hard,
            TaperShape::RaisedCosine,
            TaperShape::Exponential,
        ] {
            let p = SmoothingProfile {
                cutoff_shape: shape,
                t: 8.0,
            };
            assert_eq!(p.taper(4.0), 1.0);
            assert_eq!(p.taper(8.0), 0.0);
            let mut prev = 1.0;
            for k in 0..100 {
                let v = p.taper(k as f64 * 0.1);
                assert!(v <= prev + 1e-15);
                prev = v;
            }
        }
    }

    #[test]
    fn symmetrize_gives_real_samples() {
        let mut f = TorusField::zero(1, 3, false);
        f.set(&[1, 2], Complex64::new(1.0, 2.0)).unwrap();
        let f = f.into_real();
        let v = f.evaluate(&[0.3, 0.7]);
        assert!(v.im.abs() < 1e-15);
        assert!(f.conjugate_symmetry_defect() < 1e-15);
    }
}
