//! Uniform spectral grids on the box `[−L, L)ⁿ`.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use ndarray::{ArrayD, Axis, IxDyn, Zip};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::{Result, SchrodingerError};

/// Default box half-width.
pub const DEFAULT_EXTENT: f64 = 20.0;
/// Default points per axis.
pub const DEFAULT_POINTS: usize = 512;
/// Largest allowed ratio of boundary-shell to peak magnitude.
pub const BOUNDARY_TOL: f64 = 1e-10;

/// Samples `f(z)` at `z_k = −L + k·(2L/P)`, `k = 0..P`, on each of n axes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub n: usize,
    pub extent: f64,
    pub points: usize,
    pub samples: ArrayD<Complex64>,
}

/// Header of the binary grid dump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridHeader {
    pub n: usize,
    #[serde(rename = "L")]
    pub extent: f64,
    #[serde(rename = "P")]
    pub points: usize,
}

/// One modulated Gaussian `c·Π_i exp(−(z_i − a_i)²/(2σ_i²) + i k_i z_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPacket {
    pub amplitude: Complex64,
    pub center: Vec<f64>,
    pub width: Vec<f64>,
    pub modulation: Vec<f64>,
}

impl GaussianPacket {
    pub fn eval(&self, z: &[f64]) -> Complex64 {
        let mut e = 0.0;
        let mut ph = 0.0;
        for i in 0..z.len() {
            let d = z[i] - self.center[i];
            e -= d * d / (2.0 * self.width[i] * self.width[i]);
            ph += self.modulation[i] * z[i];
        }
        self.amplitude * Complex64::from_polar(e.exp(), ph)
    }
}

impl GridField {
    pub fn zeros(n: usize, extent: f64, points: usize) -> Self {
        assert!(n >= 1 && points >= 2 && extent > 0.0);
        Self {
            n,
            extent,
            points,
            samples: ArrayD::zeros(IxDyn(&vec![points; n])),
        }
    }

    /// Grid field from samples, validated against the boundary-smallness invariant.
    pub fn from_samples(extent: f64, samples: ArrayD<Complex64>) -> Result<Self> {
        let shape = samples.shape().to_vec();
        let n = shape.len();
        if n == 0 || shape.iter().any(|&p| p != shape[0]) || !shape[0].is_power_of_two() {
            return Err(SchrodingerError::InvalidGrid(format!(
                "shape {shape:?} is not P^n with P a power of two"
            )));
        }
        if !(extent > 0.0) {
            return Err(SchrodingerError::InvalidGrid(format!(
                "extent {extent} must be positive"
            )));
        }
        let f = Self {
            n,
            extent,
            points: shape[0],
            samples,
        };
        f.check_boundary()?;
        Ok(f)
    }

    /// Sample a function of `z`.
    pub fn from_fn<F: Fn(&[f64]) -> Complex64>(n: usize, extent: f64, points: usize, f: F) -> Self {
        let mut out = Self::zeros(n, extent, points);
        let h = out.spacing();
        let mut z = vec![0.0; n];
        for (idx, v) in out.samples.indexed_iter_mut() {
            for i in 0..n {
                z[i] = -extent + idx[i] as f64 * h;
            }
            *v = f(&z);
        }
        out
    }

    /// Sum of Gaussian packets.
    pub fn from_packets(n: usize, extent: f64, points: usize, packets: &[GaussianPacket]) -> Self {
        Self::from_fn(n, extent, points, |z| {
            packets.iter().map(|p| p.eval(z)).sum()
        })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / self.points as f64
    }

    /// Coordinate of index `k` along any axis.
    pub fn coord(&self, k: usize) -> f64 {
        -self.extent + k as f64 * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.points).map(|k| self.coord(k)).collect()
    }

    /// Signed DFT frequencies (cycles per unit length) in FFT bin order.
    pub fn frequencies(&self) -> Vec<f64> {
        let p = self.points as i64;
        let len = 2.0 * self.extent;
        (0..p)
            .map(|k| {
                if 2 * k < p {
                    k as f64 / len
                } else {
                    (k - p) as f64 / len
                }
            })
            .collect()
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.n, self.extent, self.points)
    }

    pub fn with_samples(&self, samples: ArrayD<Complex64>) -> Self {
        Self {
            n: self.n,
            extent: self.extent,
            points: self.points,
            samples,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `L²` norm by the rectangle rule.
    pub fn l2_norm(&self) -> f64 {
        let cell = self.spacing().powi(self.n as i32);
        (self.samples.iter().map(|c| c.norm_sqr()).sum::<f64>() * cell).sqrt()
    }

    /// Largest magnitude on the outermost shell over the peak magnitude.
    pub fn boundary_ratio(&self) -> f64 {
        let peak = self.max_abs();
        if peak == 0.0 {
            return 0.0;
        }
        let last = self.points - 1;
        let shell = self
            .samples
            .indexed_iter()
            .filter(|(idx, _)| (0..self.n).any(|i| idx[i] == 0 || idx[i] == last))
            .map(|(_, c)| c.norm())
            .fold(0.0, f64::max);
        shell / peak
    }

    pub fn check_boundary(&self) -> Result<()> {
        let r = self.boundary_ratio();
        if r > BOUNDARY_TOL {
            return Err(SchrodingerError::InvalidGrid(format!(
                "boundary shell carries {r:e} of the peak magnitude"
            )));
        }
        Ok(())
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.points != other.points || self.extent != other.extent {
            return Err(SchrodingerError::InvalidGrid("grids differ".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.with_samples(&self.samples + &other.samples))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.with_samples(&self.samples - &other.samples))
    }

    pub fn scale(&self, a: Complex64) -> Self {
        self.with_samples(self.samples.mapv(|c| c * a))
    }

    /// Multiply pointwise by a function of the coordinate along `axis`.
    pub fn multiply_along(&self, axis: usize, w: &[Complex64]) -> Self {
        let mut out = self.clone();
        for (k, mut sub) in out.samples.axis_iter_mut(Axis(axis)).enumerate() {
            sub.mapv_inplace(|c| c * w[k]);
        }
        out
    }

    /// Write `<stem>.bin` (little-endian f64, re/im interleaved, row-major) and `<stem>.json`.
    pub fn write_dump(&self, stem: &Path) -> Result<()> {
        let mut bytes = Vec::with_capacity(self.samples.len() * 16);
        for c in self.samples.iter() {
            bytes.extend_from_slice(&c.re.to_le_bytes());
            bytes.extend_from_slice(&c.im.to_le_bytes());
        }
        let header = GridHeader {
            n: self.n,
            extent: self.extent,
            points: self.points,
        };
        fs::write(stem.with_extension("bin"), bytes)
            .map_err(|e| SchrodingerError::Io(e.to_string()))?;
        let json =
            serde_json::to_string(&header).map_err(|e| SchrodingerError::Io(e.to_string()))?;
        fs::write(stem.with_extension("json"), json)
            .map_err(|e| SchrodingerError::Io(e.to_string()))?;
        Ok(())
    }

    /// Read a dump written by [`GridField::write_dump`].
    pub fn read_dump(stem: &Path) -> Result<Self> {
        let hs = fs::read_to_string(stem.with_extension("json"))
            .map_err(|e| SchrodingerError::Io(e.to_string()))?;
        let h: GridHeader =
            serde_json::from_str(&hs).map_err(|e| SchrodingerError::Io(e.to_string()))?;
        let bytes = fs::read(stem.with_extension("bin"))
            .map_err(|e| SchrodingerError::Io(e.to_string()))?;
        let total = h.points.pow(h.n as u32);
        if bytes.len() != 16 * total {
            return Err(SchrodingerError::InvalidGrid(format!(
                "dump holds {} bytes, header implies {}",
                bytes.len(),
                16 * total
            )));
        }
        let vals: Vec<Complex64> = bytes
            .chunks_exact(16)
            .map(|b| {
                let re = f64::from_le_bytes(b[..8].try_into().unwrap());
                let im = f64::from_le_bytes(b[8..].try_into().unwrap());
                Complex64::new(re, im)
            })
            .collect();
        let arr = ArrayD::from_shape_vec(IxDyn(&vec![h.points; h.n]), vals)
            .map_err(|e| SchrodingerError::InvalidGrid(e.to_string()))?;
        Self::from_samples(h.extent, arr)
    }
}

/// In-place FFT along one axis; the inverse is normalized by `1/P`.
pub fn fft_axis(arr: &mut ArrayD<Complex64>, axis: usize, inverse: bool) {
    let p = arr.shape()[axis];
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(p)
    } else {
        planner.plan_fft_forward(p)
    };
    let mut buf = vec![Complex64::default(); p];
    let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
    let norm = if inverse { 1.0 / p as f64 } else { 1.0 };
    for mut lane in arr.lanes_mut(Axis(axis)) {
        for (b, v) in buf.iter_mut().zip(lane.iter()) {
            *b = *v;
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (v, b) in lane.iter_mut().zip(buf.iter()) {
            *v = b * norm;
        }
    }
}

/// Multiply the spectrum along `axis` by `mult[bin]`.
pub fn apply_spectral(arr: &mut ArrayD<Complex64>, axis: usize, mult: &[Complex64]) {
    for (k, mut sub) in arr.axis_iter_mut(Axis(axis)).enumerate() {
        let m = mult[k];
        sub.mapv_inplace(|c| c * m);
    }
}

/// Phase multipliers realizing `f ↦ f(· − d)` along an axis.
pub fn shift_multiplier(field: &GridField, d: f64) -> Vec<Complex64> {
    let p = field.points;
    field
        .frequencies()
        .iter()
        .enumerate()
        .map(|(k, &w)| {
            if 2 * k == p {
                // Nyquist bin: the real part of the phase keeps real inputs real.
                Complex64::new((2.0 * PI * w * d).cos(), 0.0)
            } else {
                Complex64::from_polar(1.0, -2.0 * PI * w * d)
            }
        })
        .collect()
}

/// Band-limited translation `f(z − d e_axis)` with periodic wrap.
pub fn translate_periodic(field: &GridField, axis: usize, d: f64) -> GridField {
    let mut s = field.samples.clone();
    fft_axis(&mut s, axis, false);
    apply_spectral(&mut s, axis, &shift_multiplier(field, d));
    fft_axis(&mut s, axis, true);
    field.with_samples(s)
}

/// Trigonometric interpolation of `field` along `axis` at coordinate `z`,
/// returning a field on the remaining axes.
pub fn interpolate_at(field: &GridField, axis: usize, z: f64) -> ArrayD<Complex64> {
    let mut s = field.samples.clone();
    fft_axis(&mut s, axis, false);
    let p = field.points;
    let t = (z + field.extent) / field.spacing();
    let w: Vec<Complex64> = (0..p)
        .map(|k| {
            let ks = if 2 * k < p {
                k as f64
            } else if 2 * k == p {
                0.0
            } else {
                k as f64 - p as f64
            };
            let scale = if 2 * k == p { (PI * t).cos() } else { 1.0 };
            Complex64::from_polar(scale / p as f64, 2.0 * PI * ks * t / p as f64)
        })
        .collect();
    let mut out = s.index_axis(Axis(axis), 0).mapv(|_| Complex64::default());
    for (k, sub) in s.axis_iter(Axis(axis)).enumerate() {
        let wk = w[k];
        Zip::from(&mut out).and(&sub).for_each(|o, &v| *o += v * wk);
    }
    out
}
