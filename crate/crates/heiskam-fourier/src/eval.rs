//! Pointwise evaluation of several fields sharing one torus.

use num_complex::Complex64;

use crate::grid::phase_table;
use crate::{Mode, TorusField};

/// Evaluates a bundle of fields at arbitrary points with one phase table per axis.
///
/// For real-valued bundles only half of the spectrum is summed.
#[derive(Debug, Clone)]
pub struct Evaluator {
    dim: usize,
    comps: usize,
    real: bool,
    axes: Vec<usize>,
    extent: Vec<usize>,
    modes: Vec<Mode>,
    coeffs: Vec<Complex64>,
}

fn lex_nonneg(m: &Mode) -> bool {
    for &x in m.iter() {
        if x != 0 {
            return x > 0;
        }
    }
    true
}

impl Evaluator {
    pub fn new(fields: &[&TorusField]) -> Self {
        assert!(!fields.is_empty());
        let dim = fields[0].dim();
        let real = fields.iter().all(|f| f.is_real_valued());
        let mut modes: Vec<Mode> = fields
            .iter()
            .flat_map(|f| f.iter().map(|(m, _)| *m))
            .collect();
        modes.sort();
        modes.dedup();
        if real {
            modes.retain(lex_nonneg);
        }
        let comps = fields.len();
        let mut coeffs = Vec::with_capacity(modes.len() * comps);
        for m in &modes {
            let w = if real && m.iter().any(|&x| x != 0) {
                2.0
            } else {
                1.0
            };
            for f in fields {
                coeffs.push(f.get_mode(m) * w);
            }
        }
        let mut extent = vec![0usize; dim];
        for m in &modes {
            for j in 0..dim {
                extent[j] = extent[j].max(m[j].unsigned_abs() as usize);
            }
        }
        let axes = (0..dim).filter(|&j| extent[j] > 0).collect();
        Self {
            dim,
            comps,
            real,
            axes,
            extent,
            modes,
            coeffs,
        }
    }

    pub fn components(&self) -> usize {
        self.comps
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    /// Values of all components at `point`; for real bundles imaginary parts are zero.
    pub fn eval(&self, point: &[f64], out: &mut [Complex64]) {
        assert_eq!(point.len(), self.dim);
        let tables: Vec<Vec<Complex64>> = self
            .axes
            .iter()
            .map(|&j| phase_table(point[j], self.extent[j]))
            .collect();
        for o in out.iter_mut().take(self.comps) {
            *o = Complex64::default();
        }
        for (i, m) in self.modes.iter().enumerate() {
            let mut e = Complex64::new(1.0, 0.0);
            for (t, &j) in self.axes.iter().enumerate() {
                e *= tables[t][(m[j] + self.extent[j] as i32) as usize];
            }
            let row = &self.coeffs[i * self.comps..(i + 1) * self.comps];
            for (o, c) in out.iter_mut().zip(row) {
                *o += c * e;
            }
        }
        if self.real {
            for o in out.iter_mut().take(self.comps) {
                o.im = 0.0;
            }
        }
    }

    /// Real parts of all components at `point`.
    pub fn eval_real(&self, point: &[f64], out: &mut [f64]) {
        let mut buf = vec![Complex64::default(); self.comps];
        self.eval(point, &mut buf);
        for (o, b) in out.iter_mut().zip(buf) {
            *o = b.re;
        }
    }
}
