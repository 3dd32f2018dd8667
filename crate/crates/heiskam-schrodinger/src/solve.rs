//! Series solutions of `L_τ P = f`, `L_η P = f`, the transfer solve and the
//! splitting of almost-cocycles.

use std::f64::consts::PI;

use ndarray::{ArrayD, Axis, IxDyn, Zip};
use num_complex::Complex64;

use crate::frame::RotatedFrame;
use crate::grid::{apply_spectral, fft_axis, interpolate_at, shift_multiplier, GridField};
use crate::ops::{
    annihilator_tau_defect, eta_multiplier, l_eta_apply, l_tau_apply, r_psi_checked,
    DEFAULT_M_CHECK,
};
use crate::{Result, SchrodingerError};

/// Relative level of `π_{m,τ} f` (or of `f` on the zero hyperplanes) tolerated on input.
pub const ANNIHILATOR_TOL: f64 = 1e-9;
/// Series terms are dropped once their mass inside the box falls below this fraction.
pub const SERIES_TRUNCATION: f64 = 1e-14;
/// Compatibility tolerance of the transfer solve.
pub const COMPAT_TOL: f64 = 1e-9;
/// Tolerance of the defect identity `L_η f − L_τ g = φ`.
pub const DEFECT_TOL: f64 = 1e-9;
/// Width of the localizer Gaussian in the mirror splitting.
pub const MIRROR_SIGMA: f64 = 3.0;

/// Output of [`solve_l_tau`].
#[derive(Debug, Clone)]
pub struct TauSolution {
    pub p: GridField,
    /// `max |P_fwd − P_bwd|` on the inner half-box over `max |P|`.
    pub series_agreement: f64,
    /// `‖L_τ P − f‖ / ‖f‖`.
    pub residual: f64,
    pub terms: usize,
}

/// Series `Σ_{m ∈ ms} sign·f(z₁ + m τ)` with samples that left the box dropped.
fn shifted_series(f: &GridField, frame: &RotatedFrame, forward: bool) -> (GridField, usize) {
    let mut spec = f.samples.clone();
    fft_axis(&mut spec, 0, false);
    let peak = f.max_abs();
    let coords = f.coords();
    let mut acc = f.zeros_like();
    let mut terms = 0;
    let start = if forward { 1 } else { 0 };
    let mut m = start;
    loop {
        let d = if forward {
            -(m as f64) * frame.tau
        } else {
            m as f64 * frame.tau
        };
        if d.abs() >= 2.0 * f.extent {
            break;
        }
        let mut s = spec.clone();
        apply_spectral(&mut s, 0, &shift_multiplier(f, d));
        fft_axis(&mut s, 0, true);
        // Value at z came from z − d; drop it when z − d lies outside [−L, L).
        for (k, mut sub) in s.axis_iter_mut(Axis(0)).enumerate() {
            let src = coords[k] - d;
            if src >= f.extent || src < -f.extent {
                sub.fill(Complex64::default());
            }
        }
        let mass = s.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if forward {
            acc.samples += &s;
        } else {
            acc.samples -= &s;
        }
        terms += 1;
        if mass <= SERIES_TRUNCATION * peak && m > start {
            break;
        }
        m += 1;
    }
    (acc, terms)
}

/// Solve `L_τ P = f` by `P = Σ_{m≥1} f(z₁ + mτ)`, cross-checked against
/// `P = −Σ_{m≥0} f(z₁ − mτ)`.
pub fn solve_l_tau(f: &GridField, frame: &RotatedFrame) -> Result<TauSolution> {
    let nf = f.l2_norm();
    if nf == 0.0 {
        return Ok(TauSolution {
            p: f.zeros_like(),
            series_agreement: 0.0,
            residual: 0.0,
            terms: 0,
        });
    }
    let defect = annihilator_tau_defect(f, frame, DEFAULT_M_CHECK);
    if defect > ANNIHILATOR_TOL {
        return Err(SchrodingerError::NotInAnnihilator {
            which: "tau",
            defect,
        });
    }
    let (p, terms) = shifted_series(f, frame, true);
    let (pb, _) = shifted_series(f, frame, false);
    let coords = f.coords();
    let peak = p.max_abs().max(f64::MIN_POSITIVE);
    let mut agree = 0.0f64;
    for ((idx, a), b) in p.samples.indexed_iter().zip(pb.samples.iter()) {
        if (0..f.n).all(|i| coords[idx[i]].abs() <= 0.5 * f.extent) {
            agree = agree.max((a - b).norm());
        }
    }
    let residual = l_tau_apply(&p, frame).sub(f)?.l2_norm() / nf;
    Ok(TauSolution {
        p,
        series_agreement: agree / peak,
        residual,
        terms,
    })
}

/// Coordinates of the zero hyperplanes `z₂ ∈ (2π/ν₂)ℤ` inside the box.
pub fn eta_zero_set(f: &GridField, frame: &RotatedFrame) -> Vec<f64> {
    let per = frame.eta_period();
    let kmax = (f.extent / per).ceil() as i64;
    (-kmax..=kmax)
        .map(|k| k as f64 * per)
        .filter(|z| *z >= -f.extent && *z < f.extent)
        .collect()
}

/// `max` over zero hyperplanes of `|f|` there (trigonometric interpolation), over `max |f|`.
pub fn annihilator_eta_defect(f: &GridField, frame: &RotatedFrame) -> f64 {
    let peak = f.max_abs();
    if peak == 0.0 {
        return 0.0;
    }
    eta_zero_set(f, frame)
        .iter()
        .map(|&z| {
            interpolate_at(f, 1, z)
                .iter()
                .map(|c| c.norm())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
        / peak
}

/// Output of [`solve_l_eta`].
#[derive(Debug, Clone)]
pub struct EtaSolution {
    pub p: GridField,
    /// `max |P_div − P_series|` over the overlap band, over `max |P|`.
    pub branch_agreement: f64,
    /// `‖L_η P − f‖ / ‖f‖`.
    pub residual: f64,
    /// Number of grid rows (in z₂) filled from the series branch.
    pub guard_rows: usize,
}

/// Fourier-side solution of `(e^{iν₂z₂} − 1) P = f`: with `a = ν₂/2π`, the
/// spectrum satisfies `P̂(ω − a) − P̂(ω) = f̂(ω)`, solved by
/// `Σ_{m≥1} f̂(ω + ma)` on `sign(a)·ω ≥ 0` and `−Σ_{m≥0} f̂(ω − ma)` on the other half.
/// The work is done on a grid refined twofold in z₂ so shifted spectra do not wrap.
pub fn eta_series(f: &GridField, frame: &RotatedFrame) -> GridField {
    let p = f.points;
    let fine = 2 * p;
    // Zero-pad along z₂.
    let mut spec = f.samples.clone();
    fft_axis(&mut spec, 1, false);
    let mut shape = spec.shape().to_vec();
    shape[1] = fine;
    let mut pad = ArrayD::<Complex64>::zeros(IxDyn(&shape));
    for (k, sub) in spec.axis_iter(Axis(1)).enumerate() {
        let dst = if 2 * k < p {
            k
        } else if 2 * k == p {
            continue;
        } else {
            k + p
        };
        pad.index_axis_mut(Axis(1), dst).assign(&sub);
    }
    let len = 2.0 * f.extent;
    let a = frame.nu2 / (2.0 * PI);
    // Spectral extent of f along z₂.
    let mut wf = 0.0f64;
    let peak = pad.iter().map(|c| c.norm()).fold(0.0, f64::max);
    for (k, sub) in pad.axis_iter(Axis(1)).enumerate() {
        let ks = if 2 * k < fine {
            k as f64
        } else {
            k as f64 - fine as f64
        };
        if sub.iter().any(|c| c.norm() > 1e-16 * peak) {
            wf = wf.max(ks.abs() / len);
        }
    }
    let nyq = fine as f64 / (2.0 * len);
    let terms =
        ((wf / a.abs()).ceil() as usize + 1).min(((nyq - wf) / a.abs()).floor().max(1.0) as usize);
    let mut fine_vals = pad.clone();
    fft_axis(&mut fine_vals, 1, true);
    for v in fine_vals.iter_mut() {
        *v *= fine as f64 / p as f64;
    }
    let hf = len / fine as f64;
    let zf: Vec<f64> = (0..fine).map(|k| -f.extent + k as f64 * hf).collect();
    let mut fwd = ArrayD::<Complex64>::zeros(IxDyn(&shape));
    let mut bwd = ArrayD::<Complex64>::zeros(IxDyn(&shape));
    for (k, (mut fo, mut bo)) in fwd
        .axis_iter_mut(Axis(1))
        .zip(bwd.axis_iter_mut(Axis(1)))
        .enumerate()
    {
        let th = frame.nu2 * zf[k];
        let mut sf = Complex64::default();
        let mut sb = Complex64::default();
        for m in 0..=terms {
            if m >= 1 {
                sf += Complex64::from_polar(1.0, -(m as f64) * th);
            }
            sb -= Complex64::from_polar(1.0, m as f64 * th);
        }
        let src = fine_vals.index_axis(Axis(1), k);
        Zip::from(&mut fo).and(&src).for_each(|o, &v| *o = v * sf);
        Zip::from(&mut bo).and(&src).for_each(|o, &v| *o = v * sb);
    }
    fft_axis(&mut fwd, 1, false);
    fft_axis(&mut bwd, 1, false);
    let mut out = ArrayD::<Complex64>::zeros(IxDyn(&shape));
    for (k, ((mut o, fs), bs)) in out
        .axis_iter_mut(Axis(1))
        .zip(fwd.axis_iter(Axis(1)))
        .zip(bwd.axis_iter(Axis(1)))
        .enumerate()
    {
        let ks = if 2 * k < fine {
            k as f64
        } else {
            k as f64 - fine as f64
        };
        if a * ks >= 0.0 {
            o.assign(&fs);
        } else {
            o.assign(&bs);
        }
    }
    fft_axis(&mut out, 1, true);
    // Restrict to the coarse grid (every other z₂ sample).
    let mut res = f.zeros_like();
    for (k, mut sub) in res.samples.axis_iter_mut(Axis(1)).enumerate() {
        sub.assign(&out.index_axis(Axis(1), 2 * k));
    }
    res
}

/// Solve `L_η P = f` by division off the zero set and by the Fourier-side
/// series inside a one-cell guard band around it.
pub fn solve_l_eta(f: &GridField, frame: &RotatedFrame) -> Result<EtaSolution> {
    let nf = f.l2_norm();
    if nf == 0.0 {
        return Ok(EtaSolution {
            p: f.zeros_like(),
            branch_agreement: 0.0,
            residual: 0.0,
            guard_rows: 0,
        });
    }
    let defect = annihilator_eta_defect(f, frame);
    if defect > ANNIHILATOR_TOL {
        return Err(SchrodingerError::NotInAnnihilator {
            which: "eta",
            defect,
        });
    }
    let h = f.spacing();
    let zeros = eta_zero_set(f, frame);
    let coords = f.coords();
    let dist: Vec<f64> = coords
        .iter()
        .map(|&z| {
            zeros
                .iter()
                .map(|&z0| (z - z0).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mult = eta_multiplier(f, frame);
    let series = eta_series(f, frame);
    let mut p = f.zeros_like();
    let mut agree = 0.0f64;
    let mut guard_rows = 0;
    for (k, mut sub) in p.samples.axis_iter_mut(Axis(1)).enumerate() {
        let ser = series.samples.index_axis(Axis(1), k);
        if dist[k] < h {
            sub.assign(&ser);
            guard_rows += 1;
            continue;
        }
        let src = f.samples.index_axis(Axis(1), k);
        let inv = 1.0 / mult[k];
        Zip::from(&mut sub).and(&src).for_each(|o, &v| *o = v * inv);
        if dist[k] <= 6.0 * h {
            for (a, b) in sub.iter().zip(ser.iter()) {
                agree = agree.max((a - b).norm());
            }
        }
    }
    let peak = p.max_abs().max(f64::MIN_POSITIVE);
    let residual = l_eta_apply(&p, frame).sub(f)?.l2_norm() / nf;
    Ok(EtaSolution {
        p,
        branch_agreement: agree / peak,
        residual,
        guard_rows,
    })
}

/// Output of [`transfer_solve`].
#[derive(Debug, Clone)]
pub struct TransferSolution {
    pub p: GridField,
    pub residual_tau: f64,
    pub residual_eta: f64,
}

/// Common solution of `L_τ P = f`, `L_η P = g` for a cocycle `(f, g)`.
pub fn transfer_solve(
    f: &GridField,
    g: &GridField,
    frame: &RotatedFrame,
) -> Result<TransferSolution> {
    let scale = f.l2_norm() + g.l2_norm();
    if scale == 0.0 {
        return Ok(TransferSolution {
            p: f.zeros_like(),
            residual_tau: 0.0,
            residual_eta: 0.0,
        });
    }
    let defect = l_tau_apply(g, frame).sub(&l_eta_apply(f, frame))?.l2_norm();
    if defect > COMPAT_TOL * scale {
        return Err(SchrodingerError::CompatibilityViolation {
            defect: defect / scale,
        });
    }
    let sol = solve_l_tau(f, frame)?;
    let rt = l_tau_apply(&sol.p, frame).sub(f)?.l2_norm() / scale;
    let re = l_eta_apply(&sol.p, frame).sub(g)?.l2_norm() / scale;
    Ok(TransferSolution {
        p: sol.p,
        residual_tau: rt,
        residual_eta: re,
    })
}

/// Output of [`split_infinite`].
#[derive(Debug, Clone)]
pub struct InfiniteSplit {
    pub p: GridField,
    /// `f − L_τ P`.
    pub f_res: GridField,
    /// `g − L_η P`.
    pub g_res: GridField,
    /// `‖P‖ / ‖f‖`, `‖f_res‖ / ‖φ‖`, `‖g_res‖ / ‖φ‖` (L², 0 when the denominator is).
    pub constants: [f64; 3],
    /// True when the η-side (mirror) construction was used.
    pub mirror: bool,
    /// True when the default bump degenerated and the narrower one was used.
    pub bump_perturbed: bool,
}

fn ratio(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

/// Localizer `χ(w) = sinc(ν₂w/2π)·exp(−w²/(2σ²))`, equal to `δ_{k0}` at `w = 2πk/ν₂`.
pub fn mirror_localizer(w: f64, frame: &RotatedFrame) -> f64 {
    let x = frame.nu2 * w / (2.0 * PI);
    let s = if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    };
    s * (-w * w / (2.0 * MIRROR_SIGMA * MIRROR_SIGMA)).exp()
}

/// `g` minus its values on the zero hyperplanes spread by the localizer.
pub fn mirror_projection(g: &GridField, frame: &RotatedFrame) -> GridField {
    // A second pass removes what interpolation leaves on the hyperplanes.
    let once = mirror_pass(g, frame);
    mirror_pass(&once, frame)
}

fn mirror_pass(g: &GridField, frame: &RotatedFrame) -> GridField {
    let coords = g.coords();
    let mut out = g.clone();
    for z0 in eta_zero_set(g, frame) {
        let vals = interpolate_at(g, 1, z0);
        for (k, mut sub) in out.samples.axis_iter_mut(Axis(1)).enumerate() {
            let c = mirror_localizer(coords[k] - z0, frame);
            if c == 0.0 {
                continue;
            }
            Zip::from(&mut sub).and(&vals).for_each(|o, &v| *o -= v * c);
        }
    }
    out
}

/// Split `(f, g)` with defect `φ = L_η f − L_τ g` into `(L_τ P, L_η P)` plus residuals.
pub fn split_infinite(
    f: &GridField,
    g: &GridField,
    phi: &GridField,
    frame: &RotatedFrame,
) -> Result<InfiniteSplit> {
    let scale = f.l2_norm() + g.l2_norm() + phi.l2_norm();
    let defect = l_eta_apply(f, frame)
        .sub(&l_tau_apply(g, frame))?
        .sub(phi)?
        .l2_norm();
    if defect > DEFECT_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(SchrodingerError::NotACochain {
            defect: ratio(defect, scale),
        });
    }
    let nphi = phi.l2_norm();
    let (p, mirror, perturbed) = if f.max_abs() == 0.0 && g.max_abs() > 0.0 {
        let rg = mirror_projection(g, frame);
        (solve_l_eta(&rg, frame)?.p, true, false)
    } else {
        let (rf, bump) = r_psi_checked(f, frame)?;
        let perturbed = (bump.half_width - 0.5 / frame.tau).abs() > 1e-15;
        (solve_l_tau(&rf, frame)?.p, false, perturbed)
    };
    let f_res = f.sub(&l_tau_apply(&p, frame))?;
    let g_res = g.sub(&l_eta_apply(&p, frame))?;
    let constants = [
        ratio(p.l2_norm(), f.l2_norm().max(g.l2_norm())),
        ratio(f_res.l2_norm(), nphi),
        ratio(g_res.l2_norm(), nphi),
    ];
    Ok(InfiniteSplit {
        p,
        f_res,
        g_res,
        constants,
        mirror,
        bump_perturbed: perturbed,
    })
}
