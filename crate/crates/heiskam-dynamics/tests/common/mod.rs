#![allow(dead_code)]

use heiskam_dynamics::TorusClassVectorField;
use heiskam_fourier::TorusField;
use heiskam_torus::HeisVector;
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Random real field on 𝕋⁴ with modes on `axes`, `|m|_∞ ≤ band`, coefficient
/// scale `amp·exp(−decay|m|₁)`, stored under `cutoff`.
pub fn rand_scalar(
    rng: &mut ChaCha8Rng,
    cutoff: usize,
    band: usize,
    axes: &[usize],
    amp: f64,
    decay: f64,
    mean: bool,
) -> TorusField {
    let mut f = TorusField::zero(2, cutoff, false);
    let k = band as i32;
    let mut idx = vec![-k; axes.len()];
    loop {
        let mut m = [0i32; 4];
        for (t, &j) in axes.iter().enumerate() {
            m[j] = idx[t];
        }
        let l1: i32 = m.iter().map(|x| x.abs()).sum();
        if mean || l1 > 0 {
            let a = amp * (-decay * l1 as f64).exp();
            f.set(
                &m,
                Complex64::new(rng.gen_range(-a..a), rng.gen_range(-a..a)),
            )
            .unwrap();
        }
        let mut t = 0;
        loop {
            if t == idx.len() {
                return f.into_real();
            }
            idx[t] += 1;
            if idx[t] <= k {
                break;
            }
            idx[t] = -k;
            t += 1;
        }
    }
}

pub fn rand_vf(
    rng: &mut ChaCha8Rng,
    cutoff: usize,
    band: usize,
    axes: &[usize],
    amp: f64,
    decay: f64,
    mean: bool,
) -> TorusClassVectorField {
    TorusClassVectorField::from_components(
        (0..5)
            .map(|_| rand_scalar(rng, cutoff, band, axes, amp, decay, mean))
            .collect(),
    )
    .unwrap()
}

pub fn eval_vf(f: &TorusClassVectorField, u: &[f64]) -> HeisVector {
    let v: Vec<f64> = f.components().iter().map(|c| c.evaluate(u).re).collect();
    HeisVector::from_slice(&v)
}

pub fn max_coeff_diff(a: &TorusClassVectorField, b: &TorusClassVectorField) -> f64 {
    a.sub(b).unwrap().max_coeff()
}

/// The `(x₁, ξ₁)` plane of 𝕋⁴.
pub const PLANE: [usize; 2] = [0, 2];
pub const ALL: [usize; 4] = [0, 1, 2, 3];
