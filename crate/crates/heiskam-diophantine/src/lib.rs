//! Frequency data for the ℤ² translation action on the Heisenberg nilmanifold.
//!
//! A [`FrequencyPair`] holds the two orthogonal vectors τ⃗ and η⃗ that define the
//! generators `exp(Σ τᵢXᵢ)` and `exp(Σ ηᵢΛᵢ)`, together with a Diophantine
//! constant certified by exhaustive search over a finite box. On the torus
//! 𝕋²ⁿ with coordinates `(x, ξ)` the generators act by translation by
//! `(τ⃗, 0)` and `(0, η⃗)`, so for a lattice vector `m = (m₁, m₂)` the small
//! divisors `ζ(m, κ) = exp(2πi m·κ⃗) − 1` depend only on one block of `m`.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Orthogonality tolerance accepted on input before exactification.
pub const ORTHOGONALITY_INPUT_TOL: f64 = 1e-12;
/// Orthogonality guaranteed on a constructed pair.
pub const ORTHOGONALITY_TOL: f64 = 1e-14;
/// Default exponent γ.
pub const DEFAULT_GAMMA: f64 = 1.5;
/// Default certification box.
pub const DEFAULT_SEARCH_BOUND: usize = 200;

/// Which generator a quantity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kappa {
    Tau,
    Eta,
}

impl Kappa {
    /// Offset of the block of `m ∈ ℤ²ⁿ` this generator sees.
    pub fn block_offset(self, n: usize) -> usize {
        match self {
            Kappa::Tau => 0,
            Kappa::Eta => n,
        }
    }
}

impl std::fmt::Display for Kappa {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Kappa::Tau => write!(f, "tau"),
            Kappa::Eta => write!(f, "eta"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiophantineError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("tau and eta are not orthogonal (dot = {dot:e})")]
    NotOrthogonal { dot: f64 },
    #[error("exact resonance for {kappa} at block {m:?}, p = {p}")]
    DiophantineFailure { kappa: Kappa, m: Vec<i32>, p: i64 },
}

/// The lattice vector realising the certified minimum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub kappa: Kappa,
    /// The relevant block (m₁ for τ, m₂ for η).
    pub m: Vec<i32>,
    pub p: i64,
    /// `|κ·m − p| · |m·m|^γ` at the witness.
    pub value: f64,
}

/// Diophantine frequency data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyPair {
    pub tau_vec: Vec<f64>,
    pub eta_vec: Vec<f64>,
    /// Exponent for τ (and the shared exponent when both agree).
    pub gamma: f64,
    /// Exponent for η.
    pub gamma_eta: f64,
    /// Certified constant for the block form `|κ·m − p| > c |m_b·m_b|^{−γ}`.
    pub c: f64,
    /// Certified constant for the full form `|κ·m − p| > c |m·m|^{−γ}`.
    pub c_full: f64,
    /// Per-generator constants.
    pub c_tau: f64,
    pub c_eta: f64,
    /// |τ⃗|.
    pub tau: f64,
    pub search_bound: usize,
    pub worst: Witness,
}

/// Minimum of `|κ·b − p|·(b·b)^γ` over a search box, with the witness.
#[derive(Debug, Clone)]
struct SearchMin {
    value: f64,
    m: Vec<i32>,
    p: i64,
    resonant: bool,
}

impl SearchMin {
    fn better(&self, other: &SearchMin) -> bool {
        if self.resonant != other.resonant {
            return self.resonant;
        }
        match self.value.partial_cmp(&other.value) {
            Some(Ordering::Less) => true,
            Some(Ordering::Greater) => false,
            _ => self.m < other.m,
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Exact-resonance test with a rounding allowance proportional to the
/// magnitude of the summands.
fn is_resonant(dist: f64, scale: f64) -> bool {
    dist <= 8.0 * f64::EPSILON * (scale + 1.0)
}

/// Exhaustive search of `min |v·b − p| (b·b)^γ` over `0 < |b|_∞ ≤ bound`.
///
/// Only one of each pair ±b is visited. Work is split over the first
/// coordinate and merged by minimum with a lexicographic tie-break, so the
/// result does not depend on scheduling.
fn certify_vector(v: &[f64], gamma: f64, bound: usize) -> SearchMin {
    let n = v.len();
    let b = bound as i32;
    let side = 2 * bound + 1;
    let rest: usize = side.pow((n - 1) as u32);
    let first: Vec<i32> = (0..=b).collect();
    let partials: Vec<SearchMin> = first
        .par_iter()
        .map(|&b0| {
            let mut best: Option<SearchMin> = None;
            let mut m = vec![0i32; n];
            m[0] = b0;
            for idx in 0..rest {
                let mut r = idx;
                for j in (1..n).rev() {
                    m[j] = (r % side) as i32 - b;
                    r /= side;
                }
                // Lexicographically positive representative only.
                let first_nz = m.iter().find(|&&x| x != 0);
                match first_nz {
                    Some(&x) if x > 0 => {}
                    _ => continue,
                }
                let val: f64 = m.iter().zip(v).map(|(&mi, &vi)| mi as f64 * vi).sum();
                let scale: f64 = m
                    .iter()
                    .zip(v)
                    .map(|(&mi, &vi)| (mi as f64 * vi).abs())
                    .sum();
                let p = val.round();
                let dist = (val - p).abs();
                let mm: f64 = m.iter().map(|&x| (x as f64) * (x as f64)).sum();
                let cand = SearchMin {
                    value: dist * mm.powf(gamma),
                    m: m.clone(),
                    p: p as i64,
                    resonant: is_resonant(dist, scale),
                };
                if best.as_ref().map_or(true, |cur| cand.better(cur)) {
                    best = Some(cand);
                }
            }
            best
        })
        .filter_map(|x| x)
        .collect();
    let mut out = partials[0].clone();
    for c in &partials[1..] {
        if c.better(&out) {
            out = c.clone();
        }
    }
    out
}

/// Build and certify a frequency pair with a shared exponent.
pub fn make_pair(
    tau_vec: &[f64],
    eta_vec: &[f64],
    gamma: f64,
    search_bound: usize,
) -> Result<FrequencyPair, DiophantineError> {
    make_pair_with_exponents(tau_vec, eta_vec, gamma, gamma, search_bound)
}

/// Build and certify a frequency pair with separate exponents for τ and η.
pub fn make_pair_with_exponents(
    tau_vec: &[f64],
    eta_vec: &[f64],
    gamma_tau: f64,
    gamma_eta: f64,
    search_bound: usize,
) -> Result<FrequencyPair, DiophantineError> {
    let n = tau_vec.len();
    if n < 2 || eta_vec.len() != n {
        return Err(DiophantineError::InvalidInput(format!(
            "tau and eta must have equal length n >= 2 (got {} and {})",
            n,
            eta_vec.len()
        )));
    }
    if tau_vec.iter().chain(eta_vec).any(|x| !x.is_finite()) {
        return Err(DiophantineError::InvalidInput(
            "non-finite frequency".into(),
        ));
    }
    if !(gamma_tau > 0.0 && gamma_eta > 0.0) {
        return Err(DiophantineError::InvalidInput(
            "gamma must be positive".into(),
        ));
    }
    if search_bound == 0 {
        return Err(DiophantineError::InvalidInput(
            "search bound must be positive".into(),
        ));
    }
    let tau = norm(tau_vec);
    let eta_norm = norm(eta_vec);
    if tau == 0.0 || eta_norm == 0.0 {
        return Err(DiophantineError::InvalidInput(
            "tau and eta must be nonzero".into(),
        ));
    }
    let d = dot(tau_vec, eta_vec);
    if d.abs() > ORTHOGONALITY_INPUT_TOL {
        return Err(DiophantineError::NotOrthogonal { dot: d });
    }
    // Remove the residual component of η along τ.
    let mut eta: Vec<f64> = eta_vec.to_vec();
    if d != 0.0 {
        let k = d / (tau * tau);
        for (e, t) in eta.iter_mut().zip(tau_vec) {
            *e -= k * t;
        }
    }

    let st = certify_vector(tau_vec, gamma_tau, search_bound);
    if st.resonant {
        return Err(DiophantineError::DiophantineFailure {
            kappa: Kappa::Tau,
            m: st.m,
            p: st.p,
        });
    }
    let se = certify_vector(&eta, gamma_eta, search_bound);
    if se.resonant {
        return Err(DiophantineError::DiophantineFailure {
            kappa: Kappa::Eta,
            m: se.m,
            p: se.p,
        });
    }
    let (worst, c) = if st.value <= se.value {
        (
            Witness {
                kappa: Kappa::Tau,
                m: st.m.clone(),
                p: st.p,
                value: st.value,
            },
            st.value,
        )
    } else {
        (
            Witness {
                kappa: Kappa::Eta,
                m: se.m.clone(),
                p: se.p,
                value: se.value,
            },
            se.value,
        )
    };
    // In the full form the other block may be zero, which attains the block minimum,
    // so both constants coincide on any box that contains those vectors.
    let c_full = c;
    Ok(FrequencyPair {
        tau_vec: tau_vec.to_vec(),
        eta_vec: eta,
        gamma: gamma_tau,
        gamma_eta,
        c,
        c_full,
        c_tau: st.value,
        c_eta: se.value,
        tau,
        search_bound,
        worst,
    })
}

/// The default pair τ⃗ = (√2, √3), η⃗ = (√3, −√2), γ = 1.5.
pub fn default_pair(search_bound: usize) -> FrequencyPair {
    let s2 = 2f64.sqrt();
    let s3 = 3f64.sqrt();
    make_pair(&[s2, s3], &[s3, -s2], DEFAULT_GAMMA, search_bound)
        .expect("the default pair is orthogonal and Diophantine")
}

impl FrequencyPair {
    pub fn n(&self) -> usize {
        self.tau_vec.len()
    }

    pub fn eta_norm(&self) -> f64 {
        norm(&self.eta_vec)
    }

    pub fn gamma_for(&self, kappa: Kappa) -> f64 {
        match kappa {
            Kappa::Tau => self.gamma,
            Kappa::Eta => self.gamma_eta,
        }
    }

    pub fn vector(&self, kappa: Kappa) -> &[f64] {
        match kappa {
            Kappa::Tau => &self.tau_vec,
            Kappa::Eta => &self.eta_vec,
        }
    }

    /// κ⃗ embedded in ℝ²ⁿ: `(τ⃗, 0)` or `(0, η⃗)`.
    pub fn embedded(&self, kappa: Kappa) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; 2 * n];
        let off = kappa.block_offset(n);
        out[off..off + n].copy_from_slice(self.vector(kappa));
        out
    }

    /// `m·κ⃗` for `m ∈ ℤ²ⁿ`, reduced to `[−½, ½)`.
    pub fn phase(&self, m: &[i32], kappa: Kappa) -> f64 {
        let n = self.n();
        let off = kappa.block_offset(n);
        let v = self.vector(kappa);
        let s: f64 = (0..n).map(|j| m[off + j] as f64 * v[j]).sum();
        s - s.round()
    }

    /// Small divisor `ζ(m, κ) = exp(2πi m·κ⃗) − 1`.
    pub fn zeta(&self, m: &[i32], kappa: Kappa) -> Complex64 {
        zeta_from_phase(self.phase(m, kappa))
    }

    /// True when `ζ(m, κ)` vanishes identically (the κ-block of `m` is zero).
    pub fn zeta_vanishes(&self, m: &[i32], kappa: Kappa) -> bool {
        let n = self.n();
        let off = kappa.block_offset(n);
        m[off..off + n].iter().all(|&x| x == 0)
    }

    /// The recorded constant `C_{τ,η}` of the bound `|ζ|⁻¹ ≤ C |m·m|^γ`, from
    /// `|e^{iθ} − 1| ≥ 2|θ|/π` on `|θ| ≤ π`.
    pub fn inverse_divisor_constant(&self) -> f64 {
        1.0 / (4.0 * self.c)
    }
}

/// `exp(2πi θ) − 1` evaluated without cancellation for small θ.
pub fn zeta_from_phase(theta: f64) -> Complex64 {
    let a = PI * theta;
    let s = a.sin();
    Complex64::new(-2.0 * s * s, (2.0 * a).sin())
}

/// One entry of a divisor table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivisorEntry {
    /// The κ-block of `m`.
    pub block: Vec<i32>,
    pub zeta: Complex64,
    /// `|ζ|⁻¹`, infinite on the vanishing stratum.
    pub inv_abs: f64,
}

/// Summary numbers for a table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableStats {
    pub entries: usize,
    pub vanishing: usize,
    pub max_inverse: f64,
    /// max over nonvanishing entries of `|ζ|⁻¹ / (b·b)^γ`.
    pub measured_constant: f64,
    /// The certified constant `1/(4c)`.
    pub certified_constant: f64,
}

/// All `ζ(m, κ)` with `|m|_∞ ≤ cutoff`.
///
/// Since `ζ(m, κ)` depends on the κ-block only, the table stores one entry per
/// block `b ∈ ℤⁿ, |b|_∞ ≤ cutoff`; [`DivisorTable::get`] accepts full vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DivisorTable {
    pub kappa: Kappa,
    pub n: usize,
    pub cutoff: usize,
    pub gamma: f64,
    pub entries: Vec<DivisorEntry>,
    pub stats: TableStats,
}

/// Build the divisor table of `pair` for generator `kappa`.
pub fn small_divisor_table(pair: &FrequencyPair, kappa: Kappa, cutoff: usize) -> DivisorTable {
    let n = pair.n();
    let side = 2 * cutoff + 1;
    let total = side.pow(n as u32);
    let gamma = pair.gamma_for(kappa);
    let off = kappa.block_offset(n);
    let mut entries = Vec::with_capacity(total);
    let mut full = vec![0i32; 2 * n];
    let mut vanishing = 0;
    let mut max_inverse: f64 = 0.0;
    let mut measured: f64 = 0.0;
    for idx in 0..total {
        let mut r = idx;
        let mut block = vec![0i32; n];
        for j in (0..n).rev() {
            block[j] = (r % side) as i32 - cutoff as i32;
            r /= side;
        }
        full[off..off + n].copy_from_slice(&block);
        let z = pair.zeta(&full, kappa);
        let zero = block.iter().all(|&x| x == 0);
        let inv_abs = if zero { f64::INFINITY } else { 1.0 / z.norm() };
        if zero {
            vanishing += 1;
        } else {
            max_inverse = max_inverse.max(inv_abs);
            let bb: f64 = block.iter().map(|&x| (x as f64).powi(2)).sum();
            measured = measured.max(inv_abs / bb.powf(gamma));
        }
        entries.push(DivisorEntry {
            block,
            zeta: z,
            inv_abs,
        });
    }
    DivisorTable {
        kappa,
        n,
        cutoff,
        gamma,
        entries,
        stats: TableStats {
            entries: total,
            vanishing,
            max_inverse,
            measured_constant: measured,
            certified_constant: pair.inverse_divisor_constant(),
        },
    }
}

impl DivisorTable {
    fn index(&self, block: &[i32]) -> Option<usize> {
        let side = 2 * self.cutoff as i64 + 1;
        let mut idx: i64 = 0;
        for &b in block {
            if b.unsigned_abs() as usize > self.cutoff {
                return None;
            }
            idx = idx * side + (b as i64 + self.cutoff as i64);
        }
        Some(idx as usize)
    }

    /// Entry for a full lattice vector `m ∈ ℤ²ⁿ`.
    pub fn get(&self, m: &[i32]) -> Option<&DivisorEntry> {
        let off = self.kappa.block_offset(self.n);
        self.index(&m[off..off + self.n]).map(|i| &self.entries[i])
    }

    /// True when every nonvanishing entry satisfies `|ζ|⁻¹ ≤ C (b·b)^γ` with the
    /// certified constant. Entries outside the certification box are skipped.
    pub fn check_certified_bound(&self, search_bound: usize) -> bool {
        let c = self.stats.certified_constant;
        self.entries.iter().all(|e| {
            if e.inv_abs.is_infinite()
                || e.block
                    .iter()
                    .any(|&b| b.unsigned_abs() as usize > search_bound)
            {
                return true;
            }
            let bb: f64 = e.block.iter().map(|&x| (x as f64).powi(2)).sum();
            e.inv_abs <= c * bb.powf(self.gamma) * (1.0 + 1e-12)
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_small_phase_is_accurate() {
        let z = zeta_from_phase(1e-12);
        let a = 2.0 * PI * 1e-12;
        let expect = Complex64::new(-a * a / 2.0, a);
        assert!((z - expect).norm() < 1e-30);
    }

    #[test]
    fn lexicographic_positive_search_matches_full_box() {
        let v = [2f64.sqrt(), 3f64.sqrt()];
        let got = certify_vector(&v, 1.5, 12);
        let mut best = f64::INFINITY;
        for a in -12i32..=12 {
            for b in -12i32..=12 {
                if a == 0 && b == 0 {
                    continue;
                }
                let val = a as f64 * v[0] + b as f64 * v[1];
                let d = (val - val.round()).abs();
                best = best.min(d * ((a * a + b * b) as f64).powf(1.5));
            }
        }
        assert!((got.value - best).abs() <= 1e-15 * best.max(1.0));
    }
}
