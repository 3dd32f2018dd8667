//! Perturbed families `λ ↦ (ỹ₁^λ, ỹ₂^λ)` and their current conjugated fields.

use heiskam_diophantine::FrequencyPair;
use heiskam_dynamics::{
    conjugate_on_grid, d1, model_generator, SampleGrid, TorusClassVectorField as Field,
};
use heiskam_fourier::TorusField;
use heiskam_torus::{family_generators, FamilyParameter, HeisVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{KamConfig, KamError, Result};

/// Fitted coefficients below this are rounding noise of `O(1)` brackets and
/// are dropped, so that high Sobolev norms measure the field and not the noise.
pub const NOISE_FLOOR: f64 = 1e-19;

/// How `ỹ_i^λ` is built from the algebraic family `y_i^λ = x·exp(Y_i + F_i^λ)`.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilyBase {
    /// `ỹ_i^λ = h*⁻¹∘y_i^λ∘h*` with `h*(x) = x·exp H*(x)`; commuting for every λ.
    Conjugated { h_star: Field },
    /// `ỹ_i^λ(x) = x·exp(Y_i + F_i^λ + P_i(x))`; commuting only if the `P_i` are
    /// chosen so.
    Additive { p: [Field; 2] },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationFamily {
    pub pair: FrequencyPair,
    pub base: FamilyBase,
}

/// Current conjugacy data: `k` is the composite through which the base family
/// is seen (`h*∘h` or `h`), `h_total` the accumulated `h = h₀∘h₁∘…`.
#[derive(Debug, Clone, PartialEq)]
pub struct KamState {
    pub k: Field,
    pub h_total: Field,
    pub lambda: Vec<f64>,
}

/// `(F̃₁^λ, F̃₂^λ)` at one parameter, with refit diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyFields {
    pub f: [Field; 2],
    pub aliasing: f64,
    pub inversion_iterations: usize,
}

impl FamilyFields {
    /// The ten averages `Ave F̃₁, Ave F̃₂`.
    pub fn averages(&self) -> Vec<f64> {
        let mut v = self.f[0].average().to_vec();
        v.extend(self.f[1].average().to_vec());
        v
    }

    /// `Φ(λ)`: the averages in chart order, i.e. without the solved slot.
    pub fn phi(&self) -> Vec<f64> {
        let mut v = self.averages();
        v.remove(FamilyParameter::solved_slot(self.f[0].n()));
        v
    }

    /// `max_i ‖F̃_i‖_s`.
    pub fn norm(&self, s: f64) -> f64 {
        self.f[0].sobolev_norm(s).max(self.f[1].sobolev_norm(s))
    }

    /// `|Ave [Y₂, F̃₁] − Ave [Y₁, F̃₂]|`, which is quadratic in the fields when
    /// the pair commutes.
    pub fn average_defect(&self, pair: &FrequencyPair) -> f64 {
        let a = model_generator(pair, 2).omega(&self.f[0].average());
        let b = model_generator(pair, 1).omega(&self.f[1].average());
        (a - b).abs()
    }
}

fn prune_noise(f: &Field) -> Field {
    f.map_components(|_, c| {
        let mut c = c.clone();
        c.prune(NOISE_FLOOR);
        c
    })
}

/// Field of `a∘b` (b applied first) for maps `x·exp A(x)`, `x·exp B(x)`, refitted
/// at `cutoff`. Returns the refit aliasing ratio alongside.
pub fn compose_conjugacies(
    a: &Field,
    b: &Field,
    cutoff: usize,
    factor: usize,
) -> Result<(Field, f64)> {
    use heiskam_dynamics::{compose_on_grid, PerturbedMap};
    let n = a.n();
    let zero = HeisVector::zero(n);
    let pa = PerturbedMap {
        generator_index: None,
        y: zero.clone(),
        field: a.clone(),
    };
    let pb = PerturbedMap {
        generator_index: None,
        y: zero,
        field: b.clone(),
    };
    let grid = SampleGrid::for_fields(&[a, b], cutoff, factor);
    let s = compose_on_grid(&pa, &pb, &grid)?;
    let (f, ratio) = Field::fit(n, &grid, &s, cutoff.min(grid.max_cutoff()), cutoff)?;
    Ok((prune_noise(&f), ratio))
}

impl PerturbationFamily {
    pub fn n(&self) -> usize {
        self.pair.n()
    }

    /// `h* = id`: the algebraic family itself.
    pub fn unperturbed(pair: FrequencyPair) -> Self {
        let n = pair.n();
        Self {
            pair,
            base: FamilyBase::Conjugated {
                h_star: Field::zero(n, 0),
            },
        }
    }

    pub fn conjugated(pair: FrequencyPair, h_star: Field) -> Self {
        Self {
            pair,
            base: FamilyBase::Conjugated { h_star },
        }
    }

    pub fn additive(pair: FrequencyPair, p1: Field, p2: Field) -> Self {
        Self {
            pair,
            base: FamilyBase::Additive { p: [p1, p2] },
        }
    }

    /// Model conjugated by a random low-mode `h*` in the `(x₁, ξ₁)` plane,
    /// scaled so that `max_i ‖(d₁H*)_i‖_s = eps0` at the base regularity `s`.
    pub fn manufactured_seed(
        pair: FrequencyPair,
        eps0: f64,
        seed: u64,
        cfg: &KamConfig,
    ) -> Result<Self> {
        let h = seed_field(&pair, seed, 2)?;
        let (a, b) = d1(&h, &pair)?;
        let size = a
            .sobolev_norm(cfg.base_regularity)
            .max(b.sobolev_norm(cfg.base_regularity));
        Ok(Self::conjugated(pair, h.scale(eps0 / size)))
    }

    /// `P₁ = 0`, `P₂ = δ·Λ₁`: the pair does not commute, and no conjugacy removes
    /// the resulting central average.
    pub fn nonremovable_control(pair: FrequencyPair, delta: f64) -> Self {
        let n = pair.n();
        let mut lam = vec![0.0; n];
        lam[0] = delta;
        let p2 = Field::constant(&HeisVector::new(vec![0.0; n], lam, 0.0), 0);
        Self::additive(pair, Field::zero(n, 0), p2)
    }

    pub fn initial_state(&self) -> KamState {
        let n = self.n();
        let k = match &self.base {
            FamilyBase::Conjugated { h_star } => h_star.clone(),
            FamilyBase::Additive { .. } => Field::zero(n, 0),
        };
        KamState {
            k,
            h_total: Field::zero(n, 0),
            lambda: vec![0.0; FamilyParameter::chart_dim(n)],
        }
    }

    /// The constant fields `(F₁^λ, F₂^λ)` of the algebraic family.
    pub fn constants(&self, lam: &[f64]) -> Result<(HeisVector, HeisVector)> {
        let p = FamilyParameter::from_chart(lam, &self.pair)?;
        Ok(family_generators(&p, &self.pair)?)
    }

    fn additive_fields(&self) -> Vec<&Field> {
        match &self.base {
            FamilyBase::Additive { p } => p.iter().collect(),
            FamilyBase::Conjugated { .. } => Vec::new(),
        }
    }

    /// Fields of `k⁻¹∘ỹ_i^λ∘k` on the working grid, refitted at the cutoff.
    pub fn fields_at(
        &self,
        state: &KamState,
        lam: &[f64],
        cfg: &KamConfig,
    ) -> Result<FamilyFields> {
        let n = self.n();
        let (f1, f2) = self.constants(lam)?;
        let mut fs: Vec<&Field> = vec![&state.k];
        fs.extend(self.additive_fields());
        let grid = SampleGrid::for_fields(&fs, cfg.cutoff, cfg.grid_factor);
        let mut out = Vec::with_capacity(2);
        let mut aliasing = 0.0f64;
        let mut iters = 0;
        for (i, fc) in [(1usize, f1), (2, f2)] {
            let y = model_generator(&self.pair, i).add(&fc);
            let p = match &self.base {
                FamilyBase::Additive { p } if !p[i - 1].is_empty() => Some(&p[i - 1]),
                _ => None,
            };
            let s = conjugate_on_grid(&y, p, &state.k, &grid)?;
            let (g, ratio) = Field::fit(
                n,
                &grid,
                &s.g,
                cfg.cutoff.min(grid.max_cutoff()),
                cfg.cutoff,
            )?;
            aliasing = aliasing.max(ratio);
            iters = iters.max(s.iterations);
            out.push(prune_noise(&g).add_constant(&fc));
        }
        let f2 = out.pop().unwrap();
        let f1 = out.pop().unwrap();
        Ok(FamilyFields {
            f: [f1, f2],
            aliasing,
            inversion_iterations: iters,
        })
    }
}

/// Random real mean-free field with modes `1 ≤ |m|_∞ ≤ band` on the `(x₁, ξ₁)`
/// plane, coefficient scale `e^{−|m|₁/2}`.
fn seed_field(pair: &FrequencyPair, seed: u64, band: i32) -> Result<Field> {
    let n = pair.n();
    if n < 1 {
        return Err(KamError::InvalidConfig("dimension must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut comps = Vec::with_capacity(2 * n + 1);
    for _ in 0..2 * n + 1 {
        let mut entries = Vec::new();
        for a in -band..=band {
            for b in -band..=band {
                if a == 0 && b == 0 {
                    continue;
                }
                let mut m = vec![0i32; 2 * n];
                m[0] = a;
                m[n] = b;
                let s = (-0.5 * (a.abs() + b.abs()) as f64).exp();
                entries.push((
                    m,
                    Complex64::new(rng.gen_range(-s..s), rng.gen_range(-s..s)),
                ));
            }
        }
        let f = TorusField::from_entries(n, band as usize, false, entries)
            .map_err(heiskam_dynamics::DynamicsError::from)?;
        comps.push(f.into_real());
    }
    Ok(Field::from_components(comps)?)
}
