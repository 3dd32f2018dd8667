//! Subcommand implementations.

use std::path::{Path, PathBuf};

use heiskam_diophantine::{make_pair, small_divisor_table, FrequencyPair, Kappa, TableStats};
use heiskam_fourier::json::fmt_f64;
use heiskam_fourier::TorusField;
use heiskam_kam::{KamConfig, KamError, PerturbationFamily};
use heiskam_schrodinger::{
    build_frame, l_eta_apply, l_tau_apply, solve_l_eta, solve_l_tau, split_infinite,
    transfer_solve, GridField, SchrodingerError,
};
use heiskam_torus::constant::rank_of_pairs;
use heiskam_torus::{
    cohomology_basis, constant_coboundary, constant_cocycle_space, solve_common_coboundary,
    split_torus, tame_ratio, HeisVector, TorusError,
};
use serde::{Deserialize, Serialize};

use crate::tokens::{load_pair, parse_list, parse_scalar, PairSpec};
use crate::{json, read_input, suite, write_output, CliError, CliResult, Command, SchrodingerOp};
use crate::{EXIT_INADMISSIBLE, EXIT_INPUT, EXIT_NO_CONVERGENCE};

pub const TORUS_CSV_VERSION: &str = "# heiskam solve-torus v1";

pub fn run(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::DiophantineCheck {
            tau,
            eta,
            gamma,
            bound,
            cutoff,
            out,
        } => diophantine_check(
            tau.as_deref(),
            eta.as_deref(),
            gamma.as_deref(),
            bound,
            cutoff,
            out.as_deref(),
        ),
        Command::SolveTorus {
            inputs,
            pair,
            s,
            out,
        } => solve_torus(&inputs[0], &inputs[1], pair.as_deref(), &s, &out),
        Command::SolveSchrodinger {
            op,
            inputs,
            frame,
            out,
        } => solve_schrodinger(op, &inputs, frame.as_deref(), &out),
        Command::Cohomology { n } => {
            print!("{}", json::to_string(&cohomology_dims(n)?));
            Ok(())
        }
        Command::KamRun {
            config,
            out,
            seed,
            eps0,
        } => kam_run(config.as_deref(), &out, seed, eps0),
        Command::VerifySuite { seed, out } => write_output(&out, &suite::run_suite(seed)?),
    }
}

#[derive(Debug, Serialize)]
struct StatsPair {
    tau: TableStats,
    eta: TableStats,
}

#[derive(Debug, Serialize)]
struct DiophantineReport {
    tau: Vec<f64>,
    eta: Vec<f64>,
    gamma: f64,
    search_bound: usize,
    c: f64,
    c_tau: f64,
    c_eta: f64,
    worst_kappa: Kappa,
    worst_m: Vec<i32>,
    worst_p: i64,
    table_cutoff: usize,
    table_stats: StatsPair,
}

fn diophantine_check(
    tau: Option<&str>,
    eta: Option<&str>,
    gamma: Option<&str>,
    bound: usize,
    cutoff: usize,
    out: Option<&Path>,
) -> CliResult<()> {
    let pair = match (tau, eta) {
        (None, None) => {
            let spec = PairSpec {
                bound: Some(bound),
                ..PairSpec::default()
            };
            match gamma {
                None => spec.build()?,
                Some(g) => {
                    let p = spec.build()?;
                    make_pair(&p.tau_vec, &p.eta_vec, parse_scalar(g)?, bound)
                        .map_err(|e| CliError::input(e.to_string()))?
                }
            }
        }
        (Some(t), Some(e)) => {
            let g = gamma
                .map(parse_scalar)
                .transpose()?
                .unwrap_or(heiskam_diophantine::DEFAULT_GAMMA);
            make_pair(&parse_list(t)?, &parse_list(e)?, g, bound)
                .map_err(|e| CliError::input(e.to_string()))?
        }
        _ => return Err(CliError::input("--tau and --eta go together".into())),
    };
    let report = DiophantineReport {
        tau: pair.tau_vec.clone(),
        eta: pair.eta_vec.clone(),
        gamma: pair.gamma,
        search_bound: pair.search_bound,
        c: pair.c,
        c_tau: pair.c_tau,
        c_eta: pair.c_eta,
        worst_kappa: pair.worst.kappa,
        worst_m: pair.worst.m.clone(),
        worst_p: pair.worst.p,
        table_cutoff: cutoff,
        table_stats: StatsPair {
            tau: small_divisor_table(&pair, Kappa::Tau, cutoff).stats,
            eta: small_divisor_table(&pair, Kappa::Eta, cutoff).stats,
        },
    };
    let text = json::to_string(&report);
    print!("{text}");
    match out {
        Some(p) => write_output(p, &text),
        None => Ok(()),
    }
}

fn read_torus_field(path: &Path) -> CliResult<TorusField> {
    let s = read_input(path)?;
    TorusField::from_json(&s).map_err(|e| CliError::input(format!("{}: {e}", path.display())))
}

fn torus_input(e: TorusError) -> CliError {
    CliError::input(e.to_string())
}

fn solve_torus(
    f_path: &Path,
    g_path: &Path,
    pair_path: Option<&Path>,
    s_list: &str,
    out: &Path,
) -> CliResult<()> {
    let f = read_torus_field(f_path)?;
    let g = read_torus_field(g_path)?;
    let pair = load_pair(pair_path)?;
    let indices = parse_list(s_list)?;
    if indices.is_empty() {
        return Err(CliError::input("--s is empty".into()));
    }
    let (p, mode) = match solve_common_coboundary(&f, &g, &pair) {
        Ok(sol) => (sol.p, "solve"),
        Err(TorusError::CocycleViolation { .. } | TorusError::ObstructionNonzero { .. }) => {
            let phi = f
                .coboundary_unchecked(Kappa::Eta, &pair)
                .sub(&g.coboundary_unchecked(Kappa::Tau, &pair))
                .map_err(|e| CliError::input(e.to_string()))?;
            let split = split_torus(&f, &g, &phi, &pair).map_err(torus_input)?;
            write_output(&out.join("f_res.json"), &split.f_res.to_json())?;
            write_output(&out.join("g_res.json"), &split.g_res.to_json())?;
            (split.p, "split")
        }
        Err(e) => return Err(torus_input(e)),
    };
    write_output(&out.join("P.json"), &p.to_json())?;
    let rt = p
        .coboundary_unchecked(Kappa::Tau, &pair)
        .sub(&f)
        .map_err(|e| CliError::internal(e.to_string()))?;
    let re = p
        .coboundary_unchecked(Kappa::Eta, &pair)
        .sub(&g)
        .map_err(|e| CliError::internal(e.to_string()))?;
    let mut csv = format!("{TORUS_CSV_VERSION}\nmode,s,residual_tau,residual_eta,tame_ratio\n");
    for &s in &indices {
        let den = f.sobolev_norm(s) + g.sobolev_norm(s);
        let rel = |x: f64| if den > 0.0 { x / den } else { 0.0 };
        csv.push_str(&format!(
            "{mode},{},{},{},{}\n",
            fmt_f64(s),
            fmt_f64(rel(rt.sobolev_norm(s))),
            fmt_f64(rel(re.sobolev_norm(s))),
            fmt_f64(tame_ratio(&p, &f, &g, s, pair.gamma))
        ));
    }
    write_output(&out.join("torus.csv"), &csv)
}

fn schrodinger_error(e: SchrodingerError) -> CliError {
    match e {
        SchrodingerError::ResolutionExceeded { .. } | SchrodingerError::DegenerateProjection => {
            CliError::internal(e.to_string())
        }
        _ => CliError::input(e.to_string()),
    }
}

fn sibling(stem: &Path, suffix: &str) -> PathBuf {
    let name = stem
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    stem.with_file_name(format!("{name}{suffix}"))
}

fn write_dump(field: &GridField, stem: &Path) -> CliResult<()> {
    if let Some(dir) = stem.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::input(format!("{}: {e}", dir.display())))?;
    }
    field.write_dump(stem).map_err(schrodinger_error)
}

#[derive(Debug, Default, Serialize)]
struct SchrodingerReport {
    op: &'static str,
    residual_tau: Option<f64>,
    residual_eta: Option<f64>,
    series_agreement: Option<f64>,
    branch_agreement: Option<f64>,
    constants: Option<[f64; 3]>,
    mirror: Option<bool>,
    bump_perturbed: Option<bool>,
}

fn solve_schrodinger(
    op: SchrodingerOp,
    inputs: &[PathBuf],
    frame: Option<&Path>,
    out: &Path,
) -> CliResult<()> {
    let want = match op {
        SchrodingerOp::Ltau | SchrodingerOp::Leta => 1,
        SchrodingerOp::Transfer | SchrodingerOp::Split => 2,
    };
    if inputs.len() != want {
        return Err(CliError::input(format!(
            "--op needs {want} input stem(s), got {}",
            inputs.len()
        )));
    }
    let fields: Vec<GridField> = inputs
        .iter()
        .map(|p| {
            GridField::read_dump(p).map_err(|e| CliError::input(format!("{}: {e}", p.display())))
        })
        .collect::<CliResult<_>>()?;
    let pair = load_pair(frame)?;
    let fr = build_frame(&pair).map_err(schrodinger_error)?;
    let report = match op {
        SchrodingerOp::Ltau => {
            let s = solve_l_tau(&fields[0], &fr).map_err(schrodinger_error)?;
            write_dump(&s.p, out)?;
            SchrodingerReport {
                op: "ltau",
                residual_tau: Some(s.residual),
                series_agreement: Some(s.series_agreement),
                ..Default::default()
            }
        }
        SchrodingerOp::Leta => {
            let s = solve_l_eta(&fields[0], &fr).map_err(schrodinger_error)?;
            write_dump(&s.p, out)?;
            SchrodingerReport {
                op: "leta",
                residual_eta: Some(s.residual),
                branch_agreement: Some(s.branch_agreement),
                ..Default::default()
            }
        }
        SchrodingerOp::Transfer => {
            let s = transfer_solve(&fields[0], &fields[1], &fr).map_err(schrodinger_error)?;
            write_dump(&s.p, out)?;
            SchrodingerReport {
                op: "transfer",
                residual_tau: Some(s.residual_tau),
                residual_eta: Some(s.residual_eta),
                ..Default::default()
            }
        }
        SchrodingerOp::Split => {
            let (f, g) = (&fields[0], &fields[1]);
            let phi = l_eta_apply(f, &fr)
                .sub(&l_tau_apply(g, &fr))
                .map_err(schrodinger_error)?;
            let s = split_infinite(f, g, &phi, &fr).map_err(schrodinger_error)?;
            write_dump(&s.p, out)?;
            write_dump(&s.f_res, &sibling(out, "_fres"))?;
            write_dump(&s.g_res, &sibling(out, "_gres"))?;
            SchrodingerReport {
                op: "split",
                constants: Some(s.constants),
                mirror: Some(s.mirror),
                bump_perturbed: Some(s.bump_perturbed),
                ..Default::default()
            }
        }
    };
    print!("{}", json::to_string(&report));
    Ok(())
}

/// Dimensions of the constant cohomology at torus half-dimension `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CohomologyDims {
    pub n: usize,
    pub cocycles: usize,
    pub coboundaries: usize,
    pub h1: usize,
}

const RANK_TOL: f64 = 1e-10;

/// A certified pair for `n ≥ 2`: the default pair at `n = 2`, otherwise
/// `τ⃗ = (√p₁, …, √pₙ)` over the first primes and `η⃗` the part of
/// `(√q₁, −√q₂, √q₃, …)` over the next primes orthogonal to `τ⃗`.
pub fn pair_for_dimension(n: usize) -> CliResult<FrequencyPair> {
    const PRIMES: [f64; 8] = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0];
    if !(2..=4).contains(&n) {
        return Err(CliError::input(format!("n = {n} outside 2..=4")));
    }
    if n == 2 {
        return Ok(heiskam_diophantine::default_pair(
            crate::tokens::CLI_SEARCH_BOUND,
        ));
    }
    let tau: Vec<f64> = PRIMES[..n].iter().map(|p| p.sqrt()).collect();
    let v: Vec<f64> = PRIMES[n..2 * n]
        .iter()
        .enumerate()
        .map(|(i, p)| if i % 2 == 0 { p.sqrt() } else { -p.sqrt() })
        .collect();
    let k = v.iter().zip(&tau).map(|(a, b)| a * b).sum::<f64>()
        / tau.iter().map(|t| t * t).sum::<f64>();
    let eta: Vec<f64> = v.iter().zip(&tau).map(|(a, b)| a - k * b).collect();
    make_pair(&tau, &eta, 0.5 * (n as f64 + 1.0), 8).map_err(|e| CliError::internal(e.to_string()))
}

pub fn cohomology_dims(n: usize) -> CliResult<CohomologyDims> {
    let pair = pair_for_dimension(n)?;
    let cocycles = rank_of_pairs(&constant_cocycle_space(&pair), RANK_TOL);
    let basis: Vec<_> = (0..2 * n + 1)
        .map(|i| {
            let mut e = vec![0.0; 2 * n + 1];
            e[i] = 1.0;
            constant_coboundary(&HeisVector::from_slice(&e), &pair)
        })
        .collect();
    let coboundaries = rank_of_pairs(&basis, RANK_TOL);
    let h1 = rank_of_pairs(&cohomology_basis(&pair), RANK_TOL);
    if cocycles != h1 + coboundaries {
        return Err(CliError::internal(format!(
            "cocycle rank {cocycles} ≠ cohomology rank {h1} + coboundary rank {coboundaries}"
        )));
    }
    Ok(CohomologyDims {
        n,
        cocycles,
        coboundaries,
        h1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    #[default]
    Manufactured,
    Control,
    Unperturbed,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    #[serde(default)]
    pub kind: FamilyKind,
    pub eps0: Option<f64>,
    pub seed: Option<u64>,
    /// Size of the nonremovable average of the control family.
    pub delta: Option<f64>,
}

/// Contents of `kam-run --config`.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub pair: PairSpec,
    #[serde(default)]
    pub family: FamilySpec,
    #[serde(default)]
    pub kam: KamConfig,
}

pub const DEFAULT_SEED: u64 = 7;
pub const DEFAULT_EPS0: f64 = 1e-3;
pub const DEFAULT_CONTROL_DELTA: f64 = 1e-3;

fn kam_exit(e: &KamError) -> i32 {
    match e {
        KamError::StepInadmissible { .. } => EXIT_INADMISSIBLE,
        KamError::InvalidConfig(_) => EXIT_INPUT,
        KamError::NoConvergence { .. }
        | KamError::NontrivialClass { .. }
        | KamError::NewtonDiverged { .. }
        | KamError::OutOfBall { .. } => EXIT_NO_CONVERGENCE,
        _ => crate::EXIT_INTERNAL,
    }
}

#[derive(Debug, Serialize)]
struct KamSummary {
    status: String,
    iterations: usize,
    residual: f64,
    eps_final: f64,
    lambda_bar: Vec<f64>,
}

pub fn build_family(
    cfg: &RunConfig,
    seed: Option<u64>,
    eps0: Option<f64>,
) -> CliResult<PerturbationFamily> {
    let pair = cfg.pair.build()?;
    let fam = &cfg.family;
    Ok(match fam.kind {
        FamilyKind::Unperturbed => PerturbationFamily::unperturbed(pair),
        FamilyKind::Control => PerturbationFamily::nonremovable_control(
            pair,
            fam.delta.unwrap_or(DEFAULT_CONTROL_DELTA),
        ),
        FamilyKind::Manufactured => {
            let seed = fam.seed.or(seed).unwrap_or(DEFAULT_SEED);
            let eps0 = fam.eps0.or(eps0).unwrap_or(DEFAULT_EPS0);
            if !(eps0.is_finite() && eps0 > 0.0) {
                return Err(CliError::input(format!("eps0 = {eps0} must be positive")));
            }
            PerturbationFamily::manufactured_seed(pair, eps0, seed, &cfg.kam)
                .map_err(|e| CliError::input(e.to_string()))?
        }
    })
}

fn kam_run(
    config: Option<&Path>,
    out: &Path,
    seed: Option<u64>,
    eps0: Option<f64>,
) -> CliResult<()> {
    let cfg: RunConfig = match config {
        None => RunConfig::default(),
        Some(p) => {
            let s = read_input(p)?;
            serde_json::from_str(&s)
                .map_err(|e| CliError::input(format!("{}: {e}", p.display())))?
        }
    };
    cfg.kam
        .validate()
        .map_err(|e| CliError::input(e.to_string()))?;
    let fam = build_family(&cfg, seed, eps0)?;
    let (trace, summary, failure) = match heiskam_kam::run(&fam, &cfg.kam) {
        Ok(o) => {
            let eps_final = o.trace.records.last().map_or(f64::NAN, |r| r.eps);
            let s = KamSummary {
                status: "converged".into(),
                iterations: o.iterations,
                residual: o.residual,
                eps_final,
                lambda_bar: o.lambda_bar.clone(),
            };
            (o.trace, s, None)
        }
        Err(f) => {
            let last = f.trace.records.last();
            let s = KamSummary {
                status: format!("{:?}", f.error)
                    .split([' ', '{', '('])
                    .next()
                    .unwrap_or("failed")
                    .to_string(),
                iterations: f.trace.len().saturating_sub(1),
                residual: last.map_or(f64::NAN, |r| r.residual),
                eps_final: last.map_or(f64::NAN, |r| r.eps),
                lambda_bar: last.map_or_else(Vec::new, |r| r.lambda.clone()),
            };
            (f.trace, s, Some(f.error))
        }
    };
    write_output(out, &trace.to_csv())?;
    print!("{}", json::to_string(&summary));
    match failure {
        None => Ok(()),
        Some(e) => Err(CliError {
            code: kam_exit(&e),
            message: e.to_string(),
        }),
    }
}
