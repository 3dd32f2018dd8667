//! Real numbers given as decimals or symbolic tokens, and frequency-pair specs.

use heiskam_diophantine::{default_pair, make_pair, FrequencyPair, DEFAULT_GAMMA};
use serde::Deserialize;

use crate::{CliError, CliResult};

fn factor(tok: &str) -> Option<f64> {
    let t = tok.trim();
    if t == "pi" {
        return Some(std::f64::consts::PI);
    }
    if t == "e" {
        return Some(std::f64::consts::E);
    }
    if let Some(rest) = t.strip_prefix("sqrt") {
        let inner = rest
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .unwrap_or(rest);
        let v: f64 = inner.parse().ok()?;
        return (v >= 0.0).then(|| v.sqrt());
    }
    t.parse::<f64>().ok()
}

/// `[-]a*b/c` where each factor is a decimal, `pi`, `e`, `sqrtN` or `sqrt(N)`.
/// Symbolic factors are evaluated in full double precision.
pub fn parse_scalar(s: &str) -> CliResult<f64> {
    let t = s.trim();
    let (sign, body) = match t.strip_prefix('-') {
        Some(r) if !r.is_empty() && r.parse::<f64>().is_err() => (-1.0, r),
        _ => (1.0, t),
    };
    let bad = || CliError::input(format!("cannot read '{s}' as a number"));
    if body.is_empty() {
        return Err(bad());
    }
    let mut parts = body.split('/');
    let mut num = 1.0;
    for f in parts.next().ok_or_else(bad)?.split('*') {
        num *= factor(f).ok_or_else(bad)?;
    }
    for d in parts {
        let mut den = 1.0;
        for f in d.split('*') {
            den *= factor(f).ok_or_else(bad)?;
        }
        if den == 0.0 {
            return Err(bad());
        }
        num /= den;
    }
    if !num.is_finite() {
        return Err(bad());
    }
    Ok(sign * num)
}

/// Comma-separated list of scalars.
pub fn parse_list(s: &str) -> CliResult<Vec<f64>> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(parse_scalar)
        .collect()
}

/// A number in a JSON config: either numeric or a symbolic token.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Scalar {
    Num(f64),
    Token(String),
}

impl Scalar {
    pub fn value(&self) -> CliResult<f64> {
        match self {
            Scalar::Num(x) => Ok(*x),
            Scalar::Token(t) => parse_scalar(t),
        }
    }
}

/// Frequency pair as written in JSON; missing vectors select the default pair.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSpec {
    pub tau: Option<Vec<Scalar>>,
    pub eta: Option<Vec<Scalar>>,
    pub gamma: Option<Scalar>,
    pub bound: Option<usize>,
}

/// Certification box used when none is given.
pub const CLI_SEARCH_BOUND: usize = 50;

impl PairSpec {
    pub fn build(&self) -> CliResult<FrequencyPair> {
        let bound = self.bound.unwrap_or(CLI_SEARCH_BOUND);
        let gamma = self.gamma.as_ref().map(Scalar::value).transpose()?;
        match (&self.tau, &self.eta) {
            (None, None) if gamma.is_none() => Ok(default_pair(bound)),
            (Some(t), Some(e)) => {
                let t: Vec<f64> = t.iter().map(Scalar::value).collect::<CliResult<_>>()?;
                let e: Vec<f64> = e.iter().map(Scalar::value).collect::<CliResult<_>>()?;
                make_pair(&t, &e, gamma.unwrap_or(DEFAULT_GAMMA), bound)
                    .map_err(|e| CliError::input(e.to_string()))
            }
            _ => Err(CliError::input("pair needs both tau and eta".into())),
        }
    }
}

/// Read a pair spec file, or the default pair when `path` is `None`.
pub fn load_pair(path: Option<&std::path::Path>) -> CliResult<FrequencyPair> {
    match path {
        None => PairSpec::default().build(),
        Some(p) => {
            let s = crate::read_input(p)?;
            let spec: PairSpec = serde_json::from_str(&s)
                .map_err(|e| CliError::input(format!("{}: {e}", p.display())))?;
            spec.build()
        }
    }
}
