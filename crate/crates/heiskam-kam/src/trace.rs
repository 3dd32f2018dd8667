//! Per-iteration records and their CSV form.

use serde::Serialize;

/// First line of every trace file.
pub const TRACE_VERSION: &str = "# heiskam kam-trace v1";

/// One row of the trace. Quantities predicted by the previous step (`err_pred`,
/// `err_obs`, `k_pred`, ratios) are NaN in row 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepRecord {
    pub n: usize,
    pub eps: f64,
    pub delta_r: f64,
    /// Second-difference bound `K_n` of the fields in λ.
    pub k_bound: f64,
    pub lambda: Vec<f64>,
    /// `Err_n(t_{n−1}, r)` from the measured quantities of step `n − 1`.
    pub err_pred: f64,
    /// `‖F̃_n^{λ_{n−1}}‖₀`.
    pub err_obs: f64,
    /// Conjugacy residual of the accumulated `h` at `λ_n`.
    pub residual: f64,
    pub t: f64,
    pub admissibility: f64,
    pub avg_defect: f64,
    /// `‖H_{n−1}‖_r / (t^{2r₀} ‖F̃_{n−1}‖_r)`.
    pub h_ratio: f64,
    /// `δ_{r,n} / (t^{2r₀} δ_{r,n−1})`.
    pub delta_ratio: f64,
    pub dlambda: f64,
    pub dlambda_bound: f64,
    /// `K_n` predicted from step `n − 1`.
    pub k_pred: f64,
    pub aliasing: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct KamTrace {
    pub records: Vec<StepRecord>,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

impl KamTrace {
    pub fn push(&mut self, r: StepRecord) {
        self.records.push(r);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn eps(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.eps).collect()
    }

    /// Version line, header, and one row per record with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let d = self.records.first().map_or(9, |r| r.lambda.len());
        let mut head: Vec<String> = ["n", "eps", "delta_r", "K"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        head.extend((0..d).map(|j| format!("lambda{j}")));
        head.extend(
            [
                "err_pred",
                "err_obs",
                "residual",
                "t",
                "admissibility",
                "avg_defect",
                "h_ratio",
                "delta_ratio",
                "dlambda",
                "dlambda_bound",
                "k_pred",
                "aliasing",
            ]
            .iter()
            .map(|s| s.to_string()),
        );
        let mut out = format!("{TRACE_VERSION}\n{}\n", head.join(","));
        for r in &self.records {
            let mut row = vec![r.n.to_string(), num(r.eps), num(r.delta_r), num(r.k_bound)];
            row.extend(r.lambda.iter().map(|&x| num(x)));
            row.extend(
                [
                    r.err_pred,
                    r.err_obs,
                    r.residual,
                    r.t,
                    r.admissibility,
                    r.avg_defect,
                    r.h_ratio,
                    r.delta_ratio,
                    r.dlambda,
                    r.dlambda_bound,
                    r.k_pred,
                    r.aliasing,
                ]
                .iter()
                .map(|&x| num(x)),
            );
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}
