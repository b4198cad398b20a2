//! Singular integrals against `1/h²`: the centering integral, the `D₁,ₙ`
//! band and the second moment of the limit functional.

use serde_json::json;
use w2lab_core::integrals::{
    bickel_integral, d1n, dependence_deficit, limit_second_moment, truncated_second_moment, SingularIntegralResult,
};
use w2lab_core::special::EULER_GAMMA;
use w2lab_core::Error;

use super::{correlations, log_log};
use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::{Report, Table};

/// `log 2 + γ₀`, the constant left after removing `log log n`.
pub const CENTERING_LIMIT: f64 = std::f64::consts::LN_2 + EULER_GAMMA;

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub kind: String,
    pub n_or_rho: f64,
    pub value: f64,
    pub centered_or_ratio: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
}

impl Row {
    fn from_result(kind: &str, n_or_rho: f64, r: &SingularIntegralResult, centered_or_ratio: f64) -> Self {
        Row {
            kind: kind.to_owned(),
            n_or_rho,
            value: r.value,
            centered_or_ratio,
            error_estimate: r.abs_error_estimate,
            evaluations: r.evaluations,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub rows: Vec<Row>,
}

impl Outcome {
    pub fn series(&self, kind: &str) -> Vec<&Row> {
        self.rows.iter().filter(|r| r.kind == kind).collect()
    }

    pub fn report(&self) -> Report {
        let mut t = Table::new(
            "integrals",
            &["kind", "n_or_rho", "value", "centered_or_ratio", "error_estimate", "evaluations"],
        );
        for r in &self.rows {
            t.push(vec![
                r.kind.clone().into(),
                r.n_or_rho.into(),
                r.value.into(),
                r.centered_or_ratio.into(),
                r.error_estimate.into(),
                r.evaluations.into(),
            ]);
        }
        let mut report = Report { tables: vec![t], ..Default::default() };
        report.summary.insert("centering_limit".into(), json!(CENTERING_LIMIT));
        report
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut rows = Vec::new();
    let dp = cfg.decomposition;
    for &n in &cfg.n {
        let lln = log_log(n);
        let b = bickel_integral(n)?;
        rows.push(Row::from_result("bickel", n, &b, b.value - lln));
        let d = d1n(n, dp.c, dp.theta)?;
        rows.push(Row::from_result("d1n", n, &d, d.value / lln));
    }
    for rho in correlations(cfg)? {
        let r = rho.rho();
        match limit_second_moment(rho) {
            Ok(m) => rows.push(Row::from_result("limit_moment", r, &m, f64::NAN)),
            // The centered column carries the log-log tail density of the integrand.
            Err(Error::Divergent { tail_density }) => rows.push(Row {
                kind: "limit_moment".into(),
                n_or_rho: r,
                value: f64::INFINITY,
                centered_or_ratio: tail_density,
                error_estimate: f64::NAN,
                evaluations: 0,
            }),
            Err(e) => return Err(e.into()),
        }
        let deficit = dependence_deficit(rho)?;
        rows.push(Row::from_result("dependence_deficit", r, &deficit, f64::NAN));
        let kind = format!("truncated_moment(rho={r})");
        for &n in &cfg.n {
            let t = truncated_second_moment(rho, 1.0 / n)?;
            rows.push(Row::from_result(&kind, n, &t, t.value / log_log(n)));
        }
    }
    Ok(Outcome { rows })
}
