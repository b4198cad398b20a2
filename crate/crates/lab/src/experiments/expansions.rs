//! Upper-tail expansions of `Φ⁻¹`, `h`, `ψ` and `1 - Φ(aΦ⁻¹(u))` next to exact values.

use w2lab_core::special::{
    h_tail_expansion, normal_sf, psi_expansion, quantile_tail_expansion_with, scaled_tail, QuantileConstant,
    TailExpansion,
};
use w2lab_core::UnitProb;

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::{Report, Table};

/// Tails `1 - u = 10^{-j}`; the expansions need `log(1/(1-u)) > e`.
pub const TAIL_EXPONENTS: std::ops::RangeInclusive<i32> = 2..=15;
pub const PSI_POINTS: [f64; 6] = [2.0, 4.0, 8.0, 16.0, 24.0, 32.0];
pub const SCALES: [f64; 2] = [0.5, 2.0];

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub quantity: String,
    pub tail: f64,
    pub value: f64,
    pub exact: f64,
    pub relative_error_order: f64,
}

impl Row {
    fn from_expansion(quantity: &str, e: TailExpansion) -> Self {
        Row {
            quantity: quantity.to_owned(),
            tail: e.tail,
            value: e.value,
            exact: e.exact,
            relative_error_order: e.relative_error_order,
        }
    }

    /// `value/exact`.
    pub fn ratio(&self) -> f64 {
        self.value / self.exact
    }

    pub fn log_inv_tail(&self) -> f64 {
        -self.tail.ln()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub rows: Vec<Row>,
}

impl Outcome {
    pub fn series(&self, quantity: &str) -> Vec<&Row> {
        self.rows.iter().filter(|r| r.quantity == quantity).collect()
    }

    pub fn report(&self) -> Report {
        let mut t = Table::new(
            "expansions",
            &["quantity", "tail", "log_inv_tail", "value", "exact", "ratio", "relative_error_order"],
        );
        for r in &self.rows {
            t.push(vec![
                r.quantity.clone().into(),
                r.tail.into(),
                r.log_inv_tail().into(),
                r.value.into(),
                r.exact.into(),
                r.ratio().into(),
                r.relative_error_order.into(),
            ]);
        }
        Report { tables: vec![t], ..Default::default() }
    }
}

pub fn run(_cfg: &ExperimentConfig) -> Result<Outcome> {
    let mut rows = Vec::new();
    let levels: Vec<UnitProb> =
        TAIL_EXPONENTS.map(|j| UnitProb::new(1.0 - 10f64.powi(-j))).collect::<std::result::Result<_, _>>()?;
    for (name, constant) in [("quantile_log4pi", QuantileConstant::LogFourPi), ("quantile_log2pi", QuantileConstant::LogTwoPi)] {
        for &u in &levels {
            rows.push(Row::from_expansion(name, quantile_tail_expansion_with(u, constant)?));
        }
    }
    for &u in &levels {
        rows.push(Row::from_expansion("h", h_tail_expansion(u)?));
    }
    for x in PSI_POINTS {
        let e = psi_expansion(x)?;
        rows.push(Row { tail: normal_sf(x), ..Row::from_expansion("psi", e) });
    }
    for a in SCALES {
        let name = format!("scaled_tail_a{a}");
        for &u in &levels {
            let s = scaled_tail(a, u)?;
            rows.push(Row {
                quantity: name.clone(),
                tail: u.tail(),
                value: s.asymptotic,
                exact: s.exact,
                relative_error_order: s.relative_error_order,
            });
        }
    }
    Ok(Outcome { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{ConfigLayer, ExperimentKind};

    fn outcome() -> Outcome {
        let layer = ConfigLayer { experiment: Some(ExperimentKind::Expansions), seed: Some(0), ..Default::default() };
        run(&ExperimentConfig::resolve(layer).unwrap()).unwrap()
    }

    #[test]
    fn ratios_approach_one_monotonically() {
        let out = outcome();
        for q in ["quantile_log4pi", "quantile_log2pi", "h", "psi"] {
            let gaps: Vec<f64> = out.series(q).iter().map(|r| (r.ratio() - 1.0).abs()).collect();
            assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{q}: {gaps:?}");
        }
    }

    #[test]
    fn four_pi_constant_is_the_closer_one() {
        let out = outcome();
        for (a, b) in out.series("quantile_log4pi").iter().zip(out.series("quantile_log2pi")) {
            assert!((a.ratio() - 1.0).abs() < (b.ratio() - 1.0).abs());
        }
    }
}
