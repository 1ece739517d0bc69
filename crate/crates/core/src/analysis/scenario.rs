//! Monitor for data with nonnegative field and velocity support above the
//! light speed `v = 1`: the field should stay nonnegative and the lower
//! edge of the velocity support should never move down.

use serde::Serialize;

use super::velocity_support_inf;
use crate::error::{Error, Result};
use crate::solver::SolutionHistory;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioReport {
    /// Smallest field value over all levels and nodes.
    pub min_field: f64,
    /// Lower edge of the velocity support per level.
    pub support_inf: Vec<Option<f64>>,
    /// Largest drop of `support_inf` below its running maximum.
    pub max_support_drop: f64,
    pub field_tolerance: f64,
    pub support_tolerance: f64,
    pub field_nonnegative: bool,
    pub support_nondecreasing: bool,
    pub pass: bool,
}

/// Checks the hypotheses on level 0, then monitors every level.
///
/// The support threshold is `1e-12 ||f(0)||`; the field may dip to
/// `-1e-8` and the support edge may drop by one `dv` plus `1e-9`.
pub fn scenario_monotone_check(solution: &SolutionHistory) -> Result<ScenarioReport> {
    let f0 = solution.density(0);
    let b0 = solution.field(0);
    let threshold = 1e-12 * f0.sup_norm();
    if f0.min() < 0.0 {
        return Err(Error::HypothesisViolation(format!(
            "initial density takes the negative value {}",
            f0.min()
        )));
    }
    if b0.min() < 0.0 {
        return Err(Error::HypothesisViolation(format!(
            "initial field takes the negative value {}",
            b0.min()
        )));
    }
    let inf0 = velocity_support_inf(f0, threshold);
    if let Some(lo) = inf0 {
        // the nodes below lo carry no mass, so the support starts above lo - dv
        if lo - solution.grid().dv() < 1.0 {
            return Err(Error::HypothesisViolation(format!(
                "initial velocity support reaches down to {lo}, not inside (1, inf)"
            )));
        }
    }

    let field_tolerance = 1e-8;
    let support_tolerance = solution.grid().dv() + 1e-9;
    let min_field = solution.fields().iter().map(|b| b.min()).fold(f64::INFINITY, f64::min);
    let support_inf: Vec<Option<f64>> = solution
        .densities()
        .iter()
        .map(|f| velocity_support_inf(f, threshold))
        .collect();
    let mut running = f64::NEG_INFINITY;
    let mut max_support_drop: f64 = 0.0;
    for lo in support_inf.iter().flatten() {
        running = running.max(*lo);
        max_support_drop = max_support_drop.max(running - lo);
    }
    let field_nonnegative = min_field >= -field_tolerance;
    let support_nondecreasing = max_support_drop <= support_tolerance;
    Ok(ScenarioReport {
        min_field,
        support_inf,
        max_support_drop,
        field_tolerance,
        support_tolerance,
        field_nonnegative,
        support_nondecreasing,
        pass: field_nonnegative && support_nondecreasing,
    })
}
