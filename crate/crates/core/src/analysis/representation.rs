//! Finite-difference derivatives of the density against their
//! representations along characteristics:
//!
//! `∂v f(t) = ∂v f0(X(0), V(0)) - ∫_0^t ∂x f(s, X(s), V(s)) ds`
//! `∂x f(t) = ∂x f0(X(0), V(0)) - ∫_0^t (∂x B ∂v f)(s, X(s), V(s)) ds`

use rayon::prelude::*;
use serde::Serialize;

use super::{density_dv, density_dx, field_dx};
use crate::characteristics::{trace_path, CharState};
use crate::error::{Error, Result};
use crate::field_solve::level_count;
use crate::phase_space::{DensityField, Interpolation, TransportField};
use crate::solver::SolutionHistory;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivativeResidual {
    pub t: f64,
    /// `sup |∂v f - representation|` over checked nodes.
    pub dv_residual: f64,
    pub dx_residual: f64,
    pub nodes_checked: usize,
    /// Nodes whose characteristic leaves the stored x-range before time 0.
    /// The density vanishes along such curves.
    pub nodes_skipped: usize,
}

/// Evaluates both representations at every node at time `t` (a stored
/// level). Characteristics are traced through the stored field with
/// `substeps_per_level` Runge-Kutta steps per level; the time integrals use
/// the trapezoidal rule over the stored levels.
pub fn derivative_rep_check(
    solution: &SolutionHistory,
    t: f64,
    interp: Interpolation,
    substeps_per_level: usize,
) -> Result<DerivativeResidual> {
    if substeps_per_level == 0 {
        return Err(Error::InvalidArgument("substeps_per_level must be at least 1".into()));
    }
    let dt = solution.dt();
    let n = level_count(t, dt)?;
    if n >= solution.len() {
        return Err(Error::TimeOutOfRange {
            t,
            end: solution.end_time(),
        });
    }
    let dxf: Vec<DensityField> = solution.densities()[..=n].iter().map(density_dx).collect();
    let dvf: Vec<DensityField> = solution.densities()[..=n].iter().map(density_dv).collect();
    let dxb: Vec<TransportField> = solution.fields()[..=n].iter().map(field_dx).collect();
    let history = solution.field_history(interp)?;
    let grid = *solution.grid();
    let m = substeps_per_level;

    let per_node: Vec<Option<(f64, f64)>> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (x, v) = grid.node(k);
            if n == 0 {
                return Some((0.0, 0.0));
            }
            let path = trace_path(&history, CharState::new(x, v, t), 0.0, n * m).ok()?;
            // path[i * m] sits on level n - i
            let mut int_v = 0.0;
            let mut int_x = 0.0;
            for i in 0..=n {
                let p = path[i * m];
                let level = n - i;
                let w = if i == 0 || i == n { 0.5 } else { 1.0 };
                int_v += w * dxf[level].interpolate(p.x, p.v, Interpolation::Cubic);
                let bx = dxb[level].interpolate(p.x, Interpolation::Cubic).ok()?;
                int_x += w * bx * dvf[level].interpolate(p.x, p.v, Interpolation::Cubic);
            }
            let foot = path[n * m];
            let rep_v = dvf[0].interpolate(foot.x, foot.v, Interpolation::Cubic) - dt * int_v;
            let rep_x = dxf[0].interpolate(foot.x, foot.v, Interpolation::Cubic) - dt * int_x;
            Some(((dvf[n].values()[k] - rep_v).abs(), (dxf[n].values()[k] - rep_x).abs()))
        })
        .collect();

    let mut out = DerivativeResidual {
        t,
        dv_residual: 0.0,
        dx_residual: 0.0,
        nodes_checked: 0,
        nodes_skipped: 0,
    };
    for r in per_node {
        match r {
            Some((rv, rx)) => {
                out.dv_residual = out.dv_residual.max(rv);
                out.dx_residual = out.dx_residual.max(rx);
                out.nodes_checked += 1;
            }
            None => out.nodes_skipped += 1,
        }
    }
    Ok(out)
}
