//! Reference engine: one semi-Lagrangian density step per time level, with
//! a predictor-corrector on the field coupling.

use rayon::prelude::*;

use super::picard::may_reach;
use super::{EngineOptions, SolutionHistory};
use crate::characteristics::{trace, CharState, FieldHistory, ForceField};
use crate::error::{Error, Result};
use crate::field_solve::{advance_field, density_moment, level_count};
use crate::phase_space::{check_padding, sample_initial_data, DensityField, InitialDataSpec, PhaseGrid, SupportBox};

/// Nodes the exact flow can reach in one step of length `dt` from points in
/// `sup` when `|B| <= b`, padded by the Runge-Kutta defect exactly as in
/// [`may_reach`].
fn advance_reach(sup: &SupportBox, dt: f64, ds: f64, b: f64) -> SupportBox {
    let rv = dt * b * (1.0 + 1e-12) + 1e-9;
    let rx = (0.5 * dt * dt * b + dt * ds * b) * (1.0 + 1e-12) + 1e-9;
    SupportBox {
        x: [sup.x[0] + dt * (sup.v[0] - rv) - rx, sup.x[1] + dt * (sup.v[1] + rv) + rx],
        v: [sup.v[0] - rv, sup.v[1] + rv],
    }
}

/// Carries `f` (at `t_new - dt`) forward one step through `field`. Nodes
/// whose characteristics cannot start in `reach`, the region the exact
/// solution can occupy at the old time (`None` when empty), are set to zero; this keeps
/// interpolation ripple from spreading the support. Returns the new density
/// and the advanced reach.
fn advect_step(
    f: &DensityField,
    field: &FieldHistory,
    reach: Option<SupportBox>,
    t_new: f64,
    dt: f64,
    opts: &EngineOptions,
    flush_below: f64,
) -> Result<(DensityField, Option<SupportBox>)> {
    let grid = *f.grid();
    let t_old = t_new - dt;
    let substeps = opts.substeps_per_level;
    let ds = dt / substeps as f64;
    let Some(r) = reach else {
        return Ok((DensityField::zeros(grid, t_new), None));
    };
    let b = field.bound(t_new).unwrap_or(f64::INFINITY);
    let values = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (x, v) = grid.node(k);
            if !may_reach(x, v, dt, b, ds, &r) {
                return Ok(0.0);
            }
            let foot = trace(field, CharState::new(x, v, t_new), t_old, substeps)?;
            let val = f.interpolate(foot.x, foot.v, opts.interpolation);
            Ok(if val.abs() < flush_below { 0.0 } else { val })
        })
        .collect::<Result<Vec<f64>>>()?;
    let next_reach = Some(advance_reach(&r, dt, ds, b));
    Ok((DensityField::new(grid, values, t_new)?, next_reach))
}

/// Marches `(f, B)` from the initial data to `t_final` in steps of `dt`.
///
/// Each step predicts `B(t + dt)` from `ρ(t)` alone, advects `f` through
/// the field interpolated linearly between `B(t)` and the prediction, then
/// recomputes `B(t + dt)` with the trapezoid of `ρ(t)` and `ρ(t + dt)`.
pub fn solve_direct(
    data: &InitialDataSpec,
    grid: &PhaseGrid,
    t_final: f64,
    dt: f64,
    opts: &EngineOptions,
) -> Result<SolutionHistory> {
    opts.validate()?;
    check_padding(data, grid, t_final)?;
    let n = level_count(t_final, dt)?;
    let (f0, b0) = sample_initial_data(data, grid)?;
    let flush_below = opts.flush * data.density.sup_norm();
    let mode = opts.interpolation;

    let mut densities = Vec::with_capacity(n + 1);
    let mut fields = Vec::with_capacity(n + 1);
    let mut rho = density_moment(&f0);
    let mut reach = data.density.support();
    densities.push(f0);
    fields.push(b0);
    for k in 0..n {
        let t_new = (k + 1) as f64 * dt;
        let (f, b) = (&densities[k], &fields[k]);
        let predicted = advance_field(b, &rho, &rho, dt, &data.field, mode)?;
        let history = FieldHistory::with_origin(k as f64 * dt, dt, vec![b.clone(), predicted], mode)?;
        let (f_next, next_reach) = advect_step(f, &history, reach, t_new, dt, opts, flush_below)?;
        reach = next_reach;
        if f_next.boundary_sup() > 0.0 {
            return Err(Error::SupportAtBoundary { t: t_new });
        }
        let rho_next = density_moment(&f_next);
        let mut b_next = advance_field(b, &rho, &rho_next, dt, &data.field, mode)?;
        b_next.set_time(t_new);
        densities.push(f_next);
        fields.push(b_next);
        rho = rho_next;
    }
    SolutionHistory::new(*grid, dt, densities, fields)
}
