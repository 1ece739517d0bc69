//! Successive approximation: `f^n` is `f0` carried along characteristics of
//! `B^{n-1}`, and `B^n` is the light-line integral of the moments of `f^n`.

use rayon::prelude::*;
use serde::Serialize;

use super::{sup_distance, EngineOptions, SolutionHistory};
use crate::analysis::velocity_support;
use crate::characteristics::{trace, CharState, FieldHistory, ForceField};
use crate::error::{Error, Result};
use crate::field_solve::{density_moment, field_from_history, level_count, MomentProfile};
use crate::phase_space::{
    check_padding, DensityFamily, DensityField, InitialDataSpec, PhaseGrid, SupportBox, TransportField,
};

/// First field iterate `B^0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PicardStart {
    /// `B^0(t, x) = B0(x)`.
    #[default]
    Frozen,
    /// `B^0(t, x) = B0(x - t)`.
    Transported,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct PicardTrace {
    /// `sup |B^n - B^{n-1}|` over all levels, one entry per iteration.
    pub b_diffs: Vec<f64>,
    /// `sup |f^n - f^{n-1}|` over all levels.
    pub f_diffs: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// `P^n(t_k)` for every iterate `n` and level `k`.
    pub supports: Vec<Vec<f64>>,
    /// `||B^{n-1}(t_k)||` for the field each iterate was advected through.
    pub driving_field_sups: Vec<Vec<f64>>,
}

impl PicardTrace {
    /// `max(b_diffs[n], f_diffs[n])`.
    pub fn combined(&self) -> Vec<f64> {
        self.b_diffs.iter().zip(&self.f_diffs).map(|(b, f)| b.max(*f)).collect()
    }

    /// Successive ratios of the field differences.
    pub fn ratios(&self) -> Vec<f64> {
        self.b_diffs.windows(2).map(|w| w[1] / w[0]).collect()
    }
}

/// Whether a node's backward characteristic can land in `sup` when
/// `|B| <= b` along it. The bounds are those of the discrete Runge-Kutta
/// map, so skipped nodes are exactly the ones that would read zero.
#[inline]
pub(crate) fn may_reach(x: f64, v: f64, t: f64, b: f64, ds: f64, sup: &SupportBox) -> bool {
    let slack = 1e-9;
    let rv = t * b * (1.0 + 1e-12) + slack;
    let rx = (0.5 * t * t * b + t * ds.abs() * b) * (1.0 + 1e-12) + slack;
    let cx = x - v * t;
    cx + rx > sup.x[0] && cx - rx < sup.x[1] && v + rv > sup.v[0] && v - rv < sup.v[1]
}

/// `f(t, x, v) = f0(X(0), V(0))` at every node, tracing back through `field`
/// in `substeps` uniform steps and evaluating the analytic family.
pub fn advect_density(
    f0: &DensityFamily,
    field: &dyn ForceField,
    grid: &PhaseGrid,
    t: f64,
    substeps: usize,
) -> Result<DensityField> {
    if substeps == 0 {
        return Err(Error::InvalidArgument("substeps must be at least 1".into()));
    }
    let Some(sup) = f0.support() else {
        return Ok(DensityField::zeros(*grid, t));
    };
    if t == 0.0 {
        return Ok(DensityField::from_fn(*grid, 0.0, |x, v| f0.value(x, v)));
    }
    let bound = field.bound(t);
    let ds = t / substeps as f64;
    let values = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (x, v) = grid.node(k);
            if let Some(b) = bound {
                if !may_reach(x, v, t, b, ds, &sup) {
                    return Ok(0.0);
                }
            }
            let foot = trace(field, CharState::new(x, v, t), 0.0, substeps)?;
            Ok(f0.value(foot.x, foot.v))
        })
        .collect::<Result<Vec<f64>>>()?;
    DensityField::new(*grid, values, t)
}

/// One Picard iterate on `[0, t_final]`: the densities advected through
/// `prev`, then the fields they generate. Time levels follow `prev.dt()`.
pub fn picard_step(
    prev: &FieldHistory,
    data: &InitialDataSpec,
    grid: &PhaseGrid,
    t_final: f64,
    opts: &EngineOptions,
) -> Result<(Vec<DensityField>, Vec<TransportField>)> {
    opts.validate()?;
    let dt = prev.dt();
    let n = level_count(t_final, dt)?;
    if prev.levels().len() <= n {
        return Err(Error::TimeOutOfRange {
            t: t_final,
            end: prev.end_time(),
        });
    }
    let mut densities = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let t = k as f64 * dt;
        let f = advect_density(&data.density, prev, grid, t, k.max(1) * opts.substeps_per_level)?;
        if f.boundary_sup() > 0.0 {
            return Err(Error::SupportAtBoundary { t });
        }
        densities.push(f);
    }
    let moments: Vec<MomentProfile> = densities.iter().map(density_moment).collect();
    let fields = (0..=n)
        .map(|k| field_from_history(&data.field, &moments[..=k], dt, k as f64 * dt, opts.interpolation))
        .collect::<Result<Vec<_>>>()?;
    Ok((densities, fields))
}

/// [`solve_picard_from`] with the frozen initial iterate `B^0(t, x) = B0(x)`.
pub fn solve_picard(
    data: &InitialDataSpec,
    grid: &PhaseGrid,
    t_final: f64,
    dt: f64,
    tol: f64,
    max_iter: usize,
    opts: &EngineOptions,
) -> Result<(SolutionHistory, PicardTrace)> {
    solve_picard_from(PicardStart::Frozen, data, grid, t_final, dt, tol, max_iter, opts)
}

/// Iterates until both sup-norm differences over all stored levels drop
/// below `tol`, or `max_iter` iterates have been formed. The last iterate is
/// returned either way; `trace.converged` tells which.
#[allow(clippy::too_many_arguments)]
pub fn solve_picard_from(
    start: PicardStart,
    data: &InitialDataSpec,
    grid: &PhaseGrid,
    t_final: f64,
    dt: f64,
    tol: f64,
    max_iter: usize,
    opts: &EngineOptions,
) -> Result<(SolutionHistory, PicardTrace)> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    data.validate()?;
    check_padding(data, grid, t_final)?;
    let n = level_count(t_final, dt)?;
    let threshold = 1e-12 * data.density.sup_norm();

    let mut prev_f: Vec<DensityField> = (0..=n)
        .map(|k| DensityField::from_fn(*grid, k as f64 * dt, |x, v| data.density.value(x, v)))
        .collect();
    let mut prev_b: Vec<TransportField> = (0..=n)
        .map(|k| {
            let t = k as f64 * dt;
            match start {
                PicardStart::Frozen => TransportField::from_fn(grid.x, t, |x| data.field.value(x)),
                PicardStart::Transported => TransportField::from_fn(grid.x, t, |x| data.field.value(x - t)),
            }
        })
        .collect();

    let mut trace_out = PicardTrace::default();
    for _ in 0..max_iter {
        let history = FieldHistory::new(dt, prev_b, opts.interpolation)?;
        let (f, b) = picard_step(&history, data, grid, t_final, opts)?;
        let prev_b_levels = history.levels();
        let bd = sup_distance(b.iter().map(|l| l.values()), prev_b_levels.iter().map(|l| l.values()));
        let fd = sup_distance(f.iter().map(|l| l.values()), prev_f.iter().map(|l| l.values()));
        trace_out.b_diffs.push(bd);
        trace_out.f_diffs.push(fd);
        trace_out
            .supports
            .push(f.iter().map(|l| velocity_support(l, threshold)).collect());
        trace_out
            .driving_field_sups
            .push(prev_b_levels.iter().map(|l| l.sup_norm()).collect());
        trace_out.iterations += 1;
        prev_f = f;
        prev_b = b;
        if bd.max(fd) < tol {
            trace_out.converged = true;
            break;
        }
    }
    let history = SolutionHistory::new(*grid, dt, prev_f, prev_b)?;
    Ok((history, trace_out))
}
