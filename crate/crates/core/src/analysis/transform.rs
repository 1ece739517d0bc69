//! The scaling family `f^u(t, x, v) = f(t, (u+1)x - ut, (u+1)v - u)`,
//! `B^u(t, x) = B(t, (u+1)x - ut) / (u+1)`, and centered-difference
//! residuals of the system.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field_solve::density_moment;
use crate::phase_space::{Axis, DensityField, Interpolation, PhaseGrid, TransportField};
use crate::solver::SolutionHistory;

/// Nodes spaced `step` covering `[lo, hi]` from `lo`.
fn sub_axis(lo: f64, hi: f64, step: f64, what: &str) -> Result<Axis> {
    let span = hi - lo;
    if !(span > 0.0) {
        return Err(Error::InvalidArgument(format!("transform leaves no valid {what} range")));
    }
    let n = (span / step + 1e-9).floor() as usize + 1;
    if n < 4 {
        return Err(Error::InvalidArgument(format!(
            "transform leaves only {n} valid {what} nodes"
        )));
    }
    let end = lo + (n - 1) as f64 * step;
    let end = if (hi - end).abs() < 1e-9 * step { hi } else { end };
    Axis::new(lo, end, n)
}

fn check_parameter(u: f64) -> Result<f64> {
    if !u.is_finite() || u == -1.0 {
        return Err(Error::InvalidArgument(format!("scaling parameter must be finite and != -1, got {u}")));
    }
    Ok(u + 1.0)
}

/// Largest x-range whose image `(u+1)x - s` stays in `axis` for every shift
/// `s` in `[s_lo, s_hi]`.
fn scaled_x_axis(axis: &Axis, u: f64, s_lo: f64, s_hi: f64) -> Result<Axis> {
    let a = u + 1.0;
    let (lo, hi) = if a > 0.0 {
        ((axis.min() + s_hi) / a, (axis.max() + s_lo) / a)
    } else {
        ((axis.max() + s_lo) / a, (axis.min() + s_hi) / a)
    };
    sub_axis(lo, hi, axis.step() / a.abs(), "x")
}

fn scaled_v_axis(axis: &Axis, u: f64) -> Result<Axis> {
    let a = u + 1.0;
    let (lo, hi) = if a > 0.0 {
        ((axis.min() + u) / a, (axis.max() + u) / a)
    } else {
        ((axis.max() + u) / a, (axis.min() + u) / a)
    };
    sub_axis(lo, hi, axis.step() / a.abs(), "v")
}

fn pull_density(src: &DensityField, grid: PhaseGrid, u: f64, interp: Interpolation) -> Result<DensityField> {
    let (a, t) = (u + 1.0, src.time());
    let values = (0..grid.len())
        .into_par_iter()
        .map(|n| {
            let (x, v) = grid.node(n);
            src.interpolate(a * x - u * t, a * v - u, interp)
        })
        .collect();
    DensityField::new(grid, values, t)
}

fn pull_field(src: &TransportField, axis: Axis, u: f64, interp: Interpolation) -> Result<TransportField> {
    let (a, t) = (u + 1.0, src.time());
    let b = axis
        .nodes()
        .map(|x| Ok(src.interpolate(a * x - u * t, interp)? / a))
        .collect::<Result<Vec<f64>>>()?;
    TransportField::new(axis, b, t)
}

/// Pulls a history back through the scaling map with parameter `u`.
///
/// The new grid is the largest sub-rectangle whose image stays inside the
/// source grid at every stored time, with spacings divided by `|u + 1|`.
/// Values come from interpolating the source, so `u = 0` reproduces every
/// lattice exactly.
pub fn scaling_transform(solution: &SolutionHistory, u: f64, interp: Interpolation) -> Result<SolutionHistory> {
    check_parameter(u)?;
    let g = solution.grid();
    let s = u * solution.end_time();
    let x_axis = scaled_x_axis(&g.x, u, s.min(0.0), s.max(0.0))?;
    let v_axis = scaled_v_axis(&g.v, u)?;
    let grid = PhaseGrid { x: x_axis, v: v_axis };
    let mut densities = Vec::with_capacity(solution.len());
    let mut fields = Vec::with_capacity(solution.len());
    for k in 0..solution.len() {
        densities.push(pull_density(solution.density(k), grid, u, interp)?);
        fields.push(pull_field(solution.field(k), x_axis, u, interp)?);
    }
    SolutionHistory::new(grid, solution.dt(), densities, fields)
}

/// The scaling map applied to a single density level at its own time.
pub fn scale_density(f: &DensityField, u: f64, interp: Interpolation) -> Result<DensityField> {
    check_parameter(u)?;
    let s = u * f.time();
    let grid = PhaseGrid {
        x: scaled_x_axis(&f.grid().x, u, s, s)?,
        v: scaled_v_axis(&f.grid().v, u)?,
    };
    pull_density(f, grid, u, interp)
}

/// The scaling map applied to a single field level at its own time.
pub fn scale_field(b: &TransportField, u: f64, interp: Interpolation) -> Result<TransportField> {
    check_parameter(u)?;
    let s = u * b.time();
    let axis = scaled_x_axis(b.axis(), u, s, s)?;
    pull_field(b, axis, u, interp)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PdeResidual {
    /// Sup of the Vlasov residual over interior nodes with `f > 1e-10`.
    pub density: f64,
    /// Sup of the field residual over interior nodes.
    pub field: f64,
}

/// Centered-difference residuals of both equations at every interior
/// level and node.
pub fn pde_residual(solution: &SolutionHistory) -> Result<PdeResidual> {
    pde_residual_with_source(solution, 1.0)
}

/// As [`pde_residual`] with the field source `∫ f dv` multiplied by
/// `source_sign`.
pub fn pde_residual_with_source(solution: &SolutionHistory, source_sign: f64) -> Result<PdeResidual> {
    let levels = solution.len();
    if levels < 3 {
        return Err(Error::InvalidArgument(format!(
            "residual needs at least 3 time levels, got {levels}"
        )));
    }
    let g = *solution.grid();
    let (nx, nv) = (g.nx(), g.nv());
    let (dx, dv, dt) = (g.dx(), g.dv(), solution.dt());
    let per_level: Vec<(f64, f64)> = (1..levels - 1)
        .into_par_iter()
        .map(|k| {
            let (fp, fc, fm) = (
                solution.density(k + 1).values(),
                solution.density(k).values(),
                solution.density(k - 1).values(),
            );
            let (bp, bc, bm) = (
                solution.field(k + 1).values(),
                solution.field(k).values(),
                solution.field(k - 1).values(),
            );
            let mut rf: f64 = 0.0;
            for i in 1..nx - 1 {
                for j in 1..nv - 1 {
                    let c = i * nv + j;
                    if fc[c] <= 1e-10 {
                        continue;
                    }
                    let r = (fp[c] - fm[c]) / (2.0 * dt)
                        + g.v.node(j) * (fc[c + nv] - fc[c - nv]) / (2.0 * dx)
                        + bc[i] * (fc[c + 1] - fc[c - 1]) / (2.0 * dv);
                    rf = rf.max(r.abs());
                }
            }
            let rho = density_moment(solution.density(k));
            let mut rb: f64 = 0.0;
            for i in 1..nx - 1 {
                let r = (bp[i] - bm[i]) / (2.0 * dt) + (bc[i + 1] - bc[i - 1]) / (2.0 * dx)
                    - source_sign * rho.values()[i];
                rb = rb.max(r.abs());
            }
            (rf, rb)
        })
        .collect();
    let (density, field) = per_level
        .into_iter()
        .fold((0.0, 0.0), |(a, b): (f64, f64), (x, y)| (a.max(x), b.max(y)));
    Ok(PdeResidual { density, field })
}
