//! Diagnostics over solution histories: norms and supports per level,
//! derivative representations, the scaling transform, discrete PDE
//! residuals, the global-existence monitors, the continuation indicator,
//! Hölder quotients of the field and the a-priori bound checks.

mod bounds;
mod diagnostics;
mod holder;
mod representation;
mod scenario;
mod transform;

pub use bounds::{
    db_bound_check, field_bound_check, iterate_envelope_check, support_recursion_check, BoundCheck,
    BoundConstants,
};
pub use diagnostics::{
    continuation_indicator, continuation_report, velocity_support, velocity_support_inf, ContinuationReport,
    DiagnosticsRecord, DiagnosticsTrace,
};
pub use holder::{dyadic_offsets, holder_quotient, HolderReport, HolderRow};
pub use representation::{derivative_rep_check, DerivativeResidual};
pub use scenario::{scenario_monotone_check, ScenarioReport};
pub use transform::{
    pde_residual, pde_residual_with_source, scale_density, scale_field, scaling_transform, PdeResidual,
};

use crate::phase_space::{DensityField, TransportField};

/// Second-order difference of `n` samples with spacing `h` at index `i`,
/// one-sided at both ends.
#[inline]
fn fd(h: f64, n: usize, i: usize, at: impl Fn(usize) -> f64) -> f64 {
    if i == 0 {
        (-3.0 * at(0) + 4.0 * at(1) - at(2)) / (2.0 * h)
    } else if i == n - 1 {
        (3.0 * at(n - 1) - 4.0 * at(n - 2) + at(n - 3)) / (2.0 * h)
    } else {
        (at(i + 1) - at(i - 1)) / (2.0 * h)
    }
}

/// Finite-difference `∂x f` on the same grid.
pub fn density_dx(f: &DensityField) -> DensityField {
    let g = *f.grid();
    let (nx, nv, h) = (g.nx(), g.nv(), g.dx());
    let vals = f.values();
    let out = (0..g.len())
        .map(|k| {
            let (i, j) = (k / nv, k % nv);
            fd(h, nx, i, |a| vals[a * nv + j])
        })
        .collect();
    DensityField::new(g, out, f.time()).expect("same grid")
}

/// Finite-difference `∂v f` on the same grid.
pub fn density_dv(f: &DensityField) -> DensityField {
    let g = *f.grid();
    let (nv, h) = (g.nv(), g.dv());
    let vals = f.values();
    let out = (0..g.len())
        .map(|k| {
            let (i, j) = (k / nv, k % nv);
            fd(h, nv, j, |b| vals[i * nv + b])
        })
        .collect();
    DensityField::new(g, out, f.time()).expect("same grid")
}

/// Finite-difference `∂x B` on the same axis.
pub fn field_dx(b: &TransportField) -> TransportField {
    let axis = *b.axis();
    let vals = b.values();
    let out = (0..axis.len()).map(|i| fd(axis.step(), axis.len(), i, |a| vals[a])).collect();
    TransportField::new(axis, out, b.time()).expect("same axis")
}
