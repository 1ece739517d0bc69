//! Grids, grid fields, initial-data families and interpolation.

mod grid;
mod initial;
mod interp;

pub use grid::{Axis, DensityField, PhaseGrid, TransportField};
pub use initial::{
    check_padding, sample_initial_data, DensityFamily, DensityShape, FieldFamily, FieldShape,
    InitialDataSpec, PaddingReport, SupportBox,
};
pub use interp::Interpolation;

pub(crate) use interp::Stencil;

#[inline]
pub(crate) fn interp_combine(st: &Stencil, vals: [f64; 4], mode: Interpolation) -> f64 {
    interp::combine(&st.w, vals, mode)
}
