//! Solution engines: Picard successive approximation, a direct coupled
//! time-stepper used as reference, and the scalar majorant equation that
//! bounds the Picard existence horizon.

mod direct;
mod majorant;
mod picard;

pub use direct::solve_direct;
pub use majorant::{majorant_existence_time, majorant_existence_time_with_horizon, MajorantResult};
pub use picard::{advect_density, picard_step, solve_picard, solve_picard_from, PicardStart, PicardTrace};

use serde::{Deserialize, Serialize};

use crate::characteristics::FieldHistory;
use crate::error::{Error, Result};
use crate::phase_space::{DensityField, Interpolation, PhaseGrid, TransportField};

/// Knobs shared by both engines.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EngineOptions {
    pub interpolation: Interpolation,
    /// Runge-Kutta steps per stored time level when tracing characteristics.
    pub substeps_per_level: usize,
    /// Direct engine: density values below `flush * ||f0||` are set to zero
    /// after each step, so interpolation ripple does not spread the support.
    pub flush: f64,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            interpolation: Interpolation::Cubic,
            substeps_per_level: 1,
            flush: 1e-12,
        }
    }
}

impl EngineOptions {
    pub fn with_interpolation(mut self, interpolation: Interpolation) -> Self {
        self.interpolation = interpolation;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if self.substeps_per_level == 0 {
            return Err(Error::InvalidArgument("substeps_per_level must be at least 1".into()));
        }
        if !(self.flush >= 0.0) {
            return Err(Error::InvalidArgument(format!("flush must be >= 0, got {}", self.flush)));
        }
        Ok(())
    }
}

/// `(f, B)` at times `0, dt, ..., T` on one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SolutionHistory {
    grid: PhaseGrid,
    dt: f64,
    densities: Vec<DensityField>,
    fields: Vec<TransportField>,
}

impl SolutionHistory {
    pub fn new(
        grid: PhaseGrid,
        dt: f64,
        densities: Vec<DensityField>,
        fields: Vec<TransportField>,
    ) -> Result<SolutionHistory> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
        }
        if densities.is_empty() || densities.len() != fields.len() {
            return Err(Error::InvalidArgument(format!(
                "history needs matching non-empty level lists, got {} densities and {} fields",
                densities.len(),
                fields.len()
            )));
        }
        for (k, (f, b)) in densities.iter().zip(&fields).enumerate() {
            if *f.grid() != grid || *b.axis() != grid.x {
                return Err(Error::InvalidArgument(format!("level {k} is on a different grid")));
            }
            let t = k as f64 * dt;
            let tol = 1e-9 * t.max(1.0);
            if (f.time() - t).abs() > tol || (b.time() - t).abs() > tol {
                return Err(Error::InvalidArgument(format!(
                    "level {k} has times ({}, {}), expected {t}",
                    f.time(),
                    b.time()
                )));
            }
        }
        Ok(SolutionHistory {
            grid,
            dt,
            densities,
            fields,
        })
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Number of stored levels, `T / dt + 1`.
    pub fn len(&self) -> usize {
        self.densities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.densities.is_empty()
    }

    pub fn end_time(&self) -> f64 {
        (self.len() - 1) as f64 * self.dt
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    pub fn densities(&self) -> &[DensityField] {
        &self.densities
    }

    pub fn fields(&self) -> &[TransportField] {
        &self.fields
    }

    pub fn density(&self, k: usize) -> &DensityField {
        &self.densities[k]
    }

    pub fn field(&self, k: usize) -> &TransportField {
        &self.fields[k]
    }

    pub fn into_parts(self) -> (Vec<DensityField>, Vec<TransportField>) {
        (self.densities, self.fields)
    }

    /// The stored fields as a force field for characteristic tracing.
    pub fn field_history(&self, interp: Interpolation) -> Result<FieldHistory> {
        FieldHistory::new(self.dt, self.fields.clone(), interp)
    }

    /// `sup |B - B'|` over all levels and nodes.
    pub fn field_distance(&self, other: &SolutionHistory) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(sup_distance(
            self.fields.iter().map(|b| b.values()),
            other.fields.iter().map(|b| b.values()),
        ))
    }

    /// `sup |f - f'|` over all levels and nodes.
    pub fn density_distance(&self, other: &SolutionHistory) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(sup_distance(
            self.densities.iter().map(|f| f.values()),
            other.densities.iter().map(|f| f.values()),
        ))
    }

    fn check_compatible(&self, other: &SolutionHistory) -> Result<()> {
        if self.grid != other.grid || self.len() != other.len() || self.dt != other.dt {
            return Err(Error::InvalidArgument("histories differ in grid or time levels".into()));
        }
        Ok(())
    }
}

pub(crate) fn sup_distance<'a>(
    a: impl Iterator<Item = &'a [f64]>,
    b: impl Iterator<Item = &'a [f64]>,
) -> f64 {
    a.zip(b).fold(0.0, |m, (x, y)| {
        x.iter().zip(y).fold(m, |m, (p, q)| m.max((p - q).abs()))
    })
}
