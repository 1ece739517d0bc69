//! Named analytic families for the initial density and field.

use serde::{Deserialize, Serialize};

use super::grid::{DensityField, PhaseGrid, TransportField};
use crate::error::{Error, Result};

/// `max(0, 1 - r^2)^p` and its slope.
fn bump_profile(r: f64, p: i32) -> (f64, f64) {
    let q = 1.0 - r * r;
    if q <= 0.0 {
        return (0.0, 0.0);
    }
    (q.powi(p), -2.0 * p as f64 * r * q.powi(p - 1))
}

/// Peak of `|d/dr (1 - r^2)^p|`, reached at `r^2 = 1 / (2p - 1)`.
fn bump_slope_peak(p: i32) -> f64 {
    let r = (1.0 / (2 * p - 1) as f64).sqrt();
    bump_profile(r, p).1.abs()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityShape {
    Zero,
    /// `(1 - r^2)^2` per axis: continuously differentiable.
    Bump,
    /// `(1 - r^2)^4` per axis: three continuous derivatives, used where
    /// convergence rates of second-order diagnostics are measured.
    SmoothBump,
}

impl DensityShape {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "zero" => Some(DensityShape::Zero),
            "bump" => Some(DensityShape::Bump),
            "smooth_bump" => Some(DensityShape::SmoothBump),
            _ => None,
        }
    }

    fn power(self) -> i32 {
        match self {
            DensityShape::Zero => 0,
            DensityShape::Bump => 2,
            DensityShape::SmoothBump => 4,
        }
    }
}

/// Rectangle outside of which a family vanishes identically.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportBox {
    pub x: [f64; 2],
    pub v: [f64; 2],
}

/// Separable compactly supported bump
/// `A * phi((x - x0) / w) * phi((v - v0) / w)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DensityFamily {
    pub shape: DensityShape,
    pub amplitude: f64,
    pub center_x: f64,
    pub center_v: f64,
    pub width: f64,
}

impl DensityFamily {
    pub fn zero() -> Self {
        DensityFamily {
            shape: DensityShape::Zero,
            amplitude: 0.0,
            center_x: 0.0,
            center_v: 0.0,
            width: 1.0,
        }
    }

    pub fn bump(amplitude: f64, center_x: f64, center_v: f64, width: f64) -> Self {
        DensityFamily {
            shape: DensityShape::Bump,
            amplitude,
            center_x,
            center_v,
            width,
        }
    }

    pub fn smooth_bump(amplitude: f64, center_x: f64, center_v: f64, width: f64) -> Self {
        DensityFamily {
            shape: DensityShape::SmoothBump,
            ..Self::bump(amplitude, center_x, center_v, width)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.amplitude, self.center_x, self.center_v, self.width]
            .iter()
            .all(|p| p.is_finite());
        if !finite {
            return Err(Error::InitialData("non-finite density parameter".into()));
        }
        if self.shape != DensityShape::Zero && self.width <= 0.0 {
            return Err(Error::InitialData(format!(
                "density width must be positive, got {}",
                self.width
            )));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.shape == DensityShape::Zero || self.amplitude == 0.0
    }

    #[inline]
    fn factors(&self, x: f64, v: f64) -> ((f64, f64), (f64, f64)) {
        let p = self.shape.power();
        (
            bump_profile((x - self.center_x) / self.width, p),
            bump_profile((v - self.center_v) / self.width, p),
        )
    }

    #[inline]
    pub fn value(&self, x: f64, v: f64) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let ((px, _), (pv, _)) = self.factors(x, v);
        self.amplitude * px * pv
    }

    pub fn dx(&self, x: f64, v: f64) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let ((_, dx), (pv, _)) = self.factors(x, v);
        self.amplitude * dx * pv / self.width
    }

    pub fn dv(&self, x: f64, v: f64) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let ((px, _), (_, dv)) = self.factors(x, v);
        self.amplitude * px * dv / self.width
    }

    pub fn sup_norm(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            self.amplitude.abs()
        }
    }

    /// `||d_x f0|| + ||d_v f0||` in closed form.
    pub fn derivative_sup_sum(&self) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        2.0 * self.amplitude.abs() * bump_slope_peak(self.shape.power()) / self.width
    }

    pub fn support(&self) -> Option<SupportBox> {
        if self.is_zero() {
            return None;
        }
        Some(SupportBox {
            x: [self.center_x - self.width, self.center_x + self.width],
            v: [self.center_v - self.width, self.center_v + self.width],
        })
    }

    /// `sup { |v| : f0 != 0 }`.
    pub fn velocity_extent(&self) -> f64 {
        self.support()
            .map(|s| s.v[0].abs().max(s.v[1].abs()))
            .unwrap_or(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldShape {
    Zero,
    Constant,
    Bump,
    SmoothBump,
    Gaussian,
    Sine,
}

impl FieldShape {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "zero" => Some(FieldShape::Zero),
            "constant" => Some(FieldShape::Constant),
            "bump" => Some(FieldShape::Bump),
            "smooth_bump" => Some(FieldShape::SmoothBump),
            "gaussian" => Some(FieldShape::Gaussian),
            "sine" => Some(FieldShape::Sine),
            _ => None,
        }
    }
}

/// Initial field `B0`, centred at the origin and defined on the whole line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldFamily {
    pub shape: FieldShape,
    pub amplitude: f64,
    pub width: f64,
}

impl FieldFamily {
    pub fn zero() -> Self {
        FieldFamily {
            shape: FieldShape::Zero,
            amplitude: 0.0,
            width: 1.0,
        }
    }

    pub fn constant(amplitude: f64) -> Self {
        FieldFamily {
            shape: FieldShape::Constant,
            amplitude,
            width: 1.0,
        }
    }

    pub fn new(shape: FieldShape, amplitude: f64, width: f64) -> Self {
        FieldFamily {
            shape,
            amplitude,
            width,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.amplitude.is_finite() && self.width.is_finite()) {
            return Err(Error::InitialData("non-finite field parameter".into()));
        }
        if self.width <= 0.0 {
            return Err(Error::InitialData(format!(
                "field width must be positive, got {}",
                self.width
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn value(&self, x: f64) -> f64 {
        let a = self.amplitude;
        let r = x / self.width;
        match self.shape {
            FieldShape::Zero => 0.0,
            FieldShape::Constant => a,
            FieldShape::Bump => a * bump_profile(r, 2).0,
            FieldShape::SmoothBump => a * bump_profile(r, 4).0,
            FieldShape::Gaussian => a * (-r * r).exp(),
            FieldShape::Sine => a * r.sin(),
        }
    }

    #[inline]
    pub fn derivative(&self, x: f64) -> f64 {
        let a = self.amplitude / self.width;
        let r = x / self.width;
        match self.shape {
            FieldShape::Zero | FieldShape::Constant => 0.0,
            FieldShape::Bump => a * bump_profile(r, 2).1,
            FieldShape::SmoothBump => a * bump_profile(r, 4).1,
            FieldShape::Gaussian => -2.0 * a * r * (-r * r).exp(),
            FieldShape::Sine => a * r.cos(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        match self.shape {
            FieldShape::Zero => 0.0,
            _ => self.amplitude.abs(),
        }
    }

    pub fn derivative_sup_norm(&self) -> f64 {
        let a = self.amplitude.abs() / self.width;
        match self.shape {
            FieldShape::Zero | FieldShape::Constant => 0.0,
            FieldShape::Bump => a * bump_slope_peak(2),
            FieldShape::SmoothBump => a * bump_slope_peak(4),
            FieldShape::Gaussian => a * (2.0f64).sqrt() * (-0.5f64).exp(),
            FieldShape::Sine => a,
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        match self.shape {
            FieldShape::Zero => true,
            FieldShape::Sine => self.amplitude == 0.0,
            _ => self.amplitude >= 0.0,
        }
    }

    pub fn is_nonpositive(&self) -> bool {
        match self.shape {
            FieldShape::Zero => true,
            FieldShape::Sine => self.amplitude == 0.0,
            _ => self.amplitude <= 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialDataSpec {
    pub density: DensityFamily,
    pub field: FieldFamily,
}

impl InitialDataSpec {
    pub fn zero() -> Self {
        InitialDataSpec {
            density: DensityFamily::zero(),
            field: FieldFamily::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.density.validate()?;
        self.field.validate()
    }
}

/// Samples `f0` and `B0` at the grid nodes (time 0).
///
/// The density support must stay clear of the two outermost node rows and
/// columns, so the sampled lattice vanishes there.
pub fn sample_initial_data(
    spec: &InitialDataSpec,
    grid: &PhaseGrid,
) -> Result<(DensityField, TransportField)> {
    spec.validate()?;
    if let Some(sup) = spec.density.support() {
        let (xa, xb) = (grid.x.node(1), grid.x.node(grid.nx() - 2));
        let (va, vb) = (grid.v.node(1), grid.v.node(grid.nv() - 2));
        if sup.x[0] < xa || sup.x[1] > xb || sup.v[0] < va || sup.v[1] > vb {
            return Err(Error::InitialData(format!(
                "density support [{}, {}] x [{}, {}] touches the grid boundary",
                sup.x[0], sup.x[1], sup.v[0], sup.v[1]
            )));
        }
    }
    let f = DensityField::from_fn(*grid, 0.0, |x, v| spec.density.value(x, v));
    let b = TransportField::from_fn(grid.x, 0.0, |x| spec.field.value(x));
    Ok((f, b))
}

/// Outcome of the pre-run domain truncation check.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct PaddingReport {
    /// A-priori bound on `||B||` over `[0, T]`; `None` when the scalar
    /// estimate has no finite fixed point on this horizon.
    pub field_bound: Option<f64>,
    /// Rectangle the density may occupy up to `T` under that bound.
    pub reach: Option<SupportBox>,
}

/// Checks that the grid rectangle contains every point a density
/// characteristic can reach on `[0, t_final]`.
///
/// The field bound solves `B = ||B0|| + 2 ||f0|| (P0 T + T^2 B / 2)`, the
/// velocity-support recursion with a constant field majorant. When that has
/// no positive solution the check is skipped and the engines detect
/// boundary contact at run time instead.
pub fn check_padding(spec: &InitialDataSpec, grid: &PhaseGrid, t_final: f64) -> Result<PaddingReport> {
    let Some(sup) = spec.density.support() else {
        return Ok(PaddingReport {
            field_bound: Some(spec.field.sup_norm()),
            reach: None,
        });
    };
    let f_sup = spec.density.sup_norm();
    let p0 = spec.density.velocity_extent();
    let denom = 1.0 - f_sup * t_final * t_final;
    if denom <= 0.0 {
        return Ok(PaddingReport {
            field_bound: None,
            reach: None,
        });
    }
    let b = (spec.field.sup_norm() + 2.0 * f_sup * p0 * t_final) / denom;
    let dv = t_final * b;
    let dx = t_final * (p0 + t_final * b);
    let reach = SupportBox {
        x: [sup.x[0] - dx, sup.x[1] + dx],
        v: [sup.v[0] - dv, sup.v[1] + dv],
    };
    let inside = reach.x[0] >= grid.x.node(1)
        && reach.x[1] <= grid.x.node(grid.nx() - 2)
        && reach.v[0] >= grid.v.node(1)
        && reach.v[1] <= grid.v.node(grid.nv() - 2);
    if !inside {
        return Err(Error::InvalidGrid(format!(
            "domain [{}, {}] x [{}, {}] too small: density may reach [{:.4}, {:.4}] x [{:.4}, {:.4}] by t = {t_final}",
            grid.x.min(),
            grid.x.max(),
            grid.v.min(),
            grid.v.max(),
            reach.x[0],
            reach.x[1],
            reach.v[0],
            reach.v[1]
        )));
    }
    Ok(PaddingReport {
        field_bound: Some(b),
        reach: Some(reach),
    })
}
