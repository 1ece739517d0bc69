//! Characteristic curves of the Vlasov equation,
//! `dX/ds = V`, `dV/ds = B(s, X)`, `X(t) = x`, `V(t) = v`,
//! integrated with the classical four-stage Runge-Kutta scheme.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::phase_space::{Axis, Interpolation, PhaseGrid, TransportField};

/// A force field `B(s, x)` that characteristics can be traced through.
pub trait ForceField: Sync {
    fn eval(&self, s: f64, x: f64) -> Result<f64>;

    /// Upper bound on `|B(s, x)|` for `s` in `[0, t]` and every `x` the field
    /// can be evaluated at, if one is known. Used to skip nodes whose
    /// characteristics provably stay away from the density support.
    fn bound(&self, _t: f64) -> Option<f64> {
        None
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstantField(pub f64);

impl ForceField for ConstantField {
    fn eval(&self, _s: f64, _x: f64) -> Result<f64> {
        Ok(self.0)
    }

    fn bound(&self, _t: f64) -> Option<f64> {
        Some(self.0.abs())
    }
}

/// Closed-form field, defined everywhere.
pub struct AnalyticField<F>(pub F);

impl<F> ForceField for AnalyticField<F>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    fn eval(&self, s: f64, x: f64) -> Result<f64> {
        Ok((self.0)(s, x))
    }
}

/// Field lattices at times `t0, t0 + dt, t0 + 2 dt, ...`, evaluated
/// linearly in time and by interpolation in space.
#[derive(Clone, Debug)]
pub struct FieldHistory {
    t0: f64,
    dt: f64,
    levels: Vec<TransportField>,
    interp: Interpolation,
    sup: Vec<f64>,
}

impl FieldHistory {
    pub fn new(dt: f64, levels: Vec<TransportField>, interp: Interpolation) -> Result<FieldHistory> {
        Self::with_origin(0.0, dt, levels, interp)
    }

    /// History whose first level sits at time `t0`.
    pub fn with_origin(
        t0: f64,
        dt: f64,
        levels: Vec<TransportField>,
        interp: Interpolation,
    ) -> Result<FieldHistory> {
        if !(dt > 0.0) {
            return Err(Error::InvalidArgument(format!("history step must be positive, got {dt}")));
        }
        let Some(first) = levels.first() else {
            return Err(Error::InvalidArgument("empty field history".into()));
        };
        let axis = *first.axis();
        if levels.iter().any(|l| *l.axis() != axis) {
            return Err(Error::InvalidArgument("field levels on different axes".into()));
        }
        // running maximum of level sup norms
        let mut sup = Vec::with_capacity(levels.len());
        let mut m: f64 = 0.0;
        for l in &levels {
            m = m.max(l.sup_norm());
            sup.push(m);
        }
        Ok(FieldHistory {
            t0,
            dt,
            levels,
            interp,
            sup,
        })
    }

    /// The same lattice repeated at `n_levels` times.
    pub fn frozen(field: &TransportField, dt: f64, n_levels: usize, interp: Interpolation) -> Result<FieldHistory> {
        let levels = (0..n_levels)
            .map(|k| {
                let mut l = field.clone();
                l.set_time(k as f64 * dt);
                l
            })
            .collect();
        FieldHistory::new(dt, levels, interp)
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn levels(&self) -> &[TransportField] {
        &self.levels
    }

    pub fn axis(&self) -> &Axis {
        self.levels[0].axis()
    }

    pub fn interpolation(&self) -> Interpolation {
        self.interp
    }

    pub fn start_time(&self) -> f64 {
        self.t0
    }

    pub fn end_time(&self) -> f64 {
        self.t0 + (self.levels.len() - 1) as f64 * self.dt
    }
}

impl ForceField for FieldHistory {
    #[inline]
    fn eval(&self, s: f64, x: f64) -> Result<f64> {
        let n = self.levels.len();
        let tau = (s - self.t0) / self.dt;
        let last = (n - 1) as f64;
        if !(tau >= -1e-9 && tau <= last + 1e-9) {
            return Err(Error::TimeOutOfRange {
                t: s,
                end: self.end_time(),
            });
        }
        let axis = self.axis();
        if !axis.contains(x) {
            return Err(Error::OutOfRange {
                x,
                min: axis.min(),
                max: axis.max(),
            });
        }
        let st = axis.stencil(x);
        let tau = tau.clamp(0.0, last);
        let mut l = tau.floor() as usize;
        if l + 1 >= n {
            l = n.saturating_sub(2);
        }
        let theta = tau - l as f64;
        if n == 1 || theta <= 1e-12 {
            return Ok(self.levels[l].eval_stencil(&st, self.interp));
        }
        if theta >= 1.0 - 1e-12 {
            return Ok(self.levels[l + 1].eval_stencil(&st, self.interp));
        }
        let a = self.levels[l].eval_stencil(&st, self.interp);
        let b = self.levels[l + 1].eval_stencil(&st, self.interp);
        Ok((1.0 - theta) * a + theta * b)
    }

    fn bound(&self, t: f64) -> Option<f64> {
        let k = (((t - self.t0).max(0.0) / self.dt).ceil() as usize + 1).min(self.levels.len() - 1);
        // sup of the summed |weights| of the four-point stencil is 1.6311
        let lebesgue = match self.interp {
            Interpolation::Cubic => 1.64,
            Interpolation::MonotoneCubic => 1.0,
        };
        Some(lebesgue * self.sup[k])
    }
}

/// Point `(X, V)` on a characteristic at time `s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CharState {
    pub x: f64,
    pub v: f64,
    pub s: f64,
}

impl CharState {
    pub fn new(x: f64, v: f64, s: f64) -> Self {
        CharState { x, v, s }
    }
}

/// One classical Runge-Kutta step of size `ds` (negative steps go backward).
#[inline]
pub fn step_characteristic(state: CharState, field: &dyn ForceField, ds: f64) -> Result<CharState> {
    let CharState { x, v, s } = state;
    let h = 0.5 * ds;
    let k1x = v;
    let k1v = field.eval(s, x)?;
    let k2x = v + h * k1v;
    let k2v = field.eval(s + h, x + h * k1x)?;
    let k3x = v + h * k2v;
    let k3v = field.eval(s + h, x + h * k2x)?;
    let k4x = v + ds * k3v;
    let k4v = field.eval(s + ds, x + ds * k3x)?;
    Ok(CharState {
        x: x + ds / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x),
        v: v + ds / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
        s: s + ds,
    })
}

/// Integrates from `state.s` to `s_end` in `substeps` uniform steps.
pub fn trace(field: &dyn ForceField, state: CharState, s_end: f64, substeps: usize) -> Result<CharState> {
    if substeps == 0 {
        return Err(Error::InvalidArgument("substeps must be at least 1".into()));
    }
    let ds = (s_end - state.s) / substeps as f64;
    let s0 = state.s;
    let mut st = state;
    for k in 0..substeps {
        st = step_characteristic(st, field, ds)?;
        st.s = if k + 1 == substeps {
            s_end
        } else {
            s0 + (k + 1) as f64 * ds
        };
    }
    Ok(st)
}

/// Like [`trace`] but keeps every intermediate state, starting point first.
pub fn trace_path(
    field: &dyn ForceField,
    state: CharState,
    s_end: f64,
    substeps: usize,
) -> Result<Vec<CharState>> {
    if substeps == 0 {
        return Err(Error::InvalidArgument("substeps must be at least 1".into()));
    }
    let ds = (s_end - state.s) / substeps as f64;
    let s0 = state.s;
    let mut path = Vec::with_capacity(substeps + 1);
    path.push(state);
    let mut st = state;
    for k in 0..substeps {
        st = step_characteristic(st, field, ds)?;
        st.s = if k + 1 == substeps {
            s_end
        } else {
            s0 + (k + 1) as f64 * ds
        };
        path.push(st);
    }
    Ok(path)
}

/// Foot points `(X(0, t, x, v), V(0, t, x, v))` for every node of a grid.
#[derive(Clone, Debug)]
pub struct CharacteristicBundle {
    pub grid: PhaseGrid,
    pub t: f64,
    pub foot_x: Vec<f64>,
    pub foot_v: Vec<f64>,
}

impl CharacteristicBundle {
    /// Centered-difference Jacobian determinant of the foot map at an
    /// interior node.
    pub fn jacobian_determinant(&self, i: usize, j: usize) -> Option<f64> {
        let (nx, nv) = (self.grid.nx(), self.grid.nv());
        if i == 0 || j == 0 || i + 1 >= nx || j + 1 >= nv {
            return None;
        }
        let g = &self.grid;
        let (dx, dv) = (2.0 * g.dx(), 2.0 * g.dv());
        let (e, w) = (g.index(i + 1, j), g.index(i - 1, j));
        let (n, s) = (g.index(i, j + 1), g.index(i, j - 1));
        let xx = (self.foot_x[e] - self.foot_x[w]) / dx;
        let xv = (self.foot_x[n] - self.foot_x[s]) / dv;
        let vx = (self.foot_v[e] - self.foot_v[w]) / dx;
        let vv = (self.foot_v[n] - self.foot_v[s]) / dv;
        Some(xx * vv - xv * vx)
    }
}

/// Traces every grid node from time `t` back to 0 in `substeps` steps.
pub fn trace_backward(
    grid: &PhaseGrid,
    field: &dyn ForceField,
    t: f64,
    substeps: usize,
) -> Result<CharacteristicBundle> {
    let feet: Vec<(f64, f64)> = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let (x, v) = grid.node(k);
            let st = trace(field, CharState::new(x, v, t), 0.0, substeps)?;
            Ok((st.x, st.v))
        })
        .collect::<Result<_>>()?;
    let (foot_x, foot_v) = feet.into_iter().unzip();
    Ok(CharacteristicBundle {
        grid: *grid,
        t,
        foot_x,
        foot_v,
    })
}

/// Exact characteristic through `(x, v)` at time `t` for `B = b`,
/// evaluated at time `s`.
pub fn constant_field_oracle(x: f64, v: f64, t: f64, s: f64, b: f64) -> (f64, f64) {
    let d = s - t;
    (x + v * d + 0.5 * b * d * d, v + b * d)
}
