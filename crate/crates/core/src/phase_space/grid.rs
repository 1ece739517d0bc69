use serde::{Deserialize, Serialize};

use super::interp::{combine, cubic_weight_slopes, stencil, Interpolation, Stencil};
use crate::error::{Error, Result};

/// Uniform one-dimensional axis: `n` nodes from `min` to `max` inclusive.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    min: f64,
    max: f64,
    n: usize,
    step: f64,
}

impl Axis {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Axis> {
        if !(min.is_finite() && max.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite bounds [{min}, {max}]")));
        }
        if min >= max {
            return Err(Error::InvalidGrid(format!("inverted bounds [{min}, {max}]")));
        }
        if n < 4 {
            return Err(Error::InvalidGrid(format!("{n} nodes; at least 4 required")));
        }
        Ok(Axis {
            min,
            max,
            n,
            step: (max - min) / (n - 1) as f64,
        })
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn node(&self, i: usize) -> f64 {
        self.min + i as f64 * self.step
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.node(i))
    }

    /// Fractional node index of `p`.
    pub fn index_of(&self, p: f64) -> f64 {
        (p - self.min) / self.step
    }

    /// Membership with a rounding allowance of `1e-9` cells.
    pub fn contains(&self, p: f64) -> bool {
        let slack = 1e-9 * self.step;
        p >= self.min - slack && p <= self.max + slack
    }

    pub(crate) fn stencil(&self, p: f64) -> Stencil {
        stencil(self.index_of(p), self.n)
    }

    /// Nearest node index, clamped into the axis.
    pub fn nearest(&self, p: f64) -> usize {
        let t = self.index_of(p).round();
        t.clamp(0.0, (self.n - 1) as f64) as usize
    }
}

/// Uniform tensor grid over a truncated `(x, v)` rectangle.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseGrid {
    pub x: Axis,
    pub v: Axis,
}

impl PhaseGrid {
    pub fn new(x_bounds: [f64; 2], v_bounds: [f64; 2], nx: usize, nv: usize) -> Result<PhaseGrid> {
        Ok(PhaseGrid {
            x: Axis::new(x_bounds[0], x_bounds[1], nx)
                .map_err(|e| e.context("x axis"))?,
            v: Axis::new(v_bounds[0], v_bounds[1], nv)
                .map_err(|e| e.context("v axis"))?,
        })
    }

    pub fn nx(&self) -> usize {
        self.x.len()
    }

    pub fn nv(&self) -> usize {
        self.v.len()
    }

    pub fn dx(&self) -> f64 {
        self.x.step()
    }

    pub fn dv(&self) -> f64 {
        self.v.step()
    }

    pub fn len(&self) -> usize {
        self.nx() * self.nv()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Flat index of node `(i, j)`; x is the slow axis.
    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.nv() + j
    }

    #[inline]
    pub fn node(&self, k: usize) -> (f64, f64) {
        let nv = self.nv();
        (self.x.node(k / nv), self.v.node(k % nv))
    }

    pub fn contains(&self, x: f64, v: f64) -> bool {
        self.x.contains(x) && self.v.contains(v)
    }
}

/// Samples of the particle density on a [`PhaseGrid`] at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityField {
    grid: PhaseGrid,
    values: Vec<f64>,
    time: f64,
}

impl DensityField {
    pub fn new(grid: PhaseGrid, values: Vec<f64>, time: f64) -> Result<DensityField> {
        if values.len() != grid.len() {
            return Err(Error::InvalidArgument(format!(
                "density lattice has {} values, grid has {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(DensityField { grid, values, time })
    }

    pub fn zeros(grid: PhaseGrid, time: f64) -> DensityField {
        DensityField {
            grid,
            values: vec![0.0; grid.len()],
            time,
        }
    }

    pub fn from_fn(grid: PhaseGrid, time: f64, f: impl Fn(f64, f64) -> f64) -> DensityField {
        let values = (0..grid.len())
            .map(|k| {
                let (x, v) = grid.node(k);
                f(x, v)
            })
            .collect();
        DensityField { grid, values, time }
    }

    pub fn grid(&self) -> &PhaseGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, time: f64) {
        self.time = time;
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.index(i, j)]
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Trapezoidal `∫∫ f dx dv` over the grid rectangle.
    pub fn mass(&self) -> f64 {
        let (nx, nv) = (self.grid.nx(), self.grid.nv());
        let mut total = 0.0;
        for i in 0..nx {
            let wi = if i == 0 || i == nx - 1 { 0.5 } else { 1.0 };
            let row = &self.values[i * nv..(i + 1) * nv];
            let mut s = 0.5 * (row[0] + row[nv - 1]);
            s += row[1..nv - 1].iter().sum::<f64>();
            total += wi * s;
        }
        total * self.grid.dx() * self.grid.dv()
    }

    /// Largest `|f|` on the two outermost rows and columns.
    pub fn boundary_sup(&self) -> f64 {
        let (nx, nv) = (self.grid.nx(), self.grid.nv());
        let mut m: f64 = 0.0;
        for i in 0..nx {
            for j in 0..nv {
                if i < 2 || j < 2 || i + 2 >= nx || j + 2 >= nv {
                    m = m.max(self.get(i, j).abs());
                }
            }
        }
        m
    }

    /// Tensor-product cubic interpolant. Points outside the grid rectangle
    /// read as zero (compact support).
    pub fn interpolate(&self, x: f64, v: f64, mode: Interpolation) -> f64 {
        if !self.grid.contains(x, v) {
            return 0.0;
        }
        let sx = self.grid.x.stencil(x);
        let sv = self.grid.v.stencil(v);
        self.combine_stencils(&sx, &sv, mode)
    }

    #[inline]
    pub(crate) fn combine_stencils(&self, sx: &Stencil, sv: &Stencil, mode: Interpolation) -> f64 {
        let nv = self.grid.nv();
        let mut rows = [0.0; 4];
        for (a, row) in rows.iter_mut().enumerate() {
            let base = (sx.start + a) * nv + sv.start;
            let vals = [
                self.values[base],
                self.values[base + 1],
                self.values[base + 2],
                self.values[base + 3],
            ];
            *row = combine(&sv.w, vals, mode);
        }
        combine(&sx.w, rows, mode)
    }
}

/// Samples of the transport field on a spatial axis at one time.
#[derive(Clone, Debug, PartialEq)]
pub struct TransportField {
    axis: Axis,
    values: Vec<f64>,
    time: f64,
}

impl TransportField {
    pub fn new(axis: Axis, values: Vec<f64>, time: f64) -> Result<TransportField> {
        if values.len() != axis.len() {
            return Err(Error::InvalidArgument(format!(
                "field has {} values, axis has {} nodes",
                values.len(),
                axis.len()
            )));
        }
        Ok(TransportField { axis, values, time })
    }

    pub fn from_fn(axis: Axis, time: f64, f: impl Fn(f64) -> f64) -> TransportField {
        TransportField {
            axis,
            values: axis.nodes().map(f).collect(),
            time,
        }
    }

    pub fn constant(axis: Axis, time: f64, c: f64) -> TransportField {
        TransportField {
            axis,
            values: vec![c; axis.len()],
            time,
        }
    }

    pub fn axis(&self) -> &Axis {
        &self.axis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, time: f64) {
        self.time = time;
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn interpolate(&self, x: f64, mode: Interpolation) -> Result<f64> {
        if !self.axis.contains(x) {
            return Err(Error::OutOfRange {
                x,
                min: self.axis.min(),
                max: self.axis.max(),
            });
        }
        Ok(self.eval_stencil(&self.axis.stencil(x), mode))
    }

    /// Slope of the cubic interpolant at `x`.
    pub fn interpolate_derivative(&self, x: f64) -> Result<f64> {
        if !self.axis.contains(x) {
            return Err(Error::OutOfRange {
                x,
                min: self.axis.min(),
                max: self.axis.max(),
            });
        }
        let st = self.axis.stencil(x);
        let d = cubic_weight_slopes(st.s);
        let v = &self.values[st.start..st.start + 4];
        Ok((d[0] * v[0] + d[1] * v[1] + d[2] * v[2] + d[3] * v[3]) / self.axis.step())
    }

    #[inline]
    pub(crate) fn eval_stencil(&self, st: &Stencil, mode: Interpolation) -> f64 {
        let v = &self.values[st.start..st.start + 4];
        combine(&st.w, [v[0], v[1], v[2], v[3]], mode)
    }
}
