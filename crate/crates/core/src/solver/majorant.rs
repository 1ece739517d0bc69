//! Scalar majorant `F' = C (1 + t F)^2`, `F(0) = C`. Its blow-up time is a
//! lower bound for the horizon on which the Picard iterates stay bounded.

use serde::Serialize;

use crate::error::{Error, Result};

/// Default end of integration when `F` stays below the cap.
pub const DEFAULT_HORIZON: f64 = 100.0;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MajorantResult {
    pub c: f64,
    pub cap: f64,
    pub ds: f64,
    /// First time `F` exceeds `cap`, linearly interpolated between steps;
    /// `None` when the horizon is reached first.
    pub blowup_time: Option<f64>,
    /// `(t, F(t))` at every step, ending at the first sample above the cap.
    pub trajectory: Vec<(f64, f64)>,
}

impl MajorantResult {
    /// `F(t)` by linear interpolation in the trajectory; `None` past its end.
    pub fn value_at(&self, t: f64) -> Option<f64> {
        let tr = &self.trajectory;
        let last = tr.last()?;
        if t < 0.0 || t > last.0 {
            return None;
        }
        let k = ((t / self.ds).floor() as usize).min(tr.len().saturating_sub(2));
        if tr.len() == 1 {
            return Some(tr[0].1);
        }
        let (t0, f0) = tr[k];
        let (t1, f1) = tr[k + 1];
        let th = ((t - t0) / (t1 - t0)).clamp(0.0, 1.0);
        Some(f0 + th * (f1 - f0))
    }
}

fn rhs(c: f64, t: f64, f: f64) -> f64 {
    let q = 1.0 + t * f;
    c * q * q
}

/// [`majorant_existence_time_with_horizon`] with [`DEFAULT_HORIZON`].
pub fn majorant_existence_time(c: f64, cap: f64, ds: f64) -> Result<MajorantResult> {
    majorant_existence_time_with_horizon(c, cap, ds, DEFAULT_HORIZON)
}

/// Integrates the majorant with classical Runge-Kutta steps of size `ds`.
pub fn majorant_existence_time_with_horizon(c: f64, cap: f64, ds: f64, horizon: f64) -> Result<MajorantResult> {
    if !(c >= 0.0) || !c.is_finite() {
        return Err(Error::InvalidArgument(format!("majorant constant must be finite and >= 0, got {c}")));
    }
    if !(cap > c) || !cap.is_finite() {
        return Err(Error::InvalidArgument(format!("cap must be finite and exceed C = {c}, got {cap}")));
    }
    if !(ds > 0.0) || !(horizon > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need ds > 0 and horizon > 0, got ds = {ds}, horizon = {horizon}"
        )));
    }
    let steps = (horizon / ds).ceil() as usize;
    let mut trajectory = Vec::with_capacity(steps.min(1 << 20) + 1);
    let mut f = c;
    trajectory.push((0.0, f));
    let mut blowup_time = None;
    for k in 0..steps {
        let t = k as f64 * ds;
        let h = 0.5 * ds;
        let k1 = rhs(c, t, f);
        let k2 = rhs(c, t + h, f + h * k1);
        let k3 = rhs(c, t + h, f + h * k2);
        let k4 = rhs(c, t + ds, f + ds * k3);
        let next = f + ds / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let t_next = (k + 1) as f64 * ds;
        trajectory.push((t_next, next));
        if !(next <= cap) {
            let th = if next.is_finite() { (cap - f) / (next - f) } else { 0.0 };
            blowup_time = Some(t + th * ds);
            break;
        }
        f = next;
    }
    Ok(MajorantResult {
        c,
        cap,
        ds,
        blowup_time,
        trajectory,
    })
}
