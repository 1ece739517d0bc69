//! A-priori estimates checked against measured traces. Each check reports
//! the largest ratio of measured value to bound; it holds when that ratio
//! is at most one.

use serde::Serialize;

use super::DiagnosticsTrace;
use crate::phase_space::InitialDataSpec;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub max_ratio: f64,
    /// Level where the ratio peaks.
    pub worst_level: usize,
    pub holds: bool,
}

impl BoundCheck {
    fn from_pairs(pairs: impl Iterator<Item = (f64, f64)>) -> BoundCheck {
        let mut max_ratio: f64 = 0.0;
        let mut worst_level = 0;
        for (k, (measured, bound)) in pairs.enumerate() {
            let r = if bound > 0.0 {
                measured / bound
            } else if measured > 0.0 {
                f64::INFINITY
            } else {
                0.0
            };
            if r > max_ratio {
                max_ratio = r;
                worst_level = k;
            }
        }
        BoundCheck {
            max_ratio,
            worst_level,
            holds: max_ratio <= 1.0,
        }
    }
}

/// Explicit stand-ins for the data-dependent constants of the estimates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundConstants {
    pub f0_sup: f64,
    pub b0_sup: f64,
    pub b0_slope_sup: f64,
    pub p0: f64,
}

impl BoundConstants {
    pub fn from_data(data: &InitialDataSpec) -> BoundConstants {
        BoundConstants {
            f0_sup: data.density.sup_norm(),
            b0_sup: data.field.sup_norm(),
            b0_slope_sup: data.field.derivative_sup_norm(),
            p0: data.density.velocity_extent(),
        }
    }

    /// `max(||B0||, 1) max(2 ||f0||, 1)`.
    pub fn field_constant(&self) -> f64 {
        self.b0_sup.max(1.0) * (2.0 * self.f0_sup).max(1.0)
    }

    /// `max(||B0'||, 1) max(2 P, 1)` for a velocity support bound `P`.
    pub fn slope_constant(&self, p: f64) -> f64 {
        self.b0_slope_sup.max(1.0) * (2.0 * p).max(1.0)
    }

    /// `(K, m)` of the envelope `P^n(t) <= K e^{m t}` for every iterate:
    /// `K = 2 max(P0, ||B0||)`, `m = max(2 sqrt(||f0||), 1)`.
    pub fn envelope(&self) -> (f64, f64) {
        (2.0 * self.p0.max(self.b0_sup), (2.0 * self.f0_sup.sqrt()).max(1.0))
    }
}

/// Running maximum, so `P(t)` covers all earlier levels.
fn running_max(v: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut m = f64::NEG_INFINITY;
    v.map(|x| {
        m = m.max(x);
        m
    })
    .collect()
}

/// Trapezoidal cumulative integral on a uniform step.
fn cumulative(v: &[f64], dt: f64) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out = Vec::with_capacity(v.len());
    for (k, x) in v.iter().enumerate() {
        if k > 0 {
            acc += 0.5 * dt * (v[k - 1] + x);
        }
        out.push(acc);
    }
    out
}

/// `||B(t)|| <= C (1 + ∫_0^t P)`, with `P` enlarged by one `dv` for the
/// node sampling of the support.
pub fn field_bound_check(trace: &DiagnosticsTrace, c: &BoundConstants, dv: f64) -> BoundCheck {
    let p: Vec<f64> = running_max(trace.records.iter().map(|r| r.support + dv));
    let int_p = cumulative(&p, trace.dt);
    let k = c.field_constant();
    BoundCheck::from_pairs(
        trace
            .records
            .iter()
            .zip(&int_p)
            .map(|(r, ip)| (r.b_sup, k * (1.0 + ip))),
    )
}

/// `||∂x B(t)|| <= C_T (1 + ∫_0^t ||∂x f||)` with `C_T` built from the
/// largest measured support on the run.
pub fn db_bound_check(trace: &DiagnosticsTrace, c: &BoundConstants, dv: f64) -> BoundCheck {
    let p_max = trace.records.iter().map(|r| r.support).fold(0.0, f64::max) + dv;
    let k = c.slope_constant(p_max);
    let dxf: Vec<f64> = trace.records.iter().map(|r| r.dxf_sup).collect();
    let int = cumulative(&dxf, trace.dt);
    BoundCheck::from_pairs(trace.records.iter().zip(&int).map(|(r, i)| (r.dxb_sup, k * (1.0 + i))))
}

/// `P(t) <= P(0) + ∫_0^t ||B||` per level with slack `dv + dt max ||B||`.
/// `supports` are per-level supports of the density, `field_sups` the norms
/// of the field that moved it.
pub fn support_recursion_check(supports: &[f64], field_sups: &[f64], dt: f64, dv: f64) -> BoundCheck {
    let p = running_max(supports.iter().copied());
    let p0 = supports.first().copied().unwrap_or(0.0);
    let int_b = cumulative(field_sups, dt);
    let slack = dv + dt * field_sups.iter().copied().fold(0.0, f64::max);
    BoundCheck::from_pairs(p.iter().zip(&int_b).map(|(p, ib)| (*p, p0 + ib + slack)))
}

/// Every iterate's support below `K e^{m t}` (plus one `dv`).
pub fn iterate_envelope_check(supports: &[Vec<f64>], dt: f64, dv: f64, c: &BoundConstants) -> BoundCheck {
    let (k, m) = c.envelope();
    BoundCheck::from_pairs(supports.iter().flat_map(|levels| {
        levels
            .iter()
            .enumerate()
            .map(move |(j, p)| (*p, k * (m * j as f64 * dt).exp() + dv))
    }))
}
