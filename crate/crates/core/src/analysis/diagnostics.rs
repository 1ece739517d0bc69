use rayon::prelude::*;
use serde::Serialize;

use super::{density_dv, density_dx, field_dx};
use crate::phase_space::DensityField;
use crate::solver::{MajorantResult, SolutionHistory};

/// `max |v|` over nodes with `|f| > threshold`; zero for an empty support.
pub fn velocity_support(f: &DensityField, threshold: f64) -> f64 {
    let g = f.grid();
    let nv = g.nv();
    f.values()
        .iter()
        .enumerate()
        .filter(|(_, val)| val.abs() > threshold)
        .map(|(k, _)| g.v.node(k % nv).abs())
        .fold(0.0, f64::max)
}

/// Smallest `v` over nodes with `|f| > threshold`.
pub fn velocity_support_inf(f: &DensityField, threshold: f64) -> Option<f64> {
    let g = f.grid();
    let nv = g.nv();
    f.values()
        .iter()
        .enumerate()
        .filter(|(_, val)| val.abs() > threshold)
        .map(|(k, _)| g.v.node(k % nv))
        .reduce(f64::min)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// Velocity support of this level.
    pub support: f64,
    pub mass: f64,
    pub f_sup: f64,
    pub b_sup: f64,
    pub dxf_sup: f64,
    pub dvf_sup: f64,
    pub dxb_sup: f64,
    pub b_min: f64,
    pub b_max: f64,
    pub v_support_inf: Option<f64>,
}

/// One [`DiagnosticsRecord`] per stored level.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiagnosticsTrace {
    pub threshold: f64,
    pub dt: f64,
    pub records: Vec<DiagnosticsRecord>,
}

impl DiagnosticsTrace {
    pub const CSV_HEADER: &'static str =
        "t,support,mass,f_sup,b_sup,dxf_sup,dvf_sup,dxb_sup,b_min,b_max,v_support_inf";

    /// Support threshold defaults to `1e-12 ||f(0)||`.
    pub fn from_history(h: &SolutionHistory) -> DiagnosticsTrace {
        let threshold = 1e-12 * h.density(0).sup_norm();
        Self::with_threshold(h, threshold)
    }

    pub fn with_threshold(h: &SolutionHistory, threshold: f64) -> DiagnosticsTrace {
        let records = (0..h.len())
            .into_par_iter()
            .map(|k| {
                let f = h.density(k);
                let b = h.field(k);
                DiagnosticsRecord {
                    t: h.time(k),
                    support: velocity_support(f, threshold),
                    mass: f.mass(),
                    f_sup: f.sup_norm(),
                    b_sup: b.sup_norm(),
                    dxf_sup: density_dx(f).sup_norm(),
                    dvf_sup: density_dv(f).sup_norm(),
                    dxb_sup: field_dx(b).sup_norm(),
                    b_min: b.min(),
                    b_max: b.max(),
                    v_support_inf: velocity_support_inf(f, threshold),
                }
            })
            .collect();
        DiagnosticsTrace {
            threshold,
            dt: h.dt(),
            records,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// `max_k |m_k - m_0| / m_0`, or the absolute drift for zero mass.
    pub fn mass_drift(&self) -> f64 {
        let m0 = self.records[0].mass;
        let d = self.records.iter().fold(0.0, |d: f64, r| d.max((r.mass - m0).abs()));
        if m0 != 0.0 {
            d / m0.abs()
        } else {
            d
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for r in &self.records {
            let inf = r.v_support_inf.map(|v| format!("{v:?}")).unwrap_or_default();
            out.push_str(&format!(
                "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{}\n",
                r.t, r.support, r.mass, r.f_sup, r.b_sup, r.dxf_sup, r.dvf_sup, r.dxb_sup, r.b_min, r.b_max, inf
            ));
        }
        out
    }
}

/// `||∂x f(t)|| + ||∂v f(t)||` per level.
pub fn continuation_indicator(trace: &DiagnosticsTrace) -> Vec<f64> {
    trace.records.iter().map(|r| r.dxf_sup + r.dvf_sup).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContinuationReport {
    pub indicator: Vec<f64>,
    pub cap: f64,
    pub exceeds_cap: bool,
    /// Some level inside the majorant's range lies above `F(t)`.
    pub exceeds_majorant: bool,
    pub blowup_suspected: bool,
}

/// Flags suspected blow-up when the indicator passes `cap_factor` times its
/// initial value, or rises above the majorant `F(t)` where `F` is defined.
pub fn continuation_report(
    trace: &DiagnosticsTrace,
    majorant: Option<&MajorantResult>,
    cap_factor: f64,
) -> ContinuationReport {
    let indicator = continuation_indicator(trace);
    let cap = cap_factor * indicator.first().copied().unwrap_or(0.0);
    let exceeds_cap = indicator.iter().any(|&s| s > cap);
    let exceeds_majorant = majorant.is_some_and(|m| {
        trace
            .records
            .iter()
            .zip(&indicator)
            .any(|(r, &s)| m.value_at(r.t).is_some_and(|f| s > f))
    });
    ContinuationReport {
        blowup_suspected: exceeds_cap || exceeds_majorant,
        indicator,
        cap,
        exceeds_cap,
        exceeds_majorant,
    }
}
