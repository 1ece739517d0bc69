//! Half-derivative quotients of the field:
//! `H(h) = sup_{t, x} |B(t, x + h) - B(t, x)|` reported as `H(h) / sqrt(h)`,
//! together with the analogous table for time offsets.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::phase_space::TransportField;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HolderRow {
    /// Offset in lattice steps.
    pub steps: usize,
    pub h: f64,
    pub sup_diff: f64,
    pub quotient: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HolderReport {
    pub space: Vec<HolderRow>,
    pub time: Vec<HolderRow>,
}

impl HolderReport {
    pub const CSV_HEADER: &'static str = "kind,steps,h,sup_diff,quotient";

    pub fn max_space_quotient(&self) -> f64 {
        self.space.iter().map(|r| r.quotient).fold(0.0, f64::max)
    }

    pub fn max_time_quotient(&self) -> f64 {
        self.time.iter().map(|r| r.quotient).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for (kind, rows) in [("space", &self.space), ("time", &self.time)] {
            for r in rows {
                out.push_str(&format!("{kind},{},{:?},{:?},{:?}\n", r.steps, r.h, r.sup_diff, r.quotient));
            }
        }
        out
    }
}

/// Offsets `(n - 1) / 2^k` for `k` in `k_min..=k_max` that are whole,
/// positive numbers of steps, for a lattice of `n` points.
pub fn dyadic_offsets(n: usize, k_min: u32, k_max: u32) -> Vec<usize> {
    let cells = n.saturating_sub(1);
    (k_min..=k_max)
        .filter_map(|k| {
            let d = 1usize << k;
            (cells % d == 0 && cells / d > 0).then_some(cells / d)
        })
        .collect()
}

/// Exact lattice quotients for the stored levels `b_history`, spaced `dt`.
/// Space offsets count x-steps, time offsets count levels; offsets above half
/// the lattice extent are rejected.
pub fn holder_quotient(
    b_history: &[TransportField],
    dt: f64,
    space_offsets: &[usize],
    time_offsets: &[usize],
) -> Result<HolderReport> {
    let Some(first) = b_history.first() else {
        return Err(Error::InvalidArgument("empty field history".into()));
    };
    let axis = *first.axis();
    let nx = axis.len();
    let levels = b_history.len();
    for &m in space_offsets {
        if m == 0 || 2 * m > nx - 1 {
            return Err(Error::InvalidArgument(format!(
                "space offset of {m} steps outside (0, {}]",
                (nx - 1) / 2
            )));
        }
    }
    for &m in time_offsets {
        if m == 0 || 2 * m > levels - 1 {
            return Err(Error::InvalidArgument(format!(
                "time offset of {m} levels outside (0, {}]",
                (levels - 1) / 2
            )));
        }
    }
    let space = space_offsets
        .iter()
        .map(|&m| {
            let sup_diff = b_history.iter().fold(0.0, |acc: f64, b| {
                let v = b.values();
                (0..nx - m).fold(acc, |a, i| a.max((v[i + m] - v[i]).abs()))
            });
            let h = m as f64 * axis.step();
            HolderRow {
                steps: m,
                h,
                sup_diff,
                quotient: sup_diff / h.sqrt(),
            }
        })
        .collect();
    let time = time_offsets
        .iter()
        .map(|&m| {
            let sup_diff = (0..levels - m).fold(0.0, |acc: f64, k| {
                let (a, b) = (b_history[k].values(), b_history[k + m].values());
                a.iter().zip(b).fold(acc, |s, (p, q)| s.max((q - p).abs()))
            });
            let h = m as f64 * dt;
            HolderRow {
                steps: m,
                h,
                sup_diff,
                quotient: sup_diff / h.sqrt(),
            }
        })
        .collect();
    Ok(HolderReport { space, time })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::Axis;

    #[test]
    fn constant_field_has_zero_quotient() {
        let axis = Axis::new(0.0, 4.0, 65).unwrap();
        let b: Vec<_> = (0..9).map(|k| TransportField::constant(axis, k as f64 * 0.1, 1.5)).collect();
        let r = holder_quotient(&b, 0.1, &dyadic_offsets(65, 3, 5), &[1, 2, 4]).unwrap();
        assert!(r.space.iter().chain(&r.time).all(|row| row.sup_diff == 0.0));
    }

    #[test]
    fn sine_quotient_matches_closed_form() {
        // on a period-aligned lattice the sup of |sin(x + h) - sin(x)| is
        // attained at a node, where it equals 2 sin(h / 2)
        let n = 1025;
        let axis = Axis::new(0.0, 8.0 * std::f64::consts::PI, n).unwrap();
        let b = vec![TransportField::from_fn(axis, 0.0, f64::sin)];
        let offs = dyadic_offsets(n, 3, 7);
        assert_eq!(offs, vec![128, 64, 32, 16, 8]);
        let r = holder_quotient(&b, 1.0, &offs, &[]).unwrap();
        for row in &r.space {
            let exact = 2.0 * (row.h / 2.0).sin();
            assert!((row.sup_diff - exact).abs() < 1e-12 * exact.max(1.0), "{row:?}");
        }
        let q: Vec<f64> = r.space.iter().map(|row| row.quotient).collect();
        assert!(q.last().unwrap() < q.first().unwrap());
    }

    #[test]
    fn offset_beyond_half_domain_is_rejected() {
        let axis = Axis::new(0.0, 1.0, 17).unwrap();
        let b = vec![TransportField::constant(axis, 0.0, 0.0)];
        assert!(holder_quotient(&b, 1.0, &[9], &[]).is_err());
        assert!(holder_quotient(&b, 1.0, &[8], &[]).is_ok());
    }
}
