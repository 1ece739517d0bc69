//! Four-point Lagrange interpolation on uniform axes.
//!
//! The stencil for a query at fractional index `t` covers nodes
//! `start..start + 4` and the local coordinate `s` is measured from node
//! `start + 1`, so interior queries have `s` in `[0, 1]` while the first and
//! last cells use a shifted stencil with `s` in `[-1, 0]` or `[1, 2]`.
//! Either way the interpolant reproduces cubics exactly and returns node
//! values bit-for-bit at nodes.

use serde::{Deserialize, Serialize};

/// How grid fields are evaluated between nodes.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Interpolation {
    /// Tensor-product cubic Lagrange.
    #[default]
    Cubic,
    /// Cubic clipped to the range of the four stencil values on each axis.
    /// Never leaves the range of the node data, so it preserves sign and
    /// the sup norm, at the price of accuracy near extrema.
    MonotoneCubic,
}

impl Interpolation {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "cubic" => Some(Interpolation::Cubic),
            "monotone" | "monotone_cubic" => Some(Interpolation::MonotoneCubic),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Interpolation::Cubic => "cubic",
            Interpolation::MonotoneCubic => "monotone",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct Stencil {
    pub start: usize,
    pub s: f64,
    pub w: [f64; 4],
}

pub(crate) fn cubic_weights(s: f64) -> [f64; 4] {
    [
        -s * (s - 1.0) * (s - 2.0) / 6.0,
        (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0,
        -(s + 1.0) * s * (s - 2.0) / 2.0,
        (s + 1.0) * s * (s - 1.0) / 6.0,
    ]
}

/// d/ds of [`cubic_weights`].
pub(crate) fn cubic_weight_slopes(s: f64) -> [f64; 4] {
    [
        -(3.0 * s * s - 6.0 * s + 2.0) / 6.0,
        (3.0 * s * s - 4.0 * s - 1.0) / 2.0,
        -(3.0 * s * s - 2.0 * s - 2.0) / 2.0,
        (3.0 * s * s - 1.0) / 6.0,
    ]
}

/// Stencil for fractional index `t` on an axis of `n >= 4` nodes. `t` is
/// clamped to `[0, n - 1]`; values within a few ulps of an integer snap to it.
pub(crate) fn stencil(t: f64, n: usize) -> Stencil {
    let r = t.round();
    let t = if (t - r).abs() <= 8.0 * f64::EPSILON * r.abs().max(1.0) {
        r
    } else {
        t
    };
    let t = t.clamp(0.0, (n - 1) as f64);
    let cell = (t.floor() as usize).min(n - 2);
    let start = cell.saturating_sub(1).min(n - 4);
    let s = t - (start + 1) as f64;
    Stencil {
        start,
        s,
        w: cubic_weights(s),
    }
}

#[inline]
pub(crate) fn combine(w: &[f64; 4], vals: [f64; 4], mode: Interpolation) -> f64 {
    let raw = w[0] * vals[0] + w[1] * vals[1] + w[2] * vals[2] + w[3] * vals[3];
    match mode {
        Interpolation::Cubic => raw,
        Interpolation::MonotoneCubic => {
            let lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            raw.clamp(lo, hi)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_partition_unity() {
        for k in 0..=30 {
            let s = -1.0 + k as f64 * 0.1;
            let w = cubic_weights(s);
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            let d = cubic_weight_slopes(s);
            assert!(d.iter().sum::<f64>().abs() < 1e-14);
        }
    }

    #[test]
    fn node_queries_select_a_single_node() {
        let n = 9;
        for i in 0..n {
            let st = stencil(i as f64, n);
            let hits: Vec<_> = st.w.iter().filter(|w| **w != 0.0).collect();
            assert_eq!(hits.len(), 1);
            assert_eq!(*hits[0], 1.0);
            let k = st.w.iter().position(|w| *w == 1.0).unwrap();
            assert_eq!(st.start + k, i);
        }
    }

    #[test]
    fn monotone_clip_stays_in_stencil_range() {
        let w = cubic_weights(0.5);
        let vals = [0.0, 1.0, 1.0, 0.0];
        let plain = combine(&w, vals, Interpolation::Cubic);
        assert!(plain > 1.0);
        assert_eq!(combine(&w, vals, Interpolation::MonotoneCubic), 1.0);
    }
}
