//! Velocity moments of the density and the transport field along the
//! unit-speed lines `s -> (s, x - t + s)`:
//!
//! `B(t, x) = B0(x - t) + ∫_0^t ρ(s, x - t + s) ds`, with `ρ = ∫ f dv`.
//!
//! All time integrals use the trapezoidal rule over the stored levels.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::phase_space::{Axis, DensityField, FieldFamily, Interpolation, TransportField};

/// Initial field data as seen by the field solve: either a closed-form
/// family (defined on the whole line) or a sampled lattice (an error outside
/// its axis).
pub trait FieldProfile: Sync {
    fn value(&self, x: f64) -> Result<f64>;
    fn slope(&self, x: f64) -> Result<f64>;
}

impl FieldProfile for FieldFamily {
    fn value(&self, x: f64) -> Result<f64> {
        Ok(FieldFamily::value(self, x))
    }

    fn slope(&self, x: f64) -> Result<f64> {
        Ok(self.derivative(x))
    }
}

impl FieldProfile for TransportField {
    fn value(&self, x: f64) -> Result<f64> {
        self.interpolate(x, Interpolation::Cubic)
    }

    fn slope(&self, x: f64) -> Result<f64> {
        self.interpolate_derivative(x)
    }
}

/// `ρ(x) = ∫ f(x, v) dv` on the spatial axis.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentProfile {
    axis: Axis,
    values: Vec<f64>,
    time: f64,
}

impl MomentProfile {
    pub fn new(axis: Axis, values: Vec<f64>, time: f64) -> Result<MomentProfile> {
        if values.len() != axis.len() {
            return Err(Error::InvalidArgument(format!(
                "moment has {} values, axis has {} nodes",
                values.len(),
                axis.len()
            )));
        }
        Ok(MomentProfile { axis, values, time })
    }

    pub fn from_fn(axis: Axis, time: f64, f: impl Fn(f64) -> f64) -> MomentProfile {
        MomentProfile {
            axis,
            values: axis.nodes().map(f).collect(),
            time,
        }
    }

    pub fn axis(&self) -> &Axis {
        &self.axis
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Interpolated moment; zero outside the axis, where the density has no
    /// support.
    #[inline]
    pub fn at(&self, y: f64, mode: Interpolation) -> f64 {
        if !self.axis.contains(y) {
            return 0.0;
        }
        let st = self.axis.stencil(y);
        let v = &self.values[st.start..st.start + 4];
        crate::phase_space::interp_combine(&st, [v[0], v[1], v[2], v[3]], mode)
    }
}

/// Trapezoidal `∫ f dv` at every x node.
pub fn density_moment(f: &DensityField) -> MomentProfile {
    let g = f.grid();
    let nv = g.nv();
    let dv = g.dv();
    let values = f
        .values()
        .chunks_exact(nv)
        .map(|row| dv * (0.5 * (row[0] + row[nv - 1]) + row[1..nv - 1].iter().sum::<f64>()))
        .collect();
    MomentProfile {
        axis: g.x,
        values,
        time: f.time(),
    }
}

/// Number of steps `n` with `n * dt = t`.
pub(crate) fn level_count(t: f64, dt: f64) -> Result<usize> {
    if !(dt > 0.0) || !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("need dt > 0 and t >= 0, got dt = {dt}, t = {t}")));
    }
    let n = (t / dt).round();
    if (n * dt - t).abs() > 1e-9 * t.max(1.0) {
        return Err(Error::InvalidArgument(format!("t = {t} is not a multiple of dt = {dt}")));
    }
    Ok(n as usize)
}

fn light_line_sum(
    initial: impl Fn(f64) -> Result<f64> + Sync,
    moments: &[MomentProfile],
    dt: f64,
    t: f64,
    mode: Interpolation,
) -> Result<TransportField> {
    let n = level_count(t, dt)?;
    if moments.len() <= n {
        return Err(Error::TimeOutOfRange {
            t,
            end: moments.len().saturating_sub(1) as f64 * dt,
        });
    }
    let axis = *moments[0].axis();
    let values = (0..axis.len())
        .into_par_iter()
        .map(|i| {
            let x = axis.node(i);
            let mut acc = 0.0;
            for (k, rho) in moments[..=n].iter().enumerate() {
                let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                acc += w * rho.at(x - t + k as f64 * dt, mode);
            }
            // a single level carries no time integral
            if n == 0 {
                acc = 0.0;
            }
            Ok(initial(x - t)? + dt * acc)
        })
        .collect::<Result<Vec<f64>>>()?;
    TransportField::new(axis, values, t)
}

/// Field at time `t = n dt` from the initial field and the moments at
/// `0, dt, ..., n dt`.
pub fn field_from_history(
    b0: &dyn FieldProfile,
    moments: &[MomentProfile],
    dt: f64,
    t: f64,
    mode: Interpolation,
) -> Result<TransportField> {
    light_line_sum(|y| b0.value(y), moments, dt, t, mode)
}

/// One trapezoidal step along the unit-speed lines:
/// `B(t + dt, x) = B(t, x - dt) + dt/2 [ρ(t, x - dt) + ρ(t + dt, x)]`.
///
/// Left of the axis nothing has been emitted yet, so `B(t, y) = B0(y - t)`
/// there.
pub fn advance_field(
    b_t: &TransportField,
    rho_t: &MomentProfile,
    rho_next: &MomentProfile,
    dt: f64,
    b0: &dyn FieldProfile,
    mode: Interpolation,
) -> Result<TransportField> {
    let axis = *b_t.axis();
    let t = b_t.time();
    let values = (0..axis.len())
        .into_par_iter()
        .map(|i| {
            let x = axis.node(i);
            let y = x - dt;
            let prev = if axis.contains(y) {
                b_t.interpolate(y, mode)?
            } else {
                b0.value(y - t)?
            };
            Ok(prev + 0.5 * dt * (rho_t.at(y, mode) + rho_next.values[i]))
        })
        .collect::<Result<Vec<f64>>>()?;
    TransportField::new(axis, values, t + dt)
}

/// `∂x B(t, x) = B0'(x - t) + ∫_0^t ∫ ∂x f(τ, x - t + τ, v) dv dτ`, with the
/// same quadratures as [`field_from_history`]. `dxf_history` holds ∂x f
/// lattices at `0, dt, ...`.
pub fn field_derivative_rep(
    b0: &dyn FieldProfile,
    dxf_history: &[DensityField],
    dt: f64,
    t: f64,
    mode: Interpolation,
) -> Result<TransportField> {
    let moments: Vec<MomentProfile> = dxf_history.iter().map(density_moment).collect();
    light_line_sum(|y| b0.slope(y), &moments, dt, t, mode)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_space::{FieldShape, PhaseGrid};
    use proptest::prelude::*;

    fn grid() -> PhaseGrid {
        PhaseGrid::new([-2.0, 2.0], [-2.0, 2.0], 33, 41).unwrap()
    }

    #[test]
    fn zero_density_has_zero_moment() {
        let g = grid();
        let rho = density_moment(&DensityField::zeros(g, 0.0));
        assert!(rho.values().iter().all(|&r| r == 0.0));
    }

    #[test]
    fn node_aligned_plateau_integrates_exactly() {
        // f = 1 on every node of v in [-1, 1], dv = 0.1
        let g = PhaseGrid::new([-1.0, 1.0], [-1.0, 1.0], 5, 21).unwrap();
        let f = DensityField::from_fn(g, 0.0, |_, _| 1.0);
        for &r in density_moment(&f).values() {
            assert!((r - 2.0).abs() < 1e-12, "{r}");
        }
        // node-aligned piecewise-linear profile with ramps on [1, 1.1]
        let g = PhaseGrid::new([-1.0, 1.0], [-2.0, 2.0], 5, 41).unwrap();
        let f = DensityField::from_fn(g, 0.0, |_, v| (1.0 - (v.abs() - 1.0).max(0.0) / 0.1).clamp(0.0, 1.0));
        for &r in density_moment(&f).values() {
            assert!((r - 2.1).abs() < 1e-12, "{r}");
        }
    }

    #[test]
    fn moment_converges_at_second_order() {
        let exact = 16.0 / 15.0;
        let mut errs = Vec::new();
        for nv in [21, 41, 81, 161] {
            let g = PhaseGrid::new([-1.0, 1.0], [-1.5, 1.5], 5, nv).unwrap();
            let f = DensityField::from_fn(g, 0.0, |_, v| (1.0 - v * v).max(0.0).powi(2));
            errs.push((density_moment(&f).values()[2] - exact).abs());
        }
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() >= 1.9, "{errs:?}");
        }
    }

    fn constant_moments(axis: Axis, c: f64, n: usize, dt: f64) -> Vec<MomentProfile> {
        (0..=n)
            .map(|k| MomentProfile::from_fn(axis, k as f64 * dt, |_| c))
            .collect()
    }

    #[test]
    fn pure_transport_without_density() {
        let axis = Axis::new(-2.0, 2.0, 33).unwrap();
        let dt = 0.125; // equal to dx
        let b0 = FieldFamily::new(FieldShape::Gaussian, 0.8, 0.6);
        let moments = constant_moments(axis, 0.0, 8, dt);
        let b = field_from_history(&b0, &moments, dt, 1.0, Interpolation::Cubic).unwrap();
        for (i, x) in axis.nodes().enumerate() {
            assert_eq!(b.values()[i], b0.value(x - 1.0));
        }
        let b = field_from_history(&b0, &moments, dt, 0.0, Interpolation::Cubic).unwrap();
        for (i, x) in axis.nodes().enumerate() {
            assert_eq!(b.values()[i], b0.value(x));
        }
    }

    #[test]
    fn constant_source_adds_ct() {
        // constant moment on an axis wide enough that the light lines stay inside
        let axis = Axis::new(-4.0, 4.0, 65).unwrap();
        let b0 = FieldFamily::new(FieldShape::Sine, 0.5, 1.0);
        let dt = 0.05;
        let moments = constant_moments(axis, 0.3, 20, dt);
        let b = field_from_history(&b0, &moments, dt, 1.0, Interpolation::Cubic).unwrap();
        for (i, x) in axis.nodes().enumerate() {
            if x - 1.0 >= -4.0 {
                assert!((b.values()[i] - b0.value(x - 1.0) - 0.3).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn advance_matches_closed_forms() {
        let axis = Axis::new(-2.0, 2.0, 33).unwrap();
        let b0 = FieldFamily::new(FieldShape::Bump, 1.0, 1.0);
        let bt = TransportField::from_fn(axis, 0.0, |x| b0.value(x));
        let zero = MomentProfile::from_fn(axis, 0.0, |_| 0.0);
        let next = advance_field(&bt, &zero, &zero, 0.125, &b0, Interpolation::Cubic).unwrap();
        for (i, x) in axis.nodes().enumerate() {
            assert!((next.values()[i] - b0.value(x - 0.125)).abs() < 1e-15);
        }
        let c = MomentProfile::from_fn(axis, 0.0, |_| 2.0);
        let next = advance_field(&bt, &c, &c, 0.125, &b0, Interpolation::Cubic).unwrap();
        for (i, x) in axis.nodes().enumerate() {
            let expect = b0.value(x - 0.125) + if x - 0.125 >= -2.0 { 0.25 } else { 0.125 };
            assert!((next.values()[i] - expect).abs() < 1e-14, "{x}");
        }
    }

    #[test]
    fn composed_steps_equal_the_history_sum() {
        let axis = Axis::new(-2.0, 2.0, 33).unwrap();
        let dt = axis.step();
        let b0 = FieldFamily::new(FieldShape::Bump, 0.7, 1.2);
        let n = 12;
        let moments: Vec<MomentProfile> = (0..=n)
            .map(|k| {
                let t = k as f64 * dt;
                MomentProfile::from_fn(axis, t, |x| (1.0 - (x - 0.3 * t).powi(2)).max(0.0) * (1.0 + t))
            })
            .collect();
        let mut b = TransportField::from_fn(axis, 0.0, |x| b0.value(x));
        for k in 0..n {
            b = advance_field(&b, &moments[k], &moments[k + 1], dt, &b0, Interpolation::Cubic).unwrap();
        }
        let direct = field_from_history(&b0, &moments, dt, n as f64 * dt, Interpolation::Cubic).unwrap();
        for (a, d) in b.values().iter().zip(direct.values()) {
            assert!((a - d).abs() < 1e-12, "{a} vs {d}");
        }
    }

    #[test]
    fn sampled_initial_field_out_of_range_is_an_error() {
        let axis = Axis::new(-2.0, 2.0, 33).unwrap();
        let b0 = TransportField::constant(axis, 0.0, 1.0);
        let moments = constant_moments(axis, 0.0, 4, 0.25);
        let r = field_from_history(&b0, &moments, 0.25, 1.0, Interpolation::Cubic);
        assert!(matches!(r, Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn derivative_rep_without_density_is_transported_slope() {
        let g = grid();
        let b0 = FieldFamily::new(FieldShape::Gaussian, 1.0, 0.7);
        let dt = 0.125;
        let hist: Vec<DensityField> = (0..=4).map(|k| DensityField::zeros(g, k as f64 * dt)).collect();
        let d = field_derivative_rep(&b0, &hist, dt, 0.5, Interpolation::Cubic).unwrap();
        for (i, x) in g.x.nodes().enumerate() {
            assert_eq!(d.values()[i], b0.derivative(x - 0.5));
        }
    }

    proptest! {
        #[test]
        fn field_is_affine_in_the_moments(
            a in prop::collection::vec(-1.0f64..1.0, 9 * 5),
            b in prop::collection::vec(-1.0f64..1.0, 9 * 5),
            n in 0usize..5,
        ) {
            let axis = Axis::new(-1.0, 1.0, 9).unwrap();
            let dt = 0.25;
            let mk = |src: &[f64]| -> Vec<MomentProfile> {
                src.chunks(9)
                    .enumerate()
                    .map(|(k, c)| MomentProfile::new(axis, c.to_vec(), k as f64 * dt).unwrap())
                    .collect()
            };
            let sum: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p + q).collect();
            let zero = FieldFamily::zero();
            let t = n as f64 * dt;
            let fa = field_from_history(&zero, &mk(&a), dt, t, Interpolation::Cubic).unwrap();
            let fb = field_from_history(&zero, &mk(&b), dt, t, Interpolation::Cubic).unwrap();
            let fs = field_from_history(&zero, &mk(&sum), dt, t, Interpolation::Cubic).unwrap();
            for i in 0..9 {
                prop_assert!((fa.values()[i] + fb.values()[i] - fs.values()[i]).abs() < 1e-12);
            }
        }
    }
}
