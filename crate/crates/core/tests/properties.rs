//! Invariants of the discrete system checked on randomized inputs.

use proptest::prelude::*;

use svmlab::analysis::{
    field_bound_check, holder_quotient, iterate_envelope_check, scale_density, support_recursion_check,
    BoundConstants, DiagnosticsTrace,
};
use svmlab::characteristics::{constant_field_oracle, trace, trace_backward, AnalyticField, CharState, ConstantField};
use svmlab::field_solve::{field_from_history, MomentProfile};
use svmlab::phase_space::{
    sample_initial_data, Axis, DensityFamily, DensityField, FieldFamily, FieldShape, InitialDataSpec, Interpolation,
    PhaseGrid, TransportField,
};
use svmlab::solver::{solve_direct, solve_picard, solve_picard_from, EngineOptions, PicardStart};

fn grid(n: usize) -> PhaseGrid {
    PhaseGrid::new([-4.0, 4.0], [-4.0, 4.0], n, n).unwrap()
}

fn wavy() -> AnalyticField<impl Fn(f64, f64) -> f64 + Sync> {
    AnalyticField(|s: f64, x: f64| 0.6 * (1.3 * x - s).sin() + 0.1 * s)
}

prop_compose! {
    fn bump_data()(
        amp in 0.2f64..1.5,
        cx in -0.5f64..0.5,
        cv in -0.5f64..0.5,
        w in 0.3f64..0.8,
        smooth in any::<bool>(),
        b_amp in -0.8f64..0.8,
        b_w in 0.5f64..1.5,
    ) -> InitialDataSpec {
        let density = if smooth {
            DensityFamily::smooth_bump(amp, cx, cv, w)
        } else {
            DensityFamily::bump(amp, cx, cv, w)
        };
        InitialDataSpec { density, field: FieldFamily::new(FieldShape::Gaussian, b_amp, b_w) }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tracing_through_a_midpoint_composes(x in -2.0f64..2.0, v in -2.0f64..2.0, n in 1usize..16) {
        let f = wavy();
        let direct = trace(&f, CharState::new(x, v, 1.0), 0.0, 2 * n).unwrap();
        let mid = trace(&f, CharState::new(x, v, 1.0), 0.5, n).unwrap();
        let two = trace(&f, mid, 0.0, n).unwrap();
        prop_assert!((direct.x - two.x).abs() < 1e-12 && (direct.v - two.v).abs() < 1e-12);
    }

    #[test]
    fn forward_then_backward_returns(x in -2.0f64..2.0, v in -2.0f64..2.0) {
        let f = wavy();
        let out = trace(&f, CharState::new(x, v, 0.0), 1.0, 64).unwrap();
        let back = trace(&f, out, 0.0, 64).unwrap();
        prop_assert!((back.x - x).abs() < 1e-8 && (back.v - v).abs() < 1e-8);
    }

    #[test]
    fn constant_field_is_integrated_exactly(
        x in -3.0f64..3.0, v in -3.0f64..3.0, t in 0.1f64..2.0, frac in 0.0f64..1.0, b in -2.0f64..2.0,
    ) {
        let s = frac * t;
        let st = trace(&ConstantField(b), CharState::new(x, v, t), s, 7).unwrap();
        let (ox, ov) = constant_field_oracle(x, v, t, s, b);
        prop_assert!((st.x - ox).abs() < 1e-12 && (st.v - ov).abs() < 1e-12);
    }

    #[test]
    fn cubic_interpolation_reproduces_cubics(
        c in prop::array::uniform4(-1.0f64..1.0), q in prop::collection::vec(-2.0f64..2.0, 8),
    ) {
        let p = |x: f64| c[0] + x * (c[1] + x * (c[2] + x * c[3]));
        let b = TransportField::from_fn(Axis::new(-2.0, 2.0, 33).unwrap(), 0.0, p);
        for y in q {
            let e = (b.interpolate(y, Interpolation::Cubic).unwrap() - p(y)).abs();
            prop_assert!(e < 1e-12, "error {e} at {y}");
        }
    }

    #[test]
    fn sampling_then_interpolating_at_nodes_is_exact(
        vals in prop::collection::vec(-5.0f64..5.0, 7 * 9), mono in any::<bool>(),
    ) {
        let g = PhaseGrid::new([-1.0, 2.0], [0.0, 4.0], 7, 9).unwrap();
        let f = DensityField::new(g, vals, 0.0).unwrap();
        let mode = if mono { Interpolation::MonotoneCubic } else { Interpolation::Cubic };
        for k in 0..g.len() {
            let (x, v) = g.node(k);
            prop_assert_eq!(f.interpolate(x, v, mode), f.values()[k]);
        }
    }

    #[test]
    fn field_with_no_density_is_transported(amp in -1.0f64..1.0, w in 0.3f64..1.5, t in 0.01f64..1.0) {
        let b0 = FieldFamily::new(FieldShape::Gaussian, amp, w);
        let axis = Axis::new(-4.0, 4.0, 65).unwrap();
        let zero = |s| MomentProfile::from_fn(axis, s, |_| 0.0);
        let b = field_from_history(&b0, &[zero(0.0), zero(t)], t, t, Interpolation::Cubic).unwrap();
        for (i, x) in axis.nodes().enumerate() {
            prop_assert!((b.values()[i] - b0.value(x - t)).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn direct_engine_keeps_the_a_priori_bounds(data in bump_data()) {
        let g = grid(65);
        let dt = 1.0 / 64.0;
        let mono = EngineOptions::default().with_interpolation(Interpolation::MonotoneCubic);
        let h = solve_direct(&data, &g, 0.5, dt, &mono).unwrap();
        let f0 = data.density.sup_norm();
        for f in h.densities() {
            prop_assert!(f.sup_norm() <= f0);
            prop_assert_eq!(f.boundary_sup(), 0.0);
        }
        let tr = DiagnosticsTrace::from_history(&h);
        let supports: Vec<f64> = tr.records.iter().map(|r| r.support).collect();
        let b_sups: Vec<f64> = tr.records.iter().map(|r| r.b_sup).collect();
        prop_assert!(support_recursion_check(&supports, &b_sups, dt, g.dv()).holds);
        let c = BoundConstants::from_data(&data);
        prop_assert!(field_bound_check(&tr, &c, g.dv()).holds);
    }

    #[test]
    fn picard_keeps_sup_norm_and_envelope(data in bump_data()) {
        let g = grid(33);
        let dt = 1.0 / 32.0;
        let (h, tr) = solve_picard(&data, &g, 0.25, dt, 1e-8, 15, &EngineOptions::default()).unwrap();
        prop_assert!(tr.converged);
        let f0 = data.density.sup_norm();
        for f in h.densities() {
            prop_assert!(f.sup_norm() <= f0 + 1e-12);
        }
        let c = BoundConstants::from_data(&data);
        prop_assert!(iterate_envelope_check(&tr.supports, dt, g.dv(), &c).holds);
        for (p, b) in tr.supports.iter().zip(&tr.driving_field_sups) {
            prop_assert!(support_recursion_check(p, b, dt, g.dv()).holds);
        }
    }

    #[test]
    fn zero_parameter_scaling_is_the_identity(data in bump_data()) {
        let (f, _) = sample_initial_data(&data, &grid(33)).unwrap();
        let s = scale_density(&f, 0.0, Interpolation::Cubic).unwrap();
        prop_assert_eq!(s.grid(), f.grid());
        prop_assert_eq!(s.values(), f.values());
    }

    #[test]
    fn scalings_compose(u in -0.4f64..0.6, w in -0.4f64..0.6, t in 0.0f64..0.5) {
        let g = PhaseGrid::new([-3.0, 3.0], [-3.0, 3.0], 241, 241).unwrap();
        let f = DensityField::from_fn(g, t, |x, v| (-(x * x + v * v) / 2.0).exp());
        let twice = scale_density(&scale_density(&f, u, Interpolation::Cubic).unwrap(), w, Interpolation::Cubic)
            .unwrap();
        let once = scale_density(&f, (1.0 + u) * (1.0 + w) - 1.0, Interpolation::Cubic).unwrap();
        let og = *once.grid();
        let mut err: f64 = 0.0;
        for k in 0..twice.grid().len() {
            let (x, v) = twice.grid().node(k);
            if og.contains(x, v) {
                err = err.max((twice.values()[k] - once.interpolate(x, v, Interpolation::Cubic)).abs());
            }
        }
        prop_assert!(err < 1e-4, "composition mismatch {err}");
    }
}

#[test]
fn characteristic_flow_preserves_volume() {
    let g = PhaseGrid::new([-2.0, 2.0], [-2.0, 2.0], 65, 65).unwrap();
    let bundle = trace_backward(&g, &wavy(), 1.0, 32).unwrap();
    let mut worst: f64 = 0.0;
    for i in 1..64 {
        for j in 1..64 {
            worst = worst.max((bundle.jacobian_determinant(i, j).unwrap() - 1.0).abs());
        }
    }
    assert!(worst < 1e-2, "det deviates by {worst}");
}

#[test]
fn zero_data_stays_zero_in_both_engines() {
    let data = InitialDataSpec::zero();
    let g = grid(33);
    let h = solve_direct(&data, &g, 0.5, 1.0 / 32.0, &EngineOptions::default()).unwrap();
    let (p, tr) = solve_picard(&data, &g, 0.5, 1.0 / 32.0, 1e-8, 15, &EngineOptions::default()).unwrap();
    assert!(tr.converged);
    for hist in [&h, &p] {
        assert!(hist.densities().iter().all(|f| f.sup_norm() == 0.0));
        assert!(hist.fields().iter().all(|b| b.sup_norm() == 0.0));
    }
}

#[test]
fn picard_limit_does_not_depend_on_the_first_iterate() {
    let data = InitialDataSpec {
        density: DensityFamily::bump(1.0, 0.0, 0.0, 0.5),
        field: FieldFamily::new(FieldShape::Gaussian, 0.5, 1.0),
    };
    let g = grid(65);
    let opts = EngineOptions::default();
    let run = |s| solve_picard_from(s, &data, &g, 0.5, 1.0 / 64.0, 1e-10, 20, &opts).unwrap().0;
    let a = run(PicardStart::Frozen);
    let b = run(PicardStart::Transported);
    assert!(a.field_distance(&b).unwrap() < 1e-8);
    assert!(a.density_distance(&b).unwrap() < 1e-8);
}

#[test]
fn engines_agree_on_smooth_data() {
    let data = InitialDataSpec {
        density: DensityFamily::smooth_bump(1.0, 0.0, 0.0, 0.75),
        field: FieldFamily::new(FieldShape::Gaussian, 0.5, 1.0),
    };
    let g = grid(129);
    let dt = 1.0 / 128.0;
    let (p, _) = solve_picard(&data, &g, 0.5, dt, 1e-10, 20, &EngineOptions::default()).unwrap();
    let d = solve_direct(&data, &g, 0.5, dt, &EngineOptions::default()).unwrap();
    let tol = 10.0 * (dt * dt + g.dx().powi(3));
    let diff = p.field_distance(&d).unwrap();
    assert!(diff < tol, "engines differ by {diff}, tolerance {tol}");
}

#[test]
fn smooth_field_has_vanishing_holder_quotients() {
    let axis = Axis::new(-4.0, 4.0, 513).unwrap();
    let levels: Vec<TransportField> = (0..65)
        .map(|k| {
            let t = k as f64 / 64.0;
            TransportField::from_fn(axis, t, |x| (x - 0.5 * t).sin())
        })
        .collect();
    let offsets = [1usize, 2, 4, 8, 16];
    let rows: Vec<f64> = offsets
        .iter()
        .map(|&m| holder_quotient(&levels, 1.0 / 64.0, &[m], &[]).unwrap().max_space_quotient())
        .collect();
    for w in rows.windows(2) {
        assert!(w[1] > w[0], "quotient should grow with the offset: {rows:?}");
    }
    assert!(rows[0] < 0.2, "finest quotient {}", rows[0]);
}
