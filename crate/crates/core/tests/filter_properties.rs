use nalgebra::{Matrix2, Vector2};
use proptest::prelude::*;
use tiltphase::filters::{
    smooth_deadband, smooth_deadband_ellip, soft_coerce_ellip, soft_coerce_magnitude, BoundedIntegrator, Ellipsoid,
    MeanFilter, SoftEllipse, WeightProfile, WlbfFilter,
};

/// Weighted least squares line through `(t, x)` by the normal equations, evaluated at `t_eval`.
fn normal_equations_fit(samples: &[(f64, f64)], weights: &[f64], t_eval: f64) -> (f64, f64) {
    let t0 = samples[0].0;
    let mut a = Matrix2::zeros();
    let mut b = Vector2::zeros();
    for (&(t, x), &w) in samples.iter().zip(weights) {
        let row = Vector2::new(1.0, t - t0);
        a += w * row * row.transpose();
        b += w * x * row;
    }
    let coef = a.lu().solve(&b).expect("regular normal equations");
    (coef[0] + coef[1] * (t_eval - t0), coef[1])
}

fn profile() -> impl Strategy<Value = WeightProfile> {
    prop_oneof![
        Just(WeightProfile::Uniform),
        Just(WeightProfile::LinearRecency),
        prop::collection::vec(0.1f64..3.0, 1..12).prop_map(WeightProfile::Custom),
    ]
}

fn ellipse() -> impl Strategy<Value = ([f64; 2], f64)> {
    (0.05f64..2.0, 0.05f64..2.0, 0.05f64..0.95).prop_map(|(a, b, frac)| ([a, b], frac * a.min(b)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn wlbf_matches_normal_equations(
        capacity in 2usize..16,
        profile in profile(),
        t0 in 0.0f64..5.0,
        gaps in prop::collection::vec(0.005f64..0.05, 2..30),
        values in prop::collection::vec(prop::array::uniform2(-1.0f64..1.0), 30),
    ) {
        let mut f = WlbfFilter::<2>::new(capacity, profile.clone()).unwrap();
        let mut t = t0;
        let mut history = Vec::new();
        for (gap, x) in gaps.iter().zip(values.iter()) {
            t += gap;
            history.push((t, *x));
            let out = f.step(t, *x).unwrap();
            let window = &history[history.len().saturating_sub(capacity)..];
            let len = window.len();
            let weights: Vec<f64> = (0..len).map(|i| profile.weight(len - 1 - i, len)).collect();
            for k in 0..2 {
                let series: Vec<(f64, f64)> = window.iter().map(|(t, x)| (*t, x[k])).collect();
                if len < 2 {
                    prop_assert_eq!(out.value[k], x[k]);
                    prop_assert_eq!(out.slope[k], 0.0);
                    continue;
                }
                let (value, slope) = normal_equations_fit(&series, &weights, t);
                prop_assert!((out.value[k] - value).abs() < 1e-9 * value.abs().max(1.0));
                prop_assert!((out.slope[k] - slope).abs() < 1e-9 * slope.abs().max(1.0));
                let (mean_value, _) = normal_equations_fit(&series, &weights, out.mean_time);
                prop_assert!((out.mean_time_value[k] - mean_value).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn mean_filter_matches_window_mean(
        order in 1usize..20,
        values in prop::collection::vec(-10.0f64..10.0, 1..60),
    ) {
        let mut f = MeanFilter::<1>::new(order).unwrap();
        for (n, v) in values.iter().enumerate() {
            let out = f.step([*v])[0];
            let window = &values[(n + 1).saturating_sub(order)..=n];
            let mean = window.iter().sum::<f64>() / window.len() as f64;
            prop_assert!((out - mean).abs() < 1e-12);
        }
    }

    #[test]
    fn soft_coercion_stays_strictly_inside(
        (axes, buffer) in ellipse(),
        x in prop::array::uniform2(-50.0f64..50.0),
        scale in prop::sample::select(vec![1e-3, 1.0, 1e3, 1e8]),
    ) {
        let e = Ellipsoid::new(axes).unwrap();
        let x = [x[0] * scale, x[1] * scale];
        let y = soft_coerce_ellip(&x, &e, buffer);
        prop_assert!(e.level(&y) < 1.0);
        // radial: output is a non-negative multiple of the input
        prop_assert!(x[0] * y[1] - x[1] * y[0] <= 1e-12 * (x[0].abs() + x[1].abs()) * (y[0].abs() + y[1].abs()));
        prop_assert!(x[0] * y[0] + x[1] * y[1] >= 0.0);
    }

    #[test]
    fn soft_coercion_is_monotone_along_rays(
        (axes, buffer) in ellipse(),
        angle in -std::f64::consts::PI..std::f64::consts::PI,
        m in 0.0f64..5.0,
        dm in 1e-6f64..1.0,
    ) {
        let e = Ellipsoid::new(axes).unwrap();
        let dir = [angle.cos(), angle.sin()];
        let out = |m: f64| {
            let y = soft_coerce_ellip(&[m * dir[0], m * dir[1]], &e, buffer);
            y[0].hypot(y[1])
        };
        // the rescale can round by an ulp once saturated
        prop_assert!(out(m + dm) >= out(m) - 4.0 * f64::EPSILON * e.max_semi_axis());
    }

    #[test]
    fn soft_coercion_is_c1(radius in 0.1f64..3.0, frac in 0.05f64..0.95, offset in -3.0f64..3.0) {
        let buffer = frac * radius;
        let knee = radius - buffer;
        let x = (knee + offset * buffer).max(1e-3);
        let h = 1e-6;
        let left = (soft_coerce_magnitude(x, radius, buffer) - soft_coerce_magnitude(x - h, radius, buffer)) / h;
        let right = (soft_coerce_magnitude(x + h, radius, buffer) - soft_coerce_magnitude(x, radius, buffer)) / h;
        prop_assert!((left - right).abs() < 1e-4);
        // junction itself
        let left = (soft_coerce_magnitude(knee, radius, buffer) - soft_coerce_magnitude(knee - h, radius, buffer)) / h;
        let right = (soft_coerce_magnitude(knee + h, radius, buffer) - soft_coerce_magnitude(knee, radius, buffer)) / h;
        prop_assert!((left - right).abs() < 1e-4);
        prop_assert!((left - 1.0).abs() < 1e-4);
    }

    #[test]
    fn smooth_deadband_is_c1(r in 0.01f64..2.0, s in -4.0f64..4.0) {
        let h = 1e-7;
        for x in [s * r, 2.0 * r, -2.0 * r, 0.0] {
            let left = (smooth_deadband(x, r) - smooth_deadband(x - h, r)) / h;
            let right = (smooth_deadband(x + h, r) - smooth_deadband(x, r)) / h;
            prop_assert!((left - right).abs() < 1e-4);
        }
        let far = 10.0 * r;
        prop_assert!((smooth_deadband(far, r) - (far - r)).abs() < 1e-12);
        prop_assert!(smooth_deadband(s * r, r).abs() <= (s * r).abs());
    }

    #[test]
    fn elliptical_deadband_uses_directional_radius(
        axes in prop::array::uniform2(0.05f64..1.0),
        angle in -std::f64::consts::PI..std::f64::consts::PI,
        m in 0.0f64..4.0,
    ) {
        let e = Ellipsoid::new(axes).unwrap();
        let dir = [angle.cos(), angle.sin()];
        let r = e.radius_along(&dir);
        let y = smooth_deadband_ellip(&[m * dir[0], m * dir[1]], &e);
        prop_assert!((y[0].hypot(y[1]) - smooth_deadband(m, r)).abs() < 1e-12);
    }

    #[test]
    fn off_axis_radius_below_max_semi_axis(
        a in 0.05f64..2.0,
        ratio in 1.01f64..5.0,
        angle in 0.01f64..(std::f64::consts::FRAC_PI_2 - 0.01),
    ) {
        let e = Ellipsoid::new([a, a * ratio]).unwrap();
        let r = e.radius_along(&[angle.cos(), angle.sin()]);
        prop_assert!(r < e.max_semi_axis());
        prop_assert!(r > e.min_semi_axis());
    }

    #[test]
    fn integrator_never_exits_ellipse(
        (axes, buffer) in ellipse(),
        inputs in prop::collection::vec(prop::array::uniform2(-100.0f64..100.0), 1..200),
        dt in 1e-3f64..0.1,
    ) {
        let bound = SoftEllipse::new(axes, buffer).unwrap();
        let mut i = BoundedIntegrator::new(bound);
        for u in inputs {
            let y = i.step(u, dt);
            prop_assert!(bound.contains(&y));
        }
    }
}

#[test]
fn integrator_fuzz_long_sequence() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let bound = SoftEllipse::new([0.5, 1.5], 0.3).unwrap();
    let mut i = BoundedIntegrator::new(bound);
    for _ in 0..100_000 {
        let u = [rng.random_range(-20.0..20.0), rng.random_range(-20.0..20.0)];
        let y = i.step(u, rng.random_range(1e-4..0.05));
        assert!(bound.contains(&y), "{y:?}");
    }
}
