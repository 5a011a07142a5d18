use nalgebra::{Quaternion as NaQuaternion, UnitQuaternion, Vector3};
use proptest::prelude::*;
use tiltphase::deviation::{deviation_tilt, fit_axis_waveform, swing_plane_tilt, AxisWaveform};
use tiltphase::rotation::TiltPhase2D;

fn tilt_quat(p: TiltPhase2D) -> UnitQuaternion<f64> {
    let alpha = p.norm();
    if alpha == 0.0 {
        return UnitQuaternion::identity();
    }
    UnitQuaternion::from_axis_angle(&nalgebra::Unit::new_normalize(Vector3::new(p.px, p.py, 0.0)), alpha)
}

fn fused_yaw(q: &UnitQuaternion<f64>) -> f64 {
    let m = q.to_rotation_matrix();
    let m = m.matrix();
    (m[(1, 0)] - m[(0, 1)]).atan2(m[(0, 0)] + m[(1, 1)])
}

/// Relative rotation of the deviation problem, built independently of the crate.
fn deviation_rotation(p_b: TiltPhase2D, p_e: TiltPhase2D, py_n: f64, psi: f64) -> UnitQuaternion<f64> {
    let qy = |a: f64| UnitQuaternion::from_axis_angle(&Vector3::y_axis(), a);
    let qz = UnitQuaternion::from_axis_angle(&Vector3::z_axis(), psi);
    qy(py_n) * tilt_quat(p_b).inverse() * qz * tilt_quat(p_e) * qy(-py_n)
}

fn tilt() -> impl Strategy<Value = TiltPhase2D> {
    (prop::array::uniform2(-0.8f64..0.8)).prop_map(TiltPhase2D::from_array)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(3000))]

    #[test]
    fn yaw_residual_vanishes(p_b in tilt(), p_e in tilt(), py_n in -0.5f64..0.5) {
        let d = deviation_tilt(p_b, p_e, py_n);
        prop_assert!(d.converged);
        let q = deviation_rotation(p_b, p_e, py_n, d.psi_e);
        prop_assert!(fused_yaw(&q).abs() <= 1e-10);
        // P_d is the tilt phase of q_d^-1
        let inv = q.inverse();
        let na: NaQuaternion<f64> = inv.into_inner();
        let (w, v) = (na.w.abs(), if na.w < 0.0 { -na.imag() } else { na.imag() });
        let alpha = 2.0 * v.norm().atan2(w);
        let gamma = v.y.atan2(v.x);
        prop_assert!((d.pd.px - alpha * gamma.cos()).abs() < 1e-10);
        prop_assert!((d.pd.py - alpha * gamma.sin()).abs() < 1e-10);
    }

    #[test]
    fn no_expectation_no_pitch_gives_body_tilt(p_b in tilt()) {
        let d = deviation_tilt(p_b, TiltPhase2D::ZERO, 0.0);
        prop_assert!((d.pd - p_b).norm() < 1e-10);
    }

    #[test]
    fn matching_expectation_gives_zero(p in tilt(), py_n in -0.5f64..0.5) {
        prop_assert!(deviation_tilt(p, p, py_n).pd.norm() < 1e-10);
        prop_assert!(swing_plane_tilt(p, p, py_n).norm() < 1e-10);
    }

    #[test]
    fn deviation_is_continuous(p_b in tilt(), p_e in tilt(), py_n in -0.5f64..0.5, dir in prop::array::uniform2(-1.0f64..1.0)) {
        let h = 1e-7;
        let a = deviation_tilt(p_b, p_e, py_n).pd;
        let b = deviation_tilt(p_b + TiltPhase2D::from_array(dir) * h, p_e, py_n).pd;
        prop_assert!((a - b).norm() < 1e-5);
    }

    #[test]
    fn lateral_deviation_sign_follows_body_tilt(px in -0.6f64..0.6, e in -0.05f64..0.05) {
        prop_assume!((px - e).abs() > 1e-6);
        let d = deviation_tilt(TiltPhase2D::new(px, 0.0), TiltPhase2D::new(e, 0.0), 0.0);
        prop_assert_eq!(d.pd.px.signum(), (px - e).signum());
        prop_assert!((d.pd.px - (px - e)).abs() < 1e-10);
    }

    #[test]
    fn waveform_fit_recovers_parameters(a in 0.01f64..0.2, phase in -3.0f64..3.0, c in -0.1f64..0.1) {
        let w = AxisWaveform { amplitude: a, phase, offset: c };
        let samples: Vec<(f64, f64)> = (0..400).map(|k| {
            let mu = -std::f64::consts::PI + k as f64 * 0.0157;
            (mu, w.eval(mu))
        }).collect();
        let fit = fit_axis_waveform(&samples).unwrap();
        prop_assert!((fit.waveform.amplitude - a).abs() < 1e-10);
        prop_assert!((fit.waveform.offset - c).abs() < 1e-10);
        prop_assert!(tiltphase::rotation::wrap_angle(fit.waveform.phase - phase).abs() < 1e-8);
        prop_assert!(fit.residual_rms < 1e-10);
    }
}

#[test]
fn lateral_deviation_has_single_sign_change() {
    let p_e = TiltPhase2D::new(0.02, -0.03);
    let mut changes = 0;
    let mut prev = None;
    for k in 0..=2000 {
        let px = -0.5 + k as f64 * 0.0005;
        let d = deviation_tilt(TiltPhase2D::new(px, -0.03), p_e, 0.1).pd.px;
        if let Some(p) = prev {
            if (d > 0.0) != (p > 0.0) {
                changes += 1;
            }
        }
        prev = Some(d);
    }
    assert_eq!(changes, 1);
}
