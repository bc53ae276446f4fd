//! Property tests for the flow, the section maps and the solver family,
//! plus the slower invariants that don't warrant a place in the acceptance
//! gate.

use nalgebra::DVector;
use proptest::prelude::*;

use shilnikov::fixed_points::{leading_fixed_point, refine_fixed_point};
use shilnikov::global_map::{analytic_jacobian, constraint_value, map_p10};
use shilnikov::local_dynamics::{flight_time, local_flow, map_p01, Sigma0Point, Sigma1Point};
use shilnikov::model::{default_model, load_model_str, save_model, validate_model, StateVec};
use shilnikov::symbols::SymbolWord;

fn m0() -> shilnikov::ModelSpec {
    default_model()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    /// Semigroup law of the closed-form flow, for windows that keep the
    /// whole transit inside the linearization box.
    #[test]
    fn flow_composes(
        x in -1e-4f64..1e-4,
        y in -1e-4f64..1e-4,
        z in 1e-9f64..1e-7,
        vp in -1e-8f64..1e-8,
        vm in -1e-5f64..1e-5,
        t1 in -2.0f64..2.0,
        t2 in -2.0f64..2.0,
    ) {
        let spec = m0();
        let w = StateVec {
            x,
            y,
            z,
            v_plus: DVector::from_column_slice(&[vp]),
            v_minus: DVector::from_column_slice(&[vm]),
        };
        let direct = local_flow(&w, t1 + t2, &spec).unwrap();
        let step = local_flow(&w, t1, &spec).unwrap();
        let composed = local_flow(&step, t2, &spec).unwrap();
        // The focus pair rotates, so compare it at the block scale; the
        // remaining coordinates are pure exponentials.
        let xy_scale = direct.x.hypot(direct.y).max(1e-300);
        prop_assert!((direct.x - composed.x).abs() <= 1e-12 * xy_scale);
        prop_assert!((direct.y - composed.y).abs() <= 1e-12 * xy_scale);
        let scale = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300);
        prop_assert!(scale(direct.z, composed.z));
        prop_assert!(scale(direct.v_plus[0], composed.v_plus[0]));
        prop_assert!(scale(direct.v_minus[0], composed.v_minus[0]));
    }

    /// `z` grows strictly along the flow when it starts positive.
    #[test]
    fn z_is_monotone_along_the_flow(
        z in 1e-6f64..1e-2,
        t in 0.01f64..2.0,
    ) {
        let spec = m0();
        let w = StateVec {
            x: 0.07,
            y: 0.0,
            z,
            v_plus: DVector::zeros(1),
            v_minus: DVector::zeros(1),
        };
        let later = local_flow(&w, t, &spec).unwrap();
        prop_assert!(later.z > w.z);
    }

    /// Superposition of the global map at zero quadratic scale.
    #[test]
    fn p10_is_linear_without_quad(
        coords in proptest::array::uniform5(-0.02f64..0.02),
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
    ) {
        let mut spec = m0();
        spec.global_map.quad_scale = 0.0;
        let p = Sigma1Point::from_vector(&DVector::from_column_slice(&coords), &spec);
        let q_coords: Vec<f64> = coords.iter().map(|c| c * 0.37 + 1e-3).collect();
        let q = Sigma1Point::from_vector(&DVector::from_column_slice(&q_coords), &spec);
        let combo = Sigma1Point::from_vector(
            &(p.to_vector() * a + q.to_vector() * b),
            &spec,
        );
        let (image_combo, _) = map_p10(&combo, &spec);
        let (image_p, _) = map_p10(&p, &spec);
        let (image_q, _) = map_p10(&q, &spec);
        let expected = image_p.to_vector() * a + image_q.to_vector() * b;
        prop_assert!((image_combo.to_vector() - expected).norm() <= 1e-12);
    }

    /// The local map lands on the section: the constraint vanishes at the
    /// image within the root tolerance, the radius law holds, and the
    /// contracted blocks obey their exponential bounds.
    #[test]
    fn p01_lands_on_section_with_contracted_blocks(
        x0 in -0.01f64..0.02,
        z0 in 1e-5f64..5e-3,
        vp_t in -0.3f64..0.3,
        vm0 in -0.05f64..0.05,
    ) {
        let spec = m0();
        // Slave v⁺ to the flight scale so long flights stay admissible.
        let t_hat = (spec.geometry.eta / z0).ln() / spec.spectrum.gamma;
        let vp0 = (-spec.spectrum.lambda_plus[0] * t_hat).exp()
            * (spec.geometry.v_star_plus[0] * (1.0 + vp_t));
        let w = Sigma0Point {
            x0,
            z0,
            v_plus0: DVector::from_column_slice(&[vp0]),
            v_minus0: DVector::from_column_slice(&[vm0]),
        };
        if let Ok((p1, t_star)) = map_p01(&w, &spec) {
            prop_assert!(constraint_value(&p1, &spec).abs() <= spec.tolerances.root_tol);
            let radius = (-spec.spectrum.alpha * t_star).exp() * (x0 + spec.geometry.x_star);
            prop_assert!((p1.x1.hypot(p1.y1) - radius).abs() <= 1e-12 * radius.abs());
            let xy_bound = (-spec.spectrum.alpha * t_star).exp()
                * (spec.geometry.eta + spec.geometry.x_star.abs());
            prop_assert!(p1.x1.hypot(p1.y1) <= xy_bound);
            let vm_bound = (-spec.spectrum.lambda_minus[0] * t_star).exp()
                * 2.0
                * spec.geometry.eta;
            prop_assert!(p1.v_minus1.norm() <= vm_bound);
        }
    }

    /// Reading the anchor after `j` shifts recovers the j-th future bit.
    #[test]
    fn shift_reads_future_bits(bits in proptest::collection::vec(0u8..2, 7..12)) {
        let word = SymbolWord::new(vec![0, 1], bits[0], bits[1..].to_vec()).unwrap();
        let mut current = word.clone();
        for j in 1..word.future_len() {
            current = current.shift().unwrap();
            prop_assert_eq!(current.anchor(), word.bit(j as i64).unwrap());
        }
    }

    /// Structural round trip for jittered valid models.
    #[test]
    fn model_json_round_trips(
        jitter in proptest::array::uniform4(-0.05f64..0.05),
        scale in 0.5f64..2.0,
    ) {
        let mut spec = m0();
        spec.global_map.a[0][2] += jitter[0];
        spec.global_map.a[1][0] += jitter[1];
        spec.global_map.a[2][4] += jitter[2];
        spec.global_map.a[3][1] += jitter[3];
        for b in &mut spec.global_map.b {
            *b *= scale;
        }
        let text = serde_json::to_string_pretty(&spec).unwrap();
        let back = load_model_str(&text).unwrap();
        prop_assert_eq!(spec, back);
    }
}

#[test]
fn save_load_file_round_trip() {
    let spec = m0();
    let dir = std::env::temp_dir().join(format!("shilnikov-core-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("m0-roundtrip.json");
    save_model(&spec, &path).unwrap();
    let back = shilnikov::model::load_model(&path).unwrap();
    assert_eq!(spec, back);
}

#[test]
fn validate_model_is_pure() {
    let spec = m0();
    let a = serde_json::to_string(&validate_model(&spec)).unwrap();
    let b = serde_json::to_string(&validate_model(&spec)).unwrap();
    assert_eq!(a, b);
}

#[test]
fn shipped_configs_match_the_builtin_models() {
    let root = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../..");
    let m0_file = shilnikov::model::load_model(root.join("configs/m0.json")).unwrap();
    assert_eq!(m0_file, default_model());
    let m1_file = shilnikov::model::load_model(root.join("configs/m1.json")).unwrap();
    assert_eq!(m1_file, shilnikov::model::model_m1());
}

/// Eigenvalue moduli of the return-map derivative at converged fixed points
/// stay away from the unit circle. The exact chain-rule derivative is used:
/// at slab scale the v⁺ coordinates sit far below any fixed
/// finite-difference step.
#[test]
fn fixed_points_are_hyperbolic() {
    let spec = m0();
    for ell in 8..=14 {
        let record = refine_fixed_point(ell, &spec).unwrap();
        assert!(record.converged);
        let (jac, _) = analytic_jacobian(&record.raw, &spec).unwrap();
        for lambda in jac.complex_eigenvalues().iter() {
            let modulus = lambda.norm();
            assert!(
                !(0.9..=1.1).contains(&modulus),
                "eigenvalue modulus {modulus} too close to 1 at index {ell}"
            );
        }
    }
}

/// With the quadratic corrections off, the Newton solution approaches the
/// leading-order seed: the rescaled-coordinate distance decays monotonically
/// over the verified tail.
#[test]
fn newton_approaches_the_leading_seed() {
    let mut spec = m0();
    spec.global_map.quad_scale = 0.0;
    let mut previous = f64::INFINITY;
    for ell in (20..=44).step_by(4) {
        let seed = leading_fixed_point(ell, &spec).unwrap();
        let record = refine_fixed_point(ell, &spec).unwrap();
        assert!(record.converged);
        let distance = ((record.coords.x0_hat - seed.x0_hat).powi(2)
            + (record.coords.z1_hat - seed.z1_hat).powi(2)
            + (record.coords.vp1_hat[0] - seed.vp1_hat[0]).powi(2)
            + (record.coords.vm0_hat[0] - seed.vm0_hat[0]).powi(2))
        .sqrt()
            + (record.t_ell - seed.t_star).abs();
        assert!(
            distance < previous,
            "seed distance not decaying at {ell}: {distance} vs {previous}"
        );
        previous = distance;
    }
}

/// Phase consistency of the solved return times: `sin(beta T + phi)`
/// approaches zero along the family.
#[test]
fn phase_consistency_at_large_indices() {
    let spec = m0();
    let lod = shilnikov::fixed_points::leading_order_data(&spec).unwrap();
    let record = refine_fixed_point(52, &spec).unwrap();
    assert!(record.converged);
    let value = (spec.spectrum.beta * record.t_ell + lod.phi).sin().abs();
    assert!(value <= 1e-3, "sin(beta T + phi) = {value}");
}

/// Flights from `Σ0` are found by bracketing within the admissible window;
/// the first root is the one returned (spot-checked against a fine scan).
#[test]
fn flight_bracket_contains_the_first_root() {
    let spec = m0();
    let w = Sigma0Point {
        x0: 0.005,
        z0: 0.02,
        v_plus0: DVector::from_column_slice(&[2e-3]),
        v_minus0: DVector::from_column_slice(&[1e-3]),
    };
    let flight = flight_time(&w, &spec).unwrap();
    let (t_min, _) = shilnikov::local_dynamics::flight_window(&w, &spec);
    let steps = 200_000;
    let mut prev = shilnikov::local_dynamics::flight_constraint(&w, t_min, &spec);
    for i in 1..=steps {
        let t = t_min + (flight.t_star - t_min) * (i as f64 / steps as f64) * 0.9999;
        let value = shilnikov::local_dynamics::flight_constraint(&w, t, &spec);
        assert!(
            prev.signum() == value.signum(),
            "earlier sign change at t = {t}, before t* = {}",
            flight.t_star
        );
        prev = value;
    }
}

/// Shadow-point distance for words agreeing on `|k| < j` contracts
/// geometrically; the fitted constant is reported.
#[test]
fn window_agreement_contracts_distances() {
    let spec = m0();
    let hs = shilnikov::Horseshoe::new(4, &spec).unwrap();
    let report = hs.sensitivity(6).unwrap();
    let mut ratios = Vec::new();
    for pair in report.rows.windows(2) {
        ratios.push(pair[1].delta / pair[0].delta);
    }
    let rho = ratios.iter().cloned().fold(0.0f64, f64::max);
    assert!(rho < 1.0, "no geometric contraction: ratios {ratios:?}");
    let fitted_c = report
        .rows
        .iter()
        .map(|row| row.delta / rho.powi(row.j as i32))
        .fold(0.0f64, f64::max);
    println!("window-topology fit: rho = {rho:.3e}, C = {fitted_c:.3e}");
    assert!(fitted_c.is_finite() && fitted_c > 0.0);
}

/// Raising the quadratic corrections until the homoclinic geometry is
/// destroyed must never produce a false certificate: the pipeline either
/// refuses to build the slab or returns a non-pass verdict.
#[test]
fn destroyed_structure_never_passes() {
    let mut stressed = m0();
    stressed.global_map.quad_scale = 1e3;
    match shilnikov::Horseshoe::new(5, &stressed) {
        Err(_) => {}
        Ok(hs) => match hs.verify_conley_moser(42) {
            Err(_) => {}
            Ok(report) => assert_ne!(
                report.verdict,
                shilnikov::Verdict::Pass,
                "stress run must not certify: {report:?}"
            ),
        },
    }
}
