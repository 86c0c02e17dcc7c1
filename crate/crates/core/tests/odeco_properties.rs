use std::f64::consts::{FRAC_PI_2, PI};

use odeco_frames::odeco::{
    area, eval_poly, extract_frame, odeco_residuals, project_odeco, q_from_frame, q_from_parts, q_from_tensor,
    tensor_from_q,
};
use odeco_frames::{Frame2, OdecoQ};
use proptest::prelude::*;

fn dist(a: &OdecoQ, b: &OdecoQ) -> f64 {
    (*a - *b).norm()
}

prop_compose! {
    fn frame()(phi in -PI..PI, lambda in 0.05f64..20.0, ratio in 0.05f64..20.0) -> Frame2 {
        Frame2::new(phi, lambda, lambda * ratio).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn frames_lie_on_the_variety(f in frame()) {
        let q = q_from_frame(&f).unwrap();
        let scale = q.norm() * q.norm();
        for r in odeco_residuals(&q) {
            prop_assert!(r.abs() <= 1e-12 * scale);
        }
        prop_assert!((area(&q) - f.area()).abs() <= 1e-12 * scale);
    }

    #[test]
    fn polynomial_takes_the_sizes_along_the_axes(f in frame()) {
        let q = q_from_frame(&f).unwrap();
        let tol = 1e-12 * q.norm();
        prop_assert!((eval_poly(&q, f.phi) - f.lambda).abs() <= tol);
        prop_assert!((eval_poly(&q, f.phi + FRAC_PI_2) - f.mu).abs() <= tol);
    }

    #[test]
    fn extraction_recovers_the_tensor(f in frame()) {
        let q = q_from_frame(&f).unwrap();
        let g = extract_frame(&q).unwrap();
        prop_assert!(dist(&q_from_frame(&g).unwrap(), &q) <= 1e-10 * q.norm());
        prop_assert!((0.0..FRAC_PI_2).contains(&g.phi));
    }

    #[test]
    fn tensor_round_trip(q in prop::array::uniform5(-5.0f64..5.0)) {
        let q = OdecoQ(q);
        prop_assert!(dist(&q_from_tensor(&tensor_from_q(&q)), &q) <= 1e-12 * (1.0 + q.norm()));
    }

    #[test]
    fn projection_is_at_least_as_close_as_the_source(f in frame(), noise in prop::array::uniform5(-1.0f64..1.0), amp in 0.0f64..0.05) {
        let q = q_from_frame(&f).unwrap();
        let noisy = q + amp * q.norm() * OdecoQ(noise);
        // thin frames can be pushed off the positive-area side
        prop_assume!(area(&noisy) > 0.0);
        let p = project_odeco(&noisy).unwrap();
        prop_assert!(dist(&noisy, &p.q) <= dist(&noisy, &q) * (1.0 + 1e-9) + 1e-14);
        let again = project_odeco(&p.q).unwrap();
        prop_assert!(dist(&again.q, &p.q) <= 1e-10 * p.q.norm());
    }
}

#[test]
fn sizes_enter_linearly() {
    let (phi, a, b) = (0.37, [1.5, 0.4], [0.2, 2.5]);
    let lhs = q_from_parts(phi, a[0] + 2.0 * b[0], a[1] + 2.0 * b[1]);
    let rhs = q_from_parts(phi, a[0], a[1]) + 2.0 * q_from_parts(phi, b[0], b[1]);
    assert!(dist(&lhs, &rhs) < 1e-14);
}
