use odeco_frames::energy::FieldState;
use odeco_frames::mesh::generate::disk;
use odeco_frames::odeco::{q_from_parts, tensor_from_q, Frame2, SymTensor4};
use odeco_frames::param::{compute_matchings, detect_singularities};
use odeco_frames::verification::{
    basis_change_oracle, convergence_experiment, max_lie_integrand, observed_order, polar_singular_field,
    sample_field, sensitivity_errors, tracked_eigenpair, AnalyticField,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STEPS: [f64; 4] = [4e-3, 2e-3, 1e-3, 5e-4];

fn random_odeco(rng: &mut ChaCha8Rng) -> (SymTensor4, Frame2) {
    let f = Frame2::new(rng.gen_range(0.0..1.5), rng.gen_range(0.5..3.0), rng.gen_range(0.5..3.0)).unwrap();
    (tensor_from_q(&q_from_parts(f.phi, f.lambda, f.mu)), f)
}

#[test]
fn unperturbed_eigenpair_is_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let (t, f) = random_odeco(&mut rng);
        let (lam, w) = tracked_eigenpair(&t, f.phi + 0.05);
        assert!((lam - f.lambda).abs() < 1e-10, "{lam} vs {}", f.lambda);
        let u = f.u_hat();
        assert!((w[0] * u[1] - w[1] * u[0]).abs() < 1e-8);
    }
}

#[test]
fn sensitivity_is_second_order_for_rank_one_and_random_perturbations() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for trial in 0..20 {
        let (t, f) = random_odeco(&mut rng);
        let dt = if trial % 2 == 0 {
            let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            SymTensor4::rank_one([a.cos(), a.sin()]).scaled(rng.gen_range(0.5..2.0))
        } else {
            SymTensor4::from_array(std::array::from_fn(|_| rng.gen_range(-1.0..1.0)))
        };
        let errs = sensitivity_errors(&t, &dt, f.u_hat(), &STEPS);
        let order = observed_order(&STEPS, &errs);
        assert!(order >= 1.9, "trial {trial}: order {order}, errors {errs:?}");
    }
}

#[test]
fn analytic_singularities_are_detected_once() {
    let m = disk(1.0, 3);
    for (i, quarter) in [(0.25, 1), (-0.25, -1)] {
        let frames: Vec<Frame2> = m.nodes().iter().map(|&p| polar_singular_field(i, p).unwrap()).collect();
        let s = detect_singularities(&m, &compute_matchings(&m, &frames));
        assert_eq!(s.len(), 1, "index {i}: {s:?}");
        assert_eq!(s[0].quarter_turns, quarter);
        let tri = m.triangles()[s[0].triangle];
        let c = tri.iter().fold([0.0; 2], |a, &v| [a[0] + m.node(v)[0] / 3.0, a[1] + m.node(v)[1] / 3.0]);
        assert!(c[0].hypot(c[1]) < 2.0 * m.max_edge_length());
    }
    let constant = vec![Frame2::new(0.3, 1.0, 2.0).unwrap(); m.num_nodes()];
    assert!(detect_singularities(&m, &compute_matchings(&m, &constant)).is_empty());
}

#[test]
fn singular_field_energy_is_bounded_and_ordered() {
    let meshes: Vec<_> = (2..=4).map(|l| disk(1.0, l)).collect();
    let three = convergence_experiment(0.25, &meshes).unwrap();
    let five = convergence_experiment(-0.25, &meshes).unwrap();
    for rows in [&three, &five] {
        let n = rows.len();
        let change = (rows[n - 1].e_lie - rows[n - 2].e_lie).abs() / rows[n - 2].e_lie;
        assert!(change < 0.1, "{rows:?}");
        assert!(rows.windows(2).all(|w| w[1].max_h > w[0].max_h && w[1].h < w[0].h));
    }
    for (a, b) in three.iter().zip(&five) {
        assert!(b.e_lie > a.e_lie);
    }
}

#[test]
fn smooth_and_constant_fields() {
    let m = disk(1.0, 3);
    let s: FieldState = sample_field(&m, &AnalyticField::Constant { phi: 0.2, lambda: 1.0, mu: 3.0 }).unwrap();
    assert!(max_lie_integrand(&m, &s) < 1e-20);
    let r = sample_field(&m, &AnalyticField::RigidRotation { angle: 1.0, size: 2.0 }).unwrap();
    assert!(max_lie_integrand(&m, &r) < 1e-20);
    let zero = polar_singular_field(0.0, [0.4, 0.1]).unwrap();
    assert_eq!((zero.lambda, zero.mu), (1.0, 1.0));
    let smooth = AnalyticField::RandomSmooth { seed: 5 };
    let (q, g) = smooth.q_and_grad([0.3, -0.2]).unwrap();
    let h = 1e-6;
    let (qp, _) = smooth.q_and_grad([0.3 + h, -0.2]).unwrap();
    let (qm, _) = smooth.q_and_grad([0.3 - h, -0.2]).unwrap();
    for j in 0..5 {
        assert!(((qp[j] - qm[j]) / (2.0 * h) - g[j][0]).abs() < 1e-6 * (1.0 + q[j].abs()));
    }
}

#[test]
fn basis_change_matrices() {
    let r = basis_change_oracle();
    assert!(r.passed(1e-12), "{r:?}");
}
