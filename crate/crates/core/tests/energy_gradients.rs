use odeco_frames::energy::{e_dirichlet, e_lie, e_odeco, e_total, Energy, EnergyParams, FieldState};
use odeco_frames::mesh::generate::unit_square;
use odeco_frames::odeco::{q_from_parts, OdecoQ};
use odeco_frames::TriMesh;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Smooth non-odeco field with positive area everywhere.
fn random_state(mesh: &TriMesh, rng: &mut ChaCha8Rng, iso: bool) -> FieldState {
    let k: [f64; 6] = std::array::from_fn(|_| rng.gen_range(-1.5..1.5));
    let mut s = FieldState::zeros(mesh.num_nodes(), iso);
    for n in 0..mesh.num_nodes() {
        let [x, y] = mesh.node(n);
        let phi = k[0] * x + k[1] * y * y;
        let lam = 1.2 + 0.4 * (k[2] * x).sin();
        let mu = if iso { lam } else { 1.0 + 0.3 * (k[3] * y + x).cos() };
        let mut q = q_from_parts(phi, lam, mu);
        let noise = OdecoQ::new(0.05 * (k[4] * x).sin(), 0.04 * y, -0.03 * x * y, 0.05 * (k[5] * y).cos(), 0.02 * x);
        q = q + noise;
        s.set_node(n, &q);
    }
    for n in 0..mesh.num_nodes() {
        if mesh.is_boundary_node(n) {
            let q = s.node(n);
            s.fix_node(n, &q);
        }
    }
    s
}

fn check<F: Fn(&FieldState) -> Energy>(name: &str, state: &FieldState, f: F, rng: &mut ChaCha8Rng, free_only: bool) {
    let base = f(state);
    assert!(base.is_finite(), "{name}: infeasible base state");
    let scale = state.q.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let h = 1e-6 * scale;
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let dir: Vec<f64> = (0..state.q.len())
            .map(|i| if !free_only || state.is_free(i) { rng.gen_range(-1.0..1.0) } else { 0.0 })
            .collect();
        let mut plus = state.clone();
        let mut minus = state.clone();
        for i in 0..dir.len() {
            plus.q[i] += h * dir[i];
            minus.q[i] -= h * dir[i];
        }
        let fd = (f(&plus).value - f(&minus).value) / (2.0 * h);
        let an: f64 = base.gradient.iter().zip(&dir).map(|(g, d)| g * d).sum();
        let rel = (fd - an).abs() / an.abs().max(fd.abs()).max(1e-10);
        worst = worst.max(rel);
    }
    assert!(worst < 1e-5, "{name}: worst relative error {worst:e}");
}

#[test]
fn gradients_match_central_differences() {
    let mesh = unit_square(13);
    assert!((190..=210).contains(&mesh.num_nodes()));
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for iso in [false, true] {
        let s = random_state(&mesh, &mut rng, iso);
        check("e_lie", &s, |s| e_lie(&mesh, s, 1e-8), &mut rng, false);
        check("e_odeco", &s, |s| e_odeco(&mesh, s), &mut rng, false);
        check("e_dirichlet", &s, |s| e_dirichlet(&mesh, s), &mut rng, false);
        let p = EnergyParams::new(0.01, mesh.max_edge_length(), 1e-8);
        check("e_total", &s, |s| e_total(&mesh, s, &p), &mut rng, true);
    }
}

#[test]
fn fixed_and_isotropic_entries_have_zero_gradient() {
    let mesh = unit_square(6);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for iso in [false, true] {
        let s = random_state(&mesh, &mut rng, iso);
        let e = e_total(&mesh, &s, &EnergyParams::new(0.1, 0.2, 1e-8));
        for (i, g) in e.gradient.iter().enumerate() {
            if !s.is_free(i) {
                assert_eq!(*g, 0.0);
            }
        }
    }
}

#[test]
fn lie_energy_is_scale_invariant_and_odeco_residuals_homogeneous() {
    let mesh = unit_square(8);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let s = random_state(&mesh, &mut rng, false);
    let e1 = e_lie(&mesh, &s, 1e-12).value;
    for alpha in [0.25, 3.0, 17.0] {
        let e2 = e_lie(&mesh, &s.scaled(alpha), 1e-12).value;
        assert!((e1 - e2).abs() <= 1e-12 * e1.max(1.0), "{e1} vs {e2}");
        let o1 = e_odeco(&mesh, &s).value;
        let o2 = e_odeco(&mesh, &s.scaled(alpha)).value;
        assert!((o2 - alpha.powi(4) * o1).abs() <= 1e-10 * o2);
    }
}
