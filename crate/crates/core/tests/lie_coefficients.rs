use odeco_frames::lie::{build_lie_coeffs, lie_oracle, LieCoeffs, QGradient};
use odeco_frames::odeco::{area, q_from_parts, q_from_parts_jacobian, Frame2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Nonzero coefficients `(i, j, k, α, C)`; everything else is zero.
const FROZEN: [(usize, usize, usize, usize, f64); 42] = [
        (0, 0, 0, 1, -0.2122065907891938),
        (0, 0, 1, 1, 0.22507907903927654),
        (0, 0, 2, 0, -0.22507907903927654),
        (0, 1, 0, 1, -0.22507907903927654),
        (0, 1, 1, 1, 0.31830988618379064),
        (0, 1, 2, 0, -0.15915494309189532),
        (0, 1, 3, 1, -0.31830988618379064),
        (0, 1, 4, 0, 0.31830988618379064),
        (0, 2, 0, 0, 0.22507907903927654),
        (0, 2, 1, 0, 0.15915494309189532),
        (0, 2, 2, 1, 0.31830988618379064),
        (0, 2, 3, 0, -0.31830988618379064),
        (0, 2, 4, 1, -0.31830988618379064),
        (0, 3, 1, 1, 0.31830988618379064),
        (0, 3, 2, 0, 0.31830988618379064),
        (0, 3, 3, 1, -1.2732395447351625),
        (0, 3, 4, 0, 1.2732395447351625),
        (0, 4, 1, 0, -0.31830988618379064),
        (0, 4, 2, 1, 0.31830988618379064),
        (0, 4, 3, 0, -1.2732395447351625),
        (0, 4, 4, 1, -1.2732395447351625),
        (1, 0, 0, 0, 0.2122065907891938),
        (1, 0, 1, 0, 0.22507907903927654),
        (1, 0, 2, 1, 0.22507907903927654),
        (1, 1, 0, 0, -0.22507907903927654),
        (1, 1, 1, 0, -0.31830988618379064),
        (1, 1, 2, 1, -0.15915494309189532),
        (1, 1, 3, 0, -0.31830988618379064),
        (1, 1, 4, 1, -0.31830988618379064),
        (1, 2, 0, 1, -0.22507907903927654),
        (1, 2, 1, 1, 0.15915494309189532),
        (1, 2, 2, 0, -0.31830988618379064),
        (1, 2, 3, 1, 0.31830988618379064),
        (1, 2, 4, 0, -0.31830988618379064),
        (1, 3, 1, 0, 0.31830988618379064),
        (1, 3, 2, 1, -0.31830988618379064),
        (1, 3, 3, 0, 1.2732395447351625),
        (1, 3, 4, 1, 1.2732395447351625),
        (1, 4, 1, 1, 0.31830988618379064),
        (1, 4, 2, 0, 0.31830988618379064),
        (1, 4, 3, 1, -1.2732395447351625),
        (1, 4, 4, 0, 1.2732395447351625),
];

#[test]
fn coefficients_match_frozen_snapshot() {
    let mut table = [[[[0.0; 2]; 5]; 5]; 2];
    for &(i, j, k, a, v) in FROZEN.iter() {
        table[i][j][k][a] = v;
    }
    let built = build_lie_coeffs();
    for i in 0..2 {
        for j in 0..5 {
            for k in 0..5 {
                for a in 0..2 {
                    let d = (built.c[i][j][k][a] - table[i][j][k][a]).abs();
                    assert!(d < 1e-14, "C[{i}][{j}][{k}][{a}] drifted by {d}");
                }
            }
        }
    }
    assert_eq!(built.nonzero_count(), 42);
    assert_eq!(LieCoeffs::from_table(table).nonzero_count(), 42);
}

/// Smooth frame field `φ, λ, μ` built from a few random Fourier modes.
struct RandomField {
    modes: [[f64; 4]; 3],
    base: [f64; 3],
}

impl RandomField {
    fn new(rng: &mut ChaCha8Rng) -> Self {
        let mut modes = [[0.0; 4]; 3];
        for m in modes.iter_mut() {
            *m = [rng.gen_range(-0.3..0.3), rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0), rng.gen_range(0.0..6.3)];
        }
        RandomField { modes, base: [rng.gen_range(0.0..1.5), rng.gen_range(1.0..2.0), rng.gen_range(1.0..2.0)] }
    }

    /// Value and gradient of parameter `c` at `p`.
    fn param(&self, c: usize, p: [f64; 2]) -> (f64, [f64; 2]) {
        let [amp, kx, ky, ph] = self.modes[c];
        let arg = kx * p[0] + ky * p[1] + ph;
        (self.base[c] + amp * arg.sin(), [amp * kx * arg.cos(), amp * ky * arg.cos()])
    }

    fn frame(&self, p: [f64; 2]) -> Frame2 {
        Frame2::new(self.param(0, p).0, self.param(1, p).0, self.param(2, p).0).unwrap()
    }

    fn q_and_grad(&self, p: [f64; 2]) -> (odeco_frames::OdecoQ, QGradient) {
        let vals: Vec<_> = (0..3).map(|c| self.param(c, p)).collect();
        let q = q_from_parts(vals[0].0, vals[1].0, vals[2].0);
        let jac = q_from_parts_jacobian(vals[0].0, vals[1].0, vals[2].0);
        let mut g = [[0.0; 2]; 5];
        for j in 0..5 {
            for a in 0..2 {
                g[j][a] = (0..3).map(|c| jac[j][c] * vals[c].1[a]).sum();
            }
        }
        (q, g)
    }
}

#[test]
fn bracket_matches_finite_difference_oracle() {
    let coeffs = LieCoeffs::shared();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let field = RandomField::new(&mut rng);
        let p = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let (q, g) = field.q_and_grad(p);
        let lie = coeffs.lie_bracket(&q, &g);
        let oracle = lie_oracle(|x| field.frame(x), p, 1e-5).unwrap();
        let scale = oracle[0].hypot(oracle[1]).max(1e-12);
        let err = (lie[0] - oracle[0]).hypot(lie[1] - oracle[1]);
        assert!(err / scale < 1e-6, "relative error {} at {p:?}", err / scale);
    }
}

#[test]
fn bilinear_and_scale_invariant_integrand() {
    let coeffs = LieCoeffs::shared();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..50 {
        let field = RandomField::new(&mut rng);
        let p = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        let (q, g) = field.q_and_grad(p);
        let alpha: f64 = rng.gen_range(0.1..5.0);
        let gs: QGradient = g.map(|r| r.map(|x| alpha * x));
        let l1 = coeffs.lie_bracket(&q, &g);
        let l2 = coeffs.lie_bracket(&(alpha * q), &gs);
        let h1 = (l1[0] * l1[0] + l1[1] * l1[1]) / area(&q).powi(2);
        let h2 = (l2[0] * l2[0] + l2[1] * l2[1]) / area(&(alpha * q)).powi(2);
        assert!((h1 - h2).abs() <= 1e-10 * h1.max(1.0));
        let l3 = coeffs.lie_bracket(&q, &gs);
        for i in 0..2 {
            assert!((l3[i] - alpha * l1[i]).abs() < 1e-10 * (1.0 + l1[i].abs()) * alpha);
        }
    }
}
