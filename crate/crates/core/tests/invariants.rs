use std::sync::Arc;

use msqg_wn::dynamics::{GalerkinSolver, SpectralState, VortexState, VortexSystem};
use msqg_wn::quadform::Bikernel;
use msqg_wn::{
    build_fn, pair, quad_pair, quad_pair_renormalized, sample_draw, Bump, KernelSpec, TestFunction,
    TrigBikernel, TrigPolynomial, Vec2,
};
use proptest::prelude::*;

fn point(side: f64) -> impl Strategy<Value = Vec2> {
    let h = 0.5 * side;
    (-h..h, -h..h).prop_map(|(x, y)| Vec2::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn approximants_are_symmetric_and_vanish_on_the_diagonal(
        x in point(4.0),
        y in point(4.0),
        n in 1u32..6,
    ) {
        let spec = KernelSpec::torus(0.5, 4.0).unwrap();
        let phi: Arc<dyn TestFunction> = Arc::new(Bump::new(Vec2::new(0.2, -0.1), 1.2, 1.0).unwrap());
        let f = build_fn(&spec, phi, n).unwrap();
        let (a, b) = (f.eval(x, y), f.eval(y, x));
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
        prop_assert_eq!(f.eval(x, x), 0.0);
    }

    #[test]
    fn tensor_form_is_the_squared_pairing(seed in 0u64..500, k1 in -2i64..=2, k2 in -2i64..=2) {
        let phi = TrigPolynomial::cosine(4.0, [k1, k2], 1.0)
            .unwrap()
            .combine(1.0, &TrigPolynomial::sine(4.0, [1, -1], 0.5).unwrap(), 1.0)
            .unwrap();
        let f = sample_draw(4.0, 3, seed, 0).unwrap();
        let q = quad_pair(&f, &TrigBikernel::tensor(&phi)).unwrap();
        let p = pair(&f, &phi).unwrap();
        prop_assert!((q - p * p).abs() <= 1e-9 * (1.0 + q.abs()));
    }

    #[test]
    fn renormalization_leaves_approximants_unchanged(seed in 0u64..500) {
        let spec = KernelSpec::torus(0.5, 4.0).unwrap();
        let phi: Arc<dyn TestFunction> = Arc::new(Bump::new(Vec2::ZERO, 1.0, 1.0).unwrap());
        let f = build_fn(&spec, phi, 2).unwrap();
        let field = sample_draw(4.0, 4, seed, 0).unwrap();
        prop_assert_eq!(quad_pair(&field, &f).unwrap(), quad_pair_renormalized(&field, &f).unwrap());
    }

    #[test]
    fn galerkin_steps_keep_reality_mean_and_energy(seed in 0u64..500, eps in 0.1f64..0.9) {
        let mut solver = GalerkinSolver::new(8.0, eps, 6).unwrap();
        let mut s = SpectralState::new(sample_draw(8.0, 6, seed, 0).unwrap());
        let (mean, energy) = (s.field.coeff([0, 0]), s.field.energy());
        for _ in 0..5 {
            solver.step_rk4(&mut s, 1e-3).unwrap();
        }
        prop_assert!(s.field.modes().hermitian_defect() < 1e-12 * energy.sqrt());
        prop_assert_eq!(s.field.coeff([0, 0]), mean);
        prop_assert!((s.field.energy() - energy).abs() < 1e-9 * energy);
    }

    #[test]
    fn vortex_steps_keep_circulation_and_energy(seed in 0u64..200) {
        let system = VortexSystem::new(&KernelSpec::torus(0.5, 8.0).unwrap()).unwrap();
        let mut s = VortexState::random(8.0, 12, seed, 0).unwrap();
        let (gamma, h) = (s.circulation(), system.hamiltonian(&s));
        let ok = (0..5).all(|_| system.step_rk4(&mut s, 1e-4).is_ok());
        prop_assume!(ok);
        prop_assert_eq!(s.circulation(), gamma);
        prop_assert!((system.hamiltonian(&s) - h).abs() < 1e-6 * (1.0 + h.abs()));
    }
}
