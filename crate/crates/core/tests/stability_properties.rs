use minimax_core::instances::{gaussian, random_blocks, STANDARD_SHAPES};
use minimax_core::spectral;
use minimax_core::stability::{self, Scheme, Stability};
use minimax_core::{linalg, HessianBlocks};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-8;

fn complex() -> impl Strategy<Value = Complex64> {
    (-5.0..5.0f64, -5.0..5.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v
}

fn spectra_close(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    let mut used = vec![false; b.len()];
    a.iter().all(|x| {
        let best = (0..b.len()).filter(|&k| !used[k]).min_by(|&i, &j| (x - b[i]).norm().total_cmp(&(x - b[j]).norm()));
        match best {
            Some(k) if (x - b[k]).norm() <= tol => {
                used[k] = true;
                true
            }
            _ => false,
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn disk_forms_agree(z in complex(), s in 0.01..3.0f64) {
        let direct = stability::in_disk(z, s);
        if let Some(inv) = stability::in_disk_inverse(z, s) {
            let margin = stability::disk_margin(z, s);
            prop_assume!(margin.abs() > 1e-9);
            prop_assert_eq!(direct, inv);
            prop_assert_eq!(direct, margin < 0.0);
        }
    }

    #[test]
    fn peanut_forms_agree(z in complex(), eta in 0.01..3.0f64) {
        if let Some(inv) = stability::in_peanut_inverse(z, eta) {
            let margin = stability::peanut_margin(z, eta);
            prop_assume!(margin.abs() > 1e-9);
            prop_assert_eq!(stability::in_peanut(z, eta), inv);
            prop_assert_eq!(inv, margin > 0.0);
            // Membership is exactly |1 − ηz(1 − ηz)| < 1.
            let nu = 1.0 - eta * z * (1.0 - eta * z);
            prop_assert_eq!(inv, nu.norm() < 1.0);
        }
    }

    #[test]
    fn gda_margin_matches_factor(z in complex(), eta in 0.01..3.0f64) {
        let margin = stability::gda_margin(z, eta);
        prop_assume!(margin.abs() > 1e-9);
        prop_assert_eq!(margin > 0.0, (1.0 - eta * z).norm() < 1.0);
    }

    #[test]
    fn disk_never_meets_peanut(a in 1e-3..1e3f64, eta in 1e-3..1e2f64, r in 0.0..1.0f64, th in 0.0..std::f64::consts::TAU) {
        let rad = 0.5 * a * r.sqrt() * (1.0 - 1e-12);
        let z = Complex64::new(-a + rad * th.cos(), rad * th.sin());
        prop_assert!(!stability::in_peanut(z, eta));
    }

    #[test]
    fn punctured_segment_in_peanut(eta in 1e-2..1e2f64, t in 1e-9..1.0f64) {
        let z = Complex64::new(0.0, t * (1.0 - 1e-12) / eta);
        prop_assert!(stability::in_peanut(z, eta));
    }

    #[test]
    fn imaginary_axis_maps_to_circle(t in -1e3..1e3f64, s in 0.01..3.0f64) {
        let mu = stability::mobius_map(Complex64::new(0.0, t), s).unwrap();
        prop_assert!(((mu + 0.5 / s).norm() - 0.5 / s).abs() <= 1e-12 * (1.0 + 0.5 / s));
    }

    #[test]
    fn mobius_is_an_involution(z in complex(), s in 0.01..3.0f64) {
        prop_assume!((1.0 + s * z).norm() > 1e-3);
        let w = stability::mobius_map(z, s).unwrap();
        prop_assume!((1.0 + s * w).norm() > 1e-3);
        let back = stability::mobius_map(w, s).unwrap();
        prop_assert!((back - z).norm() <= 1e-9 * (1.0 + z.norm()));
    }

    #[test]
    fn eg_step_is_nonsingular_below_golden_bound(seed in any::<u64>(), frac in 0.0..1.0f64, tau in 1.0..1e4f64) {
        // ηL(1 + ηL) < 1 whenever η < (√5 − 1)/(2L), so I − ηΛH(I − ηΛH) is invertible.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let blocks = random_blocks(STANDARD_SHAPES[rng.random_range(0..4)], &mut rng);
        let h = blocks.jacobian();
        let l = linalg::spectral_norm(&h);
        let eta = frac * (5f64.sqrt() - 1.0) / (2.0 * l);
        prop_assert!(eta * l * (1.0 + eta * l) < 1.0);
        let j = stability::eg_jacobian_discrete(&h, blocks.d1(), eta, tau);
        let smin = linalg::singular_values(&j).last().copied().unwrap();
        prop_assert!(smin > 0.0);
    }
}

#[test]
fn jacobian_spectrum_is_the_mapped_spectrum() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..200 {
        let n = rng.random_range(2..6);
        let h = gaussian(n, n, &mut rng);
        let l = linalg::spectral_norm(&h);
        let s = rng.random_range(0.05..0.95) / l;
        let eta = rng.random_range(0.05..0.95) / l;
        let lambdas = linalg::eigenvalues(&h).unwrap();

        let j = stability::eg_jacobian_continuous(&h, s).unwrap();
        let mapped: Vec<Complex64> = lambdas.iter().map(|&x| stability::mobius_map(x, s).unwrap()).collect();
        assert!(spectra_close(&sorted(linalg::eigenvalues(&j).unwrap()), &mapped, 1e-8));

        let jd = stability::eg_jacobian_discrete(&h, 0, eta, 1.0);
        let mapped: Vec<Complex64> = lambdas.iter().map(|&x| 1.0 - eta * x * (1.0 - eta * x)).collect();
        assert!(spectra_close(&linalg::eigenvalues(&jd).unwrap(), &mapped, 1e-8));

        let jg = stability::gda_jacobian(&h, 0, eta, 1.0);
        let mapped: Vec<Complex64> = lambdas.iter().map(|&x| 1.0 - eta * x).collect();
        assert!(spectra_close(&linalg::eigenvalues(&jg).unwrap(), &mapped, 1e-8));
    }
}

fn random_case(rng: &mut ChaCha8Rng) -> (HessianBlocks, f64, f64) {
    let blocks = random_blocks(STANDARD_SHAPES[rng.random_range(0..4)], rng);
    let l = linalg::spectral_norm(&blocks.jacobian());
    let param = rng.random_range(0.05..0.95) / l;
    let tau = 10f64.powf(rng.random_range(0.0..4.0));
    (blocks, param, tau)
}

#[test]
fn dual_criteria_agree_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for scheme in Scheme::ALL {
        let mut stable = 0;
        for _ in 0..500 {
            let (blocks, param, tau) = random_case(&mut rng);
            let v = stability::stability(scheme, &blocks, param, tau, TOL).unwrap();
            if v.stable != Stability::Marginal {
                assert_eq!(v.jacobian_side, v.region_side);
            }
            stable += usize::from(v.stable == Stability::Stable);
        }
        assert!(stable > 0, "{} never stable", scheme.as_str());
    }
}

#[test]
fn gda_verdict_matches_spectral_radius() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..300 {
        let (blocks, eta, tau) = random_case(&mut rng);
        let v = stability::gda_stability(&blocks, eta, tau, TOL).unwrap();
        let rho = linalg::spectral_radius(&stability::gda_jacobian(&blocks.jacobian(), blocks.d1(), eta, tau)).unwrap();
        match v.stable {
            Stability::Stable => assert!(rho < 1.0),
            Stability::Unstable => assert!(rho > 1.0),
            Stability::Marginal => {}
        }
    }
}

#[test]
fn verdict_does_not_depend_on_balancing() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..100 {
        let (blocks, s, tau) = random_case(&mut rng);
        let balanced = stability::stability_continuous(&blocks, s, tau, TOL).unwrap();
        let h_tau = spectral::timescaled_hessian(&blocks.jacobian(), blocks.d1(), tau);
        let plain = stability::stability_from_matrix(Scheme::EgTtContinuous, &h_tau, s, tau, TOL).unwrap();
        if balanced.stable != Stability::Marginal && plain.stable != Stability::Marginal {
            assert_eq!(balanced.stable, plain.stable);
        }
    }
}

#[test]
fn infinity_verdict_is_inconclusive_without_a_tail() {
    let blocks = random_blocks(STANDARD_SHAPES[1], &mut ChaCha8Rng::seed_from_u64(5));
    let l = linalg::spectral_norm(&blocks.jacobian());
    let v = stability::infinity_eg_verdict(&blocks, Scheme::EgTtContinuous, 0.5 / l, &[1.0, 10.0], 5, TOL, Default::default())
        .unwrap();
    assert_eq!(v.outcome, stability::Outcome::Inconclusive);
    assert!(v.tau_star.is_none());
    assert!(stability::infinity_eg_verdict(&blocks, Scheme::EgTtContinuous, 0.5 / l, &[10.0, 1.0], 1, TOL, Default::default())
        .is_err());
}

#[test]
fn invalid_inputs_are_rejected() {
    let blocks = HessianBlocks::new(
        DMatrix::from_element(1, 1, 1.0),
        DMatrix::from_element(1, 1, -1.0),
        DMatrix::from_element(1, 1, 1.0),
    )
    .unwrap();
    assert!(stability::stability_continuous(&blocks, 0.1, 0.5, TOL).is_err());
    assert!(stability::stability_discrete(&blocks, -0.1, 2.0, TOL).is_err());
    assert!(stability::mobius_map(Complex64::new(-2.0, 0.0), 0.5).is_err());
}
