use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pac_core::channel::noiseless_llr;
use pac_core::cutoff::{check_constraint, sample_constrained_profile, PolarizationBudgets};
use pac_core::drpo::mutate;
use pac_core::pac::{convolve, deconvolve, pac_encode, polar_transform};
use pac_core::scl::{mlubv, q_function, scl_decode};
use pac_core::{ConnectionPolynomial, PacCode, RateProfile, TapOrder};

/// Upper tail of the standard normal by composite Simpson quadrature.
fn q_quadrature(x: f64) -> f64 {
    let (a, b, n) = (x, x + 40.0, 200_000);
    let h = (b - a) / n as f64;
    let pdf = |t: f64| (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = pdf(a) + pdf(b);
    for i in 1..n {
        s += pdf(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

#[test]
fn q_function_matches_quadrature() {
    for &x in &[0.0, 0.5, 1.0, 2.0, 3.0, 4.5, 6.0, 8.0] {
        let (got, want) = (q_function(x), q_quadrature(x));
        assert!(((got - want) / want).abs() < 1e-8, "Q({x}) = {got}, quadrature {want}");
    }
}

#[test]
fn mlubv_matches_direct_sum() {
    let hist = [(0usize, 1usize), (10, 153), (12, 1200), (14, 20000)].into_iter().collect();
    let (snr, rate) = (4.0, 0.5);
    let ebn0 = 10f64.powf(snr / 10.0);
    let want: f64 = [(10.0, 153.0), (12.0, 1200.0), (14.0, 20000.0)]
        .iter()
        .map(|&(w, a)| a * q_quadrature((2.0 * w * rate * ebn0).sqrt()))
        .sum();
    let got = mlubv(&hist, snr, rate);
    assert!(((got - want) / want).abs() < 1e-8, "{got} vs {want}");
}

fn poly_strategy() -> impl Strategy<Value = ConnectionPolynomial> {
    (0usize..=10, any::<u16>(), any::<bool>()).prop_map(|(m, bits, high)| {
        let mut c: Vec<u8> = (0..=m).map(|j| ((bits >> j) & 1) as u8).collect();
        c[0] = 1;
        c[m] = 1;
        let order = if high { TapOrder::HighFirst } else { TapOrder::LowFirst };
        ConnectionPolynomial::new(c).unwrap().with_order(order)
    })
}

fn code_strategy() -> impl Strategy<Value = PacCode> {
    (4u32..=7, poly_strategy(), any::<u64>()).prop_map(|(log_n, poly, mask_bits)| {
        let n = 1usize << log_n;
        let mut mask: Vec<bool> = (0..n).map(|i| (mask_bits.rotate_left(i as u32 * 7) >> (i % 64)) & 1 == 1).collect();
        mask[n - 1] = true;
        PacCode::new(RateProfile::new(mask).unwrap(), poly)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn convolution_is_invertible(v in prop::collection::vec(0u8..2, 1..200), poly in poly_strategy()) {
        let u = convolve(&v, &poly);
        prop_assert_eq!(&deconvolve(&u, &poly)[..], &v[..]);
    }

    #[test]
    fn polar_transform_is_an_involution(log_n in 0u32..10, seed in any::<u64>()) {
        let n = 1usize << log_n;
        let u: Vec<u8> = (0..n).map(|i| ((seed >> (i % 64)) & 1) as u8).collect();
        let x = polar_transform(&u).unwrap();
        prop_assert_eq!(&polar_transform(&x).unwrap()[..], &u[..]);
    }

    #[test]
    fn encoder_is_linear(code in code_strategy(), a_bits in any::<u128>(), b_bits in any::<u128>()) {
        let k = code.dimension();
        let a: Vec<u8> = (0..k).map(|i| ((a_bits >> (i % 128)) & 1) as u8).collect();
        let b: Vec<u8> = (0..k).map(|i| ((b_bits >> ((i + 17) % 128)) & 1) as u8).collect();
        let sum: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
        let (ea, eb) = (code.encode(&a).unwrap(), code.encode(&b).unwrap());
        let esum: Vec<u8> = ea.iter().zip(eb.iter()).map(|(x, y)| x ^ y).collect();
        prop_assert_eq!(&pac_encode(&sum, &code.profile, &code.poly).unwrap()[..], &esum[..]);
    }

    #[test]
    fn hex_round_trip(log_n in 2u32..9, seed in any::<u64>()) {
        let n = 1usize << log_n;
        let mask: Vec<bool> = (0..n).map(|i| (seed.wrapping_mul(i as u64 + 1) >> 13) & 1 == 1).collect();
        let p = RateProfile::new(mask).unwrap();
        prop_assert_eq!(RateProfile::from_hex(&p.to_hex(), n).unwrap(), p);
    }

    #[test]
    fn noiseless_list_decoding_recovers_data(code in code_strategy(), bits in any::<u128>(), list in 1usize..8) {
        let d: Vec<u8> = (0..code.dimension()).map(|i| ((bits >> (i % 128)) & 1) as u8).collect();
        let x = code.encode(&d).unwrap();
        let paths = scl_decode(&noiseless_llr(&x, 20.0), &code, list).unwrap();
        let best = &paths[0];
        let data: Vec<u8> = code.profile.info_positions().iter().map(|&i| best.v_hat[i]).collect();
        prop_assert_eq!(data, d);
    }

    #[test]
    fn sampling_and_mutation_respect_budgets(seed in any::<u64>(), k in 20usize..=40) {
        let budgets = PolarizationBudgets::from_caps(vec![2, 6, 7, 8, 6, 8, 8, 8], 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut p = sample_constrained_profile(k, &budgets, &mut rng).unwrap();
        for _ in 0..20 {
            prop_assert!(check_constraint(&p, &budgets));
            prop_assert_eq!(p.dimension(), k);
            p = mutate(&p, &budgets, k, &mut rng);
        }
    }
}
