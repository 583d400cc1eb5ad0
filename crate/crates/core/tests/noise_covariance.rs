use approx::assert_relative_eq;
use proptest::prelude::*;
use tkl_core::schemes::{noise_covariance, psi_coefficients, sample_noise_pair, NoiseCovariance};
use tkl_core::NoiseStream;

const LAMBDAS: [f64; 3] = [1e-3, 1e-2, 1e-1];
const GAMMAS: [f64; 5] = [0.5, 1.0, 2.0, 5.0, 28.117];

/// Composite Simpson rule on `[0, b]` with `n` (even) intervals.
fn simpson(f: impl Fn(f64) -> f64, b: f64, n: usize) -> f64 {
    let h = b / n as f64;
    let mut sum = f(0.0) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(i as f64 * h);
    }
    sum * h / 3.0
}

#[test]
fn closed_form_matches_quadrature_on_grid() {
    for &lambda in &LAMBDAS {
        for &gamma in &GAMMAS {
            let psi0 = |t: f64| (-gamma * t).exp();
            let psi1 = |t: f64| (1.0 - (-gamma * t).exp()) / gamma;
            let q11 = simpson(|t| psi0(t) * psi0(t), lambda, 4000);
            let q12 = simpson(|t| psi0(t) * psi1(t), lambda, 4000);
            let q22 = simpson(|t| psi1(t) * psi1(t), lambda, 4000);
            let c = noise_covariance(lambda, gamma);
            for (closed, quad) in [(c.c11, q11), (c.c12, q12), (c.c22, q22)] {
                assert!((closed - quad).abs() <= 1e-10, "λ={lambda} γ={gamma}: {closed} vs {quad}");
                assert_relative_eq!(closed, quad, max_relative = 1e-9);
            }
        }
    }
}

#[test]
fn psi_matches_iterated_integrals() {
    let (lambda, gamma) = (0.1, 2.0);
    let p = psi_coefficients(lambda, gamma);
    let psi1 = simpson(|t| (-gamma * t).exp(), lambda, 2000);
    let psi2 = simpson(|s| simpson(|t| (-gamma * t).exp(), s, 200), lambda, 200);
    assert_relative_eq!(p.psi1, psi1, max_relative = 1e-10);
    assert_relative_eq!(p.psi2, psi2, max_relative = 1e-8);
    assert_relative_eq!(p.psi0, 0.818731, max_relative = 1e-6);
    // (0.2 + e^{-0.2} - 1)/4
    assert_relative_eq!(p.psi2, 0.004682688, max_relative = 1e-7);
}

#[test]
fn sampled_pairs_have_covariance_c() {
    let n = 1_000_000;
    let c = noise_covariance(0.1, 2.0);
    let (xi, xi_prime) = sample_noise_pair(&mut NoiseStream::new(2024, 0), &c, n).unwrap();
    let nf = n as f64;
    let mean = |v: &[f64]| v.iter().sum::<f64>() / nf;
    let (m1, m2) = (mean(&xi), mean(&xi_prime));
    let s11 = xi.iter().map(|a| (a - m1) * (a - m1)).sum::<f64>() / nf;
    let s22 = xi_prime.iter().map(|a| (a - m2) * (a - m2)).sum::<f64>() / nf;
    let s12 = xi.iter().zip(&xi_prime).map(|(a, b)| (a - m1) * (b - m2)).sum::<f64>() / nf;
    // Gaussian standard errors of sample (co)variances.
    let se11 = c.c11 * (2.0 / nf).sqrt();
    let se22 = c.c22 * (2.0 / nf).sqrt();
    let se12 = ((c.c11 * c.c22 + c.c12 * c.c12) / nf).sqrt();
    assert!((s11 - c.c11).abs() <= 5.0 * se11, "{s11} vs {}", c.c11);
    assert!((s12 - c.c12).abs() <= 5.0 * se12, "{s12} vs {}", c.c12);
    assert!((s22 - c.c22).abs() <= 5.0 * se22, "{s22} vs {}", c.c22);
    assert!(m1.abs() <= 5.0 * (c.c11 / nf).sqrt());
    assert!(m2.abs() <= 5.0 * (c.c22 / nf).sqrt());
}

#[test]
fn degenerate_covariances() {
    let zero = NoiseCovariance { c11: 0.0, c12: 0.0, c22: 0.0 };
    let (a, b) = sample_noise_pair(&mut NoiseStream::new(1, 0), &zero, 4).unwrap();
    assert_eq!(a, vec![0.0; 4]);
    assert_eq!(b, vec![0.0; 4]);

    let identity = NoiseCovariance { c11: 1.0, c12: 0.0, c22: 1.0 };
    let (a, b) = sample_noise_pair(&mut NoiseStream::new(1, 0), &identity, 3).unwrap();
    let mut s = NoiseStream::new(1, 0);
    for j in 0..3 {
        assert_eq!(a[j], s.normal::<f64>());
        assert_eq!(b[j], s.normal::<f64>());
    }

    let bad = NoiseCovariance { c11: 1.0, c12: 2.0, c22: 1.0 };
    assert!(sample_noise_pair(&mut NoiseStream::new(1, 0), &bad, 1).is_err());
}

#[test]
fn single_precision_agrees() {
    for &lambda in &LAMBDAS {
        for &gamma in &GAMMAS {
            let c64 = noise_covariance(lambda, gamma);
            let c32 = noise_covariance(lambda as f32, gamma as f32);
            assert_relative_eq!(c32.c11 as f64, c64.c11, max_relative = 1e-5);
            assert_relative_eq!(c32.c12 as f64, c64.c12, max_relative = 1e-5);
            // Cancellation in the position variance costs a few more bits.
            assert_relative_eq!(c32.c22 as f64, c64.c22, max_relative = 1e-4);
            assert!(c32.cholesky().is_ok());
        }
    }
}

proptest! {
    #[test]
    fn covariance_is_psd_and_factorizes(lambda in 1e-6f64..1.0, gamma in 0.05f64..60.0) {
        let c = noise_covariance(lambda, gamma);
        prop_assert!(c.c11 > 0.0 && c.c22 > 0.0);
        prop_assert!(c.c12 * c.c12 <= c.c11 * c.c22 * (1.0 + 1e-12));
        let f = c.cholesky().unwrap();
        let scale = c.c11.max(c.c22);
        prop_assert!((f.l11 * f.l11 - c.c11).abs() <= 1e-14 * scale);
        prop_assert!((f.l11 * f.l21 - c.c12).abs() <= 1e-14 * scale);
        prop_assert!((f.l21 * f.l21 + f.l22 * f.l22 - c.c22).abs() <= 1e-12 * c.c22 + 1e-15 * scale);
    }

    #[test]
    fn small_steps_follow_taylor(lambda in 1e-7f64..1e-4, gamma in 0.1f64..30.0) {
        let p = psi_coefficients(lambda, gamma);
        let x = gamma * lambda;
        prop_assert!((p.psi1 / lambda - 1.0).abs() <= x);
        prop_assert!((p.psi2 / (lambda * lambda / 2.0) - 1.0).abs() <= x);
        let c = noise_covariance(lambda, gamma);
        prop_assert!((c.c22 / (lambda.powi(3) / 3.0) - 1.0).abs() <= 2.0 * x);
    }
}
