use approx::assert_relative_eq;
use proptest::prelude::*;
use tkl_core::metrics::{
    gaussian_w2, jacobian_opnorm_fd, moment_bound_check, order_fit, w2_1d, w2_exact_smalln, w2_to_normal_1d,
    weighted_norm_sq, NormalTransportTable,
};
use tkl_core::potential::{builtin_potential, BuiltinPotential};
use tkl_core::schemes::{
    coord_map_m, coord_map_m_inverse, coord_map_s, coord_map_s_inverse, mean_map_fbar, sym2_opnorm,
};
use tkl_core::{NoiseStream, PhaseState, PotentialSpec, SampleCloud, SchemeParams, TamedDrift, WeightedNormParams};

fn cloud(v: &[f64]) -> SampleCloud<f64> {
    SampleCloud::from_scalars(v.to_vec()).unwrap()
}

fn phase() -> impl Strategy<Value = PhaseState<f64>> {
    (1usize..4)
        .prop_flat_map(|d| (prop::collection::vec(-50.0f64..50.0, d), prop::collection::vec(-50.0f64..50.0, d)))
        .prop_map(|(x, v)| PhaseState::new(x, v).unwrap())
}

#[test]
fn weighted_norm_example() {
    let w = WeightedNormParams::new(4.0, 1.0).unwrap();
    let z = PhaseState::new(vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
    assert_eq!(weighted_norm_sq(&z, &w), 5.0);
}

#[test]
fn w2_examples() {
    assert_eq!(w2_1d(&cloud(&[0.0, 2.0]), &cloud(&[1.0, 3.0])).unwrap(), 1.0);
    let a = SampleCloud::new(2, &[vec![0.0, 0.0], vec![1.0, 0.0]]).unwrap();
    let b = SampleCloud::new(2, &[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
    assert_eq!(w2_exact_smalln(&a, &b).unwrap(), 0.0);
    assert_relative_eq!(gaussian_w2(&[0.0, 0.0], 1.0, &[0.0, 0.0], 2.0).unwrap(), 2f64.sqrt(), max_relative = 1e-15);
}

/// Shifting an exact normal sample by μ moves it to distance ≈ |μ| from
/// the unshifted law, within three standard errors of the finite-sample
/// noise floor.
#[test]
fn shifted_normal_sample() {
    let n = 100_000;
    let mu = 0.3;
    let mut s = NoiseStream::new(17, 0);
    let mut x = vec![0.0; n];
    s.fill_normal(&mut x);
    let floor = w2_to_normal_1d(&x, 0.0, 1.0).unwrap();
    let shifted: Vec<f64> = x.iter().map(|v| v + mu).collect();
    let w = w2_to_normal_1d(&shifted, 0.0, 1.0).unwrap();
    // Triangle inequality around the floor; the floor itself is a few 1e-3 at this n.
    assert!((w - mu).abs() <= floor + 3.0 / (n as f64).sqrt(), "{w} vs {mu} (floor {floor})");
    assert_relative_eq!(w2_1d(&cloud(&shifted), &cloud(&x)).unwrap(), mu, max_relative = 1e-12);
}

#[test]
fn transport_table_matches_one_shot() {
    let mut s = NoiseStream::new(3, 0);
    let mut x = vec![0.0; 500];
    s.fill_normal(&mut x);
    let t = NormalTransportTable::new(500);
    assert_relative_eq!(t.w2(&x, 0.5, 2.0).unwrap(), w2_to_normal_1d(&x, 0.5, 2.0).unwrap(), max_relative = 1e-14);
}

#[test]
fn fd_norms_of_linear_maps() {
    let id = jacobian_opnorm_fd(|p| p.to_vec(), &[0.3, -1.0, 2.0], 1e-4).unwrap();
    assert_relative_eq!(id, 1.0, max_relative = 1e-9);
    let diag = jacobian_opnorm_fd(|p| vec![2.0 * p[0], 0.5 * p[1]], &[1.0, 1.0], 1e-4).unwrap();
    assert_relative_eq!(diag, 2.0, max_relative = 1e-9);
}

/// With the drift switched off the mean map is the symmetric matrix
/// `[[(1+η)/2, (1−η)/2], [(1−η)/2, (1+η)/2]]` per coordinate, with
/// eigenvalues 1 and η.
#[test]
fn mean_map_without_drift() {
    let p = PotentialSpec::custom("free", 2, |_: &[f64]| 0.0, |_: &[f64], o: &mut [f64]| o.fill(0.0), 0.0, 0.0, 0.0, Some(0.0));
    let td = TamedDrift::from_parts(p, 0.05, 1e6, 0.0).unwrap();
    let sp = SchemeParams::from_constants(0.05, 2.0, 0.5, 1.0).unwrap();
    let (phi, psi) = (vec![1.0, -2.0], vec![0.5, 3.0]);
    let (a, b) = mean_map_fbar(&phi, &psi, &td, &sp);
    let eta = sp.eta;
    for j in 0..2 {
        assert_relative_eq!(a[j], phi[j] + (1.0 - eta) / 2.0 * (psi[j] - phi[j]), max_relative = 1e-14);
        assert_relative_eq!(b[j], phi[j] + (1.0 + eta) / 2.0 * (psi[j] - phi[j]), max_relative = 1e-14);
    }
    assert_relative_eq!(sym2_opnorm([(1.0 + eta) / 2.0, (1.0 - eta) / 2.0, (1.0 + eta) / 2.0]), 1.0, max_relative = 1e-15);
    let map = |z: &[f64]| {
        let (a, b) = mean_map_fbar(&z[..2], &z[2..], &td, &sp);
        [a, b].concat()
    };
    let norm = jacobian_opnorm_fd(map, &[phi, psi].concat(), 1e-4).unwrap();
    assert_relative_eq!(norm, 1.0, max_relative = 1e-8);
}

#[test]
fn mean_map_contracts_for_quadratic() {
    let q = builtin_potential(BuiltinPotential::Quadratic, 1.0, 2).unwrap();
    let td = TamedDrift::from_parts(q, 0.1, 10.0, 10.0).unwrap();
    let sp = SchemeParams::new(&td, 2.0).unwrap();
    let map = |z: &[f64]| {
        let (a, b) = mean_map_fbar(&z[..2], &z[2..], &td, &sp);
        [a, b].concat()
    };
    let norm = jacobian_opnorm_fd(map, &[1.0; 4], 1e-5).unwrap();
    assert!(norm < 1.0, "{norm}");
    // Fixed point of the drift-free part.
    let z = vec![0.0; 2];
    assert_eq!(mean_map_fbar(&z, &z, &td, &sp), (z.clone(), z));
}

#[test]
fn moment_check_flags_scaled_samples() {
    let q = builtin_potential(BuiltinPotential::Quadratic, 1.0, 1).unwrap();
    let mut x = vec![0.0; 20_000];
    NoiseStream::new(4, 0).fill_normal(&mut x);
    let c = cloud(&x);
    let r = moment_bound_check(&c, &q);
    assert_eq!(r.bound, 4.0);
    assert!(!r.violated);
    assert!(moment_bound_check(&c.scaled(10.0), &q).violated);
}

proptest! {
    #[test]
    fn weighted_norm_is_homogeneous(z in phase(), k in -10.0f64..10.0, a in 0.01f64..10.0, b in 0.001f64..5.0) {
        let w = WeightedNormParams::new(a, b).unwrap();
        let kz = PhaseState::new(z.x.iter().map(|c| k * c).collect(), z.v.iter().map(|c| k * c).collect()).unwrap();
        let lhs = weighted_norm_sq(&kz, &w);
        let rhs = k * k * weighted_norm_sq(&z, &w);
        let scale = k * k * (z.x.iter().chain(&z.v).map(|c| c * c).sum::<f64>()) * (1.0 + a + b);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
    }

    #[test]
    fn weighted_norm_is_equivalent(z in phase(), a in 0.01f64..10.0, frac in 0.0f64..0.999) {
        let b = frac * (a / 4.0).sqrt();
        prop_assume!(b > 0.0);
        let w = WeightedNormParams::new(a, b).unwrap();
        prop_assert!(w.is_equivalent());
        let (lo, hi) = w.equivalence_bounds();
        let e = z.x.iter().chain(&z.v).map(|c| c * c).sum::<f64>();
        let n = weighted_norm_sq(&z, &w);
        prop_assert!(n >= lo * e * (1.0 - 1e-12));
        prop_assert!(n <= hi * e * (1.0 + 1e-12));
    }

    #[test]
    fn w2_1d_is_a_metric(
        xs in prop::collection::vec((-100.0f64..100.0, -100.0f64..100.0, -100.0f64..100.0), 1..64),
    ) {
        let a: Vec<f64> = xs.iter().map(|t| t.0).collect();
        let b: Vec<f64> = xs.iter().map(|t| t.1).collect();
        let c: Vec<f64> = xs.iter().map(|t| t.2).collect();
        let (ca, cb, cc) = (cloud(&a), cloud(&b), cloud(&c));
        let ab = w2_1d(&ca, &cb).unwrap();
        prop_assert_eq!(ab, w2_1d(&cb, &ca).unwrap());
        prop_assert_eq!(w2_1d(&ca, &ca).unwrap(), 0.0);
        let ac = w2_1d(&ca, &cc).unwrap();
        let bc = w2_1d(&cb, &cc).unwrap();
        prop_assert!(ac <= ab + bc + 1e-12 * (1.0 + ab + bc));
    }

    #[test]
    fn w2_1d_translation(xs in prop::collection::vec(-100.0f64..100.0, 1..200), mu in -10.0f64..10.0) {
        let shifted: Vec<f64> = xs.iter().map(|x| x + mu).collect();
        let w = w2_1d(&cloud(&shifted), &cloud(&xs)).unwrap();
        prop_assert!((w - mu.abs()).abs() <= 1e-12 * (1.0 + 100.0));
    }

    #[test]
    fn exact_assignment_matches_sorting_in_1d(pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..9)) {
        let a: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let b: Vec<f64> = pairs.iter().map(|p| p.1).collect();
        let e = w2_exact_smalln(&cloud(&a), &cloud(&b)).unwrap();
        let s = w2_1d(&cloud(&a), &cloud(&b)).unwrap();
        prop_assert!((e - s).abs() <= 1e-12);
    }

    #[test]
    fn coordinate_maps_round_trip(z in phase(), gamma in 0.01f64..100.0, a in 0.1f64..10.0, frac in 0.0f64..0.99) {
        let (phi, psi) = coord_map_m(&z, gamma);
        let back = coord_map_m_inverse(&phi, &psi, gamma);
        let b = frac * a.sqrt();
        let s = coord_map_s(&z, a, b).unwrap();
        let back_s = coord_map_s_inverse(&s, a, b).unwrap();
        for j in 0..z.dim() {
            prop_assert_eq!(back.x[j], z.x[j]);
            let scale_v = 1.0 + z.v[j].abs() + gamma * z.x[j].abs();
            prop_assert!((back.v[j] - z.v[j]).abs() <= 1e-14 * scale_v);
            let scale = 1.0 + z.x[j].abs() + z.v[j].abs() / (1.0 - frac * frac).sqrt();
            prop_assert!((back_s.x[j] - z.x[j]).abs() <= 1e-14 * scale * 4.0);
            prop_assert!((back_s.v[j] - z.v[j]).abs() <= 1e-14 * scale);
        }
    }

    #[test]
    fn fd_norm_of_2x2_linear_map(m in prop::array::uniform4(-5.0f64..5.0)) {
        let map = |p: &[f64]| vec![m[0] * p[0] + m[1] * p[1], m[2] * p[0] + m[3] * p[1]];
        let fd = jacobian_opnorm_fd(map, &[0.7, -0.4], 1e-3).unwrap();
        // Largest singular value from the eigenvalues of AᵀA.
        let ata = [m[0] * m[0] + m[2] * m[2], m[0] * m[1] + m[2] * m[3], m[1] * m[1] + m[3] * m[3]];
        let exact = sym2_opnorm(ata).sqrt();
        prop_assert!((fd - exact).abs() <= 1e-9 * (1.0 + exact), "{} vs {}", fd, exact);
    }

    #[test]
    fn order_fit_recovers_exponents(p in -1.0f64..4.0, c in 0.01f64..100.0) {
        let lambdas = [0.02, 0.01, 0.005, 0.0025];
        let errors: Vec<f64> = lambdas.iter().map(|l: &f64| c * l.powf(p)).collect();
        prop_assert!((order_fit(&lambdas, &errors).unwrap() - p).abs() <= 1e-10);
    }

    #[test]
    fn single_precision_norm(x in -10.0f32..10.0, v in -10.0f32..10.0) {
        let w32 = WeightedNormParams::new(2.0f32, 0.5f32).unwrap();
        let w64 = WeightedNormParams::new(2.0f64, 0.5f64).unwrap();
        let n32 = weighted_norm_sq(&PhaseState::new(vec![x], vec![v]).unwrap(), &w32) as f64;
        let n64 = weighted_norm_sq(&PhaseState::new(vec![x as f64], vec![v as f64]).unwrap(), &w64);
        prop_assert!((n32 - n64).abs() <= 1e-5 * (1.0 + n64) * 3.0);
    }
}
