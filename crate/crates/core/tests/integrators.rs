use approx::assert_relative_eq;
use proptest::prelude::*;
use tkl_core::potential::{builtin_potential, BuiltinPotential};
use tkl_core::schemes::{
    exp_step, hamiltonian_energy, hamiltonian_reference, obabo_closed_form, obabo_step, run_chain, verlet_map,
};
use tkl_core::{NoiseStream, PhaseState, PotentialSpec, Scheme, SchemeParams, TamedDrift};

fn free_particle(dim: usize, lambda: f64) -> TamedDrift<f64> {
    let p = PotentialSpec::custom(
        "free",
        dim,
        |_: &[f64]| 0.0,
        |_: &[f64], out: &mut [f64]| out.fill(0.0),
        0.0,
        0.0,
        0.0,
        Some(0.0),
    );
    TamedDrift::from_parts(p, lambda, 1e6, 0.0).unwrap()
}

fn gap(a: &PhaseState<f64>, b: &PhaseState<f64>) -> f64 {
    a.x.iter()
        .chain(&a.v)
        .zip(b.x.iter().chain(&b.v))
        .map(|(p, q)| (p - q).abs() / (1.0 + p.abs()))
        .fold(0.0, f64::max)
}

#[test]
fn zero_drift_is_free_motion_with_friction() {
    let (lambda, gamma) = (0.05, 3.0);
    let td = free_particle(2, lambda);
    let sp = SchemeParams::from_constants(lambda, gamma, 0.5, 1.0).unwrap();
    let z = PhaseState::new(vec![0.3, -1.0], vec![2.0, 0.5]).unwrap();
    let zero = [0.0, 0.0];

    let e = exp_step(&z, &td, &sp, (&zero, &zero));
    for j in 0..2 {
        assert_relative_eq!(e.x[j], z.x[j] + sp.psi.psi1 * z.v[j], max_relative = 1e-15);
        assert_relative_eq!(e.v[j], sp.psi.psi0 * z.v[j], max_relative = 1e-15);
    }
    let o = obabo_step(&z, &td, &sp, &zero, &zero);
    for j in 0..2 {
        assert_relative_eq!(o.x[j], z.x[j] + lambda * sp.eta_half * z.v[j], max_relative = 1e-15);
        assert_relative_eq!(o.v[j], sp.eta * z.v[j], max_relative = 1e-14);
    }
    let v = verlet_map(&z, &td, lambda);
    for j in 0..2 {
        assert_relative_eq!(v.x[j], z.x[j] + lambda * z.v[j], max_relative = 1e-15);
        assert_eq!(v.v[j], z.v[j]);
    }
}

#[test]
fn obabo_closed_form_matches_substeps() {
    let p = builtin_potential(BuiltinPotential::DoubleWell, 1.0, 2).unwrap();
    let mut s = NoiseStream::new(11, 0);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let lambda = 10f64.powf(-4.0 + 3.0 * s.uniform::<f64>());
        let gamma = 0.5 + 30.0 * s.uniform::<f64>();
        let td = TamedDrift::new(p.clone(), lambda).unwrap();
        let sp = SchemeParams::new(&td, gamma).unwrap();
        let spread = td.r_lambda() * 1.5;
        let x = vec![spread * (2.0 * s.uniform::<f64>() - 1.0), spread * (2.0 * s.uniform::<f64>() - 1.0)];
        let v = vec![3.0 * s.normal::<f64>(), 3.0 * s.normal::<f64>()];
        let g = [s.normal::<f64>(), s.normal::<f64>()];
        let g2 = [s.normal::<f64>(), s.normal::<f64>()];
        let z = PhaseState::new(x, v).unwrap();
        let a = obabo_step(&z, &td, &sp, &g, &g2);
        let b = obabo_closed_form(&z, &td, &sp, &g, &g2);
        worst = worst.max(gap(&a, &b));
    }
    assert!(worst <= 1e-12, "worst relative gap {worst:e}");
}

#[test]
fn hand_evaluated_steps() {
    let q = builtin_potential(BuiltinPotential::Quadratic, 1.0, 1).unwrap();
    // λ = 0.1 gives r_λ < 3; a wide explicit radius keeps h_λ = h at x = 1.
    let td = TamedDrift::from_parts(q, 0.1, 10.0, 10.0).unwrap();
    let sp = SchemeParams::new(&td, 2.0).unwrap();
    let z = PhaseState::new(vec![1.0], vec![0.0]).unwrap();
    let e = exp_step(&z, &td, &sp, (&[0.0], &[0.0]));
    assert_relative_eq!(e.x[0], 0.995317, max_relative = 1e-6);
    assert_relative_eq!(e.v[0], -0.0906346, max_relative = 1e-6);
    let o = obabo_step(&z, &td, &sp, &[0.0], &[0.0]);
    assert_relative_eq!(o.x[0], 0.995, max_relative = 1e-14);
    assert_relative_eq!(o.v[0], -0.09975 * (-0.1f64).exp(), max_relative = 1e-14);
    let v = verlet_map(&z, &td, 0.1);
    assert_relative_eq!(v.x[0], 0.995, max_relative = 1e-14);
    assert_relative_eq!(v.v[0], -0.09975, max_relative = 1e-14);
}

#[test]
fn verlet_energy_drift_is_small() {
    let q: PotentialSpec<f64> = builtin_potential(BuiltinPotential::Quadratic, 1.0, 1).unwrap();
    let lambda = 0.01;
    let td = TamedDrift::new(q.clone(), lambda).unwrap();
    let mut z = PhaseState::new(vec![1.0], vec![0.5]).unwrap();
    let h0 = hamiltonian_energy(&z, &q);
    for _ in 0..100 {
        z = verlet_map(&z, &td, lambda);
        assert!((hamiltonian_energy(&z, &q) - h0).abs() <= 1e-3);
    }
}

#[test]
fn harmonic_quarter_period() {
    let q = builtin_potential(BuiltinPotential::Quadratic, 1.0, 1).unwrap();
    let z = PhaseState::new(vec![1.0], vec![0.0]).unwrap();
    let out = hamiltonian_reference(&z, &q, std::f64::consts::FRAC_PI_2, 10_000).unwrap();
    assert!(out.x[0].abs() <= 1e-8);
    assert!((out.v[0] + 1.0).abs() <= 1e-8);
}

#[test]
fn reference_flow_conserves_energy() {
    let p = builtin_potential(BuiltinPotential::DoubleWell, 1.0, 2).unwrap();
    let mut s = NoiseStream::new(5, 0);
    for _ in 0..10 {
        let mut w = [0.0; 4];
        s.fill_normal(&mut w);
        let n = w.iter().map(|c| c * c).sum::<f64>().sqrt();
        let r = 2.0 * s.uniform::<f64>();
        let z = PhaseState::new(vec![w[0] * r / n, w[1] * r / n], vec![w[2] * r / n, w[3] * r / n]).unwrap();
        let t = s.uniform::<f64>();
        let out = hamiltonian_reference(&z, &p, t, 10_000).unwrap();
        assert!((hamiltonian_energy(&out, &p) - hamiltonian_energy(&z, &p)).abs() <= 1e-10);
    }
}

/// Both schemes on the standard Gaussian target reach position variance 1
/// (the law of `x` under `e^{−|x|²/2}`) up to Monte Carlo error.
#[test]
fn stationary_position_variance() {
    let q = builtin_potential(BuiltinPotential::Quadratic, 1.0, 1).unwrap();
    let (lambda, gamma, chains, steps) = (0.01, 2.0, 2000, 3000);
    let td = TamedDrift::new(q, lambda).unwrap();
    let sp = SchemeParams::new(&td, gamma).unwrap();
    for scheme in [Scheme::Exponential, Scheme::Obabo] {
        let finals: Vec<f64> = (0..chains)
            .map(|k| {
                let z0 = PhaseState::new(vec![0.0], vec![0.0]).unwrap();
                let rec = run_chain(scheme, &z0, &td, &sp, steps, steps, &mut NoiseStream::new(8, k)).unwrap();
                rec.states.last().unwrap().x[0]
            })
            .collect();
        let n = chains as f64;
        let var = finals.iter().map(|x| x * x).sum::<f64>() / n;
        let se = (2.0 / n).sqrt();
        assert!((var - 1.0).abs() <= 3.0 * se, "{scheme}: variance {var}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn tamed_drift_agrees_inside(x in prop::collection::vec(-1.0f64..1.0, 3), frac in 0.0f64..1.0, log_lambda in -10.0f64..-2.0) {
        let p = builtin_potential(BuiltinPotential::DoubleWell, 1.0, 3).unwrap();
        let td = TamedDrift::new(p.clone(), 10f64.powf(log_lambda)).unwrap();
        let n = x.iter().map(|c| c * c).sum::<f64>().sqrt().max(1e-12);
        let y: Vec<f64> = x.iter().map(|c| c / n * frac * (td.r_lambda() - 2.0)).collect();
        let h = p.gradient(&y);
        let ht = td.eval(&y);
        for j in 0..3 {
            prop_assert!((h[j] - ht[j]).abs() <= 1e-12 * (1.0 + h[j].abs()));
        }
    }

    #[test]
    fn exp_step_is_affine_in_noise(x in -3.0f64..3.0, v in -3.0f64..3.0, n1 in -3.0f64..3.0, n2 in -3.0f64..3.0) {
        let p = builtin_potential(BuiltinPotential::DoubleWell, 1.0, 1).unwrap();
        let td = TamedDrift::new(p, 1e-3).unwrap();
        let sp = SchemeParams::new(&td, 10.0).unwrap();
        let z = PhaseState::new(vec![x], vec![v]).unwrap();
        let base = exp_step(&z, &td, &sp, (&[0.0], &[0.0]));
        let out = exp_step(&z, &td, &sp, (&[n1], &[n2]));
        let s = sp.noise_scale();
        prop_assert!((out.v[0] - base.v[0] - s * n1).abs() <= 1e-12 * (1.0 + out.v[0].abs()));
        prop_assert!((out.x[0] - base.x[0] - s * n2).abs() <= 1e-12 * (1.0 + out.x[0].abs()));
    }

    #[test]
    fn single_precision_step_tracks_double(x in -2.0f64..2.0, v in -2.0f64..2.0) {
        let p64 = builtin_potential(BuiltinPotential::DoubleWell, 1.0, 1).unwrap();
        let p32 = builtin_potential(BuiltinPotential::DoubleWell, 1.0f32, 1).unwrap();
        let t64 = TamedDrift::new(p64, 1e-2).unwrap();
        let t32 = TamedDrift::new(p32, 1e-2f32).unwrap();
        let s64 = SchemeParams::new(&t64, 4.0).unwrap();
        let s32 = SchemeParams::new(&t32, 4.0f32).unwrap();
        let a = obabo_step(&PhaseState::new(vec![x], vec![v]).unwrap(), &t64, &s64, &[0.3], &[-0.2]);
        let b = obabo_step(&PhaseState::new(vec![x as f32], vec![v as f32]).unwrap(), &t32, &s32, &[0.3f32], &[-0.2f32]);
        prop_assert!((a.x[0] - b.x[0] as f64).abs() <= 1e-5 * (1.0 + a.x[0].abs()));
        prop_assert!((a.v[0] - b.v[0] as f64).abs() <= 1e-5 * (1.0 + a.v[0].abs()));
    }
}
