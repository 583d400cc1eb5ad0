use crate::error::{invalid, Result};
use crate::potential::PotentialSpec;
use crate::schemes::PhaseState;
use crate::vecops::norm_sq;
use crate::Scalar;

/// `H(x, v) = u(x) + |v|²/2`.
pub fn hamiltonian_energy<T: Scalar>(z: &PhaseState<T>, p: &PotentialSpec<T>) -> T {
    p.value(&z.x) + norm_sq(&z.v) * T::lit(0.5)
}

/// Integrates `x′ = v`, `v′ = −∇u(x)` over time `t` with `substeps`
/// classical Runge–Kutta steps, using the untamed gradient.
pub fn hamiltonian_reference<T: Scalar>(
    z: &PhaseState<T>,
    p: &PotentialSpec<T>,
    t: T,
    substeps: usize,
) -> Result<PhaseState<T>> {
    if substeps == 0 {
        return Err(invalid("substeps", "must be at least 1"));
    }
    let d = z.dim();
    let dt = t / T::from_usize(substeps).unwrap_or_else(T::one);
    let half = dt * T::lit(0.5);
    let sixth = dt / T::lit(6.0);
    let two = T::lit(2.0);

    let mut x = z.x.clone();
    let mut v = z.v.clone();
    let mut xs = vec![T::zero(); d];
    let (mut k1, mut k2, mut k3, mut k4) =
        (vec![T::zero(); d], vec![T::zero(); d], vec![T::zero(); d], vec![T::zero(); d]);

    for _ in 0..substeps {
        // Position slopes are the velocities at each stage; velocity slopes are −∇u.
        p.gradient_into(&x, &mut k1);
        for j in 0..d {
            xs[j] = x[j] + half * v[j];
        }
        p.gradient_into(&xs, &mut k2);
        for j in 0..d {
            xs[j] = x[j] + half * (v[j] - half * k1[j]);
        }
        p.gradient_into(&xs, &mut k3);
        for j in 0..d {
            xs[j] = x[j] + dt * (v[j] - half * k2[j]);
        }
        p.gradient_into(&xs, &mut k4);
        for j in 0..d {
            let v1 = v[j];
            let v2 = v[j] - half * k1[j];
            let v3 = v[j] - half * k2[j];
            let v4 = v[j] - dt * k3[j];
            x[j] = x[j] + sixth * (v1 + two * v2 + two * v3 + v4);
            v[j] = v[j] - sixth * (k1[j] + two * k2[j] + two * k3[j] + k4[j]);
        }
    }
    Ok(PhaseState { x, v })
}
