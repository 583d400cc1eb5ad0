//! Coordinate changes and maps used by the log-Sobolev stability arguments.

use crate::error::{invalid, Result};
use crate::schemes::step::obabo_closed_form;
use crate::schemes::{PhaseState, SchemeParams};
use crate::taming::TamedDrift;
use crate::Scalar;

/// `(x, v) ↦ (φ, ψ) = (x, x + 2v/γ)`.
pub fn coord_map_m<T: Scalar>(z: &PhaseState<T>, gamma: T) -> (Vec<T>, Vec<T>) {
    let k = T::lit(2.0) / gamma;
    let psi = z.x.iter().zip(&z.v).map(|(&x, &v)| x + k * v).collect();
    (z.x.clone(), psi)
}

/// `(φ, ψ) ↦ (φ, γ(ψ − φ)/2)`.
pub fn coord_map_m_inverse<T: Scalar>(phi: &[T], psi: &[T], gamma: T) -> PhaseState<T> {
    let k = gamma * T::lit(0.5);
    PhaseState {
        x: phi.to_vec(),
        v: phi.iter().zip(psi).map(|(&p, &q)| k * (q - p)).collect(),
    }
}

fn s_scale<T: Scalar>(a: T, b: T) -> Result<T> {
    let gap = a - b * b;
    if !(gap > T::zero()) {
        return Err(invalid("a", format!("must exceed b² (a = {a}, b = {b})")));
    }
    Ok(gap.sqrt())
}

/// `(x, v) ↦ (x + bv, √(a − b²)·v)`; requires `a > b²`.
pub fn coord_map_s<T: Scalar>(z: &PhaseState<T>, a: T, b: T) -> Result<PhaseState<T>> {
    let k = s_scale(a, b)?;
    Ok(PhaseState {
        x: z.x.iter().zip(&z.v).map(|(&x, &v)| x + b * v).collect(),
        v: z.v.iter().map(|&v| k * v).collect(),
    })
}

pub fn coord_map_s_inverse<T: Scalar>(w: &PhaseState<T>, a: T, b: T) -> Result<PhaseState<T>> {
    let k = s_scale(a, b)?;
    let v: Vec<T> = w.v.iter().map(|&q| q / k).collect();
    let x = w.x.iter().zip(&v).map(|(&p, &v)| p - b * v).collect();
    Ok(PhaseState { x, v })
}

/// Mean of one exponential-scheme step expressed in `(φ, ψ)` coordinates:
///
/// `(φ + (1−η)(ψ−φ)/2 − ψ₂h_λ(φ),  φ + (1+η)(ψ−φ)/2 − (λ + (1−η)/γ)h_λ(φ)/γ)`.
pub fn mean_map_fbar<T: Scalar>(
    phi: &[T],
    psi: &[T],
    td: &TamedDrift<T>,
    sp: &SchemeParams<T>,
) -> (Vec<T>, Vec<T>) {
    let h = td.eval(phi);
    let half = T::lit(0.5);
    let one_minus_eta = sp.psi.psi1 * sp.gamma;
    let first = half * one_minus_eta;
    let second = half * (T::lit(2.0) - one_minus_eta);
    let k2 = (sp.lambda + sp.psi.psi1) / sp.gamma;
    let mut out_phi = Vec::with_capacity(phi.len());
    let mut out_psi = Vec::with_capacity(phi.len());
    for j in 0..phi.len() {
        let diff = psi[j] - phi[j];
        out_phi.push(phi[j] + first * diff - sp.psi.psi2 * h[j]);
        out_psi.push(phi[j] + second * diff - k2 * h[j]);
    }
    (out_phi, out_psi)
}

/// One OBABO transition as a function of the state and the two Gaussian vectors.
pub fn noise_map_theta<T: Scalar>(
    z: &PhaseState<T>,
    td: &TamedDrift<T>,
    sp: &SchemeParams<T>,
    g: &[T],
    g_prime: &[T],
) -> PhaseState<T> {
    obabo_closed_form(z, td, sp, g, g_prime)
}

/// Closed-form entries `(Σ̄₁₁, Σ̄₁₂, Σ̄₂₂)` of the per-coordinate noise
/// covariance in `(φ, ψ)` coordinates, as displayed:
///
/// `Σ̄₁₁ = 2λ/γ − 3/γ² + 4e^{−γλ}/γ² − e^{−2γλ}/γ²`,
/// `Σ̄₁₂ = 2λ/γ − 1/γ² + e^{−2γλ}/γ²`,
/// `Σ̄₂₂ = 2λ/γ + 5/γ² − 8e^{−γλ}/γ² + 3e^{−2γλ}/γ²`.
///
/// Evaluated through `e^{−γλ} − 1` to avoid cancellation.
pub fn sigma_bar_displayed<T: Scalar>(lambda: T, gamma: T) -> [T; 3] {
    let x = gamma * lambda;
    let e1 = (-x).exp_m1();
    let g2 = gamma * gamma;
    let two = T::lit(2.0);
    [
        (two * x + two * e1 - e1 * e1) / g2,
        (two * x + (-(x + x)).exp_m1()) / g2,
        (two * x - two * e1 + T::lit(3.0) * e1 * e1) / g2,
    ]
}

/// The same covariance computed directly as `M·(2γC)·Mᵀ` from the noise
/// covariance `C` in `sp`, ordered `(Σ̄₁₁, Σ̄₁₂, Σ̄₂₂)`.
pub fn sigma_bar_from_covariance<T: Scalar>(sp: &SchemeParams<T>) -> [T; 3] {
    let two_gamma = sp.gamma + sp.gamma;
    // Covariance of (position noise, velocity noise).
    let kxx = two_gamma * sp.cov.c22;
    let kxv = two_gamma * sp.cov.c12;
    let kvv = two_gamma * sp.cov.c11;
    let k = T::lit(2.0) / sp.gamma;
    [kxx, kxx + k * kxv, kxx + (k + k) * kxv + k * k * kvv]
}

/// Spectral norm of the symmetric matrix `[[s11, s12], [s12, s22]]`.
pub fn sym2_opnorm<T: Scalar>(s: [T; 3]) -> T {
    let half = T::lit(0.5);
    let mean = half * (s[0] + s[2]);
    let rad = (half * (s[0] - s[2])).hypot(s[1]);
    (mean + rad).abs().max((mean - rad).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn coordinate_map_examples() {
        let z = PhaseState::new(vec![1.0], vec![3.0]).unwrap();
        assert_eq!(coord_map_m(&z, 2.0), (vec![1.0], vec![4.0]));
        let z0 = PhaseState::new(vec![1.5, -2.0], vec![0.0, 0.0]).unwrap();
        let (p, q) = coord_map_m(&z0, 3.0);
        assert_eq!(p, q);

        let s = coord_map_s(&z, 1.0, 0.0).unwrap();
        assert_eq!(s, z);
        let s = coord_map_s(&PhaseState::new(vec![0.0], vec![1.0]).unwrap(), 4.0, 1.0).unwrap();
        assert_eq!(s.x, vec![1.0]);
        assert_relative_eq!(s.v[0], 3f64.sqrt(), max_relative = 1e-15);
        assert!(coord_map_s(&z, 1.0, 1.0).is_err());
    }

    #[test]
    fn sigma_bar_small_step_behaviour() {
        let (lambda, gamma) = (1e-4, 2.0);
        let d = sigma_bar_displayed(lambda, gamma);
        assert_relative_eq!(sym2_opnorm(d) / (4.0 * lambda / gamma), 1.0, max_relative = 1e-3);
        let sp = SchemeParams::from_constants(lambda, gamma, 0.5, 1.0).unwrap();
        let c = sigma_bar_from_covariance(&sp);
        assert_relative_eq!(c[0], d[0], max_relative = 1e-6);
        assert_relative_eq!(c[1], d[1], max_relative = 1e-8);
        assert_relative_eq!(sym2_opnorm(c) / (4.0 * lambda / gamma), 2.0, max_relative = 1e-3);
    }

    #[test]
    fn sym2_opnorm_values() {
        assert_eq!(sym2_opnorm([2.0, 0.0, -3.0]), 3.0);
        assert_relative_eq!(sym2_opnorm([1.0, 1.0, 1.0]), 2.0, max_relative = 1e-15);
    }
}
