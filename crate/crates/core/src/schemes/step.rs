use crate::schemes::{PhaseState, SchemeParams};
use crate::taming::TamedDrift;
use crate::Scalar;

/// Scratch buffers so steppers do not allocate.
#[derive(Debug, Clone)]
pub struct Workspace<T> {
    h0: Vec<T>,
    h1: Vec<T>,
}

impl<T: Scalar> Workspace<T> {
    pub fn new(dim: usize) -> Self {
        Self {
            h0: vec![T::zero(); dim],
            h1: vec![T::zero(); dim],
        }
    }
}

/// One step of the stochastic exponential scheme, in place.
///
/// `xi`, `xi_prime` are the unscaled increments with covariance `C`; they are
/// multiplied by `√(2γ)` here.
pub fn exp_step_in_place<T: Scalar>(
    z: &mut PhaseState<T>,
    td: &TamedDrift<T>,
    sp: &SchemeParams<T>,
    xi: &[T],
    xi_prime: &[T],
    ws: &mut Workspace<T>,
) {
    td.eval_into(&z.x, &mut ws.h0);
    let s = sp.noise_scale();
    let p = sp.psi;
    for j in 0..z.x.len() {
        let v = z.v[j];
        let h = ws.h0[j];
        z.v[j] = p.psi0 * v - p.psi1 * h + s * xi[j];
        z.x[j] = z.x[j] + p.psi1 * v - p.psi2 * h + s * xi_prime[j];
    }
}

pub fn exp_step<T: Scalar>(
    z: &PhaseState<T>,
    td: &TamedDrift<T>,
    sp: &SchemeParams<T>,
    noise: (&[T], &[T]),
) -> PhaseState<T> {
    let mut out = z.clone();
    let mut ws = Workspace::new(z.dim());
    exp_step_in_place(&mut out, td, sp, noise.0, noise.1, &mut ws);
    out
}

/// O, B, A, B, O with velocity damping `damp` and noise scale `scale`.
fn splitting<T: Scalar>(
    z: &mut PhaseState<T>,
    td: &TamedDrift<T>,
    lambda: T,
    damp: T,
    scale: T,
    g: Option<(&[T], &[T])>,
    ws: &mut Workspace<T>,
) {
    let half = lambda * T::lit(0.5);
    td.eval_into(&z.x, &mut ws.h0);
    for j in 0..z.x.len() {
        let kick = g.map_or(T::zero(), |(g, _)| scale * g[j]);
        z.v[j] = damp * z.v[j] + kick - half * ws.h0[j];
        z.x[j] = z.x[j] + lambda * z.v[j];
    }
    td.eval_into(&z.x, &mut ws.h1);
    for j in 0..z.x.len() {
        let kick = g.map_or(T::zero(), |(_, g2)| scale * g2[j]);
        z.v[j] = damp * (z.v[j] - half * ws.h1[j]) + kick;
    }
}

/// One OBABO step, in place. `g`, `g_prime` are standard normal vectors.
pub fn obabo_step_in_place<T: Scalar>(
    z: &mut PhaseState<T>,
    td: &TamedDrift<T>,
    sp: &SchemeParams<T>,
    g: &[T],
    g_prime: &[T],
    ws: &mut Workspace<T>,
) {
    splitting(z, td, sp.lambda, sp.eta_half, sp.ou_noise_scale(), Some((g, g_prime)), ws);
}

pub fn obabo_step<T: Scalar>(
    z: &PhaseState<T>,
    td: &TamedDrift<T>,
    sp: &SchemeParams<T>,
    g: &[T],
    g_prime: &[T],
) -> PhaseState<T> {
    let mut out = z.clone();
    let mut ws = Workspace::new(z.dim());
    obabo_step_in_place(&mut out, td, sp, g, g_prime, &mut ws);
    out
}

/// The OBABO transition written as one map:
/// `x₁ = x + λ(η̃v + √(1−η̃²)G) − λ²h_λ(x)/2`,
/// `v₁ = η̃²v − λη̃(h_λ(x) + h_λ(x₁))/2 + √(1−η̃²)(η̃G + G′)`.
pub fn obabo_closed_form<T: Scalar>(
    z: &PhaseState<T>,
    td: &TamedDrift<T>,
    sp: &SchemeParams<T>,
    g: &[T],
    g_prime: &[T],
) -> PhaseState<T> {
    let (lambda, e, s) = (sp.lambda, sp.eta_half, sp.ou_noise_scale());
    let half = T::lit(0.5);
    let h0 = td.eval(&z.x);
    let x1: Vec<T> = (0..z.dim())
        .map(|j| z.x[j] + lambda * (e * z.v[j] + s * g[j]) - half * lambda * lambda * h0[j])
        .collect();
    let h1 = td.eval(&x1);
    let v1 = (0..z.dim())
        .map(|j| {
            e * e * z.v[j] - half * lambda * e * (h0[j] + h1[j]) + s * (e * g[j] + g_prime[j])
        })
        .collect();
    PhaseState { x: x1, v: v1 }
}

/// Deterministic BAB (velocity Verlet) step with the tamed drift.
pub fn verlet_map<T: Scalar>(z: &PhaseState<T>, td: &TamedDrift<T>, lambda: T) -> PhaseState<T> {
    let mut out = z.clone();
    let mut ws = Workspace::new(z.dim());
    splitting(&mut out, td, lambda, T::one(), T::zero(), None, &mut ws);
    out
}
