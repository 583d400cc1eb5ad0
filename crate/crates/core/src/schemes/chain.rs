use crate::error::{invalid, Error, Result};
use crate::metrics::{weighted_norm_sq_diff, WeightedNormParams};
use crate::schemes::noise::NoiseStream;
use crate::schemes::step::{exp_step_in_place, obabo_step_in_place, Workspace};
use crate::schemes::{PhaseState, Scheme, SchemeParams};
use crate::taming::TamedDrift;
use crate::Scalar;

/// Below this weighted squared distance two coupled chains count as merged.
const MERGE_FLOOR: f64 = 1e-300;

/// Advances states one step at a time without allocating. Noise is drawn
/// once per step and may be applied to several states (synchronous coupling).
#[derive(Debug, Clone)]
pub struct Stepper<'a, T: Scalar> {
    scheme: Scheme,
    td: &'a TamedDrift<T>,
    sp: &'a SchemeParams<T>,
    first: Vec<T>,
    second: Vec<T>,
    ws: Workspace<T>,
}

impl<'a, T: Scalar> Stepper<'a, T> {
    pub fn new(scheme: Scheme, td: &'a TamedDrift<T>, sp: &'a SchemeParams<T>) -> Self {
        let d = td.dim();
        Self {
            scheme,
            td,
            sp,
            first: vec![T::zero(); d],
            second: vec![T::zero(); d],
            ws: Workspace::new(d),
        }
    }

    /// Draws the noise for the next step: `(Ξ, Ξ′)` for the exponential
    /// scheme, `(G, G′)` for OBABO.
    pub fn draw(&mut self, stream: &mut NoiseStream) {
        match self.scheme {
            Scheme::Exponential => stream.fill_pair(&self.sp.factor, &mut self.first, &mut self.second),
            Scheme::Obabo => {
                stream.fill_normal(&mut self.first);
                stream.fill_normal(&mut self.second);
            }
        }
    }

    /// Applies the last drawn noise to `z`.
    pub fn apply(&mut self, z: &mut PhaseState<T>) {
        match self.scheme {
            Scheme::Exponential => {
                exp_step_in_place(z, self.td, self.sp, &self.first, &self.second, &mut self.ws)
            }
            Scheme::Obabo => {
                obabo_step_in_place(z, self.td, self.sp, &self.first, &self.second, &mut self.ws)
            }
        }
    }

    pub fn step(&mut self, z: &mut PhaseState<T>, stream: &mut NoiseStream) {
        self.draw(stream);
        self.apply(z);
    }
}

/// Output of [`run_chain`] or [`run_coupled`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord<T> {
    pub n_steps: usize,
    pub stride: usize,
    /// Step indices of the recorded states (multiples of `stride`, starting at 0).
    pub steps: Vec<usize>,
    pub states: Vec<PhaseState<T>>,
    /// Second chain of a coupled run, recorded at the same steps.
    pub partner_states: Vec<PhaseState<T>>,
    /// `ratios[n] = ‖z̄ₙ₊₁‖²_{a,b} / ‖z̄ₙ‖²_{a,b}` for the coupled difference `z̄`,
    /// recorded until the chains merge.
    pub ratios: Vec<T>,
    /// Step at which the coupled difference fell below the merge floor.
    pub merged_at: Option<usize>,
}

fn check_run_args<T: Scalar>(z0: &PhaseState<T>, td: &TamedDrift<T>, n_steps: usize, stride: usize) -> Result<()> {
    if n_steps == 0 {
        return Err(invalid("n_steps", "must be at least 1"));
    }
    if stride == 0 {
        return Err(invalid("stride", "must be at least 1"));
    }
    if z0.dim() != td.dim() || z0.v.len() != td.dim() {
        return Err(Error::Dimension {
            expected: td.dim(),
            got: z0.dim(),
        });
    }
    Ok(())
}

/// Runs one chain for `n_steps`, recording every `stride`-th state.
pub fn run_chain<T: Scalar>(
    scheme: Scheme,
    z0: &PhaseState<T>,
    td: &TamedDrift<T>,
    sp: &SchemeParams<T>,
    n_steps: usize,
    stride: usize,
    stream: &mut NoiseStream,
) -> Result<RunRecord<T>> {
    check_run_args(z0, td, n_steps, stride)?;
    let mut stepper = Stepper::new(scheme, td, sp);
    let mut z = z0.clone();
    let mut rec = RunRecord {
        n_steps,
        stride,
        steps: vec![0],
        states: vec![z.clone()],
        partner_states: Vec::new(),
        ratios: Vec::new(),
        merged_at: None,
    };
    for n in 1..=n_steps {
        stepper.step(&mut z, stream);
        if !z.is_finite() {
            return Err(Error::NonFinite { step: n });
        }
        if n % stride == 0 {
            rec.steps.push(n);
            rec.states.push(z.clone());
        }
    }
    Ok(rec)
}

/// Runs two chains on shared noise and records the per-step contraction
/// ratios of their weighted squared distance (with `a = 1/M_λ`, `b = 1/γ`).
#[allow(clippy::too_many_arguments)]
pub fn run_coupled<T: Scalar>(
    scheme: Scheme,
    z0: &PhaseState<T>,
    z0_tilde: &PhaseState<T>,
    td: &TamedDrift<T>,
    sp: &SchemeParams<T>,
    n_steps: usize,
    stride: usize,
    stream: &mut NoiseStream,
) -> Result<RunRecord<T>> {
    check_run_args(z0, td, n_steps, stride)?;
    check_run_args(z0_tilde, td, n_steps, stride)?;
    let w = WeightedNormParams { a: sp.a, b: sp.b };
    let floor = T::lit(MERGE_FLOOR);
    let mut stepper = Stepper::new(scheme, td, sp);
    let (mut z, mut zt) = (z0.clone(), z0_tilde.clone());
    let mut rec = RunRecord {
        n_steps,
        stride,
        steps: vec![0],
        states: vec![z.clone()],
        partner_states: vec![zt.clone()],
        ratios: Vec::with_capacity(n_steps),
        merged_at: None,
    };
    let mut prev = weighted_norm_sq_diff(&z, &zt, &w);
    if !(prev > floor) {
        rec.merged_at = Some(0);
    }
    for n in 1..=n_steps {
        stepper.draw(stream);
        stepper.apply(&mut z);
        stepper.apply(&mut zt);
        if !z.is_finite() || !zt.is_finite() {
            return Err(Error::NonFinite { step: n });
        }
        if rec.merged_at.is_none() {
            let cur = weighted_norm_sq_diff(&z, &zt, &w);
            rec.ratios.push(cur / prev);
            if !(cur > floor) {
                rec.merged_at = Some(n);
            }
            prev = cur;
        }
        if n % stride == 0 {
            rec.steps.push(n);
            rec.states.push(z.clone());
            rec.partner_states.push(zt.clone());
        }
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::{builtin_potential, BuiltinPotential};

    #[test]
    fn equal_starts_stay_equal() {
        let p = builtin_potential(BuiltinPotential::DoubleWell, 1.0, 2).unwrap();
        let td = TamedDrift::new(p, 1e-3).unwrap();
        let sp = SchemeParams::new(&td, 30.0).unwrap();
        let z = PhaseState::new(vec![0.4, -0.2], vec![1.0, 0.0]).unwrap();
        for scheme in [Scheme::Exponential, Scheme::Obabo] {
            let rec = run_coupled(scheme, &z, &z, &td, &sp, 50, 10, &mut NoiseStream::new(3, 0)).unwrap();
            assert_eq!(rec.merged_at, Some(0));
            assert!(rec.ratios.is_empty());
            for (a, b) in rec.states.iter().zip(&rec.partner_states) {
                assert_eq!(a, b);
            }
            assert_eq!(rec.steps, vec![0, 10, 20, 30, 40, 50]);
        }
    }

    #[test]
    fn chain_is_reproducible() {
        let p = builtin_potential(BuiltinPotential::Quadratic, 1.0, 1).unwrap();
        let td = TamedDrift::new(p, 1e-3).unwrap();
        let sp = SchemeParams::new(&td, 28.0).unwrap();
        let z = PhaseState::new(vec![1.0], vec![0.0]).unwrap();
        let a = run_chain(Scheme::Exponential, &z, &td, &sp, 100, 7, &mut NoiseStream::new(9, 2)).unwrap();
        let b = run_chain(Scheme::Exponential, &z, &td, &sp, 100, 7, &mut NoiseStream::new(9, 2)).unwrap();
        assert_eq!(a, b);
        assert!(run_chain(Scheme::Obabo, &z, &td, &sp, 0, 1, &mut NoiseStream::new(9, 2)).is_err());
    }
}
