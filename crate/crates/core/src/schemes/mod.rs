//! Discretizations of the kinetic Langevin diffusion driven by a tamed drift.

mod chain;
mod hamiltonian;
mod lsi;
mod noise;
mod params;
mod step;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::Scalar;

pub use chain::{run_chain, run_coupled, RunRecord, Stepper};
pub use hamiltonian::{hamiltonian_energy, hamiltonian_reference};
pub use lsi::{
    coord_map_m, coord_map_m_inverse, coord_map_s, coord_map_s_inverse, mean_map_fbar,
    noise_map_theta, sigma_bar_displayed, sigma_bar_from_covariance, sym2_opnorm,
};
pub use noise::{sample_noise_pair, NoiseStream};
pub use params::{
    noise_covariance, psi_coefficients, require_regime, CholeskyFactor, NoiseCovariance,
    PsiCoefficients, RegimeCondition, SchemeParams,
};
pub use step::{
    exp_step, exp_step_in_place, obabo_closed_form, obabo_step, obabo_step_in_place, verlet_map,
    Workspace,
};

/// A point `(x, v)` of position–velocity space.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState<T> {
    pub x: Vec<T>,
    pub v: Vec<T>,
}

impl<T: Scalar> PhaseState<T> {
    pub fn new(x: Vec<T>, v: Vec<T>) -> Result<Self> {
        if x.len() != v.len() {
            return Err(Error::Dimension {
                expected: x.len(),
                got: v.len(),
            });
        }
        Ok(Self { x, v })
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            x: vec![T::zero(); dim],
            v: vec![T::zero(); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn is_finite(&self) -> bool {
        crate::vecops::all_finite(&self.x) && crate::vecops::all_finite(&self.v)
    }
}

/// Which discretization to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    /// Stochastic exponential scheme with correlated Gaussian increments.
    Exponential,
    /// OBABO splitting.
    Obabo,
}

impl Scheme {
    /// Per-step contraction rate of the weighted squared distance:
    /// `f(λ)` for the exponential scheme, `λκ` for OBABO.
    pub fn contraction_rate<T: Scalar>(self, sp: &SchemeParams<T>) -> T {
        match self {
            Self::Exponential => sp.f_lambda,
            Self::Obabo => sp.lambda * sp.kappa,
        }
    }

    pub fn regime<T: Scalar>(self, sp: &SchemeParams<T>) -> Vec<RegimeCondition> {
        match self {
            Self::Exponential => sp.exponential_regime(),
            Self::Obabo => sp.obabo_regime(),
        }
    }

    /// Smallest friction allowed by the regime: `5√M_λ` or `2√M_λ`.
    pub fn minimal_gamma<T: Scalar>(self, m_lambda: T) -> T {
        let k = match self {
            Self::Exponential => 5.0,
            Self::Obabo => 2.0,
        };
        T::lit(k) * m_lambda.sqrt()
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Exponential => "exponential",
            Self::Obabo => "obabo",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exponential" | "exp" => Ok(Self::Exponential),
            "obabo" => Ok(Self::Obabo),
            other => Err(crate::error::invalid(
                "scheme",
                format!("unknown scheme `{other}` (expected `exponential` or `obabo`)"),
            )),
        }
    }
}
