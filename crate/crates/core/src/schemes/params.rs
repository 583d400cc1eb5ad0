use std::fmt;

use crate::error::{invalid, Error, Result};
use crate::taming::TamedDrift;
use crate::Scalar;

/// `ψ₀(λ) = e^{−γλ}`, `ψ₁ = ∫ψ₀`, `ψ₂ = ∫ψ₁`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiCoefficients<T> {
    pub psi0: T,
    pub psi1: T,
    pub psi2: T,
}

/// Per-coordinate covariance of the noise pair `(Ξ, Ξ′)`:
/// `C = ∫₀^λ [ψ₀(t), ψ₁(t)]ᵀ[ψ₀(t), ψ₁(t)] dt`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseCovariance<T> {
    pub c11: T,
    pub c12: T,
    pub c22: T,
}

/// Lower-triangular factor `[[l11, 0], [l21, l22]]` of a [`NoiseCovariance`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CholeskyFactor<T> {
    pub l11: T,
    pub l21: T,
    pub l22: T,
}

impl<T: Scalar> NoiseCovariance<T> {
    /// 2×2 Cholesky factorization. Tiny negative Schur complements produced
    /// by rounding are clamped to zero; anything else is rejected.
    pub fn cholesky(&self) -> Result<CholeskyFactor<T>> {
        let not_psd = || Error::NotPsd {
            c11: self.c11.as_f64(),
            c12: self.c12.as_f64(),
            c22: self.c22.as_f64(),
        };
        if !(self.c11 >= T::zero()) || !(self.c22 >= T::zero()) {
            return Err(not_psd());
        }
        let l11 = self.c11.sqrt();
        let l21 = if l11 > T::zero() {
            self.c12 / l11
        } else if self.c12 == T::zero() {
            T::zero()
        } else {
            return Err(not_psd());
        };
        let schur = self.c22 - l21 * l21;
        let tol = T::epsilon() * T::lit(64.0) * (self.c22.abs() + l21 * l21);
        let l22 = if schur >= T::zero() {
            schur.sqrt()
        } else if schur >= -tol {
            T::zero()
        } else {
            return Err(not_psd());
        };
        Ok(CholeskyFactor { l11, l21, l22 })
    }

    pub fn is_psd(&self) -> bool {
        self.c11 >= T::zero() && self.c22 >= T::zero() && self.c12 * self.c12 <= self.c11 * self.c22
    }
}

const SERIES_SWITCH: f64 = 0.1;
const SERIES_TERMS: i32 = 24;

/// `Σ_{k=k0}^{K} coef(k) x^k / k!`
fn series<T: Scalar>(x: T, k0: i32, coef: impl Fn(i32) -> T) -> T {
    let mut term = T::one(); // x^k / k!
    let mut sum = T::zero();
    for k in 1..=SERIES_TERMS {
        term = term * x / T::from_i32(k).unwrap_or_else(T::one);
        if k >= k0 {
            sum = sum + coef(k) * term;
        }
    }
    sum
}

fn alternating<T: Scalar>(k: i32) -> T {
    if k % 2 == 0 {
        T::one()
    } else {
        -T::one()
    }
}

/// `1 − e^{−x}`
pub(crate) fn one_minus_exp<T: Scalar>(x: T) -> T {
    -(-x).exp_m1()
}

/// `x − (1 − e^{−x})`, accurate for small `x`.
pub(crate) fn x_minus_one_minus_exp<T: Scalar>(x: T) -> T {
    if x < T::lit(SERIES_SWITCH) {
        series(x, 2, alternating::<T>)
    } else {
        x + (-x).exp_m1()
    }
}

/// `(1 − e^{−x}) − (1 − e^{−2x})/2`
fn c12_scaled<T: Scalar>(x: T) -> T {
    if x < T::lit(SERIES_SWITCH) {
        series(x, 2, |k| {
            -alternating::<T>(k) * (T::one() - T::lit(2.0).powi(k - 1))
        })
    } else {
        one_minus_exp(x) - one_minus_exp(x + x) * T::lit(0.5)
    }
}

/// `x − 2(1 − e^{−x}) + (1 − e^{−2x})/2`
fn c22_scaled<T: Scalar>(x: T) -> T {
    if x < T::lit(SERIES_SWITCH) {
        series(x, 3, |k| {
            -alternating::<T>(k) * (T::lit(2.0).powi(k - 1) - T::lit(2.0))
        })
    } else {
        x - T::lit(2.0) * one_minus_exp(x) + one_minus_exp(x + x) * T::lit(0.5)
    }
}

/// `ψ₀ = e^{−γλ}`, `ψ₁ = (1−e^{−γλ})/γ`, `ψ₂ = (λγ + e^{−γλ} − 1)/γ²`.
///
/// `γλ = 0` gives `(1, 0, 0)`.
pub fn psi_coefficients<T: Scalar>(lambda: T, gamma: T) -> PsiCoefficients<T> {
    let x = gamma * lambda;
    if x == T::zero() {
        return PsiCoefficients {
            psi0: T::one(),
            psi1: T::zero(),
            psi2: T::zero(),
        };
    }
    PsiCoefficients {
        psi0: (-x).exp(),
        psi1: one_minus_exp(x) / gamma,
        psi2: x_minus_one_minus_exp(x) / (gamma * gamma),
    }
}

/// Closed-form entries of `C`:
/// `C₁₁ = (1−e^{−2γλ})/(2γ)`,
/// `C₁₂ = [(1−e^{−γλ})/γ − (1−e^{−2γλ})/(2γ)]/γ`,
/// `C₂₂ = [λ − 2(1−e^{−γλ})/γ + (1−e^{−2γλ})/(2γ)]/γ²`.
pub fn noise_covariance<T: Scalar>(lambda: T, gamma: T) -> NoiseCovariance<T> {
    let x = gamma * lambda;
    if x == T::zero() {
        return NoiseCovariance {
            c11: T::zero(),
            c12: T::zero(),
            c22: T::zero(),
        };
    }
    let g2 = gamma * gamma;
    NoiseCovariance {
        c11: one_minus_exp(x + x) / (gamma + gamma),
        c12: c12_scaled(x) / g2,
        c22: c22_scaled(x) / (g2 * gamma),
    }
}

/// One named inequality of a scheme's step-size/friction regime.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeCondition {
    pub label: &'static str,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

impl fmt::Display for RegimeCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} ({:.6e} vs {:.6e}): {}",
            self.label,
            self.lhs,
            self.rhs,
            if self.holds { "holds" } else { "violated" }
        )
    }
}

const REGIME_REL_TOL: f64 = 1e-12;

fn at_least(label: &'static str, lhs: f64, rhs: f64) -> RegimeCondition {
    RegimeCondition {
        label,
        lhs,
        rhs,
        holds: lhs >= rhs * (1.0 - REGIME_REL_TOL),
    }
}

fn at_most(label: &'static str, lhs: f64, rhs: f64) -> RegimeCondition {
    RegimeCondition {
        label,
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + REGIME_REL_TOL),
    }
}

/// Fails with the first violated condition named.
pub fn require_regime(conditions: &[RegimeCondition]) -> Result<()> {
    match conditions.iter().find(|c| !c.holds) {
        Some(c) => Err(Error::Regime {
            condition: c.to_string(),
        }),
        None => Ok(()),
    }
}

/// Step size, friction and every derived coefficient of both schemes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeParams<T> {
    pub lambda: T,
    pub gamma: T,
    /// `e^{−γλ}`
    pub eta: T,
    /// `η̃ = e^{−γλ/2}`
    pub eta_half: T,
    /// `1 − η̃² = 1 − e^{−γλ}`, kept separately for accuracy at small `γλ`.
    pub one_minus_eta_half_sq: T,
    pub psi: PsiCoefficients<T>,
    pub cov: NoiseCovariance<T>,
    pub factor: CholeskyFactor<T>,
    /// `a = 1/M_λ`
    pub a: T,
    /// `b = 1/γ`
    pub b: T,
    /// `f(λ) = mλ/(4γ)`
    pub f_lambda: T,
    /// `κ = m/(3γ)`
    pub kappa: T,
    pub m: T,
    pub m_lambda: T,
}

impl<T: Scalar> SchemeParams<T> {
    /// Coefficients matching `td` (same λ, its `m` and `M_λ`).
    pub fn new(td: &TamedDrift<T>, gamma: T) -> Result<Self> {
        Self::from_constants(td.lambda(), gamma, td.m(), td.m_lambda())
    }

    pub fn from_constants(lambda: T, gamma: T, m: T, m_lambda: T) -> Result<Self> {
        if !(lambda > T::zero()) || !lambda.is_finite() {
            return Err(invalid("lambda", format!("must be positive, got {lambda}")));
        }
        if !(gamma > T::zero()) || !gamma.is_finite() {
            return Err(invalid("gamma", format!("must be positive, got {gamma}")));
        }
        if !(m_lambda > T::zero()) {
            return Err(invalid("m_lambda", "must be positive"));
        }
        let x = gamma * lambda;
        let cov = noise_covariance(lambda, gamma);
        let factor = cov.cholesky()?;
        Ok(Self {
            lambda,
            gamma,
            eta: (-x).exp(),
            eta_half: (-x * T::lit(0.5)).exp(),
            one_minus_eta_half_sq: one_minus_exp(x),
            psi: psi_coefficients(lambda, gamma),
            cov,
            factor,
            a: m_lambda.recip(),
            b: gamma.recip(),
            f_lambda: m * lambda / (T::lit(4.0) * gamma),
            kappa: m / (T::lit(3.0) * gamma),
            m,
            m_lambda,
        })
    }

    /// `√(2γ)`
    pub fn noise_scale(&self) -> T {
        (self.gamma + self.gamma).sqrt()
    }

    /// `√(1 − η̃²)`
    pub fn ou_noise_scale(&self) -> T {
        self.one_minus_eta_half_sq.sqrt()
    }

    /// Conditions for the exponential-scheme contraction: `γ ≥ 5√M_λ`, `λ ≤ 1/(2γ)`.
    pub fn exponential_regime(&self) -> Vec<RegimeCondition> {
        let (lambda, gamma, ml) = (self.lambda.as_f64(), self.gamma.as_f64(), self.m_lambda.as_f64());
        vec![
            at_least("gamma >= 5*sqrt(M_lambda)", gamma, 5.0 * ml.sqrt()),
            at_most("lambda <= 1/(2*gamma)", lambda, 1.0 / (2.0 * gamma)),
        ]
    }

    /// Conditions for the OBABO contraction: `γ ≥ 2√M_λ`, `λ ≤ m/(33γ³)`.
    pub fn obabo_regime(&self) -> Vec<RegimeCondition> {
        let (lambda, gamma, ml, m) = (
            self.lambda.as_f64(),
            self.gamma.as_f64(),
            self.m_lambda.as_f64(),
            self.m.as_f64(),
        );
        vec![
            at_least("gamma >= 2*sqrt(M_lambda)", gamma, 2.0 * ml.sqrt()),
            at_most("lambda <= m/(33*gamma^3)", lambda, m / (33.0 * gamma.powi(3))),
        ]
    }

    /// `b² < a/4`, needed for the norm-equivalence bounds.
    pub fn norm_equivalence_holds(&self) -> bool {
        self.b * self.b < self.a / T::lit(4.0)
    }
}
