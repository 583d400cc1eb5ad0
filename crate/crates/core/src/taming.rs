//! Monotonicity-preserving taming of a superlinear gradient.
//!
//! With `g(x) = h(x) − m·x`, the tamed drift is
//! `h_λ(x) = t(x)·g(x) + R_λ·s(x)·x + m·x`, where `t` fades `g` out over the
//! shell `r_λ−1 < |x| < r_λ` and `s` fades in a radial term of strength
//! `R_λ` over `r_λ−2 < |x| < r_λ−1`, capped to `R_λ·r_λ·x/|x|` outside the
//! ball of radius `r_λ`.

use crate::error::{invalid, Error, Result};
use crate::potential::PotentialSpec;
use crate::vecops::norm;
use crate::Scalar;

/// `r_λ = (L+m)·λ^{−1/(2(l+2))}`.
///
/// Rejects parameters giving `r_λ < 3`, for which the interior ball
/// `B(0, r_λ−2)` where `h_λ = h` would be degenerate.
pub fn taming_radius<T: Scalar>(lambda: T, lipschitz: T, m: T, growth: T) -> Result<T> {
    if !(lambda > T::zero()) {
        return Err(invalid("lambda", format!("must be positive, got {lambda}")));
    }
    let two = T::lit(2.0);
    let r = (lipschitz + m) * lambda.powf(-T::one() / (two * (growth + two)));
    if !(r >= T::lit(3.0)) {
        return Err(Error::Regime {
            condition: format!("taming radius r_λ = {r} must be at least 3"),
        });
    }
    Ok(r)
}

/// Closed-form cap `R_λ = (L + |h(0)|)·r_λ^{l+1}`, an upper bound for
/// `sup_{B(0,r_λ)} |g|`.
pub fn taming_cap<T: Scalar>(p: &PotentialSpec<T>, r_lambda: T) -> T {
    (p.lipschitz + p.gradient_norm_at_origin()) * r_lambda.powf(p.growth + T::one())
}

/// Fade-out weight `t`.
pub fn weight_t<T: Scalar>(norm_x: T, r_lambda: T) -> T {
    if norm_x <= r_lambda - T::one() {
        T::one()
    } else if norm_x < r_lambda {
        r_lambda - norm_x
    } else {
        T::zero()
    }
}

/// Fade-in weight `s`.
pub fn weight_s<T: Scalar>(norm_x: T, r_lambda: T) -> T {
    let two = T::lit(2.0);
    if norm_x <= r_lambda - two {
        T::zero()
    } else if norm_x < r_lambda - T::one() {
        norm_x - r_lambda + two
    } else if norm_x <= r_lambda {
        T::one()
    } else {
        r_lambda / norm_x
    }
}

/// Default Lipschitz constant used downstream, `M_λ = λ^{−1/2}`.
pub fn effective_lipschitz<T: Scalar>(lambda: T) -> T {
    lambda.sqrt().recip()
}

/// The four regions of the taming construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TamingRegion {
    /// `|x| ≤ r_λ−2`, where `h_λ = h`.
    Interior,
    /// `r_λ−2 < |x| ≤ r_λ−1`
    InnerShell,
    /// `r_λ−1 < |x| < r_λ`
    OuterShell,
    /// `|x| ≥ r_λ`
    Exterior,
}

impl TamingRegion {
    pub fn classify<T: Scalar>(norm_x: T, r_lambda: T) -> Self {
        if norm_x <= r_lambda - T::lit(2.0) {
            Self::Interior
        } else if norm_x <= r_lambda - T::one() {
            Self::InnerShell
        } else if norm_x < r_lambda {
            Self::OuterShell
        } else {
            Self::Exterior
        }
    }
}

/// Step-size indexed tamed drift `h_λ`. Immutable after construction.
#[derive(Debug, Clone)]
pub struct TamedDrift<T: Scalar> {
    base: PotentialSpec<T>,
    lambda: T,
    r_lambda: T,
    cap: T,
    m_lambda: T,
    lipschitz_overridden: bool,
}

impl<T: Scalar> TamedDrift<T> {
    /// Builds `h_λ` with `r_λ`, the closed-form `R_λ` and `M_λ = λ^{−1/2}`.
    pub fn new(base: PotentialSpec<T>, lambda: T) -> Result<Self> {
        let r = taming_radius(lambda, base.lipschitz, base.m, base.growth)?;
        let cap = taming_cap(&base, r);
        Ok(Self {
            base,
            lambda,
            r_lambda: r,
            cap,
            m_lambda: effective_lipschitz(lambda),
            lipschitz_overridden: false,
        })
    }

    /// Builds `h_λ` from an explicit radius and cap.
    pub fn from_parts(base: PotentialSpec<T>, lambda: T, r_lambda: T, cap: T) -> Result<Self> {
        if !(lambda > T::zero()) {
            return Err(invalid("lambda", "must be positive"));
        }
        if !(r_lambda >= T::lit(3.0)) {
            return Err(Error::Regime {
                condition: format!("taming radius r_λ = {r_lambda} must be at least 3"),
            });
        }
        if !(cap >= T::zero()) {
            return Err(invalid("cap", "must be nonnegative"));
        }
        Ok(Self {
            base,
            lambda,
            r_lambda,
            cap,
            m_lambda: effective_lipschitz(lambda),
            lipschitz_overridden: false,
        })
    }

    /// Replaces `M_λ` (used for `a = 1/M_λ` and the regime conditions).
    /// The override is flagged in every report header.
    pub fn with_lipschitz_override(mut self, m_lambda: T) -> Result<Self> {
        if !(m_lambda > T::zero()) || !m_lambda.is_finite() {
            return Err(invalid("m_override", "must be positive and finite"));
        }
        self.m_lambda = m_lambda;
        self.lipschitz_overridden = true;
        Ok(self)
    }

    /// Replaces `R_λ`. Used for fault injection.
    pub fn with_cap(mut self, cap: T) -> Self {
        self.cap = cap;
        self
    }

    pub fn base(&self) -> &PotentialSpec<T> {
        &self.base
    }
    pub fn dim(&self) -> usize {
        self.base.dim()
    }
    pub fn lambda(&self) -> T {
        self.lambda
    }
    pub fn r_lambda(&self) -> T {
        self.r_lambda
    }
    pub fn cap(&self) -> T {
        self.cap
    }
    pub fn m_lambda(&self) -> T {
        self.m_lambda
    }
    pub fn lipschitz_overridden(&self) -> bool {
        self.lipschitz_overridden
    }
    /// Strong-monotonicity constant of `h_λ` (the potential's `m`).
    pub fn m(&self) -> T {
        self.base.m
    }

    pub fn region(&self, x: &[T]) -> TamingRegion {
        TamingRegion::classify(norm(x), self.r_lambda)
    }

    /// Writes `h_λ(x)` into `out`. Inside `B(0, r_λ−2)` this is exactly `h(x)`.
    #[inline]
    pub fn eval_into(&self, x: &[T], out: &mut [T]) {
        let n = norm(x);
        if n <= self.r_lambda - T::lit(2.0) {
            self.base.gradient_into(x, out);
            return;
        }
        let t = weight_t(n, self.r_lambda);
        let s = weight_s(n, self.r_lambda);
        let m = self.base.m;
        let radial = self.cap * s + m;
        if t > T::zero() {
            self.base.gradient_into(x, out);
            for (o, &xi) in out.iter_mut().zip(x) {
                *o = t * (*o - m * xi) + radial * xi;
            }
        } else {
            for (o, &xi) in out.iter_mut().zip(x) {
                *o = radial * xi;
            }
        }
    }

    pub fn eval(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); x.len()];
        self.eval_into(x, &mut out);
        out
    }
}
