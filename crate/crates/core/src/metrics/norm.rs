use crate::error::{invalid, Result};
use crate::schemes::{PhaseState, SchemeParams};
use crate::Scalar;

/// Parameters of `|z|²_{a,b} = |x|² + 2b⟨x,v⟩ + a|v|²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedNormParams<T> {
    pub a: T,
    pub b: T,
}

impl<T: Scalar> WeightedNormParams<T> {
    pub fn new(a: T, b: T) -> Result<Self> {
        if !(a > T::zero()) || !(b > T::zero()) {
            return Err(invalid("a, b", format!("must be positive (a = {a}, b = {b})")));
        }
        Ok(Self { a, b })
    }

    /// `a = 1/M_λ`, `b = 1/γ`.
    pub fn from_scheme(sp: &SchemeParams<T>) -> Self {
        Self { a: sp.a, b: sp.b }
    }

    /// `b² < a/4`, under which the norm is equivalent to the Euclidean one.
    pub fn is_equivalent(&self) -> bool {
        self.b * self.b < self.a / T::lit(4.0)
    }

    /// `(½·min{1,a}, (3/2)·max{1,a})`: bounds on `|z|²_{a,b} / |z|²` when `b² < a/4`.
    pub fn equivalence_bounds(&self) -> (T, T) {
        (
            T::lit(0.5) * self.a.min(T::one()),
            T::lit(1.5) * self.a.max(T::one()),
        )
    }
}

pub fn weighted_norm_sq<T: Scalar>(z: &PhaseState<T>, w: &WeightedNormParams<T>) -> T {
    let two_b = w.b + w.b;
    z.x.iter()
        .zip(&z.v)
        .fold(T::zero(), |acc, (&x, &v)| acc + x * x + two_b * x * v + w.a * v * v)
}

/// `|z₁ − z₂|²_{a,b}` without allocating the difference.
pub fn weighted_norm_sq_diff<T: Scalar>(z1: &PhaseState<T>, z2: &PhaseState<T>, w: &WeightedNormParams<T>) -> T {
    let two_b = w.b + w.b;
    let mut acc = T::zero();
    for j in 0..z1.x.len() {
        let x = z1.x[j] - z2.x[j];
        let v = z1.v[j] - z2.v[j];
        acc = acc + x * x + two_b * x * v + w.a * v * v;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let w = WeightedNormParams::new(4.0, 1.0).unwrap();
        let z = PhaseState::new(vec![1.0, 0.0], vec![0.0, 1.0]).unwrap();
        assert_eq!(weighted_norm_sq(&z, &w), 5.0);
        let z = PhaseState::new(vec![1.0, 2.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(weighted_norm_sq(&z, &w), 5.0);
        assert!(WeightedNormParams::new(0.0, 1.0).is_err());
    }
}
