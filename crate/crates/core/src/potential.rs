//! Target potentials `u` with gradient `h = ∇u` and sampled checks of the
//! standing assumptions:
//!
//! * strong monotonicity `⟨h(x)−h(y), x−y⟩ ≥ 2m|x−y|²`,
//! * local Lipschitz continuity `|h(x)−h(y)| ≤ L(1+|x|+|y|)^l |x−y|`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::vecops::{dist, dot, norm};
use crate::Scalar;

type ValueFn<T> = Arc<dyn Fn(&[T]) -> T + Send + Sync>;
type GradientFn<T> = Arc<dyn Fn(&[T], &mut [T]) + Send + Sync>;

/// Names of the built-in targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuiltinPotential {
    /// `u(x) = c|x|²/2`
    Quadratic,
    /// `u(x) = |x|⁴/4 + c|x|²/2`
    DoubleWell,
}

impl FromStr for BuiltinPotential {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quadratic" => Ok(Self::Quadratic),
            "double_well" => Ok(Self::DoubleWell),
            other => Err(Error::UnknownPotential(other.to_string())),
        }
    }
}

impl fmt::Display for BuiltinPotential {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Quadratic => "quadratic",
            Self::DoubleWell => "double_well",
        })
    }
}

#[derive(Clone)]
enum Kind<T> {
    Quadratic { c: T },
    DoubleWell { c: T },
    Custom {
        name: String,
        value: ValueFn<T>,
        gradient: GradientFn<T>,
    },
}

/// A target potential together with its assumption constants.
///
/// `m` follows the factor-2 convention `⟨h(x)−h(y),x−y⟩ ≥ 2m|x−y|²`.
#[derive(Clone)]
pub struct PotentialSpec<T: Scalar> {
    dim: usize,
    kind: Kind<T>,
    /// Strong-monotonicity constant.
    pub m: T,
    /// Local Lipschitz constant `L`.
    pub lipschitz: T,
    /// Local Lipschitz growth exponent `l`.
    pub growth: T,
    /// Declared global Lipschitz constant of `h`, when one exists.
    pub global_lipschitz: Option<T>,
}

impl<T: Scalar> fmt::Debug for PotentialSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialSpec")
            .field("name", &self.name())
            .field("dim", &self.dim)
            .field("m", &self.m)
            .field("lipschitz", &self.lipschitz)
            .field("growth", &self.growth)
            .field("global_lipschitz", &self.global_lipschitz)
            .finish()
    }
}

/// Instantiates a built-in target in dimension `dim`.
pub fn builtin_potential<T: Scalar>(
    name: BuiltinPotential,
    c: T,
    dim: usize,
) -> Result<PotentialSpec<T>> {
    if !(c > T::zero()) || !c.is_finite() {
        return Err(invalid("c", format!("must be positive and finite, got {c}")));
    }
    if dim == 0 {
        return Err(invalid("dim", "must be at least 1"));
    }
    let half = T::lit(0.5);
    Ok(match name {
        BuiltinPotential::Quadratic => PotentialSpec {
            dim,
            kind: Kind::Quadratic { c },
            m: c * half,
            lipschitz: c,
            growth: T::zero(),
            global_lipschitz: Some(c),
        },
        // |h(x)−h(y)| ≤ (|x|²+|x||y|+|y|²+c)|x−y| ≤ (1+c)(1+|x|+|y|)²|x−y|
        BuiltinPotential::DoubleWell => PotentialSpec {
            dim,
            kind: Kind::DoubleWell { c },
            m: c * half,
            lipschitz: T::one() + c,
            growth: T::lit(2.0),
            global_lipschitz: None,
        },
    })
}

impl<T: Scalar> PotentialSpec<T> {
    /// Parses the potential name, then delegates to [`builtin_potential`].
    pub fn by_name(name: &str, c: T, dim: usize) -> Result<Self> {
        builtin_potential(name.parse()?, c, dim)
    }

    /// A user-supplied potential. The constants are trusted as declared;
    /// [`check_assumptions`] can audit them.
    #[allow(clippy::too_many_arguments)]
    pub fn custom(
        name: impl Into<String>,
        dim: usize,
        value: impl Fn(&[T]) -> T + Send + Sync + 'static,
        gradient: impl Fn(&[T], &mut [T]) + Send + Sync + 'static,
        m: T,
        lipschitz: T,
        growth: T,
        global_lipschitz: Option<T>,
    ) -> Self {
        Self {
            dim,
            kind: Kind::Custom {
                name: name.into(),
                value: Arc::new(value),
                gradient: Arc::new(gradient),
            },
            m,
            lipschitz,
            growth,
            global_lipschitz,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> String {
        match &self.kind {
            Kind::Quadratic { .. } => "quadratic".into(),
            Kind::DoubleWell { .. } => "double_well".into(),
            Kind::Custom { name, .. } => name.clone(),
        }
    }

    /// The parameter `c` of a built-in target.
    pub fn coefficient(&self) -> Option<T> {
        match self.kind {
            Kind::Quadratic { c } | Kind::DoubleWell { c } => Some(c),
            Kind::Custom { .. } => None,
        }
    }

    pub fn builtin(&self) -> Option<BuiltinPotential> {
        match self.kind {
            Kind::Quadratic { .. } => Some(BuiltinPotential::Quadratic),
            Kind::DoubleWell { .. } => Some(BuiltinPotential::DoubleWell),
            Kind::Custom { .. } => None,
        }
    }

    pub fn value(&self, x: &[T]) -> T {
        let half = T::lit(0.5);
        match &self.kind {
            Kind::Quadratic { c } => *c * half * dot(x, x),
            Kind::DoubleWell { c } => {
                let r2 = dot(x, x);
                r2 * r2 * T::lit(0.25) + *c * half * r2
            }
            Kind::Custom { value, .. } => value(x),
        }
    }

    /// Writes `h(x)` into `out`.
    #[inline]
    pub fn gradient_into(&self, x: &[T], out: &mut [T]) {
        match &self.kind {
            Kind::Quadratic { c } => {
                for (o, &xi) in out.iter_mut().zip(x) {
                    *o = *c * xi;
                }
            }
            Kind::DoubleWell { c } => {
                let k = dot(x, x) + *c;
                for (o, &xi) in out.iter_mut().zip(x) {
                    *o = k * xi;
                }
            }
            Kind::Custom { gradient, .. } => gradient(x, out),
        }
    }

    pub fn gradient(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); x.len()];
        self.gradient_into(x, &mut out);
        out
    }

    /// `|h(0)|`
    pub fn gradient_norm_at_origin(&self) -> T {
        norm(&self.gradient(&vec![T::zero(); self.dim]))
    }

    /// Returns a copy whose gradient is multiplied by `factor` while the value
    /// is unchanged. Used for fault injection.
    pub fn with_scaled_gradient(&self, factor: T) -> Self {
        let inner = self.clone();
        let value_src = self.clone();
        Self {
            dim: self.dim,
            kind: Kind::Custom {
                name: format!("{}*grad{}", self.name(), factor),
                value: Arc::new(move |x: &[T]| value_src.value(x)),
                gradient: Arc::new(move |x: &[T], out: &mut [T]| {
                    inner.gradient_into(x, out);
                    for o in out.iter_mut() {
                        *o = *o * factor;
                    }
                }),
            },
            m: self.m,
            lipschitz: self.lipschitz,
            growth: self.growth,
            global_lipschitz: self.global_lipschitz,
        }
    }

    /// Central finite-difference gradient of `u` with step `step`.
    pub fn finite_difference_gradient(&self, x: &[T], step: T) -> Vec<T> {
        let mut probe = x.to_vec();
        let two = T::lit(2.0);
        (0..x.len())
            .map(|i| {
                let xi = x[i];
                probe[i] = xi + step;
                let up = self.value(&probe);
                probe[i] = xi - step;
                let down = self.value(&probe);
                probe[i] = xi;
                (up - down) / (two * step)
            })
            .collect()
    }
}

/// Counts of sampled assumption violations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssumptionReport {
    pub pairs: usize,
    pub monotonicity_violations: usize,
    pub lipschitz_violations: usize,
    /// `max |h(x) − ∇_fd u(x)|_∞ / (1 + |∇_fd u(x)|_∞)` over the sampled points.
    pub gradient_mismatch_max: f64,
}

impl AssumptionReport {
    pub fn passed(&self, gradient_tol: f64) -> bool {
        self.monotonicity_violations == 0
            && self.lipschitz_violations == 0
            && self.gradient_mismatch_max <= gradient_tol
    }
}

/// Absolute slack `1e−9·(1 + |lhs| + |rhs|)` used for the sampled inequalities.
pub fn inequality_slack(lhs: f64, rhs: f64) -> f64 {
    1e-9 * (1.0 + lhs.abs() + rhs.abs())
}

/// Uniform point in the ball of radius `radius` in dimension `dim`.
pub fn uniform_in_ball<T: Scalar, R: rand::Rng + ?Sized>(rng: &mut R, dim: usize, radius: T) -> Vec<T> {
    let dir: Vec<T> = random_direction(rng, dim);
    let u: T = T::unit_uniform(rng);
    let rho = radius * u.powf(T::one() / T::from_usize(dim).unwrap_or_else(T::one));
    dir.into_iter().map(|d| d * rho).collect()
}

/// Uniform direction on the unit sphere.
pub fn random_direction<T: Scalar, R: rand::Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<T> {
    loop {
        let g: Vec<T> = (0..dim).map(|_| T::standard_normal(rng)).collect();
        let n = norm(&g);
        if n > T::lit(1e-12) {
            return g.into_iter().map(|v| v / n).collect();
        }
    }
}

/// Samples `n_pairs` uniform pairs in the ball of the given radius and counts
/// violations of both assumptions, and the worst gradient/finite-difference
/// mismatch (step `1e−5`).
pub fn check_assumptions<T: Scalar>(
    p: &PotentialSpec<T>,
    n_pairs: usize,
    radius: T,
    seed: u64,
) -> AssumptionReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let two_m = (p.m + p.m).as_f64();
    let mut mono = 0;
    let mut lip = 0;
    let mut mismatch: f64 = 0.0;
    let step = T::lit(1e-5);
    let mut hx = vec![T::zero(); p.dim];
    let mut hy = vec![T::zero(); p.dim];
    for _ in 0..n_pairs {
        let x = uniform_in_ball(&mut rng, p.dim, radius);
        let y = uniform_in_ball(&mut rng, p.dim, radius);
        p.gradient_into(&x, &mut hx);
        p.gradient_into(&y, &mut hy);
        let dx: Vec<T> = x.iter().zip(&y).map(|(&a, &b)| a - b).collect();
        let dh: Vec<T> = hx.iter().zip(&hy).map(|(&a, &b)| a - b).collect();
        let gap = dist(&x, &y).as_f64();

        let lhs = dot(&dh, &dx).as_f64();
        let rhs = two_m * gap * gap;
        if lhs < rhs - inequality_slack(lhs, rhs) {
            mono += 1;
        }

        let lhs = norm(&dh).as_f64();
        let base = 1.0 + norm(&x).as_f64() + norm(&y).as_f64();
        let rhs = p.lipschitz.as_f64() * base.powf(p.growth.as_f64()) * gap;
        if lhs > rhs + inequality_slack(lhs, rhs) {
            lip += 1;
        }

        for (point, grad) in [(&x, &hx), (&y, &hy)] {
            let fd = p.finite_difference_gradient(point, step);
            let scale = fd.iter().fold(0.0f64, |m, v| m.max(v.as_f64().abs()));
            let err = fd
                .iter()
                .zip(grad.iter())
                .fold(0.0f64, |m, (a, b)| m.max((a.as_f64() - b.as_f64()).abs()));
            mismatch = mismatch.max(err / (1.0 + scale));
        }
    }
    AssumptionReport {
        pairs: n_pairs,
        monotonicity_violations: mono,
        lipschitz_violations: lip,
        gradient_mismatch_max: mismatch,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_values() {
        let p = builtin_potential(BuiltinPotential::Quadratic, 1.0, 1).unwrap();
        assert_eq!(p.value(&[2.0]), 2.0);
        assert_eq!(p.gradient(&[2.0]), vec![2.0]);
        assert_eq!(p.m, 0.5);
        assert_eq!(p.global_lipschitz, Some(1.0));
    }

    #[test]
    fn double_well_values() {
        let p: PotentialSpec<f64> = builtin_potential(BuiltinPotential::DoubleWell, 1.0, 1).unwrap();
        assert_eq!(p.value(&[0.0]), 0.0);
        assert_eq!(p.gradient(&[0.0]), vec![0.0]);
        assert_eq!(p.value(&[2.0]), 6.0);
        assert_eq!(p.gradient(&[2.0]), vec![10.0]);
        let fd = p.finite_difference_gradient(&[2.0], 1e-5);
        assert!((fd[0] - 10.0).abs() < 1e-8);
        assert_eq!(p.lipschitz, 2.0);
        assert_eq!(p.growth, 2.0);
        assert!(p.global_lipschitz.is_none());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert_eq!(
            PotentialSpec::<f64>::by_name("banana", 1.0, 1).unwrap_err(),
            Error::UnknownPotential("banana".into())
        );
        assert!(matches!(
            builtin_potential(BuiltinPotential::Quadratic, 0.0, 1),
            Err(Error::InvalidParameter { name: "c", .. })
        ));
        assert!(builtin_potential(BuiltinPotential::DoubleWell, -1.0, 2).is_err());
        assert!(builtin_potential(BuiltinPotential::DoubleWell, 1.0, 0).is_err());
    }

    #[test]
    fn builtins_satisfy_assumptions() {
        for name in [BuiltinPotential::Quadratic, BuiltinPotential::DoubleWell] {
            for dim in [1, 3] {
                let p = builtin_potential(name, 1.0, dim).unwrap();
                let rep = check_assumptions(&p, 10_000, 10.0, 7);
                assert_eq!(rep.monotonicity_violations, 0, "{name} d={dim}");
                assert_eq!(rep.lipschitz_violations, 0, "{name} d={dim}");
                assert!(rep.gradient_mismatch_max <= 1e-5, "{name}: {rep:?}");
            }
        }
    }

    #[test]
    fn corrupted_gradient_is_detected() {
        let p = builtin_potential(BuiltinPotential::DoubleWell, 1.0, 2)
            .unwrap()
            .with_scaled_gradient(0.1);
        let rep = check_assumptions(&p, 200, 10.0, 3);
        assert!(rep.gradient_mismatch_max > 0.1, "{rep:?}");
        assert!(rep.monotonicity_violations > 0);
    }

    #[test]
    fn works_in_single_precision() {
        let p = builtin_potential(BuiltinPotential::DoubleWell, 1.0f32, 1).unwrap();
        assert_eq!(p.gradient(&[2.0f32]), vec![10.0f32]);
    }
}
