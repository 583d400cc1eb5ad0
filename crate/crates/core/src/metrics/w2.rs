use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Error, Result};
use crate::metrics::assignment::min_cost_assignment;
use crate::Scalar;

/// Largest sample size accepted by [`w2_exact_smalln`].
pub const EXACT_ASSIGNMENT_CAP: usize = 256;

/// Equally weighted point cloud in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleCloud<T> {
    dim: usize,
    data: Vec<T>,
}

impl<T: Scalar> SampleCloud<T> {
    pub fn new(dim: usize, points: &[Vec<T>]) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("dim", "must be at least 1"));
        }
        let mut data = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::Dimension { expected: dim, got: p.len() });
            }
            data.extend_from_slice(p);
        }
        Self::from_flat(dim, data)
    }

    /// Builds a cloud from `n·dim` values laid out point after point.
    pub fn from_flat(dim: usize, data: Vec<T>) -> Result<Self> {
        if dim == 0 || data.is_empty() || !data.len().is_multiple_of(dim) {
            return Err(invalid("points", "cloud must be nonempty with whole points"));
        }
        if !crate::vecops::all_finite(&data) {
            return Err(invalid("points", "cloud entries must be finite"));
        }
        Ok(Self { dim, data })
    }

    /// One-dimensional cloud.
    pub fn from_scalars(values: Vec<T>) -> Result<Self> {
        Self::from_flat(1, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks_exact(self.dim)
    }

    /// Projection onto coordinate `j`.
    pub fn coordinate(&self, j: usize) -> Vec<T> {
        self.points().map(|p| p[j]).collect()
    }

    pub fn scaled(&self, k: T) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&x| x * k).collect(),
        }
    }
}

fn same_size<T: Scalar>(s1: &SampleCloud<T>, s2: &SampleCloud<T>) -> Result<()> {
    if s1.dim() != s2.dim() {
        return Err(Error::Dimension { expected: s1.dim(), got: s2.dim() });
    }
    if s1.len() != s2.len() {
        return Err(Error::SizeMismatch { left: s1.len(), right: s2.len() });
    }
    Ok(())
}

fn sorted<T: Scalar>(values: &[T]) -> Vec<T> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite cloud"));
    v
}

/// Exact empirical W2 between equal-size one-dimensional clouds
/// (order statistics matched in sorted order).
pub fn w2_1d<T: Scalar>(s1: &SampleCloud<T>, s2: &SampleCloud<T>) -> Result<T> {
    if s1.dim() != 1 {
        return Err(Error::Dimension { expected: 1, got: s1.dim() });
    }
    same_size(s1, s2)?;
    let a = sorted(&s1.data);
    let b = sorted(&s2.data);
    let n = T::from_usize(a.len()).unwrap_or_else(T::one);
    let sum = a.iter().zip(&b).fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y));
    Ok((sum / n).sqrt())
}

/// Exact empirical W2 between equal-size clouds in any dimension through an
/// optimal assignment on squared distances. At most
/// [`EXACT_ASSIGNMENT_CAP`] points per cloud.
pub fn w2_exact_smalln<T: Scalar>(s1: &SampleCloud<T>, s2: &SampleCloud<T>) -> Result<T> {
    same_size(s1, s2)?;
    let n = s1.len();
    if n > EXACT_ASSIGNMENT_CAP {
        return Err(Error::SizeCap { size: n, cap: EXACT_ASSIGNMENT_CAP });
    }
    let cost: Vec<Vec<f64>> = s1
        .points()
        .map(|p| {
            s2.points()
                .map(|q| p.iter().zip(q).map(|(&a, &b)| (a - b).as_f64().powi(2)).sum())
                .collect()
        })
        .collect();
    let assign = min_cost_assignment(&cost);
    // Recompute the optimum in T so identical inputs give exactly zero.
    let sum = assign.iter().enumerate().fold(T::zero(), |acc, (i, &j)| {
        acc + s1
            .point(i)
            .iter()
            .zip(s2.point(j))
            .fold(T::zero(), |a, (&x, &y)| a + (x - y) * (x - y))
    });
    Ok((sum / T::from_usize(n).unwrap_or_else(T::one)).sqrt())
}

/// W2 between isotropic Gaussians `N(m1, s1²I)` and `N(m2, s2²I)`.
pub fn gaussian_w2<T: Scalar>(m1: &[T], s1: T, m2: &[T], s2: T) -> Result<T> {
    if m1.len() != m2.len() {
        return Err(Error::Dimension { expected: m1.len(), got: m2.len() });
    }
    if !(s1 >= T::zero()) || !(s2 >= T::zero()) {
        return Err(invalid("s1, s2", "standard deviations must be nonnegative"));
    }
    let d = T::from_usize(m1.len()).unwrap_or_else(T::one);
    let ds = s1 - s2;
    Ok((crate::vecops::norm_sq(&crate::vecops::sub(m1, m2)) + d * ds * ds).sqrt())
}

/// Interval integrals of the standard normal quantile function over
/// `[i/n, (i+1)/n]`, reusable across clouds of size `n`.
#[derive(Debug, Clone)]
pub struct NormalTransportTable {
    /// `∫ Φ⁻¹(u) du` per interval.
    first: Vec<f64>,
    /// `∫ Φ⁻¹(u)² du` per interval.
    second: Vec<f64>,
}

impl NormalTransportTable {
    pub fn new(n: usize) -> Self {
        let std = Normal::new(0.0, 1.0).expect("standard normal");
        let nf = n as f64;
        let density = |q: f64| (-0.5 * q * q).exp() / (2.0 * std::f64::consts::PI).sqrt();
        // Primitives as functions of the quantile q = Φ⁻¹(u): −φ(q) and Φ(q) − qφ(q).
        let primitive = |i: usize| -> (f64, f64) {
            if i == 0 {
                return (0.0, 0.0);
            }
            if i == n {
                return (0.0, 1.0);
            }
            let u = i as f64 / nf;
            let q = std.inverse_cdf(u);
            let phi = density(q);
            (-phi, u - q * phi)
        };
        let mut first = Vec::with_capacity(n);
        let mut second = Vec::with_capacity(n);
        let mut lo = primitive(0);
        for i in 0..n {
            let hi = primitive(i + 1);
            first.push(hi.0 - lo.0);
            second.push(hi.1 - lo.1);
            lo = hi;
        }
        Self { first, second }
    }

    pub fn len(&self) -> usize {
        self.first.len()
    }

    pub fn is_empty(&self) -> bool {
        self.first.is_empty()
    }

    /// W2 between the empirical law of `samples` (exactly `len()` values) and `N(mu, sigma²)`.
    pub fn w2(&self, samples: &[f64], mu: f64, sigma: f64) -> Result<f64> {
        if samples.len() != self.len() {
            return Err(Error::SizeMismatch { left: samples.len(), right: self.len() });
        }
        if !(sigma > 0.0) {
            return Err(invalid("sigma", "must be positive"));
        }
        let xs = sorted(samples);
        let nf = xs.len() as f64;
        let mut total = 0.0;
        for (i, &x) in xs.iter().enumerate() {
            let y = x - mu;
            total += y * y / nf - 2.0 * y * sigma * self.first[i] + sigma * sigma * self.second[i];
        }
        Ok(total.max(0.0).sqrt())
    }
}

/// Exact W2 between the empirical law of `samples` and `N(mu, sigma²)`.
///
/// The i-th order statistic is transported onto the normal quantiles
/// in `[i/n, (i+1)/n]`; the interval integrals of the quantile function and
/// of its square are evaluated in closed form.
pub fn w2_to_normal_1d(samples: &[f64], mu: f64, sigma: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(invalid("samples", "must be nonempty"));
    }
    NormalTransportTable::new(samples.len()).w2(samples, mu, sigma)
}
