use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};

/// `1e−5·(1 + |point|)`.
pub fn default_fd_step(point: &[f64]) -> f64 {
    1e-5 * (1.0 + point.iter().map(|x| x * x).sum::<f64>().sqrt())
}

/// Central finite-difference Jacobian, returned row-major as `rows × point.len()`.
pub fn jacobian_fd<F>(map: F, point: &[f64], h: f64) -> Result<(usize, Vec<f64>)>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if !(h > 0.0) {
        return Err(invalid("h", "finite-difference step must be positive"));
    }
    let n = point.len();
    let mut p = point.to_vec();
    let mut cols = Vec::with_capacity(n);
    for k in 0..n {
        p[k] = point[k] + h;
        let plus = map(&p);
        p[k] = point[k] - h;
        let minus = map(&p);
        p[k] = point[k];
        if plus.len() != minus.len() {
            return Err(Error::NonFiniteMap);
        }
        let col: Vec<f64> = plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * h)).collect();
        if col.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteMap);
        }
        cols.push(col);
    }
    let rows = cols.first().map_or(0, Vec::len);
    let mut j = vec![0.0; rows * n];
    for (k, col) in cols.iter().enumerate() {
        for (i, &c) in col.iter().enumerate() {
            j[i * n + k] = c;
        }
    }
    Ok((rows, j))
}

/// Largest singular value of a row-major `rows × cols` matrix.
pub fn largest_singular_value(rows: usize, cols: usize, j: &[f64]) -> f64 {
    if rows == 0 || cols == 0 {
        return 0.0;
    }
    DMatrix::from_row_slice(rows, cols, j).singular_values().max()
}

/// Operator norm of the finite-difference Jacobian of `map` at `point`.
pub fn jacobian_opnorm_fd<F>(map: F, point: &[f64], h: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let (rows, j) = jacobian_fd(map, point, h)?;
    Ok(largest_singular_value(rows, point.len(), &j))
}
