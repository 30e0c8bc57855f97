//! Dense Gaussian elimination for the small overdetermined systems that
//! express weights as sums of edge lengths.

use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct Solution<T> {
    /// One solution; free variables are set to zero.
    pub values: Vec<T>,
    /// Largest absolute residual `|A x − b|` over all equations.
    pub residual: T,
    pub rank: usize,
}

impl<T: Scalar> Solution<T> {
    pub fn consistent(&self, tol: &T) -> bool {
        self.residual <= *tol
    }
}

/// Solves `A x = b` by row reduction with largest-magnitude pivots.
///
/// Exact scalars treat only zero as a vanishing pivot; floats use a threshold
/// relative to the largest coefficient.
pub fn solve<T: Scalar>(a: &[Vec<T>], b: &[T]) -> Solution<T> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut m: Vec<Vec<T>> = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let mut r = row.clone();
            r.push(rhs.clone());
            r
        })
        .collect();

    let threshold = if T::EXACT {
        T::zero()
    } else {
        let scale = a
            .iter()
            .flatten()
            .map(|v| v.to_f64_lossy().abs())
            .fold(1.0, f64::max);
        T::from_f64(1e-9 * scale).expect("finite threshold")
    };

    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut row = 0;
    for col in 0..cols {
        if row == rows {
            break;
        }
        let best = (row..rows)
            .max_by(|&x, &y| {
                m[x][col]
                    .abs()
                    .partial_cmp(&m[y][col].abs())
                    .expect("comparable")
            })
            .expect("non-empty range");
        if m[best][col].abs() <= threshold {
            continue;
        }
        m.swap(row, best);
        let pivot = m[row][col].clone();
        for k in col..=cols {
            m[row][k] = m[row][k].clone() / pivot.clone();
        }
        for r in 0..rows {
            if r != row && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for k in col..=cols {
                    let delta = factor.clone() * m[row][k].clone();
                    m[r][k] = m[r][k].clone() - delta;
                }
            }
        }
        pivots.push((row, col));
        row += 1;
    }

    let mut values = vec![T::zero(); cols];
    for &(r, c) in &pivots {
        values[c] = m[r][cols].clone();
    }
    let residual = a
        .iter()
        .zip(b)
        .map(|(row, rhs)| {
            let lhs = row
                .iter()
                .zip(&values)
                .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone());
            (lhs - rhs.clone()).abs()
        })
        .fold(T::zero(), |acc, r| if r > acc { r } else { acc });
    Solution {
        values,
        residual,
        rank: pivots.len(),
    }
}
