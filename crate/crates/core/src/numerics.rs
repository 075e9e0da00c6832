//! Dense complex linear algebra and Newton correction.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Pivots smaller than this, relative to the largest entry, count as zero.
pub const PIVOT_TOLERANCE: f64 = 1e-14;

/// Row-major dense complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self {
            rows: r,
            cols: c,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [Complex64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul_vec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn mul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows);
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.get(k, j);
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn to_nalgebra(&self) -> nalgebra::DMatrix<Complex64> {
        nalgebra::DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }
}

pub fn inf_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn lu_solve(a: &ComplexMatrix, b: &[Complex64]) -> Result<Vec<Complex64>> {
    if !a.is_square() {
        return Err(Error::NotSquare {
            equations: a.rows,
            variables: a.cols,
        });
    }
    let n = a.rows;
    if b.len() != n {
        return Err(Error::Dimension {
            expected: n,
            got: b.len(),
        });
    }
    let scale = a.max_abs();
    if scale == 0.0 {
        return Err(Error::Singular { pivot: 0.0 });
    }
    let mut m = a.data.clone();
    let mut x = b.to_vec();
    for k in 0..n {
        let (p, pmag) = (k..n)
            .map(|i| (i, m[i * n + k].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmag < PIVOT_TOLERANCE * scale {
            return Err(Error::Singular {
                pivot: pmag / scale,
            });
        }
        if p != k {
            for j in 0..n {
                m.swap(k * n + j, p * n + j);
            }
            x.swap(k, p);
        }
        let pivot = m[k * n + k];
        for i in k + 1..n {
            let f = m[i * n + k] / pivot;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in k..n {
                let v = m[k * n + j];
                m[i * n + j] -= f * v;
            }
            let xk = x[k];
            x[i] -= f * xk;
        }
    }
    for k in (0..n).rev() {
        let mut s = x[k];
        for j in k + 1..n {
            s -= m[k * n + j] * x[j];
        }
        x[k] = s / m[k * n + k];
    }
    Ok(x)
}

/// Singular values in decreasing order.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    if a.rows == 0 || a.cols == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = a.to_nalgebra().singular_values().iter().copied().collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

pub fn smallest_singular_value(a: &ComplexMatrix) -> f64 {
    singular_values(a).last().copied().unwrap_or(0.0)
}

#[derive(Debug, Clone)]
pub struct NewtonReport {
    pub final_point: Vec<Complex64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// A linear solve hit a singular Jacobian.
    pub singular: bool,
    /// `‖F‖∞` before the first and after every correction.
    pub residual_history: Vec<f64>,
}

/// Newton's method `x <- x - J(x)^{-1} F(x)` until `‖F(x)‖∞ <= tol` or
/// `max_iter` corrections have been made.
pub fn newton_correct<F, J>(
    f: F,
    jac: J,
    x0: &[Complex64],
    tol: f64,
    max_iter: usize,
) -> NewtonReport
where
    F: Fn(&[Complex64]) -> Vec<Complex64>,
    J: Fn(&[Complex64]) -> ComplexMatrix,
{
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut r = inf_norm(&fx);
    let mut history = vec![r];
    let mut iterations = 0;
    let mut singular = false;
    while r > tol && iterations < max_iter {
        let dx = match lu_solve(&jac(&x), &fx) {
            Ok(dx) => dx,
            Err(_) => {
                singular = true;
                break;
            }
        };
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi -= di;
        }
        iterations += 1;
        fx = f(&x);
        r = inf_norm(&fx);
        history.push(r);
        if !r.is_finite() {
            break;
        }
    }
    NewtonReport {
        final_point: x,
        residual_norm: r,
        iterations,
        converged: r <= tol,
        singular,
        residual_history: history,
    }
}
