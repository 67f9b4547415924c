//! Dense square matrices over an exact field, indexed `0..n`.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{Elem, Field};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatrixError {
    #[error("matrix is singular")]
    Singular,
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
}

#[derive(Clone, PartialEq, Eq)]
pub struct SquareMatrix {
    field: Field,
    n: usize,
    data: Vec<Elem>,
}

/// JSON form `{"n":..,"rows":[[..],..]}` with elements in text format.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub rows: Vec<Vec<String>>,
}

impl SquareMatrix {
    pub fn from_fn(field: &Field, n: usize, mut f: impl FnMut(usize, usize) -> Elem) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        SquareMatrix {
            field: field.clone(),
            n,
            data,
        }
    }

    pub fn zeros(field: &Field, n: usize) -> Self {
        Self::from_fn(field, n, |_, _| field.zero())
    }

    pub fn identity(field: &Field, n: usize) -> Self {
        Self::from_fn(field, n, |i, j| if i == j { field.one() } else { field.zero() })
    }

    pub fn diagonal(field: &Field, diag: &[Elem]) -> Self {
        Self::from_fn(field, diag.len(), |i, j| {
            if i == j {
                diag[i].clone()
            } else {
                field.zero()
            }
        })
    }

    pub fn from_rows(field: &Field, rows: &[Vec<Elem>]) -> Self {
        Self::from_fn(field, rows.len(), |i, j| rows[i][j].clone())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn get(&self, i: usize, j: usize) -> &Elem {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Elem) {
        self.data[i * self.n + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Elem] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(&self.field, self.n, |i, j| self.get(j, i).clone())
    }

    pub fn scale(&self, c: &Elem) -> Self {
        Self::from_fn(&self.field, self.n, |i, j| self.get(i, j) * c)
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Elem::is_zero)
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.n).all(|i| (0..self.n).all(|j| i == j || self.get(i, j).is_zero()))
    }

    pub fn is_upper_triangular(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j).is_zero()))
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.n).all(|i| (i + 1..self.n).all(|j| self.get(i, j).is_zero()))
    }

    pub fn diag(&self) -> Vec<Elem> {
        (0..self.n).map(|i| self.get(i, i).clone()).collect()
    }

    /// Inverse by Gauss-Jordan elimination with exact pivots. Triangular
    /// inputs take the substitution path.
    pub fn inverse(&self) -> Result<Self, MatrixError> {
        if self.is_lower_triangular() {
            return self.inverse_lower();
        }
        if self.is_upper_triangular() {
            return Ok(self.transpose().inverse_lower()?.transpose());
        }
        let n = self.n;
        let mut a = self.clone();
        let mut inv = Self::identity(&self.field, n);
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| !a.get(r, col).is_zero())
                .ok_or(MatrixError::Singular)?;
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                    inv.data.swap(pivot * n + j, col * n + j);
                }
            }
            let p = a.get(col, col).inv().map_err(|_| MatrixError::Singular)?;
            for j in 0..n {
                let v = a.get(col, j) * &p;
                a.set(col, j, v);
                let v = inv.get(col, j) * &p;
                inv.set(col, j, v);
            }
            for r in 0..n {
                if r == col || a.get(r, col).is_zero() {
                    continue;
                }
                let factor = a.get(r, col).clone();
                for j in 0..n {
                    let v = a.get(r, j) - &factor * a.get(col, j);
                    a.set(r, j, v);
                    let v = inv.get(r, j) - &factor * inv.get(col, j);
                    inv.set(r, j, v);
                }
            }
        }
        Ok(inv)
    }

    /// Forward substitution, column by column.
    fn inverse_lower(&self) -> Result<Self, MatrixError> {
        let n = self.n;
        let mut inv = Self::zeros(&self.field, n);
        let diag_inv: Vec<Elem> = (0..n)
            .map(|i| self.get(i, i).inv().map_err(|_| MatrixError::Singular))
            .collect::<Result<_, _>>()?;
        for j in 0..n {
            inv.set(j, j, diag_inv[j].clone());
            for i in j + 1..n {
                let mut acc = self.field.zero();
                for k in j..i {
                    acc = acc + self.get(i, k) * inv.get(k, j);
                }
                inv.set(i, j, -(acc * &diag_inv[i]));
            }
        }
        Ok(inv)
    }

    /// Solves `self * x = rhs`.
    pub fn solve(&self, rhs: &[Elem]) -> Result<Vec<Elem>, MatrixError> {
        if rhs.len() != self.n {
            return Err(MatrixError::Dimension(self.n, rhs.len()));
        }
        let inv = self.inverse()?;
        Ok((0..self.n)
            .map(|i| {
                (0..self.n).fold(self.field.zero(), |acc, j| acc + inv.get(i, j) * &rhs[j])
            })
            .collect())
    }

    pub fn to_json(&self) -> MatrixJson {
        MatrixJson {
            n: self.n,
            rows: (0..self.n)
                .map(|i| self.row(i).iter().map(Elem::to_string).collect())
                .collect(),
        }
    }

    fn mul_impl(&self, other: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, other.n, "matrix dimension mismatch");
        let n = self.n;
        let mut out = Self::zeros(&self.field, n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = other.get(k, j);
                    if b.is_zero() {
                        continue;
                    }
                    let v = out.get(i, j) + a * b;
                    out.set(i, j, v);
                }
            }
        }
        out
    }
}

impl Mul<&SquareMatrix> for &SquareMatrix {
    type Output = SquareMatrix;
    fn mul(self, rhs: &SquareMatrix) -> SquareMatrix {
        self.mul_impl(rhs)
    }
}

impl Add<&SquareMatrix> for &SquareMatrix {
    type Output = SquareMatrix;
    fn add(self, rhs: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, rhs.n, "matrix dimension mismatch");
        SquareMatrix::from_fn(&self.field, self.n, |i, j| self.get(i, j) + rhs.get(i, j))
    }
}

impl Sub<&SquareMatrix> for &SquareMatrix {
    type Output = SquareMatrix;
    fn sub(self, rhs: &SquareMatrix) -> SquareMatrix {
        assert_eq!(self.n, rhs.n, "matrix dimension mismatch");
        SquareMatrix::from_fn(&self.field, self.n, |i, j| self.get(i, j) - rhs.get(i, j))
    }
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.n {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}
