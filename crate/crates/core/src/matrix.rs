//! Small dense complex matrices.
//!
//! Gate unitaries (2×2, 4×4) and the 2ⁿ×2ⁿ operators used as test oracles
//! all go through [`CMatrix`]. Storage is row-major.

use num_complex::Complex64;
use std::ops::{Index, IndexMut, Mul};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries. Panics if `data` is not square.
    pub fn from_rows(dim: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), dim * dim, "matrix data is not {dim}x{dim}");
        Self { dim, data }
    }

    pub fn from_real(dim: usize, data: &[f64]) -> Self {
        Self::from_rows(dim, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn dagger(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                m[(c, r)] = self[(r, c)].conj();
            }
        }
        m
    }

    pub fn conj(&self) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut m = Self::zeros(self.dim);
        for r in 0..self.dim {
            for c in 0..self.dim {
                m[(c, r)] = self[(r, c)];
            }
        }
        m
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-ONE))
    }

    /// Kronecker product; `self` acts on the more significant index bits.
    pub fn kron(&self, other: &Self) -> Self {
        let d = self.dim * other.dim;
        let mut m = Self::zeros(d);
        for r1 in 0..self.dim {
            for c1 in 0..self.dim {
                let a = self[(r1, c1)];
                if a == ZERO {
                    continue;
                }
                for r2 in 0..other.dim {
                    for c2 in 0..other.dim {
                        m[(r1 * other.dim + r2, c1 * other.dim + c2)] = a * other[(r2, c2)];
                    }
                }
            }
        }
        m
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|r| {
                self.data[r * self.dim..(r + 1) * self.dim]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Distance to `other` after removing the best global phase, max-norm.
    pub fn phase_distance(&self, other: &Self) -> f64 {
        let overlap: C64 = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum();
        let phase = if overlap.norm() > 0.0 {
            overlap / overlap.norm()
        } else {
            ONE
        };
        self.scale(phase).max_abs_diff(other)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        (&self.dagger() * self).max_abs_diff(&Self::identity(self.dim)) <= tol
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        &self.data[r * self.dim + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        &mut self.data[r * self.dim + c]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut m = CMatrix::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self[(r, k)];
                if a == ZERO {
                    continue;
                }
                for c in 0..n {
                    m.data[r * n + c] += a * rhs.data[k * n + c];
                }
            }
        }
        m
    }
}

/// Product of matrices in circuit (time) order: `ops[0]` acts first.
pub fn time_ordered(ops: &[&CMatrix]) -> CMatrix {
    let dim = ops.first().map(|m| m.dim()).unwrap_or(1);
    ops.iter()
        .fold(CMatrix::identity(dim), |acc, m| &(*m).clone() * &acc)
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm_sqr(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kron_orders_first_factor_as_high_bits() {
        let x = CMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]);
        let id = CMatrix::identity(2);
        let xi = x.kron(&id);
        // X on the high bit maps |00> -> |10> (index 2)
        let v = xi.apply(&[ONE, ZERO, ZERO, ZERO]);
        assert_eq!(v[2], ONE);
    }

    #[test]
    fn time_order_applies_first_operand_first() {
        let x = CMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]);
        let z = CMatrix::diagonal(&[ONE, -ONE]);
        // Z then X on |0>: Z|0> = |0>, X|0> = |1>
        let m = time_ordered(&[&z, &x]);
        assert_eq!(m, &x * &z);
    }

    #[test]
    fn phase_distance_ignores_global_phase() {
        let h = CMatrix::from_real(2, &[1.0, 1.0, 1.0, -1.0]).scale(r(0.5f64.sqrt()));
        let hp = h.scale(C64::from_polar(1.0, 0.7));
        assert!(h.phase_distance(&hp) < 1e-14);
        assert!(h.max_abs_diff(&hp) > 0.1);
    }
}
