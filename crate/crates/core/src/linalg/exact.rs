//! Exact rational matrices for the ill-conditioned constructions.
//!
//! Hilbert-type matrices are hopeless to invert in double precision beyond
//! tiny sizes, so every constructor-built matrix in the integrator reduction
//! has an exact `BigRational` form. Solves stay exact and only the final
//! result is rounded to `f64`.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rat = BigRational;

/// `n/d` as an exact rational.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn factorial(k: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=k {
        acc *= BigInt::from(i);
    }
    acc
}

pub fn binomial(n: usize, k: usize) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Dense row-major matrix over exact rationals.
#[derive(Clone, Debug, PartialEq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rat>,
}

impl RatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Rat::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Rat::one());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Rat) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rat {
        &self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: Rat) {
        self.data[i * self.cols + j] = v;
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in mul");
        Self::from_fn(self.rows, other.cols, |i, j| {
            let mut acc = Rat::zero();
            for k in 0..self.cols {
                let a = self.get(i, k);
                if !a.is_zero() {
                    acc += a * other.get(k, j);
                }
            }
            acc
        })
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| self.get(i, j) - other.get(i, j))
    }

    pub fn is_symmetric(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Exact inverse by Gauss-Jordan elimination. Pivots on the largest
    /// remaining entry of the column, which is deterministic in exact
    /// arithmetic. Returns `None` for singular input.
    pub fn inverse(&self) -> Option<Self> {
        assert_eq!(self.rows, self.cols, "inverse of non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot_row = (col..n)
                .filter(|&r| !a.get(r, col).is_zero())
                .max_by(|&r1, &r2| a.get(r1, col).abs().cmp(&a.get(r2, col).abs()))?;
            if pivot_row != col {
                for j in 0..n {
                    let tmp = a.get(col, j).clone();
                    a.set(col, j, a.get(pivot_row, j).clone());
                    a.set(pivot_row, j, tmp);
                    let tmp = inv.get(col, j).clone();
                    inv.set(col, j, inv.get(pivot_row, j).clone());
                    inv.set(pivot_row, j, tmp);
                }
            }
            let pivot = a.get(col, col).clone();
            for j in 0..n {
                a.set(col, j, a.get(col, j) / &pivot);
                inv.set(col, j, inv.get(col, j) / &pivot);
            }
            for r in 0..n {
                if r != col && !a.get(r, col).is_zero() {
                    let factor = a.get(r, col).clone();
                    for j in 0..n {
                        let av = a.get(r, j) - &factor * a.get(col, j);
                        a.set(r, j, av);
                        let iv = inv.get(r, j) - &factor * inv.get(col, j);
                        inv.set(r, j, iv);
                    }
                }
            }
        }
        Some(inv)
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| {
            self.get(i, j).to_f64().expect("rational out of f64 range")
        })
    }
}

/// Exact Hilbert matrix: entry `(i, j)` is `1/(i+j+1)` (zero-based).
pub fn hilbert(size: usize) -> RatMatrix {
    RatMatrix::from_fn(size, size, |i, j| rat(1, (i + j + 1) as i64))
}

/// Monomial coefficients of the degree-`k` shifted Legendre polynomial on
/// `[0,1]`, normalized to value 1 at the right endpoint. All coefficients are
/// integers: the `s^j` coefficient is `(-1)^(k+j) C(k,j) C(k+j,j)`.
pub fn shifted_legendre_coeffs(k: usize) -> Vec<Rat> {
    (0..=k)
        .map(|j| {
            let mag = binomial(k, j) * binomial(k + j, j);
            let signed = if (k + j).is_multiple_of(2) { mag } else { -mag };
            Rat::from_integer(signed)
        })
        .collect()
}

/// Change-of-basis matrix from shifted-Legendre to monomial coefficients:
/// column `k` holds the monomial coefficients of the degree-`k` shifted
/// Legendre polynomial, zero-padded to length `degree + 1`.
pub fn legendre_basis_matrix(degree: usize) -> RatMatrix {
    let mut m = RatMatrix::zeros(degree + 1, degree + 1);
    for k in 0..=degree {
        for (j, c) in shifted_legendre_coeffs(k).into_iter().enumerate() {
            m.set(j, k, c);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials_and_binomials() {
        assert_eq!(factorial(0), BigInt::from(1));
        assert_eq!(factorial(5), BigInt::from(120));
        assert_eq!(binomial(6, 2), BigInt::from(15));
        assert_eq!(binomial(4, 0), BigInt::from(1));
        assert_eq!(binomial(3, 5), BigInt::from(0));
    }

    #[test]
    fn hilbert_inverse_is_exact() {
        let h = hilbert(8);
        let inv = h.inverse().expect("hilbert is invertible");
        assert_eq!(h.mul(&inv), RatMatrix::identity(8));
    }

    #[test]
    fn legendre_low_degrees() {
        assert_eq!(shifted_legendre_coeffs(0), vec![rat_int(1)]);
        assert_eq!(shifted_legendre_coeffs(1), vec![rat_int(-1), rat_int(2)]);
        assert_eq!(
            shifted_legendre_coeffs(2),
            vec![rat_int(1), rat_int(-6), rat_int(6)]
        );
    }

    #[test]
    fn legendre_gram_is_diagonal() {
        // Exact Gram identity: Sᵀ Q S = diag(1/(2k+1)) with Q the Hilbert matrix.
        let degree = 10;
        let s = legendre_basis_matrix(degree);
        let q = hilbert(degree + 1);
        let gram = s.transpose().mul(&q).mul(&s);
        for i in 0..=degree {
            for j in 0..=degree {
                let expected = if i == j {
                    rat(1, 2 * i as i64 + 1)
                } else {
                    Rat::zero()
                };
                assert_eq!(gram.get(i, j), &expected, "entry ({i},{j})");
            }
        }
    }
}
