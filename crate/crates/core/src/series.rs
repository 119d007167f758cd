//! Truncated formal power series over an arbitrary field-like coefficient
//! type (exact rationals for the 1D identities, floats otherwise).

use crate::error::{Error, Result};
use num_traits::{One, Zero};
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Coefficient requirements: a commutative field with exact equality on zero.
pub trait Coeff:
    Clone
    + Zero
    + One
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
}

impl<T> Coeff for T where
    T: Clone
        + Zero
        + One
        + PartialEq
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Div<Output = T>
        + Neg<Output = T>
{
}

/// A power series truncated at order K = coefficients.len() - 1.
#[derive(Debug, Clone, PartialEq)]
pub struct FormalSeries<T> {
    coeffs: Vec<T>,
}

impl<T: Coeff> FormalSeries<T> {
    pub fn new(coeffs: Vec<T>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Domain("series needs at least the constant term".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn zero(order: usize) -> Self {
        Self {
            coeffs: vec![T::zero(); order + 1],
        }
    }

    pub fn one(order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = T::one();
        s
    }

    /// The identity series z, truncated at `order` >= 1.
    pub fn identity(order: usize) -> Result<Self> {
        if order < 1 {
            return Err(Error::Domain("identity series needs order >= 1".into()));
        }
        let mut s = Self::zero(order);
        s.coeffs[1] = T::one();
        Ok(s)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeff(&self, k: usize) -> T {
        self.coeffs.get(k).cloned().unwrap_or_else(T::zero)
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.truncate(order + 1);
        c.resize(order + 1, T::zero());
        Self { coeffs: c }
    }

    pub fn add(&self, other: &Self) -> Self {
        let k = self.order().min(other.order());
        let coeffs = (0..=k).map(|i| self.coeff(i) + other.coeff(i)).collect();
        Self { coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let k = self.order().min(other.order());
        let coeffs = (0..=k).map(|i| self.coeff(i) - other.coeff(i)).collect();
        Self { coeffs }
    }

    pub fn scale(&self, c: &T) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|a| a.clone() * c.clone()).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let k = self.order().min(other.order());
        let mut coeffs = vec![T::zero(); k + 1];
        for i in 0..=k {
            for j in 0..=(k - i) {
                coeffs[i + j] = coeffs[i + j].clone() + self.coeff(i) * other.coeff(j);
            }
        }
        Self { coeffs }
    }

    pub fn pow(&self, e: usize) -> Self {
        let mut acc = Self::one(self.order());
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// self(inner); inner must have zero constant term.
    pub fn compose(&self, inner: &Self) -> Result<Self> {
        if !inner.coeff(0).is_zero() {
            return Err(Error::Domain(
                "composition requires the inner series to have zero constant term".into(),
            ));
        }
        let k = self.order().min(inner.order());
        let mut acc = FormalSeries {
            coeffs: vec![self.coeff(k)],
        }
        .truncate(k);
        for i in (0..k).rev() {
            acc = acc.mul(inner);
            acc.coeffs[0] = acc.coeffs[0].clone() + self.coeff(i);
        }
        Ok(acc)
    }

    /// log(self) for a series with constant term 1, via the derivative
    /// recurrence n l_n = n a_n - sum_{j<n} j l_j a_{n-j}.
    pub fn log(&self) -> Result<Self> {
        if self.coeff(0) != T::one() {
            return Err(Error::Domain(
                "log requires a series with constant term 1".into(),
            ));
        }
        let k = self.order();
        let mut l = vec![T::zero(); k + 1];
        for n in 1..=k {
            let mut s = int_t::<T>(n) * self.coeff(n);
            for j in 1..n {
                s = s - int_t::<T>(j) * l[j].clone() * self.coeff(n - j);
            }
            l[n] = s / int_t::<T>(n);
        }
        Ok(Self { coeffs: l })
    }

    /// exp(self) for a series with zero constant term.
    pub fn exp(&self) -> Result<Self> {
        if !self.coeff(0).is_zero() {
            return Err(Error::Domain(
                "exp requires a series with zero constant term".into(),
            ));
        }
        let k = self.order();
        let mut e = vec![T::zero(); k + 1];
        e[0] = T::one();
        // n e_n = sum_{j=1}^{n} j a_j e_{n-j}.
        for n in 1..=k {
            let mut s = T::zero();
            for j in 1..=n {
                s = s + int_t::<T>(j) * self.coeff(j) * e[n - j].clone();
            }
            e[n] = s / int_t::<T>(n);
        }
        Ok(Self { coeffs: e })
    }

    /// Compositional inverse: returns T with T(self) = identity. Requires
    /// zero constant term and invertible linear coefficient.
    pub fn reversion(&self) -> Result<Self> {
        if !self.coeff(0).is_zero() {
            return Err(Error::Domain(
                "reversion requires zero constant term".into(),
            ));
        }
        let s1 = self.coeff(1);
        if s1.is_zero() {
            return Err(Error::Domain(
                "reversion requires a nonzero linear coefficient".into(),
            ));
        }
        let k = self.order();
        let mut t = vec![T::zero(); k + 1];
        t[1] = T::one() / s1.clone();
        // Powers of self, maintained incrementally.
        let mut powers: Vec<FormalSeries<T>> = vec![Self::one(k), self.clone()];
        for m in 2..=k {
            let next = powers[m - 1].mul(self);
            powers.push(next);
        }
        for n in 2..=k {
            // Coefficient of z^n in sum_m t_m self^m must vanish.
            let mut s = T::zero();
            for m in 1..n {
                s = s + t[m].clone() * powers[m].coeff(n);
            }
            t[n] = -s / powers[n].coeff(n);
        }
        Ok(Self { coeffs: t })
    }
}

/// The integer n as a coefficient (orders are tiny; repeated addition).
fn int_t<T: Coeff>(n: usize) -> T {
    let mut acc = T::zero();
    for _ in 0..n {
        acc = acc + T::one();
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact1d::{rat, Rat};

    fn s(v: &[(i64, i64)]) -> FormalSeries<Rat> {
        FormalSeries::new(v.iter().map(|&(n, d)| rat(n, d)).collect()).unwrap()
    }

    #[test]
    fn mul_truncates() {
        let a = s(&[(1, 1), (1, 1), (0, 1)]); // 1 + z
        let b = a.mul(&a);
        assert_eq!(b.coeffs(), &[rat(1, 1), rat(2, 1), rat(1, 1)]);
    }

    #[test]
    fn geometric_log_exp_roundtrip() {
        // S = 1/(1-z) truncated at order 5.
        let g = FormalSeries::new((0..=5).map(|_| rat(1, 1)).collect::<Vec<_>>()).unwrap();
        let l = g.log().unwrap();
        // log(1/(1-z)) = sum z^n / n.
        for n in 1..=5 {
            assert_eq!(l.coeff(n), rat(1, n as i64));
        }
        let back = l.exp().unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn compose_requires_zero_constant() {
        let a = s(&[(1, 1), (1, 1)]);
        assert!(a.compose(&a).is_err());
        let inner = s(&[(0, 1), (2, 1)]);
        let c = a.compose(&inner).unwrap();
        assert_eq!(c.coeffs(), &[rat(1, 1), rat(2, 1)]);
    }

    #[test]
    fn reversion_inverts_composition() {
        // S = z + z^2/2 + z^3/3 + z^4/4.
        let sr = s(&[(0, 1), (1, 1), (1, 2), (1, 3), (1, 4)]);
        let inv = sr.reversion().unwrap();
        let id = inv.compose(&sr).unwrap();
        assert_eq!(id, FormalSeries::identity(4).unwrap());
        let id2 = sr.compose(&inv).unwrap();
        assert_eq!(id2, FormalSeries::identity(4).unwrap());
    }

    #[test]
    fn float_series_log() {
        let g = FormalSeries::new(vec![1.0f64, 1.0, 1.0, 1.0]).unwrap();
        let l = g.log().unwrap();
        assert!((l.coeff(2) - 0.5).abs() < 1e-15);
        assert!((l.coeff(3) - 1.0 / 3.0).abs() < 1e-15);
    }
}
