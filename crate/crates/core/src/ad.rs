//! Forward-mode automatic differentiation.
//!
//! The kinematics are written once against the [`Scalar`] trait and then
//! evaluated with plain `f64` for poses, with [`Dual<f64, 15>`] for position
//! Jacobians, and with nested duals (`Dual<Dual<f64, N>, M>`) when second
//! derivatives are needed for the Coriolis terms.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Minimal field-plus-elementary-functions interface shared by `f64` and duals.
pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    /// Lift a constant.
    fn cst(v: f64) -> Self;
    /// Primal (value) part.
    fn re(&self) -> f64;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn sqrt(self) -> Self;

    fn zero() -> Self {
        Self::cst(0.0)
    }
    fn one() -> Self {
        Self::cst(1.0)
    }
}

impl Scalar for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn re(&self) -> f64 {
        *self
    }
    #[inline]
    fn sin(self) -> Self {
        f64::sin(self)
    }
    #[inline]
    fn cos(self) -> Self {
        f64::cos(self)
    }
    #[inline]
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
}

/// Dual number with `N` independent infinitesimal parts over the scalar `T`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T, const N: usize> {
    pub v: T,
    pub d: [T; N],
}

impl<T: Scalar, const N: usize> Dual<T, N> {
    pub fn constant(v: T) -> Self {
        Self {
            v,
            d: [T::zero(); N],
        }
    }

    /// Independent variable seeded along direction `k`.
    pub fn variable(v: T, k: usize) -> Self {
        let mut d = [T::zero(); N];
        d[k] = T::one();
        Self { v, d }
    }

    /// Variable with an explicit tangent.
    pub fn with_tangent(v: T, d: [T; N]) -> Self {
        Self { v, d }
    }

    #[inline]
    fn chain(self, fv: T, dfv: T) -> Self {
        let mut d = self.d;
        for x in d.iter_mut() {
            *x = *x * dfv;
        }
        Self { v: fv, d }
    }
}

impl<T: Scalar, const N: usize> Add for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        let mut d = self.d;
        for (x, y) in d.iter_mut().zip(o.d.iter()) {
            *x = *x + *y;
        }
        Self { v: self.v + o.v, d }
    }
}

impl<T: Scalar, const N: usize> Sub for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        let mut d = self.d;
        for (x, y) in d.iter_mut().zip(o.d.iter()) {
            *x = *x - *y;
        }
        Self { v: self.v - o.v, d }
    }
}

impl<T: Scalar, const N: usize> Mul for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        let mut d = self.d;
        for (x, y) in d.iter_mut().zip(o.d.iter()) {
            *x = *x * o.v + self.v * *y;
        }
        Self { v: self.v * o.v, d }
    }
}

impl<T: Scalar, const N: usize> Div for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let inv = T::one() / o.v;
        let v = self.v * inv;
        let mut d = self.d;
        for (x, y) in d.iter_mut().zip(o.d.iter()) {
            *x = (*x - v * *y) * inv;
        }
        Self { v, d }
    }
}

impl<T: Scalar, const N: usize> Neg for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        let mut d = self.d;
        for x in d.iter_mut() {
            *x = -*x;
        }
        Self { v: -self.v, d }
    }
}

impl<T: Scalar, const N: usize> Add<f64> for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn add(self, o: f64) -> Self {
        Self {
            v: self.v + o,
            d: self.d,
        }
    }
}

impl<T: Scalar, const N: usize> Sub<f64> for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn sub(self, o: f64) -> Self {
        Self {
            v: self.v - o,
            d: self.d,
        }
    }
}

impl<T: Scalar, const N: usize> Mul<f64> for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn mul(self, o: f64) -> Self {
        let mut d = self.d;
        for x in d.iter_mut() {
            *x = *x * o;
        }
        Self { v: self.v * o, d }
    }
}

impl<T: Scalar, const N: usize> Div<f64> for Dual<T, N> {
    type Output = Self;
    #[inline]
    fn div(self, o: f64) -> Self {
        self * (1.0 / o)
    }
}

impl<T: Scalar, const N: usize> Scalar for Dual<T, N> {
    #[inline]
    fn cst(v: f64) -> Self {
        Self::constant(T::cst(v))
    }
    #[inline]
    fn re(&self) -> f64 {
        self.v.re()
    }
    #[inline]
    fn sin(self) -> Self {
        let (s, c) = (self.v.sin(), self.v.cos());
        self.chain(s, c)
    }
    #[inline]
    fn cos(self) -> Self {
        let (s, c) = (self.v.sin(), self.v.cos());
        self.chain(c, -s)
    }
    #[inline]
    fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        self.chain(r, T::one() / (r * 2.0))
    }
}

/// `sin(√x)/√x`, analytic in `x` including at and below zero.
///
/// A Taylor series is used for `x < 1` so that derivatives of every order
/// stay accurate through the straight (zero-bend) configuration.
pub fn sinc_of_square<T: Scalar>(x: T) -> T {
    if x.re() < 1.0 {
        // sum_k (-x)^k / (2k+1)!
        series(x, |k| {
            let mut f = 1.0;
            for i in 1..=(2 * k + 1) {
                f *= i as f64;
            }
            1.0 / f
        })
    } else {
        let t = x.sqrt();
        t.sin() / t
    }
}

/// `(1 - cos √x)/x`, analytic in `x`.
pub fn versine_of_square<T: Scalar>(x: T) -> T {
    if x.re() < 1.0 {
        // sum_k (-x)^k / (2k+2)!
        series(x, |k| {
            let mut f = 1.0;
            for i in 1..=(2 * k + 2) {
                f *= i as f64;
            }
            1.0 / f
        })
    } else {
        let t = x.sqrt();
        (T::one() - t.cos()) / x
    }
}

const SERIES_TERMS: usize = 13;

fn series<T: Scalar>(x: T, coeff: impl Fn(usize) -> f64) -> T {
    // Horner in (-x)
    let mx = -x;
    let mut acc = T::cst(coeff(SERIES_TERMS - 1));
    for k in (0..SERIES_TERMS - 1).rev() {
        acc = acc * mx + coeff(k);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    type D1 = Dual<f64, 1>;
    type D2 = Dual<D1, 1>;

    #[test]
    fn product_and_quotient_rules() {
        let x = D1::variable(3.0, 0);
        let y = x * x / (x + 1.0);
        // d/dx x^2/(x+1) = (x^2 + 2x)/(x+1)^2
        assert!((y.v - 9.0 / 4.0).abs() < 1e-15);
        assert!((y.d[0] - 15.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn nested_duals_give_second_derivative() {
        let x = D2 {
            v: D1::variable(0.7, 0),
            d: [D1::constant(1.0)],
        };
        let y = x.sin() * x;
        // f'' = 2 cos x - x sin x
        let expect = 2.0 * 0.7f64.cos() - 0.7 * 0.7f64.sin();
        assert!((y.d[0].d[0] - expect).abs() < 1e-14);
    }

    #[test]
    fn series_matches_closed_form_at_switch() {
        for &x in &[0.0, 1e-12, 1e-4, 0.3, 0.999_999, 1.0, 1.5, 16.0] {
            let s = sinc_of_square(x);
            let v = versine_of_square(x);
            if x > 0.0 {
                let t = f64::sqrt(x);
                assert!((s - t.sin() / t).abs() < 1e-15, "sinc at {x}");
                let closed = 2.0 * (t / 2.0).sin().powi(2) / x;
                assert!((v - closed).abs() < 1e-15, "versine at {x}");
            } else {
                assert_eq!(s, 1.0);
                assert_eq!(v, 0.5);
            }
        }
    }

    #[test]
    fn series_derivative_is_continuous_across_switch() {
        let below = sinc_of_square(D1::variable(1.0 - 1e-12, 0));
        let above = sinc_of_square(D1::variable(1.0, 0));
        assert!((below.d[0] - above.d[0]).abs() < 1e-10);
        let below = versine_of_square(D1::variable(1.0 - 1e-12, 0));
        let above = versine_of_square(D1::variable(1.0, 0));
        assert!((below.d[0] - above.d[0]).abs() < 1e-10);
    }
}
