//! Dense real polynomials in monomial form.
//!
//! Sums that can cancel are accumulated with Neumaier compensation. The
//! product integral used by the basis integrals goes further: products of
//! Legendre coefficients reach 1e10 at order 16 while their integral is
//! O(1), so [`Polynomial::integrate_product_unit`] forms every product and
//! quotient error-free in double-double arithmetic instead of materializing
//! a rounded product polynomial.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

/// Compensated (Neumaier) running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi) / 2`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, libm::fma(a, b, -p))
}

impl core::ops::Add for DoubleDouble {
    type Output = Self;

    fn add(self, other: Self) -> Self {
        let (s, e) = two_sum(self.hi, other.hi);
        let (hi, lo) = two_sum(s, e + self.lo + other.lo);
        Self { hi, lo }
    }
}

impl DoubleDouble {
    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// Exact product of two doubles.
    pub fn product(a: f64, b: f64) -> Self {
        let (hi, lo) = two_prod(a, b);
        Self { hi, lo }
    }

    pub fn mul_f64(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = two_sum(p, e + self.lo * b);
        Self { hi, lo }
    }

    pub fn div_f64(self, d: f64) -> Self {
        let q1 = self.hi / d;
        let r = libm::fma(-q1, d, self.hi) + self.lo;
        let (hi, lo) = two_sum(q1, r / d);
        Self { hi, lo }
    }

    pub fn value(self) -> f64 {
        self.hi + self.lo
    }
}

/// Polynomial with `coeffs[i]` the coefficient of `x^i`.
///
/// Always kept in canonical form: no trailing zero coefficients. The zero
/// polynomial has an empty coefficient vector and degree -1.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `x`.
    pub fn x() -> Self {
        Self::new(vec![0.0, 1.0])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree, with -1 for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn eval(&self, x: f64) -> f64 {
        // Horner is fine at |x| <= 1, which is the only place the basis is evaluated.
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    pub fn nth_derivative(&self, n: usize) -> Self {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(0.0);
        out.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, &c)| c / (i + 1) as f64),
        );
        Self::new(out)
    }

    /// Exact definite integral over `[a, b]`, summed term by term.
    pub fn integrate(&self, a: f64, b: f64) -> f64 {
        if a == -1.0 && b == 1.0 {
            return self.integrate_symmetric_unit();
        }
        let mut pa = a;
        let mut pb = b;
        let mut s = NeumaierSum::new();
        for (i, &c) in self.coeffs.iter().enumerate() {
            s.add(c * (pb - pa) / (i + 1) as f64);
            pa *= a;
            pb *= b;
        }
        s.value()
    }

    /// Integral over `[-1, 1]`: only even powers contribute `2/(i+1)`.
    pub fn integrate_symmetric_unit(&self) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .step_by(2)
            .map(|(i, &c)| 2.0 * c / (i + 1) as f64)
            .collect::<NeumaierSum>()
            .value()
    }

    /// Horner evaluation carried in double-double.
    pub fn eval_compensated(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(DoubleDouble::default(), |acc, &c| acc.mul_f64(x) + DoubleDouble::from_f64(c))
            .value()
    }

    /// `∫_{-1}^{1} self * other dx` without rounding the product coefficients.
    pub fn integrate_product_unit(&self, other: &Polynomial) -> f64 {
        if self.is_zero() || other.is_zero() {
            return 0.0;
        }
        let n = self.coeffs.len() + other.coeffs.len() - 1;
        let mut conv = vec![DoubleDouble::default(); n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                if (i + j) % 2 == 0 {
                    conv[i + j] = conv[i + j] + DoubleDouble::product(a, b);
                }
            }
        }
        conv.iter()
            .enumerate()
            .step_by(2)
            .fold(DoubleDouble::default(), |acc, (s, c)| acc + c.mul_f64(2.0).div_f64((s + 1) as f64))
            .value()
    }

    /// Substitutes `x -> a*x + b`.
    pub fn compose_affine(&self, a: f64, b: f64) -> Self {
        let lin = Polynomial::new(vec![b, a]);
        let mut out = Polynomial::zero();
        for &c in self.coeffs.iter().rev() {
            out = &(&out * &lin) + &Polynomial::constant(c);
        }
        out
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let get = |v: &[f64], i: usize| v.get(i).copied().unwrap_or(0.0);
        Polynomial::new(
            (0..n)
                .map(|i| get(&self.coeffs, i) + get(&rhs.coeffs, i))
                .collect(),
        )
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        self + &(-rhs)
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        if self.is_zero() || rhs.is_zero() {
            return Polynomial::zero();
        }
        let n = self.coeffs.len() + rhs.coeffs.len() - 1;
        let mut acc = vec![NeumaierSum::new(); n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                acc[i + j].add(a * b);
            }
        }
        Polynomial::new(acc.iter().map(NeumaierSum::value).collect())
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: Polynomial) -> Polynomial {
        &self + &rhs
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: Polynomial) -> Polynomial {
        &self * &rhs
    }
}
