//! Orthonormal Legendre basis on the plate thickness and the NT integrals.
//!
//! The basis functions live on `q3 in [0, kh]` through the map
//! `x = 2 q3 / kh - 1`:
//!
//! ```text
//! Q_m(q3) = sqrt((2m + 1) / kh) * P_m(2 q3 / kh - 1)
//! ```
//!
//! which makes `{Q_m}` orthonormal on `[0, kh]`. Polynomials are stored in
//! the local coordinate `x`; expanding in raw powers of `q3` loses every
//! significant digit by order 12 (coefficients grow like `C(2m, m)`).
//!
//! Both integrals factor into a kh-independent part and a power of `2/kh`:
//!
//! ```text
//! NT1(m, j, n) = sqrt((2m+1)(2j+1)) / 2 * (2/kh)^n * ∫_{-1}^{1} P_j P_m^(n) dx
//! NT2(m, j, n) = sqrt((2m+1)(2j+1)) / kh * (2/kh)^n * [P_j P_m^(n)](-1) - [P_j P_m^(n)](1)
//! ```
//!
//! [`NtTable`] caches the kh-independent parts for fast repeated assembly;
//! [`nt1`] and [`nt2`] compute each value directly from the polynomials.

#[cfg(not(feature = "std"))]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::LegendreError;
use crate::poly::Polynomial;

/// Highest derivative order the assembly uses.
pub const MAX_DERIVATIVE: usize = 2;

/// Expansion orders above this lose accuracy in double precision.
pub const CONDITIONING_LIMIT: usize = 20;

/// Legendre polynomial `P_m` on `[-1, 1]` by Bonnet's recurrence
/// `(n+1) P_{n+1} = (2n+1) x P_n - n P_{n-1}`.
pub fn legendre_poly(m: usize) -> Polynomial {
    let mut prev = Polynomial::constant(1.0);
    if m == 0 {
        return prev;
    }
    let mut cur = Polynomial::x();
    let x = Polynomial::x();
    for n in 1..m {
        let nf = n as f64;
        let next = &(&x * &cur).scale((2.0 * nf + 1.0) / (nf + 1.0)) - &prev.scale(nf / (nf + 1.0));
        prev = cur;
        cur = next;
    }
    cur
}

/// Truncation order and dimensionless wavenumber-thickness product.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisSpec {
    pub order: usize,
    pub kh: f64,
}

impl BasisSpec {
    pub fn new(order: usize, kh: f64) -> Result<Self, LegendreError> {
        check_kh(kh)?;
        Ok(Self { order, kh })
    }

    /// Whether `order` is high enough that monomial arithmetic is suspect.
    pub fn is_ill_conditioned(&self) -> bool {
        self.order > CONDITIONING_LIMIT
    }
}

fn check_kh(kh: f64) -> Result<(), LegendreError> {
    if kh.is_finite() && kh > 0.0 {
        Ok(())
    } else {
        Err(LegendreError::NonPositiveKh(kh))
    }
}

/// A polynomial in `q3` on `[0, kh]`, stored in the local coordinate
/// `x = 2 q3 / kh - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MappedPolynomial {
    local: Polynomial,
    kh: f64,
}

impl MappedPolynomial {
    pub fn local(&self) -> &Polynomial {
        &self.local
    }

    pub fn kh(&self) -> f64 {
        self.kh
    }

    pub fn to_local(&self, q3: f64) -> f64 {
        2.0 * q3 / self.kh - 1.0
    }

    pub fn eval(&self, q3: f64) -> f64 {
        self.local.eval(self.to_local(q3))
    }

    /// n-th derivative with respect to `q3`.
    pub fn derivative(&self, n: usize) -> Self {
        let chain = (2.0 / self.kh).powi(n as i32);
        Self {
            local: self.local.nth_derivative(n).scale(chain),
            kh: self.kh,
        }
    }

    /// Pointwise product; both factors must share `kh`.
    pub fn product(&self, other: &Self) -> Self {
        debug_assert_eq!(self.kh, other.kh);
        Self {
            local: &self.local * &other.local,
            kh: self.kh,
        }
    }

    /// Exact integral over `[0, kh]`.
    pub fn integrate(&self) -> f64 {
        0.5 * self.kh * self.local.integrate_symmetric_unit()
    }

    /// `∫_0^kh self * other dq3` with error-free product accumulation.
    pub fn integrate_product(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.kh, other.kh);
        0.5 * self.kh * self.local.integrate_product_unit(&other.local)
    }

    pub fn eval_compensated(&self, q3: f64) -> f64 {
        self.local.eval_compensated(self.to_local(q3))
    }

    /// Expansion in raw powers of `q3`. Ill-conditioned beyond order ~8;
    /// kept for inspection and low-order checks only.
    pub fn expand_q3(&self) -> Polynomial {
        self.local.compose_affine(2.0 / self.kh, -1.0)
    }
}

/// Basis function `Q_m` on `[0, kh]`.
pub fn q_basis(m: usize, kh: f64) -> Result<MappedPolynomial, LegendreError> {
    check_kh(kh)?;
    let norm = ((2 * m + 1) as f64 / kh).sqrt();
    Ok(MappedPolynomial {
        local: legendre_poly(m).scale(norm),
        kh,
    })
}

fn check_derivative(n: usize) -> Result<(), LegendreError> {
    if n > MAX_DERIVATIVE {
        Err(LegendreError::DerivativeOrder(n))
    } else {
        Ok(())
    }
}

/// `NT1(m, j, n) = ∫_0^kh Q_j d^n Q_m / dq3^n dq3`, integrated exactly.
pub fn nt1(m: usize, j: usize, n: usize, kh: f64) -> Result<f64, LegendreError> {
    check_derivative(n)?;
    let qm = q_basis(m, kh)?;
    let qj = q_basis(j, kh)?;
    Ok(qj.integrate_product(&qm.derivative(n)))
}

/// `NT2(m, j, n) = f_n(0) - f_n(kh)` with `f_n = Q_j d^n Q_m / dq3^n`;
/// the boundary delta functions sift `f_n` at the two surfaces.
pub fn nt2(m: usize, j: usize, n: usize, kh: f64) -> Result<f64, LegendreError> {
    check_derivative(n)?;
    let qj = q_basis(j, kh)?;
    let dqm = q_basis(m, kh)?.derivative(n);
    let f = |q3| qj.eval_compensated(q3) * dqm.eval_compensated(q3);
    Ok(f(0.0) - f(kh))
}

/// Cached kh-independent parts of NT1 and NT2 up to a given order.
#[derive(Debug, Clone)]
pub struct NtTable {
    order: usize,
    // [n][j * (order + 1) + m]
    interior: [Vec<f64>; MAX_DERIVATIVE + 1],
    boundary: [Vec<f64>; MAX_DERIVATIVE + 1],
}

impl NtTable {
    pub fn new(order: usize) -> Self {
        let dim = order + 1;
        let legendre: Vec<Polynomial> = (0..dim).map(legendre_poly).collect();
        let mut interior: [Vec<f64>; MAX_DERIVATIVE + 1] = Default::default();
        let mut boundary: [Vec<f64>; MAX_DERIVATIVE + 1] = Default::default();
        for n in 0..=MAX_DERIVATIVE {
            let derivs: Vec<Polynomial> = legendre.iter().map(|p| p.nth_derivative(n)).collect();
            let mut int_n = vec![0.0; dim * dim];
            let mut bnd_n = vec![0.0; dim * dim];
            for j in 0..dim {
                for m in 0..dim {
                    let norm = (((2 * m + 1) * (2 * j + 1)) as f64).sqrt();
                    let (pj, dm) = (&legendre[j], &derivs[m]);
                    int_n[j * dim + m] = 0.5 * norm * pj.integrate_product_unit(dm);
                    let at = |x| pj.eval_compensated(x) * dm.eval_compensated(x);
                    bnd_n[j * dim + m] = norm * (at(-1.0) - at(1.0));
                }
            }
            interior[n] = int_n;
            boundary[n] = bnd_n;
        }
        Self {
            order,
            interior,
            boundary,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    #[inline]
    pub fn nt1(&self, m: usize, j: usize, n: usize, kh: f64) -> f64 {
        let dim = self.order + 1;
        self.interior[n][j * dim + m] * (2.0 / kh).powi(n as i32)
    }

    #[inline]
    pub fn nt2(&self, m: usize, j: usize, n: usize, kh: f64) -> f64 {
        let dim = self.order + 1;
        self.boundary[n][j * dim + m] * (2.0 / kh).powi(n as i32) / kh
    }
}
