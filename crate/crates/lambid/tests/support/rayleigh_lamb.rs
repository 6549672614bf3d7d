//! Classical Rayleigh-Lamb roots for an isotropic plate.

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Symmetric,
    Antisymmetric,
}

pub struct IsotropicPlate {
    pub c_l: f64,
    pub c_t: f64,
    pub h: f64,
}

// cos(p d) and sin(p d)/p written in terms of p^2 so both real and
// imaginary p stay real-valued and free of poles.
fn cs(p2: f64, d: f64) -> (f64, f64) {
    if p2 > 0.0 {
        let p = p2.sqrt();
        ((p * d).cos(), (p * d).sin() / p)
    } else if p2 < 0.0 {
        let p = (-p2).sqrt();
        ((p * d).cosh(), (p * d).sinh() / p)
    } else {
        (1.0, d)
    }
}

impl IsotropicPlate {
    pub fn from_lame(e: f64, nu: f64, rho: f64, h: f64) -> Self {
        let lambda = e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu));
        let mu = e / (2.0 * (1.0 + nu));
        Self {
            c_l: ((lambda + 2.0 * mu) / rho).sqrt(),
            c_t: (mu / rho).sqrt(),
            h,
        }
    }

    /// Dispersion determinant at wavenumber `k` and phase velocity `c`.
    pub fn det(&self, family: Family, k: f64, c: f64) -> f64 {
        let w = c * k;
        let p2 = w * w / (self.c_l * self.c_l) - k * k;
        let q2 = w * w / (self.c_t * self.c_t) - k * k;
        let d = self.h / 2.0;
        let (cp, sp) = cs(p2, d);
        let (cq, sq) = cs(q2, d);
        let a = (q2 - k * k).powi(2);
        match family {
            Family::Symmetric => a * cp * sq + 4.0 * k * k * p2 * sp * cq,
            Family::Antisymmetric => a * sp * cq + 4.0 * k * k * q2 * cp * sq,
        }
    }

    /// Lowest phase velocity root of `family` at wavenumber `k`.
    pub fn fundamental_cp(&self, family: Family, k: f64) -> f64 {
        let c_hi = 1.2 * self.c_l;
        let n = 20_000;
        let f = |c: f64| self.det(family, k, c);
        let mut lo = c_hi * 1e-4;
        let mut f_lo = f(lo);
        for i in 1..=n {
            let hi = c_hi * (i as f64) / n as f64;
            if hi <= lo {
                continue;
            }
            let f_hi = f(hi);
            if f_lo == 0.0 {
                return lo;
            }
            if f_lo.signum() != f_hi.signum() {
                let (mut a, mut b, mut fa) = (lo, hi, f_lo);
                for _ in 0..200 {
                    let m = 0.5 * (a + b);
                    let fm = f(m);
                    if fm.signum() == fa.signum() {
                        a = m;
                        fa = fm;
                    } else {
                        b = m;
                    }
                    if b - a < 1e-13 * b {
                        break;
                    }
                }
                return 0.5 * (a + b);
            }
            lo = hi;
            f_lo = f_hi;
        }
        f64::NAN
    }
}
