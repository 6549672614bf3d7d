//! Assembly of the Lamb-wave eigenproblem blocks.
//!
//! With row index `j` and column index `m`:
//!
//! ```text
//! M_jm    = NT1(m,j,0)
//! A11_jm  = -(C11/rho) NT1(m,j,0) + (C55/rho) NT1(m,j,2) + (C55/rho) NT2(m,j,1)
//! A13_jm  = i (C13+C55)/rho NT1(m,j,1) + i (C55/rho) NT2(m,j,0)
//! A31_jm  = i (C31+C55)/rho NT1(m,j,1) + i (C31/rho) NT2(m,j,0)
//! A33_jm  = -(C55/rho) NT1(m,j,0) + (C33/rho) NT1(m,j,2) + (C33/rho) NT2(m,j,1)
//! ```
//!
//! The eigenvalues of `[[A11, A13], [A31, A33]] p = lambda M p` are
//! `lambda = -c_p^2`.

use nalgebra::DMatrix;

use crate::error::SolverError;
use crate::legendre::NtTable;
use crate::material::ElasticConstants;

/// Tolerance on `M_jm` against the identity.
pub const MASS_IDENTITY_TOL: f64 = 1e-10;

/// Real storage of the block system. `A13` and `A31` are purely
/// imaginary, so only their imaginary parts are kept.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrices {
    pub m_mat: DMatrix<f64>,
    pub a11: DMatrix<f64>,
    pub a33: DMatrix<f64>,
    pub a13_im: DMatrix<f64>,
    pub a31_im: DMatrix<f64>,
}

impl SystemMatrices {
    /// Number of basis functions per displacement component, `M + 1`.
    pub fn block_dim(&self) -> usize {
        self.a11.nrows()
    }

    /// Mass matrix of the full two-component system, `diag(M, M)`.
    pub fn full_mass(&self) -> DMatrix<f64> {
        let n = self.block_dim();
        let mut out = DMatrix::zeros(2 * n, 2 * n);
        out.view_mut((0, 0), (n, n)).copy_from(&self.m_mat);
        out.view_mut((n, n), (n, n)).copy_from(&self.m_mat);
        out
    }

    /// Largest deviation of the mass matrix from the identity.
    pub fn mass_deviation(&self) -> f64 {
        let n = self.m_mat.nrows();
        (self.m_mat.clone() - DMatrix::identity(n, n)).amax()
    }
}

/// Reusable assembler holding the kh-independent integral table.
#[derive(Debug, Clone)]
pub struct Assembler {
    table: NtTable,
}

impl Assembler {
    pub fn new(order: usize) -> Result<Self, SolverError> {
        if order < 1 {
            return Err(SolverError::OrderTooLow(order));
        }
        Ok(Self {
            table: NtTable::new(order),
        })
    }

    pub fn order(&self) -> usize {
        self.table.order()
    }

    pub fn assemble(&self, theta: &ElasticConstants, kh: f64) -> Result<SystemMatrices, SolverError> {
        if !(kh.is_finite() && kh > 0.0) {
            return Err(crate::error::LegendreError::NonPositiveKh(kh).into());
        }
        let dim = self.order() + 1;
        let t = &self.table;
        let r = 1.0 / theta.rho;
        let (c11, c13, c33, c55) = (theta.c11 * r, theta.c13 * r, theta.c33 * r, theta.c55 * r);
        let c31 = c13;

        let m_mat = DMatrix::from_fn(dim, dim, |j, m| t.nt1(m, j, 0, kh));
        let a11 = DMatrix::from_fn(dim, dim, |j, m| {
            -c11 * t.nt1(m, j, 0, kh) + c55 * t.nt1(m, j, 2, kh) + c55 * t.nt2(m, j, 1, kh)
        });
        let a13_im = DMatrix::from_fn(dim, dim, |j, m| {
            (c13 + c55) * t.nt1(m, j, 1, kh) + c55 * t.nt2(m, j, 0, kh)
        });
        let a31_im = DMatrix::from_fn(dim, dim, |j, m| {
            (c31 + c55) * t.nt1(m, j, 1, kh) + c31 * t.nt2(m, j, 0, kh)
        });
        let a33 = DMatrix::from_fn(dim, dim, |j, m| {
            -c55 * t.nt1(m, j, 0, kh) + c33 * t.nt1(m, j, 2, kh) + c33 * t.nt2(m, j, 1, kh)
        });
        let sys = SystemMatrices {
            m_mat,
            a11,
            a33,
            a13_im,
            a31_im,
        };
        debug_assert!(sys.mass_deviation() < MASS_IDENTITY_TOL * dim as f64);
        Ok(sys)
    }
}

/// One-shot assembly at wavenumber-thickness `kh` and order `M`.
pub fn assemble_system(theta: &ElasticConstants, kh: f64, order: usize) -> Result<SystemMatrices, SolverError> {
    Assembler::new(order)?.assemble(theta, kh)
}

/// Real reformulation `[[A11, -Im A13], [Im A31, A33]]`.
///
/// Conjugating the complex block matrix by `diag(I, iI)` maps it onto this
/// real matrix, so the spectra coincide.
pub fn realify(sys: &SystemMatrices) -> DMatrix<f64> {
    let n = sys.block_dim();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(&sys.a11);
    out.view_mut((0, n), (n, n)).copy_from(&(-&sys.a13_im));
    out.view_mut((n, 0), (n, n)).copy_from(&sys.a31_im);
    out.view_mut((n, n), (n, n)).copy_from(&sys.a33);
    out
}
