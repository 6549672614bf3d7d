//! Elastic constants, plate geometry, and engineering-constant conversion.

use nalgebra::Matrix3;

use crate::error::MaterialError;

/// Orthotropic stiffness entries in the sagittal plane (Pa) and density
/// (kg/m^3). `C31` is not stored: it equals `C13`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElasticConstants {
    pub c11: f64,
    pub c13: f64,
    pub c33: f64,
    pub c55: f64,
    pub rho: f64,
}

fn positive(field: &'static str, value: f64) -> Result<f64, MaterialError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(MaterialError::NonPositive { field, value })
    }
}

impl ElasticConstants {
    pub fn new(c11: f64, c13: f64, c33: f64, c55: f64, rho: f64) -> Result<Self, MaterialError> {
        Ok(Self {
            c11: positive("c11", c11)?,
            c13: positive("c13", c13)?,
            c33: positive("c33", c33)?,
            c55: positive("c55", c55)?,
            rho: positive("rho", rho)?,
        })
    }

    /// Stiffnesses given in GPa, density in kg/m^3.
    pub fn from_gpa(c11: f64, c13: f64, c33: f64, c55: f64, rho: f64) -> Result<Self, MaterialError> {
        Self::new(c11 * 1e9, c13 * 1e9, c33 * 1e9, c55 * 1e9, rho)
    }

    /// Builds without the positivity check. The sampler explores the whole
    /// real line and relies on the prior and the solver to reject.
    pub fn unchecked(c11: f64, c13: f64, c33: f64, c55: f64, rho: f64) -> Self {
        Self {
            c11,
            c13,
            c33,
            c55,
            rho,
        }
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.c11, self.c13, self.c33, self.c55, self.rho]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        Self::unchecked(a[0], a[1], a[2], a[3], a[4])
    }

    /// All five entries scaled by `s`; dispersion depends only on `C/rho`.
    pub fn scaled(&self, s: f64) -> Self {
        Self::from_array(self.as_array().map(|v| v * s))
    }
}

/// Plate thickness in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlateSpec {
    pub thickness: f64,
}

impl PlateSpec {
    pub fn new(thickness: f64) -> Result<Self, MaterialError> {
        Ok(Self {
            thickness: positive("thickness", thickness)?,
        })
    }

    pub fn from_mm(mm: f64) -> Result<Self, MaterialError> {
        Self::new(mm * 1e-3)
    }
}

/// In-plane engineering constants of a transversely isotropic ply
/// (fibre axis 1, isotropic 2-3 plane), moduli in Pa.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineeringConstants {
    pub e11: f64,
    pub e22: f64,
    pub g12: f64,
    pub nu12: f64,
    pub nu21: f64,
    pub rho: f64,
}

/// Inverts the 3D compliance of a transversely isotropic solid.
///
/// The thickness direction 3 shares the transverse properties of direction
/// 2: `E33 = E22`, `G13 = G12`, `nu13 = nu12`, and the transverse Poisson
/// ratio `nu23` is taken as `nu21`. The 1-2 shear coupling term is the mean
/// of `nu12/E11` and `nu21/E22` so slightly non-reciprocal data is accepted.
/// An isotropic input (`E11 = E22 = E`, `nu12 = nu21 = nu`) gives the Lamé
/// stiffnesses.
pub fn engineering_to_constants(e: &EngineeringConstants) -> Result<ElasticConstants, MaterialError> {
    positive("e11", e.e11)?;
    positive("e22", e.e22)?;
    positive("g12", e.g12)?;
    positive("rho", e.rho)?;
    if !e.nu12.is_finite() || !e.nu21.is_finite() {
        return Err(MaterialError::NotPositiveDefinite);
    }
    let s12 = -0.5 * (e.nu12 / e.e11 + e.nu21 / e.e22);
    let s23 = -e.nu21 / e.e22;
    let compliance = Matrix3::new(
        1.0 / e.e11,
        s12,
        s12,
        s12,
        1.0 / e.e22,
        s23,
        s12,
        s23,
        1.0 / e.e22,
    );
    if compliance.cholesky().is_none() {
        return Err(MaterialError::NotPositiveDefinite);
    }
    let stiffness = compliance.try_inverse().ok_or(MaterialError::NotPositiveDefinite)?;
    Ok(ElasticConstants::unchecked(
        stiffness[(0, 0)],
        stiffness[(0, 2)],
        stiffness[(2, 2)],
        e.g12,
        e.rho,
    ))
}
