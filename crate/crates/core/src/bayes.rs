//! Priors, likelihood and posterior over the elastic constants, density and
//! observation noise.

#[cfg(not(feature = "std"))]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal};

use crate::curves::{ForwardModel, ModeLabel};
use crate::error::SamplerError;
use crate::material::{ElasticConstants, PlateSpec};
use crate::wavefield::{Observation, ObservationSet};

/// Expansion order used inside the likelihood unless overridden.
pub const LIKELIHOOD_ORDER: usize = 10;
pub const N_PARAMS: usize = 6;
pub const PARAM_NAMES: [&str; N_PARAMS] = ["c11", "c13", "c33", "c55", "rho", "sigma"];

/// `{C11, C13, C33, C55}` in Pa, `rho` in kg/m^3, `sigma` in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamVector {
    pub c11: f64,
    pub c13: f64,
    pub c33: f64,
    pub c55: f64,
    pub rho: f64,
    pub sigma: f64,
}

impl ParamVector {
    pub fn new(theta: &ElasticConstants, sigma: f64) -> Self {
        Self::from_array([theta.c11, theta.c13, theta.c33, theta.c55, theta.rho, sigma])
    }

    pub fn as_array(&self) -> [f64; N_PARAMS] {
        [self.c11, self.c13, self.c33, self.c55, self.rho, self.sigma]
    }

    pub fn from_array(a: [f64; N_PARAMS]) -> Self {
        Self {
            c11: a[0],
            c13: a[1],
            c33: a[2],
            c55: a[3],
            rho: a[4],
            sigma: a[5],
        }
    }

    pub fn from_slice(s: &[f64]) -> Option<Self> {
        let a: [f64; N_PARAMS] = s.try_into().ok()?;
        Some(Self::from_array(a))
    }

    pub fn constants(&self) -> ElasticConstants {
        ElasticConstants::unchecked(self.c11, self.c13, self.c33, self.c55, self.rho)
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite())
    }
}

/// Univariate prior. Gamma uses the shape-rate convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prior {
    Gamma { shape: f64, rate: f64 },
    Normal { mean: f64, sd: f64 },
}

impl Prior {
    pub fn validate(&self) -> Result<(), SamplerError> {
        let ok = match *self {
            Prior::Gamma { shape, rate } => shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite(),
            Prior::Normal { mean, sd } => sd > 0.0 && sd.is_finite() && mean.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(SamplerError::Prior("shape, rate and sd must be positive and finite"))
        }
    }

    pub fn log_density(&self, x: f64) -> f64 {
        match *self {
            Prior::Gamma { shape, rate } => {
                if !(x > 0.0) || !x.is_finite() {
                    return f64::NEG_INFINITY;
                }
                shape * rate.ln() + (shape - 1.0) * x.ln() - rate * x - libm::lgamma(shape)
            }
            Prior::Normal { mean, sd } => {
                if !x.is_finite() {
                    return f64::NEG_INFINITY;
                }
                let z = (x - mean) / sd;
                -0.5 * z * z - (sd * (2.0 * PI).sqrt()).ln()
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            Prior::Gamma { shape, rate } => shape / rate,
            Prior::Normal { mean, .. } => mean,
        }
    }

    pub fn variance(&self) -> f64 {
        match *self {
            Prior::Gamma { shape, rate } => shape / (rate * rate),
            Prior::Normal { sd, .. } => sd * sd,
        }
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            Prior::Gamma { shape, rate } => Gamma::new(shape, 1.0 / rate).expect("validated prior").sample(rng),
            Prior::Normal { mean, sd } => Normal::new(mean, sd).expect("validated prior").sample(rng),
        }
    }
}

/// A prior stated in display units: the SI value `x` has density
/// `dist(x / unit) / unit`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledPrior {
    pub dist: Prior,
    pub unit: f64,
}

impl ScaledPrior {
    pub fn log_density(&self, x: f64) -> f64 {
        self.dist.log_density(x / self.unit) - self.unit.ln()
    }

    pub fn mean(&self) -> f64 {
        self.dist.mean() * self.unit
    }

    pub fn variance(&self) -> f64 {
        self.dist.variance() * self.unit * self.unit
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        self.dist.sample(rng) * self.unit
    }
}

/// Independent priors on the six parameters, in [`PARAM_NAMES`] order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorSpec {
    pub params: [ScaledPrior; N_PARAMS],
}

impl Default for PriorSpec {
    /// Stiffness priors in GPa, density in kg/m^3, noise in rad/s.
    fn default() -> Self {
        let gpa = |shape, rate| ScaledPrior {
            dist: Prior::Gamma { shape, rate },
            unit: 1e9,
        };
        Self {
            params: [
                gpa(2.0, 0.02),
                gpa(1.5, 0.05),
                gpa(1.5, 0.05),
                gpa(1.5, 0.025),
                ScaledPrior {
                    dist: Prior::Normal { mean: 1600.0, sd: 300.0 },
                    unit: 1.0,
                },
                ScaledPrior {
                    dist: Prior::Gamma { shape: 2.0, rate: 2e-5 },
                    unit: 1.0,
                },
            ],
        }
    }
}

impl PriorSpec {
    pub fn validate(&self) -> Result<(), SamplerError> {
        for p in &self.params {
            p.dist.validate()?;
            if !(p.unit > 0.0 && p.unit.is_finite()) {
                return Err(SamplerError::Prior("unit must be positive"));
            }
        }
        Ok(())
    }

    pub fn log_prior(&self, theta: &ParamVector) -> f64 {
        let mut total = 0.0;
        for (p, x) in self.params.iter().zip(theta.as_array()) {
            let lp = p.log_density(x);
            if lp == f64::NEG_INFINITY {
                return lp;
            }
            total += lp;
        }
        total
    }

    pub fn sample(&self, rng: &mut ChaCha8Rng) -> ParamVector {
        let mut a = [0.0; N_PARAMS];
        for (v, p) in a.iter_mut().zip(&self.params) {
            *v = p.sample(rng);
        }
        ParamVector::from_array(a)
    }

    pub fn means(&self) -> [f64; N_PARAMS] {
        self.params.map(|p| p.mean())
    }

    pub fn sds(&self) -> [f64; N_PARAMS] {
        self.params.map(|p| p.variance().sqrt())
    }
}

/// Predicted angular frequency at each observation, or `None` as soon as a
/// forward solve is non-physical: fewer than two negative eigenvalues, or a
/// non-negative eigenvalue among the two of smallest magnitude.
pub fn predict(obs: &ObservationSet, theta: &ElasticConstants, plate: &PlateSpec, model: &ForwardModel) -> Option<Vec<f64>> {
    obs.points.iter().map(|p| predict_point(p, theta, plate, model)).collect()
}

fn predict_point(p: &Observation, theta: &ElasticConstants, plate: &PlateSpec, model: &ForwardModel) -> Option<f64> {
    let modes = model.physical_modes(theta, p.k * plate.thickness, 2).ok()?;
    if modes.skipped > 0 {
        return None;
    }
    let c = modes.phase_velocities();
    if c.len() < 2 {
        return None;
    }
    Some(c[p.mode.index()] * p.k)
}

/// Gaussian log likelihood of the observed frequencies; `-inf` when the
/// parameters are non-physical or any forward solve is rejected.
pub fn log_likelihood(obs: &ObservationSet, theta: &ParamVector, plate: &PlateSpec, model: &ForwardModel) -> f64 {
    let c = theta.constants();
    let positive = [c.c11, c.c33, c.c55, c.rho, theta.sigma].iter().all(|v| *v > 0.0);
    if !theta.is_finite() || !positive || obs.is_empty() {
        return f64::NEG_INFINITY;
    }
    let Some(pred) = predict(obs, &c, plate, model) else {
        return f64::NEG_INFINITY;
    };
    let n = obs.len() as f64;
    let ss: f64 = obs.points.iter().zip(&pred).map(|(p, w)| (p.omega - w) * (p.omega - w)).sum();
    -n * theta.sigma.ln() - 0.5 * n * (2.0 * PI).ln() - 0.5 * ss / (theta.sigma * theta.sigma)
}

/// Target density for the samplers.
pub trait LogDensity {
    fn dim(&self) -> usize;
    fn log_density(&self, x: &[f64]) -> f64;
    /// Draw used when the initial state is missing or has zero density.
    fn draw_init(&self, rng: &mut ChaCha8Rng) -> Vec<f64>;
    /// Rough per-coordinate scale used to shape the first proposals.
    fn scales(&self) -> Vec<f64>;
}

/// Log posterior of [`ParamVector`] given observed dispersion points.
#[derive(Debug, Clone)]
pub struct Posterior<'a> {
    pub obs: &'a ObservationSet,
    pub priors: PriorSpec,
    pub plate: PlateSpec,
    pub model: ForwardModel,
    /// When false the target is the prior alone.
    pub use_likelihood: bool,
}

impl<'a> Posterior<'a> {
    pub fn new(obs: &'a ObservationSet, priors: PriorSpec, plate: PlateSpec, model: ForwardModel) -> Self {
        Self {
            obs,
            priors,
            plate,
            model,
            use_likelihood: true,
        }
    }

    pub fn prior_only(mut self) -> Self {
        self.use_likelihood = false;
        self
    }

    pub fn log_posterior(&self, theta: &ParamVector) -> f64 {
        let lp = self.priors.log_prior(theta);
        if lp == f64::NEG_INFINITY || !self.use_likelihood {
            return lp;
        }
        lp + log_likelihood(self.obs, theta, &self.plate, &self.model)
    }
}

impl LogDensity for Posterior<'_> {
    fn dim(&self) -> usize {
        N_PARAMS
    }

    fn log_density(&self, x: &[f64]) -> f64 {
        ParamVector::from_slice(x).map_or(f64::NEG_INFINITY, |t| self.log_posterior(&t))
    }

    fn draw_init(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        self.priors.sample(rng).as_array().to_vec()
    }

    fn scales(&self) -> Vec<f64> {
        self.priors.sds().to_vec()
    }
}

/// Noisy observations on the exact curves: `n_per_mode` frequencies evenly
/// spaced over the band, wavenumbers solved at `model`'s order, then
/// Gaussian noise of standard deviation `sigma` added to each frequency.
pub fn synthetic_observations(
    theta: &ElasticConstants,
    plate: &PlateSpec,
    band: (f64, f64),
    n_per_mode: usize,
    sigma: f64,
    model: &ForwardModel,
    rng: &mut ChaCha8Rng,
) -> Result<ObservationSet, crate::error::SolverError> {
    use crate::curves::fh_to_omega;
    let (lo, hi) = band;
    let mut points = Vec::new();
    for mode in ModeLabel::BOTH {
        for i in 0..n_per_mode {
            let fh = if n_per_mode == 1 { 0.5 * (lo + hi) } else { lo + (hi - lo) * i as f64 / (n_per_mode - 1) as f64 };
            let omega = fh_to_omega(fh, plate);
            let k = model.wavenumber(theta, plate, mode, omega)?;
            let noise: f64 = rng.sample(rand_distr::StandardNormal);
            points.push(Observation {
                mode,
                omega: omega + sigma * noise,
                k,
            });
        }
    }
    // noise may push the band edges slightly out
    let (mut b_lo, mut b_hi) = band;
    for p in &points {
        let fh = crate::curves::omega_to_fh(p.omega, plate);
        b_lo = b_lo.min(fh);
        b_hi = b_hi.max(fh);
    }
    Ok(ObservationSet::new(points, (b_lo, b_hi)))
}
