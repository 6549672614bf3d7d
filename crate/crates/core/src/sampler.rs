//! Adaptive random-walk Metropolis.

#[cfg(not(feature = "std"))]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::bayes::{LogDensity, ParamVector};
use crate::error::SamplerError;

/// Acceptance rate the step scale is tuned toward during warmup.
pub const TARGET_ACCEPTANCE: f64 = 0.234;
/// Post-warmup acceptance below this attaches a warning to the chain.
pub const LOW_ACCEPTANCE: f64 = 0.05;
pub const MAX_INIT_DRAWS: usize = 100;
/// Iterations between proposal covariance refreshes during warmup.
const REFRESH_EVERY: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerConfig {
    /// Post-warmup samples to keep.
    pub n_samples: usize,
    pub warmup: usize,
    pub seed: u64,
    pub init: Option<Vec<f64>>,
    /// Multiplies every proposal step; 0 freezes the chain.
    pub proposal_scale: f64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            n_samples: 20_000,
            warmup: 10_000,
            seed: 0,
            init: None,
            proposal_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ChainWarning {
    LowAcceptance(f64),
}

/// Samples in iteration order, warmup included, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    pub dim: usize,
    pub samples: Vec<f64>,
    pub log_posts: Vec<f64>,
    pub accepted: Vec<bool>,
    pub warmup_len: usize,
    pub seed: u64,
    pub warnings: Vec<ChainWarning>,
}

impl Chain {
    pub fn len(&self) -> usize {
        self.log_posts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_posts.is_empty()
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.samples[i * self.dim..(i + 1) * self.dim]
    }

    pub fn param_vector(&self, i: usize) -> Option<ParamVector> {
        ParamVector::from_slice(self.sample(i))
    }

    /// Indices after warmup.
    pub fn kept(&self) -> core::ops::Range<usize> {
        self.warmup_len.min(self.len())..self.len()
    }

    pub fn post_warmup_len(&self) -> usize {
        self.kept().len()
    }

    /// Post-warmup values of coordinate `j`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.kept().map(|i| self.samples[i * self.dim + j]).collect()
    }

    pub fn acceptance_rate(&self) -> f64 {
        let r = self.kept();
        if r.is_empty() {
            return 0.0;
        }
        let n = r.len();
        self.accepted[r].iter().filter(|a| **a).count() as f64 / n as f64
    }
}

/// Sampler interface, so that gradient-based samplers can be swapped in.
pub trait Sampler {
    fn run<T: LogDensity + ?Sized>(&self, target: &T, cfg: &SamplerConfig) -> Result<Chain, SamplerError>;
}

/// Haario-style adaptive Metropolis.
///
/// Proposals are `x + s * exp(l) * L z` with `L L^T = (2.38^2 / d) (S + eps D)`,
/// where `S` is the empirical covariance of the later half of the warmup so
/// far and `D` a diagonal of squared target scales. `l` follows a
/// Robbins-Monro recursion toward [`TARGET_ACCEPTANCE`]. Both freeze when
/// warmup ends.
#[derive(Debug, Clone, Copy, Default)]
pub struct AdaptiveMetropolis;

fn initial_state<T: LogDensity + ?Sized>(target: &T, cfg: &SamplerConfig, rng: &mut ChaCha8Rng) -> Result<(Vec<f64>, f64), SamplerError> {
    if let Some(init) = &cfg.init {
        if init.len() != target.dim() {
            return Err(SamplerError::Config("init has the wrong dimension"));
        }
        let lp = target.log_density(init);
        if lp.is_finite() {
            return Ok((init.clone(), lp));
        }
    }
    for _ in 0..MAX_INIT_DRAWS {
        let x = target.draw_init(rng);
        let lp = target.log_density(&x);
        if lp.is_finite() {
            return Ok((x, lp));
        }
    }
    Err(SamplerError::Initialization(MAX_INIT_DRAWS))
}

fn empirical_covariance(samples: &[f64], dim: usize, from: usize, to: usize) -> DMatrix<f64> {
    let n = (to - from) as f64;
    let mut mean = DVector::zeros(dim);
    for i in from..to {
        mean += DVector::from_column_slice(&samples[i * dim..(i + 1) * dim]);
    }
    mean /= n;
    let mut cov = DMatrix::zeros(dim, dim);
    for i in from..to {
        let d = DVector::from_column_slice(&samples[i * dim..(i + 1) * dim]) - &mean;
        cov += &d * d.transpose();
    }
    cov / (n - 1.0).max(1.0)
}

impl AdaptiveMetropolis {
    fn proposal_factor(samples: &[f64], dim: usize, t: usize, base: &DMatrix<f64>) -> DMatrix<f64> {
        let from = t / 2;
        let mut cov = if t - from >= 2 * dim { empirical_covariance(samples, dim, from, t) } else { base.clone() };
        // keeps the factorization alive when the chain has barely moved
        cov += base * 1e-6;
        cov *= 2.38 * 2.38 / dim as f64;
        match cov.clone().cholesky() {
            Some(c) => c.l(),
            None => base.map(f64::sqrt) * (2.38 / (dim as f64).sqrt()),
        }
    }
}

impl Sampler for AdaptiveMetropolis {
    fn run<T: LogDensity + ?Sized>(&self, target: &T, cfg: &SamplerConfig) -> Result<Chain, SamplerError> {
        if cfg.n_samples == 0 {
            return Err(SamplerError::Config("n_samples must be positive"));
        }
        if !(cfg.proposal_scale >= 0.0 && cfg.proposal_scale.is_finite()) {
            return Err(SamplerError::Config("proposal_scale must be non-negative"));
        }
        let dim = target.dim();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let (mut x, mut lp) = initial_state(target, cfg, &mut rng)?;

        // first proposals use a tenth of the target scales
        let scales = target.scales();
        let base = DMatrix::from_diagonal(&DVector::from_iterator(dim, scales.iter().map(|s| (0.1 * s) * (0.1 * s))));
        let mut factor = base.map(f64::sqrt);
        let mut log_step = 0.0f64;

        let total = cfg.warmup + cfg.n_samples;
        let mut chain = Chain {
            dim,
            samples: Vec::with_capacity(total * dim),
            log_posts: Vec::with_capacity(total),
            accepted: Vec::with_capacity(total),
            warmup_len: cfg.warmup,
            seed: cfg.seed,
            warnings: Vec::new(),
        };
        let mut z = DVector::zeros(dim);
        let mut proposal = vec![0.0; dim];
        for t in 0..total {
            for zi in z.iter_mut() {
                *zi = rng.sample(StandardNormal);
            }
            let step = &factor * &z * (cfg.proposal_scale * log_step.exp());
            for (p, (xi, si)) in proposal.iter_mut().zip(x.iter().zip(step.iter())) {
                *p = xi + si;
            }
            let u: f64 = rng.random();
            let lp_new = if cfg.proposal_scale == 0.0 { lp } else { target.log_density(&proposal) };
            let log_alpha = if lp_new.is_finite() { (lp_new - lp).min(0.0) } else { f64::NEG_INFINITY };
            let accept = lp_new.is_finite() && u.ln() < log_alpha;
            if accept {
                x.copy_from_slice(&proposal);
                lp = lp_new;
            }
            chain.samples.extend_from_slice(&x);
            chain.log_posts.push(lp);
            chain.accepted.push(accept);

            if t < cfg.warmup {
                let gain = 1.0 / ((t + 1) as f64).powf(0.6);
                log_step += gain * (log_alpha.exp() - TARGET_ACCEPTANCE);
                log_step = log_step.clamp(-20.0, 5.0);
                if (t + 1) % REFRESH_EVERY == 0 {
                    factor = Self::proposal_factor(&chain.samples, dim, t + 1, &base);
                }
            }
        }
        let rate = chain.acceptance_rate();
        if rate < LOW_ACCEPTANCE {
            chain.warnings.push(ChainWarning::LowAcceptance(rate));
        }
        Ok(chain)
    }
}
