//! Summaries, kernel density estimates and curve ensembles from chains.

#[cfg(not(feature = "std"))]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::DMatrix;

use crate::bayes::{ParamVector, PARAM_NAMES};
use crate::curves::{trace_curves, ModeLabel, TracedCurves};
use crate::error::AnalysisError;
use crate::material::PlateSpec;
use crate::poly::NeumaierSum;
use crate::sampler::Chain;

pub const MIN_SUMMARY_SAMPLES: usize = 100;
pub const KDE_GRID: usize = 512;
pub const KDE2_GRID: usize = 128;
/// Bivariate grids extend this many bandwidths past the sample range.
pub const KDE2_PAD: f64 = 3.0;
pub const MAX_SKIPPED_FRACTION: f64 = 0.5;
/// Forward solves per ensemble targeted by [`default_thin`].
pub const ENSEMBLE_TARGET: usize = 500;

fn param_name(j: usize) -> &'static str {
    PARAM_NAMES.get(j).copied().unwrap_or("param")
}

/// Moments and interval of one sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

pub fn mean(values: &[f64]) -> f64 {
    let mut s = NeumaierSum::default();
    for v in values {
        s.add(*v);
    }
    s.value() / values.len() as f64
}

/// Two-pass unbiased variance; zero for fewer than two values.
pub fn variance(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    let mut s = NeumaierSum::default();
    for v in values {
        s.add((v - m) * (v - m));
    }
    (s.value() / (values.len() - 1) as f64).max(0.0)
}

/// Linear-interpolation quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = q.clamp(0.0, 1.0) * (n - 1) as f64;
    let i = (h.floor() as usize).min(n - 2);
    let frac = h - i as f64;
    sorted[i] + frac * (sorted[i + 1] - sorted[i])
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut s = values.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

pub fn describe(values: &[f64]) -> Stats {
    let s = sorted(values);
    Stats {
        mean: mean(values),
        variance: variance(values),
        ci_lo: quantile_sorted(&s, 0.025),
        ci_hi: quantile_sorted(&s, 0.975),
    }
}

/// Silverman's rule, `0.9 min(sd, IQR / 1.34) n^(-1/5)`.
pub fn silverman_bandwidth(values: &[f64]) -> f64 {
    let s = sorted(values);
    let sd = variance(values).sqrt();
    let iqr = quantile_sorted(&s, 0.75) - quantile_sorted(&s, 0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * (values.len() as f64).powf(-0.2)
}

/// Maximizer of a Gaussian KDE over a [`KDE_GRID`]-point grid spanning the
/// sample range.
pub fn kde_mode(values: &[f64], bandwidth: Option<f64>) -> f64 {
    let s = sorted(values);
    let (lo, hi) = (s[0], s[s.len() - 1]);
    let h = bandwidth.unwrap_or_else(|| silverman_bandwidth(values));
    if !(hi > lo) || !(h > 0.0) {
        return mean(values);
    }
    let mut best = (lo, f64::NEG_INFINITY);
    for g in 0..KDE_GRID {
        let x = lo + (hi - lo) * g as f64 / (KDE_GRID - 1) as f64;
        // only samples within 8 bandwidths contribute measurably
        let a = s.partition_point(|v| *v < x - 8.0 * h);
        let b = s.partition_point(|v| *v <= x + 8.0 * h);
        let d: f64 = s[a..b].iter().map(|v| (-0.5 * ((x - v) / h).powi(2)).exp()).sum();
        if d > best.1 {
            best = (x, d);
        }
    }
    best.0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSummary {
    pub name: &'static str,
    pub mean: f64,
    pub variance: f64,
    pub kde_mode: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSummary {
    pub params: Vec<ParamSummary>,
    pub n_samples: usize,
    pub acceptance: f64,
}

impl PosteriorSummary {
    pub fn get(&self, name: &str) -> Option<&ParamSummary> {
        self.params.iter().find(|p| p.name == name)
    }
}

/// Post-warmup mean, variance, KDE mode and equal-tailed 95% interval of
/// every coordinate.
pub fn summarize(chain: &Chain) -> Result<PosteriorSummary, AnalysisError> {
    summarize_with(chain, None)
}

pub fn summarize_with(chain: &Chain, bandwidth: Option<f64>) -> Result<PosteriorSummary, AnalysisError> {
    let n = chain.post_warmup_len();
    if n < MIN_SUMMARY_SAMPLES {
        return Err(AnalysisError::TooFewSamples {
            found: n,
            needed: MIN_SUMMARY_SAMPLES,
        });
    }
    let params = (0..chain.dim)
        .map(|j| {
            let col = chain.column(j);
            let st = describe(&col);
            ParamSummary {
                name: param_name(j),
                mean: st.mean,
                variance: st.variance,
                kde_mode: kde_mode(&col, bandwidth),
                ci_lo: st.ci_lo,
                ci_hi: st.ci_hi,
            }
        })
        .collect();
    Ok(PosteriorSummary {
        params,
        n_samples: n,
        acceptance: chain.acceptance_rate(),
    })
}

/// Monte Carlo standard error of the mean by non-overlapping batch means,
/// with about `sqrt(n)` batches.
pub fn batch_means_se(values: &[f64]) -> f64 {
    let n = values.len();
    let batches = libm::sqrt(n as f64).floor().max(2.0) as usize;
    let size = n / batches;
    if size == 0 {
        return (variance(values) / n as f64).sqrt();
    }
    let means: Vec<f64> = (0..batches).map(|b| mean(&values[b * size..(b + 1) * size])).collect();
    (variance(&means) / batches as f64).sqrt()
}

/// Difference of first- and second-half post-warmup means per coordinate,
/// in units of its batch-means standard error.
pub fn split_half_z(chain: &Chain) -> Result<Vec<f64>, AnalysisError> {
    let n = chain.post_warmup_len();
    if n < MIN_SUMMARY_SAMPLES {
        return Err(AnalysisError::TooFewSamples {
            found: n,
            needed: MIN_SUMMARY_SAMPLES,
        });
    }
    Ok((0..chain.dim)
        .map(|j| {
            let col = chain.column(j);
            let (a, b) = col.split_at(n / 2);
            let se = (batch_means_se(a).powi(2) + batch_means_se(b).powi(2)).sqrt();
            let d = mean(a) - mean(b);
            if se > 0.0 {
                d / se
            } else if d == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .collect())
}

/// Density on a regular grid; `density[iy * nx + ix]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityGrid {
    pub x_axis: Vec<f64>,
    pub y_axis: Vec<f64>,
    pub density: Vec<f64>,
    pub bandwidth: (f64, f64),
}

impl DensityGrid {
    pub fn at(&self, ix: usize, iy: usize) -> f64 {
        self.density[iy * self.x_axis.len() + ix]
    }

    /// Trapezoidal integral over the grid.
    pub fn integral(&self) -> f64 {
        let (nx, ny) = (self.x_axis.len(), self.y_axis.len());
        let dx = self.x_axis[1] - self.x_axis[0];
        let dy = self.y_axis[1] - self.y_axis[0];
        let w = |i: usize, n: usize| if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let mut s = 0.0;
        for iy in 0..ny {
            for ix in 0..nx {
                s += w(ix, nx) * w(iy, ny) * self.at(ix, iy);
            }
        }
        s * dx * dy
    }

    /// Correlation coefficient of the gridded density.
    pub fn correlation(&self) -> f64 {
        let (nx, ny) = (self.x_axis.len(), self.y_axis.len());
        let (mut w, mut mx, mut my) = (0.0, 0.0, 0.0);
        for iy in 0..ny {
            for ix in 0..nx {
                let d = self.at(ix, iy);
                w += d;
                mx += d * self.x_axis[ix];
                my += d * self.y_axis[iy];
            }
        }
        mx /= w;
        my /= w;
        let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
        for iy in 0..ny {
            for ix in 0..nx {
                let d = self.at(ix, iy) / w;
                let (a, b) = (self.x_axis[ix] - mx, self.y_axis[iy] - my);
                sxx += d * a * a;
                syy += d * b * b;
                sxy += d * a * b;
            }
        }
        sxy / (sxx * syy).sqrt()
    }
}

/// Gaussian product-kernel density of two sample columns on a
/// [`KDE2_GRID`]-square grid. Bandwidths follow Scott's rule for two
/// dimensions, `sd n^(-1/6)`, unless given.
pub fn kde_bivariate_values(x: &[f64], y: &[f64], names: (&'static str, &'static str), bandwidth: Option<(f64, f64)>) -> Result<DensityGrid, AnalysisError> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return Err(AnalysisError::TooFewSamples { found: n, needed: 2 });
    }
    let (sx, sy) = (variance(x).sqrt(), variance(y).sqrt());
    if !(sx > 0.0) {
        return Err(AnalysisError::ZeroVariance(names.0));
    }
    if !(sy > 0.0) {
        return Err(AnalysisError::ZeroVariance(names.1));
    }
    let scott = (n as f64).powf(-1.0 / 6.0);
    let (hx, hy) = bandwidth.unwrap_or((sx * scott, sy * scott));
    let axis = |v: &[f64], h: f64| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min) - KDE2_PAD * h;
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max) + KDE2_PAD * h;
        (0..KDE2_GRID).map(|i| lo + (hi - lo) * i as f64 / (KDE2_GRID - 1) as f64).collect::<Vec<f64>>()
    };
    let (xa, ya) = (axis(x, hx), axis(y, hy));

    // density = Kx * Ky^T / n, accumulated over sample blocks
    const BLOCK: usize = 2048;
    let mut acc = DMatrix::<f64>::zeros(KDE2_GRID, KDE2_GRID);
    let kernel = |axis: &[f64], v: &[f64], h: f64| {
        DMatrix::from_fn(KDE2_GRID, v.len(), |g, s| {
            let z = (axis[g] - v[s]) / h;
            (-0.5 * z * z).exp()
        })
    };
    for start in (0..n).step_by(BLOCK) {
        let end = (start + BLOCK).min(n);
        let kx = kernel(&xa, &x[start..end], hx);
        let ky = kernel(&ya, &y[start..end], hy);
        acc += &ky * kx.transpose();
    }
    let norm = 1.0 / (n as f64 * 2.0 * PI * hx * hy);
    // acc is (iy, ix); store row-major by y
    let density = (0..KDE2_GRID * KDE2_GRID)
        .map(|i| acc[(i / KDE2_GRID, i % KDE2_GRID)] * norm)
        .collect();
    Ok(DensityGrid {
        x_axis: xa,
        y_axis: ya,
        density,
        bandwidth: (hx, hy),
    })
}

pub fn kde_bivariate(chain: &Chain, pair: (usize, usize)) -> Result<DensityGrid, AnalysisError> {
    let n = chain.post_warmup_len();
    if n < MIN_SUMMARY_SAMPLES {
        return Err(AnalysisError::TooFewSamples {
            found: n,
            needed: MIN_SUMMARY_SAMPLES,
        });
    }
    if let Some(&bad) = [pair.0, pair.1].iter().find(|&&j| j >= chain.dim) {
        return Err(AnalysisError::UnknownParam(bad));
    }
    kde_bivariate_values(&chain.column(pair.0), &chain.column(pair.1), (param_name(pair.0), param_name(pair.1)), None)
}

/// Thinning that keeps at most [`ENSEMBLE_TARGET`] members.
pub fn default_thin(post_warmup: usize) -> usize {
    post_warmup.div_ceil(ENSEMBLE_TARGET).max(1)
}

/// Post-warmup sample indices kept at thinning `thin`.
pub fn thinned_indices(chain: &Chain, thin: usize) -> Result<Vec<usize>, AnalysisError> {
    if thin == 0 {
        return Err(AnalysisError::Thin);
    }
    Ok(chain.kept().step_by(thin).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleMember {
    pub sample: usize,
    /// Angular frequency per grid point, A0 then S0.
    pub omega: [Vec<f64>; 2],
    pub c_g: Option<[Vec<f64>; 2]>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveEnsemble {
    pub k_grid: Vec<f64>,
    pub members: Vec<EnsembleMember>,
    pub skipped: usize,
}

/// Forward solve for one ensemble member; `None` when any grid point fails.
pub fn ensemble_member(sample: usize, theta: &ParamVector, plate: &PlateSpec, k_grid: &[f64], order: usize, with_cg: bool) -> Option<EnsembleMember> {
    let c = theta.constants();
    if !c.as_array().iter().all(|v| *v > 0.0 && v.is_finite()) {
        return None;
    }
    let t: TracedCurves = trace_curves(&c, plate, k_grid, order, false).ok()?;
    if !t.excluded.is_empty() {
        return None;
    }
    let c_g = if with_cg {
        Some([t.a0.c_g.clone()?, t.s0.c_g.clone()?])
    } else {
        None
    };
    Some(EnsembleMember {
        sample,
        omega: [t.a0.omega, t.s0.omega],
        c_g,
    })
}

/// Collects member results, failing when more than half were skipped.
pub fn collect_ensemble(k_grid: &[f64], results: Vec<Option<EnsembleMember>>) -> Result<CurveEnsemble, AnalysisError> {
    let total = results.len();
    let members: Vec<EnsembleMember> = results.into_iter().flatten().collect();
    let skipped = total - members.len();
    if skipped as f64 > MAX_SKIPPED_FRACTION * total as f64 {
        return Err(AnalysisError::TooManySkipped { skipped, total });
    }
    Ok(CurveEnsemble {
        k_grid: k_grid.to_vec(),
        members,
        skipped,
    })
}

/// Forward-solves every `thin`-th post-warmup sample over `k_grid`.
pub fn curve_ensemble(chain: &Chain, plate: &PlateSpec, k_grid: &[f64], thin: usize, with_cg: bool, order: usize) -> Result<CurveEnsemble, AnalysisError> {
    let idx = thinned_indices(chain, thin)?;
    let results = idx
        .iter()
        .map(|&i| chain.param_vector(i).and_then(|p| ensemble_member(i, &p, plate, k_grid, order, with_cg)))
        .collect();
    collect_ensemble(k_grid, results)
}

impl CurveEnsemble {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Pointwise `[q_lo, q_hi]` quantiles of omega across members.
    pub fn band(&self, mode: ModeLabel, q_lo: f64, q_hi: f64) -> Vec<(f64, f64)> {
        (0..self.k_grid.len())
            .map(|i| {
                let col = sorted(&self.members.iter().map(|m| m.omega[mode.index()][i]).collect::<Vec<_>>());
                if col.is_empty() {
                    return (f64::NAN, f64::NAN);
                }
                (quantile_sorted(&col, q_lo), quantile_sorted(&col, q_hi))
            })
            .collect()
    }

    /// Fraction of grid points where `omega_true` lies in the central 95% band.
    pub fn coverage(&self, mode: ModeLabel, omega_true: &[f64]) -> f64 {
        let band = self.band(mode, 0.025, 0.975);
        let hits = band.iter().zip(omega_true).filter(|((lo, hi), w)| *lo <= **w && **w <= *hi).count();
        hits as f64 / band.len() as f64
    }

    /// Pointwise interquartile range of omega.
    pub fn iqr(&self, mode: ModeLabel) -> Vec<f64> {
        self.band(mode, 0.25, 0.75).into_iter().map(|(a, b)| b - a).collect()
    }
}

/// Chain holding `values` as post-warmup samples, for analysis of samples
/// produced elsewhere.
pub fn chain_from_samples(dim: usize, samples: Vec<f64>) -> Chain {
    let n = samples.len() / dim;
    Chain {
        dim,
        samples,
        log_posts: vec![0.0; n],
        accepted: vec![true; n],
        warmup_len: 0,
        seed: 0,
        warnings: Vec::new(),
    }
}
