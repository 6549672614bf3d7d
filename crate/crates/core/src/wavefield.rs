//! Time-distance records, frequency-wavenumber images and ridge extraction.
//!
//! The Fourier transforms themselves live in the `lambid` crate; this module
//! holds the containers and everything downstream of the magnitude image.

#[cfg(not(feature = "std"))]
use num_traits::Float;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::curves::{fh_to_omega, omega_to_fh, ModeLabel};
use crate::error::SignalError;
use crate::material::PlateSpec;

pub const DEFAULT_PROMINENCE: f64 = 0.3;
pub const DEFAULT_MAX_JUMP: usize = 3;
/// Upper edge of the default frequency-thickness band, MHz*mm.
pub const DEFAULT_FH_MAX: f64 = 4.098;
/// Fraction of band rows a ridge must cover to be reported.
pub const MIN_COVERAGE: f64 = 0.3;

/// Surface displacement sampled on a uniform `x` by `t` grid, stored
/// row-major with one row per spatial position.
#[derive(Debug, Clone, PartialEq)]
pub struct TXField {
    samples: Vec<f64>,
    n_x: usize,
    n_t: usize,
    pub dt: f64,
    pub dx: f64,
}

impl TXField {
    pub fn new(samples: Vec<f64>, n_x: usize, n_t: usize, dt: f64, dx: f64) -> Result<Self, SignalError> {
        if n_x < 2 || n_t < 2 {
            return Err(SignalError::InvalidField("need at least 2 positions and 2 time samples"));
        }
        if samples.len() != n_x * n_t {
            return Err(SignalError::InvalidField("sample count does not match n_x * n_t"));
        }
        if !(dt > 0.0 && dt.is_finite() && dx > 0.0 && dx.is_finite()) {
            return Err(SignalError::InvalidField("dt and dx must be positive"));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(SignalError::InvalidField("samples must be finite"));
        }
        Ok(Self { samples, n_x, n_t, dt, dx })
    }

    pub fn zeros(n_x: usize, n_t: usize, dt: f64, dx: f64) -> Result<Self, SignalError> {
        Self::new(vec![0.0; n_x * n_t], n_x, n_t, dt, dx)
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn trace(&self, ix: usize) -> &[f64] {
        &self.samples[ix * self.n_t..(ix + 1) * self.n_t]
    }

    pub fn trace_mut(&mut self, ix: usize) -> &mut [f64] {
        &mut self.samples[ix * self.n_t..(ix + 1) * self.n_t]
    }

    pub fn rms(&self) -> f64 {
        (self.samples.iter().map(|v| v * v).sum::<f64>() / self.samples.len() as f64).sqrt()
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|v| v * v).sum()
    }
}

/// Magnitude on the positive-frequency, positive-wavenumber quadrant, stored
/// row-major with one row per frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionImage {
    pub magnitude: Vec<f64>,
    /// Hz
    pub f_axis: Vec<f64>,
    /// rad/m
    pub k_axis: Vec<f64>,
    pub normalized: bool,
    /// Rows that were all zero at normalization time.
    pub zero_rows: Vec<usize>,
}

impl DispersionImage {
    pub fn new(magnitude: Vec<f64>, f_axis: Vec<f64>, k_axis: Vec<f64>) -> Result<Self, SignalError> {
        if magnitude.len() != f_axis.len() * k_axis.len() {
            return Err(SignalError::InvalidField("image size does not match its axes"));
        }
        if magnitude.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(SignalError::InvalidField("magnitudes must be finite and non-negative"));
        }
        Ok(Self {
            magnitude,
            f_axis,
            k_axis,
            normalized: false,
            zero_rows: Vec::new(),
        })
    }

    pub fn n_f(&self) -> usize {
        self.f_axis.len()
    }

    pub fn n_k(&self) -> usize {
        self.k_axis.len()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.n_k();
        &self.magnitude[i * n..(i + 1) * n]
    }

    pub fn at(&self, i_f: usize, i_k: usize) -> f64 {
        self.magnitude[i_f * self.n_k() + i_k]
    }

    /// Wavenumber bin spacing, rad/m.
    pub fn k_step(&self) -> f64 {
        if self.k_axis.len() > 1 {
            self.k_axis[1] - self.k_axis[0]
        } else {
            0.0
        }
    }

    /// Row and column of the global maximum.
    pub fn argmax(&self) -> (usize, usize) {
        let (i, _) = self
            .magnitude
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
        (i / self.n_k(), i % self.n_k())
    }
}

/// Divides each frequency row by its sum. All-zero rows stay zero and are
/// recorded in `zero_rows`.
pub fn normalize_energy(image: &DispersionImage) -> DispersionImage {
    let n_k = image.n_k();
    let mut out = image.clone();
    out.zero_rows.clear();
    for i in 0..image.n_f() {
        let row = &mut out.magnitude[i * n_k..(i + 1) * n_k];
        let sum: f64 = row.iter().sum();
        if sum > 0.0 {
            row.iter_mut().for_each(|v| *v /= sum);
        } else {
            out.zero_rows.push(i);
        }
    }
    out.normalized = true;
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub mode: ModeLabel,
    /// rad/s
    pub omega: f64,
    /// rad/m
    pub k: f64,
}

/// Picked dispersion points grouped by mode, with the band they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    pub points: Vec<Observation>,
    /// (fh_min, fh_max) in MHz*mm
    pub band: (f64, f64),
}

impl ObservationSet {
    pub fn new(points: Vec<Observation>, band: (f64, f64)) -> Self {
        Self { points, band }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn mode_points(&self, mode: ModeLabel) -> impl Iterator<Item = &Observation> + '_ {
        self.points.iter().filter(move |p| p.mode == mode)
    }

    pub fn modes(&self) -> Vec<ModeLabel> {
        ModeLabel::BOTH.iter().copied().filter(|m| self.mode_points(*m).next().is_some()).collect()
    }

    /// Checks the band membership and per-mode ordering invariants.
    pub fn validate(&self, plate: &PlateSpec) -> Result<(), SignalError> {
        let (lo, hi) = self.band;
        let slack = 1e-9 * hi;
        for p in &self.points {
            if !(p.omega.is_finite() && p.k.is_finite() && p.omega > 0.0 && p.k > 0.0) {
                return Err(SignalError::InvalidField("observations must be positive and finite"));
            }
            let fh = omega_to_fh(p.omega, plate);
            if fh < lo - slack || fh > hi + slack {
                return Err(SignalError::InvalidField("observation lies outside the declared band"));
            }
        }
        for mode in ModeLabel::BOTH {
            let ks: Vec<f64> = self.mode_points(mode).map(|p| p.k).collect();
            if ks.windows(2).any(|w| w[1] <= w[0]) {
                return Err(SignalError::InvalidField("wavenumbers must increase within each mode"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RidgeOptions {
    pub n_modes: usize,
    /// (fh_min, fh_max) in MHz*mm
    pub band: (f64, f64),
    /// Local maxima below this fraction of the row maximum are ignored.
    pub min_prominence: f64,
    /// Largest wavenumber jump, in bins, between consecutive rows of a ridge.
    pub max_jump: usize,
}

impl Default for RidgeOptions {
    fn default() -> Self {
        Self {
            n_modes: 2,
            band: (0.2, DEFAULT_FH_MAX),
            min_prominence: DEFAULT_PROMINENCE,
            max_jump: DEFAULT_MAX_JUMP,
        }
    }
}

struct Ridge {
    last: usize,
    last_row: usize,
    // (row, k bin, magnitude)
    points: Vec<(usize, usize, f64)>,
}

fn row_peaks(row: &[f64], min_prominence: f64) -> Vec<(usize, f64)> {
    let max = row.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    let floor = min_prominence * max;
    let n = row.len();
    let mut peaks: Vec<(usize, f64)> = (1..n)
        .filter(|&j| {
            let v = row[j];
            v >= floor && v > row[j - 1] && (j + 1 == n || v >= row[j + 1])
        })
        .map(|j| (j, row[j]))
        .collect();
    peaks.sort_by(|a, b| b.1.total_cmp(&a.1));
    peaks
}

/// Extracts up to `n_modes` ridges from a normalized image.
///
/// Rows inside the band are scanned from low to high frequency. Each row's
/// prominent local maxima extend the nearest live ridge within `max_jump`
/// bins, strongest first; leftover maxima seed new ridges. The longest ridges are kept and labelled by
/// slowness: A0 has the larger `k` at a given frequency. Rows where a ridge
/// stays on one bin are merged into a single point at the magnitude-weighted
/// mean frequency so wavenumbers increase strictly.
pub fn ridge_pick(image: &DispersionImage, plate: &PlateSpec, opts: &RidgeOptions) -> Result<ObservationSet, SignalError> {
    if !image.normalized {
        return Err(SignalError::NotNormalized);
    }
    let (lo, hi) = opts.band;
    if !(lo >= 0.0 && hi > lo) || opts.n_modes == 0 || opts.n_modes > 2 {
        return Err(SignalError::InvalidField("band must satisfy 0 <= lo < hi and n_modes must be 1 or 2"));
    }
    let rows: Vec<usize> = (0..image.n_f())
        .filter(|&i| {
            let fh = omega_to_fh(2.0 * PI * image.f_axis[i], plate);
            fh >= lo && fh <= hi
        })
        .collect();
    let f_max = image.f_axis.last().copied().unwrap_or(0.0);
    if rows.is_empty() || fh_to_omega(hi, plate) / (2.0 * PI) > f_max * (1.0 + 1e-12) {
        return Err(SignalError::BandOutsideImage { lo, hi });
    }

    // ridges not extended for this many rows stop accepting points
    let max_gap = (rows.len() / 10).max(3);
    let mut ridges: Vec<Ridge> = Vec::new();
    for (n, &i) in rows.iter().enumerate() {
        let mut claimed = vec![false; ridges.len()];
        // strongest maxima claim the nearest live ridge first
        for (j, v) in row_peaks(image.row(i), opts.min_prominence) {
            let best = ridges
                .iter()
                .enumerate()
                .filter(|(r, ridge)| !claimed[*r] && n - ridge.last_row <= max_gap && ridge.last.abs_diff(j) <= opts.max_jump)
                .min_by_key(|(_, ridge)| ridge.last.abs_diff(j))
                .map(|(r, _)| r);
            let r = match best {
                Some(r) => r,
                None => {
                    ridges.push(Ridge {
                        last: j,
                        last_row: n,
                        points: Vec::new(),
                    });
                    claimed.push(false);
                    ridges.len() - 1
                }
            };
            claimed[r] = true;
            ridges[r].last = j;
            ridges[r].last_row = n;
            ridges[r].points.push((i, j, v));
        }
    }

    let needed = (MIN_COVERAGE * rows.len() as f64).ceil() as usize;
    ridges.retain(|r| r.points.len() >= needed.max(1));
    ridges.sort_by_key(|r| core::cmp::Reverse(r.points.len()));
    ridges.truncate(opts.n_modes);

    // median slowness k / f decides the label
    let slowness = |r: &Ridge| {
        let mut s: Vec<f64> = r.points.iter().map(|&(i, j, _)| image.k_axis[j] / image.f_axis[i]).collect();
        s.sort_by(f64::total_cmp);
        s[s.len() / 2]
    };
    ridges.sort_by(|a, b| slowness(b).total_cmp(&slowness(a)));
    let labels: &[ModeLabel] = match (opts.n_modes, ridges.len()) {
        (_, 0) => return Err(SignalError::NoRidge { mode: "A0" }),
        (2, 1) => return Err(SignalError::NoRidge { mode: "S0" }),
        (1, _) => &[ModeLabel::A0],
        _ => &ModeLabel::BOTH,
    };

    let mut points = Vec::new();
    for (ridge, &mode) in ridges.iter().zip(labels) {
        points.extend(collapse(image, ridge, mode));
    }
    Ok(ObservationSet::new(points, opts.band))
}

fn collapse(image: &DispersionImage, ridge: &Ridge, mode: ModeLabel) -> Vec<Observation> {
    let mut out: Vec<Observation> = Vec::new();
    let mut run: Vec<(usize, f64)> = Vec::new();
    let mut run_bin = usize::MAX;
    let flush = |run: &mut Vec<(usize, f64)>, bin: usize, out: &mut Vec<Observation>| {
        if run.is_empty() {
            return;
        }
        let w: f64 = run.iter().map(|r| r.1).sum();
        let f = if w > 0.0 {
            run.iter().map(|&(i, v)| image.f_axis[i] * v).sum::<f64>() / w
        } else {
            run.iter().map(|&(i, _)| image.f_axis[i]).sum::<f64>() / run.len() as f64
        };
        let k = image.k_axis[bin];
        if f > 0.0 && k > 0.0 && out.last().is_none_or(|p| k > p.k) {
            out.push(Observation {
                mode,
                omega: 2.0 * PI * f,
                k,
            });
        }
        run.clear();
    };
    for &(i, j, v) in &ridge.points {
        if j != run_bin {
            flush(&mut run, run_bin, &mut out);
            run_bin = j;
        }
        run.push((i, v));
    }
    flush(&mut run, run_bin, &mut out);
    out
}
