//! Frequency-wavenumber transform and forward-model wavefield synthesis.
//!
//! Sign convention: the transform is forward (`e^{-i w t}`) in time and
//! inverse (`e^{+i k x}`) in space, so a wave `cos(k x - w t)` travelling
//! toward `+x` lands at `(+f, +k)`.

use std::f64::consts::PI;

use lambid_core::curves::{ForwardModel, ModeLabel};
use lambid_core::wavefield::{DispersionImage, TXField};
use lambid_core::{ElasticConstants, PlateSpec, SignalError};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Excitation bins weaker than this fraction of the strongest are not propagated.
pub const SPECTRUM_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DftOptions {
    /// Skip the per-trace unit-peak scaling.
    pub raw_traces: bool,
    /// Hann window along time before transforming.
    pub hann: bool,
}

fn prepare_traces(field: &TXField, opts: &DftOptions) -> Vec<Vec<Complex64>> {
    let n_t = field.n_t();
    let window: Vec<f64> = if opts.hann {
        (0..n_t).map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / (n_t - 1) as f64).cos()).collect()
    } else {
        vec![1.0; n_t]
    };
    (0..field.n_x())
        .map(|ix| {
            let tr = field.trace(ix);
            let peak = tr.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let scale = if opts.raw_traces || peak == 0.0 { 1.0 } else { 1.0 / peak };
            tr.iter().zip(&window).map(|(v, w)| Complex64::new(v * scale * w, 0.0)).collect()
        })
        .collect()
}

/// Complex spectrum over every `(f, k)` bin, `out[f][k]`, in the sign
/// convention of this module. Unnormalized: `sum |U|^2 = n_t n_x sum u^2`.
pub fn full_spectrum(field: &TXField, opts: &DftOptions) -> Vec<Vec<Complex64>> {
    spectrum_rows(field, opts, field.n_t())
}

fn spectrum_rows(field: &TXField, opts: &DftOptions, n_rows: usize) -> Vec<Vec<Complex64>> {
    let (n_x, n_t) = (field.n_x(), field.n_t());
    let mut planner = FftPlanner::<f64>::new();
    let fwd_t = planner.plan_fft_forward(n_t);
    let inv_x = planner.plan_fft_inverse(n_x);
    let mut traces = prepare_traces(field, opts);
    traces.par_iter_mut().for_each(|tr| fwd_t.process(tr));
    (0..n_rows)
        .into_par_iter()
        .map(|f| {
            let mut col: Vec<Complex64> = traces.iter().map(|tr| tr[f]).collect();
            inv_x.process(&mut col);
            col
        })
        .collect()
}

/// Magnitude over the positive-frequency, positive-wavenumber quadrant,
/// after per-trace unit-peak scaling.
pub fn two_dft(field: &TXField, opts: &DftOptions) -> DispersionImage {
    let (n_x, n_t) = (field.n_x(), field.n_t());
    let n_f = n_t / 2 + 1;
    let n_k = n_x / 2 + 1;
    let rows = spectrum_rows(field, opts, n_f);
    let magnitude = rows.iter().flat_map(|r| r[..n_k].iter().map(|c| c.norm())).collect();
    let f_axis = (0..n_f).map(|i| i as f64 / (n_t as f64 * field.dt)).collect();
    let k_axis = (0..n_k).map(|j| 2.0 * PI * j as f64 / (n_x as f64 * field.dx)).collect();
    DispersionImage::new(magnitude, f_axis, k_axis).expect("axes built to match")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Geometry {
    pub n_x: usize,
    /// m
    pub dx: f64,
    pub n_t: usize,
    /// s
    pub dt: f64,
    /// Distance of the first trace from the source, m.
    pub x0: f64,
}

impl Default for Geometry {
    /// 256 traces at 1.8 mm, 8 ms at 1.024 MHz.
    fn default() -> Self {
        Self {
            n_x: 256,
            dx: 1.8e-3,
            n_t: 8192,
            dt: 1.0 / 1.024e6,
            x0: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Excitation {
    /// Hann-tapered linear sweep from `f_lo` to `f_hi` Hz over `duration` s.
    Chirp { f_lo: f64, f_hi: f64, duration: f64, amplitude: f64 },
    /// Steady `cos(2 pi f t)` over the whole record.
    Tone { freq: f64, amplitude: f64 },
}

impl Default for Excitation {
    fn default() -> Self {
        Excitation::Chirp {
            f_lo: 0.0,
            f_hi: 500e3,
            duration: 1e-3,
            amplitude: 1.0,
        }
    }
}

impl Excitation {
    fn top_frequency(&self) -> f64 {
        match *self {
            Excitation::Chirp { f_lo, f_hi, .. } => f_lo.max(f_hi),
            Excitation::Tone { freq, .. } => freq,
        }
    }

    pub fn signal(&self, n_t: usize, dt: f64) -> Vec<f64> {
        (0..n_t)
            .map(|i| {
                let t = i as f64 * dt;
                match *self {
                    Excitation::Chirp { f_lo, f_hi, duration, amplitude } => {
                        if t >= duration {
                            return 0.0;
                        }
                        let taper = 0.5 - 0.5 * (2.0 * PI * t / duration).cos();
                        let phase = 2.0 * PI * (f_lo * t + 0.5 * (f_hi - f_lo) * t * t / duration);
                        amplitude * taper * phase.sin()
                    }
                    Excitation::Tone { freq, amplitude } => amplitude * (2.0 * PI * freq * t).cos(),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthOptions {
    pub modes: Vec<ModeLabel>,
    /// Absolute RMS of the additive white Gaussian noise.
    pub noise_rms: f64,
    pub seed: u64,
    pub order: usize,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            modes: ModeLabel::BOTH.to_vec(),
            noise_rms: 0.0,
            seed: 0,
            order: lambid_core::curves::DEFAULT_ORDER,
        }
    }
}

/// Wavenumber of `mode` at each angular frequency, warm-started from the
/// previous bin.
fn mode_wavenumbers(model: &ForwardModel, theta: &ElasticConstants, plate: &PlateSpec, mode: ModeLabel, omegas: &[f64]) -> Result<Vec<f64>, SignalError> {
    let mut out = Vec::with_capacity(omegas.len());
    let mut prev: Option<(f64, f64)> = None;
    for &w in omegas {
        let guess = prev.map(|(pw, pk)| pk * w / pw);
        let k = model.wavenumber_near(theta, plate, mode, w, guess)?;
        prev = Some((w, k));
        out.push(k);
    }
    Ok(out)
}

/// Surface response to `excitation` at `n_x` positions: every excitation
/// frequency bin propagates as `e^{-i k_mode(w) x}` for each requested mode,
/// then white Gaussian noise is added.
pub fn synth_wavefield(
    theta: &ElasticConstants,
    plate: &PlateSpec,
    geom: &Geometry,
    excitation: &Excitation,
    opts: &SynthOptions,
) -> Result<TXField, SignalError> {
    let (n_x, n_t) = (geom.n_x, geom.n_t);
    let mut field = TXField::zeros(n_x, n_t, geom.dt, geom.dx)?;
    let f_nyq = 0.5 / geom.dt;
    if excitation.top_frequency() >= f_nyq {
        return Err(SignalError::Nyquist {
            axis: "time",
            value: excitation.top_frequency(),
            limit: f_nyq,
        });
    }

    let mut planner = FftPlanner::<f64>::new();
    let mut spec: Vec<Complex64> = excitation.signal(n_t, geom.dt).into_iter().map(|v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n_t).process(&mut spec);
    let peak = spec.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    let bins: Vec<usize> = if peak > 0.0 {
        (1..n_t.div_ceil(2)).filter(|&b| spec[b].norm() > SPECTRUM_FLOOR * peak).collect()
    } else {
        Vec::new()
    };

    if !bins.is_empty() {
        let model = ForwardModel::new(opts.order)?;
        let omegas: Vec<f64> = bins.iter().map(|&b| 2.0 * PI * b as f64 / (n_t as f64 * geom.dt)).collect();
        let ks: Vec<Vec<f64>> = opts
            .modes
            .par_iter()
            .map(|&m| mode_wavenumbers(&model, theta, plate, m, &omegas))
            .collect::<Result<_, _>>()?;
        let k_nyq = PI / geom.dx;
        let k_max = ks.iter().flatten().fold(0.0f64, |m, k| m.max(*k));
        if k_max >= k_nyq {
            return Err(SignalError::Nyquist {
                axis: "space",
                value: k_max,
                limit: k_nyq,
            });
        }
        let inv_t = planner.plan_fft_inverse(n_t);
        let traces: Vec<Vec<f64>> = (0..n_x)
            .into_par_iter()
            .map(|ix| {
                let x = geom.x0 + ix as f64 * geom.dx;
                let mut u = vec![Complex64::new(0.0, 0.0); n_t];
                for (bi, &b) in bins.iter().enumerate() {
                    let phase: Complex64 = ks.iter().map(|k| Complex64::from_polar(1.0, -k[bi] * x)).sum();
                    u[b] = spec[b] * phase;
                    u[n_t - b] = u[b].conj();
                }
                inv_t.process(&mut u);
                u.iter().map(|c| c.re / n_t as f64).collect()
            })
            .collect();
        for (ix, tr) in traces.into_iter().enumerate() {
            field.trace_mut(ix).copy_from_slice(&tr);
        }
    }

    if opts.noise_rms > 0.0 {
        add_noise(&mut field, opts.noise_rms, opts.seed);
    }
    Ok(field)
}

/// Adds white Gaussian noise of standard deviation `rms`, reproducible per seed.
pub fn add_noise(field: &mut TXField, rms: f64, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in field.samples_mut() {
        *v += rms * rng.sample::<f64, _>(StandardNormal);
    }
}
