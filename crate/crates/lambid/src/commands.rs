//! The six batch commands. Each writes its outputs plus a resolved config
//! (`<command>.resolved.toml`) into the output directory.

use std::path::{Path, PathBuf};

use lambid_core::bayes::{Posterior, N_PARAMS, PARAM_NAMES};
use lambid_core::curves::{
    fh_to_omega, log_grid, phase_shift_at_fh, sensitivity_sweep, trace_curves, ForwardModel, MaterialParam, ModeLabel, TracedCurves,
};
use lambid_core::posterior::{
    batch_means_se, collect_ensemble, default_thin, ensemble_member, kde_bivariate, split_half_z, summarize, thinned_indices, CurveEnsemble,
    PosteriorSummary,
};
use lambid_core::sampler::{AdaptiveMetropolis, Chain, ChainWarning, Sampler, SamplerConfig};
use lambid_core::wavefield::{normalize_energy, ridge_pick, ObservationSet};
use lambid_core::{ElasticConstants, PlateSpec};
use rayon::prelude::*;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::formats;
use crate::signal::{add_noise, synth_wavefield, two_dft, DftOptions, SynthOptions};

pub const CURVES_FILE: &str = "curves.csv";
pub const SENSITIVITY_FILE: &str = "sensitivity.csv";
pub const WAVEFIELD_STEM: &str = "wavefield";
pub const TRUTH_FILE: &str = "truth_curves.csv";
pub const OBSERVATIONS_FILE: &str = "observations.csv";
pub const SUMMARY_FILE: &str = "summary.csv";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";
pub const ENSEMBLE_FILE: &str = "ensemble.csv";
pub const BAND_FILE: &str = "ensemble_band.csv";

pub fn chain_file(i: usize) -> String {
    format!("chain_{i}.csv")
}

fn write_resolved(out: &Path, command: &str, cfg: &RunConfig) -> Result<()> {
    let path = out.join(format!("{command}.resolved.toml"));
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    std::fs::write(&path, cfg.to_toml()).map_err(|e| Error::io(&path, e))
}

fn input(configured: &Option<PathBuf>, out: &Path, default: &str) -> Result<PathBuf> {
    let p = configured.clone().unwrap_or_else(|| out.join(default));
    if p.exists() {
        Ok(p)
    } else {
        Err(Error::io(&p, std::io::Error::new(std::io::ErrorKind::NotFound, "input not found")))
    }
}

/// Log-spaced wavenumbers spanning the band for `theta`.
pub fn band_grid(theta: &ElasticConstants, plate: &PlateSpec, band: (f64, f64), points: usize, order: usize) -> Result<Vec<f64>> {
    let model = ForwardModel::new(order)?;
    let (k_lo, k_hi) = model.band_k_range(theta, plate, band.0, band.1)?;
    Ok(log_grid(k_lo, k_hi, points)?)
}

/// A0 and S0 each traced on their own log grid spanning exactly the band.
pub fn band_curves(theta: &ElasticConstants, plate: &PlateSpec, band: (f64, f64), points: usize, order: usize, auto: bool) -> Result<TracedCurves> {
    let model = ForwardModel::new(order)?;
    let grid = |mode: ModeLabel| -> Result<Vec<f64>> {
        let lo = model.wavenumber(theta, plate, mode, fh_to_omega(band.0, plate))?;
        let hi = model.wavenumber(theta, plate, mode, fh_to_omega(band.1, plate))?;
        Ok(log_grid(lo, hi, points)?)
    };
    let a = trace_curves(theta, plate, &grid(ModeLabel::A0)?, order, auto)?;
    let s = trace_curves(theta, plate, &grid(ModeLabel::S0)?, order, auto)?;
    Ok(TracedCurves {
        order: a.order.max(s.order),
        excluded: a.excluded.into_iter().chain(s.excluded).collect(),
        fallbacks: a.fallbacks + s.fallbacks,
        a0: a.a0,
        s0: s.s0,
    })
}

pub struct SolveReport {
    pub order: usize,
    pub excluded: usize,
    pub path: PathBuf,
}

pub fn solve(cfg: &RunConfig, out: &Path) -> Result<SolveReport> {
    let theta = cfg.material()?;
    let plate = cfg.plate()?;
    let band = cfg.band()?;
    let curves = band_curves(&theta, &plate, band, cfg.grid.points, cfg.grid.order, cfg.grid.auto_converge)?;
    write_resolved(out, "solve", cfg)?;
    let path = out.join(CURVES_FILE);
    formats::write_curves(&path, &curves, &plate)?;
    Ok(SolveReport {
        order: curves.order,
        excluded: curves.excluded.len(),
        path,
    })
}

pub fn sensitivity(cfg: &RunConfig, out: &Path, filter: &[MaterialParam]) -> Result<Vec<formats::SensitivityRow>> {
    let theta = cfg.material()?;
    let plate = cfg.plate()?;
    let band = cfg.band()?;
    cfg.validate_sensitivity()?;
    let s = &cfg.sensitivity;
    let mut wanted: Vec<MaterialParam> = s
        .params
        .iter()
        .map(|n| MaterialParam::parse(n).ok_or_else(|| Error::Config(format!("sensitivity.params: unknown parameter `{n}`"))))
        .collect::<Result<_>>()?;
    if !filter.is_empty() {
        wanted = filter.to_vec();
    }
    if wanted.is_empty() {
        wanted = MaterialParam::ALL.to_vec();
    }
    let order = cfg.grid.order;
    let grid = band_grid(&theta, &plate, band, cfg.grid.points, order)?;
    let model = ForwardModel::new(order)?;
    let entries = sensitivity_sweep(&theta, &plate, &grid, s.perturbation, order)?;
    let mut rows = Vec::new();
    for e in entries.iter().filter(|e| wanted.contains(&e.param)) {
        for mode in ModeLabel::BOTH {
            rows.push(formats::SensitivityRow {
                param: e.param.name(),
                mode,
                max_omega_shift: e.max_shift(mode),
                cp_shift_lo: phase_shift_at_fh(&model, &theta, &plate, e.param, s.perturbation, mode, s.fh_lo)?,
                cp_shift_hi: phase_shift_at_fh(&model, &theta, &plate, e.param, s.perturbation, mode, s.fh_hi)?,
            });
        }
    }
    write_resolved(out, "sensitivity", cfg)?;
    formats::write_sensitivity(&out.join(SENSITIVITY_FILE), &rows, s.perturbation, (s.fh_lo, s.fh_hi))?;
    Ok(rows)
}

/// Writes the wavefield and the generating curves over the solve grid.
pub fn synth(cfg: &RunConfig, out: &Path) -> Result<PathBuf> {
    let seed = cfg.require_seed()?;
    let theta = cfg.material()?;
    let plate = cfg.plate()?;
    let band = cfg.band()?;
    let geom = cfg.geometry()?;
    let exc = cfg.excitation()?;
    let modes = cfg.synth_modes()?;
    let opts = SynthOptions {
        modes,
        noise_rms: 0.0,
        seed,
        order: cfg.grid.order,
    };
    let mut field = synth_wavefield(&theta, &plate, &geom, &exc, &opts)?;
    let rms = field.rms();
    if cfg.synth.noise > 0.0 && rms > 0.0 {
        add_noise(&mut field, cfg.synth.noise * rms, seed);
    }
    let truth = band_curves(&theta, &plate, band, cfg.grid.points, cfg.grid.order, false)?;
    write_resolved(out, "synth", cfg)?;
    formats::write_curves(&out.join(TRUTH_FILE), &truth, &plate)?;
    formats::write_field(out, WAVEFIELD_STEM, &field, "arbitrary")
}

pub fn extract(cfg: &RunConfig, out: &Path) -> Result<ObservationSet> {
    let plate = cfg.plate()?;
    let opts = cfg.ridge_options()?;
    let path = input(&cfg.paths.wavefield, out, &format!("{WAVEFIELD_STEM}.toml"))?;
    let (field, _) = formats::read_field(&path)?;
    let image = normalize_energy(&two_dft(
        &field,
        &DftOptions {
            raw_traces: false,
            hann: cfg.extract.hann,
        },
    ));
    let obs = ridge_pick(&image, &plate, &opts)?;
    write_resolved(out, "extract", cfg)?;
    formats::write_observations(&out.join(OBSERVATIONS_FILE), &obs)?;
    Ok(obs)
}

/// Runs `chains` independent chains with seeds `seed, seed + 1, ...`.
pub fn identify(cfg: &RunConfig, out: &Path) -> Result<Vec<Chain>> {
    let seed = cfg.require_seed()?;
    let plate = cfg.plate()?;
    cfg.validate_sampler()?;
    let priors = cfg.prior.spec()?;
    let path = input(&cfg.paths.observations, out, OBSERVATIONS_FILE)?;
    let obs = formats::read_observations(&path, &plate)?;
    let s = &cfg.sampler;
    let mut target = Posterior::new(&obs, priors, plate, ForwardModel::new(s.order)?);
    if !s.use_likelihood {
        target = target.prior_only();
    }
    let chains: Vec<Chain> = (0..s.chains)
        .into_par_iter()
        .map(|i| {
            let sc = SamplerConfig {
                n_samples: s.samples,
                warmup: s.warmup,
                seed: seed.wrapping_add(i as u64),
                init: None,
                proposal_scale: s.proposal_scale,
            };
            AdaptiveMetropolis.run(&target, &sc)
        })
        .collect::<std::result::Result<_, _>>()?;
    write_resolved(out, "identify", cfg)?;
    for (i, c) in chains.iter().enumerate() {
        formats::write_chain(&out.join(chain_file(i)), c)?;
    }
    Ok(chains)
}

/// `chain_0.csv`, `chain_1.csv`, ... in index order, stopping at the first gap.
pub fn read_chains(dir: &Path) -> Result<Vec<Chain>> {
    let mut chains = Vec::new();
    loop {
        let p = dir.join(chain_file(chains.len()));
        if !p.exists() {
            break;
        }
        chains.push(formats::read_chain(&p)?);
    }
    if chains.is_empty() {
        let p = dir.join(chain_file(0));
        return Err(Error::io(&p, std::io::Error::new(std::io::ErrorKind::NotFound, "no chain files")));
    }
    Ok(chains)
}

/// Post-warmup samples of every chain, concatenated.
pub fn pool(chains: &[Chain]) -> Chain {
    let dim = chains[0].dim;
    let mut out = Chain {
        dim,
        samples: Vec::new(),
        log_posts: Vec::new(),
        accepted: Vec::new(),
        warmup_len: 0,
        seed: chains[0].seed,
        warnings: Vec::new(),
    };
    for c in chains {
        let r = c.kept();
        out.samples.extend_from_slice(&c.samples[r.start * dim..r.end * dim]);
        out.log_posts.extend_from_slice(&c.log_posts[r.clone()]);
        out.accepted.extend_from_slice(&c.accepted[r]);
    }
    out
}

pub struct SummaryReport {
    pub summary: PosteriorSummary,
    pub ensemble: CurveEnsemble,
}

pub fn summarize_run(cfg: &RunConfig, out: &Path) -> Result<SummaryReport> {
    let plate = cfg.plate()?;
    let band = cfg.band()?;
    let pairs = cfg.summary_pairs()?;
    let dir = cfg.paths.chains.clone().unwrap_or_else(|| out.to_path_buf());
    let chains = read_chains(&dir)?;
    let pooled = pool(&chains);
    let summary = summarize(&pooled)?;

    let mut diag = String::from("# split_z: z score of first against second half of each chain\n# mcse in chain units\nparameter,chain,split_z,mcse\n");
    for (ci, c) in chains.iter().enumerate() {
        // chains too short to split are left out
        let Ok(z) = split_half_z(c) else { continue };
        for j in 0..N_PARAMS {
            diag.push_str(&format!("{},{ci},{},{}\n", PARAM_NAMES[j], z[j], batch_means_se(&c.column(j))));
        }
    }

    let mean = ElasticConstants::from_array(std::array::from_fn(|j| summary.params[j].mean));
    let order = cfg.grid.order;
    let grid = band_grid(&mean, &plate, band, cfg.summary.ensemble_points, order)?;
    let thin = if cfg.summary.thin == 0 { default_thin(pooled.post_warmup_len()) } else { cfg.summary.thin };
    let idx = thinned_indices(&pooled, thin)?;
    let with_cg = cfg.summary.group_velocity;
    let results = idx
        .par_iter()
        .map(|&i| pooled.param_vector(i).and_then(|p| ensemble_member(i, &p, &plate, &grid, order, with_cg)))
        .collect();
    let ensemble = collect_ensemble(&grid, results)?;
    let densities = pairs
        .par_iter()
        .map(|&(a, b)| kde_bivariate(&pooled, (a, b)).map(|g| (a, b, g)))
        .collect::<std::result::Result<Vec<_>, _>>()?;

    write_resolved(out, "summarize", cfg)?;
    formats::write_summary(&out.join(SUMMARY_FILE), &summary)?;
    let diag_path = out.join(DIAGNOSTICS_FILE);
    std::fs::write(&diag_path, diag).map_err(|e| Error::io(&diag_path, e))?;
    formats::write_ensemble(&out.join(ENSEMBLE_FILE), &ensemble)?;
    let mut band_csv = String::from("# k rad/m, omega rad/s\nmode,k,q025,q25,q50,q75,q975\n");
    for mode in ModeLabel::BOTH {
        let qs: Vec<_> = [(0.025, 0.975), (0.25, 0.75), (0.5, 0.5)].iter().map(|&(lo, hi)| ensemble.band(mode, lo, hi)).collect();
        for (i, k) in grid.iter().enumerate() {
            band_csv.push_str(&format!(
                "{mode},{k},{},{},{},{},{}\n",
                qs[0][i].0, qs[1][i].0, qs[2][i].0, qs[1][i].1, qs[0][i].1
            ));
        }
    }
    let band_path = out.join(BAND_FILE);
    std::fs::write(&band_path, band_csv).map_err(|e| Error::io(&band_path, e))?;
    for (a, b, g) in &densities {
        let (na, nb) = (PARAM_NAMES[*a], PARAM_NAMES[*b]);
        formats::write_density(out, &format!("density_{na}_{nb}"), g, (na, nb))?;
    }
    Ok(SummaryReport { summary, ensemble })
}

/// Warnings worth printing after a run.
pub fn chain_warnings(chains: &[Chain]) -> Vec<String> {
    chains
        .iter()
        .enumerate()
        .flat_map(|(i, c)| {
            c.warnings.iter().map(move |w| match w {
                ChainWarning::LowAcceptance(r) => format!("chain {i}: acceptance rate {r:.3} is low"),
            })
        })
        .collect()
}
