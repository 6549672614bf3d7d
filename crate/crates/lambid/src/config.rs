//! TOML run configuration.
//!
//! Input units: stiffnesses and moduli in GPa, density in kg/m^3, lengths in
//! mm, frequency-thickness in MHz*mm, sampling rate in MHz, chirp band in kHz,
//! chirp length in ms, the noise scale `sigma` in rad/s. Every section except
//! `material` has defaults; the resolved form written next to each command's
//! outputs has all of them filled in.

use std::path::{Path, PathBuf};

use lambid_core::bayes::{Prior, PriorSpec, ScaledPrior, N_PARAMS, PARAM_NAMES};
use lambid_core::curves::{ModeLabel, DEFAULT_GRID_POINTS, DEFAULT_ORDER};
use lambid_core::material::engineering_to_constants;
use lambid_core::wavefield::{RidgeOptions, DEFAULT_FH_MAX, DEFAULT_MAX_JUMP, DEFAULT_PROMINENCE};
use lambid_core::{ElasticConstants, EngineeringConstants, PlateSpec};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{Excitation, Geometry};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub material: MaterialSection,
    #[serde(default)]
    pub plate: PlateSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub sensitivity: SensitivitySection,
    #[serde(default)]
    pub synth: SynthSection,
    #[serde(default)]
    pub extract: ExtractSection,
    #[serde(default)]
    pub sampler: SamplerSection,
    #[serde(default)]
    pub prior: PriorSection,
    #[serde(default)]
    pub summary: SummarySection,
    #[serde(default)]
    pub paths: PathsSection,
}

/// Exactly one of the two forms.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constants: Option<ConstantsGpa>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub engineering: Option<EngineeringGpa>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsGpa {
    pub c11: f64,
    pub c13: f64,
    pub c33: f64,
    pub c55: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineeringGpa {
    pub e11: f64,
    pub e22: f64,
    pub g12: f64,
    pub nu12: f64,
    pub nu21: f64,
    pub rho: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlateSection {
    pub thickness_mm: f64,
}

impl Default for PlateSection {
    fn default() -> Self {
        Self { thickness_mm: 16.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub fh_min: f64,
    pub fh_max: f64,
    pub points: usize,
    pub order: usize,
    /// Raise the order until successive curves agree.
    pub auto_converge: bool,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            fh_min: 0.05,
            fh_max: DEFAULT_FH_MAX,
            points: DEFAULT_GRID_POINTS,
            order: DEFAULT_ORDER,
            auto_converge: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensitivitySection {
    pub perturbation: f64,
    /// Frequency-thickness values where the fixed-fh phase velocity shift is reported.
    pub fh_lo: f64,
    pub fh_hi: f64,
    /// Empty means every parameter.
    pub params: Vec<String>,
}

impl Default for SensitivitySection {
    fn default() -> Self {
        Self {
            perturbation: 0.3,
            fh_lo: 0.4,
            fh_hi: 4.0,
            params: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSection {
    pub n_x: usize,
    pub dx_mm: f64,
    pub x0_mm: f64,
    pub n_t: usize,
    pub fs_mhz: f64,
    pub chirp_lo_khz: f64,
    pub chirp_hi_khz: f64,
    pub chirp_ms: f64,
    /// Noise RMS as a fraction of the clean field RMS.
    pub noise: f64,
    pub modes: Vec<String>,
}

impl Default for SynthSection {
    fn default() -> Self {
        Self {
            n_x: 256,
            dx_mm: 1.8,
            x0_mm: 0.0,
            n_t: 8192,
            fs_mhz: 1.024,
            chirp_lo_khz: 0.0,
            chirp_hi_khz: 500.0,
            chirp_ms: 1.0,
            noise: 0.01,
            modes: vec!["A0".into(), "S0".into()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExtractSection {
    pub fh_min: f64,
    pub fh_max: f64,
    pub n_modes: usize,
    pub prominence: f64,
    pub max_jump: usize,
    pub hann: bool,
}

impl Default for ExtractSection {
    fn default() -> Self {
        Self {
            fh_min: 0.2,
            fh_max: DEFAULT_FH_MAX,
            n_modes: 2,
            prominence: DEFAULT_PROMINENCE,
            max_jump: DEFAULT_MAX_JUMP,
            hann: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SamplerSection {
    pub samples: usize,
    pub warmup: usize,
    pub chains: usize,
    pub proposal_scale: f64,
    /// Expansion order of the forward model inside the likelihood.
    pub order: usize,
    pub use_likelihood: bool,
}

impl Default for SamplerSection {
    fn default() -> Self {
        Self {
            samples: 20_000,
            warmup: 10_000,
            chains: 1,
            proposal_scale: 1.0,
            order: lambid_core::bayes::LIKELIHOOD_ORDER,
            use_likelihood: true,
        }
    }
}

/// `{ gamma = [shape, rate] }` or `{ normal = [mean, sd] }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "lowercase")]
pub enum PriorEntry {
    Gamma([f64; 2]),
    Normal([f64; 2]),
}

impl PriorEntry {
    fn to_prior(self) -> Prior {
        match self {
            PriorEntry::Gamma([shape, rate]) => Prior::Gamma { shape, rate },
            PriorEntry::Normal([mean, sd]) => Prior::Normal { mean, sd },
        }
    }

    fn from_prior(p: Prior) -> Self {
        match p {
            Prior::Gamma { shape, rate } => PriorEntry::Gamma([shape, rate]),
            Prior::Normal { mean, sd } => PriorEntry::Normal([mean, sd]),
        }
    }
}

/// Stiffness priors are over values in GPa.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PriorSection {
    pub c11: PriorEntry,
    pub c13: PriorEntry,
    pub c33: PriorEntry,
    pub c55: PriorEntry,
    pub rho: PriorEntry,
    pub sigma: PriorEntry,
}

const PRIOR_UNITS: [f64; N_PARAMS] = [1e9, 1e9, 1e9, 1e9, 1.0, 1.0];

impl Default for PriorSection {
    fn default() -> Self {
        let d = PriorSpec::default().params.map(|p| PriorEntry::from_prior(p.dist));
        Self {
            c11: d[0],
            c13: d[1],
            c33: d[2],
            c55: d[3],
            rho: d[4],
            sigma: d[5],
        }
    }
}

impl PriorSection {
    pub fn spec(&self) -> Result<PriorSpec> {
        let entries = [self.c11, self.c13, self.c33, self.c55, self.rho, self.sigma];
        let mut params = PriorSpec::default().params;
        for (i, (p, e)) in params.iter_mut().zip(entries).enumerate() {
            *p = ScaledPrior {
                dist: e.to_prior(),
                unit: PRIOR_UNITS[i],
            };
            p.dist.validate().map_err(|e| Error::Config(format!("prior.{}: {e}", PARAM_NAMES[i])))?;
        }
        Ok(PriorSpec { params })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SummarySection {
    /// 0 picks a stride leaving about 500 ensemble members.
    pub thin: usize,
    pub ensemble_points: usize,
    pub group_velocity: bool,
    /// Parameter pairs for joint densities; empty means every pair.
    pub pairs: Vec<[String; 2]>,
}

impl Default for SummarySection {
    fn default() -> Self {
        Self {
            thin: 0,
            ensemble_points: 100,
            group_velocity: true,
            pairs: Vec::new(),
        }
    }
}

/// Inputs. Relative paths are taken from the config file's directory;
/// unset inputs are looked up in the output directory, where the upstream
/// command writes them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathsSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wavefield: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub observations: Option<PathBuf>,
    /// Directory holding `chain_<i>.csv` files.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub chains: Option<PathBuf>,
}

fn check(ok: bool, field: &str, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Config(format!("{field}: {msg}")))
    }
}

fn positive(v: f64, field: &str) -> Result<()> {
    check(v.is_finite() && v > 0.0, field, "must be positive and finite")
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let msg = e.message().trim().to_string();
            match e.span() {
                Some(span) => {
                    let line = text[..span.start].matches('\n').count() + 1;
                    Error::Config(format!("line {line}: {msg}"))
                }
                None => Error::Config(msg),
            }
        })
    }

    /// Loads `path` and rebases relative input paths onto its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::parse(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.paths.wavefield, &mut cfg.paths.observations, &mut cfg.paths.chains].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn require_seed(&self) -> Result<u64> {
        self.seed.ok_or_else(|| Error::Config("seed: required for this command (set `seed` or pass --seed)".into()))
    }

    pub fn plate(&self) -> Result<PlateSpec> {
        positive(self.plate.thickness_mm, "plate.thickness_mm")?;
        Ok(PlateSpec::from_mm(self.plate.thickness_mm)?)
    }

    pub fn material(&self) -> Result<ElasticConstants> {
        match (&self.material.constants, &self.material.engineering) {
            (Some(c), None) => {
                for (v, f) in [(c.c11, "c11"), (c.c13, "c13"), (c.c33, "c33"), (c.c55, "c55"), (c.rho, "rho")] {
                    positive(v, &format!("material.constants.{f}"))?;
                }
                Ok(ElasticConstants::from_gpa(c.c11, c.c13, c.c33, c.c55, c.rho)?)
            }
            (None, Some(e)) => {
                for (v, f) in [(e.e11, "e11"), (e.e22, "e22"), (e.g12, "g12"), (e.rho, "rho")] {
                    positive(v, &format!("material.engineering.{f}"))?;
                }
                let eng = EngineeringConstants {
                    e11: e.e11 * 1e9,
                    e22: e.e22 * 1e9,
                    g12: e.g12 * 1e9,
                    nu12: e.nu12,
                    nu21: e.nu21,
                    rho: e.rho,
                };
                engineering_to_constants(&eng).map_err(|err| Error::Config(format!("material.engineering: {err}")))
            }
            (Some(_), Some(_)) => Err(Error::Config("material: give either [material.constants] or [material.engineering], not both".into())),
            (None, None) => Err(Error::Config("material: missing; add [material.constants] or [material.engineering]".into())),
        }
    }

    /// `(fh_min, fh_max)` of the solve grid.
    pub fn band(&self) -> Result<(f64, f64)> {
        let g = &self.grid;
        positive(g.fh_min, "grid.fh_min")?;
        positive(g.fh_max, "grid.fh_max")?;
        check(g.fh_max > g.fh_min, "grid.fh_max", "must exceed grid.fh_min")?;
        check(g.points >= 3, "grid.points", "must be at least 3")?;
        check(g.order >= 1, "grid.order", "must be at least 1")?;
        Ok((g.fh_min, g.fh_max))
    }

    pub fn geometry(&self) -> Result<Geometry> {
        let s = &self.synth;
        check(s.n_x >= 2, "synth.n_x", "must be at least 2")?;
        check(s.n_t >= 2, "synth.n_t", "must be at least 2")?;
        positive(s.dx_mm, "synth.dx_mm")?;
        positive(s.fs_mhz, "synth.fs_mhz")?;
        check(s.x0_mm.is_finite() && s.x0_mm >= 0.0, "synth.x0_mm", "must be non-negative")?;
        Ok(Geometry {
            n_x: s.n_x,
            dx: s.dx_mm * 1e-3,
            n_t: s.n_t,
            dt: 1.0 / (s.fs_mhz * 1e6),
            x0: s.x0_mm * 1e-3,
        })
    }

    pub fn excitation(&self) -> Result<Excitation> {
        let s = &self.synth;
        check(s.chirp_lo_khz.is_finite() && s.chirp_lo_khz >= 0.0, "synth.chirp_lo_khz", "must be non-negative")?;
        positive(s.chirp_hi_khz, "synth.chirp_hi_khz")?;
        positive(s.chirp_ms, "synth.chirp_ms")?;
        Ok(Excitation::Chirp {
            f_lo: s.chirp_lo_khz * 1e3,
            f_hi: s.chirp_hi_khz * 1e3,
            duration: s.chirp_ms * 1e-3,
            amplitude: 1.0,
        })
    }

    pub fn synth_modes(&self) -> Result<Vec<ModeLabel>> {
        check(self.synth.noise.is_finite() && self.synth.noise >= 0.0, "synth.noise", "must be non-negative")?;
        check(!self.synth.modes.is_empty(), "synth.modes", "must name at least one mode")?;
        self.synth
            .modes
            .iter()
            .map(|m| ModeLabel::parse(m).ok_or_else(|| Error::Config(format!("synth.modes: unknown mode `{m}`"))))
            .collect()
    }

    pub fn ridge_options(&self) -> Result<RidgeOptions> {
        let e = &self.extract;
        positive(e.fh_min, "extract.fh_min")?;
        positive(e.fh_max, "extract.fh_max")?;
        check(e.fh_max > e.fh_min, "extract.fh_max", "must exceed extract.fh_min")?;
        check((1..=2).contains(&e.n_modes), "extract.n_modes", "must be 1 or 2")?;
        check((0.0..1.0).contains(&e.prominence), "extract.prominence", "must lie in [0, 1)")?;
        check(e.max_jump >= 1, "extract.max_jump", "must be at least 1")?;
        Ok(RidgeOptions {
            n_modes: e.n_modes,
            band: (e.fh_min, e.fh_max),
            min_prominence: e.prominence,
            max_jump: e.max_jump,
        })
    }

    pub fn validate_sampler(&self) -> Result<()> {
        let s = &self.sampler;
        check(s.samples >= 1, "sampler.samples", "must be at least 1")?;
        check(s.chains >= 1, "sampler.chains", "must be at least 1")?;
        check(s.order >= 1, "sampler.order", "must be at least 1")?;
        check(s.proposal_scale.is_finite() && s.proposal_scale >= 0.0, "sampler.proposal_scale", "must be non-negative")
    }

    pub fn validate_sensitivity(&self) -> Result<()> {
        let s = &self.sensitivity;
        check((0.0..1.0).contains(&s.perturbation), "sensitivity.perturbation", "must lie in [0, 1)")?;
        positive(s.fh_lo, "sensitivity.fh_lo")?;
        positive(s.fh_hi, "sensitivity.fh_hi")
    }

    /// Pairs of chain column indices.
    pub fn summary_pairs(&self) -> Result<Vec<(usize, usize)>> {
        let s = &self.summary;
        check(s.ensemble_points >= 3, "summary.ensemble_points", "must be at least 3")?;
        if s.pairs.is_empty() {
            return Ok((0..N_PARAMS).flat_map(|i| (i + 1..N_PARAMS).map(move |j| (i, j))).collect());
        }
        let idx = |name: &str| {
            PARAM_NAMES
                .iter()
                .position(|n| *n == name)
                .ok_or_else(|| Error::Config(format!("summary.pairs: unknown parameter `{name}`")))
        };
        s.pairs
            .iter()
            .map(|[a, b]| {
                let p = (idx(a)?, idx(b)?);
                check(p.0 != p.1, "summary.pairs", "a pair needs two different parameters")?;
                Ok(p)
            })
            .collect()
    }
}
