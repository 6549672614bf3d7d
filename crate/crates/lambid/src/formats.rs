//! Delimited-text and binary file formats.
//!
//! Every table is comma-separated with a mandatory header row. Lines starting
//! with `#` are comments; some carry `# key = value` metadata that readers
//! pick up. Floats are written in Rust's shortest round-trip form, so a
//! write/read cycle is lossless and reruns are byte-identical.
//!
//! A wavefield is two files: a TOML sidecar header and a raw little-endian
//! f64 matrix, row-major with one trace (fixed x) per row.

use std::fmt::Write as _;
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use lambid_core::bayes::{N_PARAMS, PARAM_NAMES};
use lambid_core::curves::{omega_to_fh, DispersionCurve, ModeLabel, TracedCurves};
use lambid_core::posterior::{CurveEnsemble, DensityGrid, PosteriorSummary};
use lambid_core::sampler::Chain;
use lambid_core::wavefield::{Observation, ObservationSet, TXField};
use lambid_core::PlateSpec;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CURVE_HEADER: &str = "mode,k,f,fh,c_p,c_g";
pub const OBSERVATION_HEADER: &str = "mode,omega_rad_s,k_rad_m";
pub const CHAIN_HEADER: &str = "iter,c11,c13,c33,c55,rho,sigma,log_post,accepted";
pub const SUMMARY_HEADER: &str = "parameter,mean,mode,variance,ci_lo,ci_hi";
pub const ENSEMBLE_HEADER: &str = "sample_id,mode,k,omega,c_g";
pub const SENSITIVITY_HEADER: &str = "param,mode,max_omega_shift,cp_shift_fh_lo,cp_shift_fh_hi";

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Data rows of a delimited file after its header, plus `# key = value`
/// metadata from the comment lines.
struct Table {
    meta: Vec<(String, String)>,
    rows: Vec<(usize, Vec<String>)>,
}

impl Table {
    fn meta(&self, key: &str) -> Option<&str> {
        self.meta.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

fn read_table(path: &Path, header: &str) -> Result<Table> {
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut meta = Vec::new();
    let mut rows = Vec::new();
    let mut seen_header = false;
    let width = header.split(',').count();
    for (n, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            if let Some((k, v)) = c.split_once('=') {
                meta.push((k.trim().to_string(), v.trim().to_string()));
            }
            continue;
        }
        if !seen_header {
            if line != header {
                return Err(Error::parse(path, n + 1, format!("expected header `{header}`, found `{line}`")));
            }
            seen_header = true;
            continue;
        }
        let cells: Vec<String> = line.split(',').map(|s| s.trim().to_string()).collect();
        if cells.len() != width {
            return Err(Error::parse(path, n + 1, format!("expected {width} columns, found {}", cells.len())));
        }
        rows.push((n + 1, cells));
    }
    if !seen_header {
        return Err(Error::parse(path, 0, format!("missing header `{header}`")));
    }
    Ok(Table { meta, rows })
}

fn num(path: &Path, line: usize, cell: &str) -> Result<f64> {
    cell.parse::<f64>().map_err(|_| Error::parse(path, line, format!("`{cell}` is not a number")))
}

fn mode(path: &Path, line: usize, cell: &str) -> Result<ModeLabel> {
    ModeLabel::parse(cell).ok_or_else(|| Error::parse(path, line, format!("unknown mode `{cell}`")))
}

fn push_curve(out: &mut String, curve: &DispersionCurve, plate: &PlateSpec) {
    for i in 0..curve.len() {
        let w = curve.omega[i];
        let cg = curve.c_g.as_ref().map(|g| g[i].to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            curve.mode,
            curve.k[i],
            w / (2.0 * std::f64::consts::PI),
            omega_to_fh(w, plate),
            curve.c_p[i],
            cg
        );
    }
}

/// Curve export; `c_g` is empty where it was not computed.
pub fn curves_to_string(curves: &TracedCurves, plate: &PlateSpec) -> String {
    let mut out = String::new();
    out.push_str("# k rad/m, f Hz, fh MHz*mm, c_p m/s, c_g m/s\n");
    let _ = writeln!(out, "# order = {}", curves.order);
    let _ = writeln!(out, "# thickness_m = {}", plate.thickness);
    out.push_str(CURVE_HEADER);
    out.push('\n');
    push_curve(&mut out, &curves.a0, plate);
    push_curve(&mut out, &curves.s0, plate);
    out
}

pub fn write_curves(path: &Path, curves: &TracedCurves, plate: &PlateSpec) -> Result<()> {
    write(path, &curves_to_string(curves, plate))
}

/// Reads a curve export back as `(A0, S0)`.
pub fn read_curves(path: &Path) -> Result<[DispersionCurve; 2]> {
    let t = read_table(path, CURVE_HEADER)?;
    #[derive(Default)]
    struct Columns {
        k: Vec<f64>,
        omega: Vec<f64>,
        c_p: Vec<f64>,
        c_g: Vec<f64>,
    }
    let mut cols: [Columns; 2] = Default::default();
    for (line, r) in &t.rows {
        let m = mode(path, *line, &r[0])?;
        let c = &mut cols[m.index()];
        c.k.push(num(path, *line, &r[1])?);
        c.omega.push(2.0 * std::f64::consts::PI * num(path, *line, &r[2])?);
        c.c_p.push(num(path, *line, &r[4])?);
        if !r[5].is_empty() {
            c.c_g.push(num(path, *line, &r[5])?);
        }
    }
    let build = |mode: ModeLabel, c: &Columns| DispersionCurve {
        mode,
        k: c.k.clone(),
        omega: c.omega.clone(),
        c_p: c.c_p.clone(),
        c_g: (c.c_g.len() == c.k.len() && !c.c_g.is_empty()).then(|| c.c_g.clone()),
    };
    Ok([build(ModeLabel::A0, &cols[0]), build(ModeLabel::S0, &cols[1])])
}

/// Sidecar header of a binary wavefield.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldHeader {
    pub n_x: usize,
    pub n_t: usize,
    /// m
    pub dx: f64,
    /// s
    pub dt: f64,
    pub units: String,
    pub layout: String,
    /// Data file, relative to the header.
    pub data: String,
}

const FIELD_LAYOUT: &str = "f64-le row-major, one trace per row";

/// Writes `<stem>.toml` and `<stem>.bin` next to each other; returns the header path.
pub fn write_field(dir: &Path, stem: &str, field: &TXField, units: &str) -> Result<PathBuf> {
    let header = FieldHeader {
        n_x: field.n_x(),
        n_t: field.n_t(),
        dx: field.dx,
        dt: field.dt,
        units: units.to_string(),
        layout: FIELD_LAYOUT.to_string(),
        data: format!("{stem}.bin"),
    };
    let head_path = dir.join(format!("{stem}.toml"));
    write(&head_path, &toml::to_string(&header).expect("header serializes"))?;
    let mut bytes = Vec::with_capacity(field.samples().len() * 8);
    for v in field.samples() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let data_path = dir.join(&header.data);
    fs::write(&data_path, bytes).map_err(|e| Error::io(&data_path, e))?;
    Ok(head_path)
}

pub fn read_field(header_path: &Path) -> Result<(TXField, FieldHeader)> {
    let text = fs::read_to_string(header_path).map_err(|e| Error::io(header_path, e))?;
    let header: FieldHeader = toml::from_str(&text).map_err(|e| Error::parse(header_path, 0, e.message().to_string()))?;
    if header.layout != FIELD_LAYOUT {
        return Err(Error::parse(header_path, 0, format!("unsupported layout `{}`", header.layout)));
    }
    let data_path = header_path.parent().unwrap_or(Path::new(".")).join(&header.data);
    let bytes = fs::read(&data_path).map_err(|e| Error::io(&data_path, e))?;
    let expected = header.n_x * header.n_t * 8;
    if bytes.len() != expected {
        return Err(Error::parse(&data_path, 0, format!("expected {expected} bytes, found {}", bytes.len())));
    }
    let samples = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    let field = TXField::new(samples, header.n_x, header.n_t, header.dt, header.dx)?;
    Ok((field, header))
}

pub fn observations_to_string(obs: &ObservationSet) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# band_fh_lo = {}", obs.band.0);
    let _ = writeln!(out, "# band_fh_hi = {}", obs.band.1);
    out.push_str(OBSERVATION_HEADER);
    out.push('\n');
    for p in &obs.points {
        let _ = writeln!(out, "{},{},{}", p.mode, p.omega, p.k);
    }
    out
}

pub fn write_observations(path: &Path, obs: &ObservationSet) -> Result<()> {
    write(path, &observations_to_string(obs))
}

/// Without band comments the band is the span of the points.
pub fn read_observations(path: &Path, plate: &PlateSpec) -> Result<ObservationSet> {
    let t = read_table(path, OBSERVATION_HEADER)?;
    let mut points = Vec::with_capacity(t.rows.len());
    for (line, r) in &t.rows {
        points.push(Observation {
            mode: mode(path, *line, &r[0])?,
            omega: num(path, *line, &r[1])?,
            k: num(path, *line, &r[2])?,
        });
    }
    let meta_num = |key: &str| -> Result<Option<f64>> { t.meta(key).map(|v| num(path, 0, v)).transpose() };
    let band = match (meta_num("band_fh_lo")?, meta_num("band_fh_hi")?) {
        (Some(lo), Some(hi)) => (lo, hi),
        _ => points.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), p| {
            let fh = omega_to_fh(p.omega, plate);
            (lo.min(fh), hi.max(fh))
        }),
    };
    let obs = ObservationSet::new(points, band);
    obs.validate(plate)?;
    Ok(obs)
}

pub fn chain_to_string(chain: &Chain) -> String {
    let mut out = String::new();
    out.push_str("# c11, c13, c33, c55 in Pa; rho in kg/m^3; sigma in rad/s\n");
    let _ = writeln!(out, "# seed = {}", chain.seed);
    let _ = writeln!(out, "# warmup = {}", chain.warmup_len);
    out.push_str(CHAIN_HEADER);
    out.push('\n');
    for i in 0..chain.len() {
        let _ = write!(out, "{i}");
        for v in chain.sample(i) {
            let _ = write!(out, ",{v}");
        }
        let _ = writeln!(out, ",{},{}", chain.log_posts[i], u8::from(chain.accepted[i]));
    }
    out
}

pub fn write_chain(path: &Path, chain: &Chain) -> Result<()> {
    if chain.dim != N_PARAMS {
        return Err(Error::Config(format!("chain has {} columns, expected {N_PARAMS}", chain.dim)));
    }
    write(path, &chain_to_string(chain))
}

pub fn read_chain(path: &Path) -> Result<Chain> {
    let t = read_table(path, CHAIN_HEADER)?;
    let meta_int = |key: &str| -> Result<u64> {
        match t.meta(key) {
            Some(v) => v.parse().map_err(|_| Error::parse(path, 0, format!("bad `{key}` value `{v}`"))),
            None => Ok(0),
        }
    };
    let mut chain = Chain {
        dim: N_PARAMS,
        samples: Vec::with_capacity(t.rows.len() * N_PARAMS),
        log_posts: Vec::with_capacity(t.rows.len()),
        accepted: Vec::with_capacity(t.rows.len()),
        warmup_len: meta_int("warmup")? as usize,
        seed: meta_int("seed")?,
        warnings: Vec::new(),
    };
    for (line, r) in &t.rows {
        for cell in &r[1..=N_PARAMS] {
            chain.samples.push(num(path, *line, cell)?);
        }
        chain.log_posts.push(num(path, *line, &r[N_PARAMS + 1])?);
        chain.accepted.push(match r[N_PARAMS + 2].as_str() {
            "1" => true,
            "0" => false,
            other => return Err(Error::parse(path, *line, format!("accepted must be 0 or 1, found `{other}`"))),
        });
    }
    Ok(chain)
}

/// Parameters appear in chain column order. Stiffnesses are reported in GPa.
pub fn summary_to_string(summary: &PosteriorSummary) -> String {
    let mut out = String::new();
    out.push_str("# c11, c13, c33, c55 in GPa; rho in kg/m^3; sigma in rad/s\n");
    let _ = writeln!(out, "# n_samples = {}", summary.n_samples);
    let _ = writeln!(out, "# acceptance = {}", summary.acceptance);
    out.push_str(SUMMARY_HEADER);
    out.push('\n');
    for p in &summary.params {
        let s = display_scale(p.name);
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            p.name,
            p.mean * s,
            p.kde_mode * s,
            p.variance * s * s,
            p.ci_lo * s,
            p.ci_hi * s
        );
    }
    out
}

/// Factor from SI to the unit a parameter is displayed in.
pub fn display_scale(name: &str) -> f64 {
    match name {
        "c11" | "c13" | "c33" | "c55" => 1e-9,
        _ => 1.0,
    }
}

pub fn write_summary(path: &Path, summary: &PosteriorSummary) -> Result<()> {
    write(path, &summary_to_string(summary))
}

pub fn ensemble_to_string(ens: &CurveEnsemble) -> String {
    let mut out = String::new();
    out.push_str("# k rad/m, omega rad/s, c_g m/s\n");
    let _ = writeln!(out, "# skipped = {}", ens.skipped);
    out.push_str(ENSEMBLE_HEADER);
    out.push('\n');
    for m in &ens.members {
        for mode in ModeLabel::BOTH {
            let j = mode.index();
            for (i, k) in ens.k_grid.iter().enumerate() {
                let cg = m.c_g.as_ref().map(|g| g[j][i].to_string()).unwrap_or_default();
                let _ = writeln!(out, "{},{},{},{},{}", m.sample, mode, k, m.omega[j][i], cg);
            }
        }
    }
    out
}

pub fn write_ensemble(path: &Path, ens: &CurveEnsemble) -> Result<()> {
    write(path, &ensemble_to_string(ens))
}

/// `<stem>.csv` holds one row per y value; `<stem>_x.csv` and `<stem>_y.csv`
/// hold the axes.
pub fn write_density(dir: &Path, stem: &str, grid: &DensityGrid, names: (&str, &str)) -> Result<()> {
    let mut body = String::new();
    let _ = writeln!(body, "# rows follow {} ({stem}_y.csv), columns follow {} ({stem}_x.csv)", names.1, names.0);
    let header: Vec<String> = (0..grid.x_axis.len()).map(|i| format!("x{i}")).collect();
    body.push_str(&header.join(","));
    body.push('\n');
    for iy in 0..grid.y_axis.len() {
        let row: Vec<String> = (0..grid.x_axis.len()).map(|ix| grid.at(ix, iy).to_string()).collect();
        body.push_str(&row.join(","));
        body.push('\n');
    }
    write(&dir.join(format!("{stem}.csv")), &body)?;
    for (axis, name, suffix) in [(&grid.x_axis, names.0, "x"), (&grid.y_axis, names.1, "y")] {
        let mut s = format!("{name}\n");
        for v in axis {
            let _ = writeln!(s, "{v}");
        }
        write(&dir.join(format!("{stem}_{suffix}.csv")), &s)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityRow {
    pub param: &'static str,
    pub mode: ModeLabel,
    pub max_omega_shift: f64,
    pub cp_shift_lo: f64,
    pub cp_shift_hi: f64,
}

pub fn sensitivity_to_string(rows: &[SensitivityRow], perturbation: f64, fh_probe: (f64, f64)) -> String {
    let mut out = String::new();
    out.push_str("# max_omega_shift: largest relative omega change at fixed k\n");
    out.push_str("# cp_shift_fh_*: relative phase velocity change at fixed fh\n");
    let _ = writeln!(out, "# perturbation = {perturbation}");
    let _ = writeln!(out, "# fh_lo = {}", fh_probe.0);
    let _ = writeln!(out, "# fh_hi = {}", fh_probe.1);
    out.push_str(SENSITIVITY_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{},{},{},{}", r.param, r.mode, r.max_omega_shift, r.cp_shift_lo, r.cp_shift_hi);
    }
    out
}

pub fn write_sensitivity(path: &Path, rows: &[SensitivityRow], perturbation: f64, fh_probe: (f64, f64)) -> Result<()> {
    write(path, &sensitivity_to_string(rows, perturbation, fh_probe))
}

pub fn read_sensitivity(path: &Path) -> Result<Vec<SensitivityRow>> {
    let t = read_table(path, SENSITIVITY_HEADER)?;
    t.rows
        .iter()
        .map(|(line, r)| {
            let param = lambid_core::curves::MaterialParam::parse(&r[0])
                .ok_or_else(|| Error::parse(path, *line, format!("unknown parameter `{}`", r[0])))?
                .name();
            Ok(SensitivityRow {
                param,
                mode: mode(path, *line, &r[1])?,
                max_omega_shift: num(path, *line, &r[2])?,
                cp_shift_lo: num(path, *line, &r[3])?,
                cp_shift_hi: num(path, *line, &r[4])?,
            })
        })
        .collect()
}

/// Reads a summary export; values stay in display units.
pub fn read_summary(path: &Path) -> Result<Vec<(String, [f64; 5])>> {
    let t = read_table(path, SUMMARY_HEADER)?;
    t.rows
        .iter()
        .map(|(line, r)| {
            if !PARAM_NAMES.contains(&r[0].as_str()) {
                return Err(Error::parse(path, *line, format!("unknown parameter `{}`", r[0])));
            }
            let mut v = [0.0; 5];
            for (x, cell) in v.iter_mut().zip(&r[1..]) {
                *x = num(path, *line, cell)?;
            }
            Ok((r[0].clone(), v))
        })
        .collect()
}
