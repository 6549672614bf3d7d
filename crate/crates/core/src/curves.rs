//! Dispersion-curve tracing over a wavenumber grid.

#[cfg(not(feature = "std"))]
use num_traits::Float;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::eigen::{smallest_physical, PhysicalModes};
use crate::error::SolverError;
use crate::material::{ElasticConstants, PlateSpec};
use crate::system::{realify, Assembler};

/// Relative inter-order change at which auto-convergence stops.
pub const CONVERGENCE_TOL: f64 = 1e-6;
/// Highest order auto-convergence will try.
pub const MAX_AUTO_ORDER: usize = 24;
/// Fraction of grid points that may be dropped before tracing fails.
pub const MAX_EXCLUDED_FRACTION: f64 = 0.2;
pub const DEFAULT_ORDER: usize = 14;
pub const DEFAULT_GRID_POINTS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModeLabel {
    A0,
    S0,
}

impl ModeLabel {
    pub const BOTH: [ModeLabel; 2] = [ModeLabel::A0, ModeLabel::S0];

    pub fn as_str(&self) -> &'static str {
        match self {
            ModeLabel::A0 => "A0",
            ModeLabel::S0 => "S0",
        }
    }

    pub fn index(&self) -> usize {
        match self {
            ModeLabel::A0 => 0,
            ModeLabel::S0 => 1,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim() {
            "A0" | "a0" => Some(ModeLabel::A0),
            "S0" | "s0" => Some(ModeLabel::S0),
            _ => None,
        }
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Sampled dispersion relation of one mode. `c_p[i] = omega[i] / k[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DispersionCurve {
    pub mode: ModeLabel,
    pub k: Vec<f64>,
    pub omega: Vec<f64>,
    pub c_p: Vec<f64>,
    /// `None` until [`group_velocity`] has run, or when fewer than 3 points exist.
    pub c_g: Option<Vec<f64>>,
}

impl DispersionCurve {
    pub fn from_phase_velocity(mode: ModeLabel, k: Vec<f64>, c_p: Vec<f64>) -> Self {
        let omega = k.iter().zip(&c_p).map(|(k, c)| c * k).collect();
        let mut curve = Self {
            mode,
            k,
            omega,
            c_p: Vec::new(),
            c_g: None,
        };
        // c_p recomputed from omega so the ratio identity is exact
        curve.c_p = curve.omega.iter().zip(&curve.k).map(|(w, k)| w / k).collect();
        curve
    }

    pub fn len(&self) -> usize {
        self.k.len()
    }

    pub fn is_empty(&self) -> bool {
        self.k.is_empty()
    }

    /// Frequency-thickness product in MHz*mm at each point.
    pub fn fh(&self, plate: &PlateSpec) -> Vec<f64> {
        self.omega.iter().map(|w| omega_to_fh(*w, plate)).collect()
    }
}

/// `fh [MHz mm] = f [Hz] * h [m] * 1e-3`.
pub fn omega_to_fh(omega: f64, plate: &PlateSpec) -> f64 {
    omega / (2.0 * PI) * plate.thickness * 1e-3
}

pub fn fh_to_omega(fh: f64, plate: &PlateSpec) -> f64 {
    2.0 * PI * fh * 1e3 / plate.thickness
}

/// `n` log-spaced points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Result<Vec<f64>, SolverError> {
    if !(lo > 0.0 && hi > lo && lo.is_finite() && hi.is_finite()) {
        return Err(SolverError::InvalidGrid("bounds must satisfy 0 < lo < hi"));
    }
    if n < 2 {
        return Err(SolverError::InvalidGrid("need at least 2 points"));
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut g: Vec<f64> = (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp()).collect();
    g[0] = lo;
    g[n - 1] = hi;
    Ok(g)
}

fn check_grid(k_grid: &[f64]) -> Result<(), SolverError> {
    if k_grid.is_empty() {
        return Err(SolverError::InvalidGrid("empty wavenumber grid"));
    }
    if k_grid.iter().any(|k| !(k.is_finite() && *k > 0.0)) {
        return Err(SolverError::InvalidGrid("wavenumbers must be positive"));
    }
    if k_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(SolverError::InvalidGrid("wavenumbers must be strictly increasing"));
    }
    Ok(())
}

/// Assembles and solves the two fundamental modes at one wavenumber.
#[derive(Debug, Clone)]
pub struct ForwardModel {
    assembler: Assembler,
}

impl ForwardModel {
    pub fn new(order: usize) -> Result<Self, SolverError> {
        Ok(Self {
            assembler: Assembler::new(order)?,
        })
    }

    pub fn order(&self) -> usize {
        self.assembler.order()
    }

    /// Smallest-magnitude physical eigenvalues at `kh`.
    pub fn physical_modes(&self, theta: &ElasticConstants, kh: f64, n_modes: usize) -> Result<PhysicalModes, SolverError> {
        let sys = self.assembler.assemble(theta, kh)?;
        smallest_physical(&realify(&sys), &sys.full_mass(), n_modes)
    }

    /// Phase velocities `[A0, S0]` at wavenumber `k`, or `None` when fewer
    /// than two physical eigenvalues exist. A0 is the slower of the two.
    pub fn fundamental_cp(&self, theta: &ElasticConstants, plate: &PlateSpec, k: f64) -> Result<Option<[f64; 2]>, SolverError> {
        let modes = self.physical_modes(theta, k * plate.thickness, 2)?;
        let c = modes.phase_velocities();
        Ok(if c.len() == 2 { Some([c[0], c[1]]) } else { None })
    }

    /// Angular frequency of `mode` at wavenumber `k`.
    pub fn omega(&self, theta: &ElasticConstants, plate: &PlateSpec, mode: ModeLabel, k: f64) -> Result<Option<f64>, SolverError> {
        Ok(self.fundamental_cp(theta, plate, k)?.map(|c| c[mode.index()] * k))
    }

    /// Wavenumber at which `mode` reaches angular frequency `omega`, by
    /// bracketing and Illinois false position on `omega_mode(k) - omega`.
    pub fn wavenumber(&self, theta: &ElasticConstants, plate: &PlateSpec, mode: ModeLabel, omega: f64) -> Result<f64, SolverError> {
        self.wavenumber_near(theta, plate, mode, omega, None)
    }

    /// As [`ForwardModel::wavenumber`], bracketing outward from `guess` when given.
    pub fn wavenumber_near(
        &self,
        theta: &ElasticConstants,
        plate: &PlateSpec,
        mode: ModeLabel,
        omega: f64,
        guess: Option<f64>,
    ) -> Result<f64, SolverError> {
        let fail = SolverError::InvalidGrid("no physical mode while inverting omega(k)");
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(SolverError::InvalidGrid("angular frequency must be positive"));
        }
        let eval = |k: f64| -> Result<f64, SolverError> { Ok(self.omega(theta, plate, mode, k)?.ok_or(fail.clone())? - omega) };
        let (start_lo, start_hi, grow) = match guess {
            Some(g) if g > 0.0 && g.is_finite() => (g * 0.995, g * 1.005, 1.1),
            _ => {
                let c_max = (theta.c11.max(theta.c33).max(theta.c55) / theta.rho).sqrt() * 1.5;
                (omega / c_max, 2.0 * omega / c_max, 2.0)
            }
        };
        let (mut lo, mut hi) = (start_lo, start_hi);
        let mut f_lo = eval(lo)?;
        let mut guard = 0;
        while f_lo > 0.0 {
            hi = lo;
            lo /= grow;
            f_lo = eval(lo)?;
            guard += 1;
            if guard > 200 {
                return Err(fail);
            }
        }
        let mut f_hi = eval(hi)?;
        while f_hi < 0.0 {
            lo = hi;
            f_lo = f_hi;
            hi *= grow;
            f_hi = eval(hi)?;
            guard += 1;
            if guard > 200 {
                return Err(fail);
            }
        }
        let mut side = 0i8;
        for _ in 0..200 {
            let k = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
            let f = eval(k)?;
            if f.abs() <= 1e-14 * omega || (hi - lo) < 1e-14 * k {
                return Ok(k);
            }
            if f.signum() == f_lo.signum() {
                lo = k;
                f_lo = f;
                if side == -1 {
                    f_hi *= 0.5;
                }
                side = -1;
            } else {
                hi = k;
                f_hi = f;
                if side == 1 {
                    f_lo *= 0.5;
                }
                side = 1;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Wavenumber range covering the band `[fh_min, fh_max]` for both modes:
    /// S0 (fastest) sets the lower end, A0 (slowest) the upper end.
    pub fn band_k_range(&self, theta: &ElasticConstants, plate: &PlateSpec, fh_min: f64, fh_max: f64) -> Result<(f64, f64), SolverError> {
        if !(fh_min > 0.0 && fh_max > fh_min) {
            return Err(SolverError::InvalidGrid("band must satisfy 0 < fh_min < fh_max"));
        }
        let k_lo = self.wavenumber(theta, plate, ModeLabel::S0, fh_to_omega(fh_min, plate))?;
        let k_hi = self.wavenumber(theta, plate, ModeLabel::A0, fh_to_omega(fh_max, plate))?;
        Ok((k_lo, k_hi))
    }
}

/// A0 and S0 traced over a wavenumber grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TracedCurves {
    pub a0: DispersionCurve,
    pub s0: DispersionCurve,
    /// Expansion order the curves were computed at.
    pub order: usize,
    /// Grid indices dropped for lack of two physical eigenvalues.
    pub excluded: Vec<usize>,
    /// Grid points where inverse iteration handed over to the dense solver.
    pub fallbacks: usize,
}

impl TracedCurves {
    pub fn mode(&self, mode: ModeLabel) -> &DispersionCurve {
        match mode {
            ModeLabel::A0 => &self.a0,
            ModeLabel::S0 => &self.s0,
        }
    }

    /// Largest relative `omega` difference against `other` over shared wavenumbers.
    pub fn max_relative_change(&self, other: &TracedCurves) -> f64 {
        ModeLabel::BOTH
            .iter()
            .map(|&m| max_rel_diff(self.mode(m), other.mode(m)))
            .fold(0.0, f64::max)
    }
}

fn max_rel_diff(a: &DispersionCurve, b: &DispersionCurve) -> f64 {
    let mut worst = 0.0f64;
    let mut j = 0;
    for (i, k) in a.k.iter().enumerate() {
        while j < b.k.len() && b.k[j] < *k {
            j += 1;
        }
        if j < b.k.len() && b.k[j] == *k {
            worst = worst.max((a.omega[i] - b.omega[j]).abs() / a.omega[i].abs());
        }
    }
    worst
}

fn trace_at_order(model: &ForwardModel, theta: &ElasticConstants, plate: &PlateSpec, k_grid: &[f64]) -> Result<TracedCurves, SolverError> {
    let mut ks = Vec::with_capacity(k_grid.len());
    let mut a0 = Vec::with_capacity(k_grid.len());
    let mut s0 = Vec::with_capacity(k_grid.len());
    let mut excluded = Vec::new();
    let mut fallbacks = 0;
    let mut prev: Option<(f64, f64)> = None;
    for (i, &k) in k_grid.iter().enumerate() {
        let modes = model.physical_modes(theta, k * plate.thickness, 2)?;
        if modes.fallback.is_some() {
            fallbacks += 1;
        }
        let c = modes.phase_velocities();
        if c.len() < 2 {
            excluded.push(i);
            continue;
        }
        let (lo, hi) = (c[0].min(c[1]), c[0].max(c[1]));
        let (ca, cs) = match prev {
            None => (lo, hi),
            Some((pa, ps)) => {
                let keep = (lo - pa).abs() + (hi - ps).abs();
                let swap = (hi - pa).abs() + (lo - ps).abs();
                if swap < keep {
                    (hi, lo)
                } else {
                    (lo, hi)
                }
            }
        };
        prev = Some((ca, cs));
        ks.push(k);
        a0.push(ca);
        s0.push(cs);
    }
    let total = k_grid.len();
    if excluded.len() as f64 > MAX_EXCLUDED_FRACTION * total as f64 {
        return Err(SolverError::TooManyExcluded {
            excluded: excluded.len(),
            total,
        });
    }
    let mut a0 = DispersionCurve::from_phase_velocity(ModeLabel::A0, ks.clone(), a0);
    let mut s0 = DispersionCurve::from_phase_velocity(ModeLabel::S0, ks, s0);
    if a0.len() >= 3 {
        a0 = group_velocity(&a0)?;
        s0 = group_velocity(&s0)?;
    }
    Ok(TracedCurves {
        a0,
        s0,
        order: model.order(),
        excluded,
        fallbacks,
    })
}

/// Traces A0 and S0 over `k_grid` (rad/m, strictly increasing).
///
/// A0 is seeded as the slower branch at the first grid point; afterwards the
/// two solutions are assigned by nearest-neighbour continuity in `c_p`.
/// With `auto_converge`, the order is raised in steps of 2 until the
/// inter-order change drops below [`CONVERGENCE_TOL`].
pub fn trace_curves(theta: &ElasticConstants, plate: &PlateSpec, k_grid: &[f64], order: usize, auto_converge: bool) -> Result<TracedCurves, SolverError> {
    check_grid(k_grid)?;
    let mut current = trace_at_order(&ForwardModel::new(order)?, theta, plate, k_grid)?;
    if !auto_converge {
        return Ok(current);
    }
    let mut m = order;
    while m + 2 <= MAX_AUTO_ORDER {
        m += 2;
        let next = trace_at_order(&ForwardModel::new(m)?, theta, plate, k_grid)?;
        let change = current.max_relative_change(&next);
        current = next;
        if change < CONVERGENCE_TOL {
            return Ok(current);
        }
    }
    Err(SolverError::NotConverged(m))
}

/// `c_g = d omega / dk` by second-order finite differences on the
/// (possibly non-uniform) grid: three-point central in the interior,
/// three-point one-sided at the ends. Exact for quadratics.
pub fn group_velocity(curve: &DispersionCurve) -> Result<DispersionCurve, SolverError> {
    let n = curve.len();
    if n < 3 {
        return Err(SolverError::TooFewPoints(n));
    }
    let (k, w) = (&curve.k, &curve.omega);
    let mut cg = Vec::with_capacity(n);
    // three-point derivative at x[i] from points i0, i1, i2
    let deriv = |at: usize, i0: usize, i1: usize, i2: usize| {
        let x = k[at];
        let (x0, x1, x2) = (k[i0], k[i1], k[i2]);
        let l0 = ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2));
        let l1 = ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2));
        let l2 = ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1));
        l0 * w[i0] + l1 * w[i1] + l2 * w[i2]
    };
    cg.push(deriv(0, 0, 1, 2));
    for i in 1..n - 1 {
        cg.push(deriv(i, i - 1, i, i + 1));
    }
    cg.push(deriv(n - 1, n - 3, n - 2, n - 1));
    let mut out = curve.clone();
    out.c_g = Some(cg);
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MaterialParam {
    C11,
    C13,
    C33,
    C55,
    Rho,
}

impl MaterialParam {
    pub const ALL: [MaterialParam; 5] = [
        MaterialParam::C11,
        MaterialParam::C13,
        MaterialParam::C33,
        MaterialParam::C55,
        MaterialParam::Rho,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            MaterialParam::C11 => "c11",
            MaterialParam::C13 => "c13",
            MaterialParam::C33 => "c33",
            MaterialParam::C55 => "c55",
            MaterialParam::Rho => "rho",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|p| p.name().eq_ignore_ascii_case(s.trim()))
    }

    fn index(&self) -> usize {
        *self as usize
    }

    pub fn perturb(&self, theta: &ElasticConstants, factor: f64) -> ElasticConstants {
        let mut a = theta.as_array();
        a[self.index()] *= factor;
        ElasticConstants::from_array(a)
    }
}

/// Curves at `-delta`, baseline and `+delta` for one parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitivityEntry {
    pub param: MaterialParam,
    pub minus: TracedCurves,
    pub base: TracedCurves,
    pub plus: TracedCurves,
}

impl SensitivityEntry {
    /// Relative omega shift at each baseline grid point of `mode`: the larger
    /// of the two perturbation directions. Points missing from either
    /// perturbed trace are skipped.
    pub fn relative_shifts(&self, mode: ModeLabel) -> Vec<(f64, f64)> {
        let base = self.base.mode(mode);
        let lookup = |c: &DispersionCurve, k: f64| c.k.iter().position(|&x| x == k).map(|i| c.omega[i]);
        base.k
            .iter()
            .zip(&base.omega)
            .filter_map(|(&k, &w)| {
                let m = lookup(self.minus.mode(mode), k)?;
                let p = lookup(self.plus.mode(mode), k)?;
                Some((k, ((m - w).abs().max((p - w).abs())) / w))
            })
            .collect()
    }

    pub fn max_shift(&self, mode: ModeLabel) -> f64 {
        self.relative_shifts(mode).iter().map(|s| s.1).fold(0.0, f64::max)
    }

    /// Shift at the baseline point whose frequency-thickness is closest to `fh`.
    pub fn shift_at_fh(&self, mode: ModeLabel, fh: f64, plate: &PlateSpec) -> Option<f64> {
        let base = self.base.mode(mode);
        let shifts = self.relative_shifts(mode);
        shifts
            .iter()
            .min_by(|a, b| {
                let fa = fh_of(base, a.0, plate);
                let fb = fh_of(base, b.0, plate);
                (fa - fh).abs().total_cmp(&(fb - fh).abs())
            })
            .map(|s| s.1)
    }
}

fn fh_of(curve: &DispersionCurve, k: f64, plate: &PlateSpec) -> f64 {
    let i = curve.k.iter().position(|&x| x == k).unwrap_or(0);
    omega_to_fh(curve.omega[i], plate)
}

/// Relative phase-velocity shift of `mode` at a fixed frequency-thickness
/// `fh` when `param` is scaled by `1 -/+ perturbation`; the larger of the two.
///
/// Unlike the fixed-wavenumber omega shift, this is how curves drawn against
/// `fh` separate visually. A density change, for instance, shifts omega by the
/// same fraction at every `k` but moves the A0 curve more at high `fh`.
pub fn phase_shift_at_fh(
    model: &ForwardModel,
    theta: &ElasticConstants,
    plate: &PlateSpec,
    param: MaterialParam,
    perturbation: f64,
    mode: ModeLabel,
    fh: f64,
) -> Result<f64, SolverError> {
    if !(0.0..1.0).contains(&perturbation) {
        return Err(SolverError::Perturbation(perturbation));
    }
    let omega = fh_to_omega(fh, plate);
    let c = |t: &ElasticConstants| -> Result<f64, SolverError> { Ok(omega / model.wavenumber(t, plate, mode, omega)?) };
    let c0 = c(theta)?;
    let lo = c(&param.perturb(theta, 1.0 - perturbation))?;
    let hi = c(&param.perturb(theta, 1.0 + perturbation))?;
    Ok((lo - c0).abs().max((hi - c0).abs()) / c0)
}

/// Re-traces both modes with each parameter scaled by `1 -/+ perturbation`.
pub fn sensitivity_sweep(
    theta: &ElasticConstants,
    plate: &PlateSpec,
    k_grid: &[f64],
    perturbation: f64,
    order: usize,
) -> Result<Vec<SensitivityEntry>, SolverError> {
    if !(0.0..1.0).contains(&perturbation) {
        return Err(SolverError::Perturbation(perturbation));
    }
    let base = trace_curves(theta, plate, k_grid, order, false)?;
    MaterialParam::ALL
        .iter()
        .map(|&param| {
            Ok(SensitivityEntry {
                param,
                minus: trace_curves(&param.perturb(theta, 1.0 - perturbation), plate, k_grid, order, false)?,
                base: base.clone(),
                plus: trace_curves(&param.perturb(theta, 1.0 + perturbation), plate, k_grid, order, false)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn baseline() -> ElasticConstants {
        ElasticConstants::from_gpa(160.0, 6.5, 14.0, 7.0, 1200.0).unwrap()
    }

    fn plate() -> PlateSpec {
        PlateSpec::from_mm(16.0).unwrap()
    }

    #[test]
    fn linear_relation_has_constant_group_velocity() {
        let k: Vec<f64> = (1..=10).map(|i| i as f64 * 0.7).collect();
        let c = DispersionCurve::from_phase_velocity(ModeLabel::A0, k, vec![1000.0; 10]);
        let g = group_velocity(&c).unwrap();
        for v in g.c_g.unwrap() {
            assert!((v - 1000.0).abs() < 1e-9);
        }
    }

    #[test]
    fn quadratic_relation_is_differentiated_exactly() {
        let k: Vec<f64> = (1..=10).map(|i| i as f64).collect();
        let c_p = k.clone(); // omega = k^2
        let g = group_velocity(&DispersionCurve::from_phase_velocity(ModeLabel::S0, k.clone(), c_p)).unwrap();
        let cg = g.c_g.unwrap();
        for i in 0..10 {
            assert!((cg[i] - 2.0 * k[i]).abs() < 1e-12, "i = {i}");
        }
        // non-uniform spacing as well
        let k = vec![1.0, 1.5, 2.7, 3.0, 4.9];
        let g = group_velocity(&DispersionCurve::from_phase_velocity(ModeLabel::A0, k.clone(), k.clone())).unwrap();
        for (v, k) in g.c_g.unwrap().iter().zip(&k) {
            assert!((v - 2.0 * k).abs() < 1e-12);
        }
    }

    #[test]
    fn group_velocity_needs_three_points() {
        let c = DispersionCurve::from_phase_velocity(ModeLabel::A0, vec![1.0, 2.0], vec![1.0, 1.0]);
        assert_eq!(group_velocity(&c), Err(SolverError::TooFewPoints(2)));
    }

    #[test]
    fn phase_velocity_ratio_identity() {
        let c = DispersionCurve::from_phase_velocity(ModeLabel::A0, vec![3.0, 7.0], vec![1234.5, 2001.25]);
        for i in 0..2 {
            assert_eq!(c.c_p[i], c.omega[i] / c.k[i]);
        }
    }

    #[test]
    fn single_point_grid() {
        let t = trace_curves(&baseline(), &plate(), &[100.0], 8, false).unwrap();
        assert_eq!(t.a0.len(), 1);
        assert_eq!(t.s0.len(), 1);
        assert!(t.a0.c_g.is_none());
        assert!(t.a0.c_p[0] < t.s0.c_p[0]);
    }

    #[test]
    fn grid_validation() {
        assert!(trace_curves(&baseline(), &plate(), &[], 8, false).is_err());
        assert!(trace_curves(&baseline(), &plate(), &[2.0, 1.0], 8, false).is_err());
        assert!(trace_curves(&baseline(), &plate(), &[0.0, 1.0], 8, false).is_err());
        assert!(log_grid(2.0, 1.0, 5).is_err());
        let g = log_grid(1.0, 100.0, 3).unwrap();
        assert!((g[1] - 10.0).abs() < 1e-12 && g[2] == 100.0);
    }

    #[test]
    fn a0_is_slower_and_both_disperse_sensibly() {
        let grid = log_grid(20.0, 800.0, 40).unwrap();
        let t = trace_curves(&baseline(), &plate(), &grid, 12, false).unwrap();
        assert!(t.excluded.is_empty());
        for i in 0..t.a0.len() {
            assert!(t.a0.c_p[i] < t.s0.c_p[i]);
        }
        // A0 phase velocity rises from zero with frequency
        assert!(t.a0.c_p.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn wavenumber_inverts_omega() {
        let model = ForwardModel::new(12).unwrap();
        for mode in ModeLabel::BOTH {
            let w = 2.0 * PI * 150e3;
            let k = model.wavenumber(&baseline(), &plate(), mode, w).unwrap();
            let back = model.omega(&baseline(), &plate(), mode, k).unwrap().unwrap();
            assert!((back - w).abs() < 1e-10 * w, "{mode}");
        }
    }

    #[test]
    fn fh_conversion_roundtrip() {
        let p = plate();
        let w = fh_to_omega(4.098, &p);
        assert!((omega_to_fh(w, &p) - 4.098).abs() < 1e-12);
        // 4.098 MHz mm on a 16 mm plate is 256.1 kHz
        assert!((w / (2.0 * PI) - 256_125.0).abs() < 1e-6);
    }

    #[test]
    fn zero_perturbation_is_identity() {
        let grid = log_grid(30.0, 500.0, 12).unwrap();
        let entries = sensitivity_sweep(&baseline(), &plate(), &grid, 0.0, 8).unwrap();
        assert_eq!(entries.len(), 5);
        for e in &entries {
            assert_eq!(e.minus, e.base);
            assert_eq!(e.plus, e.base);
            assert_eq!(e.max_shift(ModeLabel::A0), 0.0);
        }
        assert!(sensitivity_sweep(&baseline(), &plate(), &grid, 1.0, 8).is_err());
    }

    #[test]
    fn param_names_parse() {
        for p in MaterialParam::ALL {
            assert_eq!(MaterialParam::parse(p.name()), Some(p));
        }
        assert_eq!(MaterialParam::parse("C13"), Some(MaterialParam::C13));
        assert_eq!(MaterialParam::parse("c66"), None);
        assert_eq!(ModeLabel::parse("S0"), Some(ModeLabel::S0));
    }
}
