//! Eigenvalue solvers for the real block system.
//!
//! [`solve_full`] is the dense reference. [`solve_smallest`] runs inverse
//! power iteration (power iteration on `A^-1`) on a small block and
//! reports a [`Fallback`] whenever its answer cannot be trusted, so callers
//! can retry with the dense path. [`smallest_physical`] does exactly that.

#[cfg(not(feature = "std"))]
use num_traits::Float;
use alloc::vec::Vec;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::SolverError;
use crate::system::MASS_IDENTITY_TOL;

/// Relative change of successive Rayleigh quotients that counts as converged.
pub const POWER_TOL: f64 = 1e-12;
pub const POWER_MAX_ITER: usize = 500;
const EARLY_EXIT_AFTER: usize = 20;
/// Relative gap below which two eigenvalues are treated as degenerate.
pub const DEGENERATE_GAP: f64 = 1e-6;
// Loose gate on ||A v - lambda v||; exact ties are caught by the gap check.
const RESIDUAL_TOL: f64 = 1e-4;
const START_SEED: u64 = 0x4c50_455f_7374_6172;

/// Why inverse iteration handed over to the dense solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fallback {
    Singular,
    NotConverged,
    NearDegenerate,
    /// Fewer than the requested number of negative eigenvalues exist.
    TooFewPhysical,
    /// The block iteration assumes a symmetric operator.
    NonSymmetric,
}

/// Phase velocity from an eigenvalue `lambda = -c_p^2`. Non-negative
/// eigenvalues are non-physical and return `None`.
pub fn phase_velocity(lambda: f64) -> Option<f64> {
    if lambda < 0.0 {
        Some((-lambda).sqrt())
    } else {
        None
    }
}

fn is_identity(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    (m - DMatrix::<f64>::identity(n, n)).amax() <= MASS_IDENTITY_TOL * n as f64
}

fn symmetry_defect(a: &DMatrix<f64>) -> f64 {
    (a - a.transpose()).amax()
}

/// All eigenvalues of `A p = lambda M p`, ascending.
///
/// `M` within tolerance of the identity is skipped; otherwise the problem is
/// reduced to `M^-1 A`. A symmetric operator goes through the symmetric
/// QR algorithm, anything else through the real Schur form; a spectrum with a
/// non-negligible imaginary part is an error.
pub fn solve_full(a_hat: &DMatrix<f64>, m_mat: &DMatrix<f64>) -> Result<Vec<f64>, SolverError> {
    let n = a_hat.nrows();
    if a_hat.ncols() != n || m_mat.shape() != (n, n) {
        return Err(SolverError::Dimension(alloc::format!(
            "A is {:?}, M is {:?}",
            a_hat.shape(),
            m_mat.shape()
        )));
    }
    let op = if is_identity(m_mat) {
        a_hat.clone()
    } else {
        m_mat.clone().lu().solve(a_hat).ok_or(SolverError::SingularMass)?
    };
    let max_entry = op.amax();
    let no_conv = SolverError::NoConvergence { dim: n, max_entry };
    let mut values: Vec<f64> = if symmetry_defect(&op) <= 1e-12 * max_entry {
        let sym = (&op + op.transpose()) * 0.5;
        let eig = nalgebra::SymmetricEigen::try_new(sym.clone(), f64::EPSILON, 10_000).ok_or(no_conv)?;
        let top = eig.eigenvalues.amax();
        eig.eigenvalues
            .iter()
            .enumerate()
            .map(|(i, &l)| if l.abs() < REFINE_BELOW * top { refine(&sym, l, eig.eigenvectors.column(i).into_owned()) } else { l })
            .collect()
    } else {
        let schur = op.try_schur(f64::EPSILON, 10_000).ok_or(no_conv)?;
        let mut out = Vec::with_capacity(n);
        for z in schur.complex_eigenvalues().iter() {
            if z.im.abs() > 1e-8 * max_entry.max(z.re.abs()) {
                return Err(SolverError::NonRealSpectrum { re: z.re, im: z.im });
            }
            out.push(z.re);
        }
        out
    };
    values.sort_by(|a, b| a.total_cmp(b));
    Ok(values)
}

/// Eigenvalues this far below the spectral radius get refined; the dense
/// solver only resolves them to `eps * |A|` in absolute terms.
const REFINE_BELOW: f64 = 1e-4;

/// Two steps of inverse iteration shifted to `lambda`, started from its
/// dense eigenvector. The correction `1 / mu` is computed to full relative
/// precision even when `lambda` is tiny next to `|A|`.
fn refine(a: &DMatrix<f64>, lambda: f64, mut y: nalgebra::DVector<f64>) -> f64 {
    let n = a.nrows();
    let lu = (a - DMatrix::<f64>::identity(n, n) * lambda).lu();
    let mut mu = f64::INFINITY;
    for _ in 0..2 {
        let Some(z) = lu.solve(&y) else { return lambda };
        let nz = z.norm();
        if !nz.is_finite() || nz == 0.0 {
            return lambda;
        }
        mu = y.dot(&z);
        y = z / nz;
    }
    if mu.is_finite() && mu != 0.0 {
        lambda + 1.0 / mu
    } else {
        lambda
    }
}

/// Smallest-magnitude eigenpairs by subspace inverse iteration.
///
/// A block of `want + 1` vectors is pushed through `A^-1` and re-orthonormalized
/// each sweep, with a Rayleigh-Ritz step on the block. The extra guard vector
/// makes the `k`-th Ritz value converge like `|lambda_k / lambda_{want+2}|^2`
/// per sweep, so a close pair among the wanted values costs nothing extra.
/// With a block of one this is plain inverse power iteration.
struct InverseIteration<'a> {
    a: &'a DMatrix<f64>,
    lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    norm: f64,
}

impl<'a> InverseIteration<'a> {
    fn new(a: &'a DMatrix<f64>) -> Result<Self, Fallback> {
        let n = a.nrows();
        let norm = a.amax();
        if symmetry_defect(a) > 1e-12 * norm {
            return Err(Fallback::NonSymmetric);
        }
        let lu = a.clone().lu();
        let u = lu.u();
        let pivot_floor = f64::EPSILON * norm * n as f64;
        if norm == 0.0 || (0..n).any(|i| u[(i, i)].abs() <= pivot_floor) {
            return Err(Fallback::Singular);
        }
        Ok(Self { a, lu, norm })
    }

    /// The `want` smallest-magnitude eigenvalues of `A`, in increasing magnitude.
    fn smallest(&self, want: usize) -> Result<Vec<f64>, Fallback> {
        let n = self.a.nrows();
        let want = want.min(n);
        let block = (want + 1).min(n);
        let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
        let mut v = DMatrix::from_fn(n, block, |_, _| rng.random_range(-1.0..1.0)).qr().q();
        let mut mu_prev = alloc::vec![f64::INFINITY; want];
        let mut step_prev = f64::NAN;
        for iter in 0..POWER_MAX_ITER {
            let z = self.lu.solve(&v).expect("LU checked non-singular");
            if !z.iter().all(|x| x.is_finite()) {
                return Err(Fallback::Singular);
            }
            let h = v.transpose() * &z;
            let ritz = nalgebra::SymmetricEigen::new((&h + h.transpose()) * 0.5);
            let mut order: Vec<usize> = (0..block).collect();
            order.sort_by(|&i, &j| ritz.eigenvalues[j].abs().total_cmp(&ritz.eigenvalues[i].abs()));
            let mu: Vec<f64> = order[..want].iter().map(|&i| ritz.eigenvalues[i]).collect();
            let step = mu.iter().zip(&mu_prev).map(|(m, p)| (m - p).abs() / m.abs()).fold(0.0, f64::max);
            if step < POWER_TOL {
                let vectors = &v * &ritz.eigenvectors;
                return order[..want]
                    .iter()
                    .zip(&mu)
                    .map(|(&i, &m)| {
                        let lambda = 1.0 / m;
                        let y = vectors.column(i);
                        let residual = (self.a * y - y * lambda).norm();
                        if residual > RESIDUAL_TOL * lambda.abs() + 64.0 * f64::EPSILON * self.norm {
                            Err(Fallback::NearDegenerate)
                        } else {
                            Ok(lambda)
                        }
                    })
                    .collect();
            }
            // give up early when the observed contraction cannot reach the
            // tolerance within the iteration budget
            if iter >= EARLY_EXIT_AFTER && step_prev > 0.0 && step > 0.0 {
                let rate = step / step_prev;
                let needed = (POWER_TOL / step).ln() / rate.ln();
                if rate >= 1.0 || iter as f64 + needed > POWER_MAX_ITER as f64 {
                    return Err(Fallback::NotConverged);
                }
            }
            mu_prev = mu;
            step_prev = step;
            v = (z * &ritz.eigenvectors).qr().q();
        }
        Err(Fallback::NotConverged)
    }
}

fn check_gaps(values: &[f64]) -> Result<(), Fallback> {
    for w in values.windows(2) {
        if (w[0] - w[1]).abs() < DEGENERATE_GAP * w[0].abs().max(w[1].abs()) {
            return Err(Fallback::NearDegenerate);
        }
    }
    Ok(())
}

/// The `n_modes` smallest-magnitude eigenvalues of symmetric `a_hat` (mass
/// matrix taken as the identity), in increasing magnitude.
pub fn solve_smallest(a_hat: &DMatrix<f64>, n_modes: usize) -> Result<Vec<f64>, Fallback> {
    let values = InverseIteration::new(a_hat)?.smallest(n_modes)?;
    check_gaps(&values)?;
    Ok(values)
}

/// The `n_modes` smallest-magnitude negative eigenvalues. Non-negative
/// eigenvalues met on the way are skipped; the block grows until enough
/// negative ones turn up or it spans the whole space.
pub fn solve_smallest_physical(a_hat: &DMatrix<f64>, n_modes: usize) -> Result<Vec<f64>, Fallback> {
    physical_with_skips(a_hat, n_modes).map(|(p, _)| p)
}

fn physical_with_skips(a_hat: &DMatrix<f64>, n_modes: usize) -> Result<(Vec<f64>, usize), Fallback> {
    let it = InverseIteration::new(a_hat)?;
    let dim = a_hat.nrows();
    let mut want = n_modes.min(dim);
    loop {
        let all = it.smallest(want)?;
        let physical: Vec<f64> = all.iter().copied().filter(|l| *l < 0.0).take(n_modes).collect();
        if physical.len() == n_modes {
            let last = all.iter().position(|l| *l == physical[n_modes - 1]).expect("taken from all");
            check_gaps(&all[..=last])?;
            return Ok((physical, last + 1 - n_modes));
        }
        if want >= dim {
            return Err(Fallback::TooFewPhysical);
        }
        want = (want + 2).min(dim);
    }
}

/// Result of [`smallest_physical`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalModes {
    /// Negative eigenvalues in increasing magnitude; may hold fewer than requested.
    pub eigenvalues: Vec<f64>,
    /// Non-negative eigenvalues smaller in magnitude than the last one returned.
    pub skipped: usize,
    pub fallback: Option<Fallback>,
}

impl PhysicalModes {
    /// Phase velocities in increasing order.
    pub fn phase_velocities(&self) -> Vec<f64> {
        self.eigenvalues.iter().filter_map(|&l| phase_velocity(l)).collect()
    }
}

/// Smallest-magnitude physical eigenvalues: inverse iteration first, the
/// dense solver when it signals a fallback.
pub fn smallest_physical(a_hat: &DMatrix<f64>, m_mat: &DMatrix<f64>, n_modes: usize) -> Result<PhysicalModes, SolverError> {
    if is_identity(m_mat) {
        match physical_with_skips(a_hat, n_modes) {
            Ok((eigenvalues, skipped)) => {
                return Ok(PhysicalModes {
                    eigenvalues,
                    skipped,
                    fallback: None,
                })
            }
            Err(reason) => return dense_physical(a_hat, m_mat, n_modes, Some(reason)),
        }
    }
    dense_physical(a_hat, m_mat, n_modes, None)
}

fn dense_physical(a_hat: &DMatrix<f64>, m_mat: &DMatrix<f64>, n_modes: usize, reason: Option<Fallback>) -> Result<PhysicalModes, SolverError> {
    let all = solve_full(a_hat, m_mat)?;
    let mut neg: Vec<f64> = all.iter().copied().filter(|&l| l < 0.0).collect();
    neg.sort_by(|a, b| b.total_cmp(a));
    neg.truncate(n_modes);
    let bound = if neg.len() == n_modes { neg[n_modes - 1].abs() } else { f64::INFINITY };
    let skipped = all.iter().filter(|&&l| l >= 0.0 && l.abs() < bound).count();
    Ok(PhysicalModes {
        eigenvalues: neg,
        skipped,
        fallback: reason,
    })
}
