mod support;

use lambid_core::curves::{log_grid, trace_curves, ForwardModel};
use lambid_core::eigen::{solve_full, solve_smallest};
use lambid_core::legendre::{nt1, nt2, NtTable};
use lambid_core::nalgebra::{Complex, DMatrix};
use lambid_core::system::{assemble_system, realify};
use lambid_core::{ElasticConstants, PlateSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::oracles::*;

#[test]
fn gauss_legendre_integrates_polynomials() {
    let rule = gauss_legendre(24);
    let s: f64 = rule.iter().map(|(x, w)| w * x.powi(10)).sum();
    assert!((s - 2.0 / 11.0).abs() < 1e-14);
    assert!((rule.iter().map(|r| r.1).sum::<f64>() - 2.0).abs() < 1e-14);
}

#[test]
fn basis_is_orthonormal() {
    for kh in [0.1, 1.0, 50.0] {
        for m in 0..=12 {
            for j in 0..=12 {
                let want = if m == j { 1.0 } else { 0.0 };
                assert!((nt1(m, j, 0, kh).unwrap() - want).abs() < 1e-10, "m={m} j={j} kh={kh}");
            }
        }
    }
}

fn close(got: f64, want: f64, scale: f64) -> bool {
    (got - want).abs() <= 1e-9 * want.abs().max(scale)
}

#[test]
fn nt_integrals_match_quadrature() {
    let table = NtTable::new(8);
    for kh in [0.1, 1.0, 7.3, 50.0] {
        for n in 0..=2 {
            // entries that vanish by parity are compared against the table's size
            let scale = (0..=8)
                .flat_map(|m| (0..=8).map(move |j| (m, j)))
                .map(|(m, j)| nt1_quadrature(m, j, n, kh).abs().max(nt2_boundary(m, j, n, kh).abs()))
                .fold(0.0, f64::max);
            for m in 0..=8 {
                for j in 0..=8 {
                    let (w1, w2) = (nt1_quadrature(m, j, n, kh), nt2_boundary(m, j, n, kh));
                    let g1 = nt1(m, j, n, kh).unwrap();
                    let g2 = nt2(m, j, n, kh).unwrap();
                    assert!(close(g1, w1, scale), "nt1 m={m} j={j} n={n} kh={kh}: {g1} vs {w1}");
                    assert!(close(g2, w2, scale), "nt2 m={m} j={j} n={n} kh={kh}: {g2} vs {w2}");
                    assert!(close(table.nt1(m, j, n, kh), w1, scale));
                    assert!(close(table.nt2(m, j, n, kh), w2, scale));
                }
            }
        }
    }
}

#[test]
fn realified_spectrum_matches_complex_blocks() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for draw in 0..100 {
        let theta = random_theta(&mut rng);
        let kh = log_uniform(&mut rng, 0.1, 20.0);
        let order = rng.random_range(1..=6);
        let sys = assemble_system(&theta, kh, order).unwrap();
        let want = complex_eigenvalues(complex_block(&sys));
        let got: Vec<Complex<f64>> = solve_full(&realify(&sys), &sys.full_mass()).unwrap().into_iter().map(|l| Complex::new(l, 0.0)).collect();
        let d = multiset_distance(&got, &want);
        assert!(d < 1e-9, "draw {draw}: distance {d:e}");
    }
}

#[test]
fn inverse_iteration_matches_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    for draw in 0..100 {
        let theta = random_theta(&mut rng);
        let kh = log_uniform(&mut rng, 0.1, 10.0);
        let a = realify(&assemble_system(&theta, kh, 8).unwrap());
        let mut dense = solve_full(&a, &DMatrix::identity(a.nrows(), a.nrows())).unwrap();
        dense.sort_by(|x, y| x.abs().total_cmp(&y.abs()));
        let got = solve_smallest(&a, 2).unwrap_or_else(|e| panic!("draw {draw}: {e:?}"));
        for (g, w) in got.iter().zip(&dense) {
            assert!((g - w).abs() <= 1e-8 * w.abs(), "draw {draw}: {g} vs {w}");
        }
        checked += 1;
    }
    assert_eq!(checked, 100);
}

#[test]
fn only_stiffness_to_density_ratio_matters() {
    let theta = ElasticConstants::from_gpa(28.1, 7.8, 16.7, 8.2, 1200.0).unwrap();
    let model = ForwardModel::new(10).unwrap();
    for kh in [0.3, 2.0, 9.0] {
        let a = model.physical_modes(&theta, kh, 2).unwrap().phase_velocities();
        let b = model.physical_modes(&theta.scaled(2.7), kh, 2).unwrap().phase_velocities();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-11 * x);
        }
    }
}

#[test]
fn truncation_error_shrinks_with_order() {
    let theta = ElasticConstants::from_gpa(160.0, 6.5, 14.0, 7.0, 1200.0).unwrap();
    let plate = PlateSpec::from_mm(16.0).unwrap();
    let k = log_grid(5.0, 400.0, 40).unwrap();
    let curves: Vec<_> = [8, 10, 12, 14].iter().map(|&m| trace_curves(&theta, &plate, &k, m, false).unwrap()).collect();
    let changes: Vec<f64> = curves.windows(2).map(|w| w[0].max_relative_change(&w[1])).collect();
    assert!(changes.windows(2).all(|w| w[1] < w[0]), "{changes:?}");
}
