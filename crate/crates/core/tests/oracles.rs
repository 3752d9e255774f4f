mod common;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use retrowpt_core::eigenbeam::{beam_modes, decompose_input, efficiency, weighted_efficiency};
use retrowpt_core::experiment::{
    alpha_factor, coefficient_of_determination, fit_regression, fixed_slope_fit, load_table2,
    regression_points,
};
use retrowpt_core::{CMatrix, C64};

fn singular_values_sq(s21: &CMatrix) -> Vec<f64> {
    let m = DMatrix::from_fn(s21.rows(), s21.cols(), |i, j| s21[(i, j)]);
    let mut sv: Vec<f64> = m
        .svd(false, false)
        .singular_values
        .iter()
        .map(|s| s * s)
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

#[test]
fn eigenvalues_match_power_iteration() {
    for seed in 0..25 {
        let (_, _, s21) = common::channel(seed, 12);
        let modes = beam_modes(&s21).unwrap();
        let oracle = common::power_iteration_eigenvalues(&s21.gram());
        for (xi, o) in modes.eigenvalues.iter().zip(&oracle) {
            assert!((xi - o).abs() <= 1e-9, "seed {seed}: {xi} vs {o}");
        }
    }
}

#[test]
fn eigenvalues_match_singular_values() {
    for seed in 100..140 {
        let (_, _, s21) = common::channel(seed, 12);
        let modes = beam_modes(&s21).unwrap();
        let sv = singular_values_sq(&s21);
        for (i, xi) in modes.eigenvalues.iter().enumerate() {
            let expected = sv.get(i).copied().unwrap_or(0.0);
            assert!(
                (xi - expected).abs() <= 1e-12,
                "seed {seed} mode {i}: {xi} vs {expected}"
            );
        }
        for (i, xi) in modes.rx_eigenvalues.iter().enumerate() {
            let expected = sv.get(i).copied().unwrap_or(0.0);
            assert!((xi - expected).abs() <= 1e-12, "seed {seed} rx mode {i}");
        }
    }
}

#[test]
fn modes_are_orthonormal_eigenvectors() {
    for seed in 200..240 {
        let (_, _, s21) = common::channel(seed, 12);
        let modes = beam_modes(&s21).unwrap();
        let gram = s21.gram();
        for (i, a) in modes.tx_modes.iter().enumerate() {
            for (j, b) in modes.tx_modes.iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((a.dot(b) - C64::new(expected, 0.0)).norm() <= 1e-10);
            }
            let residual = gram
                .mul_vec(a)
                .unwrap()
                .axpy(C64::new(-modes.eigenvalues[i], 0.0), a);
            assert!(residual.norm() <= 1e-10);
        }
        let rx_op = s21.matmul(&s21.adjoint()).unwrap().conj();
        for (b, xi) in modes.rx_modes.iter().zip(&modes.rx_eigenvalues) {
            let residual = rx_op.mul_vec(b).unwrap().axpy(C64::new(-xi, 0.0), b);
            assert!(residual.norm() <= 1e-10);
        }
    }
}

#[test]
fn efficiency_recomposes_from_modes() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for seed in 300..400 {
        let (_, _, s21) = common::channel(seed, 12);
        let modes = beam_modes(&s21).unwrap();
        let v = common::random_vector(&mut rng, s21.cols());
        let direct = efficiency(&s21, &v).unwrap();
        let weights = decompose_input(&modes, &v).unwrap();
        let recomposed = weighted_efficiency(&weights, &modes.eigenvalues).unwrap();
        assert!((direct - recomposed).abs() <= 1e-10, "seed {seed}");
        assert!(
            modes
                .eigenvalues
                .iter()
                .all(|&xi| (0.0..=1.0 + 1e-12).contains(&xi)),
            "{:?}",
            modes.eigenvalues
        );
    }
}

#[test]
fn alpha_matches_brute_force_quadratic_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let s12 = common::random_matrix(&mut rng, 3, 4);
        let s13 = common::random_matrix(&mut rng, 5, 4);
        let v = common::random_vector(&mut rng, 4);
        let mut num = C64::new(0.0, 0.0);
        for block in [&s12, &s13] {
            let g = block.adjoint().matmul(block).unwrap();
            for i in 0..4 {
                for j in 0..4 {
                    num += v[i].conj() * g[(i, j)] * v[j];
                }
            }
        }
        let den: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let alpha = alpha_factor(&v, &s12, &s13).unwrap();
        assert!((alpha - num.re / den).abs() <= 1e-12);
    }
}

#[test]
fn table2_regression_reproduces_reported_fit() {
    let cases = load_table2().unwrap();
    let points = regression_points(&cases);
    let free = fit_regression(&points).unwrap();
    assert!((free.slope - -0.9266).abs() <= 0.01, "{free:?}");
    assert!((free.intercept_db - 6.46).abs() <= 0.15);
    assert!((free.r_squared - 0.8236).abs() <= 0.01);
    assert_eq!(free.n_points, 30);

    let fixed = fixed_slope_fit(&points).unwrap();
    assert!((fixed.intercept_db - 7.32).abs() <= 0.05, "{fixed:?}");
    assert!((fixed.r_squared - 0.8176).abs() <= 0.01);
    assert!(free.r_squared >= fixed.r_squared);

    let mean_loss = cases.iter().map(|c| c.est_loss_db).sum::<f64>() / 30.0;
    assert!((fixed.intercept_db - mean_loss).abs() <= 0.01);

    let at_reported = coefficient_of_determination(&points, -0.9266, 6.46).unwrap();
    assert!((at_reported - 0.8236).abs() <= 0.01);
}

#[test]
fn ols_r_squared_equals_squared_correlation() {
    let cases = load_table2().unwrap();
    let points = regression_points(&cases);
    let fit = fit_regression(&points).unwrap();
    let n = points.len() as f64;
    let gm = points.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|(g, y)| (g - gm) * (y - ym)).sum();
    let sxx: f64 = points.iter().map(|(g, _)| (g - gm).powi(2)).sum();
    let syy: f64 = points.iter().map(|(_, y)| (y - ym).powi(2)).sum();
    assert!((fit.r_squared - sxy * sxy / (sxx * syy)).abs() <= 1e-12);
}
