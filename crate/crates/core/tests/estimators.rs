use gass_cvar::gass::{gradient_estimate, normalized_weights, sample_variance_matrix, weighted_suffstat_mean};
use gass_cvar::sampling::{sufficient_statistics, SamplingParams};
use gass_cvar::StreamSeed;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, ToPrimitive, Zero};
use rand::Rng;

/// `(1/(N-1)) Σ Γ Γᵀ - (1/(N² - N)) (Σ Γ)(Σ Γ)ᵀ` in exact rational arithmetic.
fn exact_variance_matrix(stats: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = stats.len();
    let dim = stats[0].len();
    let q: Vec<Vec<BigRational>> = stats
        .iter()
        .map(|s| s.iter().map(|v| BigRational::from_f64(*v).unwrap()).collect())
        .collect();
    let nn = BigRational::from_integer(BigInt::from(n));
    let one = BigRational::from_integer(BigInt::from(1));
    let mut sum = vec![BigRational::zero(); dim];
    for s in &q {
        for (acc, v) in sum.iter_mut().zip(s) {
            *acc += v;
        }
    }
    let mut out = vec![vec![0.0; dim]; dim];
    for a in 0..dim {
        for b in 0..dim {
            let mut outer = BigRational::zero();
            for s in &q {
                outer += &s[a] * &s[b];
            }
            let v = outer / (&nn - &one) - &sum[a] * &sum[b] / (&nn * &nn - &nn);
            out[a][b] = v.to_f64().unwrap();
        }
    }
    out
}

#[test]
fn variance_matrix_matches_exact_rational_formula() {
    let mut rng = StreamSeed::from_u64(11).rng();
    for n in 2..=5 {
        for _ in 0..20 {
            let d = rng.random_range(1..=3);
            let stats: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    let x: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
                    sufficient_statistics(&x).unwrap()
                })
                .collect();
            let got = sample_variance_matrix(&stats).unwrap();
            let want = exact_variance_matrix(&stats);
            for a in 0..2 * d {
                for b in 0..2 * d {
                    let scale = want[a][b].abs().max(1.0);
                    assert!(
                        (got[(a, b)] - want[a][b]).abs() <= 1e-12 * scale,
                        "n={n} ({a},{b}): {} vs {}",
                        got[(a, b)],
                        want[a][b]
                    );
                }
            }
        }
    }
}

#[test]
fn variance_matrix_of_standard_normal_statistics() {
    // Γ(X) = (X, X²) with X ~ N(0,1) has covariance [[1, 0], [0, 2]].
    let n = 200_000;
    let p = SamplingParams::new(vec![0.0], vec![1.0]).unwrap();
    let mut rng = StreamSeed::from_u64(5).rng();
    let stats: Vec<Vec<f64>> = p
        .sample(n, &mut rng)
        .iter()
        .map(|x| sufficient_statistics(x).unwrap())
        .collect();
    let v = sample_variance_matrix(&stats).unwrap();
    // standard errors of the covariance entries: sqrt(Var(XX)/n) etc.
    let se = [(2.0 / n as f64).sqrt(), (6.0 / n as f64).sqrt(), (96.0 / n as f64).sqrt()];
    assert!((v[(0, 0)] - 1.0).abs() < 4.0 * se[0], "{}", v[(0, 0)]);
    assert!(v[(0, 1)].abs() < 4.0 * se[1], "{}", v[(0, 1)]);
    assert_eq!(v[(0, 1)], v[(1, 0)]);
    assert!((v[(1, 1)] - 2.0).abs() < 4.0 * se[2], "{}", v[(1, 1)]);
}

#[test]
fn gradient_is_unbiased_under_constant_shape() {
    let p = SamplingParams::new(vec![1.5, -2.0], vec![0.5, 3.0]).unwrap();
    let analytic = p.expected_sufficient_statistics();
    let reps = 200;
    let n = 50;
    let mut grads = Vec::with_capacity(reps);
    for r in 0..reps {
        let mut rng = StreamSeed::from_u64(99).child(r as u64).rng();
        let stats: Vec<Vec<f64>> = p
            .sample(n, &mut rng)
            .iter()
            .map(|x| sufficient_statistics(x).unwrap())
            .collect();
        let w = normalized_weights(&vec![0.7; n]).unwrap();
        let mean = weighted_suffstat_mean(&w, &stats).unwrap();
        grads.push(gradient_estimate(&mean, &analytic).unwrap());
    }
    let dim = analytic.len();
    let mut norm2 = 0.0;
    let mut se2 = 0.0;
    for j in 0..dim {
        let m = grads.iter().map(|g| g[j]).sum::<f64>() / reps as f64;
        let var = grads.iter().map(|g| (g[j] - m).powi(2)).sum::<f64>() / (reps - 1) as f64;
        norm2 += m * m;
        se2 += var / reps as f64;
    }
    assert!(norm2.sqrt() <= 4.0 * se2.sqrt(), "{} vs {}", norm2.sqrt(), se2.sqrt());
}

#[test]
fn regularized_variance_matrix_is_positive_definite() {
    let mut rng = StreamSeed::from_u64(3).rng();
    for eps in [1e-6, 1e-3, 1.0] {
        for _ in 0..50 {
            let d = rng.random_range(1..=5);
            // include rank-deficient cases with fewer vectors than statistics
            let n = rng.random_range(2..=4 * d);
            let stats: Vec<Vec<f64>> = (0..n)
                .map(|_| {
                    let x: Vec<f64> = (0..d).map(|_| rng.random_range(-3.0..3.0)).collect();
                    sufficient_statistics(&x).unwrap()
                })
                .collect();
            let v = sample_variance_matrix(&stats).unwrap();
            let reg = &v + nalgebra::DMatrix::<f64>::identity(2 * d, 2 * d) * eps;
            let min = reg.symmetric_eigen().eigenvalues.min();
            assert!(min >= eps - 1e-10, "eps={eps} n={n} d={d}: {min}");
        }
    }
}
