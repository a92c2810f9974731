use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simplex_reduce::geometry::{
    binomial_process, poisson_process, proximity_graph, rips_complex, RipsParams,
};
use simplex_reduce::{Metric, PointConfiguration, TorusSpec};

// 0.99 quantile of chi-squared with 15 degrees of freedom
const CHI2_15_99: f64 = 30.578;

#[test]
fn binomial_points_are_uniform() {
    let torus = TorusSpec::new(2, 1.0).unwrap();
    for seed in [1, 2, 3] {
        let c = binomial_process(torus, 1000, seed);
        let mut cells = [0f64; 16];
        for p in &c.points {
            cells[(p[0] * 4.0) as usize * 4 + (p[1] * 4.0) as usize] += 1.0;
        }
        let expected = 1000.0 / 16.0;
        let chi2: f64 = cells.iter().map(|o| (o - expected).powi(2) / expected).sum();
        assert!(chi2 < CHI2_15_99, "seed {seed}: chi2 = {chi2}");
    }
}

#[test]
fn poisson_counts_have_the_right_mean_and_independent_boxes() {
    let torus = TorusSpec::new(2, 2.0).unwrap();
    let trials = 10_000;
    let mut totals = Vec::with_capacity(trials);
    let mut left = Vec::with_capacity(trials);
    let mut right = Vec::with_capacity(trials);
    for seed in 0..trials as u64 {
        let c = poisson_process(torus, 1.0, seed).unwrap();
        totals.push(c.len() as f64);
        left.push(c.points.iter().filter(|p| p[0] < 1.0).count() as f64);
        right.push(c.points.iter().filter(|p| p[0] >= 1.0).count() as f64);
    }
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    let m = mean(&totals);
    assert!((3.8..=4.2).contains(&m), "mean {m}");
    let (ml, mr) = (mean(&left), mean(&right));
    let cov = left.iter().zip(&right).map(|(a, b)| (a - ml) * (b - mr)).sum::<f64>() / (trials as f64 - 1.0);
    // each half has variance 2, so the covariance estimate has standard error about 2/sqrt(trials)
    assert!(cov.abs() < 4.0 * 2.0 / (trials as f64).sqrt(), "cov {cov}");
}

#[test]
fn metric_axioms() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for metric in [Metric::Uniform, Metric::Euclidean] {
        for periodic in [true, false] {
            let mut t = TorusSpec::new(3, 1.7).unwrap().with_metric(metric);
            t.periodic = periodic;
            for _ in 0..10_000 {
                let p: Vec<Vec<f64>> = (0..3).map(|_| (0..3).map(|_| rng.random::<f64>() * 1.7).collect()).collect();
                let (x, y, z) = (&p[0], &p[1], &p[2]);
                assert_eq!(t.distance(x, x), 0.0);
                assert_eq!(t.distance(x, y), t.distance(y, x));
                assert!(t.distance(x, y) > 0.0);
                assert!(t.distance(x, z) <= t.distance(x, y) + t.distance(y, z) + 1e-12);
            }
        }
    }
}

fn brute_cliques(c: &PointConfiguration, eps: f64) -> BTreeSet<Vec<u32>> {
    let n = c.len();
    (1u32..(1 << n))
        .map(|mask| (0..n as u32).filter(|i| mask >> i & 1 == 1).collect::<Vec<u32>>())
        .filter(|vs| {
            vs.iter().enumerate().all(|(i, a)| {
                vs[i + 1..].iter().all(|b| c.torus.distance(&c.points[*a as usize], &c.points[*b as usize]) < eps)
            })
        })
        .collect()
}

fn dyadic_points(n: usize, d: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(0u32..1 << 20, d), n)
        .prop_map(|pts| pts.into_iter().map(|p| p.into_iter().map(|x| x as f64 / (1u32 << 20) as f64).collect()).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn rips_equals_brute_force_cliques(
        pts in dyadic_points(13, 2),
        eps in 0.1f64..0.5,
        euclid in any::<bool>(),
        periodic in any::<bool>(),
    ) {
        let mut torus = TorusSpec::new(2, 1.0).unwrap().with_metric(if euclid { Metric::Euclidean } else { Metric::Uniform });
        torus.periodic = periodic;
        let mut pts = pts;
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        let c = PointConfiguration::new(torus, pts).unwrap();
        let rips = rips_complex(&c, &RipsParams::new(eps)).unwrap();
        let got: BTreeSet<Vec<u32>> = rips.iter().map(|s| s.ids()).collect();
        prop_assert_eq!(got, brute_cliques(&c, eps));
        let graph = proximity_graph(&c, eps);
        let omega = rips.clique_number();
        prop_assert_eq!(graph.clique_number(), omega);
    }

    #[test]
    fn translation_invariance(pts in dyadic_points(25, 2), shift in prop::collection::vec(0u32..1 << 20, 2), eps in 0.05f64..0.4) {
        let torus = TorusSpec::new(2, 1.0).unwrap();
        let moved: Vec<Vec<f64>> = pts
            .iter()
            .map(|p| p.iter().zip(&shift).map(|(x, s)| (x + *s as f64 / (1u32 << 20) as f64) % 1.0).collect())
            .collect();
        let a = rips_complex(&PointConfiguration::new(torus, pts).unwrap(), &RipsParams::new(eps)).unwrap();
        let b = rips_complex(&PointConfiguration::new(torus, moved).unwrap(), &RipsParams::new(eps)).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn five_mutually_close_points_form_a_four_simplex() {
    let torus = TorusSpec::new(2, 1.0).unwrap();
    let pts = (0..5).map(|i| vec![0.5 + 0.01 * i as f64, 0.5]).collect();
    let rips = rips_complex(&PointConfiguration::new(torus, pts).unwrap(), &RipsParams::new(0.1)).unwrap();
    assert_eq!(rips.clique_number(), 5);
    assert_eq!(rips.s_counts(), vec![5, 10, 10, 5, 1]);
}
