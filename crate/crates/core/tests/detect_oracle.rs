use proptest::prelude::*;
use subred::detect::{
    ensemble_sampler, estimate_error, t_search, tau_sum, Detector, Ensemble, MaxTest, SearchTest, SumTest,
};
use subred::oracle::{
    chi2_mixture_exact, diag_support_law, it_impossibility_margin, tv_chain_bound, tv_exact, tv_plugin, FiniteLaw,
};
use subred::pairs::{ComputablePair, PairGrid};
use subred::rng::stream_rng;
use subred::sampler::{sample_submatrix, MatrixSample};
use subred::stats::{hypergeometric_overlap_pmf, normal_cdf, normal_sf};

fn sum_error(n: usize, k: usize, pair: ComputablePair, trials: usize, seed: u64) -> subred::detect::DetectorReport {
    let null = ensemble_sampler(Ensemble::Ssd, n, None, pair).unwrap();
    let planted = ensemble_sampler(Ensemble::Ssd, n, Some(k), pair).unwrap();
    estimate_error(&SumTest::new(pair, n, k).unwrap(), &null, &planted, trials, seed).unwrap()
}

#[test]
fn sum_test_matches_gaussian_approximation() {
    // skl = 10 n^2 / k^4 at n=60, k=30; the midpoint threshold errs with
    // probability about 2 Phibar(k^2 mu / 2n) = 0.114.
    let (n, k) = (60usize, 30usize);
    let skl = 10.0 * (n * n) as f64 / (k as f64).powi(4);
    let pair = ComputablePair::gaussian_with_skl(skl).unwrap();
    let mu = skl.sqrt();
    let oracle = 2.0 * normal_sf((k * k) as f64 * mu / (2.0 * n as f64));
    let r = sum_error(n, k, pair, 400, 60);
    assert!((r.total - oracle).abs() <= 4.0 * r.stderr, "total={} oracle={oracle} se={}", r.total, r.stderr);
}

#[test]
fn max_test_power() {
    let (n, k) = (50usize, 3usize);
    let ln = (n as f64).ln();
    let run = |skl: f64| {
        let pair = ComputablePair::gaussian_with_skl(skl).unwrap();
        let null = ensemble_sampler(Ensemble::Asd, n, None, pair).unwrap();
        let planted = ensemble_sampler(Ensemble::Asd, n, Some(k), pair).unwrap();
        estimate_error(&MaxTest::new(pair).unwrap(), &null, &planted, 400, 50).unwrap()
    };
    // E_Q(0) = skl / 8 must beat log n^2 for the zero threshold to control type I.
    let strong = run(24.0 * ln);
    assert!(strong.total <= 0.1, "{strong:?}");
    let weak = run(8.0 * ln);
    assert!(weak.type1 >= 0.9, "{weak:?}");
}

#[test]
fn search_on_all_ones_block() {
    let pair = ComputablePair::bernoulli(1.0, 0.3).unwrap();
    let grid = PairGrid::homogeneous(10, pair).unwrap();
    let mut rng = stream_rng(12, &[]);
    let m = sample_submatrix(10, Some(2), &grid, &mut rng).unwrap();
    let t = t_search(&m, &pair, 2).unwrap();
    assert!((t - (1.0f64 / 0.3).ln()).abs() < 1e-12);
    assert!(SearchTest::new(pair, 2).unwrap().decide(&m).unwrap().reject_null);
}

struct Coin;

impl Detector for Coin {
    fn name(&self) -> &'static str {
        "coin"
    }

    fn threshold(&self) -> f64 {
        0.0
    }

    fn statistic(&self, m: &MatrixSample) -> subred::Result<f64> {
        Ok(m.value(0, 0))
    }
}

#[test]
fn blind_test_has_unit_error() {
    let pair = ComputablePair::gaussian(1e-9).unwrap();
    let null = ensemble_sampler(Ensemble::Ssd, 4, None, pair).unwrap();
    let planted = ensemble_sampler(Ensemble::Ssd, 4, Some(2), pair).unwrap();
    let r = estimate_error(&Coin, &null, &planted, 2000, 3).unwrap();
    assert!((r.total - 1.0).abs() <= 5.0 * r.stderr, "{r:?}");
}

#[test]
fn sum_power_is_monotone_in_signal() {
    let (n, k) = (60usize, 20usize);
    let base = (n * n) as f64 / (k as f64).powi(4);
    let mut last: Option<subred::detect::DetectorReport> = None;
    for mult in [0.5, 2.0, 8.0, 32.0, 128.0] {
        let r = sum_error(n, k, ComputablePair::gaussian_with_skl(mult * base).unwrap(), 300, 5);
        if let Some(prev) = &last {
            assert!(r.total <= prev.total + 2.0 * (r.stderr + prev.stderr), "{prev:?} -> {r:?}");
        }
        last = Some(r);
    }
}

proptest! {
    #[test]
    fn tau_sum_between_the_means(n in 1usize..500, f in 0.0f64..1.0, mu in 0.01f64..3.0) {
        let k = ((f * n as f64).ceil() as usize).clamp(1, n);
        let pair = ComputablePair::gaussian(mu).unwrap();
        let t = tau_sum(n, k, &pair).unwrap();
        prop_assert!(t >= -pair.kl_qp() - 1e-12 && t <= pair.kl_pq() + 1e-12);
    }
}

#[test]
fn plugin_tv_examples() {
    let mut rng = stream_rng(13, &[]);
    let draws = 1_000_000;
    let a: Vec<f64> = (0..draws).map(|_| f64::from(rand::Rng::random::<f64>(&mut rng) < 0.6)).collect();
    let b: Vec<f64> = (0..draws).map(|_| f64::from(rand::Rng::random::<f64>(&mut rng) < 0.3)).collect();
    let (tv, _) = tv_plugin(&a, &b, 16, 1).unwrap();
    assert!((tv - 0.3).abs() <= 0.002, "{tv}");
    let g = ComputablePair::gaussian(1.0).unwrap();
    let x: Vec<f64> = (0..draws).map(|_| g.sample_null(&mut rng)).collect();
    let y: Vec<f64> = (0..draws).map(|_| g.sample_alt(&mut rng)).collect();
    let (tv, _) = tv_plugin(&x, &y, 64, 2).unwrap();
    let closed = 2.0 * normal_cdf(0.5) - 1.0;
    assert!((tv - closed).abs() <= 0.01, "{tv} vs {closed}");
    let (same, _) = tv_plugin(&x, &x, 64, 3).unwrap();
    assert_eq!(same, 0.0);
}

#[test]
fn chain_bound_dominates_composed_pipeline() {
    // Two steps over {0, 1, 2}; the second pipeline perturbs each kernel.
    let k1 = [[0.7, 0.2, 0.1], [0.1, 0.8, 0.1], [0.3, 0.3, 0.4]];
    let k1p = [[0.6, 0.3, 0.1], [0.1, 0.75, 0.15], [0.3, 0.35, 0.35]];
    let k2 = [[0.5, 0.5, 0.0], [0.2, 0.2, 0.6], [0.0, 0.1, 0.9]];
    let k2p = [[0.45, 0.5, 0.05], [0.2, 0.25, 0.55], [0.05, 0.1, 0.85]];
    let step = |law: &[f64; 3], k: &[[f64; 3]; 3]| {
        let mut out = [0.0; 3];
        for (x, &w) in law.iter().enumerate() {
            for y in 0..3 {
                out[y] += w * k[x][y];
            }
        }
        out
    };
    let as_law = |v: [f64; 3]| FiniteLaw::new(v.iter().enumerate().map(|(i, &p)| (i, p)).collect()).unwrap();
    let worst = |a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]| {
        (0..3).map(|x| tv_exact(&as_law(a[x]), &as_law(b[x]))).fold(0.0, f64::max)
    };
    let start = [0.5, 0.3, 0.2];
    let end = step(&step(&start, &k1), &k2);
    let end_p = step(&step(&start, &k1p), &k2p);
    let actual = tv_exact(&as_law(end), &as_law(end_p));
    let bound = tv_chain_bound(&[worst(&k1, &k1p), worst(&k2, &k2p)]).unwrap();
    assert!(actual <= bound + 1e-15, "{actual} > {bound}");
    assert_eq!(tv_chain_bound(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
    assert!((tv_chain_bound(&[0.2, 0.3]).unwrap() - 0.5).abs() < 1e-15);
}

#[test]
fn diag_support_degenerate_cases() {
    let (n, k, big_n, q) = (5, 2, 12, 0.4);
    let laws = diag_support_law(n, k, big_n, 1.0, q).unwrap();
    let bin = subred::stats::binomial_pmf(big_n, q);
    for total in 0..=big_n {
        let want: f64 = (0..=big_n).filter(|&t3| n + t3.saturating_sub(n) == total).map(|t3| bin[t3]).sum();
        assert!((laws.null_sum.prob(&total) - want).abs() < 1e-12);
    }
    let full = diag_support_law(n, k, big_n, 0.7, 1.0).unwrap();
    assert!((full.null_sum.prob(&big_n) - 1.0).abs() < 1e-12);
}

#[test]
fn chi2_mixture_examples() {
    assert_eq!(chi2_mixture_exact(5, 0, 0.3).unwrap(), 0.0);
    let c: f64 = 0.37;
    let want = 1.0 / 6.0 + 4.0 / 6.0 * (1.0 + c) + 1.0 / 6.0 * (1.0 + c).powi(4) - 1.0;
    assert!((chi2_mixture_exact(4, 2, c).unwrap() - want).abs() < 1e-14);
}

#[test]
fn hypergeometric_pmf_normalizes() {
    for (n, k) in [(10, 3), (500, 40), (10_000, 100), (10_000, 5000)] {
        let (_, pmf) = hypergeometric_overlap_pmf(n, k);
        assert!((pmf.iter().sum::<f64>() - 1.0).abs() <= 1e-12, "n={n} k={k}");
    }
}

#[test]
fn it_margin_examples() {
    let (n, k) = (100, 10);
    let probe = it_impossibility_margin(n, k, &ComputablePair::gaussian(1e-3).unwrap()).unwrap();
    let pair_at = |ratio: f64| {
        // Gaussian chi2 = e^{mu^2} - 1.
        let mu = (ratio * probe.rhs).ln_1p().sqrt();
        it_impossibility_margin(n, k, &ComputablePair::gaussian(mu).unwrap()).unwrap()
    };
    let inside = pair_at(0.5);
    assert!(inside.satisfied && inside.tv_bound.unwrap() < 1.0, "{inside:?}");
    let outside = pair_at(2.0);
    assert!(!outside.satisfied && outside.tv_bound.is_none());
}
