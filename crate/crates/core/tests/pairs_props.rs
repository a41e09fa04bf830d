use proptest::prelude::*;
use subred::pairs::{
    chernoff_exponent, chernoff_exponent_numeric, entrywise_counterexample, uc_membership, ComputablePair,
    ExponentQuery, Side, UcClass,
};
use subred::rng::stream_rng;

fn e(pair: &ComputablePair, side: Side, tau: f64) -> f64 {
    chernoff_exponent(pair, ExponentQuery { side, tau })
}

fn any_pair() -> impl Strategy<Value = ComputablePair> {
    prop_oneof![
        (0.05f64..3.0).prop_map(|mu| ComputablePair::gaussian(mu).unwrap()),
        (0.02f64..0.9, 0.05f64..0.95).prop_map(|(q, frac)| {
            let p = q + frac * (1.0 - q);
            ComputablePair::bernoulli(p.min(0.999), q).unwrap()
        }),
    ]
}

/// Adaptive Simpson on `[a, b]`.
fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    rec(f, a, b, fa, fm, fb, (b - a) / 6.0 * (fa + 4.0 * fm + fb), tol, 50)
}

#[test]
fn llr_examples() {
    let g = ComputablePair::gaussian(0.5).unwrap();
    assert!((g.llr(0.0).unwrap() + 0.125).abs() < 1e-15);
    let b = ComputablePair::bernoulli(0.6, 0.3).unwrap();
    assert!((b.llr(1.0).unwrap() - 0.693147).abs() < 1e-6);
    assert!((b.llr(0.0).unwrap() + 0.559616).abs() < 1e-6);
    assert!(b.llr(0.5).is_err());
}

#[test]
fn divergence_examples() {
    let g = ComputablePair::gaussian(0.5).unwrap();
    assert!((g.skl() - 0.25).abs() < 1e-15);
    let b = ComputablePair::bernoulli(0.6, 0.3).unwrap();
    assert!((b.chi2() - 0.09 / 0.21).abs() < 1e-12);
    let tiny = ComputablePair::gaussian(1e-6).unwrap();
    for d in [tiny.kl_pq(), tiny.kl_qp(), tiny.skl(), tiny.chi2()] {
        assert!(d >= 0.0 && d < 1e-11);
    }
}

#[test]
fn gaussian_chi2_matches_quadrature() {
    // chi2 = int phi(x - mu)^2 / phi(x) dx - 1, integrated over +-12 sd about mu.
    for mu in [0.1, 0.5, 1.0, 1.7] {
        let pair = ComputablePair::gaussian(mu).unwrap();
        let f = |x: f64| {
            let lp = -(x - mu) * (x - mu) / 2.0;
            let lq = -x * x / 2.0;
            (2.0 * lp - lq).exp() / (2.0 * std::f64::consts::PI).sqrt()
        };
        let chi2 = simpson(&f, 2.0 * mu - 12.0, 2.0 * mu + 12.0, 1e-12) - 1.0;
        assert!((chi2 - pair.chi2()).abs() < 1e-9 * pair.chi2().max(1.0), "mu={mu}: {chi2} vs {}", pair.chi2());
        assert!((pair.chi2() - 0.5 * (mu * mu as f64).exp_m1()).abs() > 1e-3 * pair.chi2());
    }
}

#[test]
fn likelihood_ratio_normalizes() {
    let mut rng = stream_rng(99, &[]);
    for pair in [ComputablePair::gaussian(0.4).unwrap(), ComputablePair::bernoulli(0.6, 0.3).unwrap()] {
        let draws = 1_000_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..draws {
            let w = pair.llr_unchecked(pair.sample_null(&mut rng)).exp();
            s += w;
            s2 += w * w;
        }
        let mean = s / draws as f64;
        let se = ((s2 / draws as f64 - mean * mean) / draws as f64).sqrt();
        assert!((mean - 1.0).abs() <= 5.0 * se, "{pair}: {mean} +- {se}");
    }
}

#[test]
fn mgf_examples() {
    for pair in [ComputablePair::gaussian(0.7).unwrap(), ComputablePair::bernoulli(0.6, 0.3).unwrap()] {
        assert!(pair.log_mgf(Side::UnderQ, 0.0).abs() < 1e-15);
        assert!(pair.log_mgf(Side::UnderQ, 1.0).abs() < 1e-12);
    }
    let mu: f64 = 0.7;
    let g = ComputablePair::gaussian(mu).unwrap();
    for l in [-2.0, -0.5, 0.3, 2.5] {
        let want = -l * mu * mu / 2.0 + l * l * mu * mu / 2.0;
        assert!((g.log_mgf(Side::UnderQ, l) - want).abs() < 1e-12);
    }
}

#[test]
fn exponent_examples() {
    let g = ComputablePair::gaussian(1.0).unwrap();
    assert!((e(&g, Side::UnderP, 1.0) - 0.125).abs() < 1e-15);
    let (p, q) = (0.6f64, 0.3f64);
    let b = ComputablePair::bernoulli(p, q).unwrap();
    let kl = |a: f64, b: f64| a * (a / b).ln() + (1.0 - a) * ((1.0 - a) / (1.0 - b)).ln();
    for tau in [-0.4, 0.0, 0.3, 0.6] {
        let alpha = (tau + ((1.0 - q) / (1.0 - p)).ln()) / (p * (1.0 - q) / (q * (1.0 - p))).ln();
        assert!((e(&b, Side::UnderP, tau) - kl(alpha, p)).abs() < 1e-12);
    }
}

#[test]
fn uc_examples() {
    let n = 10_000usize;
    let mu = (n as f64).powf(-0.3);
    let r = uc_membership(&ComputablePair::gaussian(mu).unwrap(), UcClass::C, n, 0.5).unwrap();
    assert!(r.satisfied && (r.margin - 1.0).abs() < 0.05, "{r:?}");
    let mut ratios = Vec::new();
    for n in [100usize, 10_000, 1_000_000] {
        let q = (n as f64).powf(-0.4);
        let r = uc_membership(&ComputablePair::bernoulli(2.0 * q, q).unwrap(), UcClass::C, n, 0.5).unwrap();
        assert!(r.satisfied);
        ratios.push(r.margin);
    }
    assert!(ratios.iter().all(|&x| x > 0.5 && x < 2.0), "{ratios:?}");
    let r = uc_membership(&ComputablePair::bernoulli(0.9, 0.1).unwrap(), UcClass::B, n, 0.5).unwrap();
    assert!(r.satisfied && r.witness.is_finite());
}

#[test]
fn counterexample_examples() {
    let c = entrywise_counterexample(10_000, 0.5).unwrap();
    assert!((c.tv_star - 1e-2).abs() < 1e-12 && (c.tv - 1e-1).abs() < 1e-12);
    let (a, b) = (c.kl_star.unwrap(), c.kl.unwrap());
    assert!(a / b < 10.0 && b / a < 10.0, "{a} {b}");
    let c0 = entrywise_counterexample(10_000, 0.0).unwrap();
    assert_eq!(c0.tv_star, c0.tv);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn legendre_shift_and_closed_forms(pair in any_pair(), u in 0.0f64..1.0) {
        let (lo, hi) = pair.llr_range();
        // Keeps the maximizing lambda inside the numeric search bracket.
        let (lo, hi) = (lo.max(-2.0 * pair.kl_qp()), hi.min(2.0 * pair.kl_pq()));
        let tau = lo + u * (hi - lo);
        let (ep, eq) = (e(&pair, Side::UnderP, tau), e(&pair, Side::UnderQ, tau));
        prop_assert!(ep >= 0.0 && eq >= 0.0);
        prop_assert!((eq - ep - tau).abs() <= 1e-8, "E_Q={eq} E_P={ep} tau={tau}");
        for side in [Side::UnderP, Side::UnderQ] {
            let closed = e(&pair, side, tau);
            let numeric = chernoff_exponent_numeric(&pair, ExponentQuery { side, tau });
            prop_assert!((closed - numeric).abs() <= 1e-6 * closed.max(1.0), "{side:?} {closed} {numeric}");
        }
    }

    #[test]
    fn mgf_shift(pair in any_pair()) {
        for i in 0..100 {
            let l = -3.0 + 6.0 * i as f64 / 99.0;
            let (a, b) = (pair.log_mgf(Side::UnderP, l), pair.log_mgf(Side::UnderQ, l + 1.0));
            prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1.0), "lambda={l}: {a} vs {b}");
        }
    }

    #[test]
    fn null_exponent_is_convex_with_minimum_at_null_mean(pair in any_pair()) {
        let (lo, hi) = pair.llr_range();
        let (lo, hi) = (lo.max(-3.0 * pair.kl_qp() - 1.0), hi.min(pair.kl_pq() + 1.0));
        let grid: Vec<f64> = (0..=60).map(|i| lo + (hi - lo) * i as f64 / 60.0).collect();
        let vals: Vec<f64> = grid.iter().map(|&t| e(&pair, Side::UnderQ, t)).collect();
        for w in vals.windows(3) {
            prop_assert!(w[0] + w[2] - 2.0 * w[1] >= -1e-8);
        }
        prop_assert!(e(&pair, Side::UnderQ, -pair.kl_qp()) <= 1e-8);
        prop_assert!(vals.iter().all(|&v| v >= -1e-12));
    }
}
